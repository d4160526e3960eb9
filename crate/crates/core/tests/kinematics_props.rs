use covham_core::kinematics::{equal_time_crossing, minkowski_dot, worldline_state};
use covham_core::{Coupling, FourVector, GridConfig, GridShape, ModeGrid, Worldline};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = FourVector> {
    prop::array::uniform4(-10.0f64..10.0).prop_map(FourVector)
}

proptest! {
    #[test]
    fn dot_is_symmetric(a in vec4(), b in vec4()) {
        prop_assert_eq!(minkowski_dot(&a, &b), minkowski_dot(&b, &a));
    }

    #[test]
    fn dot_is_bilinear(a in vec4(), b in vec4(), c in vec4(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let lhs = minkowski_dot(&(a * alpha + b * beta), &c);
        let rhs = alpha * minkowski_dot(&a, &c) + beta * minkowski_dot(&b, &c);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    #[test]
    fn grid_modes_are_on_shell(kmax in 0.5f64..6.0, n in 2usize..9, kappa in 0.0f64..3.0) {
        let grid = ModeGrid::build(&GridConfig::new(kmax, n, kappa)).unwrap();
        for m in &grid.modes {
            prop_assert!((m.k.norm_sq() - kappa * kappa).abs() < 1e-12 * (1.0 + m.k[0] * m.k[0]));
            prop_assert!(m.weight > 0.0);
        }
    }

    #[test]
    fn crossing_reproduces_time(
        x0 in -5.0f64..50.0,
        pos in prop::array::uniform3(-3.0f64..3.0),
        vel in prop::array::uniform3(-0.5f64..0.5),
        start in -20.0f64..0.0,
    ) {
        let anchor = FourVector::from_parts(0.3, pos);
        let lines = [
            Worldline::new_static(0, pos, Coupling::Strength(1.0)),
            Worldline::new_uniform(1, anchor, vel, Coupling::Strength(1.0)),
            Worldline::new_circular(2, anchor, 0.7, 0.4, Coupling::Strength(1.0)).switched_on_at(start),
        ];
        for w in &lines {
            if let Ok(tau) = equal_time_crossing(w, x0) {
                let (u, udot) = worldline_state(w, tau);
                prop_assert!((u[0] - x0).abs() < 1e-12 * (1.0 + x0.abs()));
                prop_assert!((udot.norm_sq() - 1.0).abs() < 1e-12);
            }
        }
    }
}

/// Σ w 2k⁰ e^{−|k|²} over the full cube [−1, 1]³.
fn gaussian_sum(n: usize) -> f64 {
    let grid = ModeGrid::build(&GridConfig::new(1.0, n, 1.0).with_shape(GridShape::Cube)).unwrap();
    grid.modes.iter().map(|m| m.weight * 2.0 * m.k[0] * (-(m.k[0] * m.k[0] - 1.0)).exp()).sum()
}

#[test]
fn refinement_is_second_order() {
    // Undoing 2k⁰ leaves ∫_{[−1,1]³} d³k e^{−|k|²}/(2π)³ = (√π erf 1)³/(2π)³.
    let erf1 = 0.842_700_792_949_714_9_f64;
    let exact = (std::f64::consts::PI.sqrt() * erf1).powi(3) / (2.0 * std::f64::consts::PI).powi(3);
    let coarse = (gaussian_sum(20) - exact).abs();
    let fine = (gaussian_sum(40) - exact).abs();
    let order = (coarse / fine).log2();
    assert!((order - 2.0).abs() < 0.1, "observed order {order}");
}
