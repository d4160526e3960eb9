use covham_core::field::DiracSpinor;
use covham_core::modes::{
    dirac_equation_residual, dirac_shell_defect, evolve_amplitudes, initial_amplitudes, pde_residual, source_rate,
};
use covham_core::{
    AmplitudePair, Branch, Coupling, DiracCoupling, EvolveConfig, FieldSpec, FourVector, GridConfig, ModeGrid,
    Worldline, C64,
};
use proptest::prelude::*;

fn free_amplitudes(spec: &FieldSpec, n: usize) -> Vec<AmplitudePair> {
    (0..n)
        .map(|i| {
            let mut a = AmplitudePair::zeros(spec);
            for (j, c) in a.plus.iter_mut().enumerate() {
                *c = C64::new(0.3 + 0.1 * i as f64, -0.2 * j as f64);
            }
            for (j, c) in a.minus.iter_mut().enumerate() {
                *c = C64::new(-0.1 * j as f64, 0.4);
            }
            a
        })
        .collect()
}

#[test]
fn free_moduli_are_conserved() {
    for spec in [FieldSpec::scalar(1.0, 1.0, 1.0), FieldSpec::em(1.0), FieldSpec::dirac(1.0, 1.0, 1.0)] {
        let grid = ModeGrid::build(&GridConfig::new(2.0, 3, spec.kappa)).unwrap();
        let init = free_amplitudes(&spec, grid.len());
        let traj = evolve_amplitudes(&spec, &[], &grid, &EvolveConfig::new(0.0, 25.0, 50), &init).unwrap();
        for (m, series) in traj.values.iter().enumerate() {
            for v in series {
                assert_eq!(v, &init[m]);
            }
        }
    }
}

#[test]
fn amplitudes_untouched_before_first_crossing() {
    let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
    let grid = ModeGrid::build(&GridConfig::new(2.0, 4, 1.0)).unwrap();
    let w = [Worldline::new_static(0, [0.5, 0.0, 0.0], Coupling::Strength(1.0)).switched_on_at(3.0)];
    let init = free_amplitudes(&spec, grid.len());
    let traj = evolve_amplitudes(&spec, &w, &grid, &EvolveConfig::new(0.0, 5.0, 40), &init).unwrap();
    for (m, series) in traj.values.iter().enumerate() {
        for (n, v) in series.iter().enumerate() {
            if traj.x0[n] < 3.0 {
                assert_eq!(v, &init[m]);
            }
        }
        assert_ne!(series.last().unwrap(), &init[m]);
    }
}

fn dirac_particle(label: usize, pos: [f64; 3]) -> Worldline {
    let xi = DiracCoupling {
        xi1: DiracSpinor([C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(0.2, 0.0), C64::new(0.0, -0.1)]),
        xi2: DiracSpinor([C64::new(0.0, 0.1), C64::new(0.3, 0.0), C64::new(0.0, 0.0), C64::new(0.1, 0.1)]),
        xi3: DiracSpinor::default(),
    };
    Worldline::new_uniform(label, FourVector::from_parts(0.0, pos), [0.1, -0.2, 0.05], Coupling::Dirac(xi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rates_superpose(
        p1 in prop::array::uniform3(-2.0f64..2.0),
        p2 in prop::array::uniform3(-2.0f64..2.0),
        v in prop::array::uniform3(-0.4f64..0.4),
        k in prop::array::uniform3(-3.0f64..3.0),
        x0 in 0.0f64..10.0,
    ) {
        let specs = [FieldSpec::scalar(1.0, 0.7, 1.0), FieldSpec::em(1.0), FieldSpec::tensor(2, 1.3, 0.4)];
        for spec in specs {
            let kappa = spec.kappa;
            let kv = FourVector::from_parts((kappa * kappa + k.iter().map(|c| c * c).sum::<f64>()).sqrt(), k);
            let a = Worldline::new_static(0, p1, Coupling::Strength(0.8));
            let b = Worldline::new_uniform(1, FourVector::from_parts(0.0, p2), v, Coupling::Strength(-1.3));
            for &br in &[Branch::Plus, Branch::Minus] {
                let both = source_rate(&spec, &[a.clone(), b.clone()], &kv, x0, br).unwrap();
                let ra = source_rate(&spec, std::slice::from_ref(&a), &kv, x0, br).unwrap();
                let rb = source_rate(&spec, std::slice::from_ref(&b), &kv, x0, br).unwrap();
                for i in 0..both.len() {
                    prop_assert!((both[i] - ra[i] - rb[i]).norm() <= 1e-12 * (1.0 + both[i].norm()));
                }
            }
        }
        let spec = FieldSpec::dirac(1.0, 1.0, 1.0);
        let kv = FourVector::from_parts((1.0 + k.iter().map(|c| c * c).sum::<f64>()).sqrt(), k);
        let (a, b) = (dirac_particle(0, p1), dirac_particle(1, p2));
        for &br in &[Branch::Plus, Branch::Minus] {
            let both = source_rate(&spec, &[a.clone(), b.clone()], &kv, x0, br).unwrap();
            let ra = source_rate(&spec, std::slice::from_ref(&a), &kv, x0, br).unwrap();
            let rb = source_rate(&spec, std::slice::from_ref(&b), &kv, x0, br).unwrap();
            for i in 0..4 {
                prop_assert!((both[i] - ra[i] - rb[i]).norm() <= 1e-12 * (1.0 + both[i].norm()));
            }
        }
    }
}

#[test]
fn dirac_sourced_amplitudes_lie_on_shell() {
    let spec = FieldSpec::dirac(1.0, 1.0, 1.0);
    let grid = ModeGrid::build(&GridConfig::new(2.5, 6, 1.0)).unwrap();
    let w = [dirac_particle(0, [0.2, 0.0, -0.3]).switched_on_at(0.0)];
    let zero = vec![AmplitudePair::zeros(&spec); grid.len()];
    let traj = evolve_amplitudes(&spec, &w, &grid, &EvolveConfig::new(0.0, 4.0, 80).endpoints_only(), &zero).unwrap();
    for (m, mode) in grid.modes.iter().enumerate() {
        let a = traj.values[m].last().unwrap();
        let scale = a.plus.iter().chain(&a.minus).map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dirac_shell_defect(&spec, &mode.k, a).unwrap() <= 1e-10 * scale.max(1.0));
    }
}

#[test]
fn dirac_equation_holds_off_the_worldline() {
    let spec = FieldSpec::dirac(1.0, 1.0, 1.0);
    let grid = ModeGrid::build(&GridConfig::new(3.0, 8, 1.0)).unwrap();
    let w = [dirac_particle(0, [0.0, 0.0, 0.0])];
    let amps = initial_amplitudes(&spec, &w, &grid, 2.0, None).unwrap();
    for x in [[1.0, 0.5, -0.3], [-1.2, 0.8, 0.4], [0.3, -1.5, 1.1]] {
        let r = dirac_equation_residual(&spec, &w, &grid, &amps, &FourVector::from_parts(2.0, x)).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}

#[test]
fn amplitude_equation_residual_is_second_order() {
    let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
    let grid = ModeGrid::build(&GridConfig::new(2.0, 3, 1.0)).unwrap();
    let w = [Worldline::new_static(0, [0.3, 0.0, 0.0], Coupling::Strength(1.0)).switched_on_at(0.0)];
    let zero = vec![AmplitudePair::zeros(&spec); grid.len()];
    let residual = |steps: usize| {
        let traj = evolve_amplitudes(&spec, &w, &grid, &EvolveConfig::new(0.0, 2.0, steps), &zero).unwrap();
        let n = steps / 2;
        (0..grid.len())
            .map(|m| pde_residual(&w, &grid.modes[m].k, &traj, m, &[(n, [0.1, 0.2, 0.3])]).unwrap())
            .fold(0.0, f64::max)
    };
    let (r1, r2) = (residual(40), residual(80));
    let order = (r1 / r2).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}, residuals {r1} {r2}");
}

#[test]
fn evolution_across_a_switch_on_matches_the_closed_form() {
    let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
    let grid = ModeGrid::build(&GridConfig::new(2.0, 4, 1.0)).unwrap();
    // Appears at x⁰ = 0.37, between nodes, and moves.
    let w = [Worldline::new_uniform(0, FourVector::default(), [0.2, -0.1, 0.0], Coupling::Strength(1.0))
        .switched_on_at(0.37 * (1.0f64 - 0.05).sqrt())];
    let zero = vec![AmplitudePair::zeros(&spec); grid.len()];
    let exact = initial_amplitudes(&spec, &w, &grid, 2.0, None).unwrap();
    let error = |steps: usize| {
        let traj = evolve_amplitudes(&spec, &w, &grid, &EvolveConfig::new(0.0, 2.0, steps).endpoints_only(), &zero)
            .unwrap();
        (0..grid.len()).map(|m| traj.values[m][1].max_abs_diff(&exact[m])).fold(0.0, f64::max)
    };
    let (e1, e2) = (error(10), error(20));
    assert!(e1 < 1e-4, "{e1}");
    assert!((e1 / e2).log2() > 3.5, "errors {e1} {e2}");
}
