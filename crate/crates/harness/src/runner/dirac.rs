use covham_core::field::{gamma_matrices, shell_projector};
use covham_core::kinematics::eta;
use covham_core::modes::{
    check_exclusion, dirac_equation_residual, dirac_shell_defect, evolve_amplitudes, initial_amplitudes,
};
use covham_core::{EvolveConfig, FieldKind, FourVector, Mat4, ModeGrid, C64};
use rand::Rng;
use serde_json::json;

use super::{err, subset, Ctx};

const PROJECTOR_SAMPLES: usize = 100;
const SHELL_MODES: usize = 64;
/// Offsets of the residual probes from the first particle.
const PROBE_OFFSETS: [[f64; 3]; 3] = [[1.0, 0.5, -0.3], [-1.2, 0.8, 0.4], [0.3, -1.5, 1.1]];

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    let g = gamma_matrices();

    ctx.check("dirac.clifford", "clifford", |_| {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = g[mu] * g[nu] + g[nu] * g[mu];
                let expected =
                    if mu == nu { Mat4::identity().scale(C64::from(2.0 * eta(mu))) } else { Mat4::zero() };
                worst = worst.max(anti.max_abs_diff(&expected));
            }
        }
        Ok((worst, vec![]))
    });

    ctx.check("dirac.hermiticity", "hermiticity", |_| {
        let g0 = g[0];
        let mut worst = g0.adjoint().max_abs_diff(&g0);
        for gi in &g[1..] {
            worst = worst.max(gi.adjoint().max_abs_diff(&gi.scale(C64::from(-1.0))));
            // γ⁰γ^μγ⁰ = γ^μ†
            worst = worst.max((g0 * *gi * g0).max_abs_diff(&gi.adjoint()));
        }
        Ok((worst, vec![]))
    });

    ctx.check("dirac.projectors", "projector", |c| {
        let kappa = if sc.spec.kind == FieldKind::Dirac && sc.spec.kappa > 0.0 { sc.spec.kappa } else { 1.0 };
        let mut rng = c.rng("projectors");
        let mut worst: f64 = 0.0;
        for _ in 0..PROJECTOR_SAMPLES {
            let ks: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let k0 = (kappa * kappa + ks.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let k = FourVector::from_parts(k0, ks);
            let p = shell_projector(&k, kappa, 1.0, 1e-9).map_err(err)?;
            let m = shell_projector(&k, kappa, -1.0, 1e-9).map_err(err)?;
            worst = worst
                .max((p * p).max_abs_diff(&p))
                .max((m * m).max_abs_diff(&m))
                .max((p * m).max_abs_diff(&Mat4::zero()))
                .max((p + m).max_abs_diff(&Mat4::identity()));
        }
        Ok((worst, vec![("kappa", json!(kappa)), ("samples", json!(PROJECTOR_SAMPLES))]))
    });

    if sc.spec.kind != FieldKind::Dirac || sc.worldlines.is_empty() {
        return;
    }
    let spec = sc.spec;
    let w = &sc.worldlines;
    let grid = match ModeGrid::build(&sc.grid) {
        Ok(g) => g,
        Err(e) => {
            ctx.check("dirac.grid", "dirac_shell", |_| Err(err(e)));
            return;
        }
    };

    ctx.check("dirac.shell", "dirac_shell", |_| {
        let tracked = subset(&grid, SHELL_MODES);
        let start = initial_amplitudes(&spec, w, &tracked, sc.x0_start(), None).map_err(err)?;
        let cfg = EvolveConfig::new(sc.x0_start(), sc.x0_end(), sc.steps());
        let traj = evolve_amplitudes(&spec, w, &tracked, &cfg, &start).map_err(err)?;
        let mut worst: f64 = 0.0;
        for (m, mode) in tracked.modes.iter().enumerate() {
            for a in &traj.values[m] {
                let scale = a.plus.iter().chain(&a.minus).map(|c| c.norm()).fold(0.0, f64::max);
                worst = worst.max(dirac_shell_defect(&spec, &mode.k, a).map_err(err)? / scale.max(1.0));
            }
        }
        Ok((worst, vec![("modes", json!(tracked.len())), ("samples", json!(traj.samples()))]))
    });

    ctx.check("dirac.equation_residual", "dirac_residual", |_| {
        let x0 = sc.x0_end();
        let tau = w[0].equal_time_crossing(x0).map_err(err)?;
        let centre = w[0].state(tau).0.spatial();
        let amps = initial_amplitudes(&spec, w, &grid, x0, None).map_err(err)?;
        let mut worst: f64 = 0.0;
        for d in PROBE_OFFSETS {
            let x = FourVector::from_parts(x0, std::array::from_fn(|i| centre[i] + d[i]));
            check_exclusion(w, &x, sc.source.green.exclusion).map_err(err)?;
            worst = worst.max(dirac_equation_residual(&spec, w, &grid, &amps, &x).map_err(err)?);
        }
        Ok((worst, vec![("probes", json!(PROBE_OFFSETS.len())), ("x0", json!(x0))]))
    });
}
