use covham_core::modes::{evolve_amplitudes, initial_amplitudes, pde_residual, source_rate};
use covham_core::{AmplitudePair, Branch, EvolveConfig, ModeGrid};
use serde_json::json;

use super::{err, subset, Ctx};

/// Modes followed sample by sample.
const TRACKED_MODES: usize = 32;

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    let grid = match ModeGrid::build(&sc.grid) {
        Ok(g) => g,
        Err(e) => {
            ctx.check("simulate.grid", "causality", |_| Err(err(e)));
            return;
        }
    };
    let spec = sc.spec;
    let w = &sc.worldlines;
    let cfg = EvolveConfig::new(sc.x0_start(), sc.x0_end(), sc.steps());

    ctx.check("simulate.history", "history", |_| {
        let start = initial_amplitudes(&spec, w, &grid, sc.x0_start(), None).map_err(err)?;
        let traj = evolve_amplitudes(&spec, w, &grid, &cfg.endpoints_only(), &start).map_err(err)?;
        let end = initial_amplitudes(&spec, w, &grid, sc.x0_end(), None).map_err(err)?;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut finite = true;
        for (m, series) in traj.values.iter().enumerate() {
            let last = series.last().ok_or("empty trajectory")?;
            finite &= last.is_finite();
            worst = worst.max(last.max_abs_diff(&end[m]));
            scale = scale.max(end[m].plus.iter().chain(&end[m].minus).map(|c| c.norm()).fold(0.0, f64::max));
        }
        if !finite {
            return Err("non-finite amplitudes".into());
        }
        Ok((worst / scale.max(1.0), vec![("modes", json!(grid.len()))]))
    });

    let tracked = subset(&grid, TRACKED_MODES);
    let traj = initial_amplitudes(&spec, w, &tracked, sc.x0_start(), None)
        .and_then(|start| evolve_amplitudes(&spec, w, &tracked, &cfg, &start).map(|t| (start, t)));
    let (start, traj) = match traj {
        Ok(v) => v,
        Err(e) => {
            ctx.check("simulate.evolve", "causality", |_| Err(err(e)));
            return;
        }
    };

    ctx.check("simulate.causality", "causality", |_| {
        let first = w.iter().map(|wl| wl.first_time()).fold(f64::INFINITY, f64::min);
        let mut worst: f64 = 0.0;
        let mut checked = 0usize;
        for (m, series) in traj.values.iter().enumerate() {
            for (n, v) in series.iter().enumerate() {
                if traj.x0[n] < first {
                    worst = worst.max(v.max_abs_diff(&start[m]));
                    checked += 1;
                }
            }
        }
        Ok((worst, vec![("samples_before_first_crossing", json!(checked))]))
    });

    ctx.check("simulate.superposition", "superposition", |_| {
        let mut worst: f64 = 0.0;
        let n = traj.samples();
        for idx in [0, n / 3, (2 * n) / 3, n - 1] {
            let x0 = traj.x0[idx];
            for mode in &tracked.modes {
                for &b in covham_core::modes::branches(&spec) {
                    let all = source_rate(&spec, w, &mode.k, x0, b).map_err(err)?;
                    let mut sum = vec![covham_core::C64::new(0.0, 0.0); all.len()];
                    for single in w {
                        let r = source_rate(&spec, std::slice::from_ref(single), &mode.k, x0, b).map_err(err)?;
                        for (s, v) in sum.iter_mut().zip(r) {
                            *s += v;
                        }
                    }
                    for (a, s) in all.iter().zip(&sum) {
                        worst = worst.max((a - s).norm() / (1.0 + a.norm()));
                    }
                }
            }
        }
        Ok((worst, vec![("particles", json!(w.len()))]))
    });

    ctx.check("simulate.pde_residual", "pde_residual", |_| {
        let n = traj.samples();
        let samples: Vec<(usize, [f64; 3])> =
            [n / 4, n / 2, (3 * n) / 4].iter().filter(|&&i| i > 0 && i + 1 < n).map(|&i| (i, [0.3, -0.2, 0.5])).collect();
        if samples.is_empty() {
            return Err("time window too short for central differences".into());
        }
        let mut worst: f64 = 0.0;
        for (m, mode) in tracked.modes.iter().enumerate() {
            worst = worst.max(pde_residual(w, &mode.k, &traj, m, &samples).map_err(err)?);
        }
        Ok((worst, vec![("step", json!(traj.spacing))]))
    });

    let rows: Vec<Vec<f64>> = (0..traj.samples())
        .map(|n| {
            let peak = traj
                .values
                .iter()
                .map(|s| {
                    let a: &AmplitudePair = &s[n];
                    a.branch(Branch::Plus).iter().map(|c| c.norm()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            vec![traj.x0[n], peak]
        })
        .collect();
    ctx.table("amplitude_history", &["x0", "max_abs_plus"], rows);
}
