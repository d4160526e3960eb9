use covham_core::canonical::{
    dw_image_j, from_canonical, hamilton_residual, position_hamilton_residual, to_canonical, CanonicalGauge,
    PointFields,
};
use covham_core::field::FieldSpec;
use covham_core::modes::{evolve_amplitudes, initial_amplitudes};
use covham_core::{AmplitudePair, EvolveConfig, FieldKind, FourVector, ModeGrid, C64};
use rand::Rng;
use serde_json::json;

use super::{err, json_f64s, random_free, subset, CheckResult, Ctx};

const FREE_MODES: usize = 32;
const SOURCED_MODES: usize = 1024;
const PLANE_WAVES: usize = 4;
const STENCIL_STEP: f64 = 1e-3;

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    let grid = match ModeGrid::build(&sc.grid) {
        Ok(g) => g,
        Err(e) => {
            ctx.check("hamilton.grid", "hamilton_free", |_| Err(err(e)));
            return;
        }
    };
    let spec = sc.spec;
    let z = sc.gauge_z;

    ctx.check("hamilton.roundtrip", "roundtrip", |c| {
        let mut rng = c.rng("roundtrip");
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let mode = &grid.modes[rng.gen_range(0..grid.len())];
            let g = CanonicalGauge::fixed(&spec, &mode.k, z).map_err(err)?;
            let a = random_free(&spec, &mode.k, &mut rng)?;
            let cp = to_canonical(&a, &mode.k, &g, &spec).map_err(err)?;
            let back = from_canonical(&cp, &mode.k, &g, &spec).map_err(err)?;
            worst = worst.max(back.max_abs_diff(&a));
        }
        Ok((worst, vec![("states", json!(1000))]))
    });

    ctx.check("hamilton.gauge_invariance", "gauge_invariance", |c| {
        let mut rng = c.rng("gauge");
        let mut worst: f64 = 0.0;
        let x = FourVector::from_parts(sc.x0_end(), [0.4, -0.3, 0.2]);
        for mode in subset(&grid, 8).modes {
            let a = random_free(&spec, &mode.k, &mut rng)?;
            let base = CanonicalGauge::fixed(&spec, &mode.k, z).map_err(err)?;
            let j0 = dw_image_j(&spec, &a, &mode.k, &x, &sc.worldlines, &base).map_err(err)?;
            for _ in 0..20 {
                let rotated = z * C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                let g = CanonicalGauge::fixed(&spec, &mode.k, rotated).map_err(err)?;
                let j = dw_image_j(&spec, &a, &mode.k, &x, &sc.worldlines, &g).map_err(err)?;
                worst = worst.max((j - j0).abs() / (1.0 + j0.abs()));
            }
        }
        Ok((worst, vec![("phases", json!(20))]))
    });

    let free_grid = subset(&grid, FREE_MODES);
    ctx.check("hamilton.free", "hamilton_free", |c| free_residual(c, &spec, &free_grid, z));
    ctx.check("hamilton.j_conservation", "j_conservation", |c| free_j_drift(c, &spec, &free_grid, z));
    ctx.check("hamilton.position", "position_hamilton", |c| position_residual(c, &spec, &grid));

    if sc.worldlines.is_empty() {
        return;
    }
    let mut rows = Vec::new();
    let sourced = subset(&grid, SOURCED_MODES);
    ctx.check("hamilton.order", "hamilton_order", |c| sourced_order(c, &sourced, &mut rows));
    ctx.table("hamilton_convergence", &["steps", "step", "residual"], rows);
}

fn free_residual(c: &Ctx, spec: &FieldSpec, grid: &ModeGrid, z: C64) -> CheckResult {
    let sc = c.scenario;
    let mut rng = c.rng("free");
    let init: Vec<AmplitudePair> =
        grid.modes.iter().map(|m| random_free(spec, &m.k, &mut rng)).collect::<Result<_, _>>()?;
    let cfg = EvolveConfig::new(sc.x0_start(), sc.x0_end(), sc.steps());
    let traj = evolve_amplitudes(spec, &[], grid, &cfg, &init).map_err(err)?;
    let n = traj.samples();
    let samples = [(1, [0.1, 0.2, -0.3]), (n / 2, [1.0, -0.5, 0.25]), (n - 2, [0.0, 0.0, 2.0])];
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for (m, mode) in grid.modes.iter().enumerate() {
        let g = CanonicalGauge::fixed(spec, &mode.k, z).map_err(err)?;
        let (a, b) = hamilton_residual(&[], &traj, m, &mode.k, &g, &samples).map_err(err)?;
        r1 = r1.max(a);
        r2 = r2.max(b);
    }
    Ok((r1.max(r2), vec![("r1", json!(r1)), ("r2", json!(r2)), ("modes", json!(grid.len()))]))
}

fn free_j_drift(c: &Ctx, spec: &FieldSpec, grid: &ModeGrid, z: C64) -> CheckResult {
    let sc = c.scenario;
    let mut rng = c.rng("free-j");
    let init: Vec<AmplitudePair> =
        grid.modes.iter().map(|m| random_free(spec, &m.k, &mut rng)).collect::<Result<_, _>>()?;
    let cfg = EvolveConfig::new(sc.x0_start(), sc.x0_end(), sc.steps());
    let traj = evolve_amplitudes(spec, &[], grid, &cfg, &init).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (m, mode) in grid.modes.iter().enumerate() {
        let g = CanonicalGauge::fixed(spec, &mode.k, z).map_err(err)?;
        let j_at = |n: usize| {
            let x = FourVector::from_parts(traj.x0[n], [0.2, 0.1, -0.4]);
            dw_image_j(spec, &traj.values[m][n].at_point(&mode.k, &x), &mode.k, &x, &[], &g)
        };
        let j0 = j_at(0).map_err(err)?;
        for n in 1..traj.samples() {
            worst = worst.max((j_at(n).map_err(err)? - j0).abs() / (1.0 + j0.abs()));
        }
    }
    Ok((worst, vec![]))
}

/// Free superposition of a few grid modes evaluated with exact derivatives.
fn plane_wave_fields(spec: &FieldSpec, modes: &[(FourVector, f64, AmplitudePair)], x: &FourVector) -> PointFields {
    let n = spec.components();
    let i = C64::new(0.0, 1.0);
    let mut value = vec![C64::new(0.0, 0.0); n];
    let mut derivs = vec![[C64::new(0.0, 0.0); 4]; n];
    for (k, w, a) in modes {
        let kl = k.lower();
        let e = C64::from_polar(*w, -k.dot(x));
        for c in 0..n {
            let (p, m) = if spec.kind == FieldKind::Em {
                // Real potential: C e^{−ik·x} + c.c.
                (a.plus[c] * e, (a.plus[c] * e).conj())
            } else {
                (a.plus[c] * e, a.minus[c] * e.conj())
            };
            value[c] += p + m;
            for mu in 0..4 {
                derivs[c][mu] += i * kl[mu] * (m - p);
            }
        }
    }
    PointFields::from_derivatives(spec, value, derivs)
}

fn position_residual(c: &Ctx, spec: &FieldSpec, grid: &ModeGrid) -> CheckResult {
    let mut rng = c.rng("position");
    let picked = subset(grid, PLANE_WAVES);
    let modes: Vec<_> = picked
        .modes
        .iter()
        .map(|m| random_free(spec, &m.k, &mut rng).map(|a| (m.k, 1.0, a)))
        .collect::<Result<_, _>>()?;
    let sample = |y: &FourVector| plane_wave_fields(spec, &modes, y);
    let mut worst: f64 = 0.0;
    for x in [[0.3, 0.1, -0.2, 0.4], [1.7, -1.0, 0.5, 0.0], [-0.4, 2.0, 1.0, -1.5]] {
        let r = position_hamilton_residual(spec, &sample, &FourVector(x), STENCIL_STEP, &[], 0.0).map_err(err)?;
        worst = worst.max(r);
    }
    Ok((worst, vec![("plane_waves", json!(modes.len())), ("stencil_step", json!(STENCIL_STEP))]))
}

/// Residuals at the window midpoint under successive step halving; the
/// measured value is the distance of the fitted slope from 2.
fn sourced_order(c: &Ctx, grid: &ModeGrid, rows: &mut Vec<Vec<f64>>) -> CheckResult {
    let sc = c.scenario;
    let spec = &sc.spec;
    let w = &sc.worldlines;
    let x_mid = 0.5 * (sc.x0_start() + sc.x0_end());
    let base = sc.steps() + sc.steps() % 2;
    let start = initial_amplitudes(spec, w, grid, sc.x0_start(), None).map_err(err)?;
    let mut levels = Vec::new();
    for level in 0..3 {
        let steps = base << level;
        let traj = evolve_amplitudes(spec, w, grid, &EvolveConfig::new(sc.x0_start(), sc.x0_end(), steps), &start)
            .map_err(err)?;
        let n = traj.sample_index(x_mid).map_err(err)?;
        let mut worst: f64 = 0.0;
        for (m, mode) in grid.modes.iter().enumerate() {
            let g = CanonicalGauge::fixed(spec, &mode.k, sc.gauge_z).map_err(err)?;
            let (r1, r2) =
                hamilton_residual(w, &traj, m, &mode.k, &g, &[(n, [0.35, -0.25, 0.6]), (n, [-1.1, 0.4, 0.2])])
                    .map_err(err)?;
            worst = worst.max(r1).max(r2);
        }
        rows.push(vec![steps as f64, traj.spacing, worst]);
        levels.push((traj.spacing, worst));
    }
    let floor = 1e-13;
    if levels.iter().all(|(_, r)| *r < floor) {
        return Err("no source active at the window midpoint; residuals are at round-off".into());
    }
    let slopes: Vec<f64> = levels.windows(2).map(|p| (p[0].1 / p[1].1).ln() / (p[0].0 / p[1].0).ln()).collect();
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    Ok((
        (slope - 2.0).abs(),
        vec![
            ("slope", json!(slope)),
            ("slopes", json_f64s(&slopes)),
            ("residuals", json_f64s(&levels.iter().map(|l| l.1).collect::<Vec<_>>())),
            ("expected_order", json!(2)),
        ],
    ))
}
