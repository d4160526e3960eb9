use covham_core::modes::{check_exclusion, green_oracle, initial_amplitudes, reconstruct_from_amplitudes};
use covham_core::{FieldKind, FourVector, GridConfig, ModeGrid, SpectralWindow};
use serde_json::json;

use super::{err, json_f64s, Ctx};

/// Probe directions around the particle.
const DIRECTIONS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// One probe: distance from the particle, reconstruction and closed form.
struct Probe {
    radius: f64,
    point: FourVector,
    field: f64,
    oracle: f64,
}

struct Profile {
    probes: Vec<Probe>,
    modes: usize,
}

impl Profile {
    fn relative_error(&self) -> f64 {
        self.probes.iter().map(|p| (p.field - p.oracle).abs() / p.oracle.abs()).fold(0.0, f64::max)
    }

    fn absolute_error(&self) -> f64 {
        self.probes.iter().map(|p| (p.field - p.oracle).abs()).fold(0.0, f64::max)
    }
}

fn probe_points(ctx: &Ctx, x0: f64, radii: &[f64]) -> Result<Vec<(f64, FourVector)>, String> {
    let sc = ctx.scenario;
    let w = &sc.worldlines[0];
    let tau = w.equal_time_crossing(x0).map_err(err)?;
    let centre = w.state(tau).0.spatial();
    let mut out = Vec::new();
    for &r in radii {
        for d in DIRECTIONS {
            let p = FourVector::from_parts(x0, std::array::from_fn(|i| centre[i] + r * d[i]));
            check_exclusion(&sc.worldlines, &p, sc.source.green.exclusion).map_err(err)?;
            out.push((r, p));
        }
    }
    Ok(out)
}

/// Time component of the reconstructed field against the closed form.
fn profile(ctx: &Ctx, cfg: &GridConfig, x0: f64, radii: &[f64]) -> Result<Profile, String> {
    let sc = ctx.scenario;
    let spec = &sc.spec;
    let grid = ModeGrid::build(cfg).map_err(err)?;
    let amps = initial_amplitudes(spec, &sc.worldlines, &grid, x0, None).map_err(err)?;
    let window = match sc.source.green.window_alpha {
        a if a > 0.0 => SpectralWindow::Gaussian { alpha: a },
        _ => SpectralWindow::None,
    };
    let mut probes = Vec::new();
    for (radius, point) in probe_points(ctx, x0, radii)? {
        let field = reconstruct_from_amplitudes(spec, &grid, &amps, &point, window).map_err(err)?[0].re;
        let oracle = green_oracle(spec, &sc.worldlines, &point).map_err(err)?[0];
        if oracle == 0.0 {
            return Err(format!("closed form vanishes at r = {radius}; choose a later evaluation time"));
        }
        probes.push(Probe { radius, point, field, oracle });
    }
    Ok(Profile { probes, modes: grid.len() })
}

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    if !matches!(sc.spec.kind, FieldKind::Scalar | FieldKind::Em) || sc.worldlines.is_empty() {
        return;
    }
    let green = &sc.source.green;
    let x0 = green.x0.unwrap_or(sc.x0_end());
    let radii = green.radii.clone();

    let main = profile(ctx, &sc.grid, x0, &radii);
    let rows: Vec<Vec<f64>> = main
        .as_ref()
        .map(|p| {
            p.probes
                .iter()
                .map(|q| vec![q.radius, q.point[1], q.point[2], q.point[3], q.field, q.oracle])
                .collect()
        })
        .unwrap_or_default();

    ctx.check("green.relative_error", "green", |_| {
        let p = main.as_ref().map_err(|e| e.clone())?;
        Ok((
            p.relative_error(),
            vec![
                ("absolute_error", json!(p.absolute_error())),
                ("x0", json!(x0)),
                ("radii", json_f64s(&radii)),
                ("modes", json!(p.modes)),
                ("window_alpha", json!(green.window_alpha)),
                ("exclusion", json!(green.exclusion)),
            ],
        ))
    });

    if sc.spec.kind == FieldKind::Scalar {
        ctx.check("green.yukawa_ratio", "green", |c| {
            let doubled: Vec<f64> = radii.iter().map(|r| 2.0 * r).collect();
            let near = profile(c, &sc.grid, x0, &radii)?;
            let far = profile(c, &sc.grid, x0, &doubled)?;
            let kappa = sc.spec.kappa;
            let mut worst: f64 = 0.0;
            for (a, b) in near.probes.iter().zip(&far.probes) {
                let expected = (-kappa * a.radius).exp() / 2.0;
                worst = worst.max((b.field / a.field / expected - 1.0).abs());
            }
            Ok((worst, vec![("kappa", json!(kappa)), ("radii", json_f64s(&radii))]))
        });
    }

    if !green.ladder.is_empty() {
        let mut ladder_rows = Vec::new();
        let ladder: Result<Vec<(f64, usize, f64)>, String> = green
            .ladder
            .iter()
            .map(|&(kmax, n)| {
                let cfg = GridConfig { kmax, n_per_axis: n, ..sc.grid };
                profile(ctx, &cfg, x0, &radii).map(|p| (kmax, n, p.relative_error()))
            })
            .collect();
        if let Ok(levels) = &ladder {
            ladder_rows = levels.iter().map(|&(k, n, e)| vec![k, n as f64, e]).collect();
        }
        ctx.check("green.ladder_max", "green", |_| {
            let levels = ladder.as_ref().map_err(|e| e.clone())?;
            let worst = levels.iter().map(|l| l.2).fold(0.0, f64::max);
            Ok((worst, vec![("errors", json_f64s(&levels.iter().map(|l| l.2).collect::<Vec<_>>()))]))
        });
        ctx.check("green.monotone", "monotone", |_| {
            let levels = ladder.as_ref().map_err(|e| e.clone())?;
            let increase = levels.windows(2).map(|p| (p[1].2 - p[0].2).max(0.0)).fold(0.0, f64::max);
            Ok((increase, vec![("errors", json_f64s(&levels.iter().map(|l| l.2).collect::<Vec<_>>()))]))
        });
        ctx.table("green_ladder", &["kmax", "n_per_axis", "relative_error"], ladder_rows);
    }

    ctx.table("green_profile", &["r", "x1", "x2", "x3", "reconstructed", "closed_form"], rows);
}
