use std::sync::Arc;

use covham_core::brackets::{
    bracket_observable, canonical_pair_bracket, dw_conservation_check, generator_observable, jacobi_defect,
    poisson_bracket, Observable, PoissonStructure,
};
use covham_core::canonical::{to_canonical, CanonicalGauge};
use covham_core::kinematics::eta;
use covham_core::modes::branches;
use covham_core::{Branch, FieldKind, FieldSpec, FourVector, ModeGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{err, random_free, subset, Ctx};

const BRACKET_MODES: usize = 27;

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random linear or quadratic observable with a sparse symmetric Hessian.
fn random_observable(rng: &mut ChaCha8Rng, n: usize) -> Observable {
    let linear = random_state(rng, n);
    let offset = rng.gen_range(-1.0..1.0);
    if rng.gen_bool(0.3) {
        return Observable::Linear { gradient: linear, offset };
    }
    let mut hessian = Vec::new();
    for _ in 0..24 {
        let (i, j, m) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
        hessian.push((i, j, m));
        if i != j {
            hessian.push((j, i, m));
        }
    }
    Observable::Quadratic { hessian, linear, offset }
}

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    let grid = match ModeGrid::build(&sc.grid) {
        Ok(g) => subset(&g, BRACKET_MODES),
        Err(e) => {
            ctx.check("bracket.grid", "antisymmetry", |_| Err(err(e)));
            return;
        }
    };
    // Spinors and tensors of rank two or more have no bracket here; the
    // algebra is checked on a scalar sector with the same mass parameter.
    let proxy = sc.spec.kind == FieldKind::Dirac || sc.spec.rank() > 1;
    let spec = if proxy { FieldSpec::tensor(0, 1.0, sc.spec.kappa) } else { sc.spec };
    let structure = match PoissonStructure::new(&spec, &grid, sc.bracket_v) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            ctx.check("bracket.structure", "antisymmetry", |_| Err(err(e)));
            return;
        }
    };
    let s = &*structure;
    let dim = s.dim();
    let note = move |mut meta: Vec<(&'static str, serde_json::Value)>| {
        meta.push(("state_dim", json!(dim)));
        if proxy {
            meta.push(("structure", json!("scalar sector standing in for the scenario field")));
        }
        meta
    };

    ctx.check("bracket.antisymmetry", "antisymmetry", |c| {
        let mut rng = c.rng("antisymmetry");
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (a, b) = (random_observable(&mut rng, dim), random_observable(&mut rng, dim));
            let x = random_state(&mut rng, dim);
            let ab = poisson_bracket(&a, &b, s, &x).map_err(err)?;
            let ba = poisson_bracket(&b, &a, s, &x).map_err(err)?;
            worst = worst.max((ab + ba).abs());
        }
        Ok((worst, note(vec![("pairs", json!(100))])))
    });

    ctx.check("bracket.bilinearity", "bilinearity", |c| {
        let mut rng = c.rng("bilinearity");
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let (a, b, cc) =
                (random_observable(&mut rng, dim), random_observable(&mut rng, dim), random_observable(&mut rng, dim));
            let (alpha, beta) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let x = random_state(&mut rng, dim);
            let lhs = poisson_bracket(&a.clone().scaled(alpha).plus(b.clone().scaled(beta)), &cc, s, &x).map_err(err)?;
            let ta = alpha * poisson_bracket(&a, &cc, s, &x).map_err(err)?;
            let tb = beta * poisson_bracket(&b, &cc, s, &x).map_err(err)?;
            worst = worst.max((lhs - ta - tb).abs() / (1.0 + ta.abs() + tb.abs()));
        }
        Ok((worst, note(vec![])))
    });

    ctx.check("bracket.leibniz", "leibniz", |c| {
        let mut rng = c.rng("leibniz");
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let (a, b, cc) =
                (random_observable(&mut rng, dim), random_observable(&mut rng, dim), random_observable(&mut rng, dim));
            let x = random_state(&mut rng, dim);
            let lhs = poisson_bracket(&a.clone().times(b.clone()), &cc, s, &x).map_err(err)?;
            let ta = a.value(&x) * poisson_bracket(&b, &cc, s, &x).map_err(err)?;
            let tb = poisson_bracket(&a, &cc, s, &x).map_err(err)? * b.value(&x);
            worst = worst.max((lhs - ta - tb).abs() / (1.0 + ta.abs() + tb.abs()));
        }
        Ok((worst, note(vec![])))
    });

    ctx.check("bracket.jacobi", "jacobi", |c| {
        let mut rng = c.rng("jacobi");
        let (mut worst, mut absolute): (f64, f64) = (0.0, 0.0);
        for _ in 0..20 {
            let o: Vec<_> = (0..3).map(|_| random_observable(&mut rng, dim)).collect();
            let x = random_state(&mut rng, dim);
            let defect = jacobi_defect(&o[0], &o[1], &o[2], &structure, &x).map_err(err)?;
            let mut size = 1.0;
            for i in 0..3 {
                let inner = bracket_observable(o[(i + 1) % 3].clone(), o[(i + 2) % 3].clone(), structure.clone());
                size += poisson_bracket(&o[i], &inner, s, &x).map_err(err)?.abs();
            }
            worst = worst.max(defect / size);
            absolute = absolute.max(defect);
        }
        Ok((
            worst,
            note(vec![
                ("triples", json!(20)),
                ("absolute_defect", json!(absolute)),
                ("normalisation", json!("1 + sum of term magnitudes")),
            ]),
        ))
    });

    ctx.check("bracket.canonical_pair", "canonical_pair", |_| {
        let vv = s.v.norm_sq();
        let mut worst: f64 = 0.0;
        for (m, mode) in grid.modes.iter().enumerate() {
            for mu in 0..4 {
                for nu in 0..4 {
                    let b = canonical_pair_bracket(mu, nu, &mode.k, &mode.k, s).map_err(err)?;
                    let expected = if mu == nu { vv * eta(mu) / grid.modes[m].weight } else { 0.0 };
                    worst = worst.max((b - expected).abs());
                }
            }
            let other = &grid.modes[(m + 1) % grid.len()].k;
            if grid.len() > 1 {
                worst = worst.max(canonical_pair_bracket(0, 0, &mode.k, other, s).map_err(err)?.abs());
            }
        }
        Ok((worst, note(vec![("v_dot_v", json!(vv))])))
    });

    ctx.check("bracket.pair_from_general", "pair_consistency", |_| {
        let x = vec![0.0; dim];
        let mut worst: f64 = 0.0;
        let comps = if spec.kind == FieldKind::Em || spec.rank() == 1 { 4 } else { 1 };
        for (m, mode) in grid.modes.iter().enumerate() {
            for nu in 0..comps {
                let general =
                    poisson_bracket(&s.q(m, Branch::Plus, nu), &s.conjugate_momentum(m, Branch::Plus, nu), s, &x)
                        .map_err(err)?;
                let pair = canonical_pair_bracket(nu, nu, &mode.k, &mode.k, s).map_err(err)?;
                let scale = (0..4).map(|mu| s.v[mu] * s.v[mu]).sum::<f64>() / mode.weight;
                worst = worst.max((general - pair).abs() / scale.max(f64::MIN_POSITIVE));
            }
        }
        Ok((worst, note(vec![])))
    });

    ctx.check("bracket.vector_scaling", "vector_scaling", |c| {
        let mut rng = c.rng("scaling");
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let lambda = rng.gen_range(-4.0..4.0);
            let scaled = s.with_vector(s.v * lambda);
            let (a, b) = (random_observable(&mut rng, dim), random_observable(&mut rng, dim));
            let x = random_state(&mut rng, dim);
            let base = poisson_bracket(&a, &b, s, &x).map_err(err)?;
            let out = poisson_bracket(&a, &b, &scaled, &x).map_err(err)?;
            worst = worst.max((out - lambda * base).abs() / (1.0 + out.abs()));
        }
        Ok((worst, note(vec![])))
    });

    // Free canonical state shared by the generator checks.
    let free = (|| -> Result<_, String> {
        let mut rng = ctx.rng("generator");
        let x = FourVector::from_parts(sc.x0_end(), [0.3, -0.6, 0.1]);
        let mut pairs = Vec::new();
        let mut gauges = Vec::new();
        let mut flows = Vec::new();
        for mode in &grid.modes {
            let g = CanonicalGauge::fixed(&spec, &mode.k, sc.gauge_z).map_err(err)?;
            let a = random_free(&spec, &mode.k, &mut rng)?;
            pairs.push(to_canonical(&a.at_point(&mode.k, &x), &mode.k, &g, &spec).map_err(err)?);
            // V^μ ∂_μ of each plus-sector coordinate by a five-point stencil along V.
            let shifted = |d: f64| {
                let y = x + s.v * d;
                to_canonical(&a.at_point(&mode.k, &y), &mode.k, &g, &spec)
            };
            let h = 1e-4 / (1.0 + mode.k[0]);
            let (p, m) = (shifted(h).map_err(err)?, shifted(-h).map_err(err)?);
            let (p2, m2) = (shifted(2.0 * h).map_err(err)?, shifted(-2.0 * h).map_err(err)?);
            let d: Vec<f64> = (0..p.plus.q.len())
                .map(|i| (m2.plus.q[i] - p2.plus.q[i] + 8.0 * (p.plus.q[i] - m.plus.q[i])) / (12.0 * h))
                .collect();
            flows.push(d);
            gauges.push(g);
        }
        Ok((pairs, gauges, flows))
    })();

    ctx.check("bracket.dw_conservation", "dw_conservation", |_| {
        let (pairs, gauges, _) = free.as_ref().map_err(|e| e.clone())?;
        let r = dw_conservation_check(&spec, &grid, pairs, gauges, None).map_err(err)?;
        Ok((r, note(vec![])))
    });

    ctx.check("bracket.generator_flow", "generator_flow", |_| {
        let (pairs, gauges, flows) = free.as_ref().map_err(|e| e.clone())?;
        let state = s.state_from_pairs(pairs).map_err(err)?;
        let j = generator_observable(&spec, s, gauges, None).map_err(err)?;
        let mut worst: f64 = 0.0;
        for (m, flow) in flows.iter().enumerate() {
            for (i, d) in flow.iter().enumerate() {
                let b = poisson_bracket(&s.q(m, Branch::Plus, i), &j, s, &state).map_err(err)?;
                worst = worst.max((b - d).abs() / (1.0 + d.abs()));
            }
        }
        Ok((worst, note(vec![("branches", json!(branches(&spec).len()))])))
    });
}
