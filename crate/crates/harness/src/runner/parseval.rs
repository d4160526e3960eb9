use std::f64::consts::PI;

use covham_core::canonical::{parseval_check, BoxMode, ParsevalBox};
use covham_core::{AmplitudePair, FieldKind, FieldSpec};
use serde_json::json;

use super::{err, random_free, Ctx};

/// Box modes: one ±k pair plus two unpaired vectors.
const LATTICE: [[i32; 3]; 4] = [[1, 0, 0], [-1, 0, 0], [0, 1, 2], [2, -1, 0]];

pub(super) fn run(ctx: &mut Ctx) {
    let sc = ctx.scenario;
    let (spec, stand_in) = match sc.spec.kind {
        FieldKind::Scalar | FieldKind::Tensor { .. } => (sc.spec, false),
        _ => (FieldSpec::scalar(1.0, 1.0, sc.spec.constants.c), true),
    };
    let side = 2.0 * PI;
    // The ±k pair shares k⁰; the window spans four half periods.
    let k0_pair = (spec.kappa * spec.kappa + 1.0).sqrt();
    let bx = ParsevalBox { side, x0_start: sc.x0_start(), duration: 4.0 * PI / k0_pair };
    let meta = move || {
        let mut m = vec![("box_side", json!(side)), ("duration", json!(bx.duration)), ("modes", json!(LATTICE.len()))];
        if stand_in {
            m.push(("species", json!("free scalar standing in for the scenario field")));
        }
        m
    };

    ctx.check("parseval.relative_error", "parseval", |c| {
        let mut rng = c.rng("parseval");
        let modes: Vec<BoxMode> = LATTICE
            .iter()
            .map(|&lattice| {
                let n = lattice.map(f64::from);
                let k0 = (spec.kappa * spec.kappa + n.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let k = covham_core::FourVector::from_parts(k0, n);
                random_free(&spec, &k, &mut rng).map(|amplitudes| BoxMode { lattice, amplitudes })
            })
            .collect::<Result<_, _>>()?;
        let out = parseval_check(&spec, &modes, &bx).map_err(err)?;
        let mut m = meta();
        m.push(("position_integral", json!(out.position_integral)));
        m.push(("mode_sum", json!(out.mode_sum)));
        Ok((out.relative_error, m))
    });

    ctx.check("parseval.zero_field", "parseval", |_| {
        let modes: Vec<BoxMode> =
            LATTICE.iter().map(|&lattice| BoxMode { lattice, amplitudes: AmplitudePair::zeros(&spec) }).collect();
        let out = parseval_check(&spec, &modes, &bx).map_err(err)?;
        Ok((out.position_integral.abs().max(out.mode_sum.abs()), meta()))
    });
}
