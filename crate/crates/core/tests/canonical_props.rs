use covham_core::canonical::{
    canonical_j, dirac_j2_diagnostic, dw_image_j, from_canonical, source_terms, to_canonical, CanonicalGauge,
    DEFAULT_Z,
};
use covham_core::field::DiracSpinor;
use covham_core::modes::evolve_amplitudes;
use covham_core::{
    AmplitudePair, Coupling, DiracCoupling, EvolveConfig, FieldSpec, FourVector, GridConfig, ModeGrid, Worldline, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn species() -> Vec<FieldSpec> {
    vec![
        FieldSpec::scalar(1.2, 0.7, 1.5),
        FieldSpec::tensor(1, 0.9, 1.1),
        FieldSpec::tensor(2, 1.4, 0.6),
        FieldSpec::em(1.3),
        FieldSpec::dirac(0.8, 1.1, 1.0),
    ]
}

fn random_amplitudes(rng: &mut ChaCha8Rng, spec: &FieldSpec) -> AmplitudePair {
    let mut a = AmplitudePair::zeros(spec);
    for c in a.plus.iter_mut().chain(a.minus.iter_mut()) {
        *c = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    }
    a
}

fn random_on_shell(rng: &mut ChaCha8Rng, kappa: f64) -> FourVector {
    let k: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
    FourVector::from_parts((kappa * kappa + k.iter().map(|c| c * c).sum::<f64>()).sqrt(), k)
}

fn random_spinor(rng: &mut ChaCha8Rng) -> DiracSpinor {
    DiracSpinor(std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

fn particles(rng: &mut ChaCha8Rng, spec: &FieldSpec) -> Vec<Worldline> {
    (0..2)
        .map(|j| {
            let coupling = if spec.kind == covham_core::FieldKind::Dirac {
                Coupling::Dirac(DiracCoupling { xi1: random_spinor(rng), xi2: random_spinor(rng), xi3: random_spinor(rng) })
            } else {
                Coupling::Strength(rng.gen_range(-2.0..2.0))
            };
            let pos: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let vel: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.4..0.4));
            Worldline::new_uniform(j, FourVector::from_parts(0.0, pos), vel, coupling)
        })
        .collect()
}

#[test]
fn roundtrip_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for spec in species() {
        for _ in 0..1000 {
            let k = random_on_shell(&mut rng, spec.kappa.max(0.0));
            if k[0] == 0.0 {
                continue;
            }
            let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = CanonicalGauge::fixed(&spec, &k, z).unwrap();
            let a = random_amplitudes(&mut rng, &spec);
            let back = from_canonical(&to_canonical(&a, &k, &g, &spec).unwrap(), &k, &g, &spec).unwrap();
            let scale = a.plus.iter().chain(&a.minus).map(|c| c.norm()).fold(1.0, f64::max);
            assert!(back.max_abs_diff(&a) <= 1e-12 * scale, "{:?}", spec.kind);
        }
    }
}

#[test]
fn image_form_is_gauge_phase_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for spec in species() {
        let k = random_on_shell(&mut rng, spec.kappa);
        let a = random_amplitudes(&mut rng, &spec);
        let w = particles(&mut rng, &spec);
        let x = FourVector::new(1.5, 0.2, -0.4, 0.9);
        let base = dw_image_j(&spec, &a, &k, &x, &w, &CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap()).unwrap();
        for _ in 0..20 {
            let z = DEFAULT_Z * C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let g = CanonicalGauge::fixed(&spec, &k, z).unwrap();
            let j = dw_image_j(&spec, &a, &k, &x, &w, &g).unwrap();
            assert!((j - base).abs() <= 1e-12 * (1.0 + base.abs()), "{:?}", spec.kind);
        }
    }
}

#[test]
fn canonical_and_image_forms_agree_with_sources() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for spec in species() {
        for _ in 0..50 {
            let k = random_on_shell(&mut rng, spec.kappa);
            let a = random_amplitudes(&mut rng, &spec);
            let w = particles(&mut rng, &spec);
            let x = FourVector::new(rng.gen_range(0.0..5.0), rng.gen_range(-1.0..1.0), 0.3, rng.gen_range(-1.0..1.0));
            let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = CanonicalGauge::fixed(&spec, &k, z).unwrap();
            let image = dw_image_j(&spec, &a, &k, &x, &w, &g).unwrap();
            let cp = to_canonical(&a, &k, &g, &spec).unwrap();
            let src = source_terms(&spec, &w, &k, &x, &g).unwrap();
            let canon = canonical_j(&spec, &cp, &k, &g, Some(&src)).unwrap();
            assert!((image - canon).abs() <= 1e-11 * (1.0 + image.abs()), "{:?}: {image} vs {canon}", spec.kind);
        }
    }
}

#[test]
fn free_canonical_sum_of_squares() {
    // J = ½ Σ± Σ_a g_a (π·π + k·k q²) for free complex fields.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for spec in [FieldSpec::scalar(1.0, 0.5, 1.0), FieldSpec::tensor(1, 2.0, 0.8)] {
        let k = random_on_shell(&mut rng, spec.kappa);
        let a = random_amplitudes(&mut rng, &spec);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        let cp = to_canonical(&a, &k, &g, &spec).unwrap();
        let signs = spec.component_signs();
        let mut direct = 0.0;
        for sec in [&cp.plus, cp.minus.as_ref().unwrap()] {
            for (i, s) in signs.iter().enumerate() {
                let pp: f64 = (0..4).map(|mu| covham_core::kinematics::eta(mu) * sec.pi[i][mu].powi(2)).sum();
                direct += 0.5 * s * (pp + k.norm_sq() * sec.q[i].powi(2));
            }
        }
        let image = dw_image_j(&spec, &a, &k, &FourVector::default(), &[], &g).unwrap();
        assert!((direct - image).abs() <= 1e-12 * (1.0 + image.abs()));
    }
}

#[test]
fn free_j_is_constant_along_trajectories() {
    for spec in [FieldSpec::scalar(1.0, 1.0, 1.0), FieldSpec::em(1.0), FieldSpec::dirac(1.0, 1.0, 1.0)] {
        let grid = ModeGrid::build(&GridConfig::new(2.0, 3, spec.kappa)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let init: Vec<_> = (0..grid.len()).map(|_| random_amplitudes(&mut rng, &spec)).collect();
        let traj = evolve_amplitudes(&spec, &[], &grid, &EvolveConfig::new(0.0, 5.0, 10), &init).unwrap();
        for (m, mode) in grid.modes.iter().enumerate() {
            let g = CanonicalGauge::fixed(&spec, &mode.k, DEFAULT_Z).unwrap();
            let j_at = |n: usize| {
                let x = FourVector::from_parts(traj.x0[n], [0.3, -0.1, 0.7]);
                dw_image_j(&spec, &traj.values[m][n].at_point(&mode.k, &x), &mode.k, &x, &[], &g).unwrap()
            };
            let j0 = j_at(0);
            for n in 1..traj.samples() {
                assert!((j_at(n) - j0).abs() <= 1e-12 * (1.0 + j0.abs()));
            }
        }
    }
}

#[test]
fn dirac_second_part_mirrors_the_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let spec = FieldSpec::dirac(1.0, 1.0, 1.0);
    let k = random_on_shell(&mut rng, spec.kappa);
    let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
    let x = FourVector::new(0.5, 0.0, 0.0, 0.0);
    let w = particles(&mut rng, &spec);
    // Free part: both parts equal since ψ̄ψ is real and invariant under conjugation in this basis.
    let a = random_amplitudes(&mut rng, &spec);
    let j1 = dw_image_j(&spec, &a, &k, &x, &[], &g).unwrap();
    let j2 = dirac_j2_diagnostic(&spec, &a, &k, &x, &[], &g).unwrap();
    assert!((j1 - j2).abs() <= 1e-12 * (1.0 + j1.abs()));
    assert!(dirac_j2_diagnostic(&spec, &a, &k, &x, &w, &g).unwrap().is_finite());
}

proptest! {
    #[test]
    fn canonical_variables_are_real_and_finite(
        re in prop::collection::vec(-5.0f64..5.0, 8),
        im in prop::collection::vec(-5.0f64..5.0, 8),
        k in prop::array::uniform3(-3.0f64..3.0),
        phase in 0.0f64..6.3,
    ) {
        let spec = FieldSpec::tensor(1, 1.0, 1.0);
        let kv = FourVector::from_parts((1.0 + k.iter().map(|c| c * c).sum::<f64>()).sqrt(), k);
        let a = AmplitudePair {
            plus: (0..4).map(|i| C64::new(re[i], im[i])).collect(),
            minus: (4..8).map(|i| C64::new(re[i], im[i])).collect(),
        };
        let g = CanonicalGauge::fixed(&spec, &kv, C64::from_polar(0.7, phase)).unwrap();
        let cp = to_canonical(&a, &kv, &g, &spec).unwrap();
        for sec in [&cp.plus, cp.minus.as_ref().unwrap()] {
            prop_assert!(sec.q.iter().all(|q| q.is_finite()));
            prop_assert!(sec.pi.iter().flatten().all(|p| p.is_finite()));
        }
    }
}
