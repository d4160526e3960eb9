//! Canonical variables (q, π) per mode, the momentum-space generator J and
//! the position-space de Donder–Weyl density.
//!
//! Every species reduces to one pattern per branch. With w = φ·T̃ for a
//! branch multiplier φ, the canonical pair is
//!
//!   π_μ = 2ε k_μ Re w,   q = σ · 2ε Im w,
//!
//! and the generator is
//!
//!   J = Σ_a g_a [ χ/2 (π_a·π_a + k·k q_a²) + 2ε (σ Im P_a π_{0a} − k⁰ Re P_a q_a) ]
//!
//! where g_a is the component metric sign and P_a = φ R_a e^{−i s k·x} carries
//! the source rate R. The table of (φ, σ, s, χ):
//!
//! | sector        | φ  | σ  | s  | χ  |
//! |---------------|----|----|----|----|
//! | complex, plus | z  | −1 | +1 | +1 |
//! | complex, minus| z* | +1 | −1 | +1 |
//! | em            | z* | +1 | +1 | −1 |

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{CanonicalError, DynamicsError};
use crate::field::{gamma_matrices, slash, DiracSpinor, FieldKind, FieldSpec, Mat4, TensorComponents};
use crate::kinematics::{eta, Coupling, FourVector, ModeGrid, Worldline};
use crate::modes::{branches, check_exclusion, AmplitudePair, Branch, ModeTrajectory, SourceSnapshot};
use crate::quadrature::composite_gauss_legendre;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Default gauge constant z = 1/√2.
pub const DEFAULT_Z: C64 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

/// Gauge data (z, ε) of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalGauge {
    pub z: C64,
    pub epsilon: f64,
}

impl CanonicalGauge {
    pub fn new(z: C64, epsilon: f64) -> Result<Self, CanonicalError> {
        if !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(CanonicalError::Gauge(format!("z must be a finite non-zero complex, got {z}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(CanonicalError::Gauge(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { z, epsilon })
    }

    /// ε fixed so that J is the image of the de Donder–Weyl density:
    /// a²/(2k⁰|z|²) for scalars and tensors, s/(4k⁰κ|z|²) for spinors,
    /// and 1/(8πc k⁰|z|²) for the em potential.
    pub fn fixed(spec: &FieldSpec, k: &FourVector, z: C64) -> Result<Self, CanonicalError> {
        let k0 = k[0];
        if !(k0 > 0.0) {
            return Err(CanonicalError::Gauge(format!("k0 must be positive, got {k0}")));
        }
        let z2 = z.norm_sqr();
        let eps2 = match spec.kind {
            FieldKind::Scalar | FieldKind::Tensor { .. } => spec.a2 / (2.0 * k0 * z2),
            FieldKind::Dirac => spec.constants.s / (4.0 * k0 * spec.kappa * z2),
            FieldKind::Em => 1.0 / (8.0 * PI * spec.constants.c * k0 * z2),
        };
        Self::new(z, eps2.sqrt())
    }
}

#[derive(Clone, Copy, Debug)]
struct Sector {
    phi: C64,
    eps: f64,
    q_sign: f64,
    phase_sign: f64,
    j_sign: f64,
}

fn sector(spec: &FieldSpec, b: Branch, gauge: &CanonicalGauge) -> Sector {
    let eps = gauge.epsilon;
    match (spec.kind, b) {
        (FieldKind::Em, _) => Sector { phi: gauge.z.conj(), eps, q_sign: 1.0, phase_sign: 1.0, j_sign: -1.0 },
        (_, Branch::Plus) => Sector { phi: gauge.z, eps, q_sign: -1.0, phase_sign: 1.0, j_sign: 1.0 },
        (_, Branch::Minus) => Sector { phi: gauge.z.conj(), eps, q_sign: 1.0, phase_sign: -1.0, j_sign: 1.0 },
    }
}

/// Real canonical variables of one branch: q_a and π_{μa} (covariant μ).
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalSector {
    pub q: Vec<f64>,
    pub pi: Vec<[f64; 4]>,
}

impl CanonicalSector {
    pub fn zeros(n: usize) -> Self {
        Self { q: vec![0.0; n], pi: vec![[0.0; 4]; n] }
    }
}

/// Canonical variables of one mode; `minus` is absent for em.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPair {
    pub plus: CanonicalSector,
    pub minus: Option<CanonicalSector>,
}

impl CanonicalPair {
    pub fn sector(&self, b: Branch) -> Option<&CanonicalSector> {
        match b {
            Branch::Plus => Some(&self.plus),
            Branch::Minus => self.minus.as_ref(),
        }
    }

    pub fn sector_mut(&mut self, b: Branch) -> Option<&mut CanonicalSector> {
        match b {
            Branch::Plus => Some(&mut self.plus),
            Branch::Minus => self.minus.as_mut(),
        }
    }

    pub fn zeros(spec: &FieldSpec) -> Self {
        let n = spec.components();
        Self { plus: CanonicalSector::zeros(n), minus: spec.has_minus_branch().then(|| CanonicalSector::zeros(n)) }
    }
}

/// Builds (q, π) from plane-wave amplitudes T̃± at a point.
pub fn to_canonical(
    amps: &AmplitudePair,
    k: &FourVector,
    gauge: &CanonicalGauge,
    spec: &FieldSpec,
) -> Result<CanonicalPair, CanonicalError> {
    if !amps.matches(spec) {
        return Err(CanonicalError::Layout);
    }
    let kl = k.lower();
    let build = |b: Branch| {
        let sec = sector(spec, b, gauge);
        let mut out = CanonicalSector::zeros(spec.components());
        for (a, t) in amps.branch(b).iter().enumerate() {
            let w = sec.phi * t;
            out.q[a] = sec.q_sign * 2.0 * sec.eps * w.im;
            out.pi[a] = kl.map(|km| 2.0 * sec.eps * km * w.re);
        }
        out
    };
    Ok(CanonicalPair { plus: build(Branch::Plus), minus: spec.has_minus_branch().then(|| build(Branch::Minus)) })
}

/// Relative tolerance for the rank-one check in [`from_canonical`].
pub const RANK_ONE_TOLERANCE: f64 = 1e-9;

/// Inverse of [`to_canonical`]; rejects momenta not proportional to k_μ.
pub fn from_canonical(
    cp: &CanonicalPair,
    k: &FourVector,
    gauge: &CanonicalGauge,
    spec: &FieldSpec,
) -> Result<AmplitudePair, CanonicalError> {
    let n = spec.components();
    let kl = k.lower();
    let k_sq: f64 = kl.iter().map(|c| c * c).sum();
    let mut out = AmplitudePair::zeros(spec);
    for &b in branches(spec) {
        let sec = sector(spec, b, gauge);
        let cs = cp.sector(b).ok_or(CanonicalError::Layout)?;
        if cs.q.len() != n || cs.pi.len() != n {
            return Err(CanonicalError::Layout);
        }
        for a in 0..n {
            let pi = cs.pi[a];
            let re = (0..4).map(|mu| pi[mu] * kl[mu]).sum::<f64>() / (2.0 * sec.eps * k_sq);
            let scale = pi.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let defect = (0..4).map(|mu| (pi[mu] - 2.0 * sec.eps * kl[mu] * re).abs()).fold(0.0, f64::max);
            if defect > RANK_ONE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
                return Err(CanonicalError::RankOneViolation { component: a, defect });
            }
            let im = sec.q_sign * cs.q[a] / (2.0 * sec.eps);
            out.branch_mut(b)[a] = C64::new(re, im) / sec.phi;
        }
    }
    Ok(out)
}

/// Source terms P_a per branch at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTerms {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl SourceTerms {
    pub fn zeros(spec: &FieldSpec) -> Self {
        let n = spec.components();
        Self { plus: vec![ZERO; n], minus: if spec.has_minus_branch() { vec![ZERO; n] } else { Vec::new() } }
    }

    fn branch(&self, b: Branch) -> &[C64] {
        match b {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }
}

/// P_a = φ R_a e^{−is k·x} from the worldlines crossing x⁰.
pub fn source_terms(
    spec: &FieldSpec,
    worldlines: &[Worldline],
    k: &FourVector,
    x: &FourVector,
    gauge: &CanonicalGauge,
) -> Result<SourceTerms, DynamicsError> {
    let snap = SourceSnapshot::at(spec, worldlines, x[0])?;
    let mut out = SourceTerms::zeros(spec);
    for &b in branches(spec) {
        let sec = sector(spec, b, gauge);
        let phase = sec.phi * C64::from_polar(1.0, -sec.phase_sign * k.dot(x));
        let r = snap.rate(spec, k, b);
        let dst = match b {
            Branch::Plus => &mut out.plus,
            Branch::Minus => &mut out.minus,
        };
        for (d, ri) in dst.iter_mut().zip(r) {
            *d = ri * phase;
        }
    }
    Ok(out)
}

/// J from canonical variables. `sources = None` means a free field.
pub fn canonical_j(
    spec: &FieldSpec,
    cp: &CanonicalPair,
    k: &FourVector,
    gauge: &CanonicalGauge,
    sources: Option<&SourceTerms>,
) -> Result<f64, CanonicalError> {
    let signs = spec.component_signs();
    let k2 = k.norm_sq();
    let mut j = 0.0;
    for &b in branches(spec) {
        let sec = sector(spec, b, gauge);
        let cs = cp.sector(b).ok_or(CanonicalError::Layout)?;
        for (a, g) in signs.iter().enumerate() {
            let pi = cs.pi[a];
            let q = cs.q[a];
            let pipi: f64 = (0..4).map(|mu| eta(mu) * pi[mu] * pi[mu]).sum();
            let mut term = 0.5 * sec.j_sign * (pipi + k2 * q * q);
            if let Some(src) = sources {
                let p = src.branch(b)[a];
                term += 2.0 * sec.eps * (sec.q_sign * p.im * pi[0] - k[0] * p.re * q);
            }
            j += g * term;
        }
    }
    Ok(j)
}

/// ∂J/∂π^{μa} and ∂J/∂q^a (derivatives with respect to raised components).
#[derive(Clone, Debug, PartialEq)]
pub struct JGradient {
    pub d_pi: Vec<[f64; 4]>,
    pub d_q: Vec<f64>,
}

pub fn canonical_j_gradient(
    spec: &FieldSpec,
    cs: &CanonicalSector,
    b: Branch,
    k: &FourVector,
    gauge: &CanonicalGauge,
    sources: Option<&SourceTerms>,
) -> JGradient {
    let sec = sector(spec, b, gauge);
    let k2 = k.norm_sq();
    let n = cs.q.len();
    let mut d_pi = vec![[0.0; 4]; n];
    let mut d_q = vec![0.0; n];
    for a in 0..n {
        let p = sources.map(|s| s.branch(b)[a]).unwrap_or(ZERO);
        d_pi[a] = cs.pi[a].map(|c| sec.j_sign * c);
        d_pi[a][0] += 2.0 * sec.eps * sec.q_sign * p.im;
        d_q[a] = sec.j_sign * k2 * cs.q[a] - 2.0 * sec.eps * k[0] * p.re;
    }
    JGradient { d_pi, d_q }
}

/// J written directly in plane-wave amplitudes T̃± at `x`, the form obtained
/// by integrating the de Donder–Weyl density over space-time.
pub fn dw_image_j(
    spec: &FieldSpec,
    values: &AmplitudePair,
    k: &FourVector,
    x: &FourVector,
    worldlines: &[Worldline],
    gauge: &CanonicalGauge,
) -> Result<f64, CanonicalError> {
    if !values.matches(spec) {
        return Err(CanonicalError::Layout);
    }
    let eps2z2 = gauge.epsilon.powi(2) * gauge.z.norm_sqr();
    let k2 = k.norm_sq();
    let k0 = k[0];
    let signs = spec.component_signs();
    let inner = |v: &[C64]| -> f64 { v.iter().zip(&signs).map(|(c, g)| g * c.norm_sqr()).sum() };
    let mut j = 0.0;
    match spec.kind {
        FieldKind::Scalar | FieldKind::Tensor { .. } => {
            j += 2.0 * eps2z2 * k2 * (inner(&values.plus) + inner(&values.minus));
            for w in worldlines {
                let Some((u, udot, g)) = crossing_strength(w, x[0])? else { continue };
                let ut = TensorComponents::outer_power(udot.lower(), spec.rank());
                let contracted: C64 = (0..spec.components())
                    .map(|a| signs[a] * ut.entries[a] * (values.plus[a] + values.minus[a].conj()))
                    .sum();
                let e = C64::from_polar(1.0, k.dot(&(*x - u)));
                j += 2.0 * eps2z2 * k0 / spec.a2 * (g / udot[0]) * 2.0 * (contracted * e).re;
            }
        }
        FieldKind::Em => {
            let c = spec.constants.c;
            j += -k2 / (4.0 * PI * c * k0) * inner(&values.plus);
            for w in worldlines {
                let Some((u, udot, e_j)) = crossing_strength(w, x[0])? else { continue };
                let ul = udot.lower();
                let contracted: C64 = (0..4).map(|a| signs[a] * ul[a] * values.plus[a]).sum();
                let e = C64::from_polar(1.0, k.dot(&(*x - u)));
                j += e_j / (c * udot[0]) * 2.0 * (contracted * e).re;
            }
        }
        FieldKind::Dirac => {
            j += dirac_j1(spec, values, k, x, worldlines, eps2z2, false)?;
        }
    }
    Ok(j)
}

/// Second Dirac part: the first part's formula applied to conjugated
/// amplitudes and couplings. Carries no extra dynamics; diagnostic only.
pub fn dirac_j2_diagnostic(
    spec: &FieldSpec,
    values: &AmplitudePair,
    k: &FourVector,
    x: &FourVector,
    worldlines: &[Worldline],
    gauge: &CanonicalGauge,
) -> Result<f64, CanonicalError> {
    if spec.kind != FieldKind::Dirac || !values.matches(spec) {
        return Err(CanonicalError::Layout);
    }
    let eps2z2 = gauge.epsilon.powi(2) * gauge.z.norm_sqr();
    dirac_j1(spec, values, k, x, worldlines, eps2z2, true)
}

fn conj_spinor(s: &DiracSpinor) -> DiracSpinor {
    DiracSpinor(s.0.map(|c| c.conj()))
}

fn conj_mat(m: &Mat4) -> Mat4 {
    Mat4(m.0.map(|row| row.map(|c| c.conj())))
}

fn dirac_j1(
    spec: &FieldSpec,
    values: &AmplitudePair,
    k: &FourVector,
    x: &FourVector,
    worldlines: &[Worldline],
    eps2z2: f64,
    conjugated: bool,
) -> Result<f64, CanonicalError> {
    let spinor = |v: &[C64]| {
        let s = DiracSpinor(std::array::from_fn(|i| v[i]));
        if conjugated {
            conj_spinor(&s)
        } else {
            s
        }
    };
    let psi_p = spinor(&values.plus);
    let psi_m = spinor(&values.minus);
    let kappa = spec.kappa;
    let s_const = spec.constants.s;
    let mut j = 2.0 * eps2z2 * kappa * kappa * (psi_p.bar_dot(&psi_p).re + psi_m.bar_dot(&psi_m).re);
    let mut ks = slash(k);
    if conjugated {
        ks = conj_mat(&ks);
    }
    let id = Mat4::identity().scale(C64::from(kappa));
    for w in worldlines {
        let Ok(tau) = w.equal_time_crossing(x[0]) else { continue };
        let (u, udot) = w.state(tau);
        let Coupling::Dirac(cpl) = &w.coupling else {
            return Err(crate::error::FieldError::CouplingKind { label: w.label }.into());
        };
        let mut xi = crate::field::dirac_interaction_spinor(cpl, &udot);
        if conjugated {
            xi = conj_spinor(&xi);
        }
        let e = C64::from_polar(1.0, k.dot(&(*x - u)));
        let v = (id + ks).apply(&psi_p) * e + (id - ks).apply(&psi_m) * e.conj();
        j += 2.0 * eps2z2 * k[0] / s_const / udot[0] * 2.0 * xi.bar_dot(&v).re;
    }
    Ok(j)
}

fn crossing_strength(w: &Worldline, x0: f64) -> Result<Option<(FourVector, FourVector, f64)>, CanonicalError> {
    let Ok(tau) = w.equal_time_crossing(x0) else { return Ok(None) };
    let (u, udot) = w.state(tau);
    match w.coupling {
        Coupling::Strength(g) => Ok(Some((u, udot, g))),
        Coupling::Dirac(_) => Err(crate::error::FieldError::CouplingKind { label: w.label }.into()),
    }
}

/// Covariant Hamilton equations checked along a trajectory.
///
/// For each sample `(n, x_spatial)` the coefficient derivative is a central
/// difference between samples n ± 1; plane-wave phases are differentiated
/// exactly. Returns
/// r1 = max |∂_μ q − ∂J/∂π^μ| and r2 = max |∂^μ π_μ + ∂J/∂q|.
pub fn hamilton_residual(
    worldlines: &[Worldline],
    traj: &ModeTrajectory,
    mode: usize,
    k: &FourVector,
    gauge: &CanonicalGauge,
    samples: &[(usize, [f64; 3])],
) -> Result<(f64, f64), CanonicalError> {
    let spec = &traj.spec;
    let series = traj.values.get(mode).ok_or(CanonicalError::Layout)?;
    let h = traj.spacing;
    let kl = k.lower();
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for &(n, xs) in samples {
        if n == 0 || n + 1 >= series.len() {
            return Err(CanonicalError::Stencil(n));
        }
        let x = FourVector::from_parts(traj.x0[n], xs);
        let values = series[n].at_point(k, &x);
        let cp = to_canonical(&values, k, gauge, spec)?;
        let src = source_terms(spec, worldlines, k, &x, gauge)?;
        for &b in branches(spec) {
            let sec = sector(spec, b, gauge);
            let cs = cp.sector(b).ok_or(CanonicalError::Layout)?;
            let grad = canonical_j_gradient(spec, cs, b, k, gauge, Some(&src));
            let phase = C64::from_polar(1.0, -sec.phase_sign * k.dot(&x));
            for a in 0..spec.components() {
                let c = series[n].branch(b)[a];
                let dc = (series[n + 1].branch(b)[a] - series[n - 1].branch(b)[a]) / (2.0 * h);
                // ∂_μ w for w = φ C e^{−is k·x}.
                let dw: [C64; 4] = std::array::from_fn(|mu| {
                    let mut d = -I * sec.phase_sign * kl[mu] * c;
                    if mu == 0 {
                        d += dc;
                    }
                    sec.phi * d * phase
                });
                for mu in 0..4 {
                    let dq = sec.q_sign * 2.0 * sec.eps * dw[mu].im;
                    r1 = r1.max((dq - grad.d_pi[a][mu]).abs());
                }
                let div_pi: f64 = (0..4).map(|mu| eta(mu) * 2.0 * sec.eps * kl[mu] * dw[mu].re).sum();
                r2 = r2.max((div_pi + grad.d_q[a]).abs());
            }
        }
    }
    Ok((r1, r2))
}

/// Field, derivatives and generalised momenta at one point.
///
/// `derivatives[a][μ]` is ∂_μ of component a; `theta[a][μ]` is the momentum
/// θ_{μa} (for spinors a is the spinor slot).
#[derive(Clone, Debug, PartialEq)]
pub struct PointFields {
    pub value: Vec<C64>,
    pub derivatives: Vec<[C64; 4]>,
    pub theta: Vec<[C64; 4]>,
}

/// Momenta from their defining relations: θ_μ = a² ∂_μ T* (scalar, tensor),
/// θ_{μν} = −∂_μA_ν/(4πc) (em), θ_μ = −(is/2) γ_μ ψ (dirac).
pub fn momenta_from_derivatives(spec: &FieldSpec, value: &[C64], derivatives: &[[C64; 4]]) -> Vec<[C64; 4]> {
    match spec.kind {
        FieldKind::Scalar | FieldKind::Tensor { .. } => {
            derivatives.iter().map(|d| d.map(|c| c.conj() * spec.a2)).collect()
        }
        FieldKind::Em => derivatives.iter().map(|d| d.map(|c| c * (-1.0 / (4.0 * PI * spec.constants.c)))).collect(),
        FieldKind::Dirac => {
            let g = gamma_matrices();
            let psi = DiracSpinor(std::array::from_fn(|i| value[i]));
            let mut theta = vec![[ZERO; 4]; 4];
            for mu in 0..4 {
                let v = g[mu].scale(C64::from(eta(mu))).apply(&psi) * (-I * 0.5 * spec.constants.s);
                for a in 0..4 {
                    theta[a][mu] = v.0[a];
                }
            }
            theta
        }
    }
}

impl PointFields {
    /// Builds the momenta from the derivatives via their definitions.
    pub fn from_derivatives(spec: &FieldSpec, value: Vec<C64>, derivatives: Vec<[C64; 4]>) -> Self {
        let theta = momenta_from_derivatives(spec, &value, &derivatives);
        Self { value, derivatives, theta }
    }
}

/// de Donder–Weyl density H at `x`.
///
/// The interaction term is supported on the worldlines only; points within
/// `exclusion` of a particle are rejected, elsewhere it vanishes. The Dirac
/// density uses the multiplier χ_μ = ∂_μψ.
pub fn position_dw_density(
    spec: &FieldSpec,
    fields: &PointFields,
    x: &FourVector,
    worldlines: &[Worldline],
    exclusion: f64,
) -> Result<f64, CanonicalError> {
    check_exclusion(worldlines, x, exclusion)?;
    let signs = spec.component_signs();
    match spec.kind {
        FieldKind::Scalar | FieldKind::Tensor { .. } => {
            let mut h = 0.0;
            for (a, g) in signs.iter().enumerate() {
                let kinetic: f64 = (0..4).map(|mu| eta(mu) * fields.theta[a][mu].norm_sqr()).sum();
                h += g * (kinetic / spec.a2 + spec.b2 * fields.value[a].norm_sqr());
            }
            Ok(h)
        }
        FieldKind::Em => {
            let mut h = 0.0;
            for (nu, g) in signs.iter().enumerate() {
                for mu in 0..4 {
                    h += g * eta(mu) * fields.theta[nu][mu].norm_sqr();
                }
            }
            Ok(-2.0 * PI * spec.constants.c * h)
        }
        FieldKind::Dirac => {
            let g = gamma_matrices();
            let s = spec.constants.s;
            let psi = DiracSpinor(std::array::from_fn(|i| fields.value[i]));
            let mut h = C64::from(spec.constants.m * spec.constants.c) * psi.bar_dot(&psi);
            for mu in 0..4 {
                let chi = DiracSpinor(std::array::from_fn(|a| fields.derivatives[a][mu]));
                let theta = DiracSpinor(std::array::from_fn(|a| fields.theta[a][mu]));
                let gamma_lower = g[mu].scale(C64::from(eta(mu)));
                // χ̄_μ (θ^μ + (is/2) γ^μ ψ) with θ^μ = η^{μμ} θ_μ.
                let constraint_up = (theta + g[mu].apply(&psi) * (I * 0.5 * s * eta(mu))) * C64::from(eta(mu));
                h += chi.bar_dot(&constraint_up);
                // (θ̄_μ − (is/2) ψ̄ γ_μ) χ^μ.
                let chi_up = chi * C64::from(eta(mu));
                h += theta.bar_dot(&chi_up) - psi.bar_dot(&gamma_lower.apply(&chi_up)) * (I * 0.5 * s);
            }
            Ok(h.re)
        }
    }
}

/// Finite-difference check of the position-space Hamilton equations at `x`.
///
/// `sample` returns the field and momenta at any point. Derivatives use
/// five-point central stencils of width `step`. Scalar and tensor fields
/// check ∂_μT = θ*_μ/a² and ∂^μθ_μ = −b²T* (scaled by 1/|a²|); em checks
/// ∂_μA_ν = −4πcθ_{μν} and 4πc ∂^μθ_{μν} = 0; dirac checks the constraint
/// θ_μ + (is/2)γ_μψ = 0 and the divergence equation divided by s.
pub fn position_hamilton_residual(
    spec: &FieldSpec,
    sample: &dyn Fn(&FourVector) -> PointFields,
    x: &FourVector,
    step: f64,
    worldlines: &[Worldline],
    exclusion: f64,
) -> Result<f64, CanonicalError> {
    check_exclusion(worldlines, x, exclusion + 2.0 * step)?;
    let centre = sample(x);
    let n = centre.value.len();
    // d[μ] = (∂_μ value per component, ∂_μ theta per component and slot).
    let mut d_value = vec![[ZERO; 4]; n];
    let mut d_theta = vec![[[ZERO; 4]; 4]; centre.theta.len()];
    for mu in 0..4 {
        let shifted = |m: f64| {
            let mut y = *x;
            y.0[mu] += m * step;
            sample(&y)
        };
        let (p1, m1, p2, m2) = (shifted(1.0), shifted(-1.0), shifted(2.0), shifted(-2.0));
        let stencil = |f: &dyn Fn(&PointFields) -> C64| {
            (f(&m2) - f(&p2) + (f(&p1) - f(&m1)) * 8.0) / (12.0 * step)
        };
        for a in 0..n {
            d_value[a][mu] = stencil(&|p: &PointFields| p.value[a]);
        }
        for a in 0..centre.theta.len() {
            for nu in 0..4 {
                d_theta[a][nu][mu] = stencil(&|p: &PointFields| p.theta[a][nu]);
            }
        }
    }
    let mut worst: f64 = 0.0;
    match spec.kind {
        FieldKind::Scalar | FieldKind::Tensor { .. } => {
            for a in 0..n {
                for mu in 0..4 {
                    worst = worst.max((d_value[a][mu] - centre.theta[a][mu].conj() / spec.a2).norm());
                }
                let div: C64 = (0..4).map(|mu| d_theta[a][mu][mu] * eta(mu)).sum();
                worst = worst.max((div + centre.value[a].conj() * spec.b2).norm() / spec.a2.abs());
            }
        }
        FieldKind::Em => {
            let four_pi_c = 4.0 * PI * spec.constants.c;
            for nu in 0..n {
                for mu in 0..4 {
                    worst = worst.max((d_value[nu][mu] + centre.theta[nu][mu] * four_pi_c).norm());
                }
                let div: C64 = (0..4).map(|mu| d_theta[nu][mu][mu] * eta(mu)).sum();
                worst = worst.max(div.norm() * four_pi_c);
            }
        }
        FieldKind::Dirac => {
            let g = gamma_matrices();
            let s = spec.constants.s;
            let psi = DiracSpinor(std::array::from_fn(|i| centre.value[i]));
            for mu in 0..4 {
                let theta = DiracSpinor(std::array::from_fn(|a| centre.theta[a][mu]));
                let constraint = theta + g[mu].scale(C64::from(eta(mu))).apply(&psi) * (I * 0.5 * s);
                worst = worst.max(constraint.norm());
            }
            // ∂_μθ^μ + mcψ − (is/2)γ_μχ^μ with χ_μ = ∂_μψ.
            let mut eq = psi * C64::from(spec.constants.m * spec.constants.c);
            for mu in 0..4 {
                let div_term = DiracSpinor(std::array::from_fn(|a| d_theta[a][mu][mu] * eta(mu)));
                let chi_up = DiracSpinor(std::array::from_fn(|a| d_value[a][mu] * eta(mu)));
                let gamma_lower = g[mu].scale(C64::from(eta(mu)));
                eq = eq + div_term - gamma_lower.apply(&chi_up) * (I * 0.5 * s);
            }
            worst = worst.max(eq.norm() / s);
        }
    }
    Ok(worst)
}

/// Periodic box and time window for [`parseval_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalBox {
    pub side: f64,
    pub x0_start: f64,
    pub duration: f64,
}

/// Free mode content on the box lattice: wave vector 2πn/L and coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxMode {
    pub lattice: [i32; 3],
    pub amplitudes: AmplitudePair,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalOutcome {
    pub position_integral: f64,
    pub mode_sum: f64,
    pub relative_error: f64,
}

/// Compares ∫_box d⁴x H against Σ_modes W ∫dx⁰ H̃_free.
///
/// Space uses the periodic trapezoid rule, which is exact for the
/// band-limited integrand; time uses composite Gauss–Legendre. Modes whose
/// opposite wave vector is also populated produce cross terms oscillating
/// as e^{2ik⁰x⁰}; these only integrate out when the duration is a multiple
/// of π/k⁰, which is enforced.
pub fn parseval_check(spec: &FieldSpec, modes: &[BoxMode], bx: &ParsevalBox) -> Result<ParsevalOutcome, CanonicalError> {
    if !matches!(spec.kind, FieldKind::Scalar | FieldKind::Tensor { .. }) {
        return Err(CanonicalError::Config("the box identity is implemented for scalar and tensor fields".into()));
    }
    if !(bx.duration > 0.0) || !(bx.side > 0.0) {
        return Err(CanonicalError::Config("box side and duration must be positive".into()));
    }
    let lattice: Vec<[i32; 3]> = modes.iter().map(|m| m.lattice).collect();
    let grid = ModeGrid::periodic_box(bx.side, &lattice, spec.kappa).map_err(DynamicsError::from)?;
    for (i, m) in modes.iter().enumerate() {
        if !m.amplitudes.matches(spec) {
            return Err(CanonicalError::Layout);
        }
        for (j, other) in modes.iter().enumerate() {
            if j != i && other.lattice == m.lattice {
                return Err(CanonicalError::Config(format!("lattice vector {:?} listed twice", m.lattice)));
            }
        }
        let opposite = m.lattice.map(|c| -c);
        if modes.iter().any(|o| o.lattice == opposite) {
            let k0 = grid.modes[i].k[0];
            let periods = bx.duration * k0 / PI;
            if (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
                return Err(CanonicalError::Config(format!(
                    "duration {} is not a multiple of pi/k0 = {} for lattice vector {:?}",
                    bx.duration,
                    PI / k0,
                    m.lattice
                )));
            }
        }
    }

    let n_comp = spec.components();
    let max_n = lattice.iter().flat_map(|n| n.iter().map(|c| c.unsigned_abs() as usize)).max().unwrap_or(0);
    let points = (4 * max_n + 4).max(8);
    let dx = bx.side / points as f64;
    let k0_max = grid.modes.iter().map(|m| m.k[0]).fold(0.0, f64::max);
    let panels = ((bx.duration * k0_max).ceil() as usize).max(1);
    let times = composite_gauss_legendre(bx.x0_start, bx.x0_start + bx.duration, panels, 12);

    let mut position = 0.0;
    for &(t, wt) in &times {
        for i in 0..points {
            for j in 0..points {
                for l in 0..points {
                    let x = FourVector::new(t, i as f64 * dx, j as f64 * dx, l as f64 * dx);
                    let mut value = vec![ZERO; n_comp];
                    let mut derivs = vec![[ZERO; 4]; n_comp];
                    for (mode, bm) in grid.modes.iter().zip(modes) {
                        let kl = mode.k.lower();
                        let e = C64::from_polar(mode.weight, -mode.k.dot(&x));
                        for a in 0..n_comp {
                            let p = bm.amplitudes.plus[a] * e;
                            let m = bm.amplitudes.minus[a] * e.conj();
                            value[a] += p + m;
                            for mu in 0..4 {
                                derivs[a][mu] += I * kl[mu] * (m - p);
                            }
                        }
                    }
                    let fields = PointFields::from_derivatives(spec, value, derivs);
                    position += wt * dx.powi(3) * position_dw_density(spec, &fields, &x, &[], 0.0)?;
                }
            }
        }
    }

    let mut mode_sum = 0.0;
    let origin = FourVector::default();
    for (mode, bm) in grid.modes.iter().zip(modes) {
        let gauge = CanonicalGauge::fixed(spec, &mode.k, DEFAULT_Z)?;
        let values = bm.amplitudes.at_point(&mode.k, &origin);
        mode_sum += mode.weight * bx.duration * dw_image_j(spec, &values, &mode.k, &origin, &[], &gauge)?;
    }
    let scale = position.abs().max(mode_sum.abs());
    let relative_error = if scale == 0.0 { 0.0 } else { (position - mode_sum).abs() / mode_sum.abs().max(f64::MIN_POSITIVE) };
    Ok(ParsevalOutcome { position_integral: position, mode_sum, relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::GridConfig;
    use crate::modes::{evolve_amplitudes, EvolveConfig};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_pair(p: C64, m: C64) -> AmplitudePair {
        AmplitudePair { plus: vec![p], minus: vec![m] }
    }

    #[test]
    fn zero_amplitudes_give_zero_variables() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let k = FourVector::new(2f64.sqrt(), 1.0, 0.0, 0.0);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        let cp = to_canonical(&AmplitudePair::zeros(&spec), &k, &g, &spec).unwrap();
        assert_eq!(cp, CanonicalPair::zeros(&spec));
        let back = from_canonical(&cp, &k, &g, &spec).unwrap();
        assert_eq!(back, AmplitudePair::zeros(&spec));
    }

    #[test]
    fn plus_q_is_minus_two_eps_z_im() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let k = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let g = CanonicalGauge::new(c(0.8, 0.0), 0.6).unwrap();
        let t = c(0.3, -1.7);
        let cp = to_canonical(&scalar_pair(t, c(0.0, 0.0)), &k, &g, &spec).unwrap();
        assert_relative_eq!(cp.plus.q[0], -2.0 * 0.6 * 0.8 * t.im, max_relative = 1e-15);
    }

    #[test]
    fn unit_amplitude_momentum() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let k = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        assert_relative_eq!(g.epsilon, 1.0, max_relative = 1e-15);
        let cp = to_canonical(&scalar_pair(c(1.0, 0.0), c(0.0, 0.0)), &k, &g, &spec).unwrap();
        assert_relative_eq!(cp.plus.pi[0][0], 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(&cp.plus.pi[0][1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn literal_complex_definitions_are_real_and_match() {
        // π₊ = εk(zT̃ + z*T̃*), q₊ = iε(zT̃ − z*T̃*), π₋ = εk(z*T̃ + zT̃*), q₋ = −iε(z*T̃ − zT̃*).
        let spec = FieldSpec::scalar(1.0, 0.5, 1.0);
        let k = FourVector::new((0.25f64 + 0.36 + 0.01).sqrt(), 0.6, 0.1, 0.0);
        let z = c(0.4, -0.9);
        let g = CanonicalGauge::fixed(&spec, &k, z).unwrap();
        let (tp, tm) = (c(1.2, -0.4), c(-0.3, 0.8));
        let cp = to_canonical(&scalar_pair(tp, tm), &k, &g, &spec).unwrap();
        let eps = g.epsilon;
        let kl = k.lower();
        let q_plus = I * eps * (z * tp - z.conj() * tp.conj());
        let q_minus = -I * eps * (z.conj() * tm - z * tm.conj());
        assert!(q_plus.im.abs() < 1e-15 && q_minus.im.abs() < 1e-15);
        assert_relative_eq!(cp.plus.q[0], q_plus.re, max_relative = 1e-14);
        assert_relative_eq!(cp.minus.as_ref().unwrap().q[0], q_minus.re, max_relative = 1e-14);
        for mu in 0..4 {
            let pp = eps * kl[mu] * (z * tp + z.conj() * tp.conj());
            let pm = eps * kl[mu] * (z.conj() * tm + z * tm.conj());
            assert!(pp.im.abs() < 1e-15 && pm.im.abs() < 1e-15);
            assert_relative_eq!(cp.plus.pi[0][mu], pp.re, epsilon = 1e-14);
            assert_relative_eq!(cp.minus.as_ref().unwrap().pi[0][mu], pm.re, epsilon = 1e-14);
        }
    }

    #[test]
    fn em_literal_definition() {
        // π_{μν} = k_μ(zÃ* + z*Ã)/N, q_μ = i(zÃ* − z*Ã)/N, N = |z|√(8πck⁰).
        let spec = FieldSpec::em(2.0);
        let k = FourVector::new(1.3, 0.5, -1.2, 0.0);
        let z = c(-0.2, 0.7);
        let g = CanonicalGauge::fixed(&spec, &k, z).unwrap();
        let a = vec![c(0.3, 0.1), c(-1.0, 0.4), c(0.0, 2.0), c(0.5, -0.5)];
        let amps = AmplitudePair { plus: a.clone(), minus: vec![] };
        let cp = to_canonical(&amps, &k, &g, &spec).unwrap();
        let norm = z.norm() * (8.0 * PI * 2.0 * 1.3f64).sqrt();
        let kl = k.lower();
        for nu in 0..4 {
            let q = I * (z * a[nu].conj() - z.conj() * a[nu]) / norm;
            assert_relative_eq!(cp.plus.q[nu], q.re, epsilon = 1e-14);
            for mu in 0..4 {
                let p = kl[mu] * (z * a[nu].conj() + z.conj() * a[nu]) / norm;
                assert_relative_eq!(cp.plus.pi[nu][mu], p.re, epsilon = 1e-14);
            }
        }
        assert!(cp.minus.is_none());
    }

    #[test]
    fn rank_one_violation_is_rejected() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let k = FourVector::new(2f64.sqrt(), 1.0, 0.0, 0.0);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        let mut cp = to_canonical(&scalar_pair(c(1.0, 0.5), c(0.2, 0.1)), &k, &g, &spec).unwrap();
        cp.plus.pi[0][2] += 0.1;
        assert!(matches!(from_canonical(&cp, &k, &g, &spec), Err(CanonicalError::RankOneViolation { .. })));
    }

    #[test]
    fn scalar_free_j_example() {
        // m²c = 1, k⁰ = 2, |φ̃₊| = 1, φ̃₋ = 0 → J = 1/2.
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let k = FourVector::new(2.0, 3f64.sqrt(), 0.0, 0.0);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        let v = scalar_pair(c(0.6, 0.8), c(0.0, 0.0));
        let j = dw_image_j(&spec, &v, &k, &FourVector::default(), &[], &g).unwrap();
        assert_relative_eq!(j, 0.5, max_relative = 1e-14);
        let cp = to_canonical(&v, &k, &g, &spec).unwrap();
        assert_relative_eq!(canonical_j(&spec, &cp, &k, &g, None).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn em_free_j_vanishes_on_shell() {
        let spec = FieldSpec::em(1.0);
        let k = FourVector::new(5.0, 3.0, 4.0, 0.0);
        let g = CanonicalGauge::fixed(&spec, &k, DEFAULT_Z).unwrap();
        let v = AmplitudePair { plus: vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.1, 0.3), c(2.0, -1.0)], minus: vec![] };
        assert_eq!(dw_image_j(&spec, &v, &k, &FourVector::default(), &[], &g).unwrap(), 0.0);
        let cp = to_canonical(&v, &k, &g, &spec).unwrap();
        assert!(canonical_j(&spec, &cp, &k, &g, None).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = FieldSpec::tensor(1, 0.8, 1.1);
        let k = FourVector::new((1.21f64 + 0.49 + 0.04).sqrt(), 0.7, 0.0, -0.2);
        let g = CanonicalGauge::fixed(&spec, &k, c(0.3, 0.5)).unwrap();
        let v = AmplitudePair {
            plus: vec![c(0.1, 0.2), c(-0.4, 0.3), c(0.9, -0.1), c(0.0, 0.5)],
            minus: vec![c(0.7, 0.0), c(0.2, -0.6), c(-0.3, 0.3), c(0.4, 0.4)],
        };
        let src = SourceTerms {
            plus: vec![c(0.3, -0.2), c(0.1, 0.1), c(-0.5, 0.2), c(0.0, 0.4)],
            minus: vec![c(-0.1, 0.6), c(0.2, 0.0), c(0.3, -0.3), c(0.8, 0.1)],
        };
        let cp = to_canonical(&v, &k, &g, &spec).unwrap();
        let signs = spec.component_signs();
        let h = 1e-6;
        for b in Branch::BOTH {
            let grad = canonical_j_gradient(&spec, cp.sector(b).unwrap(), b, &k, &g, Some(&src));
            for a in 0..4 {
                for mu in 0..4 {
                    // Raised component π^{μa} = η^{μμ} g_a π_{μa}.
                    let raise = eta(mu) * signs[a];
                    let bump = |d: f64| {
                        let mut p = cp.clone();
                        p.sector_mut(b).unwrap().pi[a][mu] += d * raise;
                        canonical_j(&spec, &p, &k, &g, Some(&src)).unwrap()
                    };
                    let fd = (bump(h) - bump(-h)) / (2.0 * h);
                    assert!((fd - grad.d_pi[a][mu]).abs() < 1e-6);
                }
                let bump = |d: f64| {
                    let mut p = cp.clone();
                    p.sector_mut(b).unwrap().q[a] += d * signs[a];
                    canonical_j(&spec, &p, &k, &g, Some(&src)).unwrap()
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                assert!((fd - grad.d_q[a]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn free_scalar_hamilton_identity() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let grid = ModeGrid::build(&GridConfig::new(2.0, 3, 1.0)).unwrap();
        let init: Vec<_> = (0..grid.len()).map(|i| scalar_pair(c(1.0, i as f64 * 0.1), c(-0.3, 0.2))).collect();
        let traj = evolve_amplitudes(&spec, &[], &grid, &EvolveConfig::new(0.0, 1.0, 10), &init).unwrap();
        for (m, mode) in grid.modes.iter().enumerate() {
            let g = CanonicalGauge::fixed(&spec, &mode.k, DEFAULT_Z).unwrap();
            let (r1, r2) = hamilton_residual(&[], &traj, m, &mode.k, &g, &[(3, [0.2, -0.5, 1.0]), (7, [0.0; 3])]).unwrap();
            assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
        }
    }

    #[test]
    fn density_examples() {
        let spec = FieldSpec::scalar(1.3, 0.8, 1.7);
        let zero = PointFields::from_derivatives(&spec, vec![c(0.0, 0.0)], vec![[c(0.0, 0.0); 4]]);
        assert_eq!(position_dw_density(&spec, &zero, &FourVector::default(), &[], 0.0).unwrap(), 0.0);

        let kappa = spec.kappa;
        let k = FourVector::new((kappa * kappa + 0.5).sqrt(), 0.5, 0.4, 0.3);
        let x = FourVector::new(0.3, 0.1, -0.7, 2.0);
        let phi = C64::from_polar(1.0, -k.dot(&x));
        let kl = k.lower();
        let d = [std::array::from_fn(|mu| -I * kl[mu] * phi)];
        let f = PointFields::from_derivatives(&spec, vec![phi], d.to_vec());
        let h = position_dw_density(&spec, &f, &x, &[], 0.0).unwrap();
        assert_relative_eq!(h, 2.0 * spec.b2, max_relative = 1e-12);
    }

    #[test]
    fn em_density_matches_direct_formula() {
        let spec = FieldSpec::em(1.0);
        let k = FourVector::new(1.0, 0.6, 0.0, 0.8);
        let pol = [0.0, 0.0, 1.0, 0.0];
        let x = FourVector::new(0.2, 0.4, 0.0, -1.0);
        let kl = k.lower();
        let phase = -k.dot(&x);
        let value: Vec<C64> = pol.iter().map(|p| C64::from(p * phase.cos())).collect();
        let derivs: Vec<[C64; 4]> =
            pol.iter().map(|p| std::array::from_fn(|mu| C64::from(p * kl[mu] * phase.sin()))).collect();
        let f = PointFields::from_derivatives(&spec, value, derivs.clone());
        let h = position_dw_density(&spec, &f, &x, &[], 0.0).unwrap();
        let mut direct = 0.0;
        for nu in 0..4 {
            for mu in 0..4 {
                let theta = -derivs[nu][mu].re / (4.0 * PI);
                direct += eta(mu) * eta(nu) * theta * theta;
            }
        }
        assert_relative_eq!(h, -2.0 * PI * direct, max_relative = 1e-14);
    }

    #[test]
    fn dirac_constraint_is_exact() {
        let spec = FieldSpec::dirac(1.4, 0.9, 1.0);
        let psi = vec![c(0.2, 0.1), c(-0.4, 0.0), c(1.0, -0.3), c(0.0, 0.7)];
        let theta = momenta_from_derivatives(&spec, &psi, &[[c(0.0, 0.0); 4]; 4]);
        let g = gamma_matrices();
        let p = DiracSpinor(std::array::from_fn(|i| psi[i]));
        for mu in 0..4 {
            let t = DiracSpinor(std::array::from_fn(|a| theta[a][mu]));
            let r = t + g[mu].scale(C64::from(eta(mu))).apply(&p) * (I * 0.7);
            assert_eq!(r.norm(), 0.0);
        }
    }

    #[test]
    fn on_and_off_shell_scalar_plane_waves() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let wave = |k: FourVector| {
            move |y: &FourVector| {
                let phi = C64::from_polar(1.0, -k.dot(y));
                let kl = k.lower();
                PointFields::from_derivatives(&spec, vec![phi], vec![std::array::from_fn(|mu| -I * kl[mu] * phi)])
            }
        };
        let x = FourVector::new(0.1, 0.2, 0.3, 0.4);
        let on = FourVector::new((1.0f64 + 0.25).sqrt(), 0.5, 0.0, 0.0);
        let r = position_hamilton_residual(&spec, &wave(on), &x, 1e-2, &[], 0.0).unwrap();
        assert!(r < 1e-8, "{r}");
        let off = FourVector::new(1.5, 0.5, 0.0, 0.0);
        let r = position_hamilton_residual(&spec, &wave(off), &x, 1e-2, &[], 0.0).unwrap();
        assert_relative_eq!(r, (off.norm_sq() - 1.0).abs(), max_relative = 1e-6);
    }

    #[test]
    fn parseval_single_mode_and_zero() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let bx = ParsevalBox { side: 2.0 * PI, x0_start: 0.0, duration: 3.0 };
        let one = [BoxMode { lattice: [1, 0, 0], amplitudes: scalar_pair(c(1.0, 0.0), c(0.0, 0.0)) }];
        let out = parseval_check(&spec, &one, &bx).unwrap();
        assert!(out.relative_error < 1e-10, "{out:?}");
        let zero = [BoxMode { lattice: [1, 0, 0], amplitudes: AmplitudePair::zeros(&spec) }];
        assert_eq!(parseval_check(&spec, &zero, &bx).unwrap().relative_error, 0.0);
    }

    #[test]
    fn parseval_rejects_incommensurate_window() {
        let spec = FieldSpec::scalar(1.0, 1.0, 1.0);
        let bx = ParsevalBox { side: 2.0 * PI, x0_start: 0.0, duration: 1.0 };
        let modes = [
            BoxMode { lattice: [1, 0, 0], amplitudes: scalar_pair(c(1.0, 0.0), c(0.5, 0.0)) },
            BoxMode { lattice: [-1, 0, 0], amplitudes: scalar_pair(c(0.2, 0.0), c(0.1, 0.3)) },
        ];
        assert!(matches!(parseval_check(&spec, &modes, &bx), Err(CanonicalError::Config(_))));
    }
}
