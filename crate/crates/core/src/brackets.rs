//! Covariant Poisson bracket over the discrete canonical phase space.
//!
//! The state is one flat real vector holding, per mode, branch and
//! component, the five slots [q, π₀, π₁, π₂, π₃] with covariant indices.
//! For observables A and B
//!
//!   {A, B} = Σ_k (1/w_k) Σ_{μ,ν} V^μ η^{μμ} η^{νν} (∂A/∂q_ν ∂B/∂π_{μν} − ∂A/∂π_{μν} ∂B/∂q_ν),
//!
//! the discrete δ being Kronecker/weight in each functional derivative.
//! Branches are independent, so brackets across them vanish.

use std::fmt;
use std::sync::Arc;

use crate::canonical::{canonical_j_gradient, CanonicalGauge, CanonicalPair, SourceTerms};
use crate::error::{BracketError, CanonicalError};
use crate::field::{FieldKind, FieldSpec};
use crate::kinematics::{eta, FourVector, ModeGrid};
use crate::modes::{branches, Branch};

/// Number of slots per component: q and the four π_μ.
pub const SLOTS: usize = 5;

/// Index map of the flat state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseLayout {
    pub modes: usize,
    pub sectors: usize,
    pub components: usize,
}

/// Slot within one component block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Q,
    Pi(usize),
}

impl PhaseLayout {
    pub fn dim(&self) -> usize {
        self.modes * self.sectors * self.components * SLOTS
    }

    fn sector_index(&self, b: Branch) -> usize {
        match b {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }

    pub fn index(&self, mode: usize, b: Branch, component: usize, slot: Slot) -> usize {
        let s = match slot {
            Slot::Q => 0,
            Slot::Pi(mu) => 1 + mu,
        };
        ((mode * self.sectors + self.sector_index(b)) * self.components + component) * SLOTS + s
    }
}

/// Bracket data: the vector V, mode weights and component signs.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonStructure {
    pub v: FourVector,
    pub weights: Vec<f64>,
    pub layout: PhaseLayout,
    signs: Vec<f64>,
    wave_vectors: Vec<FourVector>,
}

impl PoissonStructure {
    pub fn new(spec: &FieldSpec, grid: &ModeGrid, v: FourVector) -> Result<Self, BracketError> {
        if spec.kind == FieldKind::Dirac {
            return Err(BracketError::Spinor);
        }
        if spec.rank() > 1 {
            return Err(BracketError::Rank(spec.rank()));
        }
        if !v.is_finite() {
            return Err(BracketError::InvalidVector);
        }
        let layout =
            PhaseLayout { modes: grid.len(), sectors: branches(spec).len(), components: spec.components() };
        Ok(Self {
            v,
            weights: grid.modes.iter().map(|m| m.weight).collect(),
            layout,
            signs: spec.component_signs(),
            wave_vectors: grid.modes.iter().map(|m| m.k).collect(),
        })
    }

    /// Same structure with V replaced.
    pub fn with_vector(&self, v: FourVector) -> Self {
        Self { v, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn check(&self, len: usize) -> Result<(), BracketError> {
        if len != self.dim() {
            return Err(BracketError::Dimension { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// Applies the structure matrix Ω, so that {A, B} = ∇Aᵀ Ω ∇B.
    pub fn apply(&self, grad: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grad.len()];
        let l = &self.layout;
        for (block, chunk) in grad.chunks_exact(SLOTS).enumerate() {
            let comp = block % l.components;
            let mode = block / (l.components * l.sectors);
            let base = block * SLOTS;
            let scale = self.signs[comp] / self.weights[mode];
            for mu in 0..4 {
                let c = self.v[mu] * eta(mu) * scale;
                out[base] += c * chunk[1 + mu];
                out[base + 1 + mu] -= c * chunk[0];
            }
        }
        out
    }

    /// ∇Aᵀ Ω ∇B, summed pairwise so that swapping A and B flips the sign
    /// bit for bit.
    fn contract(&self, ga: &[f64], gb: &[f64]) -> f64 {
        let l = &self.layout;
        let mut total = 0.0;
        for (block, (a, b)) in ga.chunks_exact(SLOTS).zip(gb.chunks_exact(SLOTS)).enumerate() {
            let comp = block % l.components;
            let mode = block / (l.components * l.sectors);
            let scale = self.signs[comp] / self.weights[mode];
            for mu in 0..4 {
                let c = self.v[mu] * eta(mu) * scale;
                total += c * (a[0] * b[1 + mu] - a[1 + mu] * b[0]);
            }
        }
        total
    }

    /// Flattens per-mode canonical variables into a state vector.
    pub fn state_from_pairs(&self, pairs: &[CanonicalPair]) -> Result<Vec<f64>, BracketError> {
        if pairs.len() != self.layout.modes {
            return Err(BracketError::Dimension { expected: self.layout.modes, got: pairs.len() });
        }
        let mut x = vec![0.0; self.dim()];
        for (mode, p) in pairs.iter().enumerate() {
            for &b in self.branches() {
                let sec = p.sector(b).ok_or(CanonicalError::Layout)?;
                if sec.q.len() != self.layout.components {
                    return Err(CanonicalError::Layout.into());
                }
                for a in 0..self.layout.components {
                    x[self.layout.index(mode, b, a, Slot::Q)] = sec.q[a];
                    for mu in 0..4 {
                        x[self.layout.index(mode, b, a, Slot::Pi(mu))] = sec.pi[a][mu];
                    }
                }
            }
        }
        Ok(x)
    }

    fn branches(&self) -> &'static [Branch] {
        if self.layout.sectors == 2 {
            &Branch::BOTH
        } else {
            static PLUS: [Branch; 1] = [Branch::Plus];
            &PLUS
        }
    }

    /// Mode index of a wave vector on the grid.
    pub fn mode_of(&self, k: &FourVector) -> Result<usize, BracketError> {
        let tol = 1e-12 * self.wave_vectors.iter().map(|m| m[0]).fold(1.0, f64::max);
        self.wave_vectors
            .iter()
            .position(|m| (0..4).all(|mu| (m[mu] - k[mu]).abs() <= tol))
            .ok_or(BracketError::OffGrid)
    }

    /// The coordinate q_a of one mode and branch.
    pub fn q(&self, mode: usize, b: Branch, component: usize) -> Observable {
        self.unit(self.layout.index(mode, b, component, Slot::Q))
    }

    /// The momentum π_{μa} of one mode and branch.
    pub fn pi(&self, mode: usize, b: Branch, component: usize, mu: usize) -> Observable {
        self.unit(self.layout.index(mode, b, component, Slot::Pi(mu)))
    }

    /// The conjugate momentum V^μ π_{μa}.
    pub fn conjugate_momentum(&self, mode: usize, b: Branch, component: usize) -> Observable {
        let mut g = vec![0.0; self.dim()];
        for mu in 0..4 {
            g[self.layout.index(mode, b, component, Slot::Pi(mu))] = self.v[mu];
        }
        Observable::Linear { gradient: g, offset: 0.0 }
    }

    fn unit(&self, i: usize) -> Observable {
        let mut g = vec![0.0; self.dim()];
        g[i] = 1.0;
        Observable::Linear { gradient: g, offset: 0.0 }
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HvpFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Real function on the canonical state with analytic derivatives.
#[derive(Clone)]
pub enum Observable {
    Constant(f64),
    /// g·x + offset, with a dense gradient.
    Linear { gradient: Vec<f64>, offset: f64 },
    /// ½ xᵀMx + b·x + c. `hessian` lists the entries of the symmetric M
    /// as (row, column, value); both triangles must be present.
    Quadratic { hessian: Vec<(usize, usize, f64)>, linear: Vec<f64>, offset: f64 },
    /// Σ cᵢ Aᵢ.
    Sum(Vec<(f64, Observable)>),
    Product(Box<Observable>, Box<Observable>),
    /// {A, B} under the given structure.
    Bracket(Box<Observable>, Box<Observable>, Arc<PoissonStructure>),
    /// User-supplied value and gradient. Without `hvp` the Hessian-vector
    /// product is a central difference of the gradient.
    General { value: Arc<ValueFn>, gradient: Arc<VectorFn>, hvp: Option<Arc<HvpFn>> },
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant(c) => write!(f, "Constant({c})"),
            Observable::Linear { .. } => write!(f, "Linear"),
            Observable::Quadratic { hessian, .. } => write!(f, "Quadratic({} entries)", hessian.len()),
            Observable::Sum(terms) => f.debug_list().entries(terms.iter().map(|(_, o)| o)).finish(),
            Observable::Product(a, b) => f.debug_tuple("Product").field(a).field(b).finish(),
            Observable::Bracket(a, b, _) => f.debug_tuple("Bracket").field(a).field(b).finish(),
            Observable::General { .. } => write!(f, "General"),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, xi) in out.iter_mut().zip(x) {
        *o += a * xi;
    }
}

impl Observable {
    pub fn scaled(self, c: f64) -> Self {
        Observable::Sum(vec![(c, self)])
    }

    pub fn plus(self, other: Observable) -> Self {
        Observable::Sum(vec![(1.0, self), (1.0, other)])
    }

    pub fn times(self, other: Observable) -> Self {
        Observable::Product(Box::new(self), Box::new(other))
    }

    /// Polynomial degree, `None` for general observables.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Observable::Constant(_) => Some(0),
            Observable::Linear { .. } => Some(1),
            Observable::Quadratic { .. } => Some(2),
            Observable::Sum(t) => t.iter().try_fold(0, |m, (_, o)| o.degree().map(|d| m.max(d))),
            Observable::Product(a, b) => Some(a.degree()? + b.degree()?),
            Observable::Bracket(a, b, _) => Some((a.degree()? + b.degree()?).saturating_sub(2)),
            Observable::General { .. } => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::Linear { gradient, offset } => dot(gradient, x) + offset,
            Observable::Quadratic { hessian, linear, offset } => {
                let quad: f64 = hessian.iter().map(|&(i, j, m)| x[i] * m * x[j]).sum();
                0.5 * quad + dot(linear, x) + offset
            }
            Observable::Sum(t) => t.iter().map(|(c, o)| c * o.value(x)).sum(),
            Observable::Product(a, b) => a.value(x) * b.value(x),
            Observable::Bracket(a, b, s) => s.contract(&a.gradient(x), &b.gradient(x)),
            Observable::General { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Observable::Constant(_) => vec![0.0; x.len()],
            Observable::Linear { gradient, .. } => gradient.clone(),
            Observable::Quadratic { hessian, linear, .. } => {
                let mut g = linear.clone();
                for &(i, j, m) in hessian {
                    g[i] += m * x[j];
                }
                g
            }
            Observable::Sum(t) => {
                let mut g = vec![0.0; x.len()];
                for (c, o) in t {
                    axpy(&mut g, *c, &o.gradient(x));
                }
                g
            }
            Observable::Product(a, b) => {
                let mut g = vec![0.0; x.len()];
                axpy(&mut g, b.value(x), &a.gradient(x));
                axpy(&mut g, a.value(x), &b.gradient(x));
                g
            }
            Observable::Bracket(a, b, s) => {
                // ∇{A,B} = H_A Ω∇B − H_B Ω∇A.
                let oa = s.apply(&a.gradient(x));
                let ob = s.apply(&b.gradient(x));
                let mut g = a.hvp(x, &ob);
                axpy(&mut g, -1.0, &b.hvp(x, &oa));
                g
            }
            Observable::General { gradient, .. } => gradient(x),
        }
    }

    /// Hessian-vector product H·v. For brackets the third-derivative terms
    /// are dropped, which is exact when both arguments have degree ≤ 2.
    pub fn hvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            Observable::Constant(_) | Observable::Linear { .. } => vec![0.0; x.len()],
            Observable::Quadratic { hessian, .. } => {
                let mut out = vec![0.0; x.len()];
                for &(i, j, m) in hessian {
                    out[i] += m * v[j];
                }
                out
            }
            Observable::Sum(t) => {
                let mut out = vec![0.0; x.len()];
                for (c, o) in t {
                    axpy(&mut out, *c, &o.hvp(x, v));
                }
                out
            }
            Observable::Product(a, b) => {
                let (ga, gb) = (a.gradient(x), b.gradient(x));
                let mut out = vec![0.0; x.len()];
                axpy(&mut out, b.value(x), &a.hvp(x, v));
                axpy(&mut out, a.value(x), &b.hvp(x, v));
                axpy(&mut out, dot(&gb, v), &ga);
                axpy(&mut out, dot(&ga, v), &gb);
                out
            }
            Observable::Bracket(a, b, s) => {
                let hav = a.hvp(x, v);
                let hbv = b.hvp(x, v);
                let mut out = a.hvp(x, &s.apply(&hbv));
                axpy(&mut out, -1.0, &b.hvp(x, &s.apply(&hav)));
                out
            }
            Observable::General { gradient, hvp, .. } => match hvp {
                Some(h) => h(x, v),
                None => {
                    let norm = dot(v, v).sqrt();
                    if norm == 0.0 {
                        return vec![0.0; x.len()];
                    }
                    let h = 1e-6 / norm;
                    let shift = |sgn: f64| -> Vec<f64> { x.iter().zip(v).map(|(a, b)| a + sgn * h * b).collect() };
                    let (gp, gm) = (gradient(&shift(1.0)), gradient(&shift(-1.0)));
                    gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * h)).collect()
                }
            },
        }
    }
}

/// {A, B} at `state`.
pub fn poisson_bracket(
    a: &Observable,
    b: &Observable,
    structure: &PoissonStructure,
    state: &[f64],
) -> Result<f64, BracketError> {
    structure.check(state.len())?;
    let (ga, gb) = (a.gradient(state), b.gradient(state));
    structure.check(ga.len())?;
    structure.check(gb.len())?;
    Ok(structure.contract(&ga, &gb))
}

/// The bracket as a new observable.
pub fn bracket_observable(a: Observable, b: Observable, structure: Arc<PoissonStructure>) -> Observable {
    Observable::Bracket(Box::new(a), Box::new(b), structure)
}

/// {q_μ(k), V^λ π_{λν}(k′)} = V·V η_{μν} δ(k, k′), δ = Kronecker/weight.
pub fn canonical_pair_bracket(
    mu: usize,
    nu: usize,
    k: &FourVector,
    k_prime: &FourVector,
    structure: &PoissonStructure,
) -> Result<f64, BracketError> {
    let a = structure.mode_of(k)?;
    let b = structure.mode_of(k_prime)?;
    if a != b || mu != nu {
        return Ok(0.0);
    }
    Ok(structure.v.norm_sq() * eta(mu) / structure.weights[a])
}

/// |{A,{B,C}} + {B,{C,A}} + {C,{A,B}}| at `state`.
pub fn jacobi_defect(
    a: &Observable,
    b: &Observable,
    c: &Observable,
    structure: &Arc<PoissonStructure>,
    state: &[f64],
) -> Result<f64, BracketError> {
    let inner = |x: &Observable, y: &Observable| bracket_observable(x.clone(), y.clone(), structure.clone());
    let t1 = poisson_bracket(a, &inner(b, c), structure, state)?;
    let t2 = poisson_bracket(b, &inner(c, a), structure, state)?;
    let t3 = poisson_bracket(c, &inner(a, b), structure, state)?;
    Ok((t1 + t2 + t3).abs())
}

/// Σ_k Σ_ν (∂J/∂q_ν ∂J/∂π^{μν} − ∂J/∂π^{μν} ∂J/∂q_ν) per μ; returns the
/// largest component.
pub fn dw_conservation_check(
    spec: &FieldSpec,
    grid: &ModeGrid,
    pairs: &[CanonicalPair],
    gauges: &[CanonicalGauge],
    sources: Option<&[SourceTerms]>,
) -> Result<f64, BracketError> {
    if pairs.len() != grid.len() || gauges.len() != grid.len() {
        return Err(BracketError::Dimension { expected: grid.len(), got: pairs.len().min(gauges.len()) });
    }
    // The two contractions are accumulated separately, in the same order.
    let (mut q_pi, mut pi_q) = ([0.0f64; 4], [0.0f64; 4]);
    for (m, mode) in grid.modes.iter().enumerate() {
        for &b in branches(spec) {
            let sec = pairs[m].sector(b).ok_or(CanonicalError::Layout)?;
            let src = sources.map(|s| &s[m]);
            let g = canonical_j_gradient(spec, sec, b, &mode.k, &gauges[m], src);
            for (dq, dpi) in g.d_q.iter().zip(&g.d_pi) {
                for (mu, p) in dpi.iter().enumerate() {
                    q_pi[mu] += dq * p;
                    pi_q[mu] += p * dq;
                }
            }
        }
    }
    Ok(q_pi.iter().zip(&pi_q).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Σ_k w_k J_k as a quadratic observable on the structure's state.
pub fn generator_observable(
    spec: &FieldSpec,
    structure: &PoissonStructure,
    gauges: &[CanonicalGauge],
    sources: Option<&[SourceTerms]>,
) -> Result<Observable, BracketError> {
    let l = structure.layout;
    if gauges.len() != l.modes {
        return Err(BracketError::Dimension { expected: l.modes, got: gauges.len() });
    }
    let mut hessian = Vec::new();
    let mut linear = vec![0.0; structure.dim()];
    let zeros = crate::canonical::CanonicalSector::zeros(l.components);
    for m in 0..l.modes {
        let k = structure.wave_vectors[m];
        let w = structure.weights[m];
        let k2 = k.norm_sq();
        let chi = if spec.kind == FieldKind::Em { -1.0 } else { 1.0 };
        for &b in structure.branches() {
            // The gradient at zero state is the linear part, in raised form.
            let g0 = canonical_j_gradient(spec, &zeros, b, &k, &gauges[m], sources.map(|s| &s[m]));
            for a in 0..l.components {
                let ga = structure.signs[a];
                let iq = l.index(m, b, a, Slot::Q);
                hessian.push((iq, iq, w * ga * chi * k2));
                linear[iq] = w * ga * g0.d_q[a];
                for mu in 0..4 {
                    let ip = l.index(m, b, a, Slot::Pi(mu));
                    hessian.push((ip, ip, w * ga * chi * eta(mu)));
                    linear[ip] = w * ga * eta(mu) * g0.d_pi[a][mu];
                }
            }
        }
    }
    Ok(Observable::Quadratic { hessian, linear, offset: 0.0 })
}
