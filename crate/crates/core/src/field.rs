//! Field species, dense tensor components and the Dirac algebra.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::FieldError;
use crate::kinematics::{eta, FourVector};

/// Largest tensor rank accepted by default (4⁴ = 256 components).
pub const MAX_RANK: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Tensor { rank: usize },
    Em,
    Dirac,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reality {
    Complex,
    Real,
}

/// Action, mass and speed-of-light constants of a species.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub s: f64,
    pub m: f64,
    pub c: f64,
}

/// Species descriptor with the kinetic (a²) and mass (b²) constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub a2: f64,
    pub b2: f64,
    pub kappa: f64,
    pub constants: Constants,
    pub reality: Reality,
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

impl FieldSpec {
    /// Complex scalar: a² = s²/c, b² = m²c, κ = mc/s.
    pub fn scalar(s: f64, m: f64, c: f64) -> Self {
        Self {
            kind: FieldKind::Scalar,
            a2: s * s / c,
            b2: m * m * c,
            kappa: m * c / s,
            constants: Constants { s, m, c },
            reality: Reality::Complex,
        }
    }

    /// Maxwell potential: a² = −1/(8πc), b² = 0.
    pub fn em(c: f64) -> Self {
        Self {
            kind: FieldKind::Em,
            a2: -1.0 / (8.0 * PI * c),
            b2: 0.0,
            kappa: 0.0,
            constants: Constants { s: 1.0, m: 0.0, c },
            reality: Reality::Real,
        }
    }

    /// Classical Dirac field: a² = s, b² = mc, κ = mc/s.
    pub fn dirac(s: f64, m: f64, c: f64) -> Self {
        Self {
            kind: FieldKind::Dirac,
            a2: s,
            b2: m * c,
            kappa: m * c / s,
            constants: Constants { s, m, c },
            reality: Reality::Complex,
        }
    }

    /// Complex rank-ℓ tensor with b² = a²κ².
    pub fn tensor(rank: usize, a2: f64, kappa: f64) -> Self {
        Self {
            kind: FieldKind::Tensor { rank },
            a2,
            b2: a2 * kappa * kappa,
            kappa,
            constants: Constants { s: 1.0, m: kappa, c: 1.0 },
            reality: Reality::Complex,
        }
    }

    /// Checks the relations tying a², b², κ and (s, m, c) together.
    pub fn validate(&self) -> Result<(), FieldError> {
        let inv = |field: &'static str, msg: String| Err(FieldError::Invariant { field, msg });
        let Constants { s, m, c } = self.constants;
        let all = [self.a2, self.b2, self.kappa, s, m, c];
        if all.iter().any(|v| !v.is_finite()) {
            return inv("field", "non-finite constant".into());
        }
        if !(c > 0.0) {
            return inv("c", format!("must be positive, got {c}"));
        }
        match self.kind {
            FieldKind::Scalar | FieldKind::Dirac => {
                if !(s > 0.0) {
                    return inv("s", format!("must be positive, got {s}"));
                }
                if !(m > 0.0) {
                    return inv("m", format!("must be positive, got {m}"));
                }
                let (a2, b2) = if self.kind == FieldKind::Scalar { (s * s / c, m * m * c) } else { (s, m * c) };
                if !rel_close(self.a2, a2) {
                    return inv("a2", format!("expected {a2}, got {}", self.a2));
                }
                if !rel_close(self.b2, b2) {
                    return inv("b2", format!("expected {b2}, got {}", self.b2));
                }
                if !rel_close(self.kappa, m * c / s) {
                    return inv("kappa", format!("expected {}, got {}", m * c / s, self.kappa));
                }
                if self.reality != Reality::Complex {
                    return inv("reality", "must be complex".into());
                }
            }
            FieldKind::Em => {
                let a2 = -1.0 / (8.0 * PI * c);
                if !rel_close(self.a2, a2) {
                    return inv("a2", format!("em requires a2 = -1/(8 pi c) = {a2}, got {}", self.a2));
                }
                if self.b2 != 0.0 {
                    return inv("b2", format!("em requires b2 = 0, got {}", self.b2));
                }
                if self.kappa != 0.0 {
                    return inv("kappa", format!("em requires kappa = 0, got {}", self.kappa));
                }
                if self.reality != Reality::Real {
                    return inv("reality", "em potential must be real".into());
                }
            }
            FieldKind::Tensor { rank } => {
                if rank > MAX_RANK {
                    return Err(FieldError::RankTooLarge(rank));
                }
                if !(self.a2 > 0.0) {
                    return inv("a2", format!("tensor requires a2 > 0, got {}", self.a2));
                }
                if !(self.kappa >= 0.0) {
                    return inv("kappa", format!("must be non-negative, got {}", self.kappa));
                }
                if !rel_close(self.b2 / self.a2, self.kappa * self.kappa) {
                    return inv("b2", format!("b2/a2 = {} differs from kappa^2", self.b2 / self.a2));
                }
            }
        }
        Ok(())
    }

    /// Tensor rank of the amplitudes (spinors count as rank 1 over 4 slots).
    pub fn rank(&self) -> usize {
        match self.kind {
            FieldKind::Scalar => 0,
            FieldKind::Tensor { rank } => rank,
            FieldKind::Em | FieldKind::Dirac => 1,
        }
    }

    /// Number of complex amplitude entries per branch.
    pub fn components(&self) -> usize {
        4usize.pow(self.rank() as u32)
    }

    /// Whether the species carries a second (negative-frequency) amplitude.
    pub fn has_minus_branch(&self) -> bool {
        self.reality == Reality::Complex
    }

    /// Sign of the inner product ⟨A, A⟩ for each amplitude entry.
    ///
    /// Tensors use the metric sign product over their indices; spinors use
    /// the Dirac conjugate ψ̄ψ, which in the Dirac basis is diag(1,1,−1,−1).
    pub fn component_signs(&self) -> Vec<f64> {
        match self.kind {
            FieldKind::Dirac => vec![1.0, 1.0, -1.0, -1.0],
            _ => (0..self.components()).map(|i| index_sign(i, self.rank())).collect(),
        }
    }
}

/// Product of metric signs over the multi-index encoded by `flat`.
pub fn index_sign(flat: usize, rank: usize) -> f64 {
    let mut sign = 1.0;
    let mut rest = flat;
    for _ in 0..rank {
        sign *= eta(rest % 4);
        rest /= 4;
    }
    sign
}

/// Dense rank-ℓ tensor, row-major over (ν₁, …, ν_ℓ), covariant indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorComponents {
    pub rank: usize,
    pub entries: Vec<C64>,
}

impl TensorComponents {
    pub fn zeros(rank: usize) -> Self {
        Self { rank, entries: vec![ZERO; 4usize.pow(rank as u32)] }
    }

    pub fn from_entries(rank: usize, entries: Vec<C64>) -> Result<Self, FieldError> {
        if entries.len() != 4usize.pow(rank as u32) {
            return Err(FieldError::RankMismatch { left: rank, right: entries.len() });
        }
        Ok(Self { rank, entries })
    }

    pub fn flat_index(indices: &[usize]) -> usize {
        indices.iter().fold(0, |acc, &i| acc * 4 + i)
    }

    pub fn get(&self, indices: &[usize]) -> C64 {
        self.entries[Self::flat_index(indices)]
    }

    pub fn set(&mut self, indices: &[usize], value: C64) {
        let i = Self::flat_index(indices);
        self.entries[i] = value;
    }

    /// v_{ν₁} ⋯ v_{ν_ℓ} for a covariant vector `v`.
    pub fn outer_power(v: [f64; 4], rank: usize) -> Self {
        let mut entries = vec![ONE];
        for _ in 0..rank {
            entries = entries.iter().flat_map(|e| v.iter().map(move |c| e * c)).collect();
        }
        Self { rank, entries }
    }
}

/// Full contraction A*_{ν…} B^{ν…}.
pub fn contract_full(a: &TensorComponents, b: &TensorComponents) -> Result<C64, FieldError> {
    if a.rank != b.rank {
        return Err(FieldError::RankMismatch { left: a.rank, right: b.rank });
    }
    Ok(a
        .entries
        .iter()
        .zip(&b.entries)
        .enumerate()
        .map(|(i, (x, y))| x.conj() * y * index_sign(i, a.rank))
        .sum())
}

/// 4×4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn diag(d: [C64; 4]) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat4(self.0.map(|row| row.map(|e| e * s)))
    }

    pub fn adjoint(&self) -> Self {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn apply(&self, v: &DiracSpinor) -> DiracSpinor {
        DiracSpinor(std::array::from_fn(|i| (0..4).map(|j| self.0[i][j] * v.0[j]).sum()))
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|l| self.0[i][l] * rhs.0[l][j]).sum())))
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])))
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])))
    }
}

/// Dirac-basis γ^μ: γ⁰ = diag(I, −I), γⁱ = [[0, σᵢ], [−σᵢ, 0]].
pub fn gamma_matrices() -> [Mat4; 4] {
    let sigma: [[[C64; 2]; 2]; 3] = [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ];
    let g0 = Mat4::diag([ONE, ONE, -ONE, -ONE]);
    let spatial = |s: &[[C64; 2]; 2]| {
        let mut m = Mat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j + 2] = s[i][j];
                m.0[i + 2][j] = -s[i][j];
            }
        }
        m
    };
    [g0, spatial(&sigma[0]), spatial(&sigma[1]), spatial(&sigma[2])]
}

/// k_μγ^μ for a contravariant `k`.
pub fn slash(k: &FourVector) -> Mat4 {
    let g = gamma_matrices();
    let lower = k.lower();
    (0..4).fold(Mat4::zero(), |acc, mu| acc + g[mu].scale(C64::from(lower[mu])))
}

/// (κ ± k_μγ^μ)/(2κ) for on-shell `k`.
pub fn shell_projector(k: &FourVector, kappa: f64, sign: f64, tol: f64) -> Result<Mat4, FieldError> {
    if !(kappa > 0.0) {
        return Err(FieldError::MasslessSpinor);
    }
    let defect = (k.norm_sq() - kappa * kappa).abs();
    if defect > tol * kappa.powi(2).max(1.0) {
        return Err(FieldError::OffShell(defect));
    }
    Ok((Mat4::identity().scale(C64::from(kappa)) + slash(k).scale(C64::from(sign))).scale(C64::from(0.5 / kappa)))
}

/// Four complex spinor components.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DiracSpinor(pub [C64; 4]);

impl DiracSpinor {
    pub fn basis(i: usize) -> Self {
        let mut s = Self::default();
        s.0[i] = ONE;
        s
    }

    /// Row spinor ψ̄ = ψ†γ⁰.
    pub fn dirac_conjugate(&self) -> [C64; 4] {
        let g0 = [1.0, 1.0, -1.0, -1.0];
        std::array::from_fn(|i| self.0[i].conj() * g0[i])
    }

    /// ψ̄ φ.
    pub fn bar_dot(&self, other: &DiracSpinor) -> C64 {
        self.dirac_conjugate().iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for DiracSpinor {
    type Output = DiracSpinor;
    fn add(self, rhs: DiracSpinor) -> DiracSpinor {
        DiracSpinor(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for DiracSpinor {
    type Output = DiracSpinor;
    fn sub(self, rhs: DiracSpinor) -> DiracSpinor {
        DiracSpinor(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<C64> for DiracSpinor {
    type Output = DiracSpinor;
    fn mul(self, rhs: C64) -> DiracSpinor {
        DiracSpinor(self.0.map(|c| c * rhs))
    }
}

/// The three spinor couplings of one particle.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DiracCoupling {
    pub xi1: DiracSpinor,
    pub xi2: DiracSpinor,
    pub xi3: DiracSpinor,
}

impl DiracCoupling {
    pub fn is_finite(&self) -> bool {
        self.xi1.is_finite() && self.xi2.is_finite() && self.xi3.is_finite()
    }
}

/// ξ = ξ₁ + u̇_μγ^μ ξ₂ + u̇_μu̇_νγ^μγ^ν ξ₃, evaluated without using u̇·u̇ = 1.
pub fn dirac_interaction_spinor(coupling: &DiracCoupling, udot: &FourVector) -> DiracSpinor {
    let u = slash(udot);
    coupling.xi1 + u.apply(&coupling.xi2) + (u * u).apply(&coupling.xi3)
}
