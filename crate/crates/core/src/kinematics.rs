//! Minkowski four-vectors, on-shell mode grids and prescribed worldlines.
//!
//! Signature is (+,−,−,−). A [`FourVector`] always stores contravariant
//! components; [`FourVector::lower`] gives the covariant ones.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::KinematicsError;
use crate::field::DiracCoupling;

/// Diagonal of the metric, η = diag(+1, −1, −1, −1).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Metric sign η^{μμ} (equal to η_{μμ}).
#[inline]
pub fn eta(mu: usize) -> f64 {
    METRIC[mu]
}

/// Contravariant four-vector.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self([x0, x1, x2, x3])
    }

    pub const fn from_parts(time: f64, space: [f64; 3]) -> Self {
        Self([time, space[0], space[1], space[2]])
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Covariant components x_μ = η_μν x^ν.
    #[inline]
    pub fn lower(&self) -> [f64; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    #[inline]
    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        minkowski_dot(self, self)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, mu: usize) -> &f64 {
        &self.0[mu]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, rhs: f64) -> FourVector {
        FourVector(self.0.map(|c| c * rhs))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

/// a·b = a⁰b⁰ − a¹b¹ − a²b² − a³b³.
#[inline]
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Positive-frequency energy of a spatial wave vector on the mass shell.
pub fn mass_shell_energy(k_spatial: [f64; 3], kappa: f64) -> Result<f64, KinematicsError> {
    if !(kappa >= 0.0) {
        return Err(KinematicsError::NegativeKappa(kappa));
    }
    let k2 = k_spatial.iter().map(|c| c * c).sum::<f64>();
    if k2 == 0.0 && kappa == 0.0 {
        return Err(KinematicsError::ZeroMode);
    }
    Ok((k2 + kappa * kappa).sqrt())
}

/// Which lattice cells of the cube [−kmax, kmax]³ are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GridShape {
    /// Cells whose centre lies inside the ball |k| ≤ kmax.
    #[default]
    Ball,
    /// Every cell of the cube.
    Cube,
}

/// Parameters for [`ModeGrid::build`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub kmax: f64,
    pub n_per_axis: usize,
    pub kappa: f64,
    /// Modes with k⁰ below this are dropped. `None` means `1e-6 * kmax`.
    pub k0_floor: Option<f64>,
    /// Upper bound on n_per_axis³.
    pub max_modes: usize,
    pub shape: GridShape,
}

impl GridConfig {
    pub const DEFAULT_MAX_MODES: usize = 8_000_000;

    pub fn new(kmax: f64, n_per_axis: usize, kappa: f64) -> Self {
        Self {
            kmax,
            n_per_axis,
            kappa,
            k0_floor: None,
            max_modes: Self::DEFAULT_MAX_MODES,
            shape: GridShape::Ball,
        }
    }

    pub fn with_shape(mut self, shape: GridShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_k0_floor(mut self, floor: f64) -> Self {
        self.k0_floor = Some(floor);
        self
    }

    pub fn with_max_modes(mut self, max_modes: usize) -> Self {
        self.max_modes = max_modes;
        self
    }
}

/// One on-shell mode and its quadrature weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: FourVector,
    pub weight: f64,
}

/// Discrete positive-energy mass shell.
///
/// Weights realise the measure (1/8π³)∫d⁴k Θ(k⁰) δ(k·k − κ²), i.e.
/// Δk³ / (8π³ · 2k⁰) per lattice cell.
#[derive(Clone, Debug)]
pub struct ModeGrid {
    pub modes: Vec<Mode>,
    pub kappa: f64,
    pub kmax: f64,
    pub n_per_axis: usize,
    /// Lattice spacing of the spatial wave vectors.
    pub spacing: f64,
}

impl ModeGrid {
    /// Midpoint lattice over [−kmax, kmax]³.
    pub fn build(cfg: &GridConfig) -> Result<Self, KinematicsError> {
        if !(cfg.kmax > 0.0) || !cfg.kmax.is_finite() {
            return Err(KinematicsError::InvalidGrid(format!("kmax must be positive, got {}", cfg.kmax)));
        }
        if cfg.n_per_axis == 0 {
            return Err(KinematicsError::InvalidGrid("n_per_axis must be at least 1".into()));
        }
        if !(cfg.kappa >= 0.0) {
            return Err(KinematicsError::NegativeKappa(cfg.kappa));
        }
        let total = cfg.n_per_axis.checked_pow(3).unwrap_or(usize::MAX);
        if total > cfg.max_modes {
            return Err(KinematicsError::ModeBudget { requested: total, budget: cfg.max_modes });
        }
        let n = cfg.n_per_axis;
        let dk = 2.0 * cfg.kmax / n as f64;
        let floor = cfg.k0_floor.unwrap_or(1e-6 * cfg.kmax);
        let cell = dk * dk * dk / (8.0 * PI * PI * PI);
        let coord = |i: usize| -cfg.kmax + (i as f64 + 0.5) * dk;

        let mut modes = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let ks = [coord(i), coord(j), coord(l)];
                    if cfg.shape == GridShape::Ball && norm3(ks) > cfg.kmax {
                        continue;
                    }
                    let k0 = match mass_shell_energy(ks, cfg.kappa) {
                        Ok(k0) => k0,
                        Err(KinematicsError::ZeroMode) => continue,
                        Err(e) => return Err(e),
                    };
                    if k0 < floor {
                        continue;
                    }
                    modes.push(Mode { k: FourVector::from_parts(k0, ks), weight: cell / (2.0 * k0) });
                }
            }
        }
        Ok(Self { modes, kappa: cfg.kappa, kmax: cfg.kmax, n_per_axis: n, spacing: dk })
    }

    /// Modes k = 2πn/L of a periodic cube of side `side`.
    ///
    /// The weight 1/(2k⁰L³) is the lattice weight above with Δk = 2π/L.
    pub fn periodic_box(side: f64, lattice: &[[i32; 3]], kappa: f64) -> Result<Self, KinematicsError> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(KinematicsError::InvalidGrid(format!("box side must be positive, got {side}")));
        }
        let dk = 2.0 * PI / side;
        let mut modes = Vec::with_capacity(lattice.len());
        let mut kmax: f64 = 0.0;
        for n in lattice {
            let ks = n.map(|c| c as f64 * dk);
            let k0 = mass_shell_energy(ks, kappa)?;
            kmax = kmax.max(norm3(ks));
            modes.push(Mode { k: FourVector::from_parts(k0, ks), weight: 1.0 / (2.0 * k0 * side.powi(3)) });
        }
        Ok(Self { modes, kappa, kmax, n_per_axis: 0, spacing: dk })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Spatial period 2π/Δk of the lattice sum; mode sums repeat with it.
    pub fn spatial_period(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    /// Index of the mode whose wave vector matches `k` to within 1e-9 of the spacing.
    pub fn find(&self, k: &FourVector) -> Option<usize> {
        let tol = 1e-9 * self.spacing.max(1.0);
        self.modes.iter().position(|m| (0..4).all(|mu| (m.k[mu] - k[mu]).abs() <= tol))
    }
}

/// Trajectory shape of a prescribed worldline.
#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    /// At rest at the spatial part of the anchor event.
    Static,
    /// Constant three-velocity (units of c).
    Uniform { velocity: [f64; 3] },
    /// Circle in the x¹x²-plane around the anchor's spatial point.
    /// `angular_frequency` is per unit coordinate time.
    Circular { radius: f64, angular_frequency: f64 },
}

/// Source couplings carried by a particle.
#[derive(Clone, Debug, PartialEq)]
pub enum Coupling {
    /// Scalar/tensor coupling g or electric charge e.
    Strength(f64),
    Dirac(DiracCoupling),
}

/// Prescribed particle path u(τ) with u(0) = `anchor`.
///
/// All supported kinds have u⁰(τ) = anchor⁰ + γτ, so equal-time crossings
/// are closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Worldline {
    pub label: usize,
    pub trajectory: Trajectory,
    pub anchor: FourVector,
    pub coupling: Coupling,
    /// Proper time at which the particle appears. `None` means it has been
    /// present forever.
    pub switch_on: Option<f64>,
}

impl Worldline {
    pub fn new_static(label: usize, position: [f64; 3], coupling: Coupling) -> Self {
        Self {
            label,
            trajectory: Trajectory::Static,
            anchor: FourVector::from_parts(0.0, position),
            coupling,
            switch_on: None,
        }
    }

    pub fn new_uniform(label: usize, anchor: FourVector, velocity: [f64; 3], coupling: Coupling) -> Self {
        Self { label, trajectory: Trajectory::Uniform { velocity }, anchor, coupling, switch_on: None }
    }

    pub fn new_circular(
        label: usize,
        anchor: FourVector,
        radius: f64,
        angular_frequency: f64,
        coupling: Coupling,
    ) -> Self {
        Self {
            label,
            trajectory: Trajectory::Circular { radius, angular_frequency },
            anchor,
            coupling,
            switch_on: Some(0.0),
        }
    }

    pub fn switched_on_at(mut self, tau: f64) -> Self {
        self.switch_on = Some(tau);
        self
    }

    pub fn eternal(mut self) -> Self {
        self.switch_on = None;
        self
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |msg: String| Err(KinematicsError::InvalidWorldline { label: self.label, msg });
        if !self.anchor.is_finite() {
            return bad("anchor event has non-finite components".into());
        }
        match self.trajectory {
            Trajectory::Static => {}
            Trajectory::Uniform { velocity } => {
                let v = norm3(velocity);
                if !(v < 1.0) {
                    return bad(format!("speed {v} is not below 1"));
                }
            }
            Trajectory::Circular { radius, angular_frequency } => {
                if !(radius > 0.0) {
                    return bad(format!("radius must be positive, got {radius}"));
                }
                let v = (radius * angular_frequency).abs();
                if !(v < 1.0) {
                    return bad(format!("orbital speed {v} is not below 1"));
                }
                if self.switch_on.is_none() {
                    return bad("circular worldlines need a switch-on proper time".into());
                }
            }
        }
        if let Some(t) = self.switch_on {
            if !t.is_finite() {
                return bad("switch-on proper time is not finite".into());
            }
        }
        Ok(())
    }

    /// Lorentz factor dt/dτ.
    pub fn gamma(&self) -> f64 {
        match self.trajectory {
            Trajectory::Static => 1.0,
            Trajectory::Uniform { velocity } => {
                let v2 = velocity.iter().map(|c| c * c).sum::<f64>();
                1.0 / (1.0 - v2).sqrt()
            }
            Trajectory::Circular { radius, angular_frequency } => {
                let v = radius * angular_frequency;
                1.0 / (1.0 - v * v).sqrt()
            }
        }
    }

    /// Position and four-velocity at proper time τ.
    pub fn state(&self, tau: f64) -> (FourVector, FourVector) {
        let a = self.anchor;
        match self.trajectory {
            Trajectory::Static => (a + FourVector::new(tau, 0.0, 0.0, 0.0), FourVector::new(1.0, 0.0, 0.0, 0.0)),
            Trajectory::Uniform { velocity } => {
                let g = self.gamma();
                let udot = FourVector::from_parts(g, velocity.map(|v| g * v));
                (a + udot * tau, udot)
            }
            Trajectory::Circular { radius, angular_frequency } => {
                let g = self.gamma();
                let phase = angular_frequency * g * tau;
                let (s, c) = phase.sin_cos();
                let u = FourVector::new(a[0] + g * tau, a[1] + radius * c, a[2] + radius * s, a[3]);
                let speed = radius * angular_frequency * g;
                let udot = FourVector::new(g, -speed * s, speed * c, 0.0);
                (u, udot)
            }
        }
    }

    /// Coordinate time at which the particle appears (−∞ if eternal).
    pub fn first_time(&self) -> f64 {
        match self.switch_on {
            Some(t) => self.anchor[0] + self.gamma() * t,
            None => f64::NEG_INFINITY,
        }
    }

    /// Proper time τ* with u⁰(τ*) = x0.
    pub fn equal_time_crossing(&self, x0: f64) -> Result<f64, KinematicsError> {
        if !x0.is_finite() {
            return Err(KinematicsError::OutOfRange { label: self.label, x0 });
        }
        let tau = (x0 - self.anchor[0]) / self.gamma();
        match self.switch_on {
            // Θ(0) = 1: the particle is present at its switch-on instant.
            Some(t) if tau < t => Err(KinematicsError::OutOfRange { label: self.label, x0 }),
            _ => Ok(tau),
        }
    }
}

/// Convenience wrapper matching the free-function form of [`Worldline::state`].
pub fn worldline_state(w: &Worldline, tau: f64) -> (FourVector, FourVector) {
    w.state(tau)
}

/// Convenience wrapper for [`Worldline::equal_time_crossing`].
pub fn equal_time_crossing(w: &Worldline, x0: f64) -> Result<f64, KinematicsError> {
    w.equal_time_crossing(x0)
}
