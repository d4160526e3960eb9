//! Named pass thresholds. Every check compares a non-negative measured
//! defect against one of these.

use std::collections::BTreeMap;

/// Default thresholds, keyed by name.
pub const DEFAULTS: &[(&str, f64)] = &[
    ("antisymmetry", 0.0),
    ("bilinearity", 1e-12),
    ("canonical_pair", 0.0),
    ("causality", 0.0),
    ("clifford", 1e-15),
    ("dirac_residual", 1e-8),
    ("dirac_shell", 1e-10),
    ("dw_conservation", 0.0),
    ("gauge_invariance", 1e-12),
    ("generator_flow", 1e-10),
    ("green", 0.05),
    ("hamilton_free", 1e-10),
    ("hamilton_order", 0.3),
    ("hermiticity", 0.0),
    ("history", 1e-4),
    ("j_conservation", 1e-12),
    ("jacobi", 1e-8),
    ("leibniz", 1e-10),
    ("monotone", 0.0),
    ("pair_consistency", 1e-13),
    ("parseval", 1e-6),
    ("pde_residual", 1e-2),
    ("position_hamilton", 1e-6),
    ("projector", 1e-12),
    ("roundtrip", 1e-12),
    ("superposition", 1e-12),
    ("vector_scaling", 1e-12),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULTS.iter().copied().collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    /// Overrides a known threshold.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(format!("tolerance must be a finite non-negative number, got {value}"));
        }
        let key = DEFAULTS.iter().find(|(k, _)| *k == name).map(|(k, _)| *k).ok_or_else(|| {
            let known: Vec<_> = DEFAULTS.iter().map(|(k, _)| *k).collect();
            format!("unknown tolerance, expected one of {}", known.join(", "))
        })?;
        self.0.insert(key, value);
        Ok(())
    }

    /// Parses a `name=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), String> {
        let (name, value) = spec.split_once('=').ok_or_else(|| format!("expected name=value, got `{spec}`"))?;
        let value: f64 = value.trim().parse().map_err(|e| format!("tolerance `{name}`: {e}"))?;
        self.set(name.trim(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}
