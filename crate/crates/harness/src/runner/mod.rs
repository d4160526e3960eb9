//! Verification suites. Each suite appends records; a failing or erroring
//! check becomes a failed record and the run continues.

mod bracket;
mod dirac;
mod green;
mod hamilton;
mod parseval;
mod simulate;

use std::collections::BTreeMap;
use std::fmt;

use covham_core::field::{shell_projector, DiracSpinor};
use covham_core::{AmplitudePair, FieldKind, FieldSpec, FourVector, ModeGrid, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::report::{Record, Report, Reproducibility, Table, SCHEMA_VERSION};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Simulate,
    Hamilton,
    Bracket,
    Parseval,
    Green,
    DiracAlgebra,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Simulate => "simulate",
            Suite::Hamilton => "hamilton",
            Suite::Bracket => "bracket",
            Suite::Parseval => "parseval",
            Suite::Green => "green",
            Suite::DiracAlgebra => "dirac-algebra",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

type Meta = Vec<(&'static str, Value)>;
pub(crate) type CheckResult = Result<(f64, Meta), String>;

/// Shared state of one run.
pub(crate) struct Ctx<'a> {
    pub scenario: &'a Scenario,
    pub seed: u64,
    records: Vec<Record>,
    tables: Vec<Table>,
}

impl<'a> Ctx<'a> {
    fn new(scenario: &'a Scenario, seed: u64) -> Self {
        Self { scenario, seed, records: Vec::new(), tables: Vec::new() }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.scenario.tolerances.get(name)
    }

    /// Seeded generator for one named check, independent of run order.
    pub fn rng(&self, salt: &str) -> ChaCha8Rng {
        use rand::SeedableRng;
        let h = crate::scenario::sha256_hex(salt.as_bytes());
        let salt = u64::from_str_radix(&h[..16], 16).unwrap_or(0);
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }

    /// Runs one check and records its outcome.
    pub fn check(&mut self, name: &str, tolerance: &str, f: impl FnOnce(&Self) -> CheckResult) {
        let tol = self.tol(tolerance);
        let record = match f(self) {
            Ok((measured, meta)) => {
                meta.into_iter().fold(Record::compare(name, measured, tol), |r, (k, v)| r.with(k, v))
            }
            Err(e) => Record::failed(name, tol, e),
        };
        let record = record.with("tolerance_name", tolerance).with("grid", self.grid_meta()).with("steps", self.scenario.steps());
        self.records.push(record);
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.tables.push(Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }

    fn grid_meta(&self) -> Value {
        let g = &self.scenario.grid;
        serde_json::json!({ "kmax": g.kmax, "n_per_axis": g.n_per_axis })
    }
}

pub(crate) fn err(e: impl ToString) -> String {
    e.to_string()
}

/// At most `max` evenly strided modes of `grid`.
pub(crate) fn subset(grid: &ModeGrid, max: usize) -> ModeGrid {
    let stride = grid.len().div_ceil(max.max(1)).max(1);
    let mut out = grid.clone();
    out.modes = grid.modes.iter().step_by(stride).copied().collect();
    out
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random free-field coefficients for one mode; spinors are projected onto
/// the matching mass shell.
pub(crate) fn random_free(spec: &FieldSpec, k: &FourVector, rng: &mut ChaCha8Rng) -> Result<AmplitudePair, String> {
    let mut a = AmplitudePair::zeros(spec);
    for c in a.plus.iter_mut().chain(a.minus.iter_mut()) {
        *c = random_c(rng);
    }
    if spec.kind == FieldKind::Dirac {
        for (sign, v) in [(1.0, &mut a.plus), (-1.0, &mut a.minus)] {
            let p = shell_projector(k, spec.kappa, sign, 1e-9).map_err(err)?;
            let s = p.apply(&DiracSpinor(std::array::from_fn(|i| v[i])));
            v.copy_from_slice(&s.0);
        }
    }
    Ok(a)
}

pub(crate) fn json_f64s(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| serde_json::json!(x)).collect())
}

/// Runs `suite` on a validated scenario.
pub fn run_verification(scenario: &Scenario, suite: Suite, seed: u64) -> Report {
    let mut ctx = Ctx::new(scenario, seed);
    let run = |ctx: &mut Ctx, s: Suite| match s {
        Suite::Simulate => simulate::run(ctx),
        Suite::Hamilton => hamilton::run(ctx),
        Suite::Bracket => bracket::run(ctx),
        Suite::Parseval => parseval::run(ctx),
        Suite::Green => green::run(ctx),
        Suite::DiracAlgebra => dirac::run(ctx),
        Suite::All => {}
    };
    if suite == Suite::All {
        for s in [Suite::Simulate, Suite::Hamilton, Suite::Bracket, Suite::Parseval, Suite::Green, Suite::DiracAlgebra] {
            run(&mut ctx, s);
        }
    } else {
        run(&mut ctx, suite);
    }
    let tolerances: BTreeMap<String, f64> = scenario.tolerances.iter().map(|(k, v)| (k.to_string(), v)).collect();
    Report {
        schema_version: SCHEMA_VERSION.into(),
        suite: suite.to_string(),
        records: ctx.records,
        reproducibility: Reproducibility {
            scenario_hash: scenario.hash.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
        },
        tolerances,
        tables: ctx.tables,
        timestamp: timestamp(),
    }
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;
    use covham_core::GridConfig;

    const TINY: &str = r#"{ "field": { "kind": "scalar", "s": 1.0, "m": 1.0, "c": 1.0 },
        "grid": { "kmax": 2.0, "n_per_axis": 4 },
        "time": { "x0_start": 0.0, "x0_end": 1.0, "steps": 20 } }"#;

    #[test]
    fn subset_strides_and_caps() {
        let grid = ModeGrid::build(&GridConfig::new(3.0, 8, 1.0)).unwrap();
        let small = subset(&grid, 10);
        assert!(small.len() <= 10 && !small.is_empty());
        assert_eq!(small.modes[0], grid.modes[0]);
        assert_eq!(subset(&grid, grid.len() + 5).len(), grid.len());
    }

    #[test]
    fn rng_depends_on_seed_and_salt_only() {
        let sc = parse_scenario(TINY).unwrap();
        let a = Ctx::new(&sc, 3).rng("x").gen::<u64>();
        assert_eq!(a, Ctx::new(&sc, 3).rng("x").gen::<u64>());
        assert_ne!(a, Ctx::new(&sc, 4).rng("x").gen::<u64>());
        assert_ne!(a, Ctx::new(&sc, 3).rng("y").gen::<u64>());
    }

    #[test]
    fn erroring_check_becomes_failed_record() {
        let sc = parse_scenario(TINY).unwrap();
        let mut ctx = Ctx::new(&sc, 1);
        ctx.check("demo", "parseval", |_| Err("broken".into()));
        let r = &ctx.records[0];
        assert!(!r.passed());
        assert_eq!(r.metadata["error"], "broken");
        assert_eq!(r.metadata["tolerance_name"], "parseval");
    }

    #[test]
    fn free_scalar_passes_every_suite() {
        let sc = parse_scenario(TINY).unwrap();
        let report = run_verification(&sc, Suite::All, 1);
        let failed: Vec<_> = report.records.iter().filter(|r| !r.passed()).map(|r| r.name.clone()).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(report.records.iter().any(|r| r.name.starts_with("bracket.")));
        assert_eq!(report.suite, "all");
    }
}
