//! Scenario files: JSON documents describing a field, its sources, the mode
//! grid and the time window.

use std::collections::BTreeMap;
use std::path::Path;

use covham_core::field::DiracSpinor;
use covham_core::{
    Coupling, DiracCoupling, FieldKind, FieldSpec, FourVector, GridConfig, GridShape, Worldline, C64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::Tolerances;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Scalar,
    Tensor,
    Em,
    Dirac,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub kind: KindName,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub a2: Option<f64>,
    #[serde(default)]
    pub b2: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Static,
    Uniform,
    Circular,
}

/// Spinor as four [re, im] pairs.
pub type SpinorSection = [[f64; 2]; 4];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiSection {
    #[serde(default)]
    pub xi1: SpinorSection,
    #[serde(default)]
    pub xi2: SpinorSection,
    #[serde(default)]
    pub xi3: SpinorSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    #[serde(default)]
    pub label: Option<usize>,
    pub kind: PathKind,
    /// Spatial position of a static particle.
    #[serde(default)]
    pub position: Option<[f64; 3]>,
    /// Event u(0) for uniform and circular paths.
    #[serde(default)]
    pub anchor: Option<[f64; 4]>,
    #[serde(default)]
    pub velocity: Option<[f64; 3]>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub angular_frequency: Option<f64>,
    #[serde(default)]
    pub coupling: Option<f64>,
    #[serde(default)]
    pub xi: Option<XiSection>,
    /// Proper time of appearance; absent or null means present forever.
    #[serde(default)]
    pub switch_on: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShapeName {
    #[default]
    Ball,
    Cube,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub kmax: f64,
    pub n_per_axis: usize,
    #[serde(default)]
    pub k0_floor: Option<f64>,
    #[serde(default)]
    pub max_modes: Option<usize>,
    #[serde(default)]
    pub shape: ShapeName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub x0_start: f64,
    pub x0_end: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    pub z_re: f64,
    pub z_im: f64,
}

impl Default for GaugeSection {
    fn default() -> Self {
        Self { z_re: std::f64::consts::FRAC_1_SQRT_2, z_im: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSection {
    pub v: [f64; 4],
}

impl Default for BracketSection {
    fn default() -> Self {
        Self { v: [1.0, 0.0, 0.0, 0.0] }
    }
}

/// Probe settings for the oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenSection {
    /// Evaluation time; defaults to the end of the time window.
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Gaussian taper strength; 0 disables the taper.
    #[serde(default = "default_alpha")]
    pub window_alpha: f64,
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
    /// Optional refinement ladder of (kmax, n_per_axis) pairs.
    #[serde(default)]
    pub ladder: Vec<(f64, usize)>,
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 1.5, 2.0, 2.5, 3.0]
}

fn default_alpha() -> f64 {
    2.0
}

fn default_exclusion() -> f64 {
    0.5
}

impl Default for GreenSection {
    fn default() -> Self {
        Self { x0: None, radii: default_radii(), window_alpha: default_alpha(), exclusion: default_exclusion(), ladder: vec![] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

/// The document as written on disk, with defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub field: FieldSection,
    #[serde(default)]
    pub particles: Vec<ParticleSection>,
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub gauge: GaugeSection,
    #[serde(default)]
    pub bracket: BracketSection,
    #[serde(default)]
    pub green: GreenSection,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated scenario ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub source: ScenarioFile,
    pub spec: FieldSpec,
    pub worldlines: Vec<Worldline>,
    pub grid: GridConfig,
    pub gauge_z: C64,
    pub bracket_v: FourVector,
    pub tolerances: Tolerances,
    /// SHA-256 of the file contents, hex encoded.
    pub hash: String,
}

impl Scenario {
    pub fn x0_start(&self) -> f64 {
        self.source.time.x0_start
    }

    pub fn x0_end(&self) -> f64 {
        self.source.time.x0_end
    }

    pub fn steps(&self) -> usize {
        self.source.time.steps
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| ScenarioError::Parse { line: e.line(), column: e.column(), msg: e.to_string() })?;
    let hash = sha256_hex(text.as_bytes());
    build(file, hash)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn require(v: Option<f64>, field: &str) -> Result<f64, ScenarioError> {
    v.ok_or_else(|| invalid(field, "required for this field kind"))
}

fn build_spec(f: &FieldSection) -> Result<FieldSpec, ScenarioError> {
    let mut spec = match f.kind {
        KindName::Scalar => FieldSpec::scalar(require(f.s, "field.s")?, require(f.m, "field.m")?, require(f.c, "field.c")?),
        KindName::Dirac => FieldSpec::dirac(require(f.s, "field.s")?, require(f.m, "field.m")?, require(f.c, "field.c")?),
        KindName::Em => FieldSpec::em(require(f.c, "field.c")?),
        KindName::Tensor => {
            let rank = f.rank.ok_or_else(|| invalid("field.rank", "required for tensor fields"))?;
            FieldSpec::tensor(rank, require(f.a2, "field.a2")?, require(f.kappa, "field.kappa")?)
        }
    };
    if f.kind != KindName::Tensor && f.rank.is_some() {
        return Err(invalid("field.rank", "only tensor fields take a rank"));
    }
    if let Some(a2) = f.a2 {
        spec.a2 = a2;
    }
    if let Some(b2) = f.b2 {
        spec.b2 = b2;
    }
    if let Some(kappa) = f.kappa {
        spec.kappa = kappa;
    }
    spec.validate().map_err(|e| match e {
        covham_core::FieldError::Invariant { field, msg } => invalid(format!("field.{field}"), msg),
        other => invalid("field", other.to_string()),
    })?;
    Ok(spec)
}

fn spinor(s: &SpinorSection) -> DiracSpinor {
    DiracSpinor(std::array::from_fn(|i| C64::new(s[i][0], s[i][1])))
}

fn build_worldline(i: usize, p: &ParticleSection, spec: &FieldSpec) -> Result<Worldline, ScenarioError> {
    let at = |name: &str| format!("particles[{i}].{name}");
    let coupling = match (spec.kind, &p.xi, p.coupling) {
        (FieldKind::Dirac, Some(xi), None) => {
            Coupling::Dirac(DiracCoupling { xi1: spinor(&xi.xi1), xi2: spinor(&xi.xi2), xi3: spinor(&xi.xi3) })
        }
        (FieldKind::Dirac, None, _) => return Err(invalid(at("xi"), "dirac sources need xi couplings")),
        (FieldKind::Dirac, Some(_), Some(_)) => return Err(invalid(at("coupling"), "dirac sources take xi only")),
        (_, Some(_), _) => return Err(invalid(at("xi"), "xi couplings are for dirac fields only")),
        (_, None, Some(g)) => Coupling::Strength(g),
        (_, None, None) => return Err(invalid(at("coupling"), "missing coupling strength")),
    };
    let label = p.label.unwrap_or(i);
    let mut w = match p.kind {
        PathKind::Static => {
            let pos = p.position.ok_or_else(|| invalid(at("position"), "required for static particles"))?;
            Worldline::new_static(label, pos, coupling)
        }
        PathKind::Uniform => {
            let anchor = p.anchor.ok_or_else(|| invalid(at("anchor"), "required for uniform particles"))?;
            let v = p.velocity.ok_or_else(|| invalid(at("velocity"), "required for uniform particles"))?;
            Worldline::new_uniform(label, FourVector(anchor), v, coupling)
        }
        PathKind::Circular => {
            let anchor = p.anchor.ok_or_else(|| invalid(at("anchor"), "required for circular particles"))?;
            let r = p.radius.ok_or_else(|| invalid(at("radius"), "required for circular particles"))?;
            let om = p.angular_frequency.ok_or_else(|| invalid(at("angular_frequency"), "required"))?;
            let w = Worldline::new_circular(label, FourVector(anchor), r, om, coupling);
            if p.switch_on.is_none() {
                return Err(invalid(at("switch_on"), "circular particles need a switch-on time"));
            }
            w
        }
    };
    w.switch_on = p.switch_on;
    w.validate().map_err(|e| invalid(format!("particles[{i}]"), e.to_string()))?;
    Ok(w)
}

fn build(file: ScenarioFile, hash: String) -> Result<Scenario, ScenarioError> {
    let spec = build_spec(&file.field)?;
    let worldlines =
        file.particles.iter().enumerate().map(|(i, p)| build_worldline(i, p, &spec)).collect::<Result<Vec<_>, _>>()?;
    let mut labels: Vec<usize> = worldlines.iter().map(|w| w.label).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|p| p[0] == p[1]) {
        return Err(invalid("particles", "labels must be unique"));
    }

    let g = &file.grid;
    if !(g.kmax > 0.0) || !g.kmax.is_finite() {
        return Err(invalid("grid.kmax", "must be positive"));
    }
    if g.n_per_axis == 0 {
        return Err(invalid("grid.n_per_axis", "must be at least 1"));
    }
    let mut grid = GridConfig::new(g.kmax, g.n_per_axis, spec.kappa).with_shape(match g.shape {
        ShapeName::Ball => GridShape::Ball,
        ShapeName::Cube => GridShape::Cube,
    });
    if let Some(f) = g.k0_floor {
        if !(f >= 0.0) {
            return Err(invalid("grid.k0_floor", "must be non-negative"));
        }
        grid = grid.with_k0_floor(f);
    }
    if let Some(m) = g.max_modes {
        grid = grid.with_max_modes(m);
    }

    let t = &file.time;
    if t.steps < 2 {
        return Err(invalid("time.steps", "must be at least 2"));
    }
    if !(t.x0_end > t.x0_start) || !t.x0_start.is_finite() || !t.x0_end.is_finite() {
        return Err(invalid("time.x0_end", "must exceed time.x0_start"));
    }

    let z = C64::new(file.gauge.z_re, file.gauge.z_im);
    if !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("gauge", "z must be finite and non-zero"));
    }
    let v = FourVector(file.bracket.v);
    if !v.is_finite() {
        return Err(invalid("bracket.v", "must be finite"));
    }

    let gr = &file.green;
    if gr.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("green.radii", "radii must be positive"));
    }
    if !(gr.window_alpha >= 0.0) {
        return Err(invalid("green.window_alpha", "must be non-negative"));
    }
    if !(gr.exclusion >= 0.0) {
        return Err(invalid("green.exclusion", "must be non-negative"));
    }

    let mut tolerances = Tolerances::default();
    for (name, value) in &file.tolerances {
        tolerances.set(name, *value).map_err(|msg| invalid(format!("tolerances.{name}"), msg))?;
    }

    Ok(Scenario { spec, worldlines, grid, gauge_z: z, bracket_v: v, tolerances, hash, source: file })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "field": {"kind": "scalar", "s": 1.0, "m": 1.0, "c": 1.0},
        "grid": {"kmax": 2.0, "n_per_axis": 4},
        "time": {"x0_start": 0.0, "x0_end": 1.0, "steps": 10}
    }"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.gauge_z, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert_eq!(s.bracket_v, FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert!(s.grid.k0_floor.is_none());
        assert!(s.worldlines.is_empty());
        assert_eq!(s.hash.len(), 64);
    }

    #[test]
    fn em_with_mass_term_names_b2() {
        let text = r#"{
            "field": {"kind": "em", "c": 1.0, "b2": 0.5},
            "grid": {"kmax": 2.0, "n_per_axis": 4},
            "time": {"x0_start": 0.0, "x0_end": 1.0, "steps": 10}
        }"#;
        match parse_scenario(text) {
            Err(ScenarioError::Invalid { field, .. }) => assert_eq!(field, "field.b2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dirac_without_xi_is_rejected() {
        let text = r#"{
            "field": {"kind": "dirac", "s": 1.0, "m": 1.0, "c": 1.0},
            "particles": [{"kind": "static", "position": [0, 0, 0], "coupling": 1.0}],
            "grid": {"kmax": 2.0, "n_per_axis": 4},
            "time": {"x0_start": 0.0, "x0_end": 1.0, "steps": 10}
        }"#;
        match parse_scenario(text) {
            Err(ScenarioError::Invalid { field, .. }) => assert_eq!(field, "particles[0].xi"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "{\n  \"field\": {\"kind\": \"scalar\",,}\n}";
        assert!(matches!(parse_scenario(text), Err(ScenarioError::Parse { line: 2, .. })));
    }

    #[test]
    fn time_window_is_checked() {
        let text = MINIMAL.replace("\"steps\": 10", "\"steps\": 1");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Invalid { field, .. }) if field == "time.steps"));
        let text = MINIMAL.replace("\"x0_end\": 1.0", "\"x0_end\": -1.0");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Invalid { field, .. }) if field == "time.x0_end"));
    }

    #[test]
    fn unknown_tolerance_is_rejected() {
        let text = MINIMAL.replace("\"time\"", "\"tolerances\": {\"nonsense\": 1.0}, \"time\"");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Invalid { .. })));
    }
}
