//! Scenario files: strict JSON, parsed in two stages so that every error names a field path.
//!
//! ```json
//! {
//!   "name": "paper-spinchain-s1",
//!   "model": "spinchain",
//!   "params": { "N": 1, "family": "s1", "delta0": 1.0, "lambda": {"form": "constant", "value": 1.0} },
//!   "grid": { "t0": 0.0, "t1": 1.0, "steps": 1000 },
//!   "tolerances": { "det_rho_drift": 1e-8 },
//!   "checks": ["positivity", "metric_vs_closed"]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use qh_core::densemat::{hermiticity_defect, ComplexMatrix, C64};
use qh_core::oscillator::{default_buffer, OscillatorParams, MIN_DIM};
use qh_core::spinchain::{admissible_interval, build_hamiltonian, ClosedSolutionFamily, FamilyKind, MAX_SITES};
use qh_core::timefn::Scalar;
use qh_core::{TimeFunction, TimeGrid, SINGULARITY_MARGIN};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checks::{CheckName, Model, Requirement};
use crate::error::{CliError, CliResult};

pub const MODELS: [&str; 2] = ["oscillator", "spinchain"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    model: String,
    params: Value,
    grid: TimeGrid,
    #[serde(default)]
    tolerances: BTreeMap<CheckName, f64>,
    #[serde(default)]
    outputs: Option<PathBuf>,
    #[serde(default)]
    checks: Option<Vec<CheckName>>,
}

fn zero_scalar() -> Scalar {
    Scalar(C64::new(0.0, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub omega: TimeFunction,
    pub alpha: TimeFunction,
    /// Defaults to `−α*`, the solved family.
    #[serde(default)]
    pub beta: Option<TimeFunction>,
    #[serde(default = "zero_scalar")]
    pub gamma0: Scalar,
    /// Coherent amplitude of the reference solution `φ`.
    #[serde(default = "zero_scalar")]
    pub theta0: Scalar,
    /// Initial Lewis–Riesenfeld phase.
    #[serde(default)]
    pub phi0: f64,
    pub dim: usize,
    /// Rows and columns dropped from the Fock-space edge in operator identities.
    #[serde(default)]
    pub buffer: Option<usize>,
}

impl OscillatorConfig {
    pub fn params(&self) -> OscillatorParams {
        let mut p = OscillatorParams::new(self.omega.clone(), self.alpha.clone(), self.dim, self.gamma0.0);
        p.beta = self.beta.clone();
        p
    }

    pub fn buffer(&self) -> usize {
        self.buffer.unwrap_or_else(|| default_buffer(self.dim))
    }

    fn validate(&self, grid: &TimeGrid) -> CliResult<()> {
        if self.dim < MIN_DIM {
            return Err(CliError::config("params.dim", format!("dim {} is below the minimum {MIN_DIM}", self.dim)));
        }
        if self.buffer() >= self.dim {
            return Err(CliError::config("params.buffer", format!("buffer {} leaves no interior block", self.buffer())));
        }
        let params = self.params();
        grid.ensure_clear_of(&params.singularities(grid.t0, grid.t1), SINGULARITY_MARGIN)
            .map_err(|e| CliError::model("params", e))?;
        params
            .check_solved_family(grid)
            .map_err(|e| CliError::config("params.beta", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainConfig {
    #[serde(rename = "N", default = "one_site")]
    pub sites: usize,
    pub lambda: TimeFunction,
    /// Explicit `κ(t)`; mutually exclusive with `family`.
    #[serde(default)]
    pub kappa: Option<TimeFunction>,
    /// Closed solution `s1`, `s2` or `s3` of the κ equation.
    #[serde(default)]
    pub family: Option<FamilyKind>,
    #[serde(default)]
    pub delta0: Option<f64>,
    /// Initial metric; defaults to the closed family value or the identity.
    #[serde(default)]
    pub rho0: Option<ComplexMatrix>,
    /// Initial state for the conservation check.
    #[serde(default)]
    pub psi0: Option<Vec<Scalar>>,
}

fn one_site() -> usize {
    1
}

impl SpinChainConfig {
    pub fn family(&self) -> Option<ClosedSolutionFamily> {
        self.family.map(|k| ClosedSolutionFamily::new(k, self.delta0.unwrap_or(1.0)))
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn has_explicit_triple(&self) -> bool {
        self.sites == 1 && self.family == Some(FamilyKind::Tan) && self.delta0 == Some(1.0)
    }

    /// Whether the metric should stay positive: always for an explicit κ, inside the window for a family.
    pub fn expects_positive(&self) -> bool {
        match self.family() {
            None => true,
            Some(f) => admissible_interval(f.kind).is_some_and(|(lo, hi)| lo < f.delta0 && f.delta0 < hi),
        }
    }

    pub fn kappa(&self, t: f64) -> C64 {
        match (&self.kappa, self.family()) {
            (Some(k), _) => k.value(t),
            (None, Some(f)) => C64::new(f.kappa(t), 0.0),
            (None, None) => C64::new(0.0, 0.0),
        }
    }

    pub fn lambda_real(&self, t: f64) -> f64 {
        self.lambda.value(t).re
    }

    pub fn hamiltonian(&self, t: f64) -> qh_core::Result<ComplexMatrix> {
        build_hamiltonian(self.sites, self.lambda.value(t), self.kappa(t))
    }

    pub fn rho0(&self, t0: f64) -> ComplexMatrix {
        match (&self.rho0, self.family()) {
            (Some(r), _) => r.clone(),
            (None, Some(f)) => f.rho(t0),
            (None, None) => ComplexMatrix::identity(self.dim()),
        }
    }

    pub fn psi0(&self) -> Vec<C64> {
        match &self.psi0 {
            Some(v) => v.iter().map(|s| s.0).collect(),
            None if self.dim() == 2 => vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            None => {
                let n = (self.dim() as f64).sqrt();
                vec![C64::new(1.0 / n, 0.0); self.dim()]
            }
        }
    }

    fn validate(&self, grid: &TimeGrid) -> CliResult<()> {
        if self.sites == 0 || self.sites > MAX_SITES {
            return Err(CliError::config("params.N", format!("N must lie in 1..={MAX_SITES}")));
        }
        match (&self.kappa, self.family) {
            (Some(_), Some(_)) => return Err(CliError::config("params.kappa", "give either kappa or family, not both")),
            (None, None) => return Err(CliError::config("params.kappa", "one of kappa or family is required")),
            (None, Some(_)) => {
                if self.delta0.is_none() {
                    return Err(CliError::config("params.delta0", "a closed family needs delta0"));
                }
                if self.sites != 1 {
                    return Err(CliError::config("params.N", "closed families are single-site (N = 1)"));
                }
            }
            (Some(_), None) => {
                if self.delta0.is_some() {
                    return Err(CliError::config("params.delta0", "delta0 only applies to a closed family"));
                }
            }
        }
        if let Some(d) = self.delta0 {
            if !d.is_finite() {
                return Err(CliError::config("params.delta0", "must be finite"));
            }
        }
        if self.family.is_some() && self.lambda.max_imag(grid.nodes()) > 0.0 {
            return Err(CliError::config("params.lambda", "closed families need a real lambda"));
        }
        if let Some(r) = &self.rho0 {
            if r.dim() != self.dim() {
                return Err(CliError::config("params.rho0", format!("expected dim {}, got {}", self.dim(), r.dim())));
            }
            if hermiticity_defect(r) > 1e-12 * r.frobenius_norm() {
                return Err(CliError::config("params.rho0", "rho0 must be Hermitian"));
            }
        }
        if let Some(p) = &self.psi0 {
            if p.len() != self.dim() {
                return Err(CliError::config("params.psi0", format!("expected {} entries, got {}", self.dim(), p.len())));
            }
        }
        let mut poles = self.lambda.singularities(grid.t0, grid.t1);
        if let Some(k) = &self.kappa {
            poles.extend(k.singularities(grid.t0, grid.t1));
        }
        if let Some(f) = self.family() {
            poles.extend(f.singularities(grid.t0, grid.t1));
        }
        grid.ensure_clear_of(&poles, SINGULARITY_MARGIN).map_err(|e| CliError::model("params", e))
    }

    fn requirement_met(&self, r: Requirement) -> bool {
        match r {
            Requirement::None => true,
            Requirement::Family => self.family.is_some(),
            Requirement::ExplicitTriple => self.has_explicit_triple(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", content = "params", rename_all = "lowercase")]
pub enum ModelConfig {
    Oscillator(OscillatorConfig),
    SpinChain(SpinChainConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> Model {
        match self {
            ModelConfig::Oscillator(_) => Model::Oscillator,
            ModelConfig::SpinChain(_) => Model::SpinChain,
        }
    }

    fn requirement_met(&self, r: Requirement) -> bool {
        match self {
            ModelConfig::Oscillator(_) => r == Requirement::None,
            ModelConfig::SpinChain(c) => c.requirement_met(r),
        }
    }
}

/// A validated scenario. Serializes to the canonical form that is hashed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    #[serde(flatten)]
    pub model: ModelConfig,
    pub grid: TimeGrid,
    pub checks: Vec<CheckName>,
    /// Tolerance of every selected check, defaults filled in.
    pub tolerances: BTreeMap<CheckName, f64>,
    #[serde(skip)]
    pub outputs: Option<PathBuf>,
}

fn join_path(prefix: &str, inner: &serde_path_to_error::Path) -> String {
    let inner = inner.to_string();
    match (prefix.is_empty(), inner.as_str()) {
        (true, _) => inner,
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{inner}"),
    }
}

fn deserialize_at<T: DeserializeOwned>(prefix: &str, value: Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = join_path(prefix, e.path());
        CliError::config(path, e.into_inner().to_string())
    })
}

impl Scenario {
    pub fn from_json(text: &str, fallback_name: &str) -> CliResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(".", e.to_string()))?;
        Scenario::from_value(value, fallback_name)
    }

    pub fn from_value(value: Value, fallback_name: &str) -> CliResult<Self> {
        // the model tag decides how params are read, so it is checked first
        match value.get("model") {
            None => return Err(CliError::config("model", "missing field `model`")),
            Some(Value::String(m)) if MODELS.contains(&m.as_str()) => {}
            Some(other) => {
                return Err(CliError::config("model", format!("unknown model {other}, expected one of {MODELS:?}")));
            }
        }
        let raw: RawScenario = deserialize_at("", value)?;
        raw.grid.validate().map_err(|e| CliError::config("grid", e.to_string()))?;
        let model = match raw.model.as_str() {
            "oscillator" => {
                let c: OscillatorConfig = deserialize_at("params", raw.params)?;
                c.validate(&raw.grid)?;
                ModelConfig::Oscillator(c)
            }
            _ => {
                let c: SpinChainConfig = deserialize_at("params", raw.params)?;
                c.validate(&raw.grid)?;
                ModelConfig::SpinChain(c)
            }
        };
        let kind = model.kind();
        let checks = match raw.checks {
            Some(list) => {
                for (i, c) in list.iter().enumerate() {
                    let path = format!("checks[{i}]");
                    if !c.applies_to(kind) {
                        return Err(CliError::config(path, format!("{c} is not a {} check", kind.label())));
                    }
                    if !model.requirement_met(c.requirement(kind)) {
                        let why = match c.requirement(kind) {
                            Requirement::Family => "needs a closed family",
                            _ => "needs the single-site s1 family with delta0 = 1",
                        };
                        return Err(CliError::config(path, format!("{c} {why}")));
                    }
                    if list[..i].contains(c) {
                        return Err(CliError::config(path, format!("{c} listed twice")));
                    }
                }
                list
            }
            None => {
                let mut all = CheckName::defaults(kind, |r| model.requirement_met(r));
                if let ModelConfig::SpinChain(c) = &model {
                    let unwanted = if c.expects_positive() { CheckName::Indefiniteness } else { CheckName::Positivity };
                    all.retain(|&x| x != unwanted);
                }
                all
            }
        };
        let mut tolerances = BTreeMap::new();
        for (c, tol) in &raw.tolerances {
            let path = format!("tolerances.{c}");
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(CliError::config(path, format!("tolerance {tol} must be positive and finite")));
            }
            if !checks.contains(c) {
                return Err(CliError::config(path, format!("{c} is not among the selected checks")));
            }
        }
        for &c in &checks {
            tolerances.insert(c, raw.tolerances.get(&c).copied().unwrap_or_else(|| c.default_tolerance()));
        }
        Ok(Scenario {
            name: raw.name.unwrap_or_else(|| fallback_name.to_string()),
            model,
            grid: raw.grid,
            checks,
            tolerances,
            outputs: raw.outputs,
        })
    }

    /// Canonical JSON of the validated scenario, defaults included.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn tolerance(&self, c: CheckName) -> f64 {
        self.tolerances[&c]
    }

    pub fn override_tolerances(&mut self, tol: f64) {
        for v in self.tolerances.values_mut() {
            *v = tol;
        }
    }
}

/// Replaces the grid step count so that the step is as close as possible to `dt`.
pub fn apply_dt(value: &mut Value, dt: f64) -> CliResult<()> {
    let grid: TimeGrid = deserialize_at("grid", value.get("grid").cloned().unwrap_or(Value::Null))?;
    let g = TimeGrid::with_step(grid.t0, grid.t1, dt).map_err(|e| CliError::config("--dt", e.to_string()))?;
    value["grid"]["steps"] = Value::from(g.steps);
    Ok(())
}

/// JSON pointer of a numeric parameter, looked up under `params` first, then from the root.
fn parameter_pointer(value: &Value, name: &str) -> Option<(String, String)> {
    [format!("params.{name}"), name.to_string()].into_iter().find_map(|candidate| {
        let pointer = format!("/{}", candidate.replace('.', "/"));
        value.pointer(&pointer).filter(|v| v.is_number()).map(|_| (candidate, pointer))
    })
}

/// Whether `name` addresses a numeric parameter; `dt` always does.
pub fn has_parameter(value: &Value, name: &str) -> bool {
    name == "dt" || parameter_pointer(value, name).is_some()
}

/// Sets a numeric parameter addressed by a dotted path such as `delta0` or `grid.t1`.
///
/// `dt` is special and rewrites the grid step count.
pub fn set_parameter(value: &mut Value, name: &str, x: f64) -> CliResult<()> {
    if name == "dt" {
        return apply_dt(value, x);
    }
    let (candidate, pointer) =
        parameter_pointer(value, name).ok_or_else(|| CliError::config(name, "no such numeric parameter in the scenario"))?;
    let leaf = candidate.rsplit('.').next().unwrap_or(&candidate);
    let new = if ["steps", "dim", "N", "buffer"].contains(&leaf) {
        if !(x >= 0.0 && x.fract() == 0.0 && x < 1e15) {
            return Err(CliError::config(candidate, format!("{x} is not a non-negative integer")));
        }
        Value::from(x as u64)
    } else {
        Value::from(x)
    };
    *value.pointer_mut(&pointer).expect("pointer just resolved") = new;
    Ok(())
}
