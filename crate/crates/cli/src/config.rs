//! Declarative run configuration: schema types, parsing, and the
//! admissibility diagnostics.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use wolffkit_core::{
    AxisBox, Ball, CompactSet, Error as CoreError, ExpNonlinearity, GridSpec, Measure,
    PotentialParams,
};

/// f64 that serializes non-finite values as the strings "inf"/"-inf"
/// (JSON has no infinity literal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtF64(pub f64);

impl Serialize for ExtF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

impl<'de> Deserialize<'de> for ExtF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtF64(v)),
            Raw::Str(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(ExtF64(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(ExtF64(f64::NEG_INFINITY)),
                "nan" => Ok(ExtF64(f64::NAN)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got \"{other}\""
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub task: TaskKind,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    pub potential_task: Option<PotentialTaskConfig>,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub capacity: Option<CapacityConfig>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub surrogate: Option<SurrogateConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Potential,
    Solve,
    Capacity,
    Verify,
    Surrogate,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurrogateConfig {
    PLaplace {
        p: f64,
        domain_diam: f64,
        k_const: f64,
        #[serde(default)]
        domain: Option<BoxConfig>,
    },
    KHessian {
        k: u32,
        domain_diam: f64,
        k_const: f64,
        #[serde(default)]
        b_offset: f64,
        #[serde(default)]
        domain: Option<BoxConfig>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub components: Vec<MeasureComponentConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureComponentConfig {
    Atomic {
        atoms: Vec<AtomConfig>,
    },
    BallUniform {
        center: Vec<f64>,
        radius: f64,
        density: f64,
    },
    GridDensity {
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        values: Vec<f64>,
    },
    UniformBox {
        min: Vec<f64>,
        max: Vec<f64>,
        density: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub n: usize,
    pub alpha: f64,
    pub s: f64,
    pub t: ExtF64,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub l: u32,
    pub a: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialTaskConfig {
    pub op: PotentialOpConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PotentialOpConfig {
    Wolff,
    Riesz,
    FracMaximal,
    Bessel,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub f_constant: f64,
    #[serde(default)]
    pub f_values: Option<Vec<f64>>,
    pub epsilon: f64,
    #[serde(default = "default_k")]
    pub k_const: f64,
    #[serde(default)]
    pub m_override: Option<f64>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_c_growth")]
    pub c_growth: f64,
    #[serde(default)]
    pub support_radius: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    /// Run the iteration even when the smallness check fails; divergence
    /// detection stays active.
    #[serde(default)]
    pub force: bool,
}

fn default_k() -> f64 {
    1.0
}
fn default_delta0() -> f64 {
    0.1
}
fn default_c_growth() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub orlicz: OrliczConfig,
    pub alpha_p: f64,
    pub kernel: KernelConfig,
    pub sets: Vec<SetConfig>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub two_start: bool,
    /// Also run the solve from this config and report the
    /// necessary-condition ratios over `sets`.
    #[serde(default)]
    pub necessary_condition: bool,
}

fn default_budget() -> usize {
    600
}
fn default_step() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OrliczConfig {
    pub p: f64,
    pub l: u32,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KernelConfig {
    Bessel,
    Riesz,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    #[serde(default)]
    pub balls: Vec<BallConfig>,
    #[serde(default)]
    pub boxes: Vec<BoxConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Sandwich {
        variant: SandwichVariantConfig,
        q: f64,
    },
    ExpIntegrability {
        center: Vec<f64>,
        r: f64,
        #[serde(default)]
        delta: Option<f64>,
    },
    Composition {
        variant: CompositionVariantConfig,
        #[serde(default)]
        delta: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SandwichVariantConfig {
    RieszIne0,
    BesselIne2,
    RieszBesselIne3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CompositionVariantConfig {
    ExpSupBound,
    ExpPointwise,
    TruncatedExpPointwise,
}

/// One violated predicate, with the mathematical condition cited verbatim.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub predicate: String,
    pub message: String,
    /// "schema" or "admissibility"; drives the exit code.
    pub category: DiagnosticCategory,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCategory {
    Schema,
    Admissibility,
}

impl Diagnostic {
    fn schema(field: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            field: field.to_string(),
            predicate: String::new(),
            message: message.into(),
            category: DiagnosticCategory::Schema,
        }
    }

    fn admissibility(field: &str, predicate: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            field: field.to_string(),
            predicate: predicate.to_string(),
            message: message.into(),
            category: DiagnosticCategory::Admissibility,
        }
    }

    fn from_core(field: &str, err: &CoreError) -> Self {
        match err {
            CoreError::Admissibility { predicate, detail } => {
                Diagnostic::admissibility(field, predicate, detail.clone())
            }
            other => Diagnostic::schema(field, other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn grid_spec(&self) -> Result<GridSpec, CoreError> {
        GridSpec::new(self.grid.origin.clone(), self.grid.spacing, self.grid.shape.clone())
    }

    pub fn potential_params(&self) -> PotentialParams {
        PotentialParams {
            n: self.potential.n,
            alpha: self.potential.alpha,
            s: self.potential.s,
            trunc: self.potential.t.0,
            eta: self.potential.eta,
        }
    }

    pub fn nonlinearity(&self) -> Option<ExpNonlinearity> {
        self.nonlinearity.as_ref().map(|nl| ExpNonlinearity {
            l: nl.l,
            a: nl.a,
            beta: nl.beta,
        })
    }

    pub fn build_measure(&self) -> Result<Measure, CoreError> {
        let dim = self.potential.n;
        let mut measure = Measure::zero(dim);
        for c in &self.measure.components {
            let comp = match c {
                MeasureComponentConfig::Atomic { atoms } => Measure::atomic(
                    dim,
                    atoms.iter().map(|a| (a.point.clone(), a.mass)).collect(),
                )?,
                MeasureComponentConfig::BallUniform {
                    center,
                    radius,
                    density,
                } => Measure::ball_uniform(center.clone(), *radius, *density)?,
                MeasureComponentConfig::GridDensity {
                    origin,
                    spacing,
                    shape,
                    values,
                } => Measure::grid_density(
                    GridSpec::new(origin.clone(), *spacing, shape.clone())?,
                    values.clone(),
                )?,
                MeasureComponentConfig::UniformBox { min, max, density } => {
                    Measure::uniform_box(AxisBox::new(min.clone(), max.clone())?, *density)?
                }
            };
            measure = measure.add(&comp)?;
        }
        Ok(measure)
    }

    pub fn build_sets(&self, dim: usize) -> Vec<CompactSet> {
        let Some(cap) = &self.capacity else {
            return Vec::new();
        };
        cap.sets
            .iter()
            .map(|s| CompactSet {
                dim,
                balls: s
                    .balls
                    .iter()
                    .map(|b| Ball::new(b.center.clone(), b.radius))
                    .collect(),
                boxes: s
                    .boxes
                    .iter()
                    .filter_map(|b| AxisBox::new(b.min.clone(), b.max.clone()).ok())
                    .collect(),
            })
            .collect()
    }

    /// Full schema and admissibility report, without executing anything.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.version != 1 {
            out.push(Diagnostic::schema(
                "version",
                format!("unsupported config version {}", self.version),
            ));
        }

        if let Err(e) = self.grid_spec() {
            out.push(Diagnostic::from_core("grid", &e));
        } else if self.grid.origin.len() != self.potential.n {
            out.push(Diagnostic::schema(
                "grid.origin",
                format!(
                    "grid dimension {} does not match N = {}",
                    self.grid.origin.len(),
                    self.potential.n
                ),
            ));
        }

        let pp = self.potential_params();
        if let Err(e) = pp.validate_basic() {
            out.push(Diagnostic::from_core("potential", &e));
        }

        if let Err(e) = self.build_measure() {
            out.push(Diagnostic::from_core("measure", &e));
        }

        if let Some(nl) = self.nonlinearity() {
            if let Err(e) = nl.validate() {
                out.push(Diagnostic::from_core("nonlinearity", &e));
            }
        }

        match self.task {
            TaskKind::Potential => {
                if self.potential_task.is_none() {
                    out.push(Diagnostic::schema(
                        "potential_task",
                        "task = potential needs a potential_task section",
                    ));
                } else {
                    let needs_wolff = matches!(
                        self.potential_task.as_ref().map(|t| t.op),
                        Some(PotentialOpConfig::Wolff)
                    );
                    let check = if needs_wolff {
                        pp.validate_wolff()
                    } else {
                        pp.validate_order()
                    };
                    if let Err(e) = check {
                        out.push(Diagnostic::from_core("potential", &e));
                    }
                }
            }
            TaskKind::Solve => {
                self.solve_diagnostics(&mut out);
            }
            TaskKind::Capacity => {
                self.capacity_diagnostics(&mut out);
            }
            TaskKind::Verify => {
                if let Err(e) = pp.validate_wolff() {
                    out.push(Diagnostic::from_core("potential", &e));
                }
                match &self.verify {
                    None => out.push(Diagnostic::schema(
                        "verify",
                        "task = verify needs a verify section",
                    )),
                    Some(v) => {
                        if v.experiments.is_empty() {
                            out.push(Diagnostic::schema("verify.experiments", "empty"));
                        }
                        for (i, e) in v.experiments.iter().enumerate() {
                            self.experiment_diagnostics(i, e, &mut out);
                        }
                    }
                }
            }
            TaskKind::Surrogate => {
                self.surrogate_diagnostics(&mut out);
            }
        }
        out
    }

    fn surrogate_diagnostics(&self, out: &mut Vec<Diagnostic>) {
        let n = self.potential.n;
        match &self.surrogate {
            None => out.push(Diagnostic::schema(
                "surrogate",
                "task = surrogate needs a surrogate section",
            )),
            Some(SurrogateConfig::PLaplace { p, domain_diam, .. }) => {
                if !(*p > 1.0 && *p < n as f64) {
                    out.push(Diagnostic::admissibility(
                        "surrogate.p",
                        "1 < p < N",
                        format!("got p = {p}, N = {n}"),
                    ));
                }
                if !(*domain_diam > 0.0) {
                    out.push(Diagnostic::schema("surrogate.domain_diam", "must be positive"));
                }
            }
            Some(SurrogateConfig::KHessian { k, domain_diam, .. }) => {
                if 2 * *k as usize >= n {
                    out.push(Diagnostic::admissibility(
                        "surrogate.k",
                        "2k < N",
                        format!("got k = {k}, N = {n}"),
                    ));
                }
                if *k < 1 {
                    out.push(Diagnostic::schema("surrogate.k", "k must be >= 1"));
                }
                if !(*domain_diam > 0.0) {
                    out.push(Diagnostic::schema("surrogate.domain_diam", "must be positive"));
                }
            }
        }
    }

    fn solve_diagnostics(&self, out: &mut Vec<Diagnostic>) {
        let pp = self.potential_params();
        if let Err(e) = pp.validate_wolff() {
            out.push(Diagnostic::from_core("potential", &e));
        }
        let Some(solve) = &self.solve else {
            out.push(Diagnostic::schema(
                "solve",
                "task = solve needs a solve section",
            ));
            return;
        };
        let Some(nl) = self.nonlinearity() else {
            out.push(Diagnostic::schema(
                "nonlinearity",
                "task = solve needs a nonlinearity section",
            ));
            return;
        };
        if nl.validate().is_err() {
            return;
        }
        let p = pp.s;
        if pp.trunc.is_finite() {
            if !nl.admits_finite_truncation(p) {
                out.push(Diagnostic::admissibility(
                    "nonlinearity",
                    "l*beta > p-1",
                    format!("got l*beta = {}, p-1 = {}", nl.l_beta(), p - 1.0),
                ));
            }
        } else if pp.n as f64 > pp.alpha * p && !nl.admits_infinite_truncation(pp.n, pp.alpha, p) {
            out.push(Diagnostic::admissibility(
                "nonlinearity",
                "l*beta > N(p-1)/(N-alpha*p)",
                format!(
                    "got l*beta = {}, threshold = {}",
                    nl.l_beta(),
                    pp.n as f64 * (p - 1.0) / (pp.n as f64 - pp.alpha * p)
                ),
            ));
        }
        if !(solve.epsilon > 0.0) {
            out.push(Diagnostic::schema("solve.epsilon", "must be positive"));
        }
        if !(solve.tol > 0.0) {
            out.push(Diagnostic::schema("solve.tol", "must be positive"));
        }
        if solve.max_iters == 0 {
            out.push(Diagnostic::schema("solve.max_iters", "must be positive"));
        }
        if solve.f_constant < 0.0 {
            out.push(Diagnostic::schema("solve.f_constant", "f must be >= 0"));
        }
        if let Some(values) = &solve.f_values {
            if let Ok(grid) = self.grid_spec() {
                if values.len() != grid.len() {
                    out.push(Diagnostic::schema(
                        "solve.f_values",
                        format!("expected {} values, got {}", grid.len(), values.len()),
                    ));
                }
            }
            if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                out.push(Diagnostic::schema("solve.f_values", "f must be >= 0"));
            }
        }
    }

    fn capacity_diagnostics(&self, out: &mut Vec<Diagnostic>) {
        let Some(cap) = &self.capacity else {
            out.push(Diagnostic::schema(
                "capacity",
                "task = capacity needs a capacity section",
            ));
            return;
        };
        let n = self.potential.n as f64;
        if !(cap.alpha_p > 0.0 && cap.alpha_p < n) {
            out.push(Diagnostic::admissibility(
                "capacity.alpha_p",
                "0 < alpha*p < N",
                format!("got alpha_p = {}, N = {n}", cap.alpha_p),
            ));
        }
        if !(cap.orlicz.p > 1.0) {
            out.push(Diagnostic::admissibility(
                "capacity.orlicz.p",
                "p > 1",
                format!("got p = {}", cap.orlicz.p),
            ));
        }
        if cap.orlicz.l < 1 {
            out.push(Diagnostic::admissibility(
                "capacity.orlicz.l",
                "l >= 1",
                format!("got l = {}", cap.orlicz.l),
            ));
        }
        if !(cap.orlicz.beta >= 1.0) {
            out.push(Diagnostic::admissibility(
                "capacity.orlicz.beta",
                "beta >= 1",
                format!("got beta = {}", cap.orlicz.beta),
            ));
        }
        if cap.budget == 0 {
            out.push(Diagnostic::schema("capacity.budget", "must be positive"));
        }
        for (i, s) in cap.sets.iter().enumerate() {
            for b in &s.balls {
                if b.center.len() != self.potential.n {
                    out.push(Diagnostic::schema(
                        &format!("capacity.sets[{i}]"),
                        "ball dimension mismatch",
                    ));
                }
                if !(b.radius > 0.0) {
                    out.push(Diagnostic::schema(
                        &format!("capacity.sets[{i}]"),
                        "ball radius must be positive",
                    ));
                }
            }
        }
        if cap.necessary_condition && (self.solve.is_none() || self.nonlinearity.is_none()) {
            out.push(Diagnostic::schema(
                "capacity.necessary_condition",
                "needs solve and nonlinearity sections to produce u",
            ));
        }
    }

    fn experiment_diagnostics(&self, idx: usize, e: &ExperimentConfig, out: &mut Vec<Diagnostic>) {
        let pp = self.potential_params();
        let p = pp.s;
        match e {
            ExperimentConfig::Sandwich { variant, q } => {
                let min_q = match variant {
                    SandwichVariantConfig::RieszBesselIne3 => 1.0,
                    _ => p - 1.0,
                };
                if *q < min_q {
                    let pred = match variant {
                        SandwichVariantConfig::RieszBesselIne3 => "q >= 1",
                        _ => "q >= p-1",
                    };
                    out.push(Diagnostic::admissibility(
                        &format!("verify.experiments[{idx}].q"),
                        pred,
                        format!("got q = {q}"),
                    ));
                }
            }
            ExperimentConfig::ExpIntegrability { center, r, .. } => {
                if center.len() != self.potential.n {
                    out.push(Diagnostic::schema(
                        &format!("verify.experiments[{idx}].center"),
                        "dimension mismatch",
                    ));
                }
                if !(*r > 0.0) {
                    out.push(Diagnostic::schema(
                        &format!("verify.experiments[{idx}].r"),
                        "radius must be positive",
                    ));
                }
                if !(pp.eta < p - 1.0) {
                    out.push(Diagnostic::admissibility(
                        "potential.eta",
                        "0 <= eta < p-1",
                        format!("got eta = {}, p-1 = {}", pp.eta, p - 1.0),
                    ));
                }
            }
            ExperimentConfig::Composition { .. } => {
                if self.nonlinearity.is_none() {
                    out.push(Diagnostic::schema(
                        "nonlinearity",
                        "composition experiments need a nonlinearity section",
                    ));
                }
            }
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(task: &str) -> String {
        format!(
            r#"{{
  "version": 1,
  "task": "{task}",
  "grid": {{"origin": [-0.5, -0.5], "spacing": 0.125, "shape": [9, 9]}},
  "measure": {{"components": [{{"type": "atomic", "atoms": [{{"point": [0.0, 0.0], "mass": 1.0}}]}}]}},
  "potential": {{"n": 2, "alpha": 0.5, "s": 2.0, "t": 1.0, "eta": 0.0}},
  "potential_task": {{"op": "wolff"}}
}}"#
        )
    }

    #[test]
    fn parses_and_validates_minimal_potential_config() {
        let cfg = parse_config(&minimal("potential")).unwrap();
        assert!(cfg.diagnostics().is_empty());
        assert_eq!(cfg.potential.t.0, 1.0);
    }

    #[test]
    fn infinity_roundtrip() {
        let cfg_text = minimal("potential").replace("\"t\": 1.0", "\"t\": \"inf\"");
        let cfg = parse_config(&cfg_text).unwrap();
        assert!(cfg.potential.t.0.is_infinite());
        let back = serde_json::to_string(&cfg).unwrap();
        let again = parse_config(&back).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_unknown_fields() {
        let broken = minimal("potential").replace("\"version\": 1", "\"version\": 1, \"bogus\": 2");
        assert!(parse_config(&broken).is_err());
    }

    #[test]
    fn flags_marginal_l_beta() {
        // lβ = p−1 exactly must be rejected with the predicate cited
        let text = r#"{
  "version": 1,
  "task": "solve",
  "grid": {"origin": [-0.5, -0.5], "spacing": 0.125, "shape": [9, 9]},
  "measure": {"components": []},
  "potential": {"n": 2, "alpha": 0.5, "s": 2.0, "t": 1.0, "eta": 0.0},
  "nonlinearity": {"l": 1, "a": 1.0, "beta": 1.0},
  "solve": {"epsilon": 1.0, "max_iters": 10, "tol": 1e-6}
}"#;
        let cfg = parse_config(text).unwrap();
        let diags = cfg.diagnostics();
        assert!(
            diags.iter().any(|d| d.predicate == "l*beta > p-1"),
            "{diags:?}"
        );
    }

    #[test]
    fn flags_beta_below_one() {
        let text = minimal("potential").replace(
            "\"potential_task\"",
            "\"nonlinearity\": {\"l\": 1, \"a\": 1.0, \"beta\": 0.5}, \"potential_task\"",
        );
        let cfg = parse_config(&text).unwrap();
        let diags = cfg.diagnostics();
        assert!(diags.iter().any(|d| d.predicate == "beta >= 1"), "{diags:?}");
    }

    #[test]
    fn valid_config_empty_diagnostics() {
        let cfg = parse_config(&minimal("potential")).unwrap();
        assert_eq!(cfg.diagnostics(), vec![]);
    }

    #[test]
    fn flags_hessian_dimension_bound() {
        // 2k >= N must be rejected citing the predicate
        let text = r#"{
  "version": 1,
  "task": "surrogate",
  "grid": {"origin": [-0.5, -0.5, -0.5], "spacing": 0.25, "shape": [5, 5, 5]},
  "measure": {"components": []},
  "potential": {"n": 3, "alpha": 1.0, "s": 2.0, "t": 1.0, "eta": 0.0},
  "surrogate": {"kind": "k_hessian", "k": 2, "domain_diam": 1.0, "k_const": 1.0}
}"#;
        let cfg = parse_config(text).unwrap();
        let diags = cfg.diagnostics();
        assert!(diags.iter().any(|d| d.predicate == "2k < N"), "{diags:?}");
    }
}
