//! Analysis configuration files (JSON).

use std::path::PathBuf;

use evpos::analyzer::{CertificatePath, Tolerances};
use evpos::grid::GridSpec;
use evpos::models::{catalogue, OperatorSpec};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Certify,
    UniformT0,
    IndividualT0,
    PositivityScan,
    ResolventCheck,
    Sweep,
}

/// One operator parameter varied over `steps` equally spaced values, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.to
                } else {
                    self.from + (self.to - self.from) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for every output file. `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_sweep")]
    pub sweep: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            report: default_report(),
            series: default_series(),
            sweep: default_sweep(),
        }
    }
}

fn default_report() -> String {
    "report.json".into()
}
fn default_series() -> String {
    "series.csv".into()
}
fn default_sweep() -> String {
    "sweep.csv".into()
}
fn default_delta() -> f64 {
    0.5
}
fn default_path() -> CertificatePath {
    CertificatePath::General
}

pub const DEFAULT_OUT_DIR: &str = "evpos-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub operator: OperatorSpec,
    pub analysis: AnalysisKind,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Evaluation grid. Omitted: a default derived from the dominance gap
    /// (bounds) or `[1e-3, 10]` (scans, sweeps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Certificate path: `general` or `self_adjoint`.
    #[serde(default = "default_path")]
    pub path: CertificatePath,
    /// Initial vector for `individual_t0`; defaults to the first unit vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// `resolvent_check` evaluates at `s(A) + offset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvent_offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

pub fn parse_config(text: &str) -> Result<AnalysisConfig, Failure> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Failure::config(format!("config is not valid JSON: {e}")))?;
    if let Some(kind) = value.pointer("/operator/type").and_then(|v| v.as_str()) {
        if !catalogue().iter().any(|e| e.kind == kind) {
            let kinds: Vec<_> = catalogue().iter().map(|e| e.kind).collect();
            return Err(Failure::config(format!(
                "operator.type: unknown operator kind `{kind}`; the catalogue has {} (see `evpos list-operators`)",
                kinds.join(", ")
            )));
        }
    }
    let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| Failure::config(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Failure::config("delta out of (0,1)"));
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| Failure::config(format!("grid: {e}")))?;
        }
        match (&self.sweep, self.analysis) {
            (None, AnalysisKind::Sweep) => return Err(Failure::config("sweep: required when analysis is `sweep`")),
            (Some(s), _) => {
                if s.steps < 2 {
                    return Err(Failure::config("sweep.steps: need at least 2 steps"));
                }
                if !s.from.is_finite() || !s.to.is_finite() {
                    return Err(Failure::config("sweep.from/sweep.to: must be finite"));
                }
            }
            _ => {}
        }
        self.operator
            .validate()
            .map_err(|e| Failure::config(format!("operator ({}): {e}", self.operator.kind())))?;
        if let Some(f) = &self.initial {
            if f.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || f.iter().all(|x| *x == 0.0) {
                return Err(Failure::config("initial: must be nonnegative, finite and nonzero"));
            }
        }
        if let Some(o) = &self.resolvent_offsets {
            if o.is_empty() || o.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Failure::config("resolvent_offsets: need positive finite offsets"));
            }
        }
        let t = &self.tolerances;
        let all = [t.resid, t.cluster_rel, t.gap_rel, t.imag_rel, t.rank_rel, t.pos, t.defect];
        if all.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Failure::config("tolerances: must be nonnegative and finite"));
        }
        Ok(())
    }

    /// The sweepable (numeric) fields of the operator.
    pub fn numeric_parameters(&self) -> Vec<String> {
        match serde_json::to_value(&self.operator) {
            Ok(serde_json::Value::Object(map)) => {
                map.iter().filter(|(_, v)| v.is_number()).map(|(k, _)| k.clone()).collect()
            }
            _ => vec![],
        }
    }

    /// The operator with `parameter` set to `value`. Integer fields are rounded.
    pub fn operator_with(&self, parameter: &str, value: f64) -> Result<OperatorSpec, Failure> {
        let mut v = serde_json::to_value(&self.operator).expect("operator specs serialize");
        let slot = v
            .get_mut(parameter)
            .filter(|x| x.is_number())
            .ok_or_else(|| {
                Failure::config(format!(
                    "sweep.parameter: `{parameter}` is not a numeric parameter of {} (have {})",
                    self.operator.kind(),
                    self.numeric_parameters().join(", ")
                ))
            })?;
        *slot = if slot.is_u64() {
            if value.is_nan() || value < 0.0 {
                return Err(Failure::config(format!("sweep: `{parameter}` must be a nonnegative integer")));
            }
            serde_json::Value::from(value.round() as u64)
        } else {
            serde_json::Value::from(value)
        };
        serde_json::from_value(v).map_err(|e| Failure::config(format!("sweep: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELAY: &str = r#"{"operator": {"type": "delay", "c": 0.19634954084936207, "m": 200}, "analysis": "certify"}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(DELAY).unwrap();
        assert_eq!(cfg.delta, 0.5);
        assert_eq!(cfg.path, CertificatePath::General);
        assert_eq!(cfg.output.report, "report.json");
        let back: AnalysisConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn delta_is_checked() {
        let text = DELAY.replace("\"certify\"", "\"certify\", \"delta\": 1.5");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("delta out of (0,1)"));
    }

    #[test]
    fn unknown_kind_cites_catalogue() {
        let e = parse_config(r#"{"operator": {"type": "heat", "m": 3}, "analysis": "certify"}"#).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("nonlocal_laplacian") && e.message.contains("list-operators"));
    }

    #[test]
    fn missing_field_is_named() {
        let e = parse_config(r#"{"operator": {"type": "delay", "c": 1.0}, "analysis": "certify"}"#).unwrap_err();
        assert!(e.message.contains("`m`"), "{}", e.message);
    }

    #[test]
    fn sweep_values_include_endpoints() {
        let s = SweepSpec {
            parameter: "lambda".into(),
            from: -5.7,
            to: -0.1,
            steps: 50,
        };
        let v = s.values();
        assert_eq!(v.len(), 50);
        assert_eq!((v[0], v[49]), (-5.7, -0.1));
    }

    #[test]
    fn sweep_parameter_substitution() {
        let cfg = parse_config(DELAY).unwrap();
        assert_eq!(
            cfg.operator_with("m", 40.2).unwrap(),
            OperatorSpec::Delay(evpos::models::DelaySpec { c: 0.19634954084936207, m: 40 })
        );
        let e = cfg.operator_with("lambda", 1.0).unwrap_err();
        assert!(e.message.contains("have c, m"), "{}", e.message);
    }
}
