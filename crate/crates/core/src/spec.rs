//! Run specification files.
//!
//! ```json
//! {"model": {"kind": "nig", "params": {"alpha": 8, "beta": -2, "delta": 0.3}, "r": 0.05},
//!  "spot": 100,
//!  "contract": {"type": "forward_start", "t1": 0.5, "t2": 1.5, "w": 1},
//!  "pricing": {"method": "fourier", "tol": 1e-8}}
//! ```

use serde::{Deserialize, Serialize};

use crate::contracts::ContractSpec;
use crate::error::{PricingError, Result};
use crate::levy::{LevyModel, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub r: f64,
}

impl ModelSpec {
    /// The risk-neutral model (drift fixed by the martingale condition).
    pub fn build(&self) -> Result<LevyModel> {
        LevyModel::risk_neutral(self.kind, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Fourier,
    Mc,
    ClosedForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Fourier => "fourier",
            Method::Mc => "mc",
            Method::ClosedForm => "closed_form",
        }
    }
}

pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingOptions {
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub model: ModelSpec,
    pub spot: f64,
    pub contract: ContractSpec,
    #[serde(default)]
    pub pricing: PricingOptions,
}

impl RunSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run spec serialises")
    }

    /// Checks the values behind the schema: model parameters, spot and contract.
    pub fn validate(&self) -> Result<LevyModel> {
        let model = self.model.build()?;
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(PricingError::NonPositiveInput(format!("spot = {}", self.spot)));
        }
        self.contract.validate()?;
        if let Some(t) = self.pricing.tol {
            if !(t > 0.0) {
                return Err(PricingError::NonPositiveInput(format!("pricing.tol = {t}")));
            }
        }
        if self.pricing.paths == Some(0) {
            return Err(PricingError::InvalidInput("pricing.paths must be >= 1".into()));
        }
        Ok(model)
    }

    /// Rejects method/model combinations without an implementation.
    pub fn check_pairing(&self) -> Result<()> {
        match (self.pricing.method, self.model.kind) {
            (Method::ClosedForm, ModelKind::Gaussian { .. }) => Ok(()),
            (Method::ClosedForm, k) => Err(PricingError::UnsupportedModel(format!(
                "closed_form requires the gaussian model, got {}",
                k.name()
            ))),
            (Method::Mc, ModelKind::Cgmy { .. }) => Err(PricingError::UnsupportedModel(
                "mc supports gaussian and nig, got cgmy".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FORWARD: &str = r#"{
        "model": {"kind": "nig", "params": {"alpha": 8.0, "beta": -2.0, "delta": 0.3}, "r": 0.05},
        "spot": 100.0,
        "contract": {"type": "forward_start", "t1": 0.5, "t2": 1.5, "w": 1.0},
        "pricing": {"method": "mc", "paths": 1000, "seed": 7}
    }"#;

    #[test]
    fn round_trip() {
        let s = RunSpec::from_json(FORWARD).unwrap();
        assert_eq!(s.pricing.method, Method::Mc);
        assert_eq!(s.model.kind, ModelKind::Nig { alpha: 8.0, beta: -2.0, delta: 0.3 });
        let back = RunSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn defaults_and_errors() {
        let s = RunSpec::from_json(
            r#"{"model": {"kind": "gaussian", "params": {"sigma": 0.2}, "r": 0.0}, "spot": 1,
                "contract": {"type": "chooser", "t1": 0.5, "t_expiry": 1, "strike": 1}}"#,
        )
        .unwrap();
        assert_eq!(s.pricing, PricingOptions::default());
        let e = RunSpec::from_json(r#"{"model": {"kind": "gaussian", "params": {"sigma": 0.2}, "r": 0.0}, "spot": 1}"#)
            .unwrap_err();
        assert!(e.to_string().contains("contract"), "{e}");
        let e = RunSpec::from_json(&FORWARD.replace("\"spot\"", "\"spott\"")).unwrap_err();
        assert!(e.to_string().contains("spott"), "{e}");
    }

    #[test]
    fn pairing_rules() {
        let mut s = RunSpec::from_json(FORWARD).unwrap();
        assert!(s.check_pairing().is_ok());
        s.pricing.method = Method::ClosedForm;
        assert!(matches!(s.check_pairing(), Err(PricingError::UnsupportedModel(_))));
        s.model.kind = ModelKind::Cgmy { c: 1.0, g: 5.0, m: 10.0, y: 0.5 };
        s.pricing.method = Method::Mc;
        assert!(matches!(s.check_pairing(), Err(PricingError::UnsupportedModel(_))));
    }
}
