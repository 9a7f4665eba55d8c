use std::path::Path;

use qwalk_core::analysis::distance;
use qwalk_core::continuum::{flat_top_prediction, talbot_period, GaussianWidthLaw};
use qwalk_core::spectral::{dispersion_curve, DispersionPoint};
use qwalk_core::{CoinParameter, Metric};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    GaussianWidth,
    FlatTop,
    Talbot,
}

impl std::str::FromStr for Prediction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian-width" => Ok(Prediction::GaussianWidth),
            "flat-top" => Ok(Prediction::FlatTop),
            "talbot" => Ok(Prediction::Talbot),
            _ => Err(format!("unknown prediction {s:?}; expected gaussian-width, flat-top or talbot")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PredictParams {
    pub sigma0: Option<f64>,
    pub t: Option<f64>,
    pub lambda: Option<f64>,
}

pub fn dispersion(theta: f64, samples: usize) -> Result<Vec<DispersionPoint>> {
    Ok(dispersion_curve(CoinParameter::new(theta)?, samples)?)
}

pub fn predict(kind: Prediction, theta: f64, params: &PredictParams) -> Result<Value> {
    let coin = CoinParameter::new(theta)?;
    let need = |value: Option<f64>, flag: &str| {
        value.ok_or_else(|| CliError::Usage(format!("this prediction needs --{flag}")))
    };
    Ok(match kind {
        Prediction::GaussianWidth => {
            let law = GaussianWidthLaw::new(need(params.sigma0, "sigma0")?, coin)?;
            let t = need(params.t, "t")?;
            if !(t >= 0.0) {
                return Err(CliError::Usage(format!("--t {t} must be non-negative")));
            }
            let w = law.w(t);
            json!({
                "kind": "gaussian-width",
                "theta": theta,
                "sigma0": law.sigma0,
                "t": t,
                "w": w,
                "width": law.sigma0 * w,
                "diffraction_time": law.diffraction_time(),
                "asymptotic_slope": law.asymptotic_slope(),
            })
        }
        Prediction::FlatTop => {
            let pred = flat_top_prediction(need(params.sigma0, "sigma0")?, coin, need(params.t, "t")?)?;
            let mut value = serde_json::to_value(pred).expect("prediction serializes");
            value["kind"] = json!("flat-top");
            value
        }
        Prediction::Talbot => {
            let lambda = need(params.lambda, "lambda")?;
            json!({
                "kind": "talbot",
                "theta": theta,
                "lambda": lambda,
                "period": talbot_period(lambda, coin)?,
            })
        }
    })
}

pub fn compare(a: &Path, b: &Path, metric: Metric) -> Result<Value> {
    let da = table::read_distribution(a)?;
    let db = table::read_distribution(b)?;
    Ok(json!({
        "metric": metric,
        "distance": distance(&da, &db, metric),
        "file_a": a.display().to_string(),
        "file_b": b.display().to_string(),
        "norm_a": da.total(),
        "norm_b": db.total(),
    }))
}
