//! Ready-made configurations for the four reference operator families:
//! cor1: -alpha Lap + beta (-Lap)^s
//! cor2: sum of unweighted fractional orders s_1..s_n
//! cor3: geometric weights c_k = 2^{-k} at orders s_k = 1 - 2^{-k}
//! cor4: continuous density omega(s), reduced by quadrature

use crate::config::{ConfigError, DensityConfig, MeasureConfig, RunConfig};

#[derive(Debug, Clone)]
pub struct PresetParams {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub s: Vec<f64>,
    pub terms: Option<usize>,
    pub omega: Option<String>,
    pub weight: Option<f64>,
    pub exponent: Option<f64>,
    pub nodes: Option<usize>,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            alpha: None,
            beta: None,
            s: Vec::new(),
            terms: None,
            omega: None,
            weight: None,
            exponent: None,
            nodes: None,
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        message: message.into(),
    }
}

pub fn preset(name: &str, params: &PresetParams) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    match name {
        "cor1" => {
            let alpha = params.alpha.ok_or_else(|| bad("alpha", "cor1 needs --alpha"))?;
            let beta = params.beta.ok_or_else(|| bad("beta", "cor1 needs --beta"))?;
            let s = match params.s.as_slice() {
                [s] => *s,
                _ => return Err(bad("s", "cor1 needs exactly one --s")),
            };
            config.alpha = alpha;
            config.measure = MeasureConfig {
                atoms: vec![[s, beta]],
                density: None,
            };
        }
        "cor2" => {
            if params.s.is_empty() {
                return Err(bad("s", "cor2 needs at least one --s"));
            }
            config.alpha = 0.0;
            config.measure = MeasureConfig {
                atoms: params.s.iter().map(|&s| [s, 1.0]).collect(),
                density: None,
            };
        }
        "cor3" => {
            let k = params.terms.ok_or_else(|| bad("terms", "cor3 needs --terms"))?;
            if k == 0 {
                return Err(bad("terms", "must be at least 1"));
            }
            config.alpha = 0.0;
            config.measure = MeasureConfig {
                atoms: (1..=k as u32)
                    .map(|j| [1.0 - 2f64.powi(-(j as i32)), 2f64.powi(-(j as i32))])
                    .collect(),
                density: None,
            };
        }
        "cor4" => {
            let kind = params.omega.clone().unwrap_or_else(|| "constant".into());
            config.alpha = 0.0;
            config.measure = MeasureConfig {
                atoms: Vec::new(),
                density: Some(DensityConfig {
                    kind,
                    weight: params.weight.unwrap_or(1.0),
                    exponent: params.exponent.unwrap_or(0.0),
                    nodes: params.nodes.unwrap_or(8),
                }),
            };
        }
        other => return Err(bad("preset", format!("unknown preset `{other}`"))),
    }
    config.validate()?;
    Ok(config)
}
