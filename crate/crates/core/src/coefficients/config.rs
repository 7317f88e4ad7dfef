//! Serialisable form of coefficient specifications.
//!
//! ```toml
//! [coefficients]
//! delta = 0.36787944117144233
//! mode = "eps"
//! eps = 0.01
//!
//! [coefficients.b]
//! kind = "power_log"
//! A1 = 0.5
//! sign = -1
//!
//! [coefficients.sigma]
//! kind = "power_log"
//! A2 = 0.2
//! ```

use serde::{Deserialize, Serialize};

use super::{
    CoefficientSpec, FunctionSpec, Mode, MonotoneCubic, Profile, RegularizedCoefficient, Tail,
    DEFAULT_DELTA,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    PowerLog,
    PowerLogSin,
    CustomTable,
    Linear,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    None,
    Eps,
    Alpha,
    Truncate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub kind: KindName,
    #[serde(rename = "A1", default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(rename = "A2", default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Tail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub b: FunctionConfig,
    pub sigma: FunctionConfig,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default)]
    pub unsafe_hypotheses: bool,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_mode() -> ModeName {
    ModeName::None
}

fn need(value: Option<f64>, key: &str, ctx: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("{ctx}: missing key `{key}`")))
}

impl FunctionConfig {
    fn to_spec(&self, ctx: &str, exponent_key: &str) -> Result<FunctionSpec> {
        let exponent = if exponent_key == "A1" { self.a1 } else { self.a2 };
        let stray = if exponent_key == "A1" { self.a2 } else { self.a1 };
        if stray.is_some() {
            let other = if exponent_key == "A1" { "A2" } else { "A1" };
            return Err(Error::Config(format!("{ctx}: key `{other}` does not apply here")));
        }
        let profile = match self.kind {
            KindName::PowerLog => Profile::PowerLog {
                exponent: need(exponent, exponent_key, ctx)?,
                sign: self.sign.unwrap_or(1.0),
            },
            KindName::PowerLogSin => Profile::PowerLogSin {
                exponent: need(exponent, exponent_key, ctx)?,
            },
            KindName::CustomTable => {
                let z = self
                    .z
                    .clone()
                    .ok_or_else(|| Error::Config(format!("{ctx}: missing key `z`")))?;
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::Config(format!("{ctx}: missing key `values`")))?;
                Profile::Table(MonotoneCubic::new(z, values)?)
            }
            KindName::Linear => Profile::Linear {
                slope: need(self.slope, "slope", ctx)?,
            },
            KindName::Constant => Profile::Constant {
                value: need(self.value, "value", ctx)?,
            },
        };
        Ok(FunctionSpec {
            profile,
            tail: self.tail.unwrap_or_default(),
            multiplier: self.multiplier.unwrap_or(1.0),
        })
    }
}

/// A base specification or one of its regularisations.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltCoefficients {
    Base(CoefficientSpec),
    Regularized(RegularizedCoefficient),
}

impl super::Coefficients for BuiltCoefficients {
    fn drift(&self, z: f64) -> f64 {
        match self {
            BuiltCoefficients::Base(s) => s.drift(z),
            BuiltCoefficients::Regularized(r) => r.drift(z),
        }
    }
    fn diffusion(&self, z: f64) -> f64 {
        match self {
            BuiltCoefficients::Base(s) => s.diffusion(z),
            BuiltCoefficients::Regularized(r) => r.diffusion(z),
        }
    }
}

impl CoefficientConfig {
    pub fn spec(&self) -> Result<CoefficientSpec> {
        let b = self.b.to_spec("coefficients.b", "A1")?;
        let sigma = self.sigma.to_spec("coefficients.sigma", "A2")?;
        if self.unsafe_hypotheses {
            CoefficientSpec::new_unchecked_hypotheses(b, sigma, self.delta)
        } else {
            CoefficientSpec::new(b, sigma, self.delta)
        }
    }

    pub fn regularization(&self) -> Result<Option<Mode>> {
        let ctx = "coefficients";
        Ok(match self.mode {
            ModeName::None => None,
            ModeName::Eps => Some(Mode::Eps {
                eps: need(self.eps, "eps", ctx)?,
            }),
            ModeName::Alpha => Some(Mode::Alpha {
                alpha: need(self.alpha, "alpha", ctx)?,
            }),
            ModeName::Truncate => Some(Mode::Truncate {
                level: need(self.m, "M", ctx)?,
            }),
        })
    }

    pub fn build(&self) -> Result<BuiltCoefficients> {
        let spec = self.spec()?;
        Ok(match self.regularization()? {
            None => BuiltCoefficients::Base(spec),
            Some(mode) => BuiltCoefficients::Regularized(RegularizedCoefficient::new(&spec, mode)?),
        })
    }
}
