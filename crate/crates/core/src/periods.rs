//! Infectious-period distributions.
//!
//! Each law carries an exact Laplace transform `E[exp(-θ I)]`, its mean and
//! variance, and a sampler driven by a caller-owned random stream.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the infectious period `I`.
///
/// Serialized as `{"kind": "exponential", "rate": 1.0}`,
/// `{"kind": "constant", "value": 1.0}` or
/// `{"kind": "gamma", "shape": 2.0, "rate": 2.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawPeriod")]
pub enum InfectiousPeriod {
    Constant { value: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
}

// Validation hook for deserialization.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawPeriod {
    Constant { value: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl TryFrom<RawPeriod> for InfectiousPeriod {
    type Error = Error;

    fn try_from(raw: RawPeriod) -> Result<Self> {
        match raw {
            RawPeriod::Constant { value } => Self::constant(value),
            RawPeriod::Exponential { rate } => Self::exponential(rate),
            RawPeriod::Gamma { shape, rate } => Self::gamma(shape, rate),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl InfectiousPeriod {
    pub fn constant(value: f64) -> Result<Self> {
        Ok(Self::Constant { value: positive("constant period", value)? })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential { rate: positive("exponential rate", rate)? })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Ok(Self::Gamma { shape: positive("gamma shape", shape)?, rate: positive("gamma rate", rate)? })
    }

    /// `φ_I(θ) = E[exp(-θ I)]` in closed form.
    ///
    /// Negative `theta` is accepted wherever the transform is finite:
    /// always for a constant period, and `theta > -rate` otherwise.
    pub fn laplace(&self, theta: f64) -> Result<f64> {
        if theta.is_nan() {
            return Err(Error::Domain("laplace transform at NaN".into()));
        }
        match *self {
            Self::Constant { value } => Ok((-theta * value).exp()),
            Self::Exponential { rate } => {
                if theta <= -rate {
                    return Err(Error::Domain(format!("exponential({rate}) transform diverges at theta={theta}")));
                }
                Ok(rate / (rate + theta))
            }
            Self::Gamma { shape, rate } => {
                if theta <= -rate {
                    return Err(Error::Domain(format!("gamma({shape}, {rate}) transform diverges at theta={theta}")));
                }
                Ok((rate / (rate + theta)).powf(shape))
            }
        }
    }

    /// Mean and variance `(μ_I, σ_I²)`.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Self::Constant { value } => (value, 0.0),
            Self::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            Self::Gamma { shape, rate } => (shape / rate, shape / (rate * rate)),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    /// One draw of `I`. The stream is the only source of randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            // rand_distr uses Marsaglia-Tsang rejection; its `scale` is 1/rate.
            Self::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated gamma").sample(rng),
        }
    }

    /// Cached sampler for hot loops.
    pub fn sampler(&self) -> PeriodSampler {
        match *self {
            Self::Constant { value } => PeriodSampler::Constant(value),
            Self::Exponential { rate } => PeriodSampler::Exponential(Exp::new(rate).expect("validated rate")),
            Self::Gamma { shape, rate } => {
                PeriodSampler::Gamma(Gamma::new(shape, 1.0 / rate).expect("validated gamma"))
            }
        }
    }
}

/// Pre-built distribution object; draws are identical to [`InfectiousPeriod::sample`].
#[derive(Debug, Clone, Copy)]
pub enum PeriodSampler {
    Constant(f64),
    Exponential(Exp<f64>),
    Gamma(Gamma<f64>),
}

impl Distribution<f64> for PeriodSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Exponential(d) => d.sample(rng),
            Self::Gamma(d) => d.sample(rng),
        }
    }
}

/// Short command-line form: `const:1`, `exp:1`, `gamma:2:2`.
impl FromStr for InfectiousPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::InvalidParameter(format!("period spec '{s}' is missing a parameter")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("period spec '{s}': {e}")))
        };
        let expect_len = |n: usize| -> Result<()> {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("period spec '{s}' has wrong number of fields")))
            }
        };
        match parts[0].trim().to_ascii_lowercase().as_str() {
            "const" | "constant" => {
                expect_len(2)?;
                Self::constant(num(1)?)
            }
            "exp" | "exponential" => {
                expect_len(2)?;
                Self::exponential(num(1)?)
            }
            "gamma" => {
                expect_len(3)?;
                Self::gamma(num(1)?, num(2)?)
            }
            other => Err(Error::InvalidParameter(format!("unknown period kind '{other}'"))),
        }
    }
}

impl fmt::Display for InfectiousPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "const:{value}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Gamma { shape, rate } => write!(f, "gamma:{shape}:{rate}"),
        }
    }
}
