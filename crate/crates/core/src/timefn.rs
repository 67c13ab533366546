//! Closed catalog of scalar time-dependent coefficients with analytic derivatives.
//!
//! Descriptors are tagged JSON records, for example
//! `{"form": "sinusoid", "amp": 0.2, "freq": 1.0, "phase": 0.0, "offset": 1.0}`.
//! Complex scalars are written either as a plain number or as `[re, im]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::densemat::C64;

/// Complex scalar accepted as `1.5` or `[1.5, -0.2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ScalarRepr", into = "ScalarRepr")]
pub struct Scalar(pub C64);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ScalarRepr> for Scalar {
    fn from(r: ScalarRepr) -> Self {
        match r {
            ScalarRepr::Real(x) => Scalar(C64::new(x, 0.0)),
            ScalarRepr::Pair([re, im]) => Scalar(C64::new(re, im)),
        }
    }
}

impl From<Scalar> for ScalarRepr {
    fn from(s: Scalar) -> Self {
        if s.0.im == 0.0 {
            ScalarRepr::Real(s.0.re)
        } else {
            ScalarRepr::Pair([s.0.re, s.0.im])
        }
    }
}

impl From<C64> for Scalar {
    fn from(z: C64) -> Self {
        Scalar(z)
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar(C64::new(x, 0.0))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFunction {
    Constant {
        value: Scalar,
    },
    /// `c₀ + c₁ t + c₂ t² + …`
    Polynomial {
        coeffs: Vec<Scalar>,
    },
    /// `offset + amp · sin(freq · t + phase)`
    Sinusoid {
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amp · e^{rate · t}`
    Exponential {
        amp: f64,
        rate: f64,
    },
    /// `scale · tan(freq · t)`
    TanScaled {
        scale: f64,
        #[serde(default = "one")]
        freq: f64,
    },
    /// `scale · sec(freq · t)`
    SecScaled {
        scale: f64,
        #[serde(default = "one")]
        freq: f64,
    },
    /// `scale · tanh(freq · t)`
    TanhScaled {
        scale: f64,
        #[serde(default = "one")]
        freq: f64,
    },
    Sum {
        terms: Vec<TimeFunction>,
    },
    Scaled {
        factor: Scalar,
        inner: Box<TimeFunction>,
    },
}

impl TimeFunction {
    pub fn constant(value: impl Into<Scalar>) -> Self {
        TimeFunction::Constant { value: value.into() }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn sinusoid(amp: f64, freq: f64, phase: f64, offset: f64) -> Self {
        TimeFunction::Sinusoid { amp, freq, phase, offset }
    }

    pub fn scaled(factor: impl Into<Scalar>, inner: TimeFunction) -> Self {
        TimeFunction::Scaled { factor: factor.into(), inner: Box::new(inner) }
    }

    pub fn value(&self, t: f64) -> C64 {
        use TimeFunction::*;
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            Constant { value } => value.0,
            Polynomial { coeffs } => coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c.0),
            Sinusoid { amp, freq, phase, offset } => r(offset + amp * (freq * t + phase).sin()),
            Exponential { amp, rate } => r(amp * (rate * t).exp()),
            TanScaled { scale, freq } => r(scale * (freq * t).tan()),
            SecScaled { scale, freq } => r(scale / (freq * t).cos()),
            TanhScaled { scale, freq } => r(scale * (freq * t).tanh()),
            Sum { terms } => terms.iter().map(|f| f.value(t)).sum(),
            Scaled { factor, inner } => factor.0 * inner.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> C64 {
        use TimeFunction::*;
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            Constant { .. } => r(0.0),
            Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, (k, c)| acc * t + c.0 * k as f64),
            Sinusoid { amp, freq, phase, .. } => r(amp * freq * (freq * t + phase).cos()),
            Exponential { amp, rate } => r(amp * rate * (rate * t).exp()),
            TanScaled { scale, freq } => {
                let c = (freq * t).cos();
                r(scale * freq / (c * c))
            }
            SecScaled { scale, freq } => {
                let x = freq * t;
                r(scale * freq * x.tan() / x.cos())
            }
            TanhScaled { scale, freq } => {
                let th = (freq * t).tanh();
                r(scale * freq * (1.0 - th * th))
            }
            Sum { terms } => terms.iter().map(|f| f.derivative(t)).sum(),
            Scaled { factor, inner } => factor.0 * inner.derivative(t),
        }
    }

    /// Poles inside `[t0, t1]`, sorted.
    pub fn singularities(&self, t0: f64, t1: f64) -> Vec<f64> {
        use TimeFunction::*;
        let mut out = match self {
            TanScaled { freq, .. } | SecScaled { freq, .. } if *freq != 0.0 => {
                // freq·t = (k + ½)π
                let (a, b) = if *freq > 0.0 { (freq * t0, freq * t1) } else { (freq * t1, freq * t0) };
                let k0 = ((a / PI) - 0.5).ceil() as i64;
                let k1 = ((b / PI) - 0.5).floor() as i64;
                (k0..=k1).map(|k| (k as f64 + 0.5) * PI / freq).collect()
            }
            Sum { terms } => terms.iter().flat_map(|f| f.singularities(t0, t1)).collect(),
            Scaled { inner, .. } => inner.singularities(t0, t1),
            _ => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Largest `|Im f(t)|` over the given sample times.
    pub fn max_imag(&self, times: impl IntoIterator<Item = f64>) -> f64 {
        times.into_iter().map(|t| self.value(t).im.abs()).fold(0.0, f64::max)
    }
}
