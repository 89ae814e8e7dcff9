//! Operator-convex generator functions `f` with `f(1) = 0`.
//!
//! Each builtin carries its analytic boundary behaviour so that zero
//! eigenvalues never have to be handled by numerical extrapolation:
//!
//! * `limit_at_zero` is lim_{x→0⁺} f(x);
//! * `infinity_slope` is lim_{y→0⁺} y·f(1/y), i.e. the transpose at 0⁺.
//!
//! For every builtin lim_{x→0⁺} x·f(c/x) = c·infinity_slope, which is what
//! [`GeneratorFunction::limit_at_inf_weighted`] returns.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::divergence::ExtendedReal;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// f(x) = −ln x.
    NegLog,
    /// f_p(x) = (1 − x^p)/(p(1 − p)), p ∈ (−1, 2) \ {0, 1}.
    Power(f64),
    /// f_q(x) = (1 − x^{1−q})/(1 − q), q ∈ (0, 2) \ {1}.
    Tsallis(f64),
}

/// A generator `f` or its transpose x·f(1/x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorFunction {
    family: Family,
    transposed: bool,
}

impl GeneratorFunction {
    pub fn neg_log() -> Self {
        Self {
            family: Family::NegLog,
            transposed: false,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > -1.0 && p < 2.0) || p == 0.0 || p == 1.0 {
            return Err(Error::ParamOutOfRange {
                name: "p",
                value: p,
                range: "(-1, 2) without {0, 1}",
            });
        }
        Ok(Self {
            family: Family::Power(p),
            transposed: false,
        })
    }

    pub fn tsallis(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 2.0) || q == 1.0 {
            return Err(Error::ParamOutOfRange {
                name: "q",
                value: q,
                range: "(0, 2) without {1}",
            });
        }
        Ok(Self {
            family: Family::Tsallis(q),
            transposed: false,
        })
    }

    /// x ↦ x·f(1/x). Transposing twice gives back `self`.
    pub fn transpose(&self) -> Self {
        Self {
            family: self.family,
            transposed: !self.transposed,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    fn base_eval(&self, x: f64) -> f64 {
        match self.family {
            Family::NegLog => -x.ln(),
            Family::Power(p) => (1.0 - x.powf(p)) / (p * (1.0 - p)),
            Family::Tsallis(q) => (1.0 - x.powf(1.0 - q)) / (1.0 - q),
        }
    }

    fn base_limit_at_zero(&self) -> ExtendedReal {
        match self.family {
            Family::NegLog => ExtendedReal::PosInf,
            Family::Power(p) if p > 0.0 => ExtendedReal::Finite(1.0 / (p * (1.0 - p))),
            Family::Power(_) => ExtendedReal::PosInf,
            Family::Tsallis(q) if q < 1.0 => ExtendedReal::Finite(1.0 / (1.0 - q)),
            Family::Tsallis(_) => ExtendedReal::PosInf,
        }
    }

    fn base_infinity_slope(&self) -> ExtendedReal {
        match self.family {
            Family::NegLog => ExtendedReal::Finite(0.0),
            Family::Power(p) if p < 1.0 => ExtendedReal::Finite(0.0),
            Family::Power(_) => ExtendedReal::PosInf,
            Family::Tsallis(_) => ExtendedReal::Finite(0.0),
        }
    }

    /// f(x) for x > 0.
    pub fn eval(&self, x: f64) -> f64 {
        if self.transposed {
            x * self.base_eval(1.0 / x)
        } else {
            self.base_eval(x)
        }
    }

    /// lim_{x→0⁺} f(x).
    pub fn limit_at_zero(&self) -> ExtendedReal {
        if self.transposed {
            self.base_infinity_slope()
        } else {
            self.base_limit_at_zero()
        }
    }

    /// lim_{y→0⁺} y·f(1/y).
    pub fn infinity_slope(&self) -> ExtendedReal {
        if self.transposed {
            self.base_limit_at_zero()
        } else {
            self.base_infinity_slope()
        }
    }

    /// lim_{x→0⁺} x·f(c/x) for c > 0.
    pub fn limit_at_inf_weighted(&self, c: f64) -> ExtendedReal {
        self.infinity_slope().scale(c)
    }

    /// Trusted flag: every builtin (and its transpose) is operator convex on (0, ∞).
    pub fn claims_operator_convex(&self) -> bool {
        true
    }

    /// Trusted flag for operator monotone decreasing generators.
    ///
    /// True for −ln, f_p with p < 1 and every Tsallis f_q; false for f_p with
    /// p ∈ (1, 2) (which is increasing) and for transposes.
    pub fn claims_monotone_decreasing(&self) -> bool {
        if self.transposed {
            return false;
        }
        match self.family {
            Family::NegLog | Family::Tsallis(_) => true,
            Family::Power(p) => p < 1.0,
        }
    }

    pub fn name(&self) -> String {
        let base = match self.family {
            Family::NegLog => "neg_log".to_string(),
            Family::Power(p) => format!("power:{p}"),
            Family::Tsallis(q) => format!("tsallis:{q}"),
        };
        if self.transposed {
            format!("transpose({base})")
        } else {
            base
        }
    }

    /// Grid sanity checks of the scalar necessary conditions.
    pub fn grid_diagnostics(&self, grid: &[f64]) -> GridDiagnostics {
        let normalization = self.eval(1.0).abs();
        let mut convexity: f64 = 0.0;
        let mut monotonicity: f64 = 0.0;
        for (i, &x) in grid.iter().enumerate() {
            let fx = self.eval(x);
            for &y in &grid[i + 1..] {
                let fy = self.eval(y);
                let mid = self.eval(0.5 * (x + y));
                let scale = 1.0f64.max(fx.abs()).max(fy.abs());
                convexity = convexity.max((mid - 0.5 * (fx + fy)) / scale);
                let (lo, hi) = if x < y { (fx, fy) } else { (fy, fx) };
                monotonicity = monotonicity.max((hi - lo) / scale);
            }
        }
        GridDiagnostics {
            normalization,
            convexity_excess: convexity,
            increase_excess: monotonicity,
        }
    }
}

/// Worst violations found by [`GeneratorFunction::grid_diagnostics`].
///
/// Excess values are relative to max(1, |f(x)|, |f(y)|).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDiagnostics {
    pub normalization: f64,
    pub convexity_excess: f64,
    pub increase_excess: f64,
}

/// {2^k : k = −20..=20}.
pub fn standard_grid() -> Vec<f64> {
    (-20..=20).map(|k| 2f64.powi(k)).collect()
}

impl fmt::Display for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for GeneratorFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl FromStr for GeneratorFunction {
    type Err = Error;

    /// Grammar: `name[:param]`, plus `transpose(<spec>)`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(inner) = spec
            .strip_prefix("transpose(")
            .and_then(|s| s.strip_suffix(')'))
        {
            return inner.parse::<Self>().map(|g| g.transpose());
        }
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let unknown = || Error::UnknownGenerator(spec.to_string());
        let number = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(unknown)?.trim().parse::<f64>().map_err(|_| unknown())
        };
        match name {
            "neg_log" if param.is_none() => Ok(Self::neg_log()),
            "power" => Self::power(number(param)?),
            "tsallis" => Self::tsallis(number(param)?),
            _ => Err(unknown()),
        }
    }
}

/// Parses a generator spec such as `"neg_log"`, `"power:0.5"` or `"tsallis:1.5"`.
pub fn parse_generator(spec: &str) -> Result<GeneratorFunction> {
    spec.parse()
}

/// The operator monotone decreasing builtins used by the verification suites.
pub fn builtin_catalog() -> Vec<GeneratorFunction> {
    DEFAULT_GENERATORS
        .iter()
        .map(|s| parse_generator(s).expect("builtin spec parses"))
        .collect()
}

pub const DEFAULT_GENERATORS: [&str; 5] = ["neg_log", "power:0.5", "power:-0.5", "tsallis:0.5", "tsallis:1.5"];
