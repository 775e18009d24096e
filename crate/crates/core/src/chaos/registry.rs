//! Named functions the CLI and configs can refer to.
//!
//! | spec               | function                     |
//! |--------------------|------------------------------|
//! | `hermite:q`        | `H_q(x)`                     |
//! | `poly:[a0,a1,...]` | `a0 + a1 x + a2 x² + ...`    |
//! | `sign`             | `sign(x)`                    |
//! | `abs-centered`     | `|x| − √(2/π)`               |
//! | `cube`             | `x³`                         |
//! | `indicator:a`      | `1{x > a} − P(N > a)`        |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::expansion::{expand, expand_with, HermiteExpansion};
use super::quadrature::GaussianRule;
use super::hermite::hermite_eval;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FunctionSpec {
    Hermite(usize),
    Poly(Vec<f64>),
    Sign,
    AbsCentered,
    Cube,
    Indicator(f64),
}

impl FunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Hermite(q) => hermite_eval(*q, x),
            FunctionSpec::Poly(a) => a.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            FunctionSpec::Sign => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            FunctionSpec::AbsCentered => x.abs() - (2.0 / std::f64::consts::PI).sqrt(),
            FunctionSpec::Cube => x * x * x,
            FunctionSpec::Indicator(a) => {
                let tail = 1.0 - standard_normal().cdf(*a);
                if x > *a {
                    1.0 - tail
                } else {
                    -tail
                }
            }
        }
    }

    /// Points where the function jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            FunctionSpec::Sign | FunctionSpec::AbsCentered => vec![0.0],
            FunctionSpec::Indicator(a) => vec![*a],
            _ => Vec::new(),
        }
    }

    /// Expansion up to `truncation`. `hermite:q` is built exactly, smooth
    /// functions use a Gauss–Hermite rule of `quad_order` nodes, and
    /// functions with breakpoints use the composite rule split there.
    pub fn expansion(&self, truncation: usize, quad_order: usize) -> Result<HermiteExpansion> {
        match self {
            FunctionSpec::Hermite(0) => Err(Error::RankNotFound { truncation, tolerance: 0.0 }),
            FunctionSpec::Hermite(q) if *q > truncation => Err(Error::InvalidArgument(format!(
                "hermite:{q} exceeds truncation {truncation}"
            ))),
            FunctionSpec::Hermite(q) => {
                let mut c = vec![0.0; truncation + 1];
                c[*q] = 1.0;
                Ok(HermiteExpansion::from_coeffs(c))
            }
            other if other.breakpoints().is_empty() => expand(|x| other.eval(x), truncation, quad_order),
            other => {
                if truncation < 1 {
                    return Err(Error::InvalidArgument("truncation must be >= 1".into()));
                }
                expand_with(&GaussianRule::composite(&other.breakpoints()), |x| other.eval(x), truncation)
            }
        }
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownFunction(s.to_string());
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        match (name, arg) {
            ("hermite", Some(q)) => q.parse().map(FunctionSpec::Hermite).map_err(|_| bad()),
            ("poly", Some(list)) => {
                let coeffs: Vec<f64> = serde_json::from_str(list).map_err(|_| bad())?;
                if coeffs.is_empty() {
                    return Err(bad());
                }
                Ok(FunctionSpec::Poly(coeffs))
            }
            ("sign", None) => Ok(FunctionSpec::Sign),
            ("abs-centered", None) => Ok(FunctionSpec::AbsCentered),
            ("cube", None) => Ok(FunctionSpec::Cube),
            ("indicator", Some(a)) => {
                let a: f64 = a.parse().map_err(|_| bad())?;
                if a.is_finite() {
                    Ok(FunctionSpec::Indicator(a))
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Hermite(q) => write!(f, "hermite:{q}"),
            FunctionSpec::Poly(a) => {
                write!(f, "poly:[")?;
                for (i, c) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c:?}")?;
                }
                write!(f, "]")
            }
            FunctionSpec::Sign => write!(f, "sign"),
            FunctionSpec::AbsCentered => write!(f, "abs-centered"),
            FunctionSpec::Cube => write!(f, "cube"),
            FunctionSpec::Indicator(a) => write!(f, "indicator:{a:?}"),
        }
    }
}

impl TryFrom<String> for FunctionSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FunctionSpec> for String {
    fn from(f: FunctionSpec) -> Self {
        f.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["hermite:3", "poly:[0.0,-1.0,0.5]", "sign", "abs-centered", "cube", "indicator:0.5"] {
            let f: FunctionSpec = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        for s in ["hermite", "hermite:x", "poly:[]", "poly:1,2", "indicator:inf", "exp", "sign:1"] {
            assert!(matches!(s.parse::<FunctionSpec>(), Err(Error::UnknownFunction(_))), "{s}");
        }
    }

    #[test]
    fn builtins_are_centered() {
        for s in ["hermite:2", "sign", "abs-centered", "cube", "indicator:0.3", "poly:[-1,0,1]"] {
            let f: FunctionSpec = s.parse().unwrap();
            let e = f.expansion(20, 128).unwrap();
            assert!(e.mean().abs() < 1e-12, "{s}: mean {}", e.mean());
        }
    }

    #[test]
    fn ranks() {
        let rank = |s: &str| s.parse::<FunctionSpec>().unwrap().expansion(10, 128).unwrap().rank();
        assert_eq!(rank("hermite:4"), 4);
        assert_eq!(rank("abs-centered"), 2);
        assert_eq!(rank("cube"), 1);
        assert_eq!(rank("indicator:0"), 1);
        assert_eq!(rank("poly:[-1,0,1]"), 2);
    }

    #[test]
    fn poly_evaluates_by_horner() {
        let f: FunctionSpec = "poly:[1,2,3]".parse().unwrap();
        assert_eq!(f.eval(2.0), 1.0 + 4.0 + 12.0);
    }
}
