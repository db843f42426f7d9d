//! Test functions on `E` with derivative evaluators and smoothness tags.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{invalid, Result};
use crate::geometry::{Continuum, Location};
use crate::polynomial::CPolynomial;
use crate::serde_c64;

/// Known regularity of a test function on `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Smoothness {
    Analytic,
    /// `ω(δ) ≍ δ^β`.
    Holder {
        beta: f64,
    },
    Custom {
        note: String,
    },
}

type Evaluator = dyn Fn(Complex64, usize) -> Complex64 + Send + Sync;

/// A function `f` together with its derivatives up to `max_order`.
///
/// `value(z, l)` returns `f^{(l)}(z)`.
#[derive(Clone)]
pub struct FunctionHandle {
    name: String,
    eval: Arc<Evaluator>,
    max_order: usize,
    smoothness: Smoothness,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("name", &self.name)
            .field("max_order", &self.max_order)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl FunctionHandle {
    pub fn new<F>(
        name: impl Into<String>,
        max_order: usize,
        smoothness: Smoothness,
        eval: F,
    ) -> Self
    where
        F: Fn(Complex64, usize) -> Complex64 + Send + Sync + 'static,
    {
        FunctionHandle {
            name: name.into(),
            eval: Arc::new(eval),
            max_order,
            smoothness,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z, 0)
    }

    /// `f^{(l)}(z)`.
    pub fn derivative(&self, z: Complex64, l: usize) -> Result<Complex64> {
        if l > self.max_order {
            return invalid(format!(
                "{} has derivatives up to order {}, asked for {l}",
                self.name, self.max_order
            ));
        }
        Ok((self.eval)(z, l))
    }

    /// `[f(z), f′(z), …, f^{(r)}(z)]`.
    pub fn derivatives(&self, z: Complex64, r: usize) -> Result<Vec<Complex64>> {
        (0..=r).map(|l| self.derivative(z, l)).collect()
    }

    /// The `l`-th derivative as a function in its own right.
    pub fn derived(&self, l: usize) -> Result<FunctionHandle> {
        if l > self.max_order {
            return invalid(format!("{} has no derivative of order {l}", self.name));
        }
        let inner = self.eval.clone();
        let smoothness = match &self.smoothness {
            Smoothness::Holder { beta } if *beta - l as f64 > 0.0 => Smoothness::Holder {
                beta: beta - l as f64,
            },
            Smoothness::Analytic => Smoothness::Analytic,
            other => Smoothness::Custom {
                note: format!("derivative {l} of {other:?}"),
            },
        };
        Ok(FunctionHandle::new(
            format!("d{l}/dz{l} {}", self.name),
            self.max_order - l,
            smoothness,
            move |z, m| inner(z, m + l),
        ))
    }

    pub fn from_polynomial(p: CPolynomial) -> Self {
        let degree = p.degree();
        FunctionHandle::new(
            format!("polynomial of degree {degree}"),
            usize::MAX,
            Smoothness::Analytic,
            move |z, l| {
                if l > degree {
                    c64(0.0, 0.0)
                } else {
                    p.eval_derivatives(z, l)[l]
                }
            },
        )
    }
}

/// `β(β−1)…(β−l+1)`.
fn falling(beta: f64, l: usize) -> f64 {
    (0..l).map(|j| beta - j as f64).product()
}

fn factorial(l: usize) -> f64 {
    (1..=l).map(|j| j as f64).product()
}

/// Serializable identifier of a built-in test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum FunctionSpec {
    /// `1/(z − a)` with `a ∉ E`.
    Pole {
        #[serde(with = "serde_c64")]
        a: Complex64,
    },
    /// `(z₀ − z)^β`, principal branch, `z₀ ∈ L`.
    Branch {
        beta: f64,
        #[serde(with = "serde_c64")]
        z0: Complex64,
    },
    /// `(z₀ − z)·log(z₀ − z)`, `z₀ ∈ L`.
    Logfac {
        #[serde(with = "serde_c64")]
        z0: Complex64,
    },
    /// `exp(z)`.
    Entire,
}

/// Derivative order available for the built-ins.
pub const BUILTIN_ORDER: usize = 8;

impl FunctionSpec {
    /// Parses `pole(2)`, `pole(2,0.5)`, `branch(0.5,1)`, `branch(0.5,1,0)`,
    /// `logfac(1)`, `entire`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            Some(_) => return invalid(format!("malformed function id '{s}'")),
            None => (s, ""),
        };
        let nums = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    crate::Error::InvalidArgument(format!("bad number '{t}' in '{s}'"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let point = |v: &[f64]| -> Result<Complex64> {
            match v {
                [re] => Ok(c64(*re, 0.0)),
                [re, im] => Ok(c64(*re, *im)),
                _ => invalid(format!("expected a point (re[,im]) in '{s}'")),
            }
        };
        match name.trim() {
            "pole" => Ok(FunctionSpec::Pole { a: point(&nums)? }),
            "branch" => {
                if nums.len() < 2 {
                    return invalid(format!("branch needs (beta, z0) in '{s}'"));
                }
                Ok(FunctionSpec::Branch {
                    beta: nums[0],
                    z0: point(&nums[1..])?,
                })
            }
            "logfac" => Ok(FunctionSpec::Logfac { z0: point(&nums)? }),
            "entire" | "exp" if nums.is_empty() => Ok(FunctionSpec::Entire),
            other => invalid(format!("unknown function id '{other}'")),
        }
    }

    /// Binds the function to a domain, checking its admissibility.
    pub fn build(&self, e: &Continuum) -> Result<FunctionHandle> {
        match *self {
            FunctionSpec::Pole { a } => {
                if e.classify(a) != Location::Exterior || e.distance(a) < 1e-6 * e.diameter() {
                    return invalid(format!("pole {a} must lie outside E"));
                }
                Ok(FunctionHandle::new(
                    format!("pole({a})"),
                    BUILTIN_ORDER,
                    Smoothness::Analytic,
                    move |z, l| {
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        (z - a).powi(-(l as i32) - 1) * (sign * factorial(l))
                    },
                ))
            }
            FunctionSpec::Branch { beta, z0 } => {
                if e.classify(z0) != Location::Boundary {
                    return invalid(format!("branch point {z0} must lie on the boundary of E"));
                }
                if beta <= 0.0 {
                    return invalid(format!("branch exponent must be positive, got {beta}"));
                }
                let smooth = if beta.fract() == 0.0 {
                    Smoothness::Analytic
                } else {
                    Smoothness::Holder { beta }
                };
                Ok(FunctionHandle::new(
                    format!("branch({beta},{z0})"),
                    BUILTIN_ORDER,
                    smooth,
                    move |z, l| {
                        let u = z0 - z;
                        let coef = falling(beta, l) * if l % 2 == 0 { 1.0 } else { -1.0 };
                        if coef == 0.0 {
                            return c64(0.0, 0.0);
                        }
                        if u == c64(0.0, 0.0) {
                            return if beta - l as f64 > 0.0 {
                                c64(0.0, 0.0)
                            } else {
                                c64(f64::INFINITY, 0.0)
                            };
                        }
                        u.powf(beta - l as f64) * coef
                    },
                ))
            }
            FunctionSpec::Logfac { z0 } => {
                if e.classify(z0) != Location::Boundary {
                    return invalid(format!("log point {z0} must lie on the boundary of E"));
                }
                Ok(FunctionHandle::new(
                    format!("logfac({z0})"),
                    BUILTIN_ORDER,
                    Smoothness::Custom {
                        note: "δ·log(1/δ)".into(),
                    },
                    move |z, l| {
                        let u = z0 - z;
                        let zero = u == c64(0.0, 0.0);
                        match l {
                            0 if zero => c64(0.0, 0.0),
                            0 => u * u.ln(),
                            1 if zero => c64(f64::INFINITY, 0.0),
                            1 => -u.ln() - 1.0,
                            _ if zero => c64(f64::INFINITY, 0.0),
                            _ => u.powi(1 - l as i32) * factorial(l - 2),
                        }
                    },
                ))
            }
            FunctionSpec::Entire => Ok(FunctionHandle::new(
                "entire",
                usize::MAX,
                Smoothness::Analytic,
                |z, _| z.exp(),
            )),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt = |z: &Complex64| {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else {
                format!("{},{}", z.re, z.im)
            }
        };
        match self {
            FunctionSpec::Pole { a } => write!(f, "pole({})", pt(a)),
            FunctionSpec::Branch { beta, z0 } => write!(f, "branch({beta},{})", pt(z0)),
            FunctionSpec::Logfac { z0 } => write!(f, "logfac({})", pt(z0)),
            FunctionSpec::Entire => write!(f, "entire"),
        }
    }
}

/// The catalog of built-in function ids with a one-line description.
pub fn builtin_functions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("pole(a)", "1/(z-a), a outside E; analytic on E"),
        (
            "branch(beta,z0)",
            "(z0-z)^beta, principal branch, z0 on the boundary; Holder(beta)",
        ),
        (
            "logfac(z0)",
            "(z0-z)log(z0-z), z0 on the boundary; modulus ~ d*log(1/d)",
        ),
        ("entire", "exp(z)"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> Continuum {
        Continuum::unit_disk()
    }

    /// Central difference of order-l derivative against order l+1.
    fn check_derivatives(f: &FunctionHandle, z: Complex64, upto: usize) {
        let h = 1e-5;
        for l in 0..upto {
            let fd =
                (f.derivative(z + h, l).unwrap() - f.derivative(z - h, l).unwrap()) / (2.0 * h);
            let exact = f.derivative(z, l + 1).unwrap();
            assert!(
                (fd - exact).norm() <= 1e-5 * (1.0 + exact.norm()),
                "{} order {l}: {fd} vs {exact}",
                f.name()
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let z = c64(0.2, 0.3);
        for spec in [
            "pole(2)",
            "branch(0.5,1)",
            "branch(2.5,1)",
            "logfac(1)",
            "entire",
        ] {
            let f = FunctionSpec::parse(spec).unwrap().build(&disk()).unwrap();
            check_derivatives(&f, z, 4);
        }
    }

    #[test]
    fn branch_is_continuous_at_branch_point() {
        let f = FunctionSpec::parse("branch(0.5,1)")
            .unwrap()
            .build(&disk())
            .unwrap();
        assert_eq!(f.eval(c64(1.0, 0.0)), c64(0.0, 0.0));
        assert!(f.eval(c64(1.0 - 1e-10, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn admissibility_checks() {
        assert!(FunctionSpec::parse("branch(0.5,0.5)")
            .unwrap()
            .build(&disk())
            .is_err());
        assert!(FunctionSpec::parse("pole(0.5)")
            .unwrap()
            .build(&disk())
            .is_err());
        assert!(FunctionSpec::parse("logfac(0)")
            .unwrap()
            .build(&disk())
            .is_err());
        assert!(FunctionSpec::parse("nope(1)").is_err());
        assert!(FunctionSpec::parse("pole(x)").is_err());
    }

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "pole(2)",
            "pole(0,2)",
            "branch(0.5,1)",
            "logfac(1)",
            "entire",
        ] {
            let spec = FunctionSpec::parse(s).unwrap();
            assert_eq!(spec.to_string(), s);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<FunctionSpec>(&json).unwrap(), spec);
        }
    }

    #[test]
    fn derived_function_shifts_order() {
        let f = FunctionSpec::Entire.build(&disk()).unwrap();
        let d2 = f.derived(2).unwrap();
        assert_eq!(d2.eval(c64(0.5, 0.0)), c64(0.5f64.exp(), 0.0));
        let b = FunctionSpec::parse("branch(2.5,1)")
            .unwrap()
            .build(&disk())
            .unwrap();
        assert_eq!(
            b.derived(2).unwrap().smoothness(),
            &Smoothness::Holder { beta: 0.5 }
        );
    }
}
