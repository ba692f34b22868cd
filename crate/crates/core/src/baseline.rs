//! Baseline lifetime distributions: the generalized gamma family and the
//! generic evaluation surface every other module consumes.
//!
//! A baseline is an absolutely continuous distribution on (0, inf) exposing
//! its density f, distribution function F, reverse hazard r = f/F, the
//! log-density slope f'/f, and the reverse-hazard derivative
//! r' = r (f'/f - r). The generalized gamma GG(beta, alpha) has density
//!
//! ```text
//! f(t) = beta / Gamma(alpha/beta) * t^(alpha-1) * exp(-t^beta),  t > 0,
//! ```
//!
//! and contains the exponential (beta = alpha = 1), Weibull (beta = alpha)
//! and gamma (beta = 1) families.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;
use crate::special::{ln_gamma, ln_reg_lower_gamma, reg_lower_gamma};

/// Below this point the closed-form small-t asymptotics replace the exact
/// ratio f/F, which turns 0/0-like there: r(t) ~ alpha/t and
/// F(t) ~ beta t^alpha / (alpha Gamma(alpha/beta)).
pub const T_MIN_GUARD: f64 = 1e-8;

/// Shared handle to a baseline distribution.
pub type BaselineRef = Arc<dyn Baseline>;

/// Evaluation surface of a baseline lifetime distribution.
///
/// All methods are pure; implementations must be safe for unrestricted
/// concurrent use.
pub trait Baseline: Send + Sync + fmt::Debug {
    /// Density f(t) for t > 0.
    fn pdf(&self, t: f64) -> Result<f64, Error>;

    /// Distribution function F(t) for t >= 0.
    fn cdf(&self, t: f64) -> Result<f64, Error>;

    /// ln F(t); finite even where F underflows. Diagnostics only.
    fn log_cdf(&self, t: f64) -> Result<f64, Error>;

    /// Reverse hazard r(t) = f(t)/F(t) for t > 0.
    fn reverse_hazard(&self, t: f64) -> Result<f64, Error>;

    /// Log-density slope f'(t)/f(t) for t > 0.
    fn log_density_slope(&self, t: f64) -> Result<f64, Error>;

    /// r'(t), computed through the identity r' = r (f'/f - r).
    fn reverse_hazard_derivative(&self, t: f64) -> Result<f64, Error>;

    /// Canonical spec string, e.g. `gg:beta=0.8,alpha=0.5`. Used to decide
    /// whether two model components share a baseline and to label reports.
    fn fingerprint(&self) -> String;

    /// Downcast hook for generalized gamma specific annotations.
    fn as_generalized_gamma(&self) -> Option<&GeneralizedGamma> {
        None
    }
}

/// Generalized gamma distribution GG(beta, alpha) with both shapes positive.
#[derive(Clone, Debug)]
pub struct GeneralizedGamma {
    beta: f64,
    alpha: f64,
    /// alpha / beta, the shape of the underlying incomplete gamma.
    shape: f64,
    ln_gamma_shape: f64,
}

impl GeneralizedGamma {
    pub fn new(beta: f64, alpha: f64) -> Result<Self, Error> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                requirement: "a positive finite real",
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                requirement: "a positive finite real",
            });
        }
        let shape = alpha / beta;
        Ok(Self {
            beta,
            alpha,
            shape,
            ln_gamma_shape: ln_gamma(shape),
        })
    }

    /// Unit exponential: GG(1, 1).
    pub fn exponential() -> Self {
        Self::new(1.0, 1.0).expect("unit exponential parameters are valid")
    }

    /// Weibull with the given shape: GG(a, a).
    pub fn weibull(shape: f64) -> Result<Self, Error> {
        Self::new(shape, shape)
    }

    /// Gamma with the given shape: GG(1, a).
    pub fn gamma(shape: f64) -> Result<Self, Error> {
        Self::new(1.0, shape)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// eta(t) = -t r'(t)/r(t) through the closed form
    /// 1 - alpha + beta t^beta + t r(t), an independent route used to
    /// regression-test the generic r'/r evaluation.
    pub fn eta_closed_form(&self, t: f64) -> Result<f64, Error> {
        let r = self.reverse_hazard(t)?;
        Ok(1.0 - self.alpha + self.beta * t.powf(self.beta) + t * r)
    }

    fn check_positive(&self, what: &'static str, t: f64) -> Result<(), Error> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                requirement: "t > 0",
                t,
            })
        }
    }

    fn ln_pdf(&self, t: f64) -> f64 {
        self.beta.ln() - self.ln_gamma_shape + (self.alpha - 1.0) * t.ln() - t.powf(self.beta)
    }

    /// ln of the small-t leading term of F.
    fn ln_cdf_leading(&self, t: f64) -> f64 {
        self.beta.ln() + self.alpha * t.ln() - self.alpha.ln() - self.ln_gamma_shape
    }
}

impl Baseline for GeneralizedGamma {
    fn pdf(&self, t: f64) -> Result<f64, Error> {
        self.check_positive("pdf", t)?;
        Ok(self.ln_pdf(t).exp())
    }

    fn cdf(&self, t: f64) -> Result<f64, Error> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "cdf",
                requirement: "t >= 0",
                t,
            });
        }
        if t < T_MIN_GUARD {
            return Ok(self.ln_cdf_leading(t).exp());
        }
        Ok(reg_lower_gamma(self.shape, t.powf(self.beta)))
    }

    fn log_cdf(&self, t: f64) -> Result<f64, Error> {
        if t == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "log_cdf",
                requirement: "t >= 0",
                t,
            });
        }
        if t < T_MIN_GUARD {
            return Ok(self.ln_cdf_leading(t));
        }
        Ok(ln_reg_lower_gamma(self.shape, t.powf(self.beta)))
    }

    fn reverse_hazard(&self, t: f64) -> Result<f64, Error> {
        self.check_positive("reverse_hazard", t)?;
        if t < T_MIN_GUARD {
            return Ok(self.alpha / t);
        }
        let cdf = reg_lower_gamma(self.shape, t.powf(self.beta));
        if cdf == 0.0 {
            // F underflowed even though t cleared the guard; the asymptote
            // is the only meaningful value left.
            return Ok(self.alpha / t);
        }
        Ok(self.ln_pdf(t).exp() / cdf)
    }

    fn log_density_slope(&self, t: f64) -> Result<f64, Error> {
        self.check_positive("log_density_slope", t)?;
        Ok((self.alpha - 1.0) / t - self.beta * t.powf(self.beta - 1.0))
    }

    fn reverse_hazard_derivative(&self, t: f64) -> Result<f64, Error> {
        let r = self.reverse_hazard(t)?;
        let slope = self.log_density_slope(t)?;
        Ok(r * (slope - r))
    }

    fn fingerprint(&self) -> String {
        format!("gg:beta={},alpha={}", self.beta, self.alpha)
    }

    fn as_generalized_gamma(&self) -> Option<&GeneralizedGamma> {
        Some(self)
    }
}

impl FromStr for GeneralizedGamma {
    type Err = Error;

    /// Accepted forms: `exp`, `weibull:shape=<v>`, `gamma:shape=<v>`,
    /// `gg:beta=<v>,alpha=<v>`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let trimmed = s.trim();
        match trimmed {
            "exp" | "exponential" => return Ok(Self::exponential()),
            _ => {}
        }
        let (family, rest) = match trimmed.find(':') {
            Some(idx) => (&trimmed[..idx], &trimmed[idx + 1..]),
            None => {
                return Err(Error::parse(
                    s,
                    0,
                    "expected `exp`, `weibull:shape=<v>`, `gamma:shape=<v>`, or `gg:beta=<v>,alpha=<v>`",
                ))
            }
        };
        let fields = parse_key_values(s, rest, trimmed.len() - rest.len())?;
        let lookup = |key: &str| -> Result<f64, Error> {
            fields
                .iter()
                .find(|(k, _, _)| k == key)
                .map(|(_, v, _)| *v)
                .ok_or_else(|| Error::parse(s, 0, format!("missing field `{key}`")))
        };
        match family {
            "weibull" => Self::weibull(lookup("shape")?),
            "gamma" => Self::gamma(lookup("shape")?),
            "gg" => Self::new(lookup("beta")?, lookup("alpha")?),
            other => Err(Error::parse(s, 0, format!("unknown family `{other}`"))),
        }
    }
}

/// Parses `k=v,k=v` returning (key, value, offset-of-key) triples.
pub(crate) fn parse_key_values(
    original: &str,
    body: &str,
    base_offset: usize,
) -> Result<Vec<(String, f64, usize)>, Error> {
    let mut out = Vec::new();
    let mut offset = base_offset;
    for piece in body.split(',') {
        let eq = piece.find('=').ok_or_else(|| {
            Error::parse(original, offset, format!("expected `key=value`, got `{piece}`"))
        })?;
        let key = piece[..eq].trim();
        let value_str = piece[eq + 1..].trim();
        let value: f64 = value_str.parse().map_err(|_| {
            Error::parse(
                original,
                offset + eq + 1,
                format!("`{value_str}` is not a number"),
            )
        })?;
        out.push((key.to_string(), value, offset));
        offset += piece.len() + 1;
    }
    Ok(out)
}

/// Parses a baseline spec string into a shared handle.
pub fn parse_baseline(spec: &str) -> Result<BaselineRef, Error> {
    Ok(Arc::new(GeneralizedGamma::from_str(spec)?))
}

/// The three scalar functions whose monotonicity gates every comparison
/// rule: psi(t) = t r(t), eta(t) = -t r'(t)/r(t), chi(t) = t^2 r'(t).
pub struct ConditionFunctions<'a> {
    baseline: &'a dyn Baseline,
}

/// Builds the condition-function view of a baseline.
pub fn condition_functions(baseline: &dyn Baseline) -> ConditionFunctions<'_> {
    ConditionFunctions { baseline }
}

impl ConditionFunctions<'_> {
    /// psi(t) = t r(t). Nonnegative; for GG it tends to alpha as t -> 0+
    /// and to 0 as t -> inf.
    pub fn psi(&self, t: f64) -> Result<f64, Error> {
        Ok(t * self.baseline.reverse_hazard(t)?)
    }

    /// eta(t) = -t r'(t)/r(t), evaluated through the trait identity
    /// r'(t)/r(t) = f'(t)/f(t) - r(t). The quotient form turns 0/0 where r
    /// underflows deep in the right tail; this form stays finite there.
    pub fn eta(&self, t: f64) -> Result<f64, Error> {
        let r = self.baseline.reverse_hazard(t)?;
        let slope = self.baseline.log_density_slope(t)?;
        Ok(-t * (slope - r))
    }

    /// chi(t) = t^2 r'(t).
    pub fn chi(&self, t: f64) -> Result<f64, Error> {
        Ok(t * t * self.baseline.reverse_hazard_derivative(t)?)
    }
}
