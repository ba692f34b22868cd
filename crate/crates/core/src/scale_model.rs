//! Parallel-system lifetime models built from a baseline and positive scale
//! parameters.
//!
//! Component i has lifetime distribution F_i(t) = F(lambda_i t). The system
//! lifetime is the largest order statistic, whose distribution function is
//! the product of the component distribution functions and whose reverse
//! hazard is the sum sum_i lambda_i r(lambda_i t).

use crate::baseline::BaselineRef;
use crate::error::Error;

/// When any component distribution function drops below this, the product
/// form is treated as zero and callers are pointed at the log-space route.
pub const CDF_UNDERFLOW_FLOOR: f64 = 1e-300;

/// One component: a baseline and its scale parameter.
#[derive(Clone, Debug)]
pub struct Component {
    pub baseline: BaselineRef,
    pub lambda: f64,
}

/// Lifetime of a parallel system of independent scaled components.
///
/// Components are stored in a canonical order (by scale, then baseline
/// fingerprint), so every evaluation is exactly invariant under permutations
/// of the input list.
#[derive(Clone, Debug)]
pub struct ScaleModel {
    components: Vec<Component>,
}

impl ScaleModel {
    /// Single shared baseline with one scale per component.
    pub fn new(baseline: BaselineRef, lambdas: &[f64]) -> Result<Self, Error> {
        let components = lambdas
            .iter()
            .map(|&lambda| Component {
                baseline: baseline.clone(),
                lambda,
            })
            .collect();
        Self::from_components(components)
    }

    /// Arbitrary per-component baselines.
    pub fn from_components(mut components: Vec<Component>) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::InvalidParameter {
                name: "components",
                value: 0.0,
                requirement: "at least one component",
            });
        }
        for c in &components {
            if !(c.lambda > 0.0) || !c.lambda.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    value: c.lambda,
                    requirement: "a positive finite real",
                });
            }
        }
        components.sort_by(|a, b| {
            a.lambda
                .partial_cmp(&b.lambda)
                .expect("scales are finite")
                .then_with(|| a.baseline.fingerprint().cmp(&b.baseline.fingerprint()))
        });
        Ok(Self { components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Scale parameters in canonical (increasing) order.
    pub fn lambdas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.lambda).collect()
    }

    /// Distinct baseline fingerprints, in component order without repeats.
    pub fn baseline_fingerprints(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.components {
            let fp = c.baseline.fingerprint();
            if !out.contains(&fp) {
                out.push(fp);
            }
        }
        out
    }

    /// True when every component shares one baseline.
    pub fn single_baseline(&self) -> Option<&BaselineRef> {
        let fp = self.components[0].baseline.fingerprint();
        if self
            .components
            .iter()
            .all(|c| c.baseline.fingerprint() == fp)
        {
            Some(&self.components[0].baseline)
        } else {
            None
        }
    }

    /// Human-readable description for reports: `fingerprint @ lambda` pairs.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| format!("{}@{}", c.baseline.fingerprint(), c.lambda))
            .collect();
        format!("max[{}]", parts.join(", "))
    }

    /// Distribution function of the system lifetime:
    /// prod_i F(lambda_i t). Returns 0 when any factor underflows.
    pub fn max_cdf(&self, t: f64) -> Result<f64, Error> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "max_cdf",
                requirement: "t >= 0",
                t,
            });
        }
        let mut product = 1.0;
        for c in &self.components {
            let factor = c.baseline.cdf(c.lambda * t)?;
            if factor < CDF_UNDERFLOW_FLOOR {
                return Ok(0.0);
            }
            product *= factor;
        }
        Ok(product)
    }

    /// ln of the system distribution function; stays finite where the
    /// product form underflows. Diagnostics only.
    pub fn max_log_cdf(&self, t: f64) -> Result<f64, Error> {
        if t == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "max_log_cdf",
                requirement: "t >= 0",
                t,
            });
        }
        let mut sum = 0.0;
        for c in &self.components {
            sum += c.baseline.log_cdf(c.lambda * t)?;
        }
        Ok(sum)
    }

    /// Reverse hazard of the system lifetime:
    /// sum_i lambda_i r(lambda_i t), t > 0.
    pub fn max_reverse_hazard(&self, t: f64) -> Result<f64, Error> {
        if !(t > 0.0) || !t.is_finite() {
            // r diverges like alpha/t at the origin, so t = 0 is a domain
            // error rather than a boundary value.
            return Err(Error::Domain {
                what: "max_reverse_hazard",
                requirement: "t > 0",
                t,
            });
        }
        let mut sum = 0.0;
        for c in &self.components {
            sum += c.lambda * c.baseline.reverse_hazard(c.lambda * t)?;
        }
        Ok(sum)
    }

    /// Density of the system lifetime via f = F_system * r_system.
    pub fn max_pdf(&self, t: f64) -> Result<f64, Error> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "max_pdf",
                requirement: "t > 0",
                t,
            });
        }
        let cdf = self.max_cdf(t)?;
        if cdf == 0.0 {
            return Ok(0.0);
        }
        Ok(cdf * self.max_reverse_hazard(t)?)
    }
}

/// Multiple-outlier model: p components at scale `lambda1` and q at `lambda`,
/// all sharing one baseline.
#[derive(Clone, Debug)]
pub struct OutlierModel {
    pub baseline: BaselineRef,
    pub lambda1: f64,
    pub p: usize,
    pub lambda: f64,
    pub q: usize,
}

impl OutlierModel {
    pub fn new(
        baseline: BaselineRef,
        lambda1: f64,
        p: usize,
        lambda: f64,
        q: usize,
    ) -> Result<Self, Error> {
        if p < 1 {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p as f64,
                requirement: "at least 1",
            });
        }
        if q < 1 {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q as f64,
                requirement: "at least 1",
            });
        }
        for (name, v) in [("lambda1", lambda1), ("lambda", lambda)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    requirement: "a positive finite real",
                });
            }
        }
        Ok(Self {
            baseline,
            lambda1,
            p,
            lambda,
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// The scale vector in block order: p copies of lambda1, then q of lambda.
    pub fn lambda_vector(&self) -> Vec<f64> {
        let mut v = vec![self.lambda1; self.p];
        v.extend(std::iter::repeat_n(self.lambda, self.q));
        v
    }

    /// Expands into the equivalent `ScaleModel`.
    pub fn expand(&self) -> ScaleModel {
        ScaleModel::new(self.baseline.clone(), &self.lambda_vector())
            .expect("outlier parameters were validated at construction")
    }

    /// Direct block form of the system reverse hazard:
    /// p lambda1 r(lambda1 t) + q lambda r(lambda t).
    pub fn max_reverse_hazard(&self, t: f64) -> Result<f64, Error> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "max_reverse_hazard",
                requirement: "t > 0",
                t,
            });
        }
        let a = self.p as f64 * self.lambda1 * self.baseline.reverse_hazard(self.lambda1 * t)?;
        let b = self.q as f64 * self.lambda * self.baseline.reverse_hazard(self.lambda * t)?;
        Ok(a + b)
    }
}

/// Outlier model with distinct baselines per block: p components follow
/// F(lambda1 t), q components follow G(lambda t).
#[derive(Clone, Debug)]
pub struct TwoBaselineModel {
    pub baseline_f: BaselineRef,
    pub baseline_g: BaselineRef,
    pub lambda1: f64,
    pub p: usize,
    pub lambda: f64,
    pub q: usize,
}

impl TwoBaselineModel {
    pub fn new(
        baseline_f: BaselineRef,
        baseline_g: BaselineRef,
        lambda1: f64,
        p: usize,
        lambda: f64,
        q: usize,
    ) -> Result<Self, Error> {
        // Reuse the outlier validation for the scalar fields.
        OutlierModel::new(baseline_f.clone(), lambda1, p, lambda, q)?;
        Ok(Self {
            baseline_f,
            baseline_g,
            lambda1,
            p,
            lambda,
            q,
        })
    }

    pub fn expand(&self) -> ScaleModel {
        let mut components = Vec::with_capacity(self.p + self.q);
        for _ in 0..self.p {
            components.push(Component {
                baseline: self.baseline_f.clone(),
                lambda: self.lambda1,
            });
        }
        for _ in 0..self.q {
            components.push(Component {
                baseline: self.baseline_g.clone(),
                lambda: self.lambda,
            });
        }
        ScaleModel::from_components(components)
            .expect("two-baseline parameters were validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{parse_baseline, GeneralizedGamma};
    use std::sync::Arc;

    fn exp_baseline() -> BaselineRef {
        Arc::new(GeneralizedGamma::exponential())
    }

    fn rel_err(got: f64, expected: f64) -> f64 {
        (got - expected).abs() / expected.abs().max(1e-300)
    }

    #[test]
    fn max_cdf_iid_exponential() {
        let m = ScaleModel::new(exp_baseline(), &[1.0, 1.0]).unwrap();
        let expected = (-(-1.0_f64).exp_m1()).powi(2);
        assert!(rel_err(m.max_cdf(1.0).unwrap(), expected) < 1e-13);
        // Matches the quoted decimal to print precision.
        assert!((m.max_cdf(1.0).unwrap() - 0.399576).abs() < 1e-5);
    }

    #[test]
    fn max_cdf_heterogeneous_product() {
        let m = ScaleModel::new(exp_baseline(), &[1.0, 2.0]).unwrap();
        let expected = (-(-1.0_f64).exp_m1()) * (-(-2.0_f64).exp_m1());
        assert!(rel_err(m.max_cdf(1.0).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn max_cdf_boundary_and_domain() {
        let m = ScaleModel::new(exp_baseline(), &[1.0, 3.0]).unwrap();
        assert_eq!(m.max_cdf(0.0).unwrap(), 0.0);
        assert!(matches!(m.max_cdf(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn max_reverse_hazard_values() {
        // Single component: lambda r(lambda t).
        let m1 = ScaleModel::new(exp_baseline(), &[2.5]).unwrap();
        let b = GeneralizedGamma::exponential();
        use crate::baseline::Baseline;
        let expected = 2.5 * b.reverse_hazard(2.5 * 0.7).unwrap();
        assert!(rel_err(m1.max_reverse_hazard(0.7).unwrap(), expected) < 1e-14);

        // Two iid exponentials at t = 1: 2 / (e - 1).
        let m2 = ScaleModel::new(exp_baseline(), &[1.0, 1.0]).unwrap();
        let expected = 2.0 / (std::f64::consts::E - 1.0);
        assert!(rel_err(m2.max_reverse_hazard(1.0).unwrap(), expected) < 1e-13);

        // Heterogeneous: 1/(e-1) + 2 e^{-2} / (1 - e^{-2}).
        let m3 = ScaleModel::new(exp_baseline(), &[1.0, 2.0]).unwrap();
        let expected = 1.0 / (std::f64::consts::E - 1.0)
            + 2.0 * (-2.0_f64).exp() / (-(-2.0_f64).exp_m1());
        assert!(rel_err(m3.max_reverse_hazard(1.0).unwrap(), expected) < 1e-13);
        assert!((m3.max_reverse_hazard(1.0).unwrap() - 0.895012).abs() < 1e-5);

        assert!(matches!(
            m3.max_reverse_hazard(0.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn max_pdf_values_and_normalization() {
        // n = 1 reduces to the baseline density.
        let m1 = ScaleModel::new(exp_baseline(), &[1.0]).unwrap();
        assert!(rel_err(m1.max_pdf(1.0).unwrap(), (-1.0_f64).exp()) < 1e-13);

        // iid pair: 2 (1 - e^{-1}) e^{-1}.
        let m2 = ScaleModel::new(exp_baseline(), &[1.0, 1.0]).unwrap();
        let expected = 2.0 * (-(-1.0_f64).exp_m1()) * (-1.0_f64).exp();
        assert!(rel_err(m2.max_pdf(1.0).unwrap(), expected) < 1e-13);

        // Density integrates to one (trapezoid on a fine log grid plus the
        // left tail, which the product form bounds by F(t_min)).
        let m3 = ScaleModel::new(exp_baseline(), &[1.0, 2.0]).unwrap();
        let grid = crate::grid::Grid::new(1e-6, 60.0, 40_000, crate::grid::Spacing::Log).unwrap();
        let ts = grid.values();
        let mut integral = m3.max_cdf(ts[0]).unwrap();
        for w in ts.windows(2) {
            let fa = m3.max_pdf(w[0]).unwrap();
            let fb = m3.max_pdf(w[1]).unwrap();
            integral += 0.5 * (fa + fb) * (w[1] - w[0]);
        }
        assert!(
            (integral - 1.0).abs() < 1e-4,
            "max density integrated to {integral}"
        );
    }

    #[test]
    fn permutation_invariance_is_exact() {
        let b = parse_baseline("gg:beta=0.8,alpha=0.5").unwrap();
        let a = ScaleModel::new(b.clone(), &[3.0, 1.0, 2.0]).unwrap();
        let c = ScaleModel::new(b, &[2.0, 3.0, 1.0]).unwrap();
        for &t in &[0.1, 0.77, 1.0, 5.0, 20.0] {
            assert_eq!(
                a.max_cdf(t).unwrap().to_bits(),
                c.max_cdf(t).unwrap().to_bits()
            );
            assert_eq!(
                a.max_reverse_hazard(t).unwrap().to_bits(),
                c.max_reverse_hazard(t).unwrap().to_bits()
            );
            assert_eq!(
                a.max_pdf(t).unwrap().to_bits(),
                c.max_pdf(t).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn reverse_hazard_additivity() {
        let b = exp_baseline();
        let left = ScaleModel::new(b.clone(), &[1.0, 2.0]).unwrap();
        let right = ScaleModel::new(b.clone(), &[0.5]).unwrap();
        let union = ScaleModel::new(b, &[1.0, 2.0, 0.5]).unwrap();
        for &t in &[0.2, 1.0, 3.0, 10.0] {
            let sum = left.max_reverse_hazard(t).unwrap() + right.max_reverse_hazard(t).unwrap();
            let whole = union.max_reverse_hazard(t).unwrap();
            assert!(rel_err(whole, sum) < 1e-12);
        }
    }

    #[test]
    fn cdf_monotone_in_lambda() {
        let b = exp_baseline();
        let small = ScaleModel::new(b.clone(), &[1.0, 2.0]).unwrap();
        let big = ScaleModel::new(b, &[1.5, 2.0]).unwrap();
        for &t in &[0.1, 1.0, 4.0] {
            assert!(big.max_cdf(t).unwrap() >= small.max_cdf(t).unwrap());
        }
    }

    #[test]
    fn common_scale_reduction() {
        let b = parse_baseline("weibull:shape=0.5").unwrap();
        let m = ScaleModel::new(b.clone(), &[1.7, 1.7, 1.7]).unwrap();
        for &t in &[0.3, 1.0, 6.0] {
            let f = b.cdf(1.7 * t).unwrap();
            assert!(rel_err(m.max_cdf(t).unwrap(), f.powi(3)) < 1e-13);
            let r = b.reverse_hazard(1.7 * t).unwrap();
            assert!(rel_err(m.max_reverse_hazard(t).unwrap(), 3.0 * 1.7 * r) < 1e-13);
        }
    }

    #[test]
    fn outlier_expansion() {
        let b = exp_baseline();
        let o = OutlierModel::new(b, 1.0, 2, 3.0, 1).unwrap();
        assert_eq!(o.lambda_vector(), vec![1.0, 1.0, 3.0]);
        let expanded = o.expand();
        assert_eq!(expanded.lambdas(), vec![1.0, 1.0, 3.0]);
        // Block form and expanded sum agree to machine precision.
        for &t in &[0.1, 1.0, 5.0] {
            let direct = o.max_reverse_hazard(t).unwrap();
            let via_model = expanded.max_reverse_hazard(t).unwrap();
            assert!(rel_err(direct, via_model) < 1e-14);
        }
    }

    #[test]
    fn outlier_p1_q1_matches_two_component_model() {
        let b = exp_baseline();
        let o = OutlierModel::new(b.clone(), 2.0, 1, 1.0, 1).unwrap();
        let m = ScaleModel::new(b, &[2.0, 1.0]).unwrap();
        for &t in &[0.5, 1.0, 2.0] {
            assert_eq!(
                o.expand().max_reverse_hazard(t).unwrap().to_bits(),
                m.max_reverse_hazard(t).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn outlier_validation() {
        let b = exp_baseline();
        assert!(OutlierModel::new(b.clone(), 1.0, 0, 1.0, 1).is_err());
        assert!(OutlierModel::new(b.clone(), 1.0, 1, 1.0, 0).is_err());
        assert!(OutlierModel::new(b.clone(), -1.0, 1, 1.0, 1).is_err());
        assert!(OutlierModel::new(b, 1.0, 1, 0.0, 1).is_err());
    }

    #[test]
    fn two_baseline_reverse_hazard_block_form() {
        let f = parse_baseline("weibull:shape=0.5").unwrap();
        let g = exp_baseline();
        let m = TwoBaselineModel::new(f.clone(), g.clone(), 2.0, 2, 1.0, 3)
            .unwrap()
            .expand();
        for &t in &[0.4, 1.0, 3.0] {
            let expected = 2.0 * 2.0 * f.reverse_hazard(2.0 * t).unwrap()
                + 3.0 * 1.0 * g.reverse_hazard(t).unwrap();
            assert!(rel_err(m.max_reverse_hazard(t).unwrap(), expected) < 1e-12);
        }
        assert_eq!(m.baseline_fingerprints().len(), 2);
        assert!(m.single_baseline().is_none());
    }

    #[test]
    fn empty_model_rejected() {
        assert!(ScaleModel::new(exp_baseline(), &[]).is_err());
    }

    #[test]
    fn underflow_policy_returns_zero() {
        // Deep in the left tail each component CDF drops below the floor,
        // so the product form collapses to zero while the log route stays
        // finite.
        let b = parse_baseline("gg:beta=2,alpha=2").unwrap();
        let m = ScaleModel::new(b, &[1.0, 1.0]).unwrap();
        let t = 1e-160;
        assert_eq!(m.max_cdf(t).unwrap(), 0.0);
        assert_eq!(m.max_pdf(t).unwrap(), 0.0);
        let log_cdf = m.max_log_cdf(t).unwrap();
        assert!(log_cdf.is_finite());
        assert!(log_cdf < -700.0);
    }
}
