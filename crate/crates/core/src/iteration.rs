//! s-iterated tails.
//!
//! `T̄_{X,1}` is the survival function and
//! `T̄_{X,s}(x) = (1/μ̃_{X,s-1}) ∫_x^∞ T̄_{X,s-1}(t) dt`, equivalently
//! `T̄_{X,s}(x) = E(X - x)_+^{s-1} / E X^{s-1}`, with `μ̃_{X,s} = E X^s / (s E X^{s-1})`.
//! Every iterated tail equals 1 on the negative half-line.

use statrs::function::gamma::gamma_ur;

use crate::distributions::{bisect_decreasing, DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;

/// Ratio of largest binomial term to result above which the incomplete-gamma
/// expansion is abandoned for quadrature.
const CANCELLATION_LIMIT: f64 = 1e5;

#[derive(Debug, Clone)]
pub enum Representation {
    /// Exponential-polynomial tails for orders `1..=s`.
    ExpPoly(Vec<ExpPoly>),
    /// `T̄_k(x) = e^{-x} (k(k+1) + 2kx + x² + c) / (k(k+1) + c)`.
    PolyExp { c: f64 },
    /// Piecewise closed forms, orders 1 and 2.
    BranchedPareto { c1: f64, c2: f64 },
    /// Binomial expansion of `E(X-x)_+^{k-1}` in regularized incomplete gamma
    /// functions (Gamma and Weibull), with quadrature where it cancels.
    IncompleteGamma,
    /// `∫_x^∞ f(t) (t - x)^{k-1} dt / E X^{k-1}`.
    Quadrature,
}

/// The s-iterated tail of a distribution together with its normalization
/// chain.
#[derive(Debug, Clone)]
pub struct IteratedTail {
    base: DistributionSpec,
    order: u32,
    repr: Representation,
    /// `E X^0, ..., E X^{s-1}`.
    moments: Vec<f64>,
    /// `μ̃_0 = 1, μ̃_1, ..., μ̃_{s-1}`.
    normalizers: Vec<f64>,
}

/// Builds the s-iterated tail of `d`. Requires `E X^{s-1} < ∞`.
pub fn iterate(d: &DistributionSpec, s: u32) -> Result<IteratedTail> {
    IteratedTail::new(d, s)
}

/// `μ̃_{X,s} = E X^s / (s E X^{s-1})`.
pub fn iterated_moment(d: &DistributionSpec, s: u32) -> Result<f64> {
    if s == 0 {
        return Err(Error::param("s", 0.0, "must be >= 1"));
    }
    Ok(d.raw_moment(s)? / (s as f64 * d.raw_moment(s - 1)?))
}

/// `E(X - x)_+^k = ∫_x^∞ f(t) (t - x)^k dt`, by quadrature.
pub fn residual_partial_moment(d: &DistributionSpec, k: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::param("x", x, "must be >= 0"));
    }
    d.raw_moment(k)?;
    Ok(d.partial_moment_quadrature(k, x))
}

impl IteratedTail {
    pub fn new(d: &DistributionSpec, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::param("s", 0.0, "iteration order must be >= 1"));
        }
        let mut moments = Vec::with_capacity(s as usize);
        for k in 0..s {
            moments.push(d.raw_moment(k)?);
        }
        let mut normalizers = vec![1.0];
        for k in 1..s {
            normalizers.push(moments[k as usize] / (k as f64 * moments[k as usize - 1]));
        }
        let repr = match d.family() {
            Family::Exponential { .. } | Family::MaxExp { .. } | Family::ExpPolyTail { .. } => {
                let tail = d.as_exppoly().expect("exponential-polynomial family");
                let mut tails = Vec::with_capacity(s as usize);
                for k in 1..=s {
                    let weighted: Vec<(f64, f64)> = tail
                        .terms()
                        .iter()
                        .map(|t| (t.coef / t.rate.powi(k as i32 - 1), t.rate))
                        .collect();
                    let total: f64 = crate::exppoly::neumaier(weighted.iter().map(|w| w.0));
                    tails.push(ExpPoly::new(weighted.into_iter().map(|(c, r)| (c / total, r)))?);
                }
                Representation::ExpPoly(tails)
            }
            Family::PolyExpExample { c } => Representation::PolyExp { c: *c },
            Family::BranchedPareto { c1, c2 } => Representation::BranchedPareto { c1: *c1, c2: *c2 },
            Family::Gamma { .. } | Family::Weibull { .. } => Representation::IncompleteGamma,
            Family::NumericDensity(_) => Representation::Quadrature,
        };
        let it = Self {
            base: d.clone(),
            order: s,
            repr,
            moments,
            normalizers,
        };
        if let Representation::BranchedPareto { c1, .. } = it.repr {
            it.cross_check(&[0.5 * c1, c1, 2.0 * c1, 5.0 * c1], 1e-7)?;
        }
        Ok(it)
    }

    /// Compares the closed form with direct quadrature at `xs`.
    fn cross_check(&self, xs: &[f64], tol: f64) -> Result<()> {
        for k in 2..=self.order {
            for &x in xs {
                let closed = self.eval_order(k, x);
                let quad = self.quadrature_tail(k, x);
                if (closed - quad).abs() > tol {
                    return Err(Error::Disagreement(format!(
                        "order-{k} tail of {} at x = {x}: closed form {closed}, quadrature {quad}",
                        self.base
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// `μ̃_{X,k}` for `k < s` (`μ̃_0 = 1`).
    pub fn normalizer(&self, k: u32) -> f64 {
        self.normalizers[k as usize]
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    /// `E X^k` for `k < s`.
    pub fn moment(&self, k: u32) -> f64 {
        self.moments[k as usize]
    }

    /// The order-s tail as an exponential polynomial, when it is one.
    pub fn as_exppoly(&self) -> Option<&ExpPoly> {
        self.exppoly_order(self.order)
    }

    /// The order-k tail (`1 <= k <= s`) as an exponential polynomial.
    pub fn exppoly_order(&self, k: u32) -> Option<&ExpPoly> {
        match &self.repr {
            Representation::ExpPoly(tails) if k >= 1 => tails.get(k as usize - 1),
            _ => None,
        }
    }

    /// `T̄_{X,s}(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_order(self.order, x)
    }

    /// `T̄_{X,k}(x)` for `1 <= k <= s`; `k = 0` gives the density.
    pub fn eval_order(&self, k: u32, x: f64) -> f64 {
        assert!(k <= self.order, "order {k} exceeds iteration order {}", self.order);
        if k == 0 {
            return self.base.density(x);
        }
        if x <= 0.0 {
            return 1.0;
        }
        if k == 1 {
            return self.base.tail(x);
        }
        match &self.repr {
            Representation::ExpPoly(tails) => tails[k as usize - 1].eval(x).clamp(0.0, 1.0),
            Representation::PolyExp { c } => {
                let kk = (k * (k + 1)) as f64;
                (-x).exp() * (kk + 2.0 * k as f64 * x + x * x + c) / (kk + c)
            }
            Representation::BranchedPareto { c1, c2 } => {
                debug_assert_eq!(k, 2);
                let (c1, c2) = (*c1, *c2);
                if x < c1 {
                    4.0 / (3.0 * c1 + c2) * (c1 * c1 / (x + c1) + (c2 - c1) / 4.0)
                } else {
                    (c1 + c2).powi(2) / ((3.0 * c1 + c2) * (x + c2))
                }
            }
            Representation::IncompleteGamma => self
                .incomplete_gamma_tail(k, x)
                .unwrap_or_else(|| self.quadrature_tail(k, x)),
            Representation::Quadrature => self.quadrature_tail(k, x),
        }
    }

    /// `T̄_{X,k}` by direct quadrature of the partial moment.
    pub fn quadrature_tail(&self, k: u32, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (self.base.partial_moment_quadrature(k - 1, x) / self.moments[k as usize - 1]).clamp(0.0, 1.0)
    }

    /// `Σ_i C(k-1,i) (-x)^{k-1-i} E[X^i; X > x] / E X^{k-1}`, or `None` when
    /// the alternating sum loses too many digits.
    fn incomplete_gamma_tail(&self, k: u32, x: f64) -> Option<f64> {
        let n = k - 1;
        let mut terms = Vec::with_capacity(n as usize + 1);
        let mut binom = 1.0;
        for i in 0..=n {
            if i > 0 {
                binom = binom * (n - i + 1) as f64 / i as f64;
            }
            let truncated = match self.base.family() {
                Family::Gamma { shape, scale } => {
                    let rising: f64 = (0..i).map(|j| shape + j as f64).product();
                    scale.powi(i as i32) * rising * gamma_ur(shape + i as f64, x / scale)
                }
                Family::Weibull { shape, scale } => {
                    let a = 1.0 + i as f64 / shape;
                    scale.powi(i as i32) * statrs::function::gamma::gamma(a) * gamma_ur(a, (x / scale).powf(*shape))
                }
                _ => return None,
            };
            terms.push(binom * (-x).powi((n - i) as i32) * truncated);
        }
        let sum = crate::exppoly::neumaier(terms.iter().copied());
        let largest = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if !(sum > 0.0) || largest > CANCELLATION_LIMIT * sum {
            return None;
        }
        Some((sum / self.moments[n as usize]).clamp(0.0, 1.0))
    }

    /// Distribution function of the s-th iterate.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.order == 1 {
            return self.base.cdf(x);
        }
        1.0 - self.eval(x)
    }

    /// `x` with `T̄_{X,s}(x) = p`, by bisection.
    pub fn inverse(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("p", p, "must lie in (0, 1]"));
        }
        if p == 1.0 {
            return Ok(0.0);
        }
        if self.order == 1 {
            return self.base.tail_inverse(p);
        }
        Ok(bisect_decreasing(|x| self.eval(x), p, self.base.length_scale().max(1e-3)))
    }

    /// Iterated failure rate `r_{X,s}(x) = T̄_{X,s-1}(x) / (μ̃_{X,s-1} T̄_{X,s}(x))`.
    pub fn failure_rate(&self, x: f64) -> Result<f64> {
        let s = self.order;
        let x = x.max(0.0);
        if let Some(tails) = match &self.repr {
            Representation::ExpPoly(t) => Some(t),
            _ => None,
        } {
            // Ratio of scaled values avoids underflow far in the tail.
            let num = if s == 1 {
                tails[0].differentiate(1).scale(-1.0)?
            } else {
                tails[s as usize - 2].clone()
            };
            let (n, _) = num.eval_scaled(x);
            let (d, _) = tails[s as usize - 1].eval_scaled(x);
            let shift = (num.min_rate() - tails[s as usize - 1].min_rate()) * x;
            if d <= 0.0 {
                return Err(Error::TailUnderflow { x });
            }
            return Ok(n / d * (-shift).exp() / self.normalizers[s as usize - 1]);
        }
        let den = self.eval(x);
        if !(den > 0.0) {
            return Err(Error::TailUnderflow { x });
        }
        Ok(self.eval_order(s - 1, x) / (self.normalizers[s as usize - 1] * den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_semi_infinite, QuadOptions};

    fn d(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn exponential_fixed_point() {
        let e = d("exp(1)");
        for s in 1..=6 {
            let it = iterate(&e, s).unwrap();
            assert_eq!(it.as_exppoly().unwrap(), &ExpPoly::single(1.0, 1.0).unwrap());
            for i in 0..200 {
                let x = i as f64 * 0.15;
                assert!((it.eval(x) - (-x).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_exp_second_iterate() {
        let it = iterate(&d("maxexp(1,2)"), 2).unwrap();
        let c = 1.0 + 0.5 - 1.0 / 3.0;
        let expected = ExpPoly::new([(1.0 / c, 1.0), (0.5 / c, 2.0), (-1.0 / (3.0 * c), 3.0)]).unwrap();
        for (a, b) in it.as_exppoly().unwrap().terms().iter().zip(expected.terms()) {
            assert!((a.coef - b.coef).abs() < 1e-15 && a.rate == b.rate);
        }
    }

    #[test]
    fn gamma_second_iterate() {
        let it = iterate(&d("gamma(2,1)"), 2).unwrap();
        assert!((it.eval(1.0) - 1.5 * (-1.0f64).exp()).abs() < 1e-13);
        assert!((it.quadrature_tail(2, 1.0) - 1.5 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn branched_pareto_closed_form_is_continuous() {
        let it = iterate(&d("bpareto(5,10)"), 2).unwrap();
        assert!((it.eval(5.0) - 0.6).abs() < 1e-15);
        assert!((it.eval(5.0 - 1e-12) - 0.6).abs() < 1e-12);
        assert!(matches!(iterate(&d("bpareto(5,10)"), 3), Err(Error::InfiniteMoment { .. })));
    }

    #[test]
    fn poly_exp_closed_form_matches_quadrature() {
        for s in 2..=4 {
            let it = iterate(&d("polyexp(1)"), s).unwrap();
            for x in [0.1, 1.0, 3.0, 10.0] {
                let q = it.quadrature_tail(s, x);
                assert!((it.eval(x) - q).abs() < 1e-12, "s={s} x={x}");
            }
        }
    }

    #[test]
    fn iterated_moment_examples() {
        for s in 1..=5 {
            assert!((iterated_moment(&d("exp(1)"), s).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((iterated_moment(&d("gamma(2,1)"), 2).unwrap() - 1.5).abs() < 1e-15);
        let w = iterated_moment(&d("weibull(2,1)"), 1).unwrap();
        assert!((w - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn residual_partial_moment_examples() {
        let r = residual_partial_moment(&d("exp(1)"), 1, 2.0).unwrap();
        assert!((r - (-2.0f64).exp()).abs() < 1e-13);
        assert!((residual_partial_moment(&d("gamma(3,1)"), 0, 0.0).unwrap() - 1.0).abs() < 1e-13);
        let g = residual_partial_moment(&d("gamma(2,1)"), 1, 1.0).unwrap();
        assert!((g - 3.0 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn recursion_consistency() {
        for name in ["maxexp(1,2)", "polyexp(1)", "gamma(2.5,1.3)", "weibull(1.7,0.8)"] {
            let dist = d(name);
            for s in 2..=4 {
                let it = iterate(&dist, s).unwrap();
                for x in [0.2, 1.0, 2.5] {
                    let integral = integrate_semi_infinite(
                        |t| it.eval_order(s - 1, t),
                        x,
                        1.0,
                        &[],
                        &QuadOptions::default(),
                    )
                    .value;
                    let rhs = integral / it.normalizer(s - 1);
                    assert!((it.eval(x) - rhs).abs() < 1e-8, "{name} s={s} x={x}");
                }
            }
        }
    }

    #[test]
    fn incomplete_gamma_falls_back_far_out() {
        let it = iterate(&d("gamma(2,1)"), 4).unwrap();
        for x in [0.5, 5.0, 40.0] {
            let q = it.quadrature_tail(4, x);
            assert!(((it.eval(x) - q) / q).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn failure_rates() {
        let e = iterate(&d("exp(2)"), 3).unwrap();
        assert!((e.failure_rate(7.0).unwrap() - 2.0).abs() < 1e-12);
        let p1 = iterate(&d("polyexp(1)"), 1).unwrap();
        assert!((p1.failure_rate(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        // r_2 = -(ln T̄_2)' = (x² + 2x + 2 + c) / (x² + 4x + 6 + c).
        let p2 = iterate(&d("polyexp(1)"), 2).unwrap();
        for x in [0.0, 0.7, 4.0] {
            let expected = (x * x + 2.0 * x + 3.0) / (x * x + 4.0 * x + 7.0);
            assert!((p2.failure_rate(x).unwrap() - expected).abs() < 1e-14);
        }
        // Far tail of a max of exponentials stays finite.
        let m = iterate(&d("maxexp(1,2)"), 2).unwrap();
        assert!((m.failure_rate(800.0).unwrap() - 1.0).abs() < 1e-12);
    }
}
