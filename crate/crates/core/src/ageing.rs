//! Iterated failure rates and the s-IFR / s-IFRA ageing classes.
//!
//! With `r_{X,s} = -(ln T̄_{X,s})'` the identity `(ln r_{X,s})' = r_{X,s} - r_{X,s-1}`
//! gives the sign of `r'_{X,s}` without numerical differentiation; here
//! `r_{X,0} = -(ln f_X)'`. For the running average
//! `A(x) = (1/x)∫_0^x r_{X,s} = -ln T̄_{X,s}(x) / x` one has
//! `A'(x) = (r_{X,s}(x) - A(x)) / x`.

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::iteration::{iterate, residual_partial_moment, IteratedTail};
use crate::signscan::{scan, Confidence, ScanConfig, Sign, SignPattern};

/// Relative spread of `r` below which a rate counts as constant.
pub const CONSTANT_RATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MonotoneVerdict {
    Increasing,
    Decreasing,
    Constant,
    /// Abscissae with the local direction of the function there, in order.
    NonMonotone { turning_witnesses: Vec<(f64, Direction)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneClass {
    #[serde(flatten)]
    pub verdict: MonotoneVerdict,
    pub order: u32,
    pub confidence: Confidence,
}

impl MonotoneClass {
    pub fn is_increasing(&self) -> bool {
        self.verdict == MonotoneVerdict::Increasing
    }

    pub fn is_decreasing(&self) -> bool {
        self.verdict == MonotoneVerdict::Decreasing
    }

    /// Short label: `increasing`, `decreasing`, `constant` or `non-monotone`.
    pub fn label(&self) -> &'static str {
        match self.verdict {
            MonotoneVerdict::Increasing => "increasing",
            MonotoneVerdict::Decreasing => "decreasing",
            MonotoneVerdict::Constant => "constant",
            MonotoneVerdict::NonMonotone { .. } => "non-monotone",
        }
    }

    fn from_slope_pattern(p: &SignPattern, order: u32) -> Self {
        let verdict = match p.signs.as_slice() {
            [] => MonotoneVerdict::Constant,
            [Sign::Plus] => MonotoneVerdict::Increasing,
            [Sign::Minus] => MonotoneVerdict::Decreasing,
            _ => MonotoneVerdict::NonMonotone {
                turning_witnesses: p
                    .signs
                    .iter()
                    .zip(&p.witnesses)
                    .map(|(s, &x)| {
                        (
                            x,
                            match s {
                                Sign::Plus => Direction::Up,
                                Sign::Minus => Direction::Down,
                            },
                        )
                    })
                    .collect(),
            },
        };
        Self {
            verdict,
            order,
            confidence: p.confidence,
        }
    }
}

/// Scan window suited to `d`: tail mass 1e-10 for general families, the
/// decay of the slowest exponential otherwise.
pub fn window_for(d: &DistributionSpec) -> ScanConfig {
    match d.as_exppoly() {
        Some(p) => ScanConfig::for_min_rate(p.min_rate()),
        None => ScanConfig::with_x_max(d.horizon(1e-10).clamp(1.0, 1e6)),
    }
}

/// `r_{X,s}(x)`.
pub fn failure_rate(d: &DistributionSpec, s: u32, x: f64) -> Result<f64> {
    iterate(d, s)?.failure_rate(x)
}

/// `-(ln f)'(x)`, the order-0 rate.
fn density_rate(d: &DistributionSpec, x: f64) -> f64 {
    match d.family() {
        Family::Gamma { shape, scale } => 1.0 / scale - (shape - 1.0) / x,
        Family::Weibull { shape, scale } => {
            shape / scale * (x / scale).powf(shape - 1.0) - (shape - 1.0) / x
        }
        Family::BranchedPareto { c1, c2 } => {
            if x < *c1 {
                3.0 / (x + c1)
            } else {
                3.0 / (x + c2)
            }
        }
        Family::PolyExpExample { c } => 1.0 - 2.0 * x / (x * x + c),
        Family::Exponential { rate } => *rate,
        _ => {
            let h = (1e-6 * x).max(1e-8);
            let lo = (x - h).max(0.0);
            let hi = x + h;
            -(d.log_density(hi) - d.log_density(lo)) / (hi - lo)
        }
    }
}

/// `r_{X,k}(x)` for `0 <= k <= s` from one iterated tail.
fn rate_of_order(it: &IteratedTail, k: u32, x: f64) -> f64 {
    if k == 0 {
        return density_rate(it.base(), x);
    }
    let den = it.eval_order(k, x);
    it.eval_order(k - 1, x) / (it.normalizer(k - 1) * den)
}

/// Numerator of `r'_{X,s}` for exponential-polynomial tails:
/// with `r = A / (μ̃ B)`, `sign r' = sign(A'B - AB')`.
fn exact_slope_numerator(it: &IteratedTail) -> Option<Result<ExpPoly>> {
    let s = it.order();
    let b = it.exppoly_order(s)?;
    let a = if s == 1 {
        match b.differentiate(1).scale(-1.0) {
            Ok(a) => a,
            Err(e) => return Some(Err(e)),
        }
    } else {
        it.exppoly_order(s - 1)?.clone()
    };
    let left = a.differentiate(1).mul(b);
    let right = a.mul(&b.differentiate(1));
    Some(match (left, right) {
        (Ok(l), Ok(r)) => l.sub(&r),
        (Err(e), _) | (_, Err(e)) => Err(e),
    })
}

/// Spread check: `true` when `r` is constant to [`CONSTANT_RATE_TOL`] on the
/// grid.
fn rate_is_constant(it: &IteratedTail, cfg: &ScanConfig, breakpoints: &[f64]) -> Result<bool> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in cfg.grid(breakpoints) {
        let r = match it.failure_rate(x) {
            Ok(r) => r,
            Err(Error::TailUnderflow { .. }) => break,
            Err(e) => return Err(e),
        };
        if !r.is_finite() {
            return Ok(false);
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(hi.is_finite() && lo > 0.0 && (hi - lo) <= CONSTANT_RATE_TOL * hi)
}

/// Classifies `r_{X,s}` as increasing (s-IFR), decreasing (s-DFR), constant
/// or neither.
pub fn classify_ifr(d: &DistributionSpec, s: u32, cfg: &ScanConfig) -> Result<MonotoneClass> {
    let it = iterate(d, s)?;
    classify_ifr_tail(&it, cfg)
}

pub fn classify_ifr_tail(it: &IteratedTail, cfg: &ScanConfig) -> Result<MonotoneClass> {
    let s = it.order();
    if let Some(num) = exact_slope_numerator(it) {
        return match num {
            Err(Error::ZeroPolynomial) => Ok(MonotoneClass {
                verdict: MonotoneVerdict::Constant,
                order: s,
                confidence: Confidence::Exact,
            }),
            Err(e) => Err(e),
            Ok(n) => Ok(MonotoneClass::from_slope_pattern(&n.sign_pattern_exact(0.0)?, s)),
        };
    }
    let bps = it.base().breakpoints();
    if rate_is_constant(it, cfg, &bps)? {
        return Ok(MonotoneClass {
            verdict: MonotoneVerdict::Constant,
            order: s,
            confidence: Confidence::Sampled,
        });
    }
    let slope = |x: f64| {
        let rs = rate_of_order(it, s, x);
        let prev = rate_of_order(it, s - 1, x);
        let v = rs - prev;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    match scan(slope, cfg, &bps, None) {
        Ok(p) => Ok(MonotoneClass::from_slope_pattern(&p, s)),
        Err(Error::IndeterminateFunction) => Ok(MonotoneClass {
            verdict: MonotoneVerdict::Constant,
            order: s,
            confidence: Confidence::Sampled,
        }),
        Err(e) => Err(e),
    }
}

/// Classifies the running average `(1/x)∫_0^x r_{X,s}` (s-IFRA / s-DFRA).
pub fn classify_ifra(d: &DistributionSpec, s: u32, cfg: &ScanConfig) -> Result<MonotoneClass> {
    let it = iterate(d, s)?;
    classify_ifra_tail(&it, cfg)
}

pub fn classify_ifra_tail(it: &IteratedTail, cfg: &ScanConfig) -> Result<MonotoneClass> {
    let s = it.order();
    let bps = it.base().breakpoints();
    if it.exppoly_order(s).is_none() && rate_is_constant(it, cfg, &bps)? {
        return Ok(MonotoneClass {
            verdict: MonotoneVerdict::Constant,
            order: s,
            confidence: Confidence::Sampled,
        });
    }
    if let Some(p) = it.exppoly_order(s) {
        if p.len() == 1 {
            return Ok(MonotoneClass {
                verdict: MonotoneVerdict::Constant,
                order: s,
                confidence: Confidence::Exact,
            });
        }
    }
    let slope = |x: f64| {
        let rate = match it.failure_rate(x) {
            Ok(r) => r,
            Err(_) => return 0.0,
        };
        let average = -log_tail(it, x) / x;
        let v = rate - average;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    match scan(slope, cfg, &bps, None) {
        Ok(p) => Ok(MonotoneClass::from_slope_pattern(&p, s)),
        Err(Error::IndeterminateFunction) => Ok(MonotoneClass {
            verdict: MonotoneVerdict::Constant,
            order: s,
            confidence: Confidence::Sampled,
        }),
        Err(e) => Err(e),
    }
}

/// `ln T̄_{X,s}(x)` without underflow for exponential-polynomial tails.
fn log_tail(it: &IteratedTail, x: f64) -> f64 {
    if let Some(p) = it.as_exppoly() {
        let (scaled, _) = p.eval_scaled(x);
        return scaled.ln() - p.min_rate() * x;
    }
    if it.order() == 1 {
        return it.base().log_tail(x);
    }
    it.eval(x).ln()
}

/// Numerator of `Q(0)` for a two-component parallel system with rate ratio
/// `λ`: `λ^{s+1} + 1 - (λ-1)² (1+λ)^{s-1}`, returned as its sign.
pub fn dfr_onset_q0_sign(lambda: f64, s: u32) -> Sign {
    // Compared in logarithms so large s does not overflow.
    let l1 = (s as f64 + 1.0) * lambda.ln() + (-(s as f64 + 1.0) * lambda.ln()).exp().ln_1p();
    let l2 = 2.0 * (lambda - 1.0).abs().ln() + (s as f64 - 1.0) * (1.0 + lambda).ln();
    Sign::of(l1 - l2)
}

/// Smallest `s <= s_max` from which a two-component parallel system of
/// exponentials is s-DFR, located by the sign of `Q(0)` and confirmed by
/// [`classify_ifr`].
pub fn dfr_onset(d: &DistributionSpec, s_max: u32) -> Result<Option<u32>> {
    let rates = match d.family() {
        Family::MaxExp { rates } if rates.len() == 2 => rates.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "dfr_onset needs a two-component maxexp distribution".into(),
            ))
        }
    };
    if !(1..=64).contains(&s_max) {
        return Err(Error::param("s_max", s_max as f64, "must lie in 1..=64"));
    }
    let lambda = rates[1] / rates[0];
    if (lambda - 1.0).abs() <= 1e-12 {
        return Err(Error::param("lambda", lambda, "component rates must differ"));
    }
    let Some(s0) = (1..=s_max).find(|&s| dfr_onset_q0_sign(lambda, s) == Sign::Minus) else {
        return Ok(None);
    };
    let class = classify_ifr(d, s0, &window_for(d))?;
    if !class.is_decreasing() {
        return Err(Error::Disagreement(format!(
            "Q(0) < 0 at s = {s0} but the order-{s0} failure rate is {}",
            class.label()
        )));
    }
    Ok(Some(s0))
}

/// Moment inequalities for `m_k = E(X - x)_+^k` at `k = s-3, s-2, s-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub s: u32,
    pub x: f64,
    /// `[m_{s-3}, m_{s-2}, m_{s-1}]`.
    pub moments: [f64; 3],
    /// `m_{s-2}² - (1 - 1/(s-1)) m_{s-3} m_{s-1}`, nonnegative under s-IFR.
    pub ifr_lower_margin: f64,
    /// `m_{s-3} m_{s-1} - m_{s-2}²`, nonnegative always (log-convexity).
    pub ifr_upper_margin: f64,
    /// `(1 - 1/(s-1)) m_{s-3} m_{s-1} - m_{s-2}²`, nonnegative under s-DFR.
    pub dfr_margin: f64,
    pub ifr_lower_holds: bool,
    pub ifr_upper_holds: bool,
    pub dfr_holds: bool,
}

/// Relative tolerance used to decide the inequalities in [`holder_bounds`].
pub const HOLDER_TOL: f64 = 1e-9;

pub fn holder_bounds(d: &DistributionSpec, s: u32, x: f64) -> Result<HolderReport> {
    if s <= 3 {
        return Err(Error::param("s", s as f64, "must be > 3"));
    }
    let m = [
        residual_partial_moment(d, s - 3, x)?,
        residual_partial_moment(d, s - 2, x)?,
        residual_partial_moment(d, s - 1, x)?,
    ];
    let factor = 1.0 - 1.0 / (s as f64 - 1.0);
    let outer = m[0] * m[2];
    let square = m[1] * m[1];
    let tol = HOLDER_TOL * outer.abs();
    let ifr_lower_margin = square - factor * outer;
    let ifr_upper_margin = outer - square;
    let dfr_margin = factor * outer - square;
    Ok(HolderReport {
        s,
        x,
        moments: m,
        ifr_lower_margin,
        ifr_upper_margin,
        dfr_margin,
        ifr_lower_holds: ifr_lower_margin >= -tol,
        ifr_upper_holds: ifr_upper_margin >= -tol,
        dfr_holds: dfr_margin >= -tol,
    })
}
