//! Exponential polynomials `p(x) = Σ α_j e^{-λ_j x}`.
//!
//! Terms are stored with rates strictly increasing, so the exponents `-λ_j`
//! are strictly decreasing. This is the ordering in which coefficient sign
//! changes bound the number of real zeros: the bases `e^{-λ_j}` of the
//! classical statement `Σ α_j p_j^x` are then listed in decreasing order.
//!
//! Root isolation follows Rolle's theorem. Multiplying by `e^{λ_1 x}` turns
//! the leading term into a constant without moving any zero; the derivative
//! of the product has one term fewer, and between two consecutive zeros of
//! that derivative the product is monotone, so plain bisection is certified
//! there. The recursion bottoms out at a single term, which has no zeros.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signscan::{Confidence, Sign, SignPattern};

/// Relative threshold under which a merged coefficient counts as
/// cancellation noise.
const MERGE_CANCEL_REL: f64 = 1e-14;

/// Relative deadband applied to regions between roots when assembling an
/// exact sign pattern.
pub const EXACT_DEADBAND: f64 = 1e-11;

/// Width below which a root bracket is considered isolated.
pub const ROOT_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl TryFrom<Vec<Term>> for ExpPoly {
    type Error = Error;

    fn try_from(terms: Vec<Term>) -> Result<Self> {
        ExpPoly::new(terms.into_iter().map(|t| (t.coef, t.rate)))
    }
}

impl From<ExpPoly> for Vec<Term> {
    fn from(p: ExpPoly) -> Self {
        p.terms
    }
}

/// Outcome of [`ExpPoly::isolate_roots`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub sign_change_bound: usize,
    /// Disjoint brackets, each containing exactly one sign change.
    pub isolated_roots: Vec<(f64, f64)>,
    /// Abscissae where a critical value fell inside the rounding noise
    /// (tangency or a cluster of roots closer than the working precision).
    pub uncertain: Vec<f64>,
    pub residual_uncertainty: bool,
}

impl RootReport {
    /// Returns the brackets, or an error when any candidate could not be
    /// separated.
    pub fn into_certified(self) -> Result<Vec<(f64, f64)>> {
        match self.uncertain.first() {
            Some(&near) if self.residual_uncertainty => Err(Error::ResidualUncertainty { near }),
            _ => Ok(self.isolated_roots),
        }
    }

    pub fn root_estimates(&self) -> Vec<f64> {
        self.isolated_roots
            .iter()
            .map(|&(a, b)| 0.5 * (a + b))
            .collect()
    }
}

impl ExpPoly {
    /// Builds `Σ coef e^{-rate x}` from `(coef, rate)` pairs.
    ///
    /// Terms sharing a rate are merged; a merged coefficient that is pure
    /// cancellation noise relative to its parts is dropped. Zero coefficients
    /// are discarded. Fails with [`Error::ZeroPolynomial`] when nothing is
    /// left.
    pub fn new<I: IntoIterator<Item = (f64, f64)>>(terms: I) -> Result<Self> {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (coef, rate) in terms {
            if !coef.is_finite() {
                return Err(Error::param("coef", coef, "must be finite"));
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::param("rate", rate, "must be finite and > 0"));
            }
            if coef != 0.0 {
                raw.push((coef, rate));
            }
        }
        Ok(Self {
            terms: merge_sorted(raw)?,
        })
    }

    pub fn single(coef: f64, rate: f64) -> Result<Self> {
        Self::new([(coef, rate)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.rate)
    }

    pub fn min_rate(&self) -> f64 {
        self.terms[0].rate
    }

    pub fn max_rate(&self) -> f64 {
        self.terms[self.terms.len() - 1].rate
    }

    /// `p(x)` with compensated summation.
    pub fn eval(&self, x: f64) -> f64 {
        neumaier(self.terms.iter().map(|t| t.coef * (-t.rate * x).exp()))
    }

    /// `p(x) e^{λ_ref x}` with `λ_ref` the smallest rate when `x >= 0` and the
    /// largest otherwise, so no exponential overflows. Same sign as `p(x)`.
    /// Also returns `Σ |terms|` at the same scale, for noise estimates.
    pub fn eval_scaled(&self, x: f64) -> (f64, f64) {
        eval_shifted(&self.pairs(), x)
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.terms.iter().map(|t| (t.coef, t.rate)).collect()
    }

    /// k-th derivative: each coefficient times `(-λ_j)^k`.
    pub fn differentiate(&self, k: u32) -> ExpPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coef: t.coef * (-t.rate).powi(k as i32),
                rate: t.rate,
            })
            .collect();
        ExpPoly { terms }
    }

    /// `∫_x^∞ p(t) dt`, term by term.
    pub fn integrate_tail(&self) -> ExpPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coef: t.coef / t.rate,
                rate: t.rate,
            })
            .collect();
        ExpPoly { terms }
    }

    pub fn scale(&self, factor: f64) -> Result<ExpPoly> {
        if !(factor.is_finite() && factor != 0.0) {
            return Err(Error::param("factor", factor, "must be finite and nonzero"));
        }
        Ok(ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * factor,
                    rate: t.rate,
                })
                .collect(),
        })
    }

    pub fn add(&self, other: &ExpPoly) -> Result<ExpPoly> {
        Self::new(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|t| (t.coef, t.rate)),
        )
    }

    pub fn sub(&self, other: &ExpPoly) -> Result<ExpPoly> {
        Self::new(
            self.terms
                .iter()
                .map(|t| (t.coef, t.rate))
                .chain(other.terms.iter().map(|t| (-t.coef, t.rate))),
        )
    }

    pub fn mul(&self, other: &ExpPoly) -> Result<ExpPoly> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push((a.coef * b.coef, a.rate + b.rate));
            }
        }
        Self::new(out)
    }

    /// `x ↦ p(a x + b)`, again an exponential polynomial for `a > 0`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Result<ExpPoly> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("a", a, "must be finite and > 0"));
        }
        if !b.is_finite() {
            return Err(Error::param("b", b, "must be finite"));
        }
        Self::new(
            self.terms
                .iter()
                .map(|t| (t.coef * (-t.rate * b).exp(), a * t.rate)),
        )
    }

    /// Strict sign alternations in the coefficient sequence, ordered by
    /// increasing rate. Bounds the number of real zeros.
    pub fn sign_change_bound(&self) -> usize {
        self.terms
            .windows(2)
            .filter(|w| (w[0].coef > 0.0) != (w[1].coef > 0.0))
            .count()
    }

    /// Sign as `x → +∞`: the smallest rate dominates.
    pub fn limit_sign_pos_inf(&self) -> Sign {
        Sign::of(self.terms[0].coef)
    }

    /// Sign as `x → -∞`: the largest rate dominates.
    pub fn limit_sign_neg_inf(&self) -> Sign {
        Sign::of(self.terms[self.terms.len() - 1].coef)
    }

    /// Smallest `x >= start` beyond which the smallest-rate term strictly
    /// dominates the sum of all others, so `p` has no zero past it.
    pub fn root_horizon(&self, start: f64) -> f64 {
        let c1 = self.terms[0].coef.abs();
        let l1 = self.terms[0].rate;
        let dominated = |x: f64| {
            let rest: f64 = self.terms[1..]
                .iter()
                .map(|t| t.coef.abs() * (-(t.rate - l1) * x).exp())
                .sum();
            c1 > rest
        };
        if dominated(start) {
            return start;
        }
        let mut step = 1.0;
        let mut x = start + step;
        while !dominated(x) {
            step *= 2.0;
            x = start + step;
            if step > 1e12 {
                break;
            }
        }
        x
    }

    /// Largest `x <= start` before which the largest-rate term strictly
    /// dominates the sum of all others, so `p` has no zero left of it.
    pub fn left_root_horizon(&self, start: f64) -> f64 {
        let n = self.terms.len() - 1;
        let (cn, ln) = (self.terms[n].coef.abs(), self.terms[n].rate);
        let dominated = |x: f64| {
            let rest: f64 = self.terms[..n]
                .iter()
                .map(|t| t.coef.abs() * ((ln - t.rate) * x).exp())
                .sum();
            cn > rest
        };
        if dominated(start) {
            return start;
        }
        let mut step = 1.0;
        while !dominated(start - step) && step <= 1e12 {
            step *= 2.0;
        }
        start - step
    }

    /// An interval holding every real zero of `p`.
    pub fn real_root_window(&self) -> (f64, f64) {
        let lo = self.left_root_horizon(0.0);
        let hi = self.root_horizon(0.0);
        if hi > lo {
            (lo, hi)
        } else {
            (lo, lo + 1.0)
        }
    }

    /// Isolates the real zeros of `p` on `[lo, hi]`.
    pub fn isolate_roots(&self, lo: f64, hi: f64) -> Result<RootReport> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "root window [{lo}, {hi}] must be finite and nonempty"
            )));
        }
        let iso = isolate_general(&self.pairs(), lo, hi);
        let residual = !iso.uncertain.is_empty();
        Ok(RootReport {
            sign_change_bound: self.sign_change_bound(),
            isolated_roots: iso.roots,
            uncertain: iso.uncertain,
            residual_uncertainty: residual,
        })
    }

    /// Full sign pattern of `p` on `(start, ∞)`.
    ///
    /// Zeros are isolated on `[start, X]` with `X` from [`Self::root_horizon`];
    /// beyond `X` the sign is that of the smallest-rate coefficient. Each
    /// region between consecutive zeros is summarized by its peak `|p|`,
    /// located through the zeros of `p'`. Regions whose peak does not exceed
    /// [`EXACT_DEADBAND`] times the overall peak carry no evidence and are
    /// dropped; tangencies therefore never produce sign changes.
    pub fn sign_pattern_exact(&self, start: f64) -> Result<SignPattern> {
        self.sign_pattern_exact_with(start, EXACT_DEADBAND)
    }

    /// As [`Self::sign_pattern_exact`] with an explicit relative deadband;
    /// zero keeps every region, including ones that underflow.
    pub fn sign_pattern_exact_with(&self, start: f64, deadband: f64) -> Result<SignPattern> {
        let horizon = self.root_horizon(start);
        let roots = if horizon > start {
            self.isolate_roots(start, horizon)?.isolated_roots
        } else {
            Vec::new()
        };
        let deriv = self.differentiate(1);
        let crit_horizon = deriv.root_horizon(start).max(horizon);
        let crit = if crit_horizon > start {
            deriv.isolate_roots(start, crit_horizon)?.root_estimates()
        } else {
            Vec::new()
        };

        // Regions between consecutive zeros: (left, right), right may be ∞.
        let mut bounds = Vec::with_capacity(roots.len() + 1);
        let mut left = start;
        for &(rl, rh) in &roots {
            bounds.push((left, rl, Some((rl, rh))));
            left = rh;
        }
        bounds.push((left, f64::INFINITY, None));

        struct Region {
            sign: Sign,
            peak: f64,
            witness: f64,
            right_root: Option<(f64, f64)>,
        }

        let mut regions = Vec::with_capacity(bounds.len());
        for &(l, r, right_root) in &bounds {
            let mut candidates: Vec<f64> = crit.iter().copied().filter(|&c| c > l && c < r).collect();
            let span = if r.is_finite() {
                r - l
            } else {
                (horizon - l).max(1.0 / self.min_rate()) * 4.0
            };
            for k in 1..=32 {
                let u = k as f64 / 33.0;
                candidates.push(l + span * u);
                candidates.push(l + span * u.powi(4));
            }
            let mut peak = 0.0f64;
            let mut witness = f64::NAN;
            let mut sign = None;
            for &x in &candidates {
                if !(x > l && x < r) || x <= start {
                    continue;
                }
                let v = self.eval(x);
                if v.abs() > peak {
                    peak = v.abs();
                    witness = x;
                    sign = Some(Sign::of(v));
                }
            }
            if l == start {
                let v0 = self.eval(start).abs();
                peak = peak.max(v0);
            }
            let sign = match sign {
                Some(s) => s,
                None => {
                    // Every sample underflowed; the scaled value still has the
                    // right sign.
                    let x = if r.is_finite() { 0.5 * (l + r) } else { horizon.max(l) + 1.0 };
                    witness = x;
                    Sign::of(self.eval_scaled(x).0)
                }
            };
            regions.push(Region {
                sign,
                peak,
                witness,
                right_root,
            });
        }

        let global = regions.iter().map(|r| r.peak).fold(0.0, f64::max);
        let mut pattern = SignPattern::empty(Confidence::Exact);
        let mut pending_change: Option<(f64, f64)> = None;
        for (i, reg) in regions.iter().enumerate() {
            let keep = deadband == 0.0 || global == 0.0 || reg.peak > deadband * global;
            if keep {
                match pattern.signs.last() {
                    Some(&last) if last == reg.sign => {}
                    Some(_) => {
                        let bracket = pending_change.unwrap_or((reg.witness, reg.witness));
                        pattern.push_change(bracket, reg.sign, reg.witness);
                    }
                    None => pattern.push_first(reg.sign, reg.witness),
                }
                pending_change = None;
            }
            if let Some(rr) = reg.right_root {
                if i + 1 < regions.len() {
                    pending_change = Some(match pending_change {
                        Some((lo, _)) => (lo, rr.1),
                        None => (rr.0, rr.1),
                    });
                }
            }
        }
        Ok(pattern)
    }
}

fn merge_sorted(mut raw: Vec<(f64, f64)>) -> Result<Vec<Term>> {
    raw.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<Term> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let rate = raw[i].1;
        let mut j = i;
        let mut parts = Vec::new();
        while j < raw.len() && same_rate(raw[j].1, rate) {
            parts.push(raw[j].0);
            j += 1;
        }
        let sum = neumaier(parts.iter().copied());
        let scale = parts.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if sum != 0.0 && sum.abs() > MERGE_CANCEL_REL * scale {
            out.push(Term { coef: sum, rate });
        } else if sum != 0.0 {
            log::warn!("dropping cancelled coefficient {sum:e} at rate {rate}");
        }
        i = j;
    }
    if out.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(out)
}

fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `Σ c e^{-(λ - λ_ref) x}` for `(c, λ)` sorted by rate; see
/// [`ExpPoly::eval_scaled`].
fn eval_shifted(terms: &[(f64, f64)], x: f64) -> (f64, f64) {
    let reference = if x >= 0.0 {
        terms[0].1
    } else {
        terms[terms.len() - 1].1
    };
    let mut magnitude = 0.0;
    let value = neumaier(terms.iter().map(|&(c, l)| {
        let v = c * (-(l - reference) * x).exp();
        magnitude += v.abs();
        v
    }));
    (value, magnitude)
}

fn noise(terms: &[(f64, f64)], magnitude: f64) -> f64 {
    16.0 * terms.len() as f64 * f64::EPSILON * magnitude
}

#[derive(Debug, Default)]
struct Isolation {
    roots: Vec<(f64, f64)>,
    uncertain: Vec<f64>,
}

fn classify(terms: &[(f64, f64)], x: f64) -> i8 {
    let (v, m) = eval_shifted(terms, x);
    if v.abs() <= noise(terms, m) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn isolate_general(terms: &[(f64, f64)], lo: f64, hi: f64) -> Isolation {
    let mut out = Isolation::default();
    if terms.len() <= 1 {
        return out;
    }
    let base = terms[0].1;
    // Derivative of e^{base x} p(x): the constant term drops out.
    let deriv: Vec<(f64, f64)> = terms[1..]
        .iter()
        .map(|&(c, l)| (-(l - base) * c, l - base))
        .collect();
    let crit = isolate_general(&deriv, lo, hi);
    out.uncertain.extend(crit.uncertain);

    let mut points = Vec::with_capacity(crit.roots.len() + 2);
    points.push(lo);
    for &(a, b) in &crit.roots {
        let m = 0.5 * (a + b);
        if m > lo && m < hi {
            points.push(m);
        }
    }
    points.push(hi);
    let signs: Vec<i8> = points.iter().map(|&x| classify(terms, x)).collect();

    let mut prev: Option<usize> = None;
    for i in 0..points.len() {
        if signs[i] == 0 {
            if i > 0 && i + 1 < points.len() {
                out.uncertain.push(points[i]);
            }
            continue;
        }
        if let Some(p) = prev {
            if signs[p] != signs[i] {
                if p + 1 == i {
                    out.roots.push(bisect(terms, points[p], points[i], signs[p]));
                } else {
                    // Crossing through critical values lost in rounding noise.
                    out.roots.push((points[p + 1], points[i - 1]));
                }
            }
        }
        prev = Some(i);
    }
    out
}

fn bisect(terms: &[(f64, f64)], mut a: f64, mut b: f64, sign_a: i8) -> (f64, f64) {
    loop {
        let m = 0.5 * (a + b);
        let width_ok = b - a <= ROOT_WIDTH.max(4.0 * f64::EPSILON * m.abs());
        if width_ok || m <= a || m >= b {
            return (a, b);
        }
        let (v, _) = eval_shifted(terms, m);
        if v == 0.0 {
            return (m, m);
        }
        if (v > 0.0) == (sign_a > 0) {
            a = m;
        } else {
            b = m;
        }
    }
}

impl fmt::Display for ExpPoly {
    /// Literal form `1*e(-1)+(-1)*e(-2)`, parseable by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.coef < 0.0 {
                write!(f, "({})*e(-{})", t.coef, t.rate)?;
            } else {
                write!(f, "{}*e(-{})", t.coef, t.rate)?;
            }
        }
        Ok(())
    }
}

impl FromStr for ExpPoly {
    type Err = Error;

    /// Accepts sums of `coef*e(-rate)` terms. A coefficient may be a bare or
    /// parenthesized decimal and may be omitted (meaning 1); terms are joined
    /// by `+` or `-`. Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let text = text.replace('\u{2212}', "-");
        let bytes = text.as_bytes();
        let mut pos = 0;
        let mut terms = Vec::new();
        while pos < bytes.len() {
            let mut sign = 1.0;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                if bytes[pos] == b'-' {
                    sign = -1.0;
                }
                pos += 1;
            } else if !terms.is_empty() {
                return Err(Error::parse(&text[pos..], "expected `+` or `-` between terms"));
            }
            let coef = if text[pos..].starts_with("e(") {
                1.0
            } else {
                let (value, next) = if bytes.get(pos) == Some(&b'(') {
                    let close = text[pos..]
                        .find(')')
                        .ok_or_else(|| Error::parse(&text[pos..], "unclosed parenthesis"))?;
                    (parse_number(&text[pos + 1..pos + close])?, pos + close + 1)
                } else {
                    let end = number_end(bytes, pos);
                    (parse_number(&text[pos..end])?, end)
                };
                pos = next;
                if bytes.get(pos) != Some(&b'*') {
                    return Err(Error::parse(&text[pos..], "expected `*` after coefficient"));
                }
                pos += 1;
                value
            };
            if !text[pos..].starts_with("e(") {
                return Err(Error::parse(&text[pos..], "expected `e(` exponent"));
            }
            pos += 2;
            let close = text[pos..]
                .find(')')
                .ok_or_else(|| Error::parse(&text[pos..], "unclosed `e(`"))?;
            let exponent = parse_number(&text[pos..pos + close])?;
            pos += close + 1;
            if !(exponent < 0.0) {
                return Err(Error::parse(
                    format!("e({exponent})"),
                    "exponent must be negative (rates are positive)",
                ));
            }
            terms.push((sign * coef, -exponent));
        }
        if terms.is_empty() {
            return Err(Error::parse(s, "empty exponential polynomial"));
        }
        ExpPoly::new(terms)
    }
}

fn number_end(bytes: &[u8], start: usize) -> usize {
    let mut i = start;
    if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
        i += 1;
    }
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_digit() || c == b'.' {
            i += 1;
        } else if (c == b'e' || c == b'E')
            && bytes
                .get(i + 1)
                .is_some_and(|&n| n.is_ascii_digit() || n == b'-' || n == b'+')
        {
            i += 2;
        } else {
            break;
        }
    }
    i
}

fn parse_number(token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(token, "expected a decimal number"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(f64, f64)]) -> ExpPoly {
        ExpPoly::new(terms.iter().copied()).unwrap()
    }

    #[test]
    fn window_holds_negative_zero() {
        // 4 e^{-x} - e^{-2x} vanishes at x = -ln 4.
        let q = p(&[(4.0, 1.0), (-1.0, 2.0)]);
        let (lo, hi) = q.real_root_window();
        let z = -(4f64).ln();
        assert!(lo < z && z < hi);
        let r = q.isolate_roots(lo, hi).unwrap();
        assert_eq!(r.isolated_roots.len(), 1);
        let (a, b) = r.isolated_roots[0];
        assert!(a <= z + 1e-12 && z - 1e-12 <= b);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(&[(1.0, 1.0), (-1.0, 2.0)]).eval(0.0), 0.0);
        let tail = p(&[(1.0, 1.0), (1.0, 2.0), (-1.0, 3.0)]);
        let expected = (-1.0f64).exp() + (-2.0f64).exp() - (-3.0f64).exp();
        assert!((tail.eval(1.0) - expected).abs() < 1e-15);
        assert!((tail.eval(1.0) - 0.453428).abs() < 1e-6);
        assert!((p(&[(2.0, 1.0)]).eval(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn merge_and_zero() {
        let q = p(&[(1.0, 2.0), (2.0, 1.0), (3.0, 2.0)]);
        assert_eq!(q.terms(), &[Term { coef: 2.0, rate: 1.0 }, Term { coef: 4.0, rate: 2.0 }]);
        assert!(matches!(
            ExpPoly::new([(1.0, 1.0), (-1.0, 1.0)]),
            Err(Error::ZeroPolynomial)
        ));
        assert!(ExpPoly::new([(1.0, 0.0)]).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p(&[(1.0, 1.0)]).differentiate(1), p(&[(-1.0, 1.0)]));
        assert_eq!(p(&[(3.0, 2.0)]).differentiate(2), p(&[(12.0, 2.0)]));
    }

    #[test]
    fn sign_change_bound_examples() {
        assert_eq!(p(&[(1.0, 1.0), (-1.0, 2.0)]).sign_change_bound(), 1);
        assert_eq!(p(&[(5.0, 3.0)]).sign_change_bound(), 0);
        assert_eq!(p(&[(1.0, 1.0), (-1.0, 2.0), (-1.0, 3.0), (1.0, 4.0)]).sign_change_bound(), 2);
    }

    #[test]
    fn isolates_simple_root() {
        let r = p(&[(1.0, 1.0), (-1.0, 2.0)]).isolate_roots(-5.0, 5.0).unwrap();
        assert_eq!(r.isolated_roots.len(), 1);
        let (a, b) = r.isolated_roots[0];
        assert!(a <= 0.0 && b >= 0.0 && b - a <= 1e-12, "{a} {b}");
        assert!(!r.residual_uncertainty);
    }

    #[test]
    fn isolates_three_roots() {
        // e^{-x}(1-e^{-x})(1-2e^{-x})(1-3e^{-x}) has zeros at 0, ln 2, ln 3.
        let r = p(&[(1.0, 1.0), (-6.0, 2.0), (11.0, 3.0), (-6.0, 4.0)])
            .isolate_roots(-0.5, 3.0)
            .unwrap();
        let est = r.root_estimates();
        assert_eq!(est.len(), 3);
        for (e, t) in est.iter().zip([0.0, 2f64.ln(), 3f64.ln()]) {
            assert!((e - t).abs() < 1e-11, "{e} vs {t}");
        }
    }

    #[test]
    fn exact_pattern_of_h() {
        // e^{-x} + e^{-2x} - e^{-3x} - e^{-x/2}
        let h = p(&[(1.0, 1.0), (1.0, 2.0), (-1.0, 3.0), (-1.0, 0.5)]);
        let pat = h.sign_pattern_exact(0.0).unwrap();
        assert_eq!(pat.to_string(), "+,-");
        assert_eq!(pat.confidence, Confidence::Exact);
    }

    #[test]
    fn exact_pattern_ignores_zero_at_start() {
        let q = p(&[(1.0, 1.0), (-1.0, 2.0)]);
        assert_eq!(q.sign_pattern_exact(0.0).unwrap().to_string(), "+");
        assert_eq!(p(&[(1.0, 1.0)]).sign_pattern_exact(0.0).unwrap().to_string(), "+");
    }

    #[test]
    fn touching_zero_is_not_a_change() {
        // (e^{-x} - e^{-2x})^2 touches zero only at x = 0; shifted to x = 1.
        let q = p(&[(1.0, 2.0), (-2.0, 3.0), (1.0, 4.0)])
            .compose_affine(1.0, -1.0)
            .unwrap();
        assert_eq!(q.sign_pattern_exact(0.0).unwrap().to_string(), "+");
    }

    #[test]
    fn horizon_dominance() {
        let q = p(&[(1e-3, 0.5), (-10.0, 1.0), (5.0, 4.0)]);
        let x = q.root_horizon(0.0);
        let rest: f64 = 10.0 * (-0.5 * x).exp() + 5.0 * (-3.5 * x).exp();
        assert!(1e-3 > rest);
        assert_eq!(q.isolate_roots(0.0, x).unwrap().isolated_roots.len(), 1);
    }

    #[test]
    fn literal_round_trip() {
        let q: ExpPoly = "1*e(-1)+(-1)*e(-2)".parse().unwrap();
        assert_eq!(q, p(&[(1.0, 1.0), (-1.0, 2.0)]));
        let again: ExpPoly = q.to_string().parse().unwrap();
        assert_eq!(again, q);
        let r: ExpPoly = " e(-1) - 2.5 * e(-3) + 1e-3*e(-0.5)".parse().unwrap();
        assert_eq!(r, p(&[(1e-3, 0.5), (1.0, 1.0), (-2.5, 3.0)]));
        assert!("1*e(2)".parse::<ExpPoly>().is_err());
        assert!("1*x(2)".parse::<ExpPoly>().is_err());
    }
}
