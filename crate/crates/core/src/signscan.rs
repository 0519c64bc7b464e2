//! Sign patterns of real functions on `(0, ∞)`.
//!
//! A pattern is the ordered list of strict signs a function shows as `x`
//! runs from 0 to infinity, together with one witness abscissa per sign and
//! a bracket around every change. Samples whose magnitude stays inside the
//! deadband (relative to the largest sampled magnitude) are no evidence
//! either way, so rounding noise around a zero never fabricates a change.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// Sign of a nonzero value; zero maps to `Plus`.
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    /// Derived from certified root isolation of an exponential polynomial.
    Exact,
    /// Derived from grid sampling with refinement.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub signs: Vec<Sign>,
    /// One abscissa per sign; `inf` for a sign known only as a limit.
    #[serde(with = "extended")]
    pub witnesses: Vec<f64>,
    #[serde(with = "extended_pairs")]
    pub change_points: Vec<(f64, f64)>,
    pub confidence: Confidence,
}

impl SignPattern {
    pub fn empty(confidence: Confidence) -> Self {
        Self {
            signs: Vec::new(),
            witnesses: Vec::new(),
            change_points: Vec::new(),
            confidence,
        }
    }

    pub(crate) fn push_first(&mut self, sign: Sign, witness: f64) {
        debug_assert!(self.signs.is_empty());
        self.signs.push(sign);
        self.witnesses.push(witness);
    }

    pub(crate) fn push_change(&mut self, bracket: (f64, f64), sign: Sign, witness: f64) {
        debug_assert!(self.signs.last() != Some(&sign));
        self.change_points.push(bracket);
        self.signs.push(sign);
        self.witnesses.push(witness);
    }

    /// True when the function was zero within the deadband everywhere.
    pub fn is_degenerate(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign_changes(&self) -> usize {
        self.signs.len().saturating_sub(1)
    }

    /// The pattern of `-f`.
    pub fn negated(&self) -> SignPattern {
        SignPattern {
            signs: self.signs.iter().map(|s| s.flip()).collect(),
            ..self.clone()
        }
    }

    /// True when `self` is a contiguous piece of some allowed pattern.
    ///
    /// A criterion of the form "at most k changes, and if exactly k then in
    /// this order" accepts exactly the contiguous pieces of its maximal
    /// pattern; a degenerate (empty) pattern is always accepted.
    pub fn matches(&self, allowed: &[SignSeq]) -> bool {
        self.signs.is_empty()
            || allowed.iter().any(|a| {
                a.0.windows(self.signs.len())
                    .any(|w| w == self.signs.as_slice())
            })
    }

    /// True when `self` is a final part (suffix) of `of`.
    pub fn is_final_part(&self, of: &SignPattern) -> bool {
        of.signs.ends_with(&self.signs)
    }

    pub fn seq(&self) -> SignSeq {
        SignSeq(self.signs.clone())
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_signs(&self.signs, f)
    }
}

fn fmt_signs(signs: &[Sign], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if signs.is_empty() {
        return f.write_str("0");
    }
    for (i, s) in signs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{}", s.as_char())?;
    }
    Ok(())
}

/// A bare sign sequence such as `+,-,+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignSeq(pub Vec<Sign>);

impl fmt::Display for SignSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_signs(&self.0, f)
    }
}

impl FromStr for SignSeq {
    type Err = Error;

    /// Accepts `+` and `-` (or the Unicode minus) separated by commas;
    /// `0` is the empty sequence.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(SignSeq(Vec::new()));
        }
        s.split(',')
            .map(|tok| match tok.trim() {
                "+" => Ok(Sign::Plus),
                "-" | "\u{2212}" => Ok(Sign::Minus),
                other => Err(Error::parse(other, "expected `+` or `-`")),
            })
            .collect::<Result<Vec<_>>>()
            .map(SignSeq)
    }
}

/// Parses a sign sequence literal; panics on malformed input. Meant for
/// constant allowed sets.
pub fn seq(s: &str) -> SignSeq {
    s.parse().expect("valid sign sequence literal")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub x_max: f64,
    /// Lower end of the logarithmic part of the grid.
    pub x_min: f64,
    pub initial_grid: usize,
    /// Relative to the largest sampled magnitude.
    pub deadband: f64,
    pub max_refinement_depth: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self::with_x_max(50.0)
    }
}

impl ScanConfig {
    pub fn with_x_max(x_max: f64) -> Self {
        Self {
            x_max,
            x_min: x_max * 1e-8,
            initial_grid: 512,
            deadband: 1e-11,
            max_refinement_depth: 12,
        }
    }

    /// Window suited to an exponential polynomial whose slowest rate is
    /// `min_rate`.
    pub fn for_min_rate(min_rate: f64) -> Self {
        Self::with_x_max(50f64.max(20.0 / min_rate))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return Err(Error::param("x_max", self.x_max, "must be finite and > 0"));
        }
        if !(self.x_min > 0.0 && self.x_min < self.x_max) {
            return Err(Error::param("x_min", self.x_min, "must lie in (0, x_max)"));
        }
        if self.initial_grid < 64 {
            return Err(Error::param(
                "initial_grid",
                self.initial_grid as f64,
                "must be at least 64",
            ));
        }
        if !(self.deadband > 0.0 && self.deadband < 1.0) {
            return Err(Error::param("deadband", self.deadband, "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Sample abscissae: a logarithmic grid on `[x_min, x_max]` merged with a
    /// linear grid on `(0, x_max]` and the breakpoints inside the window.
    /// Doubling `initial_grid` keeps every previous point.
    pub fn grid(&self, breakpoints: &[f64]) -> Vec<f64> {
        let k = (self.initial_grid / 2).max(1);
        let ratio = (self.x_max / self.x_min).ln();
        let mut xs = Vec::with_capacity(2 * k + 2 + breakpoints.len());
        for i in 0..=k {
            xs.push(self.x_min * (ratio * i as f64 / k as f64).exp());
        }
        for j in 1..=k {
            xs.push(self.x_max * j as f64 / k as f64);
        }
        xs.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b <= self.x_max));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        xs
    }
}

/// One sampled point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub x: f64,
    pub value: f64,
    /// `None` inside the deadband.
    pub sign: Option<Sign>,
}

/// Samples `f` and returns its pattern on `(0, x_max]`, extended by
/// `limit_sign` (the sign beyond `x_max`) when given.
pub fn scan<F>(f: F, cfg: &ScanConfig, breakpoints: &[f64], limit_sign: Option<Sign>) -> Result<SignPattern>
where
    F: Fn(f64) -> f64 + Sync,
{
    scan_traced(f, cfg, breakpoints, limit_sign).map(|(p, _)| p)
}

/// As [`scan`], also returning every evaluated sample in abscissa order.
pub fn scan_traced<F>(
    f: F,
    cfg: &ScanConfig,
    breakpoints: &[f64],
    limit_sign: Option<Sign>,
) -> Result<(SignPattern, Vec<TracePoint>)>
where
    F: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    let xs = cfg.grid(breakpoints);
    let values: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect();
    let mut samples: Vec<(f64, f64)> = xs.into_iter().zip(values).collect();
    if let Some(&(x, _)) = samples.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteValue { x });
    }
    let peak = samples.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::IndeterminateFunction);
    }
    let band = cfg.deadband * peak;
    let classify = |v: f64| -> Option<Sign> {
        if v.abs() > band {
            Some(Sign::of(v))
        } else {
            None
        }
    };

    // Indeterminate gaps between two same-signed samples may hide a short
    // opposite excursion; probe them by repeated midpoint sampling.
    let probe_depth = cfg.max_refinement_depth.min(6);
    let mut extra = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if classify(samples[i].1).is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < samples.len() && classify(samples[i].1).is_none() {
            i += 1;
        }
        let lo = if start > 0 { samples[start - 1].0 } else { 0.0 };
        let hi = if i < samples.len() { samples[i].0 } else { samples[samples.len() - 1].0 };
        let mut pts: Vec<f64> = samples[start..i].iter().map(|s| s.0).collect();
        pts.insert(0, lo);
        pts.push(hi);
        for _ in 0..probe_depth {
            let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|&m| m > 0.0).collect();
            let vals: Vec<f64> = mids.par_iter().map(|&x| f(x)).collect();
            let mut found = false;
            for (&x, &v) in mids.iter().zip(&vals) {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { x });
                }
                if classify(v).is_some() {
                    found = true;
                }
                extra.push((x, v));
            }
            if found || pts.len() > 256 {
                break;
            }
            let mut merged: Vec<f64> = pts.iter().copied().chain(mids).collect();
            merged.sort_by(f64::total_cmp);
            pts = merged;
        }
    }
    samples.extend(extra);
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Runs of determinate samples.
    let mut pattern = SignPattern::empty(Confidence::Sampled);
    let mut run_peak = 0.0f64;
    let mut last_det: Option<(f64, Sign)> = None;
    for &(x, v) in &samples {
        let Some(s) = classify(v) else { continue };
        match last_det {
            None => {
                pattern.push_first(s, x);
                run_peak = v.abs();
            }
            Some((px, ps)) if ps != s => {
                let bracket = refine_change(&f, px, x, ps, &classify, cfg.max_refinement_depth)?;
                pattern.push_change(bracket, s, x);
                run_peak = v.abs();
            }
            Some(_) => {
                if v.abs() > run_peak {
                    run_peak = v.abs();
                    *pattern.witnesses.last_mut().expect("nonempty run") = x;
                }
            }
        }
        last_det = Some((x, s));
    }
    if let (Some(limit), Some((x_last, s_last))) = (limit_sign, last_det) {
        if limit != s_last {
            pattern.push_change((x_last, f64::INFINITY), limit, f64::INFINITY);
        }
    }

    let trace = samples
        .into_iter()
        .map(|(x, value)| TracePoint {
            x,
            value,
            sign: classify(value),
        })
        .collect();
    Ok((pattern, trace))
}

/// Narrows a change between a witness of `left_sign` at `a` and one of the
/// opposite sign at `b` to `[last left-sign point, first right-sign point]`.
fn refine_change<F, C>(f: &F, mut a: f64, mut b: f64, left_sign: Sign, classify: &C, depth: u32) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
    C: Fn(f64) -> Option<Sign>,
{
    // Upper limit of the region that may still contain left-sign evidence,
    // and lower limit for right-sign evidence; they differ once a midpoint
    // lands inside the deadband.
    let mut a_hi = b;
    let mut b_lo = a;
    for _ in 0..depth {
        if a_hi - a <= 0.0 && b - b_lo <= 0.0 {
            break;
        }
        let m = 0.5 * (a + a_hi);
        let v = f(m);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { x: m });
        }
        match classify(v) {
            Some(s) if s == left_sign => a = m,
            Some(_) => {
                b = b.min(m);
                a_hi = m;
            }
            None => a_hi = m,
        }
        let m = 0.5 * (b_lo.max(a) + b);
        if m <= a || m >= b {
            continue;
        }
        let v = f(m);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { x: m });
        }
        match classify(v) {
            Some(s) if s != left_sign => b = m,
            Some(_) => {
                a = a.max(m);
                b_lo = m;
            }
            None => b_lo = m,
        }
    }
    Ok((a, b))
}

/// Writes a scan trace as CSV with header `x,value,sign`; indeterminate
/// samples have sign `0`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TracePoint]) -> Result<()> {
    writeln!(w, "x,value,sign")?;
    for p in trace {
        let s = match p.sign {
            Some(s) => s.as_char(),
            None => '0',
        };
        writeln!(w, "{:.16e},{:.16e},{}", p.x, p.value, s)?;
    }
    Ok(())
}

/// Checks that the pattern of `g(x) = ∫_x^∞ f(t) dt` is a final part of the
/// pattern of `f` on `(0, ∞)`, both from exact root isolation.
pub fn check_integration_lemma(f: &ExpPoly, cfg: &ScanConfig) -> Result<bool> {
    let g = f.integrate_tail();
    let pf = f.sign_pattern_exact_with(0.0, cfg.deadband)?;
    let pg = g.sign_pattern_exact_with(0.0, cfg.deadband)?;
    Ok(pg.is_final_part(&pf))
}

/// JSON has no infinities; they travel as the strings `"inf"`/`"-inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Extended {
    Finite(f64),
    Text(String),
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Extended::Finite(v)
        } else {
            Extended::Text(v.to_string())
        }
    }
}

impl TryFrom<Extended> for f64 {
    type Error = String;

    fn try_from(e: Extended) -> std::result::Result<f64, String> {
        match e {
            Extended::Finite(v) => Ok(v),
            Extended::Text(t) => t.parse().map_err(|_| format!("not a number: {t}")),
        }
    }
}

mod extended {
    use super::Extended;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&x| Extended::from(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Extended>::deserialize(d)?
            .into_iter()
            .map(|e| f64::try_from(e).map_err(D::Error::custom))
            .collect()
    }
}

mod extended_pairs {
    use super::Extended;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&(a, b)| (Extended::from(a), Extended::from(b)))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        Vec::<(Extended, Extended)>::deserialize(d)?
            .into_iter()
            .map(|(a, b)| Ok((f64::try_from(a).map_err(D::Error::custom)?, f64::try_from(b).map_err(D::Error::custom)?)))
            .collect()
    }
}
