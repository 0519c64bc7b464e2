//! Pairwise s-IFR, s-IFRA and DMRL order checks.
//!
//! `X <=_{s-IFR} Y` holds iff `V_s(x) = T̄_{Y,s}(x) - T̄_{X,s}(ax + b)` shows at
//! most the sign variation `+,-,+` for every `a > 0` and real `b`; the
//! s-IFRA order asks for at most `-,+` with `b = 0`. A grid of `(a, b)` cells
//! can find a violation or fail to find one, never prove the order, so every
//! check returns a tri-state [`Outcome`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ageing::{classify_ifr, classify_ifra, MonotoneClass, MonotoneVerdict};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, EXACT_DEADBAND};
use crate::iteration::{iterate, IteratedTail};
use crate::signscan::{scan, seq, Confidence, ScanConfig, Sign, SignPattern, SignSeq};

/// Tail mass defining the scan window of a cell.
pub const HORIZON_MASS: f64 = 1e-12;
const WINDOW_CAP: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    PatternVs,
    CriterionH,
    CriterionP,
    NewCrit,
    Convexity,
    Dmrl,
}

/// The function scanned by [`criterion_h`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HForm {
    /// `f_Y(x)/E Y^{s-1} - a^s f_X(ax+b)/E X^{s-1}`
    #[serde(rename = "hs")]
    Hs,
    /// `F̄_Y(x)/E Y^{s-1} - a^{s-1} F̄_X(ax+b)/E X^{s-1}`
    #[serde(rename = "hs-1")]
    HsMinus1,
    /// `ln f_Y(x) - ln f_X(ax+b) + ln(E X^{s-1} / (a^s E Y^{s-1}))`
    #[serde(rename = "ps")]
    Ps,
    /// `ln F̄_Y(x) - ln F̄_X(ax+b) + ln(E X^{s-1} / (a^{s-1} E Y^{s-1}))`
    #[serde(rename = "ps-1")]
    PsMinus1,
}

impl HForm {
    pub const ALL: [HForm; 4] = [HForm::Hs, HForm::HsMinus1, HForm::Ps, HForm::PsMinus1];

    fn is_log(self) -> bool {
        matches!(self, HForm::Ps | HForm::PsMinus1)
    }

    fn uses_density(self) -> bool {
        matches!(self, HForm::Hs | HForm::Ps)
    }

    fn criterion(self) -> Criterion {
        if self.is_log() {
            Criterion::CriterionP
        } else {
            Criterion::CriterionH
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HForm::Hs => "hs",
            HForm::HsMinus1 => "hs-1",
            HForm::Ps => "ps",
            HForm::PsMinus1 => "ps-1",
        }
    }
}

impl fmt::Display for HForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HForm::ALL
            .into_iter()
            .find(|h| h.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::parse(s, "expected one of hs, hs-1, ps, ps-1"))
    }
}

/// A cell and the disallowed pattern found there. The pattern's witnesses
/// are the abscissae at which `function` shows each sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Name of the scanned function (`V_s`, `H_s`, `P_s`, `d`, `c_s'`, ...).
    pub function: String,
    pub pattern: SignPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    /// No violation at the configured resolution. `worst_margin` is the
    /// fewest spare sign changes left over any cell.
    Supported { cells_scanned: usize, worst_margin: usize },
    Refuted { witness: Witness },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: Criterion,
    pub s: u32,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub cells_scanned: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridSpec>,
}

impl Verdict {
    pub fn is_supported(&self) -> bool {
        matches!(self.outcome, Outcome::Supported { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self.outcome, Outcome::Refuted { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.outcome, Outcome::Inconclusive { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Refuted { witness } => Some(witness),
            _ => None,
        }
    }

    /// `supported`, `refuted` or `inconclusive`.
    pub fn label(&self) -> &'static str {
        match self.outcome {
            Outcome::Supported { .. } => "supported",
            Outcome::Refuted { .. } => "refuted",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// The `(a, b)` cells of an order check and the scan settings of each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub initial_grid: usize,
    pub deadband: f64,
    /// Fixed scan window; computed per cell from the tails when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_max: Option<f64>,
    /// Cells checked in addition to the `a × b` product.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub extra: Vec<(f64, f64)>,
}

impl GridSpec {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let g = Self {
            a,
            b,
            initial_grid: 512,
            deadband: EXACT_DEADBAND,
            x_max: None,
            extra: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    /// `n` log-spaced points on `[lo, hi]`.
    pub fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        let r = (hi / lo).ln();
        (0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect()
    }

    /// `n` points on `(0, hi]`, denser near zero, preceded by 0.
    pub fn b_points(hi: f64, n: usize) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend((1..=n).map(|j| hi * (j as f64 / n as f64).powi(2)));
        b
    }

    /// 64 slopes in `[0.05, 20]`, 32 shifts in `(0, 5 E Y]`, `b = 0`, and 16
    /// negative shifts down to `-5 E X`.
    pub fn default_ifr(x: &DistributionSpec, y: &DistributionSpec) -> Self {
        let mut b: Vec<f64> = Self::b_points(5.0 * x.mean(), 16)
            .into_iter()
            .skip(1)
            .map(|v| -v)
            .collect();
        b.reverse();
        b.extend(Self::b_points(5.0 * y.mean(), 32));
        Self {
            a: Self::log_points(0.05, 20.0, 64),
            b,
            initial_grid: 512,
            deadband: EXACT_DEADBAND,
            x_max: None,
            extra: Vec::new(),
        }
    }

    /// As [`GridSpec::default_ifr`] with `b = 0` only.
    pub fn default_ifra() -> Self {
        Self {
            a: Self::log_points(0.05, 20.0, 64),
            b: vec![0.0],
            initial_grid: 512,
            deadband: EXACT_DEADBAND,
            x_max: None,
            extra: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one a and one b".into()));
        }
        for &a in &self.a {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::param("a", a, "slopes must be finite and > 0"));
            }
        }
        for &b in &self.b {
            if !b.is_finite() {
                return Err(Error::param("b", b, "shifts must be finite"));
            }
        }
        for &(a, b) in &self.extra {
            if !(a.is_finite() && a > 0.0 && b.is_finite()) {
                return Err(Error::param("a", a, "extra cells need a finite a > 0 and a finite b"));
            }
        }
        if let Some(x) = self.x_max {
            ScanConfig::with_x_max(x).validate()?;
        }
        self.scan_config(1.0).validate()
    }

    /// Adds `a` to the slopes, keeping them sorted.
    pub fn with_a(mut self, a: f64) -> Self {
        if !self.a.contains(&a) {
            self.a.push(a);
            self.a.sort_by(f64::total_cmp);
        }
        self
    }

    /// Replaces the shifts; extra cells outside the new shifts are dropped.
    pub fn with_b(mut self, b: Vec<f64>) -> Self {
        self.extra.retain(|(_, eb)| b.contains(eb));
        self.b = b;
        self
    }

    pub fn with_initial_grid(mut self, n: usize) -> Self {
        self.initial_grid = n;
        self
    }

    /// Cells in `(a, b)` lexicographic order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let mut cells: Vec<(f64, f64)> = self
            .a
            .iter()
            .flat_map(|&a| self.b.iter().map(move |&b| (a, b)))
            .chain(self.extra.iter().copied())
            .collect();
        cells.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        cells.dedup();
        cells
    }

    /// Adds single cells outside the product.
    pub fn with_extra(mut self, cells: impl IntoIterator<Item = (f64, f64)>) -> Self {
        self.extra.extend(cells);
        self
    }

    fn scan_config(&self, x_max: f64) -> ScanConfig {
        let mut cfg = ScanConfig::with_x_max(self.x_max.unwrap_or(x_max));
        cfg.initial_grid = self.initial_grid;
        cfg.deadband = self.deadband;
        cfg
    }
}

/// Iterated tails of a pair plus their scan horizons.
struct Pair {
    x: IteratedTail,
    y: IteratedTail,
    hx: f64,
    hy: f64,
}

impl Pair {
    fn new(x: &DistributionSpec, y: &DistributionSpec, s: u32) -> Result<Self> {
        let x = iterate(x, s)?;
        let y = iterate(y, s)?;
        let hx = tail_horizon(&x)?;
        let hy = tail_horizon(&y)?;
        Ok(Self { x, y, hx, hy })
    }

    /// Both tails below [`HORIZON_MASS`] beyond the returned point, counted
    /// from `x0`.
    fn window(&self, a: f64, b: f64, x0: f64) -> f64 {
        (self.hy.max((self.hx - b) / a) - x0).clamp(1.0, WINDOW_CAP)
    }

    fn exact(&self) -> Option<(&ExpPoly, &ExpPoly)> {
        Some((self.x.as_exppoly()?, self.y.as_exppoly()?))
    }

    fn v(&self, a: f64, b: f64, t: f64) -> f64 {
        self.y.eval(t) - self.x.eval(a * t + b)
    }

    fn breakpoints(&self, a: f64, b: f64, x0: f64) -> Vec<f64> {
        let mut bps: Vec<f64> = self.y.base().breakpoints().iter().map(|p| p - x0).collect();
        bps.extend(self.x.base().breakpoints().iter().map(|p| (p - b) / a - x0));
        bps.retain(|p| *p > 0.0);
        bps
    }
}

fn tail_horizon(it: &IteratedTail) -> Result<f64> {
    if let Some(p) = it.as_exppoly() {
        return Ok((-HORIZON_MASS.ln() / p.min_rate()).max(p.root_horizon(0.0)));
    }
    it.inverse(HORIZON_MASS)
}

enum Cell {
    Pass { slack: usize },
    Fail(Witness),
    Inconclusive(String),
}

fn classify_error(e: Error, a: f64, b: f64) -> Result<Cell> {
    match e {
        Error::NonFiniteValue { .. }
        | Error::TailUnderflow { .. }
        | Error::ResidualUncertainty { .. }
        | Error::ZeroDensity { .. } => Ok(Cell::Inconclusive(format!("cell a={a}, b={b}: {e}"))),
        other => Err(other),
    }
}

/// Checks `pattern` against `allowed`, whose maximal pattern has
/// `max_changes` changes.
fn judge(pattern: SignPattern, allowed: &SignSeq, a: f64, b: f64, function: &str) -> Cell {
    if pattern.matches(std::slice::from_ref(allowed)) {
        let max_changes = allowed.0.len() - 1;
        Cell::Pass {
            slack: max_changes - pattern.sign_changes(),
        }
    } else {
        Cell::Fail(Witness {
            a: Some(a),
            b: Some(b),
            function: function.to_string(),
            pattern,
        })
    }
}

/// Runs `cell` over the grid in parallel chunks and merges in `(a, b)`
/// order: the first failing cell wins, otherwise the first inconclusive
/// one, otherwise the grid is supported.
fn run_grid<F>(cells: &[(f64, f64)], cell: F) -> Result<(Outcome, usize)>
where
    F: Fn(f64, f64) -> Result<Cell> + Sync,
{
    let chunk = (4 * rayon::current_num_threads()).max(8);
    let mut worst = usize::MAX;
    let mut inconclusive: Option<String> = None;
    let mut scanned = 0;
    for block in cells.chunks(chunk) {
        let results: Vec<Result<Cell>> = block.par_iter().map(|&(a, b)| cell(a, b)).collect();
        for r in results {
            scanned += 1;
            match r? {
                Cell::Pass { slack } => worst = worst.min(slack),
                Cell::Fail(witness) => return Ok((Outcome::Refuted { witness }, scanned)),
                Cell::Inconclusive(reason) => {
                    inconclusive.get_or_insert(reason);
                }
            }
        }
    }
    let outcome = match inconclusive {
        Some(reason) => Outcome::Inconclusive { reason },
        None => Outcome::Supported {
            cells_scanned: scanned,
            worst_margin: if worst == usize::MAX { 0 } else { worst },
        },
    };
    Ok((outcome, scanned))
}

/// Sign pattern of `V_s` on `(0, ∞)` for one cell.
fn v_pattern(pair: &Pair, a: f64, b: f64, grid: &GridSpec) -> Result<SignPattern> {
    let x0 = if b < 0.0 { -b / a } else { 0.0 };
    let tail = match pair.exact() {
        Some((tx, ty)) => {
            let v = match tx.compose_affine(a, b) {
                Ok(c) => ty.sub(&c),
                Err(e) => Err(e),
            };
            match v {
                Ok(v) => v.sign_pattern_exact_with(x0, grid.deadband)?,
                Err(Error::ZeroPolynomial) => SignPattern::empty(Confidence::Exact),
                Err(e) => return Err(e),
            }
        }
        None => {
            let cfg = grid.scan_config(pair.window(a, b, x0));
            let bps = pair.breakpoints(a, b, x0);
            match scan(|t| pair.v(a, b, x0 + t), &cfg, &bps, None) {
                Ok(mut p) => {
                    shift_pattern(&mut p, x0);
                    p
                }
                Err(Error::IndeterminateFunction) => SignPattern::empty(Confidence::Sampled),
                Err(e) => return Err(e),
            }
        }
    };
    if b >= 0.0 {
        return Ok(tail);
    }
    // On [0, -b/a) the X tail is 1, so V_s = T̄_{Y,s} - 1 < 0.
    let mut p = SignPattern::empty(tail.confidence);
    p.push_first(Sign::Minus, 0.5 * x0);
    for (i, (&s, &w)) in tail.signs.iter().zip(&tail.witnesses).enumerate() {
        if p.signs.last() == Some(&s) {
            continue;
        }
        let bracket = if i == 0 {
            (0.5 * x0, w)
        } else {
            tail.change_points[i - 1]
        };
        p.push_change(bracket, s, w);
    }
    Ok(p)
}

fn shift_pattern(p: &mut SignPattern, x0: f64) {
    if x0 == 0.0 {
        return;
    }
    for w in &mut p.witnesses {
        *w += x0;
    }
    for c in &mut p.change_points {
        c.0 += x0;
        c.1 += x0;
    }
}

fn check_s(s: u32) -> Result<()> {
    if s == 0 {
        return Err(Error::param("s", 0.0, "must be >= 1"));
    }
    Ok(())
}

fn v_name(s: u32) -> String {
    format!("V_{s}")
}

/// s-IFR order via the `+,-,+` characterization of `V_s`.
pub fn compare_ifr(x: &DistributionSpec, y: &DistributionSpec, s: u32, grid: &GridSpec) -> Result<Verdict> {
    check_s(s)?;
    grid.validate()?;
    let pair = Pair::new(x, y, s)?;
    let allowed = seq("+,-,+");
    let name = v_name(s);
    let (outcome, scanned) = run_grid(&grid.cells(), |a, b| match v_pattern(&pair, a, b, grid) {
        Ok(p) => Ok(judge(p, &allowed, a, b, &name)),
        Err(e) => classify_error(e, a, b),
    })?;
    Ok(Verdict {
        criterion: Criterion::PatternVs,
        s,
        outcome,
        cells_scanned: scanned,
        grid: Some(grid.clone()),
    })
}

/// s-IFRA order via the `-,+` characterization of `V_s` with `b = 0`; the
/// shifts in `grid` are ignored.
pub fn compare_ifra(x: &DistributionSpec, y: &DistributionSpec, s: u32, grid: &GridSpec) -> Result<Verdict> {
    check_s(s)?;
    let grid = grid.clone().with_b(vec![0.0]);
    grid.validate()?;
    let pair = Pair::new(x, y, s)?;
    let allowed = seq("-,+");
    let name = v_name(s);
    let (outcome, scanned) = run_grid(&grid.cells(), |a, b| match v_pattern(&pair, a, b, &grid) {
        Ok(p) => Ok(judge(p, &allowed, a, b, &name)),
        Err(e) => classify_error(e, a, b),
    })?;
    Ok(Verdict {
        criterion: Criterion::PatternVs,
        s,
        outcome,
        cells_scanned: scanned,
        grid: Some(grid),
    })
}

/// Value of the chosen `H`/`P` function at `x >= max(0, -b/a)`; the `H`
/// forms are returned relative to the size of their two terms.
fn h_value(
    form: HForm,
    x: &DistributionSpec,
    y: &DistributionSpec,
    scale: (f64, f64),
    a: f64,
    b: f64,
    s: u32,
    t: f64,
) -> Result<f64> {
    let (ex, ey) = scale;
    let u = a * t + b;
    let power = if form.uses_density() { s } else { s - 1 } as i32;
    if form.is_log() {
        let (ly, lx) = if form.uses_density() {
            (y.log_density(t), x.log_density(u))
        } else {
            (y.log_tail(t), x.log_tail(u))
        };
        if lx == f64::NEG_INFINITY || ly == f64::NEG_INFINITY {
            return Err(Error::ZeroDensity {
                x: if lx == f64::NEG_INFINITY { u } else { t },
            });
        }
        return Ok(ly - lx + (ex.ln() - power as f64 * a.ln() - ey.ln()));
    }
    let (vy, vx) = if form.uses_density() {
        (y.density(t), x.density(u))
    } else {
        (y.tail(t), x.tail(u))
    };
    // Divided by the sum of both terms: same sign, but tiny densities near 0
    // stay outside the absolute deadband of the scan.
    let (p, q) = (vy / ey, a.powi(power) * vx / ex);
    if p + q == 0.0 {
        return Ok(0.0);
    }
    Ok((p - q) / (p + q))
}

/// The final parts of `h` that `V_s` can show, given that `V_s` starts
/// with `start` (`None`: any start). Returns the longest one; every other
/// candidate is a contiguous piece of it.
fn longest_candidate(h: &SignPattern, start: Option<Sign>) -> SignPattern {
    let from = match start {
        None => 0,
        Some(s) => match h.signs.iter().position(|&v| v == s) {
            Some(i) => i,
            None => return SignPattern::empty(h.confidence),
        },
    };
    SignPattern {
        signs: h.signs[from..].to_vec(),
        witnesses: h.witnesses[from..].to_vec(),
        change_points: h.change_points[from.min(h.change_points.len())..].to_vec(),
        confidence: h.confidence,
    }
}

/// Sign pattern of the `form` function on `[max(0, -b/a), ∞)`.
fn h_pattern(
    form: HForm,
    x: &DistributionSpec,
    y: &DistributionSpec,
    scale: (f64, f64),
    horizons: (f64, f64),
    s: u32,
    a: f64,
    b: f64,
    grid: &GridSpec,
) -> Result<SignPattern> {
    let x0 = if b < 0.0 { -b / a } else { 0.0 };
    let (hx, hy) = horizons;
    let cfg = grid.scan_config((hy.max((hx - b) / a) - x0).clamp(1.0, WINDOW_CAP));
    let mut bps: Vec<f64> = y.breakpoints().iter().map(|p| p - x0).collect();
    bps.extend(x.breakpoints().iter().map(|p| (p - b) / a - x0));
    bps.retain(|p| *p > 0.0);
    let failure = std::sync::Mutex::new(None);
    let f = |t: f64| match h_value(form, x, y, scale, a, b, s, x0 + t) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        }
    };
    let result = scan(f, &cfg, &bps, None);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    match result {
        Ok(mut p) => {
            shift_pattern(&mut p, x0);
            Ok(p)
        }
        Err(Error::IndeterminateFunction) => Ok(SignPattern::empty(Confidence::Sampled)),
        Err(e) => Err(e),
    }
}

/// One cell of the H/P criterion: the patterns `V_s` may inherit from the
/// scanned function must all fit `+,-,+`.
fn h_cell(
    form: HForm,
    x: &DistributionSpec,
    y: &DistributionSpec,
    scale: (f64, f64),
    horizons: (f64, f64),
    s: u32,
    a: f64,
    b: f64,
    grid: &GridSpec,
) -> Result<Cell> {
    let allowed = seq("+,-,+");
    let h = match h_pattern(form, x, y, scale, horizons, s, a, b, grid) {
        Ok(h) => h,
        Err(e) => return classify_error(e, a, b),
    };
    // V_s(0) = 1 - T̄_{X,s}(b) > 0 for b > 0; for b < 0 the integral
    // representation starts at -b/a, where V_s < 0.
    let start = if b > 0.0 {
        Some(Sign::Plus)
    } else if b < 0.0 {
        Some(Sign::Minus)
    } else {
        None
    };
    let candidate = longest_candidate(&h, start);
    Ok(match judge(candidate, &allowed, a, b, "") {
        Cell::Fail(_) => Cell::Fail(Witness {
            a: Some(a),
            b: Some(b),
            function: format!("{}_{}", if form.is_log() { "P" } else { "H" }, form_index(form, s)),
            pattern: h,
        }),
        other => other,
    })
}

fn form_index(form: HForm, s: u32) -> String {
    if form.uses_density() {
        s.to_string()
    } else {
        format!("{}", s - 1)
    }
}

fn h_setup(x: &DistributionSpec, y: &DistributionSpec, s: u32) -> Result<((f64, f64), (f64, f64))> {
    let ex = x.raw_moment(s - 1)?;
    let ey = y.raw_moment(s - 1)?;
    let hx = x.horizon(HORIZON_MASS);
    let hy = y.horizon(HORIZON_MASS);
    Ok(((ex, ey), (hx.min(WINDOW_CAP), hy.min(WINDOW_CAP))))
}

/// The sufficient H/P criterion for the s-IFR order. `Supported` is
/// evidence for the order; `Refuted` means the criterion fails at the
/// witness cell, which does not by itself refute the order.
pub fn criterion_h(
    x: &DistributionSpec,
    y: &DistributionSpec,
    s: u32,
    grid: &GridSpec,
    form: HForm,
) -> Result<Verdict> {
    check_s(s)?;
    grid.validate()?;
    let (scale, horizons) = h_setup(x, y, s)?;
    let (outcome, scanned) = run_grid(&grid.cells(), |a, b| {
        h_cell(form, x, y, scale, horizons, s, a, b, grid)
    })?;
    Ok(Verdict {
        criterion: form.criterion(),
        s,
        outcome,
        cells_scanned: scanned,
        grid: Some(grid.clone()),
    })
}

/// [`newcrit_with`] using the `P_s` form.
pub fn newcrit(x: &DistributionSpec, y: &DistributionSpec, s: u32, grid: &GridSpec) -> Result<Verdict> {
    newcrit_with(x, y, s, grid, HForm::Ps)
}

/// s-IFR order from the s-IFRA order plus the `+,-,+` condition on cells
/// with `b > 0`. For exponential-polynomial pairs the second step scans
/// `V_s` itself; otherwise it applies the `form` criterion.
pub fn newcrit_with(
    x: &DistributionSpec,
    y: &DistributionSpec,
    s: u32,
    grid: &GridSpec,
    form: HForm,
) -> Result<Verdict> {
    let step1 = compare_ifra(x, y, s, grid)?;
    let first = step1.cells_scanned;
    let margin1 = match step1.outcome {
        Outcome::Supported { worst_margin, .. } => worst_margin,
        outcome => {
            return Ok(Verdict {
                criterion: Criterion::NewCrit,
                s,
                outcome,
                cells_scanned: first,
                grid: Some(grid.clone()),
            })
        }
    };
    let cells: Vec<(f64, f64)> = grid.cells().into_iter().filter(|&(_, b)| b > 0.0).collect();
    let (outcome, scanned) = if x.as_exppoly().is_some() && y.as_exppoly().is_some() {
        let pair = Pair::new(x, y, s)?;
        let allowed = seq("+,-,+");
        let name = v_name(s);
        run_grid(&cells, |a, b| match v_pattern(&pair, a, b, grid) {
            Ok(p) => Ok(judge(p, &allowed, a, b, &name)),
            Err(e) => classify_error(e, a, b),
        })?
    } else {
        let (scale, horizons) = h_setup(x, y, s)?;
        run_grid(&cells, |a, b| h_cell(form, x, y, scale, horizons, s, a, b, grid))?
    };
    let outcome = match outcome {
        Outcome::Supported { worst_margin, .. } => Outcome::Supported {
            cells_scanned: first + scanned,
            worst_margin: worst_margin.min(margin1),
        },
        other => other,
    };
    Ok(Verdict {
        criterion: Criterion::NewCrit,
        s,
        outcome,
        cells_scanned: first + scanned,
        grid: Some(grid.clone()),
    })
}

/// Re-evaluates `V_s` at the witness abscissae and reports whether each
/// shows the recorded sign. Non-finite abscissae are skipped.
pub fn verify_witness(x: &DistributionSpec, y: &DistributionSpec, s: u32, w: &Witness) -> Result<bool> {
    let (Some(a), Some(b)) = (w.a, w.b) else {
        return Err(Error::InvalidArgument("witness has no (a, b) cell".into()));
    };
    let pair = Pair::new(x, y, s)?;
    Ok(w.pattern
        .signs
        .iter()
        .zip(&w.pattern.witnesses)
        .filter(|(_, t)| t.is_finite())
        .all(|(&sign, &t)| {
            let v = pair.v(a, b, t);
            v != 0.0 && Sign::of(v) == sign
        }))
}

/// DMRL order: `d(u) = T̄_{Y,2}(T̄_{Y,1}^{-1}(u)) / T̄_{X,2}(T̄_{X,1}^{-1}(u))`
/// must be nonincreasing on `(0, 1)`.
///
/// With `x_Z = T̄_{Z,1}^{-1}(u)` the sign of `d'(u)` is that of
/// `E X f_X(x_X) T̄_{X,2}(x_X) - E Y f_Y(x_Y) T̄_{Y,2}(x_Y)`, which is what
/// gets scanned (`cfg.x_max` is replaced by 1).
pub fn compare_dmrl(x: &DistributionSpec, y: &DistributionSpec, cfg: &ScanConfig) -> Result<Verdict> {
    let tx = iterate(x, 2)?;
    let ty = iterate(y, 2)?;
    let (mx, my) = (x.mean(), y.mean());
    let mut cfg = *cfg;
    cfg.x_max = 1.0;
    cfg.x_min = cfg.x_min.min(1e-8);
    let failure = std::sync::Mutex::new(None);
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let (qx, qy) = match (x.tail_inverse(u), y.tail_inverse(u)) {
            (Ok(qx), Ok(qy)) => (qx, qy),
            (Err(e), _) | (_, Err(e)) => {
                failure.lock().unwrap().get_or_insert(e);
                return 0.0;
            }
        };
        mx * x.density(qx) * tx.eval(qx) - my * y.density(qy) * ty.eval(qy)
    };
    let result = scan(g, &cfg, &[], None);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let outcome = match result {
        Ok(p) if p.signs == [Sign::Minus] => Outcome::Supported {
            cells_scanned: 1,
            worst_margin: 0,
        },
        Ok(p) => Outcome::Refuted {
            witness: Witness {
                a: None,
                b: None,
                function: "d'".into(),
                pattern: p,
            },
        },
        Err(Error::IndeterminateFunction) => Outcome::Supported {
            cells_scanned: 1,
            worst_margin: 0,
        },
        Err(e @ (Error::NonFiniteValue { .. } | Error::TailUnderflow { .. })) => {
            Outcome::Inconclusive { reason: e.to_string() }
        }
        Err(e) => return Err(e),
    };
    Ok(Verdict {
        criterion: Criterion::Dmrl,
        s: 2,
        outcome,
        cells_scanned: 1,
        grid: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `c_s` convex: secant slopes nondecreasing.
    Convex,
    /// `c_s(x)/x` nondecreasing.
    StarShaped,
}

/// Relative tolerance on consecutive slopes (or ratios) in [`convexity_check`].
pub const CONVEXITY_TOL: f64 = 1e-8;

/// Points with `1 - T̄_{X,s}(x)` below this are skipped by [`transform_curve`]:
/// there the rounding of `T̄_{X,s}` near 1 swamps the increments of `c_s`.
pub const HEAD_MASS: f64 = 1e-6;

/// `c_s(x) = T̄_{Y,s}^{-1}(T̄_{X,s}(x))` on the grid of `cfg`, from where
/// `1 - T̄_{X,s}` reaches [`HEAD_MASS`] to where `T̄_{X,s}` drops below
/// [`HORIZON_MASS`].
pub fn transform_curve(
    x: &DistributionSpec,
    y: &DistributionSpec,
    s: u32,
    cfg: &ScanConfig,
) -> Result<Vec<(f64, f64)>> {
    check_s(s)?;
    cfg.validate()?;
    let tx = iterate(x, s)?;
    let ty = iterate(y, s)?;
    let xs: Vec<f64> = cfg
        .grid(&x.breakpoints())
        .into_iter()
        .skip_while(|&t| tx.cdf(t) < HEAD_MASS)
        .take_while(|&t| tx.eval(t) >= HORIZON_MASS)
        .collect();
    xs.par_iter()
        .map(|&t| {
            let p = tx.eval(t);
            let c = if s == 1 { y.tail_inverse(p)? } else { ty.inverse(p)? };
            Ok((t, c))
        })
        .collect()
}

/// Direct check that `c_s` is convex (s-IFR) or star-shaped (s-IFRA).
/// A refuting witness lists the abscissae where slopes (ratios) fall.
pub fn convexity_check(
    x: &DistributionSpec,
    y: &DistributionSpec,
    s: u32,
    cfg: &ScanConfig,
    shape: Shape,
) -> Result<Verdict> {
    let curve = transform_curve(x, y, s, cfg)?;
    if curve.len() < 3 {
        return Ok(Verdict {
            criterion: Criterion::Convexity,
            s,
            outcome: Outcome::Inconclusive {
                reason: "tail underflows before three grid points".into(),
            },
            cells_scanned: 1,
            grid: None,
        });
    }
    let slopes: Vec<(f64, f64)> = match shape {
        Shape::Convex => curve
            .windows(2)
            .map(|w| (w[1].0, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
            .collect(),
        Shape::StarShaped => curve.iter().map(|&(t, c)| (t, c / t)).collect(),
    };
    let mut pattern = SignPattern::empty(Confidence::Sampled);
    for w in slopes.windows(2) {
        let (m0, m1) = (w[0].1, w[1].1);
        let d = m1 - m0;
        if d.abs() <= CONVEXITY_TOL * (m0.abs() + m1.abs()) {
            continue;
        }
        let sign = Sign::of(d);
        if pattern.signs.is_empty() {
            pattern.push_first(sign, w[0].0);
        } else if pattern.signs.last() != Some(&sign) {
            let prev = *pattern.witnesses.last().unwrap();
            pattern.push_change((prev, w[0].0), sign, w[0].0);
        }
    }
    let outcome = if pattern.signs.contains(&Sign::Minus) {
        Outcome::Refuted {
            witness: Witness {
                a: None,
                b: None,
                function: match shape {
                    Shape::Convex => format!("c_{s}'"),
                    Shape::StarShaped => format!("c_{s}/x"),
                },
                pattern,
            },
        }
    } else {
        Outcome::Supported {
            cells_scanned: 1,
            worst_margin: 0,
        }
    };
    Ok(Verdict {
        criterion: Criterion::Convexity,
        s,
        outcome,
        cells_scanned: 1,
        grid: None,
    })
}

/// Orders of `X` against `Exponential{1}` next to the ageing classes they
/// must agree with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub s: u32,
    pub ifr_class: MonotoneClass,
    pub ifra_class: MonotoneClass,
    /// `X <=_{s-IFR} Exp`, iff `X` is s-IFR.
    pub below_exp_ifr: Verdict,
    /// `Exp <=_{s-IFR} X`, iff `X` is s-DFR.
    pub above_exp_ifr: Verdict,
    pub below_exp_ifra: Verdict,
    pub above_exp_ifra: Verdict,
    /// Descriptions of every conclusive order verdict contradicting the
    /// classifier.
    pub discrepancies: Vec<String>,
}

impl ReferenceReport {
    pub fn agrees(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Cells probing `X` against `Exponential{1}`, from 24 quantiles `t_i` of
/// the iterate and `L = -ln T̄_{X,s}`: slopes `L(t)/t` and their
/// reciprocals (rays through the origin, for the s-IFRA order) and the
/// chords of `L` between nearby quantiles, which cross `L` wherever it fails
/// to be convex (concave). Returns `(slopes, cells below, cells above)`
/// for `X <= Exp` and `Exp <= X`.
fn reference_cells(x: &DistributionSpec, s: u32) -> Result<(Vec<f64>, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let it = iterate(x, s)?;
    let mut points = Vec::new();
    for p in GridSpec::log_points(1e-8, 0.9, 24) {
        let t = it.inverse(p)?;
        if t > 0.0 {
            points.push((t, -p.ln()));
        }
    }
    let mut slopes = Vec::new();
    for &(t, l) in &points {
        slopes.extend([l / t, t / l]);
    }
    let (mut below, mut above) = (Vec::new(), Vec::new());
    for i in 0..points.len() {
        for step in [1, 2, 4] {
            let Some(&(tj, lj)) = points.get(i + step) else { continue };
            let (ti, li) = points[i];
            let m = (lj - li) / (tj - ti);
            if !(m.is_finite() && m > 0.0) {
                continue;
            }
            above.push((m, li - m * ti));
            let a = 1.0 / m;
            below.push((a, ti - a * li));
        }
    }
    slopes.retain(|v| v.is_finite() && *v > 0.0);
    Ok((slopes, below, above))
}

/// Compares `X` with `Exponential{1}` in both directions and cross-checks the
/// outcome against [`classify_ifr`] and [`classify_ifra`].
pub fn exponential_reference(
    x: &DistributionSpec,
    s: u32,
    cfg: &ScanConfig,
    grid: &GridSpec,
) -> Result<ReferenceReport> {
    let e = DistributionSpec::exponential(1.0)?;
    let ifr_class = classify_ifr(x, s, cfg)?;
    let ifra_class = classify_ifra(x, s, cfg)?;
    let (slopes, below, above) = reference_cells(x, s)?;
    let mut rays = grid.clone().with_b(vec![0.0]);
    for a in slopes {
        rays = rays.with_a(a);
    }
    let below_exp_ifr = compare_ifr(x, &e, s, &grid.clone().with_extra(below))?;
    let above_exp_ifr = compare_ifr(&e, x, s, &grid.clone().with_extra(above))?;
    let below_exp_ifra = compare_ifra(x, &e, s, &rays)?;
    let above_exp_ifra = compare_ifra(&e, x, s, &rays)?;
    let mut discrepancies = Vec::new();
    let mut check = |name: &str, v: &Verdict, class: &MonotoneClass, want: MonotoneVerdict| {
        if v.is_inconclusive() {
            return;
        }
        let class_says = class.verdict == want || class.verdict == MonotoneVerdict::Constant;
        if v.is_supported() != class_says {
            discrepancies.push(format!(
                "{name}: order check {} but classifier says {}",
                v.label(),
                class.label()
            ));
        }
    };
    check("X <= Exp (s-IFR)", &below_exp_ifr, &ifr_class, MonotoneVerdict::Increasing);
    check("Exp <= X (s-IFR)", &above_exp_ifr, &ifr_class, MonotoneVerdict::Decreasing);
    check("X <= Exp (s-IFRA)", &below_exp_ifra, &ifra_class, MonotoneVerdict::Increasing);
    check("Exp <= X (s-IFRA)", &above_exp_ifra, &ifra_class, MonotoneVerdict::Decreasing);
    Ok(ReferenceReport {
        s,
        ifr_class,
        ifra_class,
        below_exp_ifr,
        above_exp_ifr,
        below_exp_ifra,
        above_exp_ifra,
        discrepancies,
    })
}

/// Smallest value of `U_s(x) = T̄_{X,s}(x) - T̄_{Y,s}(x)` over the grid of
/// `cfg`, with its abscissa.
pub fn tail_dominance(
    x: &DistributionSpec,
    y: &DistributionSpec,
    s: u32,
    cfg: &ScanConfig,
) -> Result<(f64, f64)> {
    check_s(s)?;
    cfg.validate()?;
    let tx = iterate(x, s)?;
    let ty = iterate(y, s)?;
    let mut bps = x.breakpoints();
    bps.extend(y.breakpoints());
    let worst = cfg
        .grid(&bps)
        .into_par_iter()
        .map(|t| (tx.eval(t) - ty.eval(t), t))
        .reduce(|| (f64::INFINITY, f64::NAN), |p, q| if q.0 < p.0 { q } else { p });
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    fn small(n_a: usize) -> GridSpec {
        GridSpec {
            a: GridSpec::log_points(0.2, 5.0, n_a),
            b: vec![-1.0, 0.0, 0.5, 2.0],
            initial_grid: 128,
            deadband: EXACT_DEADBAND,
            x_max: None,
            extra: Vec::new(),
        }
    }

    #[test]
    fn reflexive_exponential() {
        let e = d("exp(1)");
        for s in 1..=3 {
            let v = compare_ifr(&e, &e, s, &small(5)).unwrap();
            assert!(v.is_supported(), "{v:?}");
            assert!(compare_ifra(&e, &e, s, &small(5)).unwrap().is_supported());
        }
    }

    #[test]
    fn h_form_round_trip() {
        for h in HForm::ALL {
            assert_eq!(h.to_string().parse::<HForm>().unwrap(), h);
        }
        assert!("q".parse::<HForm>().is_err());
    }

    #[test]
    fn grid_rejects_nonpositive_slopes() {
        assert!(GridSpec::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(GridSpec::new(vec![1.0], vec![f64::NAN]).is_err());
        let g = GridSpec::default_ifr(&d("exp(1)"), &d("exp(2)"));
        assert_eq!(g.a.len(), 64);
        assert_eq!(g.b.len(), 16 + 33);
        assert!(g.b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parallel_system_ifra_exact() {
        let v = compare_ifra(&d("maxexp(1,1)"), &d("maxexp(1,2)"), 3, &small(9)).unwrap();
        assert!(v.is_supported(), "{v:?}");
    }

    #[test]
    fn negative_shift_prefix() {
        let pair = Pair::new(&d("maxexp(1,1)"), &d("maxexp(1,2)"), 1).unwrap();
        let g = small(3);
        let p = v_pattern(&pair, 1.0, -1.0, &g).unwrap();
        assert_eq!(p.signs[0], Sign::Minus);
        assert!(p.witnesses[0] < 1.0);
    }

    #[test]
    fn criterion_forms_agree_on_gamma() {
        let (x, y) = (d("gamma(3,1)"), d("gamma(2,1)"));
        let g = small(6);
        let p = criterion_h(&x, &y, 1, &g, HForm::Ps).unwrap();
        let h = criterion_h(&x, &y, 1, &g, HForm::Hs).unwrap();
        assert!(p.is_supported(), "{p:?}");
        assert_eq!(p.label(), h.label());
    }

    #[test]
    fn dmrl_reflexive_and_bp() {
        let cfg = ScanConfig::default();
        let x = d("bpareto(5,10)");
        assert!(compare_dmrl(&x, &x, &cfg).unwrap().is_supported());
        assert!(compare_dmrl(&x, &d("bpareto(2,6)"), &cfg).unwrap().is_supported());
    }

    #[test]
    fn identity_transform_is_convex() {
        let x = d("gamma(2,1)");
        let cfg = ScanConfig::with_x_max(30.0);
        for shape in [Shape::Convex, Shape::StarShaped] {
            assert!(convexity_check(&x, &x, 2, &cfg, shape).unwrap().is_supported());
        }
    }

    #[test]
    fn bp_transform_shapes() {
        let (x, y) = (d("bpareto(5,10)"), d("bpareto(2,6)"));
        let cfg = ScanConfig::with_x_max(1e4);
        assert!(convexity_check(&x, &y, 1, &cfg, Shape::Convex).unwrap().is_supported());
        let v = convexity_check(&x, &y, 2, &cfg, Shape::Convex).unwrap();
        let w = v.witness().expect("c_2 is not convex");
        let it = iterate(&x, 2).unwrap();
        let i = w.pattern.signs.iter().position(|&s| s == Sign::Minus).unwrap();
        let u = it.eval(w.pattern.witnesses[i]);
        assert!(u > 0.6 && u < 1.0, "{u}");
    }

    #[test]
    fn refuted_witness_rechecks() {
        let (x, y) = (d("maxexp(1,2)"), d("exp(1)"));
        // -ln T̄_{X,2}(x)/x peaks near 1.047, so only slopes in (0.955, 1)
        // expose the violation.
        let g = GridSpec::new(vec![0.9, 0.98], vec![0.0]).unwrap();
        let v = compare_ifra(&x, &y, 2, &g).unwrap();
        let w = v.witness().expect("maxexp(1,2) is not 2-IFRA");
        assert_eq!(w.pattern.seq(), seq("-,+,-"));
        assert_eq!(w.a, Some(0.98));
        assert!(verify_witness(&x, &y, 2, w).unwrap());
    }

    #[test]
    fn dominance_of_homogeneous_system() {
        let (u, _) = tail_dominance(&d("maxexp(1,1)"), &d("maxexp(1,2)"), 2, &ScanConfig::default()).unwrap();
        assert!(u >= -1e-12);
    }

    #[test]
    fn reference_checks_agree_with_classifier() {
        let cfg = ScanConfig::default();
        let g = GridSpec {
            a: GridSpec::log_points(0.2, 5.0, 8),
            b: vec![-1.0, 0.0, 1.0],
            initial_grid: 128,
            deadband: EXACT_DEADBAND,
            x_max: None,
            extra: Vec::new(),
        };
        let r = exponential_reference(&d("maxexp(1,2)"), 2, &cfg, &g).unwrap();
        assert!(!r.below_exp_ifra.is_supported() && !r.above_exp_ifra.is_supported());
        assert!(r.agrees(), "{:?}", r.discrepancies);
        let r = exponential_reference(&d("polyexp(1)"), 2, &cfg, &g).unwrap();
        assert!(r.ifr_class.is_increasing());
        assert!(r.below_exp_ifr.is_supported());
        assert!(r.agrees(), "{:?}", r.discrepancies);
    }
}
