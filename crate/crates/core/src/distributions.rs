//! Lifetime distributions on `[0, ∞)`.
//!
//! Every variant has `F(0) = 0`; tails are extended by `1` to negative
//! arguments, which is the convention the iterated tails rely on.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::quad::{integrate, integrate_semi_infinite, QuadOptions};

/// Density of a [`Family::NumericDensity`] variant.
pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct NumericDensity {
    pub label: String,
    density: DensityFn,
    /// Truncation point; the density is treated as zero beyond it.
    pub x_max: f64,
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for NumericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericDensity")
            .field("label", &self.label)
            .field("x_max", &self.x_max)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Survival `c1²/(x+c1)²` on `[0, c1)` and `(c1+c2)²/(4(x+c2)²)` beyond.
    BranchedPareto { c1: f64, c2: f64 },
    /// Density `(x² + c) e^{-x} / (c + 2)`.
    PolyExpExample { c: f64 },
    /// Maximum of independent exponentials; rates sorted ascending.
    MaxExp { rates: Vec<f64> },
    /// Survival given directly as an exponential polynomial.
    ExpPolyTail { tail: ExpPoly },
    NumericDensity(NumericDensity),
}

/// A validated lifetime distribution.
#[derive(Debug, Clone)]
pub struct DistributionSpec {
    family: Family,
    /// Survival function as an exponential polynomial, when it is one.
    expansion: Option<ExpPoly>,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::param(name, v, "must be finite and > 0"))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let rate = positive("rate", rate)?;
        Ok(Self {
            family: Family::Exponential { rate },
            expansion: Some(ExpPoly::single(1.0, rate)?),
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Gamma {
                shape: positive("shape", shape)?,
                scale: positive("scale", scale)?,
            },
            expansion: None,
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            family: Family::Weibull {
                shape: positive("shape", shape)?,
                scale: positive("scale", scale)?,
            },
            expansion: None,
        })
    }

    pub fn branched_pareto(c1: f64, c2: f64) -> Result<Self> {
        Ok(Self {
            family: Family::BranchedPareto {
                c1: positive("c1", c1)?,
                c2: positive("c2", c2)?,
            },
            expansion: None,
        })
    }

    pub fn poly_exp_example(c: f64) -> Result<Self> {
        Ok(Self {
            family: Family::PolyExpExample { c: positive("c", c)? },
            expansion: None,
        })
    }

    /// Lifetime of a parallel system with independent exponential
    /// components. Repeated rates are allowed.
    pub fn max_exp(rates: &[f64]) -> Result<Self> {
        if rates.len() < 2 {
            return Err(Error::InvalidDistribution(
                "maxexp needs at least two component rates".into(),
            ));
        }
        if rates.len() > 20 {
            return Err(Error::InvalidDistribution(
                "maxexp supports at most 20 components".into(),
            ));
        }
        let mut sorted = Vec::with_capacity(rates.len());
        for &r in rates {
            sorted.push(positive("rate", r)?);
        }
        sorted.sort_by(f64::total_cmp);
        let expansion = max_exp_expansion(&sorted)?;
        Ok(Self {
            family: Family::MaxExp { rates: sorted },
            expansion: Some(expansion),
        })
    }

    /// A distribution whose survival function is `tail`. Requires
    /// `tail(0) = 1` and a nonnegative density.
    pub fn exppoly_tail(tail: ExpPoly) -> Result<Self> {
        let at0 = tail.eval(0.0);
        if (at0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "exponential-polynomial tail must equal 1 at 0, got {at0}"
            )));
        }
        let density = tail.differentiate(1);
        let horizon = 60.0 / tail.min_rate();
        for i in 0..=400 {
            let x = horizon * i as f64 / 400.0;
            let (scaled, magnitude) = density.eval_scaled(x);
            if scaled > 1e-12 * magnitude.max(1.0) {
                return Err(Error::InvalidDistribution(format!(
                    "exponential-polynomial tail increases near x = {x}"
                )));
            }
        }
        Ok(Self {
            expansion: Some(tail.clone()),
            family: Family::ExpPolyTail { tail },
        })
    }

    /// A distribution given by its density on `[0, x_max]`. The density must
    /// integrate to 1 (within 1e-8) and be nonnegative; the tail mass beyond
    /// `x_max` is taken to be negligible.
    pub fn numeric_density(
        label: impl Into<String>,
        density: DensityFn,
        x_max: f64,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        let x_max = positive("x_max", x_max)?;
        let mut bps: Vec<f64> = breakpoints;
        if bps.iter().any(|b| !(b.is_finite() && *b > 0.0 && *b < x_max)) {
            return Err(Error::InvalidDistribution(
                "numeric density breakpoints must lie in (0, x_max)".into(),
            ));
        }
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        for i in 0..=1000 {
            let x = x_max * i as f64 / 1000.0;
            let v = density(x);
            if !(v >= 0.0 && v.is_finite()) && !(i == 0 && v == f64::INFINITY) {
                return Err(Error::InvalidDistribution(format!(
                    "numeric density is negative or not finite at x = {x}"
                )));
            }
        }
        let mass = integrate(|x| density(x), 0.0, x_max, &bps, &QuadOptions::default()).value;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDistribution(format!(
                "numeric density integrates to {mass}, expected 1"
            )));
        }
        Ok(Self {
            family: Family::NumericDensity(NumericDensity {
                label: label.into(),
                density,
                x_max,
                breakpoints: bps,
            }),
            expansion: None,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Survival function as an exponential polynomial (exponential, max of
    /// exponentials and explicit exponential-polynomial tails).
    pub fn as_exppoly(&self) -> Option<&ExpPoly> {
        self.expansion.as_ref()
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.family, Family::Exponential { .. })
    }

    /// `f_X(x)`; zero for `x < 0`. Right-continuous at breakpoints.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => rate * (-rate * x).exp(),
            Family::Gamma { shape, scale } => {
                if x == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                self.log_density(x).exp()
            }
            Family::Weibull { shape, scale } => {
                let z = x / scale;
                if x == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
            Family::BranchedPareto { c1, c2 } => {
                if x < *c1 {
                    2.0 * c1 * c1 / (x + c1).powi(3)
                } else {
                    (c1 + c2).powi(2) / (2.0 * (x + c2).powi(3))
                }
            }
            Family::PolyExpExample { c } => (x * x + c) * (-x).exp() / (c + 2.0),
            Family::MaxExp { rates } => {
                // d/dx Π(1 - e^{-λ_i x}), product rule.
                let mut total = 0.0;
                for (i, &li) in rates.iter().enumerate() {
                    let mut term = li * (-li * x).exp();
                    for (j, &lj) in rates.iter().enumerate() {
                        if j != i {
                            term *= -(-lj * x).exp_m1();
                        }
                    }
                    total += term;
                }
                total
            }
            Family::ExpPolyTail { tail } => -tail.differentiate(1).eval(x),
            Family::NumericDensity(nd) => {
                if x > nd.x_max {
                    0.0
                } else {
                    (nd.density)(x)
                }
            }
        }
    }

    /// `ln f_X(x)`, computed without forming tiny densities where possible.
    pub fn log_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.family {
            Family::Exponential { rate } => rate.ln() - rate * x,
            Family::Gamma { shape, scale } => {
                if x == 0.0 {
                    return self.density(0.0).ln();
                }
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(*shape) - shape * scale.ln()
            }
            Family::Weibull { shape, scale } => {
                if x == 0.0 {
                    return self.density(0.0).ln();
                }
                let z = x / scale;
                (shape / scale).ln() + (shape - 1.0) * z.ln() - z.powf(*shape)
            }
            Family::PolyExpExample { c } => (x * x + c).ln() - x - (c + 2.0).ln(),
            _ => self.density(x).ln(),
        }
    }

    /// Survival function `T̄_{X,1}(x) = P(X > x)`; exactly 1 for `x < 0`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::Gamma { shape, scale } => gamma_ur(*shape, x / scale),
            Family::Weibull { shape, scale } => (-(x / scale).powf(*shape)).exp(),
            Family::BranchedPareto { c1, c2 } => {
                if x < *c1 {
                    c1 * c1 / (x + c1).powi(2)
                } else {
                    (c1 + c2).powi(2) / (4.0 * (x + c2).powi(2))
                }
            }
            Family::PolyExpExample { c } => (-x).exp() * (x * x + 2.0 * x + 2.0 + c) / (c + 2.0),
            Family::MaxExp { .. } | Family::ExpPolyTail { .. } => {
                let v = self.expansion.as_ref().expect("expansion present").eval(x);
                v.clamp(0.0, 1.0)
            }
            Family::NumericDensity(nd) => {
                if x >= nd.x_max {
                    return 0.0;
                }
                let r = integrate(|t| (nd.density)(t), x, nd.x_max, &nd.breakpoints, &QuadOptions::default());
                r.value.clamp(0.0, 1.0)
            }
        }
    }

    /// `ln T̄_{X,1}(x)`.
    pub fn log_tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => -rate * x,
            Family::Weibull { shape, scale } => -(x / scale).powf(*shape),
            Family::PolyExpExample { c } => -x + ((x * x + 2.0 * x + 2.0 + c) / (c + 2.0)).ln(),
            _ => self.tail(x).ln(),
        }
    }

    /// Distribution function, evaluated without cancellation near 0.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => -(-rate * x).exp_m1(),
            Family::Gamma { shape, scale } => gamma_lr(*shape, x / scale),
            Family::Weibull { shape, scale } => -(-(x / scale).powf(*shape)).exp_m1(),
            Family::MaxExp { rates } => rates.iter().map(|&l| -(-l * x).exp_m1()).product(),
            Family::NumericDensity(nd) => {
                let upper = x.min(nd.x_max);
                integrate(|t| (nd.density)(t), 0.0, upper, &nd.breakpoints, &QuadOptions::default())
                    .value
                    .clamp(0.0, 1.0)
            }
            _ => 1.0 - self.tail(x),
        }
    }

    /// `E X^k`.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let kf = k as f64;
        Ok(match &self.family {
            Family::Exponential { rate } => factorial(k) / rate.powi(k as i32),
            Family::Gamma { shape, scale } => {
                (0..k).map(|i| shape + i as f64).product::<f64>() * scale.powi(k as i32)
            }
            Family::Weibull { shape, scale } => scale.powi(k as i32) * gamma(1.0 + kf / shape),
            Family::BranchedPareto { c1, c2 } => {
                if k == 1 {
                    (3.0 * c1 + c2) / 4.0
                } else {
                    return Err(Error::InfiniteMoment {
                        family: self.to_string(),
                        order: k,
                    });
                }
            }
            Family::PolyExpExample { c } => (factorial(k + 2) + c * factorial(k)) / (c + 2.0),
            Family::MaxExp { .. } | Family::ExpPolyTail { .. } => {
                let p = self.expansion.as_ref().expect("expansion present");
                // Density Σ α λ e^{-λx} gives E X^k = k! Σ α / λ^k.
                factorial(k) * crate::exppoly::neumaier(p.terms().iter().map(|t| t.coef / t.rate.powi(k as i32)))
            }
            Family::NumericDensity(nd) => {
                integrate(
                    |t| t.powi(k as i32) * (nd.density)(t),
                    0.0,
                    nd.x_max,
                    &nd.breakpoints,
                    &QuadOptions::default(),
                )
                .value
            }
        })
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1).expect("every family has a finite mean")
    }

    /// `x` with `T̄(x) = p`, for `0 < p <= 1`.
    pub fn tail_inverse(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param("p", p, "must lie in (0, 1]"));
        }
        if p == 1.0 {
            return Ok(0.0);
        }
        Ok(match &self.family {
            Family::Exponential { rate } => -p.ln() / rate,
            Family::Weibull { shape, scale } => scale * (-p.ln()).powf(1.0 / shape),
            Family::BranchedPareto { c1, c2 } => {
                if p <= 0.25 {
                    (c1 + c2) / (2.0 * p.sqrt()) - c2
                } else {
                    c1 / p.sqrt() - c1
                }
            }
            _ => bisect_decreasing(|x| self.tail(x), p, self.mean().max(1e-3)),
        })
    }

    /// Non-smooth points of density or tail, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::BranchedPareto { c1, .. } => vec![*c1],
            Family::NumericDensity(nd) => nd.breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// Point beyond which the tail mass is at most `mass`.
    pub fn horizon(&self, mass: f64) -> f64 {
        match &self.family {
            Family::NumericDensity(nd) => nd.x_max,
            _ => self.tail_inverse(mass.clamp(1e-300, 1.0)).unwrap_or(f64::INFINITY),
        }
    }

    /// Distribution of `k X` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let k = positive("k", k)?;
        match &self.family {
            Family::Exponential { rate } => Self::exponential(rate / k),
            Family::Gamma { shape, scale } => Self::gamma(*shape, scale * k),
            Family::Weibull { shape, scale } => Self::weibull(*shape, scale * k),
            Family::BranchedPareto { c1, c2 } => Self::branched_pareto(c1 * k, c2 * k),
            Family::MaxExp { rates } => {
                Self::max_exp(&rates.iter().map(|r| r / k).collect::<Vec<_>>())
            }
            Family::ExpPolyTail { tail } => {
                let scaled = ExpPoly::new(tail.terms().iter().map(|t| (t.coef, t.rate / k)))?;
                Self::exppoly_tail(scaled)
            }
            Family::PolyExpExample { .. } | Family::NumericDensity(_) => {
                let base = self.clone();
                let x_max = match &self.family {
                    Family::NumericDensity(nd) => nd.x_max * k,
                    _ => self.horizon(1e-15) * k,
                };
                let bps = self.breakpoints().iter().map(|b| b * k).collect();
                Self::numeric_density(
                    format!("{}*{}", k, self),
                    Arc::new(move |x| base.density(x / k) / k),
                    x_max,
                    bps,
                )
            }
        }
    }

    /// Decay length used to map semi-infinite integrals onto the unit
    /// interval.
    pub(crate) fn length_scale(&self) -> f64 {
        match &self.family {
            Family::BranchedPareto { c1, c2 } => c1.max(*c2),
            _ => self.mean(),
        }
    }

    /// `∫_x^∞ f(t) (t - x)^k dt` by quadrature.
    pub(crate) fn partial_moment_quadrature(&self, k: u32, x: f64) -> f64 {
        let x = x.max(0.0);
        let opts = QuadOptions::default();
        let bps = self.breakpoints();
        let integrand = |t: f64| {
            let d = self.density(t);
            if d == 0.0 {
                0.0
            } else {
                d * (t - x).powi(k as i32)
            }
        };
        match &self.family {
            Family::NumericDensity(nd) => {
                integrate(integrand, x, nd.x_max, &bps, &opts).value
            }
            _ => integrate_semi_infinite(integrand, x, self.length_scale(), &bps, &opts).value,
        }
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Solves `g(x) = p` for a nonincreasing `g` with `g(0) >= p`, to machine
/// precision in `x`.
pub(crate) fn bisect_decreasing<G: Fn(f64) -> f64>(g: G, p: f64, scale: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = scale;
    let mut guard = 0;
    while g(hi) > p && guard < 2000 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `1 - Π(1 - e^{-λ_i x})` expanded by inclusion–exclusion, merging equal
/// exponents.
fn max_exp_expansion(rates: &[f64]) -> Result<ExpPoly> {
    let n = rates.len();
    let mut terms = Vec::with_capacity((1 << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let mut rate = 0.0;
        for (i, r) in rates.iter().enumerate() {
            if mask & (1 << i) != 0 {
                rate += r;
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        terms.push((sign, rate));
    }
    ExpPoly::new(terms)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Exponential { rate } => write!(f, "exp({rate})"),
            Family::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
            Family::Weibull { shape, scale } => write!(f, "weibull({shape},{scale})"),
            Family::BranchedPareto { c1, c2 } => write!(f, "bpareto({c1},{c2})"),
            Family::PolyExpExample { c } => write!(f, "polyexp({c})"),
            Family::MaxExp { rates } => {
                f.write_str("maxexp(")?;
                for (i, r) in rates.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{r}")?;
                }
                f.write_str(")")
            }
            Family::ExpPolyTail { tail } => write!(f, "exppoly({tail})"),
            Family::NumericDensity(nd) => write!(f, "numeric({})", nd.label),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `name(arg, ...)` literals: `exp(λ)`, `gamma(α,θ)`,
    /// `weibull(α,θ)`, `bpareto(c1,c2)`, `polyexp(c)`, `maxexp(λ1,...,λn)`
    /// and `exppoly(<sum of coef*e(-rate) terms>)`. Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let open = text
            .find('(')
            .ok_or_else(|| Error::parse(&text, "expected `name(parameters)`"))?;
        if !text.ends_with(')') {
            return Err(Error::parse(&text, "missing closing parenthesis"));
        }
        let name = text[..open].to_ascii_lowercase();
        let body = &text[open + 1..text.len() - 1];
        if name == "exppoly" {
            return Self::exppoly_tail(body.parse()?);
        }
        let args = body
            .split(',')
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(tok, "expected a decimal number"))
            })
            .collect::<Result<Vec<f64>>>()?;
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    &text,
                    format!("`{name}` takes {n} parameter(s), got {}", args.len()),
                ))
            }
        };
        match name.as_str() {
            "exp" | "exponential" => {
                want(1)?;
                Self::exponential(args[0])
            }
            "gamma" => {
                want(2)?;
                Self::gamma(args[0], args[1])
            }
            "weibull" => {
                want(2)?;
                Self::weibull(args[0], args[1])
            }
            "bpareto" => {
                want(2)?;
                Self::branched_pareto(args[0], args[1])
            }
            "polyexp" => {
                want(1)?;
                Self::poly_exp_example(args[0])
            }
            "maxexp" => Self::max_exp(&args),
            _ => Err(Error::parse(&name, "unknown distribution family")),
        }
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
