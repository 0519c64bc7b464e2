//! Registry of worked examples and counter-examples with their expected
//! outcomes. Every case carries its own frozen grid and scan window, so a
//! change of library defaults cannot move an expectation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ageing::{classify_ifr, classify_ifra, dfr_onset, holder_bounds, window_for};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::iteration::iterate;
use crate::ordering::{
    compare_dmrl, compare_ifr, compare_ifra, convexity_check, criterion_h, newcrit, tail_dominance, GridSpec,
    HForm, Shape, Verdict,
};
use crate::signscan::{seq, ScanConfig, Sign};

/// One expectation of a case and what was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub statement: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub results: Vec<CaseResult>,
    pub passed: usize,
    pub failed: usize,
    pub runtime_ms: u128,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

pub struct Case {
    pub id: &'static str,
    /// The mathematical statement the case exercises.
    pub statement: &'static str,
    run: fn(&mut Checks) -> Result<()>,
}

/// Registered cases in a fixed order.
pub const CASES: &[Case] = &[
    Case {
        id: "EX_POLYEXP",
        statement: "f(x) = (x^2 + c) e^{-x} / (2 + c) is neither 1-IFR nor 1-IFRA but is 2-IFR",
        run: ex_polyexp,
    },
    Case {
        id: "MAXEXP_HEREDITY_FAIL",
        statement: "max of Exp(1) and Exp(2) is 1-IFRA but neither 2-IFRA nor 2-DFRA",
        run: maxexp_heredity_fail,
    },
    Case {
        id: "MAXEXP_DFR_ONSET",
        statement: "max of Exp(1) and Exp(2) is s-DFR from s = 5 on, where Q(0) first turns negative",
        run: maxexp_dfr_onset,
    },
    Case {
        id: "BP_COUNTEREXAMPLE",
        statement: "BP(5,10) <= BP(2,6) in the 1-IFR and DMRL orders but not in the 2-IFR order",
        run: bp_counterexample,
    },
    Case {
        id: "WEIBULL_LE_GAMMA",
        statement: "Weibull(a,1) <= Gamma(a,1) in the s-IFR order for a > 1",
        run: weibull_le_gamma,
    },
    Case {
        id: "GAMMA_FAMILY",
        statement: "Gamma(a',1) <= Gamma(a,1) in the s-IFR order for a' > a > 0",
        run: gamma_family,
    },
    Case {
        id: "WEIBULL_FAMILY",
        statement: "Weibull(a',1) <= Weibull(a,1) in the s-IFR order for a' > a > 0",
        run: weibull_family,
    },
    Case {
        id: "PARALLEL_TAIL_DOM",
        statement: "homogeneous two-component parallel system dominates the heterogeneous one in every iterated tail",
        run: parallel_tail_dom,
    },
    Case {
        id: "PARALLEL_IFRA",
        statement: "homogeneous parallel system <= heterogeneous one in the s-IFRA order",
        run: parallel_ifra,
    },
    Case {
        id: "PARALLEL_IFR",
        statement: "homogeneous parallel system <= heterogeneous one in the s-IFR order",
        run: parallel_ifr,
    },
    Case {
        id: "PARALLEL_HOMOG_CLOSURE",
        statement: "the maximum of n iid 1-IFR lifetimes is s-IFR for every s",
        run: parallel_homog_closure,
    },
    Case {
        id: "ORDER_STATS_CHAIN",
        statement: "maxima of iid unit exponentials: X_(m) <= X_(k) in the 1-IFR order for k < m",
        run: order_stats_chain,
    },
    Case {
        id: "KX_CONJECTURE_CE",
        statement: "parallel systems with rates (408,1200)/1474 and (134,1474)/1474 are not 2-IFRA ordered",
        run: kx_conjecture_ce,
    },
    Case {
        id: "KX_CONJECTURE_CE_LITERAL",
        statement: "parallel systems with rates (0.34,1) and (1,11): V_2 has pattern -,+,- at a = 2.89",
        run: kx_conjecture_ce_literal,
    },
    Case {
        id: "HOLDER_BOUNDS",
        statement: "residual moments of s-IFR (s-DFR) laws obey the sharpened log-convexity bounds",
        run: holder_bounds_case,
    },
];

/// `(id, statement)` for every registered case.
pub fn coverage() -> Vec<(&'static str, &'static str)> {
    CASES.iter().map(|c| (c.id, c.statement)).collect()
}

pub fn run_case(id: &str) -> Result<CaseResult> {
    let case = CASES
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownCase(id.to_string()))?;
    let mut checks = Checks::default();
    (case.run)(&mut checks)?;
    Ok(CaseResult {
        id: case.id.to_string(),
        statement: case.statement.to_string(),
        passed: checks.0.iter().all(|c| c.passed),
        checks: checks.0,
    })
}

pub fn run_all() -> Result<Summary> {
    let start = Instant::now();
    let results: Vec<CaseResult> = CASES.par_iter().map(|c| run_case(c.id)).collect::<Result<_>>()?;
    let passed = results.iter().filter(|r| r.passed).count();
    Ok(Summary {
        failed: results.len() - passed,
        passed,
        results,
        runtime_ms: start.elapsed().as_millis(),
    })
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>, passed: bool) {
        self.0.push(Check {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            passed,
            verdict: None,
        });
    }

    fn verdict(&mut self, name: impl Into<String>, expected: &str, v: Verdict) {
        let observed = match v.witness() {
            Some(w) => format!("{} ({} = {})", v.label(), w.function, w.pattern),
            None => v.label().to_string(),
        };
        self.0.push(Check {
            name: name.into(),
            expected: expected.to_string(),
            passed: v.label() == expected,
            observed,
            verdict: Some(v),
        });
    }

    fn class(&mut self, name: impl Into<String>, expected: &str, observed: &str) {
        self.push(name, expected, observed, expected == observed);
    }
}

fn d(literal: &str) -> Result<DistributionSpec> {
    literal.parse()
}

/// Frozen `(a, b)` grid: `n_a` log-spaced slopes on `[0.05, 20]`, `b = 0`,
/// `n_pos` shifts up to `b_pos` and `n_neg` shifts down to `-b_neg`, both
/// spaced quadratically.
fn frozen(n_a: usize, b_pos: f64, n_pos: usize, b_neg: f64, n_neg: usize) -> GridSpec {
    let mut b: Vec<f64> = (1..=n_neg).rev().map(|j| -b_neg * (j as f64 / n_neg as f64).powi(2)).collect();
    b.push(0.0);
    b.extend((1..=n_pos).map(|j| b_pos * (j as f64 / n_pos as f64).powi(2)));
    GridSpec {
        a: GridSpec::log_points(0.05, 20.0, n_a),
        b,
        initial_grid: 512,
        deadband: 1e-11,
        x_max: None,
        extra: Vec::new(),
    }
}

fn ex_polyexp(c: &mut Checks) -> Result<()> {
    let x = d("polyexp(1)")?;
    let cfg = ScanConfig::with_x_max(60.0);
    c.class("1-IFR", "non-monotone", classify_ifr(&x, 1, &cfg)?.label());
    c.class("1-IFRA", "non-monotone", classify_ifra(&x, 1, &cfg)?.label());
    c.class("2-IFR", "increasing", classify_ifr(&x, 2, &cfg)?.label());
    Ok(())
}

fn maxexp_heredity_fail(c: &mut Checks) -> Result<()> {
    let x = d("maxexp(1,2)")?;
    let cfg = ScanConfig::with_x_max(60.0);
    c.class("1-IFRA", "increasing", classify_ifra(&x, 1, &cfg)?.label());
    c.class("2-IFRA", "non-monotone", classify_ifra(&x, 2, &cfg)?.label());
    // -ln T̄_2(x)/x peaks near 1.047, so only slopes in (0.955, 1) see it.
    let g = GridSpec::new(vec![0.9, 0.98, 1.02], vec![0.0])?;
    let e = d("exp(1)")?;
    c.verdict("X <= Exp(1), 2-IFRA", "refuted", compare_ifra(&x, &e, 2, &g)?);
    c.verdict("Exp(1) <= X, 2-IFRA", "refuted", compare_ifra(&e, &x, 2, &g)?);
    Ok(())
}

fn maxexp_dfr_onset(c: &mut Checks) -> Result<()> {
    let onset = dfr_onset(&d("maxexp(1,2)")?, 10)?;
    let observed = onset.map_or("none".to_string(), |s| s.to_string());
    c.push("dfr onset", "5", observed, onset == Some(5));
    Ok(())
}

fn bp_counterexample(c: &mut Checks) -> Result<()> {
    let (x, y) = (d("bpareto(5,10)")?, d("bpareto(2,6)")?);
    // E X = 6.25, E Y = 3.
    let g = frozen(64, 15.0, 32, 31.25, 16);
    c.verdict("1-IFR", "supported", compare_ifr(&x, &y, 1, &g)?);
    c.verdict("DMRL", "supported", compare_dmrl(&x, &y, &ScanConfig::default())?);
    c.verdict("2-IFR", "refuted", compare_ifr(&x, &y, 2, &g)?);
    let cfg = ScanConfig::with_x_max(1e4);
    c.verdict("c_1 convex", "supported", convexity_check(&x, &y, 1, &cfg, Shape::Convex)?);
    let v = convexity_check(&x, &y, 2, &cfg, Shape::Convex)?;
    let level = match v.witness() {
        Some(w) => {
            let it = iterate(&x, 2)?;
            let i = w.pattern.signs.iter().position(|&s| s == Sign::Minus);
            i.map(|i| it.eval(w.pattern.witnesses[i]))
        }
        None => None,
    };
    c.verdict("c_2 convex", "refuted", v);
    c.push(
        "c_2' falls at a level u = T̄_{X,2}(x) in (3/5, 1)",
        "true",
        level.map_or("no witness".into(), |u| format!("u = {u:.6}")),
        level.is_some_and(|u| u > 0.6 && u < 1.0),
    );
    Ok(())
}

fn weibull_le_gamma(c: &mut Checks) -> Result<()> {
    for alpha in ["1.5", "2", "3"] {
        let (x, y) = (d(&format!("weibull({alpha},1)"))?, d(&format!("gamma({alpha},1)"))?);
        // E Y = alpha.
        let g = frozen(64, 5.0 * alpha.parse::<f64>().unwrap(), 32, 0.0, 0);
        for s in 1..=3 {
            c.verdict(format!("alpha={alpha}, s={s}"), "supported", newcrit(&x, &y, s, &g)?);
        }
    }
    Ok(())
}

fn family(c: &mut Checks, fam: &str, pairs: &[(&str, &str, f64)]) -> Result<()> {
    for &(hi, lo, mean_y) in pairs {
        let (x, y) = (d(&format!("{fam}({hi},1)"))?, d(&format!("{fam}({lo},1)"))?);
        let g = frozen(64, 5.0 * mean_y, 32, 0.0, 0);
        for s in 1..=3 {
            c.verdict(format!("{hi} vs {lo}, s={s}"), "supported", newcrit(&x, &y, s, &g)?);
        }
    }
    Ok(())
}

fn gamma_family(c: &mut Checks) -> Result<()> {
    family(c, "gamma", &[("3", "2", 2.0), ("2", "0.5", 0.5), ("0.8", "0.4", 0.4)])?;
    let (x, y) = (d("gamma(3,1)")?, d("gamma(2,1)")?);
    let g = frozen(32, 10.0, 16, 15.0, 8);
    c.verdict("P_1 criterion, 3 vs 2", "supported", criterion_h(&x, &y, 1, &g, HForm::Ps)?);
    Ok(())
}

fn weibull_family(c: &mut Checks) -> Result<()> {
    // Weibull(k,1) means: Γ(1 + 1/k).
    family(
        c,
        "weibull",
        &[("3", "2", 0.886_226_925_452_758), ("0.8", "0.4", 3.323_350_970_447_843)],
    )
}

const LAMBDAS: [&str; 3] = ["1.5", "2", "5"];

fn parallel_tail_dom(c: &mut Checks) -> Result<()> {
    let x = d("maxexp(1,1)")?;
    let cfg = ScanConfig::with_x_max(60.0);
    for l in LAMBDAS {
        let y = d(&format!("maxexp(1,{l})"))?;
        for s in 1..=4 {
            let (u, at) = tail_dominance(&x, &y, s, &cfg)?;
            c.push(
                format!("lambda={l}, s={s}"),
                "min U_s >= -1e-12",
                format!("min U_s = {u:.3e} at x = {at:.4}"),
                u >= -1e-12,
            );
        }
    }
    Ok(())
}

fn parallel_ifra(c: &mut Checks) -> Result<()> {
    let x = d("maxexp(1,1)")?;
    let g = frozen(64, 0.0, 0, 0.0, 0);
    for l in LAMBDAS {
        let y = d(&format!("maxexp(1,{l})"))?;
        for s in 1..=4 {
            c.verdict(format!("lambda={l}, s={s}"), "supported", compare_ifra(&x, &y, s, &g)?);
        }
    }
    Ok(())
}

fn parallel_ifr(c: &mut Checks) -> Result<()> {
    let x = d("maxexp(1,1)")?;
    for l in LAMBDAS {
        let y = d(&format!("maxexp(1,{l})"))?;
        let g = frozen(64, 5.0 * y.mean(), 32, 0.0, 0);
        for s in 1..=4 {
            c.verdict(format!("lambda={l}, s={s}"), "supported", newcrit(&x, &y, s, &g)?);
        }
    }
    Ok(())
}

fn unit_system(n: usize) -> Result<DistributionSpec> {
    DistributionSpec::max_exp(&vec![1.0; n])
}

fn parallel_homog_closure(c: &mut Checks) -> Result<()> {
    for n in 2..=5 {
        let x = unit_system(n)?;
        for s in 1..=3 {
            let class = classify_ifr(&x, s, &window_for(&x))?;
            c.class(format!("n={n}, s={s}"), "increasing", class.label());
        }
    }
    Ok(())
}

/// `Q(x) = q e^{-x} + (1 - e^{-x})^q - 1` for `q = m/k`, summed as
/// `Σ_{j>=2} C(q,j) (-e^{-x})^j` once `e^{-x} < 1/2` to avoid cancellation.
pub fn order_stats_q(q: f64, x: f64) -> f64 {
    let e = (-x).exp();
    if e >= 0.5 {
        return q * e + (q * (-e).ln_1p()).exp() - 1.0;
    }
    let mut coef = q * (q - 1.0) / 2.0;
    let mut power = e * e;
    let mut sum = coef * power;
    for j in 3..400 {
        coef *= (q - (j - 1) as f64) / j as f64;
        power *= -e;
        let term = coef * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn order_stats_chain(c: &mut Checks) -> Result<()> {
    let cfg = ScanConfig::with_x_max(40.0);
    let xs = cfg.grid(&[]);
    for m in 3..=5 {
        for k in 2..m {
            let (xm, xk) = (unit_system(m)?, unit_system(k)?);
            let g = frozen(64, 5.0 * xk.mean(), 32, 5.0 * xm.mean(), 16);
            c.verdict(format!("X_({m}) <= X_({k}), 1-IFR"), "supported", compare_ifr(&xm, &xk, 1, &g)?);
            let q = m as f64 / k as f64;
            let worst = xs
                .iter()
                .map(|&x| (order_stats_q(q, x), x))
                .fold((f64::INFINITY, 0.0), |p, v| if v.0 < p.0 { v } else { p });
            c.push(
                format!("Q > 0 for m={m}, k={k}"),
                "positive",
                format!("min Q = {:.3e} at x = {:.4}", worst.0, worst.1),
                worst.0 > 0.0,
            );
        }
    }
    Ok(())
}

/// The pinned slope 2.89 belongs to rates normalized per variable; for the
/// common normalization by 1474 the same cell sits at `2.89 · 134/1200`.
pub const KX_SLOPE: f64 = 2.89;
pub const KX_SLOPE_COMMON: f64 = 2.89 * 134.0 / 1200.0;

fn kx_check(c: &mut Checks, v: Verdict) {
    let pattern = v.witness().map(|w| w.pattern.seq());
    c.push(
        "witness pattern",
        "-,+,-",
        pattern.as_ref().map_or("none".into(), |p| p.to_string()),
        pattern == Some(seq("-,+,-")),
    );
    c.verdict("2-IFRA", "refuted", v);
}

fn kx_conjecture_ce(c: &mut Checks) -> Result<()> {
    let x = DistributionSpec::max_exp(&[408.0 / 1474.0, 1200.0 / 1474.0])?;
    let y = DistributionSpec::max_exp(&[134.0 / 1474.0, 1.0])?;
    let g = frozen(64, 0.0, 0, 0.0, 0).with_a(KX_SLOPE).with_a(KX_SLOPE_COMMON);
    kx_check(c, compare_ifra(&x, &y, 2, &g)?);
    let at = GridSpec::new(vec![KX_SLOPE_COMMON], vec![0.0])?;
    let v = compare_ifra(&x, &y, 2, &at)?;
    c.push(
        "refuting cell",
        format!("a = {KX_SLOPE_COMMON:.6}"),
        v.witness().and_then(|w| w.a).map_or("none".into(), |a| format!("a = {a:.6}")),
        v.is_refuted(),
    );
    Ok(())
}

fn kx_conjecture_ce_literal(c: &mut Checks) -> Result<()> {
    let x = d("maxexp(0.34,1)")?;
    let y = d("maxexp(1,11)")?;
    let g = GridSpec::new(vec![KX_SLOPE], vec![0.0])?;
    kx_check(c, compare_ifra(&x, &y, 2, &g)?);
    Ok(())
}

fn holder_bounds_case(c: &mut Checks) -> Result<()> {
    let e = holder_bounds(&d("exp(1)")?, 4, 1.0)?;
    let rel = e.ifr_lower_margin.abs() / (e.moments[0] * e.moments[2]);
    c.push("Exp(1) attains the IFR lower bound, s=4", "equality within 1e-8", format!("{rel:.3e}"), rel < 1e-8);
    for s in [4, 5] {
        for x in [0.5, 1.0, 2.0] {
            let g = holder_bounds(&d("gamma(3,1)")?, s, x)?;
            c.push(
                format!("Gamma(3,1) IFR bounds, s={s}, x={x}"),
                "both hold",
                format!("lower {:.3e}, upper {:.3e}", g.ifr_lower_margin, g.ifr_upper_margin),
                g.ifr_lower_holds && g.ifr_upper_holds,
            );
            let h = holder_bounds(&d("gamma(0.5,1)")?, s, x)?;
            c.push(
                format!("Gamma(0.5,1) DFR bound, s={s}, x={x}"),
                "holds",
                format!("margin {:.3e}", h.dfr_margin),
                h.dfr_holds,
            );
        }
    }
    Ok(())
}
