//! Acceptance criteria, one timed check each. Every criterion prints a
//! `PASS`/`FAIL` line; the test fails if any criterion fails or overruns.

use std::time::{Duration, Instant};

use iterfr::ageing::{classify_ifr, classify_ifra, dfr_onset, dfr_onset_q0_sign, holder_bounds};
use iterfr::casebook::{order_stats_q, run_case};
use iterfr::distributions::DistributionSpec;
use iterfr::exppoly::ExpPoly;
use iterfr::iteration::{iterate, iterated_moment};
use iterfr::ordering::{compare_dmrl, compare_ifr, compare_ifra, convexity_check, GridSpec, Shape};
use iterfr::signscan::{check_integration_lemma, scan, seq, ScanConfig, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

type Outcome = iterfr::Result<(bool, String)>;

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn run(id: u32, title: &str, limit_s: u64, f: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(limit_s);
    let (ok, detail) = match result {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let passed = ok && in_time;
    let text = format!(
        "criterion {id:>2} {}: {title} [{:.2} s / {limit_s} s] {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    println!("{text}");
    Line { id, passed, text }
}

fn d(literal: &str) -> DistributionSpec {
    literal.parse().expect("valid literal")
}

fn c1_exponential_fixed_point() -> Outcome {
    let e = d("exp(1)");
    let mut worst = 0.0f64;
    for s in 1..=6 {
        let it = iterate(&e, s)?;
        for i in 0..200 {
            let x = 30.0 * i as f64 / 199.0;
            worst = worst.max((it.eval(x) - (-x).exp()).abs());
        }
    }
    Ok((worst < 1e-12, format!("max error {worst:.2e}")))
}

/// `E X^k` from the gamma function, independent of the library's moments.
fn gamma_moment(shape: f64, scale: f64, k: u32) -> f64 {
    scale.powi(k as i32) * gamma(shape + k as f64) / gamma(shape)
}

fn weibull_moment(shape: f64, scale: f64, k: u32) -> f64 {
    scale.powi(k as i32) * gamma(1.0 + k as f64 / shape)
}

/// `-d/dx T̄_{s+1}(x)` by Richardson-extrapolated central differences.
fn slope(it: &iterfr::iteration::IteratedTail, x: f64) -> f64 {
    let c = |h: f64| (it.eval(x - h) - it.eval(x + h)) / (2.0 * h);
    let h = 1e-3 * x.max(0.1);
    (4.0 * c(h / 2.0) - c(h)) / 3.0
}

fn c2_normalizer_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst_moment = 0.0f64;
    let mut worst_slope = 0.0f64;
    for draw in 0..10 {
        let (gs, gt) = (rng.gen_range(0.5..5.0), rng.gen_range(0.5..3.0));
        let (ws, wt) = (rng.gen_range(0.7..4.0), rng.gen_range(0.5..3.0));
        let cases: [(DistributionSpec, Box<dyn Fn(u32) -> f64>); 2] = [
            (DistributionSpec::gamma(gs, gt)?, Box::new(move |k| gamma_moment(gs, gt, k))),
            (DistributionSpec::weibull(ws, wt)?, Box::new(move |k| weibull_moment(ws, wt, k))),
        ];
        for (dist, moment) in &cases {
            for s in 1..=4 {
                let want = moment(s) / (s as f64 * moment(s - 1));
                let got = iterated_moment(dist, s)?;
                worst_moment = worst_moment.max((got / want - 1.0).abs());
                // μ̃_s also links consecutive iterates: T̄'_{s+1} = -T̄_s / μ̃_s.
                let (lo, hi) = (iterate(dist, s)?, iterate(dist, s + 1)?);
                let x = dist.tail_inverse(0.5)?;
                let implied = lo.eval(x) / slope(&hi, x);
                worst_slope = worst_slope.max((implied / want - 1.0).abs());
            }
        }
        let _ = draw;
    }
    Ok((
        worst_moment < 1e-8 && worst_slope < 1e-8,
        format!("moment ratio rel. error {worst_moment:.2e}, tail-slope rel. error {worst_slope:.2e}"),
    ))
}

fn c3_polyexp() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for c in [0.5, 1.0, 1.9] {
        let x = DistributionSpec::poly_exp_example(c)?;
        let cfg = ScanConfig::with_x_max(60.0);
        let ifr1 = classify_ifr(&x, 1, &cfg)?;
        let ifra1 = classify_ifra(&x, 1, &cfg)?;
        let ifr2 = classify_ifr(&x, 2, &cfg)?;
        let classes = !ifr1.is_increasing() && !ifra1.is_increasing() && ifr2.is_increasing();
        // sign r'_1 = sign(r_1 - r_0) with r_0 = -(ln f)' = 1 - 2x/(x² + c).
        let it = iterate(&x, 1)?;
        let g = |t: f64| it.failure_rate(t).unwrap_or(f64::NAN) - (1.0 - 2.0 * t / (t * t + c));
        let p = scan(g, &ScanConfig::with_x_max(20.0), &[], None)?;
        let root = -1.0 + (1.0 + c).sqrt();
        let bracket = p.change_points.first().copied();
        let located = p.seq() == seq("-,+")
            && bracket.is_some_and(|(lo, hi)| lo <= root && root <= hi && (0.5 * (lo + hi) - root).abs() < 1e-6);
        ok &= classes && located;
        notes.push(format!(
            "c={c}: 1-IFR {}, 1-IFRA {}, 2-IFR {}, r'_1 {} change in {:?} vs root {root:.9}",
            ifr1.label(),
            ifra1.label(),
            ifr2.label(),
            p,
            bracket
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn c4_maxexp_heredity() -> Outcome {
    let x = d("maxexp(1,2)");
    let cfg = ScanConfig::with_x_max(60.0);
    let ifra1 = classify_ifra(&x, 1, &cfg)?;
    let ifra2 = classify_ifra(&x, 2, &cfg)?;
    let onset = dfr_onset(&x, 10)?;
    let flips: Vec<Sign> = (1..=6).map(|s| dfr_onset_q0_sign(2.0, s)).collect();
    let first_negative = flips.iter().position(|&s| s == Sign::Minus).map(|i| i as u32 + 1);
    let ok = ifra1.is_increasing()
        && !ifra2.is_increasing()
        && !ifra2.is_decreasing()
        && onset == Some(5)
        && first_negative == Some(5);
    Ok((
        ok,
        format!(
            "1-IFRA {}, 2-IFRA {}, dfr onset {:?}, Q(0) first negative at s = {:?}",
            ifra1.label(),
            ifra2.label(),
            onset,
            first_negative
        ),
    ))
}

fn c5_branched_pareto() -> Outcome {
    let (x, y) = (d("bpareto(5,10)"), d("bpareto(2,6)"));
    let grid = GridSpec::default_ifr(&x, &y);
    let ifr1 = compare_ifr(&x, &y, 1, &grid)?;
    let dmrl = compare_dmrl(&x, &y, &ScanConfig::default())?;
    let ifr2 = compare_ifr(&x, &y, 2, &grid)?;
    let conv = convexity_check(&x, &y, 2, &ScanConfig::with_x_max(1e4), Shape::Convex)?;
    let tail2 = iterate(&x, 2)?;
    // Levels u = T̄_{X,2}(x) at which the slope of c_2 falls.
    let levels: Vec<f64> = conv.witness().map_or(Vec::new(), |w| {
        w.pattern
            .signs
            .iter()
            .zip(&w.pattern.witnesses)
            .filter(|(s, _)| **s == Sign::Minus)
            .map(|(_, &t)| tail2.eval(t))
            .collect()
    });
    let in_band = !levels.is_empty() && levels.iter().all(|&u| u > 0.6 && u < 1.0);
    let ok = ifr1.is_supported() && dmrl.is_supported() && ifr2.is_refuted() && conv.is_refuted() && in_band;
    Ok((
        ok,
        format!(
            "1-IFR {}, DMRL {}, 2-IFR {}, c_2' falls at u = {:?}",
            ifr1.label(),
            dmrl.label(),
            ifr2.label(),
            levels
        ),
    ))
}

fn cases(ids: &[&str]) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in ids {
        let r = run_case(id)?;
        ok &= r.passed;
        let failed: Vec<String> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        notes.push(format!("{id}: {}/{} checks{}", r.checks.len() - failed.len(), r.checks.len(), if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }));
    }
    Ok((ok, notes.join("; ")))
}

fn c8_parallel_not_ifra_ordered() -> Outcome {
    // Rates normalized by the common total 1474: the cell sits at 2.89·134/1200.
    let x = DistributionSpec::max_exp(&[408.0 / 1474.0, 1200.0 / 1474.0])?;
    let y = DistributionSpec::max_exp(&[134.0 / 1474.0, 1.0])?;
    let common = compare_ifra(&x, &y, 2, &GridSpec::new(vec![2.89 * 134.0 / 1200.0], vec![0.0])?)?;
    // Each system normalized by its own total: the cell sits at 2.89 itself.
    let literal = compare_ifra(&d("maxexp(0.34,1)"), &d("maxexp(1,11)"), 2, &GridSpec::new(vec![2.89], vec![0.0])?)?;
    let pattern = |v: &iterfr::ordering::Verdict| v.witness().map(|w| w.pattern.seq());
    let ok = common.is_refuted()
        && literal.is_refuted()
        && pattern(&common) == Some(seq("-,+,-"))
        && pattern(&literal) == Some(seq("-,+,-"));
    Ok((
        ok,
        format!(
            "common normalization: {} {:?}; per-system normalization: {} {:?}",
            common.label(),
            pattern(&common).map(|p| p.to_string()),
            literal.label(),
            pattern(&literal).map(|p| p.to_string())
        ),
    ))
}

fn random_exppoly(rng: &mut ChaCha8Rng) -> Option<ExpPoly> {
    let k = rng.gen_range(1..=7);
    let alternate = rng.gen_bool(0.5);
    let terms: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let mag = rng.gen_range(0.05..5.0);
            let sign = if alternate { if i % 2 == 0 { 1.0 } else { -1.0 } } else if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (sign * mag, rng.gen_range(0.1..6.0))
        })
        .collect();
    ExpPoly::new(terms).ok()
}

fn c9_zero_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut tested, mut violations, mut roots) = (0, 0, 0);
    while tested < 500 {
        let Some(p) = random_exppoly(&mut rng) else { continue };
        tested += 1;
        let (lo, hi) = p.real_root_window();
        let r = p.isolate_roots(lo, hi)?;
        roots += r.isolated_roots.len();
        // Every bracket must straddle a sign change of the overflow-free
        // scaled value, up to rounding noise.
        let sign = |x: f64| {
            let (v, m) = p.eval_scaled(x);
            if v.abs() <= 1e-12 * m { 0.0 } else { v.signum() }
        };
        let genuine = r.isolated_roots.iter().all(|&(a, b)| sign(a) * sign(b) <= 0.0);
        if r.isolated_roots.len() > p.sign_change_bound() || !genuine {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("{tested} polynomials, {roots} roots, {violations} violations")))
}

fn c10_integration_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut tested, mut violations, mut dropped) = (0, 0, 0);
    while tested < 200 {
        let Some(f) = random_exppoly(&mut rng) else { continue };
        tested += 1;
        let g = f.integrate_tail();
        let (pf, pg) = (f.sign_pattern_exact(0.0)?, g.sign_pattern_exact(0.0)?);
        let cfg = ScanConfig::for_min_rate(f.min_rate());
        if !pg.is_final_part(&pf) || !check_integration_lemma(&f, &cfg)? {
            violations += 1;
        }
        dropped += pf.sign_changes() - pg.sign_changes().min(pf.sign_changes());
    }
    Ok((
        violations == 0,
        format!("{tested} polynomials, {dropped} sign changes removed by integration, {violations} violations"),
    ))
}

fn c11_holder() -> Outcome {
    let mut ok = true;
    // Residual moments of Exp(1): m_k(x) = k! e^{-x}, so the lower bound
    // (2!)² >= (2/3)·1!·3! holds with equality.
    let e = holder_bounds(&d("exp(1)"), 4, 1.0)?;
    let oracle = [1.0, 2.0, 6.0].map(|k: f64| k * (-1.0f64).exp());
    let moments_ok = e.moments.iter().zip(oracle).all(|(m, o)| (m / o - 1.0).abs() < 1e-9);
    let rel = e.ifr_lower_margin.abs() / (e.moments[0] * e.moments[2]);
    ok &= moments_ok && rel < 1e-8;
    let mut notes = vec![format!("Exp(1) equality gap {rel:.2e}")];
    let (mut worst_ifr, mut worst_dfr) = (f64::INFINITY, f64::INFINITY);
    for s in [4, 5] {
        for x in [0.5, 1.0, 2.0] {
            let g = holder_bounds(&d("gamma(3,1)"), s, x)?;
            ok &= g.ifr_lower_holds && g.ifr_upper_holds;
            worst_ifr = worst_ifr.min(g.ifr_lower_margin.min(g.ifr_upper_margin));
            let h = holder_bounds(&d("gamma(0.5,1)"), s, x)?;
            ok &= h.dfr_holds;
            worst_dfr = worst_dfr.min(h.dfr_margin);
        }
    }
    notes.push(format!("Gamma(3,1) smallest IFR margin {worst_ifr:.3e}"));
    notes.push(format!("Gamma(0.5,1) smallest DFR margin {worst_dfr:.3e}"));
    Ok((ok, notes.join("; ")))
}

fn c12_order_statistics() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let xs = ScanConfig::with_x_max(40.0).grid(&[]);
    for m in 3..=5usize {
        for k in 2..m {
            let xm = DistributionSpec::max_exp(&vec![1.0; m])?;
            let xk = DistributionSpec::max_exp(&vec![1.0; k])?;
            let v = compare_ifr(&xm, &xk, 1, &GridSpec::default_ifr(&xm, &xk))?;
            let q = m as f64 / k as f64;
            let min_q = xs.iter().map(|&x| order_stats_q(q, x)).fold(f64::INFINITY, f64::min);
            ok &= v.is_supported() && min_q > 0.0;
            notes.push(format!("({m},{k}) {} min Q {min_q:.2e}", v.label()));
        }
    }
    Ok((ok, notes.join(", ")))
}

#[test]
fn acceptance() {
    let lines = vec![
        run(1, "exponential law is a fixed point of iteration", 1, c1_exponential_fixed_point),
        run(2, "normalizer identity for Gamma and Weibull draws", 5, c2_normalizer_identity),
        run(3, "poly-exp example: classes and turning point", 5, c3_polyexp),
        run(4, "max of exponentials: heredity failure and DFR onset", 5, c4_maxexp_heredity),
        run(5, "branched Pareto counter-example", 10, c5_branched_pareto),
        run(6, "Weibull vs Gamma and within-family orders", 60, || {
            cases(&["WEIBULL_LE_GAMMA", "GAMMA_FAMILY", "WEIBULL_FAMILY"])
        }),
        run(7, "parallel systems: tail dominance, IFRA and IFR orders", 60, || {
            cases(&["PARALLEL_TAIL_DOM", "PARALLEL_IFRA", "PARALLEL_IFR"])
        }),
        run(8, "parallel systems not 2-IFRA ordered", 10, c8_parallel_not_ifra_ordered),
        run(9, "zero bound for exponential polynomials", 30, c9_zero_bound),
        run(10, "integration keeps a final part of the sign pattern", 30, c10_integration_lemma),
        run(11, "sharpened moment bounds", 10, c11_holder),
        run(12, "order statistics chain", 20, c12_order_statistics),
    ];
    let failed: Vec<&Line> = lines.iter().filter(|l| !l.passed).collect();
    println!("{} of {} criteria pass", lines.len() - failed.len(), lines.len());
    assert!(
        failed.is_empty(),
        "failed criteria: {}",
        failed.iter().map(|l| format!("\n{}: {}", l.id, l.text)).collect::<String>()
    );
}
