use iterfr::casebook::run_case;
use iterfr::distributions::DistributionSpec;
use iterfr::exppoly::ExpPoly;
use iterfr::iteration::iterate;
use iterfr::ordering::{compare_ifr, criterion_h, verify_witness, GridSpec, HForm, Verdict};
use iterfr::report::{document, to_json, Document};
use iterfr::signscan::{check_integration_lemma, ScanConfig, SignPattern};
use proptest::prelude::*;

fn exppoly_terms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0f64..5.0, 0.1f64..6.0), 1..7)
}

fn small_grid(x: &DistributionSpec, y: &DistributionSpec) -> GridSpec {
    let mut b = vec![-2.0 * x.mean(), -0.5 * x.mean(), 0.0];
    b.extend(GridSpec::b_points(3.0 * y.mean(), 4).into_iter().skip(1));
    GridSpec::new(GridSpec::log_points(0.1, 10.0, 10), b).unwrap()
}

fn gamma_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.6f64..5.0, 0.6f64..5.0).prop_filter("distinct shapes", |(a, b)| (a - b).abs() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_count_within_sign_change_bound(terms in exppoly_terms()) {
        let Ok(p) = ExpPoly::new(terms) else { return Ok(()) };
        let (lo, hi) = p.real_root_window();
        let r = p.isolate_roots(lo, hi).unwrap();
        prop_assert!(r.isolated_roots.len() <= p.sign_change_bound(), "{p}: {r:?}");
        for w in r.isolated_roots.windows(2) {
            prop_assert!(w[0].1 <= w[1].0, "brackets overlap: {r:?}");
        }
    }

    #[test]
    fn integration_keeps_final_part(terms in exppoly_terms()) {
        let Ok(f) = ExpPoly::new(terms) else { return Ok(()) };
        let g = f.integrate_tail();
        let (pf, pg) = (f.sign_pattern_exact(0.0).unwrap(), g.sign_pattern_exact(0.0).unwrap());
        prop_assert!(pg.is_final_part(&pf), "{f}: {pf} vs {g}: {pg}");
        prop_assert!(check_integration_lemma(&f, &ScanConfig::for_min_rate(f.min_rate())).unwrap());
    }

    #[test]
    fn exppoly_eval_is_linear(terms in exppoly_terms(), k in -3.0f64..3.0, x in 0.0f64..5.0) {
        let Ok(p) = ExpPoly::new(terms) else { return Ok(()) };
        let direct: f64 = p.terms().iter().map(|t| t.coef * (-t.rate * x).exp()).sum();
        let scale = p.terms().iter().map(|t| (t.coef * (-t.rate * x).exp()).abs()).sum::<f64>().max(1e-300);
        prop_assert!((p.eval(x) - direct).abs() <= 1e-12 * scale);
        if k != 0.0 {
            let q = p.scale(k).unwrap();
            prop_assert!((q.eval(x) - k * p.eval(x)).abs() <= 1e-12 * scale * k.abs());
        }
    }

    #[test]
    fn iterated_tails_are_monotone_survival_functions(
        shape in 0.5f64..4.0,
        scale in 0.5f64..3.0,
        s in 1u32..4,
    ) {
        let it = iterate(&DistributionSpec::gamma(shape, scale).unwrap(), s).unwrap();
        let mut prev = 1.0;
        for i in 0..60 {
            let x = 0.25 * i as f64 * scale;
            let v = it.eval(x);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev + 1e-12, "not decreasing at {x}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn sign_pattern_json_round_trips(signs in prop::collection::vec(prop::bool::ANY, 0..6)) {
        let mut text = String::new();
        for (i, &plus) in signs.iter().enumerate() {
            if i > 0 && signs[i - 1] == plus {
                continue;
            }
            if !text.is_empty() {
                text.push(',');
            }
            text.push(if plus { '+' } else { '-' });
        }
        let pattern = iterfr::signscan::seq(&text);
        let json = to_json(&pattern).unwrap();
        let back: iterfr::signscan::SignSeq = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, pattern);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn hs_and_ps_forms_agree((ax, ay) in gamma_pair(), s in 1u32..3) {
        let x = DistributionSpec::gamma(ax, 1.0).unwrap();
        let y = DistributionSpec::gamma(ay, 1.0).unwrap();
        let g = small_grid(&x, &y);
        let hs = criterion_h(&x, &y, s, &g, HForm::Hs).unwrap();
        let ps = criterion_h(&x, &y, s, &g, HForm::Ps).unwrap();
        prop_assert_eq!(hs.label(), ps.label(), "{} vs {}: {:?} / {:?}", x, y, hs, ps);
    }

    #[test]
    fn criterion_support_implies_no_refutation((ax, ay) in gamma_pair(), s in 1u32..3) {
        let x = DistributionSpec::gamma(ax, 1.0).unwrap();
        let y = DistributionSpec::gamma(ay, 1.0).unwrap();
        let g = small_grid(&x, &y);
        let h = criterion_h(&x, &y, s, &g, HForm::Ps).unwrap();
        if h.is_supported() {
            let v = compare_ifr(&x, &y, s, &g).unwrap();
            prop_assert!(!v.is_refuted(), "{} vs {}: {:?}", x, y, v);
        }
    }

    #[test]
    fn verdicts_are_scale_invariant((ax, ay) in gamma_pair(), k in 0.3f64..4.0) {
        let x = DistributionSpec::gamma(ax, 1.0).unwrap();
        let y = DistributionSpec::gamma(ay, 1.0).unwrap();
        let g = small_grid(&x, &y);
        let base = compare_ifr(&x, &y, 1, &g).unwrap();
        // V_s for (kX, kY) at (a, kb) is V_s for (X, Y) at (a, b) taken at x/k.
        let gk = GridSpec::new(g.a.clone(), g.b.iter().map(|b| k * b).collect()).unwrap();
        let scaled = compare_ifr(&x.scaled(k).unwrap(), &y.scaled(k).unwrap(), 1, &gk).unwrap();
        prop_assert_eq!(base.label(), scaled.label());
        let pattern = |v: &Verdict| v.witness().map(|w| w.pattern.seq());
        prop_assert_eq!(pattern(&base), pattern(&scaled));
    }

    #[test]
    fn refuting_witnesses_recheck(lo in 0.6f64..1.5, hi in 3.0f64..5.0, s in 1u32..3) {
        // The smaller shape is the less IFR one, so this ordering is refuted.
        let x = DistributionSpec::gamma(lo, 1.0).unwrap();
        let y = DistributionSpec::gamma(hi, 1.0).unwrap();
        let v = compare_ifr(&x, &y, s, &GridSpec::default_ifr(&x, &y)).unwrap();
        prop_assert!(v.is_refuted(), "{} vs {}: {:?}", x, y, v);
        prop_assert!(verify_witness(&x, &y, s, v.witness().unwrap()).unwrap());
    }
}

#[test]
fn merge_is_deterministic_across_thread_counts() {
    let x = DistributionSpec::branched_pareto(5.0, 10.0).unwrap();
    let y = DistributionSpec::branched_pareto(2.0, 6.0).unwrap();
    let g = GridSpec::default_ifr(&x, &y);
    let docs: Vec<String> = [1, 2, 3]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| document(&compare_ifr(&x, &y, 2, &g).unwrap()).unwrap())
        })
        .collect();
    assert_eq!(docs[0], docs[1]);
    assert_eq!(docs[0], docs[2]);
}

#[test]
fn verdict_documents_round_trip_and_replay() {
    let x = DistributionSpec::branched_pareto(5.0, 10.0).unwrap();
    let y = DistributionSpec::branched_pareto(2.0, 6.0).unwrap();
    let v = compare_ifr(&x, &y, 2, &GridSpec::default_ifr(&x, &y)).unwrap();
    let text = document(&v).unwrap();
    let back: Document<Verdict> = serde_json::from_str(&text).unwrap();
    assert_eq!(back.schema, iterfr::report::SCHEMA);
    assert_eq!(back.body, v);
    let replay = compare_ifr(&x, &y, 2, back.body.grid.as_ref().unwrap()).unwrap();
    assert_eq!(replay, v);
}

#[test]
fn casebook_runs_are_idempotent() {
    for id in ["EX_POLYEXP", "KX_CONJECTURE_CE_LITERAL"] {
        let first = to_json(&run_case(id).unwrap()).unwrap();
        let second = to_json(&run_case(id).unwrap()).unwrap();
        assert_eq!(first, second, "{id}");
    }
}

#[test]
fn sign_patterns_round_trip_through_json() {
    let p = ExpPoly::new([(1.0, 0.5), (-3.0, 1.0), (2.5, 2.0)]).unwrap();
    let pattern = p.sign_pattern_exact(0.0).unwrap();
    let back: SignPattern = serde_json::from_str(&to_json(&pattern).unwrap()).unwrap();
    assert_eq!(back, pattern);
}
