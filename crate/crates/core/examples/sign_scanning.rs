//! Sign patterns of sampled functions, with a trace written as CSV.

use iterfr::exppoly::ExpPoly;
use iterfr::signscan::{check_integration_lemma, scan, scan_traced, seq, write_trace_csv, ScanConfig};

pub fn run_example() -> iterfr::Result<()> {
    let cfg = ScanConfig::with_x_max(20.0);

    // (x - 1)(x - 3) e^{-x}: positive, negative, positive.
    let f = |x: f64| (x - 1.0) * (x - 3.0) * (-x).exp();
    let (pattern, trace) = scan_traced(f, &cfg, &[], None)?;
    println!("(x-1)(x-3)e^-x on [0, {}]: {pattern}", cfg.x_max);
    for (lo, hi) in &pattern.change_points {
        println!("  sign change in [{lo:.12}, {hi:.12}]");
    }
    println!(
        "  within +,-,+ : {}, within -,+ : {}",
        pattern.matches(&[seq("+,-,+")]),
        pattern.matches(&[seq("-,+")])
    );
    let mut csv = Vec::new();
    write_trace_csv(&mut csv, &trace[..4])?;
    print!("first trace rows:\n{}", String::from_utf8_lossy(&csv));

    // A narrow dip between grid points is still found by refinement.
    let dip = |x: f64| 1.0 - 1.5 * (-((x - 7.3) / 0.01).powi(2)).exp();
    println!("narrow dip: {}", scan(dip, &cfg, &[], None)?);

    // Integrating from the right can only remove sign changes, keeping a
    // final part of the original pattern.
    let p = ExpPoly::new([(1.0, 0.5), (-3.0, 1.0), (2.5, 2.0)])?;
    let tail = p.integrate_tail();
    let cfg = ScanConfig::for_min_rate(p.min_rate());
    println!(
        "{p}: {} ; its tail integral: {} ; lemma holds: {}",
        p.sign_pattern_exact(0.0)?,
        tail.sign_pattern_exact(0.0)?,
        check_integration_lemma(&p, &cfg)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
