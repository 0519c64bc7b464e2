//! The registered worked examples, run one by one.

use iterfr::casebook::{coverage, run_case};

pub fn run_example() -> iterfr::Result<()> {
    let cases = coverage();
    println!("{} cases", cases.len());
    for (id, statement) in &cases {
        println!("  {id:<26} {statement}");
    }
    for id in ["EX_POLYEXP", "MAXEXP_DFR_ONSET", "HOLDER_BOUNDS"] {
        let r = run_case(id)?;
        println!("{id}: {}", if r.passed { "pass" } else { "FAIL" });
        for c in &r.checks {
            println!("  [{}] {}: expected {}, observed {}", if c.passed { "ok" } else { "!!" }, c.name, c.expected, c.observed);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
