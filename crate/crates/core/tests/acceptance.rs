//! Acceptance criteria 1–13 at desk scale (p = 3, d = 1). One PASS/FAIL line
//! per criterion; run with `--nocapture` to see them.
//!
//! A criterion prints FAIL when any of its checks fails, including the
//! documented deviations in `KNOWN_DEVIATIONS`, whose literal statements the
//! computation refutes. The test itself fails on any other failing check.

use std::time::Instant;

use ultraweyl::report::Status;
use ultraweyl::suites::{run_criterion, SuiteParams, KNOWN_DEVIATIONS};

const BUDGET_SECS: f64 = 60.0;

#[test]
fn acceptance() {
    // the time budget is stated for a single thread
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global();
    let ps = SuiteParams::default();
    let mut unexpected = Vec::new();
    for n in 1..=13u32 {
        let start = Instant::now();
        let checks = run_criterion(n, &ps);
        let secs = start.elapsed().as_secs_f64();
        let failed: Vec<_> = checks.iter().filter(|c| c.status == Status::Fail).collect();
        let skipped = checks
            .iter()
            .filter(|c| matches!(c.status, Status::Skipped(_)))
            .count();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let detail = checks
            .iter()
            .map(|c| {
                let s = match &c.status {
                    Status::Pass => "ok",
                    Status::Fail => "FAIL",
                    Status::Skipped(_) => "skipped",
                };
                format!(
                    "{}={}",
                    c.id.split_once('.').map_or(c.id.as_str(), |x| x.1),
                    s
                )
            })
            .collect::<Vec<_>>()
            .join(" ");
        println!("{verdict} criterion {n:>2} ({secs:6.2}s): {detail}");
        for c in &checks {
            if let Some(note) = &c.note {
                println!("      {}: {}", c.id, note);
            }
        }
        assert_eq!(
            skipped, 0,
            "criterion {n} skipped checks at the default scale"
        );
        for c in failed {
            if !KNOWN_DEVIATIONS.contains(&c.id.as_str()) {
                unexpected.push(format!(
                    "{}: lhs {:?} rhs {:?} note {:?}",
                    c.id, c.lhs, c.rhs, c.note
                ));
            }
        }
        if secs > BUDGET_SECS {
            unexpected.push(format!(
                "criterion {n} took {secs:.1}s, over the {BUDGET_SECS}s budget"
            ));
        }
    }
    assert!(
        unexpected.is_empty(),
        "unexpected failures:\n{}",
        unexpected.join("\n")
    );
}
