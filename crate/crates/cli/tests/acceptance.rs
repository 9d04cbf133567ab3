//! Acceptance suite: every reproduction check at its stated tolerance and
//! time budget. Prints one PASS/FAIL line per criterion.

use infocap_cli::checks::all_checks;

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for check in all_checks() {
        let outcome = check.run();
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(outcome.name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
