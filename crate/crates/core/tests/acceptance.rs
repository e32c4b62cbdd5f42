//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

use level_density::acceptance::run_criterion;

fn check(id: u8) {
    let outcome = run_criterion(id).expect("known criterion");
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_1_second_moment_identity() {
    check(1);
}

#[test]
fn criterion_2_gue_closed_form() {
    check(2);
}

#[test]
fn criterion_3_oracle_equivalence() {
    check(3);
}

#[test]
fn criterion_4_limit_formulas() {
    check(4);
}

#[test]
fn criterion_5_density_moment_consistency() {
    check(5);
}

#[test]
fn criterion_6_moment_convergence() {
    check(6);
}

#[test]
fn criterion_7_perturbation_invariance() {
    check(7);
}

#[test]
fn criterion_8_monte_carlo_ks() {
    check(8);
}

#[test]
fn criterion_9_growth_bound() {
    check(9);
}
