//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`) and failing the build on any
//! violation. The corpus seed honors `PFREE_SEED`.

use pfree::verify::{
    criterion1_structure_equivalence, criterion2_cmd4_decomposition, criterion5_solver_agreement,
    criterion6_gadget_lemmas, criterion7_gap_reduction, criterion8_composition, kernel_checks,
    seed_from_env, CheckReport,
};

fn assert_report(r: &CheckReport) {
    println!(
        "criterion `{}`: {} ({})",
        r.name,
        if r.pass { "PASS" } else { "FAIL" },
        r.details
    );
    assert!(r.pass, "criterion `{}` failed: {}", r.name, r.details);
}

#[test]
fn criterion_1_structure_theorem_equivalence() {
    assert_report(&criterion1_structure_equivalence(seed_from_env()));
}

#[test]
fn criterion_2_cmd4_decomposition() {
    assert_report(&criterion2_cmd4_decomposition(seed_from_env()));
}

#[test]
fn criteria_3_and_4_kernel_equivalence_and_size_ledger() {
    let (equivalence, ledger) = kernel_checks(seed_from_env());
    assert_report(&equivalence);
    assert_report(&ledger);
}

#[test]
fn criterion_5_solver_agreement() {
    assert_report(&criterion5_solver_agreement(seed_from_env()));
}

#[test]
fn criterion_6_gadget_lemmas() {
    assert_report(&criterion6_gadget_lemmas());
}

#[test]
fn criterion_7_gap_reduction() {
    assert_report(&criterion7_gap_reduction());
}

#[test]
fn criterion_8_composition_wiring() {
    assert_report(&criterion8_composition());
}
