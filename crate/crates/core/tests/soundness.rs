mod common;

use common::suites;

#[test]
fn schedulable_deduction_implies_global_safety() {
    let s = suites::soundness(31, 30);
    s.outcome.assert_passed();
    assert!(s.schedulable > 0, "{}", s.outcome.summary());
    assert!(s.global_unsafe > 0, "{}", s.outcome.summary());
}
