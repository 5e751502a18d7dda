mod common;

use common::enumerate::{all_operations, run_enumeration, stms, MAX_SIZE};

#[test]
fn enumeration_has_no_unsound_safe_verdicts() {
    let t = run_enumeration();
    eprintln!("{} checked, {} safe, {} violated", t.checked, t.safe, t.violated);
    assert!(t.checked > 1000, "{t:?}");
    assert!(t.safe > 0 && t.violated > 0, "{t:?}");
    assert!(t.unsound.is_empty(), "{:#?}", t.unsound);
    assert!(t.contradictions.is_empty(), "{:#?}", t.contradictions);
}

#[test]
fn enumeration_sizes() {
    let ops = all_operations();
    assert!(ops.iter().all(|(e, _)| e.size() <= MAX_SIZE));
    assert_eq!(stms(1, &[], true).len(), 4);
    assert_eq!(stms(2, &[], false).len(), 3);
    eprintln!("{} operations", ops.len());
}
