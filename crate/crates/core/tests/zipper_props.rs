mod common;

use accel::trace::Trace;
use accel::zipper::{BuilderState, TraceError};
use common::{check_walk, seeded_walks, Op, WalkStats};
use proptest::prelude::*;

fn op() -> impl Strategy<Value = Op> {
    let v = -3i64..4;
    let s = 0u8..9;
    prop_oneof![
        1 => (s.clone(), v.clone()).prop_map(|(s, v)| Op::Let(s, v)),
        1 => (s.clone(), v.clone()).prop_map(|(s, v)| Op::Set(s, v)),
        1 => v.clone().prop_map(Op::Respond),
        1 => Just(Op::Empty),
        1 => (0usize..3, v).prop_map(|(i, v)| Op::Break(i, v)),
        2 => (0usize..4).prop_map(Op::EnterSeq),
        2 => Just(Op::SeqNext),
        1 => s.clone().prop_map(Op::IfTrue),
        1 => s.clone().prop_map(Op::IfFalse),
        1 => s.clone().prop_map(Op::While),
        1 => s.clone().prop_map(Op::Label),
        1 => s.clone().prop_map(Op::Named),
        2 => Just(Op::Pop),
        1 => s.prop_map(Op::PopTo),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn walks_keep_the_zipper_invariants(ops in prop::collection::vec(op(), 1..100)) {
        let mut stats = WalkStats::default();
        if let Err(e) = check_walk(&ops, &mut stats) {
            prop_assert!(false, "{}", e);
        }
    }
}

#[test]
fn ten_thousand_seeded_steps() {
    let stats = seeded_walks(7, 10_000).unwrap();
    assert!(stats.steps >= 10_000);
    assert!(stats.applied > 1_000, "{stats:?}");
    assert!(stats.rejected > 100, "{stats:?}");
}

#[test]
fn pop_on_an_empty_context_is_corruption() {
    let mut b = BuilderState::new();
    assert!(matches!(b.pop(), Err(TraceError::Corruption(_))));
    assert!(matches!(b.enter_seq(0), Err(TraceError::Corruption(_))));
    assert!(matches!(b.seq_next(), Err(TraceError::Corruption(_))));
    assert_eq!(b, BuilderState::new());
}

#[test]
fn pop_to_folds_through_the_label() {
    let mut b = BuilderState::new();
    b.enter_label("l").unwrap();
    b.enter_seq(2).unwrap();
    b.record(accel::zipper::Leaf::Break {
        label: "l".into(),
        value: Trace::int(1),
    })
    .unwrap();
    b.pop_to("l").unwrap();
    assert!(b.context.is_empty());
    assert_eq!(
        b.current,
        Trace::label("l", Trace::block(vec![Trace::brk("l", Trace::int(1)), Trace::Unknown]))
    );
}
