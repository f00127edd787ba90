//! Random walks over the trace builder, shared by the property tests and the
//! acceptance run.

#![allow(dead_code)]

pub mod golden;

use accel::ast::BinOp;
use accel::trace::Trace;
use accel::zipper::{plug, BuilderState, Frame, Leaf, TraceError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 3] = ["l0", "l1", "l2"];

#[derive(Debug, Clone)]
pub enum Op {
    Let(u8, i64),
    Set(u8, i64),
    Respond(i64),
    Empty,
    /// Break to the n-th enclosing label, skipped when there is none.
    Break(usize, i64),
    EnterSeq(usize),
    SeqNext,
    IfTrue(u8),
    IfFalse(u8),
    While(u8),
    Label(u8),
    Named(u8),
    Pop,
    PopTo(u8),
}

fn name(i: u8) -> String {
    ["x", "y", "z"][i as usize % 3].to_string()
}

fn cond(i: u8) -> Trace {
    let op = [BinOp::Lt, BinOp::Gt, BinOp::StrictEq][i as usize % 3];
    Trace::binary(op, Trace::var(name(i / 3)), Trace::int(0))
}

fn enclosing_labels(b: &BuilderState) -> Vec<String> {
    b.context
        .iter()
        .filter_map(|f| match f {
            Frame::Label { label } => Some(label.clone()),
            _ => None,
        })
        .collect()
}

/// Applies one operation. `None` means the operation was skipped.
pub fn apply(b: &mut BuilderState, op: &Op) -> Option<Result<(), TraceError>> {
    Some(match op {
        Op::Let(n, v) => b.record(Leaf::Let {
            name: name(*n),
            value: Trace::int(*v),
        }),
        Op::Set(n, v) => b.record(Leaf::Set {
            target: Trace::var(name(*n)),
            value: Trace::int(*v),
        }),
        Op::Respond(v) => b.record(Leaf::Respond { value: Trace::int(*v) }),
        Op::Empty => b.record(Leaf::Empty),
        Op::Break(i, v) => {
            let labels = enclosing_labels(b);
            if labels.is_empty() {
                return None;
            }
            b.record(Leaf::Break {
                label: labels[i % labels.len()].clone(),
                value: Trace::int(*v),
            })
        }
        Op::EnterSeq(n) => b.enter_seq(*n),
        Op::SeqNext => b.seq_next(),
        Op::IfTrue(c) => b.if_true(cond(*c)),
        Op::IfFalse(c) => b.if_false(cond(*c)),
        Op::While(c) => b.enter_while(cond(*c)),
        Op::Label(l) => b.enter_label(LABELS[*l as usize % 3]),
        Op::Named(n) => b.enter_named(&name(*n)),
        Op::Pop => b.pop(),
        Op::PopTo(l) => b.pop_to(LABELS[*l as usize % 3]),
    })
}

pub fn random_op(rng: &mut impl Rng) -> Op {
    let v = rng.random_range(-3..4);
    let s = rng.random_range(0..9u8);
    match rng.random_range(0..16) {
        0 => Op::Let(s, v),
        1 => Op::Set(s, v),
        2 => Op::Respond(v),
        3 => Op::Empty,
        4 => Op::Break(s as usize, v),
        5 | 6 => Op::EnterSeq(rng.random_range(0..4)),
        7 | 8 => Op::SeqNext,
        9 => Op::IfTrue(s),
        10 => Op::IfFalse(s),
        11 => Op::While(s),
        12 => Op::Label(s),
        13 => Op::Named(s),
        14 => Op::Pop,
        _ => Op::PopTo(s),
    }
}

fn all_ops() -> Vec<Op> {
    let mut ops = vec![Op::Empty, Op::SeqNext, Op::Pop];
    for s in 0..9u8 {
        ops.extend([Op::IfTrue(s), Op::IfFalse(s), Op::While(s), Op::Label(s), Op::Named(s), Op::PopTo(s)]);
        for v in -3..4 {
            ops.extend([Op::Let(s, v), Op::Set(s, v)]);
        }
    }
    for v in -3..4 {
        ops.extend([Op::Respond(v), Op::Break(0, v), Op::Break(1, v), Op::Break(2, v)]);
    }
    ops.extend((1..4).map(Op::EnterSeq));
    ops
}

/// Mostly picks operations that fit the focus, so walks build deep trees
/// and then re-walk them instead of stopping at the first divergence.
pub fn guided_op(rng: &mut impl Rng, b: &BuilderState) -> Op {
    if rng.random_bool(0.2) {
        return random_op(rng);
    }
    if b.current.is_unknown() {
        let mut op = random_op(rng);
        while matches!(op, Op::SeqNext | Op::Pop | Op::PopTo(_)) {
            op = random_op(rng);
        }
        return op;
    }
    let fits: Vec<Op> = all_ops()
        .into_iter()
        .filter(|op| matches!(apply(&mut b.clone(), op), Some(Ok(()))))
        .collect();
    if fits.is_empty() {
        random_op(rng)
    } else {
        fits[rng.random_range(0..fits.len())].clone()
    }
}

/// Folds every frame with `pop`, returning the resulting tree.
pub fn pop_all(b: &BuilderState) -> Trace {
    let mut b = b.clone();
    while !b.context.is_empty() {
        b.pop().expect("pop with a non-empty context");
    }
    b.current
}

#[derive(Debug, Default)]
pub struct WalkStats {
    pub steps: usize,
    pub applied: usize,
    pub rejected: usize,
}

/// Checks the zipper invariants after every step of one walk:
/// a rejected step leaves the state unchanged, the plugged tree is
/// well-formed and equals iterated `pop`, and an applied step only refines
/// the plugged tree. The applied operations are then replayed over the
/// finished tree, which must succeed and leave it unchanged.
pub fn check_walk(ops: &[Op], stats: &mut WalkStats) -> Result<(), String> {
    let mut it = ops.iter();
    check_walk_with(ops.len(), |_| it.next().cloned().expect("len ops"), stats)
}

pub fn check_walk_with(
    len: usize,
    mut next: impl FnMut(&BuilderState) -> Op,
    stats: &mut WalkStats,
) -> Result<(), String> {
    let mut b = BuilderState::new();
    let mut applied = Vec::new();
    for _ in 0..len {
        let op = &next(&b);
        let before = b.clone();
        let old_tree = before.plugged();
        stats.steps += 1;
        match apply(&mut b, op) {
            None => continue,
            Some(Err(_)) => {
                stats.rejected += 1;
                if b != before {
                    return Err(format!("rejected {op:?} changed the state"));
                }
            }
            Some(Ok(())) => {
                stats.applied += 1;
                applied.push(op.clone());
                let tree = plug(&b.current, &b.context);
                if !tree.refines(&old_tree) {
                    return Err(format!("{op:?}: `{tree}` does not refine `{old_tree}`"));
                }
            }
        }
        let tree = b.plugged();
        tree.check_well_formed().map_err(|e| format!("after {op:?}: {e} in `{tree}`"))?;
        let popped = pop_all(&b);
        if popped != tree {
            return Err(format!("after {op:?}: plug `{tree}` but pop gives `{popped}`"));
        }
    }
    let tree = pop_all(&b);
    let mut replay = BuilderState::new();
    replay.current = tree.clone();
    for op in &applied {
        if let Some(Err(e)) = apply(&mut replay, op) {
            return Err(format!("replay of {op:?} over `{tree}` failed: {e}"));
        }
    }
    let again = pop_all(&replay);
    if again != tree {
        return Err(format!("replay changed `{tree}` into `{again}`"));
    }
    Ok(())
}

/// Runs seeded walks until at least `min_steps` operations were checked.
pub fn seeded_walks(seed: u64, min_steps: usize) -> Result<WalkStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = WalkStats::default();
    while stats.steps < min_steps {
        let len = rng.random_range(1..120);
        let rng = &mut rng;
        check_walk_with(len, |b| guided_op(rng, b), &mut stats)?;
    }
    Ok(stats)
}
