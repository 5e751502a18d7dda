mod common;

use proptest::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{defs, Gen};
use stmcheck::checker::{arith_decide, simplify, wrap_assume, wrap_ensure, PathCondition, SimplifyConfig};
use stmcheck::contracts::Contract;
use stmcheck::semantics::delta;
use stmcheck::syntax::{Exception, Expr, PrimOp};

fn swap_exceptions(e: &Expr) -> Expr {
    match e {
        Expr::Exc(Exception::Bad) => Expr::unr(),
        Expr::Exc(Exception::Unr) => Expr::bad(),
        _ => {
            let kids = e.children().into_iter().map(swap_exceptions).collect();
            stmcheck::transform::with_children(e, kids)
        }
    }
}

/// Linear terms over `x`, `y`, `z`.
fn linear(seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut term = Expr::Int(rng.gen_range(-3..=3));
    for v in ["x", "y", "z"] {
        let k: i64 = rng.gen_range(-3..=3);
        if k == 0 {
            continue;
        }
        let t = if k == 1 { Expr::var(v) } else { Expr::binop(PrimOp::Mul, Expr::Int(k), Expr::var(v)) };
        term = Expr::binop(PrimOp::Add, t, term);
    }
    term
}

/// Atoms come from a small pool so goals and facts often share them.
fn atom(i: u64) -> Expr {
    let op = [PrimOp::Eq, PrimOp::Gt, PrimOp::Ge, PrimOp::Lt, PrimOp::Le][(i % 5) as usize];
    Expr::binop(op, linear(i / 5), linear(1000 + i % 7))
}

fn goal(seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = || atom(rng.gen_range(0..POOL));
    match seed % 4 {
        0 => Expr::binop(PrimOp::And, pick(), pick()),
        1 => Expr::binop(PrimOp::Or, pick(), pick()),
        2 => Expr::prim(PrimOp::Not, vec![pick()]),
        _ => pick(),
    }
}

const POOL: u64 = 30;

/// Direct evaluation of a goal at one point, through the interpreter's
/// primitive rules.
fn value(e: &Expr, at: &[(&str, i64)]) -> Expr {
    match e {
        Expr::Var(v) => Expr::Int(at.iter().find(|(n, _)| n == v).unwrap().1),
        Expr::Prim(op, args) => delta(*op, &args.iter().map(|a| value(a, at)).collect::<Vec<_>>()).unwrap(),
        _ => e.clone(),
    }
}

fn holds(e: &Expr, x: i64, y: i64, z: i64) -> bool {
    value(e, &[("x", x), ("y", y), ("z", z)]).is_true()
}

proptest! {
    #![proptest_config(common::cases(1000))]

    #[test]
    fn simplification_preserves_meaning(seed in any::<u64>()) {
        prop_assert_eq!(common::props::simplification_preserves_meaning(seed), Ok(()));
    }

    #[test]
    fn wrapping_is_dual(seed in any::<u64>()) {
        let c = Gen::new(seed).pure_contract(3);
        let e = Expr::var("e");
        prop_assert_eq!(swap_exceptions(&wrap_ensure(&e, &c).unwrap()), wrap_assume(&e, &c).unwrap());
    }

    #[test]
    fn arithmetic_answers_hold_on_small_boxes(seed in any::<u64>(), facts in proptest::collection::vec((0..POOL, any::<bool>()), 0..4)) {
        let g = goal(seed);
        let mut pc = PathCondition::new();
        for (s, v) in &facts {
            pc.assume(atom(*s), *v);
        }
        let Some(want) = arith_decide(&g, &pc) else { return Ok(()) };
        for x in -5..=5 {
            for y in -5..=5 {
                for z in -5..=5 {
                    if facts.iter().all(|(s, v)| holds(&atom(*s), x, y, z) == *v) {
                        prop_assert_eq!(holds(&g, x, y, z), want, "{} under {} at x={} y={} z={}", g, pc, x, y, z);
                    }
                }
            }
        }
    }
}

#[test]
fn decided_goals_are_not_rare() {
    let decided = (0..500u64)
        .filter(|s| {
            let mut pc = PathCondition::new();
            pc.assume(atom(s % POOL), true);
            arith_decide(&goal(*s), &pc).is_some()
        })
        .count();
    assert!(decided > 50, "{decided}");
}

#[test]
fn delta_agrees_with_simplified_constants() {
    let e = Expr::binop(PrimOp::Sub, Expr::Int(4), Expr::binop(PrimOp::Mul, Expr::Int(2), Expr::Int(3)));
    let s = simplify(&e, &defs(), &SimplifyConfig::default()).expr;
    assert_eq!(s, delta(PrimOp::Sub, &[Expr::Int(4), Expr::Int(6)]).unwrap());
}

#[test]
fn ok_contract_leaves_nothing_to_prove() {
    let w = wrap_ensure(&Expr::var("e"), &Contract::ok()).unwrap();
    let s = simplify(&w, &defs(), &SimplifyConfig::default()).expr;
    assert!(!s.contains_exc(Exception::Bad), "{s}");
}
