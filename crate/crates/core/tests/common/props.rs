//! Per-seed checks shared by the property suites and the acceptance run.
//! Each returns a description of the first discrepancy.

use super::{defs, envs, tvar_names, type_ctx, Gen, Scope, StmResult};
use stmcheck::checker::{simplify, SimplifyConfig};
use stmcheck::contracts::Contract;
use stmcheck::semantics::{env_tuple, eval, eval_deep, DeepValue, Env, EvalOutcome};
use stmcheck::syntax::{alpha_eq, is_pure, tuple_con, Expr};
use stmcheck::transform::{t_contract, t_expr};
use stmcheck::typecheck::Type;

pub const FUEL: usize = 4000;

pub type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A well-typed STM operation and its transformation.
pub fn stm_case(seed: u64) -> (Expr, Expr) {
    let mut g = Gen::new(seed);
    let res = if seed % 2 == 0 { StmResult::Int } else { StmResult::Unit };
    let e = g.stm(4, &Scope::default(), res);
    let ty = Type::stm(if res == StmResult::Int { Type::Int } else { Type::Unit });
    let ann = type_ctx().check(&e, &[], &ty).unwrap_or_else(|err| panic!("{e}: {err}"));
    let t = t_expr(&e, &ann, &tvar_names()).unwrap();
    (e, t)
}

fn contains_stm_op(c: &Contract) -> bool {
    match c {
        Contract::StmOp(..) => true,
        Contract::DepFun(_, a, b) => contains_stm_op(a) || contains_stm_op(b),
        Contract::Tuple(cs) => cs.iter().any(contains_stm_op),
        Contract::Pred(..) | Contract::Any => false,
    }
}

pub fn purity(seed: u64) -> Outcome {
    let (_, t) = stm_case(seed);
    ensure(is_pure(&t), || format!("impure: {t}"))?;
    let c = t_contract(&Gen::new(seed).contract(3));
    ensure(!contains_stm_op(&c), || format!("STM contract left: {c}"))
}

pub fn idempotence(seed: u64) -> Outcome {
    let (_, t) = stm_case(seed);
    let (_, ann) = type_ctx().transformed().infer(&t, &[]).map_err(|e| format!("{t}: {e}"))?;
    let tt = t_expr(&t, &ann, &tvar_names()).map_err(|e| e.to_string())?;
    ensure(alpha_eq(&t, &tt), || format!("{t} vs {tt}"))?;
    let c = t_contract(&Gen::new(seed).contract(3));
    let cc = t_contract(&c);
    ensure(cc == c, || format!("{c} vs {cc}"))
}

pub fn pure_fixed_points(seed: u64) -> Outcome {
    let e = Gen::new(seed).pure(4);
    let (_, ann) = type_ctx().infer(&e, &[]).map_err(|err| format!("{e}: {err}"))?;
    let t = t_expr(&e, &ann, &tvar_names()).map_err(|err| err.to_string())?;
    ensure(alpha_eq(&t, &e), || format!("{t} vs {e}"))?;
    let c = Gen::new(seed).pure_contract(3);
    let tc = t_contract(&c);
    ensure(tc == c, || format!("{c} vs {tc}"))
}

pub fn lambda_form(seed: u64) -> Outcome {
    let (e, t) = stm_case(seed);
    if e.is_exc() || e == Expr::Retry {
        return Ok(());
    }
    match eval(&t, &Env::empty(), &defs(), FUEL) {
        EvalOutcome::Converged(Expr::Lam(..), _) | EvalOutcome::FuelExhausted => Ok(()),
        other => Err(format!("{t} gave {other:?}")),
    }
}

/// Deep value of the source run, shaped like the transformed result.
fn expected_pair(payload: &Expr, env: &Env) -> DeepValue {
    DeepValue::Con(
        tuple_con(2),
        vec![eval_deep(payload, &defs(), FUEL), eval_deep(&env_tuple(env), &defs(), FUEL)],
    )
}

/// Runs the operation and its transformation in every test environment.
pub fn runs_agree(seed: u64) -> Outcome {
    let (e, t) = stm_case(seed);
    for env in envs() {
        let direct = eval(&e, &env, &defs(), FUEL);
        let pure = eval_deep(&Expr::app(t.clone(), env_tuple(&env)), &defs(), 2 * FUEL);
        let ok = match &direct {
            EvalOutcome::Converged(Expr::Return(p), env2) => expected_pair(p, env2).agrees(&pure) != Some(false),
            EvalOutcome::Crashed(_) => matches!(pure, DeepValue::Crash | DeepValue::Diverged),
            EvalOutcome::Unreachable(_) => matches!(pure, DeepValue::Unreachable | DeepValue::Diverged),
            EvalOutcome::FuelExhausted => !matches!(pure, DeepValue::Crash | DeepValue::Unreachable | DeepValue::Stuck(_)),
            _ => false,
        };
        ensure(ok, || format!("{e} in {env:?}: {direct:?} vs {pure}"))?;
    }
    Ok(())
}

pub fn simplification_preserves_meaning(seed: u64) -> Outcome {
    let e = Gen::new(seed).pure(5);
    let s = simplify(&e, &defs(), &SimplifyConfig::default());
    let before = eval_deep(&e, &defs(), 20_000);
    let after = eval_deep(&s.expr, &defs(), 20_000);
    ensure(before.agrees(&after) != Some(false), || format!("{e} => {}: {before} vs {after}", s.expr))
}
