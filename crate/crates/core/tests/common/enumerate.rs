//! Exhaustive STM operations over a single Int TVar.

use super::{if_, single_tvar_program};
use stmcheck::checker::{CheckConfig, Checker};
use stmcheck::contracts::{Oracle, OracleConfig, SatVerdict};
use stmcheck::syntax::{Expr, Name, PrimOp};
use stmcheck::transform::{t_contract, t_expr};
use stmcheck::typecheck::{t_type, Type};

pub const MAX_SIZE: usize = 8;

pub fn ints(n: usize, vars: &[Name]) -> Vec<Expr> {
    let mut out = Vec::new();
    if n == 1 {
        out.extend([Expr::Int(0), Expr::Int(1)]);
        out.extend(vars.iter().map(Expr::var));
    }
    if n >= 3 {
        for l in 1..n - 1 {
            for a in ints(l, vars) {
                for b in ints(n - 1 - l, vars) {
                    for op in [PrimOp::Add, PrimOp::Sub] {
                        out.push(Expr::binop(op, a.clone(), b.clone()));
                    }
                }
            }
        }
    }
    out
}

pub fn bools(n: usize, vars: &[Name]) -> Vec<Expr> {
    if n == 1 {
        return vec![Expr::bool(true), Expr::bool(false)];
    }
    let mut out = Vec::new();
    for l in 1..n.saturating_sub(1) {
        for a in ints(l, vars) {
            for b in ints(n - 1 - l, vars) {
                out.push(Expr::binop(PrimOp::Gt, a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Every STM operation of exactly `n` nodes over the TVar `t`, returning
/// Int (`int = true`) or unit.
pub fn stms(n: usize, vars: &[Name], int: bool) -> Vec<Expr> {
    let mut out = Vec::new();
    if n == 1 {
        if int {
            out.push(Expr::read("t"));
        }
        out.extend([Expr::Retry, Expr::bad(), Expr::unr()]);
        return out;
    }
    for i in ints(n - 1, vars) {
        out.push(if int { Expr::ret(i) } else { Expr::write("t", i) });
    }
    if !int && n == 2 {
        out.push(Expr::ret(Expr::unit()));
    }
    let x = format!("x{}", vars.len());
    let mut inner = vars.to_vec();
    inner.push(x.clone());
    for a in 1..n.saturating_sub(2) {
        let b = n - 2 - a;
        for m in stms(a, vars, true) {
            for k in stms(b, &inner, int) {
                out.push(Expr::bind(m.clone(), Expr::lam(x.clone(), k)));
            }
        }
        for m in stms(a, vars, false) {
            for k in stms(b, vars, int) {
                out.push(Expr::bind(m.clone(), Expr::lam("u", k)));
            }
        }
    }
    for c in 1..n.saturating_sub(2) {
        for l in 1..n - 1 - c {
            let r = n - 1 - c - l;
            for cond in bools(c, vars) {
                for s1 in stms(l, vars, int) {
                    for s2 in stms(r, vars, int) {
                        out.push(if_(cond.clone(), s1.clone(), s2.clone()));
                    }
                }
            }
        }
    }
    out
}

pub fn all_operations() -> Vec<(Expr, Type)> {
    let mut out = Vec::new();
    for n in 1..=MAX_SIZE {
        for (int, ty) in [(true, Type::stm(Type::Int)), (false, Type::stm(Type::Unit))] {
            out.extend(stms(n, &[], int).into_iter().map(|e| (e, ty.clone())));
        }
    }
    out
}

#[derive(Default, Debug)]
pub struct Tally {
    pub checked: usize,
    pub safe: usize,
    pub violated: usize,
    /// Static Safe together with an oracle violation.
    pub unsound: Vec<String>,
    /// Holds on one side, Violated on the other.
    pub contradictions: Vec<String>,
}

fn verdict_label(v: &SatVerdict) -> &'static str {
    match v {
        SatVerdict::Holds => "holds",
        SatVerdict::Violated(_) => "violated",
        SatVerdict::Inconclusive(_) => "inconclusive",
    }
}

/// Runs the checker and both oracles on every enumerated operation against
/// `||{t|t>0} <> {t|t>0}|| Any` and `||Ok <> Ok|| Any`.
pub fn run_enumeration() -> Tally {
    let mut tally = Tally::default();
    let cfg = CheckConfig { witness_search: false, ..CheckConfig::default() };
    let ocfg = OracleConfig { fuel: 2000, samples: 40, seed: 0 };
    let invariants = [
        Expr::binop(PrimOp::Gt, Expr::var("t"), Expr::Int(0)),
        Expr::bool(true),
    ];
    for (e, ty) in all_operations() {
        for inv in &invariants {
            let p = single_tvar_program(e.clone(), inv.clone());
            let checker = Checker::new(&p, cfg.clone()).unwrap_or_else(|err| panic!("{e}: {err}"));
            let report = checker.check_transaction("tx").unwrap();
            let c = checker.invariant().unwrap().clone();
            let ctx = &checker.typed().ctx;
            let defs = checker.program().definitions();
            let direct = Oracle::new(&defs, ctx, ocfg.clone()).satisfies(&e, &c, &ty);

            let ann = ctx.check(&e, &[], &ty).unwrap();
            let te = t_expr(&e, &ann, &checker.program().tvar_names()).unwrap();
            let tctx = ctx.transformed();
            let tty = t_type(&ty, &Type::Int);
            let pure = Oracle::new(checker.pure_defs(), &tctx, ocfg.clone()).satisfies(&te, &t_contract(&c), &tty);

            tally.checked += 1;
            if report.verdict.is_safe() {
                tally.safe += 1;
            }
            if direct.is_violated() {
                tally.violated += 1;
            }
            if report.verdict.is_safe() && (direct.is_violated() || pure.is_violated()) {
                tally.unsound.push(format!("{e} against {c}"));
            }
            let clash = (direct.is_holds() && pure.is_violated()) || (direct.is_violated() && pure.is_holds());
            if clash {
                tally.contradictions.push(format!(
                    "{e} against {c}: {} vs {}",
                    verdict_label(&direct),
                    verdict_label(&pure)
                ));
            }
        }
    }
    tally
}
