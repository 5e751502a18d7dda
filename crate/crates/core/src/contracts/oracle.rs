//! Testing approximation of contract satisfaction.
//!
//! Quantifiers range over bounded value spaces; a definite `Holds` is only
//! reported when every space involved was covered within the budget.

use std::cell::{Cell, RefCell};
use std::fmt;

use super::generate::Space;
use super::{Binder, Contract};
use crate::semantics::{env_tuple, eval, eval_deep, tuple_env, DeepValue, Defs, EvalOutcome};
use crate::syntax::{is_pure, DataDecls, Expr, Name};
use crate::typecheck::{Type, TypeCtx};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub fuel: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { fuel: 10_000, samples: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessStep {
    /// Argument supplied to a dependent function contract.
    Arg { binder: Binder, value: Expr },
    /// Initial environment of an STM operation, as a tuple.
    Env { names: Vec<Name>, value: Expr },
    Component(usize),
    /// Continue with the value returned by the STM operation.
    Returned,
    /// Continue with the final environment tuple.
    PostState,
    /// A function value crashed on this argument.
    CrashArg(Expr),
}

/// Path through the contract to a concrete violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    pub reason: String,
}

fn bind_display(names: &[Name], value: &Expr) -> String {
    match value {
        Expr::Con(_, args) if names.len() > 1 && args.len() == names.len() => names
            .iter()
            .zip(args)
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(", "),
        _ => format!("{}={value}", names.join(",")),
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for s in &self.steps {
            parts.push(match s {
                WitnessStep::Arg { binder, value } => bind_display(&binder.names(), value),
                WitnessStep::Env { names, value } => bind_display(names, value),
                WitnessStep::Component(i) => format!("component {i}"),
                WitnessStep::Returned => "returned value".into(),
                WitnessStep::PostState => "final state".into(),
                WitnessStep::CrashArg(a) => format!("applied to {a}"),
            });
        }
        if parts.is_empty() {
            f.write_str(&self.reason)
        } else {
            write!(f, "{}: {}", parts.join(", "), self.reason)
        }
    }
}

impl Witness {
    /// The argument and environment steps only, e.g. for reports.
    pub fn inputs(&self) -> Vec<(Vec<Name>, Expr)> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                WitnessStep::Arg { binder, value } => Some((binder.names(), value.clone())),
                WitnessStep::Env { names, value } => Some((names.clone(), value.clone())),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    Holds,
    Violated(Witness),
    Inconclusive(String),
}

impl SatVerdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, SatVerdict::Violated(_))
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, SatVerdict::Holds)
    }
}

type Check = Result<(), Witness>;

fn violation(reason: impl Into<String>) -> Check {
    Err(Witness { steps: vec![], reason: reason.into() })
}

fn prefixed(r: Check, step: WitnessStep) -> Check {
    r.map_err(|mut w| {
        w.steps.insert(0, step);
        w
    })
}

/// Satisfaction checker over a fixed program and TVar set.
pub struct Oracle<'a> {
    defs: &'a Defs,
    data: &'a DataDecls,
    tvars: Vec<Name>,
    state: Type,
    cfg: OracleConfig,
    runs: Cell<usize>,
    quantifiers: Cell<u64>,
    doubt: RefCell<Option<String>>,
}

impl<'a> Oracle<'a> {
    pub fn new(defs: &'a Defs, ctx: &'a TypeCtx, cfg: OracleConfig) -> Self {
        Oracle {
            defs,
            data: &ctx.data,
            tvars: ctx.tvars.keys().cloned().collect(),
            state: ctx.state_type(),
            cfg,
            runs: Cell::new(0),
            quantifiers: Cell::new(0),
            doubt: RefCell::new(None),
        }
    }

    fn fork(&self) -> Oracle<'a> {
        Oracle {
            defs: self.defs,
            data: self.data,
            tvars: self.tvars.clone(),
            state: self.state.clone(),
            cfg: self.cfg.clone(),
            runs: Cell::new(0),
            quantifiers: Cell::new(self.quantifiers.get().wrapping_mul(31).wrapping_add(7)),
            doubt: RefCell::new(None),
        }
    }

    pub fn data(&self) -> &DataDecls {
        self.data
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    /// Decides `e ∈ c` for `e : ty` as far as the bounded spaces allow.
    pub fn satisfies(&self, e: &Expr, c: &Contract, ty: &Type) -> SatVerdict {
        let run = self.fork();
        match run.sat(e, c, ty) {
            Err(w) => SatVerdict::Violated(w),
            Ok(()) => match run.doubt.into_inner() {
                Some(reason) => SatVerdict::Inconclusive(reason),
                None => SatVerdict::Holds,
            },
        }
    }

    fn doubt(&self, reason: impl Into<String>) {
        let mut d = self.doubt.borrow_mut();
        if d.is_none() {
            *d = Some(reason.into());
        }
    }

    fn eval(&self, e: &Expr) -> EvalOutcome {
        eval(e, &crate::semantics::Env::empty(), self.defs, self.cfg.fuel)
    }

    fn sat(&self, e: &Expr, c: &Contract, ty: &Type) -> Check {
        match c {
            Contract::Any => {
                if is_pure(e) {
                    Ok(())
                } else {
                    violation("impure expression against Any")
                }
            }
            Contract::Pred(b, p) => self.sat_pred(e, b, p, ty),
            Contract::DepFun(b, c1, c2) => {
                let Type::Fun(a, r) = ty else {
                    self.doubt(format!("contract `{c}` used at type `{ty}`"));
                    return Ok(());
                };
                let v = match self.eval(e) {
                    EvalOutcome::Converged(v, _) => v,
                    EvalOutcome::Crashed(_) => return violation("crashes instead of yielding a function"),
                    EvalOutcome::Stuck(r) => {
                        self.doubt(format!("stuck: {r}"));
                        return Ok(());
                    }
                    _ => return Ok(()),
                };
                if !matches!(v, Expr::Lam(..)) {
                    return violation(format!("`{v}` is not a function"));
                }
                self.quantify(c1, a, |arg| {
                    let r = self.sat(&Expr::app(v.clone(), arg.clone()), &c2.instantiate(b, arg), r);
                    prefixed(r, WitnessStep::Arg { binder: b.clone(), value: arg.clone() })
                })
            }
            Contract::Tuple(cs) => {
                let ts: Vec<Type> = match ty {
                    Type::Tuple(ts) if ts.len() == cs.len() => ts.clone(),
                    _ => {
                        self.doubt(format!("contract `{c}` used at type `{ty}`"));
                        return Ok(());
                    }
                };
                match self.eval(e) {
                    EvalOutcome::Converged(Expr::Con(_, args), _) if args.len() == cs.len() => {
                        for (i, ((a, c), t)) in args.iter().zip(cs).zip(&ts).enumerate() {
                            prefixed(self.sat(a, c, t), WitnessStep::Component(i))?;
                        }
                        Ok(())
                    }
                    EvalOutcome::Converged(v, _) => violation(format!("`{v}` is not a tuple")),
                    EvalOutcome::Crashed(_) => violation("crashes instead of yielding a tuple"),
                    EvalOutcome::Stuck(r) => {
                        self.doubt(format!("stuck: {r}"));
                        Ok(())
                    }
                    _ => Ok(()),
                }
            }
            Contract::StmOp(b, pre, post, res) => {
                let Type::Stm(a) = ty else {
                    self.doubt(format!("contract `{c}` used at type `{ty}`"));
                    return Ok(());
                };
                let state = self.state.clone();
                self.quantify(pre, &state, |sigma| {
                    let step = WitnessStep::Env { names: self.tvars.clone(), value: sigma.clone() };
                    let env = match tuple_env(sigma, &self.tvars) {
                        Ok(env) => env,
                        Err(_) => return Ok(()),
                    };
                    let r = match eval(e, &env, self.defs, self.cfg.fuel) {
                        EvalOutcome::Crashed(_) => violation("the transaction crashes"),
                        EvalOutcome::Converged(Expr::Return(p), env2) => {
                            prefixed(self.sat(&p, &res.instantiate(b, sigma), a), WitnessStep::Returned).and_then(|_| {
                                let post_c = post.instantiate(b, sigma);
                                prefixed(self.sat(&env_tuple(&env2), &post_c, &state), WitnessStep::PostState)
                            })
                        }
                        EvalOutcome::Converged(v, _) => violation(format!("`{v}` is not a return")),
                        EvalOutcome::Stuck(r) => {
                            self.doubt(format!("stuck: {r}"));
                            Ok(())
                        }
                        EvalOutcome::Unreachable(_) | EvalOutcome::FuelExhausted => Ok(()),
                    };
                    prefixed(r, step)
                })
            }
        }
    }

    fn sat_pred(&self, e: &Expr, b: &Binder, p: &Expr, ty: &Type) -> Check {
        if !is_pure(e) {
            return violation("impure expression against a pure contract");
        }
        let v = match self.eval(e) {
            EvalOutcome::Converged(v, _) => v,
            EvalOutcome::Crashed(_) => return violation("crashes"),
            EvalOutcome::Stuck(r) => {
                self.doubt(format!("stuck: {r}"));
                return Ok(());
            }
            EvalOutcome::Unreachable(_) | EvalOutcome::FuelExhausted => return Ok(()),
        };
        self.crash_free(&v, ty)?;
        if p.is_true() {
            return Ok(());
        }
        match self.eval(&Contract::pred_instance(b, p, &v)) {
            EvalOutcome::Converged(r, _) if r.is_true() => Ok(()),
            EvalOutcome::Converged(r, _) if r.is_false() => {
                let shown = eval_deep(&v, self.defs, self.cfg.fuel);
                violation(format!("`{p}` is False for {b}={shown}"))
            }
            EvalOutcome::Converged(r, _) => {
                self.doubt(format!("predicate evaluated to `{r}`"));
                Ok(())
            }
            EvalOutcome::Crashed(_) => violation(format!("`{p}` crashes for {b}={v}")),
            EvalOutcome::Stuck(r) => {
                self.doubt(format!("stuck: {r}"));
                Ok(())
            }
            EvalOutcome::Unreachable(_) | EvalOutcome::FuelExhausted => Ok(()),
        }
    }

    /// Approximates crash-freedom: fields must not crash and functions must
    /// not crash on sampled arguments.
    fn crash_free(&self, v: &Expr, ty: &Type) -> Check {
        match v {
            Expr::Con(_, args) => {
                for a in args {
                    if let Some(c) = crash_in(&eval_deep(a, self.defs, self.cfg.fuel)) {
                        return violation(format!("component crashes ({c})"));
                    }
                }
                Ok(())
            }
            Expr::Lam(..) => {
                let Type::Fun(a, _) = ty else { return Ok(()) };
                let space = Space::for_type(a, self.data);
                let (plan, full) = space.plan(self.cfg.samples, self.next_seed());
                if !full {
                    self.doubt("crash-freedom sampled on a bounded argument space");
                }
                for i in plan {
                    let arg = space.nth(i);
                    let out = eval_deep(&Expr::app(v.clone(), arg.clone()), self.defs, self.cfg.fuel);
                    if crash_in(&out).is_some() {
                        return prefixed(violation("crashes on a crash-free argument"), WitnessStep::CrashArg(arg));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn next_seed(&self) -> u64 {
        let q = self.quantifiers.get().wrapping_add(1);
        self.quantifiers.set(q);
        self.cfg.seed ^ q.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    /// Runs `body` for every candidate of `ty` that satisfies `c`.
    fn quantify(&self, c: &Contract, ty: &Type, mut body: impl FnMut(&Expr) -> Check) -> Check {
        let space = Space::for_type(ty, self.data);
        let scan = self.cfg.samples.saturating_mul(10).max(1);
        let (plan, full) = space.plan(scan, self.next_seed());
        if !full {
            self.doubt("quantifier space larger than the enumeration bound");
        }
        let single_state = !matches!(ty, Type::Tuple(_));
        let candidates = plan.into_iter().map(|i| space.nth(i)).chain(single_state.then(Expr::bad));
        for cand in candidates {
            if self.runs.get() >= self.cfg.samples {
                self.doubt("sample budget exhausted");
                break;
            }
            match self.fork().satisfies(&cand, c, ty) {
                SatVerdict::Holds => {}
                SatVerdict::Violated(_) => continue,
                SatVerdict::Inconclusive(_) => {
                    self.doubt("membership of a candidate could not be decided");
                    continue;
                }
            }
            self.runs.set(self.runs.get() + 1);
            body(&cand)?;
        }
        Ok(())
    }
}

fn crash_in(v: &DeepValue) -> Option<String> {
    match v {
        DeepValue::Crash => Some("BAD".into()),
        DeepValue::Con(_, args) => args.iter().find_map(crash_in),
        _ => None,
    }
}

/// Re-runs a witness and reports whether the violation reproduces.
pub fn replay(oracle: &Oracle, e: &Expr, c: &Contract, ty: &Type, w: &Witness) -> bool {
    walk(oracle, e, c, ty, &w.steps)
}

fn walk(o: &Oracle, e: &Expr, c: &Contract, ty: &Type, steps: &[WitnessStep]) -> bool {
    let Some((first, rest)) = steps.split_first() else {
        return o.satisfies(e, c, ty).is_violated();
    };
    match (c, first, ty) {
        (Contract::DepFun(b, c1, c2), WitnessStep::Arg { value, .. }, Type::Fun(a, r)) => {
            o.satisfies(value, c1, a).is_holds()
                && walk(o, &Expr::app(e.clone(), value.clone()), &c2.instantiate(b, value), r, rest)
        }
        (Contract::StmOp(b, pre, post, res), WitnessStep::Env { value, .. }, Type::Stm(a)) => {
            if !o.satisfies(value, pre, &o.state).is_holds() {
                return false;
            }
            let Ok(env) = tuple_env(value, &o.tvars) else { return false };
            match (eval(e, &env, o.defs, o.cfg.fuel), rest.split_first()) {
                (EvalOutcome::Crashed(_), None) => true,
                (EvalOutcome::Converged(v, _), None) => !matches!(v, Expr::Return(_)),
                (EvalOutcome::Converged(Expr::Return(p), _), Some((WitnessStep::Returned, more))) => {
                    walk(o, &p, &res.instantiate(b, value), a, more)
                }
                (EvalOutcome::Converged(Expr::Return(_), env2), Some((WitnessStep::PostState, more))) => {
                    walk(o, &env_tuple(&env2), &post.instantiate(b, value), &o.state, more)
                }
                _ => false,
            }
        }
        (Contract::Tuple(cs), WitnessStep::Component(i), Type::Tuple(ts)) => match o.eval(e) {
            EvalOutcome::Converged(Expr::Con(_, args), _) if *i < args.len() && *i < cs.len() => {
                walk(o, &args[*i], &cs[*i], &ts[*i], rest)
            }
            _ => false,
        },
        (Contract::Pred(..), WitnessStep::CrashArg(arg), _) => match o.eval(e) {
            EvalOutcome::Converged(v @ Expr::Lam(..), _) => {
                crash_in(&eval_deep(&Expr::app(v, arg.clone()), o.defs, o.cfg.fuel)).is_some()
            }
            _ => false,
        },
        _ => false,
    }
}
