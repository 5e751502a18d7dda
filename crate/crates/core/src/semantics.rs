//! Small-step reference interpreter.
//!
//! Reduction is call-by-name: `APP` substitutes the unevaluated argument and
//! evaluation only proceeds in function position, case scrutinees, the left
//! operand of `>>=` and (left to right) the operands of primitives.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::syntax::{is_pure, substitute_many, tuple_arity, Exception, Expr, Name, PrimOp, FALSE, TRUE};

/// Function definitions available to the `CALL` rule.
pub type Defs = IndexMap<Name, Expr>;

/// The transactional environment: declared TVars mapped to pure expressions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Env {
    entries: IndexMap<Name, Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("expected a tuple of {expected} components, found `{found}`")]
    Arity { expected: usize, found: String },
    #[error("TVar `{0}` would hold an impure expression")]
    Impure(Name),
    #[error("unknown TVar `{0}`")]
    Unknown(Name),
}

impl Env {
    pub fn new(entries: impl IntoIterator<Item = (Name, Expr)>) -> Result<Self, EnvError> {
        let entries: IndexMap<Name, Expr> = entries.into_iter().collect();
        if let Some((k, _)) = entries.iter().find(|(_, v)| !is_pure(v)) {
            return Err(EnvError::Impure(k.clone()));
        }
        Ok(Env { entries })
    }

    pub fn empty() -> Self {
        Env::default()
    }

    pub fn get(&self, t: &str) -> Option<&Expr> {
        self.entries.get(t)
    }

    pub fn set(&mut self, t: &str, e: Expr) -> Result<(), EnvError> {
        if !is_pure(&e) {
            return Err(EnvError::Impure(t.into()));
        }
        match self.entries.get_mut(t) {
            Some(slot) => {
                *slot = e;
                Ok(())
            }
            None => Err(EnvError::Unknown(t.into())),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Expr)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} ↦ {v}")?;
        }
        f.write_str("}")
    }
}

/// The environment packed as a tuple in declaration order.
pub fn env_tuple(env: &Env) -> Expr {
    Expr::tuple(env.entries.values().cloned().collect())
}

/// Inverse of [`env_tuple`] for the given TVar order.
pub fn tuple_env(e: &Expr, names: &[Name]) -> Result<Env, EnvError> {
    let comps: Vec<Expr> = match names.len() {
        0 => vec![],
        1 => vec![e.clone()],
        n => match e {
            Expr::Con(k, args) if tuple_arity(k) == Some(n) => args.clone(),
            _ => return Err(EnvError::Arity { expected: n, found: e.to_string() }),
        },
    };
    Env::new(names.iter().cloned().zip(comps))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Expr, Env),
    Value(Expr, Env),
    Stuck(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Converged(Expr, Env),
    Crashed(Env),
    Unreachable(Env),
    FuelExhausted,
    /// No rule applies to a non-value (ill-typed or open term).
    Stuck(String),
}

impl EvalOutcome {
    pub fn is_crash(&self) -> bool {
        matches!(self, EvalOutcome::Crashed(_))
    }

    /// UNR or running out of fuel, both counted as divergence.
    pub fn is_divergent(&self) -> bool {
        matches!(self, EvalOutcome::Unreachable(_) | EvalOutcome::FuelExhausted)
    }
}

/// Whether `e` is one of the value forms.
pub fn is_value(e: &Expr) -> bool {
    matches!(e, Expr::Con(..) | Expr::Lam(..) | Expr::Exc(_) | Expr::Return(_) | Expr::Int(_))
}

enum Halt {
    Value,
    Stuck(String),
}

type Reduct = (Expr, Option<Env>, &'static str);

/// One reduction step.
pub fn step(e: &Expr, env: &Env, defs: &Defs) -> StepResult {
    match reduce(e, env, defs) {
        Ok((e2, env2, _)) => StepResult::Stepped(e2, env2.unwrap_or_else(|| env.clone())),
        Err(Halt::Value) => StepResult::Value(e.clone(), env.clone()),
        Err(Halt::Stuck(r)) => StepResult::Stuck(r),
    }
}

fn exc(r: Exception) -> Result<Reduct, Halt> {
    Ok((Expr::Exc(r), None, "EXC"))
}

fn reduce(e: &Expr, env: &Env, defs: &Defs) -> Result<Reduct, Halt> {
    match e {
        Expr::Con(..) | Expr::Lam(..) | Expr::Exc(_) | Expr::Return(_) | Expr::Int(_) => Err(Halt::Value),
        Expr::Var(x) => Err(Halt::Stuck(format!("free variable `{x}`"))),
        Expr::Fun(f) => match defs.get(f) {
            Some(body) => Ok((body.clone(), None, "CALL")),
            None => Err(Halt::Stuck(format!("undefined function `{f}`"))),
        },
        Expr::App(f, a) => match &**f {
            Expr::Lam(x, body) => Ok((substitute_many(body, &[(x.clone(), (**a).clone())]), None, "APP")),
            Expr::Exc(r) => exc(*r),
            v if is_value(v) => Err(Halt::Stuck(format!("application of non-function `{v}`"))),
            _ => {
                let (f2, env2, rule) = reduce(f, env, defs)?;
                Ok((Expr::App(Box::new(f2), a.clone()), env2, rule))
            }
        },
        Expr::Case(s, alts) => match &**s {
            Expr::Con(k, args) => match alts.iter().find(|alt| &alt.con == k) {
                Some(alt) if alt.vars.len() == args.len() => {
                    let pairs: Vec<(Name, Expr)> = alt.vars.iter().cloned().zip(args.iter().cloned()).collect();
                    Ok((substitute_many(&alt.body, &pairs), None, "CASE"))
                }
                _ => Err(Halt::Stuck(format!("no alternative for constructor `{k}`"))),
            },
            Expr::Exc(r) => exc(*r),
            v if is_value(v) => Err(Halt::Stuck(format!("case on non-constructor `{v}`"))),
            _ => {
                let (s2, env2, rule) = reduce(s, env, defs)?;
                Ok((Expr::Case(Box::new(s2), alts.clone()), env2, rule))
            }
        },
        Expr::Read(t) => match env.get(t) {
            Some(v) => Ok((Expr::ret(v.clone()), None, "READ")),
            None => Err(Halt::Stuck(format!("unknown TVar `{t}`"))),
        },
        Expr::Write(t, p) => {
            let mut env2 = env.clone();
            env2.set(t, (**p).clone()).map_err(|err| Halt::Stuck(err.to_string()))?;
            Ok((Expr::ret(Expr::unit()), Some(env2), "WRITE"))
        }
        Expr::Bind(l, r) => match &**l {
            Expr::Return(p) => Ok((Expr::app((**r).clone(), (**p).clone()), None, "BIND")),
            Expr::Exc(x) => exc(*x),
            v if is_value(v) => Err(Halt::Stuck(format!("bind on non-STM value `{v}`"))),
            _ => {
                let (l2, env2, rule) = reduce(l, env, defs)?;
                Ok((Expr::Bind(Box::new(l2), r.clone()), env2, rule))
            }
        },
        Expr::Prim(op, args) => {
            for (i, a) in args.iter().enumerate() {
                match a {
                    Expr::Exc(r) => return exc(*r),
                    Expr::Int(_) => {}
                    Expr::Con(_, fields) if fields.is_empty() => {}
                    v if is_value(v) => {
                        if *op == PrimOp::Eq {
                            return Err(Halt::Stuck(format!("equality on structured value `{v}`")));
                        }
                        return Err(Halt::Stuck(format!("`{}` on non-literal `{v}`", op.symbol())));
                    }
                    _ => {
                        let (a2, env2, rule) = reduce(a, env, defs)?;
                        let mut args2 = args.clone();
                        args2[i] = a2;
                        return Ok((Expr::Prim(*op, args2), env2, rule));
                    }
                }
            }
            delta(*op, args).map(|v| (v, None, "DELTA")).map_err(Halt::Stuck)
        }
        Expr::OrElse(..) => Err(Halt::Stuck("`orElse` has no reduction rule; expand alternatives first".into())),
        Expr::Retry => Ok((Expr::unr(), None, "RETRY")),
    }
}

fn as_bool(e: &Expr) -> Option<bool> {
    match e {
        Expr::Con(k, a) if a.is_empty() && k == TRUE => Some(true),
        Expr::Con(k, a) if a.is_empty() && k == FALSE => Some(false),
        _ => None,
    }
}

/// Primitive operations on literal operands.
pub fn delta(op: PrimOp, args: &[Expr]) -> Result<Expr, String> {
    let ints = || match args {
        [Expr::Int(a), Expr::Int(b)] => Ok((*a, *b)),
        _ => Err(format!("`{}` expects integer operands", op.symbol())),
    };
    let overflow = || format!("integer overflow in `{}`", op.symbol());
    Ok(match op {
        PrimOp::Add => {
            let (a, b) = ints()?;
            Expr::Int(a.checked_add(b).ok_or_else(overflow)?)
        }
        PrimOp::Sub => {
            let (a, b) = ints()?;
            Expr::Int(a.checked_sub(b).ok_or_else(overflow)?)
        }
        PrimOp::Mul => {
            let (a, b) = ints()?;
            Expr::Int(a.checked_mul(b).ok_or_else(overflow)?)
        }
        PrimOp::Gt => ints().map(|(a, b)| Expr::bool(a > b))?,
        PrimOp::Ge => ints().map(|(a, b)| Expr::bool(a >= b))?,
        PrimOp::Lt => ints().map(|(a, b)| Expr::bool(a < b))?,
        PrimOp::Le => ints().map(|(a, b)| Expr::bool(a <= b))?,
        PrimOp::Eq => match args {
            [Expr::Int(a), Expr::Int(b)] => Expr::bool(a == b),
            [Expr::Con(k1, a1), Expr::Con(k2, a2)] if a1.is_empty() && a2.is_empty() => Expr::bool(k1 == k2),
            _ => return Err("`==` expects literal operands".into()),
        },
        PrimOp::And | PrimOp::Or => match (as_bool(&args[0]), as_bool(&args[1])) {
            (Some(a), Some(b)) => Expr::bool(if op == PrimOp::And { a && b } else { a || b }),
            _ => return Err(format!("`{}` expects boolean operands", op.symbol())),
        },
        PrimOp::Not => match as_bool(&args[0]) {
            Some(a) => Expr::bool(!a),
            None => return Err("`not` expects a boolean operand".into()),
        },
    })
}

/// Iterates [`step`] at most `fuel` times.
pub fn eval(e: &Expr, env: &Env, defs: &Defs, fuel: usize) -> EvalOutcome {
    run(e, env, defs, fuel, &mut |_, _| {}).0
}

/// Like [`eval`], also returning the fired rules with expression sizes.
pub fn eval_traced(e: &Expr, env: &Env, defs: &Defs, fuel: usize) -> (EvalOutcome, Vec<(&'static str, usize)>) {
    let mut trace = Vec::new();
    let out = run(e, env, defs, fuel, &mut |rule, size| trace.push((rule, size))).0;
    (out, trace)
}

fn run(
    e: &Expr,
    env: &Env,
    defs: &Defs,
    fuel: usize,
    on_step: &mut impl FnMut(&'static str, usize),
) -> (EvalOutcome, usize) {
    let mut cur = e.clone();
    let mut env = env.clone();
    for used in 0..=fuel {
        match &cur {
            Expr::Exc(Exception::Bad) => return (EvalOutcome::Crashed(env), used),
            Expr::Exc(Exception::Unr) => return (EvalOutcome::Unreachable(env), used),
            _ => {}
        }
        if used == fuel {
            break;
        }
        match reduce(&cur, &env, defs) {
            Ok((next, env2, rule)) => {
                on_step(rule, next.size());
                cur = next;
                if let Some(env2) = env2 {
                    env = env2;
                }
            }
            Err(Halt::Value) => return (EvalOutcome::Converged(cur, env), used),
            Err(Halt::Stuck(r)) => return (EvalOutcome::Stuck(r), used),
        }
    }
    (EvalOutcome::FuelExhausted, fuel)
}

/// A fully evaluated result, with the outcome of each constructor field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeepValue {
    Int(i64),
    Con(Name, Vec<DeepValue>),
    Lam(Expr),
    Crash,
    Unreachable,
    Diverged,
    Stuck(String),
}

impl DeepValue {
    /// Structural agreement; `None` when fuel ran out on either side.
    pub fn agrees(&self, other: &DeepValue) -> Option<bool> {
        match (self, other) {
            (DeepValue::Diverged, _) | (_, DeepValue::Diverged) => None,
            (DeepValue::Con(k1, a1), DeepValue::Con(k2, a2)) => {
                if k1 != k2 || a1.len() != a2.len() {
                    return Some(false);
                }
                let mut unknown = false;
                for (x, y) in a1.iter().zip(a2) {
                    match x.agrees(y) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            (DeepValue::Lam(_), DeepValue::Lam(_)) => Some(true),
            (DeepValue::Stuck(_), DeepValue::Stuck(_)) => Some(true),
            _ => Some(self == other),
        }
    }

    /// Back to an expression; failed fields become the matching exception.
    pub fn to_expr(&self) -> Expr {
        match self {
            DeepValue::Int(n) => Expr::Int(*n),
            DeepValue::Con(k, args) => Expr::Con(k.clone(), args.iter().map(DeepValue::to_expr).collect()),
            DeepValue::Lam(e) => e.clone(),
            DeepValue::Crash => Expr::bad(),
            DeepValue::Unreachable | DeepValue::Diverged | DeepValue::Stuck(_) => Expr::unr(),
        }
    }
}

impl fmt::Display for DeepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeepValue::Diverged => f.write_str("⊥"),
            DeepValue::Stuck(r) => write!(f, "<stuck: {r}>"),
            v => write!(f, "{}", v.to_expr()),
        }
    }
}

/// Evaluates a pure expression and then every constructor field, sharing one
/// fuel budget.
pub fn eval_deep(e: &Expr, defs: &Defs, fuel: usize) -> DeepValue {
    let mut fuel = fuel;
    deep(e, defs, &mut fuel)
}

fn deep(e: &Expr, defs: &Defs, fuel: &mut usize) -> DeepValue {
    let env = Env::empty();
    let (out, used) = run(e, &env, defs, *fuel, &mut |_, _| {});
    *fuel -= used.min(*fuel);
    match out {
        EvalOutcome::Converged(v, _) => match v {
            Expr::Int(n) => DeepValue::Int(n),
            Expr::Con(k, args) => DeepValue::Con(k, args.iter().map(|a| deep(a, defs, fuel)).collect()),
            Expr::Lam(..) => DeepValue::Lam(v),
            other => DeepValue::Stuck(format!("unexpected value `{other}`")),
        },
        EvalOutcome::Crashed(_) => DeepValue::Crash,
        EvalOutcome::Unreachable(_) => DeepValue::Unreachable,
        EvalOutcome::FuelExhausted => DeepValue::Diverged,
        EvalOutcome::Stuck(r) => DeepValue::Stuck(r),
    }
}

/// Deep value of every TVar content.
pub fn eval_env_deep(env: &Env, defs: &Defs, fuel: usize) -> Vec<DeepValue> {
    env.iter().map(|(_, v)| eval_deep(v, defs, fuel)).collect()
}
