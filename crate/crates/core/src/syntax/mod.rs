//! Abstract syntax of the core transactional language.
//!
//! Expressions are ordinary lambda terms extended with constructors, flat
//! case analysis, integer primitives, the two exceptions `BAD`/`UNR` and the
//! STM forms (`readTVar`, `writeTVar`, `>>=`, `return`, plus the surface-only
//! `orElse`/`retry`).

mod cases;
mod pretty;
mod program;
pub mod surface;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use cases::{complete_cases, CaseError, ConstructorSig, DataDecls};
pub use pretty::{print_alt_pattern, PrettyExpr};
pub use program::{FunContract, FunctionDef, Program, TVarDecl, Transaction};

/// Identifier for variables, functions, TVars and constructors.
pub type Name = String;

pub const TRUE: &str = "True";
pub const FALSE: &str = "False";
pub const NIL: &str = "[]";
pub const CONS: &str = ":";
pub const UNIT: &str = "()";

/// Constructor name of the `n`-ary tuple, e.g. `(,)` for pairs.
pub fn tuple_con(arity: usize) -> Name {
    debug_assert!(arity >= 2);
    format!("({})", ",".repeat(arity - 1))
}

/// Arity of a tuple constructor name, if `name` is one.
pub fn tuple_arity(name: &str) -> Option<usize> {
    let inner = name.strip_prefix('(')?.strip_suffix(')')?;
    if !inner.is_empty() && inner.chars().all(|c| c == ',') {
        Some(inner.len() + 1)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exception {
    Bad,
    Unr,
}

impl fmt::Display for Exception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exception::Bad => f.write_str("BAD"),
            Exception::Unr => f.write_str("UNR"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
    And,
    Or,
    Not,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Eq => "==",
            PrimOp::Gt => ">",
            PrimOp::Ge => ">=",
            PrimOp::Lt => "<",
            PrimOp::Le => "<=",
            PrimOp::And => "&&",
            PrimOp::Or => "||",
            PrimOp::Not => "not",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            PrimOp::Not => 1,
            _ => 2,
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, PrimOp::Add | PrimOp::Sub | PrimOp::Mul)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, PrimOp::Eq | PrimOp::Gt | PrimOp::Ge | PrimOp::Lt | PrimOp::Le)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, PrimOp::And | PrimOp::Or | PrimOp::Not)
    }
}

/// A case alternative `K x1 .. xn -> body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alt {
    pub con: Name,
    pub vars: Vec<Name>,
    pub body: Expr,
}

impl Alt {
    pub fn new(con: impl Into<Name>, vars: Vec<Name>, body: Expr) -> Self {
        Alt { con: con.into(), vars, body }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Con(Name, Vec<Expr>),
    Int(i64),
    Lam(Name, Box<Expr>),
    Exc(Exception),
    App(Box<Expr>, Box<Expr>),
    /// Reference to a top-level function in the program's definitions.
    Fun(Name),
    Case(Box<Expr>, Vec<Alt>),
    Prim(PrimOp, Vec<Expr>),
    Read(Name),
    Write(Name, Box<Expr>),
    Bind(Box<Expr>, Box<Expr>),
    Return(Box<Expr>),
    OrElse(Box<Expr>, Box<Expr>),
    Retry,
}

impl Expr {
    pub fn var(name: impl Into<Name>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn fun(name: impl Into<Name>) -> Expr {
        Expr::Fun(name.into())
    }

    pub fn lam(var: impl Into<Name>, body: Expr) -> Expr {
        Expr::Lam(var.into(), Box::new(body))
    }

    pub fn app(fun: Expr, arg: Expr) -> Expr {
        Expr::App(Box::new(fun), Box::new(arg))
    }

    pub fn apps(fun: Expr, args: impl IntoIterator<Item = Expr>) -> Expr {
        args.into_iter().fold(fun, Expr::app)
    }

    pub fn con(name: impl Into<Name>, args: Vec<Expr>) -> Expr {
        Expr::Con(name.into(), args)
    }

    pub fn case(scrutinee: Expr, alts: Vec<Alt>) -> Expr {
        Expr::Case(Box::new(scrutinee), alts)
    }

    pub fn prim(op: PrimOp, args: Vec<Expr>) -> Expr {
        Expr::Prim(op, args)
    }

    pub fn binop(op: PrimOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Prim(op, vec![lhs, rhs])
    }

    pub fn bad() -> Expr {
        Expr::Exc(Exception::Bad)
    }

    pub fn unr() -> Expr {
        Expr::Exc(Exception::Unr)
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Con(if b { TRUE } else { FALSE }.into(), vec![])
    }

    pub fn unit() -> Expr {
        Expr::Con(UNIT.into(), vec![])
    }

    pub fn nil() -> Expr {
        Expr::Con(NIL.into(), vec![])
    }

    pub fn cons(head: Expr, tail: Expr) -> Expr {
        Expr::Con(CONS.into(), vec![head, tail])
    }

    pub fn list(items: impl IntoIterator<Item = Expr>) -> Expr {
        let items: Vec<Expr> = items.into_iter().collect();
        items.into_iter().rev().fold(Expr::nil(), |tail, head| Expr::cons(head, tail))
    }

    /// Tuple of the given components; a single component is returned bare
    /// and the empty tuple is unit.
    pub fn tuple(mut items: Vec<Expr>) -> Expr {
        match items.len() {
            0 => Expr::unit(),
            1 => items.pop().unwrap(),
            n => Expr::Con(tuple_con(n), items),
        }
    }

    pub fn read(tvar: impl Into<Name>) -> Expr {
        Expr::Read(tvar.into())
    }

    pub fn write(tvar: impl Into<Name>, payload: Expr) -> Expr {
        Expr::Write(tvar.into(), Box::new(payload))
    }

    pub fn bind(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bind(Box::new(lhs), Box::new(rhs))
    }

    pub fn ret(e: Expr) -> Expr {
        Expr::Return(Box::new(e))
    }

    pub fn or_else(lhs: Expr, rhs: Expr) -> Expr {
        Expr::OrElse(Box::new(lhs), Box::new(rhs))
    }

    pub fn is_exc(&self) -> bool {
        matches!(self, Expr::Exc(_))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Con(k, a) if k == TRUE && a.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Expr::Con(k, a) if k == FALSE && a.is_empty())
    }

    /// Immediate subexpressions in canonical order (case: scrutinee then
    /// alternative bodies).
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => {
                vec![]
            }
            Expr::Con(_, args) | Expr::Prim(_, args) => args.iter().collect(),
            Expr::Lam(_, b) | Expr::Write(_, b) | Expr::Return(b) => vec![b],
            Expr::App(a, b) | Expr::Bind(a, b) | Expr::OrElse(a, b) => vec![a, b],
            Expr::Case(s, alts) => {
                let mut v = vec![&**s];
                v.extend(alts.iter().map(|a| &a.body));
                v
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// Whether any node satisfies `pred`.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn contains_exc(&self, exc: Exception) -> bool {
        self.any(&mut |e| matches!(e, Expr::Exc(x) if *x == exc))
    }

    /// Names of all functions referenced by `Fun` nodes, in first-occurrence order.
    pub fn called_functions(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.any(&mut |e| {
            if let Expr::Fun(f) = e {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            false
        });
        out
    }

    /// Splits an application spine `f a1 .. an` into `(f, [a1..an])`.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Expr::App(f, a) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        PrettyExpr(self).fmt(f)
    }
}

/// True iff `e` contains no STM node.
pub fn is_pure(e: &Expr) -> bool {
    !e.any(&mut |n| {
        matches!(
            n,
            Expr::Read(_) | Expr::Write(..) | Expr::Bind(..) | Expr::Return(_) | Expr::OrElse(..) | Expr::Retry
        )
    })
}

/// Free lambda variables of `e` in first-occurrence order.
pub fn free_vars(e: &Expr) -> Vec<Name> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    collect_free(e, &mut bound, &mut out);
    out
}

/// Free variables as a set, for membership tests.
pub fn free_var_set(e: &Expr) -> BTreeSet<Name> {
    free_vars(e).into_iter().collect()
}

fn collect_free(e: &Expr, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    match e {
        Expr::Var(x) => {
            if !bound.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        }
        Expr::Lam(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Expr::Case(s, alts) => {
            collect_free(s, bound, out);
            for alt in alts {
                let n = bound.len();
                bound.extend(alt.vars.iter().cloned());
                collect_free(&alt.body, bound, out);
                bound.truncate(n);
            }
        }
        _ => {
            for c in e.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// All variable names occurring in `e`, bound or free.
pub fn all_vars(e: &Expr, out: &mut BTreeSet<Name>) {
    match e {
        Expr::Var(x) => {
            out.insert(x.clone());
        }
        Expr::Lam(x, _) => {
            out.insert(x.clone());
        }
        Expr::Case(_, alts) => {
            for a in alts {
                out.extend(a.vars.iter().cloned());
            }
        }
        _ => {}
    }
    for c in e.children() {
        all_vars(c, out);
    }
}

/// Picks `base'k` for the smallest `k >= 1` not in `avoid`; `base` itself is
/// tried first when `try_base` is set.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>, try_base: bool) -> Name {
    let stem = match base.find('\'') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => &base[..i],
        _ => base,
    };
    if try_base && !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{stem}'{k}"))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

/// Capture-avoiding substitution `e[replacement/var]`.
pub fn substitute(e: &Expr, var: &str, replacement: &Expr) -> Expr {
    substitute_many(e, &[(var.to_string(), replacement.clone())])
}

/// Simultaneous capture-avoiding substitution.
pub fn substitute_many(e: &Expr, pairs: &[(Name, Expr)]) -> Expr {
    if pairs.is_empty() {
        return e.clone();
    }
    let map: HashMap<&str, &Expr> = pairs.iter().map(|(k, v)| (k.as_str(), v)).collect();
    let mut danger = BTreeSet::new();
    for (_, r) in pairs {
        danger.extend(free_vars(r));
    }
    Subst { map, danger }.apply(e)
}

struct Subst<'a> {
    map: HashMap<&'a str, &'a Expr>,
    /// Free variables of the replacements; binders with these names must be renamed.
    danger: BTreeSet<Name>,
}

impl Subst<'_> {
    fn apply(&self, e: &Expr) -> Expr {
        match e {
            Expr::Var(x) => match self.map.get(x.as_str()) {
                Some(r) => (*r).clone(),
                None => e.clone(),
            },
            Expr::Lam(x, body) => {
                let (vars, body) = self.under_binders(std::slice::from_ref(x), body);
                Expr::Lam(vars.into_iter().next().unwrap(), Box::new(body))
            }
            Expr::Case(s, alts) => {
                let s = self.apply(s);
                let alts = alts
                    .iter()
                    .map(|alt| {
                        let (vars, body) = self.under_binders(&alt.vars, &alt.body);
                        Alt { con: alt.con.clone(), vars, body }
                    })
                    .collect();
                Expr::Case(Box::new(s), alts)
            }
            Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
            Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| self.apply(a)).collect()),
            Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| self.apply(a)).collect()),
            Expr::App(a, b) => Expr::app(self.apply(a), self.apply(b)),
            Expr::Write(t, p) => Expr::Write(t.clone(), Box::new(self.apply(p))),
            Expr::Bind(a, b) => Expr::bind(self.apply(a), self.apply(b)),
            Expr::Return(a) => Expr::ret(self.apply(a)),
            Expr::OrElse(a, b) => Expr::or_else(self.apply(a), self.apply(b)),
        }
    }

    fn under_binders(&self, vars: &[Name], body: &Expr) -> (Vec<Name>, Expr) {
        let shadowed: Vec<&str> = vars.iter().map(|v| v.as_str()).filter(|v| self.map.contains_key(v)).collect();
        let mut inner_map = self.map.clone();
        for v in &shadowed {
            inner_map.remove(v);
        }
        if inner_map.is_empty() {
            return (vars.to_vec(), body.clone());
        }
        let body_free = free_var_set(body);
        if !inner_map.keys().any(|k| body_free.contains(*k)) {
            return (vars.to_vec(), body.clone());
        }
        let clashing: Vec<&Name> = vars.iter().filter(|v| self.danger.contains(*v)).collect();
        if clashing.is_empty() {
            let inner = Subst { map: inner_map, danger: self.danger.clone() };
            return (vars.to_vec(), inner.apply(body));
        }
        let mut avoid = self.danger.clone();
        avoid.extend(body_free.iter().cloned());
        avoid.extend(vars.iter().cloned());
        avoid.extend(inner_map.keys().map(|k| k.to_string()));
        let mut renames = Vec::new();
        let mut new_vars = Vec::with_capacity(vars.len());
        for v in vars {
            if self.danger.contains(v) {
                let nv = fresh_name(v, &avoid, false);
                avoid.insert(nv.clone());
                renames.push((v.clone(), Expr::Var(nv.clone())));
                new_vars.push(nv);
            } else {
                new_vars.push(v.clone());
            }
        }
        let renamed = substitute_many(body, &renames);
        let inner = Subst { map: inner_map, danger: self.danger.clone() };
        (new_vars, inner.apply(&renamed))
    }
}

/// Renames the bound variable of a lambda/alternative to `new`, returning the
/// new body.
pub fn rename_bound(body: &Expr, old: &str, new: &str) -> Expr {
    if old == new {
        return body.clone();
    }
    substitute(body, old, &Expr::var(new))
}

/// Structural equality up to renaming of bound variables.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    let mut env = Vec::new();
    alpha_eq_in(a, b, &mut env)
}

fn lookup_pair(env: &[(Name, Name)], a: &str, b: &str) -> bool {
    for (x, y) in env.iter().rev() {
        if x == a || y == b {
            return x == a && y == b;
        }
    }
    a == b
}

fn alpha_eq_in(a: &Expr, b: &Expr, env: &mut Vec<(Name, Name)>) -> bool {
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) => lookup_pair(env, x, y),
        (Expr::Lam(x, bx), Expr::Lam(y, by)) => {
            env.push((x.clone(), y.clone()));
            let r = alpha_eq_in(bx, by, env);
            env.pop();
            r
        }
        (Expr::Case(s1, a1), Expr::Case(s2, a2)) => {
            if a1.len() != a2.len() || !alpha_eq_in(s1, s2, env) {
                return false;
            }
            a1.iter().zip(a2).all(|(p, q)| {
                if p.con != q.con || p.vars.len() != q.vars.len() {
                    return false;
                }
                let n = env.len();
                env.extend(p.vars.iter().cloned().zip(q.vars.iter().cloned()));
                let r = alpha_eq_in(&p.body, &q.body, env);
                env.truncate(n);
                r
            })
        }
        (Expr::Con(k1, x1), Expr::Con(k2, x2)) => {
            k1 == k2 && x1.len() == x2.len() && x1.iter().zip(x2).all(|(p, q)| alpha_eq_in(p, q, env))
        }
        (Expr::Prim(o1, x1), Expr::Prim(o2, x2)) => {
            o1 == o2 && x1.len() == x2.len() && x1.iter().zip(x2).all(|(p, q)| alpha_eq_in(p, q, env))
        }
        (Expr::App(f1, a1), Expr::App(f2, a2))
        | (Expr::Bind(f1, a1), Expr::Bind(f2, a2))
        | (Expr::OrElse(f1, a1), Expr::OrElse(f2, a2)) => alpha_eq_in(f1, f2, env) && alpha_eq_in(a1, a2, env),
        (Expr::Write(t1, p1), Expr::Write(t2, p2)) => t1 == t2 && alpha_eq_in(p1, p2, env),
        (Expr::Return(p1), Expr::Return(p2)) => alpha_eq_in(p1, p2, env),
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Exc(x), Expr::Exc(y)) => x == y,
        (Expr::Fun(x), Expr::Fun(y)) | (Expr::Read(x), Expr::Read(y)) => x == y,
        (Expr::Retry, Expr::Retry) => true,
        _ => false,
    }
}

/// Replaces every `Fun(f)` whose name is in `renames` (call-site rewriting).
pub fn map_funs(e: &Expr, f: &mut impl FnMut(&Expr) -> Option<Expr>) -> Expr {
    if let Some(r) = f(e) {
        return r;
    }
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
        Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| map_funs(a, f)).collect()),
        Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| map_funs(a, f)).collect()),
        Expr::Lam(x, b) => Expr::Lam(x.clone(), Box::new(map_funs(b, f))),
        Expr::Case(s, alts) => Expr::Case(
            Box::new(map_funs(s, f)),
            alts.iter()
                .map(|a| Alt { con: a.con.clone(), vars: a.vars.clone(), body: map_funs(&a.body, f) })
                .collect(),
        ),
        Expr::App(a, b) => Expr::app(map_funs(a, f), map_funs(b, f)),
        Expr::Write(t, p) => Expr::Write(t.clone(), Box::new(map_funs(p, f))),
        Expr::Bind(a, b) => Expr::bind(map_funs(a, f), map_funs(b, f)),
        Expr::Return(a) => Expr::ret(map_funs(a, f)),
        Expr::OrElse(a, b) => Expr::or_else(map_funs(a, f), map_funs(b, f)),
    }
}

/// Turns free occurrences of the given names into `Fun` references.
pub fn bind_functions(e: &Expr, functions: &BTreeSet<Name>) -> Expr {
    fn go(e: &Expr, fns: &BTreeSet<Name>, bound: &mut Vec<Name>) -> Expr {
        match e {
            Expr::Var(x) if fns.contains(x) && !bound.contains(x) => Expr::Fun(x.clone()),
            Expr::Lam(x, b) => {
                bound.push(x.clone());
                let b = go(b, fns, bound);
                bound.pop();
                Expr::Lam(x.clone(), Box::new(b))
            }
            Expr::Case(s, alts) => {
                let s = go(s, fns, bound);
                let alts = alts
                    .iter()
                    .map(|a| {
                        let n = bound.len();
                        bound.extend(a.vars.iter().cloned());
                        let body = go(&a.body, fns, bound);
                        bound.truncate(n);
                        Alt { con: a.con.clone(), vars: a.vars.clone(), body }
                    })
                    .collect();
                Expr::Case(Box::new(s), alts)
            }
            Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
            Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| go(a, fns, bound)).collect()),
            Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| go(a, fns, bound)).collect()),
            Expr::App(a, b) => Expr::app(go(a, fns, bound), go(b, fns, bound)),
            Expr::Write(t, p) => Expr::Write(t.clone(), Box::new(go(p, fns, bound))),
            Expr::Bind(a, b) => Expr::bind(go(a, fns, bound), go(b, fns, bound)),
            Expr::Return(a) => Expr::ret(go(a, fns, bound)),
            Expr::OrElse(a, b) => Expr::or_else(go(a, fns, bound), go(b, fns, bound)),
        }
    }
    go(e, functions, &mut Vec::new())
}

/// Replaces the TVar name in `readTVar`/`writeTVar` nodes (used when a
/// TVar-typed parameter is specialized to a concrete TVar).
pub fn rename_tvar(e: &Expr, from: &str, to: &str) -> Expr {
    match e {
        Expr::Read(t) if t == from => Expr::Read(to.to_string()),
        Expr::Write(t, p) => {
            let t = if t == from { to.to_string() } else { t.clone() };
            Expr::Write(t, Box::new(rename_tvar(p, from, to)))
        }
        Expr::Lam(x, _) if x == from => e.clone(),
        Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
        Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| rename_tvar(a, from, to)).collect()),
        Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| rename_tvar(a, from, to)).collect()),
        Expr::Lam(x, b) => Expr::Lam(x.clone(), Box::new(rename_tvar(b, from, to))),
        Expr::Case(s, alts) => Expr::Case(
            Box::new(rename_tvar(s, from, to)),
            alts.iter()
                .map(|a| {
                    let body = if a.vars.iter().any(|v| v == from) { a.body.clone() } else { rename_tvar(&a.body, from, to) };
                    Alt { con: a.con.clone(), vars: a.vars.clone(), body }
                })
                .collect(),
        ),
        Expr::App(a, b) => Expr::app(rename_tvar(a, from, to), rename_tvar(b, from, to)),
        Expr::Bind(a, b) => Expr::bind(rename_tvar(a, from, to), rename_tvar(b, from, to)),
        Expr::Return(a) => Expr::ret(rename_tvar(a, from, to)),
        Expr::OrElse(a, b) => Expr::or_else(rename_tvar(a, from, to), rename_tvar(b, from, to)),
    }
}
