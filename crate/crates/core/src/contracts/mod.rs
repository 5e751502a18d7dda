//! Contracts: predicate, dependent function, tuple, `Any` and the STM
//! operation contract `||x:c1 <> c2|| c`.

mod generate;
mod oracle;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{alpha_eq, free_var_set, fresh_name, substitute_many, tuple_con, Alt, Expr, Name, UNIT};
use crate::typecheck::{Type, TypeCtx, TypeError};

pub use generate::{generate_inhabitant, GenError, Space};
pub use oracle::{replay, Oracle, OracleConfig, SatVerdict, Witness, WitnessStep};

/// Variable(s) bound by a contract. A tuple binder `(x1,..,xn)` names the
/// components of a tuple value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binder {
    Var(Name),
    Tuple(Vec<Name>),
}

impl Binder {
    pub fn var(x: impl Into<Name>) -> Binder {
        Binder::Var(x.into())
    }

    pub fn tuple(xs: impl IntoIterator<Item = impl Into<Name>>) -> Binder {
        let mut xs: Vec<Name> = xs.into_iter().map(Into::into).collect();
        if xs.len() == 1 {
            Binder::Var(xs.pop().unwrap())
        } else {
            Binder::Tuple(xs)
        }
    }

    pub fn names(&self) -> Vec<Name> {
        match self {
            Binder::Var(x) => vec![x.clone()],
            Binder::Tuple(xs) => xs.clone(),
        }
    }

    /// Pairs binding each name to (a projection of) `value`.
    pub fn bindings(&self, value: &Expr) -> Vec<(Name, Expr)> {
        match self {
            Binder::Var(x) => vec![(x.clone(), value.clone())],
            Binder::Tuple(xs) => {
                if let Expr::Con(_, args) = value {
                    if args.len() == xs.len() && is_tuple_value(value, xs.len()) {
                        return xs.iter().cloned().zip(args.iter().cloned()).collect();
                    }
                }
                (0..xs.len()).map(|i| (xs[i].clone(), project(value, xs, i))).collect()
            }
        }
    }

    /// `case scrut of {(x1,..,xn) -> body}`; a variable binder substitutes.
    pub fn destructure(&self, scrut: &Expr, body: Expr) -> Expr {
        match self {
            Binder::Var(x) => substitute_many(&body, &[(x.clone(), scrut.clone())]),
            Binder::Tuple(xs) => Expr::case(scrut.clone(), vec![Alt::new(tuple_pattern(xs.len()), xs.clone(), body)]),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Binder {
        let r = |n: &Name| if n == from { to.to_string() } else { n.clone() };
        match self {
            Binder::Var(x) => Binder::Var(r(x)),
            Binder::Tuple(xs) => Binder::Tuple(xs.iter().map(r).collect()),
        }
    }
}

impl fmt::Display for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binder::Var(x) => f.write_str(x),
            Binder::Tuple(xs) => write!(f, "({})", xs.join(",")),
        }
    }
}

fn tuple_pattern(n: usize) -> Name {
    if n == 0 {
        UNIT.into()
    } else {
        tuple_con(n)
    }
}

fn is_tuple_value(e: &Expr, n: usize) -> bool {
    matches!(e, Expr::Con(k, _) if *k == tuple_pattern(n))
}

fn project(value: &Expr, xs: &[Name], i: usize) -> Expr {
    Expr::case(value.clone(), vec![Alt::new(tuple_pattern(xs.len()), xs.to_vec(), Expr::var(xs[i].clone()))])
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Contract {
    Pred(Binder, Expr),
    DepFun(Binder, Box<Contract>, Box<Contract>),
    Tuple(Vec<Contract>),
    Any,
    StmOp(Binder, Box<Contract>, Box<Contract>, Box<Contract>),
}

impl Contract {
    pub fn pred(x: impl Into<Name>, p: Expr) -> Contract {
        Contract::Pred(Binder::Var(x.into()), p)
    }

    /// `Ok`, i.e. `{x | True}`.
    pub fn ok() -> Contract {
        Contract::Pred(Binder::var("x"), Expr::bool(true))
    }

    pub fn dep_fun(x: Binder, dom: Contract, cod: Contract) -> Contract {
        Contract::DepFun(x, Box::new(dom), Box::new(cod))
    }

    /// `c1 -> c2` where the binder is taken from `c1` when it is a predicate.
    pub fn arrow(dom: Contract, cod: Contract) -> Contract {
        let b = dom.default_binder();
        Contract::dep_fun(b, dom, cod)
    }

    pub fn stm(x: Binder, pre: Contract, post: Contract, result: Contract) -> Contract {
        Contract::StmOp(x, Box::new(pre), Box::new(post), Box::new(result))
    }

    /// `|| c1 <> c2 || c` with the binder taken from `c1`.
    pub fn stm_op(pre: Contract, post: Contract, result: Contract) -> Contract {
        let b = pre.default_binder();
        Contract::stm(b, pre, post, result)
    }

    fn default_binder(&self) -> Binder {
        match self {
            Contract::Pred(b, _) => b.clone(),
            _ => Binder::var("_"),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Contract::Pred(_, p) if p.is_true())
    }

    /// No STM operation contract inside.
    pub fn is_pure(&self) -> bool {
        match self {
            Contract::Pred(..) | Contract::Any => true,
            Contract::DepFun(_, a, b) => a.is_pure() && b.is_pure(),
            Contract::Tuple(cs) => cs.iter().all(Contract::is_pure),
            Contract::StmOp(..) => false,
        }
    }

    /// Free variables of the predicates, excluding contract binders.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Contract::Pred(b, p) => {
                let names = b.names();
                for v in free_var_set(p) {
                    if !names.contains(&v) && !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Contract::DepFun(b, c1, c2) => {
                c1.collect_free(bound, out);
                let n = bound.len();
                bound.extend(b.names());
                c2.collect_free(bound, out);
                bound.truncate(n);
            }
            Contract::Tuple(cs) => cs.iter().for_each(|c| c.collect_free(bound, out)),
            Contract::Any => {}
            Contract::StmOp(b, pre, post, res) => {
                pre.collect_free(bound, out);
                let n = bound.len();
                bound.extend(b.names());
                post.collect_free(bound, out);
                res.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// The predicate `p[e/x]` of a predicate contract.
    pub fn pred_instance(b: &Binder, p: &Expr, e: &Expr) -> Expr {
        match b {
            Binder::Var(x) => substitute_many(p, &[(x.clone(), e.clone())]),
            Binder::Tuple(_) => {
                if let Expr::Con(_, _) = e {
                    if let Binder::Tuple(xs) = b {
                        if is_tuple_value(e, xs.len()) {
                            return substitute_many(p, &b.bindings(e));
                        }
                    }
                }
                b.destructure(e, p.clone())
            }
        }
    }

    /// `c[e/x]` for a binder, capture-avoiding.
    pub fn instantiate(&self, b: &Binder, e: &Expr) -> Contract {
        self.substitute(&b.bindings(e))
    }

    /// Simultaneous capture-avoiding substitution into all predicates.
    pub fn substitute(&self, pairs: &[(Name, Expr)]) -> Contract {
        if pairs.is_empty() {
            return self.clone();
        }
        match self {
            Contract::Any => Contract::Any,
            Contract::Tuple(cs) => Contract::Tuple(cs.iter().map(|c| c.substitute(pairs)).collect()),
            Contract::Pred(b, p) => {
                let (b, inner, p) = under_binder(b, pairs, p.clone(), |c, from, to| {
                    substitute_many(c, &[(from.to_string(), Expr::var(to))])
                });
                Contract::Pred(b, substitute_many(&p, &inner))
            }
            Contract::DepFun(b, c1, c2) => {
                let c1 = c1.substitute(pairs);
                let (b, inner, c2) = under_binder(b, pairs, (**c2).clone(), |c, from, to| {
                    c.substitute(&[(from.to_string(), Expr::var(to))])
                });
                Contract::dep_fun(b, c1, c2.substitute(&inner))
            }
            Contract::StmOp(b, pre, post, res) => {
                let pre = pre.substitute(pairs);
                let pair = Contract::Tuple(vec![(**post).clone(), (**res).clone()]);
                let (b, inner, pair) = under_binder(b, pairs, pair, |c, from, to| {
                    c.substitute(&[(from.to_string(), Expr::var(to))])
                });
                match pair.substitute(&inner) {
                    Contract::Tuple(mut v) => {
                        let res = v.pop().unwrap();
                        let post = v.pop().unwrap();
                        Contract::stm(b, pre, post, res)
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Replaces every predicate `p` by `f(p)`, e.g. to rename functions.
    pub fn map_preds(&self, f: &mut impl FnMut(&Expr) -> Expr) -> Contract {
        match self {
            Contract::Pred(b, p) => Contract::Pred(b.clone(), f(p)),
            Contract::DepFun(b, c1, c2) => Contract::dep_fun(b.clone(), c1.map_preds(f), c2.map_preds(f)),
            Contract::Tuple(cs) => Contract::Tuple(cs.iter().map(|c| c.map_preds(f)).collect()),
            Contract::Any => Contract::Any,
            Contract::StmOp(b, a, c, d) => Contract::stm(b.clone(), a.map_preds(f), c.map_preds(f), d.map_preds(f)),
        }
    }

    /// Encodes the contract as an expression so that binders can be compared
    /// with [`alpha_eq`].
    fn encode(&self) -> Expr {
        fn lam(b: &Binder, body: Expr) -> Expr {
            match b {
                Binder::Var(x) => Expr::lam(x.clone(), body),
                Binder::Tuple(xs) => Expr::lam(
                    "#s",
                    Expr::case(Expr::var("#s"), vec![Alt::new(tuple_pattern(xs.len()), xs.clone(), body)]),
                ),
            }
        }
        match self {
            Contract::Pred(b, p) => Expr::con("#Pred", vec![lam(b, p.clone())]),
            Contract::DepFun(b, c1, c2) => Expr::con("#Fun", vec![c1.encode(), lam(b, c2.encode())]),
            Contract::Tuple(cs) => Expr::con("#Tuple", cs.iter().map(Contract::encode).collect()),
            Contract::Any => Expr::con("#Any", vec![]),
            Contract::StmOp(b, pre, post, res) => Expr::con(
                "#Stm",
                vec![pre.encode(), lam(b, Expr::con("#Post", vec![post.encode(), res.encode()]))],
            ),
        }
    }
}

/// Renames binder names that would capture free variables of the
/// replacements, and drops pairs shadowed by the binder.
fn under_binder<T>(
    b: &Binder,
    pairs: &[(Name, Expr)],
    body: T,
    rename: impl Fn(&T, &str, &str) -> T,
) -> (Binder, Vec<(Name, Expr)>, T) {
    let names = b.names();
    let inner: Vec<(Name, Expr)> = pairs.iter().filter(|(k, _)| !names.contains(k)).cloned().collect();
    if inner.is_empty() {
        return (b.clone(), inner, body);
    }
    let mut danger = BTreeSet::new();
    for (k, v) in &inner {
        danger.extend(free_var_set(v));
        danger.insert(k.clone());
    }
    let mut b = b.clone();
    let mut body = body;
    for n in names {
        if danger.contains(&n) && inner.iter().any(|(_, v)| free_var_set(v).contains(&n)) {
            let mut avoid = danger.clone();
            avoid.extend(b.names());
            let fresh = fresh_name(&n, &avoid, false);
            body = rename(&body, &n, &fresh);
            b = b.rename(&n, &fresh);
        }
    }
    (b, inner, body)
}

/// Structural equality up to renaming of contract binders.
pub fn contract_alpha_eq(a: &Contract, b: &Contract) -> bool {
    alpha_eq(&a.encode(), &b.encode())
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contract::Pred(_, p) if p.is_true() => f.write_str("Ok"),
            Contract::Pred(b, p) => write!(f, "{{{b} | {p}}}"),
            Contract::Any => f.write_str("Any"),
            Contract::Tuple(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            Contract::DepFun(b, c1, c2) => {
                let dom = match **c1 {
                    Contract::DepFun(..) => format!("({c1})"),
                    _ => c1.to_string(),
                };
                if binder_is_implicit(b, c1, c2) {
                    write!(f, "{dom} -> {c2}")
                } else {
                    write!(f, "{b}:{dom} -> {c2}")
                }
            }
            Contract::StmOp(b, pre, post, res) => {
                let res_s = match **res {
                    Contract::DepFun(..) => format!("({res})"),
                    _ => res.to_string(),
                };
                let scope = Contract::Tuple(vec![(**post).clone(), (**res).clone()]);
                if binder_is_implicit(b, pre, &scope) {
                    write!(f, "|| {pre} <> {post} || {res_s}")
                } else {
                    write!(f, "|| {b}:{pre} <> {post} || {res_s}")
                }
            }
        }
    }
}

/// The binder can be left out when it is unused or repeats the domain's own.
fn binder_is_implicit(b: &Binder, dom: &Contract, scope: &Contract) -> bool {
    if matches!(dom, Contract::Pred(db, p) if db == b && !p.is_true()) {
        return true;
    }
    let free = scope.free_vars();
    b.names().iter().all(|n| !free.contains(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractTypeError {
    #[error("contract `{contract}` does not fit type `{ty}`")]
    Shape { contract: String, ty: Type },
    #[error("predicate of `{contract}`: {source}")]
    Predicate { contract: String, source: TypeError },
}

/// Checks that `c` is a contract for expressions of type `ty`.
pub fn check_contract_type(c: &Contract, ty: &Type, ctx: &TypeCtx) -> Result<(), ContractTypeError> {
    check_in(c, ty, ctx, &mut Vec::new())
}

/// Boolean form of [`check_contract_type`].
pub fn contract_fits(c: &Contract, ty: &Type, ctx: &TypeCtx) -> bool {
    check_contract_type(c, ty, ctx).is_ok()
}

fn bind_types(b: &Binder, ty: &Type) -> Option<Vec<(Name, Type)>> {
    match b {
        Binder::Var(x) => Some(vec![(x.clone(), ty.clone())]),
        Binder::Tuple(xs) => match ty {
            Type::Tuple(ts) if ts.len() == xs.len() => Some(xs.iter().cloned().zip(ts.iter().cloned()).collect()),
            Type::Unit if xs.is_empty() => Some(vec![]),
            _ => None,
        },
    }
}

fn check_in(c: &Contract, ty: &Type, ctx: &TypeCtx, scope: &mut Vec<(Name, Type)>) -> Result<(), ContractTypeError> {
    let shape = || ContractTypeError::Shape { contract: c.to_string(), ty: ty.clone() };
    match c {
        Contract::Any => {
            if ty.is_stm() {
                Err(shape())
            } else {
                Ok(())
            }
        }
        Contract::Pred(b, p) => {
            if ty.is_stm() {
                return Err(shape());
            }
            let vars = bind_types(b, ty).ok_or_else(shape)?;
            let n = scope.len();
            scope.extend(vars);
            let r = ctx.check(p, scope, &Type::Bool);
            scope.truncate(n);
            r.map(|_| ()).map_err(|source| ContractTypeError::Predicate { contract: c.to_string(), source })
        }
        Contract::DepFun(b, c1, c2) => match ty {
            Type::Fun(a, r) => {
                check_in(c1, a, ctx, scope)?;
                let vars = bind_types(b, a).ok_or_else(shape)?;
                let n = scope.len();
                scope.extend(vars);
                let res = check_in(c2, r, ctx, scope);
                scope.truncate(n);
                res
            }
            _ => Err(shape()),
        },
        Contract::Tuple(cs) => match ty {
            Type::Tuple(ts) if ts.len() == cs.len() => {
                for (c, t) in cs.iter().zip(ts) {
                    check_in(c, t, ctx, scope)?;
                }
                Ok(())
            }
            _ => Err(shape()),
        },
        Contract::StmOp(b, pre, post, res) => match ty {
            Type::Stm(a) => {
                if !(pre.is_pure() && post.is_pure() && res.is_pure()) {
                    return Err(shape());
                }
                let state = ctx.state_type();
                check_in(pre, &state, ctx, scope)?;
                let vars = bind_types(b, &state).ok_or_else(shape)?;
                let n = scope.len();
                scope.extend(vars);
                let r = check_in(post, &state, ctx, scope).and_then(|_| check_in(res, a, ctx, scope));
                scope.truncate(n);
                r
            }
            _ => Err(shape()),
        },
    }
}
