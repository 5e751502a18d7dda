//! Purification of STM code: the `T` operator on expressions and contracts,
//! orElse expansion, transaction closure and TVar-argument specialization.

mod gamma;
mod specialize;

use std::collections::BTreeSet;

use thiserror::Error;

pub use gamma::{gamma_expand, with_children};
pub use specialize::{rewrite_call_sites, specialize_program, specialize_tvar_args, Specialization};

use crate::contracts::{Binder, Contract};
use crate::semantics::Defs;
use crate::syntax::{all_vars, free_var_set, fresh_name, is_pure, rename_bound, tuple_con, Alt, Expr, Name, Program};
use crate::typecheck::{Annotation, Type, TypeError, TypedProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("`orElse` must be expanded before the transformation")]
    OrElse,
    #[error("`{0}` does not name a declared TVar")]
    UnknownTVar(Name),
    #[error("type annotation does not match `{0}`")]
    Annotation(String),
    #[error("{count} variants exceed the cap of {cap}")]
    GammaCap { count: usize, cap: usize },
    #[error("free variable `{0}` has no contract")]
    MissingContract(Name),
    #[error("no invariant declared")]
    NoInvariant,
    #[error("unknown invariant function `{0}`")]
    UnknownInvariant(Name),
    #[error("cannot specialize `{function}`: {reason}")]
    Specialize { function: Name, reason: String },
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// `T(e)` for an annotated expression over the TVars `tvars` (in order).
pub fn t_expr(e: &Expr, ann: &Annotation, tvars: &[Name]) -> Result<Expr, TransformError> {
    let e = avoid_tvar_binders(e, tvars);
    Purifier { tvars }.go(&e, ann)
}

fn mentions_stm(ann: &Annotation) -> bool {
    fn ty(t: &Type) -> bool {
        match t {
            Type::Stm(_) => true,
            Type::List(a) | Type::TVarT(a) => ty(a),
            Type::Fun(a, b) => ty(a) || ty(b),
            Type::Tuple(ts) => ts.iter().any(ty),
            _ => false,
        }
    }
    ty(&ann.ty) || ann.children.iter().any(mentions_stm)
}

/// Renames lambda and pattern binders that coincide with TVar names, since
/// the transformed code binds those names to the TVar contents.
fn avoid_tvar_binders(e: &Expr, tvars: &[Name]) -> Expr {
    let mut avoid: BTreeSet<Name> = tvars.iter().cloned().collect();
    all_vars(e, &mut avoid);
    fn go(e: &Expr, tvars: &[Name], avoid: &mut BTreeSet<Name>) -> Expr {
        let fresh = |x: &Name, avoid: &mut BTreeSet<Name>| {
            if tvars.contains(x) {
                let n = fresh_name(x, avoid, false);
                avoid.insert(n.clone());
                Some(n)
            } else {
                None
            }
        };
        match e {
            Expr::Lam(x, b) => match fresh(x, avoid) {
                Some(n) => {
                    let b = rename_bound(b, x, &n);
                    Expr::Lam(n, Box::new(go(&b, tvars, avoid)))
                }
                None => Expr::Lam(x.clone(), Box::new(go(b, tvars, avoid))),
            },
            Expr::Case(s, alts) => {
                let s = go(s, tvars, avoid);
                let alts = alts
                    .iter()
                    .map(|a| {
                        let mut vars = Vec::new();
                        let mut body = a.body.clone();
                        for v in &a.vars {
                            match fresh(v, avoid) {
                                Some(n) => {
                                    body = rename_bound(&body, v, &n);
                                    vars.push(n);
                                }
                                None => vars.push(v.clone()),
                            }
                        }
                        Alt { con: a.con.clone(), vars, body: go(&body, tvars, avoid) }
                    })
                    .collect();
                Expr::Case(Box::new(s), alts)
            }
            _ => {
                let kids = e.children().into_iter().map(|c| go(c, tvars, avoid)).collect();
                with_children(e, kids)
            }
        }
    }
    if !e.any(&mut |n| match n {
        Expr::Lam(x, _) => tvars.contains(x),
        Expr::Case(_, alts) => alts.iter().any(|a| a.vars.iter().any(|v| tvars.contains(v))),
        _ => false,
    }) {
        return e.clone();
    }
    go(e, tvars, &mut avoid)
}

struct Purifier<'a> {
    tvars: &'a [Name],
}

impl Purifier<'_> {
    fn state(&self) -> Expr {
        Expr::tuple(self.tvars.iter().map(Expr::var).collect())
    }

    /// `λ(t1,..,tn). body`; a single TVar binds directly.
    fn state_lam(&self, body: Expr) -> Expr {
        match self.tvars.len() {
            1 => Expr::lam(self.tvars[0].clone(), body),
            n => {
                let mut avoid = free_var_set(&body);
                avoid.extend(self.tvars.iter().cloned());
                let s = fresh_name("s", &avoid, true);
                if n == 0 {
                    return Expr::lam(s, body);
                }
                Expr::lam(s.clone(), Expr::case(Expr::var(s), vec![Alt::new(tuple_con(n), self.tvars.to_vec(), body)]))
            }
        }
    }

    fn index(&self, t: &str) -> Result<usize, TransformError> {
        self.tvars.iter().position(|x| x == t).ok_or_else(|| TransformError::UnknownTVar(t.into()))
    }

    fn go(&self, e: &Expr, ann: &Annotation) -> Result<Expr, TransformError> {
        if ann.children.len() != e.children().len() {
            return Err(TransformError::Annotation(e.to_string()));
        }
        if is_pure(e) && !mentions_stm(ann) {
            return Ok(e.clone());
        }
        let stm = ann.ty.is_stm();
        Ok(match e {
            Expr::Read(t) => {
                self.index(t)?;
                self.state_lam(Expr::tuple(vec![Expr::var(t.clone()), self.state()]))
            }
            Expr::Write(t, p) => {
                let k = self.index(t)?;
                let mut comps: Vec<Expr> = self.tvars.iter().map(Expr::var).collect();
                comps[k] = (**p).clone();
                self.state_lam(Expr::tuple(vec![Expr::unit(), Expr::tuple(comps)]))
            }
            Expr::Return(p) => self.state_lam(Expr::tuple(vec![(**p).clone(), self.state()])),
            Expr::Retry => Expr::unr(),
            Expr::OrElse(..) => return Err(TransformError::OrElse),
            Expr::Bind(l, r) => {
                let tl = self.go(l, ann.child(0))?;
                let tr = self.go(r, ann.child(1))?;
                let mut avoid = free_var_set(&tr);
                avoid.extend(self.tvars.iter().cloned());
                let a = fresh_name("a", &avoid, true);
                avoid.insert(a.clone());
                let s = fresh_name("s", &avoid, true);
                let body = Expr::case(
                    Expr::app(tl, self.state()),
                    vec![Alt::new(tuple_con(2), vec![a.clone(), s.clone()], Expr::apps(tr, [Expr::var(a), Expr::var(s)]))],
                );
                self.state_lam(body)
            }
            Expr::Fun(f) if stm => self.state_lam(Expr::app(Expr::fun(f.clone()), self.state())),
            Expr::App(f, x) => {
                let tf = self.go(f, ann.child(0))?;
                let tx = self.go(x, ann.child(1))?;
                if stm {
                    self.state_lam(Expr::apps(tf, [tx, self.state()]))
                } else {
                    Expr::app(tf, tx)
                }
            }
            Expr::Case(s, alts) => {
                let ts = self.go(s, ann.child(0))?;
                let mut talts = Vec::with_capacity(alts.len());
                for (i, a) in alts.iter().enumerate() {
                    talts.push(Alt { con: a.con.clone(), vars: a.vars.clone(), body: self.go(&a.body, ann.child(i + 1))? });
                }
                let c = Expr::case(ts, talts);
                if stm {
                    self.state_lam(Expr::app(c, self.state()))
                } else {
                    c
                }
            }
            Expr::Lam(x, b) => Expr::lam(x.clone(), self.go(b, ann.child(0))?),
            Expr::Con(..) | Expr::Prim(..) => {
                let mut kids = Vec::new();
                for (i, c) in e.children().into_iter().enumerate() {
                    kids.push(self.go(c, ann.child(i))?);
                }
                with_children(e, kids)
            }
            Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) => e.clone(),
        })
    }
}

/// `T(c)`: STM operation contracts become dependent function contracts
/// from the initial state to the (result, final state) pair.
pub fn t_contract(c: &Contract) -> Contract {
    match c {
        Contract::StmOp(b, pre, post, res) => Contract::dep_fun(
            b.clone(),
            t_contract(pre),
            Contract::Tuple(vec![t_contract(res), t_contract(post)]),
        ),
        Contract::DepFun(b, c1, c2) => Contract::dep_fun(b.clone(), t_contract(c1), t_contract(c2)),
        Contract::Tuple(cs) => Contract::Tuple(cs.iter().map(t_contract).collect()),
        Contract::Pred(..) | Contract::Any => c.clone(),
    }
}

/// The transactional invariant `||c <> c|| Any` with
/// `c = {(t1,..,tn) | inv (t1,..,tn)}`. An invariant whose body is constant
/// `True` yields `||Ok <> Ok|| Any`.
pub fn invariant_to_contract(p: &Program) -> Result<Contract, TransformError> {
    let inv = p.invariant.as_ref().ok_or(TransformError::NoInvariant)?;
    let def = p.functions.get(inv).ok_or_else(|| TransformError::UnknownInvariant(inv.clone()))?;
    let names = p.tvar_names();
    let binder = Binder::tuple(names.clone());
    let trivially_true = match &def.body {
        Expr::Lam(_, b) => b.is_true() || matches!(&**b, Expr::Case(_, alts) if alts.len() == 1 && alts[0].body.is_true()),
        _ => false,
    };
    let c = if trivially_true {
        Contract::Pred(binder.clone(), Expr::bool(true))
    } else {
        Contract::Pred(binder.clone(), Expr::app(Expr::fun(inv.clone()), Expr::tuple(names.iter().map(Expr::var).collect())))
    };
    Ok(Contract::stm(binder, c.clone(), c, Contract::Any))
}

/// Closes a transaction over its free variables:
/// `(λx1..λxn. e, c1 -> .. -> cn -> inv)`.
pub fn close_transaction(
    e: &Expr,
    params: &[(Name, Contract)],
    tvars: &[Name],
    inv: &Contract,
) -> Result<(Expr, Contract), TransformError> {
    for x in free_var_set(e) {
        if !tvars.contains(&x) && !params.iter().any(|(p, _)| *p == x) {
            return Err(TransformError::MissingContract(x));
        }
    }
    let mut body = e.clone();
    let mut contract = inv.clone();
    for (x, c) in params.iter().rev() {
        body = Expr::lam(x.clone(), body);
        contract = Contract::dep_fun(Binder::var(x.clone()), c.clone(), contract);
    }
    Ok((body, contract))
}

/// Transformed function bodies Δ' of a typed program.
pub fn transform_defs(p: &Program, typed: &TypedProgram) -> Result<Defs, TransformError> {
    let tvars = p.tvar_names();
    let mut out = Defs::new();
    for (name, f) in &p.functions {
        let ann = typed.annotations.get(name).ok_or_else(|| TransformError::Annotation(name.clone()))?;
        out.insert(name.clone(), t_expr(&f.body, ann, &tvars)?);
    }
    Ok(out)
}
