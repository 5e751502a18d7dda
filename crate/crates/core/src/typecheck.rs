//! Monomorphic type inference for the core language.
//!
//! Top-level functions may carry signatures; unsigned functions, lambda
//! parameters and transaction parameters are inferred by unification. The
//! result is an [`Annotation`] tree per definition, mirroring
//! [`Expr::children`], which the T-transformation consults to decide whether
//! a node is an STM operation.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::syntax::{
    free_vars, is_pure, tuple_arity, DataDecls, Expr, Name, PrimOp, Program, CONS, FALSE, NIL, TRUE, UNIT,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
    Unit,
    List(Box<Type>),
    Tuple(Vec<Type>),
    Fun(Box<Type>, Box<Type>),
    Stm(Box<Type>),
    TVarT(Box<Type>),
    /// A user-declared datatype.
    Data(Name),
    /// Unification variable; only present during inference.
    Meta(u32),
}

impl Type {
    pub fn list(t: Type) -> Type {
        Type::List(Box::new(t))
    }

    pub fn fun(a: Type, b: Type) -> Type {
        Type::Fun(Box::new(a), Box::new(b))
    }

    pub fn stm(t: Type) -> Type {
        Type::Stm(Box::new(t))
    }

    pub fn tvar(t: Type) -> Type {
        Type::TVarT(Box::new(t))
    }

    /// Tuple type; one component collapses to itself, none to unit.
    pub fn tuple(mut ts: Vec<Type>) -> Type {
        match ts.len() {
            0 => Type::Unit,
            1 => ts.pop().unwrap(),
            _ => Type::Tuple(ts),
        }
    }

    pub fn is_stm(&self) -> bool {
        matches!(self, Type::Stm(_))
    }

    /// Argument types and final result of a curried function type.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut t = self;
        while let Type::Fun(a, b) = t {
            args.push(&**a);
            t = b;
        }
        (args, t)
    }

    fn has_meta(&self) -> bool {
        match self {
            Type::Meta(_) => true,
            Type::List(t) | Type::Stm(t) | Type::TVarT(t) => t.has_meta(),
            Type::Fun(a, b) => a.has_meta() || b.has_meta(),
            Type::Tuple(ts) => ts.iter().any(Type::has_meta),
            _ => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(t: &Type) -> String {
            match t {
                Type::Fun(..) | Type::Stm(_) | Type::TVarT(_) => format!("({t})"),
                _ => t.to_string(),
            }
        }
        match self {
            Type::Int => f.write_str("Int"),
            Type::Bool => f.write_str("Bool"),
            Type::Unit => f.write_str("()"),
            Type::List(t) => write!(f, "[{t}]"),
            Type::Tuple(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            Type::Fun(a, b) => match **a {
                Type::Fun(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
            Type::Stm(t) => write!(f, "STM {}", atom(t)),
            Type::TVarT(t) => write!(f, "TVar {}", atom(t)),
            Type::Data(n) => f.write_str(n),
            Type::Meta(k) => write!(f, "?{k}"),
        }
    }
}

/// Type of every node of an expression, in [`Expr::children`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub ty: Type,
    pub children: Vec<Annotation>,
}

impl Annotation {
    pub fn child(&self, i: usize) -> &Annotation {
        &self.children[i]
    }

    fn map_types(self, f: &mut impl FnMut(Type) -> Type) -> Annotation {
        Annotation { ty: f(self.ty), children: self.children.into_iter().map(|c| c.map_types(f)).collect() }
    }
}

/// True iff the annotated node has type `STM a`.
pub fn is_stm_typed(a: &Annotation) -> bool {
    a.ty.is_stm()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("type mismatch: expected `{expected}`, found `{found}`")]
    Mismatch { expected: Type, found: Type },
    #[error("infinite type: `{0}` occurs in `{1}`")]
    Occurs(Type, Type),
    #[error("unknown identifier `{0}`")]
    UnknownVar(Name),
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(Name),
    #[error("constructor `{con}` expects {expected} arguments, got {found}")]
    ConArity { con: Name, expected: usize, found: usize },
    #[error("unknown TVar `{0}`")]
    UnknownTVar(Name),
    #[error("impure payload in `{0}`")]
    ImpurePayload(String),
    #[error("equality is not defined on `{0}`")]
    NoEquality(Type),
    #[error("transaction body has type `{0}`, expected an STM operation")]
    NotStm(Type),
    #[error("invariant `{name}` has type `{found}`, expected `{expected}`")]
    Invariant { name: Name, expected: Type, found: Type },
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("in {site}: {kind}")]
pub struct TypeError {
    pub site: String,
    pub kind: TypeErrorKind,
}

/// Typing context: datatypes, TVar content types and function types.
#[derive(Clone, Debug, Default)]
pub struct TypeCtx {
    pub data: DataDecls,
    pub tvars: IndexMap<Name, Type>,
    pub functions: IndexMap<Name, Type>,
}

impl TypeCtx {
    pub fn new(data: DataDecls, tvars: IndexMap<Name, Type>) -> Self {
        TypeCtx { data, tvars, functions: IndexMap::new() }
    }

    /// Content types of all TVars in declaration order.
    pub fn contents(&self) -> Vec<Type> {
        self.tvars.values().cloned().collect()
    }

    /// Tuple of TVar contents (the state threaded by transformed code).
    pub fn state_type(&self) -> Type {
        Type::tuple(self.contents())
    }

    /// The context seen by transformed code: STM function types are
    /// translated and TVars are no longer referenced.
    pub fn transformed(&self) -> TypeCtx {
        let state = self.state_type();
        TypeCtx {
            data: self.data.clone(),
            tvars: IndexMap::new(),
            functions: self.functions.iter().map(|(k, t)| (k.clone(), t_type(t, &state))).collect(),
        }
    }

    /// Infers the type of `e` with the given parameter types in scope.
    pub fn infer(&self, e: &Expr, params: &[(Name, Type)]) -> Result<(Type, Annotation), TypeError> {
        let mut inf = Infer::new(self, "expression");
        let mut env: Vec<(Name, Type)> = params.to_vec();
        let a = inf.infer(e, &mut env)?;
        inf.finish_eq()?;
        let a = inf.finalize(a);
        Ok((a.ty.clone(), a))
    }

    /// Infers `e` against an expected type.
    pub fn check(&self, e: &Expr, params: &[(Name, Type)], expected: &Type) -> Result<Annotation, TypeError> {
        let mut inf = Infer::new(self, "expression");
        let mut env: Vec<(Name, Type)> = params.to_vec();
        let a = inf.infer(e, &mut env)?;
        inf.unify(expected, &a.ty)?;
        inf.finish_eq()?;
        Ok(inf.finalize(a))
    }
}

/// Type of T(e) for `e : ty`: `STM a` becomes `S -> (a, S)` with `S` the
/// state tuple; other types are translated structurally.
pub fn t_type(ty: &Type, state: &Type) -> Type {
    match ty {
        Type::Stm(a) => Type::fun(state.clone(), Type::Tuple(vec![t_type(a, state), state.clone()])),
        Type::Fun(a, b) => Type::fun(t_type(a, state), t_type(b, state)),
        Type::List(a) => Type::list(t_type(a, state)),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| t_type(t, state)).collect()),
        _ => ty.clone(),
    }
}

/// Types and annotations of a whole program.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub ctx: TypeCtx,
    pub annotations: IndexMap<Name, Annotation>,
    pub transactions: IndexMap<Name, TypedTransaction>,
}

#[derive(Clone, Debug)]
pub struct TypedTransaction {
    /// Parameter types in declaration order.
    pub params: Vec<(Name, Type)>,
    pub ty: Type,
    pub annotation: Annotation,
}

impl TypedProgram {
    pub fn function_type(&self, f: &str) -> Option<&Type> {
        self.ctx.functions.get(f)
    }
}

/// Type-checks every TVar initializer, function, invariant and transaction.
pub fn check_program(p: &Program) -> Result<TypedProgram, TypeError> {
    let tvars: IndexMap<Name, Type> = p.tvars.iter().map(|t| (t.name.clone(), t.content.clone())).collect();
    let mut ctx = TypeCtx::new(p.data.clone(), tvars);

    for t in &p.tvars {
        if let Some(init) = &t.init {
            let site = format!("initializer of TVar `{}`", t.name);
            if !is_pure(init) {
                return Err(TypeError { site, kind: TypeErrorKind::ImpurePayload(init.to_string()) });
            }
            ctx.check(init, &[], &t.content).map_err(|e| TypeError { site, kind: e.kind })?;
        }
    }

    // Functions form one recursive group.
    let mut inf = Infer::new(&ctx, "program");
    let mut fun_metas: IndexMap<Name, Type> = IndexMap::new();
    for (name, f) in &p.functions {
        let t = match &f.ty {
            Some(t) => t.clone(),
            None => inf.fresh(),
        };
        fun_metas.insert(name.clone(), t);
    }
    inf.functions = fun_metas.clone();
    let mut raw = IndexMap::new();
    for (name, f) in &p.functions {
        inf.site = format!("function `{name}`");
        let a = inf.infer(&f.body, &mut Vec::new())?;
        let declared = fun_metas[name].clone();
        inf.unify(&declared, &a.ty)?;
        raw.insert(name.clone(), a);
    }
    // The invariant fixes the types its own inference leaves open.
    if let Some(inv) = &p.invariant {
        let expected = Type::fun(ctx.state_type(), Type::Bool);
        let found = fun_metas.get(inv).cloned().ok_or_else(|| TypeError {
            site: "invariant declaration".into(),
            kind: TypeErrorKind::UnknownFunction(inv.clone()),
        })?;
        if inf.unify(&expected, &found).is_err() {
            return Err(TypeError {
                site: "invariant declaration".into(),
                kind: TypeErrorKind::Invariant { name: inv.clone(), expected, found: inf.zonk(&found) },
            });
        }
    }
    inf.finish_eq()?;
    let functions: IndexMap<Name, Type> = fun_metas.iter().map(|(k, t)| (k.clone(), inf.zonk(t))).collect();
    let annotations: IndexMap<Name, Annotation> = raw.into_iter().map(|(k, a)| (k, inf.finalize(a))).collect();
    ctx.functions = functions;

    let mut transactions = IndexMap::new();
    for tx in &p.transactions {
        let mut inf = Infer::new(&ctx, format!("transaction `{}`", tx.name));
        let mut env: Vec<(Name, Type)> = Vec::new();
        for (x, _) in &tx.params {
            let m = inf.fresh();
            env.push((x.clone(), m));
        }
        let params_meta = env.clone();
        let a = inf.infer(&tx.body, &mut env)?;
        let r = inf.fresh();
        inf.unify(&Type::stm(r), &a.ty).map_err(|e| TypeError {
            site: e.site.clone(),
            kind: TypeErrorKind::NotStm(inf.zonk(&a.ty)),
        })?;
        inf.finish_eq()?;
        let params = params_meta.iter().map(|(x, t)| (x.clone(), inf.zonk(t))).collect();
        let annotation = inf.finalize(a);
        transactions.insert(
            tx.name.clone(),
            TypedTransaction { params, ty: annotation.ty.clone(), annotation },
        );
    }

    Ok(TypedProgram { ctx, annotations, transactions })
}

struct Infer<'a> {
    ctx: &'a TypeCtx,
    subst: Vec<Option<Type>>,
    functions: IndexMap<Name, Type>,
    /// Operand types of `==`, checked once fully resolved.
    eq_operands: Vec<Type>,
    site: String,
}

impl<'a> Infer<'a> {
    fn new(ctx: &'a TypeCtx, site: impl Into<String>) -> Self {
        Infer { ctx, subst: Vec::new(), functions: ctx.functions.clone(), eq_operands: Vec::new(), site: site.into() }
    }

    fn err(&self, kind: TypeErrorKind) -> TypeError {
        TypeError { site: self.site.clone(), kind }
    }

    fn fresh(&mut self) -> Type {
        self.subst.push(None);
        Type::Meta(self.subst.len() as u32 - 1)
    }

    fn shallow(&self, t: &Type) -> Type {
        let mut t = t.clone();
        while let Type::Meta(k) = t {
            match self.subst.get(k as usize).and_then(|s| s.clone()) {
                Some(u) => t = u,
                None => break,
            }
        }
        t
    }

    fn zonk(&self, t: &Type) -> Type {
        match self.shallow(t) {
            Type::List(a) => Type::list(self.zonk(&a)),
            Type::Stm(a) => Type::stm(self.zonk(&a)),
            Type::TVarT(a) => Type::tvar(self.zonk(&a)),
            Type::Fun(a, b) => Type::fun(self.zonk(&a), self.zonk(&b)),
            Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| self.zonk(t)).collect()),
            other => other,
        }
    }

    /// Resolves all metas; unconstrained ones default to unit.
    fn finalize(&self, a: Annotation) -> Annotation {
        a.map_types(&mut |t| default_metas(self.zonk(&t)))
    }

    fn occurs(&self, k: u32, t: &Type) -> bool {
        match self.shallow(t) {
            Type::Meta(j) => j == k,
            Type::List(a) | Type::Stm(a) | Type::TVarT(a) => self.occurs(k, &a),
            Type::Fun(a, b) => self.occurs(k, &a) || self.occurs(k, &b),
            Type::Tuple(ts) => ts.iter().any(|t| self.occurs(k, t)),
            _ => false,
        }
    }

    fn unify(&mut self, expected: &Type, found: &Type) -> Result<(), TypeError> {
        let a = self.shallow(expected);
        let b = self.shallow(found);
        match (&a, &b) {
            (Type::Meta(x), Type::Meta(y)) if x == y => Ok(()),
            (Type::Meta(x), t) | (t, Type::Meta(x)) => {
                if self.occurs(*x, t) {
                    return Err(self.err(TypeErrorKind::Occurs(Type::Meta(*x), self.zonk(t))));
                }
                self.subst[*x as usize] = Some(t.clone());
                Ok(())
            }
            (Type::List(x), Type::List(y)) | (Type::Stm(x), Type::Stm(y)) | (Type::TVarT(x), Type::TVarT(y)) => {
                self.unify(x, y)
            }
            (Type::Fun(a1, b1), Type::Fun(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            (Type::Tuple(xs), Type::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            _ if a == b => Ok(()),
            _ => Err(self.err(TypeErrorKind::Mismatch { expected: self.zonk(&a), found: self.zonk(&b) })),
        }
    }

    /// Field types and result type of a constructor, freshly instantiated.
    fn con_type(&mut self, k: &str) -> Result<(Vec<Type>, Type), TypeError> {
        match k {
            TRUE | FALSE => Ok((vec![], Type::Bool)),
            UNIT => Ok((vec![], Type::Unit)),
            NIL => Ok((vec![], Type::list(self.fresh()))),
            CONS => {
                let a = self.fresh();
                Ok((vec![a.clone(), Type::list(a.clone())], Type::list(a)))
            }
            _ => {
                if let Some(n) = tuple_arity(k) {
                    let fields: Vec<Type> = (0..n).map(|_| self.fresh()).collect();
                    return Ok((fields.clone(), Type::Tuple(fields)));
                }
                let sig = self.ctx.data.lookup(k).ok_or_else(|| self.err(TypeErrorKind::UnknownConstructor(k.into())))?;
                let fields = sig.constructors.iter().find(|(c, _)| c == k).map(|(_, f)| f.clone()).unwrap_or_default();
                Ok((fields, Type::Data(sig.datatype.clone())))
            }
        }
    }

    fn finish_eq(&mut self) -> Result<(), TypeError> {
        for t in std::mem::take(&mut self.eq_operands) {
            match default_metas(self.zonk(&t)) {
                Type::Int | Type::Bool | Type::Unit | Type::Data(_) => {}
                other => return Err(self.err(TypeErrorKind::NoEquality(other))),
            }
        }
        Ok(())
    }

    fn leaf(ty: Type) -> Annotation {
        Annotation { ty, children: vec![] }
    }

    fn infer(&mut self, e: &Expr, env: &mut Vec<(Name, Type)>) -> Result<Annotation, TypeError> {
        match e {
            Expr::Var(x) => {
                if let Some((_, t)) = env.iter().rev().find(|(n, _)| n == x) {
                    return Ok(Self::leaf(t.clone()));
                }
                if let Some(c) = self.ctx.tvars.get(x) {
                    return Ok(Self::leaf(Type::tvar(c.clone())));
                }
                if let Some(t) = self.functions.get(x) {
                    return Ok(Self::leaf(t.clone()));
                }
                Err(self.err(TypeErrorKind::UnknownVar(x.clone())))
            }
            Expr::Fun(f) => match self.functions.get(f) {
                Some(t) => Ok(Self::leaf(t.clone())),
                None => Err(self.err(TypeErrorKind::UnknownFunction(f.clone()))),
            },
            Expr::Int(_) => Ok(Self::leaf(Type::Int)),
            Expr::Exc(_) => Ok(Self::leaf(self.fresh())),
            Expr::Retry => {
                let a = self.fresh();
                Ok(Self::leaf(Type::stm(a)))
            }
            Expr::Con(k, args) => {
                let (fields, result) = self.con_type(k)?;
                if fields.len() != args.len() {
                    return Err(self.err(TypeErrorKind::ConArity { con: k.clone(), expected: fields.len(), found: args.len() }));
                }
                let mut children = Vec::with_capacity(args.len());
                for (a, f) in args.iter().zip(&fields) {
                    let ann = self.infer(a, env)?;
                    self.unify(f, &ann.ty)?;
                    children.push(ann);
                }
                Ok(Annotation { ty: result, children })
            }
            Expr::Lam(x, body) => {
                let a = self.fresh();
                env.push((x.clone(), a.clone()));
                let b = self.infer(body, env);
                env.pop();
                let b = b?;
                Ok(Annotation { ty: Type::fun(a, b.ty.clone()), children: vec![b] })
            }
            Expr::App(f, arg) => {
                let fa = self.infer(f, env)?;
                let aa = self.infer(arg, env)?;
                let r = self.fresh();
                self.unify(&fa.ty, &Type::fun(aa.ty.clone(), r.clone()))?;
                Ok(Annotation { ty: r, children: vec![fa, aa] })
            }
            Expr::Case(s, alts) => {
                let sa = self.infer(s, env)?;
                let r = self.fresh();
                let mut children = vec![sa.clone()];
                for alt in alts {
                    let (fields, result) = self.con_type(&alt.con)?;
                    if fields.len() != alt.vars.len() {
                        return Err(self.err(TypeErrorKind::ConArity {
                            con: alt.con.clone(),
                            expected: fields.len(),
                            found: alt.vars.len(),
                        }));
                    }
                    self.unify(&sa.ty, &result)?;
                    let n = env.len();
                    env.extend(alt.vars.iter().cloned().zip(fields));
                    let b = self.infer(&alt.body, env);
                    env.truncate(n);
                    let b = b?;
                    self.unify(&r, &b.ty)?;
                    children.push(b);
                }
                Ok(Annotation { ty: r, children })
            }
            Expr::Prim(op, args) => {
                if args.len() != op.arity() {
                    return Err(self.err(TypeErrorKind::Other(format!("`{}` applied to {} operands", op.symbol(), args.len()))));
                }
                let mut children = Vec::new();
                for a in args {
                    children.push(self.infer(a, env)?);
                }
                let ty = match op {
                    PrimOp::Add | PrimOp::Sub | PrimOp::Mul => {
                        for c in &children {
                            self.unify(&Type::Int, &c.ty)?;
                        }
                        Type::Int
                    }
                    PrimOp::Gt | PrimOp::Ge | PrimOp::Lt | PrimOp::Le => {
                        for c in &children {
                            self.unify(&Type::Int, &c.ty)?;
                        }
                        Type::Bool
                    }
                    PrimOp::Eq => {
                        let (l, r) = (children[0].ty.clone(), children[1].ty.clone());
                        self.unify(&l, &r)?;
                        self.eq_operands.push(l);
                        Type::Bool
                    }
                    PrimOp::And | PrimOp::Or | PrimOp::Not => {
                        for c in &children {
                            self.unify(&Type::Bool, &c.ty)?;
                        }
                        Type::Bool
                    }
                };
                Ok(Annotation { ty, children })
            }
            Expr::Read(t) => {
                let content = self.tvar_content(t, env)?;
                Ok(Self::leaf(Type::stm(content)))
            }
            Expr::Write(t, p) => {
                if !is_pure(p) {
                    return Err(self.err(TypeErrorKind::ImpurePayload(e.to_string())));
                }
                let content = self.tvar_content(t, env)?;
                let pa = self.infer(p, env)?;
                self.unify(&content, &pa.ty)?;
                Ok(Annotation { ty: Type::stm(Type::Unit), children: vec![pa] })
            }
            Expr::Return(p) => {
                if !is_pure(p) {
                    return Err(self.err(TypeErrorKind::ImpurePayload(e.to_string())));
                }
                let pa = self.infer(p, env)?;
                Ok(Annotation { ty: Type::stm(pa.ty.clone()), children: vec![pa] })
            }
            Expr::Bind(l, r) => {
                let la = self.infer(l, env)?;
                let ra = self.infer(r, env)?;
                let a = self.fresh();
                let b = self.fresh();
                self.unify(&Type::stm(a.clone()), &la.ty)?;
                self.unify(&Type::fun(a, Type::stm(b.clone())), &ra.ty)?;
                Ok(Annotation { ty: Type::stm(b), children: vec![la, ra] })
            }
            Expr::OrElse(l, r) => {
                let la = self.infer(l, env)?;
                let ra = self.infer(r, env)?;
                let a = self.fresh();
                self.unify(&Type::stm(a.clone()), &la.ty)?;
                self.unify(&la.ty, &ra.ty)?;
                Ok(Annotation { ty: Type::stm(a), children: vec![la, ra] })
            }
        }
    }

    /// Content type of a TVar named directly or through a TVar-typed parameter.
    fn tvar_content(&mut self, t: &str, env: &[(Name, Type)]) -> Result<Type, TypeError> {
        if let Some((_, ty)) = env.iter().rev().find(|(n, _)| n == t) {
            let ty = ty.clone();
            let c = self.fresh();
            self.unify(&Type::tvar(c.clone()), &ty)?;
            return Ok(c);
        }
        self.ctx.tvars.get(t).cloned().ok_or_else(|| self.err(TypeErrorKind::UnknownTVar(t.into())))
    }
}

fn default_metas(t: Type) -> Type {
    if !t.has_meta() {
        return t;
    }
    match t {
        Type::Meta(_) => Type::Unit,
        Type::List(a) => Type::list(default_metas(*a)),
        Type::Stm(a) => Type::stm(default_metas(*a)),
        Type::TVarT(a) => Type::tvar(default_metas(*a)),
        Type::Fun(a, b) => Type::fun(default_metas(*a), default_metas(*b)),
        Type::Tuple(ts) => Type::Tuple(ts.into_iter().map(default_metas).collect()),
        other => other,
    }
}

/// Free variables of a transaction body that are not TVars or functions.
pub fn transaction_free_vars(body: &Expr, p: &Program) -> Vec<Name> {
    free_vars(body).into_iter().filter(|x| !p.is_tvar(x) && !p.functions.contains_key(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Alt;

    fn ctx() -> TypeCtx {
        let mut tvars = IndexMap::new();
        tvars.insert("shTab".to_string(), Type::list(Type::Int));
        tvars.insert("shSum".to_string(), Type::Int);
        TypeCtx::new(DataDecls::builtin(), tvars)
    }

    #[test]
    fn read_has_stm_type() {
        let (t, _) = ctx().infer(&Expr::read("shSum"), &[]).unwrap();
        assert_eq!(t, Type::stm(Type::Int));
    }

    #[test]
    fn impure_write_payload_is_rejected() {
        let e = Expr::write("shSum", Expr::read("shSum"));
        let err = ctx().infer(&e, &[]).unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::ImpurePayload(_)));
    }

    #[test]
    fn case_with_retry_branch_is_stm() {
        let e = Expr::case(
            Expr::var("b"),
            vec![Alt::new(TRUE, vec![], Expr::ret(Expr::Int(1))), Alt::new(FALSE, vec![], Expr::Retry)],
        );
        let (t, a) = ctx().infer(&e, &[("b".into(), Type::Bool)]).unwrap();
        assert_eq!(t, Type::stm(Type::Int));
        assert!(is_stm_typed(&a));
        assert!(!is_stm_typed(&ctx().infer(&Expr::lam("x", Expr::var("x")), &[]).unwrap().1));
    }

    #[test]
    fn bind_threads_result_type() {
        let e = Expr::bind(
            Expr::read("shTab"),
            Expr::lam("t", Expr::write("shTab", Expr::cons(Expr::var("n"), Expr::var("t")))),
        );
        let (t, a) = ctx().infer(&e, &[("n".into(), Type::Int)]).unwrap();
        assert_eq!(t, Type::stm(Type::Unit));
        assert_eq!(a.children[1].ty, Type::fun(Type::list(Type::Int), Type::stm(Type::Unit)));
    }

    #[test]
    fn transformed_type_of_stm() {
        let state = ctx().state_type();
        assert_eq!(
            t_type(&Type::stm(Type::Int), &state),
            Type::fun(state.clone(), Type::Tuple(vec![Type::Int, state]))
        );
    }

    #[test]
    fn mismatch_is_reported() {
        let e = Expr::binop(PrimOp::Add, Expr::Int(1), Expr::bool(true));
        assert!(matches!(ctx().infer(&e, &[]).unwrap_err().kind, TypeErrorKind::Mismatch { .. }));
    }

    #[test]
    fn type_display() {
        let t = Type::fun(Type::Data("Msg".into()), Type::stm(Type::Data("Msg".into())));
        assert_eq!(t.to_string(), "Msg -> STM Msg");
        assert_eq!(Type::tvar(Type::Int).to_string(), "TVar Int");
    }
}
