//! Surface syntax with `do`/`let` notation, tuple-pattern lambdas and list
//! literals, and its desugaring into core expressions.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{fresh_name, free_var_set, tuple_con, Alt, Exception, Expr, Name, PrimOp, UNIT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Name),
    /// `(x1,..,xn)`; the empty tuple is the unit pattern.
    Tuple(Vec<Name>),
    Wild,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Bind(Pattern, Surface),
    Expr(Surface),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceAlt {
    pub con: Name,
    pub vars: Vec<Name>,
    pub body: Surface,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Var(Name),
    Con(Name, Vec<Surface>),
    Int(i64),
    Lam(Pattern, Box<Surface>),
    Exc(Exception),
    App(Box<Surface>, Box<Surface>),
    Fun(Name),
    Case(Box<Surface>, Vec<SurfaceAlt>),
    Prim(PrimOp, Vec<Surface>),
    Read(Name),
    Write(Name, Box<Surface>),
    Bind(Box<Surface>, Box<Surface>),
    Return(Box<Surface>),
    OrElse(Box<Surface>, Box<Surface>),
    Retry,
    Do(Vec<Stmt>),
    Let(Name, Box<Surface>, Box<Surface>),
    List(Vec<Surface>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("empty do-block")]
    EmptyDo,
    #[error("the last statement of a do-block must be an expression, found a binding of `{0}`")]
    TrailingBind(String),
}

impl From<&Expr> for Surface {
    fn from(e: &Expr) -> Self {
        let b = |e: &Expr| Box::new(Surface::from(e));
        match e {
            Expr::Var(x) => Surface::Var(x.clone()),
            Expr::Con(k, args) => Surface::Con(k.clone(), args.iter().map(Surface::from).collect()),
            Expr::Int(n) => Surface::Int(*n),
            Expr::Lam(x, body) => Surface::Lam(Pattern::Var(x.clone()), b(body)),
            Expr::Exc(r) => Surface::Exc(*r),
            Expr::App(f, a) => Surface::App(b(f), b(a)),
            Expr::Fun(f) => Surface::Fun(f.clone()),
            Expr::Case(s, alts) => Surface::Case(
                b(s),
                alts.iter()
                    .map(|a| SurfaceAlt { con: a.con.clone(), vars: a.vars.clone(), body: Surface::from(&a.body) })
                    .collect(),
            ),
            Expr::Prim(op, args) => Surface::Prim(*op, args.iter().map(Surface::from).collect()),
            Expr::Read(t) => Surface::Read(t.clone()),
            Expr::Write(t, p) => Surface::Write(t.clone(), b(p)),
            Expr::Bind(l, r) => Surface::Bind(b(l), b(r)),
            Expr::Return(p) => Surface::Return(b(p)),
            Expr::OrElse(l, r) => Surface::OrElse(b(l), b(r)),
            Expr::Retry => Surface::Retry,
        }
    }
}

/// Expands `do`, `let`, tuple-pattern lambdas and list literals.
pub fn desugar(s: &Surface) -> Result<Expr, DesugarError> {
    let d = |s: &Surface| desugar(s).map(Box::new);
    Ok(match s {
        Surface::Var(x) => Expr::Var(x.clone()),
        Surface::Con(k, args) => Expr::Con(k.clone(), args.iter().map(desugar).collect::<Result<_, _>>()?),
        Surface::Int(n) => Expr::Int(*n),
        Surface::Lam(pat, body) => lambda(pat, desugar(body)?),
        Surface::Exc(r) => Expr::Exc(*r),
        Surface::App(f, a) => Expr::App(d(f)?, d(a)?),
        Surface::Fun(f) => Expr::Fun(f.clone()),
        Surface::Case(scrut, alts) => Expr::Case(
            d(scrut)?,
            alts.iter()
                .map(|a| Ok(Alt { con: a.con.clone(), vars: a.vars.clone(), body: desugar(&a.body)? }))
                .collect::<Result<_, DesugarError>>()?,
        ),
        Surface::Prim(op, args) => Expr::Prim(*op, args.iter().map(desugar).collect::<Result<_, _>>()?),
        Surface::Read(t) => Expr::Read(t.clone()),
        Surface::Write(t, p) => Expr::Write(t.clone(), d(p)?),
        Surface::Bind(l, r) => Expr::Bind(d(l)?, d(r)?),
        Surface::Return(p) => Expr::Return(d(p)?),
        Surface::OrElse(l, r) => Expr::OrElse(d(l)?, d(r)?),
        Surface::Retry => Expr::Retry,
        Surface::Do(stmts) => desugar_do(stmts)?,
        // let x = e' in e  ==  (\x. e) e'
        Surface::Let(x, bound, body) => Expr::app(Expr::lam(x.clone(), desugar(body)?), desugar(bound)?),
        Surface::List(items) => Expr::list(items.iter().map(desugar).collect::<Result<Vec<_>, _>>()?),
    })
}

fn desugar_do(stmts: &[Stmt]) -> Result<Expr, DesugarError> {
    match stmts {
        [] => Err(DesugarError::EmptyDo),
        [Stmt::Expr(e)] => desugar(e),
        [Stmt::Bind(p, _)] => Err(DesugarError::TrailingBind(match p {
            Pattern::Var(x) => x.clone(),
            Pattern::Tuple(xs) => format!("({})", xs.join(",")),
            Pattern::Wild => "_".into(),
        })),
        [first, rest @ ..] => {
            let tail = desugar_do(rest)?;
            let (pat, e) = match first {
                Stmt::Bind(p, e) => (p.clone(), e),
                Stmt::Expr(e) => (Pattern::Wild, e),
            };
            Ok(Expr::bind(desugar(e)?, lambda(&pat, tail)))
        }
    }
}

/// `\(x1,..,xn). e` becomes `\p. case p of {(x1,..,xn) -> e}` with `p` fresh.
fn lambda(pat: &Pattern, body: Expr) -> Expr {
    match pat {
        Pattern::Var(x) => Expr::lam(x.clone(), body),
        Pattern::Wild => Expr::lam("_", body),
        Pattern::Tuple(names) => {
            let mut avoid: BTreeSet<Name> = free_var_set(&body);
            avoid.extend(names.iter().cloned());
            let p = fresh_name("p", &avoid, true);
            let con = match names.len() {
                0 => UNIT.to_string(),
                n => tuple_con(n),
            };
            Expr::lam(p.clone(), Expr::case(Expr::var(p), vec![Alt::new(con, names.clone(), body)]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Surface {
        Surface::Var(x.into())
    }

    #[test]
    fn do_bind_expands_to_bind_and_lambda() {
        let s = Surface::Do(vec![
            Stmt::Bind(Pattern::Var("x".into()), Surface::Read("t".into())),
            Stmt::Expr(Surface::Write("t".into(), Box::new(v("x")))),
        ]);
        let e = desugar(&s).unwrap();
        assert_eq!(e, Expr::bind(Expr::read("t"), Expr::lam("x", Expr::write("t", Expr::var("x")))));
    }

    #[test]
    fn single_statement_do_is_the_statement() {
        let s = Surface::Do(vec![Stmt::Expr(Surface::Retry)]);
        assert_eq!(desugar(&s).unwrap(), Expr::Retry);
    }

    #[test]
    fn let_becomes_application() {
        let s = Surface::Let("x".into(), Box::new(Surface::Int(1)), Box::new(v("x")));
        assert_eq!(desugar(&s).unwrap(), Expr::app(Expr::lam("x", Expr::var("x")), Expr::Int(1)));
    }

    #[test]
    fn malformed_do_blocks() {
        assert_eq!(desugar(&Surface::Do(vec![])), Err(DesugarError::EmptyDo));
        let s = Surface::Do(vec![Stmt::Bind(Pattern::Var("x".into()), Surface::Read("t".into()))]);
        assert!(matches!(desugar(&s), Err(DesugarError::TrailingBind(_))));
    }

    #[test]
    fn tuple_lambda_uses_a_fresh_scrutinee() {
        let s = Surface::Lam(Pattern::Tuple(vec!["a".into(), "p".into()]), Box::new(v("a")));
        match desugar(&s).unwrap() {
            Expr::Lam(x, body) => {
                assert_ne!(x, "a");
                assert_ne!(x, "p");
                assert!(matches!(*body, Expr::Case(ref s, _) if **s == Expr::Var(x.clone())));
            }
            other => panic!("{other:?}"),
        }
    }
}
