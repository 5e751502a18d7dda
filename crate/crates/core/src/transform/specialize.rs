use indexmap::IndexMap;

use super::TransformError;
use crate::contracts::{Binder, Contract};
use crate::syntax::{rename_tvar, substitute_many, Expr, FunContract, FunctionDef, Name, Program};
use crate::typecheck::{Type, TypedProgram};

/// One instance of a function whose TVar parameters are fixed to declared
/// TVars.
#[derive(Clone, Debug, PartialEq)]
pub struct Specialization {
    pub original: Name,
    /// Positions of the TVar parameters among all parameters.
    pub tvar_positions: Vec<usize>,
    /// Parameter name and the TVar it is bound to.
    pub assignment: Vec<(Name, Name)>,
    pub def: FunctionDef,
}

impl Specialization {
    pub fn contract(&self) -> Option<&Contract> {
        match &self.def.contract {
            Some(FunContract::Plain(c)) => Some(c),
            _ => None,
        }
    }
}

fn fail(f: &FunctionDef, reason: impl Into<String>) -> TransformError {
    TransformError::Specialize { function: f.name.clone(), reason: reason.into() }
}

/// Specializes `def : ty` for every assignment of declared TVars (with
/// matching content type) to its TVar parameters. A function without TVar
/// parameters is returned unchanged.
pub fn specialize_tvar_args(
    def: &FunctionDef,
    ty: &Type,
    tvars: &IndexMap<Name, Type>,
) -> Result<Vec<Specialization>, TransformError> {
    let (args, result) = ty.uncurry();
    let positions: Vec<usize> = args.iter().enumerate().filter(|(_, t)| matches!(t, Type::TVarT(_))).map(|(i, _)| i).collect();
    if positions.is_empty() {
        if matches!(def.contract, Some(FunContract::TVarParams { .. })) {
            return Err(fail(def, "TVar contract on a function without TVar parameters"));
        }
        return Ok(vec![Specialization { original: def.name.clone(), tvar_positions: vec![], assignment: vec![], def: def.clone() }]);
    }
    let needed = positions.last().unwrap() + 1;
    let mut params = Vec::new();
    let mut rest = &def.body;
    while params.len() < needed {
        match rest {
            Expr::Lam(x, b) => {
                params.push(x.clone());
                rest = b;
            }
            _ => return Err(fail(def, "TVar parameters must be bound by leading lambdas")),
        }
    }
    let mut choices: Vec<Vec<Name>> = Vec::new();
    for &i in &positions {
        let Type::TVarT(content) = args[i] else { unreachable!() };
        let fits: Vec<Name> = tvars.iter().filter(|(_, t)| *t == &**content).map(|(n, _)| n.clone()).collect();
        if fits.is_empty() {
            return Err(fail(def, format!("no TVar holds `{content}`")));
        }
        choices.push(fits);
    }
    let mut assignments: Vec<Vec<Name>> = vec![vec![]];
    for fits in &choices {
        assignments = assignments
            .into_iter()
            .flat_map(|prefix| {
                fits.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect();
    }

    let kept: Vec<(usize, &Type)> = args.iter().enumerate().filter(|(i, _)| !positions.contains(i)).map(|(i, t)| (i, *t)).collect();
    let mut out = Vec::new();
    for chosen in assignments {
        let assignment: Vec<(Name, Name)> = positions.iter().map(|&i| params[i].clone()).zip(chosen.iter().cloned()).collect();
        let mut body = rest.clone();
        for (x, t) in &assignment {
            body = rename_tvar(&body, x, t);
        }
        let pairs: Vec<(Name, Expr)> = assignment.iter().map(|(x, t)| (x.clone(), Expr::var(t.clone()))).collect();
        body = substitute_many(&body, &pairs);
        for &(i, _) in kept.iter().filter(|(i, _)| *i < needed).rev() {
            body = Expr::lam(params[i].clone(), body);
        }
        let mut new_ty = result.clone();
        for (_, t) in kept.iter().rev() {
            new_ty = Type::fun((*t).clone(), new_ty);
        }
        let contract = match &def.contract {
            None => None,
            Some(FunContract::Plain(_)) => {
                return Err(fail(def, "a contract over TVar parameters must use the `TVar[t,t']` form"));
            }
            Some(FunContract::TVarParams { params: pp, pre, post, result }) => {
                if pp.len() != positions.len() {
                    return Err(fail(def, format!("contract names {} TVar parameters, type has {}", pp.len(), positions.len())));
                }
                if !kept.is_empty() {
                    return Err(fail(def, "TVar contracts on functions with other parameters are not supported"));
                }
                Some(FunContract::Plain(specialize_contract(pp, &chosen, pre, post, result, tvars)))
            }
        };
        out.push(Specialization {
            original: def.name.clone(),
            tvar_positions: positions.clone(),
            assignment,
            def: FunctionDef {
                name: format!("{}_{}", def.name, chosen.join("_")),
                ty: Some(new_ty),
                contract,
                body,
                line: def.line,
            },
        });
    }
    Ok(out)
}

/// `|| {(t1,..,tn) | pre} <> {(t1',..,tn') | post} || result` with the
/// per-parameter names replaced by the chosen TVars.
fn specialize_contract(
    pp: &[(Name, Name)],
    chosen: &[Name],
    pre: &Expr,
    post: &Expr,
    result: &Contract,
    tvars: &IndexMap<Name, Type>,
) -> Contract {
    let all: Vec<Name> = tvars.keys().cloned().collect();
    let primed: Vec<Name> = all.iter().map(|t| format!("{t}'")).collect();
    let mut pre_pairs = Vec::new();
    let mut post_pairs = Vec::new();
    for ((t, t2), tv) in pp.iter().zip(chosen) {
        pre_pairs.push((t.clone(), Expr::var(tv.clone())));
        post_pairs.push((t.clone(), Expr::var(tv.clone())));
        post_pairs.push((t2.clone(), Expr::var(format!("{tv}'"))));
    }
    let pre_c = Contract::Pred(Binder::tuple(all.clone()), substitute_many(pre, &pre_pairs));
    let post_c = Contract::Pred(Binder::tuple(primed), substitute_many(post, &post_pairs));
    Contract::stm(Binder::tuple(all), pre_c, post_c, result.clone())
}

/// Rewrites `f t` (with `t` a TVar) into the matching specialization.
pub fn rewrite_call_sites(e: &Expr, specs: &[Specialization]) -> Expr {
    let (head, args) = e.spine();
    if let Expr::Fun(f) = head {
        let mine: Vec<&Specialization> = specs.iter().filter(|s| s.original == *f && !s.tvar_positions.is_empty()).collect();
        if let Some(first) = mine.first() {
            let needed = first.tvar_positions.last().unwrap() + 1;
            if args.len() >= needed {
                let chosen: Option<Vec<Name>> = first
                    .tvar_positions
                    .iter()
                    .map(|&i| match args[i] {
                        Expr::Var(t) => Some(t.clone()),
                        _ => None,
                    })
                    .collect();
                if let Some(chosen) = chosen {
                    if let Some(s) = mine.iter().find(|s| s.assignment.iter().map(|(_, t)| t).eq(chosen.iter())) {
                        let rest = args
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| !first.tvar_positions.contains(i))
                            .map(|(_, a)| rewrite_call_sites(a, specs));
                        return Expr::apps(Expr::fun(s.def.name.clone()), rest);
                    }
                }
            }
        }
    }
    let kids = e.children().into_iter().map(|c| rewrite_call_sites(c, specs)).collect();
    super::with_children(e, kids)
}

/// Replaces every TVar-parameterized function by its specializations and
/// rewrites call sites throughout the program.
pub fn specialize_program(p: &Program, typed: &TypedProgram) -> Result<(Program, Vec<Specialization>), TransformError> {
    let tvars: IndexMap<Name, Type> = p.tvars.iter().map(|t| (t.name.clone(), t.content.clone())).collect();
    let mut all = Vec::new();
    for (name, f) in &p.functions {
        let ty = typed.function_type(name).cloned().unwrap_or(Type::Unit);
        all.extend(specialize_tvar_args(f, &ty, &tvars)?);
    }
    if all.iter().all(|s| s.tvar_positions.is_empty()) {
        return Ok((p.clone(), vec![]));
    }
    let mut out = p.clone();
    out.functions = IndexMap::new();
    for s in &all {
        let mut def = s.def.clone();
        def.body = rewrite_call_sites(&def.body, &all);
        out.functions.insert(def.name.clone(), def);
    }
    for tx in &mut out.transactions {
        tx.body = rewrite_call_sites(&tx.body, &all);
    }
    let specs = all.into_iter().filter(|s| !s.tvar_positions.is_empty()).collect();
    Ok((out, specs))
}
