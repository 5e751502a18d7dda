//! Static contract checking: transform, wrap, simplify, then look for BAD.

pub mod arith;
pub mod simplify;
pub mod wrap;

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use arith::{arith_decide, PathCondition};
pub use simplify::{recursive_functions, simplify, SimplifyConfig, Simplified};
pub use wrap::{wrap_assume, wrap_ensure, WrapError};

use crate::contracts::{check_contract_type, replay, Binder, Contract, ContractTypeError, Oracle, OracleConfig, SatVerdict, Witness};
use crate::semantics::Defs;
use crate::syntax::{all_vars, fresh_name, map_funs, print_alt_pattern, Exception, Expr, FunContract, Name, Program};
use crate::transform::{
    close_transaction, gamma_expand, invariant_to_contract, specialize_program, t_contract, t_expr, transform_defs,
    TransformError,
};
use crate::typecheck::{check_program, Annotation, Type, TypeError, TypedProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub fuel: usize,
    pub inline_depth: usize,
    pub samples: usize,
    pub seed: u64,
    pub gamma_cap: usize,
    /// Run the testing oracle when BAD survives simplification.
    pub witness_search: bool,
    /// Step budget of each interpreter run made by the oracle.
    pub oracle_fuel: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            fuel: 1000,
            inline_depth: 3,
            samples: 200,
            seed: 0,
            gamma_cap: 64,
            witness_search: true,
            oracle_fuel: 10_000,
        }
    }
}

impl CheckConfig {
    fn simplify(&self) -> SimplifyConfig {
        SimplifyConfig { fuel: self.fuel, inline_depth: self.inline_depth }
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig { fuel: self.oracle_fuel, samples: self.samples, seed: self.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Wrap(#[from] WrapError),
    #[error(transparent)]
    ContractType(#[from] ContractTypeError),
    #[error("unknown transaction `{0}`")]
    UnknownTransaction(Name),
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("function `{0}` has no contract")]
    NoContract(Name),
    #[error("`{function}` calls `{callee}`, which has no contract")]
    MissingCalleeContract { function: Name, callee: Name },
}

/// A BAD left in the residual, with the branch conditions leading to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadSite {
    pub path: Vec<String>,
}

impl fmt::Display for BadSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str("BAD at top level")
        } else {
            write!(f, "BAD when {}", self.path.join(", "))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Safe,
    /// A concrete input breaking the contract, confirmed by replay.
    Unsafe(Witness),
    Unknown { reason: String, sites: Vec<BadSite> },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Safe => "safe",
            Verdict::Unsafe(_) => "unsafe",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe)
    }

    pub fn is_unsafe(&self) -> bool {
        matches!(self, Verdict::Unsafe(_))
    }

    /// Unsafe beats unknown beats safe.
    fn join(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Safe;
        for v in verdicts {
            match (&out, &v) {
                (Verdict::Unsafe(_), _) => {}
                (_, Verdict::Unsafe(_)) => out = v,
                (Verdict::Safe, Verdict::Unknown { .. }) => out = v,
                _ => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Safe => f.write_str("safe"),
            Verdict::Unsafe(w) => write!(f, "unsafe ({w})"),
            Verdict::Unknown { reason, .. } => write!(f, "unknown ({reason})"),
        }
    }
}

/// Result for one orElse-free variant (or a function).
#[derive(Clone, Debug, PartialEq)]
pub struct VariantReport {
    /// The closed source expression and its contract.
    pub closed: Expr,
    pub contract: Contract,
    /// `T` of the closed expression, simplified, and `T` of the contract.
    pub pure: Expr,
    pub pure_contract: Contract,
    /// Simplified `T(e) ▷ T(c)`.
    pub residual: Expr,
    pub exhausted: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: Name,
    pub variants: Vec<VariantReport>,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

/// Type-checks `p` and replaces TVar-parameterized functions by their
/// specializations.
pub fn prepare(p: &Program) -> Result<Program, CheckError> {
    let typed = check_program(p)?;
    Ok(specialize_program(p, &typed)?.0)
}

/// Checker over one (specialized) program.
pub struct Checker {
    program: Program,
    typed: TypedProgram,
    defs: Defs,
    tdefs: Defs,
    crashy: BTreeSet<Name>,
    inv: Option<Contract>,
    cfg: CheckConfig,
}

impl Checker {
    pub fn new(p: &Program, cfg: CheckConfig) -> Result<Self, CheckError> {
        let program = prepare(p)?;
        let typed = check_program(&program)?;
        let tdefs = transform_defs(&program, &typed)?;
        let inv = match program.invariant {
            Some(_) => Some(invariant_to_contract(&program)?),
            None => None,
        };
        Ok(Checker {
            defs: program.definitions(),
            crashy: crashy_functions(&tdefs),
            program,
            typed,
            tdefs,
            inv,
            cfg,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn typed(&self) -> &TypedProgram {
        &self.typed
    }

    /// The transformed definitions Δ'.
    pub fn pure_defs(&self) -> &Defs {
        &self.tdefs
    }

    pub fn invariant(&self) -> Option<&Contract> {
        self.inv.as_ref()
    }

    pub fn check_transaction(&self, name: &str) -> Result<CheckReport, CheckError> {
        let start = Instant::now();
        let tx = self.program.transaction(name).ok_or_else(|| CheckError::UnknownTransaction(name.into()))?;
        let inv = self.inv.as_ref().ok_or(TransformError::NoInvariant)?;
        let tvars = self.program.tvar_names();
        let mut variants = Vec::new();
        for body in gamma_expand(&tx.body, self.cfg.gamma_cap)? {
            let (closed, contract) = close_transaction(&body, &tx.params, &tvars, inv)?;
            let ty = match self.typed.transactions.get(name) {
                Some(t) => t.params.iter().rev().fold(t.ty.clone(), |acc, (_, p)| Type::fun(p.clone(), acc)),
                None => self.typed.ctx.infer(&closed, &[])?.0,
            };
            let ann = self.typed.ctx.check(&closed, &[], &ty)?;
            check_contract_type(&contract, &ty, &self.typed.ctx)?;
            variants.push(self.check_closed(&closed, &ann, &contract, (&closed, &contract, &ty))?);
        }
        Ok(CheckReport {
            name: name.into(),
            verdict: Verdict::join(variants.iter().map(|v| v.verdict.clone())),
            variants,
            elapsed: start.elapsed(),
        })
    }

    /// Checks `f` against its contract, assuming only the contracts of the
    /// functions it calls.
    pub fn check_function(&self, name: &str) -> Result<CheckReport, CheckError> {
        let start = Instant::now();
        let def = self.program.functions.get(name).ok_or_else(|| CheckError::UnknownFunction(name.into()))?;
        let c = match &def.contract {
            Some(FunContract::Plain(c)) => c.clone(),
            _ => return Err(CheckError::NoContract(name.into())),
        };
        let fty = self.typed.function_type(name).cloned().ok_or_else(|| CheckError::UnknownFunction(name.into()))?;
        check_contract_type(&c, &fty, &self.typed.ctx)?;

        let mut avoid = BTreeSet::new();
        all_vars(&def.body, &mut avoid);
        avoid.extend(self.program.tvar_names());
        avoid.extend(c.free_vars());
        let mut callees = Vec::new();
        for g in def.body.called_functions() {
            let cg = match self.program.functions.get(&g).and_then(|d| d.contract.as_ref()) {
                Some(FunContract::Plain(cg)) => cg.clone(),
                _ => return Err(CheckError::MissingCalleeContract { function: name.into(), callee: g }),
            };
            let gty = self.typed.function_type(&g).cloned().ok_or_else(|| CheckError::UnknownFunction(g.clone()))?;
            let v = fresh_name(&g, &avoid, true);
            avoid.insert(v.clone());
            callees.push((g, v, cg, gty));
        }
        let body = map_funs(&def.body, &mut |e| match e {
            Expr::Fun(g) => callees.iter().find(|(h, ..)| h == g).map(|(_, v, ..)| Expr::var(v.clone())),
            _ => None,
        });
        let params: Vec<(Name, Type)> = callees.iter().map(|(_, v, _, t)| (v.clone(), t.clone())).collect();
        let ann = self.typed.ctx.check(&body, &params, &fty)?;
        let (mut closed, mut contract, mut ann, mut ty) = (body, c.clone(), ann, fty.clone());
        for (_, v, cg, gty) in callees.iter().rev() {
            closed = Expr::lam(v.clone(), closed);
            contract = Contract::dep_fun(Binder::var(v.clone()), cg.clone(), contract);
            ty = Type::fun(gty.clone(), ty);
            ann = Annotation { ty: ty.clone(), children: vec![ann] };
        }
        // Witnesses are searched on the real function, callees included.
        let report = self.check_closed(&closed, &ann, &contract, (&def.body, &c, &fty))?;
        Ok(CheckReport { name: name.into(), verdict: report.verdict.clone(), variants: vec![report], elapsed: start.elapsed() })
    }

    fn check_closed(
        &self,
        closed: &Expr,
        ann: &Annotation,
        contract: &Contract,
        target: (&Expr, &Contract, &Type),
    ) -> Result<VariantReport, CheckError> {
        let tvars = self.program.tvar_names();
        let te = t_expr(closed, ann, &tvars)?;
        let tc = t_contract(contract);
        let scfg = self.cfg.simplify();
        let pure = simplify(&te, &self.tdefs, &scfg).expr;
        let wrapped = wrap_ensure(&te, &tc)?;
        let res = simplify(&wrapped, &self.tdefs, &scfg);
        let verdict = if self.is_safe(&res.expr) {
            Verdict::Safe
        } else {
            let sites = self.bad_sites(&res.expr);
            let found = if self.cfg.witness_search { self.find_witness(target.0, target.1, target.2) } else { None };
            match found {
                Some(w) => Verdict::Unsafe(w),
                None => Verdict::Unknown {
                    reason: if res.exhausted {
                        "simplification budget exhausted".into()
                    } else {
                        format!("{} BAD site(s) remain", sites.len().max(1))
                    },
                    sites,
                },
            }
        };
        Ok(VariantReport {
            closed: closed.clone(),
            contract: contract.clone(),
            pure,
            pure_contract: tc,
            residual: res.expr,
            exhausted: res.exhausted,
            verdict,
        })
    }

    fn find_witness(&self, e: &Expr, c: &Contract, ty: &Type) -> Option<Witness> {
        let oracle = Oracle::new(&self.defs, &self.typed.ctx, self.cfg.oracle());
        match oracle.satisfies(e, c, ty) {
            SatVerdict::Violated(w) if replay(&oracle, e, c, ty, &w) => Some(w),
            _ => None,
        }
    }

    /// No BAD in `e` and no call to a function that can reach one.
    pub fn is_safe(&self, e: &Expr) -> bool {
        !e.contains_exc(Exception::Bad) && e.called_functions().iter().all(|f| !self.crashy.contains(f))
    }

    /// BAD occurrences in `e` with their path conditions.
    pub fn bad_sites(&self, e: &Expr) -> Vec<BadSite> {
        let mut out = Vec::new();
        collect_sites(e, &self.crashy, &mut Vec::new(), &mut out);
        out
    }
}

fn collect_sites(e: &Expr, crashy: &BTreeSet<Name>, path: &mut Vec<String>, out: &mut Vec<BadSite>) {
    match e {
        Expr::Exc(Exception::Bad) => out.push(BadSite { path: path.clone() }),
        Expr::Fun(f) if crashy.contains(f) => {
            let mut p = path.clone();
            p.push(format!("calling {f}"));
            out.push(BadSite { path: p });
        }
        Expr::Case(s, alts) => {
            collect_sites(s, crashy, path, out);
            for a in alts {
                path.push(format!("{s} = {}", print_alt_pattern(a)));
                collect_sites(&a.body, crashy, path, out);
                path.pop();
            }
        }
        _ => {
            for c in e.children() {
                collect_sites(c, crashy, path, out);
            }
        }
    }
}

/// Functions whose body contains BAD or calls such a function.
fn crashy_functions(defs: &Defs) -> BTreeSet<Name> {
    let mut out: BTreeSet<Name> =
        defs.iter().filter(|(_, b)| b.contains_exc(Exception::Bad)).map(|(k, _)| k.clone()).collect();
    loop {
        let before = out.len();
        for (k, b) in defs {
            if !out.contains(k) && b.called_functions().iter().any(|g| out.contains(g)) {
                out.insert(k.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Checks one transaction of `p`.
pub fn check_transaction(name: &str, p: &Program, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    Checker::new(p, cfg.clone())?.check_transaction(name)
}

/// Checks one function of `p` modularly.
pub fn modular_check_function(name: &str, p: &Program, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    Checker::new(p, cfg.clone())?.check_function(name)
}
