use indexmap::IndexMap;
use thiserror::Error;

use super::{tuple_arity, tuple_con, Alt, Expr, Name, CONS, FALSE, NIL, TRUE, UNIT};
use crate::typecheck::Type;

/// One datatype and its constructors with their field types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructorSig {
    pub datatype: Name,
    pub constructors: Vec<(Name, Vec<Type>)>,
}

impl ConstructorSig {
    pub fn arity_of(&self, con: &str) -> Option<usize> {
        self.constructors.iter().find(|(k, _)| k == con).map(|(_, f)| f.len())
    }
}

/// The constructor signatures of a program, including the built-in
/// `Bool`, list, unit and tuple types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecls {
    sigs: IndexMap<Name, ConstructorSig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(Name),
    #[error("case alternatives mix constructors of `{0}` and `{1}`")]
    MixedDatatypes(Name, Name),
    #[error("duplicate alternative for constructor `{0}`")]
    DuplicateConstructor(Name),
    #[error("constructor `{con}` expects {expected} fields, pattern binds {found}")]
    PatternArity { con: Name, expected: usize, found: usize },
    #[error("constructor `{0}` declared twice")]
    DuplicateDeclaration(Name),
    #[error("case expression without alternatives")]
    EmptyCase,
}

impl Default for DataDecls {
    fn default() -> Self {
        Self::builtin()
    }
}

impl DataDecls {
    pub fn builtin() -> Self {
        let mut sigs = IndexMap::new();
        sigs.insert(
            "Bool".to_string(),
            ConstructorSig {
                datatype: "Bool".into(),
                constructors: vec![(TRUE.into(), vec![]), (FALSE.into(), vec![])],
            },
        );
        sigs.insert(
            "List".to_string(),
            ConstructorSig {
                datatype: "List".into(),
                constructors: vec![(NIL.into(), vec![]), (CONS.into(), vec![Type::Meta(0), Type::List(Box::new(Type::Meta(0)))])],
            },
        );
        sigs.insert(
            "Unit".to_string(),
            ConstructorSig { datatype: "Unit".into(), constructors: vec![(UNIT.into(), vec![])] },
        );
        DataDecls { sigs }
    }

    pub fn declare(&mut self, sig: ConstructorSig) -> Result<(), CaseError> {
        for (k, _) in &sig.constructors {
            if self.lookup(k).is_some() {
                return Err(CaseError::DuplicateDeclaration(k.clone()));
            }
        }
        if self.sigs.contains_key(&sig.datatype) {
            return Err(CaseError::DuplicateDeclaration(sig.datatype.clone()));
        }
        self.sigs.insert(sig.datatype.clone(), sig);
        Ok(())
    }

    /// Signatures declared in the program (excluding built-ins).
    pub fn user_sigs(&self) -> impl Iterator<Item = &ConstructorSig> {
        self.sigs.values().filter(|s| !matches!(s.datatype.as_str(), "Bool" | "List" | "Unit"))
    }

    pub fn datatype(&self, name: &str) -> Option<&ConstructorSig> {
        self.sigs.get(name)
    }

    /// Signature owning `con`; tuple constructors are synthesized per arity.
    pub fn lookup(&self, con: &str) -> Option<ConstructorSig> {
        if let Some(n) = tuple_arity(con) {
            return Some(ConstructorSig {
                datatype: tuple_con(n),
                constructors: vec![(tuple_con(n), (0..n as u32).map(Type::Meta).collect())],
            });
        }
        self.sigs.values().find(|s| s.constructors.iter().any(|(k, _)| k == con)).cloned()
    }

    pub fn arity(&self, con: &str) -> Option<usize> {
        self.lookup(con).and_then(|s| s.arity_of(con))
    }
}

/// Adds a `BAD` alternative for every constructor missing from a case.
pub fn complete_cases(e: &Expr, sigs: &DataDecls) -> Result<Expr, CaseError> {
    Ok(match e {
        Expr::Case(s, alts) => {
            if alts.is_empty() {
                return Err(CaseError::EmptyCase);
            }
            let sig = sigs.lookup(&alts[0].con).ok_or_else(|| CaseError::UnknownConstructor(alts[0].con.clone()))?;
            let mut seen: Vec<&str> = Vec::new();
            for alt in alts {
                let arity = match sig.arity_of(&alt.con) {
                    Some(a) => a,
                    None => {
                        return Err(match sigs.lookup(&alt.con) {
                            Some(other) => CaseError::MixedDatatypes(sig.datatype.clone(), other.datatype),
                            None => CaseError::UnknownConstructor(alt.con.clone()),
                        })
                    }
                };
                if arity != alt.vars.len() {
                    return Err(CaseError::PatternArity { con: alt.con.clone(), expected: arity, found: alt.vars.len() });
                }
                if seen.contains(&alt.con.as_str()) {
                    return Err(CaseError::DuplicateConstructor(alt.con.clone()));
                }
                seen.push(&alt.con);
            }
            let s = complete_cases(s, sigs)?;
            let mut out = Vec::with_capacity(sig.constructors.len());
            for alt in alts {
                out.push(Alt { con: alt.con.clone(), vars: alt.vars.clone(), body: complete_cases(&alt.body, sigs)? });
            }
            for (k, fields) in &sig.constructors {
                if !seen.contains(&k.as_str()) {
                    let vars = (0..fields.len()).map(|i| format!("_{i}")).collect();
                    out.push(Alt { con: k.clone(), vars, body: Expr::bad() });
                }
            }
            Expr::Case(Box::new(s), out)
        }
        Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
        Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| complete_cases(a, sigs)).collect::<Result<_, _>>()?),
        Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|a| complete_cases(a, sigs)).collect::<Result<_, _>>()?),
        Expr::Lam(x, b) => Expr::Lam(x.clone(), Box::new(complete_cases(b, sigs)?)),
        Expr::App(a, b) => Expr::app(complete_cases(a, sigs)?, complete_cases(b, sigs)?),
        Expr::Write(t, p) => Expr::Write(t.clone(), Box::new(complete_cases(p, sigs)?)),
        Expr::Bind(a, b) => Expr::bind(complete_cases(a, sigs)?, complete_cases(b, sigs)?),
        Expr::Return(a) => Expr::ret(complete_cases(a, sigs)?),
        Expr::OrElse(a, b) => Expr::or_else(complete_cases(a, sigs)?, complete_cases(b, sigs)?),
    })
}
