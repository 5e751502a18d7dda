use indexmap::IndexMap;

use super::{DataDecls, Expr, Name};
use crate::contracts::Contract;
use crate::typecheck::Type;

#[derive(Clone, Debug, PartialEq)]
pub struct TVarDecl {
    pub name: Name,
    pub content: Type,
    pub init: Option<Expr>,
}

/// Contract attached to a top-level function.
#[derive(Clone, Debug, PartialEq)]
pub enum FunContract {
    Plain(Contract),
    /// `TVar[t,t'] -> .. -> | pre <> post | result`: one `(initial, final)`
    /// name pair per TVar parameter, resolved by specialization.
    TVarParams {
        params: Vec<(Name, Name)>,
        pre: Expr,
        post: Expr,
        result: Contract,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: Name,
    pub ty: Option<Type>,
    pub contract: Option<FunContract>,
    pub body: Expr,
    /// 1-based source line of the definition, 0 when synthesized.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transaction {
    pub name: Name,
    /// Free variables of the body with their contracts, in declaration order.
    pub params: Vec<(Name, Contract)>,
    pub body: Expr,
    pub line: usize,
}

/// A parsed compilation unit.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    /// Declaration order is the canonical TVar order.
    pub tvars: Vec<TVarDecl>,
    pub data: DataDecls,
    pub functions: IndexMap<Name, FunctionDef>,
    pub invariant: Option<Name>,
    pub transactions: Vec<Transaction>,
}

impl Program {
    pub fn tvar_names(&self) -> Vec<Name> {
        self.tvars.iter().map(|t| t.name.clone()).collect()
    }

    pub fn tvar(&self, name: &str) -> Option<&TVarDecl> {
        self.tvars.iter().find(|t| t.name == name)
    }

    pub fn is_tvar(&self, name: &str) -> bool {
        self.tvar(name).is_some()
    }

    pub fn transaction(&self, name: &str) -> Option<&Transaction> {
        self.transactions.iter().find(|t| t.name == name)
    }

    /// Function bodies keyed by name, as used by the interpreter's CALL rule.
    pub fn definitions(&self) -> IndexMap<Name, Expr> {
        self.functions.iter().map(|(k, f)| (k.clone(), f.body.clone())).collect()
    }
}
