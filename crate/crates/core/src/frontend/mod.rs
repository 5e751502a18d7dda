//! Surface language, reports and command-line options.

pub mod cli;
mod lexer;
mod parser;
pub mod report;

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::checker::CheckError;
use crate::contracts::Contract;
use crate::syntax::surface::DesugarError;
use crate::syntax::{
    bind_functions, complete_cases, free_var_set, CaseError, ConstructorSig, Expr, FunContract, FunctionDef, Name, Program,
    TVarDecl, Transaction,
};
use crate::typecheck::Type;

pub use cli::{check_text, Cli, Format};
pub use parser::{ContractDecl, Decl};
pub use report::{Entry, Report, Status};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: Name, line: usize },
    #[error("line {line}: {message}")]
    Declaration { line: usize, message: String },
    #[error("no declarations")]
    NoDeclarations,
    #[error(transparent)]
    Desugar(#[from] DesugarError),
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("parse error")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("no transaction named `{0}`")]
    UnknownTransaction(Name),
    #[error("transactions need an `invariant` declaration")]
    MissingInvariant,
}

/// Where a declaration sits in the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub kind: &'static str,
    pub name: Name,
    pub line: usize,
    /// Byte range of the declaration.
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub program: Program,
    pub locations: Vec<Location>,
}

impl SourceUnit {
    pub fn location(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }
}

/// Parses a whole `.stm` file.
pub fn parse(text: &str) -> Result<SourceUnit, ParseError> {
    parse_named("<input>", text)
}

pub fn parse_named(path: &str, text: &str) -> Result<SourceUnit, ParseError> {
    let chunks = lexer::split_declarations(lexer::tokenize(text)?);
    if chunks.is_empty() {
        return Err(ParseError::NoDeclarations);
    }
    let mut decls = Vec::new();
    for chunk in chunks {
        let line = chunk[0].line;
        let start = chunk[0].offset;
        let end = chunk.last().map(|t| t.offset).unwrap_or(start);
        let end = end + text[end..].find(char::is_whitespace).unwrap_or(text.len() - end);
        let decl = parser::Parser::new(lexer::layout(chunk)).declaration().map_err(|e| match e {
            ParseError::Desugar(d) => ParseError::Declaration { line, message: d.to_string() },
            other => other,
        })?;
        decls.push((decl, line, start, end));
    }
    let (program, locations) = assemble(decls)?;
    Ok(SourceUnit { path: path.into(), text: text.into(), program, locations })
}

/// Parses a single expression. Names stay variables; nothing is resolved.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(lexer::layout(lexer::tokenize(text)?));
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a single contract.
pub fn parse_contract(text: &str) -> Result<Contract, ParseError> {
    let mut p = parser::Parser::new(lexer::layout(lexer::tokenize(text)?));
    let c = p.contract()?;
    p.finish()?;
    Ok(c)
}

fn decl_error(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Declaration { line, message: message.into() }
}

fn case_error(line: usize, e: CaseError) -> ParseError {
    decl_error(line, e.to_string())
}

fn assemble(decls: Vec<(Decl, usize, usize, usize)>) -> Result<(Program, Vec<Location>), ParseError> {
    let mut p = Program::default();
    let mut locations = Vec::new();
    let mut sigs: Vec<(Name, Type, usize)> = Vec::new();
    let mut contracts: Vec<(Name, ContractDecl, usize)> = Vec::new();
    let mut invariant: Option<(Name, usize)> = None;
    let loc = |kind, name: &Name, line, start, end| Location { kind, name: name.clone(), line, start, end };

    for (d, line, start, end) in decls {
        match d {
            Decl::Data { name, constructors } => {
                locations.push(loc("data", &name, line, start, end));
                p.data
                    .declare(ConstructorSig { datatype: name, constructors })
                    .map_err(|e| case_error(line, e))?;
            }
            Decl::TVar { name, ty, init } => {
                if p.is_tvar(&name) {
                    return Err(ParseError::Duplicate { kind: "TVar", name, line });
                }
                locations.push(loc("tvar", &name, line, start, end));
                p.tvars.push(TVarDecl { name, content: ty, init });
            }
            Decl::Invariant(f) => {
                if invariant.is_some() {
                    return Err(ParseError::Duplicate { kind: "invariant", name: f, line });
                }
                invariant = Some((f, line));
            }
            Decl::Signature { name, ty } => {
                if sigs.iter().any(|(n, ..)| *n == name) {
                    return Err(ParseError::Duplicate { kind: "type signature", name, line });
                }
                sigs.push((name, ty, line));
            }
            Decl::Contract { name, contract } => {
                if contracts.iter().any(|(n, ..)| *n == name) {
                    return Err(ParseError::Duplicate { kind: "contract", name, line });
                }
                contracts.push((name, contract, line));
            }
            Decl::Function { name, body } => {
                if p.functions.contains_key(&name) {
                    return Err(ParseError::Duplicate { kind: "function", name, line });
                }
                locations.push(loc("function", &name, line, start, end));
                p.functions.insert(name.clone(), FunctionDef { name, ty: None, contract: None, body, line });
            }
            Decl::Transaction { name, params, body } => {
                if p.transaction(&name).is_some() {
                    return Err(ParseError::Duplicate { kind: "transaction", name, line });
                }
                locations.push(loc("transaction", &name, line, start, end));
                p.transactions.push(Transaction { name, params, body, line });
            }
        }
    }
    if p.tvars.is_empty() && p.functions.is_empty() && p.transactions.is_empty() && p.data.user_sigs().next().is_none() {
        return Err(ParseError::NoDeclarations);
    }
    for (name, ty, line) in sigs {
        let f = p.functions.get_mut(&name).ok_or_else(|| decl_error(line, format!("signature for undefined function `{name}`")))?;
        f.ty = Some(ty);
    }
    for (name, c, line) in contracts {
        let f = p.functions.get_mut(&name).ok_or_else(|| decl_error(line, format!("contract for undefined function `{name}`")))?;
        f.contract = Some(match c {
            ContractDecl::Plain(c) => FunContract::Plain(c),
            ContractDecl::TVarParams { params, pre, post, result } => FunContract::TVarParams { params, pre, post, result },
        });
    }
    if let Some((f, line)) = invariant {
        if !p.functions.contains_key(&f) {
            return Err(decl_error(line, format!("invariant names undefined function `{f}`")));
        }
        p.invariant = Some(f);
    }
    resolve(&mut p)?;
    Ok((p, locations))
}

/// Turns references to top-level functions into `Fun` nodes and completes
/// every case expression.
fn resolve(p: &mut Program) -> Result<(), ParseError> {
    let fns: BTreeSet<Name> = p.functions.keys().cloned().collect();
    let data = p.data.clone();
    let fix = |e: &Expr, line: usize| -> Result<Expr, ParseError> {
        complete_cases(&bind_functions(e, &fns), &data).map_err(|err| case_error(line, err))
    };
    let fix_contract = |c: &Contract, line: usize| -> Result<Contract, ParseError> {
        let mut failure = None;
        let out = c.map_preds(&mut |e| match fix(e, line) {
            Ok(x) => x,
            Err(err) => {
                failure.get_or_insert(err);
                e.clone()
            }
        });
        failure.map_or(Ok(out), Err)
    };
    for t in &mut p.tvars {
        if let Some(init) = &t.init {
            t.init = Some(fix(init, 0)?);
        }
    }
    for f in p.functions.values_mut() {
        f.body = fix(&f.body, f.line)?;
        f.contract = match &f.contract {
            None => None,
            Some(FunContract::Plain(c)) => Some(FunContract::Plain(fix_contract(c, f.line)?)),
            Some(FunContract::TVarParams { params, pre, post, result }) => Some(FunContract::TVarParams {
                params: params.clone(),
                pre: fix(pre, f.line)?,
                post: fix(post, f.line)?,
                result: fix_contract(result, f.line)?,
            }),
        };
    }
    for tx in &mut p.transactions {
        // Parameters shadow functions of the same name.
        let closed = tx.params.iter().rev().fold(tx.body.clone(), |b, (x, _)| Expr::lam(x.clone(), b));
        let mut body = fix(&closed, tx.line)?;
        for _ in &tx.params {
            body = match body {
                Expr::Lam(_, b) => *b,
                other => other,
            };
        }
        tx.body = body;
        for (_, c) in &mut tx.params {
            *c = fix_contract(c, tx.line)?;
        }
    }
    Ok(())
}

fn type_atom(t: &Type) -> String {
    match t {
        Type::Fun(..) | Type::Stm(_) | Type::TVarT(_) => format!("({t})"),
        _ => t.to_string(),
    }
}

/// Prints a program in the surface syntax accepted by [`parse`].
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for sig in p.data.user_sigs() {
        let cons: Vec<String> = sig
            .constructors
            .iter()
            .map(|(k, fs)| std::iter::once(k.clone()).chain(fs.iter().map(type_atom)).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(out, "data {} = {}", sig.datatype, cons.join(" | "));
    }
    for t in &p.tvars {
        match &t.init {
            Some(e) => {
                let _ = writeln!(out, "tvar {} :: {} = {}", t.name, t.content, e);
            }
            None => {
                let _ = writeln!(out, "tvar {} :: {}", t.name, t.content);
            }
        }
    }
    if let Some(inv) = &p.invariant {
        let _ = writeln!(out, "invariant {inv}");
    }
    for f in p.functions.values() {
        if let Some(ty) = &f.ty {
            let _ = writeln!(out, "{} :: {}", f.name, ty);
        }
        match &f.contract {
            Some(FunContract::Plain(c)) => {
                let _ = writeln!(out, "contract {} :: {}", f.name, c);
            }
            Some(FunContract::TVarParams { params, pre, post, result }) => {
                let ps: String = params.iter().map(|(a, b)| format!("TVar[{a},{b}] -> ")).collect();
                let _ = writeln!(out, "contract {} :: {ps}| {pre} <> {post} | {result}", f.name);
            }
            None => {}
        }
        let _ = writeln!(out, "{} = {}", f.name, f.body);
    }
    for tx in &p.transactions {
        let ps: Vec<String> = tx.params.iter().map(|(x, c)| format!("{x} :: {c}")).collect();
        if ps.is_empty() {
            let _ = writeln!(out, "transaction {} = {}", tx.name, tx.body);
        } else {
            let _ = writeln!(out, "transaction {}({}) = {}", tx.name, ps.join(", "), tx.body);
        }
    }
    out
}

/// Prints one function as it would be written by hand: the contract
/// signature, then the body with its binds laid out as a `do` block.
pub fn print_function(f: &FunctionDef) -> String {
    let mut out = String::new();
    match &f.contract {
        Some(FunContract::Plain(c)) => {
            let _ = writeln!(out, "{} :: {}", f.name, c);
        }
        Some(FunContract::TVarParams { params, pre, post, result }) => {
            let ps: String = params.iter().map(|(a, b)| format!("TVar[{a},{b}] -> ")).collect();
            let _ = writeln!(out, "{} :: {ps}| {pre} <> {post} | {result}", f.name);
        }
        None => {}
    }
    let head = format!("{} = ", f.name);
    let _ = writeln!(out, "{head}{}", do_block(&f.body, head.len()));
    out
}

fn do_block(e: &Expr, col: usize) -> String {
    let mut stmts = Vec::new();
    let mut cur = e;
    while let Expr::Bind(m, k) = cur {
        let Expr::Lam(x, body) = &**k else { break };
        if free_var_set(body).contains(x) {
            stmts.push(format!("{x} <- {m}"));
        } else {
            stmts.push(m.to_string());
        }
        cur = body;
    }
    if stmts.is_empty() {
        return e.to_string();
    }
    stmts.push(cur.to_string());
    format!("do {}", stmts.join(&format!("\n{}", " ".repeat(col + 3))))
}
