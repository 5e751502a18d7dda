//! Recursive-descent parser for declarations, types, contracts and
//! expressions.

use crate::contracts::{Binder, Contract};
use crate::syntax::surface::{Pattern, Stmt, Surface, SurfaceAlt};
use crate::syntax::surface::desugar;
use crate::syntax::{tuple_con, Exception, Expr, Name, PrimOp, CONS, FALSE, NIL, TRUE, UNIT};
use crate::typecheck::Type;

use super::lexer::{Tok, Token, KEYWORDS};
use super::ParseError;

/// One top-level declaration, before name resolution.
#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    TVar { name: Name, ty: Type, init: Option<Expr> },
    Data { name: Name, constructors: Vec<(Name, Vec<Type>)> },
    Invariant(Name),
    Signature { name: Name, ty: Type },
    Contract { name: Name, contract: ContractDecl },
    Function { name: Name, body: Expr },
    Transaction { name: Name, params: Vec<(Name, Contract)>, body: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContractDecl {
    Plain(Contract),
    TVarParams { params: Vec<(Name, Name)>, pre: Expr, post: Expr, result: Contract },
}

type PResult<T> = Result<T, ParseError>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Position reported when input runs out.
    end: (usize, usize),
}

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        let end = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
        Parser { toks, pos: 0, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end);
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of declaration")),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{k}`")))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Some(Tok::Ident(x)) if !is_keyword(x) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn con_id(&mut self) -> PResult<Name> {
        match self.peek() {
            Some(Tok::ConId(x)) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.unexpected("a constructor name")),
        }
    }

    pub fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of declaration"))
        }
    }

    // ---- declarations ----

    pub fn declaration(&mut self) -> PResult<Decl> {
        let d = if self.eat_kw("tvar") {
            let name = self.ident()?;
            self.expect_sym("::")?;
            let ty = self.ty()?;
            let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
            Decl::TVar { name, ty, init }
        } else if self.eat_kw("data") {
            let name = self.con_id()?;
            self.expect_sym("=")?;
            let mut constructors = vec![self.constructor()?];
            while self.eat_sym("|") {
                constructors.push(self.constructor()?);
            }
            Decl::Data { name, constructors }
        } else if self.eat_kw("invariant") {
            Decl::Invariant(self.ident()?)
        } else if self.eat_kw("contract") {
            let name = self.ident()?;
            self.expect_sym("::")?;
            Decl::Contract { name, contract: self.contract_decl()? }
        } else if self.eat_kw("transaction") {
            let name = self.ident()?;
            let mut params = Vec::new();
            if self.eat_sym("(") {
                if !self.eat_sym(")") {
                    loop {
                        let x = self.ident()?;
                        self.expect_sym("::")?;
                        params.push((x, self.contract()?));
                        if self.eat_sym(")") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
            }
            self.expect_sym("=")?;
            Decl::Transaction { name, params, body: self.expr()? }
        } else {
            let name = self.ident()?;
            if self.eat_sym("::") {
                // A signature may carry a type or a contract.
                let save = self.pos;
                match self.ty().and_then(|t| self.finish().map(|_| t)) {
                    Ok(ty) => Decl::Signature { name, ty },
                    Err(type_err) => {
                        self.pos = save;
                        match self.contract_decl() {
                            Ok(contract) => Decl::Contract { name, contract },
                            Err(_) => return Err(type_err),
                        }
                    }
                }
            } else {
                let mut params = Vec::new();
                while !self.is_sym("=") {
                    params.push(self.pattern()?);
                }
                self.expect_sym("=")?;
                let body = self.surface()?;
                let lam = params.into_iter().rev().fold(body, |b, p| Surface::Lam(p, Box::new(b)));
                Decl::Function { name, body: desugar(&lam)? }
            }
        };
        self.finish()?;
        Ok(d)
    }

    fn constructor(&mut self) -> PResult<(Name, Vec<Type>)> {
        let k = self.con_id()?;
        let mut fields = Vec::new();
        while !self.at_end() && !self.is_sym("|") {
            fields.push(self.atype()?);
        }
        Ok((k, fields))
    }

    // ---- types ----

    pub fn ty(&mut self) -> PResult<Type> {
        let a = self.btype()?;
        if self.eat_sym("->") {
            Ok(Type::fun(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn btype(&mut self) -> PResult<Type> {
        match self.peek() {
            Some(Tok::ConId(k)) if k == "STM" => {
                self.pos += 1;
                Ok(Type::stm(self.atype()?))
            }
            Some(Tok::ConId(k)) if k == "TVar" && !matches!(self.peek_at(1), Some(Tok::Sym("["))) => {
                self.pos += 1;
                Ok(Type::tvar(self.atype()?))
            }
            _ => self.atype(),
        }
    }

    fn atype(&mut self) -> PResult<Type> {
        match self.peek().cloned() {
            Some(Tok::ConId(k)) if k == "Int" => {
                self.pos += 1;
                Ok(Type::Int)
            }
            Some(Tok::ConId(k)) if k == "Bool" => {
                self.pos += 1;
                Ok(Type::Bool)
            }
            Some(Tok::ConId(k)) if k != "STM" && k != "TVar" && k != "Any" && k != "Ok" => {
                self.pos += 1;
                Ok(Type::Data(k))
            }
            Some(Tok::Sym("[")) => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect_sym("]")?;
                Ok(Type::list(t))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if self.eat_sym(")") {
                    return Ok(Type::Unit);
                }
                let mut ts = vec![self.ty()?];
                while self.eat_sym(",") {
                    ts.push(self.ty()?);
                }
                self.expect_sym(")")?;
                Ok(if ts.len() == 1 { ts.pop().unwrap() } else { Type::Tuple(ts) })
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    // ---- contracts ----

    fn contract_decl(&mut self) -> PResult<ContractDecl> {
        if !(matches!(self.peek(), Some(Tok::ConId(k)) if k == "TVar") && matches!(self.peek_at(1), Some(Tok::Sym("[")))) {
            return Ok(ContractDecl::Plain(self.contract()?));
        }
        let mut params = Vec::new();
        while matches!(self.peek(), Some(Tok::ConId(k)) if k == "TVar") {
            self.pos += 1;
            self.expect_sym("[")?;
            let t = self.ident()?;
            self.expect_sym(",")?;
            let t2 = self.ident()?;
            self.expect_sym("]")?;
            self.expect_sym("->")?;
            params.push((t, t2));
        }
        self.expect_sym("|")?;
        let pre = self.expr()?;
        self.expect_sym("<>")?;
        let post = self.expr()?;
        self.expect_sym("|")?;
        let result = self.contract()?;
        Ok(ContractDecl::TVarParams { params, pre, post, result })
    }

    pub fn contract(&mut self) -> PResult<Contract> {
        if let Some(b) = self.try_binder_prefix() {
            let dom = self.contract_atom()?;
            self.expect_sym("->")?;
            let cod = self.contract()?;
            return Ok(Contract::dep_fun(b, dom, cod));
        }
        let dom = self.contract_atom()?;
        if self.eat_sym("->") {
            let cod = self.contract()?;
            Ok(Contract::arrow(dom, cod))
        } else {
            Ok(dom)
        }
    }

    /// `x:` or `(x1,..,xn):` in front of a dependent contract.
    fn try_binder_prefix(&mut self) -> Option<Binder> {
        let save = self.pos;
        let b = self.binder().ok();
        if b.is_some() && self.eat_sym(":") {
            return b;
        }
        self.pos = save;
        None
    }

    fn binder(&mut self) -> PResult<Binder> {
        if self.eat_sym("(") {
            let mut xs = vec![self.ident()?];
            while self.eat_sym(",") {
                xs.push(self.ident()?);
            }
            self.expect_sym(")")?;
            Ok(Binder::Tuple(xs))
        } else {
            Ok(Binder::var(self.ident()?))
        }
    }

    fn contract_atom(&mut self) -> PResult<Contract> {
        match self.peek().cloned() {
            Some(Tok::Sym("{")) => {
                self.pos += 1;
                let b = self.binder()?;
                self.expect_sym("|")?;
                let p = self.expr()?;
                self.expect_sym("}")?;
                Ok(Contract::Pred(b, p))
            }
            Some(Tok::ConId(k)) if k == "Any" => {
                self.pos += 1;
                Ok(Contract::Any)
            }
            Some(Tok::ConId(k)) if k == "Ok" => {
                self.pos += 1;
                Ok(Contract::ok())
            }
            Some(Tok::Sym("||")) => {
                self.pos += 1;
                let b = self.try_binder_prefix();
                let pre = self.contract()?;
                self.expect_sym("<>")?;
                let post = self.contract()?;
                self.expect_sym("||")?;
                let res = self.contract_atom_or_arrow()?;
                Ok(match b {
                    Some(b) => Contract::stm(b, pre, post, res),
                    None => Contract::stm_op(pre, post, res),
                })
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let mut cs = vec![self.contract()?];
                while self.eat_sym(",") {
                    cs.push(self.contract()?);
                }
                self.expect_sym(")")?;
                Ok(if cs.len() == 1 { cs.pop().unwrap() } else { Contract::Tuple(cs) })
            }
            _ => Err(self.unexpected("a contract")),
        }
    }

    /// The result contract of `||..||`, which extends as far as possible.
    fn contract_atom_or_arrow(&mut self) -> PResult<Contract> {
        self.contract_atom()
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> PResult<Expr> {
        let s = self.surface()?;
        Ok(desugar(&s)?)
    }

    fn starts_top(&self) -> bool {
        self.is_sym("\\") || self.is_sym("λ") || ["case", "do", "let", "if"].iter().any(|k| self.is_kw(k))
    }

    pub fn surface(&mut self) -> PResult<Surface> {
        if self.eat_sym("\\") || self.eat_sym("λ") {
            let mut pats = vec![self.pattern()?];
            while !self.is_sym(".") && !self.is_sym("->") {
                pats.push(self.pattern()?);
            }
            self.pos += 1;
            let body = self.surface()?;
            return Ok(pats.into_iter().rev().fold(body, |b, p| Surface::Lam(p, Box::new(b))));
        }
        if self.eat_kw("case") {
            let scrut = self.surface()?;
            self.expect_kw("of")?;
            let alts = self.block(|p| p.alt())?;
            return Ok(Surface::Case(Box::new(scrut), alts));
        }
        if self.eat_kw("do") {
            return Ok(Surface::Do(self.block(|p| p.stmt())?));
        }
        if self.eat_kw("let") {
            let x = self.ident()?;
            self.expect_sym("=")?;
            let bound = self.surface()?;
            self.expect_kw("in")?;
            let body = self.surface()?;
            return Ok(Surface::Let(x, Box::new(bound), Box::new(body)));
        }
        if self.eat_kw("if") {
            let c = self.surface()?;
            self.expect_kw("then")?;
            let t = self.surface()?;
            self.expect_kw("else")?;
            let e = self.surface()?;
            return Ok(Surface::Case(
                Box::new(c),
                vec![
                    SurfaceAlt { con: TRUE.into(), vars: vec![], body: t },
                    SurfaceAlt { con: FALSE.into(), vars: vec![], body: e },
                ],
            ));
        }
        self.bind_expr()
    }

    /// `{ item; item }` with explicit or layout braces.
    fn block<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let (close, sep) = if self.eat_sym("{") {
            (Tok::Sym("}"), Tok::Sym(";"))
        } else if self.peek() == Some(&Tok::VOpen) {
            self.pos += 1;
            (Tok::VClose, Tok::VSemi)
        } else {
            return Err(self.unexpected("a block"));
        };
        let mut items = Vec::new();
        loop {
            if self.peek() == Some(&close) {
                self.pos += 1;
                break;
            }
            items.push(item(self)?);
            if self.peek() == Some(&sep) || (close == Tok::VClose && self.is_sym(";")) {
                self.pos += 1;
            } else if self.peek() == Some(&close) {
                self.pos += 1;
                break;
            } else {
                return Err(self.unexpected("`;` or the end of the block"));
            }
        }
        Ok(items)
    }

    fn alt(&mut self) -> PResult<SurfaceAlt> {
        let (con, vars) = self.alt_pattern()?;
        self.expect_sym("->")?;
        Ok(SurfaceAlt { con, vars, body: self.surface()? })
    }

    fn alt_pattern(&mut self) -> PResult<(Name, Vec<Name>)> {
        if self.eat_sym("[]") {
            return Ok((NIL.into(), vec![]));
        }
        if let Some(Tok::ConId(_)) = self.peek() {
            let k = self.con_id()?;
            let mut vars = Vec::new();
            while !self.is_sym("->") {
                vars.push(self.var_or_wild()?);
            }
            return Ok((k, vars));
        }
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok((UNIT.into(), vec![]));
            }
            let first = self.var_or_wild()?;
            if self.eat_sym(":") {
                let rest = self.var_or_wild()?;
                self.expect_sym(")")?;
                return Ok((CONS.into(), vec![first, rest]));
            }
            let mut vars = vec![first];
            while self.eat_sym(",") {
                vars.push(self.var_or_wild()?);
            }
            self.expect_sym(")")?;
            return Ok(if vars.len() == 1 { return Err(self.error("a one-element tuple pattern")) } else { (tuple_con(vars.len()), vars) });
        }
        let first = self.var_or_wild()?;
        self.expect_sym(":")?;
        let rest = self.var_or_wild()?;
        Ok((CONS.into(), vec![first, rest]))
    }

    fn var_or_wild(&mut self) -> PResult<Name> {
        if self.eat_sym("_") {
            Ok("_".into())
        } else {
            self.ident()
        }
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if self.eat_sym("_") {
            return Ok(Pattern::Wild);
        }
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok(Pattern::Tuple(vec![]));
            }
            let mut xs = vec![self.var_or_wild()?];
            while self.eat_sym(",") {
                xs.push(self.var_or_wild()?);
            }
            self.expect_sym(")")?;
            return Ok(if xs.len() == 1 { Pattern::Var(xs.pop().unwrap()) } else { Pattern::Tuple(xs) });
        }
        Ok(Pattern::Var(self.ident()?))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let save = self.pos;
        if let Ok(p) = self.pattern() {
            if self.eat_sym("<-") {
                return Ok(Stmt::Bind(p, self.surface()?));
            }
        }
        self.pos = save;
        Ok(Stmt::Expr(self.surface()?))
    }

    /// Right operand of a binary operator: a trailing lambda, case, do,
    /// let or if extends to the end.
    fn operand(&mut self, next: fn(&mut Self) -> PResult<Surface>) -> PResult<Surface> {
        if self.starts_top() {
            self.surface()
        } else {
            next(self)
        }
    }

    fn bind_expr(&mut self) -> PResult<Surface> {
        let mut l = self.or_else_expr()?;
        while self.eat_sym(">>=") {
            let r = self.operand(Self::or_else_expr)?;
            l = Surface::Bind(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn or_else_expr(&mut self) -> PResult<Surface> {
        let mut l = self.or_expr()?;
        while self.eat_sym("`orElse`") {
            let r = self.operand(Self::or_expr)?;
            l = Surface::OrElse(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn or_expr(&mut self) -> PResult<Surface> {
        let l = self.and_expr()?;
        if self.eat_sym("||") {
            let r = self.operand(Self::or_expr)?;
            return Ok(Surface::Prim(PrimOp::Or, vec![l, r]));
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> PResult<Surface> {
        let l = self.cmp_expr()?;
        if self.eat_sym("&&") {
            let r = self.operand(Self::and_expr)?;
            return Ok(Surface::Prim(PrimOp::And, vec![l, r]));
        }
        Ok(l)
    }

    fn cmp_expr(&mut self) -> PResult<Surface> {
        let l = self.cons_expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("==")) => PrimOp::Eq,
            Some(Tok::Sym(">")) => PrimOp::Gt,
            Some(Tok::Sym(">=")) => PrimOp::Ge,
            Some(Tok::Sym("<")) => PrimOp::Lt,
            Some(Tok::Sym("<=")) => PrimOp::Le,
            _ => return Ok(l),
        };
        self.pos += 1;
        let r = self.operand(Self::cons_expr)?;
        Ok(Surface::Prim(op, vec![l, r]))
    }

    fn cons_expr(&mut self) -> PResult<Surface> {
        let l = self.add_expr()?;
        if self.eat_sym(":") {
            let r = self.operand(Self::cons_expr)?;
            return Ok(Surface::Con(CONS.into(), vec![l, r]));
        }
        Ok(l)
    }

    fn add_expr(&mut self) -> PResult<Surface> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => PrimOp::Add,
                Some(Tok::Sym("-")) => PrimOp::Sub,
                _ => return Ok(l),
            };
            self.pos += 1;
            let r = self.operand(Self::mul_expr)?;
            l = Surface::Prim(op, vec![l, r]);
        }
    }

    fn mul_expr(&mut self) -> PResult<Surface> {
        let mut l = self.app_expr()?;
        while self.eat_sym("*") {
            let r = self.operand(Self::app_expr)?;
            l = Surface::Prim(PrimOp::Mul, vec![l, r]);
        }
        Ok(l)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(x)) => !is_keyword(x) || x == "retry",
            Some(Tok::ConId(_)) | Some(Tok::Int(_)) => true,
            Some(Tok::Sym(s)) => matches!(*s, "(" | "[" | "[]"),
            _ => false,
        }
    }

    fn app_expr(&mut self) -> PResult<Surface> {
        if self.eat_kw("not") {
            return Ok(Surface::Prim(PrimOp::Not, vec![self.atom()?]));
        }
        if self.eat_kw("readTVar") {
            return Ok(Surface::Read(self.ident()?));
        }
        if self.eat_kw("writeTVar") {
            let t = self.ident()?;
            return Ok(Surface::Write(t, Box::new(self.atom()?)));
        }
        if self.eat_kw("return") {
            return Ok(Surface::Return(Box::new(self.atom()?)));
        }
        if let Some(Tok::ConId(k)) = self.peek().cloned() {
            if k != "BAD" && k != "UNR" {
                self.pos += 1;
                let mut args = Vec::new();
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                return Ok(Surface::Con(k, args));
            }
        }
        let mut f = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            f = Surface::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Surface> {
        match self.peek().cloned() {
            Some(Tok::Ident(x)) if x == "retry" => {
                self.pos += 1;
                Ok(Surface::Retry)
            }
            Some(Tok::Ident(x)) if !is_keyword(&x) => {
                self.pos += 1;
                Ok(Surface::Var(x))
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Surface::Int(n))
            }
            Some(Tok::ConId(k)) => {
                self.pos += 1;
                Ok(match k.as_str() {
                    "BAD" => Surface::Exc(Exception::Bad),
                    "UNR" => Surface::Exc(Exception::Unr),
                    _ => Surface::Con(k, vec![]),
                })
            }
            Some(Tok::Sym("[]")) => {
                self.pos += 1;
                Ok(Surface::Con(NIL.into(), vec![]))
            }
            Some(Tok::Sym("[")) => {
                self.pos += 1;
                let mut items = vec![self.surface()?];
                while self.eat_sym(",") {
                    items.push(self.surface()?);
                }
                self.expect_sym("]")?;
                Ok(Surface::List(items))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if self.eat_sym(")") {
                    return Ok(Surface::Con(UNIT.into(), vec![]));
                }
                if self.is_sym("-") {
                    if let Some(Tok::Int(n)) = self.peek_at(1).cloned() {
                        if matches!(self.peek_at(2), Some(Tok::Sym(")"))) {
                            self.pos += 3;
                            return Ok(Surface::Int(-n));
                        }
                    }
                }
                let mut items = vec![self.surface()?];
                while self.eat_sym(",") {
                    items.push(self.surface()?);
                }
                self.expect_sym(")")?;
                Ok(if items.len() == 1 {
                    items.pop().unwrap()
                } else {
                    Surface::Con(tuple_con(items.len()), items)
                })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
