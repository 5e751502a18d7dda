#![allow(dead_code)]

pub mod enumerate;
pub mod props;

use std::path::PathBuf;
use std::process::Command;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stmcheck::contracts::{Binder, Contract};
use stmcheck::semantics::{Defs, Env};
use stmcheck::syntax::{Alt, DataDecls, Expr, FunctionDef, Name, PrimOp, Program, TVarDecl, Transaction, CONS, FALSE, NIL, TRUE};
use stmcheck::typecheck::{Type, TypeCtx};

/// Proptest settings without regression files.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases: n, failure_persistence: None, ..Default::default() }
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_stmcheck")).args(args).output().expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// `sum`, a non-recursive `double` and a `loop` that never returns.
pub fn defs() -> Defs {
    let sum = Expr::lam(
        "xs",
        Expr::case(
            Expr::var("xs"),
            vec![
                Alt::new(NIL, vec![], Expr::Int(0)),
                Alt::new(
                    CONS,
                    vec!["l".into(), "ls".into()],
                    Expr::binop(PrimOp::Add, Expr::var("l"), Expr::app(Expr::fun("sum"), Expr::var("ls"))),
                ),
            ],
        ),
    );
    let double = Expr::lam("n", Expr::binop(PrimOp::Add, Expr::var("n"), Expr::var("n")));
    let lp = Expr::lam("n", Expr::app(Expr::fun("loop"), Expr::var("n")));
    [("sum", sum), ("double", double), ("loop", lp)].into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub const TVARS: [&str; 2] = ["a", "b"];

pub fn tvar_types() -> IndexMap<Name, Type> {
    [("a".to_string(), Type::Int), ("b".to_string(), Type::Bool)].into_iter().collect()
}

pub fn tvar_names() -> Vec<Name> {
    TVARS.iter().map(|s| s.to_string()).collect()
}

pub fn type_ctx() -> TypeCtx {
    let mut ctx = TypeCtx::new(DataDecls::builtin(), tvar_types());
    ctx.functions.insert("sum".into(), Type::fun(Type::list(Type::Int), Type::Int));
    ctx.functions.insert("double".into(), Type::fun(Type::Int, Type::Int));
    ctx.functions.insert("loop".into(), Type::fun(Type::Int, Type::Int));
    ctx
}

pub fn env(a: i64, b: bool) -> Env {
    Env::new([("a".to_string(), Expr::Int(a)), ("b".to_string(), Expr::bool(b))]).unwrap()
}

/// A few concrete environments for the two test TVars.
pub fn envs() -> Vec<Env> {
    vec![env(0, true), env(1, false), env(-2, true), env(5, false), env(3, true)]
}

pub fn if_(c: Expr, t: Expr, f: Expr) -> Expr {
    Expr::case(c, vec![Alt::new(TRUE, vec![], t), Alt::new(FALSE, vec![], f)])
}

#[derive(Clone, Default)]
pub struct Scope {
    pub ints: Vec<Name>,
    pub bools: Vec<Name>,
}

impl Scope {
    fn with_int(&self, x: &str) -> Scope {
        let mut s = self.clone();
        s.ints.push(x.into());
        s
    }

    fn with_bool(&self, x: &str) -> Scope {
        let mut s = self.clone();
        s.bools.push(x.into());
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StmResult {
    Int,
    Unit,
}

/// Random well-typed expressions.
pub struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
    /// Per-mille chance of an exception at a leaf.
    pub exc_rate: u32,
    pub calls: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0, exc_rate: 40, calls: true }
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn chance(&mut self, per_mille: u32) -> bool {
        self.rng.gen_range(0..1000) < per_mille
    }

    fn name(&mut self, base: &str) -> Name {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn exc(&mut self) -> Expr {
        if self.below(2) == 0 {
            Expr::bad()
        } else {
            Expr::unr()
        }
    }

    pub fn int(&mut self, depth: u32, sc: &Scope) -> Expr {
        if self.chance(self.exc_rate) {
            return self.exc();
        }
        if depth == 0 || self.below(4) == 0 {
            if !sc.ints.is_empty() && self.below(2) == 0 {
                let i = self.below(sc.ints.len());
                return Expr::var(sc.ints[i].clone());
            }
            return Expr::Int(self.rng.gen_range(-3..=3));
        }
        let d = depth - 1;
        match self.below(if self.calls { 7 } else { 5 }) {
            0 | 1 => {
                let op = [PrimOp::Add, PrimOp::Sub, PrimOp::Mul][self.below(3)];
                Expr::binop(op, self.int(d, sc), self.int(d, sc))
            }
            2 => if_(self.bool(d, sc), self.int(d, sc), self.int(d, sc)),
            3 => {
                let x = self.name("x");
                let body = self.int(d, &sc.with_int(&x));
                Expr::app(Expr::lam(x, body), self.int(d, sc))
            }
            4 => {
                let (h, t) = (self.name("h"), self.name("t"));
                let l = self.list(d, sc);
                let nil = self.int(d, sc);
                let cons = self.int(d, &sc.with_int(&h));
                Expr::case(l, vec![Alt::new(NIL, vec![], nil), Alt::new(CONS, vec![h, t], cons)])
            }
            5 => Expr::app(Expr::fun("sum"), self.list(d, sc)),
            _ => {
                let f = if self.chance(150) { "loop" } else { "double" };
                Expr::app(Expr::fun(f), self.int(d, sc))
            }
        }
    }

    pub fn bool(&mut self, depth: u32, sc: &Scope) -> Expr {
        if self.chance(self.exc_rate / 2) {
            return self.exc();
        }
        if depth == 0 || self.below(4) == 0 {
            if !sc.bools.is_empty() && self.below(2) == 0 {
                let i = self.below(sc.bools.len());
                return Expr::var(sc.bools[i].clone());
            }
            return Expr::bool(self.below(2) == 0);
        }
        let d = depth - 1;
        match self.below(5) {
            0 | 1 => {
                let op = [PrimOp::Eq, PrimOp::Gt, PrimOp::Ge, PrimOp::Lt, PrimOp::Le][self.below(5)];
                Expr::binop(op, self.int(d, sc), self.int(d, sc))
            }
            2 => {
                let op = [PrimOp::And, PrimOp::Or][self.below(2)];
                Expr::binop(op, self.bool(d, sc), self.bool(d, sc))
            }
            3 => Expr::prim(PrimOp::Not, vec![self.bool(d, sc)]),
            _ => if_(self.bool(d, sc), self.bool(d, sc), self.bool(d, sc)),
        }
    }

    pub fn list(&mut self, depth: u32, sc: &Scope) -> Expr {
        if depth == 0 || self.below(3) == 0 {
            return Expr::nil();
        }
        let d = depth - 1;
        Expr::cons(self.int(d, sc), self.list(d, sc))
    }

    /// A closed pure expression of type Int, Bool or [Int].
    pub fn pure(&mut self, depth: u32) -> Expr {
        let sc = Scope::default();
        match self.below(4) {
            0 | 1 => self.int(depth, &sc),
            2 => self.bool(depth, &sc),
            _ => self.list(depth, &sc),
        }
    }

    /// An STM operation over the TVars `a :: Int` and `b :: Bool`.
    pub fn stm(&mut self, depth: u32, sc: &Scope, res: StmResult) -> Expr {
        if self.chance(self.exc_rate / 2) {
            return if self.below(3) == 0 { Expr::Retry } else { self.exc() };
        }
        if depth == 0 || self.below(4) == 0 {
            return match (res, self.below(3)) {
                (StmResult::Int, 0) => Expr::read("a"),
                (StmResult::Int, _) => Expr::ret(self.int(1, sc)),
                (StmResult::Unit, 0) => Expr::write("b", self.bool(1, sc)),
                (StmResult::Unit, 1) => Expr::ret(Expr::unit()),
                (StmResult::Unit, _) => Expr::write("a", self.int(1, sc)),
            };
        }
        let d = depth - 1;
        match self.below(6) {
            0 | 1 => {
                let x = self.name("x");
                let m = self.stm(d, sc, StmResult::Int);
                let k = self.stm(d, &sc.with_int(&x), res);
                Expr::bind(m, Expr::lam(x, k))
            }
            2 => {
                let u = self.name("u");
                let m = self.stm(d, sc, StmResult::Unit);
                let k = self.stm(d, sc, res);
                Expr::bind(m, Expr::lam(u, k))
            }
            3 => {
                let y = self.name("y");
                let k = self.stm(d, &sc.with_bool(&y), res);
                Expr::bind(Expr::read("b"), Expr::lam(y, k))
            }
            4 => if_(self.bool(d, sc), self.stm(d, sc, res), self.stm(d, sc, res)),
            _ => {
                let x = self.name("x");
                let body = self.stm(d, &sc.with_int(&x), res);
                Expr::app(Expr::lam(x, body), self.int(d, sc))
            }
        }
    }

    /// Like [`Gen::stm`] with `orElse` nodes mixed in.
    pub fn stm_alternatives(&mut self, depth: u32, res: StmResult) -> Expr {
        if depth == 0 || self.below(3) == 0 {
            return self.stm(1, &Scope::default(), res);
        }
        let d = depth - 1;
        match self.below(3) {
            0 => Expr::or_else(self.stm_alternatives(d, res), self.stm_alternatives(d, res)),
            1 => {
                let u = self.name("u");
                let m = self.stm_alternatives(d, StmResult::Unit);
                Expr::bind(m, Expr::lam(u, self.stm_alternatives(d, res)))
            }
            _ => if_(self.bool(1, &Scope::default()), self.stm_alternatives(d, res), self.stm_alternatives(d, res)),
        }
    }

    /// Predicates never raise exceptions.
    fn pred(&mut self, depth: u32, x: &str) -> Expr {
        let rate = std::mem::replace(&mut self.exc_rate, 0);
        let p = self.bool(depth, &Scope { ints: vec![x.into()], bools: vec![] });
        self.exc_rate = rate;
        p
    }

    /// A pure contract for values of type Int, or functions over Int.
    pub fn pure_contract(&mut self, depth: u32) -> Contract {
        if depth == 0 || self.below(3) == 0 {
            return match self.below(4) {
                0 => Contract::Any,
                1 => Contract::ok(),
                _ => {
                    let x = self.name("v");
                    let p = self.pred(2, &x);
                    Contract::pred(x, p)
                }
            };
        }
        let d = depth - 1;
        match self.below(2) {
            0 => {
                let x = self.name("v");
                Contract::dep_fun(Binder::var(x), self.pure_contract(d), self.pure_contract(d))
            }
            _ => Contract::Tuple(vec![self.pure_contract(d), self.pure_contract(d)]),
        }
    }

    /// A contract that may contain STM operation contracts over `(a,b)`.
    pub fn contract(&mut self, depth: u32) -> Contract {
        if depth > 0 && self.below(2) == 0 {
            let pre = self.state_pred("a", "b");
            let post = self.state_pred("a'", "b'");
            let res = self.pure_contract(depth - 1);
            return Contract::stm(Binder::tuple(["a", "b"]), pre, post, res);
        }
        if depth > 0 && self.below(2) == 0 {
            let x = self.name("v");
            return Contract::dep_fun(Binder::var(x), self.pure_contract(depth - 1), self.contract(depth - 1));
        }
        self.pure_contract(depth)
    }

    fn state_pred(&mut self, a: &str, b: &str) -> Contract {
        let sc = Scope { ints: vec![a.into()], bools: vec![b.into()] };
        let rate = std::mem::replace(&mut self.exc_rate, 0);
        let p = self.bool(2, &sc);
        self.exc_rate = rate;
        Contract::Pred(Binder::tuple([a, b]), p)
    }
}

/// One TVar `t :: Int`, an invariant function `pos` and a single
/// transaction `tx` running `body`.
pub fn single_tvar_program(body: Expr, inv: Expr) -> Program {
    let mut p = Program { data: DataDecls::builtin(), ..Program::default() };
    p.tvars.push(TVarDecl { name: "t".into(), content: Type::Int, init: None });
    p.functions.insert(
        "pos".into(),
        FunctionDef { name: "pos".into(), ty: Some(Type::fun(Type::Int, Type::Bool)), contract: None, body: Expr::lam("t", inv), line: 0 },
    );
    p.invariant = Some("pos".into());
    p.transactions.push(Transaction { name: "tx".into(), params: vec![], body, line: 0 });
    p
}
