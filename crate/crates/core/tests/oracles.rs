mod common;

use common::{defs, type_ctx};
use stmcheck::checker::{arith_decide, simplify, wrap_assume, wrap_ensure, CheckConfig, Checker, PathCondition, SimplifyConfig, Verdict};
use stmcheck::contracts::{contract_alpha_eq, generate_inhabitant, Binder, Contract, Oracle, OracleConfig, SatVerdict, WitnessStep};
use stmcheck::frontend::{parse, parse_contract, parse_expr};
use stmcheck::semantics::{env_tuple, eval, eval_deep, DeepValue, Env, EvalOutcome};
use stmcheck::syntax::{
    alpha_eq, bind_functions, complete_cases, free_vars, is_pure, Alt, DataDecls, Exception, Expr, Program, CONS,
};
use stmcheck::transform::{close_transaction, gamma_expand, invariant_to_contract, specialize_program, t_contract, t_expr};
use stmcheck::typecheck::{check_program, Type, TypeErrorKind};

const FUEL: usize = 10_000;

fn expr(text: &str) -> Expr {
    parse_expr(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn contract(text: &str) -> Contract {
    parse_contract(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn program(text: &str) -> Program {
    parse(text).unwrap_or_else(|e| panic!("{e}")).program
}

fn fixture(name: &str) -> Program {
    program(&common::fixture_text(name))
}

fn same_contract(got: &Contract, want: &str) {
    let want = contract(want);
    assert!(contract_alpha_eq(got, &want), "{got} vs {want}");
}

fn sorted(mut vs: Vec<Expr>) -> Vec<String> {
    let mut out: Vec<String> = vs.drain(..).map(|v| v.to_string()).collect();
    out.sort();
    out
}

const SINGLE: &str = "\
tvar t :: Int = 1
pos t = t > 0
invariant pos
transaction incr = readTVar t >>= λx. writeTVar t (x+1)
";

// Worked out by hand, confirmed with the interpreter.

#[test]
fn list_case_gets_a_cons_branch() {
    let e = complete_cases(&expr("case xs of {[] -> 0}"), &DataDecls::builtin()).unwrap();
    let Expr::Case(_, alts) = &e else { panic!("{e}") };
    assert_eq!(alts.len(), 2);
    assert_eq!(alts[1].con, CONS);
    assert_eq!(alts[1].vars.len(), 2);
    assert_eq!(alts[1].body, Expr::bad());
    assert_eq!(alts[0].body, Expr::Int(0));
}

#[test]
fn constructor_around_a_read_is_impure() {
    assert!(!is_pure(&Expr::con("K", vec![Expr::read("t")])));
}

#[test]
fn increment_stores_eight() {
    let env = Env::new([("t".to_string(), Expr::Int(7))]).unwrap();
    match eval(&expr("readTVar t >>= λx. writeTVar t (x+1)"), &env, &defs(), FUEL) {
        EvalOutcome::Converged(Expr::Return(v), after) => {
            assert_eq!(*v, Expr::unit());
            assert_eq!(eval_deep(after.get("t").unwrap(), &defs(), FUEL).to_expr(), Expr::Int(8));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn environment_tuple_follows_declaration_order() {
    let x1 = expr("x+1");
    let env = Env::new([("a".into(), x1.clone()), ("b".into(), Expr::bool(true)), ("c".into(), Expr::nil())]).unwrap();
    assert_eq!(env_tuple(&env), Expr::tuple(vec![x1, Expr::bool(true), Expr::nil()]));
}

#[test]
fn first_inhabitant_of_the_sum_invariant() {
    let c = contract("{(tab,s) | sum tab == s}");
    let c = c.map_preds(&mut |p| bind_functions(p, &["sum".to_string()].into_iter().collect()));
    let (ctx, defs) = (type_ctx(), defs());
    let oracle = Oracle::new(&defs, &ctx, OracleConfig::default());
    let ty = Type::tuple(vec![Type::list(Type::Int), Type::Int]);
    let e = generate_inhabitant(&c, &ty, &oracle, 100, 0).unwrap();
    assert_eq!(e, Expr::tuple(vec![Expr::nil(), Expr::Int(0)]));
}

#[test]
fn bind_distributes_over_alternatives() {
    let e = expr("(writeTVar a 1 `orElse` writeTVar a 2) >>= λu. writeTVar b True");
    let got = sorted(gamma_expand(&e, 64).unwrap());
    let want = sorted(vec![
        expr("writeTVar a 1 >>= λu. writeTVar b True"),
        expr("writeTVar a 2 >>= λu. writeTVar b True"),
    ]);
    assert_eq!(got, want);
}

#[test]
fn closing_over_two_parameters() {
    let inv = contract("|| {t | t > 0} <> {t | t > 0} || Any");
    let e = expr("writeTVar t (a+b)");
    let params = vec![("a".into(), Contract::ok()), ("b".into(), contract("{x | x > 0}"))];
    let (body, c) = close_transaction(&e, &params, &["t".into()], &inv).unwrap();
    assert!(alpha_eq(&body, &expr("λa. λb. writeTVar t (a+b)")));
    same_contract(&c, "Ok -> {x | x > 0} -> || {t | t > 0} <> {t | t > 0} || Any");
    assert!(close_transaction(&e, &params[..1], &["t".into()], &inv).is_err());
}

#[test]
fn specialization_at_the_second_tvar() {
    let p = fixture("specialize.stm");
    let (_, specs) = specialize_program(&p, &check_program(&p).unwrap()).unwrap();
    let b = specs.iter().find(|s| s.def.name == "f_tB").expect("f_tB");
    same_contract(b.contract().unwrap(), "|| {(tA,tB) | tB >= 0} <> {(tA',tB') | tB' >= tB} || Any");
    assert!(alpha_eq(&b.def.body, &expr("readTVar tB >>= λn. writeTVar tB (n+1)")));
}

#[test]
fn tuple_wrap_is_componentwise() {
    let c = Contract::Tuple(vec![contract("{a | a > 0}"), Contract::ok()]);
    let pair = Expr::tuple(vec![Expr::Int(5), Expr::Int(3)]);
    let w = wrap_ensure(&pair, &c).unwrap();
    assert_eq!(eval_deep(&w, &defs(), FUEL).to_expr(), pair);
    let bad = wrap_ensure(&Expr::tuple(vec![Expr::Int(0), Expr::Int(3)]), &c).unwrap();
    let DeepValue::Con(_, parts) = eval_deep(&bad, &defs(), FUEL) else { panic!() };
    assert_eq!(parts, vec![DeepValue::Crash, DeepValue::Int(3)]);
}

#[test]
fn commuted_sum_under_the_invariant() {
    let mut pc = PathCondition::new();
    pc.assume(expr("s == sum tab"), true);
    let goal = expr("n + s == s + n");
    assert_eq!(arith_decide(&goal, &pc), Some(true));
    for n in -4..=4 {
        for s in -4..=4 {
            let g = expr(&format!("({n}) + ({s}) == ({s}) + ({n})"));
            assert!(eval_deep(&g, &defs(), FUEL).to_expr().is_true());
        }
    }
    let mut pc = PathCondition::new();
    pc.assume(expr("sum tab == s"), true);
    assert_eq!(arith_decide(&expr("n + sum tab == s + n"), &pc), Some(true));
}

#[test]
fn inc_against_a_stronger_result_is_unsafe_at_one() {
    let p = program("inc :: Int -> Int\ninc :: Ok -> {r | r > x+1}\ninc x = x + 1\n");
    let report = Checker::new(&p, CheckConfig::default()).unwrap().check_function("inc").unwrap();
    let Verdict::Unsafe(w) = &report.verdict else { panic!("{}", report.verdict) };
    assert!(matches!(&w.steps[0], WitnessStep::Arg { value: Expr::Int(1), .. }), "{w}");
    let r = eval_deep(&expr("1 + 1 > 1 + 1"), &defs(), FUEL).to_expr();
    assert!(r.is_false());
}

#[test]
fn case_with_a_retry_branch_is_stm() {
    let ctx = type_ctx();
    let e = expr("case b of {True -> return 1; False -> retry}");
    let (ty, _) = ctx.infer(&e, &[("b".into(), Type::Bool)]).unwrap();
    assert_eq!(ty, Type::stm(Type::Int));
}

// Reference values.

#[test]
fn desugaring_rules() {
    assert!(alpha_eq(&expr("do { x <- readTVar a; return x }"), &expr("readTVar a >>= λx. return x")));
    assert_eq!(expr("do { readTVar a }"), expr("readTVar a"));
    assert!(alpha_eq(&expr("let x = 1 in x + 2"), &expr("(λx. x + 2) 1")));
}

#[test]
fn bool_case_gets_a_false_branch() {
    let e = complete_cases(&expr("λx. case x of {True -> f}"), &DataDecls::builtin()).unwrap();
    assert!(alpha_eq(&e, &expr("λx. case x of {True -> f; False -> BAD}")), "{e}");
}

#[test]
fn free_variables_of_add_tab() {
    assert_eq!(free_vars(&expr("readTVar shTab >>= λt. writeTVar shTab (n:t)")), vec!["n".to_string()]);
    assert!(!is_pure(&expr("return 5")));
}

#[test]
fn read_write_and_exception_rules() {
    let env = Env::new([("t".to_string(), Expr::Int(3))]).unwrap();
    assert_eq!(eval(&expr("readTVar t"), &env, &defs(), FUEL), EvalOutcome::Converged(Expr::ret(Expr::Int(3)), env.clone()));
    match eval(&expr("writeTVar t 4"), &env, &defs(), FUEL) {
        EvalOutcome::Converged(v, after) => {
            assert_eq!(v, Expr::ret(Expr::unit()));
            assert_eq!(after.get("t"), Some(&Expr::Int(4)));
        }
        other => panic!("{other:?}"),
    }
    let crash = Expr::case(Expr::bad(), vec![Alt::new("True", vec![], Expr::Int(1))]);
    assert!(eval(&crash, &env, &defs(), FUEL).is_crash());
    assert!(matches!(eval(&Expr::unr(), &env, &defs(), FUEL), EvalOutcome::Unreachable(_)));
}

#[test]
fn read_becomes_state_pair() {
    let p = program(SINGLE);
    let typed = check_program(&p).unwrap();
    let e = Expr::read("t");
    let ann = typed.ctx.check(&e, &[], &Type::stm(Type::Int)).unwrap();
    let te = t_expr(&e, &ann, &p.tvar_names()).unwrap();
    assert!(alpha_eq(&te, &expr("λt. (t,t)")), "{te}");
}

#[test]
fn increment_transforms_to_a_step() {
    let p = program(SINGLE);
    let checker = Checker::new(&p, CheckConfig::default()).unwrap();
    let report = checker.check_transaction("incr").unwrap();
    assert!(alpha_eq(&report.variants[0].pure, &expr("λt. ((), t+1)")), "{}", report.variants[0].pure);
    assert!(report.verdict.is_safe());
}

#[test]
fn combined_transaction_transforms_to_a_step() {
    let p = fixture("table-combined.stm");
    let checker = Checker::new(&p, CheckConfig::default()).unwrap();
    let v = &checker.check_transaction("add").unwrap().variants[0];
    assert_eq!(v.pure.to_string(), "λn.λ(shTab,shSum).((),(n:shTab,shSum+n))");
    let want = contract("Ok -> {(shTab,shSum) | inv (shTab,shSum)} -> (Any, {(shTab,shSum) | inv (shTab,shSum)})");
    let want = want.map_preds(&mut |e| bind_functions(e, &["inv".to_string()].into_iter().collect()));
    assert!(contract_alpha_eq(&v.pure_contract, &want), "{}", v.pure_contract);
}

#[test]
fn contract_transformation_rules() {
    let c = contract("|| x:{x | x > 0} <> {y | y > x} || {r | r == x}");
    same_contract(&t_contract(&c), "x:{x | x > 0} -> ({r | r == x}, {y | y > x})");
    assert_eq!(t_contract(&Contract::Any), Contract::Any);
    let inv = contract("Ok -> || {(a,b) | a > b} <> {(a,b) | a > b} || Any");
    same_contract(&t_contract(&inv), "Ok -> {(a,b) | a > b} -> (Any, {(a,b) | a > b})");
}

#[test]
fn alternatives_become_variants() {
    let e = expr("writeTVar a 1 `orElse` writeTVar a 2");
    assert_eq!(sorted(gamma_expand(&e, 64).unwrap()), sorted(vec![expr("writeTVar a 1"), expr("writeTVar a 2")]));
}

#[test]
fn invariants_become_stm_contracts() {
    let p = fixture("table-split.stm");
    let c = invariant_to_contract(&p).unwrap();
    let pred = Contract::Pred(Binder::tuple(["shTab", "shSum"]), Expr::app(Expr::fun("inv"), expr("(shTab,shSum)")));
    assert_eq!(c, Contract::stm(Binder::tuple(["shTab", "shSum"]), pred.clone(), pred, Contract::Any));

    let c = invariant_to_contract(&program(SINGLE)).unwrap();
    assert_eq!(c.to_string(), "|| {t | pos t} <> {t | pos t} || Any");
}

#[test]
fn transactions_close_over_n() {
    let p = fixture("table-split.stm");
    let inv = invariant_to_contract(&p).unwrap();
    let tx = p.transaction("addTab").unwrap();
    let (body, c) = close_transaction(&tx.body, &tx.params, &p.tvar_names(), &inv).unwrap();
    assert!(matches!(&body, Expr::Lam(x, _) if x == "n"));
    assert_eq!(c, Contract::dep_fun(Binder::var("n"), Contract::ok(), inv));
}

#[test]
fn specialization_at_the_first_tvar() {
    let p = fixture("specialize.stm");
    let (_, specs) = specialize_program(&p, &check_program(&p).unwrap()).unwrap();
    let a = specs.iter().find(|s| s.def.name == "f_tA").expect("f_tA");
    same_contract(a.contract().unwrap(), "|| {(tA,tB) | tA >= 0} <> {(tA',tB') | tA' >= tA} || Any");
    assert!(alpha_eq(&a.def.body, &expr("readTVar tA >>= λn. writeTVar tA (n+1)")));
}

#[test]
fn wrapped_inc_matches_the_listing() {
    let listing = "\
inc' x = case x > 0 of
           True -> case x + 1 > x of
                     True  -> x+1
                     False -> BAD
           False -> UNR
";
    let want = program(listing).functions["inc'"].body.clone();
    let p = fixture("inc.stm");
    let inc = &p.functions["inc"];
    let c = contract("{x | x > 0} -> {r | r > x}");
    let w = wrap_ensure(&inc.body, &c).unwrap();
    assert!(alpha_eq(&w, &want), "{w}");

    let s = simplify(&w, &defs(), &SimplifyConfig::default()).expr;
    assert!(!s.contains_exc(Exception::Bad), "{s}");
    assert_eq!(arith_decide(&expr("x + 1 > x"), &PathCondition::new()), Some(true));
}

#[test]
fn assumed_predicate_and_swapped_call_site() {
    let w = wrap_assume(&Expr::var("e"), &contract("{x | x > 0}")).unwrap();
    assert!(alpha_eq(&w, &expr("case e > 0 of {True -> e; False -> UNR}")), "{w}");

    let inc = expr("λx. x + 1");
    let c = contract("{x | x > 0} -> {r | r > x}");
    let call = wrap_assume(&inc, &c).unwrap().to_string();
    let def = wrap_ensure(&inc, &c).unwrap().to_string();
    assert_eq!(call.replace("BAD", "#").replace("UNR", "BAD").replace('#', "UNR"), def);
}

#[test]
fn reference_verdicts() {
    let check = |name: &str, f: &str| {
        let p = fixture(name);
        Checker::new(&p, CheckConfig::default()).unwrap().check_function(f).unwrap().verdict
    };
    assert!(check("inc.stm", "inc").is_safe());
    assert!(check("add.stm", "add").is_safe());
    assert!(check("send.stm", "send").is_safe());

    let split = fixture("table-split.stm");
    let checker = Checker::new(&split, CheckConfig::default()).unwrap();
    assert!(checker.check_transaction("addTab").unwrap().verdict.is_unsafe());
    assert!(checker.check_transaction("addSum").unwrap().verdict.is_unsafe());
    let combined = fixture("table-combined.stm");
    assert!(Checker::new(&combined, CheckConfig::default()).unwrap().check_transaction("add").unwrap().verdict.is_safe());
}

#[test]
fn send_has_its_declared_type() {
    let p = fixture("send.stm");
    let typed = check_program(&p).unwrap();
    let msg = Type::Data("Msg".into());
    assert_eq!(typed.ctx.functions["send"], Type::fun(msg.clone(), Type::stm(msg)));
}

#[test]
fn impure_payloads_are_rejected() {
    let p = program("tvar shSum :: Int = 0\ninv s = True\ninvariant inv\ntransaction t = writeTVar shSum (readTVar shSum)\n");
    let err = check_program(&p).unwrap_err();
    assert!(matches!(err.kind, TypeErrorKind::ImpurePayload(_)), "{err}");
}

#[test]
fn crashing_values_satisfy_any() {
    let (ctx, defs) = (type_ctx(), defs());
    let oracle = Oracle::new(&defs, &ctx, OracleConfig::default());
    assert_eq!(oracle.satisfies(&Expr::bad(), &Contract::Any, &Type::Int), SatVerdict::Holds);
}

#[test]
fn increment_keeps_positive_values_positive() {
    let p = program(SINGLE);
    let checker = Checker::new(&p, CheckConfig::default()).unwrap();
    let ctx = &checker.typed().ctx;
    let defs = checker.program().definitions();
    let oracle = Oracle::new(&defs, ctx, OracleConfig::default());
    let c = checker.invariant().unwrap();
    let e = expr("readTVar t >>= λx. writeTVar t (x+1)");
    assert_eq!(oracle.satisfies(&e, c, &Type::stm(Type::Unit)), SatVerdict::Holds);
    let inv = contract("|| {(shTab,shSum) | inv (shTab,shSum)} <> {(shTab,shSum) | inv (shTab,shSum)} || Any");
    let split = fixture("table-split.stm");
    let typed = check_program(&split).unwrap();
    let inv = inv.map_preds(&mut |e| bind_functions(e, &["inv".to_string()].into_iter().collect()));
    assert!(stmcheck::contracts::contract_fits(&inv, &Type::stm(Type::Unit), &typed.ctx));
}

#[test]
fn program_shapes() {
    let split = fixture("table-split.stm");
    assert_eq!((split.tvars.len(), split.transactions.len()), (2, 2));
    assert_eq!(split.invariant.as_deref(), Some("inv"));
    let combined = fixture("table-combined.stm");
    assert_eq!((combined.tvars.len(), combined.transactions.len()), (2, 1));

    let add = fixture("add.stm");
    let c = match add.functions["add"].contract.as_ref().unwrap() {
        stmcheck::syntax::FunContract::Plain(c) => c.clone(),
        other => panic!("{other:?}"),
    };
    let want = contract("{x | True} -> {(tab,s) | sum tab == s} -> {(tab,s) | sum tab == s}");
    let want = want.map_preds(&mut |e| bind_functions(e, &["sum".to_string()].into_iter().collect()));
    assert!(contract_alpha_eq(&c, &want), "{c}");
}
