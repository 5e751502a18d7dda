//! Meaning-preserving symbolic simplification of pure expressions.

use std::collections::{BTreeMap, BTreeSet};

use super::arith::{arith_decide, strict_atoms, PathCondition};
use crate::semantics::{delta, Defs};
use crate::syntax::{free_var_set, fresh_name, substitute, substitute_many, Alt, Expr, Name, PrimOp, FALSE, TRUE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplifyConfig {
    /// Maximum number of rewrites.
    pub fuel: usize,
    /// Maximum nested unfoldings of one recursive function.
    pub inline_depth: usize,
}

impl Default for SimplifyConfig {
    fn default() -> Self {
        SimplifyConfig { fuel: 1000, inline_depth: 3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simplified {
    pub expr: Expr,
    /// Rewrites performed.
    pub steps: usize,
    /// Stopped early because the fuel or visit budget ran out.
    pub exhausted: bool,
}

const VISIT_CAP: usize = 400_000;
const STACK: usize = 256 << 20;

/// Simplifies `e` with `defs` available for inlining.
pub fn simplify(e: &Expr, defs: &Defs, cfg: &SimplifyConfig) -> Simplified {
    let run = || {
        let mut s = Simplifier::new(defs, cfg);
        let expr = s.simp(e, &PathCondition::new());
        Simplified { expr, steps: cfg.fuel - s.fuel, exhausted: s.exhausted }
    };
    // Unfolding recurses once per rewrite.
    std::thread::scope(|scope| match std::thread::Builder::new().stack_size(STACK).spawn_scoped(scope, run) {
        Ok(h) => h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)),
        Err(_) => run(),
    })
}

/// Functions whose body reaches a call to themselves.
pub fn recursive_functions(defs: &Defs) -> BTreeSet<Name> {
    let calls: BTreeMap<&Name, Vec<Name>> = defs.iter().map(|(k, b)| (k, b.called_functions())).collect();
    let mut out = BTreeSet::new();
    for f in defs.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Name> = calls[f].clone();
        while let Some(g) = stack.pop() {
            if g == *f {
                out.insert(f.clone());
                break;
            }
            if seen.insert(g.clone()) {
                if let Some(next) = calls.get(&g) {
                    stack.extend(next.iter().cloned());
                }
            }
        }
    }
    out
}

struct Simplifier<'a> {
    defs: &'a Defs,
    recursive: BTreeSet<Name>,
    inline_depth: usize,
    fuel: usize,
    visits: usize,
    exhausted: bool,
    unfolding: Vec<Name>,
}

fn is_literal(e: &Expr) -> bool {
    matches!(e, Expr::Int(_)) || matches!(e, Expr::Con(_, a) if a.is_empty())
}

fn bool_alts(alts: &[Alt]) -> bool {
    alts.iter().all(|a| a.vars.is_empty() && (a.con == TRUE || a.con == FALSE))
}

fn select(alts: &[Alt], con: &str, args: &[Expr]) -> Option<Expr> {
    let alt = alts.iter().find(|a| a.con == con && a.vars.len() == args.len())?;
    let pairs: Vec<(Name, Expr)> = alt.vars.iter().cloned().zip(args.iter().cloned()).collect();
    Some(substitute_many(&alt.body, &pairs))
}

/// Renames the variables of `alt` that occur in `avoid`.
fn freshen_alt(alt: &Alt, avoid: &BTreeSet<Name>) -> Alt {
    if !alt.vars.iter().any(|v| avoid.contains(v)) {
        return alt.clone();
    }
    let mut taken = avoid.clone();
    taken.extend(free_var_set(&alt.body));
    taken.extend(alt.vars.iter().cloned());
    let mut vars = Vec::new();
    let mut body = alt.body.clone();
    for v in &alt.vars {
        if avoid.contains(v) {
            let n = fresh_name(v, &taken, false);
            taken.insert(n.clone());
            body = substitute(&body, v, &Expr::var(n.clone()));
            vars.push(n);
        } else {
            vars.push(v.clone());
        }
    }
    Alt { con: alt.con.clone(), vars, body }
}

impl<'a> Simplifier<'a> {
    fn new(defs: &'a Defs, cfg: &SimplifyConfig) -> Self {
        Simplifier {
            defs,
            recursive: recursive_functions(defs),
            inline_depth: cfg.inline_depth,
            fuel: cfg.fuel,
            visits: 0,
            exhausted: false,
            unfolding: Vec::new(),
        }
    }

    fn tick(&mut self) -> bool {
        if self.fuel == 0 {
            self.exhausted = true;
            false
        } else {
            self.fuel -= 1;
            true
        }
    }

    fn simp(&mut self, e: &Expr, pc: &PathCondition) -> Expr {
        self.visits += 1;
        if self.visits > VISIT_CAP {
            self.exhausted = true;
            return e.clone();
        }
        match e {
            Expr::Var(_) => match pc.shape_of(e) {
                Some((k, args)) if args.is_empty() => Expr::Con(k.clone(), vec![]),
                _ => e.clone(),
            },
            Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) => e.clone(),
            Expr::Lam(x, b) => Expr::lam(x.clone(), self.simp(b, &pc.forget(std::slice::from_ref(x)))),
            Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|a| self.simp(a, pc)).collect()),
            Expr::Prim(op, args) => {
                let args: Vec<Expr> = args.iter().map(|a| self.simp(a, pc)).collect();
                self.prim(*op, args, pc)
            }
            Expr::App(..) => {
                let (head, args) = e.spine();
                let head = self.simp(head, pc);
                let args: Vec<Expr> = args.into_iter().map(|a| self.simp(a, pc)).collect();
                self.apply(head, args, pc)
            }
            Expr::Case(s, alts) => {
                let s = self.simp(s, pc);
                self.case_on(s, alts, pc)
            }
            _ => {
                let kids = e.children().into_iter().map(|c| self.simp(c, pc)).collect();
                crate::transform::with_children(e, kids)
            }
        }
    }

    fn apply(&mut self, head: Expr, mut args: Vec<Expr>, pc: &PathCondition) -> Expr {
        if args.is_empty() {
            return head;
        }
        match head {
            Expr::Exc(_) if self.tick() => head,
            Expr::Lam(x, body) if self.tick() => {
                let arg = args.remove(0);
                let r = self.simp(&substitute(&body, &x, &arg), pc);
                self.apply(r, args, pc)
            }
            Expr::Case(s, alts) if self.tick() => {
                let mut avoid = BTreeSet::new();
                for a in &args {
                    avoid.extend(free_var_set(a));
                }
                let alts: Vec<Alt> = alts
                    .iter()
                    .map(|a| {
                        let a = freshen_alt(a, &avoid);
                        Alt { body: Expr::apps(a.body, args.iter().cloned()), ..a }
                    })
                    .collect();
                self.case_on(*s, &alts, pc)
            }
            Expr::Fun(f) => match self.try_inline(&f, &args, pc) {
                Some(r) => r,
                None => Expr::apps(Expr::Fun(f), args),
            },
            other => Expr::apps(other, args),
        }
    }

    fn try_inline(&mut self, f: &Name, args: &[Expr], pc: &PathCondition) -> Option<Expr> {
        let body = self.defs.get(f)?.clone();
        let depth = self.unfolding.iter().filter(|g| *g == f).count();
        if self.recursive.contains(f) {
            if depth >= self.inline_depth || !self.productive(&body, args, pc) {
                return None;
            }
        }
        if !self.tick() {
            return None;
        }
        self.unfolding.push(f.clone());
        let r = self.apply(body, args.to_vec(), pc);
        self.unfolding.pop();
        Some(r)
    }

    /// Whether unfolding `body args` resolves its top-level case.
    fn productive(&mut self, body: &Expr, args: &[Expr], pc: &PathCondition) -> bool {
        let mut e = body.clone();
        for a in args {
            match e {
                Expr::Lam(x, b) => e = substitute(&b, &x, a),
                _ => break,
            }
        }
        let Expr::Case(s, alts) = e else { return false };
        if matches!(&*s, Expr::Lam(..)) {
            return false;
        }
        let saved = (self.fuel, self.exhausted);
        let s = self.simp(&s, pc);
        (self.fuel, self.exhausted) = saved;
        match &s {
            Expr::Con(..) | Expr::Exc(_) => true,
            _ if pc.shape_of(&s).is_some() => true,
            _ if bool_alts(&alts) => {
                arith_decide(&s, pc).is_some() && strict_atoms(&s).iter().all(|a| pc.is_forced(a))
            }
            _ => false,
        }
    }

    fn case_on(&mut self, s: Expr, alts: &[Alt], pc: &PathCondition) -> Expr {
        match s {
            Expr::Exc(_) if self.tick() => return s,
            Expr::Con(ref k, ref args) => {
                if let Some(body) = select(alts, k, args) {
                    if self.tick() {
                        return self.simp(&body, pc);
                    }
                }
                return self.alts_under(s.clone(), alts, pc);
            }
            Expr::Case(inner_s, inner_alts) if self.tick() => {
                let mut avoid = BTreeSet::new();
                for a in alts {
                    let mut fv = free_var_set(&a.body);
                    for v in &a.vars {
                        fv.remove(v);
                    }
                    avoid.extend(fv);
                }
                let pushed: Vec<Alt> = inner_alts
                    .iter()
                    .map(|ia| {
                        let ia = freshen_alt(ia, &avoid);
                        Alt { body: Expr::case(ia.body, alts.to_vec()), ..ia }
                    })
                    .collect();
                return self.case_on(*inner_s, &pushed, pc);
            }
            _ => {}
        }
        if let Some((k, args)) = pc.shape_of(&s) {
            let (k, args) = (k.clone(), args.to_vec());
            if let Some(body) = select(alts, &k, &args) {
                if self.tick() {
                    return self.simp(&body, pc);
                }
            }
        }
        if bool_alts(alts) && !matches!(s, Expr::Lam(..)) {
            if let Some(b) = arith_decide(&s, pc) {
                let forced = pc.fact(&s).is_some() || strict_atoms(&s).iter().all(|a| pc.is_forced(a));
                let live = if b { TRUE } else { FALSE };
                if forced {
                    if let Some(alt) = alts.iter().find(|a| a.con == live) {
                        if self.tick() {
                            return self.simp(&alt.body, pc);
                        }
                    }
                } else if alts.iter().any(|a| a.con != live && a.body != Expr::unr()) && self.tick() {
                    let pruned: Vec<Alt> = alts
                        .iter()
                        .map(|a| if a.con == live { a.clone() } else { Alt { body: Expr::unr(), ..a.clone() } })
                        .collect();
                    return self.alts_under(s, &pruned, pc);
                }
            }
        }
        self.alts_under(s, alts, pc)
    }

    /// Keeps the case, simplifying each alternative under what its pattern
    /// reveals about the scrutinee.
    fn alts_under(&mut self, s: Expr, alts: &[Alt], pc: &PathCondition) -> Expr {
        let fv = free_var_set(&s);
        let alts = alts
            .iter()
            .map(|a| {
                let a = freshen_alt(a, &fv);
                let mut inner = pc.forget(&a.vars);
                if !matches!(s, Expr::Con(..) | Expr::Lam(..)) {
                    inner.force(&s);
                    if a.con == TRUE || a.con == FALSE {
                        inner.assume(s.clone(), a.con == TRUE);
                    }
                    inner.assume_shape(s.clone(), a.con.clone(), a.vars.iter().cloned().map(Expr::var).collect());
                }
                let body = if a.body.is_exc() { a.body.clone() } else { self.simp(&a.body, &inner) };
                Alt { body, ..a }
            })
            .collect();
        Expr::case(s, alts)
    }

    fn prim(&mut self, op: PrimOp, args: Vec<Expr>, pc: &PathCondition) -> Expr {
        for a in &args {
            match a {
                Expr::Exc(_) if self.tick() => return a.clone(),
                _ if is_literal(a) => {}
                _ => break,
            }
        }
        if args.iter().all(is_literal) {
            if let Ok(v) = delta(op, &args) {
                if self.tick() {
                    return v;
                }
            }
        }
        let e = Expr::Prim(op, args);
        if op.is_comparison() || op.is_logic() {
            if let Some(b) = arith_decide(&e, pc) {
                if strict_atoms(&e).iter().all(|a| pc.is_forced(a)) && self.tick() {
                    return Expr::bool(b);
                }
            }
        }
        e
    }
}
