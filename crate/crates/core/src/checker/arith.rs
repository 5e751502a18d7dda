//! Linear integer arithmetic over symbolic atoms, with propositional
//! structure, used to discharge case scrutinees under a path condition.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{free_var_set, Expr, Name, PrimOp, FALSE, TRUE};

/// Facts known on the current branch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathCondition {
    /// Scrutinees known to match a constructor, with the pattern variables.
    pub shapes: Vec<(Expr, Name, Vec<Expr>)>,
    /// Boolean expressions known to evaluate to the given value.
    pub facts: Vec<(Expr, bool)>,
    /// Expressions known to have been evaluated without crashing.
    pub forced: Vec<Expr>,
}

impl PathCondition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shape_of(&self, e: &Expr) -> Option<(&Name, &[Expr])> {
        self.shapes.iter().rev().find(|(s, _, _)| s == e).map(|(_, k, args)| (k, args.as_slice()))
    }

    pub fn fact(&self, e: &Expr) -> Option<bool> {
        self.facts.iter().rev().find(|(f, _)| f == e).map(|(_, b)| *b).or_else(|| match self.shape_of(e) {
            Some((k, _)) if k == TRUE => Some(true),
            Some((k, _)) if k == FALSE => Some(false),
            _ => None,
        })
    }

    pub fn is_forced(&self, e: &Expr) -> bool {
        matches!(e, Expr::Int(_))
            || matches!(e, Expr::Con(_, args) if args.is_empty())
            || self.forced.contains(e)
            || self.shape_of(e).is_some()
    }

    pub fn assume_shape(&mut self, scrut: Expr, con: Name, args: Vec<Expr>) {
        self.shapes.push((scrut, con, args));
    }

    pub fn assume(&mut self, e: Expr, value: bool) {
        if !self.facts.contains(&(e.clone(), value)) {
            self.facts.push((e, value));
        }
    }

    /// Records that `e` was evaluated, along with its strict sub-terms.
    pub fn force(&mut self, e: &Expr) {
        for a in strict_atoms(e) {
            if !self.forced.contains(&a) {
                self.forced.push(a);
            }
        }
        if !self.forced.contains(e) {
            self.forced.push(e.clone());
        }
    }

    /// Drops everything mentioning one of `names` (they are being rebound).
    pub fn forget(&self, names: &[Name]) -> PathCondition {
        if names.is_empty() {
            return self.clone();
        }
        let mentions = |e: &Expr| {
            let fv = free_var_set(e);
            names.iter().any(|n| fv.contains(n))
        };
        PathCondition {
            shapes: self
                .shapes
                .iter()
                .filter(|(s, _, args)| !mentions(s) && !args.iter().any(&mentions))
                .cloned()
                .collect(),
            facts: self.facts.iter().filter(|(f, _)| !mentions(f)).cloned().collect(),
            forced: self.forced.iter().filter(|f| !mentions(f)).cloned().collect(),
        }
    }

    /// The path condition as one boolean formula.
    fn formula(&self, atoms: &mut Atoms) -> Formula {
        let mut parts = Vec::new();
        for (f, b) in &self.facts {
            let g = to_formula(f, atoms);
            parts.push(if *b { g } else { Formula::Not(Box::new(g)) });
        }
        for (s, k, _) in &self.shapes {
            if k == TRUE || k == FALSE {
                let g = to_formula(s, atoms);
                parts.push(if k == TRUE { g } else { Formula::Not(Box::new(g)) });
            }
        }
        Formula::And(parts)
    }
}

impl fmt::Display for PathCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (s, k, args) in &self.shapes {
            let pat = if args.is_empty() {
                k.clone()
            } else {
                Expr::Con(k.clone(), args.clone()).to_string()
            };
            parts.push(format!("{s} = {pat}"));
        }
        for (e, b) in &self.facts {
            parts.push(if *b { e.to_string() } else { format!("not ({e})") });
        }
        f.write_str(&parts.join(", "))
    }
}

/// Leaves of the arithmetic/logic tree of `e` (those evaluated when `e` is).
pub fn strict_atoms(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    fn go(e: &Expr, out: &mut Vec<Expr>) {
        match e {
            Expr::Prim(_, args) => args.iter().for_each(|a| go(a, out)),
            Expr::Int(_) => {}
            Expr::Con(_, args) if args.is_empty() => {}
            _ => {
                if !out.contains(e) {
                    out.push(e.clone())
                }
            }
        }
    }
    go(e, &mut out);
    out
}

/// Decides `goal` under `pc`: `Some(true)` if it holds in every integer
/// model of `pc`, `Some(false)` if it holds in none, `None` otherwise.
pub fn arith_decide(goal: &Expr, pc: &PathCondition) -> Option<bool> {
    if let Some(b) = pc.fact(goal) {
        return Some(b);
    }
    let mut atoms = Atoms::default();
    let g = to_formula(goal, &mut atoms);
    let hyp = pc.formula(&mut atoms);
    if unsat(&Formula::And(vec![hyp.clone(), Formula::Not(Box::new(g.clone()))])) {
        return Some(true);
    }
    if unsat(&Formula::And(vec![hyp, g])) {
        return Some(false);
    }
    None
}

#[derive(Default)]
struct Atoms {
    table: Vec<Expr>,
}

impl Atoms {
    fn id(&mut self, e: &Expr) -> usize {
        match self.table.iter().position(|x| x == e) {
            Some(i) => i,
            None => {
                self.table.push(e.clone());
                self.table.len() - 1
            }
        }
    }
}

/// `Σ coeffs·atom + constant`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Lin {
    coeffs: BTreeMap<usize, i128>,
    constant: i128,
}

impl Lin {
    fn constant(c: i128) -> Lin {
        Lin { coeffs: BTreeMap::new(), constant: c }
    }

    fn atom(id: usize) -> Lin {
        Lin { coeffs: [(id, 1)].into_iter().collect(), constant: 0 }
    }

    fn scale(&self, k: i128) -> Option<Lin> {
        let mut out = Lin::constant(self.constant.checked_mul(k)?);
        for (v, c) in &self.coeffs {
            let c = c.checked_mul(k)?;
            if c != 0 {
                out.coeffs.insert(*v, c);
            }
        }
        Some(out)
    }

    fn add(&self, other: &Lin) -> Option<Lin> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(other.constant)?;
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(*v).or_insert(0);
            *e = e.checked_add(*c)?;
            if *e == 0 {
                out.coeffs.remove(v);
            }
        }
        Some(out)
    }

    fn sub(&self, other: &Lin) -> Option<Lin> {
        self.add(&other.scale(-1)?)
    }

    fn offset(&self, k: i128) -> Option<Lin> {
        self.add(&Lin::constant(k))
    }
}

#[derive(Clone, Debug)]
enum Formula {
    Lit(bool),
    Prop(usize),
    /// `lin >= 0`
    Ge(Lin),
    /// `lin == 0`
    Eq(Lin),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

fn linearize(e: &Expr, atoms: &mut Atoms) -> Option<Lin> {
    match e {
        Expr::Int(n) => Some(Lin::constant(*n as i128)),
        Expr::Prim(PrimOp::Add, args) => linearize(&args[0], atoms)?.add(&linearize(&args[1], atoms)?),
        Expr::Prim(PrimOp::Sub, args) => linearize(&args[0], atoms)?.sub(&linearize(&args[1], atoms)?),
        Expr::Prim(PrimOp::Mul, args) => {
            let a = linearize(&args[0], atoms)?;
            let b = linearize(&args[1], atoms)?;
            if a.coeffs.is_empty() {
                b.scale(a.constant)
            } else if b.coeffs.is_empty() {
                a.scale(b.constant)
            } else {
                Some(Lin::atom(atoms.id(e)))
            }
        }
        _ => Some(Lin::atom(atoms.id(e))),
    }
}

fn to_formula(e: &Expr, atoms: &mut Atoms) -> Formula {
    let cmp = |a: &Expr, b: &Expr, atoms: &mut Atoms, k: i128, eq: bool| -> Option<Formula> {
        let d = linearize(a, atoms)?.sub(&linearize(b, atoms)?)?.offset(k)?;
        Some(if eq { Formula::Eq(d) } else { Formula::Ge(d) })
    };
    let r = match e {
        Expr::Con(k, args) if args.is_empty() && k == TRUE => Some(Formula::Lit(true)),
        Expr::Con(k, args) if args.is_empty() && k == FALSE => Some(Formula::Lit(false)),
        Expr::Prim(PrimOp::And, a) => Some(Formula::And(vec![to_formula(&a[0], atoms), to_formula(&a[1], atoms)])),
        Expr::Prim(PrimOp::Or, a) => Some(Formula::Or(vec![to_formula(&a[0], atoms), to_formula(&a[1], atoms)])),
        Expr::Prim(PrimOp::Not, a) => Some(Formula::Not(Box::new(to_formula(&a[0], atoms)))),
        Expr::Prim(PrimOp::Gt, a) => cmp(&a[0], &a[1], atoms, -1, false),
        Expr::Prim(PrimOp::Ge, a) => cmp(&a[0], &a[1], atoms, 0, false),
        Expr::Prim(PrimOp::Lt, a) => cmp(&a[1], &a[0], atoms, -1, false),
        Expr::Prim(PrimOp::Le, a) => cmp(&a[1], &a[0], atoms, 0, false),
        Expr::Prim(PrimOp::Eq, a) => {
            let lit = |x: &Expr| match x {
                Expr::Con(k, args) if args.is_empty() && (k == TRUE || k == FALSE) => Some(k == TRUE),
                _ => None,
            };
            match (lit(&a[0]), lit(&a[1])) {
                (_, Some(b)) => Some(polarity(to_formula(&a[0], atoms), b)),
                (Some(b), _) => Some(polarity(to_formula(&a[1], atoms), b)),
                _ => cmp(&a[0], &a[1], atoms, 0, true),
            }
        }
        _ => None,
    };
    r.unwrap_or_else(|| Formula::Prop(atoms.id(e)))
}

fn polarity(f: Formula, b: bool) -> Formula {
    if b {
        f
    } else {
        Formula::Not(Box::new(f))
    }
}

/// Literal of a conjunction in disjunctive normal form.
#[derive(Clone, Debug)]
enum Literal {
    Prop(usize, bool),
    Ge(Lin),
    Eq(Lin),
}

const DNF_CAP: usize = 256;

/// Negation normal form pushed straight into DNF. `None` when the DNF cap
/// is exceeded or arithmetic overflows.
fn dnf(f: &Formula, positive: bool) -> Option<Vec<Vec<Literal>>> {
    match (f, positive) {
        (Formula::Lit(b), p) => Some(if *b == p { vec![vec![]] } else { vec![] }),
        (Formula::Prop(i), p) => Some(vec![vec![Literal::Prop(*i, p)]]),
        (Formula::Ge(l), true) => Some(vec![vec![Literal::Ge(l.clone())]]),
        // not (l >= 0)  <=>  -l - 1 >= 0
        (Formula::Ge(l), false) => Some(vec![vec![Literal::Ge(l.scale(-1)?.offset(-1)?)]]),
        (Formula::Eq(l), true) => Some(vec![vec![Literal::Eq(l.clone())]]),
        (Formula::Eq(l), false) => Some(vec![
            vec![Literal::Ge(l.offset(-1)?)],
            vec![Literal::Ge(l.scale(-1)?.offset(-1)?)],
        ]),
        (Formula::Not(g), p) => dnf(g, !p),
        (Formula::And(fs), true) | (Formula::Or(fs), false) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for g in fs {
                let d = dnf(g, positive)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                if next.len() > DNF_CAP {
                    return None;
                }
                acc = next;
            }
            Some(acc)
        }
        (Formula::Or(fs), true) | (Formula::And(fs), false) => {
            let mut acc = Vec::new();
            for g in fs {
                acc.extend(dnf(g, positive)?);
                if acc.len() > DNF_CAP {
                    return None;
                }
            }
            Some(acc)
        }
    }
}

/// True only when `f` has no integer model.
fn unsat(f: &Formula) -> bool {
    match dnf(f, true) {
        Some(disjuncts) => disjuncts.iter().all(|c| conjunct_unsat(c)),
        None => false,
    }
}

fn conjunct_unsat(lits: &[Literal]) -> bool {
    let mut props: BTreeMap<usize, bool> = BTreeMap::new();
    let mut ges = Vec::new();
    let mut eqs = Vec::new();
    for l in lits {
        match l {
            Literal::Prop(i, b) => {
                if props.insert(*i, *b).is_some_and(|old| old != *b) {
                    return true;
                }
            }
            Literal::Ge(l) => ges.push(l.clone()),
            Literal::Eq(l) => eqs.push(l.clone()),
        }
    }
    // Eliminate equalities through a unit coefficient where possible.
    while let Some(eq) = eqs.pop() {
        let unit = eq.coeffs.iter().find(|(_, c)| c.abs() == 1).map(|(v, c)| (*v, *c));
        match unit {
            None if eq.coeffs.is_empty() => {
                if eq.constant != 0 {
                    return true;
                }
            }
            None => {
                let g = eq.coeffs.values().fold(0i128, |g, c| gcd(g, *c));
                if eq.constant % g != 0 {
                    return true;
                }
                ges.push(eq.clone());
                match eq.scale(-1) {
                    Some(n) => ges.push(n),
                    None => return false,
                }
            }
            Some((v, c)) => {
                // v = -(rest)/c
                let mut rest = eq.clone();
                rest.coeffs.remove(&v);
                let Some(def) = rest.scale(-c) else { return false };
                let subst = |l: &Lin| -> Option<Lin> {
                    match l.coeffs.get(&v) {
                        None => Some(l.clone()),
                        Some(k) => {
                            let mut base = l.clone();
                            base.coeffs.remove(&v);
                            base.add(&def.scale(*k)?)
                        }
                    }
                };
                let mut next_eqs = Vec::new();
                for e in &eqs {
                    match subst(e) {
                        Some(x) => next_eqs.push(x),
                        None => return false,
                    }
                }
                let mut next_ges = Vec::new();
                for g in &ges {
                    match subst(g) {
                        Some(x) => next_ges.push(x),
                        None => return false,
                    }
                }
                eqs = next_eqs;
                ges = next_ges;
            }
        }
    }
    fourier_motzkin(ges)
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

const FM_CAP: usize = 400;

/// Unsatisfiability of `{l >= 0}` over the integers via Fourier–Motzkin
/// with gcd tightening. `false` means satisfiable or undecided.
fn fourier_motzkin(mut cs: Vec<Lin>) -> bool {
    loop {
        let mut next = Vec::with_capacity(cs.len());
        for mut c in cs {
            if c.coeffs.is_empty() {
                if c.constant < 0 {
                    return true;
                }
                continue;
            }
            let g = c.coeffs.values().fold(0i128, |g, k| gcd(g, *k));
            if g > 1 {
                for k in c.coeffs.values_mut() {
                    *k /= g;
                }
                c.constant = c.constant.div_euclid(g);
            }
            next.push(c);
        }
        next.sort();
        next.dedup();
        cs = next;
        if cs.is_empty() {
            return false;
        }
        if cs.len() > FM_CAP {
            return false;
        }
        let vars: Vec<usize> = {
            let mut v: Vec<usize> = cs.iter().flat_map(|c| c.coeffs.keys().copied()).collect();
            v.sort();
            v.dedup();
            v
        };
        let cost = |v: usize| {
            let pos = cs.iter().filter(|c| c.coeffs.get(&v).is_some_and(|k| *k > 0)).count();
            let neg = cs.iter().filter(|c| c.coeffs.get(&v).is_some_and(|k| *k < 0)).count();
            pos * neg
        };
        let v = *vars.iter().min_by_key(|v| cost(**v)).unwrap();
        let (with, without): (Vec<Lin>, Vec<Lin>) = cs.into_iter().partition(|c| c.coeffs.contains_key(&v));
        let (pos, neg): (Vec<Lin>, Vec<Lin>) = with.into_iter().partition(|c| c.coeffs[&v] > 0);
        let mut out = without;
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[&v];
                let b = -n.coeffs[&v];
                let combined = p.scale(b).and_then(|x| n.scale(a).and_then(|y| x.add(&y)));
                match combined {
                    Some(c) => out.push(c),
                    None => return false,
                }
            }
        }
        cs = out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Expr {
        Expr::var(x)
    }

    fn add(a: Expr, b: Expr) -> Expr {
        Expr::binop(PrimOp::Add, a, b)
    }

    #[test]
    fn successor_is_greater() {
        let goal = Expr::binop(PrimOp::Gt, add(v("x"), Expr::Int(1)), v("x"));
        assert_eq!(arith_decide(&goal, &PathCondition::new()), Some(true));
        let never = Expr::binop(PrimOp::Gt, v("x"), v("x"));
        assert_eq!(arith_decide(&never, &PathCondition::new()), Some(false));
        let open = Expr::binop(PrimOp::Gt, v("x"), Expr::Int(0));
        assert_eq!(arith_decide(&open, &PathCondition::new()), None);
    }

    #[test]
    fn uses_equalities_from_the_path() {
        let sum_tab = Expr::app(Expr::fun("sum"), v("tab"));
        let mut pc = PathCondition::new();
        pc.assume(Expr::binop(PrimOp::Eq, sum_tab.clone(), v("s")), true);
        let goal = Expr::binop(PrimOp::Eq, add(v("n"), sum_tab.clone()), add(v("s"), v("n")));
        assert_eq!(arith_decide(&goal, &pc), Some(true));
        let broken = Expr::binop(PrimOp::Eq, add(v("n"), sum_tab), v("s"));
        assert_eq!(arith_decide(&broken, &pc), None);
    }

    #[test]
    fn propositional_structure() {
        let c = v("c");
        let gt = Expr::binop(PrimOp::Gt, add(v("ct"), Expr::Int(1)), v("ct"));
        let mut pc = PathCondition::new();
        pc.assume_shape(c.clone(), TRUE.into(), vec![]);
        assert_eq!(arith_decide(&Expr::binop(PrimOp::And, c.clone(), gt), &pc), Some(true));
        assert_eq!(arith_decide(&Expr::prim(PrimOp::Not, vec![c]), &pc), Some(false));
    }

    #[test]
    fn integer_tightening() {
        // 2x == 1 has no integer solution
        let goal = Expr::binop(PrimOp::Eq, Expr::binop(PrimOp::Mul, Expr::Int(2), v("x")), Expr::Int(1));
        assert_eq!(arith_decide(&goal, &PathCondition::new()), Some(false));
        // x > 0 && x < 1
        let g = Expr::binop(
            PrimOp::And,
            Expr::binop(PrimOp::Gt, v("x"), Expr::Int(0)),
            Expr::binop(PrimOp::Lt, v("x"), Expr::Int(1)),
        );
        assert_eq!(arith_decide(&g, &PathCondition::new()), Some(false));
    }

    #[test]
    fn forget_drops_rebound_facts() {
        let mut pc = PathCondition::new();
        pc.assume(Expr::binop(PrimOp::Gt, v("x"), Expr::Int(0)), true);
        pc.force(&Expr::binop(PrimOp::Gt, v("x"), Expr::Int(0)));
        assert!(pc.is_forced(&v("x")));
        let pc2 = pc.forget(&["x".into()]);
        assert!(pc2.facts.is_empty() && !pc2.is_forced(&v("x")));
    }
}
