//! Printing of core expressions in the surface syntax accepted by the parser.

use std::fmt::{self, Write};

use super::{free_vars, tuple_arity, Alt, Expr, PrimOp, CONS, NIL, UNIT};

const TOP: u8 = 0;
const BIND: u8 = 1;
const ORELSE: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const CMP: u8 = 5;
const CONS_LVL: u8 = 6;
const ADD: u8 = 7;
const MUL: u8 = 8;
const APP: u8 = 9;
const ATOM: u8 = 10;

/// Binding strength and associativity of a binary operator as parsed.
pub(crate) fn op_level(op: PrimOp) -> (u8, Assoc) {
    match op {
        PrimOp::Or => (OR, Assoc::Right),
        PrimOp::And => (AND, Assoc::Right),
        PrimOp::Eq | PrimOp::Gt | PrimOp::Ge | PrimOp::Lt | PrimOp::Le => (CMP, Assoc::None),
        PrimOp::Add | PrimOp::Sub => (ADD, Assoc::Left),
        PrimOp::Mul => (MUL, Assoc::Left),
        PrimOp::Not => (APP, Assoc::Left),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Assoc {
    Left,
    Right,
    None,
}

/// Display adapter for [`Expr`].
pub struct PrettyExpr<'a>(pub &'a Expr);

impl fmt::Display for PrettyExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print(self.0, TOP, true, &mut s);
        f.write_str(&s)
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..) | Expr::Case(..) => TOP,
        Expr::Bind(..) => BIND,
        Expr::OrElse(..) => ORELSE,
        Expr::Prim(PrimOp::Not, _) => APP,
        Expr::Prim(op, _) => op_level(*op).0,
        Expr::Con(k, args) if k == CONS && args.len() == 2 => {
            if list_items(e).is_some() {
                ATOM
            } else {
                CONS_LVL
            }
        }
        Expr::Con(k, args) if !args.is_empty() && tuple_arity(k).is_none() => APP,
        Expr::App(..) | Expr::Read(_) | Expr::Write(..) | Expr::Return(_) => APP,
        Expr::Int(n) if *n < 0 => APP,
        _ => ATOM,
    }
}

fn list_items(e: &Expr) -> Option<Vec<&Expr>> {
    let mut items = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            Expr::Con(k, args) if k == NIL && args.is_empty() => return Some(items),
            Expr::Con(k, args) if k == CONS && args.len() == 2 => {
                items.push(&args[0]);
                cur = &args[1];
            }
            _ => return None,
        }
    }
}

/// `\p. case p of {(x1,..,xn) -> e}` with `p` not free in `e`.
fn tuple_lambda(e: &Expr) -> Option<(&Alt, &Expr)> {
    if let Expr::Lam(p, body) = e {
        if let Expr::Case(s, alts) = &**body {
            if let (Expr::Var(sv), [alt]) = (&**s, alts.as_slice()) {
                let is_tuple = tuple_arity(&alt.con).is_some() || alt.con == UNIT;
                if sv == p && is_tuple && !alt.vars.contains(p) && !free_vars(&alt.body).contains(p) {
                    return Some((alt, &alt.body));
                }
            }
        }
    }
    None
}

fn print(e: &Expr, ctx: u8, tail: bool, out: &mut String) {
    let lvl = level(e);
    let needs_parens = if lvl == TOP { ctx > TOP && !tail } else { lvl < ctx };
    if needs_parens {
        out.push('(');
        print_inner(e, true, out);
        out.push(')');
    } else {
        print_inner(e, tail, out);
    }
}

fn print_inner(e: &Expr, tail: bool, out: &mut String) {
    match e {
        Expr::Var(x) | Expr::Fun(x) => out.push_str(x),
        Expr::Int(n) if *n < 0 => {
            let _ = write!(out, "(-{})", n.unsigned_abs());
        }
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Exc(r) => {
            let _ = write!(out, "{r}");
        }
        Expr::Retry => out.push_str("retry"),
        Expr::Lam(x, body) => {
            out.push('λ');
            match tuple_lambda(e) {
                Some((alt, inner)) => {
                    out.push_str(&print_alt_pattern(alt));
                    out.push('.');
                    print(inner, TOP, true, out);
                }
                None => {
                    out.push_str(x);
                    out.push('.');
                    print(body, TOP, true, out);
                }
            }
        }
        Expr::Case(s, alts) => {
            out.push_str("case ");
            print(s, TOP, true, out);
            out.push_str(" of {");
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(&print_alt_pattern(alt));
                out.push_str(" -> ");
                print(&alt.body, TOP, true, out);
            }
            out.push('}');
        }
        Expr::Con(k, args) => {
            if let Some(items) = list_items(e) {
                out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    print(it, TOP, true, out);
                }
                out.push(']');
            } else if k == CONS && args.len() == 2 {
                print(&args[0], CONS_LVL + 1, false, out);
                out.push(':');
                print(&args[1], CONS_LVL, tail, out);
            } else if tuple_arity(k).is_some() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    print(a, TOP, true, out);
                }
                out.push(')');
            } else {
                out.push_str(k);
                for a in args {
                    out.push(' ');
                    print(a, ATOM, false, out);
                }
            }
        }
        Expr::App(f, a) => {
            print(f, APP, false, out);
            out.push(' ');
            print(a, ATOM, false, out);
        }
        Expr::Prim(PrimOp::Not, args) => {
            out.push_str("not ");
            print(&args[0], ATOM, false, out);
        }
        Expr::Prim(op, args) => {
            let (lvl, assoc) = op_level(*op);
            let (lctx, rctx) = match assoc {
                Assoc::Left => (lvl, lvl + 1),
                Assoc::Right => (lvl + 1, lvl),
                Assoc::None => (lvl + 1, lvl + 1),
            };
            print(&args[0], lctx, false, out);
            if matches!(op, PrimOp::Add | PrimOp::Sub | PrimOp::Mul) {
                out.push_str(op.symbol());
            } else {
                let _ = write!(out, " {} ", op.symbol());
            }
            print(&args[1], rctx, tail, out);
        }
        Expr::Read(t) => {
            out.push_str("readTVar ");
            out.push_str(t);
        }
        Expr::Write(t, p) => {
            let _ = write!(out, "writeTVar {t} ");
            print(p, ATOM, false, out);
        }
        Expr::Return(p) => {
            out.push_str("return ");
            print(p, ATOM, false, out);
        }
        Expr::Bind(l, r) => {
            print(l, BIND, false, out);
            out.push_str(" >>= ");
            print(r, BIND + 1, tail, out);
        }
        Expr::OrElse(l, r) => {
            print(l, ORELSE, false, out);
            out.push_str(" `orElse` ");
            print(r, ORELSE + 1, tail, out);
        }
    }
}

/// Pattern of a case alternative, e.g. `(l:ls)`, `(a,b)` or `K x y`.
pub fn print_alt_pattern(alt: &Alt) -> String {
    if alt.con == CONS && alt.vars.len() == 2 {
        format!("({}:{})", alt.vars[0], alt.vars[1])
    } else if tuple_arity(&alt.con).is_some() {
        format!("({})", alt.vars.join(","))
    } else if alt.vars.is_empty() {
        alt.con.clone()
    } else {
        format!("{} {}", alt.con, alt.vars.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::tuple_con;

    #[test]
    fn prints_transformed_transaction_compactly() {
        let body = Expr::tuple(vec![
            Expr::unit(),
            Expr::tuple(vec![
                Expr::cons(Expr::var("n"), Expr::var("shTab")),
                Expr::binop(PrimOp::Add, Expr::var("shSum"), Expr::var("n")),
            ]),
        ]);
        let e = Expr::lam(
            "n",
            Expr::lam(
                "s",
                Expr::case(Expr::var("s"), vec![Alt::new(tuple_con(2), vec!["shTab".into(), "shSum".into()], body)]),
            ),
        );
        assert_eq!(e.to_string(), "λn.λ(shTab,shSum).((),(n:shTab,shSum+n))");
    }

    #[test]
    fn operator_precedence_and_parens() {
        let e = Expr::binop(
            PrimOp::Mul,
            Expr::binop(PrimOp::Add, Expr::var("a"), Expr::Int(1)),
            Expr::binop(PrimOp::Sub, Expr::var("b"), Expr::Int(-2)),
        );
        assert_eq!(e.to_string(), "(a+1)*(b-(-2))");
        let cmp = Expr::binop(PrimOp::Gt, Expr::binop(PrimOp::Add, Expr::var("x"), Expr::Int(1)), Expr::var("x"));
        assert_eq!(cmp.to_string(), "x+1 > x");
    }

    #[test]
    fn bind_with_trailing_lambda() {
        let e = Expr::bind(Expr::read("t"), Expr::lam("x", Expr::write("t", Expr::binop(PrimOp::Add, Expr::var("x"), Expr::Int(1)))));
        assert_eq!(e.to_string(), "readTVar t >>= λx.writeTVar t (x+1)");
    }

    #[test]
    fn lists_and_cases() {
        let e = Expr::case(
            Expr::list([Expr::Int(1), Expr::Int(2)]),
            vec![
                Alt::new(NIL, vec![], Expr::Int(0)),
                Alt::new(CONS, vec!["l".into(), "ls".into()], Expr::var("l")),
            ],
        );
        assert_eq!(e.to_string(), "case [1,2] of {[] -> 0; (l:ls) -> l}");
    }
}
