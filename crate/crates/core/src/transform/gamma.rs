use super::TransformError;
use crate::syntax::{Alt, Expr};

/// Rebuilds `e` with new children, given in [`Expr::children`] order.
pub fn with_children(e: &Expr, kids: Vec<Expr>) -> Expr {
    let mut it = kids.into_iter();
    let mut next = || it.next().expect("child count");
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Exc(_) | Expr::Fun(_) | Expr::Read(_) | Expr::Retry => e.clone(),
        Expr::Con(k, args) => Expr::Con(k.clone(), args.iter().map(|_| next()).collect()),
        Expr::Prim(op, args) => Expr::Prim(*op, args.iter().map(|_| next()).collect()),
        Expr::Lam(x, _) => Expr::lam(x.clone(), next()),
        Expr::Write(t, _) => Expr::write(t.clone(), next()),
        Expr::Return(_) => Expr::ret(next()),
        Expr::App(..) => {
            let f = next();
            Expr::app(f, next())
        }
        Expr::Bind(..) => {
            let l = next();
            Expr::bind(l, next())
        }
        Expr::OrElse(..) => {
            let l = next();
            Expr::or_else(l, next())
        }
        Expr::Case(_, alts) => {
            let s = next();
            let alts = alts.iter().map(|a| Alt { con: a.con.clone(), vars: a.vars.clone(), body: next() }).collect();
            Expr::case(s, alts)
        }
    }
}

/// All orElse-free variants of `e`: each `orElse` contributes its two
/// alternatives and every other form distributes over its children.
/// Structurally equal variants are merged.
pub fn gamma_expand(e: &Expr, cap: usize) -> Result<Vec<Expr>, TransformError> {
    if !e.any(&mut |n| matches!(n, Expr::OrElse(..))) {
        return Ok(vec![e.clone()]);
    }
    let out = match e {
        Expr::OrElse(l, r) => {
            let mut v = gamma_expand(l, cap)?;
            for x in gamma_expand(r, cap)? {
                push_new(&mut v, x);
            }
            v
        }
        _ => {
            let mut combos: Vec<Vec<Expr>> = vec![vec![]];
            for c in e.children() {
                let vs = gamma_expand(c, cap)?;
                let mut next = Vec::with_capacity(combos.len() * vs.len());
                for prefix in &combos {
                    for v in &vs {
                        let mut p = prefix.clone();
                        p.push(v.clone());
                        next.push(p);
                    }
                }
                if next.len() > cap {
                    return Err(TransformError::GammaCap { count: next.len(), cap });
                }
                combos = next;
            }
            let mut v = Vec::new();
            for kids in combos {
                push_new(&mut v, with_children(e, kids));
            }
            v
        }
    };
    if out.len() > cap {
        return Err(TransformError::GammaCap { count: out.len(), cap });
    }
    Ok(out)
}

fn push_new(v: &mut Vec<Expr>, x: Expr) {
    if !v.contains(&x) {
        v.push(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn or_else_splits() {
        let e = Expr::or_else(Expr::read("a"), Expr::read("b"));
        assert_eq!(gamma_expand(&e, 64).unwrap(), vec![Expr::read("a"), Expr::read("b")]);
        assert_eq!(gamma_expand(&Expr::read("t"), 64).unwrap(), vec![Expr::read("t")]);
    }

    #[test]
    fn bind_distributes() {
        let k = Expr::lam("x", Expr::ret(Expr::var("x")));
        let e = Expr::bind(Expr::or_else(Expr::read("a"), Expr::read("b")), k.clone());
        let v = gamma_expand(&e, 64).unwrap();
        assert_eq!(v, vec![Expr::bind(Expr::read("a"), k.clone()), Expr::bind(Expr::read("b"), k)]);
    }

    #[test]
    fn cap_is_enforced() {
        let alt = || Expr::or_else(Expr::read("a"), Expr::read("b"));
        let mut e = alt();
        for _ in 0..6 {
            e = Expr::bind(e, Expr::lam("_", alt()));
        }
        assert_eq!(gamma_expand(&e, 1000).unwrap().len(), 128);
        assert!(matches!(gamma_expand(&e, 64), Err(TransformError::GammaCap { .. })));
    }
}
