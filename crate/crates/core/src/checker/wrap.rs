//! Contract wrapping: `e ▷ c` (ensure) and `e ◁ c` (assume).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::contracts::Contract;
use crate::syntax::{free_var_set, fresh_name, tuple_con, Alt, Expr, Name, FALSE, TRUE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WrapError {
    #[error("STM contract `{0}` must be transformed before wrapping")]
    Stm(String),
}

/// `e ▷ c`: crashes with BAD when `e` breaks `c`, diverges (UNR) when the
/// context breaks it.
pub fn wrap_ensure(e: &Expr, c: &Contract) -> Result<Expr, WrapError> {
    wrap(e, c, true)
}

/// `e ◁ c`: the dual of [`wrap_ensure`] with BAD and UNR swapped.
pub fn wrap_assume(e: &Expr, c: &Contract) -> Result<Expr, WrapError> {
    wrap(e, c, false)
}

fn exc(blame: bool) -> Expr {
    if blame {
        Expr::bad()
    } else {
        Expr::unr()
    }
}

fn guard(test: Expr, ok: Expr, fail: Expr) -> Expr {
    Expr::case(test, vec![Alt::new(TRUE, vec![], ok), Alt::new(FALSE, vec![], fail)])
}

fn avoid(e: &Expr, c: &Contract) -> BTreeSet<Name> {
    let mut s = free_var_set(e);
    s.extend(c.free_vars());
    s
}

fn wrap(e: &Expr, c: &Contract, ensure: bool) -> Result<Expr, WrapError> {
    match c {
        Contract::Any => Ok(e.clone()),
        Contract::Pred(b, p) => Ok(guard(Contract::pred_instance(b, p, e), e.clone(), exc(ensure))),
        Contract::DepFun(b, c1, c2) => {
            // Reuse the lambda's own binder when it cannot capture anything
            // in the contract, so `λx.e ▷ {x|p} -> c` stays readable.
            let (v, applied) = match e {
                Expr::Lam(x, body) if !c.free_vars().contains(x) => (x.clone(), (**body).clone()),
                _ => {
                    let v = fresh_name("v", &avoid(e, c), true);
                    (v.clone(), Expr::app(e.clone(), Expr::var(v)))
                }
            };
            let x = Expr::var(v.clone());
            let body = match &**c1 {
                Contract::Pred(b1, p1) => {
                    let inner = wrap(&applied, &c2.instantiate(b, &x), ensure)?;
                    guard(Contract::pred_instance(b1, p1, &x), inner, exc(!ensure))
                }
                _ => {
                    let arg = wrap(&x, c1, !ensure)?;
                    let call = match e {
                        Expr::Lam(y, body) if *y == v => crate::syntax::substitute(body, &v, &arg),
                        _ => Expr::app(e.clone(), arg.clone()),
                    };
                    wrap(&call, &c2.instantiate(b, &arg), ensure)?
                }
            };
            Ok(Expr::lam(v, body))
        }
        Contract::Tuple(cs) => {
            if cs.len() == 1 {
                return wrap(e, &cs[0], ensure);
            }
            let mut taken = avoid(e, c);
            let names: Vec<Name> = (0..cs.len())
                .map(|i| {
                    let n = fresh_name(&format!("r{}", i + 1), &taken, true);
                    taken.insert(n.clone());
                    n
                })
                .collect();
            let parts = names
                .iter()
                .zip(cs)
                .map(|(n, ci)| wrap(&Expr::var(n.clone()), ci, ensure))
                .collect::<Result<Vec<_>, _>>()?;
            let k = if cs.is_empty() { crate::syntax::UNIT.to_string() } else { tuple_con(cs.len()) };
            Ok(Expr::case(e.clone(), vec![Alt::new(k.clone(), names, Expr::Con(k, parts))]))
        }
        Contract::StmOp(..) => Err(WrapError::Stm(c.to_string())),
    }
}
