//! Bounded, type-directed value spaces used to quantify over contract
//! inhabitants.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Contract, Oracle, SatVerdict};
use crate::syntax::{DataDecls, Expr, Name};
use crate::typecheck::Type;

/// Small integers in the order they are tried.
pub const INT_SAMPLES: [i64; 7] = [1, 0, -1, 2, -2, 3, -3];
const MAX_LIST_LEN: u32 = 3;
const DATA_DEPTH: usize = 2;

/// A finite, indexable set of closed values of one type.
#[derive(Clone, Debug)]
pub struct Space {
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Consts(Vec<Expr>),
    List(Box<Space>),
    Tuple(Vec<Space>),
    /// Constructors with the spaces of their fields.
    Sum(Vec<(Name, Vec<Space>)>),
    /// Constant functions over the result space, plus the identity.
    Funs { results: Box<Space>, identity: bool },
}

impl Space {
    pub fn for_type(ty: &Type, data: &DataDecls) -> Space {
        Self::build(ty, data, DATA_DEPTH)
    }

    fn build(ty: &Type, data: &DataDecls, depth: usize) -> Space {
        let kind = match ty {
            Type::Int => Kind::Consts(INT_SAMPLES.iter().map(|n| Expr::Int(*n)).collect()),
            Type::Bool => Kind::Consts(vec![Expr::bool(true), Expr::bool(false)]),
            Type::Unit => Kind::Consts(vec![Expr::unit()]),
            Type::List(a) => Kind::List(Box::new(Self::build(a, data, depth))),
            Type::Tuple(ts) => Kind::Tuple(ts.iter().map(|t| Self::build(t, data, depth)).collect()),
            Type::Fun(a, b) => Kind::Funs { results: Box::new(Self::build(b, data, depth)), identity: a == b },
            Type::Data(name) => match data.datatype(name) {
                Some(sig) => Kind::Sum(
                    sig.constructors
                        .iter()
                        .filter(|(_, fields)| depth > 0 || fields.is_empty())
                        .map(|(k, fields)| {
                            let d = depth.saturating_sub(1);
                            (k.clone(), fields.iter().map(|f| Self::build(f, data, d)).collect())
                        })
                        .collect(),
                ),
                None => Kind::Consts(vec![]),
            },
            Type::Stm(_) | Type::TVarT(_) | Type::Meta(_) => Kind::Consts(vec![]),
        };
        Space { kind }
    }

    /// Number of elements (saturating).
    pub fn size(&self) -> u128 {
        match &self.kind {
            Kind::Consts(v) => v.len() as u128,
            Kind::List(elem) => {
                let m = elem.size();
                (0..=MAX_LIST_LEN).fold(0u128, |acc, k| acc.saturating_add(m.saturating_pow(k)))
            }
            Kind::Tuple(ts) => ts.iter().fold(1u128, |acc, t| acc.saturating_mul(t.size())),
            Kind::Sum(cons) => cons
                .iter()
                .map(|(_, fs)| fs.iter().fold(1u128, |acc, f| acc.saturating_mul(f.size())))
                .fold(0u128, |a, b| a.saturating_add(b)),
            Kind::Funs { results, identity } => results.size().saturating_add(*identity as u128),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// The `i`-th element; `i < size()`.
    pub fn nth(&self, mut i: u128) -> Expr {
        match &self.kind {
            Kind::Consts(v) => v[i as usize].clone(),
            Kind::List(elem) => {
                let m = elem.size();
                for k in 0..=MAX_LIST_LEN {
                    let block = m.saturating_pow(k);
                    if i < block {
                        let digits = mixed_radix(i, &vec![m; k as usize]);
                        return Expr::list(digits.into_iter().map(|d| elem.nth(d)));
                    }
                    i -= block;
                }
                unreachable!("index out of range")
            }
            Kind::Tuple(ts) => {
                let radices: Vec<u128> = ts.iter().map(Space::size).collect();
                let digits = mixed_radix(i, &radices);
                Expr::tuple(ts.iter().zip(digits).map(|(t, d)| t.nth(d)).collect())
            }
            Kind::Sum(cons) => {
                for (k, fields) in cons {
                    let radices: Vec<u128> = fields.iter().map(Space::size).collect();
                    let block = radices.iter().fold(1u128, |a, b| a.saturating_mul(*b));
                    if i < block {
                        let digits = mixed_radix(i, &radices);
                        return Expr::con(k.clone(), fields.iter().zip(digits).map(|(f, d)| f.nth(d)).collect());
                    }
                    i -= block;
                }
                unreachable!("index out of range")
            }
            Kind::Funs { results, identity } => {
                if *identity && i == 0 {
                    return Expr::lam("x", Expr::var("x"));
                }
                let j = if *identity { i - 1 } else { i };
                Expr::lam("_", results.nth(j))
            }
        }
    }

    /// Indices to visit under a budget: everything when it fits, otherwise a
    /// systematic prefix followed by seeded random picks. The flag tells
    /// whether the space is covered.
    pub fn plan(&self, budget: usize, seed: u64) -> (Vec<u128>, bool) {
        let size = self.size();
        if size <= budget as u128 {
            return ((0..size).collect(), true);
        }
        let prefix = (budget / 2) as u128;
        let mut out: Vec<u128> = (0..prefix).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < budget {
            out.push(rng.gen_range(prefix..size));
        }
        (out, false)
    }
}

/// Digits of `i` with the first position varying slowest.
fn mixed_radix(mut i: u128, radices: &[u128]) -> Vec<u128> {
    let mut digits = vec![0; radices.len()];
    for (slot, r) in digits.iter_mut().zip(radices).rev() {
        if *r == 0 {
            continue;
        }
        *slot = i % r;
        i /= r;
    }
    digits
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no inhabitant of `{contract}` among {tried} candidates")]
    Unsatisfiable { contract: String, tried: usize },
}

/// First candidate of `ty` (in enumeration order) that satisfies `c`.
pub fn generate_inhabitant(
    c: &Contract,
    ty: &Type,
    oracle: &Oracle,
    size_bound: usize,
    seed: u64,
) -> Result<Expr, GenError> {
    let space = Space::for_type(ty, oracle.data());
    let (plan, _) = space.plan(size_bound, seed);
    for i in &plan {
        let e = space.nth(*i);
        if matches!(oracle.satisfies(&e, c, ty), SatVerdict::Holds) {
            return Ok(e);
        }
    }
    Err(GenError::Unsatisfiable { contract: c.to_string(), tried: plan.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_and_list_spaces() {
        let d = DataDecls::builtin();
        let ints = Space::for_type(&Type::Int, &d);
        assert_eq!(ints.size(), 7);
        assert_eq!(ints.nth(0), Expr::Int(1));
        let lists = Space::for_type(&Type::list(Type::Int), &d);
        assert_eq!(lists.size(), 1 + 7 + 49 + 343);
        assert_eq!(lists.nth(0), Expr::nil());
        assert_eq!(lists.nth(1), Expr::list([Expr::Int(1)]));
        assert_eq!(lists.nth(8), Expr::list([Expr::Int(1), Expr::Int(1)]));
    }

    #[test]
    fn tuples_vary_last_component_fastest() {
        let d = DataDecls::builtin();
        let s = Space::for_type(&Type::Tuple(vec![Type::list(Type::Int), Type::Int]), &d);
        assert_eq!(s.nth(0).to_string(), "([],1)");
        assert_eq!(s.nth(1).to_string(), "([],0)");
        assert_eq!(s.nth(7).to_string(), "([1],1)");
    }

    #[test]
    fn plan_is_exhaustive_when_small() {
        let d = DataDecls::builtin();
        let (idx, full) = Space::for_type(&Type::Bool, &d).plan(10, 0);
        assert_eq!(idx, vec![0, 1]);
        assert!(full);
        let (idx, full) = Space::for_type(&Type::list(Type::Int), &d).plan(10, 0);
        assert_eq!(idx.len(), 10);
        assert!(!full);
    }
}
