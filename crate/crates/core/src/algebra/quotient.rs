use super::{AlgebraError, FiniteSemigroup};
use crate::presentation::Presentation;
use crate::trace::Gen;
use crate::rewrite::{divisor_set, normalize, ReesQuotient, RewriteError};

/// The Rees quotient by the non-divisors of `w`, as a checked table.
pub fn rees_quotient(p: &Presentation, w: &[Gen], fuel: u64) -> Result<(FiniteSemigroup, ReesQuotient), AlgebraError> {
    let d = divisor_set(p, w, fuel)?;
    let q = ReesQuotient::new(p, &d)?;
    let f = FiniteSemigroup::new(q.names.clone(), q.table.clone(), Some(q.zero))?;
    Ok((f, q))
}

/// A finite quotient in which two words have different images.
#[derive(Debug, Clone)]
pub struct Separation {
    pub semigroup: FiniteSemigroup,
    pub quotient: ReesQuotient,
    /// The word whose divisors span the quotient.
    pub divisors_of: Vec<Gen>,
    pub fuel: u64,
}

impl Separation {
    pub fn order(&self) -> usize {
        self.semigroup.len()
    }
}

/// Searches divisor-ideal quotients of `u` and of `v` at fuel 16, 32, … up to `fuel` and returns
/// the smallest one of order ≤ `order_bound` that separates them.
pub fn separating_quotient_search(
    p: &Presentation,
    u: &[Gen],
    v: &[Gen],
    order_bound: usize,
    fuel: u64,
) -> Result<Option<Separation>, AlgebraError> {
    if normalize(p, u)? == normalize(p, v)? {
        return Err(AlgebraError::Precondition("the two words have the same normal form".into()));
    }
    let mut best: Option<Separation> = None;
    for w in [u, v] {
        let mut f = 16.min(fuel);
        loop {
            match rees_quotient(p, w, f) {
                Ok((semigroup, quotient)) => {
                    if quotient.eval(u) != quotient.eval(v)
                        && semigroup.len() <= order_bound
                        && best.as_ref().is_none_or(|b| semigroup.len() < b.order())
                    {
                        best = Some(Separation { semigroup, quotient, divisors_of: w.to_vec(), fuel: f });
                    }
                    break;
                }
                Err(AlgebraError::Rewrite(RewriteError::FuelExceeded(_))) if f < fuel => f = (f * 2).min(fuel),
                Err(AlgebraError::Rewrite(RewriteError::FuelExceeded(_) | RewriteError::ZeroWord)) => break,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(best)
}
