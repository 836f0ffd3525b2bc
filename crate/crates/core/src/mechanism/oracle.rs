//! Analytic evaluation of the allocation integrals.
//!
//! Each product of linear factors is expanded into elementary symmetric
//! polynomials of the cost ratios `r_i = t_1 / t_i`,
//!
//! ```text
//! ∏ (1 - u r_i) = Σ_j (-1)^j e_j(r) u^j
//! ```
//!
//! and integrated monomial by monomial: `∫_0^1 u^j = 1/(j+1)` and
//! `∫_0^1 (1-u) u^j = 1/((j+1)(j+2))`. This shares nothing with the quadrature
//! path and works over any [`Scalar`], including exact rationals. The
//! alternating sum loses roughly `2^n` ulps in floating point, hence the cap.

use super::{AllocationProbabilities, CostVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const ORACLE_MAX_MACHINES: usize = 32;

/// `e_0 ..= e_len` of `values`.
fn elementary_symmetric<T: Scalar>(values: impl Iterator<Item = T>) -> Vec<T> {
    let mut e = vec![T::one()];
    for v in values {
        e.push(T::zero());
        for j in (1..e.len()).rev() {
            let add = e[j - 1].clone() * v.clone();
            e[j] = e[j].clone() + add;
        }
    }
    e
}

fn from_usize<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("small integers are representable")
}

/// Allocation probabilities computed by term-by-term analytic integration.
pub fn allocate_oracle<T: Scalar>(t: &CostVector<T>) -> Result<AllocationProbabilities<T>> {
    let n = t.len();
    if n > ORACLE_MAX_MACHINES {
        return Err(Error::TooManyMachines {
            n,
            max: ORACLE_MAX_MACHINES,
        });
    }
    let (order, sorted) = t.sorted();
    if n == 1 {
        return Ok(AllocationProbabilities::unsorted(&order, vec![T::one()]));
    }
    let t1 = sorted[0].clone();
    let r: Vec<T> = sorted[1..].iter().map(|c| t1.clone() / c.clone()).collect();

    let alternating = |e: Vec<T>, weight: &dyn Fn(usize) -> T| {
        e.into_iter().enumerate().fold(T::zero(), |s, (j, ej)| {
            let term = ej / weight(j);
            if j % 2 == 0 {
                s + term
            } else {
                s - term
            }
        })
    };

    let mut probs = Vec::with_capacity(n);
    let e_all = elementary_symmetric(r.iter().cloned());
    probs.push(alternating(e_all, &|j| from_usize(j + 1)));
    for k in 0..r.len() {
        let others = r
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, v)| v.clone());
        let e = elementary_symmetric(others);
        let integral = alternating(e, &|j| from_usize((j + 1) * (j + 2)));
        probs.push(r[k].clone() * integral);
    }
    Ok(AllocationProbabilities::unsorted(&order, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn esp_small() {
        let e = elementary_symmetric([1.0, 2.0, 3.0].into_iter());
        assert_eq!(e, vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn exact_two_machines() {
        let t = CostVector::new(vec![q(1, 1), q(2, 1)]).unwrap();
        let p = allocate_oracle(&t).unwrap();
        assert_eq!(p.as_slice(), &[q(3, 4), q(1, 4)]);
        let t = CostVector::new(vec![q(2, 1), q(1, 1)]).unwrap();
        assert_eq!(allocate_oracle(&t).unwrap().as_slice(), &[q(1, 4), q(3, 4)]);
    }

    #[test]
    fn exact_sums_to_one() {
        let t = CostVector::new(vec![q(3, 1), q(7, 2), q(1, 1), q(9, 1), q(1, 1)]).unwrap();
        let p = allocate_oracle(&t).unwrap();
        assert_eq!(p.sum(), q(1, 1));
        assert_eq!(p.as_slice()[2], p.as_slice()[4]);
    }

    #[test]
    fn single_machine() {
        let t = CostVector::new(vec![1.0]).unwrap();
        assert_eq!(allocate_oracle(&t).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn size_cap() {
        let t = CostVector::new(vec![1.0; ORACLE_MAX_MACHINES + 1]).unwrap();
        assert!(matches!(allocate_oracle(&t), Err(Error::TooManyMachines { .. })));
    }
}
