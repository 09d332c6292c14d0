//! Top-degree Kontsevich polynomials `N_{g,n}(b_1,…,b_n)` and their
//! substitution into stable-graph edge variables.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::correlators::{correlator, CorrelatorError};
use crate::exactval::{factorial, int, Rational};

/// `N_{g,n} = Σ_{|d| = 3g-3+n} c_d b^{2d}`; keys are the halved exponents `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumePolynomial {
    pub g: u32,
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, Rational>,
}

/// How a polynomial slot is fed: an edge variable or a leg set to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Zero,
}

/// Polynomial in edge variables; keys are full exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePolynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Rational>,
}

fn compositions(total: u32, parts: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for d in 0..=total {
        cur.push(d);
        compositions(total - d, parts, out, cur);
        cur.pop();
    }
}

/// Builds `N_{g,n}` from the correlator table.
pub fn n_poly(g: u32, n: usize) -> Result<VolumePolynomial, CorrelatorError> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(CorrelatorError::Unstable { g, n });
    }
    let degree = 3 * g + n as u32 - 3;
    let mut all = Vec::new();
    compositions(degree, n, &mut all, &mut Vec::new());
    let scale: BigInt = BigInt::one() << (5 * g as usize + 2 * n - 6);
    let mut terms = BTreeMap::new();
    for d in all {
        let c = correlator(g, &d)?;
        if c.is_zero() {
            continue;
        }
        let dfact = d.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x as u64));
        terms.insert(d, c / int(&scale * dfact));
    }
    Ok(VolumePolynomial { g, n, terms })
}

impl VolumePolynomial {
    /// Substitutes slots: legs vanish, slots sharing a variable multiply.
    pub fn eval_edges(&self, assignment: &[Slot], nvars: usize) -> EdgePolynomial {
        assert_eq!(assignment.len(), self.n, "one slot per polynomial variable");
        let mut terms: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        'term: for (d, c) in &self.terms {
            let mut exp = vec![0u32; nvars];
            for (slot, &di) in assignment.iter().zip(d) {
                match slot {
                    Slot::Zero if di > 0 => continue 'term,
                    Slot::Zero => {}
                    Slot::Var(v) => exp[*v] += 2 * di,
                }
            }
            *terms.entry(exp).or_insert_with(Rational::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        EdgePolynomial { nvars, terms }
    }

    pub fn total_degree(&self) -> u32 {
        6 * self.g + 2 * self.n as u32 - 6
    }
}

impl EdgePolynomial {
    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        EdgePolynomial { nvars, terms }
    }

    pub fn mul(&self, other: &EdgePolynomial) -> EdgePolynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut terms: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *terms.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        EdgePolynomial { nvars: self.nvars, terms }
    }

    pub fn scale(&self, r: &Rational) -> EdgePolynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= r;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Multiplies by the monomial `∏_e b_e`.
    pub fn times_all_vars(&self) -> EdgePolynomial {
        let terms = self.terms.iter().map(|(e, c)| (e.iter().map(|x| x + 1).collect(), c.clone())).collect();
        EdgePolynomial { nvars: self.nvars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn write_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &BTreeMap<Vec<u32>, Rational>,
    var_exp: impl Fn(u32) -> u32,
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, (e, c)) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        write!(f, "({c})")?;
        for (v, &x) in e.iter().enumerate() {
            match var_exp(x) {
                0 => {}
                1 => write!(f, "*b{}", v + 1)?,
                p => write!(f, "*b{}^{}", v + 1, p)?,
            }
        }
    }
    Ok(())
}

impl fmt::Display for VolumePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N[{},{}] = ", self.g, self.n)?;
        write_terms(f, &self.terms, |d| 2 * d)
    }
}

impl fmt::Display for EdgePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms, |e| e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::two_point;
    use crate::exactval::{binomial, rat};
    use proptest::prelude::*;

    #[test]
    fn small_polynomials() {
        let p03 = n_poly(0, 3).unwrap();
        assert_eq!(p03.terms.len(), 1);
        assert_eq!(p03.terms[&vec![0, 0, 0]], rat(1, 1));
        let p11 = n_poly(1, 1).unwrap();
        assert_eq!(p11.terms.len(), 1);
        assert_eq!(p11.terms[&vec![1]], rat(1, 48));
        let p04 = n_poly(0, 4).unwrap();
        assert_eq!(p04.terms[&vec![1, 0, 0, 0]], rat(1, 4));
        assert_eq!(p04.terms.len(), 4);
        assert!(n_poly(0, 2).is_err());
    }

    #[test]
    fn edge_substitution() {
        let p11 = n_poly(1, 1).unwrap();
        let e = p11.eval_edges(&[Slot::Var(0)], 1);
        assert_eq!(e.terms[&vec![2]], rat(1, 48));
        let p04 = n_poly(0, 4).unwrap();
        let e = p04.eval_edges(&[Slot::Var(0), Slot::Zero, Slot::Zero, Slot::Zero], 1);
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[&vec![2]], rat(1, 4));
        let e = p04.eval_edges(&[Slot::Var(0), Slot::Var(0), Slot::Zero, Slot::Zero], 1);
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[&vec![2]], rat(1, 2));
    }

    #[test]
    fn homogeneity() {
        for (g, n) in [(0, 5), (1, 3), (2, 2), (3, 1)] {
            let p = n_poly(g, n).unwrap();
            for d in p.terms.keys() {
                assert_eq!(2 * d.iter().sum::<u32>(), p.total_degree());
            }
        }
    }

    /// `N_{g-1,n+2}(b,b,0,…,0)` against the explicit 2-point expansion.
    #[test]
    fn loop_substitution_matches_two_point_sum() {
        for g in 1..=3u32 {
            for n in 0..=4usize {
                if 2 * g + (n as u32) < 3 || (g == 1 && n == 0) {
                    continue;
                }
                let p = n_poly(g - 1, n + 2).unwrap();
                let mut slots = vec![Slot::Var(0), Slot::Var(0)];
                slots.extend(std::iter::repeat_n(Slot::Zero, n));
                let e = p.eval_edges(&slots, 1);
                let top = 3 * (g as i64 - 1) - 1 + n as i64;
                let mut expected = Rational::zero();
                for d1 in 0..=top {
                    let d2 = top - d1;
                    let c = if g == 1 {
                        int(binomial(n as i64 - 1, d1))
                    } else {
                        let lo = (d1 - 3 * (g as i64 - 1) + 1).max(0);
                        (lo..=d1.min(n as i64))
                            .map(|i| int(binomial(n as i64, i)) * two_point(g - 1, (d1 - i) as u32).unwrap())
                            .sum()
                    };
                    let scale = int(BigInt::one() << (5 * (g - 1) as usize + 2 * (n + 2) - 6))
                        * int(factorial(d1 as u64) * factorial(d2 as u64));
                    expected += c / scale;
                }
                let got = e.terms.get(&vec![2 * top as u32]).cloned().unwrap_or_else(Rational::zero);
                assert_eq!(got, expected, "g={g} n={n}");
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_under_slot_permutation(seed in 0u64..1000) {
            let p = n_poly(1, 4).unwrap();
            let mut perm: Vec<usize> = (0..4).collect();
            let mut s = seed;
            for i in (1..4).rev() {
                perm.swap(i, (s % (i as u64 + 1)) as usize);
                s /= 4;
            }
            for (d, c) in &p.terms {
                let q: Vec<u32> = perm.iter().map(|&i| d[i]).collect();
                prop_assert_eq!(&p.terms[&q], c);
            }
        }
    }
}
