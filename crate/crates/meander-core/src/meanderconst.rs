//! Single-band contributions and the meander constants built from them.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlators::{string_reduce, sum_two_correlators, two_point, CorrelatorError};
use crate::exactval::{
    binomial, double_factorial, factorial, int, parse_rational, pow_rat, rat, rational_string, zeta_even, ExactError,
    PiValue, Rational,
};
use crate::stablegraphs::{masur_veech_volume, GraphError};

#[derive(Debug, Error)]
pub enum ConstError {
    #[error("parameters out of range: g={g}, n={n}")]
    Domain { g: u32, n: u32 },
    #[error("volume unavailable for H_{0}; supply an exact volume table")]
    VolumeUnavailable(u32),
    #[error("bad volume table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn b(n: i64, k: i64) -> Rational {
    int(binomial(n, k))
}

fn fact(n: i64) -> Rational {
    int(factorial(n as u64))
}

/// `d = 6g - 6 + 2n`, the complex dimension of `Q_{g,n}`.
pub fn dimension(g: u32, n: u32) -> i64 {
    6 * g as i64 - 6 + 2 * n as i64
}

fn check(g: u32, n: u32) -> Result<(), ConstError> {
    if 2 * g + n < 4 {
        return Err(ConstError::Domain { g, n });
    }
    Ok(())
}

/// Single-band contribution of the one-loop graph `Γ_1(g,n)`.
pub fn cyl1_gamma1(g: u32, n: u32) -> Result<Rational, ConstError> {
    if g == 0 || (g == 1 && n < 2) {
        return Err(ConstError::Domain { g, n });
    }
    let (gi, ni) = (g as i64, n as i64);
    if g == 1 {
        return Ok(int(4 * ni) * b(2 * ni - 2, ni - 1));
    }
    let mut sum = Rational::zero();
    for k in 0..=(3 * gi - 4) {
        sum += b(3 * gi - 4 + 2 * ni, ni + k) * two_point(g - 1, k as u32)?;
    }
    Ok(int(num_bigint::BigInt::one() << (g + 1)) * b(4 * gi - 4 + ni, gi) * fact(gi) * sum)
}

/// Same quantity from the unsimplified string-equation expansion.
pub fn cyl1_gamma1_unsimplified(g: u32, n: u32) -> Result<Rational, ConstError> {
    if g == 0 || (g == 1 && n < 2) {
        return Err(ConstError::Domain { g, n });
    }
    let (gi, ni) = (g as i64, n as i64);
    let top = 3 * gi - 4 + ni;
    let mut sum = Rational::zero();
    for d1 in 0..=top {
        sum += b(top, d1) * string_reduce(g - 1, n, d1 as u32)?;
    }
    Ok(int(num_bigint::BigInt::one() << (g + 1)) * fact(4 * gi - 4 + ni) / fact(top) * sum)
}

/// Total single-band contribution of all separating one-edge graphs.
pub fn cyl1_separating_total(g: u32, n: u32) -> Result<Rational, ConstError> {
    check(g, n)?;
    let (gi, ni) = (g as i64, n as i64);
    let mut sum = Rational::zero();
    for g1 in 0..=gi {
        sum += b(gi, g1) * b(3 * gi - 4 + 2 * ni, 3 * g1 - 2 + ni);
    }
    let inv24 = pow_rat(&rat(1, 24), gi);
    Ok(int(num_bigint::BigInt::one() << (g + 1)) * b(4 * gi - 4 + ni, gi) * inv24 * sum)
}

/// Separating total as the explicit sum over `Γ_{g1,n1}^{g2,n2}` with
/// `|Aut|` and leg distributions.
pub fn cyl1_separating_unsimplified(g: u32, n: u32) -> Result<Rational, ConstError> {
    check(g, n)?;
    let (gi, ni) = (g as i64, n as i64);
    let common = int(num_bigint::BigInt::one() << (g + 2)) * fact(4 * gi - 4 + ni)
        / fact(3 * gi - 4 + ni)
        / (fact(gi) * int(num_traits::pow(num_bigint::BigInt::from(24), g as usize)));
    let mut total = Rational::zero();
    for n1 in 0..=ni {
        for g1 in 0..=gi {
            let (g2, n2) = (gi - g1, ni - n1);
            if 2 * g1 + n1 < 2 || 2 * g2 + n2 < 2 {
                continue;
            }
            // |Aut| · cyl1(Γ) drops the automorphism factor.
            let c = &common * b(gi, g1) * b(3 * gi - 4 + ni, 3 * g1 - 2 + n1);
            total += rat(1, 2) * b(ni, n1) * c;
        }
    }
    Ok(total)
}

/// `cyl_1(Q_{g,n})` from the simplified closed forms.
pub fn cyl1_q(g: u32, n: u32) -> Result<Rational, ConstError> {
    check(g, n)?;
    let (gi, ni) = (g as i64, n as i64);
    Ok(match g {
        0 => int(2) * b(2 * ni - 4, ni - 2),
        1 => int(4 * ni) * b(2 * ni - 2, ni - 1) + rat(ni, 3) * b(2 * ni - 1, ni - 2),
        _ => {
            let mut nonsep = Rational::zero();
            for k in 0..=(3 * gi - 4) {
                nonsep += b(3 * gi - 4 + 2 * ni, ni + k) * two_point(g - 1, k as u32)?;
            }
            let mut sep = Rational::zero();
            for g1 in 0..=gi {
                sep += b(gi, g1) * b(3 * gi - 4 + 2 * ni, 3 * g1 - 2 + ni);
            }
            let inner = fact(gi) * nonsep + pow_rat(&rat(1, 24), gi) * sep;
            int(num_bigint::BigInt::one() << (g + 1)) * b(4 * gi - 4 + ni, gi) * inner
        }
    })
}

/// `Vol Q_{0,n} = 4 (π²/2)^{n-3}`.
pub fn vol_q0_closed(n: u32) -> PiValue {
    let k = n as i64 - 3;
    PiValue::new(int(4) * pow_rat(&rat(1, 2), k), 2 * k)
}

/// `Vol Q_{1,n} = π^{2n} n! ((2n-3)!! + (2n-2)!!) / (3 (2n-1)!)`.
pub fn vol_q1_closed(n: u32) -> PiValue {
    let ni = n as i64;
    let c = fact(ni) * (double_factorial(2 * ni - 3) + double_factorial(2 * ni - 2)) / (int(3) * fact(2 * ni - 1));
    PiValue::new(c, 2 * ni)
}

/// `Vol Q_{g,n}`: closed forms for `g ≤ 1`, the stable-graph sum otherwise.
pub fn volume(g: u32, n: u32) -> Result<PiValue, ConstError> {
    check(g, n)?;
    Ok(match g {
        0 => vol_q0_closed(n),
        1 => vol_q1_closed(n),
        _ => masur_veech_volume(g, n)?,
    })
}

/// A published closed form for `p_1(Q_{1,n})`, kept to document its
/// disagreement with `cyl_1/Vol`.
pub fn p1_q1_displayed(n: u32) -> PiValue {
    let ni = n as i64;
    let num = int(4) * b(2 * ni - 2, ni - 1) + rat(1, 48) * b(2 * ni - 1, ni - 2) - rat(ni * ni - ni + 2, 96);
    let den = fact(ni) / double_factorial(2 * ni - 1) + rat(2 * ni, 2 * ni - 1) / int(num_bigint::BigInt::one() << n);
    PiValue::new(int(2) * num / den, -2 * ni)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanderConstants {
    pub g: u32,
    pub n: u32,
    pub vol: PiValue,
    #[serde(with = "rational_string")]
    pub cyl1: Rational,
    pub cyl11: PiValue,
    pub c1: PiValue,
    pub p1: PiValue,
    pub c_gn: PiValue,
}

pub fn constants(g: u32, n: u32) -> Result<MeanderConstants, ConstError> {
    let vol = volume(g, n)?;
    constants_with_volume(g, n, vol)
}

pub fn constants_with_volume(g: u32, n: u32, vol: PiValue) -> Result<MeanderConstants, ConstError> {
    let cyl1 = cyl1_q(g, n)?;
    let (gi, ni) = (g as i64, n as i64);
    let c = PiValue::rational(cyl1.clone());
    let cyl11 = c.mul(&c).checked_div(&vol)?;
    let c1 = zeta_even(dimension(g, n) as u32)?.scale(&cyl1);
    let p1 = c.checked_div(&vol)?;
    let den = fact(4 * gi - 4 + ni) * fact(ni) * int(12 * gi - 12 + 4 * ni);
    let c_gn = cyl11.scale(&den.recip());
    Ok(MeanderConstants { g, n, vol, cyl1, cyl11, c1, p1, c_gn })
}

/// Exact `Vol H_g` values supplied from outside, keyed by genus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VolumeTable {
    pub volumes: BTreeMap<u32, PiValue>,
}

impl VolumeTable {
    /// Parses lines `g num/den pi_exp`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ConstError> {
        let mut volumes = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ConstError::Table { line: i + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [g, c, e] = parts.as_slice() else {
                return Err(err("expected three fields"));
            };
            let g: u32 = g.parse().map_err(|_| err("genus"))?;
            let coeff = parse_rational(c).map_err(|_| err("coefficient"))?;
            let pi_exp: i64 = e.parse().map_err(|_| err("pi exponent"))?;
            let vol = PiValue::new(coeff, pi_exp);
            if g == 0 || !(vol.coeff > Rational::zero()) {
                return Err(err("volume must be positive with g >= 1"));
            }
            let p1 = PiValue::rational(cyl1_h(g)).checked_div(&vol)?.to_f64();
            if !(p1 > 0.0 && p1 < 1.0) {
                return Err(err("implied p1 outside (0,1)"));
            }
            volumes.insert(g, vol);
        }
        Ok(VolumeTable { volumes })
    }

    pub fn load(path: &Path) -> Result<Self, ConstError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// `cyl_1(H_g) = 1/((2g-1) 2^{2g-3})`.
pub fn cyl1_h(g: u32) -> Rational {
    rat(1, 2 * g as i64 - 1) / pow_rat(&rat(2, 1), 2 * g as i64 - 3)
}

/// `Vol H_g` for the genera with an exact value available.
pub fn vol_h(g: u32, table: Option<&VolumeTable>) -> Result<PiValue, ConstError> {
    match g {
        1 => Ok(PiValue::new(rat(1, 3), 2)),
        2 => Ok(PiValue::new(rat(1, 135), 4)),
        _ => table.and_then(|t| t.volumes.get(&g).cloned()).ok_or(ConstError::VolumeUnavailable(g)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelianConstants {
    pub g: u32,
    pub vol_h: PiValue,
    #[serde(with = "rational_string")]
    pub cyl1_h: Rational,
    pub cyl11_h: PiValue,
    pub p1_h: PiValue,
    pub c_g_plus: PiValue,
}

pub fn abelian_constants(g: u32, table: Option<&VolumeTable>) -> Result<AbelianConstants, ConstError> {
    if g == 0 {
        return Err(ConstError::Domain { g, n: 0 });
    }
    let vol_h = vol_h(g, table)?;
    let c = PiValue::rational(cyl1_h(g));
    let cyl11_h = c.mul(&c).checked_div(&vol_h)?;
    let p1_h = c.checked_div(&vol_h)?;
    let gi = g as i64;
    let c_g_plus = cyl11_h.scale(&(fact(2 * gi - 2) * int(8 * gi - 6)).recip());
    Ok(AbelianConstants { g, vol_h, cyl1_h: c.coeff, cyl11_h, p1_h, c_g_plus })
}

/// Finite-`(g,n)` ratio of separating over non-separating contributions.
pub fn sep_nonsep_ratio(g: u32, n: u32) -> Result<Rational, ConstError> {
    Ok(cyl1_separating_total(g, n)? / cyl1_gamma1(g, n)?)
}

/// `lim_{n→∞}` of [`sep_nonsep_ratio`].
pub fn sep_nonsep_limit(g: u32) -> Result<Rational, ConstError> {
    match g {
        0 => Err(ConstError::Domain { g, n: 0 }),
        1 => Ok(rat(1, 6)),
        _ => {
            let s = sum_two_correlators(g - 1)?;
            let den = int(num_traits::pow(num_bigint::BigInt::from(12), g as usize)) * fact(g as i64) * s;
            Ok(den.recip())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma1_values() {
        assert_eq!(cyl1_gamma1(1, 2).unwrap(), rat(16, 1));
        assert_eq!(cyl1_gamma1(2, 2).unwrap(), rat(500, 1));
        assert_eq!(cyl1_gamma1(1, 5).unwrap(), rat(1400, 1));
        assert!(cyl1_gamma1(1, 1).is_err());
        assert!(cyl1_gamma1(0, 5).is_err());
    }

    #[test]
    fn separating_values() {
        assert_eq!(cyl1_separating_total(1, 2).unwrap(), rat(2, 3));
        assert_eq!(cyl1_separating_total(2, 2).unwrap(), rat(35, 4));
        assert_eq!(cyl1_separating_total(0, 4).unwrap(), cyl1_q(0, 4).unwrap());
    }

    #[test]
    fn cyl1_q_values() {
        assert_eq!(cyl1_q(0, 4).unwrap(), rat(12, 1));
        assert_eq!(cyl1_q(1, 2).unwrap(), rat(50, 3));
        assert_eq!(cyl1_q(2, 2).unwrap(), rat(2035, 4));
    }

    #[test]
    fn decomposition_identity() {
        for g in 1..=4 {
            for n in 0..=8 {
                if 2 * g + n < 4 || (g == 1 && n < 2) {
                    continue;
                }
                let total = cyl1_q(g, n).unwrap();
                let parts = cyl1_gamma1(g, n).unwrap() + cyl1_separating_total(g, n).unwrap();
                assert_eq!(total, parts, "g={g} n={n}");
                assert_eq!(cyl1_gamma1(g, n).unwrap(), cyl1_gamma1_unsimplified(g, n).unwrap());
                assert_eq!(cyl1_separating_total(g, n).unwrap(), cyl1_separating_unsimplified(g, n).unwrap());
            }
        }
    }

    #[test]
    fn example_22() {
        let c = constants(2, 2).unwrap();
        assert_eq!(c.vol, PiValue::new(rat(337, 18144), 10));
        assert_eq!(c.p1, PiValue::new(rat(9230760, 337), -10));
        assert_eq!(c.p1.to_decimal(6), "0.292489");
    }

    #[test]
    fn genus_zero_and_one_constants() {
        let c = constants(0, 4).unwrap();
        assert_eq!(c.p1, PiValue::new(rat(6, 1), -2));
        let c = constants(1, 2).unwrap();
        let cyl11 = PiValue::new(rat(2500, 9) * rat(3, 1), -4);
        assert_eq!(c.cyl11, cyl11);
        assert_eq!(c.c_gn, cyl11.scale(&rat(1, 32)));
        assert_eq!(c.c1, zeta_even(4).unwrap().scale(&rat(50, 3)));
    }

    #[test]
    fn displayed_genus_one_probability_disagrees_at_n2() {
        let first_principles = constants(1, 2).unwrap().p1;
        assert_eq!(first_principles, PiValue::new(rat(50, 1), -4));
        assert_eq!(p1_q1_displayed(2), PiValue::new(rat(383, 24), -4));
    }

    #[test]
    fn probabilities_in_unit_interval() {
        for (g, n) in [(0, 4), (0, 9), (1, 2), (1, 7), (2, 0), (2, 1), (2, 2), (3, 0)] {
            let p = constants(g, n).unwrap().p1.to_f64();
            assert!(p > 0.0 && p < 1.0, "g={g} n={n} p={p}");
        }
    }

    #[test]
    fn abelian_values() {
        let a1 = abelian_constants(1, None).unwrap();
        assert_eq!(a1.p1_h, PiValue::new(rat(6, 1), -2));
        let a2 = abelian_constants(2, None).unwrap();
        assert_eq!(a2.p1_h, PiValue::new(rat(45, 2), -4));
        assert_eq!(a2.cyl1_h, rat(1, 6));
        assert!(matches!(abelian_constants(3, None), Err(ConstError::VolumeUnavailable(3))));
    }

    #[test]
    fn volume_table_parsing() {
        let t = VolumeTable::parse("# comment\n3 1/1 6\n").unwrap();
        assert_eq!(t.volumes[&3], PiValue::new(rat(1, 1), 6));
        assert!(abelian_constants(3, Some(&t)).is_ok());
        assert!(VolumeTable::parse("3 1/1000000 6").is_err());
        assert!(VolumeTable::parse("3 x 6").is_err());
    }

    #[test]
    fn sep_nonsep_values() {
        assert_eq!(sep_nonsep_ratio(1, 2).unwrap(), rat(1, 24));
        assert_eq!(sep_nonsep_limit(1).unwrap(), rat(1, 6));
        assert_eq!(sep_nonsep_limit(3).unwrap(), rat(5, 882));
        assert_eq!(sep_nonsep_limit(9).unwrap(), rat(12155, 14878191186));
    }

    #[test]
    fn genus_one_finite_ratio_closed_form() {
        for n in 2..=20i64 {
            let expected = rat(1, 12) * rat((2 * n - 1) * (n - 1), n * (n + 1));
            assert_eq!(sep_nonsep_ratio(1, n as u32).unwrap(), expected);
        }
    }
}
