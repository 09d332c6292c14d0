//! Exact rationals, rational multiples of powers of π, and even zeta values.

use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("cannot add pi^{left} and pi^{right}")]
    MixedExponent { left: i64, right: i64 },
    #[error("odd zeta argument reached: zeta({0})")]
    OddZeta(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse exact value: {0}")]
    Parse(String),
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient, zero whenever `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Double factorial extended to odd negative arguments by `n!! = (n+2)!!/(n+2)`.
pub fn double_factorial(n: i64) -> Rational {
    if n >= -1 {
        let mut acc = BigInt::one();
        let mut m = n;
        while m > 1 {
            acc *= m;
            m -= 2;
        }
        int(acc)
    } else if n % 2 != 0 {
        double_factorial(n + 2) / int(n + 2)
    } else {
        panic!("double factorial undefined at {n}")
    }
}

pub fn pow_rat(base: &Rational, exp: i64) -> Rational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// Natural logarithm of a positive big integer, accurate to double precision.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "logarithm of non-positive integer");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(x: &Rational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&x.abs()).exp()
}

static BERNOULLI: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

/// Bernoulli number `B_m` with `B_1 = -1/2`.
pub fn bernoulli(m: usize) -> Rational {
    if let Some(b) = BERNOULLI.read().unwrap().get(m) {
        return b.clone();
    }
    let mut cache = BERNOULLI.write().unwrap();
    while cache.len() <= m {
        let j = cache.len();
        if j == 0 {
            cache.push(Rational::one());
            continue;
        }
        let mut s = Rational::zero();
        for (k, bk) in cache.iter().enumerate() {
            s += int(binomial(j as i64 + 1, k as i64)) * bk;
        }
        cache.push(-s / int(j as i64 + 1));
    }
    cache[m].clone()
}

/// `ζ(s)` for even `s ≥ 2` as an exact multiple of `π^s`.
pub fn zeta_even(s: u32) -> Result<PiValue, ExactError> {
    if s == 0 || s % 2 == 1 {
        return Err(ExactError::OddZeta(s));
    }
    let sign = if (s / 2 + 1).is_multiple_of(2) { 1 } else { -1 };
    let coeff = int(sign) * bernoulli(s as usize) * int(BigInt::one() << s) / int(factorial(s as u64) * 2);
    Ok(PiValue::new(coeff, s as i64))
}

/// `coeff · π^pi_exp` with an exact rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiValue {
    pub coeff: Rational,
    pub pi_exp: i64,
}

impl PiValue {
    pub fn new(coeff: Rational, pi_exp: i64) -> Self {
        PiValue { coeff, pi_exp }
    }

    pub fn zero(pi_exp: i64) -> Self {
        PiValue::new(Rational::zero(), pi_exp)
    }

    pub fn rational(coeff: Rational) -> Self {
        PiValue::new(coeff, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn checked_add(&self, other: &PiValue) -> Result<PiValue, ExactError> {
        if self.pi_exp != other.pi_exp {
            return Err(ExactError::MixedExponent { left: self.pi_exp, right: other.pi_exp });
        }
        Ok(PiValue::new(&self.coeff + &other.coeff, self.pi_exp))
    }

    pub fn checked_sub(&self, other: &PiValue) -> Result<PiValue, ExactError> {
        self.checked_add(&other.neg())
    }

    pub fn neg(&self) -> PiValue {
        PiValue::new(-self.coeff.clone(), self.pi_exp)
    }

    pub fn mul(&self, other: &PiValue) -> PiValue {
        PiValue::new(&self.coeff * &other.coeff, self.pi_exp + other.pi_exp)
    }

    pub fn scale(&self, r: &Rational) -> PiValue {
        PiValue::new(&self.coeff * r, self.pi_exp)
    }

    pub fn checked_div(&self, other: &PiValue) -> Result<PiValue, ExactError> {
        if other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(PiValue::new(&self.coeff / &other.coeff, self.pi_exp - other.pi_exp))
    }

    pub fn recip(&self) -> Result<PiValue, ExactError> {
        PiValue::rational(Rational::one()).checked_div(self)
    }

    pub fn powi(&self, e: u32) -> PiValue {
        PiValue::new(num_traits::pow(self.coeff.clone(), e as usize), self.pi_exp * e as i64)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coeff) * std::f64::consts::PI.powi(self.pi_exp as i32)
    }

    /// Natural logarithm of the absolute value; usable far outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        ln_rational(&self.coeff.abs()) + self.pi_exp as f64 * std::f64::consts::PI.ln()
    }

    /// Correctly rounded fixed-point rendering with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = int(num_traits::pow(BigInt::from(10), digits));
        if self.pi_exp == 0 || self.is_zero() {
            return format_fixed(&round_half_up(&(&self.coeff * &scale)), digits);
        }
        let mut guard = 10 + digits;
        loop {
            let (lo, hi) = pi_interval(guard + 4 * self.pi_exp.unsigned_abs() as usize);
            let (plo, phi) = if self.pi_exp > 0 {
                (pow_rat(&lo, self.pi_exp), pow_rat(&hi, self.pi_exp))
            } else {
                (pow_rat(&hi, self.pi_exp), pow_rat(&lo, self.pi_exp))
            };
            let a = round_half_up(&(&self.coeff * &plo * &scale));
            let b = round_half_up(&(&self.coeff * &phi * &scale));
            if a == b {
                return format_fixed(&a, digits);
            }
            guard *= 2;
        }
    }
}

fn round_half_up(x: &Rational) -> BigInt {
    let half = rat(1, 2);
    if x.is_negative() {
        -(-x + &half).floor().to_integer()
    } else {
        (x + &half).floor().to_integer()
    }
}

fn format_fixed(n: &BigInt, digits: usize) -> String {
    let sign = if n.is_negative() { "-" } else { "" };
    let mut s = n.abs().to_string();
    if digits == 0 {
        return format!("{sign}{s}");
    }
    if s.len() <= digits {
        s = "0".repeat(digits + 1 - s.len()) + &s;
    }
    let (ip, fp) = s.split_at(s.len() - digits);
    format!("{sign}{ip}.{fp}")
}

fn arctan_inv(x: u32, scale: &BigInt) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut term = scale / x;
    let mut sum = term.clone();
    let mut k = 1u64;
    loop {
        term /= &x2;
        if term.is_zero() {
            return sum;
        }
        let t = &term / (2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
}

/// Rational interval of width `2·10^-digits` containing π (Machin's formula).
fn pi_interval(digits: usize) -> (Rational, Rational) {
    let guard = 10;
    let scale = num_traits::pow(BigInt::from(10), digits + guard);
    let approx = arctan_inv(5, &scale) * 16 - arctan_inv(239, &scale) * 4;
    let den = int(scale);
    let err = int(num_traits::pow(BigInt::from(10), guard));
    let a = int(approx);
    ((&a - &err) / &den, (&a + &err) / &den)
}

/// `p/q`, or `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for PiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * pi^{}", format_rational(&self.coeff), self.pi_exp)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let bad = || ExactError::Parse(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

impl FromStr for PiValue {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('*') {
            Some((c, p)) => {
                let exp = p
                    .trim()
                    .strip_prefix("pi^")
                    .and_then(|e| e.trim().parse::<i64>().ok())
                    .ok_or_else(|| ExactError::Parse(s.to_string()))?;
                Ok(PiValue::new(parse_rational(c)?, exp))
            }
            None => Ok(PiValue::rational(parse_rational(s)?)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PiValueJson {
    num: String,
    den: String,
    pi_exp: i64,
    approx: f64,
}

impl Serialize for PiValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PiValueJson {
            num: self.coeff.numer().to_string(),
            den: self.coeff.denom().to_string(),
            pi_exp: self.pi_exp,
            approx: self.to_f64(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = PiValueJson::deserialize(deserializer)?;
        let coeff = parse_rational(&format!("{}/{}", j.num, j.den)).map_err(serde::de::Error::custom)?;
        Ok(PiValue::new(coeff, j.pi_exp))
    }
}

/// Serde adapter rendering a [`Rational`] as `"p/q"`.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
