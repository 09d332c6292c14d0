//! Leading-order asymptotic forms of the volumes and meander constants, the
//! binomial-ratio-sum machinery behind them, and exact-vs-asymptotic checks.
//!
//! Forms are evaluated in log space and exponentiated only for display, so
//! they stay finite far beyond `f64` range.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::correlators::{sum_two_correlators, CorrelatorError};
use crate::exactval::{binomial, double_factorial, factorial, int, ln_bigint, ln_rational, rat, Rational};
use crate::meanderconst::{
    abelian_constants, constants_with_volume, cyl1_h, cyl1_q, sep_nonsep_limit, sep_nonsep_ratio, volume, ConstError,
};

#[derive(Debug, thiserror::Error)]
pub enum AsymError {
    #[error("unknown asymptotic form `{0}`")]
    UnknownForm(String),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("bad parameter `{name}`: {msg}")]
    BadParam { name: String, msg: String },
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("no exact counterpart for `{0}`")]
    NoExact(String),
    #[error(transparent)]
    Const(#[from] ConstError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
}

/// `coeff · π^(half_pi_exp / 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfPiValue {
    pub coeff: Rational,
    pub half_pi_exp: i64,
}

impl HalfPiValue {
    pub fn ln_abs(&self) -> f64 {
        ln_rational(&self.coeff.abs()) + self.half_pi_exp as f64 / 2.0 * PI.ln()
    }

    pub fn to_f64(&self) -> f64 {
        let s = if self.coeff.is_negative() { -1.0 } else { 1.0 };
        s * self.ln_abs().exp()
    }
}

impl fmt::Display for HalfPiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half_pi_exp % 2 == 0 {
            write!(f, "{} * pi^{}", self.coeff, self.half_pi_exp / 2)
        } else {
            write!(f, "{} * pi^({}/2)", self.coeff, self.half_pi_exp)
        }
    }
}

/// `a_0 = 1/8`, `a_1 = 7/6`, and the 2-correlator expression beyond.
pub fn a_g(g: u32) -> Result<Rational, AsymError> {
    Ok(match g {
        0 => rat(1, 8),
        1 => rat(7, 6),
        _ => {
            let s = sum_two_correlators(g - 1)?;
            let tail = (int(BigInt::from(3).pow(g)) * int(factorial(g as u64))).recip();
            int(BigInt::one() << (2 * g - 3)) * (int(BigInt::one() << (2 * g)) * s + tail)
        }
    })
}

/// `κ̃_g`: seeds for `g ≤ 3`, the quadratic recursion beyond.
pub fn kappa_tilde(g: u32) -> BigInt {
    let mut k: Vec<BigInt> = [-1i64, 2, 98, 19600].iter().map(|&x| BigInt::from(x)).collect();
    for h in 4..=g as usize {
        let mut v = BigInt::from(50 * (h - 1) * (h - 1)) * &k[h - 1];
        let mut quad = BigInt::zero();
        for i in 2..=h - 2 {
            quad += &k[i] * &k[h - i];
        }
        v += quad / 2;
        k.push(v);
    }
    k.swap_remove(g as usize)
}

/// `Γ((5g-1)/2)` as `coeff · √π^{0 or 1}`.
fn gamma_half(g: u32) -> HalfPiValue {
    let g = g as i64;
    if g % 2 == 1 {
        HalfPiValue { coeff: int(factorial(((5 * g - 3) / 2) as u64)), half_pi_exp: 0 }
    } else {
        let pow2 = crate::exactval::pow_rat(&rat(2, 1), (5 * g - 2) / 2);
        HalfPiValue { coeff: double_factorial(5 * g - 3) / pow2, half_pi_exp: 1 }
    }
}

/// `κ_g = 64 π^{6g-11/2} κ̃_g / (384^g Γ((5g-1)/2))`, exactly.
pub fn kappa_g(g: u32) -> HalfPiValue {
    let gam = gamma_half(g);
    let coeff = int(64) * int(kappa_tilde(g)) / (int(BigInt::from(384).pow(g)) * gam.coeff);
    HalfPiValue { coeff, half_pi_exp: 12 * g as i64 - 11 - gam.half_pi_exp }
}

/// Natural entropy `H(p) = -p log p - (1-p) log(1-p)`, extended by zero.
pub fn entropy_h(p: f64) -> Result<f64, AsymError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AsymError::Constraint(format!("p = {p} outside [0,1]")));
    }
    let t = |x: f64| if x == 0.0 { 0.0 } else { -x * x.ln() };
    Ok(t(p) + t(1.0 - p))
}

/// Partial sum of `log 2 - Σ x^{2j}/(2j(2j-1))`, the series of `H(1/2 + x/2)`.
pub fn entropy_series(x: f64, terms: usize) -> f64 {
    LN_2 - (1..=terms).map(|j| x.powi(2 * j as i32) / ((2 * j) as f64 * (2 * j - 1) as f64)).sum::<f64>()
}

/// Explicit sandwich for `C(n,k)` against its entropy form, `p = k/n`:
/// returns `(lower bound, ratio)`; the upper bound is 1.
pub fn binomial_sandwich(n: u64, k: u64) -> Result<(f64, f64), AsymError> {
    if k == 0 || k >= n {
        return Err(AsymError::Constraint("need 0 < k < n".into()));
    }
    let p = k as f64 / n as f64;
    let q = p * (1.0 - p);
    let ln_form = n as f64 * entropy_h(p)? - 0.5 * (2.0 * PI * q * n as f64).ln();
    let ln_exact = ln_bigint(&binomial(n as i64, k as i64));
    Ok((1.0 - (1.0 - q) / (12.0 * q) / n as f64, (ln_exact - ln_form).exp()))
}

/// One binomial `C(a n + b, c k + d)` in a ratio sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomTerm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl BinomTerm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        BinomTerm { a, b, c, d }
    }

    fn top(&self, n: i64) -> i64 {
        self.a * n + self.b
    }

    fn bottom(&self, k: i64) -> i64 {
        self.c * k + self.d
    }

    /// `k` range where `0 ≤ ck + d ≤ an + b`.
    fn k_range(&self, n: i64) -> (i64, i64) {
        (div_ceil(-self.d, self.c), (self.top(n) - self.d).div_euclid(self.c))
    }
}

fn div_ceil(x: i64, y: i64) -> i64 {
    -((-x).div_euclid(y))
}

/// Exact value and asymptotic right-hand side of a binomial ratio sum.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomRatioSum {
    pub exact: Rational,
    pub ln_exact: f64,
    pub ln_rhs: f64,
    pub ratio: f64,
    pub k_range: Option<(i64, i64)>,
}

fn validate(num: &[BinomTerm], den: &[BinomTerm]) -> Result<Rational, AsymError> {
    if num.is_empty() {
        return Err(AsymError::Constraint("at least one numerator binomial".into()));
    }
    if num.iter().chain(den).any(|t| t.a <= 0 || t.c <= 0) {
        return Err(AsymError::Constraint("a_i, c_i, s_j, u_j must be positive".into()));
    }
    let alpha = rat(num[0].a, num[0].c);
    if num.iter().chain(den).any(|t| rat(t.a, t.c) != alpha) {
        return Err(AsymError::Constraint("all a_i/c_i and s_j/u_j must coincide".into()));
    }
    if alpha < rat(1, 1) {
        return Err(AsymError::Constraint("alpha must be at least 1".into()));
    }
    let (a, s): (i64, i64) = (num.iter().map(|t| t.a).sum(), den.iter().map(|t| t.a).sum());
    if a <= s {
        return Err(AsymError::Constraint("need sum a_i > sum s_j".into()));
    }
    Ok(alpha)
}

/// Log of the general right-hand side
/// `α (π/2)^{(m-l+1)/2} √(S/((a-s)A)) n^{(m-l+1)/2} 2^{(a-s)n+(b-t)}`.
fn ln_binom_rhs(num: &[BinomTerm], den: &[BinomTerm], alpha: f64, n: f64) -> f64 {
    let (l, m) = (num.len() as f64, den.len() as f64);
    let a: i64 = num.iter().map(|t| t.a).sum();
    let b: i64 = num.iter().map(|t| t.b).sum();
    let s: i64 = den.iter().map(|t| t.a).sum();
    let t: i64 = den.iter().map(|t| t.b).sum();
    let ln_a: f64 = num.iter().map(|t| (t.a as f64).ln()).sum();
    let ln_s: f64 = den.iter().map(|t| (t.a as f64).ln()).sum();
    let half = (m - l + 1.0) / 2.0;
    alpha.ln()
        + half * (PI / 2.0).ln()
        + 0.5 * (ln_s - ln_a - ((a - s) as f64).ln())
        + half * n.ln()
        + ((a - s) as f64 * n + (b - t) as f64) * LN_2
}

/// `Σ_k ∏ C(a_i n+b_i, c_i k+d_i) / ∏ C(s_j n+t_j, u_j k+v_j)` exactly, over
/// all `k` keeping every binomial in range, next to its asymptotic form.
///
/// The sum is accumulated as an integer over `∏ (s_j n + t_j)!` with each
/// factor updated incrementally in `k`.
pub fn binom_ratio_sum_general(num: &[BinomTerm], den: &[BinomTerm], n: i64) -> Result<BinomRatioSum, AsymError> {
    let alpha = validate(num, den)?;
    let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
    let ln_rhs = ln_binom_rhs(num, den, alpha_f, n as f64);
    let range = num
        .iter()
        .chain(den)
        .map(|t| t.k_range(n))
        .fold((i64::MIN, i64::MAX), |(lo, hi), (l, h)| (lo.max(l), hi.min(h)));
    if range.0 > range.1 || num.iter().chain(den).any(|t| t.top(n) < 0) {
        return Ok(BinomRatioSum {
            exact: Rational::zero(),
            ln_exact: f64::NEG_INFINITY,
            ln_rhs,
            ratio: 0.0,
            k_range: None,
        });
    }
    let (k0, k1) = range;
    let mut nums: Vec<BigInt> = num.iter().map(|t| binomial(t.top(n), t.bottom(k0))).collect();
    let mut dens: Vec<BigInt> =
        den.iter().map(|t| factorial(t.bottom(k0) as u64) * factorial((t.top(n) - t.bottom(k0)) as u64)).collect();
    let mut total = BigInt::zero();
    for k in k0..=k1 {
        let term = nums.iter().chain(&dens).fold(BigInt::one(), |acc, x| acc * x);
        total += term;
        if k == k1 {
            break;
        }
        for (t, v) in num.iter().zip(nums.iter_mut()) {
            let (top, m) = (t.top(n), t.bottom(k));
            for r in 0..t.c {
                *v = &*v * BigInt::from(top - m - r) / BigInt::from(m + r + 1);
            }
        }
        for (t, v) in den.iter().zip(dens.iter_mut()) {
            let (top, m) = (t.top(n), t.bottom(k));
            for r in 0..t.c {
                *v = &*v * BigInt::from(m + r + 1) / BigInt::from(top - m - r);
            }
        }
    }
    let denom = den.iter().fold(BigInt::one(), |acc, t| acc * factorial(t.top(n) as u64));
    let ln_exact = ln_bigint(&total) - ln_bigint(&denom);
    Ok(BinomRatioSum {
        exact: Rational::new(total, denom),
        ln_exact,
        ln_rhs,
        ratio: (ln_exact - ln_rhs).exp(),
        k_range: Some(range),
    })
}

/// Single-ratio case `Σ_k C(an+b, ck+d) / C(sn+t, uk+v)`.
pub fn binom_ratio_sum(p: [i64; 8], n: i64) -> Result<BinomRatioSum, AsymError> {
    let [a, b, c, d, s, t, u, v] = p;
    binom_ratio_sum_general(&[BinomTerm::new(a, b, c, d)], &[BinomTerm::new(s, t, u, v)], n)
}

/// The family expressing sums of 2-correlators.
pub const TWO_CORRELATOR_FAMILY: [i64; 8] = [6, 0, 2, 1, 3, -1, 1, 0];

/// Dixon sum `S_n(p,1) = Σ_k C(n,k)^p` with its asymptotic form.
pub fn dixon_sum(p: usize, n: i64) -> Result<BinomRatioSum, AsymError> {
    binom_ratio_sum_general(&vec![BinomTerm::new(1, 0, 1, 0); p], &[], n)
}

fn ln_binom_real(y: f64, x: f64) -> f64 {
    ln_gamma(y + 1.0) - ln_gamma(x + 1.0) - ln_gamma(y - x + 1.0)
}

/// Largest relative deviation of the Γ-interpolated binomial ratio at
/// `k = αn/2 (1 + x/√n)` from its Gaussian form, over `|x| ≤ n^{1/4-δ}`.
pub fn local_limit_check(p: [i64; 8], n: f64, delta: f64, grid: usize) -> Result<f64, AsymError> {
    let [a, b, c, d, s, t, u, v] = p;
    let alpha = validate(&[BinomTerm::new(a, b, c, d)], &[BinomTerm::new(s, t, u, v)])?;
    if !(0.0 < delta && delta < 0.25) || grid < 2 {
        return Err(AsymError::Constraint("need 0 < delta < 1/4 and at least two grid points".into()));
    }
    let alpha = alpha.to_f64().unwrap_or(f64::NAN);
    let xmax = n.powf(0.25 - delta);
    let (af, bf, sf, tf) = (a as f64, b as f64, s as f64, t as f64);
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let x = -xmax + 2.0 * xmax * i as f64 / (grid - 1) as f64;
        let k = alpha * n / 2.0 * (1.0 + x / n.sqrt());
        let ln_exact =
            ln_binom_real(af * n + bf, c as f64 * k + d as f64) - ln_binom_real(sf * n + tf, u as f64 * k + v as f64);
        let ln_form = ((af - sf) * n + bf - tf) * LN_2 - (af - sf) * x * x / 2.0 + 0.5 * (sf / af).ln();
        worst = worst.max(((ln_exact - ln_form).exp() - 1.0).abs());
    }
    Ok(worst)
}

/// Log of the tail bound `ε · a · n · exp(a n H(1 - ε/2))`.
pub fn tail_bound(a: i64, n: f64, eps: f64) -> Result<f64, AsymError> {
    if !(0.0 < eps && eps <= 1.0) || a <= 0 {
        return Err(AsymError::Constraint("need a > 0 and eps in (0,1]".into()));
    }
    Ok((eps * a as f64 * n).ln() + a as f64 * n * entropy_h(1.0 - eps / 2.0)?)
}

/// Log of the tail of the single-ratio sum over `|k - αn/2| ≥ α(1-ε)n/2`.
pub fn tail_sum(p: [i64; 8], n: i64, eps: f64) -> Result<f64, AsymError> {
    let [a, b, c, d, s, t, u, v] = p;
    let (nt, dt) = (BinomTerm::new(a, b, c, d), BinomTerm::new(s, t, u, v));
    let alpha = validate(&[nt], &[dt])?.to_f64().unwrap_or(f64::NAN);
    let (lo, hi) = {
        let (l1, h1) = nt.k_range(n);
        let (l2, h2) = dt.k_range(n);
        (l1.max(l2), h1.min(h2))
    };
    let centre = alpha * n as f64 / 2.0;
    let cut = alpha / 2.0 * (1.0 - eps) * n as f64;
    let logs: Vec<f64> = (lo..=hi)
        .filter(|&k| (k as f64 - centre).abs() >= cut)
        .map(|k| {
            ln_binom_real(nt.top(n) as f64, nt.bottom(k) as f64) - ln_binom_real(dt.top(n) as f64, dt.bottom(k) as f64)
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(m + logs.iter().map(|x| (x - m).exp()).sum::<f64>().ln())
}

/// One row of the 2-correlator-sum comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sum2CorrRow {
    pub g: u32,
    pub ln_exact: f64,
    pub ln_double_factorial_form: f64,
    pub ln_stirling_form: f64,
    pub ratio: f64,
    pub ratio_forms: f64,
}

fn ln_sum2corr_df(g: f64) -> f64 {
    // ln((2g+1)!!) = ln Γ(2g+2) - g ln 2 - ln Γ(g+1)
    let ln_df = ln_gamma(2.0 * g + 2.0) - g * LN_2 - ln_gamma(g + 1.0);
    -0.5 * 3f64.ln() + g * (2.0f64 / 3.0).ln() - ln_df
}

fn ln_sum2corr_stirling(g: f64) -> f64 {
    -(2.0 * 6f64.sqrt()).ln() - g.ln() + g * (1.0 - (3.0 * g).ln())
}

/// Exact sums of 2-correlators over both asymptotic forms, `g = 1..=gmax`.
pub fn sum2corr_asymptotic_check(gmax: u32) -> Result<Vec<Sum2CorrRow>, AsymError> {
    if gmax < 2 {
        return Err(AsymError::Constraint("gmax must be at least 2".into()));
    }
    (1..=gmax)
        .map(|g| {
            let ln_exact = ln_rational(&sum_two_correlators(g)?);
            let (f1, f2) = (ln_sum2corr_df(g as f64), ln_sum2corr_stirling(g as f64));
            Ok(Sum2CorrRow {
                g,
                ln_exact,
                ln_double_factorial_form: f1,
                ln_stirling_form: f2,
                ratio: (ln_exact - f1).exp(),
                ratio_forms: (f1 - f2).exp(),
            })
        })
        .collect()
}

/// Growth regime of an asymptotic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LargeN,
    LargeG,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LargeN => "large-n",
            Regime::LargeG => "large-g",
        })
    }
}

/// Named parameters, parsed from `key=value` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse(s: &str) -> Result<Self, AsymError> {
        let mut map = BTreeMap::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| AsymError::BadParam { name: item.into(), msg: "expected key=value".into() })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(map))
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    fn raw(&self, key: &'static str) -> Result<&str, AsymError> {
        self.0.get(key).map(String::as_str).ok_or(AsymError::MissingParam(key))
    }

    pub fn f(&self, key: &'static str) -> Result<f64, AsymError> {
        let r = self.raw(key)?;
        r.parse().map_err(|_| AsymError::BadParam { name: key.into(), msg: format!("`{r}` is not a number") })
    }

    pub fn u(&self, key: &'static str) -> Result<u32, AsymError> {
        let r = self.raw(key)?;
        r.parse()
            .map_err(|_| AsymError::BadParam { name: key.into(), msg: format!("`{r}` is not a non-negative integer") })
    }

    fn i(&self, key: &'static str) -> Result<i64, AsymError> {
        let r = self.raw(key)?;
        r.parse().map_err(|_| AsymError::BadParam { name: key.into(), msg: format!("`{r}` is not an integer") })
    }

    /// Eight integers `a,b,c,d,s,t,u,v`, defaulting to the 2-correlator family.
    fn family(&self) -> Result<[i64; 8], AsymError> {
        const KEYS: [&str; 8] = ["a", "b", "c", "d", "s", "t", "u", "v"];
        let mut out = TWO_CORRELATOR_FAMILY;
        for (i, key) in KEYS.iter().enumerate() {
            if let Some(r) = self.0.get(*key) {
                out[i] = r.parse().map_err(|_| AsymError::BadParam {
                    name: key.to_string(),
                    msg: format!("`{r}` is not an integer"),
                })?;
            }
        }
        Ok(out)
    }
}

type LnFn = fn(&Params) -> Result<f64, AsymError>;

/// A registered asymptotic formula: log-value closure plus metadata.
pub struct AsymptoticForm {
    pub name: &'static str,
    pub description: &'static str,
    pub regime: Regime,
    pub params: &'static [&'static str],
    ln_value: LnFn,
    ln_exact: Option<LnFn>,
}

impl fmt::Debug for AsymptoticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticForm").field("name", &self.name).field("regime", &self.regime).finish()
    }
}

impl AsymptoticForm {
    pub fn ln_eval(&self, p: &Params) -> Result<f64, AsymError> {
        (self.ln_value)(p)
    }

    pub fn eval(&self, p: &Params) -> Result<f64, AsymError> {
        Ok(self.ln_eval(p)?.exp())
    }

    /// Decimal rendering in scientific notation, valid beyond `f64` range.
    pub fn render(&self, p: &Params, digits: usize) -> Result<String, AsymError> {
        Ok(format_ln(self.ln_eval(p)?, digits))
    }

    pub fn has_exact(&self) -> bool {
        self.ln_exact.is_some()
    }

    /// Log of the exact quantity the form approximates.
    pub fn ln_exact(&self, p: &Params) -> Result<f64, AsymError> {
        match self.ln_exact {
            Some(f) => f(p),
            None => Err(AsymError::NoExact(self.name.into())),
        }
    }
}

/// `exp(ln)` as `m.mmm…e±E` for arbitrary magnitude.
pub fn format_ln(ln: f64, digits: usize) -> String {
    if !ln.is_finite() {
        return if ln == f64::NEG_INFINITY { "0".into() } else { "nan".into() };
    }
    let l10 = ln / std::f64::consts::LN_10;
    let mut e = l10.floor();
    let mut m = 10f64.powf(l10 - e);
    let scale = 10f64.powi(digits as i32);
    if (m * scale).round() / scale >= 10.0 {
        m /= 10.0;
        e += 1.0;
    }
    format!("{:.*}e{}", digits, m, e as i64)
}

fn ln_a(g: u32) -> Result<f64, AsymError> {
    Ok(ln_rational(&a_g(g)?))
}

fn ln_kappa(g: u32) -> f64 {
    kappa_g(g).ln_abs()
}

fn ln_pi() -> f64 {
    PI.ln()
}

fn ab_consts(p: &Params) -> Result<crate::meanderconst::AbelianConstants, AsymError> {
    Ok(abelian_constants(p.u("g")?, None)?)
}

fn quad_consts(p: &Params) -> Result<crate::meanderconst::MeanderConstants, AsymError> {
    let (g, n) = (p.u("g")?, p.u("n")?);
    Ok(constants_with_volume(g, n, volume(g, n)?)?)
}

fn g_ge(p: &Params, min: u32) -> Result<f64, AsymError> {
    let g = p.u("g")?;
    if g < min {
        return Err(AsymError::Constraint(format!("g must be at least {min}")));
    }
    Ok(g as f64)
}

static CATALOG: &[AsymptoticForm] = &[
    AsymptoticForm {
        name: "meander-constant-large-n",
        description: "C_{g,n} ~ a_g^2/(8 pi^2 kappa_g) n^{1-5g/2} (32 e^2/(pi^2 n^2))^n",
        regime: Regime::LargeN,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.u("g")?, p.f("n")?);
            Ok(-(8.0f64).ln() - 2.0 * ln_pi() + 2.0 * ln_a(g)? - ln_kappa(g) - (2.5 * g as f64 - 1.0) * n.ln()
                + n * ((32.0f64).ln() + 2.0 - 2.0 * ln_pi() - 2.0 * n.ln()))
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.c_gn.ln_abs())),
    },
    AsymptoticForm {
        name: "meander-constant-large-g",
        description: "C_{g,n} ~ (1/32) sqrt(3/(2 pi)) (1/n!) (4/(3g))^{n-3/2} (2e/(3g))^{4g}",
        regime: Regime::LargeG,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (g_ge(p, 1)?, p.f("n")?);
            Ok(-(32.0f64).ln() + 0.5 * (3.0 / (2.0 * PI)).ln() - ln_gamma(n + 1.0)
                + (n - 1.5) * (4.0 / (3.0 * g)).ln()
                + 4.0 * g * (2.0 / (3.0 * g)).ln()
                + 4.0 * g)
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.c_gn.ln_abs())),
    },
    AsymptoticForm {
        name: "cyl1-large-n",
        description: "cyl_1(Q_{g,n}) ~ a_g n^{g-1/2} 4^n / sqrt(pi)",
        regime: Regime::LargeN,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.u("g")?, p.f("n")?);
            Ok(-0.5 * ln_pi() + ln_a(g)? + (g as f64 - 0.5) * n.ln() + n * 4f64.ln())
        },
        ln_exact: Some(|p| Ok(ln_rational(&cyl1_q(p.u("g")?, p.u("n")?)?))),
    },
    AsymptoticForm {
        name: "volume-large-n",
        description: "Vol Q_{g,n} ~ kappa_g n^{g/2} (pi^2/2)^n",
        regime: Regime::LargeN,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.u("g")?, p.f("n")?);
            Ok(ln_kappa(g) + g as f64 / 2.0 * n.ln() + n * (PI * PI / 2.0).ln())
        },
        ln_exact: Some(|p| Ok(volume(p.u("g")?, p.u("n")?)?.ln_abs())),
    },
    AsymptoticForm {
        name: "volume-large-g",
        description: "Vol Q_{g,n} ~ (4/pi) (16/3)^n (8/3)^{4g-4}",
        regime: Regime::LargeG,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.f("g")?, p.f("n")?);
            Ok((4.0 / PI).ln() + n * (16.0f64 / 3.0).ln() + (4.0 * g - 4.0) * (8.0f64 / 3.0).ln())
        },
        ln_exact: Some(|p| Ok(volume(p.u("g")?, p.u("n")?)?.ln_abs())),
    },
    AsymptoticForm {
        name: "cyl1-large-g",
        description: "cyl_1(Q_{g,n}) ~ sqrt(2/(3 pi g)) (16/3)^n (8/3)^{4g-4}",
        regime: Regime::LargeG,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (g_ge(p, 1)?, p.f("n")?);
            Ok(0.5 * (2.0 / (3.0 * PI * g)).ln() + n * (16.0f64 / 3.0).ln() + (4.0 * g - 4.0) * (8.0f64 / 3.0).ln())
        },
        ln_exact: Some(|p| Ok(ln_rational(&cyl1_q(p.u("g")?, p.u("n")?)?))),
    },
    AsymptoticForm {
        name: "cyl11-large-n",
        description: "cyl_{1,1}(Q_{g,n}) ~ (a_g^2/(pi kappa_g)) n^{3g/2-1} (32/pi^2)^n",
        regime: Regime::LargeN,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.u("g")?, p.f("n")?);
            Ok(-ln_pi() + 2.0 * ln_a(g)? - ln_kappa(g) + (1.5 * g as f64 - 1.0) * n.ln() + n * (32.0 / (PI * PI)).ln())
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.cyl11.ln_abs())),
    },
    AsymptoticForm {
        name: "cyl11-large-g",
        description: "cyl_{1,1}(Q_{g,n}) ~ (1/(6g)) (8/3)^{4g-4} (16/3)^n",
        regime: Regime::LargeG,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (g_ge(p, 1)?, p.f("n")?);
            Ok(-(6.0 * g).ln() + (4.0 * g - 4.0) * (8.0f64 / 3.0).ln() + n * (16.0f64 / 3.0).ln())
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.cyl11.ln_abs())),
    },
    AsymptoticForm {
        name: "p1-large-n",
        description: "p_1(Q_{g,n}) ~ (a_g/(sqrt(pi) kappa_g)) n^{(g-1)/2} (8/pi^2)^n",
        regime: Regime::LargeN,
        params: &["g", "n"],
        ln_value: |p| {
            let (g, n) = (p.u("g")?, p.f("n")?);
            Ok(-0.5 * ln_pi() + ln_a(g)? - ln_kappa(g) + (g as f64 - 1.0) / 2.0 * n.ln() + n * (8.0 / (PI * PI)).ln())
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.p1.ln_abs())),
    },
    AsymptoticForm {
        name: "p1-large-g",
        description: "p_1(Q_{g,n}) ~ sqrt(6 pi)/(12 sqrt(g))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(0.5 * (6.0 * PI).ln() - (12.0f64).ln() - 0.5 * g.ln())
        },
        ln_exact: Some(|p| Ok(quad_consts(p)?.p1.ln_abs())),
    },
    AsymptoticForm {
        name: "sep-nonsep-large-g",
        description: "c_sep/c_nonsep ~ sqrt(2/(3 pi g)) 4^{-g} for fixed n",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(0.5 * (2.0 / (3.0 * PI * g)).ln() - g * 4f64.ln())
        },
        ln_exact: Some(|p| Ok(ln_rational(&sep_nonsep_ratio(p.u("g")?, p.u("n")?)?))),
    },
    AsymptoticForm {
        name: "sep-nonsep-limit-large-g",
        description: "lim_n c_sep/c_nonsep ~ 2/sqrt(3 pi g) 4^{-g}",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(2f64.ln() - 0.5 * (3.0 * PI * g).ln() - g * 4f64.ln())
        },
        ln_exact: Some(|p| Ok(ln_rational(&sep_nonsep_limit(p.u("g")?)?))),
    },
    AsymptoticForm {
        name: "sep-nonsep-uniform-profile",
        description: "conjectural uniform profile f(t) = sqrt((6+2t)/(6+t)), t = n/g",
        regime: Regime::LargeG,
        params: &["t"],
        ln_value: |p| {
            let t = p.f("t")?;
            if t.is_infinite() {
                return Ok(0.5 * 2f64.ln());
            }
            if t < 0.0 {
                return Err(AsymError::Constraint("t must be non-negative".into()));
            }
            Ok(0.5 * ((6.0 + 2.0 * t) / (6.0 + t)).ln())
        },
        ln_exact: None,
    },
    AsymptoticForm {
        name: "abelian-volume-expansion",
        description: "Vol H_g = 4^{2-g} (1 - pi^2/(24 g) + O(g^-2))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok((2.0 - g) * 4f64.ln() + (1.0 - PI * PI / (24.0 * g)).ln())
        },
        ln_exact: Some(|p| Ok(ab_consts(p)?.vol_h.ln_abs())),
    },
    AsymptoticForm {
        name: "abelian-cyl1-expansion",
        description: "cyl_1(H_g) = 4^{1-g}/g (1 + 1/(2g) + O(g^-2))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok((1.0 - g) * 4f64.ln() - g.ln() + (1.0 + 0.5 / g).ln())
        },
        ln_exact: Some(|p| Ok(ln_rational(&cyl1_h(g_ge(p, 1)? as u32)))),
    },
    AsymptoticForm {
        name: "abelian-p1-expansion",
        description: "p_1(H_g) = (1/(4g)) (1 + (12 + pi^2)/(24 g) + O(g^-2))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(-(4.0 * g).ln() + (1.0 + (12.0 + PI * PI) / (24.0 * g)).ln())
        },
        ln_exact: Some(|p| Ok(ab_consts(p)?.p1_h.ln_abs())),
    },
    AsymptoticForm {
        name: "abelian-cyl11-expansion",
        description: "cyl_{1,1}(H_g) = 4^{-g}/g^2 (1 + (24 + pi^2)/(24 g) + O(g^-2))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(-g * 4f64.ln() - 2.0 * g.ln() + (1.0 + (24.0 + PI * PI) / (24.0 * g)).ln())
        },
        ln_exact: Some(|p| Ok(ab_consts(p)?.cyl11_h.ln_abs())),
    },
    AsymptoticForm {
        name: "abelian-meander-constant-expansion",
        description: "C_g^+ = g^{-3/2} (e/(4g))^{2g} (1 + (29 + pi^2)/(24 g) + O(g^-2)) / (4 sqrt(pi))",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(-(4.0f64).ln() - 0.5 * ln_pi() - 1.5 * g.ln() + 2.0 * g * (1.0 - (4.0 * g).ln())
                + (1.0 + (29.0 + PI * PI) / (24.0 * g)).ln())
        },
        ln_exact: Some(|p| Ok(ab_consts(p)?.c_g_plus.ln_abs())),
    },
    AsymptoticForm {
        name: "binomial-linear",
        description: "C(an+b, n+c) ~ a^{an+b+1/2} / ((a-1)^{(a-1)n+b+1/2} sqrt(2 pi n))",
        regime: Regime::LargeN,
        params: &["a", "b", "c", "n"],
        ln_value: |p| {
            let (a, b, n) = (p.i("a")? as f64, p.i("b")? as f64, p.f("n")?);
            if a < 2.0 {
                return Err(AsymError::Constraint("a must be at least 2".into()));
            }
            Ok((a * n + b + 0.5) * a.ln() - ((a - 1.0) * n + b + 0.5) * (a - 1.0).ln() - 0.5 * (2.0 * PI * n).ln())
        },
        ln_exact: Some(|p| {
            let (a, b, c, n) = (p.i("a")?, p.i("b")?, p.i("c")?, p.i("n")?);
            Ok(ln_bigint(&binomial(a * n + b, n + c)))
        }),
    },
    AsymptoticForm {
        name: "binomial-entropy",
        description: "C(n, pn) ~ e^{n H(p)} / sqrt(2 pi p (1-p) n)",
        regime: Regime::LargeN,
        params: &["n", "k"],
        ln_value: |p| {
            let (n, k) = (p.f("n")?, p.f("k")?);
            let q = k / n;
            Ok(n * entropy_h(q)? - 0.5 * (2.0 * PI * q * (1.0 - q) * n).ln())
        },
        ln_exact: Some(|p| Ok(ln_bigint(&binomial(p.i("n")?, p.i("k")?)))),
    },
    AsymptoticForm {
        name: "binomial-ratio-sum",
        description: "sum_k C(an+b,ck+d)/C(sn+t,uk+v) ~ 2^{(a-s)n+b-t} alpha sqrt(pi s/(2(a-s)a)) sqrt(n)",
        regime: Regime::LargeN,
        params: &["n", "a", "b", "c", "d", "s", "t", "u", "v"],
        ln_value: |p| {
            let f = p.family()?;
            let (num, den) = ([BinomTerm::new(f[0], f[1], f[2], f[3])], [BinomTerm::new(f[4], f[5], f[6], f[7])]);
            let alpha = validate(&num, &den)?.to_f64().unwrap_or(f64::NAN);
            Ok(ln_binom_rhs(&num, &den, alpha, p.f("n")?))
        },
        ln_exact: Some(|p| Ok(binom_ratio_sum(p.family()?, p.i("n")?)?.ln_exact)),
    },
    AsymptoticForm {
        name: "binomial-product-ratio-sum",
        description: "sum_k prod_i C(a_i n+b_i,c_i k+d_i)/prod_j C(s_j n+t_j,u_j k+v_j), here with l equal numerator and m equal denominator factors",
        regime: Regime::LargeN,
        params: &["n", "l", "m", "a", "b", "c", "d", "s", "t", "u", "v"],
        ln_value: |p| {
            let (num, den) = product_family(p)?;
            let alpha = validate(&num, &den)?.to_f64().unwrap_or(f64::NAN);
            Ok(ln_binom_rhs(&num, &den, alpha, p.f("n")?))
        },
        ln_exact: Some(|p| {
            let (num, den) = product_family(p)?;
            Ok(binom_ratio_sum_general(&num, &den, p.i("n")?)?.ln_exact)
        }),
    },
    AsymptoticForm {
        name: "binomial-ratio-local-limit",
        description: "C(an+b,ck+d)/C(sn+t,uk+v) at k = alpha n (1 + x/sqrt n)/2 ~ 2^{(a-s)n+b-t} exp(-(a-s)x^2/2) sqrt(s/a)",
        regime: Regime::LargeN,
        params: &["n", "x", "a", "b", "c", "d", "s", "t", "u", "v"],
        ln_value: |p| {
            let f = p.family()?;
            let (n, x) = (p.f("n")?, p.f("x")?);
            let (a, s) = (f[0] as f64, f[4] as f64);
            Ok(((a - s) * n + (f[1] - f[5]) as f64) * LN_2 - (a - s) * x * x / 2.0 + 0.5 * (s / a).ln())
        },
        ln_exact: Some(|p| {
            let f = p.family()?;
            let (n, x) = (p.f("n")?, p.f("x")?);
            let alpha = f[0] as f64 / f[2] as f64;
            let k = alpha * n / 2.0 * (1.0 + x / n.sqrt());
            Ok(ln_binom_real(f[0] as f64 * n + f[1] as f64, f[2] as f64 * k + f[3] as f64)
                - ln_binom_real(f[4] as f64 * n + f[5] as f64, f[6] as f64 * k + f[7] as f64))
        }),
    },
    AsymptoticForm {
        name: "binomial-ratio-tail-bound",
        description: "tail over |k - alpha n/2| >= alpha(1-eps)n/2 is O(eps a n exp(a n H(1-eps/2)))",
        regime: Regime::LargeN,
        params: &["n", "eps", "a", "b", "c", "d", "s", "t", "u", "v"],
        ln_value: |p| tail_bound(p.family()?[0], p.f("n")?, p.f("eps")?),
        ln_exact: Some(|p| tail_sum(p.family()?, p.i("n")?, p.f("eps")?)),
    },
    AsymptoticForm {
        name: "binomial-pair-sum",
        description: "sum_{k=1}^{n-1} C(n,k) C(3n-4,3k-2) ~ 2^{4n-4}/sqrt(6 pi n)",
        regime: Regime::LargeN,
        params: &["n"],
        ln_value: |p| {
            let n = p.f("n")?;
            Ok((4.0 * n - 4.0) * LN_2 - 0.5 * (6.0 * PI * n).ln())
        },
        ln_exact: Some(|p| {
            let n = p.i("n")?;
            let s = binom_ratio_sum_general(&[BinomTerm::new(1, 0, 1, 0), BinomTerm::new(3, -4, 3, -2)], &[], n)?;
            Ok(s.ln_exact)
        }),
    },
    AsymptoticForm {
        name: "dixon-sum",
        description: "sum_k C(n,k)^p ~ p^{-1/2} (2/pi)^{(p-1)/2} n^{-(p-1)/2} 2^{pn}",
        regime: Regime::LargeN,
        params: &["p", "n"],
        ln_value: |p| {
            let (q, n) = (p.f("p")?, p.f("n")?);
            Ok(-0.5 * q.ln() + (q - 1.0) / 2.0 * (2.0 / PI).ln() - (q - 1.0) / 2.0 * n.ln() + q * n * LN_2)
        },
        ln_exact: Some(|p| Ok(dixon_sum(p.u("p")? as usize, p.i("n")?)?.ln_exact)),
    },
    AsymptoticForm {
        name: "two-correlator-sum",
        description: "sum_k <tau_k tau_{3g-1-k}>_g ~ (sqrt 3/3) (2/3)^g / (2g+1)!!",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| Ok(ln_sum2corr_df(g_ge(p, 1)?)),
        ln_exact: Some(|p| Ok(ln_rational(&sum_two_correlators(p.u("g")?)?))),
    },
    AsymptoticForm {
        name: "two-correlator-sum-stirling",
        description: "sum_k <tau_k tau_{3g-1-k}>_g ~ (1/(2 sqrt 6)) (1/g) (e/(3g))^g",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| Ok(ln_sum2corr_stirling(g_ge(p, 1)?)),
        ln_exact: Some(|p| Ok(ln_rational(&sum_two_correlators(p.u("g")?)?))),
    },
    AsymptoticForm {
        name: "two-correlator-binomial-sum-stirling",
        description: "sum_k C(6g,2k+1)/C(3g-1,k) ~ (g!)^2/(2g)! 2^{5g} sqrt 3",
        regime: Regime::LargeG,
        params: &["g"],
        ln_value: |p| {
            let g = g_ge(p, 1)?;
            Ok(2.0 * ln_gamma(g + 1.0) - ln_gamma(2.0 * g + 1.0) + 5.0 * g * LN_2 + 0.5 * 3f64.ln())
        },
        ln_exact: Some(|p| Ok(binom_ratio_sum(TWO_CORRELATOR_FAMILY, p.i("g")?)?.ln_exact)),
    },
];

fn product_family(p: &Params) -> Result<(Vec<BinomTerm>, Vec<BinomTerm>), AsymError> {
    let f = p.family()?;
    let (l, m) = (p.u("l")? as usize, p.u("m")? as usize);
    Ok((vec![BinomTerm::new(f[0], f[1], f[2], f[3]); l], vec![BinomTerm::new(f[4], f[5], f[6], f[7]); m]))
}

/// Every registered form, in a fixed order.
pub fn catalog() -> &'static [AsymptoticForm] {
    CATALOG
}

/// Looks up a form by name.
pub fn evaluate_regime(name: &str) -> Result<&'static AsymptoticForm, AsymError> {
    CATALOG.iter().find(|f| f.name == name).ok_or_else(|| AsymError::UnknownForm(name.into()))
}

/// One row of an exact-vs-asymptotic comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub param: u32,
    pub ln_exact: f64,
    pub ln_asymptotic: f64,
    pub ratio: f64,
}

/// Evaluates `form` and its exact counterpart while `var` runs over `range`.
pub fn check_range(
    form: &AsymptoticForm,
    base: &Params,
    var: &'static str,
    range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<CheckRow>, AsymError> {
    if !form.has_exact() {
        return Err(AsymError::NoExact(form.name.into()));
    }
    range
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&v| {
            let p = base.clone().with(var, v);
            let (e, a) = (form.ln_exact(&p)?, form.ln_eval(&p)?);
            Ok(CheckRow { param: v, ln_exact: e, ln_asymptotic: a, ratio: (e - a).exp() })
        })
        .collect()
}

/// True when `|ratio - 1|` is non-increasing along the rows, allowing a
/// relative slack for rounding.
pub fn monotone_toward_one(rows: &[CheckRow]) -> bool {
    rows.windows(2).all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs() * (1.0 + 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanderconst::{vol_q0_closed, vol_q1_closed};

    #[test]
    fn a_g_values() {
        assert_eq!(a_g(0).unwrap(), rat(1, 8));
        assert_eq!(a_g(1).unwrap(), rat(7, 6));
        assert_eq!(a_g(2).unwrap(), rat(37, 9));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa_tilde(2), BigInt::from(98));
        assert_eq!(kappa_tilde(3), BigInt::from(19600));
        assert_eq!(kappa_tilde(4), BigInt::from(8824802));
        let k0 = kappa_g(0);
        assert_eq!((k0.coeff, k0.half_pi_exp), (rat(32, 1), -12));
        let k1 = kappa_g(1);
        assert_eq!((k1.coeff, k1.half_pi_exp), (rat(1, 3), 1));
        assert_eq!(kappa_g(1).to_string(), "1/3 * pi^(1/2)");
    }

    /// The printed π exponent of κ_g against exact genus-0 and genus-1 volumes.
    #[test]
    fn kappa_matches_exact_volumes() {
        for n in [10u32, 50, 200] {
            let v0 = vol_q0_closed(n).ln_abs();
            let a0 = ln_kappa(0) + n as f64 * (PI * PI / 2.0).ln();
            assert!((v0 - a0).abs() < 1e-9);
        }
        let ratio = |n: u32| {
            (vol_q1_closed(n).ln_abs() - ln_kappa(1) - 0.5 * (n as f64).ln() - n as f64 * (PI * PI / 2.0).ln()).exp()
        };
        // The genus-1 correction is of order n^{-1/2}.
        let devs: Vec<f64> = [50, 200, 800, 3200].iter().map(|&n| ratio(n) - 1.0).collect();
        assert!(devs.windows(2).all(|w| 0.0 < w[1] && w[1] < w[0]), "{devs:?}");
        let scaled = devs[3] * 3200f64.sqrt();
        assert!((0.5..0.65).contains(&scaled), "{devs:?}");
    }

    #[test]
    fn entropy_properties() {
        assert!((entropy_h(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(entropy_h(0.0).unwrap(), 0.0);
        assert!(entropy_h(1.5).is_err());
        for i in -99..=99 {
            let x = i as f64 / 100.0;
            let h = entropy_h(0.5 + x / 2.0).unwrap();
            assert!(h <= LN_2 - x * x / 2.0 + 1e-15, "x={x}");
            if x.abs() < 0.6 {
                assert!((h - entropy_series(x, 200)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binomial_sandwich_holds() {
        for n in (10..=1000).step_by(10) {
            for i in 1..10 {
                let k = (n * i / 10) as u64;
                let (lo, r) = binomial_sandwich(n as u64, k).unwrap();
                assert!(lo < r && r < 1.0, "n={n} k={k}: {lo} {r}");
            }
        }
    }

    #[test]
    fn binom_sum_family_at_2000() {
        let s = binom_ratio_sum(TWO_CORRELATOR_FAMILY, 2000).unwrap();
        assert!((s.ratio - 1.0).abs() < 0.02, "{}", s.ratio);
        assert_eq!(s.k_range, Some((0, 5999)));
    }

    #[test]
    fn binom_sum_exact_small() {
        // n = 1: C(6,1)/C(2,0) + C(6,3)/C(2,1) + C(6,5)/C(2,2) = 6 + 10 + 6
        assert_eq!(binom_ratio_sum(TWO_CORRELATOR_FAMILY, 1).unwrap().exact, rat(22, 1));
        let direct: Rational = (0..=8).map(|k| int(binomial(18, 2 * k + 1)) / int(binomial(8, k))).sum();
        assert_eq!(binom_ratio_sum(TWO_CORRELATOR_FAMILY, 3).unwrap().exact, direct);
    }

    #[test]
    fn binom_sum_constraints() {
        assert!(binom_ratio_sum([6, 0, 2, 1, 3, -1, 2, 0], 10).is_err());
        assert!(binom_ratio_sum([3, 0, 1, 0, 6, 0, 2, 0], 10).is_err());
        assert!(binom_ratio_sum([1, 0, 2, 0, 1, 0, 2, 0], 10).is_err());
    }

    #[test]
    fn dixon_sums() {
        for n in 1..=200 {
            assert_eq!(dixon_sum(2, n).unwrap().exact, int(binomial(2 * n, n)));
        }
        for n in [1, 5, 30] {
            assert_eq!(dixon_sum(1, n).unwrap().exact, int(BigInt::one() << n as usize));
            assert!((dixon_sum(1, n).unwrap().ratio - 1.0).abs() < 1e-12);
        }
        let d = dixon_sum(2, 2000).unwrap();
        assert!((d.ratio - 1.0).abs() < 1e-3);
        let s3 = dixon_sum(3, 500).unwrap();
        assert!((s3.ratio - 1.0).abs() < 0.01, "{}", s3.ratio);
    }

    #[test]
    fn pair_sum_example() {
        let f = evaluate_regime("binomial-pair-sum").unwrap();
        let p = Params::default().with("n", 400);
        let r = (f.ln_exact(&p).unwrap() - f.ln_eval(&p).unwrap()).exp();
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }

    #[test]
    fn local_limit_improves() {
        let d1 = local_limit_check(TWO_CORRELATOR_FAMILY, 100.0, 0.05, 41).unwrap();
        let d2 = local_limit_check(TWO_CORRELATOR_FAMILY, 10_000.0, 0.05, 41).unwrap();
        let d3 = local_limit_check(TWO_CORRELATOR_FAMILY, 1_000_000.0, 0.05, 41).unwrap();
        assert!(d3 < d2 && d2 < d1, "{d1} {d2} {d3}");
        assert!(d3 < 0.05, "{d3}");
    }

    #[test]
    fn tail_is_below_bound() {
        for n in [50, 200, 800] {
            for eps in [0.1, 0.3, 0.6] {
                let t = tail_sum(TWO_CORRELATOR_FAMILY, n, eps).unwrap();
                let b = tail_bound(6, n as f64, eps).unwrap();
                assert!(t <= b, "n={n} eps={eps}: {t} > {b}");
            }
        }
    }

    #[test]
    fn two_correlator_sums() {
        let rows = sum2corr_asymptotic_check(30).unwrap();
        assert_eq!(rows.len(), 30);
        assert!((rows[29].ratio - 1.0).abs() < 0.1, "{}", rows[29].ratio);
        let dev: Vec<f64> = rows[..15].iter().map(|r| (r.ratio - 1.0).abs()).collect();
        assert!(dev.windows(2).all(|w| w[1] <= w[0]), "{dev:?}");
        assert!(rows.windows(2).all(|w| w[0].ratio_forms < w[1].ratio_forms && w[1].ratio_forms < 1.0));
        assert!(sum2corr_asymptotic_check(1).is_err());
        let far = (ln_sum2corr_df(5000.0) - ln_sum2corr_stirling(5000.0)).exp();
        assert!((far - 1.0).abs() < 1e-3, "{far}");
    }

    #[test]
    fn catalog_is_complete_and_unique() {
        let names: Vec<&str> = catalog().iter().map(|f| f.name).collect();
        let expected = [
            "meander-constant-large-n",
            "meander-constant-large-g",
            "cyl1-large-n",
            "volume-large-n",
            "volume-large-g",
            "cyl1-large-g",
            "cyl11-large-n",
            "cyl11-large-g",
            "p1-large-n",
            "p1-large-g",
            "sep-nonsep-large-g",
            "sep-nonsep-limit-large-g",
            "sep-nonsep-uniform-profile",
            "abelian-volume-expansion",
            "abelian-cyl1-expansion",
            "abelian-p1-expansion",
            "abelian-cyl11-expansion",
            "abelian-meander-constant-expansion",
            "binomial-linear",
            "binomial-entropy",
            "binomial-ratio-sum",
            "binomial-product-ratio-sum",
            "binomial-ratio-local-limit",
            "binomial-ratio-tail-bound",
            "binomial-pair-sum",
            "dixon-sum",
            "two-correlator-sum",
            "two-correlator-sum-stirling",
            "two-correlator-binomial-sum-stirling",
        ];
        assert_eq!(names, expected);
        assert!(evaluate_regime("nope").is_err());
    }

    #[test]
    fn catalog_examples() {
        let p1 = evaluate_regime("abelian-p1-expansion").unwrap().eval(&Params::default().with("g", 10)).unwrap();
        assert!((p1 - 0.027_278).abs() < 1e-5, "{p1}");
        let f = evaluate_regime("sep-nonsep-uniform-profile").unwrap();
        assert!((f.eval(&Params::default().with("t", 0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.eval(&Params::default().with("t", "inf")).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.eval(&Params::default().with("t", 1e12)).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let s = evaluate_regime("sep-nonsep-large-g").unwrap().eval(&Params::default().with("g", 5)).unwrap();
        assert!((s - (2.0 / (15.0 * PI)).sqrt() / 1024.0).abs() < 1e-15);
        let huge = evaluate_regime("volume-large-g").unwrap();
        let p = Params::default().with("g", 1000).with("n", 0);
        assert!(huge.eval(&p).unwrap().is_infinite());
        assert!(huge.render(&p, 4).unwrap().contains('e'));
    }

    #[test]
    fn rendering() {
        assert_eq!(format_ln(1000f64.ln(), 3), "1.000e3");
        assert_eq!(format_ln(0.5f64.ln(), 2), "5.00e-1");
        assert_eq!(format_ln(f64::NEG_INFINITY, 2), "0");
    }

    #[test]
    fn params_parse() {
        let p = Params::parse("g=2, n=10").unwrap();
        assert_eq!(p.u("g").unwrap(), 2);
        assert!(matches!(p.u("x"), Err(AsymError::MissingParam("x"))));
        assert!(Params::parse("oops").is_err());
    }

    #[test]
    fn meander_constant_converges_for_small_genus() {
        for g in [0u32, 1] {
            let f = evaluate_regime("meander-constant-large-n").unwrap();
            let rows = check_range(f, &Params::default().with("g", g), "n", 10..=40).unwrap();
            assert!(monotone_toward_one(&rows), "g={g}: {rows:?}");
            assert!((rows.last().unwrap().ratio - 1.0).abs() < 0.1, "g={g}: {}", rows.last().unwrap().ratio);
        }
    }

    #[test]
    fn p1_expansion_residual_bounded() {
        let f = evaluate_regime("abelian-volume-expansion").unwrap();
        let mut worst: f64 = 0.0;
        for g in 5..=50u32 {
            let gf = g as f64;
            let vol = f.eval(&Params::default().with("g", g)).unwrap();
            let p1 = crate::exactval::rational_to_f64(&cyl1_h(g)) / vol;
            let r = (p1 * 4.0 * gf - 1.0 - (12.0 + PI * PI) / (24.0 * gf)) * gf * gf;
            worst = worst.max(r.abs());
        }
        assert!(worst < 10.0, "{worst}");
    }
}
