//! Face counts of cyclic polytopes and the bounds they imply on the number
//! of accessible lasso models.
//!
//! Exact counts use arbitrary-precision integers. Asymptotic constants are
//! evaluated in log space since they involve `x^x` terms.

use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::AsymptoticParams;

/// `C(a, b)`, zero when `b < 0` or `b > a`.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if a < 0 || b < 0 || b > a {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(a as u64), BigUint::from(b as u64))
}

fn check_cyclic_dims(d: usize, v: usize) -> Result<()> {
    if d == 0 || v < d + 1 {
        return Err(Error::InvalidDims(format!("cyclic polytope needs d >= 1 and v >= d + 1, got d = {d}, v = {v}")));
    }
    Ok(())
}

/// Number of `k`-dimensional faces of the cyclic polytope with `v` vertices
/// in dimension `d`:
///
/// ```text
/// f_k(d, v) = (v - δ(v-k-2)) / (v-k-1) * Σ_{j=0}^{⌊d/2⌋} C(v-1-j, k+1-j) C(v-k-1, 2j-k-1+δ)
/// ```
///
/// with `δ = d mod 2`. The division is exact; a remainder is reported as an
/// error rather than rounded.
pub fn cyclic_face_count(d: usize, v: usize, k: usize) -> Result<BigUint> {
    check_cyclic_dims(d, v)?;
    if k >= d {
        return Err(Error::InvalidDims(format!("face dimension k = {k} must be below d = {d}")));
    }
    let (d, v, k) = (d as i64, v as i64, k as i64);
    let delta = d % 2;
    let sum = (0..=d / 2).fold(BigUint::zero(), |acc, j| {
        acc + binomial(v - 1 - j, k + 1 - j) * binomial(v - k - 1, 2 * j - k - 1 + delta)
    });
    let numerator = BigUint::from((v - delta * (v - k - 2)) as u64) * sum;
    let (quotient, remainder) = numerator.div_rem(&BigUint::from((v - k - 1) as u64));
    if !remainder.is_zero() {
        return Err(Error::DomainError(format!("face count f_{k}({d}, {v}) is not an integer")));
    }
    Ok(quotient)
}

/// Face counts `(f_0, ..., f_{d-1})` of a polytope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FVector {
    pub d: usize,
    pub v: usize,
    #[serde(serialize_with = "serialize_biguints")]
    pub counts: Vec<BigUint>,
}

impl FVector {
    pub fn cyclic(d: usize, v: usize) -> Result<Self> {
        let counts = (0..d).map(|k| cyclic_face_count(d, v, k)).collect::<Result<_>>()?;
        Ok(Self { d, v, counts })
    }

    /// Number of nonempty proper faces.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// `Σ (-1)^k f_k == 1 - (-1)^d`.
    pub fn satisfies_euler(&self) -> bool {
        let (even, odd) = self.counts.iter().enumerate().fold(
            (BigUint::zero(), BigUint::zero()),
            |(e, o), (k, f)| if k % 2 == 0 { (e + f, o) } else { (e, o + f) },
        );
        if self.d % 2 == 0 {
            even == odd
        } else {
            even == odd + BigUint::from(2u8)
        }
    }
}

fn serialize_biguints<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Upper bound on the number of accessible models of size `k`: `f_{k-1}(n, 2p)`.
pub fn accessible_bound_size_k(n: usize, p: usize, k: usize) -> Result<BigUint> {
    if k == 0 || k > n {
        return Err(Error::InvalidDims(format!("model size k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    cyclic_face_count(n, 2 * p, k - 1)
}

/// Natural log of the bound on the total face count of a `d`-polytope with
/// `v >= 2d` vertices:
/// `2e(d+1) (2e(v - ⌊d/2⌋) / ⌈d/2⌉)^⌊d/2⌋`.
pub fn total_face_bound_ln(d: usize, v: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDims("d must be at least 1".into()));
    }
    if v < 2 * d {
        return Err(Error::HypothesisViolated(format!("total face bound needs v >= 2d, got d = {d}, v = {v}")));
    }
    let floor = (d / 2) as f64;
    let ceil = d.div_ceil(2) as f64;
    let base = 2.0 * std::f64::consts::E * (v as f64 - floor) / ceil;
    Ok((2.0 * std::f64::consts::E * (d as f64 + 1.0)).ln() + floor * base.ln())
}

pub fn total_face_bound(d: usize, v: usize) -> Result<f64> {
    total_face_bound_ln(d, v).map(f64::exp)
}

/// `Σ_{k=0}^{n} 2^k C(p, k)`, the count of all signed models of size at most `n`.
pub fn naive_model_bound(n: usize, p: usize) -> BigUint {
    (0..=n).fold(BigUint::zero(), |acc, k| acc + (BigUint::one() << k) * binomial(p as i64, k as i64))
}

/// `x ln x` with a domain check on the base.
fn xlogx(x: f64, what: &str) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::DomainError(format!("base {what} = {x} must be positive")));
    }
    Ok(x * x.ln())
}

/// Log of the exponential growth constant `C(rho, kappa, eps)` bounding the
/// probability that a true model of density `kappa` is accessible.
pub fn growth_constant_ln(params: &AsymptoticParams) -> Result<f64> {
    let AsymptoticParams { rho, kappa, epsilon: e } = *params;
    if !(kappa > 0.5 && kappa < 1.0) {
        return Err(Error::DomainError(format!("kappa must lie in (1/2, 1), got {kappa}")));
    }
    if !(rho > kappa) {
        return Err(Error::DomainError(format!("rho must exceed kappa, got rho = {rho}, kappa = {kappa}")));
    }
    // first binomial: C((2rho - 1/2 + e)n, (kappa - 1/2 + e)n)
    let first = xlogx(2.0 * rho - 0.5 + e, "2rho-1/2+eps")?
        - xlogx(kappa - 0.5 + e, "kappa-1/2+eps")?
        - xlogx(2.0 * rho - kappa, "2rho-kappa")?;
    // second binomial: C((2rho - kappa + e)n, (1 - kappa + e)n)
    let second = xlogx(2.0 * rho - kappa + e, "2rho-kappa+eps")?
        - xlogx(1.0 - kappa + e, "1-kappa+eps")?
        - xlogx(2.0 * rho - 1.0, "2rho-1")?;
    // denominator: 2^(kappa - e) C((rho - e)n, (kappa - e)n)
    let denom = (kappa - e) * std::f64::consts::LN_2 + xlogx(rho - e, "rho-eps")?
        - xlogx(kappa - e, "kappa-eps")?
        - xlogx(rho - kappa, "rho-kappa")?;
    Ok(first + second - denom)
}

/// The base `C(rho, kappa, eps)`; the accessibility probability decays like
/// `sqrt(n) C^n` when it is below one.
pub fn growth_constant(params: &AsymptoticParams) -> Result<f64> {
    growth_constant_ln(params).map(f64::exp)
}

/// Parses the shortest decimal representation of `x` as an exact rational.
fn decimal_rational(x: f64) -> Result<BigRational> {
    let text = format!("{x:e}");
    let (mantissa, exponent) = text.split_once('e').expect("exponent format");
    let exponent = i32::from_str(exponent).expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let frac_len = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
    let mut value = BigRational::from_integer(digits.parse().expect("decimal digits"));
    let shift = exponent - frac_len;
    let ten = BigRational::from_integer(10.into());
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    value = if shift >= 0 { value * scale } else { value / scale };
    Ok(if negative { -value } else { value })
}

/// Exact `kappa / (kappa - 1/2)`.
pub fn rho_threshold_exact(kappa: &BigRational) -> Result<BigRational> {
    let half = BigRational::new(1.into(), 2.into());
    if *kappa <= half {
        return Err(Error::DomainError(format!("kappa must exceed 1/2, got {kappa}")));
    }
    Ok(kappa / (kappa - half))
}

/// `kappa / (kappa - 1/2)`, the aspect ratio above which large true models
/// are inaccessible with probability tending to one.
///
/// Evaluated exactly on the decimal value of `kappa`, so `0.6` gives `6.0`.
pub fn rho_threshold(kappa: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.5 {
        return Err(Error::DomainError(format!("kappa must exceed 1/2, got {kappa}")));
    }
    let exact = rho_threshold_exact(&decimal_rational(kappa)?)?;
    exact.to_f64().ok_or_else(|| Error::DomainError("threshold not representable".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct BallSizeBound {
    /// Hamming radius `eps n / ln n`.
    pub radius: f64,
    /// `ln((2p)^radius)`.
    pub log_bound: f64,
    /// `2 eps n`, reported when `p >= n`; the bound `(2p)^radius <= e^{2 eps n}`
    /// holds whenever `2p <= n^2`.
    pub log_simplified: Option<f64>,
}

impl BallSizeBound {
    pub fn bound(&self) -> f64 {
        self.log_bound.exp()
    }
}

/// Size bound `(2p)^{eps n / ln n}` for the signed models within Hamming
/// distance `eps n / ln n` of a given model.
pub fn ball_size_bound(p: usize, n: usize, epsilon: f64) -> Result<BallSizeBound> {
    if n < 2 {
        return Err(Error::InvalidDims(format!("n must be at least 2, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::DomainError(format!("epsilon must be positive, got {epsilon}")));
    }
    let nf = n as f64;
    let radius = epsilon * nf / nf.ln();
    let log_bound = radius * (2.0 * p as f64).ln();
    let log_simplified = (p >= n).then(|| 2.0 * epsilon * nf);
    Ok(BallSizeBound { radius, log_bound, log_simplified })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundComparison {
    pub rho: f64,
    pub n: usize,
    pub p: usize,
    /// `sqrt(4e(2rho - 1/2))`, per-observation growth of the face-count bound.
    pub refined_base: f64,
    /// `2 rho e`, per-observation growth of the naive count.
    pub naive_base: f64,
    pub base_ratio: f64,
    #[serde(serialize_with = "serialize_biguint")]
    pub naive_bound: BigUint,
    /// Total accessible-model bound `2e(n+1)(2e(2p - ⌊n/2⌋)/⌈n/2⌉)^⌊n/2⌋`.
    pub accessible_bound: f64,
    pub accessible_bound_ln: f64,
    pub naive_bound_ln: f64,
}

/// Compares the face-count bound on accessible models with the naive count
/// at `p = round(rho n)`.
pub fn bound_comparison_report(rho: f64, n: usize) -> Result<BoundComparison> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::DomainError(format!("rho must be at least 1, got {rho}")));
    }
    if n == 0 {
        return Err(Error::InvalidDims("n must be at least 1".into()));
    }
    let p = (rho * n as f64).round() as usize;
    let e = std::f64::consts::E;
    let refined_base = (4.0 * e * (2.0 * rho - 0.5)).sqrt();
    let naive_base = 2.0 * rho * e;
    let naive_bound = naive_model_bound(n, p);
    let accessible_bound_ln = total_face_bound_ln(n, 2 * p)?;
    Ok(BoundComparison {
        rho,
        n,
        p,
        refined_base,
        naive_base,
        base_ratio: refined_base / naive_base,
        naive_bound_ln: biguint_ln(&naive_bound),
        naive_bound,
        accessible_bound: accessible_bound_ln.exp(),
        accessible_bound_ln,
    })
}

/// Natural log of a positive big integer, robust to values beyond `f64`.
pub fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
