//! Truncated expansions in fractional powers of `q` (and half-integral powers
//! of `ζ = e(z)`) with exact rational coefficients.
//!
//! Exponents are integers over a fixed denominator `D`; `prec` is the scaled
//! exponent below which every coefficient is known. Arithmetic propagates
//! `prec` so that results never claim more than their inputs justify.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("leading coefficient vanishes below the precision bound")]
    NotInvertible,
    #[error("Eisenstein series of weight {0} is not provided (use 4 or 6)")]
    UnsupportedWeight(u32),
    #[error("precision must be at least {min}, got {got}")]
    Precision { min: i64, got: i64 },
    #[error("truncation tail {tail:e} exceeds tolerance {tol:e}")]
    TailTooLarge { tail: f64, tol: f64 },
    #[error("imaginary part of τ must be positive")]
    NotInUpperHalfPlane,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Σ c_e q^{e/D}` known for `e < prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracQSeries {
    denom: u64,
    coeffs: BTreeMap<i64, BigRational>,
    prec: i64,
}

impl FracQSeries {
    pub fn zero(denom: u64, prec: i64) -> Self {
        assert!(denom > 0);
        FracQSeries { denom, coeffs: BTreeMap::new(), prec }
    }

    /// Builds from scaled exponents; terms at or beyond `prec` are dropped.
    pub fn from_terms(
        denom: u64,
        prec: i64,
        terms: impl IntoIterator<Item = (i64, BigRational)>,
    ) -> Self {
        let mut s = Self::zero(denom, prec);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// `1 + O(q^{q_prec})`.
    pub fn one(q_prec: i64) -> Self {
        Self::from_terms(1, q_prec, [(0, rat(1))])
    }

    /// `c·q^{e/D}` with precision `prec` (scaled).
    pub fn monomial(denom: u64, e: i64, c: BigRational, prec: i64) -> Self {
        Self::from_terms(denom, prec, [(e, c)])
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// Scaled precision bound.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, BigRational> {
        &self.coeffs
    }

    /// Coefficient of `q^{e/D}`; `None` at or beyond the precision bound.
    pub fn coeff(&self, e: i64) -> Option<BigRational> {
        (e < self.prec).then(|| self.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Coefficient of `q^x` for a rational exponent `x = num/den`.
    pub fn coeff_at(&self, num: i64, den: u64) -> Option<BigRational> {
        let scaled = num as i128 * self.denom as i128;
        if scaled % den as i128 != 0 {
            return (BigRational::new(num.into(), den.into())
                < BigRational::new(self.prec.into(), self.denom.into()))
            .then(BigRational::zero);
        }
        self.coeff((scaled / den as i128) as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest exponent with a nonzero coefficient, or `prec` for zero.
    pub fn valuation(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(self.prec)
    }

    fn add_term(&mut self, e: i64, c: BigRational) {
        if e >= self.prec || c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    /// The same series over a denominator that is a multiple of the current
    /// one.
    pub fn with_denom(&self, denom: u64) -> Self {
        assert_eq!(denom % self.denom, 0, "denominator can only be refined");
        let s = (denom / self.denom) as i64;
        FracQSeries {
            denom,
            coeffs: self.coeffs.iter().map(|(&e, c)| (e * s, c.clone())).collect(),
            prec: self.prec * s,
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let d = arith::lcm(a.denom, b.denom);
        (a.with_denom(d), b.with_denom(d))
    }

    /// Drops everything at or beyond a smaller precision.
    pub fn truncate(&self, prec: i64) -> Self {
        let prec = prec.min(self.prec);
        FracQSeries {
            denom: self.denom,
            coeffs: self.coeffs.range(..prec).map(|(&e, c)| (e, c.clone())).collect(),
            prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let mut out = Self::zero(a.denom, a.prec.min(b.prec));
        for (&e, c) in a.coeffs.iter().chain(b.coeffs.iter()) {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.denom, self.prec);
        }
        FracQSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&e, x)| (e, x * c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiplication by `q^{e/D}`.
    pub fn shift(&self, e: i64) -> Self {
        FracQSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&k, x)| (k + e, x.clone())).collect(),
            prec: self.prec + e,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let prec = (a.prec + b.valuation()).min(b.prec + a.valuation());
        let mut out = Self::zero(a.denom, prec);
        for (&ea, ca) in &a.coeffs {
            for (&eb, cb) in b.coeffs.range(..prec - ea) {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::from_terms(self.denom, i64::MAX / 4, [(0, rat(1))]);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `1/self`, for a series whose leading term lies below the precision.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let v = self.valuation();
        if self.is_zero() || v >= self.prec {
            return Err(SeriesError::NotInvertible);
        }
        let unit = self.shift(-v);
        let rel = unit.prec;
        let c0_inv = unit.coeffs[&0].recip();
        let mut inv: BTreeMap<i64, BigRational> = BTreeMap::new();
        for e in 0..rel {
            let mut acc = if e == 0 { rat(1) } else { BigRational::zero() };
            if e > 0 {
                for (&k, c) in unit.coeffs.range(1..=e) {
                    if let Some(x) = inv.get(&(e - k)) {
                        acc -= c * x;
                    }
                }
            }
            let x = acc * &c0_inv;
            if !x.is_zero() {
                inv.insert(e, x);
            }
        }
        Ok(FracQSeries { denom: self.denom, coeffs: inv, prec: rel }.shift(-v))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.inverse()?))
    }

    /// `Σ c_e e(eτ/D)` with a crude estimate of the truncation tail.
    ///
    /// The tail assumes `|c_e| ≤ C·(1 + e/D)^12` with `C` fitted to the
    /// stored coefficients, and sums that majorant from `prec` onwards. It is a
    /// heuristic, adequate for the moderate weights used here.
    pub fn numeric_eval(&self, tau: Complex64) -> Result<(Complex64, f64), SeriesError> {
        if tau.im <= 0.0 {
            return Err(SeriesError::NotInUpperHalfPlane);
        }
        let d = self.denom as f64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut c_fit: f64 = 0.0;
        for (&e, c) in &self.coeffs {
            let x = e as f64 / d;
            let cf = c.to_f64().unwrap_or(f64::NAN);
            value += cf * (Complex64::new(0.0, std::f64::consts::TAU * x) * tau).exp();
            c_fit = c_fit.max(cf.abs() / (1.0 + x.abs()).powi(GROWTH));
        }
        let tail = growth_tail(c_fit, self.prec as f64 / d, 1.0 / d, tau.im, |_| 1.0);
        Ok((value, tail))
    }

    /// Like [`FracQSeries::numeric_eval`] but fails when the tail estimate
    /// exceeds `tol`.
    pub fn numeric_eval_checked(&self, tau: Complex64, tol: f64) -> Result<Complex64, SeriesError> {
        let (v, tail) = self.numeric_eval(tau)?;
        if tail > tol {
            return Err(SeriesError::TailTooLarge { tail, tol });
        }
        Ok(v)
    }
}

const GROWTH: i32 = 12;

/// `C·Σ_{x ≥ start, step} (1+x)^12 e^{-2πx·im} w(x)` until terms are
/// negligible.
fn growth_tail(c: f64, start: f64, step: f64, im: f64, w: impl Fn(f64) -> f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut x = start.max(0.0);
    for _ in 0..1_000_000 {
        let t = c * (1.0 + x).powi(GROWTH) * (-std::f64::consts::TAU * x * im).exp() * w(x);
        total += t;
        if x > start + 1.0 && t < total * 1e-18 {
            break;
        }
        x += step;
    }
    total
}

impl Serialize for FracQSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            denom: u64,
            prec: i64,
            entries: Vec<(i64, String, String)>,
        }
        Repr {
            denom: self.denom,
            prec: self.prec,
            entries: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e, c.numer().to_string(), c.denom().to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

/// `Σ c(e, r) q^{e/D} ζ^{r/2}` known for `e < prec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiQZSeries {
    denom: u64,
    coeffs: BTreeMap<(i64, i64), BigRational>,
    prec: i64,
}

impl JacobiQZSeries {
    pub fn zero(denom: u64, prec: i64) -> Self {
        assert!(denom > 0);
        JacobiQZSeries { denom, coeffs: BTreeMap::new(), prec }
    }

    pub fn from_terms(
        denom: u64,
        prec: i64,
        terms: impl IntoIterator<Item = ((i64, i64), BigRational)>,
    ) -> Self {
        let mut s = Self::zero(denom, prec);
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Keys are `(scaled q exponent, twice the ζ exponent)`.
    pub fn coeffs(&self) -> &BTreeMap<(i64, i64), BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, e: i64, r2: i64) -> Option<BigRational> {
        (e < self.prec)
            .then(|| self.coeffs.get(&(e, r2)).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> i64 {
        self.coeffs.keys().next().map(|k| k.0).unwrap_or(self.prec)
    }

    fn add_term(&mut self, k: (i64, i64), c: BigRational) {
        if k.0 >= self.prec || c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn with_denom(&self, denom: u64) -> Self {
        assert_eq!(denom % self.denom, 0, "denominator can only be refined");
        let s = (denom / self.denom) as i64;
        JacobiQZSeries {
            denom,
            coeffs: self.coeffs.iter().map(|(&(e, r), c)| ((e * s, r), c.clone())).collect(),
            prec: self.prec * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = arith::lcm(self.denom, other.denom);
        let (a, b) = (self.with_denom(d), other.with_denom(d));
        let mut out = Self::zero(d, a.prec.min(b.prec));
        for (&k, c) in a.coeffs.iter().chain(b.coeffs.iter()) {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.denom, self.prec);
        for (&k, x) in &self.coeffs {
            out.add_term(k, x * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = arith::lcm(self.denom, other.denom);
        let (a, b) = (self.with_denom(d), other.with_denom(d));
        let prec = (a.prec + b.valuation()).min(b.prec + a.valuation());
        let mut out = Self::zero(d, prec);
        for (&(ea, ra), ca) in &a.coeffs {
            for (&(eb, rb), cb) in &b.coeffs {
                if ea + eb < prec {
                    out.add_term((ea + eb, ra + rb), ca * cb);
                }
            }
        }
        out
    }

    /// Product with a series in `q` alone.
    pub fn mul_q(&self, f: &FracQSeries) -> Self {
        let lifted = JacobiQZSeries {
            denom: f.denom(),
            coeffs: f.coeffs().iter().map(|(&e, c)| ((e, 0), c.clone())).collect(),
            prec: f.prec(),
        };
        self.mul(&lifted)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::from_terms(self.denom, i64::MAX / 4, [((0, 0), rat(1))]);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `z ↦ −z`.
    pub fn reflect(&self) -> Self {
        JacobiQZSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&(e, r), c)| ((e, -r), c.clone())).collect(),
            prec: self.prec,
        }
    }

    /// `Σ c e(eτ/D) e(r z/2)` with the crude tail of
    /// [`FracQSeries::numeric_eval`], applied to `Σ_r |c(e, r)||ζ^{r/2}|`.
    pub fn numeric_eval(&self, tau: Complex64, z: Complex64) -> Result<(Complex64, f64), SeriesError> {
        if tau.im <= 0.0 {
            return Err(SeriesError::NotInUpperHalfPlane);
        }
        let d = self.denom as f64;
        let i2pi = Complex64::new(0.0, std::f64::consts::TAU);
        let mut value = Complex64::new(0.0, 0.0);
        let mut weights: BTreeMap<i64, f64> = BTreeMap::new();
        let mut r_fit: f64 = 0.0;
        for (&(e, r), c) in &self.coeffs {
            let x = e as f64 / d;
            let cf = c.to_f64().unwrap_or(f64::NAN);
            let zeta = (i2pi * z * (r as f64 / 2.0)).exp();
            value += cf * (i2pi * tau * x).exp() * zeta;
            *weights.entry(e).or_default() += cf.abs();
            if x > 0.0 {
                r_fit = r_fit.max((r as f64 / 2.0).powi(2) / x);
            }
        }
        let c_fit = weights
            .iter()
            .map(|(&e, w)| w / (1.0 + (e as f64 / d).abs()).powi(GROWTH))
            .fold(0.0, f64::max);
        // |ζ|^{±r/2} with |r/2| ≲ √(r_fit·x) beyond the stored range
        let zw = |x: f64| (std::f64::consts::TAU * z.im.abs() * (r_fit * x).sqrt()).exp();
        let tail = growth_tail(c_fit, self.prec as f64 / d, 1.0 / d, tau.im, zw);
        Ok((value, tail))
    }
}

impl Serialize for JacobiQZSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            denom: u64,
            prec: i64,
            entries: Vec<(i64, i64, String, String)>,
        }
        Repr {
            denom: self.denom,
            prec: self.prec,
            entries: self
                .coeffs
                .iter()
                .map(|(&(e, r), c)| (e, r, c.numer().to_string(), c.denom().to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

/// `∏_{n ≥ 1} (1 − qⁿ)` as integers, for exponents `< len`.
fn euler_product(len: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); len];
    if len == 0 {
        return v;
    }
    v[0] = BigInt::one();
    for n in 1..len {
        for k in (n..len).rev() {
            let t = v[k - n].clone();
            v[k] -= t;
        }
    }
    v
}

/// `η = q^{1/24} ∏ (1 − qⁿ)`, known for `q`-exponents `< 1/24 + q_prec`.
pub fn eta(q_prec: i64) -> Result<FracQSeries, SeriesError> {
    if q_prec < 1 {
        return Err(SeriesError::Precision { min: 1, got: q_prec });
    }
    let prod = euler_product(q_prec as usize);
    Ok(FracQSeries::from_terms(
        24,
        24 * q_prec + 1,
        prod.into_iter()
            .enumerate()
            .map(|(k, c)| (1 + 24 * k as i64, BigRational::from_integer(c))),
    ))
}

/// `η^k` computed from the Euler product directly, known for `q`-exponents
/// `< k/24 + q_prec`.
pub fn eta_power(k: u32, q_prec: i64) -> Result<FracQSeries, SeriesError> {
    if q_prec < 1 {
        return Err(SeriesError::Precision { min: 1, got: q_prec });
    }
    let len = q_prec as usize;
    let base = euler_product(len);
    let mut acc = vec![BigInt::zero(); len];
    acc[0] = BigInt::one();
    for _ in 0..k {
        let mut next = vec![BigInt::zero(); len];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().take(len - i).enumerate() {
                if !b.is_zero() {
                    next[i + j] += a * b;
                }
            }
        }
        acc = next;
    }
    let k = k as i64;
    Ok(FracQSeries::from_terms(
        24,
        24 * q_prec + k,
        acc.into_iter()
            .enumerate()
            .map(|(i, c)| (k + 24 * i as i64, BigRational::from_integer(c))),
    ))
}

/// `ϑ(τ, z) = Σ_{n∈Z} (−1)ⁿ q^{(n+1/2)²/2} ζ^{n+1/2}`, known for
/// `q`-exponents `< q_prec`. Stored with `D = 8`: `q^{(2n+1)²/8} ζ^{(2n+1)/2}`.
pub fn jacobi_theta(q_prec: i64) -> Result<JacobiQZSeries, SeriesError> {
    if q_prec < 1 {
        return Err(SeriesError::Precision { min: 1, got: q_prec });
    }
    let prec = 8 * q_prec;
    let mut terms = Vec::new();
    let mut n: i64 = 0;
    loop {
        let r2 = 2 * n + 1;
        let e = r2 * r2;
        if e >= prec {
            break;
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        // n and −1−n give the same q-power
        terms.push(((e, r2), rat(sign)));
        terms.push(((e, -r2), rat(-sign)));
        n += 1;
    }
    Ok(JacobiQZSeries::from_terms(8, prec, terms))
}

fn sigma(n: u64, k: u32) -> BigInt {
    arith::divisors(n).into_iter().map(|d| BigInt::from(d).pow(k)).sum()
}

/// Normalized level-one Eisenstein series `E₄` or `E₆`.
pub fn eisenstein(k: u32, q_prec: i64) -> Result<FracQSeries, SeriesError> {
    let (factor, power) = match k {
        4 => (240, 3),
        6 => (-504, 5),
        _ => return Err(SeriesError::UnsupportedWeight(k)),
    };
    if q_prec < 1 {
        return Err(SeriesError::Precision { min: 1, got: q_prec });
    }
    let mut terms = vec![(0, rat(1))];
    for n in 1..q_prec {
        terms.push((n, BigRational::from_integer(sigma(n as u64, power) * factor)));
    }
    Ok(FracQSeries::from_terms(1, q_prec, terms))
}

/// Sign-agnostic absolute value of the leading coefficient, for reports.
pub fn leading_abs(s: &FracQSeries) -> Option<BigRational> {
    s.coeffs().values().next().map(|c| c.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(denom: u64, prec: i64, cs: &[(i64, i64)]) -> FracQSeries {
        FracQSeries::from_terms(denom, prec, cs.iter().map(|&(e, c)| (e, rat(c))))
    }

    #[test]
    fn arithmetic_examples() {
        let a = poly(1, 10, &[(0, 1), (1, 1)]);
        let b = poly(1, 10, &[(0, 1), (1, -1)]);
        assert_eq!(a.mul(&b), poly(1, 10, &[(0, 1), (2, -1)]));
        let x = poly(8, 40, &[(1, 1)]);
        let y = poly(8, 40, &[(3, 1)]);
        assert_eq!(x.mul(&y), poly(8, 41, &[(4, 1)]));
        assert_eq!(x.mul(&y).coeff_at(1, 2), Some(rat(1)));
        let geo = b.inverse().unwrap();
        assert_eq!(geo, poly(1, 10, &(0..10).map(|e| (e, 1)).collect::<Vec<_>>()));
        assert!(poly(1, 5, &[]).inverse().is_err());
    }

    #[test]
    fn precision_rules() {
        let a = poly(1, 5, &[(1, 1)]);
        let b = poly(1, 8, &[(2, 1), (3, 4)]);
        assert_eq!(a.add(&b).prec(), 5);
        assert_eq!(a.mul(&b).prec(), 7);
        let inv = poly(1, 6, &[(1, 2), (2, 1)]).inverse().unwrap();
        assert_eq!((inv.valuation(), inv.prec()), (-1, 4));
        assert!(poly(1, 5, &[]).mul(&b).is_zero());
    }

    #[test]
    fn eta_examples() {
        let e = eta(10).unwrap();
        assert_eq!(e.coeff(1), Some(rat(1)));
        assert_eq!(e.coeff(25), Some(rat(-1)));
        let delta = e.pow(24);
        let expected = [1i64, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643];
        for (n, &c) in expected.iter().enumerate() {
            assert_eq!(delta.coeff_at(n as i64 + 1, 1), Some(rat(c)));
        }
        assert_eq!(eta_power(24, 10).unwrap(), delta.truncate(eta_power(24, 10).unwrap().prec()));
    }

    #[test]
    fn eta_pentagonal() {
        // ∏(1 − qⁿ) = Σ_k (−1)^k q^{k(3k−1)/2}
        let prod = euler_product(500);
        let mut expected = vec![0i64; 500];
        for k in -30i64..=30 {
            let e = k * (3 * k - 1) / 2;
            if (0..500).contains(&e) {
                expected[e as usize] += if k % 2 == 0 { 1 } else { -1 };
            }
        }
        for (a, b) in prod.iter().zip(&expected) {
            assert_eq!(a, &BigInt::from(*b));
        }
    }

    #[test]
    fn theta_examples() {
        let t = jacobi_theta(6).unwrap();
        assert_eq!(t.valuation(), 1);
        assert_eq!(t.coeff(1, 1), Some(rat(1)));
        assert_eq!(t.coeff(1, -1), Some(rat(-1)));
        let sq = t.mul(&t);
        assert_eq!(sq.valuation(), 2);
        assert_eq!(sq.coeff(2, 2), Some(rat(1)));
        assert_eq!(sq.coeff(2, 0), Some(rat(-2)));
        assert_eq!(sq.coeff(2, -2), Some(rat(1)));
        assert!(sq.coeffs().keys().all(|&(e, r)| e % 2 == 0 && r % 2 == 0));
        assert_eq!(t.reflect(), t.scale(&rat(-1)));
        // ϑ(τ, 0) = 0
        let mut at_zero: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&(e, _), c) in t.coeffs() {
            *at_zero.entry(e).or_insert_with(BigRational::zero) += c;
        }
        assert!(at_zero.values().all(Zero::is_zero));
    }

    #[test]
    fn eisenstein_examples() {
        let e4 = eisenstein(4, 12).unwrap();
        let e6 = eisenstein(6, 12).unwrap();
        assert_eq!(e4.coeff(1), Some(rat(240)));
        assert_eq!(e4.coeff(2), Some(rat(2160)));
        assert_eq!(e6.coeff(1), Some(rat(-504)));
        let lhs = e4.pow(3).sub(&e6.pow(2));
        let delta = eta_power(24, 12).unwrap().with_denom(24);
        let rhs = delta.scale(&rat(1728));
        let p = lhs.with_denom(24).prec().min(rhs.prec());
        assert_eq!(lhs.with_denom(24).truncate(p), rhs.truncate(p));
        assert!(eisenstein(8, 5).is_err());
    }

    #[test]
    fn numeric_examples() {
        let tau = Complex64::new(0.0, 1.0);
        let (one, tail) = FracQSeries::one(20).numeric_eval(tau).unwrap();
        assert!((one - 1.0).norm() < 1e-15);
        assert!(tail < 1e-10);
        let (q, _) = poly(1, 5, &[(1, 1)]).numeric_eval(tau).unwrap();
        assert!((q.re - (-std::f64::consts::TAU).exp()).abs() < 1e-15);
        let (e, tail) = eta(40).unwrap().numeric_eval(tau).unwrap();
        assert!((e.norm() - 0.768_225_422_326_056_6).abs() < 1e-12, "{e}");
        assert!(tail < 1e-12);
        assert!(eta(2).unwrap().numeric_eval_checked(tau, 1e-12).is_err());
    }

    fn arb_series() -> impl Strategy<Value = FracQSeries> {
        (1u64..4, prop::collection::vec((-3i64..12, -5i64..5), 0..6), 6i64..16).prop_map(
            |(d, terms, prec)| {
                FracQSeries::from_terms(d, prec, terms.into_iter().map(|(e, c)| (e, rat(c))))
            },
        )
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            let l = a.mul(&b.add(&c));
            let r = a.mul(&b).add(&a.mul(&c));
            let p = l.prec().min(r.prec());
            prop_assert_eq!(l.truncate(p), r.truncate(p));
            prop_assert_eq!(a.add(&b), b.add(&a));
        }

        #[test]
        fn precision_is_sound(terms in prop::collection::vec((0i64..30, -5i64..5), 1..8),
                              other in prop::collection::vec((0i64..30, -5i64..5), 1..8),
                              lo in 5i64..15) {
            let full_a = FracQSeries::from_terms(1, 60, terms.iter().map(|&(e, c)| (e, rat(c))));
            let full_b = FracQSeries::from_terms(1, 60, other.iter().map(|&(e, c)| (e, rat(c))));
            let low = full_a.truncate(lo).mul(&full_b.truncate(lo));
            let high = full_a.mul(&full_b);
            for e in -5..low.prec() {
                prop_assert_eq!(low.coeff(e), high.coeff(e));
            }
        }

        #[test]
        fn theta_is_odd(p in 1i64..20) {
            let t = jacobi_theta(p).unwrap();
            prop_assert_eq!(t.reflect(), t.scale(&rat(-1)));
        }
    }
}
