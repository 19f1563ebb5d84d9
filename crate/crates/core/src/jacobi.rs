//! Jacobi form coefficient tables, theta decomposition, index raising, and
//! numerical checks of the theta transformation law.
//!
//! Theta functions follow `Θ_{μ,m}(τ,z) = Σ_{r ≡ μ (mod 2m)} q^{r²/4m} ζ^r`, so
//! that `φ = Σ_μ h_μ Θ_{μ,m}` with `h_μ = Σ_D c(D, μ) q^{D/4m}` where
//! `D = 4mn − r²` is the discriminant of the pair `(n, r)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::qseries::{self, FracQSeries, SeriesError};
use crate::theta_matrix::epsilon_gauss;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error("coefficients of ({n}, {r}) and ({rep_n}, {rep_r}) share discriminant and class but differ")]
    Inconsistent { n: i64, r: i64, rep_n: i64, rep_r: i64 },
    #[error("cusp form has a nonzero coefficient at ({n}, {r}) with 4mn − r² ≤ 0")]
    NotCuspidal { n: i64, r: i64 },
    #[error("index must be positive")]
    ZeroIndex,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("the form vanishes up to the precision bound")]
    ZeroForm,
    #[error("expected {expected} theta components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("discriminant bound must be at least {min}, got {got}")]
    Bound { min: i64, got: i64 },
    #[error("coefficient for ({n}, {r}) is needed beyond the precision bound")]
    BeyondBound { n: i64, r: i64 },
    #[error("D = {d} is not positive or not ≡ −μ² (mod 4p) for p = {p}, μ = {mu}")]
    WitnessCongruence { p: u64, mu: i64, d: i64 },
    #[error("malformed coefficient table: {0}")]
    Malformed(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Reduces `r` to `ρ ∈ (−m, m]` with `ρ ≡ r (mod 2m)`.
fn reduce_r(r: i64, m: i64) -> i64 {
    let mut rho = r.rem_euclid(2 * m);
    if rho > m {
        rho -= 2 * m;
    }
    rho
}

/// Largest `n` whose class representatives are needed for discriminants up to
/// `bound`.
pub fn n_max(index: u64, bound: i64) -> i64 {
    let m = index as i64;
    (bound + m * m).div_euclid(4 * m)
}

/// Coefficients `c(n, r)` of a Jacobi form for `0 ≤ n ≤ n_max` and
/// `−m² ≤ 4mn − r² ≤ bound`; missing entries in that range are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiFormCoeffs {
    pub weight: i32,
    pub index: u64,
    pub level: u64,
    pub cusp: bool,
    bound: i64,
    table: BTreeMap<(i64, i64), BigRational>,
}

impl JacobiFormCoeffs {
    /// Entries outside the stored range are discarded; the result is checked
    /// for consistency of coefficients within each class.
    pub fn new(
        weight: i32,
        index: u64,
        level: u64,
        cusp: bool,
        bound: i64,
        entries: impl IntoIterator<Item = ((i64, i64), BigRational)>,
    ) -> Result<Self, JacobiError> {
        if index == 0 {
            return Err(JacobiError::ZeroIndex);
        }
        let m = index as i64;
        if bound < -m * m {
            return Err(JacobiError::Bound { min: -m * m, got: bound });
        }
        let nm = n_max(index, bound);
        let mut table = BTreeMap::new();
        for ((n, r), c) in entries {
            let d = 4 * m * n - r * r;
            if c.is_zero() || n < 0 || n > nm || d > bound || d < -m * m {
                continue;
            }
            table.insert((n, r), c);
        }
        let f = JacobiFormCoeffs { weight, index, level, cusp, bound, table };
        f.check_invariant()?;
        Ok(f)
    }

    pub fn zero(weight: i32, index: u64, level: u64, bound: i64) -> Result<Self, JacobiError> {
        Self::new(weight, index, level, true, bound, [])
    }

    /// Largest discriminant `4mn − r²` covered.
    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn entries(&self) -> &BTreeMap<(i64, i64), BigRational> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    /// `c(n, r)` via its class representative; `None` beyond the bound.
    pub fn coeff(&self, n: i64, r: i64) -> Option<BigRational> {
        let m = self.index as i64;
        let d = 4 * m * n - r * r;
        if d > self.bound {
            return None;
        }
        Some(self.class_coeff(d, r))
    }

    /// Coefficient attached to discriminant `d` and class `r mod 2m`.
    fn class_coeff(&self, d: i64, r: i64) -> BigRational {
        let m = self.index as i64;
        let rho = reduce_r(r, m);
        let num = d + rho * rho;
        if num < 0 || num % (4 * m) != 0 {
            return BigRational::zero();
        }
        self.table.get(&(num / (4 * m), rho)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// All `(n, r)` in the stored range.
    pub fn range(&self) -> Vec<(i64, i64)> {
        let m = self.index as i64;
        let mut out = Vec::new();
        for n in 0..=n_max(self.index, self.bound) {
            let rmax = ((4 * m * n + m * m) as f64).sqrt() as i64 + 1;
            for r in -rmax..=rmax {
                let d = 4 * m * n - r * r;
                if d >= -m * m && d <= self.bound {
                    out.push((n, r));
                }
            }
        }
        out
    }

    /// `c(n, r)` depends only on `(4mn − r², r mod 2m)`; cusp forms vanish
    /// for `4mn − r² ≤ 0`.
    pub fn check_invariant(&self) -> Result<(), JacobiError> {
        let m = self.index as i64;
        for (n, r) in self.range() {
            let d = 4 * m * n - r * r;
            let own = self.table.get(&(n, r)).cloned().unwrap_or_else(BigRational::zero);
            if self.cusp && d <= 0 && !own.is_zero() {
                return Err(JacobiError::NotCuspidal { n, r });
            }
            let rho = reduce_r(r, m);
            let rep_n = (d + rho * rho) / (4 * m);
            if own != self.class_coeff(d, r) {
                return Err(JacobiError::Inconsistent { n, r, rep_n, rep_r: rho });
            }
        }
        Ok(())
    }
}

/// The `2m` components `h_μ`, each over `q^{1/4m}` with exponent `D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaComponents {
    pub weight: i32,
    pub index: u64,
    pub level: u64,
    pub components: Vec<FracQSeries>,
}

impl ThetaComponents {
    pub fn new(
        weight: i32,
        index: u64,
        level: u64,
        components: Vec<FracQSeries>,
    ) -> Result<Self, JacobiError> {
        if components.len() != 2 * index as usize {
            return Err(JacobiError::ComponentCount {
                expected: 2 * index as usize,
                found: components.len(),
            });
        }
        let d = 4 * index;
        let components = components.into_iter().map(|h| h.with_denom(arith::lcm(d, h.denom()))).collect();
        Ok(ThetaComponents { weight, index, level, components })
    }
}

pub fn theta_decompose(phi: &JacobiFormCoeffs) -> Result<ThetaComponents, JacobiError> {
    phi.check_invariant()?;
    let m = phi.index as i64;
    let four_m = 4 * m;
    let mut components = Vec::with_capacity(2 * m as usize);
    for mu in 0..2 * m {
        let mut terms = Vec::new();
        let start = -m * m;
        for d in start..=phi.bound {
            if (d + mu * mu).rem_euclid(four_m) != 0 {
                continue;
            }
            terms.push((d, phi.class_coeff(d, mu)));
        }
        components.push(FracQSeries::from_terms(four_m as u64, phi.bound + 1, terms));
    }
    ThetaComponents::new(phi.weight, phi.index, phi.level, components)
}

/// `Σ_μ h_μ Θ_{μ,m}` as a coefficient table up to the given discriminant bound
/// (lowered to what the components determine).
pub fn theta_recombine(h: &ThetaComponents, bound: i64) -> Result<JacobiFormCoeffs, JacobiError> {
    let m = h.index as i64;
    let four_m = 4 * m;
    let mut bound = bound;
    for c in &h.components {
        // prec on exponent D/4m, scaled by the component denominator
        let s = c.denom() as i64 / four_m;
        bound = bound.min((c.prec() + s - 1) / s - 1);
    }
    let mut entries = Vec::new();
    for n in 0..=n_max(h.index, bound) {
        let rmax = ((4 * m * n + m * m) as f64).sqrt() as i64 + 1;
        for r in -rmax..=rmax {
            let d = 4 * m * n - r * r;
            if d < -m * m || d > bound {
                continue;
            }
            let comp = &h.components[r.rem_euclid(2 * m) as usize];
            if let Some(c) = comp.coeff_at(d, four_m as u64) {
                entries.push(((n, r), c));
            }
        }
    }
    let cusp = entries.iter().all(|((n, r), c)| c.is_zero() || 4 * m * n - r * r > 0);
    JacobiFormCoeffs::new(h.weight, h.index, h.level, cusp, bound, entries)
}

/// The weight-10 index-1 cusp form `η¹⁸ϑ²` (normalized with `c(1,1) = 1`),
/// up to discriminant `bound`.
pub fn construct_phi_10_1(bound: i64) -> Result<JacobiFormCoeffs, JacobiError> {
    if bound < 3 {
        return Err(JacobiError::Bound { min: 3, got: bound });
    }
    let q_prec = n_max(1, bound) + 1;
    let eta18 = qseries::eta_power(18, q_prec)?;
    let theta = qseries::jacobi_theta(q_prec + 1)?;
    let phi = theta.mul(&theta).mul_q(&eta18);
    let scale = phi.denom() as i64;
    let mut entries = Vec::new();
    for (&(e, r2), c) in phi.coeffs() {
        assert!(e % scale == 0 && r2 % 2 == 0, "η¹⁸ϑ² has integral exponents");
        entries.push(((e / scale, r2 / 2), c.clone()));
    }
    assert!(phi.prec() >= q_prec * scale, "series covers the requested range");
    JacobiFormCoeffs::new(10, 1, 1, true, bound, entries)
}

/// `φ|V_ℓ`: `c′(n, r) = Σ_{d | (n, r, ℓ)} d^{k−1} c(nℓ/d², r/d)`, index `mℓ`.
pub fn v_ell(phi: &JacobiFormCoeffs, ell: u64) -> Result<JacobiFormCoeffs, JacobiError> {
    if !arith::is_prime(ell) {
        return Err(JacobiError::NotPrime(ell));
    }
    let new_index = phi.index * ell;
    let m = new_index as i64;
    let l = ell as i64;
    let mut entries = Vec::new();
    for n in 0..=n_max(new_index, phi.bound) {
        let rmax = ((4 * m * n + m * m) as f64).sqrt() as i64 + 1;
        for r in -rmax..=rmax {
            let d = 4 * m * n - r * r;
            if d < -m * m || d > phi.bound {
                continue;
            }
            let mut c = phi.coeff(n * l, r).ok_or(JacobiError::BeyondBound { n: n * l, r })?;
            if n % l == 0 && r % l == 0 {
                let dk = BigInt::from(l).pow((phi.weight - 1).max(0) as u32);
                let inner = phi.coeff(n / l, r / l).ok_or(JacobiError::BeyondBound { n: n / l, r: r / l })?;
                c += BigRational::from_integer(dk) * inner;
            }
            entries.push(((n, r), c));
        }
    }
    // the result must still be a table of a theta expansion; a failure here is
    // a defect, not an input error
    JacobiFormCoeffs::new(phi.weight, new_index, phi.level, phi.cusp, phi.bound, entries)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonvanishingReport {
    pub index: u64,
    pub split: Option<(u64, u64)>,
    pub bound: i64,
    /// `μ` with `h_μ ≠ 0` up to the bound.
    pub nonzero: Vec<u64>,
    /// Those with `gcd(μ, 2m) = 1`.
    pub primitive: Vec<u64>,
    /// Those with `gcd(μ, 2m) ∤ 2m₂` for the supplied split.
    pub outside_split: Vec<u64>,
    pub consistent: bool,
}

pub fn check_primitive_nonvanishing(
    phi: &JacobiFormCoeffs,
    split: Option<(u64, u64)>,
) -> Result<NonvanishingReport, JacobiError> {
    if phi.is_zero() {
        return Err(JacobiError::ZeroForm);
    }
    let h = theta_decompose(phi)?;
    let two_m = 2 * phi.index;
    let nonzero: Vec<u64> =
        (0..two_m).filter(|&mu| !h.components[mu as usize].is_zero()).collect();
    let primitive: Vec<u64> = nonzero
        .iter()
        .copied()
        .filter(|&mu| arith::gcd(mu as i64, two_m as i64) == 1)
        .collect();
    let outside_split: Vec<u64> = match split {
        Some((_, m2)) => nonzero
            .iter()
            .copied()
            .filter(|&mu| (2 * m2) % arith::gcd(mu as i64, two_m as i64) != 0)
            .collect(),
        None => Vec::new(),
    };
    let consistent = !primitive.is_empty() || !outside_split.is_empty();
    Ok(NonvanishingReport {
        index: phi.index,
        split,
        bound: phi.bound,
        nonzero,
        primitive,
        outside_split,
        consistent,
    })
}

/// `Θ_{μ,m}(τ, z)` by direct summation with a rigorous geometric tail bound
/// below `tol`.
pub fn theta_numeric(m: u64, mu: i64, tau: Complex64, z: Complex64, tol: f64) -> (Complex64, f64) {
    let m = m as i64;
    let y = tau.im;
    let i2pi = Complex64::new(0.0, std::f64::consts::TAU);
    let term = |r: i64| {
        let r = r as f64;
        (i2pi * (r * r * tau / (4 * m) as f64 + r * z)).exp()
    };
    // |term(r)| = exp(−2π(r²y/4m + r·Im z)) decreases once |r| passes the
    // vertex at −2m·Im z / y
    let magnitude = |r: f64| (-std::f64::consts::TAU * (r * r * y / (4 * m) as f64 + r * z.im)).exp();
    let vertex = -2.0 * m as f64 * z.im / y;
    let start = mu.rem_euclid(2 * m);
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for dir in [1i64, -1] {
        let mut r = if dir == 1 { start } else { start - 2 * m };
        loop {
            value += term(r);
            let next = r + dir * 2 * m;
            let beyond = (next as f64 - vertex) * dir as f64 > 0.0;
            if beyond {
                let t = magnitude(next as f64);
                let ratio = magnitude((next + dir * 2 * m) as f64) / t;
                if ratio < 1.0 {
                    let bound = t / (1.0 - ratio);
                    if bound < tol * 1e-3 {
                        tail += bound;
                        break;
                    }
                }
            }
            r = next;
        }
    }
    (value, tail)
}

/// Principal square root of `cτ + 1`, with argument in `(−π/2, π/2]`.
fn principal_sqrt(w: Complex64) -> Complex64 {
    w.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub index: u64,
    pub c: i64,
    pub tau: (f64, f64),
    pub z: (f64, f64),
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_tail: f64,
}

/// Checks, for `γ = [[1,0],[c,1]]`,
/// `Θ_{μ,m}(γτ, z/(cτ+1))·(cτ+1)^{−1/2}·e(−mcz²/(cτ+1)) = Σ_ν ε(ν, μ)Θ_{ν,m}(τ, z)`
/// with `ε(ν, μ) = (1/2m)Σ_{η mod 2m} e_{4m}(−cη² + 2η(ν−μ))`.
pub fn verify_theta_transform(m: u64, c: i64, tau: Complex64, z: Complex64, tol: f64) -> TransformReport {
    let w = tau * c as f64 + 1.0;
    let tau_t = tau / w;
    let z_t = z / w;
    let i2pi = Complex64::new(0.0, std::f64::consts::TAU);
    let factor = principal_sqrt(w).inv() * (-(i2pi * (m as f64 * c as f64) * z * z / w)).exp();
    let two_m = 2 * m as i64;
    let mut max_tail: f64 = 0.0;
    let rhs_thetas: Vec<Complex64> = (0..two_m)
        .map(|nu| {
            let (v, t) = theta_numeric(m, nu, tau, z, tol);
            max_tail = max_tail.max(t);
            v
        })
        .collect();
    let mut residuals = Vec::new();
    for mu in 0..two_m {
        let (lhs, t) = theta_numeric(m, mu, tau_t, z_t, tol);
        max_tail = max_tail.max(t * factor.norm());
        let lhs = lhs * factor;
        let rhs: Complex64 = (0..two_m)
            .map(|nu| epsilon_gauss(-c, m, nu, mu).embed() * rhs_thetas[nu as usize])
            .sum();
        residuals.push((lhs - rhs).norm());
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    TransformReport { index: m, c, tau: (tau.re, tau.im), z: (z.re, z.im), residuals, max_residual, max_tail }
}

/// Checks, for `γ = [[1,0],[c,1]]` and components of a weight-`k` form,
/// `(cτ+1)^{−k+1/2}·h_μ(τ/(cτ+1)) = Σ_ν ε(ν, μ)·h_ν(τ)` with
/// `ε(ν, μ) = (1/2m)Σ_{η mod 2m} e_{4m}(cη² + 2η(ν−μ))`.
pub fn verify_component_transform(
    h: &ThetaComponents,
    c: i64,
    tau: Complex64,
) -> Result<TransformReport, JacobiError> {
    let m = h.index;
    let two_m = 2 * m as i64;
    let w = tau * c as f64 + 1.0;
    let tau_t = tau / w;
    let factor = principal_sqrt(w).powi(-(2 * h.weight - 1));
    let mut max_tail: f64 = 0.0;
    let mut at_tau = Vec::new();
    for comp in &h.components {
        let (v, t) = comp.numeric_eval(tau)?;
        max_tail = max_tail.max(t);
        at_tau.push(v);
    }
    let mut residuals = Vec::new();
    for mu in 0..two_m {
        let (v, t) = h.components[mu as usize].numeric_eval(tau_t)?;
        max_tail = max_tail.max(t * factor.norm());
        let lhs = v * factor;
        let rhs: Complex64 = (0..two_m)
            .map(|nu| epsilon_gauss(c, m, nu, mu).embed() * at_tau[nu as usize])
            .sum();
        residuals.push((lhs - rhs).norm());
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(TransformReport { index: m, c, tau: (tau.re, tau.im), z: (0.0, 0.0), residuals, max_residual, max_tail })
}

/// `T = ((D+μ²)/4p, μ/2; μ/2, p)` with `4·det T = D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessMatrix {
    pub p: u64,
    pub mu: i64,
    pub d: i64,
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl WitnessMatrix {
    pub fn four_det(&self) -> BigRational {
        BigRational::from_integer(4.into()) * (&self.a * &self.c - &self.b * &self.b)
    }

    /// `a > 0` and `det > 0`.
    pub fn is_positive_definite(&self) -> bool {
        self.a.is_positive() && (&self.a * &self.c - &self.b * &self.b).is_positive()
    }

    /// Integral diagonal and half-integral off-diagonal entries.
    pub fn is_half_integral(&self) -> bool {
        let two = BigRational::from_integer(2.into());
        self.a.is_integer() && self.c.is_integer() && (&self.b * &two).is_integer()
    }

    /// `4·det T = D`, positive definite and half-integral.
    pub fn verifies(&self) -> bool {
        self.four_det() == BigRational::from_integer(self.d.into())
            && self.is_positive_definite()
            && self.is_half_integral()
    }

    pub fn entries_f64(&self) -> [[f64; 2]; 2] {
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        [[f(&self.a), f(&self.b)], [f(&self.b), f(&self.c)]]
    }
}

impl Serialize for WitnessMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(rename_all = "camelCase")]
        struct Repr {
            p: u64,
            mu: i64,
            d: i64,
            #[serde(rename = "T")]
            t: [[f64; 2]; 2],
            exact: [[String; 2]; 2],
            four_det: Option<i64>,
            positive_definite: bool,
        }
        Repr {
            p: self.p,
            mu: self.mu,
            d: self.d,
            t: self.entries_f64(),
            exact: [
                [self.a.to_string(), self.b.to_string()],
                [self.b.to_string(), self.c.to_string()],
            ],
            four_det: self.four_det().to_integer().to_i64(),
            positive_definite: self.is_positive_definite(),
        }
        .serialize(s)
    }
}

pub fn build_witness(p: u64, mu: i64, d: i64) -> Result<WitnessMatrix, JacobiError> {
    if p.is_multiple_of(2) || !arith::is_prime(p) {
        return Err(JacobiError::NotPrime(p));
    }
    let four_p = 4 * p as i64;
    if d <= 0 || (d + mu * mu).rem_euclid(four_p) != 0 {
        return Err(JacobiError::WitnessCongruence { p, mu, d });
    }
    let r = |n: i64, k: i64| BigRational::new(n.into(), k.into());
    Ok(WitnessMatrix {
        p,
        mu,
        d,
        a: r(d + mu * mu, four_p),
        b: r(mu, 2),
        c: r(p as i64, 1),
    })
}

/// JSON form `{weight, index, level, prec, cusp, entries: [[n, r, num, den]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobiJson {
    pub weight: i32,
    pub index: u64,
    #[serde(default = "one")]
    pub level: u64,
    pub prec: i64,
    #[serde(default)]
    pub cusp: bool,
    pub entries: Vec<(i64, i64, serde_json::Value, serde_json::Value)>,
}

fn one() -> u64 {
    1
}

fn json_int(v: &serde_json::Value) -> Result<BigInt, JacobiError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| JacobiError::Malformed(format!("non-integer {n}"))),
        serde_json::Value::String(s) => {
            s.parse().map_err(|_| JacobiError::Malformed(format!("non-integer {s:?}")))
        }
        other => Err(JacobiError::Malformed(format!("expected integer, got {other}"))),
    }
}

pub(crate) fn json_of_int(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => v.into(),
        None => x.to_string().into(),
    }
}

impl JacobiFormCoeffs {
    pub fn to_json(&self) -> JacobiJson {
        JacobiJson {
            weight: self.weight,
            index: self.index,
            level: self.level,
            prec: self.bound,
            cusp: self.cusp,
            entries: self
                .table
                .iter()
                .map(|(&(n, r), c)| (n, r, json_of_int(c.numer()), json_of_int(c.denom())))
                .collect(),
        }
    }

    pub fn from_json(j: &JacobiJson) -> Result<Self, JacobiError> {
        let mut entries = Vec::with_capacity(j.entries.len());
        for (n, r, num, den) in &j.entries {
            let den = json_int(den)?;
            if den.is_zero() {
                return Err(JacobiError::Malformed("zero denominator".into()));
            }
            entries.push(((*n, *r), BigRational::new(json_int(num)?, den)));
        }
        Self::new(j.weight, j.index, j.level, j.cusp, j.prec, entries)
    }
}

impl Serialize for JacobiFormCoeffs {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn phi_10_1_leading_coefficients() {
        let phi = construct_phi_10_1(80).unwrap();
        assert_eq!(phi.coeff(1, 1), Some(rat(1)));
        assert_eq!(phi.coeff(1, 0), Some(rat(-2)));
        assert_eq!(phi.coeff(2, 0), Some(rat(36)));
        assert_eq!(phi.coeff(2, 1), Some(rat(-16)));
        assert_eq!(phi.coeff(2, 2), Some(rat(-2)));
        for (&(n, r), c) in phi.entries() {
            assert_eq!(phi.coeff(n, -r).as_ref(), Some(c));
        }
        assert_eq!((phi.weight, phi.index, phi.level), (10, 1, 1));
    }

    #[test]
    fn phi_10_1_from_an_independent_product() {
        // η¹⁸ϑ² = q ζ⁻¹(1 − ζ)² ∏(1−qⁿ)^{20}(1−qⁿζ)²(1−qⁿζ⁻¹)² by the triple
        // product; expand in (n, r) directly with integers
        let nmax = 8i64;
        let rmax = 12i64;
        let w = (2 * rmax + 1) as usize;
        let mut poly = vec![vec![0i64; w]; nmax as usize + 1];
        // q ζ⁻¹ (1 − ζ)² = q(ζ⁻¹ − 2 + ζ)
        poly[1][(rmax - 1) as usize] = 1;
        poly[1][rmax as usize] = -2;
        poly[1][(rmax + 1) as usize] = 1;
        let mul_factor = |poly: &mut Vec<Vec<i64>>, qn: i64, r: i64| {
            // multiply by (1 − q^qn ζ^r)
            for n in (qn..=nmax).rev() {
                for j in 0..w as i64 {
                    let src = j - r;
                    if (0..w as i64).contains(&src) {
                        let v = poly[(n - qn) as usize][src as usize];
                        poly[n as usize][j as usize] -= v;
                    }
                }
            }
        };
        for k in 1..=nmax {
            for _ in 0..20 {
                mul_factor(&mut poly, k, 0);
            }
            for _ in 0..2 {
                mul_factor(&mut poly, k, 1);
                mul_factor(&mut poly, k, -1);
            }
        }
        let phi = construct_phi_10_1(4 * nmax - 1).unwrap();
        for n in 0..=nmax {
            for r in -rmax..=rmax {
                if let Some(c) = phi.coeff(n, r) {
                    if 4 * n - r * r >= -1 {
                        assert_eq!(c, rat(poly[n as usize][(r + rmax) as usize]), "({n},{r})");
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let zero = JacobiFormCoeffs::zero(10, 2, 1, 40).unwrap();
        let h = theta_decompose(&zero).unwrap();
        assert_eq!(h.components.len(), 4);
        assert!(h.components.iter().all(FracQSeries::is_zero));

        let phi = construct_phi_10_1(80).unwrap();
        let h = theta_decompose(&phi).unwrap();
        assert_eq!(h.components[1].valuation(), 3);
        assert_eq!(h.components[1].coeff(3), Some(rat(1)));
        assert_eq!(h.components[0].valuation(), 4);
        assert_eq!(h.components[0].coeff(4), Some(rat(-2)));
        assert_eq!(theta_recombine(&h, 80).unwrap(), phi);
    }

    #[test]
    fn recombine_single_component() {
        let h0 = FracQSeries::one(30).with_denom(4);
        let h = ThetaComponents::new(0, 1, 1, vec![h0, FracQSeries::zero(4, 120)]).unwrap();
        let phi = theta_recombine(&h, 100).unwrap();
        for (n, r) in phi.range() {
            let expected = if r % 2 == 0 && n == (r / 2) * (r / 2) { 1 } else { 0 };
            assert_eq!(phi.coeff(n, r), Some(rat(expected)), "({n},{r})");
        }
        assert_eq!(theta_decompose(&phi).unwrap().components[0].truncate(101), h.components[0].truncate(101));
    }

    #[test]
    fn inconsistent_table_is_rejected() {
        let err = JacobiFormCoeffs::new(10, 1, 1, true, 20, [((1, 1), rat(1)), ((2, 3), rat(2))]);
        assert!(matches!(err, Err(JacobiError::Inconsistent { .. })));
        let cusp = JacobiFormCoeffs::new(10, 1, 1, true, 20, [((1, 2), rat(1)), ((0, 0), rat(1))]);
        assert!(cusp.is_err());
    }

    #[test]
    fn v_ell_examples() {
        let phi = construct_phi_10_1(80).unwrap();
        let v3 = v_ell(&phi, 3).unwrap();
        assert_eq!(v3.index, 3);
        assert_eq!(v3.coeff(1, 1), phi.coeff(3, 1));
        let v2 = v_ell(&phi, 2).unwrap();
        assert_eq!(v2.coeff(1, 0), phi.coeff(2, 0));
        // d = 2 branch: c′(2, 2) = c(4, 2) + 2⁹c(1, 1)
        assert_eq!(v2.coeff(2, 2).unwrap(), phi.coeff(4, 2).unwrap() + rat(512) * phi.coeff(1, 1).unwrap());
        let zero = JacobiFormCoeffs::zero(10, 1, 1, 40).unwrap();
        assert!(v_ell(&zero, 5).unwrap().is_zero());
        assert!(v_ell(&phi, 4).is_err());
    }

    #[test]
    fn nonvanishing_examples() {
        let phi = construct_phi_10_1(80).unwrap();
        let r = check_primitive_nonvanishing(&phi, None).unwrap();
        assert!(r.consistent && r.primitive.contains(&1));
        for ell in [3, 5] {
            let v = v_ell(&phi, ell).unwrap();
            let r = check_primitive_nonvanishing(&v, Some((1, ell))).unwrap();
            assert!(r.consistent, "{r:?}");
        }
        let zero = JacobiFormCoeffs::zero(10, 1, 1, 40).unwrap();
        assert_eq!(check_primitive_nonvanishing(&zero, None), Err(JacobiError::ZeroForm));
    }

    #[test]
    fn theta_numeric_matches_series() {
        let tau = Complex64::new(0.1, 0.8);
        let z = Complex64::new(0.3, 0.2);
        let (v, tail) = theta_numeric(1, 0, tau, z, 1e-12);
        let direct: Complex64 = (-40i64..=40)
            .map(|k| {
                let r = 2 * k;
                (Complex64::new(0.0, std::f64::consts::TAU) * ((r * r) as f64 * tau / 4.0 + r as f64 * z)).exp()
            })
            .sum();
        assert!((v - direct).norm() < 1e-12);
        assert!(tail < 1e-12);
    }

    #[test]
    fn transformation_law() {
        for m in [1, 3] {
            for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)] {
                for z in [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.2)] {
                    let r = verify_theta_transform(m, 1, tau, z, 1e-10);
                    assert!(r.max_residual < 1e-8, "{r:?}");
                    assert!(r.max_tail < 1e-8);
                }
            }
        }
    }

    #[test]
    fn component_transformation() {
        let phi = construct_phi_10_1(200).unwrap();
        let h = theta_decompose(&phi).unwrap();
        for c in [-1, 1] {
            let r = verify_component_transform(&h, c, Complex64::new(0.0, 2.0)).unwrap();
            assert!(r.max_residual < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn witness_examples() {
        let t = build_witness(3, 1, 11).unwrap();
        assert_eq!(t.entries_f64(), [[1.0, 0.5], [0.5, 3.0]]);
        assert_eq!(t.four_det(), rat(11));
        assert_eq!(build_witness(3, 1, 23).unwrap().four_det(), rat(23));
        let t = build_witness(5, 3, 11).unwrap();
        assert_eq!(t.entries_f64(), [[1.0, 1.5], [1.5, 5.0]]);
        assert!(t.is_positive_definite() && t.is_half_integral());
        assert!(build_witness(3, 1, 12).is_err());
        assert!(build_witness(9, 1, 11).is_err());
    }

    #[test]
    fn json_round_trip() {
        let phi = v_ell(&construct_phi_10_1(40).unwrap(), 3).unwrap();
        let j = serde_json::to_string(&phi).unwrap();
        let back: JacobiJson = serde_json::from_str(&j).unwrap();
        assert_eq!(JacobiFormCoeffs::from_json(&back).unwrap(), phi);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Tables whose values depend only on `(D, r mod 2m)`.
        fn consistent_table() -> impl Strategy<Value = JacobiFormCoeffs> {
            (1u64..5, 0i64..50, prop::collection::vec(-5i64..=5, 64)).prop_map(|(m, bound, vals)| {
                let shape = JacobiFormCoeffs::zero(0, m, 1, bound).unwrap();
                let mi = m as i64;
                let entries: Vec<_> = shape
                    .range()
                    .into_iter()
                    .map(|(n, r)| {
                        let d = 4 * mi * n - r * r;
                        let rho = reduce_r(r, mi);
                        // classes whose reduced representative has n < 0 vanish
                        if d + rho * rho < 0 {
                            return ((n, r), rat(0));
                        }
                        let key = (d + mi * mi) as usize * 7 + r.rem_euclid(2 * mi) as usize;
                        ((n, r), rat(vals[key % vals.len()]))
                    })
                    .collect();
                let cusp = entries.iter().all(|((n, r), c): &((i64, i64), _)| c.is_zero() || 4 * mi * n - r * r > 0);
                JacobiFormCoeffs::new(4, m, 1, cusp, bound, entries).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn decompose_recombine_round_trip(phi in consistent_table()) {
                let h = theta_decompose(&phi).unwrap();
                prop_assert_eq!(h.components.len(), 2 * phi.index as usize);
                prop_assert_eq!(theta_recombine(&h, phi.bound()).unwrap(), phi);
            }

            #[test]
            fn v_ell_keeps_the_class_invariant(phi in consistent_table(), ell in prop::sample::select(vec![2u64, 3, 5])) {
                let v = v_ell(&phi, ell).unwrap();
                prop_assert!(v.check_invariant().is_ok());
                prop_assert_eq!(v.index, phi.index * ell);
            }

            #[test]
            fn witness_is_valid(p in prop::sample::select(vec![3u64, 5, 7, 11, 13]), mu in -30i64..30, k in 0i64..20) {
                let four_p = 4 * p as i64;
                let d = (-mu * mu).rem_euclid(four_p) + four_p * k;
                prop_assume!(d > 0);
                prop_assert!(build_witness(p, mu, d).unwrap().verifies());
            }
        }
    }
}
