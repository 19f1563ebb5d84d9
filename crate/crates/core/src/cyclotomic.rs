//! Exact arithmetic in cyclotomic fields `Q(ζ_n)`.
//!
//! Elements are stored on a fixed basis of `φ(n)` powers of `ζ_n`. A power
//! `ζ^e` is a basis element when, for every prime power `p^k ‖ n`, the leading
//! base-`p` digit of `e mod p^k` is not `p - 1`. Any other power is rewritten
//! with the relation `Σ_{t<p} ζ^{e + t·n/p} = 0`, one prime at a time. The
//! rewrite for `p` never touches the digits of the other primes, so the result
//! is canonical after a single pass per prime, in `O(n·ω(n))` operations.
//!
//! For a prime power `n` this is the usual power basis `1, ζ, …, ζ^{φ(n)-1}`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{self, factorize, mul_mod, pow_mod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycloError {
    #[error("cyclotomic order must be positive")]
    ZeroOrder,
    #[error("order {target} is not a multiple of {source_order}")]
    NotAMultiple { source_order: u64, target: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix entries must share order {expected}, found {found}")]
    MixedOrders { expected: u64, found: u64 },
    #[error("matrix dimensions {rows}x{cols} do not match {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("{0} is even; ε is defined for odd arguments")]
    EvenArgument(i64),
}

/// The canonical basis of `Q(ζ_n)`.
#[derive(Debug)]
pub struct CycloBasis {
    order: u64,
    /// `(p, p^k)` for each prime power exactly dividing the order.
    prime_powers: Vec<(u64, u64)>,
    /// Basis exponents in increasing order.
    exps: Vec<u32>,
    /// Position of each exponent in `exps`, or `u32::MAX` for non-basis powers.
    pos: Vec<u32>,
    /// For each prime, the exponents whose leading digit is `p - 1`.
    rewrite: Vec<Vec<u32>>,
}

const NOT_BASIS: u32 = u32::MAX;

impl CycloBasis {
    fn build(order: u64) -> CycloBasis {
        let fac = factorize(order).expect("order is positive");
        let prime_powers: Vec<(u64, u64)> =
            fac.factors().iter().map(|&(p, k)| (p, p.pow(k))).collect();
        let top_digit = |e: u64, p: u64, pk: u64| (e % pk) / (pk / p);
        let mut exps = Vec::new();
        let mut pos = vec![NOT_BASIS; order as usize];
        let mut rewrite = vec![Vec::new(); prime_powers.len()];
        for e in 0..order {
            let mut basis = true;
            for (i, &(p, pk)) in prime_powers.iter().enumerate() {
                if top_digit(e, p, pk) == p - 1 {
                    rewrite[i].push(e as u32);
                    basis = false;
                }
            }
            if basis {
                pos[e as usize] = exps.len() as u32;
                exps.push(e as u32);
            }
        }
        CycloBasis { order, prime_powers, exps, pos, rewrite }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// `φ(n)`.
    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn position(&self, exponent: u64) -> Option<usize> {
        let p = self.pos[(exponent % self.order) as usize];
        (p != NOT_BASIS).then_some(p as usize)
    }

    /// Rewrites a dense exponent-indexed vector (length `n`) in place so that
    /// only basis positions carry nonzero entries.
    pub fn reduce<T>(&self, v: &mut [T])
    where
        T: Zero + for<'a> SubAssign<&'a T>,
    {
        debug_assert_eq!(v.len() as u64, self.order);
        let n = self.order as usize;
        for (i, &(p, _)) in self.prime_powers.iter().enumerate() {
            let step = n / p as usize;
            for &e in &self.rewrite[i] {
                let e = e as usize;
                if v[e].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut v[e], T::zero());
                let mut j = e;
                for _ in 1..p {
                    j += step;
                    if j >= n {
                        j -= n;
                    }
                    v[j] -= &c;
                }
            }
        }
    }

    /// Basis coordinates of a reduced dense vector.
    pub fn compress<T: Clone>(&self, dense: &[T]) -> Vec<T> {
        self.exps.iter().map(|&e| dense[e as usize].clone()).collect()
    }
}

fn basis_cache() -> &'static RwLock<HashMap<u64, Arc<CycloBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<CycloBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared basis for order `n` (built once per order).
pub fn basis(order: u64) -> Result<Arc<CycloBasis>, CycloError> {
    if order == 0 {
        return Err(CycloError::ZeroOrder);
    }
    if let Some(b) = basis_cache().read().unwrap().get(&order) {
        return Ok(b.clone());
    }
    let built = Arc::new(CycloBasis::build(order));
    let mut w = basis_cache().write().unwrap();
    Ok(w.entry(order).or_insert(built).clone())
}

/// An element of `Q(ζ_n)`: integer numerators over a common positive
/// denominator, in lowest terms.
#[derive(Clone)]
pub struct CycloNumber {
    basis: Arc<CycloBasis>,
    nums: Vec<BigInt>,
    den: BigInt,
}

impl CycloNumber {
    pub fn zero(order: u64) -> Result<Self, CycloError> {
        let basis = basis(order)?;
        let nums = vec![BigInt::zero(); basis.dim()];
        Ok(CycloNumber { basis, nums, den: BigInt::one() })
    }

    pub fn from_integer(order: u64, value: i64) -> Result<Self, CycloError> {
        Self::from_rational(order, BigRational::from_integer(value.into()))
    }

    pub fn from_rational(order: u64, value: BigRational) -> Result<Self, CycloError> {
        let mut z = Self::zero(order)?;
        z.nums[0] = value.numer().clone();
        z.den = value.denom().clone();
        Ok(z)
    }

    /// Builds from a dense exponent-indexed integer vector of length `order`.
    pub fn from_dense_integers(order: u64, mut dense: Vec<i64>) -> Result<Self, CycloError> {
        let basis = basis(order)?;
        assert_eq!(dense.len() as u64, order, "dense vector length must equal the order");
        basis.reduce(&mut dense);
        let nums = basis.exps.iter().map(|&e| BigInt::from(dense[e as usize])).collect();
        Ok(CycloNumber { basis, nums, den: BigInt::one() }.normalized())
    }

    /// Builds from coordinates that are already canonical (only basis
    /// positions nonzero).
    pub fn from_canonical_integers(order: u64, dense: &[i64]) -> Result<Self, CycloError> {
        let basis = basis(order)?;
        debug_assert!(dense
            .iter()
            .enumerate()
            .all(|(e, c)| *c == 0 || basis.pos[e] != NOT_BASIS));
        let nums = basis.exps.iter().map(|&e| BigInt::from(dense[e as usize])).collect();
        Ok(CycloNumber { basis, nums, den: BigInt::one() }.normalized())
    }

    fn from_dense_bigints(basis: Arc<CycloBasis>, mut dense: Vec<BigInt>, den: BigInt) -> Self {
        basis.reduce(&mut dense);
        let nums = basis.compress(&dense);
        CycloNumber { basis, nums, den }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.den.is_negative() {
            self.den = -self.den;
            for c in &mut self.nums {
                *c = -std::mem::take(c);
            }
        }
        let mut g = self.den.clone();
        for c in &self.nums {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            self.den /= &g;
            for c in &mut self.nums {
                *c /= &g;
            }
        }
        if self.nums.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
        }
        self
    }

    pub fn order(&self) -> u64 {
        self.basis.order
    }

    pub fn basis(&self) -> &Arc<CycloBasis> {
        &self.basis
    }

    /// Coordinate `i` as a reduced rational.
    pub fn coeff(&self, i: usize) -> BigRational {
        BigRational::new(self.nums[i].clone(), self.den.clone())
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        (0..self.nums.len()).map(|i| self.coeff(i)).collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.nums
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.nums.iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.nums.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeff(0))
        } else {
            None
        }
    }

    /// Re-expresses the element in `Q(ζ_target)`; `target` must be a multiple
    /// of the current order.
    pub fn change_order(&self, target: u64) -> Result<Self, CycloError> {
        let n = self.order();
        if target == n {
            return Ok(self.clone());
        }
        if target == 0 || !target.is_multiple_of(n) {
            return Err(CycloError::NotAMultiple { source_order: n, target });
        }
        let scale = target / n;
        let tb = basis(target)?;
        let mut d = vec![BigInt::zero(); target as usize];
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            d[(e as u64 * scale) as usize] = c.clone();
        }
        Ok(Self::from_dense_bigints(tb, d, self.den.clone()))
    }

    fn promote_pair(a: &Self, b: &Self) -> (Self, Self) {
        if a.order() == b.order() {
            return (a.clone(), b.clone());
        }
        let n = arith::lcm(a.order(), b.order());
        (a.change_order(n).unwrap(), b.change_order(n).unwrap())
    }

    /// Multiplication by `ζ_n^k`.
    pub fn mul_root(&self, k: i64) -> Self {
        let n = self.order();
        let s = arith::modulo(k, n) as usize;
        if s == 0 {
            return self.clone();
        }
        let mut d = vec![BigInt::zero(); n as usize];
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            d[(e as usize + s) % n as usize] = c.clone();
        }
        Self::from_dense_bigints(self.basis.clone(), d, self.den.clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let nums = self.nums.iter().map(|c| c * r.numer()).collect();
        CycloNumber { basis: self.basis.clone(), nums, den: &self.den * r.denom() }.normalized()
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        let n = self.order() as usize;
        let mut d = vec![BigInt::zero(); n];
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            d[(n - e as usize) % n] = c.clone();
        }
        Self::from_dense_bigints(self.basis.clone(), d, self.den.clone())
    }

    pub fn inverse(&self) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero);
        }
        // x⁻¹ = ∏_{σ ≠ 1} σ(x) / N(x) over the Galois group
        let n = self.order();
        let mut y = Self::from_integer(n, 1)?;
        for k in arith::units_mod(n).into_iter().filter(|&k| k != 1) {
            y = y.mul_same(&self.galois(k));
        }
        let norm = self.mul_same(&y).as_rational().expect("the norm is rational");
        Ok(y.scale(&norm.recip()))
    }

    /// `ζ ↦ ζ^k` for a unit `k`.
    fn galois(&self, k: u64) -> Self {
        let n = self.order();
        let mut d = vec![BigInt::zero(); n as usize];
        for (e, x) in self.basis.exps.iter().zip(&self.nums) {
            d[((*e as u64 * k) % n) as usize] += x;
        }
        Self::from_dense_bigints(self.basis.clone(), d, self.den.clone())
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, CycloError> {
        let (a, b) = Self::promote_pair(self, other);
        Ok(a.mul_same(&b.inverse()?))
    }

    fn mul_same(&self, other: &Self) -> Self {
        let n = self.order() as usize;
        let mut d = vec![BigInt::zero(); n];
        let ea = &self.basis.exps;
        for (i, x) in self.nums.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.nums.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let mut k = ea[i] as usize + ea[j] as usize;
                if k >= n {
                    k -= n;
                }
                d[k] += x * y;
            }
        }
        Self::from_dense_bigints(self.basis.clone(), d, &self.den * &other.den)
    }

    fn add_same(&self, other: &Self, sign: i32) -> Self {
        let nums = self
            .nums
            .iter()
            .zip(&other.nums)
            .map(|(x, y)| {
                let l = x * &other.den;
                let r = y * &self.den;
                if sign > 0 {
                    l + r
                } else {
                    l - r
                }
            })
            .collect();
        CycloNumber { basis: self.basis.clone(), nums, den: &self.den * &other.den }.normalized()
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::from_integer(self.order(), 1).unwrap();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same(&base);
            }
            base = base.mul_same(&base);
            e >>= 1;
        }
        acc
    }

    /// Value under the embedding `ζ_n ↦ exp(2πi/n)`.
    pub fn embed(&self) -> Complex64 {
        let n = self.order() as f64;
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let mut z = Complex64::new(0.0, 0.0);
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            if c.is_zero() {
                continue;
            }
            let ang = std::f64::consts::TAU * e as f64 / n;
            z += Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN) / den, ang);
        }
        z
    }

    /// Image in `F_P` under `ζ_n ↦ ω`; `None` when `P` divides the denominator.
    pub fn reduce_mod(&self, prime: &ModularRoot) -> Option<u64> {
        let p = prime.prime;
        let pb = BigInt::from(p);
        let den = self.den.mod_floor(&pb).to_u64().unwrap();
        if den == 0 {
            return None;
        }
        let mut acc = 0u64;
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            if c.is_zero() {
                continue;
            }
            let c = c.mod_floor(&pb).to_u64().unwrap();
            acc = (acc + mul_mod(c, prime.powers[e as usize], p)) % p;
        }
        Some(mul_mod(acc, pow_mod(den, p - 2, p), p))
    }
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.order() == other.order() {
            return self.den == other.den && self.nums == other.nums;
        }
        let (a, b) = Self::promote_pair(self, other);
        a == b
    }
}

impl Eq for CycloNumber {}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.order();
        let mut terms = Vec::new();
        for (c, &e) in self.nums.iter().zip(&self.basis.exps) {
            if c.is_zero() {
                continue;
            }
            let r = BigRational::new(c.clone(), self.den.clone());
            terms.push(match e {
                0 => format!("{r}"),
                1 => format!("({r})*z{n}"),
                _ => format!("({r})*z{n}^{e}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a CycloNumber> for &'a CycloNumber {
            type Output = CycloNumber;
            fn $m(self, rhs: &'a CycloNumber) -> CycloNumber {
                let (a, b) = CycloNumber::promote_pair(self, rhs);
                $body(&a, &b)
            }
        }
        impl $tr<CycloNumber> for CycloNumber {
            type Output = CycloNumber;
            fn $m(self, rhs: CycloNumber) -> CycloNumber {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a: &CycloNumber, b: &CycloNumber| a.add_same(b, 1));
binop!(Sub, sub, |a: &CycloNumber, b: &CycloNumber| a.add_same(b, -1));
binop!(Mul, mul, |a: &CycloNumber, b: &CycloNumber| a.mul_same(b));

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber {
            basis: self.basis.clone(),
            nums: self.nums.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        -&self
    }
}

fn int_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

impl Serialize for CycloNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coeffs = self.coeffs();
        let mut st = s.serialize_struct("CycloNumber", 4)?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("exponents", &self.basis.exps)?;
        st.serialize_field(
            "num",
            &coeffs.iter().map(|c| int_json(c.numer())).collect::<Vec<_>>(),
        )?;
        st.serialize_field(
            "den",
            &coeffs.iter().map(|c| int_json(c.denom())).collect::<Vec<_>>(),
        )?;
        st.end()
    }
}

/// `ζ_n^k`.
pub fn root_of_unity(n: u64, k: i64) -> Result<CycloNumber, CycloError> {
    let b = basis(n)?;
    let mut d = vec![0i64; n as usize];
    d[arith::modulo(k, n) as usize] = 1;
    let mut out = CycloNumber::from_dense_integers(n, d)?;
    out.basis = b;
    Ok(out)
}

/// `ε_m`: `1` for `m ≡ 1 (mod 4)` and `i` for `m ≡ 3 (mod 4)`, in order 4.
pub fn eps_factor(m: i64) -> Result<CycloNumber, CycloError> {
    let e = arith::eps_exponent(m).map_err(|_| CycloError::EvenArgument(m))?;
    root_of_unity(4, e as i64)
}

/// Dense matrix over a single cyclotomic field.
#[derive(Clone, PartialEq, Eq)]
pub struct CycloMatrix {
    order: u64,
    rows: usize,
    cols: usize,
    entries: Vec<CycloNumber>,
}

impl CycloMatrix {
    /// Entries in row-major order; all are promoted to the lcm of their orders
    /// together with `order`.
    pub fn new(
        order: u64,
        rows: usize,
        cols: usize,
        entries: Vec<CycloNumber>,
    ) -> Result<Self, CycloError> {
        if entries.len() != rows * cols {
            return Err(CycloError::Shape { rows, cols, len: entries.len() });
        }
        let order = entries.iter().fold(order, |acc, e| arith::lcm(acc, e.order()));
        let entries = entries
            .into_iter()
            .map(|e| e.change_order(order))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CycloMatrix { order, rows, cols, entries })
    }

    pub fn from_fn(
        order: u64,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> CycloNumber,
    ) -> Result<Self, CycloError> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(order, rows, cols, entries)
    }

    pub fn identity(order: u64, n: usize) -> Result<Self, CycloError> {
        Self::from_fn(order, n, n, |i, j| {
            CycloNumber::from_integer(order, (i == j) as i64).unwrap()
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CycloNumber {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[CycloNumber] {
        &self.entries
    }

    pub fn change_order(&self, order: u64) -> Result<Self, CycloError> {
        Self::new(order, self.rows, self.cols, self.entries.clone())
    }

    /// Rows reordered so that output row `i` is input row `perm[i]`, and
    /// likewise for columns.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for &i in row_perm {
            for &j in col_perm {
                entries.push(self.get(i, j).clone());
            }
        }
        CycloMatrix { order: self.order, rows: row_perm.len(), cols: col_perm.len(), entries }
    }

    pub fn scale_row(&self, row: usize, by: &CycloNumber) -> Self {
        let mut out = self.clone();
        for j in 0..self.cols {
            let v = self.get(row, j) * by;
            out.entries[row * self.cols + j] = v.change_order(self.order).unwrap_or(v);
        }
        let order = out.entries.iter().fold(out.order, |a, e| arith::lcm(a, e.order()));
        out.change_order(order).unwrap()
    }
}

impl fmt::Debug for CycloMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CycloMatrix {}x{} over Q(z{})", self.rows, self.cols, self.order)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for CycloMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[CycloNumber]> = self.entries.chunks(self.cols.max(1)).collect();
        let mut st = s.serialize_struct("CycloMatrix", 4)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

/// A prime `P ≡ 1 (mod n)` with a primitive `n`-th root of unity `ω`, and
/// the table of `ω^e`.
#[derive(Debug)]
pub struct ModularRoot {
    pub prime: u64,
    pub omega: u64,
    powers: Vec<u64>,
}

const MODULAR_PRIMES: usize = 3;

fn modular_roots(n: u64) -> Arc<Vec<ModularRoot>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Vec<ModularRoot>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(&n) {
        return v.clone();
    }
    let primes: Vec<u64> = factorize(n).unwrap().primes().collect();
    let mut out = Vec::new();
    let mut k = (1u64 << 30) / n + 1;
    while out.len() < MODULAR_PRIMES {
        let p = k * n + 1;
        k += 1;
        if !arith::is_prime(p) {
            continue;
        }
        let omega = (2..p)
            .map(|x| pow_mod(x, (p - 1) / n, p))
            .find(|&w| primes.iter().all(|&q| pow_mod(w, n / q, p) != 1))
            .expect("a primitive root exists");
        let mut powers = Vec::with_capacity(n as usize);
        let mut w = 1;
        for _ in 0..n {
            powers.push(w);
            w = mul_mod(w, omega, p);
        }
        out.push(ModularRoot { prime: p, omega, powers });
    }
    let out = Arc::new(out);
    cache.write().unwrap().insert(n, out.clone());
    out
}

/// Rank of a dense matrix over `F_p` (entries already reduced).
fn rank_mod_p(mut m: Vec<u64>, rows: usize, cols: usize, p: u64) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                m.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = pow_mod(m[rank * cols + c], p - 2, p);
        for r in rank + 1..rows {
            let f = m[r * cols + c];
            if f == 0 {
                continue;
            }
            let f = mul_mod(f, inv, p);
            for j in c..cols {
                let t = mul_mod(f, m[rank * cols + j], p);
                m[r * cols + j] = (m[r * cols + j] + p - t) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Largest rank observed over the modular images; a lower bound for the rank
/// over `Q(ζ_n)` because any nonzero minor mod `P` is a nonzero minor.
fn modular_rank_lower_bound(
    rows: usize,
    cols: usize,
    n: u64,
    image: impl Fn(&ModularRoot, usize) -> Option<u64>,
) -> usize {
    let full = rows.min(cols);
    let mut best = 0;
    for root in modular_roots(n).iter() {
        let mut m = Vec::with_capacity(rows * cols);
        let mut ok = true;
        for idx in 0..rows * cols {
            match image(root, idx) {
                Some(v) => m.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        best = best.max(rank_mod_p(m, rows, cols, root.prime));
        if best == full {
            break;
        }
    }
    best
}

/// Rank over `Q(ζ_n)`.
///
/// A modular image whose rank equals `min(rows, cols)` certifies the answer;
/// otherwise the rank is computed by fraction-free elimination with the first
/// nonzero entry of each column as pivot.
pub fn exact_rank(m: &CycloMatrix) -> usize {
    let full = m.rows.min(m.cols);
    if full == 0 {
        return 0;
    }
    let lower = modular_rank_lower_bound(m.rows, m.cols, m.order, |root, idx| {
        m.entries[idx].reduce_mod(root)
    });
    if lower == full {
        return full;
    }
    eliminate_rank(m)
}

/// Rank by exact fraction-free elimination only.
pub fn elimination_rank(m: &CycloMatrix) -> usize {
    eliminate_rank(m)
}

fn eliminate_rank(m: &CycloMatrix) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<CycloNumber> = m.entries.clone();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r * cols + c].is_zero()) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let p = a[rank * cols + c].clone();
        for r in rank + 1..rows {
            let f = a[r * cols + c].clone();
            if f.is_zero() {
                continue;
            }
            for j in c..cols {
                let v = &(&p * &a[r * cols + j]) - &(&f * &a[rank * cols + j]);
                a[r * cols + j] = v;
            }
        }
        rank += 1;
    }
    rank
}

/// `A ⊗ B` with entry `((i·rows_B + k), (j·cols_B + l)) = A[i,j]·B[k,l]`.
pub fn kronecker_product(a: &CycloMatrix, b: &CycloMatrix) -> CycloMatrix {
    let order = arith::lcm(a.order, b.order);
    let a = a.change_order(order).unwrap();
    let b = b.change_order(order).unwrap();
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut entries = Vec::with_capacity(rows * cols);
    for i in 0..a.rows {
        for k in 0..b.rows {
            for j in 0..a.cols {
                for l in 0..b.cols {
                    entries.push(a.get(i, j) * b.get(k, l));
                }
            }
        }
    }
    CycloMatrix { order, rows, cols, entries }
}

/// Matrix whose entries are zero or roots of unity `ζ_n^e`, stored as
/// exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootMatrix {
    order: u64,
    rows: usize,
    cols: usize,
    entries: Vec<Option<u64>>,
}

impl RootMatrix {
    pub fn new(order: u64, rows: usize, cols: usize, entries: Vec<Option<u64>>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        assert!(order > 0);
        let entries = entries.into_iter().map(|e| e.map(|x| x % order)).collect();
        RootMatrix { order, rows, cols, entries }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u64> {
        self.entries[i * self.cols + j]
    }

    pub fn change_order(&self, order: u64) -> Result<Self, CycloError> {
        if !order.is_multiple_of(self.order) {
            return Err(CycloError::NotAMultiple { source_order: self.order, target: order });
        }
        let s = order / self.order;
        Ok(RootMatrix {
            order,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.map(|x| x * s)).collect(),
        })
    }

    pub fn to_cyclo(&self) -> CycloMatrix {
        let zero = CycloNumber::zero(self.order).unwrap();
        let entries = self
            .entries
            .iter()
            .map(|e| match e {
                Some(x) => root_of_unity(self.order, *x as i64).unwrap(),
                None => zero.clone(),
            })
            .collect();
        CycloMatrix { order: self.order, rows: self.rows, cols: self.cols, entries }
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(row_perm.len() * col_perm.len());
        for &i in row_perm {
            for &j in col_perm {
                entries.push(self.get(i, j));
            }
        }
        RootMatrix { order: self.order, rows: row_perm.len(), cols: col_perm.len(), entries }
    }

    pub fn kronecker(&self, other: &RootMatrix) -> RootMatrix {
        let order = arith::lcm(self.order, other.order);
        let (sa, sb) = (order / self.order, order / other.order);
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    for l in 0..other.cols {
                        entries.push(match (self.get(i, j), other.get(k, l)) {
                            (Some(x), Some(y)) => Some((x * sa + y * sb) % order),
                            _ => None,
                        });
                    }
                }
            }
        }
        RootMatrix { order, rows, cols, entries }
    }

    /// Exact rank; see [`exact_rank`].
    pub fn rank(&self) -> usize {
        let full = self.rows.min(self.cols);
        if full == 0 {
            return 0;
        }
        let lower = modular_rank_lower_bound(self.rows, self.cols, self.order, |root, idx| {
            Some(self.entries[idx].map_or(0, |e| root.powers[e as usize]))
        });
        if lower == full {
            return full;
        }
        eliminate_rank(&self.to_cyclo())
    }
}
