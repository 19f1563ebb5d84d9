//! Generalized quadratic Gauss sums `G(a,b,c) = Σ_{l mod c} e_c(a·l² + b·l)`.
//!
//! [`gauss_direct`] sums the definition. [`gauss_closed`] walks the classical
//! evaluation: content reduction, the coprime splitting
//! `G(a,b,c₁c₂) = G(c₂a,b,c₁)·G(c₁a,b,c₂)`, and five closed-form cases. Closed
//! values are kept symbolically as a [`Monomial`] until they are needed as
//! field elements.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, eps_exponent, factorize, jacobi_symbol, kronecker_symbol, mod_inverse};
use crate::cyclotomic::{self, root_of_unity, CycloNumber};

/// Arguments of `G(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GaussSumSpec {
    pub a: i64,
    pub b: i64,
    pub c: u64,
}

impl GaussSumSpec {
    pub fn new(a: i64, b: i64, c: u64) -> Self {
        assert!(c >= 1, "the modulus of a Gauss sum must be positive");
        GaussSumSpec { a, b, c }
    }

    /// Order of the field the result is reported in: `lcm(8, c)`.
    pub fn ambient_order(&self) -> u64 {
        arith::lcm(8, self.c)
    }
}

/// The five closed-form cases for `gcd(a, c) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GaussCase {
    /// `c` odd: `ε_c √c (a/c) e_c(-ψ b²)` with `4aψ ≡ 1 (mod c)`.
    OddModulus,
    /// `c ≡ 2 (mod 4)`, `b` odd: `2·G(2a, b, c/2)`.
    TwiceOddOddB,
    /// `c ≡ 2 (mod 4)`, `b` even: `0`.
    TwiceOddEvenB,
    /// `c ≡ 0 (mod 4)`, `b` even: `(1+i) ε_a⁻¹ √c (c/a)` after completing the
    /// square.
    DoublyEvenEvenB,
    /// `c ≡ 0 (mod 4)`, `b` odd: `0`.
    DoublyEvenOddB,
}

/// How often each rule fired while evaluating closed forms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub odd_modulus: u64,
    pub twice_odd_odd_b: u64,
    pub twice_odd_even_b: u64,
    pub doubly_even_even_b: u64,
    pub doubly_even_odd_b: u64,
    /// `gcd(a, c) ∤ b`.
    pub content_zero: u64,
    /// `gcd(a, c) > 1` divided out.
    pub content_reduced: u64,
    /// Coprime odd / 2-power splits.
    pub split: u64,
}

impl CaseCounts {
    fn record(&mut self, case: GaussCase) {
        match case {
            GaussCase::OddModulus => self.odd_modulus += 1,
            GaussCase::TwiceOddOddB => self.twice_odd_odd_b += 1,
            GaussCase::TwiceOddEvenB => self.twice_odd_even_b += 1,
            GaussCase::DoublyEvenEvenB => self.doubly_even_even_b += 1,
            GaussCase::DoublyEvenOddB => self.doubly_even_odd_b += 1,
        }
    }

    pub fn merge(mut self, o: CaseCounts) -> CaseCounts {
        self.odd_modulus += o.odd_modulus;
        self.twice_odd_odd_b += o.twice_odd_odd_b;
        self.twice_odd_even_b += o.twice_odd_even_b;
        self.doubly_even_even_b += o.doubly_even_even_b;
        self.doubly_even_odd_b += o.doubly_even_odd_b;
        self.content_zero += o.content_zero;
        self.content_reduced += o.content_reduced;
        self.split += o.split;
        self
    }

    /// Counts of the five closed-form cases in order.
    pub fn cases(&self) -> [u64; 5] {
        [
            self.odd_modulus,
            self.twice_odd_odd_b,
            self.twice_odd_even_b,
            self.doubly_even_even_b,
            self.doubly_even_odd_b,
        ]
    }
}

/// `scale · ζ_{root_den}^{root_num} · √d · (√2)^{s} · (1+i)^{t}` with `d` odd
/// and square-free, `s, t ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Monomial {
    pub scale: i64,
    pub root_num: u64,
    pub root_den: u64,
    pub sqrt_odd: u64,
    pub sqrt2: bool,
    pub one_plus_i: bool,
}

impl Monomial {
    pub fn integer(v: i64) -> Self {
        Monomial { scale: v, root_num: 0, root_den: 1, sqrt_odd: 1, sqrt2: false, one_plus_i: false }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0
    }

    fn root(num: i64, den: u64) -> Self {
        Monomial { root_num: arith::modulo(num, den), root_den: den, ..Self::integer(1) }
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        if self.is_zero() || o.is_zero() {
            return Monomial::integer(0);
        }
        let den = arith::lcm(self.root_den, o.root_den);
        let mut num =
            self.root_num * (den / self.root_den) + o.root_num * (den / o.root_den);
        let mut den = den;
        let mut scale = self.scale * o.scale;
        let g = arith::gcd(self.sqrt_odd as i64, o.sqrt_odd as i64);
        scale *= g as i64;
        let sqrt_odd = self.sqrt_odd / g * (o.sqrt_odd / g);
        let sqrt2 = self.sqrt2 ^ o.sqrt2;
        if self.sqrt2 && o.sqrt2 {
            scale *= 2;
        }
        let one_plus_i = self.one_plus_i ^ o.one_plus_i;
        if self.one_plus_i && o.one_plus_i {
            // (1+i)² = 2i
            scale *= 2;
            let d4 = arith::lcm(den, 4);
            num = num * (d4 / den) + d4 / 4;
            den = d4;
        }
        let g = arith::gcd(num as i64, den as i64).max(1);
        Monomial {
            scale,
            root_num: (num / g) % (den / g),
            root_den: den / g,
            sqrt_odd,
            sqrt2,
            one_plus_i,
        }
    }

    /// Smallest field order containing the value.
    pub fn min_order(&self) -> u64 {
        let mut n = arith::lcm(self.root_den, self.sqrt_odd);
        if self.sqrt2 || self.one_plus_i {
            n = arith::lcm(n, 8);
        }
        n
    }

    /// The value as a field element of the given order.
    pub fn to_cyclo(&self, order: u64) -> CycloNumber {
        let dense = self.dense(order);
        CycloNumber::from_dense_integers(order, dense).expect("positive order")
    }

    /// Unreduced dense exponent vector in the given order.
    pub fn dense(&self, order: u64) -> Vec<i64> {
        let mut v = vec![0i64; order as usize];
        self.subtract_into(&mut v, -1);
        v
    }

    /// `v -= self` on an unreduced dense exponent vector whose length is a
    /// multiple of [`Monomial::min_order`].
    pub fn subtract_from(&self, v: &mut [i64]) {
        self.subtract_into(v, 1);
    }

    /// `v -= sign·self` on a dense exponent vector of length `order`.
    fn subtract_into(&self, v: &mut [i64], sign: i64) {
        if self.is_zero() {
            return;
        }
        let order = v.len() as u64;
        debug_assert_eq!(order % self.min_order(), 0);
        let base = radical_base(order, self.sqrt_odd, self.sqrt2, self.one_plus_i);
        let shift = (self.root_num * (order / self.root_den)) as usize;
        let n = order as usize;
        let s = sign * self.scale;
        for &(e, c) in base.iter() {
            let mut k = e + shift;
            if k >= n {
                k -= n;
            }
            v[k] -= s * c;
        }
    }
}

type SparseBase = Rc<Vec<(usize, i64)>>;

thread_local! {
    static RADICALS: RefCell<HashMap<(u64, u64, bool, bool), SparseBase>> =
        RefCell::new(HashMap::new());
}

/// `√p` for an odd prime `p`, from the quadratic character sum
/// `Σ_{l<p} (l/p) ζ_p^l = ε_p √p`.
fn sqrt_odd_prime(p: u64) -> CycloNumber {
    let mut dense = vec![0i64; p as usize];
    for (l, slot) in dense.iter_mut().enumerate().skip(1) {
        *slot = jacobi_symbol(l as i64, p as i64).unwrap() as i64;
    }
    let sum = CycloNumber::from_dense_integers(p, dense).unwrap();
    let eps_inv = root_of_unity(4, -(eps_exponent(p as i64).unwrap() as i64)).unwrap();
    &sum * &eps_inv
}

fn radical_base(order: u64, d: u64, sqrt2: bool, one_plus_i: bool) -> SparseBase {
    RADICALS.with(|cell| {
        if let Some(b) = cell.borrow().get(&(order, d, sqrt2, one_plus_i)) {
            return b.clone();
        }
        let mut x = CycloNumber::from_integer(order, 1).unwrap();
        for p in factorize(d).unwrap().primes() {
            x = &x * &sqrt_odd_prime(p);
        }
        if sqrt2 {
            x = &x * &(&root_of_unity(8, 1).unwrap() + &root_of_unity(8, -1).unwrap());
        }
        if one_plus_i {
            x = &x * &(&CycloNumber::from_integer(4, 1).unwrap() + &root_of_unity(4, 1).unwrap());
        }
        let x = x.change_order(order).expect("order hosts the radical");
        assert!(x.denominator() == &1.into(), "radicals are algebraic integers");
        let exps = x.basis().exponents().to_vec();
        let sparse: Vec<(usize, i64)> = x
            .numerators()
            .iter()
            .zip(exps)
            .filter(|(c, _)| !num_traits::Zero::is_zero(*c))
            .map(|(c, e)| (e as usize, i64::try_from(c).expect("small radical coefficient")))
            .collect();
        let rc = Rc::new(sparse);
        cell.borrow_mut().insert((order, d, sqrt2, one_plus_i), rc.clone());
        rc
    })
}

/// `√c` as a monomial for positive `c`.
fn sqrt_monomial(c: u64) -> Monomial {
    let fac = factorize(c).unwrap();
    let mut scale = 1i64;
    let mut d = 1u64;
    let mut sqrt2 = false;
    for &(p, k) in fac.factors() {
        scale *= (p as i64).pow(k / 2);
        if k % 2 == 1 {
            if p == 2 {
                sqrt2 = true;
            } else {
                d *= p;
            }
        }
    }
    Monomial { scale, sqrt_odd: d, sqrt2, ..Monomial::integer(1) }
}

/// Closed-form evaluation with rule counters.
pub fn closed_form(spec: &GaussSumSpec, counts: &mut CaseCounts) -> Monomial {
    let c = spec.c;
    let a = arith::modulo(spec.a, c) as i64;
    let b = arith::modulo(spec.b, c) as i64;
    closed_rec(a, b, c, counts)
}

fn closed_rec(a: i64, b: i64, c: u64, counts: &mut CaseCounts) -> Monomial {
    if c == 1 {
        return Monomial::integer(1);
    }
    let a = arith::modulo(a, c) as i64;
    let b = arith::modulo(b, c) as i64;
    let g = arith::gcd(a, c as i64);
    if g > 1 {
        if b % g as i64 != 0 {
            counts.content_zero += 1;
            return Monomial::integer(0);
        }
        counts.content_reduced += 1;
        let inner = closed_rec(a / g as i64, b / g as i64, c / g, counts);
        return Monomial::integer(g as i64).mul(&inner);
    }
    if c % 2 == 1 {
        counts.record(GaussCase::OddModulus);
        let psi = mod_inverse(4 * a, c).expect("4a is a unit mod odd c") as i64;
        let sign = jacobi_symbol(a, c as i64).expect("odd modulus") as i64;
        let exp = -((psi as i128 * (b as i128 * b as i128)) % c as i128) as i64;
        let eps = Monomial::root(eps_exponent(c as i64).unwrap() as i64, 4);
        return Monomial::integer(sign)
            .mul(&eps)
            .mul(&sqrt_monomial(c))
            .mul(&Monomial::root(exp, c));
    }
    if c % 4 == 2 {
        if b % 2 == 1 {
            counts.record(GaussCase::TwiceOddOddB);
            return Monomial::integer(2).mul(&closed_rec(2 * a, b, c / 2, counts));
        }
        counts.record(GaussCase::TwiceOddEvenB);
        return Monomial::integer(0);
    }
    if b % 2 == 1 {
        counts.record(GaussCase::DoublyEvenOddB);
        return Monomial::integer(0);
    }
    let two_power = 1u64 << c.trailing_zeros();
    let odd = c / two_power;
    if odd > 1 {
        counts.split += 1;
        let x = closed_rec(two_power as i64 * a, b, odd, counts);
        let y = closed_rec(odd as i64 * a, b, two_power, counts);
        return x.mul(&y);
    }
    // c = 2^k with k ≥ 2, a odd, b = 2b'
    counts.record(GaussCase::DoublyEvenEvenB);
    let k = c.trailing_zeros();
    let half_b = b / 2;
    let a_inv = mod_inverse(a, c).unwrap() as i128;
    let exp = -((a_inv * (half_b as i128 * half_b as i128)) % c as i128) as i64;
    let sign = kronecker_symbol(2, a as u64).pow(k) as i64;
    let eps_inv = Monomial::root(-(eps_exponent(a).unwrap() as i64), 4);
    let one_plus_i = Monomial { one_plus_i: true, ..Monomial::integer(1) };
    Monomial::integer(sign)
        .mul(&one_plus_i)
        .mul(&eps_inv)
        .mul(&sqrt_monomial(c))
        .mul(&Monomial::root(exp, c))
}

/// Dense, unreduced count vector of the direct sum in the given order.
fn direct_dense(a: i64, b: i64, c: u64, order: u64) -> Vec<i64> {
    let mut v = vec![0i64; order as usize];
    add_direct(&mut v, a, b, c);
    v
}

/// Adds the terms of the direct sum to an unreduced dense exponent vector
/// whose length is a multiple of `c`.
pub fn accumulate_direct(v: &mut [i64], spec: &GaussSumSpec) {
    add_direct(v, spec.a, spec.b, spec.c);
}

fn add_direct(v: &mut [i64], a: i64, b: i64, c: u64) {
    let step = v.len() as u64 / c;
    let a = arith::modulo(a, c);
    let b = arith::modulo(b, c);
    // e(l) = a·l² + b·l mod c, updated by first differences
    let mut e = 0u64;
    let mut d = (a + b) % c;
    let two_a = (2 * a) % c;
    for _ in 0..c {
        v[(e * step) as usize] += 1;
        e = (e + d) % c;
        d = (d + two_a) % c;
    }
}

/// `G(a, b, c)` by direct summation, in order `lcm(8, c)`.
pub fn gauss_direct(spec: &GaussSumSpec) -> CycloNumber {
    let order = spec.ambient_order();
    CycloNumber::from_dense_integers(order, direct_dense(spec.a, spec.b, spec.c, order))
        .expect("positive order")
}

/// `G(a, b, c)` by the closed-form decision tree, in order `lcm(8, c)`.
pub fn gauss_closed(spec: &GaussSumSpec) -> CycloNumber {
    gauss_closed_counted(spec).0
}

pub fn gauss_closed_counted(spec: &GaussSumSpec) -> (CycloNumber, CaseCounts) {
    let mut counts = CaseCounts::default();
    let m = closed_form(spec, &mut counts);
    (m.to_cyclo(spec.ambient_order()), counts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaussVerifyReport {
    pub c_max: u64,
    pub checked: u64,
    pub counts: CaseCounts,
    /// Mismatching triples in lexicographic order.
    pub failures: Vec<GaussSumSpec>,
}

impl GaussVerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&GaussSumSpec> {
        self.failures.first()
    }
}

/// Checks `gauss_closed = gauss_direct` for every `1 ≤ c ≤ c_max`,
/// `0 ≤ a ≤ c`, `0 ≤ b < c`.
pub fn gauss_verify_range(c_max: u64) -> GaussVerifyReport {
    let cells: Vec<(u64, i64)> =
        (1..=c_max).flat_map(|c| (0..=c as i64).map(move |a| (c, a))).collect();
    let (checked, counts, mut failures) = cells
        .par_iter()
        .map(|&(c, a)| verify_row(a, c))
        .reduce(
            || (0, CaseCounts::default(), Vec::new()),
            |mut x, y| {
                x.0 += y.0;
                x.2.extend(y.2);
                (x.0, x.1.merge(y.1), x.2)
            },
        );
    failures.sort();
    GaussVerifyReport { c_max, checked, counts, failures }
}

/// All `b mod c` for fixed `(a, c)`.
fn verify_row(a: i64, c: u64) -> (u64, CaseCounts, Vec<GaussSumSpec>) {
    let order = arith::lcm(8, c);
    let basis = cyclotomic::basis(order).expect("positive order");
    let mut counts = CaseCounts::default();
    let mut failures = Vec::new();
    let mut v = vec![0i64; order as usize];
    for b in 0..c as i64 {
        let spec = GaussSumSpec::new(a, b, c);
        v.iter_mut().for_each(|x| *x = 0);
        add_direct(&mut v, a, b, c);
        closed_form(&spec, &mut counts).subtract_into(&mut v, 1);
        basis.reduce(&mut v);
        if v.iter().any(|&x| x != 0) {
            failures.push(spec);
        }
    }
    (c, counts, failures)
}
