//! Half-integral weight coefficient tables, the operators `U_p`, `V_p`, the
//! coprimality sieve and descent `f(τ) ↦ f(τ/p)`, and the inductive sieve that
//! produces a form supported on `gcd(n, 4L) = 1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError, Factorization};

/// Largest modulus a congruence support rule may grow to.
pub const MAX_RULE_MODULUS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HalfIntError {
    #[error("weight numerator {0} must be odd")]
    EvenWeight(i64),
    #[error("weight {0}/2 is below 5/2")]
    WeightTooSmall(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not square-free")]
    NotSquareFree(u64),
    #[error("level {level} is not divisible by {divisor}")]
    Level { level: u64, divisor: u64 },
    #[error("coefficient a({n}) is nonzero but {p} does not divide {n}")]
    DescendHypothesis { n: u64, p: u64 },
    #[error("coefficient a({n}) is nonzero but gcd({n}, {lf}) > 1")]
    SieveHypothesis { n: u64, lf: u64 },
    #[error("the input form vanishes up to the bound")]
    ZeroInput,
    #[error("{lf} is not an even divisor of {four_l}")]
    BadLf { lf: u64, four_l: u64 },
    #[error("every stage for p = {p} vanished; with g'(τ) of level prime to {p} this forces the form to vanish, contradicting a nonzero input")]
    Inconsistent { p: u64 },
    #[error("support rule modulus exceeds {MAX_RULE_MODULUS}")]
    RuleTooLarge,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Certificate about coefficients beyond the stored bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportRule {
    /// Every coefficient beyond the bound is zero.
    AllStored,
    /// `a(n) ≠ 0` only if `n mod modulus` lies in `residues`.
    Congruence { modulus: u64, residues: BTreeSet<u64> },
}

impl SupportRule {
    pub fn congruence(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Self {
        SupportRule::Congruence {
            modulus,
            residues: residues.into_iter().map(|r| r % modulus).collect(),
        }
    }

    /// Rule for `n` coprime to `s` and divisible by `d`.
    pub fn coprime_multiple(d: u64, s: u64) -> Self {
        let modulus = arith::lcm(d, s).max(1);
        Self::congruence(
            modulus,
            (0..modulus).filter(|&r| r % d == 0 && arith::gcd(r as i64, s as i64) == 1),
        )
    }

    pub fn allows(&self, n: u64) -> bool {
        match self {
            SupportRule::AllStored => true,
            SupportRule::Congruence { modulus, residues } => residues.contains(&(n % modulus)),
        }
    }

    /// True when the rule forces every coefficient beyond the bound to vanish.
    fn certifies_zero_tail(&self) -> bool {
        match self {
            SupportRule::AllStored => true,
            SupportRule::Congruence { residues, .. } => residues.is_empty(),
        }
    }

    fn lift(modulus: u64, residues: &BTreeSet<u64>, new_modulus: u64) -> BTreeSet<u64> {
        (0..new_modulus).filter(|r| residues.contains(&(r % modulus))).collect()
    }

    fn sieve(&self, s: u64) -> Result<Self, HalfIntError> {
        Ok(match self {
            SupportRule::AllStored => SupportRule::AllStored,
            SupportRule::Congruence { modulus, residues } => {
                let m = arith::lcm(*modulus, s);
                if m > MAX_RULE_MODULUS {
                    return Err(HalfIntError::RuleTooLarge);
                }
                let lifted = Self::lift(*modulus, residues, m);
                SupportRule::Congruence {
                    modulus: m,
                    residues: lifted.into_iter().filter(|&r| arith::gcd(r as i64, s as i64) == 1).collect(),
                }
            }
        })
    }

    /// Rule for `n ↦ a(np)`.
    fn contract(&self, p: u64) -> Self {
        match self {
            SupportRule::AllStored => SupportRule::AllStored,
            SupportRule::Congruence { modulus, residues } => SupportRule::Congruence {
                modulus: *modulus,
                residues: (0..*modulus).filter(|&r| residues.contains(&((r * p) % modulus))).collect(),
            },
        }
    }

    /// Rule for `a′(np) = a(n)`, zero off multiples of `p`.
    fn expand(&self, p: u64) -> Result<Self, HalfIntError> {
        Ok(match self {
            SupportRule::AllStored => SupportRule::AllStored,
            SupportRule::Congruence { modulus, residues } => {
                let m = modulus * p;
                if m > MAX_RULE_MODULUS {
                    return Err(HalfIntError::RuleTooLarge);
                }
                SupportRule::Congruence { modulus: m, residues: residues.iter().map(|r| r * p).collect() }
            }
        })
    }
}

/// Outcome of a vanishing test on finite data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonzero,
    /// All stored coefficients vanish and the support rule certifies the rest.
    Zero,
    /// All stored coefficients vanish; nothing is known beyond the bound.
    ZeroUpToBound,
}

impl Verdict {
    pub fn is_zero(self) -> bool {
        self != Verdict::Nonzero
    }
}

/// Coefficients `a(n)` for `1 ≤ n ≤ bound` of a form of weight
/// `kappa_num/2` on `Γ₁(level)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntForm {
    pub kappa_num: i64,
    pub level: Factorization,
    pub bound: u64,
    pub support_rule: Option<SupportRule>,
    coeffs: BTreeMap<u64, BigRational>,
}

impl HalfIntForm {
    /// Form on `Γ₁(4L)`; zero entries and entries beyond the bound are
    /// dropped.
    pub fn new(
        kappa_num: i64,
        l: u64,
        bound: u64,
        entries: impl IntoIterator<Item = (u64, BigRational)>,
        support_rule: Option<SupportRule>,
    ) -> Result<Self, HalfIntError> {
        if kappa_num % 2 == 0 {
            return Err(HalfIntError::EvenWeight(kappa_num));
        }
        let level = arith::factorize(4 * l)?;
        Ok(Self::with_level(kappa_num, level, bound, entries, support_rule))
    }

    fn with_level(
        kappa_num: i64,
        level: Factorization,
        bound: u64,
        entries: impl IntoIterator<Item = (u64, BigRational)>,
        support_rule: Option<SupportRule>,
    ) -> Self {
        let coeffs = entries
            .into_iter()
            .filter(|(n, c)| *n >= 1 && *n <= bound && !c.is_zero())
            .collect();
        HalfIntForm { kappa_num, level, bound, support_rule, coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, BigRational> {
        &self.coeffs
    }

    /// `a(n)`, or `None` beyond the bound.
    pub fn coeff(&self, n: u64) -> Option<BigRational> {
        if n > self.bound {
            return None;
        }
        Some(self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn level_value(&self) -> u64 {
        self.level.value()
    }

    pub fn verdict(&self) -> Verdict {
        if !self.coeffs.is_empty() {
            Verdict::Nonzero
        } else if self.support_rule.as_ref().is_some_and(SupportRule::certifies_zero_tail) {
            Verdict::Zero
        } else {
            Verdict::ZeroUpToBound
        }
    }

    fn level_times(&self, k: u64) -> Result<Factorization, HalfIntError> {
        Ok(self.level.mul(&arith::factorize(k)?))
    }

    fn level_over(&self, k: u64) -> Result<Factorization, HalfIntError> {
        self.level
            .div(&arith::factorize(k)?)
            .ok_or(HalfIntError::Level { level: self.level.value(), divisor: k })
    }
}

fn require_prime(p: u64) -> Result<(), HalfIntError> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(HalfIntError::NotPrime(p))
    }
}

/// `f(pτ)`: `a(np) = a(f, n)`; level times `p`.
pub fn op_v(f: &HalfIntForm, p: u64) -> Result<HalfIntForm, HalfIntError> {
    require_prime(p)?;
    let rule = f.support_rule.as_ref().map(|r| r.expand(p)).transpose()?;
    Ok(HalfIntForm::with_level(
        f.kappa_num,
        f.level_times(p)?,
        f.bound * p,
        f.coeffs.iter().map(|(n, c)| (n * p, c.clone())),
        rule,
    ))
}

/// `Σ a(f, np) qⁿ`; level becomes `lcm(level, p)`.
pub fn op_u(f: &HalfIntForm, p: u64) -> Result<HalfIntForm, HalfIntError> {
    require_prime(p)?;
    let level = if f.level.exponent_of(p) > 0 { f.level.clone() } else { f.level_times(p)? };
    Ok(contracted(f, p, level))
}

fn contracted(f: &HalfIntForm, p: u64, level: Factorization) -> HalfIntForm {
    HalfIntForm::with_level(
        f.kappa_num,
        level,
        f.bound / p,
        f.coeffs.iter().filter(|(n, _)| *n % p == 0).map(|(n, c)| (n / p, c.clone())),
        f.support_rule.as_ref().map(|r| r.contract(p)),
    )
}

/// Keeps `a(n)` with `gcd(n, s) = 1`; level times `s²`.
pub fn sieve_coprime(f: &HalfIntForm, s: u64) -> Result<HalfIntForm, HalfIntError> {
    if s == 0 || !arith::is_square_free(s)? {
        return Err(HalfIntError::NotSquareFree(s));
    }
    let rule = f.support_rule.as_ref().map(|r| r.sieve(s)).transpose()?;
    Ok(HalfIntForm::with_level(
        f.kappa_num,
        f.level_times(s * s)?,
        f.bound,
        f.coeffs.iter().filter(|(n, _)| arith::gcd(**n as i64, s as i64) == 1).map(|(n, c)| (*n, c.clone())),
        rule,
    ))
}

/// `f(τ/p)` for `f` supported on multiples of `p`: `a(n) = a(f, np)`; level
/// divided by `p`.
pub fn descend(f: &HalfIntForm, p: u64) -> Result<HalfIntForm, HalfIntError> {
    require_prime(p)?;
    if let Some(&n) = f.coeffs.keys().find(|&&n| n % p != 0) {
        return Err(HalfIntError::DescendHypothesis { n, p });
    }
    let level = f.level_over(p)?;
    Ok(contracted(f, p, level))
}

/// One stage form `g_{j,i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SieveStep {
    pub prime: u64,
    pub j: usize,
    pub i: u32,
    /// Level of `g′_{j,i−1}` when this stage was preceded by a descent.
    pub descended_level: Option<u64>,
    pub level: u64,
    pub level_factors: String,
    pub verdict: Verdict,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SieveTrace {
    /// `L_f′`, the radical of `L_f`.
    pub lf_radical: u64,
    /// Level of `g₀`.
    pub initial_level: u64,
    pub steps: Vec<SieveStep>,
    /// Some stage was declared zero without a certificate beyond the bound.
    pub up_to_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveResult {
    pub g: HalfIntForm,
    /// `(p_j, i_j)` for the primes of `L` not dividing `L_f`, ascending.
    pub exponents: Vec<(u64, u32)>,
    pub trace: SieveTrace,
}

impl SieveResult {
    /// `∏ p_j^{i_j}`.
    pub fn shift(&self) -> u64 {
        self.exponents.iter().map(|&(p, i)| p.pow(i)).product()
    }
}

struct LevelDisplay<'a>(&'a Factorization);

impl fmt::Display for LevelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .factors()
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// `4L·L_f′²·∏ p_j^{2−i_j}`.
pub fn expected_level(l: u64, lf: u64, exponents: &[(u64, u32)]) -> Result<u64, HalfIntError> {
    let lf_rad = arith::factorize(lf)?.radical();
    let mut v = 4 * l * lf_rad * lf_rad;
    for &(p, i) in exponents {
        v *= p.pow(2 - i.min(2));
    }
    Ok(v)
}

/// Runs the inductive sieve on `f ∈ S_κ(Γ₁(4L))` with `a(f, n) = 0` for
/// `gcd(n, L_f) > 1`.
pub fn run_sieve(f: &HalfIntForm, l: u64, lf: u64) -> Result<SieveResult, HalfIntError> {
    if f.kappa_num % 2 == 0 {
        return Err(HalfIntError::EvenWeight(f.kappa_num));
    }
    if f.kappa_num < 5 {
        return Err(HalfIntError::WeightTooSmall(f.kappa_num));
    }
    let four_l = 4 * l;
    if l == 0 || lf == 0 || !lf.is_multiple_of(2) || !four_l.is_multiple_of(lf) {
        return Err(HalfIntError::BadLf { lf, four_l });
    }
    if f.level.value() != four_l {
        return Err(HalfIntError::Level { level: f.level.value(), divisor: four_l });
    }
    if f.verdict().is_zero() {
        return Err(HalfIntError::ZeroInput);
    }
    if let Some(&n) = f.coeffs.keys().find(|&&n| arith::gcd(n as i64, lf as i64) > 1) {
        return Err(HalfIntError::SieveHypothesis { n, lf });
    }
    let l_fact = arith::factorize(l)?;
    let lf_rad = arith::factorize(lf)?.radical();
    let primes: Vec<(u64, u32)> =
        l_fact.factors().iter().copied().filter(|&(p, _)| lf_rad % p != 0).collect();

    let mut current = sieve_coprime(f, lf_rad)?;
    let mut trace = SieveTrace {
        lf_radical: lf_rad,
        initial_level: current.level_value(),
        steps: Vec::new(),
        up_to_bound: false,
    };
    let mut exponents = Vec::new();
    for (j, &(p, alpha)) in primes.iter().enumerate() {
        // `prev` is g_{j−1} at i = 0 and g′_{j,i−1} afterwards
        let mut prev = current.clone();
        let mut descended_level = None;
        let mut found = None;
        for i in 0..=alpha {
            if i > 0 {
                prev = descend(&prev, p)?;
                descended_level = Some(prev.level_value());
            }
            let stage = sieve_coprime(&prev, p)?;
            let verdict = stage.verdict();
            trace.up_to_bound |= verdict == Verdict::ZeroUpToBound;
            trace.steps.push(SieveStep {
                prime: p,
                j: j + 1,
                i,
                descended_level,
                level: stage.level_value(),
                level_factors: LevelDisplay(&stage.level).to_string(),
                verdict,
                bound: stage.bound,
            });
            if !verdict.is_zero() {
                found = Some((i, stage));
                break;
            }
        }
        let (i, stage) = found.ok_or(HalfIntError::Inconsistent { p })?;
        exponents.push((p, i));
        current = stage;
    }
    Ok(SieveResult { g: current, exponents, trace })
}

/// A violated postcondition of the sieve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PostconditionFailure {
    pub condition: u8,
    pub n: u64,
    pub detail: String,
}

/// Checks on the output table: support prime to `4L`, the coefficient
/// relation, the exponent range and the closed-form level.
pub fn check_postconditions(
    f: &HalfIntForm,
    l: u64,
    lf: u64,
    result: &SieveResult,
) -> Result<Vec<PostconditionFailure>, HalfIntError> {
    let mut failures = Vec::new();
    let four_l = 4 * l;
    let shift = result.shift();
    for n in 1..=result.g.bound {
        let a = result.g.coeff(n).unwrap_or_else(BigRational::zero);
        if arith::gcd(n as i64, four_l as i64) > 1 {
            if !a.is_zero() {
                failures.push(PostconditionFailure { condition: 1, n, detail: format!("a(g,{n}) = {a}") });
            }
        } else if let Some(b) = f.coeff(shift * n) {
            if a != b {
                failures.push(PostconditionFailure {
                    condition: 2,
                    n,
                    detail: format!("a(g,{n}) = {a} but a(f,{}) = {b}", shift * n),
                });
            }
        }
    }
    let l_fact = arith::factorize(l)?;
    for &(p, i) in &result.exponents {
        if i > l_fact.exponent_of(p) {
            failures.push(PostconditionFailure { condition: 3, n: p, detail: format!("i = {i} exceeds α") });
        }
    }
    let expected = expected_level(l, lf, &result.exponents)?;
    if result.g.level_value() != expected {
        failures.push(PostconditionFailure {
            condition: 4,
            n: 0,
            detail: format!("level {} differs from {expected}", result.g.level_value()),
        });
    }
    Ok(failures)
}

/// JSON form `{kappa_num, L, entries: [[n, num, den]], support_rule?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfIntJson {
    pub kappa_num: i64,
    #[serde(rename = "L")]
    pub l: u64,
    pub entries: Vec<(u64, serde_json::Value, serde_json::Value)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_rule: Option<SupportRule>,
}

fn json_int(v: &serde_json::Value) -> Result<BigInt, HalfIntError> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_i64().map(BigInt::from).ok_or_else(|| HalfIntError::Malformed(format!("non-integer {n}")))
        }
        serde_json::Value::String(s) => {
            s.parse().map_err(|_| HalfIntError::Malformed(format!("non-integer {s:?}")))
        }
        other => Err(HalfIntError::Malformed(format!("expected integer, got {other}"))),
    }
}

impl HalfIntForm {
    pub fn from_json(j: &HalfIntJson, bound: u64) -> Result<Self, HalfIntError> {
        let mut entries = Vec::with_capacity(j.entries.len());
        for (n, num, den) in &j.entries {
            let den = json_int(den)?;
            if den.is_zero() {
                return Err(HalfIntError::Malformed("zero denominator".into()));
            }
            entries.push((*n, BigRational::new(json_int(num)?, den)));
        }
        Self::new(j.kappa_num, j.l, bound, entries, j.support_rule.clone())
    }
}

impl Serialize for HalfIntForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            kappa_num: i64,
            level: u64,
            level_factors: String,
            bound: u64,
            support_rule: &'a Option<SupportRule>,
            entries: Vec<(u64, serde_json::Value, serde_json::Value)>,
        }
        Repr {
            kappa_num: self.kappa_num,
            level: self.level.value(),
            level_factors: LevelDisplay(&self.level).to_string(),
            bound: self.bound,
            support_rule: &self.support_rule,
            entries: self
                .coeffs
                .iter()
                .map(|(n, c)| (*n, crate::jacobi::json_of_int(c.numer()), crate::jacobi::json_of_int(c.denom())))
                .collect(),
        }
        .serialize(s)
    }
}

impl Serialize for SieveResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            g: &'a HalfIntForm,
            exponents: Vec<serde_json::Value>,
            trace: &'a SieveTrace,
        }
        Repr {
            g: &self.g,
            exponents: self.exponents.iter().map(|&(p, i)| serde_json::json!({"p": p, "i": i})).collect(),
            trace: &self.trace,
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn form(l: u64, bound: u64, entries: &[(u64, i64)]) -> HalfIntForm {
        HalfIntForm::new(5, l, bound, entries.iter().map(|&(n, c)| (n, rat(c))), Some(SupportRule::AllStored))
            .unwrap()
    }

    #[test]
    fn operator_examples() {
        let f = form(3, 10, &[(1, 1)]);
        let v = op_v(&f, 3).unwrap();
        assert_eq!(v.coeffs().keys().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(v.level_value(), 36);
        let f = form(3, 10, &[(3, 5), (1, 2)]);
        let u = op_u(&f, 3).unwrap();
        assert_eq!(u.coeff(1), Some(rat(5)));
        assert_eq!(u.bound, 3);
        let z = form(3, 10, &[]);
        assert_eq!(op_v(&z, 5).unwrap().verdict(), Verdict::Zero);
        assert_eq!(op_u(&z, 5).unwrap().verdict(), Verdict::Zero);
        assert!(op_v(&f, 4).is_err());
    }

    #[test]
    fn u_after_v_is_identity() {
        let f = form(15, 30, &[(1, 2), (4, -1), (7, 3), (30, 1)]);
        for p in [2, 3, 5, 7] {
            let back = op_u(&op_v(&f, p).unwrap(), p).unwrap();
            assert_eq!(back.coeffs(), f.coeffs());
            assert_eq!(back.bound, f.bound);
        }
    }

    #[test]
    fn one_minus_u_v_vanishes_iff_supported_on_multiples() {
        for (entries, supported) in [(vec![(3u64, 1i64), (9, 2)], true), (vec![(3, 1), (4, 1)], false)] {
            let f = form(3, 12, &entries);
            let uv = op_v(&op_u(&f, 3).unwrap(), 3).unwrap();
            let diff_zero = (1..=12).all(|n| f.coeff(n) == uv.coeff(n));
            assert_eq!(diff_zero, supported);
        }
    }

    #[test]
    fn sieve_examples() {
        let f = form(3, 6, &[(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1)]);
        let s = sieve_coprime(&f, 6).unwrap();
        assert_eq!(s.coeffs().keys().copied().collect::<Vec<_>>(), vec![1, 5]);
        assert_eq!(s.level_value(), 12 * 36);
        assert_eq!(sieve_coprime(&f, 1).unwrap().coeffs(), f.coeffs());
        assert_eq!(sieve_coprime(&s, 6).unwrap().coeffs(), s.coeffs());
        assert!(sieve_coprime(&f, 12).is_err());
    }

    #[test]
    fn descend_examples() {
        let f = form(3, 12, &[(3, 1), (6, 2)]);
        let d = descend(&f, 3).unwrap();
        assert_eq!(d.coeff(1), Some(rat(1)));
        assert_eq!(d.coeff(2), Some(rat(2)));
        assert_eq!(d.level_value(), 4);
        let z = descend(&form(3, 12, &[]), 3).unwrap();
        assert_eq!((z.verdict(), z.level_value()), (Verdict::Zero, 4));
        assert_eq!(descend(&form(3, 12, &[(1, 1)]), 3), Err(HalfIntError::DescendHypothesis { n: 1, p: 3 }));
        let g = form(9, 20, &[(1, 4), (2, 3)]);
        let vd = descend(&op_v(&g, 3).unwrap(), 3).unwrap();
        assert_eq!(vd.coeffs(), g.coeffs());
    }

    #[test]
    fn rule_tracks_support() {
        let rule = SupportRule::coprime_multiple(3, 10);
        assert!(rule.allows(3) && rule.allows(9) && !rule.allows(6) && !rule.allows(15));
        let f = HalfIntForm::new(5, 15, 30, [(3, rat(1)), (9, rat(1))], Some(rule)).unwrap();
        assert_eq!(sieve_coprime(&f, 3).unwrap().verdict(), Verdict::Zero);
        let d = descend(&f, 3).unwrap();
        assert_eq!(sieve_coprime(&d, 5).unwrap().verdict(), Verdict::Nonzero);
        let bare = HalfIntForm::new(5, 15, 30, [(3, rat(1))], None).unwrap();
        assert_eq!(sieve_coprime(&bare, 3).unwrap().verdict(), Verdict::ZeroUpToBound);
    }

    #[test]
    fn sieve_example_single_prime() {
        let f = form(3, 60, &[(3, 1), (15, 2)]);
        let r = run_sieve(&f, 3, 2).unwrap();
        assert_eq!(r.exponents, vec![(3, 1)]);
        assert_eq!(r.g.coeff(1), Some(rat(1)));
        assert_eq!(r.g.coeff(5), Some(rat(2)));
        assert_eq!(r.g.level_value(), 144);
        let steps: Vec<_> = r.trace.steps.iter().map(|s| (s.i, s.verdict, s.level, s.descended_level)).collect();
        assert_eq!(steps, vec![(0, Verdict::Zero, 432, None), (1, Verdict::Nonzero, 144, Some(16))]);
        assert_eq!(r.trace.initial_level, 48);
        assert!(check_postconditions(&f, 3, 2, &r).unwrap().is_empty());
    }

    #[test]
    fn sieve_example_two_primes() {
        let entries: Vec<(u64, BigRational)> =
            (1..=200u64).filter(|n| n % 3 == 0 && n % 5 != 0 && n % 2 != 0).map(|n| (n, rat(n as i64))).collect();
        let rule = SupportRule::coprime_multiple(3, 10);
        let f = HalfIntForm::new(5, 15, 200, entries, Some(rule)).unwrap();
        let r = run_sieve(&f, 15, 2).unwrap();
        assert_eq!(r.exponents, vec![(3, 1), (5, 0)]);
        assert_eq!(r.g.level_value(), 4 * 15 * 4 * 3 * 25);
        assert!(!r.trace.up_to_bound);
        assert!(check_postconditions(&f, 15, 2, &r).unwrap().is_empty());
    }

    #[test]
    fn already_coprime_input() {
        let f = form(15, 50, &[(1, 1), (7, 2), (11, -1)]);
        let r = run_sieve(&f, 15, 2).unwrap();
        assert_eq!(r.exponents, vec![(3, 0), (5, 0)]);
        assert_eq!(r.trace.steps.len(), 2);
        assert_eq!(r.g.coeffs(), f.coeffs());
    }

    #[test]
    fn sieve_errors() {
        let f = form(3, 60, &[(3, 1), (6, 1)]);
        assert_eq!(run_sieve(&f, 3, 2), Err(HalfIntError::SieveHypothesis { n: 6, lf: 2 }));
        assert_eq!(run_sieve(&form(3, 60, &[]), 3, 2), Err(HalfIntError::ZeroInput));
        assert!(run_sieve(&form(3, 60, &[(1, 1)]), 3, 4).is_ok());
        assert!(matches!(run_sieve(&form(3, 60, &[(1, 1)]), 3, 5), Err(HalfIntError::BadLf { .. })));
        // support on 9ℤ exhausts α = 1 for p = 3
        assert_eq!(run_sieve(&form(3, 60, &[(9, 1)]), 3, 2), Err(HalfIntError::Inconsistent { p: 3 }));
        let low = HalfIntForm::new(3, 3, 10, [(1, rat(1))], None).unwrap();
        assert_eq!(run_sieve(&low, 3, 2), Err(HalfIntError::WeightTooSmall(3)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn table() -> impl Strategy<Value = HalfIntForm> {
            (1u64..60, prop::collection::btree_map(1u64..60, -9i64..=9, 0..20)).prop_map(|(bound, m)| {
                HalfIntForm::new(5, 15, bound, m.into_iter().map(|(n, c)| (n, rat(c))), Some(SupportRule::AllStored))
                    .unwrap()
            })
        }

        fn prime() -> impl Strategy<Value = u64> {
            prop::sample::select(vec![2u64, 3, 5, 7])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn u_inverts_v(f in table(), p in prime()) {
                let back = op_u(&op_v(&f, p).unwrap(), p).unwrap();
                prop_assert_eq!(back.coeffs(), f.coeffs());
            }

            #[test]
            fn descend_inverts_v(f in table(), p in prime()) {
                let back = descend(&op_v(&f, p).unwrap(), p).unwrap();
                prop_assert_eq!(back.coeffs(), f.coeffs());
                prop_assert_eq!(back.level_value(), f.level_value());
            }

            #[test]
            fn sieve_is_idempotent(f in table(), s in prop::sample::select(vec![1u64, 2, 3, 6, 15, 30])) {
                let once = sieve_coprime(&f, s).unwrap();
                let twice = sieve_coprime(&once, s).unwrap();
                prop_assert_eq!(twice.coeffs(), once.coeffs());
            }

            #[test]
            fn sieve_postconditions_hold(
                l in prop::sample::select(vec![3u64, 9, 15, 45, 21, 63]),
                e3 in 0u32..3, e5 in 0u32..2, e7 in 0u32..3,
                vals in prop::collection::vec(-4i64..=4, 1..80),
            ) {
                let lf = 2;
                let fact = arith::factorize(l).unwrap();
                let shift: u64 = [(3u64, e3), (5, e5), (7, e7)]
                    .iter()
                    .map(|&(p, e)| p.pow(e.min(fact.exponent_of(p))))
                    .product();
                let bound = 600;
                let mut entries: Vec<(u64, BigRational)> = vals
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (shift * (2 * k as u64 + 1), rat(v)))
                    .collect();
                entries.push((shift, rat(1)));
                let f = HalfIntForm::new(5, l, bound, entries, Some(SupportRule::AllStored)).unwrap();
                let r = run_sieve(&f, l, lf).unwrap();
                prop_assert!(check_postconditions(&f, l, lf, &r).unwrap().is_empty());
                prop_assert_eq!(r.shift(), shift);
            }
        }
    }
}
