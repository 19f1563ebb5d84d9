//! Theta transformation coefficients `ε_m(ν, μ)`, square classes and the
//! maximal-rank property of the class matrices `M_{ν₀}`.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, eps_exponent, factorize, is_square_free, jacobi_symbol, mod_inverse};
use crate::cyclotomic::{CycloMatrix, CycloNumber, RootMatrix};
use crate::gauss::{self, GaussSumSpec, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaError {
    #[error("level {0} must be odd and positive")]
    EvenLevel(u64),
    #[error("m1 = {m1} must be a square-free divisor of the level {level}")]
    BadM1 { m1: u64, level: u64 },
    #[error("m2 = {m2} must be square-free and coprime to the level {level}")]
    BadM2 { m2: u64, level: u64 },
    #[error("l = {l} must be a unit modulo 2·m2 = {modulus}")]
    BadL { l: i64, modulus: u64 },
    #[error("ν₀ = {nu0} shares a factor with m1 = {m1}")]
    NuNotCoprime { nu0: i64, m1: u64 },
    #[error("{prime} is not a prime dividing the index that can be split off")]
    BadSplit { prime: u64 },
    #[error("index {0} must be positive and square-free")]
    BadIndex(u64),
}

/// `(N, m₁, m₂, M = N/m₁, M̄, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EpsilonContext {
    pub level: u64,
    pub m1: u64,
    pub m2: u64,
    pub big_m: u64,
    pub m_bar: u64,
    pub l: u64,
}

impl EpsilonContext {
    /// Validates the hypotheses. Without `l` the matrix parameter defaults to
    /// `-M̄ mod 4m₂`, the value that appears in `ε` itself.
    pub fn new(level: u64, m1: u64, m2: u64, l: Option<i64>) -> Result<Self, ThetaError> {
        if level == 0 || level.is_multiple_of(2) {
            return Err(ThetaError::EvenLevel(level));
        }
        if m1 == 0 || !level.is_multiple_of(m1) || !is_square_free(m1).unwrap() {
            return Err(ThetaError::BadM1 { m1, level });
        }
        if m2 == 0 || !is_square_free(m2).unwrap() || arith::gcd(level as i64, m2 as i64) != 1 {
            return Err(ThetaError::BadM2 { m2, level });
        }
        let big_m = level / m1;
        let four_m2 = 4 * m2;
        debug_assert_eq!(arith::gcd(level as i64, (4 * m1 * m2) as i64), m1);
        let m_bar = mod_inverse(big_m as i64, four_m2).expect("M is odd and coprime to m2");
        let l = match l {
            Some(l) => {
                if arith::gcd(l, 2 * m2 as i64) != 1 {
                    return Err(ThetaError::BadL { l, modulus: 2 * m2 });
                }
                arith::modulo(l, four_m2)
            }
            None => (four_m2 - m_bar) % four_m2,
        };
        Ok(EpsilonContext { level, m1, m2, big_m, m_bar, l })
    }

    pub fn index(&self) -> u64 {
        self.m1 * self.m2
    }

    /// Order of the field that hosts every `ε` value: `lcm(8, 4m)`.
    pub fn ambient_order(&self) -> u64 {
        arith::lcm(8, 4 * self.index())
    }
}

/// `(1/4m)·G(level, 2(ν−μ), 4m)`, defined for any integer level.
pub fn epsilon_gauss(level: i64, m: u64, nu: i64, mu: i64) -> CycloNumber {
    let g = gauss::gauss_direct(&GaussSumSpec::new(level, 2 * (nu - mu), 4 * m));
    g.scale(&BigRational::new(BigInt::from(1), BigInt::from(4 * m)))
}

/// `ε_m(ν, μ) = (1/2m)·Σ_{η mod 2m} e_{4m}(Nη² + 2η(ν−μ))`.
pub fn epsilon_def(ctx: &EpsilonContext, nu: i64, mu: i64) -> CycloNumber {
    epsilon_gauss(ctx.level as i64, ctx.index(), nu, mu)
}

/// `4m·ε_m(ν, μ)` from the closed form, or `0` when `m₁ ∤ (ν−μ)`.
///
/// With `d = (ν−μ)/m₁` the value is
/// `m₁·(1+i)·ε_M⁻¹·(m₂/M)·2√m₂·e_{4m₂}(−M̄ d²)`.
pub fn epsilon_closed_monomial(ctx: &EpsilonContext, nu: i64, mu: i64) -> Monomial {
    let diff = nu - mu;
    if diff % ctx.m1 as i64 != 0 {
        return Monomial::integer(0);
    }
    let d = (diff / ctx.m1 as i64) as i128;
    let four_m2 = 4 * ctx.m2;
    let sign = jacobi_symbol(ctx.m2 as i64, ctx.big_m as i64).expect("M is odd") as i64;
    let exp = -((ctx.m_bar as i128 * (d * d).rem_euclid(four_m2 as i128)) % four_m2 as i128);
    let eps_inv = -(eps_exponent(ctx.big_m as i64).unwrap() as i64);
    let mut x = Monomial::integer(2 * ctx.m1 as i64 * sign)
        .mul(&Monomial { one_plus_i: true, ..Monomial::integer(1) })
        .mul(&Monomial { root_num: arith::modulo(eps_inv, 4), root_den: 4, ..Monomial::integer(1) })
        .mul(&Monomial { root_num: arith::modulo(exp as i64, four_m2), root_den: four_m2, ..Monomial::integer(1) });
    // √m₂ with m₂ square-free
    let sqrt_m2 = Monomial {
        sqrt_odd: if ctx.m2.is_multiple_of(2) { ctx.m2 / 2 } else { ctx.m2 },
        sqrt2: ctx.m2.is_multiple_of(2),
        ..Monomial::integer(1)
    };
    x = x.mul(&sqrt_m2);
    x
}

/// The closed form `(1/2√m₂)(1+i)ε_M⁻¹(m₂/M)e_{4m₂}(−M̄(ν−μ)²/m₁²)`.
pub fn epsilon_closed(ctx: &EpsilonContext, nu: i64, mu: i64) -> CycloNumber {
    let four_m = 4 * ctx.index();
    epsilon_closed_monomial(ctx, nu, mu)
        .to_cyclo(ctx.ambient_order())
        .scale(&BigRational::new(BigInt::from(1), BigInt::from(four_m)))
}

/// The matrix `(ε(ν, μ))` over all `ν, μ mod 2m` from the definition.
pub fn epsilon_matrix(ctx: &EpsilonContext) -> CycloMatrix {
    let n = 2 * ctx.index() as usize;
    // ε depends on ν − μ only
    let by_diff: Vec<CycloNumber> = (0..n as i64).map(|d| epsilon_def(ctx, d, 0)).collect();
    CycloMatrix::from_fn(ctx.ambient_order(), n, n, |i, j| {
        by_diff[(i as i64 - j as i64).rem_euclid(n as i64) as usize].clone()
    })
    .expect("consistent shape")
}

/// `S_{ν₀} = {ν mod 2m : ν² ≡ ν₀² (mod 4m)}` for `m = m₁m₂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquareClass {
    pub m1: u64,
    pub m2: u64,
    pub nu0: u64,
    pub members: Vec<u64>,
}

impl SquareClass {
    /// Number of primes of `m₁m₂` not dividing `ν₀`.
    pub fn t_prime(&self) -> u32 {
        let m = self.m1 * self.m2;
        factorize(m).unwrap().primes().filter(|p| !self.nu0.is_multiple_of(*p)).count() as u32
    }

    pub fn expected_size(&self) -> usize {
        1 << self.t_prime()
    }
}

pub fn square_class(m1: u64, m2: u64, nu0: i64) -> Result<SquareClass, ThetaError> {
    let m = m1 * m2;
    if m == 0 || !is_square_free(m).unwrap() {
        return Err(ThetaError::BadIndex(m));
    }
    let two_m = 2 * m;
    let four_m = 4 * m;
    let nu0 = arith::modulo(nu0, two_m);
    let target = nu0 * nu0 % four_m;
    let members = (0..two_m).filter(|&v| v * v % four_m == target).collect();
    Ok(SquareClass { m1, m2, nu0, members })
}

/// The square classes partitioning `{ν mod 2m : gcd(ν, m₁) = 1}`, each listed
/// once, ordered by smallest member.
pub fn coprime_square_classes(m1: u64, m2: u64) -> Vec<SquareClass> {
    let two_m = 2 * m1 * m2;
    let mut seen = vec![false; two_m as usize];
    let mut out = Vec::new();
    for v in 0..two_m {
        if seen[v as usize] || arith::gcd(v as i64, m1 as i64) != 1 {
            continue;
        }
        let class = square_class(m1, m2, v as i64).expect("square-free index");
        for &x in &class.members {
            seen[x as usize] = true;
        }
        out.push(class);
    }
    out
}

/// Class matrix for `(m₁, m₂, l)` and the members of a square class, as
/// exponents of `ζ_{4m₂}`: entry `e_{4m₂}(l((ν−μ)/m₁)²)` when `m₁ | ν−μ`,
/// else zero. Columns are the units mod `2m₁m₂` in increasing order.
fn class_root_matrix(m1: u64, m2: u64, l: u64, rows: &[u64]) -> RootMatrix {
    let two_m = 2 * m1 * m2;
    let four_m2 = 4 * m2;
    let cols = arith::units_mod(two_m);
    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    for &nu in rows {
        for &mu in &cols {
            let diff = nu as i64 - mu as i64;
            entries.push(if diff % m1 as i64 == 0 {
                let d = (diff / m1 as i64).rem_euclid(four_m2 as i64) as u64;
                Some(l * (d * d % four_m2) % four_m2)
            } else {
                None
            });
        }
    }
    RootMatrix::new(four_m2, rows.len(), cols.len(), entries)
}

fn check_nu0(ctx: &EpsilonContext, nu0: i64) -> Result<SquareClass, ThetaError> {
    if arith::gcd(nu0, ctx.m1 as i64) != 1 {
        return Err(ThetaError::NuNotCoprime { nu0, m1: ctx.m1 });
    }
    square_class(ctx.m1, ctx.m2, nu0)
}

/// `M_{ν₀}` as a matrix of roots of unity.
pub fn class_matrix_roots(ctx: &EpsilonContext, nu0: i64) -> Result<RootMatrix, ThetaError> {
    let class = check_nu0(ctx, nu0)?;
    Ok(class_root_matrix(ctx.m1, ctx.m2, ctx.l, &class.members))
}

/// `M_{ν₀}` over `Q(ζ_{4m₂})`.
pub fn build_class_matrix(ctx: &EpsilonContext, nu0: i64) -> Result<CycloMatrix, ThetaError> {
    Ok(class_matrix_roots(ctx, nu0)?.to_cyclo())
}

/// `M_{ν₀}` has full row rank.
pub fn verify_max_rank(ctx: &EpsilonContext, nu0: i64) -> Result<bool, ThetaError> {
    let m = class_matrix_roots(ctx, nu0)?;
    Ok(m.rank() == m.rows())
}

/// `A ⊗ B` equals the class matrix with rows `row_perm` and columns
/// `col_perm`: row `i` of the product is row `row_perm[i]` of `M_{ν₀}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrtFactors {
    pub prime: u64,
    pub a: RootMatrix,
    pub b: RootMatrix,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
}

impl CrtFactors {
    /// Checks `A ⊗ B` against the class matrix entry by entry.
    pub fn reproduces(&self, full: &RootMatrix) -> bool {
        let k = self.a.kronecker(&self.b);
        let p = full.permuted(&self.row_perm, &self.col_perm);
        let order = arith::lcm(k.order(), p.order());
        k.change_order(order).unwrap() == p.change_order(order).unwrap()
    }
}

/// Splits `M_{ν₀}` along a prime of the index.
///
/// For `p | m₁` with `m₁ = m₃p`, residues decompose as `ν = 2m₃m₂ν′ + pν″`;
/// `A` is the 0/1 pattern `[ν′ = μ′]` and `B` the class matrix of
/// `(m₃, m₂, l)`. For odd `q | m₂` with `m₂ = m₄q`, `ν = 2m₁m₄ν′ + qν″`;
/// `A = e_q(l·m₄(ν′−μ′)²)` and `B` the class matrix of `(m₁, m₄, lq)`.
pub fn crt_factorize(ctx: &EpsilonContext, nu0: i64, prime: u64) -> Result<CrtFactors, ThetaError> {
    let class = check_nu0(ctx, nu0)?;
    let (m1, m2, l) = (ctx.m1, ctx.m2, ctx.l);
    let two_m = 2 * m1 * m2;
    let (k, a_order, b_m1, b_m2, b_l, in_m1) = if prime > 1 && m1 % prime == 0 {
        let m3 = m1 / prime;
        (2 * m3 * m2, 1, m3, m2, l, true)
    } else if prime > 2 && m2 % prime == 0 && arith::is_prime(prime) {
        let m4 = m2 / prime;
        (2 * m1 * m4, prime, m1, m4, l * prime % (4 * m4), false)
    } else {
        return Err(ThetaError::BadSplit { prime });
    };
    let p = prime;
    // ν′ = ν·k⁻¹ mod p, ν″ = ν·p⁻¹ mod k
    let k_inv = mod_inverse(k as i64, p).unwrap();
    let p_inv = mod_inverse(p as i64, k).unwrap();
    let split = |v: u64| (v % p * k_inv % p, v % k * p_inv % k);

    let nu0r = arith::modulo(nu0, two_m);
    let (n1, n2) = split(nu0r);
    let rows_a: Vec<u64> = (0..p).filter(|&x| x * x % p == n1 * n1 % p).collect();
    let rows_b = square_class(b_m1, b_m2, n2 as i64).unwrap().members;
    let cols_a: Vec<u64> = (1..p).collect();
    let cols_b = arith::units_mod(k);

    let mut a_entries = Vec::new();
    for &x in &rows_a {
        for &y in &cols_a {
            a_entries.push(if in_m1 {
                (x == y).then_some(0)
            } else {
                let d = (x + p - y) % p;
                let m4 = m2 / p;
                Some(l % p * (m4 % p) % p * (d * d % p) % p)
            });
        }
    }
    let a = RootMatrix::new(a_order, rows_a.len(), cols_a.len(), a_entries);
    let b = class_root_matrix(b_m1, b_m2, b_l, &rows_b);

    let combine = |x: u64, y: u64| (k * x + p * y) % two_m;
    let row_index: BTreeMap<u64, usize> =
        class.members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let units = arith::units_mod(two_m);
    let col_index: BTreeMap<u64, usize> = units.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut row_perm = Vec::new();
    for &x in &rows_a {
        for &y in &rows_b {
            row_perm.push(row_index[&combine(x, y)]);
        }
    }
    let mut col_perm = Vec::new();
    for &x in &cols_a {
        for &y in &cols_b {
            col_perm.push(col_index[&combine(x, y)]);
        }
    }
    Ok(CrtFactors { prime, a, b, row_perm, col_perm })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanFailure {
    pub m1: u64,
    pub m2: u64,
    pub l: u64,
    pub nu0: u64,
    pub kind: String,
    pub rows: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub max_index: u64,
    pub include_even: bool,
    pub levels: Option<Vec<u64>>,
    /// `(N, m₁, m₂, ν₀, l)` cells.
    pub cells: u64,
    /// Distinct class matrices whose rank was computed.
    pub matrices: u64,
    pub passes: u64,
    pub crt_checks: u64,
    pub partition_checks: u64,
    pub failures: Vec<ScanFailure>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Splits `m = m₁m₂` to scan. With levels, each odd level `N` gives the
/// single split `m₁ = gcd(N, m)`; without, every odd divisor of `m` is used
/// as `m₁` (with `N = m₁`).
fn scan_splits(max_index: u64, levels: Option<&[u64]>, include_even: bool) -> Vec<(u64, u64, u64)> {
    let mut out: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for m in arith::square_free_up_to(max_index) {
        if !include_even && m % 2 == 0 {
            continue;
        }
        match levels {
            Some(levels) => {
                for &n in levels {
                    let m1 = arith::gcd(n as i64, m as i64);
                    *out.entry((m1, m / m1)).or_default() += 1;
                }
            }
            None => {
                for m1 in arith::divisors(m) {
                    if m1 % 2 == 1 {
                        *out.entry((m1, m / m1)).or_default() += 1;
                    }
                }
            }
        }
    }
    out.into_iter().map(|((a, b), mult)| (a, b, mult)).collect()
}

/// Full-row-rank scan of every class matrix with index `≤ max_index`,
/// including the CRT factorization check and the square-class partition.
pub fn scan_max_rank(max_index: u64, levels: Option<&[u64]>, include_even: bool) -> ScanReport {
    let splits = scan_splits(max_index, levels, include_even);
    let results: Vec<_> = splits
        .par_iter()
        .map(|&(m1, m2, mult)| scan_split(m1, m2, mult))
        .collect();
    let mut report = ScanReport {
        max_index,
        include_even,
        levels: levels.map(|l| l.to_vec()),
        cells: 0,
        matrices: 0,
        passes: 0,
        crt_checks: 0,
        partition_checks: 0,
        failures: Vec::new(),
    };
    for r in results {
        report.cells += r.cells;
        report.matrices += r.matrices;
        report.passes += r.passes;
        report.crt_checks += r.crt_checks;
        report.partition_checks += r.partition_checks;
        report.failures.extend(r.failures);
    }
    report.failures.sort_by_key(|f| (f.m1, f.m2, f.l, f.nu0));
    report
}

struct SplitResult {
    cells: u64,
    matrices: u64,
    passes: u64,
    crt_checks: u64,
    partition_checks: u64,
    failures: Vec<ScanFailure>,
}

fn scan_split(m1: u64, m2: u64, level_mult: u64) -> SplitResult {
    let two_m = 2 * m1 * m2;
    let classes = coprime_square_classes(m1, m2);
    let mut failures = Vec::new();

    // the classes cover exactly the residues ν with gcd(ν, m₁) = 1, which for
    // square-free m are those with gcd(ν, 2m) | 2m₂
    let covered: HashSet<u64> = classes.iter().flat_map(|c| c.members.iter().copied()).collect();
    let total: usize = classes.iter().map(|c| c.members.len()).sum();
    let claimed: HashSet<u64> = (0..two_m)
        .filter(|&v| (2 * m2).is_multiple_of(arith::gcd(v as i64, two_m as i64)))
        .collect();
    let coprime: HashSet<u64> =
        (0..two_m).filter(|&v| arith::gcd(v as i64, m1 as i64) == 1).collect();
    if covered != claimed || covered != coprime || total != covered.len() {
        failures.push(ScanFailure { m1, m2, l: 0, nu0: 0, kind: "partition".into(), rows: 0, rank: 0 });
    }

    let primes: Vec<u64> = factorize(m1 * m2).unwrap().primes().filter(|&p| p % 2 == 1).collect();
    let ls: Vec<u64> = (0..4 * m2).filter(|&l| arith::gcd(l as i64, 2 * m2 as i64) == 1).collect();
    let (mut cells, mut matrices, mut passes, mut crt_checks) = (0, 0, 0, 0);
    for &l in &ls {
        let ctx = EpsilonContext { level: m1, m1, m2, big_m: 1, m_bar: 1, l };
        for class in &classes {
            let m = class_root_matrix(m1, m2, l, &class.members);
            let rank = m.rank();
            matrices += 1;
            let n_cells = class.members.len() as u64 * level_mult;
            cells += n_cells;
            if rank == m.rows() {
                passes += n_cells;
            } else {
                failures.push(ScanFailure {
                    m1,
                    m2,
                    l,
                    nu0: class.members[0],
                    kind: "rank".into(),
                    rows: m.rows(),
                    rank,
                });
            }
            for &p in &primes {
                crt_checks += 1;
                let f = crt_factorize(&ctx, class.members[0] as i64, p).expect("valid split");
                let (ra, rb) = (f.a.rank(), f.b.rank());
                if !f.reproduces(&m) || ra * rb != rank {
                    failures.push(ScanFailure {
                        m1,
                        m2,
                        l,
                        nu0: class.members[0],
                        kind: format!("crt split at {p}"),
                        rows: m.rows(),
                        rank,
                    });
                }
            }
        }
    }
    SplitResult { cells, matrices, passes, crt_checks, partition_checks: 1, failures }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EpsilonIdentityReport {
    pub contexts: u64,
    /// `(ν, μ)` pairs covered; values depend on `ν − μ mod 2m` only.
    pub pairs: u64,
    pub differences: u64,
    pub identity_failures: Vec<(u64, u64, u64, u64)>,
    /// Pairs with `gcd(ν, m₁) > 1` and `μ` a unit mod `2m`.
    pub vanishing_pairs: u64,
    pub vanishing_failures: Vec<(u64, u64, u64, u64, u64)>,
}

/// Contexts with odd `N ≤ max_level`, square-free `m₁ | N` and square-free
/// `m₂ ≤ max_m2` coprime to `N`.
pub fn identity_contexts(max_level: u64, max_m2: u64) -> Vec<EpsilonContext> {
    let mut out = Vec::new();
    for n in (1..=max_level).step_by(2) {
        for m1 in arith::divisors(n) {
            if !is_square_free(m1).unwrap() {
                continue;
            }
            for m2 in 1..=max_m2 {
                if let Ok(ctx) = EpsilonContext::new(n, m1, m2, None) {
                    out.push(ctx);
                }
            }
        }
    }
    out
}

/// Compares definition and closed form of `ε` for every difference `ν − μ`,
/// then checks the vanishing rule on every qualifying pair.
pub fn verify_epsilon_identity(max_level: u64, max_m2: u64) -> EpsilonIdentityReport {
    let contexts = identity_contexts(max_level, max_m2);
    contexts
        .par_iter()
        .map(|ctx| {
            let m = ctx.index();
            let two_m = 2 * m;
            let order = ctx.ambient_order();
            let basis = crate::cyclotomic::basis(order).unwrap();
            let mut r = EpsilonIdentityReport { contexts: 1, pairs: two_m * two_m, ..Default::default() };
            let mut zero = vec![false; two_m as usize];
            let mut v = vec![0i64; order as usize];
            for d in 0..two_m {
                r.differences += 1;
                let direct = GaussSumSpec::new(ctx.level as i64, 2 * d as i64, 4 * m);
                v.iter_mut().for_each(|x| *x = 0);
                gauss::accumulate_direct(&mut v, &direct);
                zero[d as usize] = {
                    let mut w = v.clone();
                    basis.reduce(&mut w);
                    w.iter().all(|&x| x == 0)
                };
                epsilon_closed_monomial(ctx, d as i64, 0).subtract_from(&mut v);
                basis.reduce(&mut v);
                if v.iter().any(|&x| x != 0) {
                    r.identity_failures.push((ctx.level, ctx.m1, ctx.m2, d));
                }
            }
            let units = arith::units_mod(two_m);
            for nu in 0..two_m {
                if arith::gcd(nu as i64, ctx.m1 as i64) == 1 {
                    continue;
                }
                for &mu in &units {
                    r.vanishing_pairs += 1;
                    if !zero[((nu + two_m - mu) % two_m) as usize] {
                        r.vanishing_failures.push((ctx.level, ctx.m1, ctx.m2, nu, mu));
                    }
                }
            }
            r
        })
        .reduce(EpsilonIdentityReport::default, |mut a, b| {
            a.contexts += b.contexts;
            a.pairs += b.pairs;
            a.differences += b.differences;
            a.identity_failures.extend(b.identity_failures);
            a.vanishing_pairs += b.vanishing_pairs;
            a.vanishing_failures.extend(b.vanishing_failures);
            a
        })
}

impl EpsilonIdentityReport {
    pub fn passed(&self) -> bool {
        self.identity_failures.is_empty() && self.vanishing_failures.is_empty()
    }
}
