//! Euler totient tables, essential p-grid levels, and the totient sums
//! `Σφ(i)`, `Σφ(i)²`, `Σφ(i)²/i³`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::geom::{denominator_lcm, gcd_reduce, RationalPoint, Segment};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumTheoryError {
    #[error("segment {0:?} is not primitive (gcd of differences is {1})")]
    NonPrimitive(Segment, u64),
    #[error("p-grid level must be at least 1")]
    ZeroLevel,
    #[error("range must satisfy {0}")]
    BadRange(&'static str),
}

/// `phi[i] = φ(i)` for `1 <= i <= n_max`; index 0 is unused.
#[derive(Clone, Debug)]
pub struct TotientTable {
    phi: Vec<u64>,
}

impl TotientTable {
    pub fn n_max(&self) -> u64 {
        (self.phi.len() - 1) as u64
    }

    pub fn get(&self, i: u64) -> u64 {
        assert!(i >= 1 && i <= self.n_max(), "φ({i}) outside table");
        self.phi[i as usize]
    }

    /// `φ(1..=n_max)`.
    pub fn values(&self) -> &[u64] {
        &self.phi[1..]
    }
}

/// Linear sieve.
pub fn totient_sieve(n_max: u64) -> TotientTable {
    let n = n_max.max(1) as usize;
    let mut phi = vec![0u64; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    phi[1] = 1;
    for i in 2..=n {
        if phi[i] == 0 {
            phi[i] = (i - 1) as u64;
            primes.push(i);
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            if i % p == 0 {
                phi[ip] = phi[i] * p as u64;
                break;
            }
            phi[ip] = phi[i] * (p as u64 - 1);
        }
    }
    TotientTable { phi }
}

/// The `p` such that the point lies on the essential p-grid: the lcm of its
/// reduced coordinate denominators.
pub fn essential_level(p: &RationalPoint) -> BigInt {
    denominator_lcm(p)
}

/// The p-grid points `P` (parameters `i/p`, `0 < i < p`) of a primitive
/// segment and their essential subset `Q` (`gcd(i, p) = 1`).
pub fn edge_pgrid_points(
    seg: &Segment,
    p: u64,
) -> Result<(Vec<RationalPoint>, Vec<RationalPoint>), NumTheoryError> {
    if p == 0 {
        return Err(NumTheoryError::ZeroLevel);
    }
    let (_, g) = gcd_reduce(seg);
    if g != 1 {
        return Err(NumTheoryError::NonPrimitive(seg.clone(), g));
    }
    let den = BigInt::from(p);
    let a: Vec<BigInt> = seg.a().coords().iter().map(|&c| BigInt::from(c)).collect();
    let delta: Vec<BigInt> = seg.delta().into_iter().map(BigInt::from).collect();
    let mut all = Vec::with_capacity(p.saturating_sub(1) as usize);
    let mut essential = Vec::new();
    for i in 1..p {
        let bi = BigInt::from(i);
        let scaled: Vec<BigInt> = a
            .iter()
            .zip(&delta)
            .map(|(ac, d)| ac * &den + &bi * d)
            .collect();
        let point = RationalPoint::from_scaled(&scaled, &den);
        if i.gcd(&p) == 1 {
            essential.push(point.clone());
        }
        all.push(point);
    }
    Ok((all, essential))
}

/// Exact running value of `Σ_{i<=k} φ(i)²/i³`, kept as `num / lcm(1..k)³`
/// without gcd reductions so each step costs one pass over the digits.
#[derive(Clone, Debug)]
pub struct CubeHarmonicSum {
    k: u64,
    lcm: BigUint,
    num: BigUint,
    den: BigUint,
}

impl Default for CubeHarmonicSum {
    fn default() -> Self {
        Self::new()
    }
}

impl CubeHarmonicSum {
    pub fn new() -> Self {
        CubeHarmonicSum {
            k: 0,
            lcm: BigUint::one(),
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    /// Adds the next term `φ(k+1)² / (k+1)³`.
    pub fn push(&mut self, phi: u64) {
        self.k += 1;
        let i = self.k;
        let r = (&self.lcm % i).to_u64().expect("remainder below i");
        let f = i / r.gcd(&i);
        if f > 1 {
            let f3 = BigUint::from(f) * f * f;
            self.lcm *= f;
            self.num *= &f3;
            self.den *= &f3;
        }
        let i3 = BigUint::from(i) * i * i;
        let term = (&self.den / i3) * (BigUint::from(phi) * phi);
        self.num += term;
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Reduced exact value.
    pub fn value(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.num.clone()),
            BigInt::from(self.den.clone()),
        )
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.num, &self.den)
    }
}

/// `num / den` to double precision, for big operands of any size.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift_n = num.bits().saturating_sub(64);
    let shift_d = den.bits().saturating_sub(64);
    let n = (num >> shift_n).to_f64().unwrap();
    let d = (den >> shift_d).to_f64().unwrap();
    let e = shift_n as i64 - shift_d as i64;
    n / d * 2f64.powi(e as i32)
}

/// The three totient sums up to `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TotientSums {
    pub n: u64,
    pub s1: u128,
    pub s2: u128,
    pub s3: BigRational,
}

pub fn totient_sums(n: u64) -> TotientSums {
    let table = totient_sieve(n);
    let mut s1 = 0u128;
    let mut s2 = 0u128;
    let mut s3 = CubeHarmonicSum::new();
    for &phi in &table.values()[..n as usize] {
        s1 += phi as u128;
        s2 += (phi as u128) * (phi as u128);
        s3.push(phi);
    }
    TotientSums {
        n,
        s1,
        s2,
        s3: s3.value(),
    }
}

/// One row of the running totient-sum table. `s3_f64` is the exact sum
/// rounded for display.
#[derive(Clone, Debug, Serialize)]
pub struct TotientRow {
    pub n: u64,
    pub phi: u64,
    pub s1: u128,
    pub s2: u128,
    pub s3_f64: f64,
}

/// Streams rows `n = 1..=n_max` of the running sums.
pub fn totient_rows(n_max: u64) -> impl Iterator<Item = TotientRow> {
    let table = totient_sieve(n_max);
    let mut s1 = 0u128;
    let mut s2 = 0u128;
    let mut s3 = CubeHarmonicSum::new();
    (1..=n_max).map(move |n| {
        let phi = table.get(n);
        s1 += phi as u128;
        s2 += (phi as u128) * (phi as u128);
        s3.push(phi);
        TotientRow {
            n,
            phi,
            s1,
            s2,
            s3_f64: s3.to_f64(),
        }
    })
}

/// Outcome of checking the totient-sum inequalities on `1..=n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct TotientReport {
    pub n_max: u64,
    /// Every `n` with `Σφ(i)² >= n³` (the strict upper bound fails there).
    pub upper_violations: Vec<u64>,
    /// Every `n` with `Σφ(i)² > n³` (the non-strict form fails there).
    pub upper_violations_non_strict: Vec<u64>,
    /// Every `n` with `11·Σφ(i)² < n³`.
    pub lower_violations: Vec<u64>,
    /// Smallest `n0` with `11·Σφ(i)² >= n³` for all `n` in `n0..=n_max`.
    pub lower_threshold: Option<u64>,
    pub min_s2_ratio: f64,
    pub min_s2_ratio_at: u64,
    pub final_s2_ratio: f64,
    /// `min Σφ(i)²/i³ / ln k` over `k` in `27..=n_max`.
    pub log_constant: f64,
    pub log_constant_at: u64,
    /// `k` in `27..=n_max` where `Σφ(i)²/i³ < log_slope · ln k`.
    pub log_violations: Vec<u64>,
    pub log_slope: f64,
    /// Sum of the per-block lower bounds `(1/11 - 1/27)` over the
    /// `floor(log_3 n_max)` base-3 blocks.
    pub block_bound: f64,
}

/// Checks `Σφ(i)² < n³`, `Σφ(i)² >= n³/11`, and `Σφ(i)²/i³ >= slope·ln k`
/// on every `n` (resp. `k >= 27`) up to `n_max`.
pub fn verify_totient_inequalities(
    n_max: u64,
    log_slope: f64,
) -> Result<TotientReport, NumTheoryError> {
    if n_max < 27 {
        return Err(NumTheoryError::BadRange("n_max >= 27"));
    }
    let mut upper_violations = Vec::new();
    let mut upper_violations_non_strict = Vec::new();
    let mut lower_violations = Vec::new();
    let mut min_s2_ratio = f64::INFINITY;
    let mut min_s2_ratio_at = 0;
    let mut final_s2_ratio = 0.0;
    let mut log_constant = f64::INFINITY;
    let mut log_constant_at = 0;
    let mut log_violations = Vec::new();
    for row in totient_rows(n_max) {
        let n = row.n as u128;
        let cube = n * n * n;
        if row.s2 >= cube {
            upper_violations.push(row.n);
        }
        if row.s2 > cube {
            upper_violations_non_strict.push(row.n);
        }
        if 11 * row.s2 < cube {
            lower_violations.push(row.n);
        }
        let ratio = row.s2 as f64 / cube as f64;
        if ratio < min_s2_ratio {
            min_s2_ratio = ratio;
            min_s2_ratio_at = row.n;
        }
        final_s2_ratio = ratio;
        if row.n >= 27 {
            let ln_k = (row.n as f64).ln();
            let c = row.s3_f64 / ln_k;
            if c < log_constant {
                log_constant = c;
                log_constant_at = row.n;
            }
            if row.s3_f64 < log_slope * ln_k {
                log_violations.push(row.n);
            }
        }
    }
    let lower_threshold = match lower_violations.last() {
        None => Some(1),
        Some(&last) if last < n_max => Some(last + 1),
        Some(_) => None,
    };
    let mut blocks = 0u32;
    let mut pow = 3u64;
    while pow <= n_max {
        blocks += 1;
        pow = pow.saturating_mul(3);
    }
    Ok(TotientReport {
        n_max,
        upper_violations,
        upper_violations_non_strict,
        lower_violations,
        lower_threshold,
        min_s2_ratio,
        min_s2_ratio_at,
        final_s2_ratio,
        log_constant,
        log_constant_at,
        log_violations,
        log_slope,
        block_bound: blocks as f64 * (1.0 / 11.0 - 1.0 / 27.0),
    })
}
