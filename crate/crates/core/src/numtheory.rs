//! Exact integer number theory: totient, Möbius, inverses, Kloosterman sums,
//! modular hyperbola counts and the coprime pair sets used by the cluster
//! construction.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};

pub fn gcd(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

/// Euler's totient; `totient(0) = 0`.
pub fn totient(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut m = n;
    let mut out = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if m > 1 {
        out -= out / m;
    }
    out
}

pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1, "mobius is defined for n >= 1");
    let mut m = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// Inverse of `x` modulo `q`, normalised to `[1, q]`.
pub fn mod_inverse(x: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    let qi = q as i128;
    let r = (x as i128).rem_euclid(qi);
    let e = r.extended_gcd(&qi);
    if e.gcd != 1 {
        return Err(Error::NoInverse { x, q });
    }
    let inv = e.x.rem_euclid(qi) as u64;
    Ok(if inv == 0 { q } else { inv })
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| is_prime(p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(invalid("modulus must be positive"));
        }
        Ok(Self(q))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// `(x, x̄)` for every residue `0 <= x < q` coprime to `q`.
    pub fn unit_pairs(self) -> Vec<(u64, u64)> {
        let q = self.0;
        (0..q)
            .filter(|&x| x.gcd(&q) == 1)
            .map(|x| (x, mod_inverse(x as i64, q).map(|v| v % q).expect("unit")))
            .collect()
    }

    /// Table of `x̄ mod q`, with `None` for non-units.
    pub fn inverse_table(self) -> Vec<Option<u64>> {
        let mut t = vec![None; self.0 as usize];
        for (x, inv) in self.unit_pairs() {
            t[x as usize] = Some(inv);
        }
        t
    }

    fn reduce(self, v: i128) -> usize {
        v.rem_euclid(self.0 as i128) as usize
    }
}

/// Precomputed units and roots of unity for repeated sums modulo one `q`.
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    q: Modulus,
    units: Vec<(u64, u64)>,
    roots: Vec<Complex64>,
}

impl KloostermanTable {
    pub fn new(q: Modulus) -> Self {
        let n = q.get();
        let roots = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
        Self { q, units: q.unit_pairs(), roots }
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    /// `K(m, n; q) = Σ_{gcd(x,q)=1} e((m x + n x̄)/q)`.
    pub fn sum(&self, m: i64, n: i64) -> Complex64 {
        let q = self.q.get() as i128;
        let (m, n) = ((m as i128).rem_euclid(q), (n as i128).rem_euclid(q));
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, xb) in &self.units {
            s += self.roots[((m * x as i128 + n * xb as i128) % q) as usize];
        }
        s
    }

    /// `Σ_{x ∈ I, gcd(x,q)=1} e(n x̄ / q)` for `I ⊆ [0, q)`.
    pub fn incomplete(&self, interval: HalfOpen, n: i64) -> Result<Complex64> {
        interval.check_within(self.q)?;
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, xb) in &self.units {
            if interval.contains(x as i64) {
                s += self.roots[self.q.reduce(n as i128 * xb as i128)];
            }
        }
        Ok(s)
    }
}

pub fn kloosterman(m: i64, n: i64, q: Modulus) -> Complex64 {
    KloostermanTable::new(q).sum(m, n)
}

pub fn incomplete_kloosterman(interval: HalfOpen, n: i64, q: Modulus) -> Result<Complex64> {
    KloostermanTable::new(q).incomplete(interval, n)
}

/// Largest `|K(m,n;p)|` and largest `|Im K|` over `1 <= m, n < p`.
pub fn kloosterman_extremes(p: Modulus) -> (f64, f64) {
    let table = KloostermanTable::new(p);
    let q = p.get() as i64;
    (1..q)
        .into_par_iter()
        .map(|m| {
            (1..q).fold((0.0f64, 0.0f64), |(a, b), n| {
                let k = table.sum(m, n);
                (a.max(k.norm()), b.max(k.im.abs()))
            })
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)))
}

/// Integer interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfOpen {
    pub lo: i64,
    pub hi: i64,
}

impl HalfOpen {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(invalid(format!("interval [{lo}, {hi}) is reversed")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x < self.hi
    }

    fn check_within(&self, q: Modulus) -> Result<()> {
        if self.lo < 0 || self.hi > q.get() as i64 {
            return Err(invalid(format!("interval [{}, {}) must lie in [0, {})", self.lo, self.hi, q.get())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolaQuery {
    pub q: Modulus,
    pub h: i64,
    pub i1: HalfOpen,
    pub i2: HalfOpen,
}

impl HyperbolaQuery {
    pub fn new(q: Modulus, h: i64, i1: HalfOpen, i2: HalfOpen) -> Result<Self> {
        i1.check_within(q)?;
        i2.check_within(q)?;
        Ok(Self { q, h, i1, i2 })
    }

    /// `φ(q) |I1| |I2| / q²`.
    pub fn main_term(&self) -> f64 {
        let q = self.q.get() as f64;
        totient(self.q.get()) as f64 * self.i1.len() as f64 * self.i2.len() as f64 / (q * q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolaCount {
    pub count: u64,
    pub main_term: f64,
    pub error: f64,
}

/// `#{(x, y) ∈ I1 × I2 : gcd(x, q) = 1, x y ≡ h (mod q)}`.
pub fn hyperbola_count(query: &HyperbolaQuery) -> HyperbolaCount {
    let q = query.q;
    let count = (query.i1.lo..query.i1.hi)
        .filter(|&x| gcd(x, q.get() as i64) == 1)
        .filter(|&x| {
            let xb = mod_inverse(x, q.get()).expect("unit");
            let y = q.reduce(query.h as i128 * xb as i128) as i64;
            query.i2.contains(y)
        })
        .count() as u64;
    let main_term = query.main_term();
    HyperbolaCount { count, main_term, error: count as f64 - main_term }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSum {
    pub sum: f64,
    pub main_term: f64,
}

/// `Σ f(a, b)` over `a ∈ I1`, `b ∈ I2`, `a b ≡ h (mod q)`, `gcd(b, q) = 1`,
/// against `φ(q)/q² ∬ f` over `[lo1, hi1] × [lo2, hi2]`.
pub fn weighted_hyperbola_sum<F: Fn(f64, f64) -> f64>(
    query: &HyperbolaQuery,
    f: F,
    cfg: &QuadratureConfig,
) -> Result<WeightedSum> {
    let q = query.q;
    let mut sum = 0.0;
    for b in query.i2.lo..query.i2.hi {
        if gcd(b, q.get() as i64) != 1 {
            continue;
        }
        let bb = mod_inverse(b, q.get())? as i128;
        let a0 = q.reduce(query.h as i128 * bb) as i64;
        // a ranges over a0 + kq inside I1
        let first = query.i1.lo + (a0 - query.i1.lo).rem_euclid(q.get() as i64);
        let mut a = first;
        while a < query.i1.hi {
            sum += f(a as f64, b as f64);
            a += q.get() as i64;
        }
    }
    let (x0, x1) = (query.i1.lo as f64, query.i1.hi as f64);
    let (y0, y1) = (query.i2.lo as f64, query.i2.hi as f64);
    let inner_cfg = QuadratureConfig { abs_tol: cfg.abs_tol / (x1 - x0).max(1.0), ..*cfg };
    let mut failure = None;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), y0, y1, &inner_cfg) {
            Ok(e) => e.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        x0,
        x1,
        cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let qf = q.get() as f64;
    Ok(WeightedSum { sum, main_term: totient(q.get()) as f64 / (qf * qf) * outer.value })
}

/// Splits `d = d1 d2` with `d1` the largest divisor of `d` coprime to `b`.
pub fn coprime_split(d: u64, b: u64) -> (u64, u64) {
    let mut d1 = d;
    loop {
        let g = d1.gcd(&b);
        if g == 1 {
            break;
        }
        d1 /= g;
    }
    (d1, d / d1)
}

/// `#{0 <= m <= 2d-1 : gcd(a + b m, d) = 1} = 2 φ(d1) d2`.
pub fn coprime_progression_count(a: u64, b: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(invalid("d must be positive"));
    }
    if a.gcd(&b).gcd(&d) != 1 {
        return Err(invalid(format!("gcd({a}, {b}, {d}) must be 1")));
    }
    let (d1, d2) = coprime_split(d, b);
    Ok(2 * totient(d1) * d2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionPairSet {
    pub a: u64,
    pub b: u64,
    pub q: u64,
    /// Sorted by `(A, B)`.
    pub pairs: Vec<(u64, u64)>,
}

impl SolutionPairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether `(A, B)` satisfies `1 <= A, B <= 2q`, `gcd(A, B) = 1`, `q | A b - B a`.
    pub fn admits(&self, big_a: u64, big_b: u64) -> bool {
        let lim = 2 * self.q;
        (1..=lim).contains(&big_a)
            && (1..=lim).contains(&big_b)
            && big_a.gcd(&big_b) == 1
            && (big_a as i128 * self.b as i128 - big_b as i128 * self.a as i128) % self.q as i128 == 0
    }
}

/// Coprime pairs `(A, B) ∈ [1, 2q]²` with `q | A b - B a`.
///
/// `a` or `b` may be zero (an observer coordinate approximated by an integer)
/// provided `gcd(a, b, q) = 1`.
pub fn build_solution_pairs(a: u64, b: u64, q: u64) -> Result<SolutionPairSet> {
    build_solution_pairs_in(a, b, q, 2 * q)
}

/// As [`build_solution_pairs`] with both coordinates restricted to `[1, limit]`.
pub fn build_solution_pairs_in(a: u64, b: u64, q: u64, limit: u64) -> Result<SolutionPairSet> {
    if q == 0 || a > q || b > q {
        return Err(invalid(format!("need 0 <= a, b <= q with q >= 1, got a={a}, b={b}, q={q}")));
    }
    if a.gcd(&b).gcd(&q) != 1 {
        return Err(invalid(format!("gcd({a}, {b}, {q}) must be 1")));
    }
    let qi = q as i64;
    // Solve a B ≡ A b (mod q): with g = gcd(a, q), solvable iff g | A b.
    let g = a.gcd(&q) as i64;
    let step = qi / g;
    let a_red = (a as i64 / g) % step;
    let a_inv = if step == 1 { 0 } else { mod_inverse(a_red, step as u64)? as i64 };
    let mut pairs = Vec::new();
    for big_a in 1..=limit as i64 {
        let rhs = (big_a * b as i64).rem_euclid(qi);
        if rhs % g != 0 {
            continue;
        }
        let b0 = ((rhs / g) * a_inv).rem_euclid(step.max(1));
        let mut big_b = if b0 == 0 { step } else { b0 };
        while big_b <= limit as i64 {
            if big_a.gcd(&big_b) == 1 {
                pairs.push((big_a as u64, big_b as u64));
            }
            big_b += step;
        }
    }
    Ok(SolutionPairSet { a, b, q, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_functions() {
        assert_eq!(totient(12), 4);
        assert_eq!(totient(1), 1);
        assert_eq!(totient(97), 96);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(4), 0);
        assert_eq!(mobius(1), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert_eq!(mod_inverse(-3, 7).unwrap(), 2);
        assert!(matches!(mod_inverse(4, 8), Err(Error::NoInverse { .. })));
    }

    #[test]
    fn totient_divisor_sum() {
        for n in 1..=2000u64 {
            let s: u64 = (1..=n).filter(|d| n % d == 0).map(totient).sum();
            assert_eq!(s, n);
        }
    }

    #[test]
    fn mobius_sums_vanish() {
        for n in 2..=500u64 {
            let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) as i64).sum();
            assert_eq!(s, 0, "n = {n}");
        }
    }

    #[test]
    fn small_kloosterman_values() {
        let k = kloosterman(1, 1, Modulus::new(2).unwrap());
        assert!((k.re - 1.0).abs() < 1e-12 && k.im.abs() < 1e-12);
        let k = kloosterman(1, 1, Modulus::new(5).unwrap());
        assert!((k.re - (2.0 + 2.0 * (0.8 * std::f64::consts::PI).cos())).abs() < 1e-12);
        assert!((k.re - 0.381966).abs() < 1e-6);
        for q in [1u64, 7, 12, 30] {
            let k = kloosterman(0, 0, Modulus::new(q).unwrap());
            assert!((k.re - totient(q) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn incomplete_sums() {
        let q = Modulus::new(5).unwrap();
        let s = incomplete_kloosterman(HalfOpen::new(0, 5).unwrap(), 1, q).unwrap();
        assert!((s.re + 1.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        let q = Modulus::new(36).unwrap();
        let s = incomplete_kloosterman(HalfOpen::new(0, 36).unwrap(), 0, q).unwrap();
        assert!((s.re - 12.0).abs() < 1e-9);
        assert!(incomplete_kloosterman(HalfOpen::new(0, 37).unwrap(), 0, q).is_err());
    }

    #[test]
    fn hyperbola_small_cases() {
        let q = Modulus::new(5).unwrap();
        let full = HalfOpen::new(0, 5).unwrap();
        let r = hyperbola_count(&HyperbolaQuery::new(q, 1, full, full).unwrap());
        assert_eq!(r.count, 4);
        assert_eq!(r.main_term, 4.0);
        assert_eq!(r.error, 0.0);
        let one = Modulus::new(1).unwrap();
        let i = HalfOpen::new(0, 1).unwrap();
        assert_eq!(hyperbola_count(&HyperbolaQuery::new(one, 3, i, i).unwrap()).count, 1);
    }

    #[test]
    fn hyperbola_matches_definition() {
        for q in [6u64, 10, 17, 24] {
            let m = Modulus::new(q).unwrap();
            for h in -3..=5i64 {
                let i1 = HalfOpen::new(1, q as i64 - 1).unwrap();
                let i2 = HalfOpen::new(0, q as i64 / 2 + 1).unwrap();
                let brute = (i1.lo..i1.hi)
                    .flat_map(|x| (i2.lo..i2.hi).map(move |y| (x, y)))
                    .filter(|&(x, y)| gcd(x, q as i64) == 1 && (x * y - h).rem_euclid(q as i64) == 0)
                    .count() as u64;
                assert_eq!(hyperbola_count(&HyperbolaQuery::new(m, h, i1, i2).unwrap()).count, brute);
            }
        }
    }

    #[test]
    fn weighted_sum_cases() {
        let cfg = QuadratureConfig::default();
        let q = Modulus::new(7).unwrap();
        let full = HalfOpen::new(0, 7).unwrap();
        let query = HyperbolaQuery::new(q, 3, full, full).unwrap();
        let w = weighted_hyperbola_sum(&query, |x, y| x + y, &cfg).unwrap();
        let brute: f64 = (0..7i64)
            .flat_map(|a| (0..7i64).map(move |b| (a, b)))
            .filter(|&(a, b)| gcd(b, 7) == 1 && (a * b - 3).rem_euclid(7) == 0)
            .map(|(a, b)| (a + b) as f64)
            .sum();
        assert_eq!(w.sum, brute);
        assert!((w.main_term - 6.0 / 49.0 * 343.0).abs() < 1e-9);

        let q = Modulus::new(11).unwrap();
        let i1 = HalfOpen::new(2, 9).unwrap();
        let query = HyperbolaQuery::new(q, 1, i1, i1).unwrap();
        let ones = weighted_hyperbola_sum(&query, |_, _| 1.0, &cfg).unwrap();
        let r = hyperbola_count(&query);
        assert_eq!(ones.sum, r.count as f64);
        assert!((ones.main_term - r.main_term).abs() < 1e-9);
    }

    #[test]
    fn coprime_progression_examples() {
        assert_eq!(coprime_progression_count(1, 1, 1).unwrap(), 2);
        assert_eq!(coprime_progression_count(1, 2, 4).unwrap(), 8);
        assert_eq!(coprime_progression_count(2, 3, 6).unwrap(), 6);
        assert!(coprime_progression_count(2, 4, 6).is_err());
        assert_eq!(coprime_split(360, 6), (5, 72));
    }

    #[test]
    fn solution_pairs_small() {
        let set = build_solution_pairs(1, 1, 4).unwrap();
        for p in [(1, 1), (1, 5), (5, 1), (3, 7), (7, 3)] {
            assert!(set.pairs.contains(&p), "{p:?}");
        }
        let brute: Vec<(u64, u64)> = (1..=8u64)
            .flat_map(|a| (1..=8u64).map(move |b| (a, b)))
            .filter(|&(a, b)| a.gcd(&b) == 1 && (a as i64 - b as i64) % 4 == 0)
            .collect();
        assert_eq!(set.pairs, brute);
        let only = build_solution_pairs_in(3, 3, 10, 10).unwrap();
        assert_eq!(only.pairs, vec![(1, 1)]);
        assert!(build_solution_pairs(2, 4, 6).is_err());
    }

    proptest! {
        #[test]
        fn solution_pairs_match_brute_force(q in 1u64..30, a in 0u64..30, b in 0u64..30) {
            prop_assume!(a <= q && b <= q && a.gcd(&b).gcd(&q) == 1);
            let set = build_solution_pairs(a, b, q).unwrap();
            let brute: Vec<(u64, u64)> = (1..=2 * q)
                .flat_map(|x| (1..=2 * q).map(move |y| (x, y)))
                .filter(|&(x, y)| set.admits(x, y))
                .collect();
            prop_assert_eq!(set.pairs, brute);
        }

        #[test]
        fn inverse_roundtrip(x in -1000i64..1000, q in 1u64..500) {
            match mod_inverse(x, q) {
                Ok(v) => {
                    prop_assert!((1..=q).contains(&v));
                    prop_assert_eq!((x as i128 * v as i128).rem_euclid(q as i128), 1 % q as i128);
                }
                Err(_) => prop_assert!(gcd(x, q as i64) != 1),
            }
        }
    }
}
