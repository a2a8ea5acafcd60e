//! Clusters of nearly aligned lattice points and certified lower bounds for
//! the 6-level correlation.
//!
//! Given `q x ≈ a`, `q y ≈ b` and a coprime pair `(A, B)` with `q | A b - B a`,
//! the points `(u + m A, v + m B)` for `m` just below `Q / max(A, B)` lie on a
//! line passing within `O(1/q)` of the observer, so from the observer they
//! subtend angles of order `M / (Q² √T)`. Every 6-tuple of distinct points of
//! one cluster then contributes to the 6-level correlation.

use std::collections::HashSet;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{nu_correlation_with_cap, within_scale, CorrelationSpec, DEFAULT_WORK_CAP};
use crate::error::{invalid, Error, Result};
use crate::lattice::{angular_separation, ray_angle, LatticeBox, LatticePoint, Observer};
use crate::numtheory::{build_solution_pairs, mod_inverse};

/// `q` with `|q x - a|, |q y - b| <= 1/√T`, reduced so that `gcd(a, b, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationTriple {
    pub a: u64,
    pub b: u64,
    pub q: u64,
    pub err_x: f64,
    pub err_y: f64,
    pub t: u64,
}

/// Smallest `q <= T` with `⟨q x⟩, ⟨q y⟩ <= 1/√T` and `max(a, b) > 0`.
///
/// Minkowski's theorem guarantees some `q <= T` meets the two distance
/// conditions; the extra `max(a, b) > 0` can fail only for observers within
/// `1/(q√T)` of the origin, which is reported as an error.
pub fn minkowski_approx(x: f64, y: f64, t: u64) -> Result<ApproximationTriple> {
    if t < 2 {
        return Err(invalid(format!("T = {t} must be at least 2")));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(invalid("observer must be finite"));
    }
    let bound = 1.0 / (t as f64).sqrt();
    for q in 1..=t {
        let (qx, qy) = (q as f64 * x, q as f64 * y);
        let (a, b) = (qx.round(), qy.round());
        let (ex, ey) = ((qx - a).abs(), (qy - b).abs());
        if ex <= bound && ey <= bound && a.max(b) > 0.0 {
            let (a, b) = (a as u64, b as u64);
            let g = a.gcd(&b).gcd(&q);
            return Ok(ApproximationTriple { a: a / g, b: b / g, q: q / g, err_x: ex / g as f64, err_y: ey / g as f64, t });
        }
    }
    Err(Error::Invalid(format!("no approximation with max(a, b) > 0 and q <= {t} for ({x}, {y})")))
}

/// `⌊Q^{3/4}⌋`.
pub fn default_t(radius: u64) -> u64 {
    ((radius as f64).powf(0.75).floor() as u64).max(2)
}

/// `min(⌊Q / 4q⌋, ⌊√T / ln Q⌋)`.
pub fn choose_m(q: u64, radius: u64, t: u64) -> Result<u64> {
    if q == 0 || radius <= q || t < 2 {
        return Err(invalid(format!("need Q > q >= 1 and T >= 2, got q={q}, Q={radius}, T={t}")));
    }
    let m = max_cluster_len(q, radius).min(((t as f64).sqrt() / (radius as f64).ln()).floor() as u64);
    if m < 1 {
        return Err(Error::Config(format!("cluster size is 0 for q={q}, Q={radius}, T={t}; Q is too small")));
    }
    Ok(m)
}

/// `⌊Q / 4q⌋`, the largest cluster size the construction allows.
pub fn max_cluster_len(q: u64, radius: u64) -> u64 {
    radius / (4 * q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub a: i64,
    pub b: i64,
    pub q: i64,
    pub big_a: i64,
    pub big_b: i64,
    /// `(b A - a B) / q`.
    pub c: i64,
    pub u: i64,
    pub v: i64,
    /// `⌊Q / max(A, B)⌋`.
    pub s: i64,
    /// Built with the roles of the coordinates exchanged, because `B > A`.
    pub swapped: bool,
    /// `(u + m A, v + m B)` for `m = s - M, ..., s - 1`, in that order.
    pub points: Vec<LatticePoint>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` points with the largest `m`.
    pub fn outer(&self, k: usize) -> &[LatticePoint] {
        &self.points[self.points.len() - k.min(self.points.len())..]
    }
}

fn build_oriented(a: i64, b: i64, q: i64, big_a: i64, big_b: i64, radius: i64, m: i64) -> Result<ClusterSet> {
    let num = b * big_a - a * big_b;
    if num % q != 0 {
        return Err(invalid(format!("q = {q} does not divide bA - aB = {num}")));
    }
    let c = num / q;
    let u = if big_a == 1 { 0 } else { (-(mod_inverse(big_b, big_a as u64)? as i64) * c).rem_euclid(big_a) };
    let vn = big_b * u + c;
    assert!(vn % big_a == 0, "v = (Bu + C)/A must be integral: B={big_b}, u={u}, C={c}, A={big_a}");
    let v = vn / big_a;
    let s = radius / big_a;
    if m > s {
        return Err(Error::Config(format!("cluster size {m} exceeds s = {s}")));
    }
    let points = (s - m..s).map(|k| LatticePoint::new(u + k * big_a, v + k * big_b)).collect();
    Ok(ClusterSet { a, b, q, big_a, big_b, c, u, v, s, swapped: false, points })
}

/// The set `M_{A,B}` of `M` points for the approximation `(a, b, q)`.
///
/// For `B > A` the construction runs with both coordinates exchanged and the
/// result is exchanged back, so `A v - B u = C` holds either way.
pub fn build_cluster(approx: &ApproximationTriple, big_a: u64, big_b: u64, radius: u64, m: u64) -> Result<ClusterSet> {
    let (a, b, q) = (approx.a as i64, approx.b as i64, approx.q as i64);
    if a == 0 || b == 0 {
        // With b = 0 and a = q the bound -B < C fails and v can be -1.
        return Err(Error::Config(format!(
            "approximation ({}, {}, {}) has a zero numerator; the construction needs 1 <= a, b <= q (Q too small for this observer)",
            a, b, q
        )));
    }
    if big_a == 0 || big_b == 0 || big_a.gcd(&big_b) != 1 || big_a > 2 * approx.q || big_b > 2 * approx.q {
        return Err(invalid(format!("({big_a}, {big_b}) is not an admissible coprime pair in [1, 2q]^2")));
    }
    if m == 0 || m > max_cluster_len(approx.q, radius) {
        return Err(Error::Config(format!("cluster size {m} must lie in [1, Q/4q]")));
    }
    let (ba, bb, qr, mm) = (big_a as i64, big_b as i64, radius as i64, m as i64);
    if bb <= ba {
        return build_oriented(a, b, q, ba, bb, qr, mm);
    }
    let t = build_oriented(b, a, q, bb, ba, qr, mm)?;
    Ok(ClusterSet {
        a,
        b,
        q,
        big_a: ba,
        big_b: bb,
        c: -t.c,
        u: t.v,
        v: t.u,
        s: t.s,
        swapped: true,
        points: t.points.iter().map(|p| LatticePoint::new(p.a, p.q)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConstructionCheck {
    /// Every point is at distance at least `Q/3` from `[0,1]^2`.
    pub distance: bool,
    /// Every point lies in `[0, Q]^2`.
    pub containment: bool,
    /// No point is shared by two clusters.
    pub disjoint: bool,
    /// `(q n2 - b) A = (q n1 - a) B` for every point `(n1, n2)`.
    pub ratio: bool,
    /// `b A - a B = q C`, `A v - B u = C`, `0 <= v <= B` (or `0 <= u <= A` when swapped), `|points| = M`.
    pub identities: bool,
    /// Smallest `9 dist² - Q²` over all points; non-negative when `distance` holds.
    pub distance_margin: i128,
    pub violations: Vec<String>,
}

impl ConstructionCheck {
    pub fn passed(&self) -> bool {
        self.distance && self.containment && self.disjoint && self.ratio && self.identities
    }
}

/// Checks the structural guarantees of a cluster family on integer data.
pub fn validate_construction(clusters: &[ClusterSet], radius: u64, expected_len: Option<usize>) -> ConstructionCheck {
    let q2 = (radius as i128).pow(2);
    let qr = radius as i64;
    let mut rep = ConstructionCheck {
        distance: true,
        containment: true,
        disjoint: true,
        ratio: true,
        identities: true,
        distance_margin: i128::MAX,
        violations: Vec::new(),
    };
    let mut seen: HashSet<LatticePoint> = HashSet::new();
    for cl in clusters {
        let (ba, bb) = (cl.big_a as i128, cl.big_b as i128);
        let (a, b, q) = (cl.a as i128, cl.b as i128, cl.q as i128);
        let small_ok = if cl.swapped { (0..=cl.big_a).contains(&cl.u) } else { (0..=cl.big_b).contains(&cl.v) };
        if b * ba - a * bb != q * cl.c as i128
            || ba * cl.v as i128 - bb * cl.u as i128 != cl.c as i128
            || !small_ok
            || expected_len.is_some_and(|m| m != cl.len())
        {
            rep.identities = false;
            rep.violations.push(format!("identities fail for (A, B) = ({}, {})", cl.big_a, cl.big_b));
        }
        for &p in &cl.points {
            let dx = (p.q - 1).max(0).max(-p.q) as i128;
            let dy = (p.a - 1).max(0).max(-p.a) as i128;
            let margin = 9 * (dx * dx + dy * dy) - q2;
            rep.distance_margin = rep.distance_margin.min(margin);
            if margin < 0 {
                rep.distance = false;
                rep.violations.push(format!("{p:?} closer than Q/3 to the unit square"));
            }
            if !(0..=qr).contains(&p.q) || !(0..=qr).contains(&p.a) {
                rep.containment = false;
                rep.violations.push(format!("{p:?} outside [0, Q]^2"));
            }
            if (q * p.a as i128 - b) * ba != (q * p.q as i128 - a) * bb {
                rep.ratio = false;
                rep.violations.push(format!("{p:?} off the direction ({}, {})", cl.big_a, cl.big_b));
            }
            if !seen.insert(p) {
                rep.disjoint = false;
                rep.violations.push(format!("{p:?} belongs to two clusters"));
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleAudit {
    /// Largest folded angular separation between two points of the cluster.
    pub max_angle: f64,
    /// Largest `|sin θ|` over pairs.
    pub max_sin: f64,
    /// `9 M |C + B x - A y| / Q²`.
    pub sine_bound: f64,
    /// `M (|b - q y| + |q x - a|) / Q²`, the scale of the angle bound.
    pub angle_scale: f64,
    /// `max_angle / angle_scale`, the constant realised in the angle bound.
    pub implied_constant: f64,
}

impl AngleAudit {
    pub fn holds(&self) -> bool {
        self.max_sin <= self.sine_bound
    }
}

pub fn cluster_angle_audit(cluster: &ClusterSet, obs: &Observer, radius: u64) -> Result<AngleAudit> {
    let (x, y) = (obs.x, obs.y);
    let pts = &cluster.points;
    let angles: Vec<f64> = pts.iter().map(|&p| ray_angle(obs, p)).collect::<Result<_>>()?;
    let mut max_angle = 0.0f64;
    let mut max_sin = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            max_angle = max_angle.max(angular_separation(angles[i], angles[j]));
            let (u1, v1) = (pts[i].q as f64 - x, pts[i].a as f64 - y);
            let (u2, v2) = (pts[j].q as f64 - x, pts[j].a as f64 - y);
            let sin = (u1 * v2 - v1 * u2).abs() / (u1.hypot(v1) * u2.hypot(v2));
            max_sin = max_sin.max(sin);
        }
    }
    let q2 = (radius as f64).powi(2);
    let m = pts.len() as f64;
    let sine_bound = 9.0 * m * (cluster.c as f64 + cluster.big_b as f64 * x - cluster.big_a as f64 * y).abs() / q2;
    let qf = cluster.q as f64;
    let angle_scale = m * ((cluster.b as f64 - qf * y).abs() + (qf * x - cluster.a as f64).abs()) / q2;
    let implied_constant = if angle_scale > 0.0 { max_angle / angle_scale } else { 0.0 };
    Ok(AngleAudit { max_angle, max_sin, sine_bound, angle_scale, implied_constant })
}

/// `m (m - 1) ⋯ (m - 5)`.
pub fn falling6(m: u64) -> u128 {
    (0..6).map(|i| (m as u128).saturating_sub(i)).product()
}

/// Approximation, coprime pairs and one cluster of size `m` per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub radius: u64,
    pub approx: ApproximationTriple,
    pub m: u64,
    pub clusters: Vec<ClusterSet>,
}

/// Builds every cluster `M_{A,B}` of size `m` for `(x, y)` at box radius `Q`.
pub fn build_construction(x: f64, y: f64, radius: u64, t: u64, m: Option<u64>) -> Result<Construction> {
    let approx = minkowski_approx(x, y, t)?;
    let m = match m {
        Some(m) => m,
        None => choose_m(approx.q, radius, t)?,
    };
    let pairs = build_solution_pairs(approx.a, approx.b, approx.q)?;
    let clusters = pairs
        .pairs
        .par_iter()
        .map(|&(ba, bb)| build_cluster(&approx, ba, bb, radius, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Construction { radius, approx, m, clusters })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceConfig {
    /// Approximation range; `⌊Q^{3/4}⌋` when `None`.
    pub t: Option<u64>,
    pub delta: f64,
    /// Largest `N` for which the full 6-level count is attempted.
    pub count_max_points: u64,
    pub work_cap: u64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self { t: None, delta: 0.05, count_max_points: 0, work_cap: DEFAULT_WORK_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub radius: u64,
    pub t: u64,
    pub approx: ApproximationTriple,
    /// `min(⌊Q/4q⌋, ⌊√T / ln Q⌋)`, or `None` when that is 0.
    pub m_formula: Option<u64>,
    pub cluster_count: usize,
    /// `Σ falling6(M) / N` with `M` from `m_formula`, when every cluster of that
    /// size fits in the smallest window; `None` otherwise.
    pub formula_bound: Option<f64>,
    /// Longest certified run per cluster, maximised over clusters.
    pub max_run: u64,
    /// `Σ falling6(run) / N` over clusters, every run checked against the window.
    pub r6_lower_bound: f64,
    pub r6_counted: Option<f64>,
    pub counted_truncated: bool,
    /// `Q^{1/4 - δ}`.
    pub growth_floor: f64,
    pub floor_reached: bool,
    pub check: ConstructionCheck,
}

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() != 5 || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(invalid("the 6-level correlation needs 5 positive scales"));
    }
    Ok(())
}

/// Longest prefix of `points` (taken from the end) whose points are pairwise within `thr`.
fn certified_run(points: &[LatticePoint], obs: &Observer, thr: f64) -> Result<usize> {
    let mut angles: Vec<f64> = Vec::new();
    for &p in points.iter().rev() {
        let t = ray_angle(obs, p)?;
        if !angles.iter().all(|&s| within_scale(angular_separation(s, t), thr)) {
            break;
        }
        angles.push(t);
    }
    Ok(angles.len())
}

/// Runs the cluster construction for an observer with an irrational coordinate
/// and returns certified lower bounds for the 6-level correlation.
///
/// Two bounds are reported. `formula_bound` uses the cluster size
/// `min(⌊Q/4q⌋, ⌊√T/ln Q⌋)` and is claimed only when every such cluster sits
/// inside the smallest window. `r6_lower_bound` builds each cluster at the
/// full size `⌊Q/4q⌋` and keeps, per cluster, the longest run of outermost
/// points that are pairwise within the smallest window, checked with the same
/// comparison as the counting engines.
pub fn r6_divergence_demo(x: f64, y: f64, radius: u64, lambdas: &[f64], cfg: &DivergenceConfig) -> Result<DivergenceReport> {
    validate_lambdas(lambdas)?;
    let obs = Observer::new(x, y)?;
    let spec = CorrelationSpec::new(6, lambdas.to_vec(), radius, obs)?;
    let n = spec.point_count()?;
    let thr = spec.thresholds()?.into_iter().fold(f64::INFINITY, f64::min);
    let t = cfg.t.unwrap_or_else(|| default_t(radius));
    let approx = minkowski_approx(x, y, t)?;
    let cap = max_cluster_len(approx.q, radius);
    if cap == 0 {
        return Err(Error::Config(format!("Q = {radius} is below 4q = {}", 4 * approx.q)));
    }
    let full = build_construction(x, y, radius, t, Some(cap))?;
    let check = validate_construction(&full.clusters, radius, Some(cap as usize));
    if !check.passed() {
        return Err(Error::Check(format!("construction failed its checks: {:?}", check.violations)));
    }
    let runs: Vec<usize> = full.clusters.par_iter().map(|c| certified_run(&c.points, &obs, thr)).collect::<Result<_>>()?;
    let lower: u128 = runs.iter().map(|&r| falling6(r as u64)).sum();
    let m_formula = choose_m(approx.q, radius, t).ok();
    let formula_bound = match m_formula {
        Some(m) if runs.iter().all(|&r| r as u64 >= m) => Some(full.clusters.len() as f64 * falling6(m) as f64 / n as f64),
        _ => None,
    };
    let (r6_counted, counted_truncated) = if n <= cfg.count_max_points {
        let res = nu_correlation_with_cap(&spec, cfg.work_cap)?;
        (Some(res.value), res.truncated)
    } else {
        (None, false)
    };
    let r6_lower_bound = lower as f64 / n as f64;
    let growth_floor = (radius as f64).powf(0.25 - cfg.delta);
    Ok(DivergenceReport {
        radius,
        t,
        approx,
        m_formula,
        cluster_count: full.clusters.len(),
        formula_bound,
        max_run: runs.iter().copied().max().unwrap_or(0) as u64,
        r6_lower_bound,
        r6_counted,
        counted_truncated,
        growth_floor,
        floor_reached: r6_lower_bound >= growth_floor,
        check,
    })
}

/// Smallest radius in `radii` (scanned in the given order) whose certified
/// lower bound reaches `Q^{1/4 - δ}`.
pub fn floor_onset(x: f64, y: f64, radii: &[u64], lambdas: &[f64], cfg: &DivergenceConfig) -> Result<Option<u64>> {
    for &radius in radii {
        if r6_divergence_demo(x, y, radius, lambdas, cfg)?.floor_reached {
            return Ok(Some(radius));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalReport {
    pub radius: u64,
    /// Smallest `m0 >= 1` with `m0 x`, `m0 y` integral.
    pub m0: u64,
    /// `⌊Q / m0⌋` points `ℓ (m0 x, m0 y)` on one ray from the observer.
    pub line_points: u64,
    pub r6_lower_bound: f64,
    pub r6_counted: Option<f64>,
    pub counted_tuples: Option<u128>,
    pub counted_truncated: bool,
}

/// Lower bound `falling6(⌊Q/m0⌋) / N` for the rational observer
/// `(num_x / den, num_y / den)`, and optionally the full count.
pub fn rational_divergence_demo(
    num_x: u64,
    num_y: u64,
    den: u64,
    radius: u64,
    lambdas: &[f64],
    count: bool,
    work_cap: u64,
) -> Result<RationalReport> {
    validate_lambdas(lambdas)?;
    if den == 0 || num_x >= den || num_y >= den || num_x.max(num_y) == 0 {
        return Err(invalid(format!("need 0 <= x, y < 1 not both 0, got {num_x}/{den}, {num_y}/{den}")));
    }
    let m0 = den / den.gcd(&num_x.gcd(&num_y));
    let line_points = radius / m0;
    let n = LatticeBox::new(radius).count()?;
    let obs = Observer::new(num_x as f64 / den as f64, num_y as f64 / den as f64)?;
    let (r6_counted, counted_tuples, counted_truncated) = if count {
        let res = nu_correlation_with_cap(&CorrelationSpec::new(6, lambdas.to_vec(), radius, obs)?, work_cap)?;
        (Some(res.value), Some(res.tuple_count), res.truncated)
    } else {
        (None, None, false)
    };
    Ok(RationalReport {
        radius,
        m0,
        line_points,
        r6_lower_bound: falling6(line_points) as f64 / n as f64,
        r6_counted,
        counted_tuples,
        counted_truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const X: f64 = std::f64::consts::SQRT_2 - 1.0;

    fn y3() -> f64 {
        3f64.sqrt() - 1.0
    }

    #[test]
    fn approximation_examples() {
        let r = minkowski_approx(X, y3(), 16).unwrap();
        assert_eq!((r.q, r.a, r.b), (3, 1, 2));
        assert!(r.err_x <= 0.25 && r.err_y <= 0.25);
        let r = minkowski_approx(0.4, 0.6, 30).unwrap();
        assert_eq!((r.q, r.a, r.b), (5, 2, 3));
        assert_eq!((r.err_x, r.err_y), (0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
            let r = minkowski_approx(x, y, 100).unwrap();
            assert!(r.q <= 100 && r.a.gcd(&r.b).gcd(&r.q) == 1 && r.a <= r.q && r.b <= r.q);
        }
        assert!(minkowski_approx(0.0, 0.0, 10).is_err());
    }

    #[test]
    fn cluster_size_formula() {
        assert_eq!(choose_m(3, 10_000, 1000).unwrap(), 3);
        assert_eq!(max_cluster_len(5, 20), 1);
        assert!(matches!(choose_m(50, 100, 4), Err(Error::Config(_))));
        for (q, big_q, t) in [(3, 500, 100), (7, 5000, 600), (11, 90_000, 5000)] {
            assert!(choose_m(q, big_q, t).unwrap() <= big_q / (4 * q));
        }
    }

    #[test]
    fn diagonal_cluster() {
        let approx = ApproximationTriple { a: 2, b: 2, q: 5, err_x: 0.0, err_y: 0.0, t: 10 };
        let c = build_cluster(&approx, 1, 1, 100, 4).unwrap();
        assert_eq!((c.c, c.u, c.v), (0, 0, 0));
        assert_eq!(c.points, (96..100).map(|m| LatticePoint::new(m, m)).collect::<Vec<_>>());
        let audit = cluster_angle_audit(&c, &Observer::new(0.4, 0.4).unwrap(), 100).unwrap();
        assert!(audit.max_angle <= 1e-12);
    }

    #[test]
    fn built_pairs_give_valid_clusters() {
        let approx = minkowski_approx(X, y3(), 16).unwrap();
        let q = 3 * 64;
        let pairs = build_solution_pairs(approx.a, approx.b, approx.q).unwrap();
        assert!(pairs.pairs.iter().any(|&(a, b)| b > a));
        let clusters: Vec<ClusterSet> =
            pairs.pairs.iter().map(|&(a, b)| build_cluster(&approx, a, b, q, 5).unwrap()).collect();
        let check = validate_construction(&clusters, q, Some(5));
        assert!(check.passed(), "{check:?}");
        assert!(check.distance_margin >= 0);
        let obs = Observer::new(X, y3()).unwrap();
        for c in &clusters {
            let audit = cluster_angle_audit(c, &obs, q).unwrap();
            assert!(audit.holds(), "{c:?} {audit:?}");
        }
        let single = build_cluster(&approx, 1, 1, q, 1).unwrap_err();
        assert!(matches!(single, Error::Invalid(_)) || matches!(single, Error::Config(_)));
    }

    #[test]
    fn zero_numerator_is_outside_the_construction() {
        // near the corner (1, 0): q = 1, a = 1, b = 0 would give v = -1
        let approx = minkowski_approx(0.95, 0.09, 60).unwrap();
        assert_eq!((approx.a, approx.b, approx.q), (1, 0, 1));
        assert!(matches!(build_cluster(&approx, 1, 1, 4000, 10), Err(Error::Config(_))));
        assert!(r6_divergence_demo(0.95, 0.09, 4000, &[1.0; 5], &DivergenceConfig { t: Some(60), ..Default::default() }).is_err());
    }

    #[test]
    fn validation_detects_tampering() {
        let approx = minkowski_approx(X, y3(), 16).unwrap();
        let mut c = build_cluster(&approx, 4, 5, 300, 3).unwrap();
        let dup = c.clone();
        c.points[0] = LatticePoint::new(400, 0);
        let check = validate_construction(&[c, dup], 300, Some(3));
        assert!(!check.containment && !check.ratio && !check.disjoint);
        assert!(!check.violations.is_empty());
    }

    #[test]
    fn single_point_cluster_has_zero_angle() {
        let approx = minkowski_approx(X, y3(), 16).unwrap();
        let c = build_cluster(&approx, 4, 5, 300, 1).unwrap();
        let audit = cluster_angle_audit(&c, &Observer::new(X, y3()).unwrap(), 300).unwrap();
        assert_eq!(audit.max_angle, 0.0);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling6(5), 0);
        assert_eq!(falling6(6), 720);
        assert_eq!(falling6(7), 5040);
    }

    #[test]
    fn rational_observer() {
        let r = rational_divergence_demo(1, 1, 2, 8, &[1.0; 5], true, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(r.m0, 2);
        assert_eq!(r.line_points, 4);
        let r = rational_divergence_demo(1, 1, 2, 16, &[1.0; 5], true, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(r.line_points, 8);
        assert!(r.r6_counted.unwrap() >= r.r6_lower_bound);
        assert!(rational_divergence_demo(0, 0, 2, 8, &[1.0; 5], false, 1).is_err());
        assert_eq!(rational_divergence_demo(2, 4, 6, 30, &[1.0; 5], false, 1).unwrap().m0, 3);
    }

    #[test]
    fn demo_small_radius() {
        let cfg = DivergenceConfig { count_max_points: 20_000, ..Default::default() };
        let r = r6_divergence_demo(X, y3(), 64, &[1.0; 5], &cfg).unwrap();
        assert!(r.check.passed());
        assert!(!r.counted_truncated);
        assert!(r.r6_counted.unwrap() >= r.r6_lower_bound);
        assert!(r6_divergence_demo(X, y3(), 64, &[1.0; 4], &cfg).is_err());
    }

    #[test]
    fn onset_is_monotone_in_the_scan() {
        let cfg = DivergenceConfig::default();
        let radii = [1u64 << 10, 1 << 12, 1 << 14];
        let onset = floor_onset(X, y3(), &radii, &[1.0; 5], &cfg).unwrap();
        assert_eq!(onset, Some(1 << 12));
        assert_eq!(floor_onset(X, y3(), &radii[..1], &[1.0; 5], &cfg).unwrap(), None);
    }
}
