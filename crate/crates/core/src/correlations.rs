//! Pair and ν-level correlation counts of ray angles.
//!
//! Tuples are **ordered**: a pair `(P, P')` and its reverse both count, and a
//! ν-tuple is an ordered sequence of pairwise distinct points whose consecutive
//! folded angular separations satisfy
//! `sep(P_i, P_{i+1}) <= 2π λ_i / N` with `N = (2Q + 1)^2`.
//! Distinctness is on point identity, so distinct points on one ray are
//! separate entries at separation zero.
//!
//! All engines evaluate the same comparison, `sep <= 2πλ/N + ANGLE_SLACK`,
//! through [`within_scale`], which keeps the oracle and the fast engines in
//! exact agreement.

use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{angular_separation, enumerate_box, ray_angle, AngleMultiset, LatticeBox, LatticePoint, Observer};

/// Absolute slack on every angle comparison.
pub const ANGLE_SLACK: f64 = 1.0 / (1u64 << 40) as f64;

/// Largest number of ordered pairs the quadratic oracle will examine.
pub const ORACLE_PAIR_BUDGET: u64 = 1_000_000;

pub const MAX_NU: usize = 8;

/// Default cap on tuple-extension steps for [`nu_correlation`].
pub const DEFAULT_WORK_CAP: u64 = 1_000_000_000;

/// Margin separating "clearly inside"/"clearly outside" window candidates from
/// the ones re-checked with [`within_scale`].
const WINDOW_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub nu: usize,
    pub lambdas: Vec<f64>,
    /// Box radius `Q`.
    pub radius: u64,
    pub observer: Observer,
}

impl CorrelationSpec {
    pub fn new(nu: usize, lambdas: Vec<f64>, radius: u64, observer: Observer) -> Result<Self> {
        let spec = Self { nu, lambdas, radius, observer };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pair(radius: u64, lambda: f64, observer: Observer) -> Result<Self> {
        Self::new(2, vec![lambda], radius, observer)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 2 {
            return Err(invalid(format!("nu = {} must be at least 2", self.nu)));
        }
        if self.lambdas.len() != self.nu - 1 {
            return Err(invalid(format!(
                "nu = {} needs {} scales, got {}",
                self.nu,
                self.nu - 1,
                self.lambdas.len()
            )));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(invalid(format!("scale {l} must be positive and finite")));
        }
        Ok(())
    }

    pub fn point_count(&self) -> Result<u64> {
        LatticeBox::new(self.radius).count()
    }

    /// Angular window `2π λ_i / N` for each consecutive step.
    pub fn thresholds(&self) -> Result<Vec<f64>> {
        let n = self.point_count()? as f64;
        Ok(self.lambdas.iter().map(|l| TAU * l / n).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Oracle,
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub tuple_count: u128,
    /// `N = (2Q + 1)^2`, including a point excluded for coinciding with the observer.
    pub n: u64,
    /// `tuple_count / N`.
    pub value: f64,
    /// The angular unit `2π / N`.
    pub scale: f64,
    pub engine: Engine,
    /// Set when the work cap stopped the count; `tuple_count` is then a lower bound.
    pub truncated: bool,
    pub excluded_point: Option<LatticePoint>,
}

impl CorrelationResult {
    fn new(tuple_count: u128, n: u64, engine: Engine, truncated: bool, excluded_point: Option<LatticePoint>) -> Self {
        Self {
            tuple_count,
            n,
            value: tuple_count as f64 / n as f64,
            scale: TAU / n as f64,
            engine,
            truncated,
            excluded_point,
        }
    }
}

/// The comparison shared by every counting engine.
#[inline]
pub fn within_scale(separation: f64, threshold: f64) -> bool {
    separation <= threshold + ANGLE_SLACK
}

/// `2^{ν-1} λ_1 ⋯ λ_{ν-1}`, the value expected for independent uniform directions.
pub fn poisson_baseline(nu: usize, lambdas: &[f64]) -> Result<f64> {
    if nu < 2 || lambdas.len() != nu - 1 {
        return Err(invalid(format!("nu = {nu} needs {} scales, got {}", nu.saturating_sub(1), lambdas.len())));
    }
    Ok(2f64.powi(nu as i32 - 1) * lambdas.iter().product::<f64>())
}

/// Quadratic brute-force pair count straight from the definition.
pub fn pair_correlation_oracle(spec: &CorrelationSpec) -> Result<CorrelationResult> {
    spec.validate()?;
    if spec.nu != 2 {
        return Err(invalid("pair correlation needs nu = 2"));
    }
    let n = spec.point_count()?;
    if n.saturating_mul(n.saturating_sub(1)) > ORACLE_PAIR_BUDGET {
        return Err(Error::Size(format!(
            "{n} points exceed the oracle budget of {ORACLE_PAIR_BUDGET} pairs; use pair_correlation_fast"
        )));
    }
    let thr = spec.thresholds()?[0];
    let mut excluded = None;
    let mut angles = Vec::with_capacity(n as usize);
    for p in enumerate_box(spec.radius)? {
        match ray_angle(&spec.observer, p) {
            Ok(t) => angles.push(t),
            Err(_) => excluded = Some(p),
        }
    }
    let mut count: u128 = 0;
    for (i, &ai) in angles.iter().enumerate() {
        for (j, &aj) in angles.iter().enumerate() {
            if i != j && within_scale(angular_separation(ai, aj), thr) {
                count += 1;
            }
        }
    }
    Ok(CorrelationResult::new(count, n, Engine::Oracle, false, excluded))
}

/// Sorted angles with a wrapped copy, for circular window queries.
struct CircularAngles<'a> {
    base: &'a [f64],
    doubled: Vec<f64>,
}

impl<'a> CircularAngles<'a> {
    fn new(base: &'a [f64]) -> Self {
        let mut doubled = Vec::with_capacity(2 * base.len());
        doubled.extend_from_slice(base);
        doubled.extend(base.iter().map(|t| t + TAU));
        Self { base, doubled }
    }

    /// Number of forward steps `k in 1..n` with forward distance `<= t` (or `< t`).
    fn forward_count(&self, i: usize, t: f64, strict: bool) -> usize {
        let n = self.base.len();
        let origin = self.base[i];
        let window = &self.doubled[i + 1..i + n];
        if strict {
            window.partition_point(|&v| v - origin < t)
        } else {
            window.partition_point(|&v| v - origin <= t)
        }
    }

    /// Number of backward steps with backward distance `<= t`, capped at `limit`.
    fn backward_count(&self, i: usize, t: f64, limit: usize) -> usize {
        let n = self.base.len();
        let origin = self.base[i] + TAU;
        let mut k = 0;
        while k < limit {
            let v = self.doubled[i + n - (k + 1)];
            if origin - v <= t {
                k += 1;
            } else {
                break;
            }
        }
        k
    }

    fn angle(&self, i: usize, k: usize) -> f64 {
        self.base[(i + k) % self.base.len()]
    }
}

/// Ordered pairs `(i, j)`, `i != j`, with `within_scale(sep, thr)`, for sorted angles.
fn count_pairs_sorted(angles: &[f64], thr: f64) -> u128 {
    let n = angles.len();
    if n < 2 {
        return 0;
    }
    if thr + ANGLE_SLACK >= PI {
        return (n as u128) * (n as u128 - 1);
    }
    let circ = CircularAngles::new(angles);
    let w = thr + ANGLE_SLACK;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let c1 = circ.forward_count(i, w - WINDOW_MARGIN, false);
            let c2 = circ.forward_count(i, w + WINDOW_MARGIN, true).max(c1);
            let c3 = circ.forward_count(i, TAU - w - WINDOW_MARGIN, false).max(c2);
            let c4 = circ.forward_count(i, TAU - w + WINDOW_MARGIN, true).max(c3);
            let mut count = c1 + (n - 1 - c4);
            let ai = angles[i];
            for k in (c1 + 1..=c2).chain(c3 + 1..=c4) {
                if within_scale(angular_separation(ai, circ.angle(i, k)), thr) {
                    count += 1;
                }
            }
            count as u64
        })
        .map(u128::from)
        .sum()
}

/// Pair count from the sorted angle multiset in `O(N log N)`.
pub fn pair_correlation_fast(spec: &CorrelationSpec) -> Result<CorrelationResult> {
    spec.validate()?;
    if spec.nu != 2 {
        return Err(invalid("pair correlation needs nu = 2"));
    }
    let n = spec.point_count()?;
    let thr = spec.thresholds()?[0];
    let ms = AngleMultiset::for_box(spec.observer, spec.radius)?;
    let angles: Vec<f64> = ms.angles().collect();
    let count = count_pairs_sorted(&angles, thr);
    Ok(CorrelationResult::new(count, n, Engine::Fast, false, ms.excluded()))
}

/// Points sharing one bit-identical angle; interchangeable for every comparison.
#[derive(Debug, Clone)]
struct AngleClass {
    angle: f64,
    start: usize,
    len: usize,
}

/// Class structure and candidate windows for the tuple search.
struct TupleGraph {
    classes: Vec<AngleClass>,
    fwd: Vec<usize>,
    back: Vec<usize>,
    thresholds: Vec<f64>,
}

impl TupleGraph {
    fn build(ms: &AngleMultiset, thresholds: Vec<f64>) -> Self {
        let entries = ms.entries();
        let mut classes: Vec<AngleClass> = Vec::new();
        for (idx, e) in entries.iter().enumerate() {
            match classes.last_mut() {
                Some(c) if c.angle.to_bits() == e.angle.to_bits() => c.len += 1,
                _ => classes.push(AngleClass { angle: e.angle, start: idx, len: 1 }),
            }
        }
        let angles: Vec<f64> = classes.iter().map(|c| c.angle).collect();
        let nc = angles.len();
        let wmax = thresholds.iter().cloned().fold(0.0, f64::max) + ANGLE_SLACK + WINDOW_MARGIN;
        let (fwd, back) = if nc == 0 {
            (vec![], vec![])
        } else {
            let circ = CircularAngles::new(&angles);
            (0..nc)
                .map(|i| {
                    let f = circ.forward_count(i, wmax, false);
                    let b = circ.backward_count(i, wmax, nc - 1 - f);
                    (f, b)
                })
                .unzip()
        };
        Self { classes, fwd, back, thresholds }
    }

    fn nc(&self) -> usize {
        self.classes.len()
    }

    /// Candidate classes after `i`: itself, then the forward and backward windows.
    fn candidates(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let nc = self.nc();
        std::iter::once(i)
            .chain((1..=self.fwd[i]).map(move |k| (i + k) % nc))
            .chain((1..=self.back[i]).map(move |k| (i + nc - k) % nc))
    }
}

struct SearchBudget {
    steps: AtomicU64,
    cap: u64,
    exhausted: AtomicBool,
}

impl SearchBudget {
    fn charge(&self, local: &mut u64) -> bool {
        *local += 1;
        if *local >= 4096 {
            let total = self.steps.fetch_add(*local, Ordering::Relaxed) + *local;
            *local = 0;
            if total > self.cap {
                self.exhausted.store(true, Ordering::Relaxed);
            }
        }
        !self.exhausted.load(Ordering::Relaxed)
    }

    fn settle(&self, local: u64) {
        let total = self.steps.fetch_add(local, Ordering::Relaxed) + local;
        if total > self.cap {
            self.exhausted.store(true, Ordering::Relaxed);
        }
    }
}

fn used(path: &[usize], c: usize) -> usize {
    path.iter().filter(|&&p| p == c).count()
}

fn extend(graph: &TupleGraph, path: &mut Vec<usize>, weight: u128, budget: &SearchBudget, local: &mut u64) -> u128 {
    let depth = path.len();
    if depth == graph.thresholds.len() + 1 {
        return weight;
    }
    let last = *path.last().expect("path starts non-empty");
    let thr = graph.thresholds[depth - 1];
    let last_angle = graph.classes[last].angle;
    let mut total = 0u128;
    for c in graph.candidates(last) {
        let class = &graph.classes[c];
        let taken = used(path, c);
        if taken >= class.len || !within_scale(angular_separation(last_angle, class.angle), thr) {
            continue;
        }
        if !budget.charge(local) {
            return total;
        }
        path.push(c);
        total += extend(graph, path, weight * (class.len - taken) as u128, budget, local);
        path.pop();
    }
    total
}

/// ν-level correlation count with the default work cap.
pub fn nu_correlation(spec: &CorrelationSpec) -> Result<CorrelationResult> {
    nu_correlation_with_cap(spec, DEFAULT_WORK_CAP)
}

/// ν-level correlation count.
///
/// Points with bit-identical angles are merged into classes; a tuple visiting
/// a class `k` times contributes a falling factorial of the class size, so an
/// exactly collinear run of `m` points yields `m (m-1) ⋯ (m-ν+1)` tuples
/// without enumerating them. When more than `cap` extension steps are needed
/// the search stops and the result is flagged `truncated`; the count is then a
/// lower bound.
pub fn nu_correlation_with_cap(spec: &CorrelationSpec, cap: u64) -> Result<CorrelationResult> {
    spec.validate()?;
    if spec.nu > MAX_NU {
        return Err(Error::Unsupported(format!("nu = {} exceeds the supported maximum {MAX_NU}", spec.nu)));
    }
    let n = spec.point_count()?;
    let ms = AngleMultiset::for_box(spec.observer, spec.radius)?;
    let graph = TupleGraph::build(&ms, spec.thresholds()?);
    let budget = SearchBudget { steps: AtomicU64::new(0), cap, exhausted: AtomicBool::new(false) };
    let count: u128 = (0..graph.nc())
        .into_par_iter()
        .map(|start| {
            let mut local = 0;
            let mut path = Vec::with_capacity(spec.nu);
            path.push(start);
            let c = extend(&graph, &mut path, graph.classes[start].len as u128, &budget, &mut local);
            budget.settle(local);
            c
        })
        .sum();
    let truncated = budget.exhausted.load(Ordering::Relaxed);
    Ok(CorrelationResult::new(count, n, Engine::Fast, truncated, ms.excluded()))
}

/// Calls `visit` on every counted ν-tuple, expanded to lattice points.
///
/// Meant for auditing small configurations; the number of tuples grows quickly.
pub fn for_each_tuple<F: FnMut(&[LatticePoint])>(spec: &CorrelationSpec, mut visit: F) -> Result<()> {
    spec.validate()?;
    if spec.nu > MAX_NU {
        return Err(Error::Unsupported(format!("nu = {} exceeds the supported maximum {MAX_NU}", spec.nu)));
    }
    let ms = AngleMultiset::for_box(spec.observer, spec.radius)?;
    let graph = TupleGraph::build(&ms, spec.thresholds()?);
    let entries = ms.entries();
    let mut path = Vec::with_capacity(spec.nu);
    let mut points = Vec::with_capacity(spec.nu);

    fn walk<F: FnMut(&[LatticePoint])>(
        graph: &TupleGraph,
        entries: &[crate::lattice::AngleEntry],
        path: &mut Vec<usize>,
        points: &mut Vec<LatticePoint>,
        visit: &mut F,
    ) {
        let depth = path.len();
        if depth == graph.thresholds.len() + 1 {
            visit(points);
            return;
        }
        let candidates: Vec<usize> = match path.last() {
            None => (0..graph.nc()).collect(),
            Some(&last) => {
                let thr = graph.thresholds[depth - 1];
                graph
                    .candidates(last)
                    .filter(|&c| within_scale(angular_separation(graph.classes[last].angle, graph.classes[c].angle), thr))
                    .collect()
            }
        };
        for c in candidates {
            let class = &graph.classes[c];
            for e in &entries[class.start..class.start + class.len] {
                if points.contains(&e.point) {
                    continue;
                }
                path.push(c);
                points.push(e.point);
                walk(graph, entries, path, points, visit);
                points.pop();
                path.pop();
            }
        }
    }

    walk(&graph, entries, &mut path, &mut points, &mut visit);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn centre() -> Observer {
        Observer::new(0.5, 0.5).unwrap()
    }

    /// Exhaustive ν-tuple count over all points, no windows or classes.
    fn brute_tuples(spec: &CorrelationSpec) -> u128 {
        let thr = spec.thresholds().unwrap();
        let pts: Vec<(LatticePoint, f64)> = enumerate_box(spec.radius)
            .unwrap()
            .into_iter()
            .filter_map(|p| ray_angle(&spec.observer, p).ok().map(|t| (p, t)))
            .collect();
        fn rec(pts: &[(LatticePoint, f64)], thr: &[f64], path: &mut Vec<usize>) -> u128 {
            if path.len() == thr.len() + 1 {
                return 1;
            }
            let last = pts[*path.last().unwrap()].1;
            let t = thr[path.len() - 1];
            let mut s = 0;
            for j in 0..pts.len() {
                if !path.contains(&j) && within_scale(angular_separation(last, pts[j].1), t) {
                    path.push(j);
                    s += rec(pts, thr, path);
                    path.pop();
                }
            }
            s
        }
        (0..pts.len()).map(|i| rec(&pts, &thr, &mut vec![i])).sum()
    }

    #[test]
    fn poisson_values() {
        assert_eq!(poisson_baseline(2, &[1.0]).unwrap(), 2.0);
        assert_eq!(poisson_baseline(6, &[1.0; 5]).unwrap(), 32.0);
        assert_eq!(poisson_baseline(2, &[0.5]).unwrap(), 1.0);
        assert!(poisson_baseline(3, &[1.0]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CorrelationSpec::new(1, vec![], 2, centre()).is_err());
        assert!(CorrelationSpec::new(3, vec![1.0], 2, centre()).is_err());
        assert!(CorrelationSpec::new(2, vec![0.0], 2, centre()).is_err());
        assert!(CorrelationSpec::new(2, vec![f64::NAN], 2, centre()).is_err());
    }

    #[test]
    fn common_ray_pair_at_q1() {
        let spec = CorrelationSpec::pair(1, 0.01, centre()).unwrap();
        for res in [pair_correlation_oracle(&spec).unwrap(), pair_correlation_fast(&spec).unwrap()] {
            assert_eq!(res.tuple_count, 2);
            assert_eq!(res.n, 9);
            assert!((res.value - 2.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn half_turn_window_counts_everything() {
        let spec = CorrelationSpec::pair(1, 4.5, centre()).unwrap();
        let o = pair_correlation_oracle(&spec).unwrap();
        assert_eq!(o.tuple_count, 72);
        assert_eq!(o.value, 8.0);
        assert_eq!(pair_correlation_fast(&spec).unwrap().tuple_count, 72);
    }

    #[test]
    fn oracle_matches_fast_at_q2() {
        let spec = CorrelationSpec::pair(2, 0.5, centre()).unwrap();
        assert_eq!(
            pair_correlation_oracle(&spec).unwrap().tuple_count,
            pair_correlation_fast(&spec).unwrap().tuple_count
        );
    }

    #[test]
    fn oracle_budget() {
        let spec = CorrelationSpec::pair(40, 1.0, centre()).unwrap();
        assert!(matches!(pair_correlation_oracle(&spec), Err(Error::Size(_))));
    }

    #[test]
    fn tiny_window_counts_only_common_rays() {
        let obs = Observer::new(std::f64::consts::FRAC_1_PI, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let spec = CorrelationSpec::pair(12, 1e-9, obs).unwrap();
        assert_eq!(pair_correlation_fast(&spec).unwrap().tuple_count, 0);
    }

    #[test]
    fn coincident_observer_keeps_full_normalisation() {
        let obs = Observer::new(0.0, 0.0).unwrap();
        let spec = CorrelationSpec::pair(3, 0.3, obs).unwrap();
        let res = pair_correlation_fast(&spec).unwrap();
        assert_eq!(res.n, 49);
        assert_eq!(res.excluded_point, Some(LatticePoint::new(0, 0)));
        assert_eq!(res.tuple_count, pair_correlation_oracle(&spec).unwrap().tuple_count);
    }

    #[test]
    fn nu_two_matches_pair_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let obs = Observer::new(rng.gen(), rng.gen()).unwrap();
            let spec = CorrelationSpec::pair(rng.gen_range(1..25), rng.gen_range(0.01..6.0), obs).unwrap();
            assert_eq!(
                nu_correlation(&spec).unwrap().tuple_count,
                pair_correlation_fast(&spec).unwrap().tuple_count
            );
        }
    }

    #[test]
    fn unconstrained_triples() {
        let spec = CorrelationSpec::new(3, vec![10.0, 10.0], 1, centre()).unwrap();
        assert_eq!(nu_correlation(&spec).unwrap().tuple_count, 9 * 8 * 7);
        let spec = CorrelationSpec::new(3, vec![200.0, 200.0], 3, Observer::new(0.3, 0.6).unwrap()).unwrap();
        assert_eq!(nu_correlation(&spec).unwrap().tuple_count, 49 * 48 * 47);
    }

    #[test]
    fn six_level_centre_observer_matches_brute_force() {
        let spec = CorrelationSpec::new(6, vec![1.0; 5], 6, centre()).unwrap();
        let fast = nu_correlation(&spec).unwrap();
        assert!(!fast.truncated);
        // The two diagonal rays alone hold 6 and 7 collinear points.
        assert!(fast.tuple_count >= 720 + 5040);
        assert_eq!(fast.tuple_count, brute_tuples(&spec));
    }

    #[test]
    fn nu_above_cap_is_unsupported() {
        let spec = CorrelationSpec::new(9, vec![1.0; 8], 2, centre()).unwrap();
        assert!(matches!(nu_correlation(&spec), Err(Error::Unsupported(_))));
    }

    #[test]
    fn work_cap_flags_lower_bound() {
        let spec = CorrelationSpec::new(4, vec![50.0; 3], 4, Observer::new(0.3, 0.6).unwrap()).unwrap();
        let full = nu_correlation(&spec).unwrap();
        let capped = nu_correlation_with_cap(&spec, 10_000).unwrap();
        assert!(!full.truncated);
        assert!(capped.truncated);
        assert!(capped.tuple_count <= full.tuple_count);
    }

    #[test]
    fn counted_tuples_satisfy_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for obs in [centre(), Observer::new(0.37, 0.81).unwrap()] {
            let spec = CorrelationSpec::new(4, vec![2.0, 1.0, 3.0], 5, obs).unwrap();
            let thr = spec.thresholds().unwrap();
            let mut seen = 0u128;
            for_each_tuple(&spec, |t| {
                seen += 1;
                if rng.gen_bool(0.01) {
                    for i in 0..t.len() {
                        for j in i + 1..t.len() {
                            assert_ne!(t[i], t[j]);
                        }
                    }
                    for i in 0..t.len() - 1 {
                        let a = ray_angle(&obs, t[i]).unwrap();
                        let b = ray_angle(&obs, t[i + 1]).unwrap();
                        assert!(within_scale(angular_separation(a, b), thr[i]));
                    }
                }
            })
            .unwrap();
            assert_eq!(seen, nu_correlation(&spec).unwrap().tuple_count);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn pair_counts_even_and_monotone(x in 0.0f64..1.0, y in 0.0f64..1.0, q in 1u64..18, l in 0.01f64..8.0) {
            let obs = Observer::new(x, y).unwrap();
            let small = pair_correlation_fast(&CorrelationSpec::pair(q, l, obs).unwrap()).unwrap();
            let big = pair_correlation_fast(&CorrelationSpec::pair(q, l * 1.5, obs).unwrap()).unwrap();
            prop_assert_eq!(small.tuple_count % 2, 0);
            prop_assert!(small.tuple_count <= big.tuple_count);
        }

        #[test]
        fn reversal_symmetry(x in 0.0f64..1.0, y in 0.0f64..1.0, q in 1u64..8,
                             l in proptest::collection::vec(0.2f64..4.0, 3)) {
            let obs = Observer::new(x, y).unwrap();
            let mut rev = l.clone();
            rev.reverse();
            let a = nu_correlation(&CorrelationSpec::new(4, l, q, obs).unwrap()).unwrap();
            let b = nu_correlation(&CorrelationSpec::new(4, rev, q, obs).unwrap()).unwrap();
            prop_assert_eq!(a.tuple_count, b.tuple_count);
        }

        #[test]
        fn nu_count_monotone_in_each_scale(x in 0.0f64..1.0, y in 0.0f64..1.0, q in 1u64..7, i in 0usize..2) {
            let obs = Observer::new(x, y).unwrap();
            let base = vec![1.0, 2.0];
            let mut wider = base.clone();
            wider[i] *= 2.0;
            let a = nu_correlation(&CorrelationSpec::new(3, base, q, obs).unwrap()).unwrap();
            let b = nu_correlation(&CorrelationSpec::new(3, wider, q, obs).unwrap()).unwrap();
            prop_assert!(a.tuple_count <= b.tuple_count);
        }
    }
}
