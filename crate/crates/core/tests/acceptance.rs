//! Acceptance criteria. Each test prints one `criterion N PASS|FAIL` line to
//! stdout (bypassing the test harness capture) before asserting.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::io::Write;
use std::time::Instant;

use dircorr::analytic::{mq_main_term, s_sum_limit, s_sum_sq, section_integrals, PhiParams};
use dircorr::averaging::{average_pair_correlation, Disc};
use dircorr::correlations::{
    nu_correlation, pair_correlation_fast, pair_correlation_oracle, within_scale, CorrelationSpec,
};
use dircorr::divergence::{
    build_construction, cluster_angle_audit, max_cluster_len, minkowski_approx, r6_divergence_demo,
    rational_divergence_demo, validate_construction, DivergenceConfig,
};
use dircorr::lattice::{angular_separation, enumerate_box, ray_angle, Observer};
use dircorr::numtheory::{coprime_progression_count, hyperbola_count, kloosterman_extremes, primes_up_to, HalfOpen, HyperbolaQuery, Modulus};
use dircorr::quadrature::QuadratureConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AVERAGE_BAND: f64 = 0.20;
const MQ_TOL: f64 = 1e-3;
const SECTION_TOL: f64 = 1e-5;
const SLOPE_MAX: f64 = 0.75;
const WEIL_SLACK: f64 = 1e-6;
const IMAG_REL: f64 = 1e-9;

fn report(n: u32, passed: bool, detail: &str, started: Instant) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!("criterion {n} {verdict}: {detail} ({:.1}s)\n", started.elapsed().as_secs_f64());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Ordered tuples of distinct points with consecutive separations inside the
/// windows, by trying every point at every step.
fn brute_tuples(radius: u64, obs: Observer, lambdas: &[f64]) -> u128 {
    let n = ((2 * radius + 1) * (2 * radius + 1)) as f64;
    let thr: Vec<f64> = lambdas.iter().map(|l| TAU * l / n).collect();
    let angles: Vec<f64> = enumerate_box(radius)
        .unwrap()
        .into_iter()
        .filter_map(|p| ray_angle(&obs, p).ok())
        .collect();
    fn extend(angles: &[f64], thr: &[f64], chosen: &mut Vec<usize>) -> u128 {
        let depth = chosen.len() - 1;
        if depth == thr.len() {
            return 1;
        }
        let last = angles[*chosen.last().unwrap()];
        let mut total = 0;
        for j in 0..angles.len() {
            if !chosen.contains(&j) && within_scale(angular_separation(last, angles[j]), thr[depth]) {
                chosen.push(j);
                total += extend(angles, thr, chosen);
                chosen.pop();
            }
        }
        total
    }
    (0..angles.len()).map(|i| extend(&angles, &thr, &mut vec![i])).sum()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut pair_mismatch = 0;
    for _ in 0..200 {
        let obs = Observer::new(rng.gen(), rng.gen()).unwrap();
        let spec = CorrelationSpec::pair(rng.gen_range(1..=15), rng.gen_range(0.01..=20.0), obs).unwrap();
        if pair_correlation_fast(&spec).unwrap().tuple_count != pair_correlation_oracle(&spec).unwrap().tuple_count {
            pair_mismatch += 1;
        }
    }
    let mut nu_mismatch = 0;
    for _ in 0..20 {
        let obs = Observer::new(rng.gen(), rng.gen()).unwrap();
        let radius = rng.gen_range(1..=6);
        for nu in [3usize, 6] {
            let lambdas: Vec<f64> = (1..nu).map(|_| rng.gen_range(0.2..4.0)).collect();
            let spec = CorrelationSpec::new(nu, lambdas.clone(), radius, obs).unwrap();
            let fast = nu_correlation(&spec).unwrap();
            if fast.truncated || fast.tuple_count != brute_tuples(radius, obs, &lambdas) {
                nu_mismatch += 1;
            }
        }
    }
    let passed = pair_mismatch == 0 && nu_mismatch == 0;
    report(1, passed, &format!("pair mismatches {pair_mismatch}/200, tuple mismatches {nu_mismatch}/40"), t0);
    assert!(passed);
}

#[test]
fn criterion_2_disc_average() {
    let t0 = Instant::now();
    let disc = Disc::new(0.5, 0.5, 0.25).unwrap();
    let reports: Vec<_> =
        [100u64, 200, 400].iter().map(|&q| average_pair_correlation(&disc, q, 1.0, 128, 1).unwrap()).collect();
    let errs: Vec<f64> = reports.iter().map(|r| r.abs_error()).collect();
    let trend = errs.windows(2).all(|w| w[1] <= w[0]);
    let target = TAU / 3.0;
    let band = (reports[2].mean - target).abs() <= AVERAGE_BAND * target;
    let detail = reports
        .iter()
        .map(|r| format!("Q={} mean {:.4} ± {:.4}", r.radius, r.mean, r.standard_error))
        .collect::<Vec<_>>()
        .join(", ");
    report(2, trend && band, &format!("{detail}; |error| {errs:.4?}"), t0);
    assert!(trend && band);
}

#[test]
fn criterion_3_pair_sum_limit() {
    let t0 = Instant::now();
    let disc = Disc::new(0.5, 0.5, 0.25).unwrap();
    let lim = s_sum_limit(&disc);
    let errs: Vec<f64> = [50u64, 100, 200, 400].iter().map(|&q| (s_sum_sq(q, &disc).unwrap() - lim).abs()).collect();
    let decreasing = errs.windows(2).filter(|w| w[1] < w[0]).count();
    let mq = mq_main_term(10_000, 1.0).unwrap();
    let passed = decreasing >= 2 && (mq - PI / 6.0).abs() <= MQ_TOL;
    report(3, passed, &format!("|S_Q - πr0²/6| = {} ({decreasing}/3 decreasing); main term at 10^4 = {mq:.7}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")), t0);
    assert!(passed);
}

#[test]
fn criterion_4_section_integrals() {
    let t0 = Instant::now();
    let cfg = QuadratureConfig::default();
    let bound = SQRT_2 + (1.0 + SQRT_2).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_volume = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let p = PhiParams::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)).unwrap();
        let s = section_integrals(&p, &cfg).unwrap();
        worst_volume = worst_volume.max((s.volume - TAU / 3.0).abs());
        worst_excess = worst_excess.max(s.total_variation - bound);
    }
    let origin = section_integrals(&PhiParams::new(0.0, 0.0).unwrap(), &cfg).unwrap();
    let eq = (origin.total_variation - bound).abs();
    let passed = worst_volume <= SECTION_TOL && worst_excess <= SECTION_TOL && eq <= SECTION_TOL;
    report(
        4,
        passed,
        &format!("max volume error {worst_volume:.2e}, max variation excess {worst_excess:.2e}, origin gap {eq:.2e}"),
        t0,
    );
    assert!(passed);
}

#[test]
fn criterion_5_coprime_progressions() {
    let t0 = Instant::now();
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for d in 1..=60u64 {
        for a in 0..d {
            for b in 0..d {
                if gcd(gcd(a, b), d) != 1 {
                    continue;
                }
                let direct = (0..2 * d).filter(|m| gcd(a + b * m, d) == 1).count() as u64;
                checked += 1;
                if coprime_progression_count(a, b, d).unwrap() != direct {
                    bad.push((a, b, d));
                }
            }
        }
    }
    report(5, bad.is_empty(), &format!("{checked} triples, {} mismatches", bad.len()), t0);
    assert!(bad.is_empty(), "{bad:?}");
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn criterion_6_hyperbola_exponent() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let moduli = [251u64, 503, 1009, 2003, 4001];
    let (mut scaled, mut raw) = (Vec::new(), Vec::new());
    for &q in &moduli {
        let m = Modulus::new(q).unwrap();
        let (mut worst_scaled, mut worst_raw) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let interval = |rng: &mut ChaCha8Rng| {
                let (a, b) = (rng.gen_range(0..=q as i64), rng.gen_range(0..=q as i64));
                HalfOpen::new(a.min(b), a.max(b)).unwrap()
            };
            let (i1, i2) = (interval(&mut rng), interval(&mut rng));
            for h in [0, 1, rng.gen_range(2..q as i64)] {
                let err = hyperbola_count(&HyperbolaQuery::new(m, h, i1, i2).unwrap()).error.abs();
                // the error term carries a factor gcd(h, q)
                worst_scaled = worst_scaled.max(err / gcd(h as u64, q) as f64);
                worst_raw = worst_raw.max(err);
            }
        }
        scaled.push(worst_scaled.max(1.0).ln());
        raw.push(worst_raw.max(1.0).ln());
    }
    let lq: Vec<f64> = moduli.iter().map(|&q| (q as f64).ln()).collect();
    let (s, s_raw) = (slope(&lq, &scaled), slope(&lq, &raw));
    let passed = s <= SLOPE_MAX;
    report(6, passed, &format!("slope of max |error|/gcd(h,q) = {s:.3} (unscaled, h = 0 included: {s_raw:.3})"), t0);
    assert!(passed);
}

#[test]
fn criterion_7_kloosterman() {
    let t0 = Instant::now();
    let primes = primes_up_to(499);
    let mut worst_ratio = 0.0f64;
    let mut bad = Vec::new();
    for &p in &primes {
        let (abs, im) = kloosterman_extremes(Modulus::new(p).unwrap());
        let weil = 2.0 * (p as f64).sqrt();
        worst_ratio = worst_ratio.max(abs / weil);
        if abs > weil + WEIL_SLACK || im >= IMAG_REL * p as f64 {
            bad.push(p);
        }
    }
    report(
        7,
        bad.is_empty(),
        &format!("{} primes, max |K|/2√p = {worst_ratio:.6}, failures {bad:?}", primes.len()),
        t0,
    );
    assert!(bad.is_empty());
}

#[test]
fn criterion_8_cluster_construction() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut failures, mut clusters, mut pairs, mut redrawn) = (Vec::new(), 0usize, 0usize, 0usize);
    for run in 0..100 {
        // The construction assumes 1 <= a, b <= q; observers whose approximation
        // has a zero numerator are outside it and are drawn again.
        let (x, y, radius, t, approx) = loop {
            let (x, y): (f64, f64) = (rng.gen_range(0.001..1.0), rng.gen_range(0.001..1.0));
            let radius = rng.gen_range(1_000..20_000u64);
            let t = radius / 64;
            let approx = minkowski_approx(x, y, t).unwrap();
            if approx.a > 0 && approx.b > 0 {
                break (x, y, radius, t, approx);
            }
            redrawn += 1;
        };
        assert!(radius >= 64 * approx.q);
        let m = max_cluster_len(approx.q, radius);
        let cons = build_construction(x, y, radius, t, Some(m)).unwrap();
        let check = validate_construction(&cons.clusters, radius, Some(m as usize));
        let obs = Observer::new(x, y).unwrap();
        let audits_ok = cons.clusters.iter().all(|c| cluster_angle_audit(c, &obs, radius).unwrap().holds());
        clusters += cons.clusters.len();
        pairs += cons.clusters.iter().map(|c| c.len() * (c.len() - 1) / 2).sum::<usize>();
        if !check.passed() || !audits_ok {
            failures.push((run, x, y, radius, check.violations));
        }
    }
    report(
        8,
        failures.is_empty(),
        &format!(
            "100 runs, {clusters} clusters, {pairs} audited point pairs, failures {}, observers redrawn for a zero numerator {redrawn}",
            failures.len()
        ),
        t0,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_9_divergence() {
    let t0 = Instant::now();
    let (x, y) = (SQRT_2 - 1.0, 3f64.sqrt() - 1.0);
    let cfg = DivergenceConfig { delta: 0.05, ..Default::default() };
    let reports: Vec<_> =
        [1u64 << 10, 1 << 12, 1 << 14].iter().map(|&q| r6_divergence_demo(x, y, q, &[1.0; 5], &cfg).unwrap()).collect();
    let increasing = reports.windows(2).all(|w| w[1].r6_lower_bound > w[0].r6_lower_bound);
    let rational = rational_divergence_demo(1, 1, 2, 8, &[1.0; 5], true, u64::MAX).unwrap();
    let brute = brute_tuples(8, Observer::new(0.5, 0.5).unwrap(), &[1.0; 5]);
    let exact = !rational.counted_truncated && rational.counted_tuples == Some(brute);
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "Q={}: bound {:.4} (formula size {:?} gives {:?}), floor {:.3} reached {}",
                r.radius, r.r6_lower_bound, r.m_formula, r.formula_bound, r.growth_floor, r.floor_reached
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let passed = increasing && exact;
    report(9, passed, &format!("{detail}; (1/2,1/2) at Q=8: {brute} tuples, engine {:?}", rational.counted_tuples), t0);
    assert!(passed);
}
