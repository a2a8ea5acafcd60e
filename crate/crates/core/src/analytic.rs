//! Area weights of pairs of lattice points, the weighted pair sums they feed,
//! and the section integrals of the quadratic `Φ` behind the limiting constants.
//!
//! For `P = (q, a)`, `P' = (q', a')` and an observer `(x, y)`,
//! `L(x, y) = (a' - y)(q - x) - (a - y)(q' - x)` is twice the signed area of the
//! triangle `P (x, y) P'`, so `|L| = ‖P - X‖ ‖P' - X‖ |sin θ|`.

use std::f64::consts::{PI, SQRT_2};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::Disc;
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticePoint};
use crate::numtheory::mod_inverse;
use crate::quadrature::{integrate, integrate_pieces, Estimate, QuadratureConfig};

/// Largest box radius accepted by [`g_sum_gq`] and [`s_sum_sq`].
pub const MAX_SUM_RADIUS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminantForm {
    pub p: LatticePoint,
    pub p_prime: LatticePoint,
}

impl DeterminantForm {
    pub fn new(p: LatticePoint, p_prime: LatticePoint) -> Result<Self> {
        if p == p_prime {
            return Err(invalid(format!("the pair needs two distinct points, got {p:?} twice")));
        }
        Ok(Self { p, p_prime })
    }

    /// `(q' - q, a' - a)`.
    pub fn difference(&self) -> (i64, i64) {
        (self.p_prime.q - self.p.q, self.p_prime.a - self.p.a)
    }

    /// `‖P P'‖`.
    pub fn length(&self) -> f64 {
        let (k, l) = self.difference();
        (k as f64).hypot(l as f64)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (q, a) = (self.p.q as f64, self.p.a as f64);
        let (qp, ap) = (self.p_prime.q as f64, self.p_prime.a as f64);
        (ap - y) * (q - x) - (a - y) * (qp - x)
    }

    /// `‖OP‖ ‖OP'‖ / Q²`.
    pub fn gamma(&self, radius: u64) -> f64 {
        let norm = |p: LatticePoint| (p.q as f64).hypot(p.a as f64);
        norm(self.p) * norm(self.p_prime) / (radius as f64).powi(2)
    }
}

pub fn determinant_l(form: &DeterminantForm, x: f64, y: f64) -> f64 {
    form.eval(x, y)
}

/// Area of `{u² + t² <= r0², t1 <= t <= t2}`; zero when the strip misses the disc.
pub fn strip_disc_area(r0: f64, t1: f64, t2: f64) -> f64 {
    let lo = t1.clamp(-r0, r0);
    let hi = t2.clamp(-r0, r0);
    if hi <= lo {
        return 0.0;
    }
    let prim = |t: f64| t * (r0 * r0 - t * t).max(0.0).sqrt() + r0 * r0 * (t / r0).clamp(-1.0, 1.0).asin();
    prim(hi) - prim(lo)
}

/// `sin(2πλ / N)`, the sine of the correlation window.
pub fn window_sine(radius: u64, lambda: f64) -> Result<f64> {
    let n = LatticeBox::new(radius).count()? as f64;
    Ok((2.0 * PI * lambda / n).sin())
}

/// Area of the observers in the disc with `|L(x, y)| <= μ γ`, exactly.
pub fn strip_area_a(form: &DeterminantForm, disc: &Disc, radius: u64, mu: f64) -> f64 {
    let len = form.length();
    let half = mu * form.gamma(radius) / len;
    let centre = form.eval(disc.x0, disc.y0) / len;
    strip_disc_area(disc.r0, centre - half, centre + half)
}

/// Measure of `{s ∈ [lo, hi] : g(s) <= 0}` for a function with few sign changes.
fn sublevel_length<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, pivot: f64) -> f64 {
    const GRID: usize = 64;
    if hi <= lo {
        return 0.0;
    }
    let mut nodes: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    if pivot > lo && pivot < hi {
        nodes.push(pivot);
        nodes.sort_by(f64::total_cmp);
    }
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a) <= 0.0, g(b) <= 0.0);
        if ga == gb {
            if ga {
                total += b - a;
            }
            continue;
        }
        // One crossing assumed inside [a, b].
        let (mut x0, mut x1) = (a, b);
        for _ in 0..80 {
            let m = 0.5 * (x0 + x1);
            if (g(m) <= 0.0) == ga {
                x0 = m;
            } else {
                x1 = m;
            }
        }
        let cross = 0.5 * (x0 + x1);
        total += if ga { cross - a } else { b - cross };
    }
    total
}

/// Area of the observers in the disc with `|L(x, y)| <= β ‖X P‖ ‖X P'‖`,
/// `β = sin(2πλ/N)`.
///
/// In coordinates `u` along `P P'` and `s` across it the condition reads
/// `‖P P'‖ |s| <= β d1 d2`; each chord of the disc is solved by root finding
/// and the chord lengths are integrated over `u`.
pub fn weight_area(form: &DeterminantForm, disc: &Disc, radius: u64, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let beta = window_sine(radius, lambda)?;
    if beta <= 0.0 {
        return Ok(0.0);
    }
    let (k, l) = form.difference();
    let len = form.length();
    let (ex, ey) = (k as f64 / len, l as f64 / len);
    let (dx, dy) = (disc.x0 - form.p.q as f64, disc.y0 - form.p.a as f64);
    let uc = dx * ex + dy * ey;
    let sc = -dx * ey + dy * ex;
    let r0 = disc.r0;
    let chord = |u: f64| {
        let w = (r0 * r0 - (u - uc).powi(2)).max(0.0).sqrt();
        let g = |s: f64| {
            let d1 = u.hypot(s);
            let d2 = (u - len).hypot(s);
            len * s.abs() - beta * d1 * d2
        };
        sublevel_length(g, sc - w, sc + w, 0.0)
    };
    Ok(integrate(chord, uc - r0, uc + r0, cfg)?.value)
}

fn same_closed_quadrant(p: (i64, i64), pp: (i64, i64)) -> bool {
    let same = |s: i64, t: i64| (s >= 0 && t >= 0) || (s <= 0 && t <= 0);
    same(p.0, pp.0) && same(p.1, pp.1)
}

fn check_sum_radius(radius: u64) -> Result<()> {
    if radius == 0 {
        return Err(invalid("box radius must be positive"));
    }
    if radius > MAX_SUM_RADIUS {
        return Err(Error::Size(format!("radius {radius} exceeds the enumeration budget {MAX_SUM_RADIUS}")));
    }
    Ok(())
}

/// `Q^{-2} Σ A_{P,P'}(Q, μ)` over ordered distinct pairs of the box lying in a
/// common closed quadrant.
///
/// Pairs are enumerated by difference vector `(k, ℓ)`; for each row `q` only
/// the `a` with `|L(x0, y0)| <= r0 ‖(k, ℓ)‖ + 2μ` can have a nonzero area
/// (`γ <= 2` on the box), which keeps the cost near `O(Q³)`.
pub fn g_sum_gq(radius: u64, mu: f64, disc: &Disc) -> Result<f64> {
    check_sum_radius(radius)?;
    if !(mu >= 0.0) {
        return Err(invalid(format!("mu = {mu} must be non-negative")));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    let qr = radius as i64;
    let span = 2 * qr;
    let per_k: Vec<f64> = (-span..=span)
        .into_par_iter()
        .map(|k| {
            let mut acc = 0.0;
            for l in -span..=span {
                if k == 0 && l == 0 {
                    continue;
                }
                let reach = disc.r0 * (k as f64).hypot(l as f64) + 2.0 * mu + 1e-9;
                let c = disc.x0 * l as f64 - disc.y0 * k as f64;
                for q in (-qr).max(-qr - k)..=qr.min(qr - k) {
                    let (a_lo, a_hi) = if k == 0 {
                        if ((l * q) as f64 - c).abs() > reach {
                            continue;
                        }
                        (-qr, qr)
                    } else {
                        let centre = ((l * q) as f64 - c) / k as f64;
                        let half = reach / (k.abs() as f64);
                        ((centre - half).floor() as i64, (centre + half).ceil() as i64)
                    };
                    let lo = a_lo.max(-qr).max(-qr - l);
                    let hi = a_hi.min(qr).min(qr - l);
                    for a in lo..=hi {
                        if !same_closed_quadrant((q, a), (q + k, a + l)) {
                            continue;
                        }
                        let form = DeterminantForm { p: LatticePoint::new(q, a), p_prime: LatticePoint::new(q + k, a + l) };
                        acc += strip_area_a(&form, disc, radius, mu);
                    }
                }
            }
            acc
        })
        .collect();
    Ok(per_k.iter().sum::<f64>() / (radius as f64).powi(2))
}

/// `16 π r0² μ / 3`.
pub fn g_sum_limit(mu: f64, disc: &Disc) -> f64 {
    16.0 * PI * disc.r0 * disc.r0 * mu / 3.0
}

/// The normalised pair sum
/// `S_Q = 2 Q^{-4} Σ_{1<=a<=q<=Q} Σ_{D ∈ J_{q,a}} Σ (q'-q) q' √(r0²(q²+a²) - (y0 q - x0 a + D)²) / q²`,
/// the innermost sum over `q' ∈ [q, Q]`, `a' = (a q' - D)/q ∈ [a, Q]` integral.
pub fn s_sum_sq(radius: u64, disc: &Disc) -> Result<f64> {
    check_sum_radius(radius)?;
    let qr = radius as i64;
    let (x0, y0, r0) = (disc.x0, disc.y0, disc.r0);
    let rows: Vec<f64> = (1..=qr)
        .into_par_iter()
        .map(|q| {
            let mut row = 0.0;
            for a in 1..=q {
                let reach = r0 * ((q * q + a * a) as f64).sqrt();
                let shift = -(q as f64) * y0 + a as f64 * x0;
                let g = a.gcd(&q);
                let step = q / g;
                let inv = if step == 1 { 0 } else { mod_inverse(a / g, step as u64).expect("coprime") as i64 };
                let d_lo = (shift - reach).ceil() as i64;
                let d_hi = (shift + reach).floor() as i64;
                for d in d_lo..=d_hi {
                    if d % g != 0 {
                        continue;
                    }
                    let radicand = r0 * r0 * ((q * q + a * a) as f64) - (y0 * q as f64 - x0 * a as f64 + d as f64).powi(2);
                    if radicand <= 0.0 {
                        continue;
                    }
                    let root = radicand.sqrt();
                    let residue = ((d / g) % step * inv).rem_euclid(step);
                    // smallest q' >= q with q' ≡ residue (mod step)
                    let mut qp = q + (residue - q).rem_euclid(step);
                    while qp <= qr {
                        let num = a * qp - d;
                        if num % q == 0 {
                            let ap = num / q;
                            if ap >= a && ap <= qr {
                                row += ((qp - q) * qp) as f64 * root;
                            }
                        }
                        qp += step;
                    }
                }
            }
            row / (q as f64 * q as f64)
        })
        .collect();
    Ok(2.0 * rows.iter().sum::<f64>() / (radius as f64).powi(4))
}

/// `π r0² / 6`.
pub fn s_sum_limit(disc: &Disc) -> f64 {
    PI * disc.r0 * disc.r0 / 6.0
}

/// `g(t) = (t - 1)³/3 + (t - 1)²/2`.
pub fn g_shape(t: f64) -> f64 {
    let s = t - 1.0;
    s * s * s / 3.0 + s * s / 2.0
}

/// `4π r0² / (3 Q⁴) Σ_{q=1}^{Q} q³ g(Q/q)`, tending to `π r0² / 6`.
pub fn mq_main_term(radius: u64, r0: f64) -> Result<f64> {
    if radius == 0 {
        return Err(invalid("box radius must be positive"));
    }
    let qf = radius as f64;
    let sum: f64 = (1..=radius).map(|q| (q as f64).powi(3) * g_shape(qf / q as f64)).sum();
    Ok(4.0 * PI * r0 * r0 / (3.0 * qf.powi(4)) * sum)
}

/// Parameters of `Φ(t, x) = 1 + t² - (β0 - t α0 + x)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    pub alpha0: f64,
    pub beta0: f64,
}

impl PhiParams {
    pub fn new(alpha0: f64, beta0: f64) -> Result<Self> {
        if !(alpha0.is_finite() && beta0.is_finite()) {
            return Err(invalid("alpha0 and beta0 must be finite"));
        }
        Ok(Self { alpha0, beta0 })
    }

    /// Projection of `{0 <= t <= 1, Φ >= 0}` on the `x` axis.
    pub fn projection(&self) -> (f64, f64) {
        let (a, b) = (self.alpha0, self.beta0);
        ((-b - 1.0).min(a - b - SQRT_2), (1.0 - b).max(a - b + SQRT_2))
    }

    pub fn in_projection(&self, x: f64) -> bool {
        let (lo, hi) = self.projection();
        lo <= x && x <= hi
    }

    /// `x` values where the shape of the section `I_x` changes.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.projection();
        let (a, b) = (self.alpha0, self.beta0);
        let mut pts = vec![lo, hi, -b - 1.0, -b + 1.0, a - b - SQRT_2, a - b + SQRT_2];
        if a.abs() < 1.0 {
            let r = (1.0 - a * a).sqrt();
            pts.extend([r - b, -r - b]);
        }
        pts.retain(|p| *p >= lo && *p <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `Φ(·, x)` as a polynomial in `t` with its real roots, and the pieces of
    /// `[0, 1]` where it is non-negative, split at an interior vertex.
    fn section(&self, x: f64) -> Section {
        let (a0, c) = (self.alpha0, self.beta0 + x);
        let qa = (1.0 - a0) * (1.0 + a0);
        let qb = 2.0 * c * a0;
        let qc = (1.0 - c) * (1.0 + c);
        // Quarter discriminant (qb² - 4 qa qc) / 4.
        let disc = (c - 1.0) * (c + 1.0) + a0 * a0;
        let form = if qa.abs() > 1e-14 {
            if disc >= 0.0 {
                let w = -0.5 * (qb + qb.signum() * 2.0 * disc.sqrt());
                if w != 0.0 {
                    let (r1, r2) = (w / qa, qc / w);
                    PhiForm::Roots { lead: qa, r1: r1.min(r2), r2: r1.max(r2) }
                } else {
                    PhiForm::Roots { lead: qa, r1: 0.0, r2: 0.0 }
                }
            } else {
                PhiForm::Vertex { lead: qa, vertex: -qb / (2.0 * qa), lift: -disc / qa }
            }
        } else if qb != 0.0 {
            PhiForm::Linear { slope: qb, root: -qc / qb }
        } else {
            PhiForm::Constant(qc)
        };
        let mut cuts = vec![0.0, 1.0];
        match form {
            PhiForm::Roots { r1, r2, .. } => cuts.extend([r1, r2, 0.5 * (r1 + r2)]),
            PhiForm::Vertex { vertex, .. } => cuts.push(vertex),
            PhiForm::Linear { root, .. } => cuts.push(root),
            PhiForm::Constant(_) => {}
        }
        cuts.retain(|t| (0.0..=1.0).contains(t));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .filter(|&(lo, hi)| {
                let m = 0.5 * (lo + hi);
                form.eval(m, m - lo, hi - m, lo, hi) > 0.0
            })
            .collect();
        Section { form, pieces }
    }
}

/// `Φ(·, x)` in a form that stays accurate next to its roots.
#[derive(Debug, Clone, Copy)]
enum PhiForm {
    Roots { lead: f64, r1: f64, r2: f64 },
    Vertex { lead: f64, vertex: f64, lift: f64 },
    Linear { slope: f64, root: f64 },
    Constant(f64),
}

impl PhiForm {
    /// `Φ(t)` on the piece `[lo, hi]`, with `dlo = t - lo` and `dhi = hi - t`
    /// supplied exactly by the caller.
    fn eval(&self, t: f64, dlo: f64, dhi: f64, lo: f64, hi: f64) -> f64 {
        let offset = |r: f64| {
            if r == lo {
                dlo
            } else if r == hi {
                -dhi
            } else {
                t - r
            }
        };
        match *self {
            PhiForm::Roots { lead, r1, r2 } => lead * offset(r1) * offset(r2),
            PhiForm::Vertex { lead, vertex, lift } => lead * (offset(vertex).powi(2) + lift / lead),
            PhiForm::Linear { slope, root } => slope * offset(root),
            PhiForm::Constant(c) => c,
        }
    }
}

struct Section {
    form: PhiForm,
    pieces: Vec<(f64, f64)>,
}

pub fn phi_value(params: &PhiParams, t: f64, x: f64) -> f64 {
    1.0 + t * t - (params.beta0 - t * params.alpha0 + x).powi(2)
}

/// `∫ h(t, t - lo, hi - t) dt` over `[lo, hi]` after `t = lo + (hi - lo) sin²(θ/2)`,
/// which absorbs square-root behaviour at both ends.
fn integrate_cosine<H: Fn(f64, f64, f64) -> f64>(h: H, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let width = hi - lo;
    integrate(
        |th: f64| {
            let dlo = width * (0.5 * th).sin().powi(2);
            let dhi = width * (0.5 * th).cos().powi(2);
            let t = if th <= 0.5 * PI { lo + dlo } else { hi - dhi };
            h(t, dlo, dhi) * 0.5 * width * th.sin()
        },
        0.0,
        PI,
        cfg,
    )
}

/// `∫_{I_x} h(t, Φ(t, x)) dt`.
fn section_integral<H: Fn(f64, f64) -> f64>(params: &PhiParams, x: f64, h: H, cfg: &QuadratureConfig) -> Result<f64> {
    let section = params.section(x);
    let sub = QuadratureConfig { abs_tol: cfg.abs_tol / section.pieces.len().max(1) as f64, ..*cfg };
    let mut total = 0.0;
    for &(lo, hi) in &section.pieces {
        let f = |t: f64, dlo: f64, dhi: f64| h(t, section.form.eval(t, dlo, dhi, lo, hi).max(0.0));
        total += integrate_cosine(f, lo, hi, &sub)?.value;
    }
    Ok(total)
}

/// `ψ(x) = ∫_{I_x} √Φ(t, x) dt`; zero outside the projection (see
/// [`PhiParams::in_projection`]).
pub fn psi_integral(params: &PhiParams, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !params.in_projection(x) {
        return Ok(0.0);
    }
    section_integral(params, x, |_, phi| phi.sqrt(), cfg)
}

/// `ψ'(x) = ∫_{I_x} (t α0 - β0 - x) / √Φ(t, x) dt`.
pub fn psi_derivative(params: &PhiParams, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !params.in_projection(x) {
        return Ok(0.0);
    }
    let c = params.beta0 + x;
    section_integral(params, x, |t, phi| if phi <= 0.0 { 0.0 } else { (t * params.alpha0 - c) / phi.sqrt() }, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionIntegrals {
    /// `∫ |ψ'(x)| dx` over the projection.
    pub total_variation: f64,
    /// `∬ √Φ`.
    pub volume: f64,
}

/// `∫|ψ'|` and `∬√Φ` over `{0 <= t <= 1, Φ >= 0}`, by nested quadrature with the
/// outer integral split where the section changes shape.
pub fn section_integrals(params: &PhiParams, cfg: &QuadratureConfig) -> Result<SectionIntegrals> {
    let breaks = params.breakpoints();
    let inner = QuadratureConfig { abs_tol: cfg.abs_tol * 1e-2, ..*cfg };
    let mut failure: Option<Error> = None;
    let mut guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let volume = integrate_pieces(|x| guard(psi_integral(params, x, &inner)), &breaks, cfg);
    let variation = integrate_pieces(|x| guard(psi_derivative(params, x, &inner)).abs(), &breaks, cfg);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SectionIntegrals { total_variation: variation?.value, volume: volume?.value })
}

/// `√2 + ln(1 + √2)`, the bound on `∫|ψ'|`.
pub fn variation_bound() -> f64 {
    SQRT_2 + SQRT_2.ln_1p()
}

/// Measure of `{a : K <= u a² + v a + w <= K + L²}`.
pub fn quadratic_sublevel_measure(u: f64, v: f64, w: f64, k: f64, l: f64) -> Result<f64> {
    if u == 0.0 {
        return Err(Error::Unsupported("the leading coefficient u must be nonzero".into()));
    }
    if u < 0.0 {
        return quadratic_sublevel_measure(-u, -v, -w, -k - l * l, l);
    }
    // Length of {u a² + v a + w <= c} (or < c; the boundary has measure zero).
    let below = |c: f64| {
        let disc = v * v - 4.0 * u * (w - c);
        if disc <= 0.0 {
            0.0
        } else {
            disc.sqrt() / u
        }
    };
    Ok((below(k + l * l) - below(k)).max(0.0))
}
