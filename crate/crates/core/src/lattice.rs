//! Lattice points, observers and the angles of the rays joining them.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// An integer lattice point `(q, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub q: i64,
    pub a: i64,
}

impl LatticePoint {
    pub const fn new(q: i64, a: i64) -> Self {
        Self { q, a }
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from((q, a): (i64, i64)) -> Self {
        Self { q, a }
    }
}

/// The fixed point from which directions are measured.
///
/// [`Observer::new`] enforces `0 <= x, y < 1`. Disc averages may sample
/// observers slightly outside the unit square; those go through
/// [`Observer::anywhere`], which only requires finite coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    pub x: f64,
    pub y: f64,
}

impl Observer {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) || !(0.0..1.0).contains(&y) {
            return Err(invalid(format!("observer ({x}, {y}) outside [0,1)^2")));
        }
        Ok(Self { x, y })
    }

    pub fn anywhere(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(invalid(format!("observer ({x}, {y}) is not finite")));
        }
        Ok(Self { x, y })
    }

    /// Lattice point the observer sits on, if any.
    pub fn coincident_point(&self) -> Option<LatticePoint> {
        if self.x.fract() == 0.0 && self.y.fract() == 0.0 {
            Some(LatticePoint::new(self.x as i64, self.y as i64))
        } else {
            None
        }
    }

    /// `(k, X, Y)` with `x = X / 2^k`, `y = Y / 2^k`, when both coordinates are
    /// dyadic with a small denominator.
    fn dyadic(&self) -> Option<(u32, i64, i64)> {
        const MAX_SHIFT: u32 = 20;
        for k in 0..=MAX_SHIFT {
            let s = (1u64 << k) as f64;
            let (xs, ys) = (self.x * s, self.y * s);
            if xs.fract() == 0.0 && ys.fract() == 0.0 && xs.abs() < 1e12 && ys.abs() < 1e12 {
                return Some((k, xs as i64, ys as i64));
            }
        }
        None
    }
}

/// The box `[-Q, Q]^2` of lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub radius: u64,
}

impl LatticeBox {
    pub fn new(radius: u64) -> Self {
        Self { radius }
    }

    /// `(2Q + 1)^2`, or a size error when that overflows.
    pub fn count(&self) -> Result<u64> {
        let side = self
            .radius
            .checked_mul(2)
            .and_then(|s| s.checked_add(1))
            .ok_or_else(|| Error::Size(format!("box side overflows for Q = {}", self.radius)))?;
        let n = side
            .checked_mul(side)
            .ok_or_else(|| Error::Size(format!("point count overflows for Q = {}", self.radius)))?;
        usize::try_from(n).map_err(|_| Error::Size(format!("{n} points do not fit in memory indices")))?;
        Ok(n)
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        let r = self.radius as i128;
        (p.q as i128).abs() <= r && (p.a as i128).abs() <= r
    }
}

/// All `(2Q + 1)^2` points of `[-Q, Q]^2`, in `(q, a)` lexicographic order.
pub fn enumerate_box(radius: u64) -> Result<Vec<LatticePoint>> {
    let n = LatticeBox::new(radius).count()?;
    if radius > i64::MAX as u64 / 2 {
        return Err(Error::Size(format!("Q = {radius} exceeds coordinate range")));
    }
    let r = radius as i64;
    let mut out = Vec::with_capacity(n as usize);
    for q in -r..=r {
        for a in -r..=r {
            out.push(LatticePoint::new(q, a));
        }
    }
    Ok(out)
}

/// A convex domain containing the origin in its interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexRegion {
    /// Vertices in counterclockwise order.
    Polygon(Vec<(f64, f64)>),
    /// Disc of the given radius centred at the origin.
    Disc { radius: f64 },
}

impl ConvexRegion {
    /// The square `[-1, 1]^2`, whose dilates are the lattice boxes.
    pub fn unit_square() -> Self {
        ConvexRegion::Polygon(vec![(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexRegion::Disc { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid(format!("disc radius {radius} must be positive")));
                }
            }
            ConvexRegion::Polygon(v) => {
                if v.len() < 3 {
                    return Err(invalid("polygon needs at least three vertices"));
                }
                if v.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(invalid("polygon vertex is not finite"));
                }
                let n = v.len();
                for i in 0..n {
                    let (p0, p1, p2) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
                    let turn = cross(sub(p1, p0), sub(p2, p1));
                    if turn <= 0.0 {
                        return Err(invalid(
                            "polygon is not strictly convex with counterclockwise vertices",
                        ));
                    }
                    if cross(sub(p1, p0), sub((0.0, 0.0), p0)) <= 0.0 {
                        return Err(invalid("origin is not strictly inside the polygon"));
                    }
                }
                // Winding once: exterior angles of a simple convex polygon sum to 2π.
                let mut total = 0.0;
                for i in 0..n {
                    let e0 = sub(v[(i + 1) % n], v[i]);
                    let e1 = sub(v[(i + 2) % n], v[(i + 1) % n]);
                    total += cross(e0, e1).atan2(dot(e0, e1));
                }
                if (total - TAU).abs() > 1e-6 {
                    return Err(invalid("polygon winds more than once"));
                }
            }
        }
        Ok(())
    }

    /// Whether `p` lies in the dilate `scale · Ω` (boundary included).
    pub fn contains_dilated(&self, scale: f64, p: (f64, f64)) -> bool {
        match self {
            ConvexRegion::Disc { radius } => {
                let r = radius * scale;
                p.0 * p.0 + p.1 * p.1 <= r * r * (1.0 + 1e-12)
            }
            ConvexRegion::Polygon(v) => {
                let n = v.len();
                (0..n).all(|i| {
                    let a = (v[i].0 * scale, v[i].1 * scale);
                    let b = (v[(i + 1) % n].0 * scale, v[(i + 1) % n].1 * scale);
                    let e = sub(b, a);
                    let c = cross(e, sub(p, a));
                    let mag = (e.0.abs() + e.1.abs()) * (p.0.abs() + p.1.abs() + a.0.abs() + a.1.abs());
                    c >= -1e-12 * mag.max(1.0)
                })
            }
        }
    }

    fn extent(&self) -> f64 {
        match self {
            ConvexRegion::Disc { radius } => *radius,
            ConvexRegion::Polygon(v) => v.iter().fold(0.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs())),
        }
    }
}

/// Integer points of the dilate `Q · Ω`, in `(q, a)` lexicographic order.
pub fn enumerate_region(region: &ConvexRegion, radius: u64) -> Result<Vec<LatticePoint>> {
    region.validate()?;
    let scale = radius as f64;
    let reach = (region.extent() * scale).ceil();
    if !(reach < 1e9) {
        return Err(Error::Size(format!("region dilate of extent {reach} is too large")));
    }
    let r = reach as i64;
    let mut out = Vec::new();
    for q in -r..=r {
        for a in -r..=r {
            if region.contains_dilated(scale, (q as f64, a as f64)) {
                out.push(LatticePoint::new(q, a));
            }
        }
    }
    Ok(out)
}

/// Polar angle of `P - obs`, normalised to `[0, 2π)`.
///
/// For dyadic observers (such as `(1/2, 1/2)`) the direction is reduced to a
/// primitive integer vector first, so lattice points on a common ray get
/// bit-identical angles.
pub fn ray_angle(obs: &Observer, p: LatticePoint) -> Result<f64> {
    let (dx, dy) = match obs.dyadic() {
        Some((k, xs, ys)) if p.q.unsigned_abs() < (1 << 40) && p.a.unsigned_abs() < (1 << 40) => {
            let vx = ((p.q as i128) << k) - xs as i128;
            let vy = ((p.a as i128) << k) - ys as i128;
            if vx == 0 && vy == 0 {
                return Err(Error::DegeneratePoint { q: p.q, a: p.a });
            }
            let g = vx.gcd(&vy);
            ((vx / g) as f64, (vy / g) as f64)
        }
        _ => {
            let dx = p.q as f64 - obs.x;
            let dy = p.a as f64 - obs.y;
            if dx == 0.0 && dy == 0.0 {
                return Err(Error::DegeneratePoint { q: p.q, a: p.a });
            }
            (dx, dy)
        }
    };
    Ok(normalize_angle(dy.atan2(dx)))
}

fn normalize_angle(t: f64) -> f64 {
    let t = if t < 0.0 { t + TAU } else { t };
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Folded distance between two directions, in `[0, π]`.
pub fn angular_separation(a1: f64, a2: f64) -> f64 {
    let d = (a1 - a2).abs();
    d.min(TAU - d).max(0.0)
}

/// One entry of an [`AngleMultiset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEntry {
    pub angle: f64,
    pub point: LatticePoint,
}

/// Ray angles of a set of lattice points seen from one observer, sorted by
/// angle with ties broken by `(q, a)`.
///
/// A point coinciding with the observer has no direction and is left out;
/// it is recorded in [`AngleMultiset::excluded`].
#[derive(Debug, Clone)]
pub struct AngleMultiset {
    observer: Observer,
    entries: Vec<AngleEntry>,
    excluded: Option<LatticePoint>,
}

impl AngleMultiset {
    pub fn build(observer: Observer, points: &[LatticePoint]) -> Self {
        let mut excluded = None;
        let mut entries: Vec<AngleEntry> = Vec::with_capacity(points.len());
        for &p in points {
            match ray_angle(&observer, p) {
                Ok(angle) => entries.push(AngleEntry { angle, point: p }),
                Err(_) => excluded = Some(p),
            }
        }
        entries.sort_unstable_by(|l, r| match l.angle.total_cmp(&r.angle) {
            Ordering::Equal => l.point.cmp(&r.point),
            o => o,
        });
        Self { observer, entries, excluded }
    }

    /// Angle multiset of the whole box `[-Q, Q]^2`.
    pub fn for_box(observer: Observer, radius: u64) -> Result<Self> {
        Ok(Self::build(observer, &enumerate_box(radius)?))
    }

    pub fn observer(&self) -> &Observer {
        &self.observer
    }

    pub fn entries(&self) -> &[AngleEntry] {
        &self.entries
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.angle)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn excluded(&self) -> Option<LatticePoint> {
        self.excluded
    }
}

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}
