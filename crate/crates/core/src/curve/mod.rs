//! Closed plane curves sampled uniformly in their parameter, winding numbers,
//! and regions encoded by systems of curves.
//!
//! A curve is stored as `N` samples `γ(k/N)` with an implicit wrap. Derivatives
//! come from trigonometric interpolation, so smooth curves get spectrally
//! accurate tangents, normals, and curvature.

mod rays;
mod spectral;
mod system;

use std::f64::consts::PI;

pub use rays::{Anchor, RayCaster};
pub use spectral::{Antiderivative, Trig};
pub use system::CurveSystem;

use crate::error::{Error, Result};
use crate::geom::{segment_distance, Vec2};
use crate::quad::compensated_sum;

pub const MIN_SAMPLES: usize = 16;

/// Oversampling factor of the dense polygon used for winding numbers and ray casts.
pub(crate) const FINE_FACTOR: usize = 4;

/// Relative distance to a curve below which winding numbers are not evaluated.
pub const PROXIMITY_GUARD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ClosedCurve {
    points: Vec<Vec2>,
    trig: Trig,
    d1: Vec<Vec2>,
    d2: Vec<Vec2>,
    length: f64,
    max_speed: f64,
    fine: Vec<Vec2>,
    fine_d1: Vec<Vec2>,
    fine_d2: Vec<Vec2>,
    constant_speed: bool,
}

impl ClosedCurve {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "a closed curve needs at least {MIN_SAMPLES} samples, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite curve sample {p:?}")));
        }
        let n = points.len();
        let trig = Trig::from_points(&points);
        let d1 = trig.sample_derivative(1, n);
        let d2 = trig.sample_derivative(2, n);
        let speeds: Vec<f64> = d1.iter().map(|d| d.norm()).collect();
        let length = compensated_sum(speeds.iter().copied()) / n as f64;
        let min_speed = speeds.iter().copied().fold(f64::INFINITY, f64::min);
        let max_speed = speeds.iter().copied().fold(0.0, f64::max);
        if !(min_speed > 1e-10 * length) {
            return Err(Error::Regularity { min_speed });
        }
        let constant_speed = speeds.iter().all(|s| (s - length).abs() <= 1e-6 * length);
        let m = FINE_FACTOR * n;
        let fine = trig.sample_derivative(0, m);
        let fine_d1 = trig.sample_derivative(1, m);
        let fine_d2 = trig.sample_derivative(2, m);
        let max_speed = fine_d1.iter().map(|d| d.norm()).fold(max_speed, f64::max);
        Ok(ClosedCurve { points, trig, d1, d2, length, max_speed, fine, fine_d1, fine_d2, constant_speed })
    }

    /// Samples `f(t)` at `t = k/n` and reparametrizes by arc length.
    pub fn from_fn<F: Fn(f64) -> Vec2>(f: F, n: usize) -> Result<Self> {
        let m = (4 * n).max(256);
        let raw = ClosedCurve::new((0..m).map(|k| f(k as f64 / m as f64)).collect())?;
        raw.resample_constant_speed(n)
    }

    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Self> {
        crate::error::ensure_positive("radius", radius)?;
        ClosedCurve::new(
            (0..n)
                .map(|k| center + Vec2::from_angle(2.0 * PI * k as f64 / n as f64) * radius)
                .collect(),
        )
    }

    /// Counter-clockwise ellipse with semi-axes `a` (x) and `b` (y), constant speed.
    pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> Result<Self> {
        crate::error::ensure_positive("semi-axis", a)?;
        crate::error::ensure_positive("semi-axis", b)?;
        Self::from_fn(
            |t| {
                let th = 2.0 * PI * t;
                center + Vec2::new(a * th.cos(), b * th.sin())
            },
            n,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn is_constant_speed(&self) -> bool {
        self.constant_speed
    }

    /// `L(γ) = ∫_0^1 |γ'| dt`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `γ'(k/N)`.
    pub fn derivatives(&self) -> &[Vec2] {
        &self.d1
    }

    pub fn second_derivatives(&self) -> &[Vec2] {
        &self.d2
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.d1.iter().map(|d| d.norm()).collect()
    }

    /// Values, first and second derivatives on the oversampled grid.
    pub(crate) fn fine(&self) -> (&[Vec2], &[Vec2], &[Vec2]) {
        (&self.fine, &self.fine_d1, &self.fine_d2)
    }

    pub fn trig(&self) -> &Trig {
        &self.trig
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        self.trig.eval(t)
    }

    pub fn eval3(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        self.trig.eval3(t)
    }

    pub fn tangents(&self) -> Vec<Vec2> {
        self.d1.iter().map(|d| d.normalized()).collect()
    }

    /// `ν = -τ^⊥`; outward for a counter-clockwise outer boundary.
    pub fn outward_normals(&self) -> Vec<Vec2> {
        self.d1.iter().map(|d| -d.normalized().perp()).collect()
    }

    /// `κ = (γ')^⊥·γ'' / |γ'|³`, positive on counter-clockwise convex curves.
    pub fn curvature_profile(&self) -> Vec<f64> {
        self.d1
            .iter()
            .zip(&self.d2)
            .map(|(a, b)| a.cross(*b) / a.norm().powi(3))
            .collect()
    }

    /// Curvature at an arbitrary parameter.
    pub fn curvature_at(&self, t: f64) -> f64 {
        let (_, a, b) = self.eval3(t);
        a.cross(b) / a.norm().powi(3)
    }

    /// `∫ κ² ds` by the trapezoid rule in the parameter.
    pub fn bending_integral(&self) -> f64 {
        let n = self.len() as f64;
        compensated_sum(
            self.curvature_profile()
                .iter()
                .zip(&self.d1)
                .map(|(k, d)| k * k * d.norm()),
        ) / n
    }

    /// `∫ |κ| ds`; at least `2π` for every closed curve.
    pub fn total_absolute_curvature(&self) -> f64 {
        let n = self.len() as f64;
        compensated_sum(
            self.curvature_profile()
                .iter()
                .zip(&self.d1)
                .map(|(k, d)| k.abs() * d.norm()),
        ) / n
    }

    /// Signed enclosed area `½∮ γ × γ'` (positive when counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let n = self.len() as f64;
        0.5 * compensated_sum(self.points.iter().zip(&self.d1).map(|(p, d)| p.cross(*d))) / n
    }

    pub fn centroid(&self) -> Vec2 {
        // ∮ x² dy / (2A), ∮ -y² dx / (2A)
        let n = self.len() as f64;
        let a = self.signed_area();
        let cx = compensated_sum(self.points.iter().zip(&self.d1).map(|(p, d)| p.x * p.x * d.y)) / n;
        let cy = compensated_sum(self.points.iter().zip(&self.d1).map(|(p, d)| -p.y * p.y * d.x)) / n;
        Vec2::new(cx, cy) / (2.0 * a)
    }

    /// Reparametrizes to constant speed with `n_out` samples.
    pub fn resample_constant_speed(&self, n_out: usize) -> Result<Self> {
        if n_out < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!("need at least {MIN_SAMPLES} samples")));
        }
        let mut curve = self.clone();
        // Second pass removes the residual from interpolating |γ'|.
        for _ in 0..3 {
            let m = FINE_FACTOR * curve.len().max(n_out);
            let speed: Vec<f64> = curve.trig.sample_derivative(1, m).iter().map(|d| d.norm()).collect();
            let arc = Antiderivative::new(&speed);
            let total = arc.mean();
            let mut t: f64 = 0.0;
            let mut pts = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let target = total * j as f64 / n_out as f64;
                if j > 0 {
                    t += (target - arc.value(t)) / total;
                }
                for _ in 0..50 {
                    let (s, rate) = arc.value_and_rate(t);
                    let dt = (target - s) / rate;
                    t += dt;
                    if dt.abs() < 1e-15 {
                        break;
                    }
                }
                pts.push(curve.eval(t));
            }
            let next = ClosedCurve::new(pts)?;
            let done = next.constant_speed
                && next
                    .speeds()
                    .iter()
                    .all(|s| (s - next.length).abs() <= 1e-10 * next.length);
            curve = next;
            if done {
                break;
            }
        }
        Ok(curve)
    }

    /// Same image traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts[1..].reverse();
        ClosedCurve::new(pts).expect("reversal preserves regularity")
    }

    pub fn map_points<F: Fn(Vec2) -> Vec2>(&self, f: F) -> Result<Self> {
        ClosedCurve::new(self.points.iter().map(|&p| f(p)).collect())
    }

    pub fn translated(&self, v: Vec2) -> Self {
        self.map_points(|p| p + v).expect("translation preserves regularity")
    }

    pub fn rotated(&self, theta: f64) -> Self {
        self.map_points(|p| p.rotated(theta)).expect("rotation preserves regularity")
    }

    pub fn scaled(&self, s: f64, about: Vec2) -> Result<Self> {
        self.map_points(|p| about + (p - about) * s)
    }

    /// Winding number `𝓘(γ, x)`.
    ///
    /// Sums the angle increments of a dense polygon through the curve, refining
    /// any piece of arc that could wrap around `x`; each increment is the exact
    /// integral of `(γ - x)^⊥·γ'/|γ - x|²` over its parameter interval.
    pub fn winding_number(&self, x: Vec2) -> Result<i64> {
        let raw = self.winding_number_raw(x)?;
        let w = raw.round();
        if (raw - w).abs() > 0.25 {
            return Err(Error::Quadrature(format!("winding number {raw} not near an integer")));
        }
        Ok(w as i64)
    }

    pub fn winding_number_raw(&self, x: Vec2) -> Result<f64> {
        let guard = PROXIMITY_GUARD * self.length;
        let m = self.fine.len();
        let h = 1.0 / m as f64;
        let reach = 1.05 * self.max_speed * h;
        let mut total = 0.0;
        let mut min_dist = f64::INFINITY;
        for j in 0..m {
            let a = self.fine[j];
            let b = self.fine[(j + 1) % m];
            let (da, db) = ((a - x).norm(), (b - x).norm());
            min_dist = min_dist.min(da);
            if da > reach || db > reach {
                total += angle_between(a - x, b - x);
            } else {
                let t0 = j as f64 * h;
                total += self.refined_angle(x, t0, t0 + h, a, b, reach, guard, &mut min_dist)?;
            }
        }
        if min_dist < guard {
            return Err(Error::Proximity { point: x, distance: min_dist });
        }
        Ok(total / (2.0 * PI))
    }

    #[allow(clippy::too_many_arguments)]
    fn refined_angle(
        &self,
        x: Vec2,
        t0: f64,
        t1: f64,
        a: Vec2,
        b: Vec2,
        reach: f64,
        guard: f64,
        min_dist: &mut f64,
    ) -> Result<f64> {
        let (da, db) = ((a - x).norm(), (b - x).norm());
        *min_dist = min_dist.min(da).min(db);
        // Every point of the arc lies within `reach` of both endpoints.
        if da > reach || db > reach {
            return Ok(angle_between(a - x, b - x));
        }
        if reach < guard {
            *min_dist = min_dist.min(segment_distance(x, a, b));
            return Err(Error::Proximity { point: x, distance: *min_dist });
        }
        let tm = 0.5 * (t0 + t1);
        let mid = self.eval(tm);
        Ok(self.refined_angle(x, t0, tm, a, mid, 0.5 * reach, guard, min_dist)?
            + self.refined_angle(x, tm, t1, mid, b, 0.5 * reach, guard, min_dist)?)
    }

    /// Approximate distance from `x` to the curve image.
    pub fn distance_to(&self, x: Vec2) -> f64 {
        self.closest_parameter(x).1
    }

    /// Parameter of the nearest curve point to `x`, and the distance to it.
    pub fn closest_parameter(&self, x: Vec2) -> (f64, f64) {
        let m = self.fine.len();
        let (j, _) = self
            .fine
            .iter()
            .enumerate()
            .map(|(j, p)| (j, (*p - x).norm2()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty curve");
        // Golden-section polish on the neighbouring parameter interval.
        let h = 1.0 / m as f64;
        let (mut lo, mut hi) = ((j as f64 - 1.0) * h, (j as f64 + 1.0) * h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| (self.eval(t) - x).norm();
        let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..60 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = f(d);
            }
        }
        let (t, dist) = if fc < fd { (c, fc) } else { (d, fd) };
        let (t0, d0) = (j as f64 * h, (self.fine[j] - x).norm());
        if d0 <= dist { (t0, d0) } else { (t.rem_euclid(1.0), dist) }
    }

    /// True if the dense polygon through the curve has a proper self-crossing.
    pub fn self_intersects(&self) -> bool {
        let pts = &self.points;
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if crate::geom::segments_cross(a, b, pts[j], pts[(j + 1) % n]) {
                    return true;
                }
            }
        }
        false
    }
}

#[inline]
fn angle_between(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}
