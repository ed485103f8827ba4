use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClosedCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quad::compensated_sum;

/// Finite family of closed curves, ordered by decreasing length, describing the
/// region of points with odd total winding number.
#[derive(Debug, Clone)]
pub struct CurveSystem {
    curves: Vec<ClosedCurve>,
}

#[derive(Serialize, Deserialize)]
struct CurveDoc {
    points: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    curves: Vec<CurveDoc>,
}

impl CurveSystem {
    pub fn new(mut curves: Vec<ClosedCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidInput("a curve system needs at least one curve".into()));
        }
        curves.sort_by(|a, b| b.length().total_cmp(&a.length()));
        Ok(CurveSystem { curves })
    }

    pub fn single(curve: ClosedCurve) -> Self {
        CurveSystem { curves: vec![curve] }
    }

    pub fn disk(center: Vec2, radius: f64, n: usize) -> Result<Self> {
        Ok(Self::single(ClosedCurve::circle(center, radius, n)?))
    }

    /// `B_outer(0) \ B_inner(hole_center)`, outer counter-clockwise, inner clockwise.
    pub fn annulus(outer: f64, inner: f64, hole_center: Vec2, n_outer: usize, n_inner: usize) -> Result<Self> {
        if inner <= 0.0 || hole_center.norm() + inner >= outer {
            return Err(Error::InvalidInput(format!(
                "hole of radius {inner} at {hole_center:?} does not fit inside radius {outer}"
            )));
        }
        Self::new(vec![
            ClosedCurve::circle(Vec2::ZERO, outer, n_outer)?,
            ClosedCurve::circle(hole_center, inner, n_inner)?.reversed(),
        ])
    }

    /// Annulus of unit area with inner radius `r` and outer radius `√(1 + r²)`.
    pub fn unit_mass_annulus(r: f64, n_outer: usize, n_inner: usize) -> Result<Self> {
        Self::annulus((1.0 + r * r).sqrt(), r, Vec2::ZERO, n_outer, n_inner)
    }

    pub fn curves(&self) -> &[ClosedCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// `P(Ω) = Σ L(γ_i)`.
    pub fn perimeter(&self) -> f64 {
        compensated_sum(self.curves.iter().map(|c| c.length()))
    }

    pub fn min_length(&self) -> f64 {
        self.curves.iter().map(|c| c.length()).fold(f64::INFINITY, f64::min)
    }

    /// `Σ_i 𝓘(γ_i, x)`.
    pub fn winding_number(&self, x: Vec2) -> Result<i64> {
        self.curves.iter().map(|c| c.winding_number(x)).sum()
    }

    /// Whether `x` belongs to the region: total winding number is odd.
    pub fn contains(&self, x: Vec2) -> Result<bool> {
        Ok(self.winding_number(x)?.rem_euclid(2) == 1)
    }

    pub fn distance_to(&self, x: Vec2) -> f64 {
        self.curves.iter().map(|c| c.distance_to(x)).fold(f64::INFINITY, f64::min)
    }

    /// `+1` if `ν = -τ^⊥` points out of the region along curve `i`, `-1` if it
    /// points in, `0` when the region lies on neither side (collapsed curve).
    pub fn orientation_sign(&self, i: usize) -> i32 {
        let c = &self.curves[i];
        let n = c.len();
        let kmax = c.curvature_profile().iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let delta = 0.25 * (c.length() / n as f64).min(1.0 / kmax.max(1e-300));
        let normals = c.outward_normals();
        let mut votes = 0i32;
        for step in 0..8 {
            let j = (step * n) / 8;
            let p = c.points()[j];
            let out = self.contains(p + normals[j] * delta);
            let inn = self.contains(p - normals[j] * delta);
            match (inn, out) {
                (Ok(true), Ok(false)) => votes += 1,
                (Ok(false), Ok(true)) => votes -= 1,
                _ => {}
            }
        }
        votes.signum()
    }

    /// Copy with every curve oriented so that `ν = -τ^⊥` is the outward normal.
    pub fn oriented(&self) -> Self {
        let curves = (0..self.len())
            .map(|i| {
                if self.orientation_sign(i) < 0 {
                    self.curves[i].reversed()
                } else {
                    self.curves[i].clone()
                }
            })
            .collect();
        CurveSystem { curves }
    }

    /// `|Ω|` from the signed areas of the outward-oriented curves.
    pub fn area(&self) -> f64 {
        let oriented = self.oriented();
        compensated_sum(oriented.curves.iter().map(|c| c.signed_area()))
    }

    /// Isoperimetric deficit `P²/(4π|Ω|) - 1`.
    pub fn isoperimetric_deficit(&self) -> f64 {
        let p = self.perimeter();
        p * p / (4.0 * PI * self.area()) - 1.0
    }

    pub fn bending_integral(&self) -> f64 {
        compensated_sum(self.curves.iter().map(|c| c.bending_integral()))
    }

    /// Axis-aligned bounding box `(min, max)` of all samples.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.curves {
            for p in c.fine().0 {
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        (lo, hi)
    }

    pub fn map_curves<F: Fn(&ClosedCurve) -> Result<ClosedCurve>>(&self, f: F) -> Result<Self> {
        Self::new(self.curves.iter().map(f).collect::<Result<_>>()?)
    }

    pub fn translated(&self, v: Vec2) -> Self {
        self.map_curves(|c| Ok(c.translated(v))).expect("translation keeps the system valid")
    }

    pub fn rotated(&self, theta: f64) -> Self {
        self.map_curves(|c| Ok(c.rotated(theta))).expect("rotation keeps the system valid")
    }

    pub fn scaled(&self, s: f64, about: Vec2) -> Result<Self> {
        self.map_curves(|c| c.scaled(s, about))
    }

    /// Homothety about the origin that brings the area to `target`.
    pub fn rescaled_to_area(&self, target: f64) -> Result<Self> {
        let a = self.area();
        if !(a > 0.0) {
            return Err(Error::InvalidInput(format!("region has nonpositive area {a}")));
        }
        self.scaled((target / a).sqrt(), Vec2::ZERO)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(s)?;
        Self::new(
            doc.curves
                .into_iter()
                .map(|c| ClosedCurve::new(c.points))
                .collect::<Result<_>>()?,
        )
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = SystemDoc {
            curves: self
                .curves
                .iter()
                .map(|c| CurveDoc { points: c.points().to_vec() })
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}
