//! Pixel rasters of curve-system regions and brute-force pair sums over them.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::curve::{CurveSystem, RayCaster};
use crate::error::{ensure_positive, Error, Result};
use crate::geom::Vec2;
use crate::quad::{compensated_sum, integrate, CompensatedSum};

/// Characteristic function of a region sampled at the centers of an
/// axis-aligned grid of square cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterRegion {
    origin: Vec2,
    h: f64,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
    jittered: usize,
}

impl RasterRegion {
    /// Builds a raster from row-major cells, `mask[j * nx + i]` for the cell with
    /// lower-left corner `origin + h·(i, j)`.
    pub fn from_mask(origin: Vec2, h: f64, nx: usize, ny: usize, mask: Vec<bool>) -> Result<Self> {
        ensure_positive("raster spacing", h)?;
        if mask.len() != nx * ny || nx == 0 || ny == 0 {
            return Err(Error::InvalidInput(format!(
                "mask of {} cells does not match a {nx}x{ny} grid",
                mask.len()
            )));
        }
        Ok(RasterRegion { origin, h, nx, ny, mask, jittered: 0 })
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.h * self.h
    }

    /// Number of cell centers that had to be classified at a jittered position.
    pub fn jittered_cells(&self) -> usize {
        self.jittered
    }

    /// Same mask with its origin moved by `v`.
    pub fn translated(&self, v: Vec2) -> Self {
        RasterRegion { origin: self.origin + v, ..self.clone() }
    }

    /// Inside runs `[a, b]` (inclusive cell indices) of every row.
    fn runs(&self) -> Vec<Vec<(usize, usize)>> {
        (0..self.ny)
            .map(|j| {
                let row = &self.mask[j * self.nx..(j + 1) * self.nx];
                let mut runs = Vec::new();
                let mut i = 0;
                while i < self.nx {
                    if row[i] {
                        let a = i;
                        while i < self.nx && row[i] {
                            i += 1;
                        }
                        runs.push((a, i - 1));
                    } else {
                        i += 1;
                    }
                }
                runs
            })
            .collect()
    }

    /// Binary PGM with value 1 for inside cells, top row first.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.mask.len() + 32);
        write!(out, "P5\n{} {}\n1\n", self.nx, self.ny)?;
        for j in (0..self.ny).rev() {
            out.extend(self.mask[j * self.nx..(j + 1) * self.nx].iter().map(|&b| b as u8));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Classifies cell centers of a grid covering the system with one cell of margin.
///
/// Rows are classified by the parity of horizontal ray crossings; centers that
/// lie essentially on a curve fall back to winding numbers, retried at
/// half-cell offsets when the center itself is too close.
pub fn rasterize(system: &CurveSystem, h: f64) -> Result<RasterRegion> {
    ensure_positive("raster spacing", h)?;
    let need = system.min_length() / 32.0;
    if h > need {
        return Err(Error::InvalidInput(format!(
            "raster spacing {h} is coarser than the shortest curve allows ({need})"
        )));
    }
    let (lo, hi) = system.bounding_box();
    let origin = lo - Vec2::new(2.0 * h, 2.0 * h);
    let nx = ((hi.x - lo.x) / h).ceil() as usize + 4;
    let ny = ((hi.y - lo.y) / h).ceil() as usize + 4;
    let caster = RayCaster::new(system);
    let width = nx as f64 * h;
    let near = 1e-6 * h;

    let rows: Vec<Result<(Vec<bool>, usize)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = origin.y + (j as f64 + 0.5) * h;
            let mut cross = Vec::new();
            caster.crossings(Vec2::new(origin.x, y), Vec2::E1, width, &mut cross);
            let mut row = vec![false; nx];
            let mut jittered = 0;
            let mut next = 0;
            for (i, cell) in row.iter_mut().enumerate() {
                let xr = (i as f64 + 0.5) * h;
                while next < cross.len() && cross[next] < xr {
                    next += 1;
                }
                let close = [next.checked_sub(1), Some(next)]
                    .into_iter()
                    .flatten()
                    .filter_map(|k| cross.get(k))
                    .any(|r| (r - xr).abs() < near);
                *cell = if close {
                    let (inside, moved) = classify_with_jitter(system, Vec2::new(origin.x + xr, y), h)?;
                    jittered += moved as usize;
                    inside
                } else {
                    next % 2 == 1
                };
            }
            Ok((row, jittered))
        })
        .collect();

    let mut mask = Vec::with_capacity(nx * ny);
    let mut jittered = 0;
    for row in rows {
        let (r, k) = row?;
        mask.extend(r);
        jittered += k;
    }
    Ok(RasterRegion { origin, h, nx, ny, mask, jittered })
}

fn classify_with_jitter(system: &CurveSystem, x: Vec2, h: f64) -> Result<(bool, bool)> {
    match system.contains(x) {
        Ok(b) => return Ok((b, false)),
        Err(Error::Proximity { .. }) => {}
        Err(e) => return Err(e),
    }
    for k in 0..8 {
        let p = x + Vec2::from_angle(0.3 + k as f64 * PI / 4.0) * (0.5 * h);
        if let Ok(b) = system.contains(p) {
            return Ok((b, true));
        }
    }
    Err(Error::Rasterization(format!("cell center ({}, {}) stays on the boundary under jitter", x.x, x.y)))
}

/// `∫_Q e^{-k|y|}/|y| dy` over the square `Q = [-a, a]²`, in polar form.
pub fn square_cell_integral(a: f64, k: f64) -> f64 {
    // 8 ∫_0^{π/4} ∫_0^{a/cos θ} e^{-kr} dr dθ
    let est = integrate(
        |th: f64| -(-k * a / th.cos()).exp_m1() / k,
        0.0,
        PI / 4.0,
        1e-15,
        1e-14,
    );
    8.0 * est.value
}

/// `∫_Ω∫_Ω e^{-λα|x-y|}/|x-y| dx dy` over the raster.
///
/// Off-diagonal cell pairs use the kernel at the distance of the cell centers;
/// each cell paired with itself uses the exact kernel integral over a square.
/// Pair sums between two rows of cells collapse to differences of second-order
/// prefix sums of the kernel row, so the cost is quadratic in the number of rows.
pub fn self_interaction(region: &RasterRegion, lambda: f64, alpha: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("alpha", alpha)?;
    let k = lambda * alpha;
    let h = region.h;
    let required_h = 1.0 / (4.0 * k);
    if h > required_h {
        return Err(Error::Resolution { h, required_h });
    }
    let (nx, ny) = (region.nx, region.ny);
    let runs = region.runs();
    let h4 = h.powi(4);
    let diag = h * h * square_cell_integral(0.5 * h, k);
    // offset index: d + off, for d ∈ [-(nx + 1), nx]
    let off = nx + 1;
    let len = 2 * nx + 2;

    let per_dj: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|dj| {
            if dj > 0 && !(0..ny - dj).any(|j| !runs[j].is_empty() && !runs[j + dj].is_empty()) {
                return 0.0;
            }
            let mut t = vec![0.0; len];
            for (idx, v) in t.iter_mut().enumerate() {
                let d = idx as i64 - off as i64;
                if d.unsigned_abs() as usize >= nx {
                    continue;
                }
                *v = if d == 0 && dj == 0 {
                    diag
                } else {
                    let r = h * ((d * d) as f64 + (dj * dj) as f64).sqrt();
                    h4 * (-k * r).exp() / r
                };
            }
            // p2[idx] = Σ_{e ≤ idx} Σ_{f ≤ e} t[f]
            let mut p2 = vec![0.0; len];
            let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
            for idx in 0..len {
                s1.add(t[idx]);
                s2.add(s1.value());
                p2[idx] = s2.value();
            }
            let p2_at = |d: i64| -> f64 {
                let idx = d + off as i64;
                if idx < 0 {
                    0.0
                } else {
                    p2[(idx as usize).min(len - 1)]
                }
            };
            let mut acc = CompensatedSum::new();
            for j in 0..ny - dj {
                for &(a1, b1) in &runs[j] {
                    for &(a2, b2) in &runs[j + dj] {
                        let (a1, b1, a2, b2) = (a1 as i64, b1 as i64, a2 as i64, b2 as i64);
                        let v = p2_at(b2 - a1) - p2_at(b2 - b1 - 1) - p2_at(a2 - 1 - a1) + p2_at(a2 - b1 - 2);
                        acc.add(v);
                    }
                }
            }
            let s = acc.value();
            if dj == 0 {
                s
            } else {
                2.0 * s
            }
        })
        .collect();
    Ok(compensated_sum(per_dj))
}

/// Covariogram of the disk of radius `R`: `|B_R ∩ (B_R + z)|` at `|z| = s`.
pub fn disk_covariogram(radius: f64, s: f64) -> f64 {
    if s >= 2.0 * radius {
        return 0.0;
    }
    let r2 = radius * radius;
    2.0 * r2 * (s / (2.0 * radius)).acos() - 0.5 * s * (4.0 * r2 - s * s).sqrt()
}

/// `∫_{B_R}∫_{B_R} e^{-λα|x-y|}/|x-y|` reduced to `2π ∫_0^{2R} e^{-λαs} C(s) ds`.
pub fn disk_covariogram_integral(radius: f64, lambda: f64, alpha: f64) -> Result<f64> {
    ensure_positive("radius", radius)?;
    ensure_positive("lambda", lambda)?;
    ensure_positive("alpha", alpha)?;
    let k = lambda * alpha;
    let est = integrate(
        |s: f64| (-k * s).exp() * disk_covariogram(radius, s),
        0.0,
        2.0 * radius,
        0.0,
        1e-13,
    );
    Ok(2.0 * PI * est.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ClosedCurve;

    fn unit_disk() -> CurveSystem {
        CurveSystem::disk(Vec2::ZERO, 1.0, 128).unwrap()
    }

    #[test]
    fn disk_and_annulus_areas() {
        let r = rasterize(&unit_disk(), 0.01).unwrap();
        assert!((r.area() - PI).abs() < 0.05);
        let (nx, ny) = r.dims();
        // margin: border rows and columns are empty
        assert!((0..nx).all(|i| !r.get(i, 0) && !r.get(i, ny - 1)));
        assert!((0..ny).all(|j| !r.get(0, j) && !r.get(nx - 1, j)));
        let ann = CurveSystem::annulus(2.0, 1.0, Vec2::ZERO, 128, 128).unwrap();
        let ra = rasterize(&ann, 0.01).unwrap();
        assert!((ra.area() - 3.0 * PI).abs() < 0.1);
    }

    #[test]
    fn coarse_spacing_rejected() {
        assert!(rasterize(&unit_disk(), 0.5).is_err());
    }

    #[test]
    fn curve_through_cell_center_is_jittered() {
        // The grid is fixed by the outer curve; thread a small hole through one
        // of its cell centers (the hole's sample at angle π sits on it).
        let h = 0.01;
        let outer = ClosedCurve::circle(Vec2::ZERO, 1.0, 128).unwrap();
        let grid = rasterize(&CurveSystem::single(outer.clone()), h).unwrap();
        let (i, j) = (130, 110);
        let p = grid.center(i, j);
        let hole = ClosedCurve::circle(p + Vec2::new(0.1, 0.0), 0.1, 64).unwrap();
        let sys = CurveSystem::new(vec![outer, hole]).unwrap();
        assert!(matches!(sys.contains(p), Err(Error::Proximity { .. })));
        let r = rasterize(&sys, h).unwrap();
        assert_eq!(r.origin(), grid.origin());
        assert!(r.jittered_cells() >= 1);
        assert!((r.area() - (PI - PI * 0.01)).abs() < 0.05);
    }

    #[test]
    fn single_pair_contribution() {
        let h = 0.01;
        let mut mask = vec![false; 100];
        mask[0] = true;
        let single = RasterRegion::from_mask(Vec2::ZERO, h, 100, 1, mask.clone()).unwrap();
        mask[80] = true;
        let pair = RasterRegion::from_mask(Vec2::ZERO, h, 100, 1, mask).unwrap();
        let (l, a) = (2.0, 1.0);
        let cross = 0.5 * (self_interaction(&pair, l, a).unwrap() - 2.0 * self_interaction(&single, l, a).unwrap());
        let d = 0.8;
        let hand = h.powi(4) * (-l * a * d).exp() / d;
        assert!((cross / hand - 1.0).abs() < 0.01);
    }

    #[test]
    fn under_resolution_reported() {
        let r = rasterize(&unit_disk(), 0.02).unwrap();
        assert!(matches!(self_interaction(&r, 100.0, 1.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn covariogram_endpoints() {
        assert!((disk_covariogram(1.3, 0.0) - PI * 1.69).abs() < 1e-14);
        assert_eq!(disk_covariogram(1.3, 2.6), 0.0);
    }

    #[test]
    fn square_cell_matches_cartesian_oracle() {
        // Small k: kernel ≈ 1/|y|, ∫_{[-a,a]²} 1/|y| = 8a·asinh(1).
        let a = 0.3;
        let v = square_cell_integral(a, 1e-9);
        assert!((v - 8.0 * a * 1f64.asinh()).abs() < 1e-8);
    }

    #[test]
    fn disk_pair_sum_matches_covariogram() {
        let oracle = disk_covariogram_integral(1.0, 2.0, 1.0).unwrap();
        let r = rasterize(&unit_disk(), 0.01).unwrap();
        let s = self_interaction(&r, 2.0, 1.0).unwrap();
        assert!((s / oracle - 1.0).abs() < 1e-2, "{s} vs {oracle}");
    }

    #[test]
    fn translation_gives_identical_sum() {
        let r = rasterize(&unit_disk(), 0.02).unwrap();
        let t = r.translated(Vec2::new(3.7, -1.1));
        assert_eq!(self_interaction(&r, 2.0, 1.0).unwrap(), self_interaction(&t, 2.0, 1.0).unwrap());
    }

    #[test]
    fn pair_sum_equals_naive_double_loop() {
        let ell = CurveSystem::single(ClosedCurve::ellipse(Vec2::new(0.1, 0.0), 0.5, 0.3, 64).unwrap());
        let hole = ClosedCurve::circle(Vec2::new(0.2, 0.0), 0.12, 32).unwrap();
        let sys = CurveSystem::new(vec![ell.curves()[0].clone(), hole]).unwrap();
        let r = rasterize(&sys, 0.02).unwrap();
        let (l, a) = (1.5, 2.0);
        let fast = self_interaction(&r, l, a).unwrap();
        let (nx, ny) = r.dims();
        let cells: Vec<Vec2> = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .filter(|&(i, j)| r.get(i, j))
            .map(|(i, j)| r.center(i, j))
            .collect();
        let h = r.spacing();
        let diag = h * h * square_cell_integral(0.5 * h, l * a);
        let mut naive = CompensatedSum::new();
        for p in &cells {
            for q in &cells {
                let d = (*p - *q).norm();
                naive.add(if d == 0.0 { diag } else { h.powi(4) * (-l * a * d).exp() / d });
            }
        }
        assert!((fast - naive.value()).abs() < 1e-12 * naive.value());
    }

    #[test]
    fn complement_identity_on_small_shape() {
        // Ω×Ω^c by direct summation against outside cells in a box wide enough
        // for the kernel tail, compared with (2π/k)|Ω| - Ω×Ω.
        let (l, a) = (4.0, 2.0);
        let k = l * a;
        let h = 0.02;
        let sys = CurveSystem::disk(Vec2::ZERO, 0.2, 64).unwrap();
        let r = rasterize(&sys, h).unwrap();
        let inside: Vec<Vec2> = {
            let (nx, ny) = r.dims();
            (0..ny)
                .flat_map(|j| (0..nx).map(move |i| (i, j)))
                .filter(|&(i, j)| r.get(i, j))
                .map(|(i, j)| r.center(i, j))
                .collect()
        };
        let reach = 2.5;
        let m = (reach / h) as i64;
        let o = r.center(0, 0);
        let mut direct = CompensatedSum::new();
        for p in &inside {
            for dj in -m..=m {
                for di in -m..=m {
                    let q = *p + Vec2::new(di as f64 * h, dj as f64 * h);
                    let (fi, fj) = (((q.x - o.x) / h).round(), ((q.y - o.y) / h).round());
                    let (nx, ny) = r.dims();
                    let inside_q = fi >= 0.0 && fj >= 0.0 && (fi as usize) < nx && (fj as usize) < ny && r.get(fi as usize, fj as usize);
                    if !inside_q {
                        let d = (q - *p).norm();
                        direct.add(h.powi(4) * (-k * d).exp() / d);
                    }
                }
            }
        }
        let via = 2.0 * PI / k * r.area() - self_interaction(&r, l, a).unwrap();
        // The cell-center rule sums the kernel over the lattice instead of
        // integrating it; that per-cell defect bounds the identity's error.
        let mut lattice = CompensatedSum::new();
        lattice.add(h * h * square_cell_integral(0.5 * h, k));
        for dj in -m..=m {
            for di in -m..=m {
                if di != 0 || dj != 0 {
                    let d = h * ((di * di + dj * dj) as f64).sqrt();
                    lattice.add(h.powi(4) * (-k * d).exp() / d);
                }
            }
        }
        let defect = (lattice.value() - 2.0 * PI / k * h * h).abs() * inside.len() as f64;
        assert!((direct.value() - via).abs() <= defect + 1e-12, "{} vs {via} (bound {defect})", direct.value());
        assert!((direct.value() / via - 1.0).abs() < 5e-2);
    }

    #[test]
    fn halving_spacing_converges_first_order() {
        let oracle = disk_covariogram_integral(1.0, 2.0, 1.0).unwrap();
        let e1 = (self_interaction(&rasterize(&unit_disk(), 0.04).unwrap(), 2.0, 1.0).unwrap() - oracle).abs();
        let e2 = (self_interaction(&rasterize(&unit_disk(), 0.02).unwrap(), 2.0, 1.0).unwrap() - oracle).abs();
        let e3 = (self_interaction(&rasterize(&unit_disk(), 0.01).unwrap(), 2.0, 1.0).unwrap() - oracle).abs();
        for (e, h) in [(e1, 0.04), (e2, 0.02), (e3, 0.01)] {
            assert!(e <= 2.0 * h * oracle, "error {e} at h = {h}");
        }
    }
}
