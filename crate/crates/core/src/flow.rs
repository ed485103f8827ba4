//! Euler-Lagrange residual and an area-preserving explicit gradient flow for
//! `F_{λ,α}` on simply connected shapes.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{ClosedCurve, CurveSystem, RayCaster, PROXIMITY_GUARD};
use crate::energy::{energy_boundary, radial_cutoff, toggled_exponential_mass};
use crate::error::{ensure_positive, Error, Result};
use crate::geom::Vec2;
use crate::quad::{compensated_sum, integrate_with_breaks};
use crate::specfun::ScreeningParams;

const ENERGY_EVERY: usize = 10;

/// `v(x) = (λ²/2π) ∫_Ω e^{-λα|x-y|}/|x-y| dy` by polar quadrature around `x`.
///
/// In polar coordinates the kernel's `1/r` cancels the Jacobian, so each ray
/// contributes `Σ (e^{-ka} - e^{-kb})/k` over its inside intervals. A point
/// within the proximity guard of a curve is treated as lying on it: rays are
/// cast from the nearest boundary point and start inside exactly when they
/// head against the outward normal.
pub fn potential_v(system: &CurveSystem, params: &ScreeningParams, x: Vec2, tol: f64) -> Result<f64> {
    if !(tol > 1e-10 && tol < 1e-2) {
        return Err(Error::Domain { what: "tolerance must lie in (1e-10, 1e-2)", value: tol });
    }
    let k = params.rate();
    let r_max = radial_cutoff(k, tol);
    let oriented = system.oriented();
    let caster = RayCaster::new(&oriented);
    let near = oriented
        .curves()
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.closest_parameter(x), c.length()))
        .find(|(_, (_, d), len)| *d < PROXIMITY_GUARD * len);
    let mut cross = Vec::new();
    let est = match near {
        Some((i, (t, _), _)) => {
            let anchor = caster.anchor(i, t);
            let nu = -anchor.derivative().normalized().perp();
            let theta_nu = nu.y.atan2(nu.x);
            let breaks: Vec<f64> = (1..4).map(|q| q as f64 * PI / 2.0).collect();
            integrate_with_breaks(
                |th: f64| {
                    let c = th.cos();
                    if c == 0.0 {
                        return 0.0;
                    }
                    caster.anchored_crossings(&anchor, Vec2::from_angle(theta_nu + th), r_max, &mut cross);
                    toggled_exponential_mass(&cross, c < 0.0, k)
                },
                0.0,
                2.0 * PI,
                &breaks,
                1e-3 * tol,
                tol,
                8000,
            )
        }
        None => {
            let starts_in = oriented.contains(x)?;
            let breaks: Vec<f64> = (1..8).map(|q| q as f64 * PI / 4.0).collect();
            integrate_with_breaks(
                |th: f64| {
                    caster.crossings(x, Vec2::from_angle(th), r_max, &mut cross);
                    toggled_exponential_mass(&cross, starts_in, k)
                },
                0.0,
                2.0 * PI,
                &breaks,
                1e-3 * tol,
                tol,
                8000,
            )
        }
    };
    if est.error > 100.0 * tol * est.value.abs().max(1.0) {
        return Err(Error::Quadrature(format!("potential quadrature stalled at error {:e}", est.error)));
    }
    Ok(params.lambda().powi(2) / (2.0 * PI * k) * est.value)
}

/// `v` at every sample of every curve of an outward-oriented system.
///
/// Uses `∫_Ω K(|y-x|) dy = ∮ G(|y-x|) (y-x)·ν(y) ds` with
/// `G(r) = (1 - e^{-kr})/(k r²)`, summed by the trapezoid rule on the
/// oversampled grid. At the sample itself the integrand tends to `κ|s|/2`,
/// whose kink costs the trapezoid rule exactly `-Δs² κ/12`; that is added back.
pub(crate) fn boundary_potential(oriented: &CurveSystem, params: &ScreeningParams) -> Vec<Vec<f64>> {
    let k = params.rate();
    let scale = params.lambda().powi(2) / (2.0 * PI);
    let g = |r: f64| -(-k * r).exp_m1() / (k * r * r);
    let curves = oriented.curves();
    curves
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let n = c.len();
            let kappa = c.curvature_profile();
            let speeds = c.speeds();
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let x = c.points()[j];
                    let mut total = 0.0;
                    for (cj, other) in curves.iter().enumerate() {
                        let (pts, d1, _) = other.fine();
                        let m = pts.len();
                        let own = if cj == ci { Some(j * m / n) } else { None };
                        let sum = compensated_sum((0..m).filter(|&i| Some(i) != own).map(|i| {
                            let d = pts[i] - x;
                            let r = d.norm();
                            // (y - x)·ν |γ'| with ν = -τ^⊥ = (d1.y, -d1.x)/|d1|.
                            g(r) * (d.x * d1[i].y - d.y * d1[i].x)
                        }));
                        total += sum / m as f64;
                        if own.is_some() {
                            let ds = speeds[j] / m as f64;
                            total += ds * ds * kappa[j] / 12.0;
                        }
                    }
                    scale * total
                })
                .collect()
        })
        .collect()
}

/// `max |κ + v - μ| / max(1, |μ|)` with `μ` the length-weighted mean of `κ + v`.
pub fn el_residual(system: &CurveSystem, params: &ScreeningParams) -> Result<f64> {
    let oriented = system.oriented();
    let (vals, _) = el_profile(&oriented, params);
    let mu = weighted_mean(&oriented, &vals);
    let worst = vals.iter().flatten().fold(0.0f64, |m, r| m.max((r - mu).abs()));
    Ok(worst / mu.abs().max(1.0))
}

/// `κ + v` at every sample, plus the curvature profile used.
fn el_profile(oriented: &CurveSystem, params: &ScreeningParams) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let v = boundary_potential(oriented, params);
    let kappa: Vec<Vec<f64>> = oriented.curves().iter().map(|c| c.curvature_profile()).collect();
    let vals = kappa
        .iter()
        .zip(&v)
        .map(|(k, v)| k.iter().zip(v).map(|(a, b)| a + b).collect())
        .collect();
    (vals, kappa)
}

fn weighted_mean(oriented: &CurveSystem, vals: &[Vec<f64>]) -> f64 {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (c, v) in oriented.curves().iter().zip(vals) {
        let n = c.len() as f64;
        for (s, r) in c.speeds().iter().zip(v) {
            num.push(r * s / n);
            den.push(s / n);
        }
    }
    compensated_sum(num) / compensated_sum(den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub step: usize,
    pub energy: f64,
    pub area: f64,
    pub residual: f64,
}

impl FlowRecord {
    pub const CSV_HEADER: &'static str = "step,energy,area,residual";

    pub fn csv_row(&self) -> String {
        format!("{},{:.11e},{:.11e},{:.11e}", self.step, self.energy, self.area, self.residual)
    }
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub system: CurveSystem,
    pub step_index: usize,
    pub dt: f64,
    pub energy_history: Vec<f64>,
    pub area_history: Vec<f64>,
    pub trace: Vec<FlowRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub steps: usize,
    pub dt_safety: f64,
    pub tol: f64,
    /// Stop early once the Euler-Lagrange residual falls below this value.
    pub residual_target: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { steps: 1000, dt_safety: 0.1, tol: 1e-9, residual_target: None }
    }
}

/// Runs the flow for `steps` steps with default tolerances.
pub fn flow_run(initial: &CurveSystem, params: &ScreeningParams, steps: usize, dt_safety: f64) -> Result<FlowState> {
    flow_run_with(initial, params, &FlowOptions { steps, dt_safety, ..FlowOptions::default() }, |_, _| {})
}

/// Explicit steps of `∂_t γ = -(κ + v - μ) ν`, each followed by a
/// constant-speed reparametrization and a homothety about the centroid that
/// restores the area to `π`. `observe` sees every recorded trace row together
/// with the shape at that step.
pub fn flow_run_with<F: FnMut(&FlowRecord, &CurveSystem)>(
    initial: &CurveSystem,
    params: &ScreeningParams,
    opts: &FlowOptions,
    mut observe: F,
) -> Result<FlowState> {
    ensure_positive("dt_safety", opts.dt_safety)?;
    if initial.len() != 1 {
        return Err(Error::InvalidInput("the flow handles single-curve systems only".into()));
    }
    let area0 = initial.area();
    if (area0 - PI).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("initial area {area0} differs from π; rescale first")));
    }
    let n = initial.curves()[0].len();
    let mut curve = initial.oriented().curves()[0].resample_constant_speed(n)?;
    let mut state = FlowState {
        system: CurveSystem::single(curve.clone()),
        step_index: 0,
        dt: 0.0,
        energy_history: Vec::new(),
        area_history: Vec::new(),
        trace: Vec::new(),
    };
    for step in 0..=opts.steps {
        let sys = CurveSystem::single(curve.clone());
        let (vals, _) = el_profile(&sys, params);
        let mu = weighted_mean(&sys, &vals);
        let residual = vals[0].iter().fold(0.0f64, |m, r| m.max((r - mu).abs())) / mu.abs().max(1.0);
        let done = opts.residual_target.is_some_and(|t| residual <= t);
        if step % ENERGY_EVERY == 0 || step == opts.steps || done {
            let energy = energy_boundary(&sys, params, opts.tol)?.total;
            let area = curve.signed_area();
            state.energy_history.push(energy);
            state.area_history.push(area);
            let rec = FlowRecord { step, energy, area, residual };
            observe(&rec, &sys);
            state.trace.push(rec);
        }
        state.system = sys;
        state.step_index = step;
        if step == opts.steps || done {
            break;
        }
        let velocity: Vec<f64> = vals[0].iter().map(|r| -(r - mu)).collect();
        let ds = curve.length() / n as f64;
        let vmax = velocity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dt = opts.dt_safety * (ds * ds).min(ds / (1.0 + vmax));
        let normals = curve.outward_normals();
        let moved: Vec<Vec2> = curve
            .points()
            .iter()
            .zip(&normals)
            .zip(&velocity)
            .map(|((p, nu), v)| *p + *nu * (dt * v))
            .collect();
        let next = ClosedCurve::new(moved)?.resample_constant_speed(n)?;
        if next.self_intersects() {
            return Err(Error::Topology { step: step + 1 });
        }
        let a = next.signed_area();
        if !(a > 0.0) {
            return Err(Error::Topology { step: step + 1 });
        }
        curve = next.scaled((PI / a).sqrt(), next.centroid())?;
        state.dt = dt;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{rasterize, RasterRegion};

    fn raster_potential_at_corner(region: &RasterRegion, x: Vec2, params: &ScreeningParams) -> f64 {
        // Midpoint sum over cells; the four cells meeting at the corner `x`
        // are replaced by the exact integral over their 2h square.
        let k = params.rate();
        let h = region.spacing();
        let (nx, ny) = region.dims();
        let mut terms = Vec::new();
        let mut near = 0;
        for j in 0..ny {
            for i in 0..nx {
                if region.get(i, j) {
                    let r = (region.center(i, j) - x).norm();
                    if r > h {
                        terms.push((-k * r).exp() / r * h * h);
                    } else {
                        near += 1;
                    }
                }
            }
        }
        assert_eq!(near, 4, "x must sit on a cell corner");
        terms.push(crate::raster::square_cell_integral(h, k));
        params.lambda().powi(2) / (2.0 * PI) * compensated_sum(terms)
    }

    #[test]
    fn deep_inside_a_huge_disk() {
        let p = ScreeningParams::new(2.0, 1.0).unwrap();
        let big = CurveSystem::disk(Vec2::ZERO, 50.0 / p.rate(), 256).unwrap();
        let v = potential_v(&big, &p, Vec2::new(0.3, -0.2), 1e-8).unwrap();
        assert!((v / (p.lambda() / p.alpha()) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn far_outside_is_negligible() {
        let p = ScreeningParams::new(2.0, 1.0).unwrap();
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        let tol = 1e-8;
        let v = potential_v(&d, &p, Vec2::new(30.0, 0.0), tol).unwrap();
        assert!(v <= tol * p.lambda() / p.alpha());
    }

    #[test]
    fn center_of_unit_disk_matches_raster() {
        let p = ScreeningParams::new(2.0, 1.0).unwrap();
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        let v = potential_v(&d, &p, Vec2::ZERO, 1e-9).unwrap();
        // Closed form at the center: (λ²/2π)·2π(1 - e^{-k})/k.
        let exact = p.lambda().powi(2) * (1.0 - (-p.rate()).exp()) / p.rate();
        assert!((v / exact - 1.0).abs() < 1e-8);
        let region = rasterize(&d, 0.005).unwrap();
        let r = raster_potential_at_corner(&region, Vec2::ZERO, &p);
        assert!((v / r - 1.0).abs() < 1e-3, "{v} vs {r}");
    }

    #[test]
    fn boundary_route_matches_polar_route() {
        let ell = CurveSystem::single(ClosedCurve::ellipse(Vec2::ZERO, 1.3, 0.7, 64).unwrap());
        for &(l, a) in &[(2.0, 1.0), (16.0, 0.4)] {
            let p = ScreeningParams::new(l, a).unwrap();
            let fast = boundary_potential(&ell, &p);
            for &j in &[0usize, 5, 16, 40] {
                let x = ell.curves()[0].points()[j];
                let slow = potential_v(&ell, &p, x, 1e-9).unwrap();
                assert!((fast[0][j] / slow - 1.0).abs() < 1e-6, "λ={l} j={j}: {} vs {slow}", fast[0][j]);
            }
        }
    }

    #[test]
    fn disk_residual_is_flat_and_ellipse_is_not() {
        let p = ScreeningParams::new(4.0, 1.0).unwrap();
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        assert!(el_residual(&d, &p).unwrap() <= 1e-6);
        let ell = CurveSystem::single(ClosedCurve::ellipse(Vec2::ZERO, 2.0, 1.0, 128).unwrap());
        let r = el_residual(&ell, &p).unwrap();
        assert!(r > 0.1, "{r}");
        let moved = el_residual(&ell.translated(Vec2::new(5.0, -3.0)), &p).unwrap();
        assert!((r - moved).abs() < 1e-8);
    }

    #[test]
    fn disk_is_stationary() {
        let p = ScreeningParams::from_sigma(16.0, 1.0).unwrap();
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        let st = flow_run(&d, &p, 20, 0.1).unwrap();
        let c = &st.system.curves()[0];
        let dev = c.points().iter().fold(0.0f64, |m, q| m.max((q.norm() - 1.0).abs()));
        assert!(dev <= 20.0 * 1e-8, "{dev}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ScreeningParams::new(4.0, 1.0).unwrap();
        let small = CurveSystem::disk(Vec2::ZERO, 0.5, 64).unwrap();
        assert!(flow_run(&small, &p, 1, 0.1).is_err());
        let ann = CurveSystem::unit_mass_annulus(1.0, 64, 64).unwrap();
        assert!(flow_run(&ann, &p, 1, 0.1).is_err());
    }

    #[test]
    fn rotated_start_gives_rotated_flow() {
        let p = ScreeningParams::from_sigma(16.0, 1.0).unwrap();
        let ell = CurveSystem::single(ClosedCurve::ellipse(Vec2::ZERO, 1.2, 1.0 / 1.2, 32).unwrap());
        let th = 0.9;
        let a = flow_run(&ell, &p, 50, 0.1).unwrap();
        let b = flow_run(&ell.rotated(th), &p, 50, 0.1).unwrap();
        let pa = a.system.rotated(th);
        let dist = pa.curves()[0]
            .points()
            .iter()
            .map(|q| b.system.distance_to(*q))
            .fold(0.0f64, f64::max);
        assert!(dist <= 1e-6, "{dist}");
    }

    #[test]
    fn trace_rows_format() {
        let r = FlowRecord { step: 10, energy: 1.0, area: PI, residual: 0.1 };
        assert_eq!(r.csv_row().split(',').count(), 4);
    }
}
