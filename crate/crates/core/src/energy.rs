//! The rescaled energy `F_{λ,α}` by brute-force bulk summation and through its
//! two boundary representations.
//!
//! The boundary routes never test membership point by point. Along a ray that
//! leaves a boundary point `y`, the symmetric difference between the tangent
//! half-plane and `Ω` starts empty and toggles at every crossing of `∂Ω`, so the
//! radial integral of `e^{-λα r}` is a sum of exact exponential differences
//! over the crossing distances. Only the angular integral is done numerically,
//! adaptively, with break points at the tangent and normal directions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{Anchor, CurveSystem, RayCaster};
use crate::error::{ensure_positive, Error, Result};
use crate::geom::Vec2;
use crate::quad::{compensated_sum, integrate_with_breaks, Estimate};
use crate::raster::{rasterize, self_interaction};
use crate::specfun::ScreeningParams;

pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bulk,
    BoundaryIsotropic,
    BoundaryAnisotropic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bulk => "bulk",
            Method::BoundaryIsotropic => "boundary_isotropic",
            Method::BoundaryAnisotropic => "boundary_anisotropic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub perimeter_term: f64,
    pub nonlocal_term: f64,
    pub total: f64,
    pub method: Method,
    pub est_error: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "lambda,alpha,method,perimeter_term,nonlocal_term,total,est_error";

    pub fn csv_row(&self, params: &ScreeningParams) -> String {
        format!(
            "{:.11e},{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e}",
            params.lambda(),
            params.alpha(),
            self.method.as_str(),
            self.perimeter_term,
            self.nonlocal_term,
            self.total,
            self.est_error
        )
    }
}

/// `R_ν` (rotation taking `ν` to `e₂`) followed by `A_λ = diag(λ, λ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicFrame {
    nu: Vec2,
    lambda: f64,
}

impl AnisotropicFrame {
    pub fn new(nu: Vec2, lambda: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        if !((nu.norm() - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidInput(format!("normal {nu:?} is not a unit vector")));
        }
        Ok(AnisotropicFrame { nu, lambda })
    }

    /// Rows of `R_ν = e₂⊗ν - e₁⊗ν^⊥`.
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        let p = self.nu.perp();
        [[-p.x, -p.y], [self.nu.x, self.nu.y]]
    }

    pub fn rotate(&self, x: Vec2) -> Vec2 {
        Vec2::new(-self.nu.perp().dot(x), self.nu.dot(x))
    }

    pub fn dilation(&self) -> [f64; 2] {
        [self.lambda, self.lambda * self.lambda]
    }

    pub fn det_dilation(&self) -> f64 {
        self.lambda.powi(3)
    }

    /// `A_λ R_ν x`.
    pub fn apply(&self, x: Vec2) -> Vec2 {
        let r = self.rotate(x);
        Vec2::new(self.lambda * r.x, self.lambda * self.lambda * r.y)
    }

    /// `(A_λ R_ν)^{-1} w`.
    pub fn inverse(&self, w: Vec2) -> Vec2 {
        let a = Vec2::new(w.x / self.lambda, w.y / (self.lambda * self.lambda));
        self.nu * a.y - self.nu.perp() * a.x
    }
}

/// A point on curve `curve` of a system at parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub curve: usize,
    pub t: f64,
}

/// `Σ (e^{-k a} - e^{-k b})` over the intervals `[a, b]` on which a ray lies in
/// the toggled set, given the sorted crossing distances; `starts_in` is the
/// state just after the origin. Intervals open at `r_max` extend to infinity.
pub(crate) fn toggled_exponential_mass(cross: &[f64], starts_in: bool, k: f64) -> f64 {
    let mut sum = 0.0;
    let mut inside = starts_in;
    let mut last = 0.0;
    for &r in cross {
        if inside {
            sum += (-k * last).exp() - (-k * r).exp();
        }
        inside = !inside;
        last = r;
    }
    if inside {
        sum += (-k * last).exp();
    }
    sum
}

/// Radius beyond which `e^{-kr}` is below `tol·e^{-2}`.
pub(crate) fn radial_cutoff(k: f64, tol: f64) -> f64 {
    ((1.0 / tol).ln() + 2.0) / k
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 1e-10 && tol < 1e-2 {
        Ok(())
    } else {
        Err(Error::Domain { what: "tolerance must lie in (1e-10, 1e-2)", value: tol })
    }
}

/// Outward normal of the (oriented) system at an anchor.
fn anchor_normal(anchor: &Anchor) -> Vec2 {
    -anchor.derivative().normalized().perp()
}

fn inner_isotropic(caster: &RayCaster, anchor: &Anchor, nu: Vec2, params: &ScreeningParams, tol: f64) -> Estimate {
    let k = params.rate();
    let alpha = params.alpha();
    let r_max = radial_cutoff(k, tol);
    let theta_nu = nu.y.atan2(nu.x);
    let breaks: Vec<f64> = (1..4).map(|q| q as f64 * PI / 2.0).collect();
    let mut cross = Vec::new();
    // θ is measured from ν, so the tangent directions sit at ±π/2.
    integrate_with_breaks(
        |th: f64| {
            let d = Vec2::from_angle(theta_nu + th);
            let c = th.cos();
            if c == 0.0 {
                return 0.0;
            }
            caster.anchored_crossings(anchor, d, r_max, &mut cross);
            c.abs() * toggled_exponential_mass(&cross, false, k) / alpha
        },
        0.0,
        2.0 * PI,
        &breaks,
        1e-3 * tol / alpha,
        tol,
        MAX_PANELS,
    )
}

fn inner_anisotropic(caster: &RayCaster, anchor: &Anchor, nu: Vec2, params: &ScreeningParams, tol: f64) -> Estimate {
    let lambda = params.lambda();
    let k = params.rate();
    let alpha = params.alpha();
    let r_max = radial_cutoff(k, tol);
    let frame = AnisotropicFrame { nu, lambda };
    let breaks: Vec<f64> = (1..4).map(|q| q as f64 * PI / 2.0).collect();
    let mut cross = Vec::new();
    let lam2 = lambda * lambda;
    integrate_with_breaks(
        |th: f64| {
            let (s, c) = th.sin_cos();
            if s == 0.0 {
                return 0.0;
            }
            let q2 = c * c + s * s / lam2;
            let q = q2.sqrt();
            // Preimage of the ray z = ρ(cos θ, sin θ); its x-space speed is q/λ.
            let d = frame.inverse(Vec2::new(c, s)).normalized();
            caster.anchored_crossings(anchor, d, r_max, &mut cross);
            s.abs() / (lam2 * alpha * q2 * q) * toggled_exponential_mass(&cross, false, k)
        },
        0.0,
        2.0 * PI,
        &breaks,
        1e-3 * tol / alpha,
        tol,
        MAX_PANELS,
    )
}

/// `∫_{H⁰_-(ν) Δ λ(Ω - y)} |ν·z/|z|| e^{-α|z|}/|z| dz` at a boundary point.
pub fn boundary_inner_integral(
    system: &CurveSystem,
    point: BoundaryPoint,
    params: &ScreeningParams,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    let oriented = validated_oriented(system, point)?;
    let caster = RayCaster::new(&oriented);
    let anchor = caster.anchor(point.curve, point.t);
    let est = inner_isotropic(&caster, &anchor, anchor_normal(&anchor), params, tol);
    accept(est, tol)
}

/// The same integral in the anisotropic blow-up `A_λ R_ν (Ω - y)`.
pub fn boundary_inner_anisotropic(
    system: &CurveSystem,
    point: BoundaryPoint,
    params: &ScreeningParams,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    let oriented = validated_oriented(system, point)?;
    let caster = RayCaster::new(&oriented);
    let anchor = caster.anchor(point.curve, point.t);
    let est = inner_anisotropic(&caster, &anchor, anchor_normal(&anchor), params, tol);
    accept(est, tol)
}

fn validated_oriented(system: &CurveSystem, point: BoundaryPoint) -> Result<CurveSystem> {
    if point.curve >= system.len() {
        return Err(Error::InvalidInput(format!("no curve with index {}", point.curve)));
    }
    Ok(system.oriented())
}

fn accept(est: Estimate, tol: f64) -> Result<f64> {
    if est.error <= 100.0 * tol.max(tol * est.value.abs()) {
        Ok(est.value)
    } else {
        Err(Error::Quadrature(format!("angular quadrature stalled at error {:e}", est.error)))
    }
}

/// Values and error estimates of the inner integral at every sample of every curve.
pub(crate) fn inner_profile(
    system: &CurveSystem,
    params: &ScreeningParams,
    tol: f64,
    anisotropic: bool,
) -> Vec<Vec<Estimate>> {
    let caster = RayCaster::new(system);
    system
        .curves()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = c.len();
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let anchor = caster.anchor(i, j as f64 / n as f64);
                    let nu = anchor_normal(&anchor);
                    if anisotropic {
                        inner_anisotropic(&caster, &anchor, nu, params, tol)
                    } else {
                        inner_isotropic(&caster, &anchor, nu, params, tol)
                    }
                })
                .collect()
        })
        .collect()
}

/// `F_{λ,α}` from the boundary representation, isotropic blow-up.
pub fn energy_boundary(system: &CurveSystem, params: &ScreeningParams, tol: f64) -> Result<EnergyReport> {
    energy_boundary_with(system, params, tol, false)
}

/// `F_{λ,α}` from the boundary representation in the anisotropic frame.
pub fn energy_boundary_anisotropic(system: &CurveSystem, params: &ScreeningParams, tol: f64) -> Result<EnergyReport> {
    energy_boundary_with(system, params, tol, true)
}

fn energy_boundary_with(
    system: &CurveSystem,
    params: &ScreeningParams,
    tol: f64,
    anisotropic: bool,
) -> Result<EnergyReport> {
    check_tol(tol)?;
    let oriented = system.oriented();
    let profile = inner_profile(&oriented, params, tol, anisotropic);
    let mut parts = Vec::new();
    let mut errs = Vec::new();
    let mut coarse = Vec::new();
    for (c, vals) in oriented.curves().iter().zip(&profile) {
        let n = c.len() as f64;
        let speeds = c.speeds();
        let terms: Vec<f64> = vals.iter().zip(&speeds).map(|(e, s)| e.value * s / n).collect();
        parts.push(compensated_sum(terms.iter().copied()));
        errs.push(compensated_sum(vals.iter().zip(&speeds).map(|(e, s)| e.error * s / n)));
        // Trapezoid on every other sample, for a (pessimistic) outer error estimate.
        coarse.push(2.0 * compensated_sum(terms.iter().step_by(2).copied()));
        if let Some(bad) = vals.iter().find(|e| !(e.error <= 100.0 * tol.max(tol * e.value.abs()))) {
            return Err(Error::Quadrature(format!("angular quadrature stalled at error {:e}", bad.error)));
        }
    }
    let scale = 1.0 / (4.0 * PI * params.alpha());
    let outer = compensated_sum(parts.iter().copied());
    let outer_coarse = compensated_sum(coarse.iter().copied());
    let nonlocal_term = scale * outer;
    let perimeter_term = params.perimeter_coefficient() * system.perimeter();
    let est_error = scale * (compensated_sum(errs) + (outer - outer_coarse).abs());
    Ok(EnergyReport {
        perimeter_term,
        nonlocal_term,
        total: perimeter_term + nonlocal_term,
        method: if anisotropic { Method::BoundaryAnisotropic } else { Method::BoundaryIsotropic },
        est_error,
    })
}

fn bulk_at(system: &CurveSystem, params: &ScreeningParams, h: f64) -> Result<f64> {
    let region = rasterize(system, h)?;
    let s = self_interaction(&region, params.lambda(), params.alpha())?;
    let cross = 2.0 * PI / params.rate() * region.area() - s;
    Ok(-params.lambda().powi(2) / (4.0 * PI) * cross)
}

/// `F_{λ,α} = P - (λ²/4π) ∫_Ω∫_{Ω^c}` by raster pair summation.
///
/// The raster error is first order in `h` with a consistent sign (the staircase
/// boundary inflates the cross interaction), so the sums at `h` and `2h` are
/// combined by Richardson extrapolation and `|F_h - F_{2h}|`, which bounds the
/// error of the unextrapolated value, is reported as the error estimate.
pub fn energy_bulk(system: &CurveSystem, params: &ScreeningParams, h: f64) -> Result<EnergyReport> {
    let fine = bulk_at(system, params, h)?;
    let coarse = bulk_at(system, params, 2.0 * h)?;
    let perimeter_term = system.perimeter();
    let nonlocal_term = 2.0 * fine - coarse;
    Ok(EnergyReport {
        perimeter_term,
        nonlocal_term,
        total: perimeter_term + nonlocal_term,
        method: Method::Bulk,
        est_error: (fine - coarse).abs(),
    })
}

/// `∫_{H_-} ν·(x - y)/|x - y| |Φ'_{λα}(|x - y|)| dx` evaluated in polar coordinates.
pub fn halfplane_constant(lambda: f64, alpha: f64) -> Result<f64> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("alpha", alpha)?;
    let k = lambda * alpha;
    // Radial factor ∫_0^∞ r |Φ'_k(r)| dr on r = u/(1-u).
    let radial = integrate_with_breaks(
        |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let r = u / (1.0 - u);
            let dphi = (-k * r).exp() / (k * r.max(f64::MIN_POSITIVE));
            r * dphi / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
        &[1.0 / (1.0 + k)],
        0.0,
        1e-14,
        2000,
    );
    // Half-plane ν·(x - y) < 0 with ν = e₁: θ ∈ (π/2, 3π/2).
    let angular = integrate_with_breaks(|th: f64| th.cos(), 0.5 * PI, 1.5 * PI, &[], 0.0, 1e-14, 100);
    Ok(angular.value * radial.value)
}
