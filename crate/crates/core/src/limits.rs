//! The perimeter-plus-elastica limit functional, the disk/annulus phase
//! diagram and finite-λ checks against it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::CurveSystem;
use crate::energy::energy_boundary;
use crate::error::{ensure_positive, Error, Result};
use crate::geom::Vec2;
use crate::quad::{compensated_sum, integrate_with_breaks};
use crate::raster::{rasterize, self_interaction};
use crate::specfun::ScreeningParams;

/// Energy gap below which disk and annulus are reported as a tie.
///
/// Sized for σ given to six significant digits: near σ̄ the gap moves by about
/// 41 per unit σ, so a rounding of 5e-7 in σ shifts it by 2e-5.
pub const DEFAULT_TIE_TOL: f64 = 1e-4;

const NEWTON_SEED: (f64, f64) = (0.1, 3.5);

/// `Σ_i σ L(γ_i) + (π/2) ∫ κ² ds`.
pub fn elastica_energy(system: &CurveSystem, sigma: f64) -> f64 {
    compensated_sum(
        system
            .curves()
            .iter()
            .map(|c| sigma * c.length() + 0.5 * PI * c.bending_integral()),
    )
}

pub fn disk_energy(sigma: f64) -> f64 {
    2.0 * PI * sigma + PI * PI
}

/// Energy of `B_{√(1+r²)} \ B_r`, the unit-mass annulus with inner radius `r`.
pub fn annulus_energy(r: f64, sigma: f64) -> Result<f64> {
    ensure_positive("inner radius", r)?;
    Ok(annulus_unchecked(r, sigma))
}

fn annulus_unchecked(r: f64, sigma: f64) -> f64 {
    let big = (1.0 + r * r).sqrt();
    2.0 * PI * sigma * (big + r) + PI * PI * (1.0 / big + 1.0 / r)
}

/// `∂_r` of the annulus energy.
pub fn annulus_energy_slope(r: f64, sigma: f64) -> f64 {
    let big = (1.0 + r * r).sqrt();
    2.0 * PI * sigma * (r / big + 1.0) - PI * PI * (r / big.powi(3) + 1.0 / (r * r))
}

fn annulus_energy_curvature(r: f64, sigma: f64) -> f64 {
    let big = (1.0 + r * r).sqrt();
    let b3 = big.powi(3);
    2.0 * PI * sigma / b3 - PI * PI * (1.0 / b3 - 3.0 * r * r / big.powi(5) - 2.0 / r.powi(3))
}

/// Global minimizer of [`annulus_energy`] over `r > 0`.
///
/// A log-spaced scan locates the basin, golden section narrows it and a final
/// bisection on the closed-form slope drives the stationarity residual down.
pub fn optimal_annulus(sigma: f64) -> Result<(f64, f64)> {
    ensure_positive("sigma", sigma)?;
    let (lo_exp, hi_exp, n) = (-4.0, 6.0, 4000);
    let grid: Vec<f64> = (0..=n).map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / n as f64)).collect();
    let best = (1..n)
        .min_by(|&i, &j| annulus_unchecked(grid[i], sigma).total_cmp(&annulus_unchecked(grid[j], sigma)))
        .expect("grid is nonempty");
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..60 {
        if annulus_unchecked(c, sigma) < annulus_unchecked(d, sigma) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    // Widen back out to a sign change of the slope, then bisect.
    let (mut lo, mut hi) = (0.5 * (a + b), 0.5 * (a + b));
    while annulus_energy_slope(lo, sigma) > 0.0 {
        lo *= 0.999;
    }
    while annulus_energy_slope(hi, sigma) < 0.0 {
        hi *= 1.001;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if annulus_energy_slope(mid, sigma) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if annulus_energy_slope(lo, sigma).abs() < annulus_energy_slope(hi, sigma).abs() { lo } else { hi };
    Ok((r, annulus_unchecked(r, sigma)))
}

/// Residuals of `(annulus − disk, ∂_r annulus)` at `(σ, r)`.
pub fn critical_residuals(sigma: f64, r: f64) -> (f64, f64) {
    (annulus_unchecked(r, sigma) - disk_energy(sigma), annulus_energy_slope(r, sigma))
}

/// `(σ̄, r̄)`: the σ at which the best annulus and the disk have equal energy.
pub fn critical_sigma() -> Result<(f64, f64)> {
    let (mut s, mut r) = NEWTON_SEED;
    for _ in 0..100 {
        let (f1, f2) = critical_residuals(s, r);
        if f1.abs() <= 1e-13 && f2.abs() <= 1e-13 {
            return Ok((s, r));
        }
        let big = (1.0 + r * r).sqrt();
        let j11 = 2.0 * PI * (big + r) - 2.0 * PI;
        let j12 = f2;
        let j21 = 2.0 * PI * (r / big + 1.0);
        let j22 = annulus_energy_curvature(r, s);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Solver("singular Jacobian in the phase-boundary system".into()));
        }
        let ds = (f1 * j22 - f2 * j12) / det;
        let dr = (j11 * f2 - j21 * f1) / det;
        let norm0 = f1.hypot(f2);
        let mut step = 1.0;
        loop {
            let (ns, nr) = (s - step * ds, r - step * dr);
            if ns > 0.0 && nr > 0.0 {
                let (g1, g2) = critical_residuals(ns, nr);
                if g1.hypot(g2) < norm0 || step < 1e-3 {
                    s = ns;
                    r = nr;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-10 {
                return Err(Error::Solver("damped Newton failed to decrease the residual".into()));
            }
        }
    }
    let (f1, f2) = critical_residuals(s, r);
    if f1.abs() <= 1e-12 && f2.abs() <= 1e-12 {
        Ok((s, r))
    } else {
        Err(Error::Solver(format!("no convergence: residuals {f1:e}, {f2:e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Disk,
    Annulus,
    Tie,
}

impl Winner {
    pub fn as_str(&self) -> &'static str {
        match self {
            Winner::Disk => "disk",
            Winner::Annulus => "annulus",
            Winner::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub sigma: f64,
    pub r_opt: Option<f64>,
    pub disk_energy: f64,
    pub annulus_energy: Option<f64>,
    pub winner: Winner,
}

impl PhaseRow {
    pub const CSV_HEADER: &'static str = "sigma,r_opt,disk_energy,annulus_energy,winner";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.11e}")).unwrap_or_default();
        format!(
            "{:.11e},{},{:.11e},{},{}",
            self.sigma,
            opt(self.r_opt),
            self.disk_energy,
            opt(self.annulus_energy),
            self.winner.as_str()
        )
    }
}

pub fn phase_row(sigma: f64, tie_tol: f64) -> Result<PhaseRow> {
    let (r, ann) = optimal_annulus(sigma)?;
    let disk = disk_energy(sigma);
    let winner = if (disk - ann).abs() <= tie_tol {
        Winner::Tie
    } else if disk < ann {
        Winner::Disk
    } else {
        Winner::Annulus
    };
    Ok(PhaseRow { sigma, r_opt: Some(r), disk_energy: disk, annulus_energy: Some(ann), winner })
}

pub fn phase_diagram(sigmas: &[f64]) -> Result<Vec<PhaseRow>> {
    phase_diagram_with_tol(sigmas, DEFAULT_TIE_TOL)
}

pub fn phase_diagram_with_tol(sigmas: &[f64], tie_tol: f64) -> Result<Vec<PhaseRow>> {
    if !(tie_tol >= 0.0) {
        return Err(Error::Domain { what: "tie tolerance must be nonnegative", value: tie_tol });
    }
    sigmas.par_iter().map(|&s| phase_row(s, tie_tol)).collect()
}

/// Raster estimate of `∫_{Ω_x}∫_{Ω_x} e^{-λα|y-z|}/|y-z|` for the unit-mass
/// annulus with its hole shifted by `offset` along `e₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleScanPoint {
    pub offset: f64,
    pub value: f64,
    pub est_error: f64,
}

impl HoleScanPoint {
    pub const CSV_HEADER: &'static str = "offset,f_value,est_error";

    pub fn csv_row(&self) -> String {
        format!("{:.11e},{:.11e},{:.11e}", self.offset, self.value, self.est_error)
    }
}

/// Self-interaction of `B_{√(1+r²)}(0) \ B_r(offset e₁)` at each offset.
///
/// Values are Richardson-combined from spacings `h` and `2h`; `est_error` is
/// the raw difference. Offsets that are whole multiples of `2h` shift the hole
/// mask by whole cells, so the scan compares exactly translated holes.
pub fn centered_hole_scan(r: f64, lambda: f64, alpha: f64, offsets: &[f64], h: f64) -> Result<Vec<HoleScanPoint>> {
    ensure_positive("inner radius", r)?;
    ensure_positive("spacing", h)?;
    ScreeningParams::new(lambda, alpha)?;
    let outer = (1.0 + r * r).sqrt();
    let room = outer - r;
    let n_outer = ((2.0 * PI * outer / h) as usize / 4).clamp(64, 1024);
    let n_inner = ((2.0 * PI * r / h) as usize / 4).clamp(64, 1024);
    offsets
        .iter()
        .map(|&off| {
            if !(0.0..=room).contains(&off) {
                return Err(Error::Domain { what: "hole offset must lie in [0, √(1+r²) - r]", value: off });
            }
            // The tangent hole touches the outer circle; pull it in by a hair so
            // the system stays a pair of disjoint curves.
            let shift = off.min(room - 1e-9 * outer);
            let sys = CurveSystem::annulus(outer, r, Vec2::new(shift, 0.0), n_outer, n_inner)?;
            let fine = self_interaction(&rasterize(&sys, h)?, lambda, alpha)?;
            let coarse = self_interaction(&rasterize(&sys, 2.0 * h)?, lambda, alpha)?;
            Ok(HoleScanPoint { offset: off, value: 2.0 * fine - coarse, est_error: (fine - coarse).abs() })
        })
        .collect()
}

/// Area of `B_a(0) ∩ B_b(d e₁)`.
pub fn lens_area(a: f64, b: f64, d: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    if d >= a + b {
        return 0.0;
    }
    if d <= a - b {
        return PI * b * b;
    }
    let ca = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
    let cb = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
    let tri = 0.5 * ((-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b)).max(0.0).sqrt();
    a * a * ca.acos() + b * b * cb.acos() - tri
}

/// `∫_{B_a}∫_{B_b} e^{-k|y-z|}/|y-z|` for concentric disks, by the radial
/// reduction `2π ∫ e^{-ks} |B_a ∩ (B_b + s e₁)| ds`.
pub fn concentric_disk_interaction(a: f64, b: f64, k: f64) -> f64 {
    let lo = (a - b).abs();
    let est = integrate_with_breaks(
        |s: f64| 2.0 * PI * (-k * s).exp() * lens_area(a, b, s),
        0.0,
        a + b,
        &[lo],
        0.0,
        1e-13,
        4000,
    );
    est.value
}

/// Self-interaction of the concentric unit-mass annulus with inner radius `r`.
pub fn concentric_annulus_interaction(r: f64, lambda: f64, alpha: f64) -> Result<f64> {
    ensure_positive("inner radius", r)?;
    let k = ScreeningParams::new(lambda, alpha)?.rate();
    let outer = (1.0 + r * r).sqrt();
    Ok(concentric_disk_interaction(outer, outer, k) - 2.0 * concentric_disk_interaction(outer, r, k)
        + concentric_disk_interaction(r, r, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub lambda: f64,
    pub scaled_energy: f64,
    pub limit_value: f64,
    pub rel_err: f64,
}

impl CriticalRow {
    pub const CSV_HEADER: &'static str = "lambda,scaled_energy,limit_value,rel_err";

    pub fn csv_row(&self) -> String {
        format!("{:.11e},{:.11e},{:.11e},{:.11e}", self.lambda, self.scaled_energy, self.limit_value, self.rel_err)
    }
}

/// `λ² F_{λ,α(λ,σ)}` along a sequence of `λ`, compared with the elastica value.
pub fn critical_limit_check(system: &CurveSystem, sigma: f64, lambdas: &[f64], tol: f64) -> Result<Vec<CriticalRow>> {
    ensure_positive("sigma", sigma)?;
    let limit_value = elastica_energy(system, sigma);
    lambdas
        .iter()
        .map(|&lambda| {
            let params = ScreeningParams::from_sigma(lambda, sigma)?;
            let scaled_energy = lambda * lambda * energy_boundary(system, &params, tol)?.total;
            Ok(CriticalRow { lambda, scaled_energy, limit_value, rel_err: scaled_energy / limit_value - 1.0 })
        })
        .collect()
}

/// Value at `x = 0` of the polynomial through `(x_i, y_i)` (Neville's scheme).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidInput("extrapolation needs matching, nonempty samples".into()));
    }
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            if xi == xj {
                return Err(Error::InvalidInput("repeated abscissa in extrapolation".into()));
            }
            p[i] = (xi * p[i + 1] - xj * p[i]) / (xi - xj);
        }
    }
    Ok(p[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub lambda: f64,
    pub total: f64,
    pub scaled_excess: f64,
    pub extrapolated: f64,
    pub target: f64,
}

impl ExpansionRow {
    pub const CSV_HEADER: &'static str = "lambda,total,scaled_excess,extrapolated,target";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            self.lambda, self.total, self.scaled_excess, self.extrapolated, self.target
        )
    }
}

/// `λ² (F_{λ,α} - (1 - 1/(2πα²)) P)` along `lambdas`, each row extrapolated in
/// `λ^{-2}` through every row so far, against `∫κ² ds / (8πα⁴)`.
pub fn expansion_check(system: &CurveSystem, alpha: f64, lambdas: &[f64], tol: f64) -> Result<Vec<ExpansionRow>> {
    ensure_positive("alpha", alpha)?;
    let target = system.bending_integral() / (8.0 * PI * alpha.powi(4));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let params = ScreeningParams::new(lambda, alpha)?;
        let rep = energy_boundary(system, &params, tol)?;
        let scaled_excess = lambda * lambda * (rep.total - params.perimeter_coefficient() * system.perimeter());
        xs.push(lambda.powi(-2));
        ys.push(scaled_excess);
        let extrapolated = extrapolate_to_zero(&xs, &ys)?;
        rows.push(ExpansionRow { lambda, total: rep.total, scaled_excess, extrapolated, target });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::disk_covariogram_integral;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn elastica_of_disk_and_annulus() {
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        assert!((elastica_energy(&d, 1.0) - (2.0 * PI + PI * PI)).abs() < 1e-8);
        assert!((elastica_energy(&d, 0.3) - disk_energy(0.3)).abs() < 1e-8);
        let a = CurveSystem::unit_mass_annulus(4.0, 128, 128).unwrap();
        let want = PI * PI * (1.0 / 17f64.sqrt() + 0.25);
        assert!((elastica_energy(&a, 0.0) - want).abs() < 1e-8);
        assert!((elastica_energy(&a, 0.05) - annulus_energy(4.0, 0.05).unwrap()).abs() < 1e-8);
        let d2 = d.scaled(2.0, Vec2::ZERO).unwrap();
        assert!((elastica_energy(&d2, 0.0) - 0.5 * elastica_energy(&d, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn annulus_energy_blows_up_at_both_ends() {
        assert!(annulus_energy(1e-6, 0.1).unwrap() > 1e6);
        assert!(annulus_energy(1e6, 0.1).unwrap() > 1e5);
        assert!(annulus_energy(0.0, 0.1).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        for &(r, s) in &[(0.5, 0.1), (3.0, 0.05), (10.0, 0.3)] {
            let h = 1e-5 * r;
            let fd = (annulus_unchecked(r + h, s) - annulus_unchecked(r - h, s)) / (2.0 * h);
            assert!((fd - annulus_energy_slope(r, s)).abs() < 1e-6 * fd.abs().max(1.0));
            let fd2 = (annulus_energy_slope(r + h, s) - annulus_energy_slope(r - h, s)) / (2.0 * h);
            assert!((fd2 - annulus_energy_curvature(r, s)).abs() < 1e-5 * fd2.abs().max(1.0));
        }
    }

    #[test]
    fn optimal_annulus_matches_grid_scan() {
        let (r, e) = optimal_annulus(0.05).unwrap();
        let mut best = (0.0, f64::INFINITY);
        let mut x = 0.1;
        while x <= 50.0 {
            let v = annulus_unchecked(x, 0.05);
            if v < best.1 {
                best = (x, v);
            }
            x += 1e-4;
        }
        assert!((r - best.0).abs() < 1e-4, "{r} vs {}", best.0);
        assert!(e <= best.1 + 1e-12);
        assert!(annulus_energy_slope(r, 0.05).abs() <= 1e-8);
        let big = (1.0 + r * r).sqrt();
        let lhs = 2.0 * PI * 0.05 * (r / big + 1.0);
        let rhs = PI * PI * (r / big.powi(3) + 1.0 / (r * r));
        assert!((lhs - rhs).abs() <= 1e-8);
    }

    #[test]
    fn optimal_annulus_is_global() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &s in &[0.01, 0.08, 0.112736, 0.3, 2.0] {
            let (_, e) = optimal_annulus(s).unwrap();
            for _ in 0..100 {
                let r = 10f64.powf(rng.gen_range(-3.0..3.0));
                assert!(e <= annulus_unchecked(r, s) + 1e-12);
            }
        }
    }

    #[test]
    fn critical_point() {
        let (s, r) = critical_sigma().unwrap();
        assert!((s - 0.112736).abs() < 1e-4, "{s}");
        assert!((r - 3.66882).abs() < 1e-3, "{r}");
        let (f1, f2) = critical_residuals(s, r);
        assert!(f1.abs() <= 1e-10 && f2.abs() <= 1e-10);
        let (r2, e2) = optimal_annulus(s).unwrap();
        assert!((r2 - r).abs() < 1e-6);
        assert!((e2 - disk_energy(s)).abs() < 1e-9);
        assert_eq!(phase_row(s + 0.01, 1e-9).unwrap().winner, Winner::Disk);
        assert_eq!(phase_row(s - 0.01, 1e-9).unwrap().winner, Winner::Annulus);
        assert_eq!(phase_row(s, 1e-9).unwrap().winner, Winner::Tie);
    }

    #[test]
    fn phase_sweep() {
        let rows = phase_diagram(&[0.05, 0.112736, 0.2]).unwrap();
        let w: Vec<Winner> = rows.iter().map(|r| r.winner).collect();
        assert_eq!(w, vec![Winner::Annulus, Winner::Tie, Winner::Disk]);
        assert_eq!(phase_diagram(&[1.0]).unwrap()[0].winner, Winner::Disk);
        let grid: Vec<f64> = (1..200).map(|i| i as f64 * 0.002).collect();
        let gaps: Vec<f64> = phase_diagram(&grid)
            .unwrap()
            .iter()
            .map(|r| r.disk_energy - r.annulus_energy.unwrap())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(rows[0].csv_row().split(',').count(), 5);
    }

    #[test]
    fn lens_area_limits() {
        assert!((lens_area(2.0, 1.0, 0.5) - PI).abs() < 1e-15);
        assert_eq!(lens_area(2.0, 1.0, 3.0), 0.0);
        let c = |s: f64| 2.0 * (s / 2.0).acos() - (s / 2.0) * (4.0 - s * s).sqrt();
        for &s in &[0.1, 0.9, 1.7] {
            assert!((lens_area(1.0, 1.0, s) - c(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn concentric_reduction_matches_covariogram() {
        let k = 2.0;
        let a = concentric_disk_interaction(1.3, 1.3, k);
        let b = disk_covariogram_integral(1.3, 2.0, 1.0).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn centered_scan_start_matches_radial_oracle() {
        let pts = centered_hole_scan(1.0, 2.0, 1.0, &[0.0], 0.01).unwrap();
        let oracle = concentric_annulus_interaction(1.0, 2.0, 1.0).unwrap();
        assert!((pts[0].value / oracle - 1.0).abs() < 1e-2, "{} vs {oracle}", pts[0].value);
        assert!(centered_hole_scan(1.0, 2.0, 1.0, &[0.5], 0.01).is_err());
        let room = 2f64.sqrt() - 1.0;
        let scan = centered_hole_scan(1.0, 2.0, 1.0, &[0.0, 0.2, room], 0.01).unwrap();
        assert!(scan[2].value > scan[1].value && scan[1].value > scan[0].value);
    }

    #[test]
    fn annulus_bending_decays_like_inverse_radius() {
        let rs: Vec<f64> = (0..10).map(|i| 10f64 * 10f64.powf(i as f64 / 9.0)).collect();
        let pts: Vec<(f64, f64)> = rs
            .iter()
            .map(|&r| {
                let sys = CurveSystem::unit_mass_annulus(r, 64, 64).unwrap();
                (r.ln(), sys.bending_integral().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn critical_check_on_disk() {
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        let rows = critical_limit_check(&d, 1.0, &[32.0], 1e-9).unwrap();
        assert!(rows[0].rel_err.abs() < 0.02);
        assert!(critical_limit_check(&d, 1.0, &[0.5], 1e-9).is_err());
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let xs = [0.3, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - x + 3.0 * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys).unwrap() - 2.0).abs() < 1e-13);
        assert!(extrapolate_to_zero(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn disk_expansion_coefficient() {
        let d = CurveSystem::disk(Vec2::ZERO, 1.0, 64).unwrap();
        let rows = expansion_check(&d, 1.0, &[8.0, 16.0], 1e-9).unwrap();
        assert!((rows[0].target - 0.25).abs() < 1e-10);
        assert!((rows[1].extrapolated / 0.25 - 1.0).abs() < 0.02, "{:?}", rows);
    }
}
