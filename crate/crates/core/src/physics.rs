//! Electrostatics of a charged monolayer on an electrolyte: the exact
//! interface kernel, its Yukawa approximation and the nondimensionalization
//! that leads to the screened energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::quad::integrate;

/// Physical parameters in any consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonolayerParams {
    pub q: f64,
    pub rho: f64,
    pub eps0: f64,
    pub eps_d: f64,
    pub kappa_d: f64,
    pub gamma_line: f64,
}

impl MonolayerParams {
    pub const WATER_EPS: f64 = 80.0;

    /// `kappa_d = 0` (no electrolyte) is accepted so that it can be reported by
    /// [`nondimensionalize`]; the kernels need `kappa_d > 0`.
    pub fn new(q: f64, rho: f64, eps0: f64, eps_d: f64, kappa_d: f64, gamma_line: f64) -> Result<Self> {
        ensure_positive("q", q)?;
        ensure_positive("rho", rho)?;
        ensure_positive("eps0", eps0)?;
        ensure_positive("gamma_line", gamma_line)?;
        if !(eps_d >= 1.0 && eps_d.is_finite()) {
            return Err(Error::Domain { what: "eps_d must be at least 1", value: eps_d });
        }
        if !(kappa_d >= 0.0 && kappa_d.is_finite()) {
            return Err(Error::Domain { what: "kappa_d must be nonnegative", value: kappa_d });
        }
        Ok(MonolayerParams { q, rho, eps0, eps_d, kappa_d, gamma_line })
    }

    /// Unit charge density, permittivity and line tension with the given
    /// dielectric constant and screening parameter.
    pub fn reduced(eps_d: f64, kappa_d: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, eps_d, kappa_d, 1.0)
    }

    fn prefactor(&self) -> f64 {
        self.q * self.rho / (2.0 * PI * self.eps0)
    }

    fn screened(&self) -> Result<f64> {
        ensure_positive("kappa_d", self.kappa_d)?;
        Ok(self.kappa_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondimensional {
    pub length_scale: f64,
    pub alpha: f64,
}

impl Nondimensional {
    /// With no screening the energy layer has no admissible `α`.
    pub fn is_unscreened(&self) -> bool {
        self.alpha == 0.0
    }
}

/// `ℓ = √(ε₀ ε_d γ)/(qρ)` and `α = κ_D ℓ`.
pub fn nondimensionalize(p: &MonolayerParams) -> Nondimensional {
    let length_scale = (p.eps0 * p.eps_d * p.gamma_line).sqrt() / (p.q * p.rho);
    Nondimensional { length_scale, alpha: p.kappa_d * length_scale }
}

/// `(qρ/(2πε₀ε_d)) e^{-κr}/r`.
pub fn yukawa_interface_kernel(r: f64, p: &MonolayerParams) -> Result<f64> {
    ensure_positive("r", r)?;
    let kappa = p.screened()?;
    Ok(p.prefactor() / p.eps_d * (-kappa * r).exp() / r)
}

/// `(qρ/(2πε₀)) ∫_0^∞ k J₀(kr) / (ε_d √(κ² + k²) + k) dk`.
///
/// The part `e^{-κr}/((ε_d + 1) r)`, whose transform carries the slowly decaying
/// large-`k` behaviour, is split off in closed form. The remainder decays like
/// `k^{-5/2}` and is summed panel by panel between zeros of `J₀(kr)`, with the
/// alternating tail accelerated by repeated averaging of partial sums.
pub fn exact_interface_kernel(r: f64, p: &MonolayerParams) -> Result<f64> {
    exact_interface_kernel_panels(r, p, 1)
}

/// As [`exact_interface_kernel`], with the number of accelerated tail panels
/// multiplied by `panel_factor` (used to check self-consistency).
pub fn exact_interface_kernel_panels(r: f64, p: &MonolayerParams, panel_factor: usize) -> Result<f64> {
    ensure_positive("r", r)?;
    let kappa = p.screened()?;
    let eps = p.eps_d;
    let remainder = move |k: f64| {
        let s = kappa.hypot(k);
        // 1/(εs + k) - 1/((ε+1)s), rearranged to avoid cancellation.
        let d = kappa * kappa / ((s + k) * (eps * s + k) * (eps + 1.0) * s);
        k * libm::j0(k * r) * d
    };
    let tail = hankel_alternating(remainder, r, kappa, 40 * panel_factor.max(1))?;
    Ok(p.prefactor() * ((-kappa * r).exp() / ((eps + 1.0) * r) + tail))
}

/// `m`-th positive zero of `J₀`, McMahon's expansion polished by Newton.
pub fn bessel_j0_zero(m: usize) -> f64 {
    let beta = (m as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut x = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120928.0 / (15.0 * b8.powi(5));
    for _ in 0..6 {
        let dx = libm::j0(x) / libm::j1(x);
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

fn hankel_alternating<F: Fn(f64) -> f64>(f: F, r: f64, kappa: f64, tail_panels: usize) -> Result<f64> {
    // Integrate directly until the integrand's own scale (κ) is passed, then
    // treat the remaining panels as an alternating series.
    let panel = |a: f64, b: f64| integrate(&f, a, b, 0.0, 1e-13);
    let mut head = Vec::new();
    let mut a = 0.0;
    let mut m = 1;
    loop {
        let b = bessel_j0_zero(m) / r;
        let est = panel(a, b);
        head.push(est.value);
        a = b;
        m += 1;
        if (b >= 20.0 * kappa && m > 10) || m > 200_000 {
            break;
        }
    }
    let mut partial = Vec::with_capacity(tail_panels);
    let mut sum = crate::quad::compensated_sum(head.iter().copied());
    for _ in 0..tail_panels {
        let b = bessel_j0_zero(m) / r;
        sum += panel(a, b).value;
        partial.push(sum);
        a = b;
        m += 1;
    }
    // Repeated averaging (Euler transform of the alternating tail).
    let mut level = partial;
    while level.len() > 1 {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let value = level[0];
    if !value.is_finite() {
        return Err(Error::Quadrature("Hankel panel sum is not finite".into()));
    }
    Ok(value)
}

/// Least-squares slope of `log(exact kernel)` against `log r` on a log grid.
pub fn farfield_slope(p: &MonolayerParams, r_range: (f64, f64)) -> Result<f64> {
    log_slope(|r| exact_interface_kernel(r, p), r_range)
}

/// The same fit for the Yukawa approximation.
pub fn yukawa_slope(p: &MonolayerParams, r_range: (f64, f64)) -> Result<f64> {
    log_slope(|r| yukawa_interface_kernel(r, p), r_range)
}

fn log_slope<F: Fn(f64) -> Result<f64>>(f: F, (lo, hi): (f64, f64)) -> Result<f64> {
    ensure_positive("r_min", lo)?;
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("empty radius range [{lo}, {hi}]")));
    }
    let n = 16;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let r = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let v = f(r)?;
        if !(v > 0.0) {
            return Err(Error::Quadrature(format!("kernel value {v} at r = {r} is not positive")));
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub r: f64,
    pub exact: f64,
    pub yukawa: f64,
    pub rel_err: f64,
}

impl KernelRow {
    pub const CSV_HEADER: &'static str = "r,exact,yukawa,rel_err";

    pub fn csv_row(&self) -> String {
        format!("{:.11e},{:.11e},{:.11e},{:.11e}", self.r, self.exact, self.yukawa, self.rel_err)
    }
}

pub fn kernel_comparison(p: &MonolayerParams, radii: &[f64]) -> Result<Vec<KernelRow>> {
    radii
        .iter()
        .map(|&r| {
            let exact = exact_interface_kernel(r, p)?;
            let yukawa = yukawa_interface_kernel(r, p)?;
            Ok(KernelRow { r, exact, yukawa, rel_err: (yukawa - exact).abs() / exact })
        })
        .collect()
}

/// Smallest `r` on a log grid over `κr ∈ [0.1, 100]` where the Yukawa form
/// is off by more than `threshold` relative, if any.
pub fn yukawa_crossover(p: &MonolayerParams, threshold: f64) -> Result<Option<f64>> {
    let kappa = p.screened()?;
    let n = 120;
    for i in 0..=n {
        let r = 0.1 / kappa * 1000f64.powf(i as f64 / n as f64);
        let e = exact_interface_kernel(r, p)?;
        let y = yukawa_interface_kernel(r, p)?;
        if (y - e).abs() / e > threshold {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
