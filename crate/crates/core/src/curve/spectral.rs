//! Trigonometric interpolation of periodic samples.
//!
//! Samples `z_j = x_j + i y_j` at `t_j = j/N` are expanded as
//! `z(t) = Σ_k c_k e^{2πikt}` with `|k| < N/2`; for even `N` the Nyquist
//! coefficient enters as `c_{N/2} cos(πNt)` so the interpolant is real-symmetric.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::geom::Vec2;

#[derive(Debug, Clone)]
pub struct Trig {
    /// Coefficients in FFT order: `k = 0, 1, ..., N-1` meaning `k` or `k - N`.
    coeffs: Vec<Complex64>,
}

fn to_c(v: Vec2) -> Complex64 {
    Complex64::new(v.x, v.y)
}

fn to_v(c: Complex64) -> Vec2 {
    Vec2::new(c.re, c.im)
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn fft(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

impl Trig {
    pub fn from_points(points: &[Vec2]) -> Self {
        let n = points.len();
        let mut data: Vec<Complex64> = points.iter().copied().map(to_c).collect();
        fft(&mut data, false);
        let inv = 1.0 / n as f64;
        for c in data.iter_mut() {
            *c *= inv;
        }
        Trig { coeffs: data }
    }

    pub fn from_scalar(values: &[f64]) -> Self {
        let pts: Vec<Vec2> = values.iter().map(|&v| Vec2::new(v, 0.0)).collect();
        Self::from_points(&pts)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mean(&self) -> Vec2 {
        to_v(self.coeffs[0])
    }

    fn nyquist(&self) -> Option<Complex64> {
        let n = self.len();
        (n.is_multiple_of(2)).then(|| self.coeffs[n / 2])
    }

    /// Samples of the `order`-th derivative at `m` equispaced points (`m ≥ N`).
    pub fn sample_derivative(&self, order: u32, m: usize) -> Vec<Vec2> {
        let n = self.len();
        assert!(m >= n, "sampling below the interpolation degree");
        let mut data = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            let mode = signed_mode(k, n);
            let c = self.coeffs[k];
            if n.is_multiple_of(2) && k == n / 2 {
                // c cos(πNt) = c/2 (e^{iπNt} + e^{-iπNt})
                let half = 0.5 * c;
                let w = 2.0 * PI * (n / 2) as f64;
                let fac_p = Complex64::new(0.0, w).powu(order);
                let fac_m = Complex64::new(0.0, -w).powu(order);
                data[n / 2] += half * fac_p;
                data[m - n / 2] += half * fac_m;
                continue;
            }
            let fac = Complex64::new(0.0, 2.0 * PI * mode as f64).powu(order);
            let idx = if mode >= 0 { mode as usize } else { (m as i64 + mode) as usize };
            data[idx] += c * fac;
        }
        fft(&mut data, true);
        data.into_iter().map(to_v).collect()
    }

    /// Value and first two derivatives at parameter `t`.
    pub fn eval3(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        let n = self.len();
        let half = (n - 1) / 2; // modes strictly below the Nyquist
        let w = Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut z = self.coeffs[0];
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        let mut wp = Complex64::new(1.0, 0.0);
        for k in 1..=half {
            if k % 32 == 0 {
                wp = Complex64::from_polar(1.0, 2.0 * PI * t * k as f64);
            } else {
                wp *= w;
            }
            let wm = wp.conj();
            let cp = self.coeffs[k];
            let cm = self.coeffs[n - k];
            let a = cp * wp;
            let b = cm * wm;
            let om = 2.0 * PI * k as f64;
            z += a + b;
            d1 += Complex64::new(0.0, om) * (a - b);
            d2 -= om * om * (a + b);
        }
        if let Some(c) = self.nyquist() {
            let om = PI * n as f64;
            let (s, co) = (om * t).sin_cos();
            z += c * co;
            d1 -= c * (om * s);
            d2 -= c * (om * om * co);
        }
        (to_v(z), to_v(d1), to_v(d2))
    }

    pub fn eval(&self, t: f64) -> Vec2 {
        self.eval3(t).0
    }

    /// Magnitude of the trailing coefficients relative to the largest one; a
    /// cheap resolution indicator.
    pub fn tail_ratio(&self) -> f64 {
        let n = self.len();
        let max = self.coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let lo = n / 2 - n / 8;
        let tail = (lo..=n / 2)
            .flat_map(|k| [self.coeffs[k].norm(), self.coeffs[(n - k) % n].norm()])
            .fold(0.0, f64::max);
        tail / max
    }
}

/// Spectral antiderivative of a real periodic signal sampled at `t_j = j/N`.
///
/// Returns `(mean, s)` where `s(t) = mean·t + periodic part`, `s(0) = 0`.
pub struct Antiderivative {
    mean: f64,
    trig: Trig,
    offset: f64,
}

impl Antiderivative {
    pub fn new(values: &[f64]) -> Self {
        let trig = Trig::from_scalar(values);
        let mean = trig.coeffs[0].re;
        let n = trig.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, (out, c)) in coeffs.iter_mut().zip(&trig.coeffs).enumerate().skip(1) {
            if n.is_multiple_of(2) && k == n / 2 {
                continue;
            }
            *out = c / Complex64::new(0.0, 2.0 * PI * signed_mode(k, n) as f64);
        }
        let periodic = Trig { coeffs };
        let offset = periodic.eval(0.0).x;
        Antiderivative { mean, trig: periodic, offset }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn value(&self, t: f64) -> f64 {
        self.mean * t + self.trig.eval(t).x - self.offset
    }

    /// Value and derivative at `t`.
    pub fn value_and_rate(&self, t: f64) -> (f64, f64) {
        let (z, d, _) = self.trig.eval3(t);
        (self.mean * t + z.x - self.offset, self.mean + d.x)
    }
}
