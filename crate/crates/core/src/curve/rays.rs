//! Ray/curve intersection on the dense Hermite representation of a curve system.
//!
//! Each curve is represented by values and first and second derivatives on the
//! fine grid, interpolated by piecewise quintic Hermite polynomials, which keeps
//! curvature near every grid point accurate to fourth order. Grid points are
//! grouped in chunks with bounding circles so a ray only scans the chunks it
//! can actually hit.
//!
//! Rays that start on a curve see a root of `d^⊥·(γ(t) - γ(t_y))` at the
//! origin itself. That root is divided out with `sin(π(t - t_y))` so the
//! remaining roots near the origin keep full relative accuracy.

use std::f64::consts::PI;

use super::CurveSystem;
use crate::geom::Vec2;

const CHUNK: usize = 16;

#[derive(Debug, Clone)]
struct Track {
    /// `M + 1` positions, the last one repeating the first.
    pos: Vec<Vec2>,
    /// `h·γ'` at the grid points.
    d1: Vec<Vec2>,
    /// `h²·γ''` at the grid points.
    d2: Vec<Vec2>,
    /// Bounding circle of each chunk.
    chunks: Vec<(Vec2, f64)>,
    h: f64,
}

/// Quintic Hermite basis: weights of `(P0, D0, S0, S1, D1, P1)` and their derivatives.
#[inline]
fn basis(s: f64) -> ([f64; 6], [f64; 6]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let w = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
        0.5 * (s3 - 2.0 * s4 + s5),
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ];
    let dw = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
        0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4),
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
    ];
    (w, dw)
}

impl Track {
    fn new(mut pos: Vec<Vec2>, d1: &[Vec2], d2: &[Vec2]) -> Self {
        let m = pos.len();
        let h = 1.0 / m as f64;
        pos.push(pos[0]);
        let mut d1: Vec<Vec2> = d1.iter().map(|&d| d * h).collect();
        let mut d2: Vec<Vec2> = d2.iter().map(|&d| d * (h * h)).collect();
        d1.push(d1[0]);
        d2.push(d2[0]);
        let mut chunks = Vec::with_capacity(m.div_ceil(CHUNK));
        let mut start = 0;
        while start < m {
            let end = (start + CHUNK).min(m);
            let (mut lo, mut hi) = (pos[start], pos[start]);
            let mut step = 0.0f64;
            for k in start..=end {
                let p = pos[k];
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
                step = step.max(d1[k].norm());
            }
            let c = (lo + hi) * 0.5;
            let rad = (start..=end).map(|k| (pos[k] - c).norm()).fold(0.0, f64::max);
            // Every point between two samples is within half an arc step of one of them.
            chunks.push((c, rad + 0.6 * step));
            start = end;
        }
        Track { pos, d1, d2, chunks, h }
    }

    fn segments(&self) -> usize {
        self.pos.len() - 1
    }

    #[inline]
    fn tangential(&self, k: usize, w: &[f64; 6]) -> Vec2 {
        self.d1[k] * w[1] + self.d2[k] * w[2] + self.d2[k + 1] * w[3] + self.d1[k + 1] * w[4]
    }

    /// `P(s) - P_k` on segment `k`, or `P(s) - P_{k+1}` when `from_end`.
    fn offset(&self, k: usize, s: f64, from_end: bool) -> Vec2 {
        let (w, _) = basis(s);
        let t = self.tangential(k, &w);
        if from_end {
            (self.pos[k] - self.pos[k + 1]) * w[0] + t
        } else {
            (self.pos[k + 1] - self.pos[k]) * w[5] + t
        }
    }

    fn point(&self, k: usize, s: f64) -> Vec2 {
        if s < 0.5 {
            self.pos[k] + self.offset(k, s, false)
        } else {
            self.pos[k + 1] + self.offset(k, s, true)
        }
    }

    /// `dP/ds` on segment `k`.
    fn velocity(&self, k: usize, s: f64) -> Vec2 {
        let (_, dw) = basis(s);
        (self.pos[k + 1] - self.pos[k]) * dw[5] + self.tangential(k, &dw)
    }
}

/// Origin of rays cast from a point of a curve.
#[derive(Debug, Clone)]
pub struct Anchor {
    curve: usize,
    t: f64,
    track: Track,
}

impl Anchor {
    pub fn curve(&self) -> usize {
        self.curve
    }

    pub fn parameter(&self) -> f64 {
        self.t
    }

    pub fn point(&self) -> Vec2 {
        self.track.pos[0]
    }

    /// `γ'(t)` at the anchor.
    pub fn derivative(&self) -> Vec2 {
        self.track.d1[0] / self.track.h
    }
}

#[derive(Debug, Clone)]
pub struct RayCaster<'a> {
    system: &'a CurveSystem,
    tracks: Vec<Track>,
}

/// Root of `f` on `[a, b]` given a sign change, by Illinois-modified regula falsi
/// with periodic bisection.
fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for it in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-3) {
            break;
        }
        let mut x = if it % 4 == 3 { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    (a * fb - b * fa) / (fb - fa)
}

#[inline]
fn negative(x: f64) -> bool {
    x < 0.0
}

impl<'a> RayCaster<'a> {
    pub fn new(system: &'a CurveSystem) -> Self {
        let tracks = system
            .curves()
            .iter()
            .map(|c| {
                let (pos, d1, d2) = c.fine();
                Track::new(pos.to_vec(), d1, d2)
            })
            .collect();
        RayCaster { system, tracks }
    }

    pub fn system(&self) -> &CurveSystem {
        self.system
    }

    /// Anchor at parameter `t` of curve `curve`.
    pub fn anchor(&self, curve: usize, t: f64) -> Anchor {
        let c = &self.system.curves()[curve];
        let t = t.rem_euclid(1.0);
        let (fp, fd1, fd2) = c.fine();
        let m = fp.len();
        let shift = t * m as f64;
        let (pos, d1, d2) = if (shift - shift.round()).abs() < 1e-9 {
            let j = shift.round() as usize % m;
            let rot = |v: &[Vec2]| v[j..].iter().chain(&v[..j]).copied().collect::<Vec<_>>();
            (rot(fp), rot(fd1), rot(fd2))
        } else {
            let mut pos = Vec::with_capacity(m);
            let mut d1 = Vec::with_capacity(m);
            let mut d2 = Vec::with_capacity(m);
            for k in 0..m {
                let (p, a, b) = c.eval3(t + k as f64 / m as f64);
                pos.push(p);
                d1.push(a);
                d2.push(b);
            }
            (pos, d1, d2)
        };
        Anchor { curve, t, track: Track::new(pos, &d1, &d2) }
    }

    /// Distances `r ∈ (0, r_max]` at which the ray `origin + r·dir` crosses the
    /// system, sorted ascending. `dir` must be a unit vector.
    pub fn crossings(&self, origin: Vec2, dir: Vec2, r_max: f64, out: &mut Vec<f64>) {
        out.clear();
        for track in &self.tracks {
            scan(track, origin, dir, r_max, false, out);
        }
        out.sort_by(f64::total_cmp);
    }

    /// Crossings of the ray leaving the anchor point in direction `dir`,
    /// excluding the anchor itself.
    pub fn anchored_crossings(&self, anchor: &Anchor, dir: Vec2, r_max: f64, out: &mut Vec<f64>) {
        out.clear();
        let origin = anchor.point();
        for (i, track) in self.tracks.iter().enumerate() {
            if i == anchor.curve {
                scan(&anchor.track, origin, dir, r_max, true, out);
            } else {
                scan(track, origin, dir, r_max, false, out);
            }
        }
        out.sort_by(f64::total_cmp);
    }
}

fn chunk_hit(chunk: &(Vec2, f64), origin: Vec2, dir: Vec2, r_max: f64) -> bool {
    let w = chunk.0 - origin;
    let along = dir.dot(w);
    dir.cross(w).abs() <= chunk.1 && along >= -chunk.1 && along <= r_max + chunk.1
}

fn push_root(track: &Track, k: usize, s: f64, origin: Vec2, dir: Vec2, r_max: f64, out: &mut Vec<f64>) {
    let r = dir.dot(track.point(k, s) - origin);
    if r > 0.0 && r <= r_max {
        out.push(r);
    }
}

fn scan(track: &Track, origin: Vec2, dir: Vec2, r_max: f64, anchored: bool, out: &mut Vec<f64>) {
    let n = dir.perp();
    let m = track.segments();
    for (ci, chunk) in track.chunks.iter().enumerate() {
        if !chunk_hit(chunk, origin, dir, r_max) {
            continue;
        }
        let start = ci * CHUNK;
        let end = (start + CHUNK).min(m);
        let mut f0 = n.dot(track.pos[start] - origin);
        let mut g0 = n.dot(track.d1[start]);
        for k in start..end {
            let f1 = n.dot(track.pos[k + 1] - origin);
            let g1 = n.dot(track.d1[k + 1]);
            if anchored && (k == 0 || k == m - 1) {
                anchored_end(track, k, n, origin, dir, r_max, out);
            } else {
                // f(s) = n·(P(s) - origin), measured from the nearer endpoint.
                let f = |s: f64| {
                    if s < 0.5 {
                        f0 + n.dot(track.offset(k, s, false))
                    } else {
                        f1 + n.dot(track.offset(k, s, true))
                    }
                };
                if negative(f0) != negative(f1) {
                    push_root(track, k, bracketed_root(f, 0.0, 1.0, f0, f1), origin, dir, r_max, out);
                } else if negative(g0) != negative(g1) && (negative(g0) != negative(f0) || g0 == 0.0) {
                    // f heads towards zero and turns back: look at the turning point.
                    let df = |s: f64| n.dot(track.velocity(k, s));
                    let sm = bracketed_root(df, 0.0, 1.0, g0, g1);
                    let fm = f(sm);
                    if negative(fm) != negative(f0) {
                        push_root(track, k, bracketed_root(f, 0.0, sm, f0, fm), origin, dir, r_max, out);
                        push_root(track, k, bracketed_root(f, sm, 1.0, fm, f1), origin, dir, r_max, out);
                    }
                }
            }
            f0 = f1;
            g0 = g1;
        }
    }
}

/// Segments touching the anchor: roots of the deflated function.
fn anchored_end(track: &Track, k: usize, n: Vec2, origin: Vec2, dir: Vec2, r_max: f64, out: &mut Vec<f64>) {
    let h = track.h;
    // d1 is already scaled by h, so n·γ'(t_y)/π = n·d1/(π h).
    let lead = n.dot(track.d1[0]) / (PI * h);
    let first = k == 0;
    let g = |s: f64| {
        if first {
            if s == 0.0 {
                return lead;
            }
            n.dot(track.offset(k, s, false)) / (PI * s * h).sin()
        } else {
            if s == 1.0 {
                return -lead;
            }
            n.dot(track.offset(k, s, true)) / (PI * (1.0 - s) * h).sin()
        }
    };
    let (g0, g1) = (g(0.0), g(1.0));
    if negative(g0) != negative(g1) {
        let s = bracketed_root(g, 0.0, 1.0, g0, g1);
        let r = dir.dot(track.point(k, s) - origin);
        if r > 0.0 && r <= r_max {
            out.push(r);
        }
    }
}
