//! Benchmark fixtures shared by the criterion targets.

use std::f64::consts::PI;

use yil_core::{ClosedCurve, CurveSystem, Vec2};

pub fn unit_disk(n: usize) -> CurveSystem {
    CurveSystem::disk(Vec2::new(0.0, 0.0), 1.0, n).expect("disk")
}

/// The flow's default initial datum: a mildly eccentric ellipse of area π.
pub fn flow_ellipse(n: usize) -> CurveSystem {
    CurveSystem::single(ClosedCurve::ellipse(Vec2::new(0.0, 0.0), 1.2, 1.0 / 1.2, n).expect("ellipse"))
        .rescaled_to_area(PI)
        .expect("rescale")
}
