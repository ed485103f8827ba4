//! Screened (Yukawa) nonlocal isoperimetric energy in the plane.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod energy;
pub mod error;
pub mod flow;
pub mod geom;
pub mod limits;
pub mod physics;
pub mod quad;
pub mod raster;
pub mod specfun;

pub use curve::{ClosedCurve, CurveSystem};
pub use energy::{AnisotropicFrame, BoundaryPoint, EnergyReport, Method};
pub use error::{Error, Result};
pub use flow::{FlowOptions, FlowRecord, FlowState};
pub use geom::Vec2;
pub use limits::{CriticalRow, ExpansionRow, HoleScanPoint, PhaseRow, Winner};
pub use physics::MonolayerParams;
pub use specfun::ScreeningParams;
