//! Measures and averages over the affine torus systems: Birkhoff and
//! diagonal averages, conditional expectations, uniformity seminorms,
//! progressiveness scanners, and the double-average reproduction.

pub mod averages;
pub mod funcspec;
pub mod repro;
pub mod scan;
pub mod seminorm;

pub use averages::{birkhoff_average, sigma_k_integral, xi_k_integral, AverageEstimate, Projection};
pub use funcspec::{
    cond_expect_w_diag, cond_expect_zj, to_lin_boxes, ArcSet, FunctionSpec, LinBoxes, LineCoord,
};
pub use repro::{appendix_a2_repro, A2Config, A2Report};
pub use scan::{
    default_threshold, left_progressive_scan, multiple_recurrence_average, multiple_right_scan,
    recount, right_progressive_scan, ScanHit, ScanKind, ScanParams,
};
pub use seminorm::{ghk_seminorm, SeminormEstimate};
