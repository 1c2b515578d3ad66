//! Numerical ranges of Hilbert-space contractions and their minimal unitary
//! dilations, plus the function-theoretic boundary machinery for defect-one
//! model operators.
//!
//! The crate is organized in four layers:
//!
//! * [`cmatrix`] / [`linalg`] — dense complex matrices and the LAPACK-backed
//!   decompositions everything else is built on;
//! * [`dilation`] — defect operators, partial isometries, and the step-by-step
//!   construction of minimal unitary extensions with prescribed unimodular
//!   eigenvalues;
//! * [`numrange`] — support-function sampling of numerical ranges, convex
//!   region intersection, Hausdorff gaps, and corner detection;
//! * [`inner`] / [`model`] — inner functions given by zeros, point masses and
//!   declared tail data: boundary angular maps, chord envelopes, endpoint
//!   classification, and the finite matrix models they are validated against.

pub mod cmatrix;
pub mod dilation;
pub mod inner;
pub mod linalg;
pub mod model;
pub mod numrange;
pub mod svg;

pub use cmatrix::ComplexMatrix;
pub use dilation::{DefectData, DilationError, DilationRecord, EigTarget, PartialIsometryRecord};
pub use inner::{
    ArcComponent, AtomSpec, EndpointClass, EndpointVerdict, FullChordReport, InnerError,
    InnerFunctionSpec, TailKind, TailSpec,
};
pub use model::{
    DivisorReport, IntersectionReport, ModelError, PonceletReport,
};
pub use numrange::{ConvexRegion, CornerReport, RegionError, SupportLine};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
