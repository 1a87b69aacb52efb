//! Heat-kernel frames and Besov / Triebel–Lizorkin decompositions on
//! computable model spaces.

pub mod approx;
pub mod cutoff;
pub mod error;
pub mod family;
pub mod frames;
pub mod grid;
pub mod jet;
pub mod model;
pub mod nets;
pub mod quadrature;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{DoublingReport, ModelKind, SpectralModel};
pub use quadrature::Quadrature;
pub use grid::SpectralGrid;
pub use spectral::{kernel_operator, KernelOperator};
pub use nets::NetLevel;
pub use frames::{build_dual, build_frame1, build_tight, CoefficientSet, FrameSystem, FrameVariant, GammaChoice};
pub use spaces::{besov_norm, equivalence_report, sobolev_norm, tl_norm, Flavor, Method, NormContext, NormReport, Pair, SpaceKind, SpaceParams};
pub use approx::{btau_norm, greedy_sigma_curve, jackson_slope, ApproxCurve, JacksonReport};
