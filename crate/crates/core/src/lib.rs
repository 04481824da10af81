//! Multivariate color mapping: attributes are ordered around the HSL disc
//! by similarity, samples are placed inside it by generalized barycentric
//! interpolation, the point cloud can be warped through its PCA ellipse to
//! trade hue fidelity for contrast, and colored samples are blended into
//! continuous maps by adaptive kernel regression.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod colorspace;
pub mod config;
pub mod data;
pub mod layout;
pub mod legend;
pub mod pipeline;
pub mod render;
pub mod service;
pub mod warp;

pub use colorspace::{Hsl, Rgb};
pub use config::SessionConfig;
pub use data::{DataTable, NormalizedTable, WeightMode};
pub use layout::{DistanceMatrix, LayoutModel};
pub use pipeline::{Pipeline, PipelineError};
pub use render::{KernelConfig, RasterField};
pub use warp::{EllipseModel, WarpKind, WarpMode};
