//! Chart-based tensor calculus: metrics on coordinate charts, central
//! finite-difference Christoffel symbols and curvature, covariant
//! derivatives of component-formula tensor fields, and metric contractions.

pub mod chart;
pub mod curvature;
pub mod field;
pub mod tensor;

pub use chart::{euclidean, hyperbolic_polar, round_sphere, ChartMetric, Domain};
pub use curvature::{christoffel, curvature, Christoffel, CurvatureBundle};
pub use field::{covariant_derivative, form_inner, inner, nabla, norm, partial_derivative, TensorField};
pub use tensor::{Tensor, Valence};
