//! Sphere moments, quadratic tensors, curvature data at the orbifold point,
//! and the gluing obstruction.

pub mod data;
pub mod lambda;
pub mod quadratic;
pub mod sphere;

pub use data::{kulkarni_nomizu, CurvatureData, ValidationSummary};
pub use lambda::{
    assemble_from_ledger, bianchi_cyclic_j_identity, classify_wall, closed_bracket, contraction_ledger, gauge_tensor_h,
    gauge_tensor_raw, ledger_closed_forms, obstruction_lambda_bruteforce, obstruction_lambda_closed, obstruction_scale,
    surface_integrand, wall_to_lambda_constant, BruteForce, Classification, ClosedObstruction, ContractionLedger,
    LinearForm, Quadrature, WallVerdict,
};
pub use quadratic::{
    conformal_killing_coefficients, conformal_killing_quadratic, ledger_tensors, sigma2_tensor, QuadraticTensor,
};
pub use sphere::{
    gauss_hermite_sphere_quartic, mc_sphere_integrals, moment_checks, sphere_moment2, sphere_moment4, sphere_volume,
    Estimate, MomentCheck, MIN_NODES,
};
