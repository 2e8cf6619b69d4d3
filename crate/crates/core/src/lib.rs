//! Numerical laboratory for curvature flows of convex hypersurfaces:
//! pointwise pinching algebra, speed functions, support-function flows,
//! the Gauss curvature flow entropy and mean curvature flow of meshes in
//! any codimension. Solvers are generic over the scalar through [`Real`].

pub mod campaign;
pub mod curvature_algebra;
pub mod entropy_gcf;
pub mod error;
pub mod linalg;
pub mod mesh_flow;
pub mod real;
pub mod scenarios;
pub mod seeding;
pub mod speed_functions;
pub mod support_flow;

pub use error::{Error, Result};
pub use real::Real;

pub type SecondFundamentalForm = curvature_algebra::SecondFundamentalForm<f64>;
pub type SupportState = support_flow::SupportState<f64>;
pub type FlowRun = support_flow::FlowRun<f64>;
pub type RescaledGCFState = entropy_gcf::RescaledGCFState<f64>;
pub type GcfRun = entropy_gcf::GcfRun<f64>;
pub type MeshImmersion = mesh_flow::MeshImmersion<f64>;
pub type MeshRun = mesh_flow::MeshRun<f64>;
