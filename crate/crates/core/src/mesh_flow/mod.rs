//! Mean curvature flow `∂φ/∂t = H⃗` of triangulated surfaces in `R^m`
//! with quadric-fit curvature estimates and the pinching monitors.

mod curvature;
mod diameter;
mod laplacian;
mod mesh;
mod run;

pub use curvature::{
    estimate_h, f_sigma_from, f_sigma_integral, pinching_check, pinching_from, vertex_curvatures, FsigmaIntegral,
    PinchingCheck, VertexCurvature, VertexFit,
};
pub use diameter::intrinsic_diameter;
pub use laplacian::{mcf_step, mean_curvature_vector, CotanLaplacian, MeshScheme, MAX_ASPECT_RATIO};
pub use mesh::{icosphere, perturbed_icosphere, read_mesh, torus, write_mesh, MeshImmersion};
pub use run::{mesh_record, mesh_run, mesh_run_from, monitor_csv, MeshFixture, MeshRecord, MeshRun, MeshRunConfig, MONITOR_HEADER};
