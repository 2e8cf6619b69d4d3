//! Flows of convex curves and axisymmetric surfaces by their support
//! function, `∂u/∂t = −f(λ)`, with the radius, speed and pinching monitors.

mod angenent;
pub mod io;
mod monitors;
mod radii;
mod state;
mod stepper;

pub use angenent::{angenent_oval_sample, angenent_residual, angenent_support};
pub use monitors::{
    diameter_bound_check, eta_functional, f_sigma_monitor, pinching_ratio, rescale_alpha1, speed_decay_fit,
    DiameterBoundCheck, SpeedDecayFit,
};
pub use radii::{radii, RadiiPair};
pub use state::{CurvatureField, Geometry, Grid, SupportState};
pub use stepper::{
    evolve, evolve_from, extinction_fit, record, speed_field, stable_dt, step, ExtinctionFit, FlowRun, FlowRunConfig,
    InitialShape, MonitorSet, StopReason, TimeSeriesRecord,
};
