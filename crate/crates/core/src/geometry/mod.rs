//! Coefficient data of the operator (metric, vector potential, scalar
//! potential), the derived magnetic intensity and characteristic
//! frequencies, symplectic frames, the Liouville density and classical
//! drift dynamics.

mod drift;
mod frame;
mod intensity;
mod scenario;

pub use drift::{drift_flow, Trajectory};
pub use frame::{symplectic_frame, FrameBlock, SymplecticFrame};
pub use intensity::{
    characteristic_frequencies, intensity_from_parts, intensity_matrix, liouville_density,
    FieldIntensity,
};
pub use scenario::{
    registry, AnalyticAnswers, Domain, GaugeSpec, MetricSpec, PotentialSpec, Scenario,
};
