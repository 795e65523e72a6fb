//! Discrete chaotic maps built around a G4FET negative-differential-resistance
//! surrogate, their oscillator topologies, bifurcation and Lyapunov analysis,
//! chaos-based reconfigurable logic gates, and functionality-space counting.

pub mod analysis;
pub mod error;
pub mod export;
pub mod funcspace;
pub mod gate;
pub mod map;
pub mod oscillator;
pub mod parallel;
pub mod tabulated;

pub use analysis::{
    bifurcation_sweep, classify_regions, lyapunov_exponent, lyapunov_sweep, Axis, BifurcationData, LyapunovCurve,
    LyapunovEstimate, MapFamily, Region, RegionLabel, SweepSpec,
};
pub use error::{Error, Result};
pub use funcspace::{compare_spaces, f1, f2, f3, f4, SpaceParams, SpaceTable};
pub use gate::{
    comparator, dac_encode, gate_function, noise_margin, search_configurations, AxisSpec, CodeOrder, DacSpec,
    FunctionId, GateConfig, ParamSource, SearchGrid, SearchResult,
};
pub use map::{gnm_effective_r, GnmParams, Interval, MapDescriptor, MapKind, Slope, SurrogateConstants};
pub use oscillator::{iterate, iterate_scheduled, Orbit, Schedule, Topology};
pub use parallel::with_workers;
pub use tabulated::{load_tabulated, parse_tabulated, TabulatedCurve};
