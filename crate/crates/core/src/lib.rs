//! Continuous data assimilation for the periodic 1D Kuramoto-Sivashinsky
//! equation.
//!
//! A reference solution `u` is observed through its lowest Fourier modes
//! and a second solution `v`, started from zero, is nudged toward it by a
//! feedback term `mu * N(I(u) - I(v))`. The crate provides the spectral
//! discretization, an ETD1 integrator, the linear and nonlinear feedback
//! laws, and an experiment harness that records error decay, convergence
//! times and spectra.
//!
//! ```no_run
//! use ksnudge::harness::{run_scenario, ScenarioConfig};
//!
//! let artifacts = run_scenario(&ScenarioConfig::desk()).unwrap();
//! for m in &artifacts.methods {
//!     println!("{}: {:?}", m.label, m.convergence_time);
//! }
//! ```

pub mod assimilation;
pub mod error;
pub mod harness;
pub mod kse;
pub mod spectral;

pub use assimilation::{
    apply_law, coupled_step, feedback_term, stability_check, Assimilator, FeedbackLaw, LawKind,
    Observer,
};
pub use error::{Error, Result};
pub use harness::{
    convergence_time, run_scenario, run_scenario_with, write_artifacts, ErrorSeries, Execution,
    InitKind, MethodSpec, RunArtifacts, ScenarioConfig,
};
pub use kse::{EtdCoefficients, KseParams, KseStepper};
pub use spectral::{PhysicalField, SpectralField, SpectralGrid};
