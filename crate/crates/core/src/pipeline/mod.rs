//! Commands behind the command-line tool: configuration, runs, reports and output files.

pub mod config;
mod decay;
pub mod diagnostics;
pub mod nonresonant;
mod oscint;
pub mod output;
pub mod resonant;
mod simulate;

pub use config::{
    nonresonant_sim, odd_resonant_sim, resonant_sim, LocalDecayConfig, NonresonantConfig, OscintConfig, ResonantConfig, SimulateConfig,
    SweepConfig, SweepTarget,
};
pub use decay::{cmd_localdecay, LocalDecayReport, VariantDecay};
pub use diagnostics::{free_propagator_check, integrator_quality, FreePropagatorCheck, IntegratorQuality};
pub use nonresonant::{cmd_nonresonant, NonresonantReport};
pub use oscint::{cmd_oscint, OscintReport};
pub use output::Output;
pub use resonant::{cmd_resonant, ResonantReport};
pub use simulate::{cmd_simulate, cmd_sweep, SimulateReport, SweepPoint, SweepReport, FREE_CHECK_GRID, FREE_CHECK_TIMES, ORDER_HORIZON};
