//! Spontaneous emission of two emitters into photonic band-gap reservoirs,
//! and the quantum correlations that flow between emitters and reservoirs.
//!
//! The pipeline is: [`reservoir`] builds the memory kernel, [`amplitude`]
//! integrates the excited-state amplitude b(t), [`bound_state`] predicts its
//! long-time plateau, [`correlation`] turns b(t) into discord, entanglement
//! and mutual information for any pair of subsystems, and [`mode_oracle`]
//! cross-checks b(t) against an exactly diagonalised discrete bath.
//! [`scenario`] wires these into configured runs with CSV and SVG output.

pub mod amplitude;
pub mod bound_state;
pub mod correlation;
pub mod error;
pub mod mode_oracle;
pub mod quadrature;
pub mod reservoir;
pub mod scenario;

pub use amplitude::{solve_amplitude, AmplitudeTrajectory, KernelMode, SolverConfig};
pub use bound_state::{find_bound_state, residue_weight, BoundStateResult, BoundStateSolver};
pub use correlation::{
    assemble_state, correlation_timeseries, reduce, CorrelationRecord, DensityMatrix2Q, DiscordOptions,
    InitialWeights, Partition, Side, Subsystem,
};
pub use error::{Error, Result};
pub use mode_oracle::{diagonalize, DiscretizedBath, OracleSpectrum};
pub use reservoir::{EmitterParams, ReservoirParams, SpectralCutoff};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/reservoir.md")]
    mod reservoir {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/bound_state.md")]
    mod bound_state {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
