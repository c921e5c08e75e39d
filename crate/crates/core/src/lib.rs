//! Simulator and optimizer for the symmetric quantum Kolkata restaurant game.
//!
//! `n` players share an entangled state of `n` `m`-level systems, each applies
//! a local special-unitary strategy, and a player is paid when its measured
//! choice is unique. The numerical core is generic over a [`Real`] scalar;
//! the aliases below fix it to `f64`.

pub mod classical;
pub mod error;
pub mod experiments;
pub mod game;
pub mod optimize;
pub mod qstate;
pub mod scalar;
pub mod su_param;

pub use error::{Error, Result};
pub use game::{build_partition, winners, ClassMasses, GameSpec, OutcomeClass, OutcomePartition, WinnerSet};
pub use optimize::{best_response, nash_gap, optimize_symmetric, symmetric_payoff, OptimizerConfig};
pub use qstate::{basis_index, decode_index};
pub use scalar::Real;

pub type State = qstate::PureState<f64>;
pub type Matrix = qstate::SquareMatrix<f64>;
pub type Params = su_param::UnitaryParams<f64>;
pub type Generators = su_param::GeneratorBasis<f64>;
pub type Optimum = optimize::OptimizationResult<f64>;
pub type Mixed = classical::MixedStrategy<f64>;

pub type StateF32 = qstate::PureState<f32>;
pub type MatrixF32 = qstate::SquareMatrix<f32>;
