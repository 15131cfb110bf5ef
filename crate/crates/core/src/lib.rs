//! Stochastic and periodic quantum collision models.
//!
//! A system repeatedly collides with fresh ancillas. In the stochastic model
//! collisions are instantaneous and Poisson-distributed in time; in the
//! periodic model every time step brings one ancilla prepared in a mixture
//! of an inert level and the interacting state. Both generate the same
//! master equation, which [`me`] integrates directly.
//!
//! * [`qmat`]: dense complex matrices, states, unitaries, partial trace.
//! * [`channels`]: collision map, Choi/Kraus forms, master-equation generators.
//! * [`stochastic`]: Monte Carlo trajectories and ensemble averages.
//! * [`periodic`]: extended-ancilla construction and correlated baths.
//! * [`me`]: RK4 integration of the master equation.
//! * [`config`], [`experiments`], [`witness`]: scenarios, outputs and the
//!   trace-distance revival witness used by the `qcollide` binary.

pub mod channels;
pub mod config;
pub mod error;
pub mod experiments;
pub mod me;
pub mod periodic;
pub mod qmat;
pub mod series;
pub mod stochastic;
pub mod witness;

pub use channels::{CollisionSpec, KrausChannel};
pub use error::{Error, Result};
pub use qmat::{ComplexMatrix, DensityMatrix, UnitaryOp};
pub use series::StateSeries;
