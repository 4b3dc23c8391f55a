//! SDP relaxation, randomized rounding and approximation-ratio certification
//! for two mixed-binary QCQP models: minimizing `‖w‖²` under coverage
//! constraints and maximizing `‖w‖²` under suppression constraints, each with
//! a cardinality constraint on the binary selectors.
//!
//! The pipeline is: build an [`instance::Instance`], relax it to a cone
//! program ([`relaxation`]), solve with the dense interior-point engine
//! ([`solver`]), round the solution back to a feasible mixed-binary point
//! ([`rounding`]), and compare against the closed-form worst-case ratio
//! guarantees ([`bounds`]) or a brute-force reference ([`oracle`]). The
//! [`experiment`] module drives Monte-Carlo sweeps over random instances.

pub mod bounds;
pub mod experiment;
pub mod fixtures;
pub mod instance;
pub mod oracle;
pub mod relaxation;
pub mod rng;
pub mod rounding;
pub mod solver;
