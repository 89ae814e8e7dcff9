//! Quasi-relative entropy coherence measures for finite-dimensional quantum states.
//!
//! The crate provides validated density matrices, operator-convex generator
//! functions, the quasi-relative entropy S_f(A‖B), the f-coherences C_f and
//! Ĉ_f, Kraus channels with genuinely incoherent (GIO) and strictly
//! incoherent (SIO) structure, and randomized verification suites for the
//! monotonicity properties of the measures.

pub mod channels;
pub mod coherence;
pub mod divergence;
pub mod error;
pub mod generator;
pub mod io;
pub mod matrix;
pub mod random;
pub mod verify;

pub use channels::{GioChannel, KrausChannel, KrausMap, MeasurementOutcome};
pub use coherence::{coherence, coherence_f, coherence_f_hat, dephase, CoherenceResult, Variant};
pub use divergence::{f_entropy, f_entropy_hat, quasi_relative_entropy, ExtendedReal};
pub use error::{Error, Result};
pub use generator::{parse_generator, GeneratorFunction};
pub use matrix::{ComplexMatrix, DensityMatrix, PureState, C64};
pub use verify::{run_all, TrialConfig, VerificationReport};
