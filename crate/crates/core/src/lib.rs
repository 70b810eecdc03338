//! Amplitude distributions on extended configuration spaces.
//!
//! Probabilities come from marginal amplitudes followed by Born's rule.
//! Spin amplitudes live in the quaternions, continuous and two-slit
//! amplitudes in the complex numbers.

pub mod algebra;
pub mod continuous;
pub mod ensemble;
pub mod entangled;
pub mod error;
pub mod reduce;
pub mod spin;
pub mod twoslit;

pub use algebra::{AmplitudeScalar, Quaternion, UnitVector3};
pub use continuous::{Grid1D, GridWavefunction, PhaseSpaceAmplitude, Propagator, Representation, RunMeta};
pub use ensemble::{AmplitudeDistribution, Axis, BornTable, Interference, ProductSpace, Reduction};
pub use entangled::{BellReport, Chsh, ClassicalBound, CorrelationTable, PairTable, SingletSpace, TripleReport};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spin::{DirectionSet, HiddenSampler, Sign, SpinConfiguration, SpinEnsemble};
pub use twoslit::{PhaseShiftModel, PositivityReport, SlitAmplitudes, SlitGeometry};
