//! Numerical tools for quantum query complexity of total Boolean functions.
//!
//! The crate covers four pieces that fit together:
//!
//! * [`transforms`]: the unnormalized Walsh-Hadamard transform, Hamming-weight
//!   index sets, binomial sums and the binary entropy function.
//! * [`boolfn`]: sign-valued truth tables, named families, seeded uniform
//!   sampling and Fourier spectra.
//! * [`vandam`]: exact state-vector simulation of oracle interrogation, which
//!   recovers an `n`-bit input with about `n/2` phase queries.
//! * [`operator`], [`certifier`], [`moments`]: the truncated Fourier operator
//!   `F̂_T` with entries `f̂(s ⊕ t)` for `|s|, |t| ≤ T`, its spectral norm,
//!   per-function query lower bounds derived from that norm, and trace
//!   moments of `F̂_T` over random functions.
//!
//! Numeric code is generic over a [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what every tolerance in the
//! test suites assumes. Exhaustive expectations are computed exactly over
//! [`Rational`].

pub mod boolfn;
pub mod certifier;
pub mod eigen;
pub mod error;
pub mod moments;
pub mod operator;
pub mod scalar;
pub mod seed;
pub mod transforms;
pub mod vandam;

pub use boolfn::{BooleanFunction, Family, FourierSpectrum};
pub use certifier::{CertificateStatus, CertifiedBound, CertifyOptions, Evidence, SweepSummary};
pub use error::{Error, Result};
pub use moments::{MomentMethod, MomentReport, PartitionSpec};
pub use operator::{NormEstimate, NormMethod, NormOptions, OperatorMode, TruncatedFourierOperator};
pub use scalar::Scalar;
pub use transforms::{binary_entropy, binomial_sum, fwht_in_place, Amplitudes, WeightIndex};
pub use vandam::InterrogationOutcome;

/// Exact rational used for exhaustive expectations.
pub type Rational = num_rational::Ratio<i128>;

/// Double-precision Fourier spectrum.
pub type Spectrum = FourierSpectrum<f64>;
/// Double-precision truncated Fourier operator.
pub type TruncatedOperator = TruncatedFourierOperator<f64>;
/// Double-precision norm estimate.
pub type Norm = NormEstimate<f64>;
/// Double-precision state vector.
pub type StateVector = Amplitudes<f64>;
