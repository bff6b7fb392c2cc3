//! Peak-to-average power ratio (PAPR) and crest factor (CF) statistics for
//! sampled I/Q white Gaussian noise.
//!
//! * [`papr_math`]: exact and asymptotic distributions, mean PAPR `H_n`,
//!   mean CF, and the older approximate formulas.
//! * [`signal_gen`]: seeded WGN and the I/Q imbalance, quantizer and
//!   low-pass impairment models.
//! * [`estimator`]: empirical PAPR, the Monte Carlo engine and KDE.
//! * [`spectro`]: STFT spectrograms, per-bin PAPR and the WGN band check.
//! * [`iq_io`]: capture files and result documents.
//! * [`tables`]: closed-form statistics tabulated over sample sizes.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common concrete types.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod exact;
pub mod iq_io;
pub mod papr_math;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod signal_gen;
pub mod spectro;
pub mod tables;

pub use error::{PaprError, Result};
pub use papr_math::{KeysightInput, PaprModel};
pub use quadrature::QuadratureSpec;
pub use scalar::{from_db, to_db, Real, EULER_GAMMA};

pub type IqBufferF64 = signal_gen::IqBuffer<f64>;
pub type IqBufferF32 = signal_gen::IqBuffer<f32>;
pub type FirLowPassF64 = signal_gen::FirLowPass<f64>;
pub type FirLowPassF32 = signal_gen::FirLowPass<f32>;
pub type WgnParamsF64 = signal_gen::WgnParams<f64>;
pub type ImbalanceParamsF64 = signal_gen::ImbalanceParams<f64>;
pub type QuantizerParamsF64 = signal_gen::QuantizerParams<f64>;
pub type PaprEstimateF64 = estimator::PaprEstimate<f64>;
pub type PaprEstimateF32 = estimator::PaprEstimate<f32>;
pub type QuadratureSpecF64 = QuadratureSpec<f64>;
pub type QuadratureSpecF32 = QuadratureSpec<f32>;
pub type KeysightInputF64 = KeysightInput<f64>;
