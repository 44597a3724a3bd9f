//! Spherical-harmonic signal processing for direction-specific Ambisonics
//! source separation: real SH, quadratures on the sphere, encoding,
//! signal-independent and oracle beamformers, and separation metrics.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the precision for callers that do not care.

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamform;
pub mod buffer;
pub mod dsp;
pub mod encode;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod metrics;
pub mod quadrature;
pub mod scalar;
pub mod sh;
pub mod wav;

pub use beamform::{
    apply_beamformer, beam_pattern, directivity_index, max_di_weights, max_re_weights, max_sdr_weights, re_vector, sdr, BeamLabel,
    BeamWeights,
};
pub use buffer::{AmbisonicsBuffer, Convention, MonoBuffer};
pub use encode::{convert_convention, encode_anechoic, encode_convolutive, ArirSet};
pub use error::{Error, Result};
pub use evaluation::{evaluate_method, LabeledMixture, Method};
pub use metrics::{si_sdr, ssr};
pub use quadrature::{equiangular_grid, t_design, DirectionSet};
pub use scalar::Real;
pub use sh::{great_circle, sh_eval, Direction, ShVector, MAX_ORDER};

pub type MonoBufferF32 = MonoBuffer<f32>;
pub type MonoBufferF64 = MonoBuffer<f64>;
pub type AmbisonicsBufferF32 = AmbisonicsBuffer<f32>;
pub type AmbisonicsBufferF64 = AmbisonicsBuffer<f64>;
pub type BeamWeightsF32 = BeamWeights<f32>;
pub type BeamWeightsF64 = BeamWeights<f64>;
pub type LabeledMixtureF32 = LabeledMixture<f32>;
pub type LabeledMixtureF64 = LabeledMixture<f64>;
