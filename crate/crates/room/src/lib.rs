//! Shoebox room simulation in the spherical-harmonic domain.
//!
//! Early reflections come from an image-source model with frequency
//! dependent wall reflection derived from per-band reverberation times. The
//! late part is an isotropic diffuse noise field with per-band exponential
//! decay, faded in at the mixing time.

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod decay;
pub mod image;
pub mod render;
pub mod spec;

pub use bands::{OctaveBands, BAND_CENTERS, NUM_BANDS};
pub use decay::{schroeder_curve, schroeder_rt60, FIT_RANGE_DB};
pub use image::{eyring_reflection, image_sources, ImageSource};
pub use render::{render_drir, RenderOptions};
pub use spec::{sample_room, RoomSpec};
