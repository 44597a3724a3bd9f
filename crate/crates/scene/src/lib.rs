//! Scene generation for training and evaluation.
//!
//! A [`corpus::StemCorpus`] indexes mono stems on disk. [`build::build_scene`]
//! draws a [`spec::SceneSpec`] from it under a [`spec::ScenePolicy`], and
//! [`render::render_scene`] turns the spec into an Ambisonics mixture with
//! dry ground truths. Every random choice flows from `(master seed, scene id)`.

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod corpus;
pub mod directions;
pub mod render;
pub mod spec;
pub mod synth;

pub use build::{build_scene, build_scenes, scene_rng};
pub use corpus::{Split, StemCorpus, StemEntry};
pub use directions::sample_directions;
pub use render::{render_scene, RenderedScene};
pub use spec::{Acoustics, AcousticsPolicy, SceneManifest, ScenePolicy, SceneSpec, SourceCount, SourceSlot};
