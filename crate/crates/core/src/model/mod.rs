//! The network: convolutional stem over raw audio, rotary-embedding
//! transformer encoder, rotary-embedding transformer decoder with
//! cross-attention, plus parameter and FLOP accounting.
//!
//! Everything here is pure f32 CPU math with no global state. Weights are
//! immutable borrows of a [`crate::checkpoint::TensorStore`]; the only
//! mutable state is the per-utterance [`DecoderCache`].

mod config;
mod decoder;
mod encoder;
mod flops;
mod math;
mod rope;
mod stem;
mod weights;

pub use config::{ConvLayerSpec, ModelConfig};
pub use decoder::{decoder_step, DecoderCache};
pub use encoder::{encode_audio, encoder_forward, EncoderStates};
pub use flops::{conv_stem_flops, estimate_flops};
pub use math::Mat;
pub use rope::apply_rope;
pub use stem::{conv_stem, min_input_samples, stem_output_len};
pub use weights::{parameter_specs, ModelWeights};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid config: {reason}")]
    InvalidConfig { reason: String },

    #[error("input too short: {samples} samples; the conv stem needs at least {min_samples}")]
    TooShortInput { samples: usize, min_samples: usize },

    #[error("missing tensor `{name}` in checkpoint")]
    MissingTensor { name: String },

    #[error("tensor `{name}` has shape {found:?}, expected {expected:?}")]
    ShapeMismatch { name: String, expected: Vec<usize>, found: Vec<usize> },

    #[error("unexpected tensor `{name}` not part of the model layout")]
    UnexpectedTensor { name: String },

    #[error("decoder position {pos} does not match cache length {cache_len}")]
    PositionMismatch { pos: usize, cache_len: usize },

    #[error("token id {token} out of range for vocab size {vocab_size}")]
    TokenOutOfRange { token: u32, vocab_size: usize },

    #[error("encoder frame width {found} does not match d_model {expected}")]
    FrameWidthMismatch { expected: usize, found: usize },

    #[error("checkpoint metadata has no `config` entry")]
    MissingConfig,

    #[error("checkpoint config is not valid JSON: {reason}")]
    BadConfigJson { reason: String },
}
