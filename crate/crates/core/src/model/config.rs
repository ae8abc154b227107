//! Architecture hyperparameters and the closed-form parameter count.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ModelError;

/// One strided 1-D convolution layer of the audio stem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

fn default_rope_base() -> f64 {
    10000.0
}

fn default_max_tokens_per_second() -> f64 {
    6.0
}

/// Every architecture hyperparameter. Determines the parameter count and
/// the FLOP model; shipped as a JSON file, not hard-coded.
///
/// The decoder feed-forward is gated (two fused input projections of
/// `ff_mult * d_model` each); the encoder feed-forward is a plain MLP.
/// Token embedding and output projection share one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    /// Feed-forward width is `ff_mult * d_model`.
    pub ff_mult: usize,
    pub vocab_size: usize,
    pub conv_stem: Vec<ConvLayerSpec>,
    #[serde(default = "default_rope_base")]
    pub rope_base: f64,
    /// Decode length cap, in emitted tokens per second of audio.
    #[serde(default = "default_max_tokens_per_second")]
    pub max_tokens_per_second: f64,
}

impl ModelConfig {
    /// The default 27M-parameter configuration shipped with the crate.
    pub fn tiny() -> Self {
        serde_json::from_str(include_str!("../../configs/tiny.json"))
            .expect("bundled tiny config is valid")
    }

    /// A desk-scale configuration small enough for tests and demos, with a
    /// vocabulary matching the byte-level fallback tokenizer.
    pub fn toy() -> Self {
        serde_json::from_str(include_str!("../../configs/toy.json"))
            .expect("bundled toy config is valid")
    }

    pub fn from_json_str(json: &str) -> Result<Self, ModelError> {
        let config: ModelConfig = serde_json::from_str(json)
            .map_err(|e| ModelError::BadConfigJson { reason: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Feed-forward hidden width.
    pub fn ff_dim(&self) -> usize {
        self.ff_mult * self.d_model
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| Err(ModelError::InvalidConfig { reason });
        if self.d_model == 0
            || self.n_heads == 0
            || self.enc_layers == 0
            || self.dec_layers == 0
            || self.ff_mult == 0
            || self.vocab_size == 0
        {
            return fail("all dimensions and layer counts must be positive".into());
        }
        if self.d_model % self.n_heads != 0 {
            return fail(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.head_dim() % 2 != 0 {
            return fail(format!(
                "head dimension {} is odd; rotary pairs need an even width",
                self.head_dim()
            ));
        }
        if self.conv_stem.is_empty() {
            return fail("conv_stem must have at least one layer".into());
        }
        for (i, layer) in self.conv_stem.iter().enumerate() {
            if layer.out_channels == 0 || layer.kernel == 0 || layer.stride == 0 {
                return fail(format!("conv_stem layer {i} has a zero dimension"));
            }
        }
        let last = self.conv_stem.last().unwrap();
        if last.out_channels != self.d_model {
            return fail(format!(
                "final conv_stem out_channels {} must equal d_model {}",
                last.out_channels, self.d_model
            ));
        }
        if !(self.rope_base > 0.0 && self.rope_base.is_finite()) {
            return fail("rope_base must be a positive finite float".into());
        }
        if !(self.max_tokens_per_second > 0.0 && self.max_tokens_per_second.is_finite()) {
            return fail("max_tokens_per_second must be a positive finite float".into());
        }
        Ok(())
    }

    /// Canonical JSON serialization (stable field order), embedded in
    /// checkpoints and hashed for report metadata.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        let mut hex = String::with_capacity(12);
        for byte in &digest[..6] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Closed-form total parameter count.
    ///
    /// Sums, per tensor kind: tied token embedding `vocab * d`; conv stem
    /// weights and biases; per encoder layer two norms, four attention
    /// projections, and a plain MLP; per decoder layer three norms, eight
    /// attention projections, and a gated MLP; plus the two final norms.
    pub fn count_params(&self) -> u64 {
        let d = self.d_model as u64;
        let f = self.ff_dim() as u64;
        let v = self.vocab_size as u64;
        let norm = 2 * d;

        let embedding = v * d;

        let mut stem = 0u64;
        let mut in_channels = 1u64;
        for layer in &self.conv_stem {
            let co = layer.out_channels as u64;
            stem += co * in_channels * layer.kernel as u64 + co;
            in_channels = co;
        }

        let attn = 4 * (d * d + d);
        let enc_ff = (f * d + f) + (d * f + d);
        let enc_layer = 2 * norm + attn + enc_ff;

        let dec_ff = (2 * f * d + 2 * f) + (d * f + d);
        let dec_layer = 3 * norm + 2 * attn + dec_ff;

        embedding
            + stem
            + self.enc_layers as u64 * enc_layer
            + norm
            + self.dec_layers as u64 * dec_layer
            + norm
    }
}
