//! Tensor naming scheme and checkpoint binding.
//!
//! A checkpoint must contain exactly the tensors below, with these names
//! and shapes (`d` = d_model, `f` = ff_mult * d_model, `<i>`/`<l>` zero
//! based). Binding borrows the raw data; nothing is copied.
//!
//! ```text
//! embed.tokens                          [vocab_size, d]   (tied output projection)
//! stem.<i>.weight                       [out_ch, in_ch, kernel]
//! stem.<i>.bias                         [out_ch]
//! enc.<l>.attn_norm.{gamma,beta}        [d]
//! enc.<l>.attn.{q,k,v,out}_proj.weight  [d, d]
//! enc.<l>.attn.{q,k,v,out}_proj.bias    [d]
//! enc.<l>.ff_norm.{gamma,beta}          [d]
//! enc.<l>.ff.fc1.{weight,bias}          [f, d], [f]
//! enc.<l>.ff.fc2.{weight,bias}          [d, f], [d]
//! enc.final_norm.{gamma,beta}           [d]
//! dec.<l>.self_attn_norm.{gamma,beta}   [d]
//! dec.<l>.self_attn.{q,k,v,out}_proj.*  [d, d], [d]
//! dec.<l>.cross_attn_norm.{gamma,beta}  [d]
//! dec.<l>.cross_attn.{q,k,v,out}_proj.* [d, d], [d]
//! dec.<l>.ff_norm.{gamma,beta}          [d]
//! dec.<l>.ff.fc1.{weight,bias}          [2f, d], [2f]   (gated: [gate; value])
//! dec.<l>.ff.fc2.{weight,bias}          [d, f], [d]
//! dec.final_norm.{gamma,beta}           [d]
//! ```
//!
//! The decoder MLP is gated: `fc2(gelu(u[..f]) * u[f..])` where
//! `u = fc1(x)`. The encoder MLP is plain `fc2(gelu(fc1(x)))`.

use crate::checkpoint::TensorStore;

use super::config::{ConvLayerSpec, ModelConfig};
use super::ModelError;

/// Every parameter tensor implied by a config, as `(name, shape)` pairs in
/// canonical checkpoint order.
pub fn parameter_specs(config: &ModelConfig) -> Vec<(String, Vec<usize>)> {
    let d = config.d_model;
    let f = config.ff_dim();
    let mut specs: Vec<(String, Vec<usize>)> = Vec::new();
    let mut push = |name: String, shape: Vec<usize>| specs.push((name, shape));

    push("embed.tokens".into(), vec![config.vocab_size, d]);

    let mut in_channels = 1;
    for (i, layer) in config.conv_stem.iter().enumerate() {
        push(format!("stem.{i}.weight"), vec![layer.out_channels, in_channels, layer.kernel]);
        push(format!("stem.{i}.bias"), vec![layer.out_channels]);
        in_channels = layer.out_channels;
    }

    for l in 0..config.enc_layers {
        for part in ["gamma", "beta"] {
            push(format!("enc.{l}.attn_norm.{part}"), vec![d]);
        }
        for proj in ["q", "k", "v", "out"] {
            push(format!("enc.{l}.attn.{proj}_proj.weight"), vec![d, d]);
            push(format!("enc.{l}.attn.{proj}_proj.bias"), vec![d]);
        }
        for part in ["gamma", "beta"] {
            push(format!("enc.{l}.ff_norm.{part}"), vec![d]);
        }
        push(format!("enc.{l}.ff.fc1.weight"), vec![f, d]);
        push(format!("enc.{l}.ff.fc1.bias"), vec![f]);
        push(format!("enc.{l}.ff.fc2.weight"), vec![d, f]);
        push(format!("enc.{l}.ff.fc2.bias"), vec![d]);
    }
    for part in ["gamma", "beta"] {
        push(format!("enc.final_norm.{part}"), vec![d]);
    }

    for l in 0..config.dec_layers {
        for part in ["gamma", "beta"] {
            push(format!("dec.{l}.self_attn_norm.{part}"), vec![d]);
        }
        for proj in ["q", "k", "v", "out"] {
            push(format!("dec.{l}.self_attn.{proj}_proj.weight"), vec![d, d]);
            push(format!("dec.{l}.self_attn.{proj}_proj.bias"), vec![d]);
        }
        for part in ["gamma", "beta"] {
            push(format!("dec.{l}.cross_attn_norm.{part}"), vec![d]);
        }
        for proj in ["q", "k", "v", "out"] {
            push(format!("dec.{l}.cross_attn.{proj}_proj.weight"), vec![d, d]);
            push(format!("dec.{l}.cross_attn.{proj}_proj.bias"), vec![d]);
        }
        for part in ["gamma", "beta"] {
            push(format!("dec.{l}.ff_norm.{part}"), vec![d]);
        }
        push(format!("dec.{l}.ff.fc1.weight"), vec![2 * f, d]);
        push(format!("dec.{l}.ff.fc1.bias"), vec![2 * f]);
        push(format!("dec.{l}.ff.fc2.weight"), vec![d, f]);
        push(format!("dec.{l}.ff.fc2.bias"), vec![d]);
    }
    for part in ["gamma", "beta"] {
        push(format!("dec.final_norm.{part}"), vec![d]);
    }

    specs
}

#[derive(Debug, Clone, Copy)]
pub struct NormWeights<'a> {
    pub gamma: &'a [f32],
    pub beta: &'a [f32],
}

#[derive(Debug, Clone, Copy)]
pub struct AttentionWeights<'a> {
    pub q_weight: &'a [f32],
    pub q_bias: &'a [f32],
    pub k_weight: &'a [f32],
    pub k_bias: &'a [f32],
    pub v_weight: &'a [f32],
    pub v_bias: &'a [f32],
    pub out_weight: &'a [f32],
    pub out_bias: &'a [f32],
}

#[derive(Debug, Clone, Copy)]
pub struct MlpWeights<'a> {
    pub fc1_weight: &'a [f32],
    pub fc1_bias: &'a [f32],
    pub fc2_weight: &'a [f32],
    pub fc2_bias: &'a [f32],
}

#[derive(Debug, Clone, Copy)]
pub struct StemLayerWeights<'a> {
    pub weight: &'a [f32],
    pub bias: &'a [f32],
    pub spec: ConvLayerSpec,
    pub in_channels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderLayerWeights<'a> {
    pub attn_norm: NormWeights<'a>,
    pub attn: AttentionWeights<'a>,
    pub ff_norm: NormWeights<'a>,
    pub ff: MlpWeights<'a>,
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderLayerWeights<'a> {
    pub self_attn_norm: NormWeights<'a>,
    pub self_attn: AttentionWeights<'a>,
    pub cross_attn_norm: NormWeights<'a>,
    pub cross_attn: AttentionWeights<'a>,
    pub ff_norm: NormWeights<'a>,
    pub ff: MlpWeights<'a>,
}

/// Validated, typed view over a checkpoint. Immutable and `Sync`; decode
/// sessions share one instance across threads.
#[derive(Debug)]
pub struct ModelWeights<'a> {
    pub config: ModelConfig,
    pub embedding: &'a [f32],
    pub stem: Vec<StemLayerWeights<'a>>,
    pub enc_layers: Vec<EncoderLayerWeights<'a>>,
    pub enc_final_norm: NormWeights<'a>,
    pub dec_layers: Vec<DecoderLayerWeights<'a>>,
    pub dec_final_norm: NormWeights<'a>,
}

struct Binder<'a> {
    store: &'a TensorStore,
}

impl<'a> Binder<'a> {
    fn tensor(&self, name: &str, expected: &[usize]) -> Result<&'a [f32], ModelError> {
        let record = self
            .store
            .get(name)
            .ok_or_else(|| ModelError::MissingTensor { name: name.to_string() })?;
        if record.shape != expected {
            return Err(ModelError::ShapeMismatch {
                name: name.to_string(),
                expected: expected.to_vec(),
                found: record.shape.clone(),
            });
        }
        Ok(&record.data)
    }

    fn norm(&self, prefix: &str, d: usize) -> Result<NormWeights<'a>, ModelError> {
        Ok(NormWeights {
            gamma: self.tensor(&format!("{prefix}.gamma"), &[d])?,
            beta: self.tensor(&format!("{prefix}.beta"), &[d])?,
        })
    }

    fn attention(&self, prefix: &str, d: usize) -> Result<AttentionWeights<'a>, ModelError> {
        Ok(AttentionWeights {
            q_weight: self.tensor(&format!("{prefix}.q_proj.weight"), &[d, d])?,
            q_bias: self.tensor(&format!("{prefix}.q_proj.bias"), &[d])?,
            k_weight: self.tensor(&format!("{prefix}.k_proj.weight"), &[d, d])?,
            k_bias: self.tensor(&format!("{prefix}.k_proj.bias"), &[d])?,
            v_weight: self.tensor(&format!("{prefix}.v_proj.weight"), &[d, d])?,
            v_bias: self.tensor(&format!("{prefix}.v_proj.bias"), &[d])?,
            out_weight: self.tensor(&format!("{prefix}.out_proj.weight"), &[d, d])?,
            out_bias: self.tensor(&format!("{prefix}.out_proj.bias"), &[d])?,
        })
    }

    fn mlp(&self, prefix: &str, hidden: usize, d: usize) -> Result<MlpWeights<'a>, ModelError> {
        Ok(MlpWeights {
            fc1_weight: self.tensor(&format!("{prefix}.fc1.weight"), &[hidden, d])?,
            fc1_bias: self.tensor(&format!("{prefix}.fc1.bias"), &[hidden])?,
            fc2_weight: self.tensor(&format!("{prefix}.fc2.weight"), &[d, hidden])?,
            fc2_bias: self.tensor(&format!("{prefix}.fc2.bias"), &[d])?,
        })
    }
}

impl<'a> ModelWeights<'a> {
    /// Binds a checkpoint using the config embedded in its metadata.
    pub fn from_store(store: &'a TensorStore) -> Result<Self, ModelError> {
        let json = store.metadata().get("config").ok_or(ModelError::MissingConfig)?;
        let config = ModelConfig::from_json_str(json)?;
        Self::from_store_with_config(store, config)
    }

    /// Binds a checkpoint against an explicit config, validating that the
    /// store holds exactly the expected tensors at the expected shapes.
    pub fn from_store_with_config(
        store: &'a TensorStore,
        config: ModelConfig,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let b = Binder { store };
        let d = config.d_model;
        let f = config.ff_dim();

        let embedding = b.tensor("embed.tokens", &[config.vocab_size, d])?;

        let mut stem = Vec::with_capacity(config.conv_stem.len());
        let mut in_channels = 1;
        for (i, spec) in config.conv_stem.iter().enumerate() {
            stem.push(StemLayerWeights {
                weight: b.tensor(
                    &format!("stem.{i}.weight"),
                    &[spec.out_channels, in_channels, spec.kernel],
                )?,
                bias: b.tensor(&format!("stem.{i}.bias"), &[spec.out_channels])?,
                spec: *spec,
                in_channels,
            });
            in_channels = spec.out_channels;
        }

        let mut enc_layers = Vec::with_capacity(config.enc_layers);
        for l in 0..config.enc_layers {
            enc_layers.push(EncoderLayerWeights {
                attn_norm: b.norm(&format!("enc.{l}.attn_norm"), d)?,
                attn: b.attention(&format!("enc.{l}.attn"), d)?,
                ff_norm: b.norm(&format!("enc.{l}.ff_norm"), d)?,
                ff: b.mlp(&format!("enc.{l}.ff"), f, d)?,
            });
        }
        let enc_final_norm = b.norm("enc.final_norm", d)?;

        let mut dec_layers = Vec::with_capacity(config.dec_layers);
        for l in 0..config.dec_layers {
            dec_layers.push(DecoderLayerWeights {
                self_attn_norm: b.norm(&format!("dec.{l}.self_attn_norm"), d)?,
                self_attn: b.attention(&format!("dec.{l}.self_attn"), d)?,
                cross_attn_norm: b.norm(&format!("dec.{l}.cross_attn_norm"), d)?,
                cross_attn: b.attention(&format!("dec.{l}.cross_attn"), d)?,
                ff_norm: b.norm(&format!("dec.{l}.ff_norm"), d)?,
                ff: b.mlp(&format!("dec.{l}.ff"), f, d)?,
            });
        }
        let dec_final_norm = b.norm("dec.final_norm", d)?;

        // reject strays so a typo in a writer cannot silently drop weights
        let expected_count = parameter_specs(&config).len();
        if store.len() != expected_count {
            let expected: std::collections::HashSet<String> =
                parameter_specs(&config).into_iter().map(|(n, _)| n).collect();
            for record in store.tensors() {
                if !expected.contains(&record.name) {
                    return Err(ModelError::UnexpectedTensor { name: record.name.clone() });
                }
            }
        }

        Ok(ModelWeights {
            config,
            embedding,
            stem,
            enc_layers,
            enc_final_norm,
            dec_layers,
            dec_final_norm,
        })
    }

    pub(crate) fn embedding_row(&self, token: usize) -> &'a [f32] {
        let d = self.config.d_model;
        &self.embedding[token * d..(token + 1) * d]
    }
}
