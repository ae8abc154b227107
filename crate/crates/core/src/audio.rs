//! Audio loading, gain scaling, and noise mixing at a target SNR.
//!
//! All audio in this crate is mono f32 at a fixed 16 kHz sample rate. The
//! loader rejects anything else; there is no resampler. Gain and mixing are
//! pure functions and never clip: the model consumes floats directly, so
//! values outside `[-1, 1]` are passed through untouched.

use std::io::Read;
use std::path::Path;

use crate::rng::SplitMix64;

/// The only sample rate this crate accepts.
pub const SAMPLE_RATE: u32 = 16000;

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The file is not a RIFF/WAVE container at all.
    #[error("not a RIFF/WAVE file")]
    NotAWav,

    /// The container ends before a declared chunk or sample payload does.
    #[error("truncated WAV file")]
    Truncated,

    /// Structurally a WAV but missing a required chunk.
    #[error("WAV file has no `{name}` chunk")]
    MissingChunk { name: &'static str },

    /// Neither 16-bit PCM nor 32-bit IEEE float.
    #[error("unsupported WAV encoding: format tag {format_tag}, {bits_per_sample} bits per sample")]
    UnsupportedEncoding { format_tag: u16, bits_per_sample: u16 },

    #[error("wrong sample rate: found {found} Hz, expected {SAMPLE_RATE} Hz")]
    WrongSampleRate { found: u32 },

    #[error("multi-channel audio not supported: found {channels} channels, expected mono")]
    MultiChannel { channels: u16 },

    /// A silent signal or noise buffer cannot define a power ratio.
    #[error("degenerate power: {what} buffer is silent")]
    DegeneratePower { what: &'static str },
}

/// Mono 16 kHz sample sequence, the unit of all audio processing.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    /// Samples with nominal range `[-1, 1]` (not enforced after gain).
    pub samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn from_samples(samples: Vec<f32>) -> Self {
        Self { samples, sample_rate: SAMPLE_RATE }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        duration_seconds(self)
    }
}

/// Uniform amplitude scaling in decibels (20·log10 of the amplitude ratio).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSpec {
    pub gain_db: f64,
}

impl GainSpec {
    pub fn new(gain_db: f64) -> Self {
        Self { gain_db }
    }

    /// Linear amplitude factor, `10^(gain_db/20)`.
    pub fn amplitude_factor(&self) -> f64 {
        10f64.powf(self.gain_db / 20.0)
    }
}

/// Target signal-to-noise ratio plus the seed that fixes noise alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub snr_db: f64,
    pub noise_seed: u64,
}

impl SnrSpec {
    pub fn new(snr_db: f64, noise_seed: u64) -> Self {
        Self { snr_db, noise_seed }
    }
}

/// Buffer length divided by the fixed sample rate.
pub fn duration_seconds(buf: &AudioBuffer) -> f64 {
    buf.samples.len() as f64 / SAMPLE_RATE as f64
}

/// Mean of squared samples over the full buffer, in f64.
pub fn power(buf: &AudioBuffer) -> f64 {
    if buf.samples.is_empty() {
        return 0.0;
    }
    let sum: f64 = buf.samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
    sum / buf.samples.len() as f64
}

/// Root-mean-square amplitude.
pub fn rms(buf: &AudioBuffer) -> f64 {
    power(buf).sqrt()
}

/// Multiplies every sample by `10^(gain_db/20)`. No clipping or clamping:
/// the result may exceed `[-1, 1]`.
pub fn apply_gain(buf: &AudioBuffer, gain: GainSpec) -> AudioBuffer {
    let factor = gain.amplitude_factor();
    let samples = buf.samples.iter().map(|&s| (s as f64 * factor) as f32).collect();
    AudioBuffer::from_samples(samples)
}

/// Adds noise to `signal` scaled so the mixture's signal-power to
/// noise-power ratio equals `spec.snr_db` exactly (by construction).
///
/// The noise is tiled end-to-end (or truncated) to the signal length,
/// starting at offset `noise_seed mod noise.len()`, so the same spec always
/// produces the same alignment.
pub fn mix_at_snr(
    signal: &AudioBuffer,
    noise: &AudioBuffer,
    spec: SnrSpec,
) -> Result<AudioBuffer, AudioError> {
    if noise.samples.is_empty() {
        return Err(AudioError::DegeneratePower { what: "noise" });
    }
    let signal_power = power(signal);
    if signal_power <= 0.0 {
        return Err(AudioError::DegeneratePower { what: "signal" });
    }

    let n = noise.samples.len();
    let offset = (spec.noise_seed % n as u64) as usize;
    let aligned: Vec<f32> = (0..signal.samples.len())
        .map(|i| noise.samples[(offset + i) % n])
        .collect();
    let aligned = AudioBuffer::from_samples(aligned);
    let noise_power = power(&aligned);
    if noise_power <= 0.0 {
        return Err(AudioError::DegeneratePower { what: "noise" });
    }

    // alpha such that 10*log10(P_signal / (alpha^2 * P_noise)) == snr_db
    let alpha = (signal_power / (noise_power * 10f64.powf(spec.snr_db / 10.0))).sqrt();
    let samples = signal
        .samples
        .iter()
        .zip(&aligned.samples)
        .map(|(&s, &w)| (s as f64 + alpha * w as f64) as f32)
        .collect();
    Ok(AudioBuffer::from_samples(samples))
}

/// Deterministic white noise, uniform in `[-1, 1)`, used as the default
/// noise source for robustness sweeps when no noise file is supplied.
pub fn white_noise(num_samples: usize, seed: u64) -> AudioBuffer {
    let mut rng = SplitMix64::keyed(seed, "white-noise");
    let samples = (0..num_samples).map(|_| rng.next_range_f32(-1.0, 1.0)).collect();
    AudioBuffer::from_samples(samples)
}

// ---------------------------------------------------------------------------
// RIFF/WAVE reader and debug writer
// ---------------------------------------------------------------------------

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Loads a mono 16 kHz WAV file containing 16-bit PCM or 32-bit float
/// samples. Integer PCM is scaled to `[-1, 1]` by dividing by 32768.
pub fn load_wav<P: AsRef<Path>>(path: P) -> Result<AudioBuffer, AudioError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_wav(&bytes)
}

/// Parses WAV bytes; see [`load_wav`].
pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::NotAWav);
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format_tag, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or(AudioError::Truncated)?;
        if body_end > bytes.len() {
            return Err(AudioError::Truncated);
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(AudioError::Truncated);
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {} // skip LIST, fact, and friends
        }
        // chunks are word-aligned; odd sizes carry one pad byte
        pos = body_end + (size & 1);
    }

    let (format_tag, channels, rate, bits) = fmt.ok_or(AudioError::MissingChunk { name: "fmt " })?;
    let data = data.ok_or(AudioError::MissingChunk { name: "data" })?;

    let supported = matches!((format_tag, bits), (FORMAT_PCM, 16) | (FORMAT_IEEE_FLOAT, 32));
    if !supported {
        return Err(AudioError::UnsupportedEncoding { format_tag, bits_per_sample: bits });
    }
    if channels != 1 {
        return Err(AudioError::MultiChannel { channels });
    }
    if rate != SAMPLE_RATE {
        return Err(AudioError::WrongSampleRate { found: rate });
    }

    let bytes_per_sample = (bits / 8) as usize;
    if data.len() % bytes_per_sample != 0 {
        return Err(AudioError::Truncated);
    }
    let samples = match format_tag {
        FORMAT_PCM => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32 / 32768.0)
            .collect(),
        _ => data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
    };
    Ok(AudioBuffer::from_samples(samples))
}

/// Sample encoding for the debug writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    /// 16-bit signed PCM; samples are scaled by 32768 and clamped.
    Pcm16,
    /// 32-bit IEEE float; lossless round trip through the reader.
    Float32,
}

/// Debug writer mirroring the reader's format.
pub fn write_wav<P: AsRef<Path>>(
    path: P,
    buf: &AudioBuffer,
    encoding: WavEncoding,
) -> Result<(), AudioError> {
    std::fs::write(path, wav_bytes(buf, encoding))?;
    Ok(())
}

/// Encodes a buffer as complete WAV file bytes.
pub fn wav_bytes(buf: &AudioBuffer, encoding: WavEncoding) -> Vec<u8> {
    let (format_tag, bits): (u16, u16) = match encoding {
        WavEncoding::Pcm16 => (FORMAT_PCM, 16),
        WavEncoding::Float32 => (FORMAT_IEEE_FLOAT, 32),
    };
    let bytes_per_sample = (bits / 8) as u32;
    let data_size = buf.samples.len() as u32 * bytes_per_sample;

    let mut out = Vec::with_capacity(44 + data_size as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format_tag.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    out.extend_from_slice(&(SAMPLE_RATE * bytes_per_sample).to_le_bytes());
    out.extend_from_slice(&(bytes_per_sample as u16).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in &buf.samples {
        match encoding {
            WavEncoding::Pcm16 => {
                let v = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
            WavEncoding::Float32 => out.extend_from_slice(&s.to_le_bytes()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pcm16_wav(rate: u32, channels: u16, samples: &[i16]) -> Vec<u8> {
        let data_size = (samples.len() * 2) as u32;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_size).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * 2 * channels as u32).to_le_bytes());
        out.extend_from_slice(&(2 * channels).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_size.to_le_bytes());
        for &s in samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    #[test]
    fn pcm16_scaling_is_fixed() {
        let wav = pcm16_wav(16000, 1, &[0, 16384, -32768]);
        let buf = parse_wav(&wav).unwrap();
        assert_eq!(buf.samples, vec![0.0, 0.5, -1.0]);
    }

    #[test]
    fn wrong_sample_rate_is_rejected() {
        let wav = pcm16_wav(8000, 1, &[0, 1, 2]);
        assert!(matches!(
            parse_wav(&wav),
            Err(AudioError::WrongSampleRate { found: 8000 })
        ));
    }

    #[test]
    fn stereo_is_rejected() {
        let wav = pcm16_wav(16000, 2, &[0, 0, 1, 1]);
        assert!(matches!(parse_wav(&wav), Err(AudioError::MultiChannel { channels: 2 })));
    }

    #[test]
    fn non_wav_is_rejected() {
        assert!(matches!(parse_wav(b"not audio at all"), Err(AudioError::NotAWav)));
        let mut almost = pcm16_wav(16000, 1, &[0]);
        almost[8..12].copy_from_slice(b"AVI ");
        assert!(matches!(parse_wav(&almost), Err(AudioError::NotAWav)));
    }

    #[test]
    fn unsupported_encoding_is_rejected() {
        let mut wav = pcm16_wav(16000, 1, &[0]);
        wav[34..36].copy_from_slice(&8u16.to_le_bytes()); // 8-bit PCM
        assert!(matches!(
            parse_wav(&wav),
            Err(AudioError::UnsupportedEncoding { format_tag: 1, bits_per_sample: 8 })
        ));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let wav = pcm16_wav(16000, 1, &[0, 1, 2, 3]);
        assert!(matches!(parse_wav(&wav[..wav.len() - 3]), Err(AudioError::Truncated)));
    }

    #[test]
    fn one_second_file_has_16000_samples() {
        let samples: Vec<i16> = vec![1; 16000];
        let buf = parse_wav(&pcm16_wav(16000, 1, &samples)).unwrap();
        assert_eq!(buf.len(), 16000);
        assert_eq!(buf.duration_seconds(), 1.0);
    }

    #[test]
    fn float32_round_trips_exactly() {
        let buf = white_noise(1234, 77);
        let parsed = parse_wav(&wav_bytes(&buf, WavEncoding::Float32)).unwrap();
        assert_eq!(buf, parsed);
    }

    #[test]
    fn zero_gain_is_identity() {
        let buf = white_noise(512, 3);
        let out = apply_gain(&buf, GainSpec::new(0.0));
        assert_eq!(buf.samples, out.samples);
    }

    #[test]
    fn minus_twenty_db_scales_by_tenth() {
        let buf = AudioBuffer::from_samples(vec![1.0, -0.5, 0.25]);
        let out = apply_gain(&buf, GainSpec::new(-20.0));
        for (a, b) in buf.samples.iter().zip(&out.samples) {
            assert!((a * 0.1 - b).abs() < 1e-7);
        }
    }

    #[test]
    fn six_db_doubles_amplitude() {
        let gain_db = 20.0 * 2f64.log10(); // ~6.0206
        let buf = AudioBuffer::from_samples(vec![0.1, -0.2, 0.3]);
        let out = apply_gain(&buf, GainSpec::new(gain_db));
        for (a, b) in buf.samples.iter().zip(&out.samples) {
            assert!((a * 2.0 - b).abs() < 1e-7);
        }
    }

    #[test]
    fn snr_zero_with_identical_noise_uses_unit_alpha() {
        let signal = white_noise(4000, 9);
        let out = mix_at_snr(&signal, &signal, SnrSpec::new(0.0, 0)).unwrap();
        // alpha == 1, so the mixture is exactly signal + signal
        for (s, o) in signal.samples.iter().zip(&out.samples) {
            assert!((o - 2.0 * s).abs() < 1e-6);
        }
    }

    #[test]
    fn snr_twenty_with_unit_powers_scales_noise_by_tenth() {
        // constant-amplitude buffers have exactly unit power
        let signal = AudioBuffer::from_samples(vec![1.0; 1000]);
        let noise = AudioBuffer::from_samples(vec![-1.0; 1000]);
        let out = mix_at_snr(&signal, &noise, SnrSpec::new(20.0, 0)).unwrap();
        for &o in &out.samples {
            assert!((o - 0.9).abs() < 1e-6);
        }
    }

    #[test]
    fn measured_snr_matches_request() {
        for (i, &req) in [-10.0, 0.0, 17.3, 40.0].iter().enumerate() {
            let signal = white_noise(16000, 100 + i as u64);
            let noise = white_noise(5000, 200 + i as u64);
            let out = mix_at_snr(&signal, &noise, SnrSpec::new(req, 31 * i as u64)).unwrap();
            let residual: Vec<f32> = out
                .samples
                .iter()
                .zip(&signal.samples)
                .map(|(&o, &s)| o - s)
                .collect();
            let noise_part = AudioBuffer::from_samples(residual);
            let measured = 10.0 * (power(&signal) / power(&noise_part)).log10();
            assert!((measured - req).abs() < 0.01, "req {req} measured {measured}");
        }
    }

    #[test]
    fn mixing_is_deterministic() {
        let signal = white_noise(8000, 5);
        let noise = white_noise(3000, 6);
        let a = mix_at_snr(&signal, &noise, SnrSpec::new(12.0, 99)).unwrap();
        let b = mix_at_snr(&signal, &noise, SnrSpec::new(12.0, 99)).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = mix_at_snr(&signal, &noise, SnrSpec::new(12.0, 98)).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn silent_inputs_are_degenerate() {
        let silent = AudioBuffer::from_samples(vec![0.0; 100]);
        let live = white_noise(100, 1);
        assert!(matches!(
            mix_at_snr(&silent, &live, SnrSpec::new(0.0, 0)),
            Err(AudioError::DegeneratePower { what: "signal" })
        ));
        assert!(matches!(
            mix_at_snr(&live, &silent, SnrSpec::new(0.0, 0)),
            Err(AudioError::DegeneratePower { what: "noise" })
        ));
    }

    #[test]
    fn duration_arithmetic() {
        assert_eq!(duration_seconds(&AudioBuffer::from_samples(vec![0.0; 16000])), 1.0);
        assert_eq!(duration_seconds(&AudioBuffer::from_samples(vec![0.0; 8000])), 0.5);
        assert_eq!(duration_seconds(&AudioBuffer::from_samples(vec![])), 0.0);
    }

    proptest! {
        #[test]
        fn gain_round_trip_reconstructs_input(
            seed in 0u64..1000,
            gain_db in -40.0f64..40.0,
        ) {
            let buf = white_noise(600, seed);
            let there = apply_gain(&buf, GainSpec::new(gain_db));
            let back = apply_gain(&there, GainSpec::new(-gain_db));
            for (a, b) in buf.samples.iter().zip(&back.samples) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }

        #[test]
        fn gain_changes_rms_by_requested_db(
            seed in 0u64..1000,
            gain_db in -40.0f64..40.0,
        ) {
            let buf = white_noise(600, seed);
            let out = apply_gain(&buf, GainSpec::new(gain_db));
            let expected = 10f64.powf(gain_db / 20.0);
            let ratio = rms(&out) / rms(&buf);
            prop_assert!((ratio / expected - 1.0).abs() < 1e-6);
        }
    }
}
