//! Rotary position embeddings.
//!
//! Position `m` rotates each adjacent value pair `(x[2i], x[2i+1])` by the
//! angle `m * theta_i` with `theta_i = base^(-2i / head_dim)`, so attention
//! scores between rotated queries and keys depend only on their relative
//! position. Angles are evaluated in f64 and the result is rounded to f32
//! once, which keeps pair norms exact to well below 1e-6.

use super::math::Mat;
use super::ModelError;

/// Rotates every row of a `positions x head_dim` matrix, row `r` at
/// absolute position `start_pos + r`. Pure function of its inputs.
pub fn apply_rope(x: &Mat, start_pos: usize, base: f64) -> Result<Mat, ModelError> {
    if x.cols() % 2 != 0 {
        return Err(ModelError::InvalidConfig {
            reason: format!("rotary width {} is odd", x.cols()),
        });
    }
    let mut out = x.clone();
    for r in 0..out.rows() {
        rotate_in_place(out.row_mut(r), start_pos + r, base);
    }
    Ok(out)
}

/// In-place rotation of one head-dimension slice at an absolute position.
pub(crate) fn rotate_in_place(row: &mut [f32], pos: usize, base: f64) {
    let width = row.len();
    let half = width / 2;
    for i in 0..half {
        let theta = base.powf(-2.0 * i as f64 / width as f64);
        let (sin, cos) = (pos as f64 * theta).sin_cos();
        let x0 = row[2 * i] as f64;
        let x1 = row[2 * i + 1] as f64;
        row[2 * i] = (x0 * cos - x1 * sin) as f32;
        row[2 * i + 1] = (x0 * sin + x1 * cos) as f32;
    }
}
