//! Closed-form regions of the erasure and collective phase-flip channels.

use super::{Pentagon, RateRegion, RegionMetadata};
use crate::error::{Error, Result};
use crate::information::binary_entropy;

/// Time-shared union of the rectangles `(H(q), (1 - 2q) log2 d)` for
/// `samples` equally spaced `q` in `[0, 1/2]`.
pub fn analytic_erasure_region(d: usize, samples: usize) -> Result<RateRegion> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "erasure region needs d >= 2, got {d}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two q samples".into()));
    }
    let log_d = (d as f64).log2();
    let gens = (0..samples)
        .map(|i| {
            let q = 0.5 * i as f64 / (samples - 1) as f64;
            Ok(Pentagon::rectangle(
                binary_entropy(q)?.0,
                (1.0 - 2.0 * q) * log_d,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = RegionMetadata {
        channel: format!("erasure(d={d})"),
        kind: "analytic_erasure".into(),
        ..RegionMetadata::default()
    };
    Ok(RateRegion::from_generators(gens, 1, true, meta))
}

/// The single pentagon `R <= 1, S <= 1, R + S <= 2 - H(p)`.
pub fn analytic_phase_flip_region(p: f64) -> Result<RateRegion> {
    let h = binary_entropy(p)?.0;
    let meta = RegionMetadata {
        channel: format!("phase_flip(p={p})"),
        kind: "analytic_phase_flip".into(),
        ..RegionMetadata::default()
    };
    Ok(RateRegion::from_generators(
        vec![Pentagon::new(1.0, 1.0, 2.0 - h)],
        1,
        false,
        meta,
    ))
}
