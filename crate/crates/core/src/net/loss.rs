use crate::error::{Error, Result};
use crate::Scalar;

/// Probabilities below this are clamped inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue<T> {
    pub loss: T,
    /// The true-class probability fell below [`PROB_FLOOR`] and was clamped.
    pub clamped: bool,
}

/// `-class_weight · ln p[label]`.
pub fn weighted_cross_entropy<T: Scalar>(probs: &[T], label: usize, class_weight: T) -> Result<LossValue<T>> {
    if label >= probs.len() {
        return Err(Error::ShapeMismatch(format!("label {label} for {} classes", probs.len())));
    }
    if !(class_weight > T::zero()) {
        return Err(Error::Config("class weight must be positive".into()));
    }
    let floor = T::of(PROB_FLOOR);
    let p = probs[label];
    let clamped = !(p >= floor);
    let loss = -class_weight * p.max(floor).ln();
    Ok(LossValue { loss, clamped })
}
