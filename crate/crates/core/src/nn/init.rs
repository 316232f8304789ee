use rand::Rng;

use crate::tensor::Tensor;

/// Glorot uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Draws a `(fan_out, fan_in)` tensor uniformly from `[-L, L]`.
///
/// Panics if either fan is zero.
pub fn glorot_uniform_init<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    assert!(fan_in > 0 && fan_out > 0, "glorot fans must be positive");
    let limit = glorot_limit(fan_in, fan_out);
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-limit..=limit))
        .collect();
    Tensor::new(vec![fan_out, fan_in], data).expect("shape matches data")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn limit_for_input_layer() {
        let l = glorot_limit(24, 512);
        assert!((l - (6.0f64 / 536.0).sqrt()).abs() < 1e-15);
        assert!((l - 0.105_801_842).abs() < 1e-9);
        let w = glorot_uniform_init(24, 512, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(w.shape(), &[512, 24]);
        assert!(w.data().iter().all(|v| v.abs() <= l));
    }

    #[test]
    fn square_three_has_unit_limit() {
        assert_eq!(glorot_limit(3, 3), 1.0);
        let w = glorot_uniform_init(3, 3, &mut ChaCha8Rng::seed_from_u64(9));
        assert!(w.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn same_seed_same_tensor() {
        let a = glorot_uniform_init(7, 5, &mut ChaCha8Rng::seed_from_u64(42));
        let b = glorot_uniform_init(7, 5, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn moments_match_uniform() {
        let (fan_in, fan_out) = (300, 400);
        let w = glorot_uniform_init(fan_in, fan_out, &mut ChaCha8Rng::seed_from_u64(3));
        let l = glorot_limit(fan_in, fan_out);
        let n = w.len() as f64;
        let mean = w.data().iter().sum::<f64>() / n;
        let var = w.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let target = l * l / 3.0;
        assert!(mean.abs() < 0.05 * l, "mean {mean}");
        assert!(
            (var - target).abs() < 0.05 * target,
            "var {var} vs {target}"
        );
    }
}
