use rand::{Rng, RngCore};

/// Draws an index from an unnormalised non-negative weight vector.
///
/// Falls back to the last positive entry when rounding pushes the draw past
/// the cumulative sum. Returns `None` if no weight is positive.
pub fn sample_index<R: RngCore + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_is_always_drawn() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_index(&[0.0, 0.0, 2.0, 0.0], &mut rng), Some(2));
        }
    }

    #[test]
    fn empty_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_index(&[0.0, 0.0], &mut rng), None);
        assert_eq!(sample_index(&[], &mut rng), None);
    }

    #[test]
    fn frequencies_follow_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[sample_index(&[1.0, 2.0, 1.0], &mut rng).unwrap()] += 1;
        }
        let f = counts[1] as f64 / 30_000.0;
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }
}
