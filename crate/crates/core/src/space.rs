//! Observation and action spaces: the contract between environments and
//! agents.

use crate::error::{CoreError, Result};
use crate::rng::Pcg64;
use crate::transition::Action;

/// Declarative description of an observation or action space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    /// `n` mutually exclusive choices, encoded as integers in `[0, n)`.
    Discrete { n: u64 },
    /// Bounded (possibly at infinity) box of f32 values with the given
    /// row-major shape. `low`/`high` are per-element.
    Box {
        shape: Vec<usize>,
        low: Vec<f32>,
        high: Vec<f32>,
    },
}

/// A value drawn from (or checked against) a space.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Discrete(i64),
    Box(Vec<f32>),
}

impl SpaceSpec {
    pub fn discrete(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(CoreError::InvalidSpace("Discrete n must be >= 1".into()));
        }
        Ok(SpaceSpec::Discrete { n })
    }

    pub fn boxed(shape: Vec<usize>, low: Vec<f32>, high: Vec<f32>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(CoreError::InvalidSpace(format!(
                "Box shape must be nonempty with positive dims, got {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if low.len() != len || high.len() != len {
            return Err(CoreError::InvalidSpace(format!(
                "Box bounds must have {len} elements, got low {} / high {}",
                low.len(),
                high.len()
            )));
        }
        if low.iter().zip(&high).any(|(l, h)| l > h || l.is_nan() || h.is_nan()) {
            return Err(CoreError::InvalidSpace(
                "Box requires low[i] <= high[i] elementwise".into(),
            ));
        }
        Ok(SpaceSpec::Box { shape, low, high })
    }

    /// Uniform Box with the same scalar bounds everywhere.
    pub fn boxed_uniform(shape: Vec<usize>, low: f32, high: f32) -> Result<Self> {
        let len: usize = shape.iter().product();
        SpaceSpec::boxed(shape, vec![low; len], vec![high; len])
    }

    /// Number of scalars in one value of this space (1 for Discrete).
    pub fn flat_len(&self) -> usize {
        match self {
            SpaceSpec::Discrete { .. } => 1,
            SpaceSpec::Box { shape, .. } => shape.iter().product(),
        }
    }

    /// Spatial `(channels, height, width)` layout for Box spaces of rank 2
    /// (treated as one channel) or rank 3. Used by spatial augmentations.
    pub fn spatial_layout(&self) -> Option<(usize, usize, usize)> {
        match self {
            SpaceSpec::Box { shape, .. } if shape.len() == 2 => Some((1, shape[0], shape[1])),
            SpaceSpec::Box { shape, .. } if shape.len() == 3 => {
                Some((shape[0], shape[1], shape[2]))
            }
            _ => None,
        }
    }
}

/// True iff `value`'s shape matches the space and every element lies in
/// bounds (Discrete: integer in `[0, n)`).
pub fn validate(space: &SpaceSpec, value: &Value) -> bool {
    match (space, value) {
        (SpaceSpec::Discrete { n }, Value::Discrete(a)) => *a >= 0 && (*a as u64) < *n,
        (SpaceSpec::Box { shape, low, high }, Value::Box(v)) => {
            let len: usize = shape.iter().product();
            // NaN fails both comparisons, so NaN elements never validate.
            v.len() == len
                && v.iter()
                    .zip(low.iter().zip(high.iter()))
                    .all(|(x, (l, h))| *x >= *l && *x <= *h)
        }
        _ => false,
    }
}

/// Check an action against a space (Discrete actions for Discrete spaces,
/// Box vectors for Box spaces).
pub fn validate_action(space: &SpaceSpec, action: &Action) -> bool {
    match action {
        Action::Discrete(a) => validate(space, &Value::Discrete(*a)),
        Action::Continuous(v) => validate(space, &Value::Box(v.clone())),
    }
}

/// Draw a uniform value from the space. Errors on a Box with any infinite
/// bound.
pub fn sample_space(space: &SpaceSpec, rng: &mut Pcg64) -> Result<Value> {
    match space {
        SpaceSpec::Discrete { n } => Ok(Value::Discrete(rng.below(*n) as i64)),
        SpaceSpec::Box { low, high, .. } => {
            if low.iter().chain(high.iter()).any(|b| !b.is_finite()) {
                return Err(CoreError::UnboundedSample);
            }
            let v = low
                .iter()
                .zip(high.iter())
                .map(|(&l, &h)| rng.uniform_f32(l, h))
                .collect();
            Ok(Value::Box(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn discrete_validates_half_open_range() {
        let s = SpaceSpec::discrete(4).unwrap();
        assert!(validate(&s, &Value::Discrete(3)));
        assert!(!validate(&s, &Value::Discrete(4)));
        assert!(!validate(&s, &Value::Discrete(-1)));
    }

    #[test]
    fn box_validates_interior_point_and_shape() {
        let s = SpaceSpec::boxed(vec![2], vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!(validate(&s, &Value::Box(vec![0.0, 0.0])));
        assert!(!validate(&s, &Value::Box(vec![0.0, 0.0, 0.0])));
        assert!(!validate(&s, &Value::Box(vec![0.0, 1.5])));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SpaceSpec::discrete(0).is_err());
        assert!(SpaceSpec::boxed(vec![], vec![], vec![]).is_err());
        assert!(SpaceSpec::boxed(vec![1], vec![2.0], vec![1.0]).is_err());
    }

    #[test]
    fn single_element_discrete_always_zero() {
        let s = SpaceSpec::discrete(1).unwrap();
        let mut rng = Pcg64::seeded(0);
        for _ in 0..32 {
            assert_eq!(sample_space(&s, &mut rng).unwrap(), Value::Discrete(0));
        }
    }

    #[test]
    fn degenerate_box_interval_is_constant() {
        let s = SpaceSpec::boxed(vec![1], vec![0.5], vec![0.5]).unwrap();
        let mut rng = Pcg64::seeded(0);
        for _ in 0..32 {
            assert_eq!(sample_space(&s, &mut rng).unwrap(), Value::Box(vec![0.5]));
        }
    }

    #[test]
    fn unbounded_box_cannot_be_sampled() {
        let s = SpaceSpec::boxed(vec![1], vec![f32::NEG_INFINITY], vec![1.0]).unwrap();
        let mut rng = Pcg64::seeded(0);
        assert!(matches!(
            sample_space(&s, &mut rng),
            Err(CoreError::UnboundedSample)
        ));
    }

    #[test]
    fn discrete_sampling_is_uniform_at_one_million_draws() {
        let s = SpaceSpec::discrete(4).unwrap();
        let mut rng = Pcg64::seeded(123);
        let mut counts = [0u64; 4];
        let n = 1_000_000;
        for _ in 0..n {
            if let Value::Discrete(a) = sample_space(&s, &mut rng).unwrap() {
                counts[a as usize] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.25).abs() < 0.005, "freq {freq}");
        }
    }

    fn arb_space() -> impl Strategy<Value = SpaceSpec> {
        prop_oneof![
            (1u64..16).prop_map(|n| SpaceSpec::discrete(n).unwrap()),
            (1usize..5, -10.0f32..0.0, 0.01f32..10.0).prop_map(|(d, lo, span)| {
                SpaceSpec::boxed_uniform(vec![d], lo, lo + span).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn every_sample_validates(space in arb_space(), seed in 0u64..1000) {
            let mut rng = Pcg64::seeded(seed);
            for _ in 0..16 {
                let v = sample_space(&space, &mut rng).unwrap();
                prop_assert!(validate(&space, &v));
            }
        }
    }
}
