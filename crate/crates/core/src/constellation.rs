//! QAM/PAM symbol alphabets and nearest-symbol slicing.
//!
//! A square QAM constellation factors into one PAM alphabet per real
//! dimension, so the whole detection pipeline works on real PAM levels
//! {±1, ±3, …, ±(√order − 1)}. Levels are kept as unnormalized integers;
//! energy normalization happens in the SNR → noise-variance mapping.

use crate::{Error, Result};

/// A finite real symbol alphabet together with its mean symbol energy.
///
/// Immutable after construction and safe to share across trial workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    levels: Vec<f64>,
    energy: f64,
}

impl Constellation {
    /// PAM alphabet used per real dimension of a square QAM constellation.
    ///
    /// `order` is the complex QAM order and must be a power of 4. The
    /// returned alphabet has √order levels; e.g. 16-QAM gives {−3, −1, +1, +3}
    /// with mean energy 5.
    pub fn make_qam(order: u32) -> Result<Self> {
        if !is_power_of_four(order) {
            return Err(Error::InvalidArgument(format!(
                "QAM order must be a power of 4 (at least 4), got {order}"
            )));
        }
        let side = (order as f64).sqrt().round() as i64;
        let levels = (0..side).map(|k| (2 * k + 1 - side) as f64).collect();
        Ok(Self::from_levels(levels))
    }

    fn from_levels(levels: Vec<f64>) -> Self {
        debug_assert!(levels.len() >= 2);
        debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
        let energy = levels.iter().map(|a| a * a).sum::<f64>() / levels.len() as f64;
        Self { levels, energy }
    }

    /// Symbol amplitudes, sorted ascending.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of symbols in the alphabet.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Mean of the squared levels, computed from the stored levels.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Nearest symbol to `v`; ties break toward the smaller level.
    pub fn slice(&self, v: f64) -> Result<f64> {
        Ok(self.levels[self.slice_index(v)?])
    }

    /// Index of the nearest symbol to `v`; ties break toward the smaller level.
    pub fn slice_index(&self, v: f64) -> Result<usize> {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot slice non-finite value {v}"
            )));
        }
        let mut best = 0;
        let mut best_dist = (v - self.levels[0]).abs();
        for (i, a) in self.levels.iter().enumerate().skip(1) {
            let d = (v - a).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        Ok(best)
    }

    /// Index of an exact alphabet member, if present.
    pub fn index_of(&self, symbol: f64) -> Option<usize> {
        self.levels.iter().position(|&a| a == symbol)
    }
}

fn is_power_of_four(x: u32) -> bool {
    x >= 4 && x.is_power_of_two() && x.trailing_zeros().is_multiple_of(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qam4_is_bpsk_per_dimension() {
        let c = Constellation::make_qam(4).unwrap();
        assert_eq!(c.levels(), &[-1.0, 1.0]);
        assert_eq!(c.energy(), 1.0);
    }

    #[test]
    fn qam16_levels_and_energy() {
        let c = Constellation::make_qam(16).unwrap();
        assert_eq!(c.levels(), &[-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(c.energy(), 5.0);
    }

    #[test]
    fn qam64_levels_and_energy() {
        let c = Constellation::make_qam(64).unwrap();
        let expected: Vec<f64> = (-7..=7).step_by(2).map(|k| k as f64).collect();
        assert_eq!(c.levels(), expected.as_slice());
        assert_eq!(c.energy(), 21.0);
    }

    #[test]
    fn energy_closed_form_per_order() {
        // mean PAM energy of square QAM is (order − 1) / 3
        for order in [4u32, 16, 64, 256] {
            let c = Constellation::make_qam(order).unwrap();
            assert!((c.energy() - (order as f64 - 1.0) / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_four() {
        for order in [0u32, 1, 2, 8, 32, 100] {
            assert!(matches!(
                Constellation::make_qam(order),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn slice_picks_nearest() {
        let c = Constellation::make_qam(4).unwrap();
        assert_eq!(c.slice(0.3).unwrap(), 1.0);
        let c16 = Constellation::make_qam(16).unwrap();
        assert_eq!(c16.slice(-1.0).unwrap(), -1.0);
    }

    #[test]
    fn slice_tie_breaks_toward_smaller_level() {
        let c = Constellation::make_qam(4).unwrap();
        assert_eq!(c.slice(0.0).unwrap(), -1.0);
        let c16 = Constellation::make_qam(16).unwrap();
        assert_eq!(c16.slice(2.0).unwrap(), 1.0);
        assert_eq!(c16.slice(-2.0).unwrap(), -3.0);
    }

    #[test]
    fn slice_rejects_non_finite() {
        let c = Constellation::make_qam(4).unwrap();
        assert!(c.slice(f64::NAN).is_err());
        assert!(c.slice(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn slice_is_idempotent_on_members(order in prop::sample::select(vec![4u32, 16, 64, 256]), idx in 0usize..16) {
            let c = Constellation::make_qam(order).unwrap();
            let a = c.levels()[idx % c.len()];
            prop_assert_eq!(c.slice(a).unwrap(), a);
        }

        #[test]
        fn slice_always_returns_a_member(v in -100.0f64..100.0) {
            let c = Constellation::make_qam(64).unwrap();
            let s = c.slice(v).unwrap();
            prop_assert!(c.index_of(s).is_some());
        }
    }
}
