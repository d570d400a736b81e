use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorics::MAX_COUPONS;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rational_serde, Rational, Scalar};

/// Slack on `sum p_i <= 1` granted to weights that came from `f64` input.
pub const FLOAT_MASS_TOLERANCE: f64 = 1e-12;

/// Drawing probabilities `p_1..p_n` of the non-null coupons. The null mass
/// `p_0` is always derived from the weights.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DrawDistribution {
    weights: Vec<Rational>,
}

impl DrawDistribution {
    /// Validates exact weights: each in `(0, 1)`, total at most 1.
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        Self::validate_entries(&weights)?;
        let total: Rational = weights.iter().sum();
        if total > Rational::one() {
            return Err(Error::MassExceedsOne {
                total: format_rational(&total),
            });
        }
        Ok(DrawDistribution { weights })
    }

    /// Builds from doubles, each converted to its exact binary value. A total
    /// up to `1 + 1e-12` is accepted as representation noise; the null mass is
    /// then `max(0, 1 - total)`.
    pub fn from_f64(weights: &[f64]) -> Result<Self> {
        let mut exact = Vec::with_capacity(weights.len());
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidWeight {
                    index,
                    value: w.to_string(),
                });
            }
            exact.push(Rational::from_float(w).expect("finite"));
        }
        Self::validate_entries(&exact)?;
        let total: f64 = weights.iter().sum();
        if total > 1.0 + FLOAT_MASS_TOLERANCE {
            return Err(Error::MassExceedsOne {
                total: total.to_string(),
            });
        }
        Ok(DrawDistribution { weights: exact })
    }

    /// Parses a comma-separated list of `a/b` or decimal literals.
    pub fn parse(list: &str) -> Result<Self> {
        let mut weights = Vec::new();
        let mut offset = 0;
        for item in list.split(',') {
            let w = parse_rational(item).map_err(|e| match e {
                Error::Parse { position, reason, .. } => Error::Parse {
                    input: list.to_string(),
                    position: offset + position,
                    reason: format!("weight {}: {reason}", weights.len() + 1),
                },
                other => other,
            })?;
            weights.push(w);
            offset += item.len() + 1;
        }
        Self::new(weights)
    }

    fn validate_entries(weights: &[Rational]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if weights.len() > MAX_COUPONS {
            return Err(Error::TooManyCoupons {
                n: weights.len(),
                max: MAX_COUPONS,
            });
        }
        for (index, w) in weights.iter().enumerate() {
            if !w.is_positive() || *w >= Rational::one() {
                return Err(Error::InvalidWeight {
                    index,
                    value: format_rational(w),
                });
            }
        }
        Ok(())
    }

    /// Uniform distribution `u` on `n` coupons.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::almost_uniform(n, &Rational::zero())
    }

    /// Almost-uniform distribution `v`: every coupon has `(1 - v0) / n`.
    pub fn almost_uniform(n: usize, v0: &Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDistribution);
        }
        if v0.is_negative() || *v0 >= Rational::one() {
            return Err(Error::OutOfRange(format!(
                "null mass {} must lie in [0, 1)",
                format_rational(v0)
            )));
        }
        let share = (Rational::one() - v0) / Rational::from_integer(BigInt::from(n));
        if n == 1 && share == Rational::one() {
            return Err(Error::InvalidWeight {
                index: 0,
                value: format_rational(&share),
            });
        }
        Self::new(vec![share; n])
    }

    /// The almost-uniform vector with the same `n` and null mass.
    pub fn flattened(&self) -> DrawDistribution {
        DrawDistribution {
            weights: vec![self.flat_share(); self.len()],
        }
    }

    /// `(1 - p_0) / n`.
    pub fn flat_share(&self) -> Rational {
        (Rational::one() - self.null_mass()) / Rational::from_integer(BigInt::from(self.len()))
    }

    pub fn is_almost_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> Result<&Rational> {
        self.weights.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.len(),
        })
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// `p_0 = max(0, 1 - sum p_i)`.
    pub fn null_mass(&self) -> Rational {
        let p0 = Rational::one() - self.total();
        if p0.is_negative() {
            Rational::zero()
        } else {
            p0
        }
    }

    /// Weights converted into the scalar type of an arithmetic mode.
    pub fn weights_as<S: Scalar>(&self) -> Vec<S> {
        self.weights.iter().map(S::from_rational).collect()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights_as::<f64>()
    }

    /// `P_J` for the 0-based indices in `subset`; `P_empty = 0`.
    pub fn subset_mass(&self, subset: &[usize]) -> Result<Rational> {
        let mut mass = Rational::zero();
        for &j in subset {
            mass += self.weight(j)?;
        }
        Ok(mass)
    }

    /// `P_J` for a bitmask over 0-based indices.
    pub fn mask_mass(&self, mask: u64) -> Result<Rational> {
        if self.len() < 64 && mask >> self.len() != 0 {
            return Err(Error::IndexOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                len: self.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, w)| w)
            .sum())
    }

    /// `p^{(l)}`: the vector with entry `l` removed. Its null mass is
    /// `p_0 + p_l`.
    pub fn without(&self, index: usize) -> Result<DrawDistribution> {
        self.weight(index)?;
        if self.len() == 1 {
            return Err(Error::EmptyDistribution);
        }
        let mut weights = self.weights.clone();
        weights.remove(index);
        Ok(DrawDistribution { weights })
    }

    /// Same weights reordered by `order` (a permutation of `0..n`).
    pub fn permuted(&self, order: &[usize]) -> Result<DrawDistribution> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() {
            return Err(Error::OutOfRange("permutation length mismatch".into()));
        }
        let mut weights = Vec::with_capacity(self.len());
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::OutOfRange("not a permutation".into()));
            }
            weights.push(self.weights[i].clone());
        }
        Ok(DrawDistribution { weights })
    }

    /// Replaces two entries, keeping the rest. Used by mixing; revalidates.
    pub(crate) fn with_pair(&self, i: usize, wi: Rational, j: usize, wj: Rational) -> Result<DrawDistribution> {
        let mut weights = self.weights.clone();
        weights[i] = wi;
        weights[j] = wj;
        DrawDistribution::new(weights)
    }

    /// Comma-separated `a/b` rendering, the inverse of [`DrawDistribution::parse`].
    pub fn to_list_string(&self) -> String {
        self.weights.iter().map(format_rational).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Debug for DrawDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DrawDistribution({})", self.to_list_string())
    }
}

impl fmt::Display for DrawDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_list_string())
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    #[serde(with = "rational_serde::vec")]
    weights: Vec<Rational>,
    #[serde(with = "rational_serde", default = "Rational::zero", skip_deserializing)]
    null_mass: Rational,
}

impl Serialize for DrawDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionRepr {
            weights: self.weights.clone(),
            null_mass: self.null_mass(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DrawDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(deserializer)?;
        DrawDistribution::new(repr.weights).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn paper_example() -> DrawDistribution {
        DrawDistribution::parse("1/16,1/6,1/4,1/8,7/24").unwrap()
    }

    #[test]
    fn full_support_uniform_has_no_null_mass() {
        let p = DrawDistribution::from_f64(&[0.5, 0.5]).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.null_mass().is_zero());
    }

    #[test]
    fn worked_example_null_mass() {
        let p = paper_example();
        assert_eq!(p.len(), 5);
        assert_eq!(p.null_mass(), rational(5, 48));
        assert_eq!(p.flat_share(), rational(43, 240));
    }

    #[test]
    fn rejects_excess_mass_and_boundary_weights() {
        assert!(matches!(
            DrawDistribution::from_f64(&[0.5, 0.6]),
            Err(Error::MassExceedsOne { .. })
        ));
        assert!(matches!(
            DrawDistribution::parse("1/2,0"),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            DrawDistribution::parse("1"),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
        assert!(matches!(DrawDistribution::new(vec![]), Err(Error::EmptyDistribution)));
        assert!(matches!(
            DrawDistribution::parse("1/2,1/2,1/1000000"),
            Err(Error::MassExceedsOne { .. })
        ));
    }

    #[test]
    fn float_noise_within_tolerance_is_accepted() {
        let p = DrawDistribution::from_f64(&[0.1, 0.2, 0.7 + 1e-13]).unwrap();
        assert!(p.null_mass().is_zero());
        assert!(DrawDistribution::from_f64(&[0.5, 0.5 + 1e-9]).is_err());
    }

    #[test]
    fn parse_reports_offset_of_bad_weight() {
        match DrawDistribution::parse("1/2,1/x") {
            Err(Error::Parse { position, reason, .. }) => {
                assert_eq!(position, 6);
                assert!(reason.contains("weight 2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subset_masses() {
        let p = DrawDistribution::from_f64(&[0.3, 0.5]).unwrap();
        assert!(p.subset_mass(&[]).unwrap().is_zero());
        assert_eq!(p.subset_mass(&[0, 1]).unwrap(), p.weights()[0].clone() + p.weights()[1].clone());
        assert!(matches!(p.subset_mass(&[2]), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
        let q = paper_example();
        assert_eq!(q.subset_mass(&[3, 4]).unwrap(), rational(5, 12));
        assert_eq!(q.mask_mass(0b11000).unwrap(), rational(5, 12));
        assert!(q.mask_mass(1 << 5).is_err());
    }

    #[test]
    fn removal_view_moves_mass_to_null() {
        let q = paper_example();
        let r = q.without(4).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.null_mass(), rational(5, 48) + rational(7, 24));
        assert!(DrawDistribution::parse("1/2").unwrap().without(0).is_err());
    }

    #[test]
    fn almost_uniform_constructors() {
        let v = DrawDistribution::almost_uniform(4, &rational(1, 2)).unwrap();
        assert_eq!(v.weights(), &vec![rational(1, 8); 4][..]);
        assert!(v.is_almost_uniform());
        assert_eq!(paper_example().flattened(), DrawDistribution::almost_uniform(5, &rational(5, 48)).unwrap());
        assert!(DrawDistribution::uniform(1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = paper_example();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains(r#""null_mass":{"numerator":"5","denominator":"48"}"#));
        let back: DrawDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(DrawDistribution::parse(&p.to_list_string()).unwrap(), p);
    }
}
