//! Distance measures and the closed ε-ball around an instance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Hamming distance: number of changed coordinates.
    L0,
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl Norm {
    pub const ALL: [Norm; 4] = [Norm::L0, Norm::L1, Norm::L2, Norm::LInf];

    pub fn as_str(self) -> &'static str {
        match self {
            Norm::L0 => "l0",
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        }
    }

    /// Contribution of a single coordinate difference to the running
    /// accumulator (see [`Norm::finish`]).
    #[inline]
    pub fn accumulate(self, acc: f64, diff: f64) -> f64 {
        let a = diff.abs();
        match self {
            Norm::L0 => acc + if a != 0.0 { 1.0 } else { 0.0 },
            Norm::L1 => acc + a,
            Norm::L2 => acc + a * a,
            Norm::LInf => acc.max(a),
        }
    }

    /// Turns an accumulator into a distance.
    #[inline]
    pub fn finish(self, acc: f64) -> f64 {
        match self {
            Norm::L2 => acc.sqrt(),
            _ => acc,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l0" => Ok(Norm::L0),
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "l-inf" | "inf" => Ok(Norm::LInf),
            other => Err(Error::Usage(format!(
                "unknown norm {other:?} (expected l0, l1, l2 or linf)"
            ))),
        }
    }
}

/// `‖x − v‖_p`.
pub fn distance(x: &[f64], v: &[f64], norm: Norm) -> Result<f64> {
    if x.len() != v.len() {
        return Err(Error::Usage(format!(
            "distance between points of length {} and {}",
            x.len(),
            v.len()
        )));
    }
    let acc = x.iter().zip(v).fold(0.0, |acc, (a, b)| norm.accumulate(acc, a - b));
    Ok(norm.finish(acc))
}

/// A closed ball `{x : ‖x − v‖_p ≤ ε}`; the centre is supplied by the
/// explanation problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    norm: Norm,
    epsilon: f64,
}

impl Ball {
    /// Radius must be finite and nonnegative; for `L0` it must be an integer
    /// count of changed features.
    pub fn new(norm: Norm, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Usage(format!(
                "epsilon must be a finite nonnegative number, got {epsilon}"
            )));
        }
        if norm == Norm::L0 && epsilon.fract() != 0.0 {
            return Err(Error::Usage(format!(
                "l0 radius counts changed features and must be an integer, got {epsilon}"
            )));
        }
        Ok(Self { norm, epsilon })
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Closed-ball membership given an accumulator value.
    #[inline]
    pub fn admits_acc(&self, acc: f64) -> bool {
        self.norm.finish(acc) <= self.epsilon
    }

    pub fn contains(&self, x: &[f64], centre: &[f64]) -> Result<bool> {
        Ok(distance(x, centre, self.norm)? <= self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_unit_change_l1() {
        assert_eq!(distance(&[0.0, 1.0, 1.0], &[1.0, 1.0, 1.0], Norm::L1).unwrap(), 1.0);
    }

    #[test]
    fn identity_is_zero_for_every_norm() {
        for n in Norm::ALL {
            assert_eq!(distance(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], n).unwrap(), 0.0);
        }
    }

    #[test]
    fn chebyshev_takes_max() {
        assert_eq!(distance(&[0.5, 2.0, 1.0], &[1.0, 1.0, 1.0], Norm::LInf).unwrap(), 1.0);
    }

    #[test]
    fn hamming_and_euclid() {
        assert_eq!(distance(&[0.0, 3.0, 1.0], &[1.0, 1.0, 1.0], Norm::L0).unwrap(), 2.0);
        assert_eq!(distance(&[4.0, 1.0], &[1.0, 5.0], Norm::L2).unwrap(), 5.0);
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        assert!(matches!(distance(&[0.0], &[0.0, 1.0], Norm::L1), Err(Error::Usage(_))));
    }

    #[test]
    fn l0_radius_must_be_integral() {
        assert!(Ball::new(Norm::L0, 1.5).is_err());
        assert!(Ball::new(Norm::L0, 2.0).is_ok());
        assert!(Ball::new(Norm::L1, 1.5).is_ok());
        assert!(Ball::new(Norm::L2, -0.1).is_err());
        assert!(Ball::new(Norm::LInf, f64::NAN).is_err());
    }

    #[test]
    fn ball_is_closed() {
        let b = Ball::new(Norm::L1, 1.0).unwrap();
        assert!(b.contains(&[0.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(!b.contains(&[0.0, 0.5], &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn norm_parsing() {
        assert_eq!("LINF".parse::<Norm>().unwrap(), Norm::LInf);
        assert!("l3".parse::<Norm>().is_err());
    }

    fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|m| {
            let c = prop::collection::vec(-10.0f64..10.0, m);
            (c.clone(), c.clone(), c)
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_iff_equal((x, v, _w) in triple()) {
            for n in Norm::ALL {
                let d = distance(&x, &v, n).unwrap();
                prop_assert_eq!(d, distance(&v, &x, n).unwrap());
                prop_assert_eq!(d == 0.0, x == v);
            }
        }

        #[test]
        fn triangle_inequality((x, y, z) in triple()) {
            for n in [Norm::L1, Norm::L2, Norm::LInf] {
                let xz = distance(&x, &z, n).unwrap();
                let xy = distance(&x, &y, n).unwrap();
                let yz = distance(&y, &z, n).unwrap();
                prop_assert!(xz <= xy + yz + 1e-9);
            }
        }
    }
}
