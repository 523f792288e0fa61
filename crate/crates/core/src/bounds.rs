//! Lasota-Yorke constants of the annealed Gauss-Rényi operator in `C^i`.
//!
//! ```text
//! θ₁(i)   = ζ(2i)² - (1 - 2^{-2i})
//! C_i     = ζ(2i)²
//! ε_max   = (1 - θ₁) / (C_i - θ₁)
//! ```
//!
//! For `ε ≤ ε_max` the contraction factor `(1-ε)θ₁ + εC_i` stays below one.
//! Only `i ≥ 2` is covered; the `i = 1` range has no explicit constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::riemann_zeta;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    pub i: u32,
    pub theta1: f64,
    pub ci: f64,
    pub eps_max: f64,
}

impl SpectralBounds {
    pub fn for_index(i: u32) -> Result<Self> {
        Ok(SpectralBounds { i, theta1: theta1(i)?, ci: ci(i)?, eps_max: eps_range(i)? })
    }

    /// `(1-ε)θ₁ + εC_i`.
    pub fn contraction(&self, eps: f64) -> f64 {
        (1.0 - eps) * self.theta1 + eps * self.ci
    }
}

/// ζ(2i), closed even-zeta forms for i ≤ 6.
pub fn zeta_even(i: u32) -> f64 {
    match i {
        1 => PI.powi(2) / 6.0,
        2 => PI.powi(4) / 90.0,
        3 => PI.powi(6) / 945.0,
        4 => PI.powi(8) / 9450.0,
        5 => PI.powi(10) / 93_555.0,
        6 => 691.0 * PI.powi(12) / 638_512_875.0,
        _ => riemann_zeta(2.0 * i as f64),
    }
}

fn check_index(i: u32) -> Result<()> {
    match i {
        0 => Err(Error::Domain("derivative index must be positive".into())),
        1 => Err(Error::DeferredIndex),
        _ => Ok(()),
    }
}

pub fn theta1(i: u32) -> Result<f64> {
    check_index(i)?;
    let z = zeta_even(i);
    Ok(z * z - (1.0 - 0.25f64.powi(i as i32)))
}

pub fn ci(i: u32) -> Result<f64> {
    check_index(i)?;
    let z = zeta_even(i);
    Ok(z * z)
}

pub fn eps_range(i: u32) -> Result<f64> {
    let t = theta1(i)?;
    let c = ci(i)?;
    Ok((1.0 - t) / (c - t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_two_values() {
        assert!((theta1(2).unwrap() - 0.233_922_9).abs() < 1e-6);
        assert!((ci(2).unwrap() - 1.171_422_9).abs() < 1e-6);
        assert!((eps_range(2).unwrap() - 0.817_148_9).abs() < 1e-6);
        let z4 = PI.powi(4) / 90.0;
        assert!((theta1(2).unwrap() - (z4 * z4 - 15.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn index_three_and_decay() {
        let z6 = PI.powi(6) / 945.0;
        assert!((theta1(3).unwrap() - (z6 * z6 - 63.0 / 64.0)).abs() < 1e-15);
        assert!((theta1(3).unwrap() - 0.050_611_9).abs() < 1e-6);
        assert!(theta1(6).unwrap() < 1e-3);
        assert!(eps_range(30).unwrap() > 0.999_999);
    }

    #[test]
    fn closed_forms_match_summation() {
        for i in 1..=6 {
            assert!((zeta_even(i) - riemann_zeta(2.0 * i as f64)).abs() < 1e-15, "i={i}");
        }
    }

    #[test]
    fn deferred_and_invalid_indices() {
        assert_eq!(theta1(1), Err(Error::DeferredIndex));
        assert_eq!(eps_range(1), Err(Error::DeferredIndex));
        assert!(matches!(ci(0), Err(Error::Domain(_))));
    }

    #[test]
    fn monotone_in_index() {
        let mut prev = SpectralBounds::for_index(2).unwrap();
        for i in 3..=12 {
            let b = SpectralBounds::for_index(i).unwrap();
            assert!(b.theta1 < prev.theta1 && b.theta1 > 0.0);
            assert!(b.ci < prev.ci && b.ci > 1.0);
            assert!(b.eps_max > prev.eps_max && b.eps_max <= 1.0);
            prev = b;
        }
    }

    #[test]
    fn contraction_threshold() {
        for i in 2..=8 {
            let b = SpectralBounds::for_index(i).unwrap();
            for k in 0..100 {
                let eps = b.eps_max * k as f64 / 100.0;
                assert!(b.contraction(eps) < 1.0);
            }
            assert!(b.contraction(b.eps_max) >= 1.0 - 1e-15);
        }
    }

    #[test]
    fn two_step_branch_sums_below_theta1() {
        use crate::maps::{two_step_derivative, BranchId};
        for i in 2..=4u32 {
            let bound = theta1(i).unwrap();
            for s in 0..20 {
                let x = s as f64 / 19.0;
                let mut total = 0.0;
                'outer: for n in 1..=10_000u64 {
                    let mut row = 0.0;
                    for k in 1..=10_000u64 {
                        let d = two_step_derivative(0, 0, BranchId::new(n).unwrap(), BranchId::new(k).unwrap(), x, 1).unwrap();
                        let term = d.powi(i as i32);
                        row += term;
                        if term < 1e-22 {
                            break;
                        }
                    }
                    total += row;
                    if row < 1e-22 {
                        break 'outer;
                    }
                }
                assert!(total <= bound + 1e-6, "i={i} x={x}: {total} vs {bound}");
            }
        }
    }
}
