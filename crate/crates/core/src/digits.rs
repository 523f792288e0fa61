//! Digit statistics: the Gauss-Kuzmin law and the limiting distribution of
//! the n-th digit of a random semi-regular continued fraction.
//!
//! Under stationarity the digit equals `N` when the current point lies in
//! one of four cells, selected by the next two map bits `(ω1, ω2)`:
//!
//! | (ω1, ω2) | cell                        | weight     |
//! |----------|-----------------------------|------------|
//! | (0, 0)   | (1/(N+1), 1/N]              | (1-ε)²     |
//! | (0, 1)   | (1/N, 1/(N-1)]              | (1-ε)ε     |
//! | (1, 0)   | [1 - 1/N, 1 - 1/(N+1))      | ε(1-ε)     |
//! | (1, 1)   | [1 - 1/(N-1), 1 - 1/N)      | ε²         |
//!
//! The cells involving `1/(N-1)` are empty for `N = 1`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::funcspace::SpectralFn;
use crate::perturbation::PerturbationSeries;

pub const DEFAULT_N_MAX: usize = 100;

/// Probabilities below this are flagged as truncation artefacts.
pub const NEGATIVE_FLAG: f64 = 1e-9;

/// Slack on the normalization of a digit law.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// `P(d = N) = log₂((1 + 1/N) / (1 + 1/(N+1)))`.
pub fn gauss_kuzmin(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("digits start at 1".into()));
    }
    let n = n as f64;
    // (1+1/N)/(1+1/(N+1)) = 1 + 1/(N(N+2))
    Ok((1.0 / (n * (n + 2.0))).ln_1p() / LN_2)
}

/// `Σ_{N > n_max} P(d = N) = log₂(1 + 1/(n_max+1))`.
pub fn gauss_kuzmin_tail(n_max: u64) -> f64 {
    (1.0 / (n_max as f64 + 1.0)).ln_1p() / LN_2
}

/// Rational endpoint `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Sign of `x - num/den`, exact.
    fn compare(self, x: f64) -> f64 {
        (self.den as f64).mul_add(x, -(self.num as f64))
    }
}

/// Interval with rational endpoints and explicit closure at each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellInterval {
    pub lo: Ratio,
    pub hi: Ratio,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl CellInterval {
    /// Exact membership test.
    pub fn contains(&self, x: f64) -> bool {
        let above = self.lo.compare(x);
        let below = self.hi.compare(x);
        let lo_ok = if self.lo_closed { above >= 0.0 } else { above > 0.0 };
        let hi_ok = if self.hi_closed { below <= 0.0 } else { below < 0.0 };
        lo_ok && hi_ok
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo.value(), self.hi.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitCell {
    /// Map bits `(ω1, ω2)`.
    pub omega: (u8, u8),
    /// `None` when the cell is empty.
    pub interval: Option<CellInterval>,
    /// Exponents `(i, j)` of the weight `(1-ε)^i ε^j`.
    pub exponents: (u32, u32),
}

impl DigitCell {
    pub fn weight(&self, eps: f64) -> f64 {
        (1.0 - eps).powi(self.exponents.0 as i32) * eps.powi(self.exponents.1 as i32)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.interval.is_some_and(|c| c.contains(x))
    }

    /// `∫_cell h`, zero for an empty cell.
    pub fn integral(&self, h: &SpectralFn) -> Result<f64> {
        match self.interval {
            None => Ok(0.0),
            Some(c) => {
                let (lo, hi) = c.bounds();
                h.integrate_on(lo, hi)
            }
        }
    }
}

/// The four cells on which the digit equals `digit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitCellDecomposition {
    pub digit: u64,
    pub cells: [DigitCell; 4],
}

impl DigitCellDecomposition {
    pub fn cell(&self, omega1: u8, omega2: u8) -> &DigitCell {
        &self.cells[(2 * omega1 + omega2) as usize]
    }

    /// `Σ weight(ε) ∫_cell h`.
    pub fn weighted_integral(&self, eps: f64, h: &SpectralFn) -> Result<f64> {
        self.cells
            .iter()
            .map(|c| Ok(c.weight(eps) * c.integral(h)?))
            .sum()
    }
}

pub fn digit_cells(n: u64) -> Result<DigitCellDecomposition> {
    if n == 0 {
        return Err(Error::Domain("digits start at 1".into()));
    }
    let gauss = |a: u64| CellInterval {
        lo: Ratio::new(1, a + 1),
        hi: Ratio::new(1, a),
        lo_closed: false,
        hi_closed: true,
    };
    let renyi = |a: u64| CellInterval {
        lo: Ratio::new(a - 1, a),
        hi: Ratio::new(a, a + 1),
        lo_closed: true,
        hi_closed: false,
    };
    let shifted = n.checked_sub(1).filter(|&a| a >= 1);
    Ok(DigitCellDecomposition {
        digit: n,
        cells: [
            DigitCell { omega: (0, 0), interval: Some(gauss(n)), exponents: (2, 0) },
            DigitCell { omega: (0, 1), interval: shifted.map(gauss), exponents: (1, 1) },
            DigitCell { omega: (1, 0), interval: Some(renyi(n)), exponents: (1, 1) },
            DigitCell { omega: (1, 1), interval: shifted.map(renyi), exponents: (0, 2) },
        ],
    })
}

fn warn_if_out_of_range(eps: f64) {
    let limit = bounds::eps_range(2).expect("i = 2 is admissible");
    if !(0.0..=limit).contains(&eps) {
        log::warn!("mixing probability {eps} outside the admissible range [0, {limit:.7}]");
    }
}

/// Limiting probability that a digit equals `n`, from the series at `eps`.
pub fn digit_probability(n: u64, eps: f64, s: &PerturbationSeries) -> Result<f64> {
    warn_if_out_of_range(eps);
    digit_cells(n)?.weighted_integral(eps, &s.evaluate(eps))
}

/// Same as [`digit_probability`] with a given density in place of the series.
pub fn digit_probability_for_density(n: u64, eps: f64, h: &SpectralFn) -> Result<f64> {
    digit_cells(n)?.weighted_integral(eps, h)
}

/// Probabilities of digits `1..=n_max` and the remaining mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitLaw {
    pub eps: f64,
    pub order: usize,
    pub probs: Vec<f64>,
    /// `1 - Σ probs`.
    pub tail_mass: f64,
    /// Mass of digits above `n_max` integrated directly over the tail cells.
    pub analytic_tail: f64,
    /// Digits whose probability fell below `-NEGATIVE_FLAG`.
    pub flagged: Vec<u64>,
}

impl DigitLaw {
    pub fn n_max(&self) -> usize {
        self.probs.len()
    }

    /// `P(d = n)` for `1 ≤ n ≤ n_max`.
    pub fn prob(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.probs.get(i).copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail_mass
    }
}

pub fn digit_law(eps: f64, s: &PerturbationSeries, n_max: usize) -> Result<DigitLaw> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    warn_if_out_of_range(eps);
    let h = s.evaluate(eps);
    let probs = (1..=n_max as u64)
        .map(|n| digit_cells(n)?.weighted_integral(eps, &h))
        .collect::<Result<Vec<_>>>()?;
    let flagged: Vec<u64> = probs
        .iter()
        .enumerate()
        .filter(|(_, p)| **p < -NEGATIVE_FLAG)
        .map(|(i, _)| i as u64 + 1)
        .collect();
    if !flagged.is_empty() {
        log::warn!("negative digit probabilities for N in {flagged:?}; the series is truncated too early");
    }
    let mut tail_mass = 1.0 - probs.iter().sum::<f64>();
    if tail_mass < -NORMALIZATION_TOL {
        return Err(Error::Normalization { tail: tail_mass });
    }
    if tail_mass < 0.0 {
        tail_mass = 0.0;
    }
    let m = n_max as f64;
    let one_minus = 1.0 - eps;
    let analytic_tail = one_minus * one_minus * h.integrate_on(0.0, 1.0 / (m + 1.0))?
        + one_minus * eps * h.integrate_on(0.0, 1.0 / m)?
        + eps * one_minus * h.integrate_on(m / (m + 1.0), 1.0)?
        + eps * eps * h.integrate_on((m - 1.0) / m, 1.0)?;
    Ok(DigitLaw { eps, order: s.order(), probs, tail_mass, analytic_tail, flagged })
}
