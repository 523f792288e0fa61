//! Independent ground truth: Monte Carlo simulation of the random map and its
//! digit process, and brute-force branch sums without any tail model.
//!
//! Every sample chain starts from a uniform point. Samples are grouped in
//! chunks of [`CHUNK`]; chunk `c` draws from a ChaCha8 generator seeded with
//! the master seed on stream `c`, so results are bit-identical across
//! execution modes and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::funcspace::SpectralFn;
use crate::maps::{self, BranchId, MapKind};

pub const DEFAULT_BURN_IN: usize = 100;
pub const MIN_DENSITY_BURN_IN: usize = 50;
pub const MIN_BRUTE_FORCE_BRANCHES: u64 = 100_000;

/// Samples per generator stream.
pub const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub eps: f64,
    pub samples: usize,
    /// Index `n` of the recorded digit `d_n`.
    pub n_index: usize,
    pub seed: u64,
    pub burn_in: usize,
    /// Prepended bit `ω'_1`. The digit process uses 0.
    pub lead_bit: u8,
}

impl SimConfig {
    pub fn new(eps: f64, samples: usize, n_index: usize, seed: u64) -> Result<Self> {
        let cfg = SimConfig { eps, samples, n_index, seed, burn_in: DEFAULT_BURN_IN, lead_bit: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_lead_bit(mut self, bit: u8) -> Result<Self> {
        self.lead_bit = bit;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!("eps = {} outside [0,1]", self.eps)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.n_index == 0 {
            return Err(Error::InvalidParameter("digit index starts at 1".into()));
        }
        if self.lead_bit > 1 {
            return Err(Error::InvalidParameter("lead bit must be 0 or 1".into()));
        }
        Ok(())
    }

    fn chunks(&self) -> usize {
        self.samples.div_ceil(CHUNK)
    }

    fn chunk_len(&self, c: usize) -> usize {
        CHUNK.min(self.samples - c * CHUNK)
    }

    fn chunk_rng(&self, c: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(c as u64);
        rng
    }
}

/// One application of `T0` (bit 0) or `T1` (bit 1), with `T0(0) = 0` and
/// `T1(1) = 0`.
pub fn step(bit: u8, x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    maps::forward(MapKind::from_bit(bit), x).0
}

/// `b(ω, x) = k + ω2` where `ω1 + (-1)^ω1 x ∈ (1/(k+1), 1/k]`.
pub fn digit_b(omega1: u8, omega2: u8, x: f64) -> Result<u64> {
    if omega1 > 1 || omega2 > 1 {
        return Err(Error::Domain("map bits must be 0 or 1".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("point {x} outside [0,1]")));
    }
    let k = match omega1 {
        0 if x == 0.0 => return Err(Error::UndefinedDigit),
        0 => maps::gauss_digit(x),
        _ if x == 1.0 => return Err(Error::UndefinedDigit),
        _ => maps::renyi_digit(x),
    };
    Ok(k.saturating_add(omega2 as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub eps: f64,
    pub n_index: usize,
    pub seed: u64,
    pub lead_bit: u8,
    /// `counts[i]` is the number of samples with digit `i + 1`.
    pub counts: Vec<u64>,
    /// Digits above `n_max` together with undefined digits.
    pub overflow: u64,
    /// Undefined digits (the chain hit an endpoint exactly).
    pub undefined: u64,
    pub total: u64,
}

impl EmpiricalLaw {
    pub fn n_max(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, n: usize) -> Option<f64> {
        let c = *self.counts.get(n.checked_sub(1)?)?;
        Some(c as f64 / self.total as f64)
    }

    /// Binomial standard error `sqrt(p(1-p)/total)` of a bin frequency.
    pub fn standard_error(&self, n: usize) -> Option<f64> {
        let p = self.frequency(n)?;
        Some((p * (1.0 - p) / self.total as f64).sqrt())
    }

    pub fn overflow_frequency(&self) -> f64 {
        self.overflow as f64 / self.total as f64
    }
}

fn draw_bit(rng: &mut ChaCha8Rng, eps: f64) -> u8 {
    rng.random_bool(eps) as u8
}

fn sample_digit(rng: &mut ChaCha8Rng, cfg: &SimConfig) -> Result<u64> {
    let mut x: f64 = rng.random();
    let mut w = cfg.lead_bit;
    for _ in 1..cfg.n_index {
        let next = draw_bit(rng, cfg.eps);
        x = step(w, x);
        w = next;
    }
    let w2 = draw_bit(rng, cfg.eps);
    digit_b(w, w2, x)
}

pub fn simulate_digit_freq(cfg: &SimConfig, n_max: usize) -> Result<EmpiricalLaw> {
    simulate_digit_freq_with(cfg, n_max, Exec::default())
}

pub fn simulate_digit_freq_with(cfg: &SimConfig, n_max: usize, exec: Exec) -> Result<EmpiricalLaw> {
    cfg.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    // Per chunk: counts for 1..=n_max, then overflow, then undefined.
    let partial = exec.map_indices(cfg.chunks(), |c| {
        let mut rng = cfg.chunk_rng(c);
        let mut bins = vec![0u64; n_max + 2];
        for _ in 0..cfg.chunk_len(c) {
            match sample_digit(&mut rng, cfg) {
                Ok(d) if (d as usize) <= n_max => bins[d as usize - 1] += 1,
                Ok(_) => bins[n_max] += 1,
                Err(_) => bins[n_max + 1] += 1,
            }
        }
        bins
    });
    let mut bins = vec![0u64; n_max + 2];
    for p in partial {
        for (b, v) in bins.iter_mut().zip(p) {
            *b += v;
        }
    }
    let undefined = bins[n_max + 1];
    Ok(EmpiricalLaw {
        eps: cfg.eps,
        n_index: cfg.n_index,
        seed: cfg.seed,
        lead_bit: cfg.lead_bit,
        overflow: bins[n_max] + undefined,
        undefined,
        counts: bins[..n_max].to_vec(),
        total: cfg.samples as u64,
    })
}

fn chain_endpoint(rng: &mut ChaCha8Rng, cfg: &SimConfig) -> f64 {
    let mut x: f64 = rng.random();
    for _ in 0..cfg.burn_in {
        x = step(draw_bit(rng, cfg.eps), x);
    }
    x
}

fn check_density_config(cfg: &SimConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.burn_in < MIN_DENSITY_BURN_IN {
        return Err(Error::InvalidParameter(format!(
            "burn-in {} below the minimum {MIN_DENSITY_BURN_IN}",
            cfg.burn_in
        )));
    }
    Ok(())
}

/// Positions of `cfg.samples` independent chains after `cfg.burn_in` random
/// steps, in sample order.
pub fn stationary_samples(cfg: &SimConfig) -> Result<Vec<f64>> {
    stationary_samples_with(cfg, Exec::default())
}

pub fn stationary_samples_with(cfg: &SimConfig, exec: Exec) -> Result<Vec<f64>> {
    check_density_config(cfg)?;
    let parts = exec.map_indices(cfg.chunks(), |c| {
        let mut rng = cfg.chunk_rng(c);
        (0..cfg.chunk_len(c)).map(|_| chain_endpoint(&mut rng, cfg)).collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

/// Equal-width histogram of chain positions on `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub eps: f64,
    pub seed: u64,
    pub burn_in: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let b = self.bins() as f64;
        (i as f64 / b, (i + 1) as f64 / b)
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.total as f64
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.mass(i)).collect()
    }

    /// Mass divided by bin width.
    pub fn density(&self, i: usize) -> f64 {
        self.mass(i) * self.bins() as f64
    }

    pub fn standard_error(&self, i: usize) -> f64 {
        let p = self.mass(i);
        (p * (1.0 - p) / self.total as f64).sqrt()
    }
}

pub fn empirical_density(cfg: &SimConfig, bins: usize) -> Result<Histogram> {
    empirical_density_with(cfg, bins, Exec::default())
}

pub fn empirical_density_with(cfg: &SimConfig, bins: usize, exec: Exec) -> Result<Histogram> {
    check_density_config(cfg)?;
    if bins == 0 {
        return Err(Error::InvalidParameter("at least one bin is required".into()));
    }
    let partial = exec.map_indices(cfg.chunks(), |c| {
        let mut rng = cfg.chunk_rng(c);
        let mut counts = vec![0u64; bins];
        for _ in 0..cfg.chunk_len(c) {
            let x = chain_endpoint(&mut rng, cfg);
            counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; bins];
    for p in partial {
        for (a, v) in counts.iter_mut().zip(p) {
            *a += v;
        }
    }
    Ok(Histogram { eps: cfg.eps, seed: cfg.seed, burn_in: cfg.burn_in, counts, total: cfg.samples as u64 })
}

/// `Σ_{a=1}^{a_huge} f(V_a(y)) / (a+y)²`, summed from the smallest terms up.
pub fn brute_force_transfer(kind: MapKind, f: &SpectralFn, y: f64, a_huge: u64) -> Result<f64> {
    if a_huge < MIN_BRUTE_FORCE_BRANCHES {
        return Err(Error::InvalidParameter(format!(
            "a_huge = {a_huge} below {MIN_BRUTE_FORCE_BRANCHES}"
        )));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("point {y} outside [0,1]")));
    }
    let mut sum = 0.0;
    for a in (1..=a_huge).rev() {
        let b = BranchId::new(a)?;
        sum += f.value(maps::inverse_branch(kind, b, y)) * maps::branch_derivative(kind, b, y);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::digit_cells;

    #[test]
    fn step_examples() {
        assert!((step(0, 0.4) - 0.5).abs() < 1e-15);
        assert!((step(1, 1.0 / 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(step(0, 0.0), 0.0);
        assert_eq!(step(1, 1.0), 0.0);
    }

    #[test]
    fn digit_examples() {
        assert_eq!(digit_b(0, 0, 0.18).unwrap(), 5);
        assert_eq!(digit_b(0, 1, 0.22).unwrap(), 5);
        assert_eq!(digit_b(1, 0, 0.82).unwrap(), 5);
        assert!(digit_cells(5).unwrap().cell(1, 0).contains(0.82));
        assert_eq!(digit_b(0, 0, 1.0).unwrap(), 1);
        assert_eq!(digit_b(0, 0, 0.5).unwrap(), 2);
        assert_eq!(digit_b(1, 0, 0.5).unwrap(), 2);
        assert_eq!(digit_b(1, 1, 0.0).unwrap(), 2);
        assert!(matches!(digit_b(0, 1, 0.0), Err(Error::UndefinedDigit)));
        assert!(matches!(digit_b(1, 0, 1.0), Err(Error::UndefinedDigit)));
        assert!(digit_b(2, 0, 0.5).is_err());
        assert!(digit_b(0, 0, 1.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1.2, 10, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 0, 1, 0).is_err());
        assert!(SimConfig::new(0.1, 10, 0, 0).is_err());
        assert!(SimConfig::new(0.1, 10, 1, 0).unwrap().with_lead_bit(2).is_err());
        let cfg = SimConfig::new(0.1, 10, 1, 0).unwrap().with_burn_in(10);
        assert!(empirical_density(&cfg, 10).is_err());
        assert!(simulate_digit_freq(&cfg, 0).is_err());
    }

    #[test]
    fn reproducible_and_mode_independent() {
        let cfg = SimConfig::new(0.3, 3 * CHUNK + 17, 7, 42).unwrap();
        let a = simulate_digit_freq_with(&cfg, 30, Exec::Sequential).unwrap();
        let b = simulate_digit_freq_with(&cfg, 30, Exec::Parallel).unwrap();
        let c = simulate_digit_freq(&cfg, 30).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.counts.iter().sum::<u64>() + a.overflow, a.total);
        let other = simulate_digit_freq(&SimConfig { seed: 43, ..cfg }, 30).unwrap();
        assert_ne!(a.counts, other.counts);

        let h1 = empirical_density_with(&cfg, 20, Exec::Sequential).unwrap();
        let h2 = empirical_density_with(&cfg, 20, Exec::Parallel).unwrap();
        assert_eq!(h1, h2);
        assert!((h1.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(stationary_samples(&cfg).unwrap().len(), cfg.samples);
    }

    #[test]
    fn brute_force_constant() {
        let one = SpectralFn::constant(1.0, 8);
        let s = brute_force_transfer(MapKind::Gauss, &one, 0.0, 1_000_000).unwrap();
        let expected = std::f64::consts::PI.powi(2) / 6.0;
        assert!((s - expected).abs() < 1.1e-6, "{s}");
        assert!(brute_force_transfer(MapKind::Gauss, &one, 0.0, 10).is_err());
    }
}
