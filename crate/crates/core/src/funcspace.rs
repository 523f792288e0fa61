//! Smooth functions on [0,1] in a Chebyshev basis.
//!
//! A [`SpectralFn`] stores coefficients `c_k` of `f(x) = Σ c_k T_k(2x - 1)`.
//! Collocation uses the Chebyshev extremal (Lobatto) points mapped to [0,1],
//! listed in increasing order:
//!
//! ```text
//! x_j = sin²(π j / 2N),   j = 0..=N
//! ```
//!
//! so `x_0 = 0` and `x_N = 1`. Point evaluation uses the Clenshaw recurrence;
//! node values and coefficients are related by a discrete cosine transform.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default representation degree.
pub const DEFAULT_DEGREE: usize = 128;

/// Number of uniform grid points used by [`SpectralFn::norm_sup`].
pub const SUP_GRID_POINTS: usize = 2049;

/// Collocation nodes of the given degree on [0,1], increasing.
pub fn nodes(degree: usize) -> Vec<f64> {
    if degree == 0 {
        return vec![0.5];
    }
    let n = degree as f64;
    (0..=degree)
        .map(|j| {
            let s = (std::f64::consts::PI * j as f64 / (2.0 * n)).sin();
            s * s
        })
        .collect()
}

/// `cos(π r / N)` for r in 0..2N.
fn cos_table(degree: usize) -> Vec<f64> {
    let n = degree as f64;
    (0..2 * degree)
        .map(|r| (std::f64::consts::PI * r as f64 / n).cos())
        .collect()
}

/// Matrix (row-major, (N+1)×(N+1)) mapping node values to coefficients.
pub(crate) fn values_to_coeffs_matrix(degree: usize) -> Vec<Vec<f64>> {
    if degree == 0 {
        return vec![vec![1.0]];
    }
    let table = cos_table(degree);
    let period = 2 * degree;
    let scale = 2.0 / degree as f64;
    (0..=degree)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let edge_k = if k == 0 || k == degree { 0.5 } else { 1.0 };
            (0..=degree)
                .map(|j| {
                    let edge_j = if j == 0 || j == degree { 0.5 } else { 1.0 };
                    scale * edge_k * edge_j * sign * table[(j * k) % period]
                })
                .collect()
        })
        .collect()
}

/// Clenshaw-Curtis weights on [0,1] for the nodes of the given degree.
pub fn quadrature_weights(degree: usize) -> Vec<f64> {
    if degree == 0 {
        return vec![1.0];
    }
    let a = values_to_coeffs_matrix(degree);
    let moments: Vec<f64> = (0..=degree).map(chebyshev_moment).collect();
    (0..=degree)
        .map(|j| {
            (0..=degree)
                .filter(|k| k % 2 == 0)
                .map(|k| moments[k] * a[k][j])
                .sum()
        })
        .collect()
}

/// ∫_0^1 T_k(2x - 1) dx.
fn chebyshev_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        let k = k as f64;
        1.0 / (1.0 - k * k)
    }
}

/// A function on [0,1] represented by Chebyshev coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFn {
    coeffs: Vec<f64>,
}

impl SpectralFn {
    /// Builds the function directly from Chebyshev coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a SpectralFn needs at least one coefficient");
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self { coeffs: vec![0.0; degree + 1] }
    }

    pub fn constant(value: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// Interpolates `f` at the `degree + 1` collocation nodes.
    pub fn from_callable<F: Fn(f64) -> f64>(f: F, degree: usize) -> Result<Self> {
        let xs = nodes(degree);
        let mut values = Vec::with_capacity(xs.len());
        for &x in &xs {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { x, value: v });
            }
            values.push(v);
        }
        Ok(Self::from_values(&values))
    }

    /// Interpolant through values at the collocation nodes of degree `values.len() - 1`.
    pub fn from_values(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "need at least one node value");
        let degree = values.len() - 1;
        let a = values_to_coeffs_matrix(degree);
        let coeffs = a
            .iter()
            .map(|row| row.iter().zip(values).map(|(w, v)| w * v).sum())
            .collect();
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Values at the collocation nodes of this function's degree.
    pub fn node_values(&self) -> Vec<f64> {
        let degree = self.degree();
        if degree == 0 {
            return vec![self.coeffs[0]];
        }
        let table = cos_table(degree);
        let period = 2 * degree;
        (0..=degree)
            .map(|j| {
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        c * sign * table[(j * k) % period]
                    })
                    .sum()
            })
            .collect()
    }

    /// Value at `x ∈ [0,1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("evaluation point {x} outside [0,1]")));
        }
        Ok(self.value(x))
    }

    /// Clenshaw evaluation without the domain check.
    pub(crate) fn value(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, 2.0 * x - 1.0)
    }

    /// ∫_0^1 f dx.
    pub fn integrate(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .step_by(2)
            .map(|(k, c)| c * chebyshev_moment(k))
            .sum()
    }

    /// ∫_lo^hi f dx through the antiderivative.
    pub fn integrate_on(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Domain(format!(
                "integration bounds [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
            )));
        }
        let anti = self.antiderivative_coeffs();
        Ok(clenshaw(&anti, 2.0 * hi - 1.0) - clenshaw(&anti, 2.0 * lo - 1.0))
    }

    /// Coefficients of an antiderivative in x (constant term left at zero).
    fn antiderivative_coeffs(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let c = |k: usize| if k < n { self.coeffs[k] } else { 0.0 };
        let mut out = vec![0.0; n + 1];
        out[1] = 0.5 * (c(0) - 0.5 * c(2));
        for k in 2..=n {
            out[k] = 0.5 * (c(k - 1) - c(k + 1)) / (2.0 * k as f64);
        }
        out
    }

    /// Exact derivative on the polynomial space; degree drops by one.
    pub fn derivative(&self) -> SpectralFn {
        let n = self.degree();
        if n == 0 {
            return SpectralFn::zero(0);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            let next = if k + 1 <= n { d[k + 1] } else { 0.0 };
            d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        // dz/dx = 2
        d.iter_mut().for_each(|v| *v *= 2.0);
        SpectralFn { coeffs: d }
    }

    /// Σ a_i f_i, padded to the largest degree.
    pub fn linear_combo(terms: &[(f64, &SpectralFn)]) -> SpectralFn {
        let degree = terms.iter().map(|(_, f)| f.degree()).max().unwrap_or(0);
        let mut coeffs = vec![0.0; degree + 1];
        for (a, f) in terms {
            for (acc, c) in coeffs.iter_mut().zip(&f.coeffs) {
                *acc += a * c;
            }
        }
        SpectralFn { coeffs }
    }

    /// Max |f| on a uniform grid of [`SUP_GRID_POINTS`] points.
    pub fn norm_sup(&self) -> f64 {
        let m = (SUP_GRID_POINTS - 1) as f64;
        (0..SUP_GRID_POINTS)
            .map(|i| self.value(i as f64 / m).abs())
            .fold(0.0, f64::max)
    }

    /// Σ_{j ≤ l} ‖f^{(j)}‖_sup.
    pub fn norm_cl(&self, l: usize) -> Result<f64> {
        if l > self.degree() {
            return Err(Error::InvalidParameter(format!(
                "C^{l} norm requested for a degree-{} function",
                self.degree()
            )));
        }
        let mut total = 0.0;
        let mut current = self.clone();
        for _ in 0..=l {
            total += current.norm_sup();
            current = current.derivative();
        }
        Ok(total)
    }

    /// Re-samples at a different degree (truncation or zero padding of coefficients).
    pub fn with_degree(&self, degree: usize) -> SpectralFn {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, 0.0);
        SpectralFn { coeffs }
    }

    /// Max |f| over the collocation nodes.
    pub fn node_sup(&self) -> f64 {
        self.node_values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn clenshaw(coeffs: &[f64], z: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * z * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    z * b1 - b2 + coeffs[0]
}

impl Add for &SpectralFn {
    type Output = SpectralFn;
    fn add(self, rhs: &SpectralFn) -> SpectralFn {
        SpectralFn::linear_combo(&[(1.0, self), (1.0, rhs)])
    }
}

impl Sub for &SpectralFn {
    type Output = SpectralFn;
    fn sub(self, rhs: &SpectralFn) -> SpectralFn {
        SpectralFn::linear_combo(&[(1.0, self), (-1.0, rhs)])
    }
}

impl Mul<&SpectralFn> for f64 {
    type Output = SpectralFn;
    fn mul(self, rhs: &SpectralFn) -> SpectralFn {
        SpectralFn::linear_combo(&[(self, rhs)])
    }
}
