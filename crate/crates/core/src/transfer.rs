//! Transfer operators of the Gauss and Rényi maps, their collocation
//! matrices, the annealed mixture `(1-ε)L0 + εL1`, invariant densities and
//! the zero-mean resolvent `(I - L)^{-1}`.
//!
//! The branch sum `Σ_a f(V_a(y))/(a+y)²` is summed explicitly up to
//! `a_max`; the remaining branches accumulate at an endpoint (0 for Gauss,
//! 1 for Rényi) and are replaced by an order-`m` Taylor expansion of `f`
//! there, which turns the tail into Hurwitz zeta values:
//!
//! ```text
//! Σ_{a > A} f(V_a(y))/(a+y)² ≈ Σ_{p ≤ m} (±1)^p f^{(p)}(e)/p! · ζ(p+2, A+1+y)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::funcspace::{self, SpectralFn};
use crate::maps::{inverse_branch, BranchId, MapKind};
use crate::special::hurwitz_zeta;

/// Tail bounds above this are reported on the warning channel.
pub const TAIL_WARN_THRESHOLD: f64 = 1e-8;

/// Smallest degree accepted by [`assemble_operator`].
pub const MIN_OPERATOR_DEGREE: usize = 8;

pub const POWER_ITERATION_CAP: usize = 10_000;
pub const POWER_ITERATION_TOL: f64 = 1e-13;

/// Mean tolerance for right-hand sides of the resolvent.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// Node values below `-NEGATIVE_TOL` make a computed density an error.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Branch cutoff and Taylor order of the endpoint tail correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailPolicy {
    a_max: u64,
    taylor_order: u32,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy { a_max: 256, taylor_order: 3 }
    }
}

impl TailPolicy {
    pub fn new(a_max: u64, taylor_order: u32) -> Result<Self> {
        if a_max < 8 {
            return Err(Error::InvalidParameter(format!("a_max must be at least 8, got {a_max}")));
        }
        if taylor_order > 4 {
            return Err(Error::InvalidParameter(format!(
                "taylor_order must be in 0..=4, got {taylor_order}"
            )));
        }
        Ok(TailPolicy { a_max, taylor_order })
    }

    pub fn a_max(&self) -> u64 {
        self.a_max
    }

    pub fn taylor_order(&self) -> u32 {
        self.taylor_order
    }

    /// `ζ(m+3, a_max+1) · sup|f^{(m+1)}| / (m+1)!`
    pub fn error_bound(&self, f: &SpectralFn) -> f64 {
        let m = self.taylor_order as usize;
        let mut d = f.clone();
        for _ in 0..=m {
            d = d.derivative();
        }
        let fact: f64 = (1..=m + 1).map(|v| v as f64).product();
        self.zeta_factor() * d.norm_sup() / fact
    }

    /// `ζ(m+3, a_max+1)`, the multiplier of `sup|f^{(m+1)}|/(m+1)!` in the bound.
    pub fn zeta_factor(&self) -> f64 {
        hurwitz_zeta(self.taylor_order as f64 + 3.0, self.a_max as f64 + 1.0)
    }

    /// Zeta weights `ζ(p+2, a_max+1+y)` for p = 0..=m.
    fn tail_weights(&self, y: f64) -> Vec<f64> {
        let q = self.a_max as f64 + 1.0 + y;
        (0..=self.taylor_order)
            .map(|p| hurwitz_zeta(p as f64 + 2.0, q))
            .collect()
    }
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|v| v as f64).product()
}

/// Sign applied to the p-th Taylor term of the tail.
fn tail_sign(kind: MapKind, p: usize) -> f64 {
    match kind {
        MapKind::Gauss => 1.0,
        MapKind::Renyi => {
            if p % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// `L_kind f`, sampled at the collocation nodes of `f`'s degree.
///
/// Evaluates `f` by Clenshaw at every pulled-back point; the tail uses
/// endpoint derivatives of `f` from the coefficient recurrence. Logs a warning
/// when the tail error bound exceeds [`TAIL_WARN_THRESHOLD`].
pub fn apply_transfer(kind: MapKind, f: &SpectralFn, policy: TailPolicy) -> SpectralFn {
    apply_transfer_with(kind, f, policy, Exec::default())
}

pub fn apply_transfer_with(kind: MapKind, f: &SpectralFn, policy: TailPolicy, exec: Exec) -> SpectralFn {
    let bound = policy.error_bound(f);
    if bound > TAIL_WARN_THRESHOLD {
        log::warn!("transfer tail bound {bound:e} exceeds {TAIL_WARN_THRESHOLD:e}");
    }
    let e = kind.accumulation_point();
    let mut endpoint_derivs = Vec::with_capacity(policy.taylor_order as usize + 1);
    let mut d = f.clone();
    for p in 0..=policy.taylor_order as usize {
        endpoint_derivs.push(tail_sign(kind, p) * d.value(e) / factorial(p));
        d = d.derivative();
    }
    let ys = funcspace::nodes(f.degree());
    let values = exec.map_indices(ys.len(), |i| {
        let y = ys[i];
        let mut acc = 0.0;
        // smallest contributions first
        for a in (1..=policy.a_max).rev() {
            let t = a as f64 + y;
            let x = match kind {
                MapKind::Gauss => 1.0 / t,
                MapKind::Renyi => 1.0 - 1.0 / t,
            };
            acc += f.value(x) / (t * t);
        }
        let tail: f64 = policy
            .tail_weights(y)
            .iter()
            .zip(&endpoint_derivs)
            .map(|(z, c)| z * c)
            .sum();
        acc + tail
    });
    SpectralFn::from_values(&values)
}

/// Tail error bound of [`apply_transfer`] for `f`.
pub fn transfer_tail_bound(f: &SpectralFn, policy: TailPolicy) -> f64 {
    policy.error_bound(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorLabel {
    L0,
    L1,
    Annealed(f64),
}

impl std::fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OperatorLabel::L0 => f.write_str("L0"),
            OperatorLabel::L1 => f.write_str("L1"),
            OperatorLabel::Annealed(eps) => write!(f, "annealed({eps})"),
        }
    }
}

/// Collocation matrix of a transfer operator acting on node values.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<f64>,
    degree: usize,
    label: OperatorLabel,
    weights: Vec<f64>,
    mass_defect: f64,
}

impl OperatorMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    /// Quadrature weights of the node grid.
    pub fn quadrature(&self) -> &[f64] {
        &self.weights
    }

    /// Largest column mass defect `|qᵀM - qᵀ|` removed at assembly.
    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    pub fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(values);
        (&self.entries * v).iter().copied().collect()
    }

    pub fn apply(&self, f: &SpectralFn) -> Result<SpectralFn> {
        self.check_degree(f)?;
        Ok(SpectralFn::from_values(&self.apply_values(&f.node_values())))
    }

    fn check_degree(&self, f: &SpectralFn) -> Result<()> {
        if f.degree() != self.degree {
            return Err(Error::DegreeMismatch { left: self.degree, right: f.degree() });
        }
        Ok(())
    }

    fn quadrature_of(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Barycentric weights of the Lobatto nodes.
fn barycentric_weights(degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == degree {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Adds `scale · ℓ_j(x)` to `row[j]` for every cardinal function `ℓ_j`.
fn accumulate_cardinal_row(row: &mut [f64], x: f64, scale: f64, xs: &[f64], bw: &[f64], scratch: &mut [f64]) {
    if let Some(j) = xs.iter().position(|&xj| xj == x) {
        row[j] += scale;
        return;
    }
    let mut total = 0.0;
    for ((s, &xj), &w) in scratch.iter_mut().zip(xs).zip(bw) {
        *s = w / (x - xj);
        total += *s;
    }
    let k = scale / total;
    for (r, s) in row.iter_mut().zip(scratch.iter()) {
        *r += k * s;
    }
}

/// Row vectors mapping node values to `f^{(p)}(e)` for p = 0..=m at the endpoint.
fn endpoint_derivative_functionals(kind: MapKind, degree: usize, m: usize) -> Vec<Vec<f64>> {
    let a = funcspace::values_to_coeffs_matrix(degree);
    let at_left = kind == MapKind::Gauss;
    (0..=m)
        .map(|p| {
            // 2^p T_k^{(p)}(±1)
            let e: Vec<f64> = (0..=degree)
                .map(|k| {
                    let kf = k as f64;
                    let mut t = 2f64.powi(p as i32);
                    for i in 0..p {
                        let i = i as f64;
                        t *= (kf * kf - i * i) / (2.0 * i + 1.0);
                    }
                    if at_left && (k + p) % 2 == 1 {
                        -t
                    } else {
                        t
                    }
                })
                .collect();
            (0..=degree)
                .map(|j| (0..=degree).map(|k| e[k] * a[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Collocation matrix of `L_kind` at the given degree.
pub fn assemble_operator(kind: MapKind, degree: usize, policy: TailPolicy) -> Result<OperatorMatrix> {
    assemble_operator_with(kind, degree, policy, Exec::default())
}

/// [`assemble_operator`] with an explicit execution mode.
///
/// Row `i` holds the weights with which node values enter `(L f)(y_i)`:
/// barycentric cardinal values at each pulled-back point `V_a(y_i)`, plus the
/// endpoint-derivative functionals scaled by the zeta tail weights. A final
/// rank-one update `M += 1·(qᵀ - qᵀM)` restores exact discrete mass
/// conservation; for resolved (smooth) inputs the update is at round-off
/// level, it only acts on the unresolved part of the cardinal basis.
pub fn assemble_operator_with(kind: MapKind, degree: usize, policy: TailPolicy, exec: Exec) -> Result<OperatorMatrix> {
    if degree < MIN_OPERATOR_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "operator degree must be at least {MIN_OPERATOR_DEGREE}, got {degree}"
        )));
    }
    let xs = funcspace::nodes(degree);
    let bw = barycentric_weights(degree);
    let functionals = endpoint_derivative_functionals(kind, degree, policy.taylor_order as usize);
    let size = degree + 1;

    let rows: Vec<Vec<f64>> = exec.map_indices(size, |i| {
        let y = xs[i];
        let mut row = vec![0.0; size];
        let mut scratch = vec![0.0; size];
        for a in (1..=policy.a_max).rev() {
            let branch = BranchId::new(a).expect("a >= 1");
            let t = a as f64 + y;
            let x = inverse_branch(kind, branch, y);
            accumulate_cardinal_row(&mut row, x, 1.0 / (t * t), &xs, &bw, &mut scratch);
        }
        for (p, (z, functional)) in policy.tail_weights(y).iter().zip(&functionals).enumerate() {
            let scale = tail_sign(kind, p) * z / factorial(p);
            for (r, d) in row.iter_mut().zip(functional) {
                *r += scale * d;
            }
        }
        row
    });

    let mut entries = DMatrix::from_fn(size, size, |i, j| rows[i][j]);
    let weights = funcspace::quadrature_weights(degree);
    let q = DVector::from_column_slice(&weights);
    let defect = q.transpose() - q.transpose() * &entries;
    let mass_defect = defect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..size {
        for j in 0..size {
            entries[(i, j)] += defect[j];
        }
    }
    let label = match kind {
        MapKind::Gauss => OperatorLabel::L0,
        MapKind::Renyi => OperatorLabel::L1,
    };
    Ok(OperatorMatrix { entries, degree, label, weights, mass_defect })
}

/// `(1-ε)·m0 + ε·m1` for `ε ∈ [0,1]`.
pub fn annealed(eps: f64, m0: &OperatorMatrix, m1: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("mixing probability {eps} outside [0,1]")));
    }
    affine_family(eps, m0, m1)
}

/// `m0 + ε·(m1 - m0)` for any real ε; used for finite differences in ε
/// that step below zero.
pub fn affine_family(eps: f64, m0: &OperatorMatrix, m1: &OperatorMatrix) -> Result<OperatorMatrix> {
    if m0.degree != m1.degree {
        return Err(Error::DegreeMismatch { left: m0.degree, right: m1.degree });
    }
    let entries = if eps == 0.0 {
        m0.entries.clone()
    } else if eps == 1.0 {
        m1.entries.clone()
    } else {
        &m0.entries * (1.0 - eps) + &m1.entries * eps
    };
    Ok(OperatorMatrix {
        entries,
        degree: m0.degree,
        label: OperatorLabel::Annealed(eps),
        weights: m0.weights.clone(),
        mass_defect: m0.mass_defect.max(m1.mass_defect),
    })
}

/// Invariant density with solver diagnostics.
#[derive(Debug, Clone)]
pub struct InvariantDensity {
    pub density: SpectralFn,
    /// `‖M h - h‖` over the nodes.
    pub residual: f64,
    pub iterations: usize,
    /// Largest magnitude of negative node values clamped to zero.
    pub clamped: f64,
}

/// Fixed point `M h = h` normalized to unit mass.
pub fn invariant_density(m: &OperatorMatrix) -> Result<SpectralFn> {
    invariant_density_report(m).map(|r| r.density)
}

/// Power iteration with quadrature renormalization every step.
pub fn invariant_density_report(m: &OperatorMatrix) -> Result<InvariantDensity> {
    if let OperatorLabel::Annealed(eps) = m.label {
        let limit = bounds::eps_range(2).expect("i = 2 is admissible");
        if eps > limit {
            log::warn!("mixing probability {eps} exceeds the admissible range {limit:.7}");
        }
    }
    let size = m.degree + 1;
    let mut h = DVector::from_element(size, 1.0);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < POWER_ITERATION_CAP {
        iterations += 1;
        let next = &m.entries * &h;
        residual = (&next - &h).amax();
        if residual < POWER_ITERATION_TOL {
            break;
        }
        let mass = m.quadrature_of(next.as_slice());
        if !mass.is_finite() || mass == 0.0 {
            return Err(Error::NotConverged { iterations, residual });
        }
        h = next / mass;
    }
    if residual >= POWER_ITERATION_TOL {
        return Err(Error::NotConverged { iterations, residual });
    }
    let mut values: Vec<f64> = h.iter().copied().collect();
    let mut clamped = 0.0f64;
    for (node, v) in values.iter_mut().enumerate() {
        if *v < -NEGATIVE_TOL {
            return Err(Error::NegativeDensity { node, value: *v });
        }
        if *v < 0.0 {
            clamped = clamped.max(-*v);
            *v = 0.0;
        }
    }
    if clamped > 0.0 {
        log::warn!("clamped negative density values of magnitude up to {clamped:e}");
    }
    Ok(InvariantDensity {
        density: SpectralFn::from_values(&values),
        residual,
        iterations,
        clamped,
    })
}

/// Factored bordered system for `(I - M)u = g` on zero-mean functions.
///
/// ```text
/// [ I - M   1 ] [u]   [g]
/// [  qᵀ     0 ] [λ] = [0]
/// ```
#[derive(Debug, Clone)]
pub struct Resolvent {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    identity_minus: DMatrix<f64>,
    degree: usize,
    weights: Vec<f64>,
}

impl Resolvent {
    pub fn new(m: &OperatorMatrix) -> Result<Self> {
        let n = m.degree + 1;
        let identity_minus = DMatrix::<f64>::identity(n, n) - &m.entries;
        let mut bordered = DMatrix::<f64>::zeros(n + 1, n + 1);
        bordered.view_mut((0, 0), (n, n)).copy_from(&identity_minus);
        for i in 0..n {
            bordered[(i, n)] = 1.0;
            bordered[(n, i)] = m.weights[i];
        }
        let lu = bordered.lu();
        let pivot_min = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if !(pivot_min > 1e-13) {
            return Err(Error::Singular(format!("bordered resolvent pivot {pivot_min:e}")));
        }
        Ok(Resolvent { lu, identity_minus, degree: m.degree, weights: m.weights.clone() })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Zero-mean `u` with `(I - M)u = g`; `g` must have mean zero.
    pub fn solve(&self, g: &SpectralFn) -> Result<SpectralFn> {
        if g.degree() != self.degree {
            return Err(Error::DegreeMismatch { left: self.degree, right: g.degree() });
        }
        let mean = g.integrate();
        if mean.abs() > ZERO_MEAN_TOL {
            return Err(Error::Precondition(format!(
                "resolvent right-hand side has mean {mean:e}, expected |mean| <= {ZERO_MEAN_TOL:e}"
            )));
        }
        let n = self.degree + 1;
        let mut rhs = DVector::<f64>::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from_slice(&g.node_values());
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("bordered resolvent system".into()))?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite resolvent solution".into()));
        }
        let values: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        Ok(SpectralFn::from_values(&values))
    }

    /// `‖(I - M)u - g‖` over the nodes.
    pub fn residual(&self, u: &SpectralFn, g: &SpectralFn) -> f64 {
        let uv = DVector::from_vec(u.node_values());
        let gv = DVector::from_vec(g.node_values());
        (&self.identity_minus * uv - gv).amax()
    }

    /// Quadrature of node values, the mean functional the border enforces.
    pub fn mean_of(&self, u: &SpectralFn) -> f64 {
        self.weights.iter().zip(u.node_values()).map(|(w, v)| w * v).sum()
    }
}

/// One-shot [`Resolvent::solve`].
pub fn resolvent_solve(m: &OperatorMatrix, g: &SpectralFn) -> Result<SpectralFn> {
    Resolvent::new(m)?.solve(g)
}
