//! Taylor expansion of `ε ↦ h_ε` at ε = 0 for the Gauss-Rényi mixture.
//!
//! Two routes are provided.
//!
//! The generic route works from the derivatives `G_i = ∂^i_ε L_ε h_0` and the
//! table `H_{i,j} = ∂^j_ε (I - L_ε)^{-1} G_i |_{ε=0}`:
//!
//! ```text
//! ∂ⁿ_ε h_ε |_{ε=0} = Σ_{i=1}^{n} C(n,i) H_{i,n-i}
//! ```
//!
//! For the affine family `L_ε = L0 + ε(L1 - L0)` the resolvent expands
//! geometrically on zero-mean functions, with `R = (I - L0)^{-1}` and
//! `Δ = L1 - L0`:
//!
//! ```text
//! (I - L_ε)^{-1} = Σ_j εʲ (RΔ)ʲ R,   so   H_{i,j} = j! (RΔ)ʲ R G_i.
//! ```
//!
//! The fast route uses `G_1 = L1 h_0 - h_0`, `G_i = 0` for `i ≥ 2`, and
//! the recursion `c_1 = R G_1`, `c_n = R Δ c_{n-1}` for the Taylor
//! coefficients `c_n = ∂ⁿ_ε h_ε / n!`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::funcspace::{SpectralFn, DEFAULT_DEGREE};
use crate::maps::MapKind;
use crate::transfer::{
    self, assemble_operator_with, InvariantDensity, OperatorMatrix, Resolvent, TailPolicy,
};

pub const DEFAULT_ORDER: usize = 3;

/// Mean tolerance for the `G_i`.
pub const G_MEAN_TOL: f64 = 1e-10;

/// `G_i = ∂^i_ε L_ε h_0 |_{ε=0}` for i = 1..=k.
#[derive(Debug, Clone)]
pub struct GTerms {
    g: Vec<SpectralFn>,
}

impl GTerms {
    /// Validates that every term has zero mean.
    pub fn new(g: Vec<SpectralFn>) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::InvalidParameter("at least one G term is required".into()));
        }
        for (i, gi) in g.iter().enumerate() {
            let mean = gi.integrate();
            if mean.abs() > G_MEAN_TOL {
                return Err(Error::Precondition(format!("G_{} has mean {mean:e}", i + 1)));
            }
        }
        Ok(GTerms { g })
    }

    pub fn order(&self) -> usize {
        self.g.len()
    }

    /// `G_i`, 1-based.
    pub fn get(&self, i: usize) -> Option<&SpectralFn> {
        i.checked_sub(1).and_then(|idx| self.g.get(idx))
    }
}

/// `H_{i,j}` for `i ≥ 1`, `i + j ≤ k`.
#[derive(Debug, Clone)]
pub struct HTable {
    h: BTreeMap<(usize, usize), SpectralFn>,
    order: usize,
    max_residual: f64,
}

impl HTable {
    pub fn get(&self, i: usize, j: usize) -> Option<&SpectralFn> {
        self.h.get(&(i, j))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Largest node residual of the resolvent solves that built the table.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &SpectralFn)> {
        self.h.iter()
    }
}

/// `h_0` plus Taylor coefficients `c_1..c_k`.
#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    h0: SpectralFn,
    coeffs: Vec<SpectralFn>,
    stage_residuals: Vec<f64>,
}

impl PerturbationSeries {
    pub fn new(h0: SpectralFn, coeffs: Vec<SpectralFn>) -> Self {
        let stage_residuals = vec![0.0; coeffs.len()];
        PerturbationSeries { h0, coeffs, stage_residuals }
    }

    pub fn h0(&self) -> &SpectralFn {
        &self.h0
    }

    /// `c_n`, 1-based.
    pub fn coeff(&self, n: usize) -> Option<&SpectralFn> {
        n.checked_sub(1).and_then(|idx| self.coeffs.get(idx))
    }

    pub fn coeffs(&self) -> &[SpectralFn] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Node residual of the resolvent solve behind each coefficient.
    pub fn stage_residuals(&self) -> &[f64] {
        &self.stage_residuals
    }

    /// Series truncated to its first `order` coefficients.
    pub fn truncated(&self, order: usize) -> PerturbationSeries {
        let order = order.min(self.order());
        PerturbationSeries {
            h0: self.h0.clone(),
            coeffs: self.coeffs[..order].to_vec(),
            stage_residuals: self.stage_residuals[..order].to_vec(),
        }
    }

    /// `h_0 + Σ εⁿ c_n`.
    pub fn evaluate(&self, eps: f64) -> SpectralFn {
        let mut terms: Vec<(f64, &SpectralFn)> = vec![(1.0, &self.h0)];
        let mut power = 1.0;
        for c in &self.coeffs {
            power *= eps;
            terms.push((power, c));
        }
        SpectralFn::linear_combo(&terms)
    }
}

/// Free-function form of [`PerturbationSeries::evaluate`].
pub fn evaluate_series(s: &PerturbationSeries, eps: f64) -> SpectralFn {
    if eps < 0.0 {
        log::warn!("evaluating the series at negative ε = {eps}");
    }
    s.evaluate(eps)
}

/// `Σ_{i=1}^{n} C(n,i) H_{i,n-i}`.
pub fn derivative_n(h: &HTable, n: usize) -> Result<SpectralFn> {
    if n == 0 || n > h.order {
        return Err(Error::InvalidParameter(format!(
            "derivative order {n} outside 1..={}",
            h.order
        )));
    }
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        let entry = h
            .get(i, n - i)
            .ok_or_else(|| Error::Consistency(format!("missing H_({i},{})", n - i)))?;
        terms.push((binomial(n, i), entry));
    }
    Ok(SpectralFn::linear_combo(&terms))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Discretized Gauss-Rényi family: `L0`, `L1`, the factored resolvent of
/// `L0` on zero-mean functions and the Gauss density `h_0`.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    policy: TailPolicy,
    l0: OperatorMatrix,
    l1: OperatorMatrix,
    resolvent: Resolvent,
    h0: InvariantDensity,
}

impl MixtureModel {
    pub fn new(degree: usize, policy: TailPolicy) -> Result<Self> {
        Self::with_exec(degree, policy, Exec::default())
    }

    pub fn with_exec(degree: usize, policy: TailPolicy, exec: Exec) -> Result<Self> {
        let l0 = assemble_operator_with(MapKind::Gauss, degree, policy, exec)?;
        let l1 = assemble_operator_with(MapKind::Renyi, degree, policy, exec)?;
        let resolvent = Resolvent::new(&l0)?;
        let h0 = transfer::invariant_density_report(&l0)?;
        Ok(MixtureModel { policy, l0, l1, resolvent, h0 })
    }

    pub fn degree(&self) -> usize {
        self.l0.degree()
    }

    pub fn policy(&self) -> TailPolicy {
        self.policy
    }

    pub fn l0(&self) -> &OperatorMatrix {
        &self.l0
    }

    pub fn l1(&self) -> &OperatorMatrix {
        &self.l1
    }

    pub fn resolvent(&self) -> &Resolvent {
        &self.resolvent
    }

    /// Computed fixed point of `L0`.
    pub fn h0(&self) -> &SpectralFn {
        &self.h0.density
    }

    /// Power-iteration residual of `h_0`.
    pub fn h0_residual(&self) -> f64 {
        self.h0.residual
    }

    pub fn annealed(&self, eps: f64) -> Result<OperatorMatrix> {
        transfer::annealed(eps, &self.l0, &self.l1)
    }

    /// Reference density from the power iteration of `L_ε`.
    pub fn eigensolve(&self, eps: f64) -> Result<SpectralFn> {
        transfer::invariant_density(&self.annealed(eps)?)
    }

    /// `(L1 - L0) f`.
    pub fn apply_difference(&self, f: &SpectralFn) -> Result<SpectralFn> {
        let a = self.l1.apply(f)?;
        let b = self.l0.apply(f)?;
        Ok(&a - &b)
    }

    fn solve(&self, g: &SpectralFn) -> Result<(SpectralFn, f64)> {
        let u = self.resolvent.solve(g)?;
        let r = self.resolvent.residual(&u, g);
        Ok((u, r))
    }

    /// `G_1 = L1 h_0 - h_0`, `G_i = 0` for `i ≥ 2`.
    pub fn g_terms_mixture(&self, k: usize) -> Result<GTerms> {
        if k == 0 {
            return Err(Error::InvalidParameter("order k must be at least 1".into()));
        }
        let h0 = self.h0();
        let g1 = &self.l1.apply(h0)? - h0;
        let mean = g1.integrate();
        if mean.abs() > 1e-9 {
            return Err(Error::Consistency(format!("L1 h0 - h0 has mean {mean:e}")));
        }
        let mut g = vec![g1];
        g.extend((2..=k).map(|_| SpectralFn::zero(self.degree())));
        GTerms::new(g)
    }

    /// `H_{i,j} = j! (RΔ)ʲ R G_i` for `i + j ≤ k`.
    pub fn h_table(&self, g: &GTerms, k: usize) -> Result<HTable> {
        if k == 0 || k > g.order() {
            return Err(Error::InvalidParameter(format!(
                "table order {k} must be in 1..={}",
                g.order()
            )));
        }
        let mut h = BTreeMap::new();
        let mut max_residual = 0.0f64;
        for i in 1..=k {
            let gi = g.get(i).expect("checked order");
            if gi.coeffs().iter().all(|c| *c == 0.0) {
                for j in 0..=k - i {
                    h.insert((i, j), SpectralFn::zero(gi.degree()));
                }
                continue;
            }
            let (mut v, r) = self.solve(gi)?;
            max_residual = max_residual.max(r);
            for j in 0..=k - i {
                h.insert((i, j), factorial(j) * &v);
                if j < k - i {
                    let (next, r) = self.solve(&self.apply_difference(&v)?)?;
                    max_residual = max_residual.max(r);
                    v = next;
                }
            }
        }
        Ok(HTable { h, order: k, max_residual })
    }

    /// Taylor coefficients through the recursion `c_n = RΔ c_{n-1}`.
    pub fn series_mixture(&self, k: usize) -> Result<PerturbationSeries> {
        if k == 0 {
            return Err(Error::InvalidParameter("order k must be at least 1".into()));
        }
        let h0 = self.h0().clone();
        let g1 = self.g_terms_mixture(1)?.get(1).cloned().expect("one term");
        let (mut c, r) = self.solve(&g1)?;
        let mut coeffs = Vec::with_capacity(k);
        let mut stage_residuals = vec![r];
        for _ in 1..k {
            let (next, r) = self.solve(&self.apply_difference(&c)?)?;
            coeffs.push(c);
            stage_residuals.push(r);
            c = next;
        }
        coeffs.push(c);
        Ok(PerturbationSeries { h0, coeffs, stage_residuals })
    }

    /// Taylor coefficients through `G → H → ∂ⁿh / n!`.
    pub fn series_generic(&self, k: usize) -> Result<PerturbationSeries> {
        let g = self.g_terms_mixture(k)?;
        let table = self.h_table(&g, k)?;
        let coeffs = (1..=k)
            .map(|n| derivative_n(&table, n).map(|d| (1.0 / factorial(n)) * &d))
            .collect::<Result<Vec<_>>>()?;
        let stage_residuals = vec![table.max_residual(); k];
        Ok(PerturbationSeries { h0: self.h0().clone(), coeffs, stage_residuals })
    }

    /// `‖L_ε h - h‖` over the nodes.
    pub fn residual(&self, eps: f64, h: &SpectralFn) -> Result<f64> {
        if h.degree() != self.degree() {
            return Err(Error::DegreeMismatch { left: self.degree(), right: h.degree() });
        }
        let v = h.node_values();
        let a = self.l0.apply_values(&v);
        let b = self.l1.apply_values(&v);
        Ok(v
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(h, (a, b))| ((1.0 - eps) * a + eps * b - h).abs())
            .fold(0.0, f64::max))
    }
}

impl Default for MixtureModel {
    fn default() -> Self {
        MixtureModel::new(DEFAULT_DEGREE, TailPolicy::default())
            .expect("the default discretization is well posed")
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// One line of an order-of-accuracy study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub order: usize,
    /// Sup-norm distance to the eigensolve reference.
    pub sup_error: f64,
    /// `‖L_ε h - h‖` of the truncated series.
    pub residual: f64,
    /// Log-log slope of `sup_error` over the whole ε grid for this order.
    pub fitted_slope: f64,
}

/// Compares the order-k series with the eigensolve over an ε grid.
pub fn convergence_study(model: &MixtureModel, eps_grid: &[f64], orders: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let k_max = orders.iter().copied().max().unwrap_or(1).max(1);
    let series = model.series_mixture(k_max)?;
    let references = eps_grid
        .iter()
        .map(|&eps| model.eigensolve(eps))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &k in orders {
        let truncated = series.truncated(k);
        let mut block = Vec::new();
        for (&eps, reference) in eps_grid.iter().zip(&references) {
            let approx = truncated.evaluate(eps);
            let sup_error = (&approx - reference).norm_sup();
            let residual = model.residual(eps, &approx)?;
            block.push(ConvergenceRow { eps, order: k, sup_error, residual, fitted_slope: f64::NAN });
        }
        if eps_grid.len() >= 2 {
            let errs: Vec<f64> = block.iter().map(|r| r.sup_error).collect();
            let slope = loglog_slope(eps_grid, &errs);
            block.iter_mut().for_each(|r| r.fitted_slope = slope);
        }
        rows.extend(block);
    }
    Ok(rows)
}
