use gauss_renyi::bounds::SpectralBounds;
use gauss_renyi::digits::{digit_law, gauss_kuzmin, gauss_kuzmin_tail};
use gauss_renyi::oracle::{simulate_digit_freq, EmpiricalLaw, SimConfig};
use gauss_renyi::perturbation::{convergence_study, MixtureModel};
use gauss_renyi::{Error, SpectralFn, TailPolicy};

use crate::table::{Cell, Table};
use crate::{BoundsArgs, CliError, ConvergenceArgs, DensityArgs, DigitsArgs, Discretization, SimulateArgs};

const DEFERRED: &str = "deferred (i=1 case in prior work)";

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_eps(eps: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(invalid(format!("--eps {eps} outside [0,1]")))
    }
}

fn check_order(order: usize) -> Result<(), CliError> {
    if order == 0 {
        Err(invalid("--order must be at least 1"))
    } else {
        Ok(())
    }
}

fn build_model(disc: &Discretization) -> Result<(TailPolicy, MixtureModel), CliError> {
    let policy = TailPolicy::new(disc.a_max, disc.taylor_order).map_err(|e| match e {
        Error::InvalidParameter(m) => invalid(m),
        other => other.into(),
    })?;
    if disc.degree < gauss_renyi::transfer::MIN_OPERATOR_DEGREE {
        return Err(invalid(format!(
            "--degree must be at least {}",
            gauss_renyi::transfer::MIN_OPERATOR_DEGREE
        )));
    }
    Ok((policy, MixtureModel::new(disc.degree, policy)?))
}

fn provenance(table: &mut Table, command: &str, config: String, seed: Option<u64>, tail_bound: Option<f64>) {
    table.meta("gauss-renyi", gauss_renyi::VERSION);
    table.meta("command", command);
    table.meta("config", config);
    table.meta("seed", seed.map_or_else(|| "none (deterministic)".to_string(), |s| s.to_string()));
    table.meta(
        "tail_bound",
        tail_bound.map_or_else(|| "none (no transfer operator applied)".to_string(), |b| format!("{b:.3e}")),
    );
}

fn disc_echo(d: &Discretization) -> String {
    format!("degree={} a_max={} taylor_order={}", d.degree, d.a_max, d.taylor_order)
}

pub fn density(a: &DensityArgs) -> Result<Table, CliError> {
    check_eps(a.eps)?;
    check_order(a.order)?;
    if a.grid_points < 2 {
        return Err(invalid("--grid-points must be at least 2"));
    }
    let (policy, model) = build_model(&a.disc)?;
    let series = model.series_mixture(a.order)?;
    let h = series.evaluate(a.eps);
    let residual = &model.annealed(a.eps)?.apply(&h)? - &h;

    let mut columns = vec!["x".to_string(), "h0".to_string()];
    columns.extend((1..=a.order).map(|n| format!("c{n}")));
    columns.extend(["h_eps".to_string(), "residual".to_string()]);
    let mut table = Table::new(&columns);
    provenance(
        &mut table,
        "density",
        format!("eps={} order={} grid_points={} {}", a.eps, a.order, a.grid_points, disc_echo(&a.disc)),
        None,
        Some(policy.error_bound(&h)),
    );
    table.meta("h0_fixed_point_residual", format!("{:.3e}", model.h0_residual()));
    let stages: Vec<String> = series.stage_residuals().iter().map(|r| format!("{r:.3e}")).collect();
    table.meta("stage_residuals", stages.join(" "));
    table.meta("node_residual_max", format!("{:.3e}", model.residual(a.eps, &h)?));

    let eval = |f: &SpectralFn, x: f64| -> Result<Cell, CliError> { Ok(Cell::Num(f.eval(x)?)) };
    for i in 0..a.grid_points {
        let x = i as f64 / (a.grid_points - 1) as f64;
        let mut row = vec![Cell::Num(x), eval(series.h0(), x)?];
        for c in series.coeffs() {
            row.push(eval(c, x)?);
        }
        row.push(eval(&h, x)?);
        row.push(Cell::Num(residual.eval(x)?.abs()));
        table.push(row);
    }
    Ok(table)
}

pub fn digits(a: &DigitsArgs) -> Result<Table, CliError> {
    check_eps(a.eps)?;
    check_order(a.order)?;
    if a.n_max == 0 {
        return Err(invalid("--n-max must be at least 1"));
    }
    let (policy, model) = build_model(&a.disc)?;
    let series = model.series_mixture(a.order)?;
    let law = digit_law(a.eps, &series, a.n_max)?;

    let mut table = Table::new(&["N", "p_approx", "p_gauss_kuzmin"]);
    provenance(
        &mut table,
        "digits",
        format!("eps={} order={} n_max={} {}", a.eps, a.order, a.n_max, disc_echo(&a.disc)),
        None,
        Some(policy.error_bound(&series.evaluate(a.eps))),
    );
    table.meta("analytic_tail", format!("{:.3e}", law.analytic_tail));
    let flagged: Vec<String> = law.flagged.iter().map(|n| n.to_string()).collect();
    table.meta("flagged_negative", if flagged.is_empty() { "none".to_string() } else { flagged.join(" ") });

    let mut gk_sum = 0.0;
    for (i, p) in law.probs.iter().enumerate() {
        let n = i as u64 + 1;
        let gk = gauss_kuzmin(n)?;
        gk_sum += gk;
        table.push(vec![Cell::Int(n), Cell::Num(*p), Cell::Num(gk)]);
    }
    let gk_tail = gauss_kuzmin_tail(a.n_max as u64);
    table.push(vec!["tail".into(), law.tail_mass.into(), gk_tail.into()]);
    table.push(vec!["total".into(), law.total().into(), (gk_sum + gk_tail).into()]);
    Ok(table)
}

pub fn convergence(a: &ConvergenceArgs) -> Result<Table, CliError> {
    check_order(a.order)?;
    if a.eps_grid.len() < 2 {
        return Err(invalid("--eps-grid needs at least two values for a slope"));
    }
    for &e in &a.eps_grid {
        if !(e > 0.0 && e <= 1.0) {
            return Err(invalid(format!("grid value {e} outside (0,1]")));
        }
    }
    let (policy, model) = build_model(&a.disc)?;
    let orders: Vec<usize> = (1..=a.order).collect();
    let rows = convergence_study(&model, &a.eps_grid, &orders)?;

    let mut table = Table::new(&["eps", "k", "sup_error_vs_eigensolve", "residual", "fitted_slope"]);
    let grid: Vec<String> = a.eps_grid.iter().map(|e| e.to_string()).collect();
    provenance(
        &mut table,
        "convergence",
        format!("eps_grid={} order={} {}", grid.join(";"), a.order, disc_echo(&a.disc)),
        None,
        Some(policy.error_bound(model.h0())),
    );
    for r in rows {
        table.push(vec![
            r.eps.into(),
            Cell::Int(r.order as u64),
            r.sup_error.into(),
            r.residual.into(),
            r.fitted_slope.into(),
        ]);
    }
    Ok(table)
}

pub fn bounds(a: &BoundsArgs) -> Result<Table, CliError> {
    if a.max_index == 0 {
        return Err(invalid("--max-index must be at least 1"));
    }
    let mut table = Table::new(&["i", "theta1", "C_i", "eps_max"]);
    provenance(&mut table, "bounds", format!("max_index={}", a.max_index), None, None);
    for i in 1..=a.max_index {
        match SpectralBounds::for_index(i) {
            Ok(b) => table.push(vec![Cell::Int(i as u64), b.theta1.into(), b.ci.into(), b.eps_max.into()]),
            Err(Error::DeferredIndex) => table.push(vec![Cell::Int(i as u64), Cell::Empty, Cell::Empty, DEFERRED.into()]),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(table)
}

fn law_rows(table: &mut Table, main: &EmpiricalLaw, variant: &EmpiricalLaw) {
    for n in 1..=main.n_max() {
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Int(main.counts[n - 1]),
            main.frequency(n).unwrap_or(f64::NAN).into(),
            main.standard_error(n).unwrap_or(f64::NAN).into(),
            Cell::Int(variant.counts[n - 1]),
            variant.frequency(n).unwrap_or(f64::NAN).into(),
        ]);
    }
    table.push(vec![
        "overflow".into(),
        Cell::Int(main.overflow),
        main.overflow_frequency().into(),
        Cell::Empty,
        Cell::Int(variant.overflow),
        variant.overflow_frequency().into(),
    ]);
}

pub fn simulate(a: &SimulateArgs) -> Result<Table, CliError> {
    check_eps(a.eps)?;
    if a.n_max == 0 {
        return Err(invalid("--n-max must be at least 1"));
    }
    let cfg = SimConfig::new(a.eps, a.samples, a.n_index, a.seed).map_err(|e| invalid(e.to_string()))?;
    let main = simulate_digit_freq(&cfg, a.n_max)?;
    let variant = simulate_digit_freq(&cfg.with_lead_bit(1)?, a.n_max)?;

    let mut table = Table::new(&["N", "count", "frequency", "standard_error", "count_lead1", "frequency_lead1"]);
    provenance(
        &mut table,
        "simulate",
        format!("eps={} samples={} n_index={} n_max={}", a.eps, a.samples, a.n_index, a.n_max),
        Some(a.seed),
        None,
    );
    table.meta("generator", "ChaCha8, one stream per chunk of 8192 samples");
    table.meta("undefined_digits", main.undefined);
    table.meta("lead1_variant", "same chains with the prepended map bit set to 1, reported for comparison");
    law_rows(&mut table, &main, &variant);
    Ok(table)
}
