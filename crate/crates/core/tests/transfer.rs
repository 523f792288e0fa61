use std::f64::consts::LN_2;

use gauss_renyi::funcspace::SpectralFn;
use gauss_renyi::maps::MapKind;
use gauss_renyi::oracle::brute_force_transfer;
use gauss_renyi::perturbation::MixtureModel;
use gauss_renyi::transfer::{
    annealed, apply_transfer, assemble_operator, invariant_density, invariant_density_report, resolvent_solve,
    transfer_tail_bound, Resolvent, TailPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss_density(degree: usize) -> SpectralFn {
    SpectralFn::from_callable(|x| 1.0 / ((1.0 + x) * LN_2), degree).unwrap()
}

/// Random `Σ_{i<3} a_i/(1 + b_i x)` with `|a_i| < 1/3` and `b_i ∈ (0,1)`, so
/// that `|f| < 1` and `|f''''| < 24`.
fn random_smooth(rng: &mut ChaCha8Rng, degree: usize) -> SpectralFn {
    let terms: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.random_range(-1.0 / 3.0..1.0 / 3.0), rng.random_range(0.0..1.0)))
        .collect();
    SpectralFn::from_callable(|x| terms.iter().map(|(a, b)| a / (1.0 + b * x)).sum(), degree).unwrap()
}

fn zero_mean(f: SpectralFn) -> SpectralFn {
    let m = f.integrate();
    &f - &SpectralFn::constant(m, f.degree())
}

fn node_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn degree_32_fixed_point_and_mass_rows() {
    let policy = TailPolicy::default();
    let m0 = assemble_operator(MapKind::Gauss, 32, policy).unwrap();
    let h = gauss_density(32).node_values();
    assert!(node_diff(&m0.apply_values(&h), &h) < 1e-9);

    for kind in [MapKind::Gauss, MapKind::Renyi] {
        let m = assemble_operator(kind, 32, policy).unwrap();
        let q = m.quadrature();
        for j in 0..=32 {
            let col: f64 = (0..=32).map(|i| q[i] * m.entries()[(i, j)]).sum();
            assert!((col - q[j]).abs() < 1e-10, "{kind} column {j}: {col} vs {}", q[j]);
        }
    }
}

#[test]
fn matrix_agrees_with_direct_application() {
    let policy = TailPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in [MapKind::Gauss, MapKind::Renyi] {
        let m = assemble_operator(kind, 32, policy).unwrap();
        for _ in 0..20 {
            let f = random_smooth(&mut rng, 32);
            let via_matrix = m.apply(&f).unwrap();
            let direct = apply_transfer(kind, &f, policy);
            let d = node_diff(&via_matrix.node_values(), &direct.node_values());
            assert!(d < 1e-11, "{kind}: {d:e}");
        }
    }
}

#[test]
fn mass_conservation_of_application() {
    let policy = TailPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in [MapKind::Gauss, MapKind::Renyi] {
        for _ in 0..10 {
            let f = random_smooth(&mut rng, 40);
            let f = &f + &SpectralFn::constant(0.7 - f.integrate(), 40);
            let g = apply_transfer(kind, &f, policy);
            let bound = transfer_tail_bound(&f, policy);
            assert!((g.integrate() - 0.7).abs() < bound + 1e-12, "{kind}");
            assert!((g.integrate() - 0.7).abs() < 1e-10);
        }
    }
}

#[test]
fn positivity_preserved() {
    let policy = TailPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for kind in [MapKind::Gauss, MapKind::Renyi] {
        for _ in 0..10 {
            let p = random_smooth(&mut rng, 20);
            let f = SpectralFn::from_callable(|x| p.eval(x).unwrap().powi(2), 48).unwrap();
            let g = apply_transfer(kind, &f, policy);
            let bound = transfer_tail_bound(&f, policy);
            let min = g.node_values().into_iter().fold(f64::INFINITY, f64::min);
            assert!(min >= -bound, "{kind}: {min}");
        }
    }
}

#[test]
fn invariant_density_of_gauss_operator() {
    let m0 = assemble_operator(MapKind::Gauss, 128, TailPolicy::default()).unwrap();
    let report = invariant_density_report(&m0).unwrap();
    assert!((&report.density - &gauss_density(128)).norm_sup() < 1e-10);
    assert!(report.residual < 1e-12);
}

#[test]
fn invariant_density_of_mixture() {
    let model = MixtureModel::default();
    let eps = 0.05;
    let m = model.annealed(eps).unwrap();
    let h = invariant_density(&m).unwrap();
    assert!((h.integrate() - 1.0).abs() < 1e-12);
    let v = h.node_values();
    assert!(node_diff(&m.apply_values(&v), &v) < 1e-12);
    let series = model.series_mixture(3).unwrap();
    assert!((&series.evaluate(eps) - &h).norm_sup() < 3.0 * eps.powi(4));
}

#[test]
fn density_continuous_in_eps() {
    let model = MixtureModel::default();
    for eps in [0.0, 0.05, 0.1, 0.2] {
        let a = model.eigensolve(eps).unwrap();
        let b = model.eigensolve(eps + 1e-6).unwrap();
        assert!((&a - &b).norm_sup() < 1e-4, "eps {eps}");
    }
}

#[test]
fn annealed_is_affine() {
    let model = MixtureModel::new(16, TailPolicy::default()).unwrap();
    let half = annealed(0.5, model.l0(), model.l1()).unwrap();
    let mean = (model.l0().entries() + model.l1().entries()) * 0.5;
    assert!((half.entries() - mean).amax() < 1e-15);
    assert!(annealed(-0.1, model.l0(), model.l1()).is_err());
}

#[test]
fn resolvent_first_order_response() {
    let model = MixtureModel::default();
    let h0 = model.h0();
    let g = &model.l1().apply(h0).unwrap() - h0;
    let u = resolvent_solve(model.l0(), &g).unwrap();
    let res = Resolvent::new(model.l0()).unwrap();
    assert!(res.residual(&u, &g) < 1e-9);
    assert!(u.integrate().abs() < 1e-10);
    assert_eq!(resolvent_solve(model.l0(), &SpectralFn::zero(128)).unwrap().node_sup(), 0.0);
}

#[test]
fn resolvent_matches_neumann_series() {
    let model = MixtureModel::default();
    let res = Resolvent::new(model.l0()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let g = zero_mean(random_smooth(&mut rng, 128));
        let u = res.solve(&g).unwrap();
        assert!(res.residual(&u, &g) < 1e-9);

        let mut term = g.node_values();
        let mut sum = term.clone();
        for _ in 0..500 {
            term = model.l0().apply_values(&term);
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            if term.iter().fold(0.0f64, |m, t| m.max(t.abs())) < 1e-11 {
                break;
            }
        }
        let neumann = SpectralFn::from_values(&sum);
        assert!((&u - &neumann).norm_sup() < 1e-8);
    }
}

#[test]
fn tail_policy_against_brute_force() {
    let policy = TailPolicy::default();
    let a_huge = 100_000u64;
    let h0 = gauss_density(128);
    let recip = SpectralFn::from_callable(|x| 1.0 / (1.0 + x), 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let f = random_smooth(&mut rng, 24);
    for (kind, f) in [(MapKind::Gauss, &recip), (MapKind::Renyi, &h0), (MapKind::Gauss, &f), (MapKind::Renyi, &f)] {
        let g = apply_transfer(kind, f, policy);
        for i in 0..20 {
            let y = (i as f64 + 0.5) / 20.0;
            let brute = brute_force_transfer(kind, f, y, a_huge).unwrap();
            let d = (g.eval(y).unwrap() - brute).abs();
            assert!(d < 1e-9 + 1.0 / a_huge as f64, "{kind} y={y}: {d:e}");
        }
    }
    let g = apply_transfer(MapKind::Renyi, &h0, policy);
    let brute = brute_force_transfer(MapKind::Renyi, &h0, 0.5, 1_000_000).unwrap();
    assert!((g.eval(0.5).unwrap() - brute).abs() < 1e-9 + 1e-6);
}
