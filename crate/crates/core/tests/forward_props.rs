mod common;

use common::rng;
use gpc_core::prior::sample_prior_batch;
use gpc_core::{
    gpc_observation, taylor_forward, total_degree_set, AffineOperatorFamily, GpcError, Mesh1D, MeshF32,
    ObservationSetup, ParamVector, PriorModel, PriorModelF32,
};
use rand::Rng;

fn family(dims: usize, elems: usize) -> AffineOperatorFamily<f64> {
    let mesh = Mesh1D::uniform(elems).unwrap();
    let model = PriorModel::build(dims, 2.0, 0.5, &mesh, 1.0).unwrap();
    AffineOperatorFamily::assemble(&model, &mesh, |_| 1.0).unwrap()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn a_priori_and_lipschitz_bounds() {
    let mesh = Mesh1D::<f64>::uniform(40).unwrap();
    let f_dual = {
        let fam = family(1, 40);
        mesh.dual_norm(fam.load()).unwrap()
    };
    let mut r = rng(21);
    for _ in 0..50 {
        let u: Vec<f64> = (0..40).map(|_| r.random_range(0.5..2.0)).collect();
        let v: Vec<f64> = u.iter().map(|&x| x + r.random_range(-0.2..0.2)).collect();
        let solve = |c: &[f64]| {
            let m = PriorModel::from_fields(c.to_vec(), vec![]).unwrap();
            let fam = AffineOperatorFamily::assemble(&m, &mesh, |_| 1.0).unwrap();
            fam.solve_at(&ParamVector::zeros(0)).unwrap()
        };
        let (pu, pv) = (solve(&u), solve(&v));
        let amin = u.iter().chain(&v).copied().fold(f64::INFINITY, f64::min);
        let dist = u.iter().zip(&v).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(mesh.v_norm(&pu) <= f_dual / amin * (1.0 + 1e-12));
        let diff: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a - b).collect();
        assert!(mesh.v_norm(&diff) <= f_dual / (amin * amin) * dist * (1.0 + 1e-12));
    }
}

#[test]
fn prior_bounds_hold_on_samples() {
    let fam = family(8, 64);
    let (amin, amax) = fam.bounds();
    let model = PriorModel::build(8, 2.0, 0.5, fam.mesh(), 1.0).unwrap();
    for y in sample_prior_batch::<f64>(8, 500, 5) {
        let u = model.coefficient_at(&y).unwrap();
        assert!(u.iter().all(|&v| v >= amin - 1e-14 && v <= amax + 1e-14));
    }
}

#[test]
fn uea_violation_is_reported() {
    let mesh = Mesh1D::<f64>::uniform(4).unwrap();
    let model = PriorModel::from_fields(vec![1.0; 4], vec![vec![0.6; 4], vec![0.5; 4]]).unwrap();
    let err = AffineOperatorFamily::assemble(&model, &mesh, |_| 1.0).unwrap_err();
    assert!(matches!(err, GpcError::UeaViolation { .. }), "{err:?}");
    assert!(PriorModel::<f64>::build(3, 2.0, 1.0, &mesh, 1.0).is_err());
}

#[test]
fn taylor_surrogate_matches_solves_on_half_box() {
    let fam = family(2, 32);
    let lam = total_degree_set(2, 24.0, &[1.0, 1.0], 10_000).unwrap();
    let series = taylor_forward(&fam, &lam).unwrap();
    let mut r = rng(22);
    for _ in 0..50 {
        let y = ParamVector::new(vec![r.random_range(-0.5..=0.5), r.random_range(-0.5..=0.5)]).unwrap();
        let exact = fam.solve_at(&y).unwrap();
        assert!(max_rel(&series.evaluate(y.as_slice()), &exact) < 1e-6);
    }
}

#[test]
fn observation_series_matches_observed_solves() {
    let fam = family(2, 32);
    let setup = ObservationSetup::evenly_spaced(3, 0.2, 1e-3).unwrap();
    let lam = total_degree_set(2, 24.0, &[1.0, 1.0], 10_000).unwrap();
    let g = gpc_observation(&fam, &setup, &lam).unwrap();
    let mut r = rng(23);
    for _ in 0..50 {
        let y = ParamVector::new(vec![r.random_range(-0.5..=0.5), r.random_range(-0.5..=0.5)]).unwrap();
        let exact = setup.observe(fam.mesh(), &fam.solve_at(&y).unwrap());
        assert!(max_rel(&g.evaluate(y.as_slice()), &exact) < 1e-6);
    }
}

#[test]
fn synthetic_noise_has_requested_variance() {
    let fam = family(2, 16);
    let gamma = vec![1e-2, 4e-3, 2.5e-4];
    let template = ObservationSetup::new(vec![(0.1, 0.3), (0.4, 0.6), (0.7, 0.9)], vec![0.0; 3], gamma.clone()).unwrap();
    let y = ParamVector::new(vec![0.3, -0.2]).unwrap();
    let clean = template.observe(fam.mesh(), &fam.solve_at(&y).unwrap());
    let draws = 10_000;
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for seed in 0..draws {
        let d = template.synthesize(&fam, &y, seed).unwrap();
        for k in 0..3 {
            let eta = d.delta()[k] - clean[k];
            sum[k] += eta;
            sq[k] += eta * eta;
        }
    }
    for k in 0..3 {
        let n = draws as f64;
        let var = (sq[k] - sum[k] * sum[k] / n) / (n - 1.0);
        assert!((var / gamma[k] - 1.0).abs() < 0.1, "k {k}: {var} vs {}", gamma[k]);
    }
    let a = template.synthesize(&fam, &y, 7).unwrap();
    let b = template.synthesize(&fam, &y, 7).unwrap();
    assert_eq!(a.delta(), b.delta());
    let exact = template.with_gamma(vec![1e-300; 3]).unwrap().synthesize(&fam, &y, 7).unwrap();
    assert!(max_rel(exact.delta(), &clean) < 1e-12);
}

#[test]
fn single_precision_pipeline() {
    let mesh = MeshF32::uniform(32).unwrap();
    let model = PriorModelF32::build(2, 2.0, 0.5, &mesh, 1.0).unwrap();
    let fam = AffineOperatorFamily::assemble(&model, &mesh, |_| 1.0f32).unwrap();
    let lam = total_degree_set(2, 10.0, &[1.0, 1.0], 1000).unwrap();
    let series = taylor_forward(&fam, &lam).unwrap();
    let y = ParamVector::new(vec![0.3f32, -0.4]).unwrap();
    let exact = fam.solve_at(&y).unwrap();
    let approx = series.evaluate(y.as_slice());
    let scale = exact.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    let err = exact.iter().zip(&approx).fold(0.0f32, |m, (a, b)| m.max((a - b).abs()));
    assert!(err / scale < 1e-4, "{err}");
}
