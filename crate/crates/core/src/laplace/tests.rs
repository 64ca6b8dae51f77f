use std::sync::Arc;

use super::*;
use crate::fbm::HurstParams;
use crate::functional::{Constant, EndpointQuadratic, IntegralPoly, Sum};
use crate::grid::TimeGrid;
use crate::ode::{AffineField, TanhField};
use crate::stats::ks_two_sample;

fn basis(steps: usize, modes: usize) -> CmBasis {
    let g = Arc::new(TimeGrid::uniform(steps).unwrap());
    CmBasis::new(g, HurstParams::new(0.4).unwrap(), 2, modes).unwrap()
}

const S: [f64; 4] = [1.0, 0.3, -0.4, 0.8];

#[test]
fn zero_functional_is_trivial() {
    let b = basis(32, 3);
    let field = TanhField::standard();
    let (f, g) = (Constant(0.0), Constant(1.0));
    let y0 = [0.0, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let min = minimize_f_lambda(&p, &OptConfig::default()).unwrap();
    assert!(min.gamma.coeffs.iter().all(|c| c.abs() < 1e-12));
    assert_eq!(min.f_lambda, 0.0);
    let rep = expansion_constants(&p, &min, McConfig { samples: 10, seed: 1 }).unwrap();
    assert_eq!((rep.f_lambda_min, rep.c_coef, rep.alpha0), (0.0, 0.0, 1.0));
    for shift in [None, Some(min.gamma.coeffs.as_slice())] {
        let table = mc_laplace(&p, &[0.5, 0.1], shift, McConfig { samples: 50, seed: 2 }).unwrap();
        assert!(table.iter().all(|r| r.j_hat == 1.0 && r.se == 0.0));
    }
    let table = mc_laplace(&p, &[0.5, 0.3, 0.2], None, McConfig { samples: 10, seed: 2 }).unwrap();
    let fit = expansion_fit(&table, 0.0, 0.0, 1, None).unwrap();
    assert!((fit.coeffs[0] - 1.0).abs() < 1e-12 && fit.coeffs[1].abs() < 1e-12);
}

#[test]
fn gaussian_linear_minimiser_is_closed_form() {
    let b = basis(64, 4);
    let field = AffineField::constant(2, 2, S.to_vec());
    let v = vec![0.7, -0.5];
    let (f, g) = (EndpointQuadratic::linear(v.clone()), Constant(1.0));
    let y0 = [0.0, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let min = minimize_f_lambda(&p, &OptConfig::default()).unwrap();
    let w = [S[0] * v[0] + S[2] * v[1], S[1] * v[0] + S[3] * v[1]];
    for a in 0..p.len() {
        let end = *b.mode_image(a / 2).last().unwrap();
        assert!((min.gamma.coeffs[a] + w[a % 2] * end).abs() < 1e-8);
    }
    assert!(min.residual < 1e-9);
    assert!(!min.restarts_disagree);
}

#[test]
fn nonlinear_minimiser_is_a_local_minimum() {
    let b = basis(64, 3);
    let field = TanhField::standard();
    let f = Sum(vec![
        Box::new(EndpointQuadratic { c0: 0.0, v: vec![0.6, -0.4], q: vec![0.5, 0.1, 0.1, 0.3] }),
        Box::new(IntegralPoly { coeffs: vec![vec![0.0, 0.2], vec![0.0, 0.0, 0.1]] }),
    ]);
    let g = Constant(1.0);
    let y0 = [0.1, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let min = minimize_f_lambda(&p, &OptConfig::default()).unwrap();
    assert!(min.residual < 1e-6);
    let c = &min.gamma.coeffs;
    for a in 0..p.len() {
        for h in [1e-3, -1e-3] {
            let mut probe = c.clone();
            probe[a] += h;
            assert!(p.f_lambda(&probe).unwrap() >= min.f_lambda);
        }
    }
    let (_, grad) = p.value_and_gradient(c).unwrap();
    let fd_dir = 1e-5;
    for a in [0, 3] {
        let mut up = c.clone();
        up[a] += 0.3;
        let mut hi = up.clone();
        hi[a] += fd_dir;
        let mut lo = up.clone();
        lo[a] -= fd_dir;
        let fd = (p.f_lambda(&hi).unwrap() - p.f_lambda(&lo).unwrap()) / (2.0 * fd_dir);
        let (_, g_up) = p.value_and_gradient(&up).unwrap();
        assert!((fd - g_up[a]).abs() < 1e-7 * (1.0 + fd.abs()), "{fd} vs {}", g_up[a]);
    }
    assert!(grad.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn gaussian_quadratic_constants_match_det2() {
    let b = basis(32, 3);
    let field = AffineField::constant(2, 2, S.to_vec());
    let f = EndpointQuadratic { c0: 0.1, v: vec![0.5, 0.2], q: vec![0.8, 0.2, 0.2, 0.4] };
    let g = Constant(1.0);
    let y0 = [0.0, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let min = minimize_f_lambda(&p, &OptConfig::default()).unwrap();
    let rep = expansion_constants(&p, &min, McConfig { samples: 20_000, seed: 5 }).unwrap();
    assert_eq!(rep.c_coef, 0.0);
    assert!(rep.alpha0 > 0.0 && rep.nondegenerate);
    let check = rep.det2_check.expect("Gaussian regime detected");
    assert!(check.z_score.abs() < 3.0, "{check:?} vs α₀ {} ± {}", rep.alpha0, rep.alpha0_se);

    // Shifted estimates are exp(−a/ε²)·α₀ at every ε.
    let table = mc_laplace(&p, &[0.5, 0.35, 0.25], Some(&min.gamma.coeffs), McConfig { samples: 20_000, seed: 6 }).unwrap();
    let fit = expansion_fit(&table, rep.f_lambda_min, rep.c_coef, 0, Some((rep.alpha0, rep.alpha0_se))).unwrap();
    assert!(fit.z_score.unwrap().abs() < 3.0, "{fit:?}");
}

#[test]
fn shifted_and_plain_estimators_agree() {
    let b = basis(32, 2);
    let field = TanhField::standard();
    let f = EndpointQuadratic { c0: 0.0, v: vec![0.5, -0.3], q: vec![0.4, 0.0, 0.0, 0.4] };
    let g = Constant(1.0);
    let y0 = [0.0, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let min = minimize_f_lambda(&p, &OptConfig::default()).unwrap();
    let cfg = McConfig { samples: 20_000, seed: 11 };
    let plain = mc_laplace(&p, &[0.5], None, cfg).unwrap()[0];
    let shifted = mc_laplace(&p, &[0.5], Some(&min.gamma.coeffs), cfg).unwrap()[0];
    let z = (plain.j_hat - shifted.j_hat) / (plain.se.powi(2) + shifted.se.powi(2)).sqrt();
    assert!(z.abs() < 3.0, "{plain:?} {shifted:?}");
}

#[test]
fn mc_is_worker_independent() {
    let b = basis(16, 2);
    let field = TanhField::standard();
    let f = EndpointQuadratic::linear(vec![0.3, 0.1]);
    let g = Constant(1.0);
    let y0 = [0.0, 0.0];
    let p = LaplaceProblem::new(&field, &f, &g, &b, &y0).unwrap();
    let cfg = McConfig { samples: 300, seed: 4 };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| mc_laplace(&p, &[0.5, 0.25], None, cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn fit_recovers_synthetic_expansion() {
    let (a, c, a0, a1): (f64, f64, f64, f64) = (-0.3, 0.2, 1.4, -0.6);
    let eps = [0.4, 0.3, 0.2, 0.15, 0.1, 0.07];
    let noise = [0.004, -0.003, 0.002, -0.0015, 0.001, -0.0005];
    let table: Vec<McRow> = eps
        .iter()
        .zip(noise)
        .map(|(&e, n)| {
            let poly = a0 + a1 * e + n;
            let log_j = poly.ln() - a / (e * e) - c / e;
            McRow { eps: e, j_hat: log_j.exp(), se: 0.0, log_j_hat: log_j, rel_se: 0.003 / poly, n: 1000 }
        })
        .collect();
    let fit = expansion_fit(&table, a, c, 1, Some((a0, 0.0))).unwrap();
    assert!((fit.coeffs[0] - a0).abs() < 3.0 * fit.std_errors[0]);
    assert!((fit.coeffs[1] - a1).abs() < 3.0 * fit.std_errors[1]);
    assert!(fit.z_score.unwrap().abs() < 3.0);
    assert!(expansion_fit(&table[..1], a, c, 1, None).is_err());
    let clustered: Vec<McRow> = (0..4).map(|k| McRow { eps: 1.0 + 1e-5 * k as f64, ..table[0] }).collect();
    assert!(expansion_fit(&clustered, a, c, 3, None).is_err());
}

#[test]
fn ladder_values() {
    let l = kappa_ladder(0.4, 9).unwrap();
    let want = [0.0, 1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
    assert!(l.values().iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
    let l = kappa_ladder(0.3, 8).unwrap();
    let want = [0.0, 1.0, 2.0, 3.0, 10.0 / 3.0, 4.0, 13.0 / 3.0, 5.0];
    assert!(l.values().iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
    assert!(l.reconstruction_error() < 1e-12);
    assert!(kappa_ladder(1.0 / 3.0, 5).is_err());
    assert!(kappa_ladder(0.55, 5).is_err());
    assert!(kappa_ladder(0.2, 5).is_err());
}

#[test]
fn short_time_map() {
    assert_eq!(short_time_transform(1.0, 0.4).unwrap().eps, 1.0);
    let st = short_time_transform(0.0625, 0.4).unwrap();
    assert!((st.eps - 0.329_876_977_693_223_6).abs() < 1e-12);
    assert!((st.time_exponent(2.5) - 1.0).abs() < 1e-15);
    assert!(short_time_transform(0.0, 0.4).is_err());
}

#[test]
fn short_time_laws_agree() {
    let field = TanhField::standard();
    let (a, b) = short_time_ensembles(&field, 0.4, 0.25, &[0.0, 0.0], 64, 16, 800, 3).unwrap();
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
}
