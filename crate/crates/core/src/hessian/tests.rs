use std::sync::Arc;

use super::*;
use crate::fbm::HurstParams;
use crate::functional::{Constant, EndpointQuadratic, IntegralPoly, Sum};
use crate::grid::TimeGrid;
use crate::ode::{AffineField, TanhField};
use crate::taylor::compute_phi0;

fn setup(steps: usize, modes: usize) -> (Arc<TimeGrid>, CmBasis, SampledPath) {
    let g = Arc::new(TimeGrid::uniform(steps).unwrap());
    let basis = CmBasis::new(g.clone(), HurstParams::new(0.4).unwrap(), 2, modes).unwrap();
    let gamma = basis.path(&[0.3, -0.2, 0.1, 0.25]).unwrap();
    (g, basis, gamma)
}

fn test_functional() -> Sum {
    Sum(vec![
        Box::new(EndpointQuadratic { c0: 0.0, v: vec![1.0, -0.5], q: vec![0.6, 0.2, 0.2, 0.4] }),
        Box::new(IntegralPoly { coeffs: vec![vec![0.0, 0.3, 0.2], vec![0.0, 0.0, 0.0, 0.1]] }),
    ])
}

#[test]
fn matrix_matches_forms_and_second_differences() {
    let (_, basis, gamma) = setup(128, 4);
    let field = TanhField::standard();
    let y0 = [0.1, -0.2];
    let ctx = TaylorContext::new(&field, gamma.clone(), &y0).unwrap();
    let f = test_functional();
    let h = hessian_matrix(&f, &ctx, &basis, 8).unwrap();
    assert!(h.asymmetry() < 1e-10);
    for (a, b) in [(0, 0), (1, 4), (3, 6), (7, 2)] {
        let (ea, eb) = (basis.element(a), basis.element(b));
        let (v1, v2) = ctx.v_forms(&ea, &eb).unwrap();
        let g = f.grad(ctx.phi0());
        let want = crate::functional::dual_pair(&g, &v1.add(&v2).unwrap())
            + f.hess(ctx.phi0(), &ctx.chi(&ea).unwrap(), &ctx.chi(&eb).unwrap());
        assert!((h.a[(a, b)] - want).abs() < 1e-10 * (1.0 + want.abs()), "({a},{b}) {} vs {want}", h.a[(a, b)]);

        let eps = 1e-3;
        let obj = |s: f64, t: f64| {
            let z = gamma.axpy(s, &ea).unwrap().axpy(t, &eb).unwrap();
            f.value(&compute_phi0(&field, &z, &y0).unwrap())
        };
        let fd = (obj(eps, eps) - obj(eps, -eps) - obj(-eps, eps) + obj(-eps, -eps)) / (4.0 * eps * eps);
        assert!((fd - h.a[(a, b)]).abs() < 1e-3 * h.a[(a, b)].abs().max(0.05), "({a},{b}) fd {fd} vs {}", h.a[(a, b)]);
    }
}

#[test]
fn truncations_are_nested() {
    let (_, basis, gamma) = setup(64, 8);
    let field = TanhField::standard();
    let ctx = TaylorContext::new(&field, gamma, &[0.0, 0.0]).unwrap();
    let f = test_functional();
    let small = hessian_matrix(&f, &ctx, &basis, 6).unwrap();
    let big = hessian_matrix(&f, &ctx, &basis, 16).unwrap();
    assert!((small.a.clone() - big.a.view((0, 0), (6, 6))).amax() < 1e-10);
    let zero = hessian_matrix(&Constant(3.0), &ctx, &basis, 6).unwrap();
    assert_eq!(zero.a.amax(), 0.0);
    assert!(hessian_matrix(&f, &ctx, &basis, 17).is_err());
}

#[test]
fn gaussian_linear_case_closed_form() {
    // σ ≡ S, β = 0, F = ½⟨Q y₁, y₁⟩: H_ab = ⟨Q S e_a(1), S e_b(1)⟩.
    let (g, basis, gamma) = setup(64, 4);
    let s = vec![1.0, 0.3, -0.4, 0.8];
    let field = AffineField::constant(2, 2, s.clone());
    let ctx = TaylorContext::new(&field, gamma, &[0.0, 0.0]).unwrap();
    let q = vec![0.7, 0.1, 0.1, -0.3];
    let f = EndpointQuadratic { c0: 0.0, v: vec![0.2, 0.1], q: q.clone() };
    let h = hessian_matrix(&f, &ctx, &basis, 8).unwrap();
    let end = g.steps();
    let se = |a: usize| {
        let e = basis.element(a);
        let p = e.point(end);
        [s[0] * p[0] + s[1] * p[1], s[2] * p[0] + s[3] * p[1]]
    };
    for a in 0..8 {
        for b in 0..8 {
            let (u, v) = (se(a), se(b));
            let want = u[0] * (q[0] * v[0] + q[1] * v[1]) + u[1] * (q[2] * v[0] + q[3] * v[1]);
            assert!((h.a[(a, b)] - want).abs() < 1e-12);
        }
    }
    assert_eq!(h.v1_part.amax(), 0.0);
    assert_eq!(h.v2_part.amax(), 0.0);
}

#[test]
fn csv_has_one_row_per_element() {
    let (_, basis, gamma) = setup(32, 2);
    let field = TanhField::standard();
    let ctx = TaylorContext::new(&field, gamma, &[0.0, 0.0]).unwrap();
    let h = hessian_matrix(&test_functional(), &ctx, &basis, 4).unwrap();
    let mut buf = Vec::new();
    h.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.split(',').count() == 4));
    assert_eq!(h.meta.gamma_hash.len(), 64);
}

#[test]
fn hs_tail_constant_field_vanishes() {
    let g = Arc::new(TimeGrid::uniform(64).unwrap());
    let field = AffineField::constant(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
    let ctx = TaylorContext::new(&field, SampledPath::zeros(g, 2), &[0.0, 0.0]).unwrap();
    let rep = hs_tail(&ctx, &HurstParams::new(0.4).unwrap(), &[4, 8]).unwrap();
    assert!(rep.partial_sums.iter().all(|s| *s == 0.0));
}

#[test]
fn hs_tail_partial_sums_grow() {
    let (_, _, gamma) = setup(128, 4);
    let field = TanhField::standard();
    let ctx = TaylorContext::new(&field, gamma, &[0.0, 0.0]).unwrap();
    let rep = hs_tail(&ctx, &HurstParams::new(0.4).unwrap(), &[2, 4, 8]).unwrap();
    assert!(rep.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(rep.diagonal.iter().all(|v| v.is_finite()));
}
