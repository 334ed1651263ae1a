use std::f64::consts::PI;

use num_complex::Complex64;
use widths_core::extremal::eval_Phi;
use widths_core::oracle::{quadrature_convolution, sup_norm, PiecewiseConstant};
use widths_core::series_core::{eval_H, psi_real};
use widths_core::sk_spline::*;
use widths_core::thresholds::check_umova_z;
use widths_core::{Error, KernelParams, SeriesConfig};

fn params(h: f64, beta: f64) -> KernelParams {
    KernelParams::new(h, beta).unwrap()
}

#[test]
fn lambda_routes_agree_at_fixed_points() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.3);
    let g = NodeGrid::new(4, 0.1, &p).unwrap();
    for l in 1..=4 {
        let a = lambda_direct(l, &g, &p, &cfg).unwrap();
        let b = lambda_closed(l, &g, &p, &cfg).unwrap();
        assert!((a - b).norm() <= 1e-10 * b.norm(), "l={l}");
    }
    let p0 = params(1.0, 0.0);
    let g0 = NodeGrid::new(4, 0.05, &p0).unwrap();
    let a = lambda_direct(4, &g0, &p0, &cfg).unwrap();
    let b = lambda_closed(4, &g0, &p0, &cfg).unwrap();
    assert!((a - b).norm() <= 1e-10 * b.norm());
}

#[test]
fn lambda_top_index_real_for_cosine_kernel_phase() {
    let cfg = SeriesConfig::default();
    let p = params(0.9, -1.0);
    let g = NodeGrid::new(5, 0.0, &p).unwrap();
    let top = lambda_direct(10, &g, &p, &cfg).unwrap();
    assert!(top.im.abs() <= 1e-15 * top.norm().max(1.0));
    let all = lambda_direct_all(&g, &p, &cfg).unwrap();
    assert_eq!(all.len(), 10);
    // weights are 2n-periodic in l
    for l in 1..=10u64 {
        let again = lambda_direct(l + 10, &g, &p, &cfg);
        assert!(again.is_err() || (again.unwrap() - all[(l - 1) as usize]).norm() < 1e-15);
    }
}

#[test]
fn decomposition_matches_aliased_sum() {
    let cfg = SeriesConfig::default();
    for &(h, beta, n) in &[(1.0, 0.5, 9u64), (0.8, 0.4, 6), (1.0, 0.0, 81)] {
        let p = params(h, beta);
        let g = maximizer_grid(n, &p).unwrap();
        let recs = LambdaRecords::build(&g, &p, &cfg).unwrap();
        for r in &recs.records {
            let j = r.j;
            let lam = lambda_closed(n - j, &g, &p, &cfg).unwrap();
            let l_j = psi_real((n - j) as f64, h) / (n - j) as f64 + psi_real((n + j) as f64, h) / (n + j) as f64;
            let rebuilt = Complex64::from_polar(1.0, -(j as f64) * g.y()) * (Complex64::new(l_j * recs.s, 0.0) + r.rho * l_j);
            assert!((rebuilt - lam).norm() <= 1e-12 * lam.norm(), "h={h} n={n} j={j}");
            assert!((r.mu - lam.norm() / l_j).abs() <= 1e-12);
        }
        // λ_n is real at the maximizer
        assert!(recs.records[0].rho.im.abs() < 1e-15);
    }
}

#[test]
fn fundamental_spline_interpolates() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.3);
    for &(n, y) in &[(4u64, 0.1), (3, 0.5), (6, 0.0)] {
        let g = NodeGrid::new(n, y, &p).unwrap();
        let sys = build_fundamental_spline(&g, &p, &cfg).unwrap();
        assert_eq!(sys.alpha.len() as u64, 2 * n + 1);
        assert!(sys.alpha_sum().abs() < 1e-12);
        for k in 0..2 * n {
            let v = sys.eval(g.shifted(k), &p, &cfg).unwrap();
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "n={n} k={k} v={v}");
        }
    }
}

#[test]
fn spline_shift_moves_node_values() {
    let cfg = SeriesConfig::default();
    let p = params(1.2, 0.7);
    let a = build_fundamental_spline(&NodeGrid::new(5, 0.2, &p).unwrap(), &p, &cfg).unwrap();
    let b = build_fundamental_spline(&NodeGrid::new(5, 0.3, &p).unwrap(), &p, &cfg).unwrap();
    let ga = a.grid;
    let gb = b.grid;
    for k in 0..10 {
        let va = a.eval(ga.shifted(k), &p, &cfg).unwrap();
        let vb = b.eval(gb.shifted(k), &p, &cfg).unwrap();
        assert!((va - vb).abs() < 1e-10);
    }
}

#[test]
fn spline_reconstructed_from_derivative() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.3);
    let g = NodeGrid::new(4, 0.1, &p).unwrap();
    let sys = build_fundamental_spline(&g, &p, &cfg).unwrap();
    let breaks: Vec<f64> = (0..=8).map(|k| g.node(k)).collect();
    let phi = PiecewiseConstant::new(breaks, sys.derivative_pieces()).unwrap();
    for k in 0..8 {
        let conv = quadrature_convolution(|s| eval_H(s, &p, &cfg), &phi, g.shifted(k)).unwrap();
        let v = sys.alpha[0] + conv;
        let want = if k == 0 { 1.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-8, "k={k} v={v}");
    }
}

#[test]
fn derivative_routes_agree() {
    let cfg = SeriesConfig::default();
    let p = params(0.8, 0.4);
    let g = maximizer_grid(6, &p).unwrap();
    let forms = derivative_forms(&g, &p, &cfg).unwrap();
    assert!(forms.max_pairwise_gap() < 1e-9);
    let sys = build_fundamental_spline(&g, &p, &cfg).unwrap();
    for k in 1..=12u64 {
        let t = g.midpoint(k);
        let a = eval_derivative_repr(t, &g, &p, &cfg).unwrap();
        let b = sys.derivative(t).unwrap();
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "k={k}");
    }
    assert!(matches!(eval_derivative_repr(g.node(3), &g, &p, &cfg), Err(Error::Domain(_))));
}

#[test]
fn bounds_on_internal_quantities() {
    let cfg = SeriesConfig::default();
    for &beta in &[0.0, 0.5, 1.0] {
        let p = params(1.0, beta);
        let g = maximizer_grid(81, &p).unwrap();
        assert!(check_umova_z(81, p.q()));
        let gb = gamma_breakdown(&g, &p, &cfg).unwrap();
        assert!(gb.umova_z_ok && gb.n_ok);
        assert!(gb.bound_holds(), "beta={beta} {} > {}", gb.sum_abs, gb.lemma3_bound);
        let ib = gb.internal;
        assert_eq!(ib.j_checked, 81);
        assert!(ib.all() && ib.r_abs_holds && ib.r0_abs_holds, "{ib:?}");
        // |sin(ny₀ - βπ/2)| stays away from zero
        assert!(g.anchor().sin_cos().0.abs() > 0.99);
    }
}

#[test]
fn conditioning_error_names_index() {
    // at β = 0, y = 0 the aliased terms of λ_n cancel in pairs
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.0);
    let g = NodeGrid::new(3, 0.0, &p).unwrap();
    match build_fundamental_spline(&g, &p, &cfg) {
        Err(Error::Conditioning { l, .. }) => assert_eq!(l, 3),
        other => panic!("expected conditioning error, got {other:?}"),
    }
}

#[test]
fn grid_rejects_shift_outside_cell() {
    let p = params(1.0, 0.0);
    assert!(NodeGrid::new(4, PI / 4.0, &p).is_err());
    assert!(NodeGrid::new(4, -0.01, &p).is_err());
    let g = NodeGrid::new(4, 0.0, &p).unwrap();
    assert_eq!(g.node(0), 0.0);
    assert!((g.node(8) - 2.0 * PI).abs() < 1e-15);
}

#[test]
fn quadrature_reproduces_extremal_function() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.5);
    let phi = PiecewiseConstant::sign_sin(3);
    for i in 0..64 {
        let x = -PI + 2.0 * PI * (i as f64 + 0.37) / 64.0;
        let a = quadrature_convolution(|s| eval_H(s, &p, &cfg), &phi, x).unwrap();
        let b = eval_Phi(x, 3, &p, &cfg).unwrap();
        assert!((a - b).abs() < 1e-8, "x={x} {a} {b}");
    }
}

#[test]
fn grid_maximum_of_extremal_function() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.0);
    let r = sup_norm(|t| eval_Phi(t, 3, &p, &cfg).unwrap(), PI / 3.0);
    assert!((r.max_value - 0.12636364711288381).abs() < 1e-15);
    assert!((r.argmax - PI / 6.0).abs() < 1e-7);
    assert!(r.refinement_width <= 1e-14);
}
