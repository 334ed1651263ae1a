use widths_core::extremal::best_approx_value;
use widths_core::kushpel::{chain_point, verify_C};
use widths_core::thresholds::{check_classical_range, condition_12_holds, n_h};
use widths_core::{KernelParams, SeriesConfig};

fn params(h: f64, beta: f64) -> KernelParams {
    KernelParams::new(h, beta).unwrap()
}

#[test]
fn certified_at_width_threshold() {
    let cfg = SeriesConfig::default();
    let p = params(1.0, 0.5);
    let r = verify_C(81, &p, &cfg).unwrap();
    assert!(r.satisfied && r.margin > 0.0 && r.zero_count == 0);
    assert!(r.sufficient_holds());
    assert_eq!(r.signs.len(), 162);
    let eps = r.epsilon.unwrap();
    for k in 1..=162u64 {
        assert!(r.e_flag(k));
        let alt = if k % 2 == 0 { 1 } else { -1 };
        assert_eq!(r.signs.get(k - 1), alt * eps);
    }
    let w = best_approx_value(81, &p).unwrap();
    let lb = r.lower_bound.unwrap();
    assert!((lb - w.value).abs() <= 1e-12 * w.value);
}

#[test]
fn certified_in_classical_range() {
    assert!(check_classical_range(2.0, 0.0));
    let r = verify_C(3, &params(2.0, 0.0), &SeriesConfig::default()).unwrap();
    assert!(r.satisfied && r.margin > 0.0);
}

#[test]
fn certified_below_threshold_at_nine() {
    // the threshold inequality fails at n = 9 but the sign pattern holds
    assert!(!condition_12_holds(9, 1.0));
    let r = verify_C(9, &params(1.0, 0.5), &SeriesConfig::default()).unwrap();
    assert!(r.satisfied);
    assert!((r.margin - 0.0659662020619562).abs() < 1e-12);
    assert!(!r.gamma.umova_z_ok);
}

#[test]
fn margins_positive_across_moderate_grid() {
    let cfg = SeriesConfig::default();
    for &h in &[0.5, 1.0, 2.0] {
        let n = n_h(h).unwrap();
        for &beta in &[0.0, 0.25, 0.5, 1.0, 1.3] {
            let r = verify_C(n, &params(h, beta), &cfg).unwrap();
            assert!(r.satisfied && r.margin > 0.0 && r.zero_count == 0, "h={h} beta={beta}");
            assert!(r.sufficient_margin > 0.0);
            assert!(r.gamma.bound_holds());
            // both routes agree on the bracket minimum
            assert!((r.margin - r.sufficient_margin).abs() < 1e-10, "h={h} beta={beta}");
        }
    }
}

#[test]
fn chain_point_examples() {
    let p = chain_point(0.35, 100);
    assert!(p.antecedent && p.ner2 && p.ner1 && p.n0);
    // antecedent fails: vacuously true
    let v = chain_point(0.9, 9);
    assert!(!v.antecedent && v.holds());
}
