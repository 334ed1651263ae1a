use std::sync::OnceLock;

use widths_core::selfcheck::{self, Check};
use widths_core::SeriesConfig;

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

fn report(c: &Check) {
    println!("{}", c.line());
    assert!(c.passed, "{}", c.line());
}

fn certification() -> &'static (Check, Vec<(f64, f64, u64)>) {
    static CELL: OnceLock<(Check, Vec<(f64, f64, u64)>)> = OnceLock::new();
    CELL.get_or_init(|| selfcheck::certification(&cfg()))
}

#[test]
fn criterion_01_symmetry_roots() {
    report(&selfcheck::symmetry_roots());
}

#[test]
fn criterion_02_sup_norm_identity() {
    report(&selfcheck::sup_norm_identity(&cfg()));
}

#[test]
fn criterion_03_best_trig_approximation() {
    report(&selfcheck::remez_equivalence(&cfg()));
}

#[test]
fn criterion_04_threshold_values() {
    report(&selfcheck::threshold_values());
}

#[test]
fn criterion_05_eigenvalue_equivalence() {
    report(&selfcheck::eigenvalue_equivalence(&cfg()));
}

#[test]
fn criterion_06_derivative_representations() {
    report(&selfcheck::representation_equivalence(&cfg()));
}

#[test]
fn criterion_07_correction_bound() {
    report(&selfcheck::correction_bound(&cfg()));
}

#[test]
fn criterion_08_sign_condition() {
    report(&certification().0);
}

#[test]
fn criterion_09_asymptotic_constant() {
    report(&selfcheck::asymptotic_constant(&certification().1));
}

#[test]
fn criterion_10_implication_chain() {
    report(&selfcheck::chain());
}

#[test]
fn criterion_11_pq_lower_bound() {
    report(&selfcheck::pq_lower(&cfg()));
}
