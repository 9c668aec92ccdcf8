use std::sync::Arc;

use kgscatter::spectral::{apply_to_field, bracket, from_spectrum, l_operator, to_spectrum, Multiplier};
use kgscatter::{Field, Field32, Grid, Grid32, C64};
use proptest::prelude::*;

fn bump_sum(grid: &Arc<Grid>, bumps: &[(f64, f64, f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        bumps.iter().map(|&(a, c, s, k)| C64::from_polar(a * (-(x - c).powi(2) / (2.0 * s * s)).exp(), k * x)).sum()
    })
}

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.1..2.0f64, -10.0..10.0f64, 0.8..3.0f64, -2.0..2.0f64), 1..4)
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_and_parseval(b in bumps()) {
        let grid = Grid::new(60.0, 1024).unwrap();
        let f = bump_sum(&grid, &b);
        let s = to_spectrum(&f);
        prop_assert!(max_diff(&from_spectrum(&s), &f) <= 1e-12 * f.sup_norm());
        let phys: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
        let freq: f64 = s.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dxi();
        prop_assert!((phys - freq).abs() <= 1e-12 * phys);
    }

    #[test]
    fn propagator_is_a_unitary_group(b in bumps(), t in -20.0..20.0f64, s in -20.0..20.0f64) {
        let grid = Grid::new(60.0, 1024).unwrap();
        let f = bump_sum(&grid, &b);
        let two = apply_to_field(&apply_to_field(&f, Multiplier::Propagator(t)).unwrap(), Multiplier::Propagator(s)).unwrap();
        let one = apply_to_field(&f, Multiplier::Propagator(t + s)).unwrap();
        prop_assert!(max_diff(&two, &one) <= 1e-11 * f.sup_norm());
        prop_assert!((one.norm_l2() - f.norm_l2()).abs() <= 1e-12 * f.norm_l2());
    }

    #[test]
    fn bracket_powers_compose(b in bumps(), p in -2.0..2.0f64, q in -2.0..2.0f64) {
        let grid = Grid::new(60.0, 1024).unwrap();
        let f = bump_sum(&grid, &b);
        let two = apply_to_field(&apply_to_field(&f, Multiplier::BracketPow(p)).unwrap(), Multiplier::BracketPow(q)).unwrap();
        let one = apply_to_field(&f, Multiplier::BracketPow(p + q)).unwrap();
        prop_assert!(max_diff(&two, &one) <= 1e-9 * one.sup_norm().max(f.sup_norm()));
    }
}

#[test]
fn l_operator_conjugates_under_the_free_flow() {
    let grid = Grid::new(200.0, 4096).unwrap();
    let v0 = Field::from_real_fn(&grid, |x| (-x * x / 2.0).exp() * (1.0 + 0.3 * x));
    let t = 12.0;
    let flow = |f: &Field| apply_to_field(f, Multiplier::Propagator(t)).unwrap();
    let lhs = l_operator(&flow(&v0), t);
    let rhs = flow(&l_operator(&v0, 0.0));
    assert!(max_diff(&lhs, &rhs) < 1e-10, "{}", max_diff(&lhs, &rhs));
}

#[test]
fn spectrum_of_a_gaussian_is_a_gaussian() {
    let grid = Grid::new(40.0, 512).unwrap();
    let s = to_spectrum(&Field::from_real_fn(&grid, |x| (-x * x / 2.0).exp()));
    let err = s.sorted().iter().map(|(xi, c)| (c - C64::new((-xi * xi / 2.0).exp(), 0.0)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
}

#[test]
fn single_and_double_precision_agree() {
    let g64 = Grid::new(50.0, 1024).unwrap();
    let g32 = Grid32::new(50.0, 1024).unwrap();
    let f64v = Field::from_real_fn(&g64, |x| (-x * x / 4.0).exp());
    let f32v = Field32::from_real_fn(&g32, |x| (-x * x / 4.0).exp());
    let a = apply_to_field(&f64v, Multiplier::Propagator(7.0)).unwrap();
    let b = apply_to_field(&f32v, Multiplier::Propagator(7.0f32)).unwrap();
    let err = a.values().iter().zip(b.values()).map(|(p, q)| (p - C64::new(q.re as f64, q.im as f64)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
    assert!((bracket(3.0f32) as f64 - bracket(3.0f64)).abs() < 1e-6);
}
