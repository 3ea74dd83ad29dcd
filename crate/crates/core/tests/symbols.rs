use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use specinv_core::opcore::Op;
use specinv_core::rng::{seeded, trial_rng};
use specinv_core::symbols::*;
use specinv_core::C64;

fn arc_bump(c: f64, r: f64) -> impl Fn(f64, f64) -> f64 {
    move |_, y| {
        let t = (y - c) / r;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

#[test]
fn l2_estimate_over_seeded_families() {
    let mut violations = 0;
    for trial in 0..20 {
        let mut rng = trial_rng(17, "symbols-l2", trial);
        let n = [16, 32, 48][trial % 3];
        let family = TorusOperatorFamily::random(n, 3, &mut rng).unwrap();
        let (c, r) = (rng.gen_range(2.5..3.8), rng.gen_range(1.0..2.4));
        let cutoffs = Cutoffs::from_fn(&family, arc_bump(c, r), arc_bump(PI, 2.9)).unwrap();
        let tables: Vec<SymbolTable> = (0..3).map(|k| local_symbol(&family, &cutoffs, k).unwrap()).collect();
        let report = symbol_estimate_suite(&tables, &family, &cutoffs, 2, 2).unwrap();
        violations += report.l2_violations();
        assert!(report.estimates.iter().all(|e| e.sup.is_finite() && e.q > 0.0));
    }
    assert_eq!(violations, 0);
}

#[test]
fn difference_table_converges_at_first_order() {
    let report = table_refinement(&[32, 64, 128, 256]).unwrap();
    for (alpha, ratios) in report.ratios() {
        for r in ratios {
            assert!((1.7..2.3).contains(&r), "alpha {alpha}: {:?}", report.errors);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplication_symbols_are_exactly_eta_independent(s in any::<u64>()) {
        let mut rng = seeded(s);
        let coeffs: Vec<C64> = (0..3).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let op = multiplication_op(32, |y| coeffs[0] + coeffs[1] * y.cos() + coeffs[2] * (2.0 * y).sin());
        let family = TorusOperatorFamily::new(vec![0.0], vec![op]).unwrap();
        let cutoffs = Cutoffs::from_fn(&family, arc_bump(3.0, 2.0), arc_bump(3.3, 2.5)).unwrap();
        prop_assert_eq!(local_symbol(&family, &cutoffs, 0).unwrap().eta_variation(), 0.0);
    }

    #[test]
    fn symbol_is_linear_in_the_operator(s in any::<u64>(), re in -2.0..2.0f64) {
        let mut rng = seeded(s);
        let a = Op::random(16, &mut rng);
        let b = Op::random(16, &mut rng);
        let z = C64::new(re, 0.5);
        let combo = &a.scale(z) + &b;
        let fam = |op: Op| TorusOperatorFamily::new(vec![0.0], vec![op]).unwrap();
        let cut = Cutoffs::from_fn(&fam(a.clone()), arc_bump(3.0, 2.0), arc_bump(3.0, 2.5)).unwrap();
        let sa = local_symbol(&fam(a), &cut, 0).unwrap();
        let sb = local_symbol(&fam(b), &cut, 0).unwrap();
        let sc = local_symbol(&fam(combo), &cut, 0).unwrap();
        for k in 0..sc.values.len() {
            prop_assert!((sc.values[k] - (sa.values[k] * z + sb.values[k])).norm() <= 1e-12);
        }
    }
}
