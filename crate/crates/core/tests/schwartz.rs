use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use specinv_core::groupoid::ModelGroupoid;
use specinv_core::rng::{seeded, trial_rng};
use specinv_core::schwartz::*;
use specinv_core::C64;

fn aligned() -> Arc<ModelGroupoid> {
    Arc::new(ModelGroupoid::aligned(1, 0.1, 8.0, 40).unwrap())
}

fn boundary_diff(a: &GroupoidKernel, b: &GroupoidKernel) -> f64 {
    let m = a.groupoid().mu_len();
    (0..m).map(|k| (a.value(0, k) - b.value(0, k)).norm()).fold(0.0, f64::max)
}

#[test]
fn gaussian_convolution_converges_under_refinement() {
    let mut errors = Vec::new();
    for h in [0.8, 0.4, 0.2, 0.1, 0.05] {
        let g = Arc::new(ModelGroupoid::new(1, h, 20.0, 3).unwrap());
        let e = GroupoidKernel::from_profile(&g, |mu| C64::new((-mu * mu).exp(), 0.0));
        let c = convolve(&e, &e).unwrap();
        let err = (0..g.mu_len())
            .map(|k| {
                let mu = g.mu_at(k);
                (c.value(0, k) - (PI / 2.0).sqrt() * (-mu * mu / 2.0).exp()).norm()
            })
            .fold(0.0, f64::max);
        errors.push((h, err));
    }
    assert!(errors.last().unwrap().1 <= 1e-3);
    for w in errors.windows(2) {
        let ((_, coarse), (_, fine)) = (w[0], w[1]);
        // Second order or better until roundoff takes over.
        assert!(fine <= 1e-13 || fine <= coarse / 4.0, "{errors:?}");
    }
}

#[test]
fn approximate_unit_error_is_second_order() {
    let g = Arc::new(ModelGroupoid::new(1, 0.01, 10.0, 3).unwrap());
    let f = GroupoidKernel::gaussian(&g, 1.0);
    let errs: Vec<f64> = [0.8, 0.4, 0.2]
        .iter()
        .map(|&eps| {
            let eta = GroupoidKernel::normalized_bump(&g, eps);
            boundary_diff(&convolve(&f, &eta).unwrap(), &f)
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn convolution_inequality_over_random_pairs() {
    let g = Arc::new(ModelGroupoid::default_model());
    let cert = g.growth_certificate(6);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let mut rng = trial_rng(11, "conv-pairs", trial);
        let f1 = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
        let f2 = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
        for k in [2, 3] {
            let r = conv_inequality_check(&f1, &f2, k, 1, &cert).unwrap();
            assert!(r.passed, "trial {trial}: {r:?}");
            worst = worst.max(r.ratio);
        }
    }
    assert!(worst < 1.0);
}

#[test]
fn inequality_requires_finite_constant() {
    let g = Arc::new(ModelGroupoid::default_model());
    let cert = g.growth_certificate(6);
    let f = GroupoidKernel::gaussian(&g, 1.0);
    assert!(conv_inequality_check(&f, &f, 1, 0, &cert).is_err());
}

#[test]
fn l2_bounds_hold_on_every_unit() {
    let g = aligned();
    let cert = g.growth_certificate(8);
    let mut rng = seeded(4);
    for _ in 0..10 {
        let f = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
        let r = l2_bound_check(&f, 2, 2, &cert).unwrap();
        assert_eq!(r.violations, 0, "{r:?}");
    }
}

#[test]
fn reduced_norm_respects_young_and_schwartz_bounds() {
    let g = aligned();
    let cert = g.growth_certificate(6);
    let units: Vec<usize> = (0..g.units().len()).step_by(5).collect();
    let mut rng = seeded(9);
    for _ in 0..10 {
        let f = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
        let r = reduced_norm_check(&f, 2, 0, &cert, &units).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.estimate <= r.young * (1.0 + HEADROOM), "{r:?}");
    }
}

#[test]
fn bump_powers_share_a_radius() {
    let g = Arc::new(ModelGroupoid::default_model());
    let cert = g.growth_certificate(8);
    let f = GroupoidKernel::bump(&g, 0.0, 0.15);
    let r = spectral_radius_norms_check(&f, 2, 4, 1, 64, &cert).unwrap();
    assert!(r.passed, "gap {} sandwich {} / {}", r.gap, r.sandwich_norm, r.sandwich_bound);
}

#[test]
fn scaled_approximate_unit_radius_is_the_scale() {
    let g = Arc::new(ModelGroupoid::default_model());
    let cert = g.growth_certificate(8);
    let scale = 0.5;
    let f = GroupoidKernel::normalized_bump(&g, 0.3).scale(C64::new(scale, 0.0));
    let r = spectral_radius_norms_check(&f, 2, 4, 1, 64, &cert).unwrap();
    let limit_k = r.seq_k.last().unwrap() / r.rescale;
    let limit_l = r.seq_l.last().unwrap() / r.rescale;
    assert!((limit_k / scale - 1.0).abs() <= 0.1, "{limit_k}");
    assert!((limit_l / scale - 1.0).abs() <= 0.1, "{limit_l}");
}

fn mixture(seed: u64, reach: f64) -> GroupoidKernel {
    let g = aligned();
    let mut rng = seeded(seed);
    GroupoidKernel::random_bump_mixture(&g, &mut rng, reach)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn associativity_on_aligned_grid(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let reach = 2.0;
        let (a, b, c) = (mixture(s1, reach), mixture(s2, reach), mixture(s3, reach));
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-9);
    }

    #[test]
    fn associativity_on_default_boundary_fiber(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let g = Arc::new(ModelGroupoid::default_model());
        let pick = |s: u64| GroupoidKernel::random_bump_mixture(&g, &mut seeded(s), g.l / 4.0);
        let (a, b, c) = (pick(s1), pick(s2), pick(s3));
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        prop_assert!(boundary_diff(&left, &right) <= 1e-9);
    }

    #[test]
    fn involution_laws(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (mixture(s1, 4.0), mixture(s2, 4.0));
        prop_assert_eq!(involution(&involution(&a)).max_abs_diff(&a), 0.0);
        let lhs = involution(&convolve(&a, &b).unwrap());
        let rhs = convolve(&involution(&b), &involution(&a)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn norms_are_monotone_and_involution_invariant(s in any::<u64>(), k in 0u32..4, d in 0usize..3) {
        let f = mixture(s, 4.0);
        let base = schwartz_norm(&f, k, d).unwrap();
        prop_assert!(base <= schwartz_norm(&f, k + 1, d).unwrap());
        prop_assert!(base <= schwartz_norm(&f, k, d + 1).unwrap());
        let star = schwartz_norm(&involution(&f), k, 0).unwrap();
        let plain = schwartz_norm(&f, k, 0).unwrap();
        prop_assert!((star - plain).abs() <= 1e-12 * plain);
    }

    #[test]
    fn convolution_is_bilinear(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let (a, b, c) = (mixture(s1, 3.0), mixture(s2, 3.0), mixture(s3, 3.0));
        let z = C64::new(re, im);
        let lhs = convolve(&a.scale(z).add(&b).unwrap(), &c).unwrap();
        let rhs = convolve(&a, &c).unwrap().scale(z).add(&convolve(&b, &c).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + rhs.sup_norm()));
    }
}
