use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use specinv_core::opcore::Op;
use specinv_core::rng::{seeded, trial_rng};
use specinv_core::smoothkernel::*;
use specinv_core::C64;

fn coarse() -> (TimeGrid, Arc<HalfLineGrid>) {
    (TimeGrid::new(0.2, 12.0).unwrap(), Arc::new(HalfLineGrid::new(1e-6, 10.0, 120).unwrap()))
}

#[test]
fn flow_group_law_and_monotonicity() {
    let mut rng = seeded(21);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..5);
        let (t, s) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let x = 10f64.powf(rng.gen_range(-3.0..1.0));
        let direct = flow(n, t + s, x).unwrap();
        let chained = flow(n, t, flow(n, s, x).unwrap()).unwrap();
        worst = worst.max((direct - chained).abs() / direct);
        assert!(flow(n, t, x * 1.01).unwrap() > flow(n, t, x).unwrap());
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn action_composes_to_interpolation_tolerance() {
    let grid = Arc::new(HalfLineGrid::default_grid());
    let a = MatrixSchwartz::flow_gaussian(&grid, 2, 0.0, 1.0, &Op::identity(2)).unwrap();
    for (t, s) in [(0.5, 0.7), (-1.0, 2.0), (1.5, -0.4)] {
        let chained = act(Action::Flow(2), t, &act(Action::Flow(2), s, &a).unwrap()).unwrap();
        let direct = act(Action::Flow(2), t + s, &a).unwrap();
        assert!(chained.max_abs_diff(&direct) <= 1e-6, "{}", chained.max_abs_diff(&direct));
    }
}

#[test]
fn frozen_product_is_plain_convolution() {
    let (tg, grid) = coarse();
    let mut rng = seeded(5);
    let f = TwistedElement::random(tg, &grid, 2, 2, 3.0, &mut rng).unwrap();
    let g = TwistedElement::random(tg, &grid, 2, 2, 3.0, &mut rng).unwrap();
    let p = twisted_convolve(&f, &g, Action::Frozen).unwrap();
    let len = tg.len() as isize;
    let mut worst: f64 = 0.0;
    for k in 0..len {
        for x in 0..grid.len() {
            let mut sum = Op::zeros(2);
            for j in 0..len {
                let src = k - j + len / 2;
                if (0..len).contains(&src) {
                    sum = &sum + &f.node(j as usize).at(x).matmul(&g.node(src as usize).at(x)).scale_real(tg.step);
                }
            }
            worst = worst.max((&sum - &p.node(k as usize).at(x)).max_abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn associativity_matches_triple_sum_oracle() {
    // Scalar elements given by formulas, so the oracle can pull back exactly.
    let n = 2;
    let tg = TimeGrid::new(0.25, 12.0).unwrap();
    let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 300).unwrap());
    let profile = |c: f64| move |t: f64| (-(t - c).powi(2) * 3.0).exp();
    let space = |c: f64| move |x: f64| (-(f_coord(n, x) - c).powi(2) / 2.0).exp();
    let parts = [(profile(-0.5), space(0.0)), (profile(0.3), space(0.5)), (profile(0.0), space(-0.5))];
    let elems: Vec<TwistedElement> = parts
        .iter()
        .map(|(p, s)| {
            let a = MatrixSchwartz::separable(&grid, s, &Op::identity(1));
            TwistedElement::separable(tg, |t| C64::new(p(t), 0.0), &a)
        })
        .collect();
    let act2 = Action::Flow(n);
    let left = twisted_convolve(&twisted_convolve(&elems[0], &elems[1], act2).unwrap(), &elems[2], act2).unwrap();
    let right = twisted_convolve(&elems[0], &twisted_convolve(&elems[1], &elems[2], act2).unwrap(), act2).unwrap();

    let len = tg.len() as isize;
    let half = len / 2;
    let h = tg.step;
    let mut worst: f64 = 0.0;
    for k in (0..len).step_by(3) {
        for (q, &x) in grid.nodes().iter().enumerate().step_by(7) {
            // Pullbacks α_t of the spatial factors at x, exactly.
            let pulled = |part: usize, r: isize| {
                let y = flow(n, -tg.t_at(r as usize), x).unwrap();
                if y <= grid.x_max() { parts[part].1(y) } else { 0.0 }
            };
            let g_at: Vec<f64> = (0..len).map(|r| pulled(1, r)).collect();
            let h_at: Vec<f64> = (0..len).map(|r| pulled(2, r)).collect();
            let mut oracle = 0.0;
            for r in 0..len {
                let tr = tg.t_at(r as usize);
                let fr = parts[0].0(tr) * parts[0].1(x);
                if fr.abs() < 1e-300 {
                    continue;
                }
                for s in 0..len {
                    let u = s - r + half;
                    let v = k - s + half;
                    if !(0..len).contains(&u) || !(0..len).contains(&v) {
                        continue;
                    }
                    let g = parts[1].0(tg.t_at(u as usize)) * g_at[r as usize];
                    let hh = parts[2].0(tg.t_at(v as usize)) * h_at[s as usize];
                    oracle += fr * g * hh * h * h;
                }
            }
            let l = left.node(k as usize).at(q)[(0, 0)].re;
            let r = right.node(k as usize).at(q)[(0, 0)].re;
            worst = worst.max((l - oracle).abs()).max((r - oracle).abs());
        }
    }
    assert!(worst <= 1e-6, "{worst}");
}

fn f_coord(n: u32, x: f64) -> f64 {
    specinv_core::groupoid::f_map(n, x).unwrap()
}

#[test]
fn robert_bound_over_random_pairs() {
    let (tg, grid) = coarse();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let mut rng = trial_rng(7, "robert", trial);
        let f = TwistedElement::random(tg, &grid, 2, 2, 3.0, &mut rng).unwrap();
        let g = TwistedElement::random(tg, &grid, 2, 2, 3.0, &mut rng).unwrap();
        for n in 0..=1 {
            for i in 0..=1 {
                for j in 0..=1 {
                    let r = robert_check(&f, &g, Action::Flow(2), n, i, j).unwrap();
                    assert!(r.passed, "trial {trial} ({n},{i},{j}): {r:?}");
                    worst = worst.max(r.ratio);
                }
            }
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn ideal_decay_matches_power_counting() {
    let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 120).unwrap());
    let bump = |x: f64| (-(x - 1.0).powi(2)).exp();
    for a in 0..=3 {
        for b in 0..=3 {
            let k = GridKernel::scalar(&grid, |x, y| x.powi(a) * y.powi(b) * bump(x) * bump(y), &Op::identity(2));
            let r = ideal_membership_I(&k, 2, 4).unwrap();
            for i in 0..=4u32 {
                for j in 0..=4u32 {
                    let expected = i <= a as u32 && j <= b as u32;
                    assert_eq!(r.decay_at(i, j), Some(expected), "x^{a} x'^{b} at ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn closure_of_localized_products() {
    let (tg, grid) = coarse();
    let kernel_grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 100).unwrap());
    let r = closure_demo(tg, &grid, &kernel_grid, 2, 2, &mut seeded(13)).unwrap();
    assert!(r.passed, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn twisted_product_is_bilinear(s in any::<u64>(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let tg = TimeGrid::new(0.25, 6.0).unwrap();
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 60).unwrap());
        let mut rng = seeded(s);
        let a = TwistedElement::random(tg, &grid, 2, 2, 1.5, &mut rng).unwrap();
        let b = TwistedElement::random(tg, &grid, 2, 2, 1.5, &mut rng).unwrap();
        let c = TwistedElement::random(tg, &grid, 2, 2, 1.5, &mut rng).unwrap();
        let z = C64::new(re, im);
        let lhs = twisted_convolve(&a.scale(z).add(&b).unwrap(), &c, Action::Flow(2)).unwrap();
        let rhs = twisted_convolve(&a, &c, Action::Flow(2)).unwrap().scale(z)
            .add(&twisted_convolve(&b, &c, Action::Flow(2)).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + seminorm_nij(&rhs, 0, 0, 0).unwrap()));
        let lhs = twisted_convolve(&c, &a.scale(z).add(&b).unwrap(), Action::Flow(2)).unwrap();
        let rhs = twisted_convolve(&c, &a, Action::Flow(2)).unwrap().scale(z)
            .add(&twisted_convolve(&c, &b, Action::Flow(2)).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + seminorm_nij(&rhs, 0, 0, 0).unwrap()));
    }

    #[test]
    fn seminorms_are_monotone(s in any::<u64>(), n in 0u32..2, i in 0u32..2, j in 0usize..2) {
        let tg = TimeGrid::new(0.25, 6.0).unwrap();
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 60).unwrap());
        let f = TwistedElement::random(tg, &grid, 2, 2, 1.5, &mut seeded(s)).unwrap();
        let base = seminorm_nij(&f, n, i, j).unwrap();
        prop_assert!(base <= seminorm_nij(&f, n + 1, i, j).unwrap());
        let a = f.node(tg.len() / 2);
        prop_assert!(a.seminorm(n) <= a.seminorm(n + 1));
    }

    #[test]
    fn pointwise_seminorm_is_submultiplicative(s in any::<u64>(), n in 0u32..2) {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 80).unwrap());
        let mut rng = seeded(s);
        let mut pick = || {
            let b = Op::from_fn(2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let c = rng.gen_range(-2.0..2.0);
            MatrixSchwartz::flow_gaussian(&grid, 2, c, 1.0, &b).unwrap()
        };
        let (a, b) = (pick(), pick());
        prop_assert!(a.mul(&b).unwrap().seminorm(n) <= a.seminorm(n) * b.seminorm(n) * (1.0 + 1e-12));
    }

    #[test]
    fn action_is_linear(s in any::<u64>(), t in -3.0..3.0f64) {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 80).unwrap());
        let mut rng = seeded(s);
        let b1 = Op::from_fn(2, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let b2 = Op::from_fn(2, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let a1 = MatrixSchwartz::flow_gaussian(&grid, 2, 0.5, 1.0, &b1).unwrap();
        let a2 = MatrixSchwartz::flow_gaussian(&grid, 2, -0.5, 0.7, &b2).unwrap();
        let lhs = act(Action::Flow(2), t, &a1.add(&a2).unwrap()).unwrap();
        let rhs = act(Action::Flow(2), t, &a1).unwrap().add(&act(Action::Flow(2), t, &a2).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-14);
    }
}
