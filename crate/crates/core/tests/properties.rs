use irep_core::groups::{make_cyclic_group, make_torus_group, GroupAction};
use irep_core::metrics::{ks_sorted, sliced_distance};
use irep_core::pog::{pog_measurement, PogWindow};
use irep_core::pooling::{cdf_vector, cdf_vector_sorted, moment_vector, BinGrid, Nonlinearity};
use irep_core::representations::{
    project_orbit, represent, sample_templates, Pooling, RepresentationConfig,
};
use irep_core::signal::Signal;
use proptest::prelude::*;

fn action_strategy() -> impl Strategy<Value = GroupAction> {
    prop_oneof![
        (1usize..12).prop_map(|p| make_cyclic_group(p).unwrap()),
        (1usize..4).prop_map(|p| make_torus_group(p).unwrap()),
    ]
}

fn action_and_signal() -> impl Strategy<Value = (GroupAction, Vec<f64>)> {
    action_strategy().prop_flat_map(|a| {
        let d = a.dim();
        (Just(a), prop::collection::vec(-5.0f64..5.0, d))
    })
}

fn sample(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_homomorphism((a, x) in action_and_signal(), g in 0usize..1000, h in 0usize..1000) {
        let (g, h) = (g % a.order(), h % a.order());
        let x = Signal::new(x).unwrap();
        let lhs = a.act(g, &a.act(h, &x).unwrap()).unwrap();
        let rhs = a.act(a.group().compose(g, h), &x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_is_unitary((a, x) in action_and_signal(), g in 0usize..1000, seed in 0u64..1000) {
        let g = g % a.order();
        let x = Signal::new(x).unwrap();
        let y = irep_core::random::gaussian_signal(&mut irep_core::random::seeded(seed), a.dim()).unwrap();
        prop_assert_eq!(a.act(g, &x).unwrap().norm(), x.norm());
        let lhs = a.act(g, &x).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&a.act(a.group().inverse(g), &y).unwrap()).unwrap();
        prop_assert_eq!(lhs.to_bits(), rhs.to_bits());
    }

    #[test]
    fn orbit_is_a_coset((a, x) in action_and_signal(), g in 0usize..1000) {
        let g = g % a.order();
        let x = Signal::new(x).unwrap();
        let key = |v: &Signal| v.as_slice().iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        let mut o1: Vec<_> = a.orbit(&x).unwrap().iter().map(key).collect();
        let mut o2: Vec<_> = a.orbit(&a.act(g, &x).unwrap()).unwrap().iter().map(key).collect();
        o1.sort();
        o2.sort();
        prop_assert_eq!(o1, o2);
    }

    #[test]
    fn cdf_is_monotone_and_order_free(mut v in sample(1..40), bins in 1usize..40) {
        let grid = BinGrid::uniform(bins, 1.0).unwrap();
        let c = cdf_vector(&v, &grid).unwrap();
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.iter().all(|x| (0.0..=1.0).contains(x)));
        if v.iter().all(|x| *x <= *grid.thresholds().last().unwrap()) {
            prop_assert_eq!(*c.last().unwrap(), 1.0);
        }
        v.reverse();
        prop_assert_eq!(&cdf_vector(&v, &grid).unwrap(), &c);
        v.sort_by(f64::total_cmp);
        prop_assert_eq!(&cdf_vector_sorted(&v, &grid).unwrap(), &c);
    }

    #[test]
    fn moments_satisfy_jensen_and_decay(v in sample(1..40)) {
        let m = moment_vector(&v, 6).unwrap();
        prop_assert!(m.0.iter().all(|x| *x >= 0.0));
        prop_assert!(m.get(2).unwrap() >= m.get(1).unwrap().powi(2) - 1e-15);
        for r in 1..=4 {
            prop_assert!(m.get(r + 2).unwrap() <= m.get(r).unwrap() + 1e-15);
        }
    }

    #[test]
    fn steep_sigmoid_matches_threshold(v in sample(1..30), b in -0.9f64..0.9) {
        prop_assume!(v.iter().all(|x| (x - b).abs() > 1e-3));
        let s = Nonlinearity::Sigmoid { b, slope: 1e4 }.average(&v).unwrap();
        let t = Nonlinearity::Threshold { b }.average(&v).unwrap();
        prop_assert!((s - t).abs() < 1e-3);
    }

    #[test]
    fn representation_invariance((a, x) in action_and_signal(), g in 0usize..1000, seed in 0u64..50) {
        let g = g % a.order();
        let x = Signal::new(x).unwrap();
        let bank = sample_templates(&a, 3, seed).unwrap();
        let moved = a.act(g, &x).unwrap();
        for pooling in [
            Pooling::default(),
            Pooling::Sigmoid { grid: BinGrid::default(), slope: 30.0 },
            Pooling::Moments { order: 6 },
        ] {
            let cfg = RepresentationConfig { pooling, normalize: seed % 2 == 0 };
            let r1 = represent(&x, &bank, &cfg).unwrap();
            let r2 = represent(&moved, &bank, &cfg).unwrap();
            prop_assert_eq!(r1.max_abs_diff(&r2), 0.0);
        }
    }

    #[test]
    fn ks_is_a_metric(a in sample(1..20), b in sample(1..20), c in sample(1..20)) {
        let sorted = |mut v: Vec<f64>| { v.sort_by(f64::total_cmp); v };
        let (a, b, c) = (sorted(a), sorted(b), sorted(c));
        let ab = ks_sorted(&a, &b).unwrap();
        prop_assert_eq!(ab, ks_sorted(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(ab <= ks_sorted(&a, &c).unwrap() + ks_sorted(&c, &b).unwrap() + 1e-12);
        prop_assert_eq!(ks_sorted(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn sliced_distance_is_orbit_invariant((a, x) in action_and_signal(), g in 0usize..1000, h in 0usize..1000, seed in 0u64..100) {
        let (g, h) = (g % a.order(), h % a.order());
        let x = Signal::new(x).unwrap();
        let y = irep_core::random::gaussian_signal(&mut irep_core::random::seeded(seed), a.dim()).unwrap();
        let bank = sample_templates(&a, 4, seed).unwrap();
        let base = sliced_distance(&x, &y, &bank, true).unwrap().d_hat;
        let moved = sliced_distance(&a.act(g, &x).unwrap(), &a.act(h, &y).unwrap(), &bank, true).unwrap().d_hat;
        prop_assert_eq!(base, moved);
    }

    #[test]
    fn window_exhaustivity(p in 2usize..12, members in prop::collection::vec(0usize..100, 1..6), seed in 0u64..100) {
        let a = make_cyclic_group(p).unwrap();
        let members: Vec<usize> = members.into_iter().map(|m| m % p).collect();
        let w = PogWindow::from_members(a.group(), &members).unwrap();
        let mut rng = irep_core::random::seeded(seed);
        let x = irep_core::random::gaussian_signal(&mut rng, p).unwrap();
        let t = irep_core::random::unit_vector(&mut rng, p).unwrap();
        let eta = Nonlinearity::Threshold { b: 0.1 };
        let avg: f64 = (0..p).map(|b| pog_measurement(&x, &t, &a, &w, eta, b).unwrap()).sum::<f64>() / p as f64;
        let global = pog_measurement(&x, &t, &a, &PogWindow::full(a.group()), eta, 0).unwrap();
        prop_assert!((avg - global).abs() < 1e-12);
    }
}

/// Moments from the step CDF: `E|X|^r = ∫_0^∞ r x^{r−1} P(|X| > x) dx`, integrated
/// exactly between consecutive jump points of the empirical law of `|X|`.
fn moments_by_cdf_integration(values: &[f64], order: usize) -> Vec<f64> {
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len() as f64;
    (1..=order as i32)
        .map(|r| {
            let mut prev = 0.0f64;
            let mut total = 0.0;
            for (i, &a) in abs.iter().enumerate() {
                let survival = 1.0 - i as f64 / n;
                total += survival * (a.powi(r) - prev.powi(r));
                prev = a;
            }
            total
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_and_moment_routes_agree((a, x) in action_and_signal(), seed in 0u64..100) {
        let x = Signal::new(x).unwrap().normalized();
        let bank = sample_templates(&a, 2, seed).unwrap();
        for i in 0..2 {
            let proj = project_orbit(&x, &bank, i).unwrap();
            let direct = moment_vector(proj.values(), 6).unwrap();
            let integrated = moments_by_cdf_integration(proj.values(), 6);
            for (d, s) in direct.0.iter().zip(&integrated) {
                prop_assert!((d - s).abs() <= 1e-9, "{} vs {}", d, s);
            }
        }
    }
}
