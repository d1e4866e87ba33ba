use std::path::Path;

use irep::config::{ExperimentConfig, GroupSpec};
use irep::experiments::hierarchy::nalgebra_min_eigenvalue;
use irep::experiments::{run_hierarchy, run_sample_complexity, run_selectivity_suite};
use irep_core::linalg::min_eigenvalue;
use irep_core::random::{gaussian_vector, seeded};

#[test]
fn shipped_default_config_matches_builtin_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json");
    assert_eq!(
        ExperimentConfig::from_path(&path).unwrap(),
        ExperimentConfig::default()
    );
}

/// Cheap sample-complexity setup; callers override what they test.
fn small_sample_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let sc = &mut cfg.sample_complexity;
    sc.trials = 3;
    sc.grid = vec![2, 8, 32, 64];
    sc.test_size = 100;
    cfg
}

#[test]
fn noiseless_registered_data_is_learned_exactly() {
    let mut cfg = small_sample_config();
    cfg.sample_complexity.noise = 0.0;
    let r = run_sample_complexity(&cfg).unwrap();
    let oracle = r.curve("oracle").unwrap();
    // 2 · patch dim = 32
    for pt in oracle.points.iter().filter(|pt| pt.n >= 32) {
        assert_eq!(pt.mean_accuracy, 1.0, "n = {}", pt.n);
        assert_eq!(pt.std_accuracy, 0.0);
    }
    let inv = r.curve("invariant").unwrap();
    assert_eq!(inv.points.last().unwrap().mean_accuracy, 1.0);
}

#[test]
fn noiseless_raw_pixels_are_learned_on_a_small_torus() {
    let mut cfg = small_sample_config();
    let sc = &mut cfg.sample_complexity;
    sc.p = 4;
    sc.patch = 2;
    sc.noise = 0.0;
    sc.grid = vec![64, 256];
    let r = run_sample_complexity(&cfg).unwrap();
    for name in ["raw", "oracle", "invariant"] {
        assert_eq!(
            r.curve(name).unwrap().points.last().unwrap().mean_accuracy,
            1.0,
            "{name}"
        );
    }
}

#[test]
fn ideal_ratio_and_curve_shapes() {
    let r = run_sample_complexity(&small_sample_config()).unwrap();
    assert_eq!(r.ideal_ratio, 16.0);
    assert_eq!(r.curves.len(), 3);
    assert_eq!(r.curve("raw").unwrap().features, 256);
    assert_eq!(r.curve("invariant").unwrap().features, 8 * 32);
    for c in &r.curves {
        assert_eq!(
            c.points.iter().map(|p| p.n).collect::<Vec<_>>(),
            vec![2, 8, 32, 64]
        );
        assert!(c
            .points
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.mean_accuracy)));
    }
}

#[test]
fn n_star_ordering_across_seeds() {
    for seed in [5, 6, 7] {
        let mut cfg = small_sample_config();
        cfg.sample_complexity.seed = Some(seed);
        cfg.sample_complexity.grid = vec![2, 4, 8, 16, 32, 64, 128];
        let r = run_sample_complexity(&cfg).unwrap();
        let never = usize::MAX;
        let (o, i, raw) = (
            r.n_star_oracle.unwrap_or(never),
            r.n_star_invariant.unwrap_or(never),
            r.n_star_raw.unwrap_or(never),
        );
        assert!(
            o <= i && i <= raw,
            "seed {seed}: oracle {o}, invariant {i}, raw {raw}"
        );
        assert!(o < never);
    }
}

#[test]
fn trial_results_do_not_depend_on_thread_count() {
    let cfg = small_sample_config();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_sample_complexity(&cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn identical_patches_are_rejected() {
    let mut cfg = small_sample_config();
    cfg.sample_complexity.patches = Some(vec![vec![0.5; 16], vec![0.5; 16]]);
    assert!(cfg.validate().unwrap_err().is_config());
}

#[test]
fn selectivity_refuses_groups_beyond_the_oracle_cap() {
    let mut cfg = ExperimentConfig::default();
    cfg.selectivity.groups = vec![GroupSpec::Cyclic { p: 128 }];
    assert!(run_selectivity_suite(&cfg).unwrap_err().is_config());
}

#[test]
fn moment_confusions_are_logged_with_their_pair() {
    let mut cfg = ExperimentConfig::default();
    cfg.selectivity.groups = vec![GroupSpec::Cyclic { p: 8 }];
    cfg.selectivity.pairs = 40;
    // every representation distance counts as equal, so every
    // non-equivalent pair becomes a confusion
    cfg.selectivity.rep_tol = 1e3;
    let r = run_selectivity_suite(&cfg).unwrap();
    let g = &r.groups[0];
    let logged = r
        .confusions
        .iter()
        .filter(|c| c.representation == "moments")
        .count();
    assert_eq!(logged, g.moment_confusions);
    assert_eq!(logged, g.pairs - g.equivalent_pairs);
    for c in r
        .confusions
        .iter()
        .filter(|c| c.representation == "moments")
    {
        assert_eq!((c.a.len(), c.b.len()), (8, 8));
        assert!(c.pair < 40);
    }
}

#[test]
fn jacobi_and_nalgebra_agree_on_random_symmetric_matrices() {
    let mut rng = seeded(8);
    for n in [1, 2, 5, 12] {
        let a = gaussian_vector(&mut rng, n * n);
        let sym: Vec<f64> = (0..n * n)
            .map(|ij| (a[ij] + a[(ij % n) * n + ij / n]) / 2.0)
            .collect();
        let jacobi = min_eigenvalue(&sym, n).unwrap();
        let reference = nalgebra_min_eigenvalue(&sym, n).unwrap();
        assert!(
            (jacobi - reference).abs() <= 1e-10,
            "n = {n}: {jacobi} vs {reference}"
        );
    }
    assert!(nalgebra_min_eigenvalue(&[1.0, 2.0], 2).is_err());
}

#[test]
fn hierarchy_layer2_contracts_skip_partial_windows() {
    let mut cfg = ExperimentConfig::default();
    cfg.hierarchy.layer2_window = irep::config::WindowSpec::Shifts { len: 4 };
    let r = run_hierarchy(&cfg).unwrap();
    assert!(r.contracts.iter().all(|c| !c.name.starts_with("layer-2")));
    assert_eq!(r.layer2_window_size, 4);
    assert!(r.layer1_covariance_max_error <= 1e-12);
}
