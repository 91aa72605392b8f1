use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use stable_em::{
    build_lattice, moment_audit, positivity_audit, simulate_path, ModelParams, PositivityAudit,
    RngStream, StableLaw, TimeGrid,
};

fn table1(alpha: f64) -> ModelParams {
    ModelParams::new(1.5, 2.0, 0.5, 1.0, alpha)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

#[test]
fn zero_noise_path_follows_affine_recursion_exactly() {
    let p = table1(1.8);
    let delta = 2f64.powi(-10);
    let grid = TimeGrid::new(delta, 50.0 * delta).unwrap();
    assert_eq!(grid.n_steps(), 50);
    let path = simulate_path(&p, &grid, &[0.0; 50]).unwrap();

    // x_{k+1} = x_k (1 - lambda delta) + mu delta in exact rational arithmetic.
    let one = BigRational::from_integer(BigInt::from(1));
    let (mu, lambda, d) = (rational(1.5), rational(2.0), rational(delta));
    let mut x = rational(1.0);
    for (k, &v) in path.values.iter().enumerate() {
        let exact = x.to_f64().unwrap();
        assert!(((v - exact) / exact).abs() < 1e-14, "step {k}: {v} vs {exact}");
        x = &x * (&one - &lambda * &d) + &mu * &d;
    }
}

#[test]
fn zero_noise_path_reverts_monotonically() {
    let delta = 2f64.powi(-8);
    for x0 in [0.1, 0.5, 0.75, 1.0, 3.0] {
        let p = ModelParams { x0, ..table1(1.8) };
        let level = p.mean_reversion_level();
        let grid = TimeGrid::new(delta, 1.0).unwrap();
        let path = simulate_path(&p, &grid, &vec![0.0; grid.n_steps()]).unwrap();
        let (lo, hi) = (x0.min(level), x0.max(level));
        assert!(path.values.iter().all(|&v| v >= lo && v <= hi));
        let dir = (level - x0).signum();
        assert!(path.values.windows(2).all(|w| (w[1] - w[0]) * dir >= 0.0));
    }
}

proptest! {
    #[test]
    fn every_grid_value_is_at_least_delta(
        k in 6i32..12,
        alpha in 1.05f64..1.95,
        incs in prop::collection::vec(-50.0f64..50.0, 64),
    ) {
        let delta = 2f64.powi(-k);
        let p = table1(alpha);
        let grid = TimeGrid::new(delta, 64.0 * delta).unwrap();
        let path = simulate_path(&p, &grid, &incs).unwrap();
        prop_assert_eq!(path.values.len(), 65);
        prop_assert_eq!(path.values[0], 1.0);
        prop_assert!(path.values.iter().all(|&v| v >= delta));
        let again = simulate_path(&p, &grid, &incs).unwrap();
        prop_assert_eq!(path, again);
    }
}

#[test]
fn stable_driven_paths_stay_positive() {
    let mut audit = PositivityAudit::new();
    for alpha in [1.8, 1.1] {
        let law = StableLaw::symmetric(alpha).unwrap();
        for i in 0..200 {
            let mut rng = RngStream::new(77, i);
            let delta = 2f64.powi(-10);
            let lattice = build_lattice(&law, delta, 1.0, &mut rng).unwrap();
            let grid = TimeGrid::for_model(delta, 1.0, &table1(alpha)).unwrap();
            let path = simulate_path(&table1(alpha), &grid, lattice.increments()).unwrap();
            audit.observe(&path);
        }
    }
    let r = audit.finish();
    assert_eq!(r.violations, 0);
    assert!(r.min_value >= 2f64.powi(-10));
    assert_eq!(r.values_checked, 400 * 1025);
}

fn paths_at(alpha: f64, delta: f64, m: u64, seed: u64) -> Vec<stable_em::Path> {
    let law = StableLaw::symmetric(alpha).unwrap();
    let p = table1(alpha);
    let grid = TimeGrid::for_model(delta, 1.0, &p).unwrap();
    (0..m)
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            let lattice = build_lattice(&law, delta, 1.0, &mut rng).unwrap();
            simulate_path(&p, &grid, lattice.increments()).unwrap()
        })
        .collect()
}

#[test]
fn moments_below_alpha_are_stable() {
    let alpha = 1.8;
    let paths = paths_at(alpha, 2f64.powi(-8), 1000, 31);
    for q in [1.0, 1.05] {
        let r = moment_audit(&paths, q, alpha).unwrap();
        assert!(r.max_mean.is_finite());
        assert!(
            (0.8..=1.25).contains(&r.stability_ratio),
            "q={q}: ratio {}",
            r.stability_ratio
        );
        assert!((r.stability_ratio - 1.0).abs() < 0.25);
    }
}

#[test]
fn truncation_frequency_does_not_grow_as_step_halves() {
    let alpha = 1.5;
    let law = StableLaw::symmetric(alpha).unwrap();
    let p = table1(alpha);
    let fine = 2f64.powi(-12);
    let levels = [2f64.powi(-8), 2f64.powi(-9), 2f64.powi(-10), 2f64.powi(-11), fine];
    let mut audit = PositivityAudit::new();
    for i in 0..500 {
        let mut rng = RngStream::new(5, i);
        let lattice = build_lattice(&law, fine, 1.0, &mut rng).unwrap();
        for (d, l) in levels.iter().zip(lattice.coarsen_all(&levels).unwrap()) {
            let grid = TimeGrid::for_model(*d, 1.0, &p).unwrap();
            audit.observe(&simulate_path(&p, &grid, l.increments()).unwrap());
        }
    }
    let r = audit.finish();
    assert_eq!(r.violations, 0);
    // sorted by step size: finest first
    let freqs: Vec<f64> = r.truncation.iter().map(|t| t.frequency()).collect();
    for w in freqs.windows(2) {
        // w[0] is the finer level
        assert!(w[0] <= 1.10 * w[1], "{freqs:?}");
    }
    let sanity = positivity_audit(&paths_at(alpha, 2f64.powi(-6), 5, 1));
    assert_eq!(sanity.violations, 0);
}
