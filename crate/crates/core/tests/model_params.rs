use stable_em::{c_alpha, Condition, ModelParams};

const FIXTURE: &str = include_str!("fixtures/c_alpha_mpmath.csv");

fn fixture() -> Vec<(f64, f64)> {
    FIXTURE
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (a, c) = l.split_once(',').unwrap();
            (a.parse().unwrap(), c.parse().unwrap())
        })
        .collect()
}

#[test]
fn c_alpha_matches_high_precision_grid() {
    let grid = fixture();
    assert_eq!(grid.len(), 50);
    for (alpha, expected) in grid {
        let got = c_alpha(alpha).unwrap();
        let rel = ((got - expected) / expected).abs();
        assert!(rel <= 1e-12, "alpha={alpha}: {got} vs {expected} (rel {rel:e})");
        assert!(got > 0.0 && got.is_finite());
    }
}

#[test]
fn c_alpha_endpoint_behaviour() {
    // finite and positive just inside both ends, vanishing towards alpha = 2
    let near_one = c_alpha(1.01).unwrap();
    let near_two = c_alpha(1.99).unwrap();
    assert!((near_one - 0.319_629_349_262_772_43).abs() < 1e-12);
    assert!((near_two - 0.009_907_934_476_281_25).abs() < 1e-13);
    // the fixture increases up to a maximum near alpha = 1.33 and then decreases
    let grid = fixture();
    let peak = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap()
        .0;
    for w in grid[..=peak].windows(2) {
        assert!(c_alpha(w[0].0).unwrap() < c_alpha(w[1].0).unwrap());
    }
    for w in grid[peak..].windows(2) {
        assert!(c_alpha(w[0].0).unwrap() > c_alpha(w[1].0).unwrap());
    }
}

const PRESETS: [(f64, f64, f64); 3] = [(1.5, 2.0, 0.5), (2.0, 3.0, 0.5), (2.0, 3.0, 0.2)];
const ALPHAS: [f64; 4] = [1.8, 1.6, 1.4, 1.1];

#[test]
fn example_parameter_sets_satisfy_assumptions() {
    for (mu, lambda, kappa) in PRESETS {
        for alpha in ALPHAS {
            let r = ModelParams::new(mu, lambda, kappa, 1.0, alpha).validate();
            assert!(r.passes(), "{mu} {lambda} {kappa} {alpha}: {:?}", r.failed());
            assert!(r.delta_max > 0.0);
            assert_eq!(r.delta_max, ((mu - 1.0) / lambda).min(1.0 / lambda));
        }
    }
}

#[test]
fn each_violated_inequality_is_named() {
    let base = ModelParams::new(1.5, 2.0, 0.5, 1.0, 1.8);
    let cases = [
        (ModelParams { alpha: 2.0, ..base }, Condition::AlphaInRange),
        (ModelParams { mu: 0.9, ..base }, Condition::MuAboveOne),
        (ModelParams { kappa: 1.0, ..base }, Condition::KappaInUnitInterval),
        (ModelParams { kappa: 0.0, ..base }, Condition::KappaInUnitInterval),
        (ModelParams { x0: 0.0, ..base }, Condition::X0Positive),
        (ModelParams { lambda: 0.05, ..base }, Condition::LambdaAboveThreshold),
    ];
    for (p, cond) in cases {
        let r = p.validate();
        assert!(!r.passes());
        assert!(!r.holds(cond), "{p:?} should fail {cond}");
        let others: Vec<_> = r.failed().into_iter().filter(|c| *c != cond).collect();
        // alpha = 2 also makes the threshold undefined
        if cond != Condition::AlphaInRange {
            assert!(others.is_empty(), "{p:?}: unexpected {others:?}");
        }
    }
    let r = ModelParams { lambda: -1.0, ..base }.validate();
    assert!(!r.holds(Condition::LambdaPositive));
}

#[test]
fn threshold_is_the_documented_expression() {
    for alpha in ALPHAS {
        let p = ModelParams::new(2.0, 3.0, 0.2, 1.0, alpha);
        let r = p.validate();
        let want = 2.0 * 0.2f64.sqrt() * c_alpha(alpha).unwrap() / (2.0 * alpha - 1.0);
        assert_eq!(r.threshold, want);
    }
}
