mod common;

use common::{ks_critical_1pct, ks_statistic};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use stable_em::{build_lattice, NoiseLattice, RngStream, StableLaw};

fn exact_sum(xs: &[f64]) -> BigRational {
    xs.iter()
        .map(|&x| BigRational::from_float(x).unwrap())
        .fold(BigRational::zero(), |a, b| a + b)
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #[test]
    fn aggregation_telescopes_bitwise(
        incs in prop::collection::vec(-1e6f64..1e6, 256),
        k in 0u32..7,
    ) {
        let law = StableLaw::symmetric(1.5).unwrap();
        let fine = 2f64.powi(-8);
        let lattice = NoiseLattice::from_increments(law, fine, incs, 0).unwrap();
        let d = fine * f64::from(1u32 << k);
        let via = lattice.coarsen(d).unwrap().aggregate(2.0 * d).unwrap();
        let direct = lattice.aggregate(2.0 * d).unwrap();
        prop_assert_eq!(bits(&via), bits(&direct));
    }

    #[test]
    fn aggregation_is_a_blockwise_sum(
        incs in prop::collection::vec(-1e3f64..1e3, 64),
        k in 0u32..6,
    ) {
        let law = StableLaw::symmetric(1.2).unwrap();
        let lattice = NoiseLattice::from_increments(law, 1.0, incs.clone(), 0).unwrap();
        let r = 1usize << k;
        let coarse = lattice.aggregate(r as f64).unwrap();
        prop_assert_eq!(coarse.len(), 64 / r);
        for (j, c) in coarse.iter().enumerate() {
            let exact = exact_sum(&incs[j * r..(j + 1) * r]);
            let rounded = BigRational::from_float(*c).unwrap();
            let err = (exact - rounded).abs();
            // within one ulp of the exact block sum
            let ulp = BigRational::from_float(f64::EPSILON * c.abs().max(f64::MIN_POSITIVE)).unwrap();
            prop_assert!(err <= ulp);
        }
    }
}

#[test]
fn stable_lattices_telescope_at_every_level() {
    let law = StableLaw::symmetric(1.1).unwrap();
    for i in 0..20 {
        let mut rng = RngStream::new(12, i);
        let lattice = build_lattice(&law, 2f64.powi(-14), 1.0, &mut rng).unwrap();
        for k in 9..14 {
            let d = 2f64.powi(-k);
            let via = lattice.coarsen(d).unwrap().aggregate(2.0 * d).unwrap();
            let direct = lattice.aggregate(2.0 * d).unwrap();
            assert_eq!(bits(&via), bits(&direct));
        }
    }
}

#[test]
fn coarse_sums_preserve_the_total() {
    let law = StableLaw::symmetric(1.3).unwrap();
    let mut rng = RngStream::new(13, 0);
    let lattice = build_lattice(&law, 2f64.powi(-16), 1.0, &mut rng).unwrap();
    let fine_total = exact_sum(lattice.increments());
    let max = lattice.increments().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bound = lattice.len() as f64 * 2f64.powi(-50) * max;
    for k in [10, 13, 16] {
        let coarse = lattice.aggregate(2f64.powi(-k)).unwrap();
        let diff = (exact_sum(&coarse) - &fine_total).abs();
        assert!(diff <= BigRational::from_float(bound).unwrap(), "level 2^-{k}");
    }
}

#[test]
fn symmetric_increments_have_zero_mean() {
    let law = StableLaw::symmetric(1.5).unwrap();
    let mut rng = RngStream::new(14, 0);
    let delta = 2f64.powi(-20);
    let lattice = build_lattice(&law, delta, 1.0, &mut rng).unwrap();
    assert_eq!(lattice.len(), 1 << 20);
    let xs = lattice.increments();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
}

#[test]
fn aggregated_increments_follow_the_coarse_law() {
    let law = StableLaw::symmetric(1.6).unwrap();
    let coarse = 2f64.powi(-8);
    let mut pooled = Vec::new();
    for i in 0..40 {
        let mut rng = RngStream::new(15, i);
        let lattice = build_lattice(&law, 2f64.powi(-12), 1.0, &mut rng).unwrap();
        pooled.extend(lattice.aggregate(coarse).unwrap());
    }
    assert!(pooled.len() >= 10_000);
    let mut rng = RngStream::new(16, 0);
    let fresh: Vec<f64> = (0..pooled.len())
        .map(|_| law.sample_increment(coarse, &mut rng).unwrap())
        .collect();
    let d = ks_statistic(&pooled, &fresh);
    assert!(d < ks_critical_1pct(pooled.len(), fresh.len()), "KS = {d}");
}

#[test]
fn lattice_is_reproducible_and_small() {
    let law = StableLaw::symmetric(1.8).unwrap();
    let a = build_lattice(&law, 2f64.powi(-16), 1.0, &mut RngStream::new(3, 8)).unwrap();
    let b = build_lattice(&law, 2f64.powi(-16), 1.0, &mut RngStream::new(3, 8)).unwrap();
    assert_eq!(bits(a.increments()), bits(b.increments()));
    assert!(std::mem::size_of_val(a.increments()) <= 1 << 20);
}
