#![allow(dead_code)]

use stable_em::{RngStream, StableLaw};

pub fn draws(law: &StableLaw, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, stream);
    (0..n).map(|_| law.sample(&mut rng)).collect()
}

/// Hill estimate of the tail index from the `k` largest values of `|x|`.
pub fn hill_tail_index(xs: &[f64], k: usize) -> f64 {
    let mut abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let threshold = abs[k].ln();
    let h = abs[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    1.0 / h
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let c = (-(0.005f64).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
