#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::gamma::ln_gamma;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 + x) / 2.0, w / 2.0));
    }
    out
}

fn ln_norm(a: f64, b: f64) -> f64 {
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
}

fn ln_kernel(a: f64, b: f64, x: f64) -> f64 {
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p()
}

/// `P(X1 > X2)` as a double integral over `{x2 < x1}`.
///
/// With `n` nodes per axis the rule integrates polynomials of degree `2n - 1`
/// exactly, and integer-parameter Beta densities are polynomials, so this is
/// exact up to rounding when all parameters stay below `n`.
pub struct TriangleOracle {
    nodes: Vec<(f64, f64)>,
}

impl TriangleOracle {
    pub fn new(n: usize) -> Self {
        Self {
            nodes: gauss_legendre(n),
        }
    }

    pub fn exceedance(&self, (a1, b1): (u64, u64), (a2, b2): (u64, u64)) -> f64 {
        let (a1, b1, a2, b2) = (a1 as f64, b1 as f64, a2 as f64, b2 as f64);
        let norm = ln_norm(a1, b1) + ln_norm(a2, b2);
        let mut total = 0.0;
        for &(x, wx) in &self.nodes {
            let outer = norm + ln_kernel(a1, b1, x);
            let mut inner = 0.0;
            for &(s, ws) in &self.nodes {
                // x2 = x * s
                inner += ws * (outer + ln_kernel(a2, b2, x * s)).exp();
            }
            total += wx * x * inner;
        }
        total
    }
}

/// Draw-argmax Thompson Sampling written directly against `rand_distr`.
pub fn reference_thompson_regret(means: &[f64], horizon: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let best = means.iter().cloned().fold(f64::MIN, f64::max);
    let k = means.len();
    let mut succ = vec![0u64; k];
    let mut fail = vec![0u64; k];
    let mut regret = 0.0;
    for _ in 0..horizon {
        let mut arm = 0;
        let mut top = f64::MIN;
        for i in 0..k {
            let d = Beta::new((succ[i] + 1) as f64, (fail[i] + 1) as f64).unwrap();
            let v = d.sample(&mut rng);
            if v > top {
                top = v;
                arm = i;
            }
        }
        if rng.random::<f64>() < means[arm] {
            succ[arm] += 1;
        } else {
            fail[arm] += 1;
        }
        regret += best - means[arm];
    }
    regret
}
