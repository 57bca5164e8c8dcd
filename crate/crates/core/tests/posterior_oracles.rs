mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::TriangleOracle;
use tsh_core::bandit::{RandomStream, StreamPurpose};
use tsh_core::posterior::{
    best_arm_probabilities, beta_cdf, beta_exceedance, beta_sample, binomial_cdf, binomial_pmf,
    BetaParams, ExceedanceState, ExceedanceTracker,
};

fn bp(a: u64, b: u64) -> BetaParams {
    BetaParams::new(a, b).unwrap()
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let nodes = support::gauss_legendre(16);
    let v: f64 = nodes.iter().map(|(x, w)| w * x.powi(30)).sum();
    assert!((v - 1.0 / 31.0).abs() < 1e-15);
}

#[test]
fn exceedance_matches_triangle_quadrature() {
    let oracle = TriangleOracle::new(256);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = vec![
        ((1, 1), (1, 1)),
        ((2, 1), (1, 1)),
        ((100, 1), (1, 100)),
        ((37, 64), (40, 60)),
    ];
    for _ in 0..12 {
        cases.push((
            (rng.random_range(1..=100), rng.random_range(1..=100)),
            (rng.random_range(1..=100), rng.random_range(1..=100)),
        ));
    }
    for ((a1, b1), (a2, b2)) in cases {
        let exact = beta_exceedance(bp(a1, b1), bp(a2, b2));
        let oracle = oracle.exceedance((a1, b1), (a2, b2));
        assert!(
            (exact - oracle).abs() < 1e-10,
            "({a1},{b1}) vs ({a2},{b2}): {exact} vs {oracle}"
        );
    }
}

#[test]
fn exceedance_matches_monte_carlo() {
    let (p1, p2) = (bp(6, 4), bp(5, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 400_000;
    let hits = (0..draws)
        .filter(|_| beta_sample(p1, &mut rng) > beta_sample(p2, &mut rng))
        .count();
    let est = hits as f64 / draws as f64;
    let exact = beta_exceedance(p1, p2);
    let se = (exact * (1.0 - exact) / draws as f64).sqrt();
    assert!((est - exact).abs() < 4.0 * se, "{est} vs {exact}");
}

#[test]
fn beta_cdf_agrees_with_binomial_tail() {
    for &(a, b) in &[(1, 1), (3, 7), (50, 20), (200, 200)] {
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let lhs = beta_cdf(bp(a, b), x).unwrap();
            let rhs = 1.0 - binomial_cdf(a + b - 1, x, a as i64 - 1).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "a={a} b={b} x={x}");
        }
    }
}

#[test]
fn binomial_pmf_sums_to_one() {
    for &(n, p) in &[(1, 0.5), (17, 0.3), (500, 0.01), (500, 0.999)] {
        let s: f64 = (0..=n).map(|k| binomial_pmf(n, p, k).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12, "n={n} p={p}");
    }
}

#[test]
fn beta_mean_from_stream_samples() {
    let mut stream = RandomStream::new(5, 0, StreamPurpose::Reference);
    let n = 200_000;
    let mean = (0..n)
        .map(|_| beta_sample(bp(3, 2), &mut stream))
        .sum::<f64>()
        / n as f64;
    // sd of Beta(3,2) is 0.2
    assert!((mean - 0.6).abs() < 4.0 * 0.2 / (n as f64).sqrt(), "{mean}");
}

#[test]
fn tracker_stays_on_scratch_over_long_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut tracker = ExceedanceTracker::new(ExceedanceState::prior());
    let mut worst: f64 = 0.0;
    for step in 0..20_000 {
        let arm = usize::from(rng.random::<f64>() < 0.3);
        let p = if arm == 0 { 0.9 } else { 0.5 };
        tracker.observe(arm, rng.random::<f64>() < p).unwrap();
        if step % 97 == 0 {
            let s = tracker.state();
            let scratch = ExceedanceState::new(s.params1, s.params2);
            worst = worst.max((s.prob - scratch.prob).abs());
            let (lc, ls) = (s.ln_complement(), scratch.ln_complement());
            assert!(
                (lc - ls).abs() < 1e-8 * ls.abs().max(1.0),
                "step {step}: {lc} vs {ls}"
            );
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn best_arm_three_arms_against_monte_carlo() {
    let ps = [bp(8, 4), bp(6, 6), bp(3, 2)];
    let exact = best_arm_probabilities(&ps).unwrap();
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 300_000;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        let v: Vec<f64> = ps.iter().map(|&p| beta_sample(p, &mut rng)).collect();
        let arg = (0..3).fold(0, |m, i| if v[i] > v[m] { i } else { m });
        counts[arg] += 1;
    }
    for i in 0..3 {
        let est = counts[i] as f64 / draws as f64;
        let se = (exact[i] * (1.0 - exact[i]) / draws as f64).sqrt();
        assert!(
            (est - exact[i]).abs() < 4.0 * se,
            "arm {i}: {est} vs {}",
            exact[i]
        );
    }
}

#[test]
fn best_arm_large_parameters_use_sampling_path() {
    let ps = [
        BetaParams::from_counts(15_000, 5_000),
        BetaParams::from_counts(10_000, 10_000),
        bp(2, 2),
    ];
    let v = best_arm_probabilities(&ps).unwrap();
    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // arm 1 is pinned near 0.75; arm 3 beats it with prob 1 - I_0.75(2, 2)
    assert!(v[1] < 1e-3);
    assert!((v[2] - 0.15625).abs() < 0.01, "{v:?}");
}
