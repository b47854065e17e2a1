use hawkes_branch::simulate::{simulate_branching, simulate_dataset, simulate_thinning, SimConfig, SimError, SimMethod};
use hawkes_branch::{log_likelihood, ExpKernel, HawkesParams, Matrix};

fn params(mu: Vec<f64>, a: Vec<Vec<f64>>, beta: f64) -> HawkesParams<f64> {
    HawkesParams::new(mu, Matrix::from_rows(&a), ExpKernel::new(beta).unwrap()).unwrap()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn counts(p: &HawkesParams<f64>, horizon: f64, reps: usize, method: SimMethod, seed: u64) -> Vec<Vec<f64>> {
    let sim = simulate_dataset(p, &SimConfig::new(horizon, seed), reps, method).unwrap();
    (0..p.num_types())
        .map(|c| sim.sequences.iter().map(|s| s.types().filter(|&k| k == c).count() as f64).collect())
        .collect()
}

#[test]
fn poisson_mean_count() {
    let p = params(vec![1.0], vec![vec![0.0]], 1.0);
    for method in [SimMethod::Thinning, SimMethod::Branching] {
        let (m, _) = mean_sd(&counts(&p, 100.0, 1000, method, 1)[0]);
        assert!((m - 100.0).abs() <= 3.0 * (100.0f64 / 1000.0).sqrt(), "{method:?}: {m}");
    }
}

#[test]
fn zero_background_gives_empty_sequences() {
    let p = params(vec![0.0, 0.0], vec![vec![0.5, 0.1], vec![0.1, 0.5]], 1.0);
    let sim = simulate_dataset(&p, &SimConfig::new(50.0, 3), 20, SimMethod::Thinning).unwrap();
    assert!(sim.sequences.iter().all(|s| s.is_empty()));
    let (s, l) = simulate_branching(&p, &SimConfig::new(50.0, 3), "x").unwrap();
    assert!(s.is_empty() && l.is_empty());
}

#[test]
fn thinning_mean_matches_hawkes_formula() {
    let (mu, a, beta, horizon) = (0.5, 0.5, 1.0, 200.0);
    let p = params(vec![mu], vec![vec![a]], beta);
    let (m, sd) = mean_sd(&counts(&p, horizon, 2000, SimMethod::Thinning, 2)[0]);
    // exact E[N_T] from an empty history; the stationary value μT/(1−a) = 200 ignores the start-up transient
    let r = 1.0 - a;
    let exact = mu * horizon / r - mu * a * (1.0 - (-r * beta * horizon).exp()) / (beta * r * r);
    let se = sd / 2000f64.sqrt();
    assert!((m - exact).abs() <= 3.0 * se, "mean {m}, exact {exact}, se {se}");
}

#[test]
fn thinning_and_branching_agree_in_distribution() {
    let p = params(vec![0.3, 0.2], vec![vec![0.3, 0.2], vec![0.1, 0.4]], 1.5);
    let th = counts(&p, 50.0, 2000, SimMethod::Thinning, 4);
    let br = counts(&p, 50.0, 2000, SimMethod::Branching, 5);
    for c in 0..2 {
        let (m1, s1) = mean_sd(&th[c]);
        let (m2, s2) = mean_sd(&br[c]);
        let se = ((s1 * s1 + s2 * s2) / 2000.0).sqrt();
        assert!((m1 - m2).abs() <= 3.0 * se, "type {c}: {m1} vs {m2} (se {se})");
    }
}

#[test]
fn child_lags_are_exponential() {
    let beta = 20.0;
    let p = params(vec![0.5], vec![vec![0.8]], beta);
    let mut lags = Vec::new();
    let mut stream = 0;
    while lags.len() < 10_000 {
        let (s, l) = simulate_branching(&p, &SimConfig::new(200.0, 6).with_stream(stream), "s").unwrap();
        for (n, parent) in l.parents().iter().enumerate() {
            if let Some(q) = parent {
                lags.push(s.events()[n].t - s.events()[*q].t);
            }
        }
        stream += 1;
    }
    lags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = lags[lags.len() / 2];
    assert!(median <= 3.0 / beta);
    // the sample median of n exponentials has sd ≈ 1/(β√n)
    let sd = 1.0 / (beta * (lags.len() as f64).sqrt());
    assert!((median - 2f64.ln() / beta).abs() <= 4.0 * sd, "median {median}");
}

#[test]
fn simulations_are_reproducible_and_causal() {
    let p = params(vec![0.4, 0.3], vec![vec![0.4, 0.2], vec![0.3, 0.3]], 2.0);
    let cfg = SimConfig::new(60.0, 99);
    for method in [SimMethod::Thinning, SimMethod::Branching] {
        let a = simulate_dataset(&p, &cfg, 8, method).unwrap();
        let b = simulate_dataset(&p, &cfg, 8, method).unwrap();
        assert_eq!(a.sequences, b.sequences);
        assert_eq!(a.labels, b.labels);
        for s in &a.sequences {
            assert!(log_likelihood(&p, s).unwrap().is_finite());
        }
    }
    let (_, labels) = simulate_branching(&p, &cfg, "c").unwrap();
    assert!(labels.parents().iter().enumerate().all(|(n, q)| q.is_none_or(|q| q < n)));
}

#[test]
fn no_excitation_means_no_parents() {
    let p = params(vec![1.0, 2.0], vec![vec![0.0; 2]; 2], 1.0);
    let (s, l) = simulate_branching(&p, &SimConfig::new(20.0, 8), "z").unwrap();
    assert!(!s.is_empty());
    assert!(l.parents().iter().all(Option::is_none));
}

#[test]
fn guards_reject_unstable_and_runaway_processes() {
    let unstable = params(vec![0.5], vec![vec![1.2]], 1.0);
    assert!(matches!(simulate_thinning(&unstable, &SimConfig::new(10.0, 1), "u"), Err(SimError::Unstable { .. })));
    assert!(matches!(simulate_branching(&unstable, &SimConfig::new(10.0, 1), "u"), Err(SimError::Unstable { .. })));
    let busy = params(vec![50.0], vec![vec![0.5]], 1.0);
    match simulate_thinning(&busy, &SimConfig::new(100.0, 1).with_max_events(100), "b") {
        Err(SimError::Truncated { max_events, partial, .. }) => {
            assert_eq!(max_events, 100);
            assert_eq!(partial.len(), 100);
        }
        other => panic!("unexpected {other:?}"),
    }
}
