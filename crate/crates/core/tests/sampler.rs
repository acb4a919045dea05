use ipsc_core::conditioning::{ConditioningConfig, SampleBinConditioner};
use ipsc_core::prior::{GaussianProcessPrior, PriorScore};
use ipsc_core::sampler::{langevin_sample, langevin_sample_seeds, langevin_sample_with, NoiseSchedule, SamplerOptions};
use ipsc_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Moments {
    mean: f64,
    second: f64,
    se_mean: f64,
    se_second: f64,
}

fn moments(v: &[f64]) -> Moments {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let second = sq.iter().sum::<f64>() / n;
    let var1 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let var2 = sq.iter().map(|x| (x - second).powi(2)).sum::<f64>() / (n - 1.0);
    Moments { mean, second, se_mean: (var1 / n).sqrt(), se_second: (var2 / n).sqrt() }
}

#[test]
fn toy_posterior_matches_rejection_sampling() {
    let (lo, hi) = (0.5, 1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut accepted = Vec::new();
    for _ in 0..10_000_000 {
        let z: f64 = StandardNormal.sample(&mut rng);
        if lo <= z && z < hi {
            accepted.push(z);
        }
    }
    let oracle = moments(&accepted);

    let prior = GaussianProcessPrior::white(1.0).unwrap();
    let cond = SampleBinConditioner::new(8, vec![(0, lo, hi)], ConditioningConfig::default()).unwrap();
    let schedule = NoiseSchedule::standard();
    let seeds: Vec<u64> = (0..2000).collect();
    let runs: Vec<Vec<f64>> = langevin_sample_seeds(&cond, &prior, &schedule, &seeds).into_iter().map(|r| r.unwrap()).collect();

    let x0: Vec<f64> = runs.iter().map(|x| x[0]).collect();
    let got = moments(&x0);
    let se = (got.se_mean.powi(2) + oracle.se_mean.powi(2)).sqrt();
    assert!((got.mean - oracle.mean).abs() < 3.0 * se, "mean {} vs {}", got.mean, oracle.mean);
    let se = (got.se_second.powi(2) + oracle.se_second.powi(2)).sqrt();
    assert!((got.second - oracle.second).abs() < 3.0 * se, "E[x²] {} vs {}", got.second, oracle.second);

    let free: Vec<f64> = runs.iter().map(|x| x[5]).collect();
    let got = moments(&free);
    assert!(got.mean.abs() < 3.0 * got.se_mean);
    assert!((got.second - 1.0).abs() < 3.0 * (2.0f64 / free.len() as f64).sqrt());
}

#[test]
fn unconditional_variance_matches_the_prior() {
    let prior = GaussianProcessPrior::white(1.0).unwrap();
    let cond = SampleBinConditioner::unconditional(1024);
    let schedule = NoiseSchedule::standard();
    let seeds: Vec<u64> = (0..20).collect();
    let all: Vec<f64> = langevin_sample_seeds(&cond, &prior, &schedule, &seeds).into_iter().flat_map(|r| r.unwrap()).collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((0.9..=1.1).contains(&var), "{var}");
}

#[test]
fn final_step_draws_no_noise() {
    let prior = GaussianProcessPrior::white(1.0).unwrap();
    let cond = SampleBinConditioner::unconditional(4);
    let schedule = NoiseSchedule::new(10, 0.0, -20.0, 0.5).unwrap();
    let mut words = Vec::new();
    let mut record = |p: &ipsc_core::sampler::Progress<'_>| words.push((p.step, p.rng_words));
    let opts = SamplerOptions { progress_every: 1, progress: Some(&mut record) };
    langevin_sample_with(&cond, &prior, &schedule, 3, opts).unwrap();
    assert_eq!(words.len(), 10);
    assert!(words.windows(2).take(8).all(|w| w[1].1 > w[0].1));
    assert_eq!(words[9].1, words[8].1);
}

#[derive(Debug)]
struct Unstable;

impl PriorScore for Unstable {
    fn name(&self) -> &str {
        "unstable"
    }

    fn score(&self, x: &[f64], sigma: f64) -> Result<Vec<f64>> {
        let v = if sigma < 0.1 { f64::NAN } else { 0.0 };
        Ok(vec![v; x.len()])
    }
}

#[test]
fn non_finite_iterates_abort_with_the_step() {
    let cond = SampleBinConditioner::unconditional(4);
    let schedule = NoiseSchedule::new(40, 0.0, -40.0, 0.5).unwrap();
    match langevin_sample(&cond, &Unstable, &schedule, 0) {
        Err(Error::Numerical { step, sigma, .. }) => {
            assert!(sigma < 0.1);
            assert_eq!(schedule.sigma(step), sigma);
            assert!(schedule.sigma(step - 1) >= 0.1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn seeds_run_independently_and_reproducibly() {
    let prior = GaussianProcessPrior::new(0.9, 0.01).unwrap();
    let cond = SampleBinConditioner::unconditional(32);
    let schedule = NoiseSchedule::new(50, 0.0, -40.0, 0.5).unwrap();
    let batch = langevin_sample_seeds(&cond, &prior, &schedule, &[4, 5]);
    assert_eq!(batch[0].as_ref().unwrap(), &langevin_sample(&cond, &prior, &schedule, 4).unwrap());
    assert_eq!(batch[1].as_ref().unwrap(), &langevin_sample(&cond, &prior, &schedule, 5).unwrap());
}
