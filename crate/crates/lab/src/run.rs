//! Experiment drivers.
//!
//! Every trial draws from its own stream `(n << 32) | trial` of the master
//! seed, and records are collected in job order, so the output does not
//! depend on the number of worker threads.

use log::{debug, info};
use rayon::prelude::*;

use qlimit::channel::{EbChannel, WeightVector};
use qlimit::eigen::hermitian_eigs;
use qlimit::geometry::{cm_probe, estimate_norm_one_inf, weyl_operator};
use qlimit::matrix::{Matrix, C64};
use qlimit::oracles::{
    fw_rank_one, mixed_unitary_norm_limit, psi_star, stinespring_minimizer_profile, stinespring_peak_eigenvalue,
};
use qlimit::random::{
    random_density, random_projective_povm, sample_mixed_unitary_channel, sample_pure_state, sample_stinespring_channel,
    StinespringRegime,
};
use qlimit::state::{entropy_of_spectrum, von_neumann_entropy};
use qlimit::tensor_lab::{apply_tensor_product, eb_tensor_decompose, matrix_eq_positivity_probe};
use qlimit::{Channel, DensityMatrix, SeededRng};

use crate::config::{ChannelKind, ExperimentConfig, ExperimentKind, ProbeSpec};
use crate::error::LabError;
use crate::record::ExperimentRecord;

/// Stream reserved for draws shared by all trials (the random-pure probe).
const SHARED_STREAM: u64 = u64::MAX;

pub fn trial_stream(n: usize, trial: usize) -> u64 {
    ((n as u64) << 32) | trial as u64
}

/// Runs `cfg` on a pool of `threads` workers (`None` for the rayon default).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ExperimentRecord>, LabError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    info!("running {} on {} thread(s)", cfg.experiment, pool.current_num_threads());
    let records = pool.install(|| match cfg.experiment {
        ExperimentKind::CmConvergence => cm_convergence(cfg),
        ExperimentKind::NormLimit => norm_limit(cfg),
        ExperimentKind::PsiStarSweep => psistar_sweep(cfg),
        ExperimentKind::StinespringPeak => stinespring_peak(cfg),
        ExperimentKind::WeylInvariance => weyl_invariance(cfg),
        ExperimentKind::EbTensor => eb_tensor(cfg),
        ExperimentKind::OutputCloud => output_cloud(cfg),
    })?;
    info!("{} records", records.len());
    Ok(records)
}

/// `(n, trial)` for every grid point, in emission order.
fn grid_jobs(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect()
}

fn par_jobs<J, F>(jobs: &[J], f: F) -> Result<Vec<ExperimentRecord>, LabError>
where
    J: Sync,
    F: Fn(&J) -> Result<ExperimentRecord, LabError> + Sync + Send,
{
    jobs.par_iter().map(f).collect()
}

fn sample_channel(cfg: &ExperimentConfig, w: &WeightVector, n: usize, rng: &mut SeededRng) -> Result<Channel, LabError> {
    Ok(match cfg.channel {
        ChannelKind::MixedUnitary => sample_mixed_unitary_channel(w, n, rng)?,
        ChannelKind::Stinespring => {
            let t = cfg.t.expect("validated: stinespring needs t");
            StinespringRegime::new(cfg.k, t, vec![n])?.sample(n, rng)?
        }
        ChannelKind::Depolarizing => Channel::depolarizing(cfg.k, n)?,
    })
}

/// The probe state, plus its unit vector when it is pure.
fn probe_state(cfg: &ExperimentConfig) -> Result<(DensityMatrix, Option<Vec<C64>>), LabError> {
    let k = cfg.k;
    match &cfg.probe {
        ProbeSpec::FlatRankOne => {
            let a = vec![C64::new(1.0 / (k as f64).sqrt(), 0.0); k];
            Ok((DensityMatrix::pure(&a)?, Some(a)))
        }
        ProbeSpec::RandomPure => {
            let a = sample_pure_state(k, &mut SeededRng::new(cfg.seed, SHARED_STREAM));
            Ok((DensityMatrix::pure(&a)?, Some(a)))
        }
        ProbeSpec::Explicit(rho) => {
            let es = hermitian_eigs(rho.matrix())?;
            let pure = (es.values[0] - 1.0).abs() <= 1e-12;
            Ok((rho.clone(), pure.then(|| es.vector(0))))
        }
    }
}

/// Oracle value of the top eigenvalue of `Φ*(A)` in the large-`n` limit,
/// when one is available in closed form.
fn cm_target(cfg: &ExperimentConfig, w: &WeightVector, a: &DensityMatrix, vector: Option<&[C64]>) -> Result<Option<f64>, LabError> {
    Ok(match (cfg.channel, vector) {
        // `Tr[A]/k` rather than `1/k`, so the comparison is exact in floating point
        (ChannelKind::Depolarizing, _) => Some(a.matrix().trace().re / cfg.k as f64),
        (ChannelKind::MixedUnitary, Some(a)) => Some(fw_rank_one(a, w)?),
        _ => None,
    })
}

fn cm_convergence(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    let w = cfg.weight_vector();
    let (a, vector) = probe_state(cfg)?;
    let target = cm_target(cfg, &w, &a, vector.as_deref())?;
    par_jobs(&grid_jobs(cfg), |&(n, trial)| {
        let mut rng = SeededRng::new(cfg.seed, trial_stream(n, trial));
        let ch = sample_channel(cfg, &w, n, &mut rng)?;
        let probe = cm_probe(&ch, &a, cfg.m)?;
        debug!("cm-convergence n={n} trial={trial}: {:?}", probe.top_eigenvalues);
        let rec = ExperimentRecord::new(
            cfg.experiment.as_str(),
            trial,
            cfg.seed,
            n,
            cfg.k,
            cfg.probe.descriptor(),
            probe.top_eigenvalues,
        );
        Ok(match target {
            Some(t) => rec.with_target(t),
            None => rec,
        })
    })
}

fn norm_target(cfg: &ExperimentConfig, w: &WeightVector) -> Result<f64, LabError> {
    Ok(match cfg.channel {
        ChannelKind::MixedUnitary => mixed_unitary_norm_limit(w)?,
        ChannelKind::Stinespring => stinespring_peak_eigenvalue(cfg.k, cfg.t.expect("validated"))?,
        ChannelKind::Depolarizing => 1.0 / cfg.k as f64,
    })
}

fn channel_descriptor(cfg: &ExperimentConfig) -> String {
    match cfg.channel {
        ChannelKind::MixedUnitary => "mixed-unitary".into(),
        ChannelKind::Stinespring => format!("stinespring-t={}", cfg.t.expect("validated")),
        ChannelKind::Depolarizing => "depolarizing".into(),
    }
}

/// Values: ascent estimate of `‖Φ‖_{1→∞}` and the entropy of the best output.
fn norm_limit(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    let w = cfg.weight_vector();
    let target = norm_target(cfg, &w)?;
    let label = channel_descriptor(cfg);
    par_jobs(&grid_jobs(cfg), |&(n, trial)| {
        let mut rng = SeededRng::new(cfg.seed, trial_stream(n, trial));
        let ch = sample_channel(cfg, &w, n, &mut rng)?;
        let est = estimate_norm_one_inf(&ch, cfg.restarts, cfg.iter_cap, &mut rng)?;
        debug!("norm-limit n={n} trial={trial}: {}", est.value);
        let entropy = von_neumann_entropy(&est.best_output)?;
        Ok(ExperimentRecord::new(cfg.experiment.as_str(), trial, cfg.seed, n, cfg.k, label.clone(), vec![est.value, entropy])
            .with_target(target))
    })
}

/// Weights `(r, (1-r)/(k-1), …, (1-r)/(k-1))`.
pub fn r_family(k: usize, r: f64) -> Result<WeightVector, LabError> {
    let q = (1.0 - r) / (k - 1) as f64;
    let mut w = vec![q; k];
    w[0] = r;
    Ok(WeightVector::new(w)?)
}

/// Values: `psi_star(w)`, its square (the norm limit) and the number of
/// subsets examined. The probe column names the maximizing subset, 1-based.
fn psistar_sweep(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    let family: Vec<WeightVector> = if cfg.r_grid.is_empty() {
        vec![cfg.weight_vector()]
    } else {
        cfg.r_grid.iter().map(|&r| r_family(cfg.k, r)).collect::<Result<_, _>>()?
    };
    family
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let res = psi_star(w)?;
            let subset: Vec<String> = res.argmax_subset.iter().map(|j| (j + 1).to_string()).collect();
            Ok(ExperimentRecord::new(
                cfg.experiment.as_str(),
                i,
                cfg.seed,
                0,
                cfg.k,
                format!("J={}", subset.join("-")),
                vec![res.value, res.value * res.value, res.evaluated as f64],
            ))
        })
        .collect()
}

/// Values: the peak eigenvalue `a` and the entropy of the minimizer profile.
fn stinespring_peak(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    cfg.t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let profile = stinespring_minimizer_profile(cfg.k, t)?;
            Ok(ExperimentRecord::new(
                cfg.experiment.as_str(),
                i,
                cfg.seed,
                0,
                cfg.k,
                format!("t={t}"),
                vec![profile[0], entropy_of_spectrum(&profile)],
            ))
        })
        .collect()
}

/// Values: top eigenvalue of `Φ*(A)` and of `Φ*(W A W*)` for the same channel.
fn weyl_invariance(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    let w = cfg.weight_vector();
    let (a, _) = probe_state(cfg)?;
    let (p, q) = cfg.weyl;
    let u = weyl_operator(p, q, cfg.k)?;
    let rotated = DensityMatrix::normalize(&u.mul_mat(a.matrix()).mul_adjoint(&u))?;
    let label = format!("{}/W{p}-{q}", cfg.probe.descriptor());
    par_jobs(&grid_jobs(cfg), |&(n, trial)| {
        let mut rng = SeededRng::new(cfg.seed, trial_stream(n, trial));
        let ch = sample_mixed_unitary_channel(&w, n, &mut rng)?;
        let x = cm_probe(&ch, &a, 1)?.top_eigenvalues[0];
        let y = cm_probe(&ch, &rotated, 1)?.top_eigenvalues[0];
        Ok(ExperimentRecord::new(cfg.experiment.as_str(), trial, cfg.seed, n, cfg.k, label.clone(), vec![x, y]))
    })
}

/// Values: reconstruction error of the product decomposition of
/// `(Ξ ⊗ Ψ)(bb*)`, and the most negative centered block of the
/// positivity probe for `Ξ`'s POVM.
fn eb_tensor(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    par_jobs(&grid_jobs(cfg), |&(n, trial)| {
        let mut rng = SeededRng::new(cfg.seed, trial_stream(n, trial));
        let povm = random_projective_povm(cfg.eb_in, cfg.eb_outcomes, &mut rng)?;
        let states = (0..cfg.eb_outcomes).map(|_| random_density(cfg.eb_out, &mut rng)).collect();
        let xi = EbChannel::new(povm, states)?;
        let psi = sample_stinespring_channel(cfg.k, n, cfg.psi_in, &mut rng)?;
        let b = sample_pure_state(cfg.eb_in * cfg.psi_in, &mut rng);
        let dec = eb_tensor_decompose(&xi, &psi, &b)?;
        let direct = apply_tensor_product(&Channel::EntanglementBreaking(xi.clone()), &psi, &Matrix::outer(&b))?;
        let diff = dec.reconstruct(&xi, &psi)?.max_abs_diff(&direct);
        let report = matrix_eq_positivity_probe(xi.povm(), cfg.lambda)?;
        let most_negative = report.centered_min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let label = format!("eb{}x{}x{}", cfg.eb_in, cfg.eb_outcomes, cfg.eb_out);
        Ok(ExperimentRecord::new(cfg.experiment.as_str(), trial, cfg.seed, n, cfg.k, label, vec![diff, most_negative])
            .with_target(0.0))
    })
}

/// One channel per `n`; each trial is one random pure input. Values: the
/// output spectrum (descending) followed by its entropy.
fn output_cloud(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, LabError> {
    let w = cfg.weight_vector();
    let label = channel_descriptor(cfg);
    let mut records = Vec::new();
    for &n in &cfg.n_grid {
        let mut rng = SeededRng::new(cfg.seed, trial_stream(n, u32::MAX as usize));
        let ch = sample_channel(cfg, &w, n, &mut rng)?;
        let trials: Vec<usize> = (0..cfg.trials).collect();
        records.extend(par_jobs(&trials, |&trial| {
            let mut rng = SeededRng::new(cfg.seed, trial_stream(n, trial));
            let x = sample_pure_state(ch.input_dim(), &mut rng);
            let out = DensityMatrix::normalize(&ch.apply_pure(&x)?)?;
            let mut values = out.spectrum()?;
            values.push(entropy_of_spectrum(&values));
            Ok(ExperimentRecord::new(cfg.experiment.as_str(), trial, cfg.seed, n, cfg.k, label.clone(), values))
        })?);
    }
    Ok(records)
}
