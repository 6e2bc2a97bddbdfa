use std::fmt;

use rayon::prelude::*;

use crate::capacity::waterfill::waterfilling;
use crate::channel::{AngularSampler, GaussianStream};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, log2det_identity_plus, small_gram, CMatrix};
use crate::scalar::{Complex, Real};
use crate::spectra::CouplingMatrix;

/// Stream offset used by the i.i.d. reference channel.
const IID_DOMAIN: u64 = 1 << 61;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    CsirMc,
    CsirAsymptotic,
    CsitWaterfilling,
    StatisticalCsit,
    IidBaseline,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::CsirMc => "CSIR-MC",
            Regime::CsirAsymptotic => "CSIR-asymptotic",
            Regime::CsitWaterfilling => "CSIT-waterfilling",
            Regime::StatisticalCsit => "statistical-CSIT",
            Regime::IidBaseline => "iid-baseline",
        })
    }
}

/// Ergodic capacity estimate in bit/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub snr_db: f64,
    pub regime: Regime,
    /// Capacity of each realization, in trial order.
    pub per_trial: Vec<f64>,
}

impl CapacityResult {
    fn from_trials(per_trial: Vec<f64>, snr: f64, regime: Regime) -> Self {
        let n = per_trial.len();
        let mean = per_trial.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = per_trial.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: mean.max(0.0),
            std_error,
            trials: n,
            snr_db: crate::capacity::linear_to_db(snr),
            regime,
            per_trial,
        }
    }
}

fn check_trials(trials: usize, snr: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::InvalidArgument(format!("snr must be finite and non-negative, got {snr}")));
    }
    Ok(())
}

/// `H·P·Hᴴ` (or its smaller-side counterpart) for diagonal `P`.
fn weighted_gram<T: Real>(h: &CMatrix<T>, powers: &[T]) -> CMatrix<T> {
    let mut g = h.clone();
    for (j, mut col) in g.column_iter_mut().enumerate() {
        col *= Complex::new(powers[j].sqrt(), T::zero());
    }
    small_gram(&g)
}

/// `log₂ det(I + snr·H·P·Hᴴ)` for diagonal `P`.
fn statistical_trial<T: Real>(h: &CMatrix<T>, powers: &[T], snr: T) -> Result<T> {
    log2det_identity_plus(&weighted_gram(h, powers), snr)
}

/// `log₂ det(I + (snr/n_s)·H·Hᴴ)` of one channel with `n_s` input streams.
pub fn csir_capacity_of<T: Real>(h: &CMatrix<T>, snr: T, streams: usize) -> Result<T> {
    let p = T::one() / T::from_usize_lossy(streams);
    let powers = vec![p; h.ncols()];
    statistical_trial(h, &powers, snr)
}

fn run_trials<F>(trials: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = (0..trials as u64).into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Runs `f` once per trial, where each call returns one capacity per snr, and
/// regroups the values per snr.
fn run_sweep<T, F>(trials: usize, snrs: &[T], regime: Regime, f: F) -> Result<Vec<CapacityResult>>
where
    T: Real,
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(&f)
        .collect::<Vec<Result<Vec<f64>>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(snrs
        .iter()
        .enumerate()
        .map(|(i, &snr)| CapacityResult::from_trials(per_trial.iter().map(|c| c[i]).collect(), snr.to_f64_lossy(), regime))
        .collect())
}

fn check_sweep<T: Real>(trials: usize, snrs: &[T]) -> Result<()> {
    if snrs.is_empty() {
        return Err(Error::InvalidArgument("at least one snr is required".into()));
    }
    snrs.iter().try_for_each(|s| check_trials(trials, s.to_f64_lossy()))
}

/// Monte Carlo capacity with a fixed diagonal input allocation.
pub fn capacity_statistical_csit<T: Real>(
    coupling: &CouplingMatrix<T>,
    powers: &[T],
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snr: T,
    trials: usize,
    seed: u64,
) -> Result<CapacityResult> {
    check_trials(trials, snr.to_f64_lossy())?;
    if powers.len() != coupling.n_source() {
        return Err(Error::DimensionMismatch {
            context: "power allocation",
            expected: coupling.n_source().to_string(),
            found: powers.len().to_string(),
        });
    }
    if powers.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
        return Err(Error::InvalidArgument("powers must be finite and non-negative".into()));
    }
    let trace = powers.iter().fold(T::zero(), |a, &b| a + b);
    if trace > T::one() + T::lit(1e-12) {
        return Err(Error::TraceViolation {
            trace: trace.to_f64_lossy(),
        });
    }
    let mut r = statistical_core(coupling, powers, n_receive_antennas, n_source_antennas, &[snr], trials, seed, Regime::StatisticalCsit)?;
    Ok(r.remove(0))
}

#[allow(clippy::too_many_arguments)]
fn statistical_core<T: Real>(
    coupling: &CouplingMatrix<T>,
    powers: &[T],
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snrs: &[T],
    trials: usize,
    seed: u64,
    regime: Regime,
) -> Result<Vec<CapacityResult>> {
    let sampler = AngularSampler::new(coupling, n_receive_antennas, n_source_antennas);
    run_sweep(trials, snrs, regime, |k| {
        let gram = weighted_gram(&sampler.sample(seed, k).matrix, powers);
        snrs.iter().map(|&snr| log2det_identity_plus(&gram, snr).map(|c| c.to_f64_lossy())).collect()
    })
}

/// Capacity with channel knowledge at the receiver only: uniform power
/// `1/n_s` per source cell.
pub fn capacity_csir_mc<T: Real>(
    coupling: &CouplingMatrix<T>,
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snr: T,
    trials: usize,
    seed: u64,
) -> Result<CapacityResult> {
    capacity_csir_mc_sweep(coupling, n_receive_antennas, n_source_antennas, &[snr], trials, seed).map(|mut r| r.remove(0))
}

/// [`capacity_csir_mc`] at several snrs over the same realizations, each
/// drawn once. Every entry equals the single-snr result.
pub fn capacity_csir_mc_sweep<T: Real>(
    coupling: &CouplingMatrix<T>,
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snrs: &[T],
    trials: usize,
    seed: u64,
) -> Result<Vec<CapacityResult>> {
    check_sweep(trials, snrs)?;
    let p = T::one() / T::from_usize_lossy(coupling.n_source());
    let powers = vec![p; coupling.n_source()];
    statistical_core(coupling, &powers, n_receive_antennas, n_source_antennas, snrs, trials, seed, Regime::CsirMc)
}

/// Capacity with full channel knowledge: waterfilling over the eigenvalues of
/// `H_a H_aᴴ` in every realization.
pub fn capacity_csit_mc<T: Real>(
    coupling: &CouplingMatrix<T>,
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snr: T,
    trials: usize,
    seed: u64,
) -> Result<CapacityResult> {
    capacity_csit_mc_sweep(coupling, n_receive_antennas, n_source_antennas, &[snr], trials, seed).map(|mut r| r.remove(0))
}

/// [`capacity_csit_mc`] at several snrs, with one eigendecomposition per
/// realization. Every entry equals the single-snr result.
pub fn capacity_csit_mc_sweep<T: Real>(
    coupling: &CouplingMatrix<T>,
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snrs: &[T],
    trials: usize,
    seed: u64,
) -> Result<Vec<CapacityResult>> {
    check_sweep(trials, snrs)?;
    let sampler = AngularSampler::new(coupling, n_receive_antennas, n_source_antennas);
    run_sweep(trials, snrs, Regime::CsitWaterfilling, |k| {
        let h = sampler.sample(seed, k);
        let eigs: Vec<T> = hermitian_eigenvalues(&small_gram(&h.matrix)).into_iter().map(|e| e.max(T::zero())).collect();
        snrs.iter()
            .map(|&snr| match waterfilling(&eigs, snr) {
                Ok(w) => Ok(w.capacity.to_f64_lossy()),
                Err(Error::AllZeroEigenvalues) => Ok(0.0),
                Err(e) => Err(e),
            })
            .collect()
    })
}

/// CSIR capacity of an `n_r × n_s` channel with i.i.d. `CN(0,1)` entries.
pub fn capacity_iid_mc(n_r: usize, n_s: usize, snr: f64, trials: usize, seed: u64) -> Result<CapacityResult> {
    check_trials(trials, snr)?;
    if n_r == 0 || n_s == 0 {
        return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
    }
    let per_trial = run_trials(trials, |k| {
        let mut h = CMatrix::<f64>::zeros(n_r, n_s);
        GaussianStream::new(seed, IID_DOMAIN + k).fill(h.as_mut_slice());
        csir_capacity_of(&h, snr, n_s)
    })?;
    Ok(CapacityResult::from_trials(per_trial, snr, Regime::IidBaseline))
}
