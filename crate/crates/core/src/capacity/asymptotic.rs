use crate::capacity::montecarlo::{CapacityResult, Regime};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Normalization of the two fixed-point sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Both sums divided by the number of source cells.
    #[default]
    SourceCount,
    /// Receive sum by the receive count, source sum by the source count.
    PerSide,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T> {
    pub gamma_receive: T,
    pub gamma_source: T,
    pub iterations: usize,
    pub residual: T,
}

const DAMPING: f64 = 0.5;
const MAX_ITERATIONS: usize = 100_000;

fn fixed_point_map<T: Real>(gr: &[T], gs: &[T], snr: T, norm: Normalization, g_r: T, g_s: T) -> (T, T) {
    let ns = T::from_usize_lossy(gs.len());
    let nr = T::from_usize_lossy(gr.len());
    let (dr, ds) = match norm {
        Normalization::SourceCount => (ns, ns),
        Normalization::PerSide => (nr, ns),
    };
    let new_r = gr.iter().fold(T::zero(), |a, &g| a + g / (T::one() + snr * g * g_s)) / dr;
    let new_s = gs.iter().fold(T::zero(), |a, &g| a + g / (T::one() + snr * g * g_r)) / ds;
    (new_r, new_s)
}

/// Damped fixed-point iteration from `Γ = 1`, stopping when successive
/// iterates agree to `1e-10` relative.
///
/// `receive_gains` and `source_gains` are the per-cell gains `N·σ²`.
pub fn solve_fixed_point<T: Real>(receive_gains: &[T], source_gains: &[T], snr: T, norm: Normalization) -> Result<FixedPoint<T>> {
    if receive_gains.is_empty() || source_gains.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let damping = T::lit(DAMPING);
    let tol = T::lit(1e-10);
    let (mut gr, mut gs) = (T::one(), T::one());
    for it in 1..=MAX_ITERATIONS {
        let (fr, fs) = fixed_point_map(receive_gains, source_gains, snr, norm, gr, gs);
        let nr = damping * gr + (T::one() - damping) * fr;
        let ns = damping * gs + (T::one() - damping) * fs;
        let done = (nr - gr).abs() <= tol * nr.abs() && (ns - gs).abs() <= tol * ns.abs();
        gr = nr;
        gs = ns;
        if done {
            let (fr, fs) = fixed_point_map(receive_gains, source_gains, snr, norm, gr, gs);
            let residual = ((fr - gr).abs() / gr.abs()).max((fs - gs).abs() / gs.abs());
            return Ok(FixedPoint {
                gamma_receive: gr,
                gamma_source: gs,
                iterations: it,
                residual,
            });
        }
    }
    let (fr, fs) = fixed_point_map(receive_gains, source_gains, snr, norm, gr, gs);
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual: ((fr - gr).abs() / gr.abs()).max((fs - gs).abs() / gs.abs()).to_f64_lossy(),
    })
}

/// Large-system approximation of the CSIR capacity for separable variances.
///
/// `receive_variances` and `source_variances` are unit-sum marginals; gains are
/// `N_r·σ_r²` and `N_s·σ_s²`.
pub fn capacity_asymptotic<T: Real>(
    receive_variances: &[T],
    source_variances: &[T],
    n_receive_antennas: usize,
    n_source_antennas: usize,
    snr: T,
    norm: Normalization,
) -> Result<(CapacityResult, FixedPoint<T>)> {
    let nr = T::from_usize_lossy(n_receive_antennas);
    let ns = T::from_usize_lossy(n_source_antennas);
    let gr: Vec<T> = receive_variances.iter().map(|&v| nr * v).collect();
    let gs: Vec<T> = source_variances.iter().map(|&v| ns * v).collect();
    let fp = solve_fixed_point(&gr, &gs, snr, norm)?;
    let log2e = T::lit(std::f64::consts::LOG2_E);
    let mut c = T::zero();
    for &g in &gs {
        c += crate::scalar::log2(T::one() + snr * g * fp.gamma_receive);
    }
    for &g in &gr {
        c += crate::scalar::log2(T::one() + snr * g * fp.gamma_source);
    }
    c -= T::from_usize_lossy(gs.len()) * snr * fp.gamma_receive * fp.gamma_source * log2e;
    let result = CapacityResult {
        mean: c.to_f64_lossy().max(0.0),
        std_error: 0.0,
        trials: 0,
        snr_db: crate::capacity::linear_to_db(snr.to_f64_lossy()),
        regime: Regime::CsirAsymptotic,
        per_trial: Vec::new(),
    };
    Ok((result, fp))
}
