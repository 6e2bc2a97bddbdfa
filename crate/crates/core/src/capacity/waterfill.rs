use crate::error::{Error, Result};
use crate::scalar::Real;

/// Optimal power split over parallel channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Waterfilling<T> {
    /// Power per input eigenvalue, in input order.
    pub powers: Vec<T>,
    /// `Σ log₂(1 + p_i λ_i)` in bits.
    pub capacity: T,
    /// Water level.
    pub mu: T,
}

/// Waterfilling of budget `snr` over channel gains `eigs`.
///
/// The active set is found exactly: with gains sorted in decreasing order the
/// water level for the `k` strongest channels is `(snr + Σ 1/λ_i)/k`, and the
/// largest `k` whose weakest channel still lies under it is optimal.
pub fn waterfilling<T: Real>(eigs: &[T], snr: T) -> Result<Waterfilling<T>> {
    if eigs.iter().any(|e| !(*e >= T::zero()) || !e.is_finite()) {
        return Err(Error::InvalidArgument("eigenvalues must be finite and non-negative".into()));
    }
    if !(snr >= T::zero()) || !snr.is_finite() {
        return Err(Error::InvalidArgument("power budget must be finite and non-negative".into()));
    }
    let mut order: Vec<usize> = (0..eigs.len()).filter(|&i| eigs[i] > T::zero()).collect();
    if order.is_empty() {
        return Err(Error::AllZeroEigenvalues);
    }
    order.sort_by(|&a, &b| eigs[b].partial_cmp(&eigs[a]).expect("finite").then(a.cmp(&b)));
    let mut inv_sum = T::zero();
    let mut mu = snr + T::one() / eigs[order[0]];
    for (k, &i) in order.iter().enumerate() {
        let inv = T::one() / eigs[i];
        let candidate = (snr + inv_sum + inv) / T::from_usize_lossy(k + 1);
        if candidate <= inv {
            break;
        }
        inv_sum += inv;
        mu = candidate;
    }
    let mut powers = vec![T::zero(); eigs.len()];
    let mut capacity = T::zero();
    for &i in &order {
        let p = mu - T::one() / eigs[i];
        if p > T::zero() {
            powers[i] = p;
            capacity += crate::scalar::log2(T::one() + p * eigs[i]);
        }
    }
    Ok(Waterfilling { powers, capacity, mu })
}
