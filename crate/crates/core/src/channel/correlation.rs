use nalgebra::{DMatrix, DVector};

use crate::channel::basis::FourierBasis;
use crate::channel::rng::{GaussianStream, CORRELATION_DOMAIN};
use crate::channel::synthesis::SpatialChannel;
use crate::error::{Error, Result};
use crate::geometry::PlanarArray;
use crate::linalg::{mul, mul_adjoint_right, symmetric_eigenvalues, CMatrix};
use crate::scalar::{Complex, Real};
use crate::spectra::CouplingMatrix;

/// Largest `N_r·N_s` for which `U` or `R` may be materialized.
pub const MAX_EXPLICIT_SIDE: usize = 4096;

/// Factored correlation `R = U Λ Uᴴ` of `vec(H)` (column-major).
///
/// `U = conj(Φ_s) ⊗ Φ_r` and `Λ = diag(N_r N_s σ²)` in the same vec order.
pub struct CorrelationFactors<'a, T: Real> {
    pub receive: &'a FourierBasis<T>,
    pub source: &'a FourierBasis<T>,
    pub eigenvalues: DVector<T>,
    explicit_u: Option<CMatrix<T>>,
}

pub fn correlation_matrix<'a, T: Real>(
    coupling: &CouplingMatrix<T>,
    receive: &'a FourierBasis<T>,
    source: &'a FourierBasis<T>,
) -> Result<CorrelationFactors<'a, T>> {
    if coupling.n_receive() != receive.n_cells() || coupling.n_source() != source.n_cells() {
        return Err(Error::DimensionMismatch {
            context: "correlation factors",
            expected: format!("{}x{}", receive.n_cells(), source.n_cells()),
            found: format!("{}x{}", coupling.n_receive(), coupling.n_source()),
        });
    }
    let scale = T::from_usize_lossy(receive.n_antennas()) * T::from_usize_lossy(source.n_antennas());
    let eigenvalues = DVector::from_iterator(coupling.values.len(), coupling.values.iter().map(|&v| scale * v));
    Ok(CorrelationFactors {
        receive,
        source,
        eigenvalues,
        explicit_u: None,
    })
}

impl<'a, T: Real> CorrelationFactors<'a, T> {
    pub fn dimension(&self) -> usize {
        self.receive.n_antennas() * self.source.n_antennas()
    }

    pub fn rank_bound(&self) -> usize {
        self.eigenvalues.len()
    }

    fn guard(&self) -> Result<()> {
        let d = self.dimension();
        if d > MAX_EXPLICIT_SIDE {
            return Err(Error::SizeLimit {
                requested: d,
                limit: MAX_EXPLICIT_SIDE,
            });
        }
        Ok(())
    }

    /// Builds and keeps the explicit `U`; later draws use it directly.
    pub fn materialize_u(&mut self) -> Result<&CMatrix<T>> {
        self.guard()?;
        if self.explicit_u.is_none() {
            let pr = self.receive.matrix();
            let ps = self.source.matrix();
            let (nr_ant, nr) = pr.shape();
            let (ns_ant, ns) = ps.shape();
            let mut u = CMatrix::<T>::zeros(nr_ant * ns_ant, nr * ns);
            for j in 0..ns {
                for i in 0..nr {
                    let col = j * nr + i;
                    for b in 0..ns_ant {
                        let c = ps[(b, j)].conj();
                        for a in 0..nr_ant {
                            u[(b * nr_ant + a, col)] = c * pr[(a, i)];
                        }
                    }
                }
            }
            self.explicit_u = Some(u);
        }
        Ok(self.explicit_u.as_ref().expect("just built"))
    }

    /// `U · x` for `x` in vec order, as an `N_r × N_s` matrix.
    pub fn apply_u(&self, x: &DVector<Complex<T>>) -> CMatrix<T> {
        let (nr, ns) = (self.receive.n_cells(), self.source.n_cells());
        let (nr_ant, ns_ant) = (self.receive.n_antennas(), self.source.n_antennas());
        match &self.explicit_u {
            Some(u) => {
                let v = mul(u, &CMatrix::from_column_slice(u.ncols(), 1, x.as_slice()));
                CMatrix::from_column_slice(nr_ant, ns_ant, v.as_slice())
            }
            None => {
                let m = CMatrix::from_column_slice(nr, ns, x.as_slice());
                let left = self.receive.apply(&m);
                self.source.apply(&left.adjoint()).adjoint()
            }
        }
    }

    /// Full `R = U Λ Uᴴ`, refused above [`MAX_EXPLICIT_SIDE`].
    pub fn explicit_r(&mut self) -> Result<CMatrix<T>> {
        self.guard()?;
        let sqrt_l: Vec<T> = self.eigenvalues.iter().map(|v| v.sqrt()).collect();
        let u = self.materialize_u()?;
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex::new(sqrt_l[j], T::zero());
        }
        Ok(mul_adjoint_right(&scaled, &scaled))
    }

    /// Draws of `vec(H) = U Λ^{1/2} w̃` for consecutive realizations, one per
    /// column.
    pub fn generate_batch(&self, seed: u64, first: u64, count: usize) -> CMatrix<T> {
        let n = self.eigenvalues.len();
        let mut w = CMatrix::<T>::zeros(n, count);
        for k in 0..count {
            let mut col = w.column_mut(k);
            let slice = col.as_mut_slice();
            GaussianStream::new(seed, CORRELATION_DOMAIN + first + k as u64).fill(slice);
            for (z, l) in slice.iter_mut().zip(self.eigenvalues.iter()) {
                *z = z.scale(l.sqrt());
            }
        }
        match &self.explicit_u {
            Some(u) => mul(u, &w),
            None => {
                let mut out = CMatrix::<T>::zeros(self.dimension(), count);
                for k in 0..count {
                    let h = self.apply_u(&w.column(k).into_owned());
                    out.column_mut(k).copy_from_slice(h.as_slice());
                }
                out
            }
        }
    }
}

/// `vec(H) = U Λ^{1/2} w̃` reshaped to `N_r × N_s`.
pub fn generate_from_correlation<T: Real>(factors: &CorrelationFactors<'_, T>, seed: u64, realization: u64) -> SpatialChannel<T> {
    let v = factors.generate_batch(seed, realization, 1);
    SpatialChannel {
        matrix: CMatrix::from_column_slice(factors.receive.n_antennas(), factors.source.n_antennas(), v.as_slice()),
        seed,
        realization,
    }
}

/// Accumulates `Σ x xᴴ` over columns in chunks.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator<T: Real> {
    sum: CMatrix<T>,
    count: usize,
}

impl<T: Real> CovarianceAccumulator<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            sum: CMatrix::zeros(dim, dim),
            count: 0,
        }
    }

    pub fn add_columns(&mut self, x: &CMatrix<T>) {
        self.sum += mul_adjoint_right(x, x);
        self.count += x.ncols();
    }

    pub fn mean(&self) -> CMatrix<T> {
        &self.sum * Complex::new(T::one() / T::from_usize_lossy(self.count.max(1)), T::zero())
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// One-sided correlations `R_r = N_r Φ_r diag(σ_r²) Φ_rᴴ` and likewise `R_s`,
/// with `R = conj(R_s) ⊗ R_r`.
pub fn kronecker_correlations<T: Real>(
    coupling: &CouplingMatrix<T>,
    receive: &FourierBasis<T>,
    source: &FourierBasis<T>,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let (r, s) = coupling.separable.as_ref().ok_or(Error::NotSeparable)?;
    let one_sided = |basis: &FourierBasis<T>, var: &DVector<T>| {
        let phi = basis.matrix();
        let n = T::from_usize_lossy(basis.n_antennas());
        let mut scaled = phi.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex::new((n * var[j]).sqrt(), T::zero());
        }
        mul_adjoint_right(&scaled, &scaled)
    };
    Ok((one_sided(receive, r), one_sided(source, s)))
}

/// Normalized sinc `sin(πx)/(πx)`.
pub fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::one();
    }
    let px = T::pi() * x;
    px.sin() / px
}

/// Clarke correlation `sinc(2d/λ)` between all antenna pairs.
pub fn clarke_correlation<T: Real>(array: &PlanarArray<T>) -> DMatrix<T> {
    let pos = array.positions();
    let lambda = array.wavelength();
    let two = T::lit(2.0);
    DMatrix::from_fn(pos.len(), pos.len(), |i, j| {
        let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
        sinc(two * (dx * dx + dy * dy).sqrt() / lambda)
    })
}

/// Fraction of the trace carried by eigenvalues beyond the `n` largest.
pub fn lowrank_discard_fraction<T: Real>(correlation: &DMatrix<T>, n: usize) -> T {
    discard_fraction(&symmetric_eigenvalues(correlation), n)
}

/// As [`lowrank_discard_fraction`] for eigenvalues sorted in descending order.
pub fn discard_fraction<T: Real>(eigenvalues: &[T], n: usize) -> T {
    let total = eigenvalues.iter().fold(T::zero(), |a, &b| a + b);
    if n >= eigenvalues.len() || total <= T::zero() {
        return T::zero();
    }
    let tail = eigenvalues[n..].iter().fold(T::zero(), |a, &b| a + b.max(T::zero()));
    tail / total
}

/// Entrywise estimate of the coupling variances from channel observations.
#[derive(Debug, Clone)]
pub struct VarianceEstimate<T: Real> {
    /// `(1/(N_r N_s))·mean |Φ_rᴴ H Φ_s|²`, not renormalized.
    pub values: DMatrix<T>,
    pub trials: usize,
}

impl<T: Real> VarianceEstimate<T> {
    pub fn to_coupling(&self, receive_cells: Vec<(i64, i64)>, source_cells: Vec<(i64, i64)>) -> Result<CouplingMatrix<T>> {
        CouplingMatrix::from_values(self.values.clone(), receive_cells, source_cells)
    }
}

/// Averages `|Φ_rᴴ H Φ_s|² / (N_r N_s)` over `trials` channels from `sampler`.
pub fn estimate_variances<T, F>(mut sampler: F, receive: &FourierBasis<T>, source: &FourierBasis<T>, trials: usize) -> Result<VarianceEstimate<T>>
where
    T: Real,
    F: FnMut(usize) -> Result<CMatrix<T>>,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let mut acc = DMatrix::<T>::zeros(receive.n_cells(), source.n_cells());
    for t in 0..trials {
        let h = sampler(t)?;
        if h.shape() != (receive.n_antennas(), source.n_antennas()) {
            return Err(Error::DimensionMismatch {
                context: "observed channel",
                expected: format!("{}x{}", receive.n_antennas(), source.n_antennas()),
                found: format!("{}x{}", h.nrows(), h.ncols()),
            });
        }
        let p = crate::channel::synthesis::project_angular(&h, receive, source);
        acc.zip_apply(&p, |a, z| *a += z.norm_sqr());
    }
    let scale = T::one() / (T::from_usize_lossy(trials) * T::from_usize_lossy(receive.n_antennas()) * T::from_usize_lossy(source.n_antennas()));
    Ok(VarianceEstimate {
        values: acc * scale,
        trials,
    })
}
