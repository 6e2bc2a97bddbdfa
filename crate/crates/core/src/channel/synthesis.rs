use nalgebra::DMatrix;

use crate::channel::basis::{build_basis, migration_filter, FourierBasis, MigrationFilter, PhaseSign};
use crate::channel::rng::GaussianStream;
use crate::error::{Error, Result};
use crate::geometry::{CellLattice, PlanarArray};
use crate::linalg::CMatrix;
use crate::scalar::Real;
use crate::spectra::CouplingMatrix;

/// One realization of the angular-domain channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularChannel<T: Real> {
    pub matrix: CMatrix<T>,
    pub seed: u64,
    pub realization: u64,
}

/// One realization of the spatial channel between the antenna grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialChannel<T: Real> {
    pub matrix: CMatrix<T>,
    pub seed: u64,
    pub realization: u64,
}

/// Draws `H_a = Σ ⊙ W` with `Σ = sqrt(N_r·N_s·σ²)`.
#[derive(Debug, Clone)]
pub struct AngularSampler<T: Real> {
    deviations: DMatrix<T>,
}

impl<T: Real> AngularSampler<T> {
    pub fn new(coupling: &CouplingMatrix<T>, n_receive_antennas: usize, n_source_antennas: usize) -> Self {
        let scale = T::from_usize_lossy(n_receive_antennas) * T::from_usize_lossy(n_source_antennas);
        Self {
            deviations: coupling.values.map(|v| (scale * v).sqrt()),
        }
    }

    /// Separable sampler `diag(σ_r)·W·diag(σ_s)`.
    pub fn separable(coupling: &CouplingMatrix<T>, n_receive_antennas: usize, n_source_antennas: usize) -> Result<Self> {
        let (r, s) = coupling.separable.as_ref().ok_or(Error::NotSeparable)?;
        let sr = r.map(|v| (T::from_usize_lossy(n_receive_antennas) * v).sqrt());
        let ss = s.map(|v| (T::from_usize_lossy(n_source_antennas) * v).sqrt());
        Ok(Self {
            deviations: &sr * ss.transpose(),
        })
    }

    pub fn deviations(&self) -> &DMatrix<T> {
        &self.deviations
    }

    /// Entries are drawn in column-major order from stream `realization`.
    pub fn sample(&self, seed: u64, realization: u64) -> AngularChannel<T> {
        let (nr, ns) = self.deviations.shape();
        let mut w = CMatrix::<T>::zeros(nr, ns);
        GaussianStream::new(seed, realization).fill(w.as_mut_slice());
        for (z, &s) in w.iter_mut().zip(self.deviations.iter()) {
            *z = z.scale(s);
        }
        AngularChannel {
            matrix: w,
            seed,
            realization,
        }
    }
}

pub fn sample_angular<T: Real>(
    coupling: &CouplingMatrix<T>,
    n_receive_antennas: usize,
    n_source_antennas: usize,
    seed: u64,
    realization: u64,
) -> AngularChannel<T> {
    AngularSampler::new(coupling, n_receive_antennas, n_source_antennas).sample(seed, realization)
}

/// `H = Φ_r · diag(f_r) · H_a · diag(f_s) · Φ_sᴴ`.
pub fn assemble_spatial<T: Real>(
    angular: &AngularChannel<T>,
    receive: &FourierBasis<T>,
    source: &FourierBasis<T>,
    receive_filter: Option<&MigrationFilter<T>>,
    source_filter: Option<&MigrationFilter<T>>,
) -> Result<SpatialChannel<T>> {
    let h = &angular.matrix;
    let (nr, ns) = h.shape();
    let check = |context, expected: usize, found: usize| {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected: expected.to_string(),
                found: found.to_string(),
            })
        }
    };
    check("receive basis columns", receive.n_cells(), nr)?;
    check("source basis columns", source.n_cells(), ns)?;
    let mut tilde = h.clone();
    if let Some(f) = receive_filter {
        check("receive filter length", nr, f.len())?;
        for (i, mut row) in tilde.row_iter_mut().enumerate() {
            row *= f.phases[i];
        }
    }
    if let Some(f) = source_filter {
        check("source filter length", ns, f.len())?;
        for (j, mut col) in tilde.column_iter_mut().enumerate() {
            col *= f.phases[j];
        }
    }
    // Φ_r H̃ Φ_sᴴ = (Φ_s (Φ_r H̃)ᴴ)ᴴ
    let left = receive.apply(&tilde);
    let matrix = source.apply(&left.adjoint()).adjoint();
    Ok(SpatialChannel {
        matrix,
        seed: angular.seed,
        realization: angular.realization,
    })
}

/// Angular projection `Φ_rᴴ · H · Φ_s`.
pub fn project_angular<T: Real>(h: &CMatrix<T>, receive: &FourierBasis<T>, source: &FourierBasis<T>) -> CMatrix<T> {
    let left = receive.apply_adjoint(h);
    source.apply_adjoint(&left.adjoint()).adjoint()
}

/// Geometry, bases, filters and sampler of one link, ready to draw
/// realizations.
pub struct ChannelModel<T: Real> {
    pub receive_array: PlanarArray<T>,
    pub source_array: PlanarArray<T>,
    pub receive_lattice: CellLattice<T>,
    pub source_lattice: CellLattice<T>,
    pub receive_basis: FourierBasis<T>,
    pub source_basis: FourierBasis<T>,
    pub receive_filter: MigrationFilter<T>,
    pub source_filter: MigrationFilter<T>,
    pub coupling: CouplingMatrix<T>,
    pub sampler: AngularSampler<T>,
}

impl<T: Real> ChannelModel<T> {
    /// Filters use each array's `z_plane`: `exp(+iγz)` at the receiver and
    /// `exp(−iγz)` at the source.
    pub fn new(receive_array: PlanarArray<T>, source_array: PlanarArray<T>, coupling: CouplingMatrix<T>) -> Result<Self> {
        let receive_lattice = CellLattice::new(&receive_array)?;
        let source_lattice = CellLattice::new(&source_array)?;
        if coupling.receive_cells != receive_lattice.indices() || coupling.source_cells != source_lattice.indices() {
            return Err(Error::DimensionMismatch {
                context: "coupling matrix cells",
                expected: format!("{}x{}", receive_lattice.len(), source_lattice.len()),
                found: format!("{}x{}", coupling.n_receive(), coupling.n_source()),
            });
        }
        let receive_basis = build_basis(&receive_array, &receive_lattice);
        let source_basis = build_basis(&source_array, &source_lattice);
        let receive_filter = migration_filter(&receive_lattice, &receive_array, receive_array.z_plane(), PhaseSign::Positive)?;
        let source_filter = migration_filter(&source_lattice, &source_array, source_array.z_plane(), PhaseSign::Negative)?;
        let sampler = AngularSampler::new(&coupling, receive_array.len(), source_array.len());
        Ok(Self {
            receive_array,
            source_array,
            receive_lattice,
            source_lattice,
            receive_basis,
            source_basis,
            receive_filter,
            source_filter,
            coupling,
            sampler,
        })
    }

    pub fn angular(&self, seed: u64, realization: u64) -> AngularChannel<T> {
        self.sampler.sample(seed, realization)
    }

    pub fn spatial(&self, seed: u64, realization: u64) -> Result<SpatialChannel<T>> {
        self.assemble(&self.angular(seed, realization))
    }

    pub fn assemble(&self, angular: &AngularChannel<T>) -> Result<SpatialChannel<T>> {
        let rf = (!self.receive_filter.is_identity()).then_some(&self.receive_filter);
        let sf = (!self.source_filter.is_identity()).then_some(&self.source_filter);
        assemble_spatial(angular, &self.receive_basis, &self.source_basis, rf, sf)
    }
}
