use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::{CellLattice, PlanarArray};
use crate::linalg::CMatrix;
use crate::scalar::{Complex, Real};

/// Minimum grid size per axis for the FFT path.
pub const FFT_MIN_SIDE: usize = 8;

struct FftPlans<T: Real> {
    inverse_x: Arc<dyn Fft<T>>,
    inverse_y: Arc<dyn Fft<T>>,
    forward_x: Arc<dyn Fft<T>>,
    forward_y: Arc<dyn Fft<T>>,
}

/// Plane-wave basis of one array: `N × n` matrix with entries
/// `exp(+i2π(ℓx·x/Lx + ℓy·y/Ly))/√N`.
///
/// Uniformly sampled arrays with at least [`FFT_MIN_SIDE`] antennas per axis
/// are applied through a 2D FFT over the antenna grid; otherwise the explicit
/// matrix is used.
pub struct FourierBasis<T: Real> {
    nx: usize,
    ny: usize,
    cells: Vec<(i64, i64)>,
    uniform: bool,
    explicit: Option<CMatrix<T>>,
    plans: Option<FftPlans<T>>,
}

impl<T: Real> std::fmt::Debug for FourierBasis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierBasis")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("cells", &self.cells.len())
            .field("uniform", &self.uniform)
            .field("fft", &self.plans.is_some())
            .finish()
    }
}

impl<T: Real> FourierBasis<T> {
    pub fn n_antennas(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[(i64, i64)] {
        &self.cells
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn uses_fft(&self) -> bool {
        self.plans.is_some()
    }

    /// Explicit `N × n` matrix.
    pub fn matrix(&self) -> CMatrix<T> {
        match &self.explicit {
            Some(m) => m.clone(),
            None => {
                let id = CMatrix::<T>::identity(self.n_cells(), self.n_cells());
                self.apply(&id)
            }
        }
    }

    /// `Φ · x` for an `n × k` input.
    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(x.nrows(), self.n_cells(), "basis input rows");
        match (&self.plans, &self.explicit) {
            (Some(p), _) => self.apply_fft(p, x),
            (None, Some(m)) => crate::linalg::mul(m, x),
            (None, None) => unreachable!("basis without a transform"),
        }
    }

    /// `Φᴴ · y` for an `N × k` input.
    pub fn apply_adjoint(&self, y: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(y.nrows(), self.n_antennas(), "basis input rows");
        match (&self.plans, &self.explicit) {
            (Some(p), _) => self.adjoint_fft(p, y),
            (None, Some(m)) => crate::linalg::mul_adjoint_left(m, y),
            (None, None) => unreachable!("basis without a transform"),
        }
    }

    fn slot(&self, lx: i64, ly: i64) -> usize {
        let ix = lx.rem_euclid(self.nx as i64) as usize;
        let iy = ly.rem_euclid(self.ny as i64) as usize;
        iy * self.nx + ix
    }

    /// In-place 2D transform of every consecutive `nx·ny` grid in `data`,
    /// one grid at a time so that each stays in cache.
    fn transform_batch(&self, data: &mut [Complex<T>], fx: &Arc<dyn Fft<T>>, fy: &Arc<dyn Fft<T>>) {
        let (nx, ny) = (self.nx, self.ny);
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; fx.get_inplace_scratch_len().max(fy.get_inplace_scratch_len())];
        let mut transposed = vec![zero; nx * ny];
        for grid in data.chunks_exact_mut(nx * ny) {
            // rows are contiguous
            fx.process_with_scratch(grid, &mut scratch);
            for iy in 0..ny {
                for ix in 0..nx {
                    transposed[ix * ny + iy] = grid[iy * nx + ix];
                }
            }
            fy.process_with_scratch(&mut transposed, &mut scratch);
            for ix in 0..nx {
                for iy in 0..ny {
                    grid[iy * nx + ix] = transposed[ix * ny + iy];
                }
            }
        }
    }

    fn apply_fft(&self, p: &FftPlans<T>, x: &CMatrix<T>) -> CMatrix<T> {
        let n = self.n_antennas();
        let scale = T::one() / T::from_usize_lossy(n).sqrt();
        let mut out = CMatrix::<T>::zeros(n, x.ncols());
        if x.ncols() == 0 {
            return out;
        }
        let slots: Vec<usize> = self.cells.iter().map(|&(a, b)| self.slot(a, b)).collect();
        for (grid, col) in out.as_mut_slice().chunks_exact_mut(n).zip(x.column_iter()) {
            for (&s, &v) in slots.iter().zip(col.iter()) {
                grid[s] += v;
            }
        }
        self.transform_batch(out.as_mut_slice(), &p.inverse_x, &p.inverse_y);
        for z in out.iter_mut() {
            *z = z.scale(scale);
        }
        out
    }

    fn adjoint_fft(&self, p: &FftPlans<T>, y: &CMatrix<T>) -> CMatrix<T> {
        let n = self.n_antennas();
        let scale = T::one() / T::from_usize_lossy(n).sqrt();
        let mut out = CMatrix::<T>::zeros(self.n_cells(), y.ncols());
        if y.ncols() == 0 {
            return out;
        }
        let mut grids = y.as_slice().to_vec();
        self.transform_batch(&mut grids, &p.forward_x, &p.forward_y);
        let slots: Vec<usize> = self.cells.iter().map(|&(a, b)| self.slot(a, b)).collect();
        for (grid, mut col) in grids.chunks_exact(n).zip(out.column_iter_mut()) {
            for (&s, v) in slots.iter().zip(col.iter_mut()) {
                *v = grid[s].scale(scale);
            }
        }
        out
    }
}

/// Builds the basis of `array` over the cells of `lattice`.
pub fn build_basis<T: Real>(array: &PlanarArray<T>, lattice: &CellLattice<T>) -> FourierBasis<T> {
    build_basis_with(array, lattice, true)
}

/// As [`build_basis`], optionally forcing the explicit matrix.
pub fn build_basis_with<T: Real>(array: &PlanarArray<T>, lattice: &CellLattice<T>, allow_fft: bool) -> FourierBasis<T> {
    let (nx, ny) = (array.nx(), array.ny());
    let cells = lattice.indices();
    let uniform = array.is_uniform();
    if allow_fft && uniform && nx >= FFT_MIN_SIDE && ny >= FFT_MIN_SIDE {
        let mut planner = FftPlanner::<T>::new();
        let plans = FftPlans {
            inverse_x: planner.plan_fft_inverse(nx),
            inverse_y: planner.plan_fft_inverse(ny),
            forward_x: planner.plan_fft_forward(nx),
            forward_y: planner.plan_fft_forward(ny),
        };
        return FourierBasis {
            nx,
            ny,
            cells,
            uniform,
            explicit: None,
            plans: Some(plans),
        };
    }
    let n = nx * ny;
    let norm = 1.0 / (n as f64).sqrt();
    let lx_len = array.length_x().to_f64_lossy();
    let ly_len = array.length_y().to_f64_lossy();
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (x, y) = array.position(i);
            (x.to_f64_lossy(), y.to_f64_lossy())
        })
        .collect();
    let m = CMatrix::from_fn(n, cells.len(), |i, j| {
        let (lx, ly) = cells[j];
        let (x, y) = positions[i];
        let phase = TAU * (lx as f64 * x / lx_len + ly as f64 * y / ly_len);
        Complex::new(T::lit(norm * phase.cos()), T::lit(norm * phase.sin()))
    });
    FourierBasis {
        nx,
        ny,
        cells,
        uniform,
        explicit: Some(m),
        plans: None,
    }
}

/// Sign of the propagation phase in a [`MigrationFilter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSign {
    Positive,
    Negative,
}

/// Diagonal unit-modulus phases `exp(±iγz)` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MigrationFilter<T> {
    pub phases: Vec<Complex<T>>,
}

impl<T: Real> MigrationFilter<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            phases: vec![Complex::new(T::one(), T::zero()); n],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.phases.iter().all(|p| p.re == T::one() && p.im == T::zero())
    }
}

/// Phases `exp(sign·i·γ·z)`, with `γ` taken at each cell's representative
/// point so that it is always real.
pub fn migration_filter<T: Real>(lattice: &CellLattice<T>, array: &PlanarArray<T>, z: T, sign: PhaseSign) -> Result<MigrationFilter<T>> {
    let kappa = array.kappa();
    let s = match sign {
        PhaseSign::Positive => T::one(),
        PhaseSign::Negative => -T::one(),
    };
    let phases = lattice
        .cells
        .iter()
        .map(|c| {
            if z == T::zero() {
                return Ok(Complex::new(T::one(), T::zero()));
            }
            let (ux, uy) = c.representative_point();
            let g = crate::geometry::gamma(ux * kappa, uy * kappa, kappa)
                .map_err(|_| Error::CellOutsideDisk { lx: c.lx, ly: c.ly })?;
            let phi = s * g * z;
            Ok(Complex::new(phi.cos(), phi.sin()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MigrationFilter { phases })
}
