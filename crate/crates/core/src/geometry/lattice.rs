use crate::error::{Error, Result};
use crate::geometry::PlanarArray;
use crate::scalar::Real;

/// One integer-indexed spectral cell of the wavenumber lattice.
///
/// Bounds are in normalized cosine-direction coordinates
/// `(kx/κ, ky/κ) ∈ [ℓx·λ/Lx, (ℓx+1)·λ/Lx] × [ℓy·λ/Ly, (ℓy+1)·λ/Ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavenumberCell<T> {
    pub lx: i64,
    pub ly: i64,
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> WavenumberCell<T> {
    pub fn new(lx: i64, ly: i64, array: &PlanarArray<T>) -> Self {
        let sx = array.wavelength() / array.length_x();
        let sy = array.wavelength() / array.length_y();
        let fx = T::lit(lx as f64);
        let fy = T::lit(ly as f64);
        Self {
            lx,
            ly,
            x_min: fx * sx,
            x_max: (fx + T::one()) * sx,
            y_min: fy * sy,
            y_max: (fy + T::one()) * sy,
        }
    }

    pub fn index(&self) -> (i64, i64) {
        (self.lx, self.ly)
    }

    /// Point of the closed cell nearest to the origin; always inside the
    /// closed unit disk for lattice members, so `γ` there is real.
    pub fn representative_point(&self) -> (T, T) {
        let clamp0 = |lo: T, hi: T| T::zero().max(lo).min(hi);
        (clamp0(self.x_min, self.x_max), clamp0(self.y_min, self.y_max))
    }

    /// Whether the cell overlaps the unit disk with positive area.
    pub fn intersects_disk(&self) -> bool {
        let (x, y) = self.representative_point();
        x * x + y * y < T::one()
    }

    /// Closed-rectangle membership test in cosine-direction coordinates.
    pub fn contains(&self, ux: T, uy: T) -> bool {
        ux >= self.x_min && ux <= self.x_max && uy >= self.y_min && uy <= self.y_max
    }

    /// Quadrant of the cell, 1..=4 counter-clockwise from `ℓx ≥ 0, ℓy ≥ 0`.
    pub fn orthant(&self) -> u8 {
        match (self.lx >= 0, self.ly >= 0) {
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
            (true, false) => 4,
        }
    }

    /// Wavenumber `(kx, ky)` at the representative point.
    pub fn wavenumber(&self, kappa: T) -> (T, T) {
        let (x, y) = self.representative_point();
        (x * kappa, y * kappa)
    }
}

/// Every cell whose rectangle overlaps the unit disk, ordered row-major by
/// `(ℓy, ℓx)`.
pub fn enumerate_cells<T: Real>(array: &PlanarArray<T>) -> Vec<WavenumberCell<T>> {
    let range = |len: T| {
        let r = (len / array.wavelength()).ceil().to_i64().unwrap_or(0) + 1;
        -r - 1..=r
    };
    let mut cells = Vec::new();
    for ly in range(array.length_y()) {
        for lx in range(array.length_x()) {
            let cell = WavenumberCell::new(lx, ly, array);
            if cell.intersects_disk() {
                cells.push(cell);
            }
        }
    }
    cells
}

/// Leading-order lattice count `⌈π·Lx·Ly/λ²⌉`.
pub fn count_asymptotic<T: Real>(array: &PlanarArray<T>) -> usize {
    let area = T::pi() * array.length_x() * array.length_y()
        / (array.wavelength() * array.wavelength());
    // absorb the rounding of π·(1/π) so exact integers are not bumped up
    let area = area - area * T::lit(1e-12);
    area.ceil().to_usize().unwrap_or(0)
}

/// Dispersion relation `γ = √(κ² − kx² − ky²)` for propagating waves.
pub fn gamma<T: Real>(kx: T, ky: T, kappa: T) -> Result<T> {
    let k2 = kappa * kappa;
    let s = k2 - kx * kx - ky * ky;
    if s < -(T::lit(64.0) * T::eps() * k2) {
        return Err(Error::Evanescent {
            kx: kx.to_f64_lossy(),
            ky: ky.to_f64_lossy(),
            kappa: kappa.to_f64_lossy(),
        });
    }
    Ok(s.max(T::zero()).sqrt())
}
