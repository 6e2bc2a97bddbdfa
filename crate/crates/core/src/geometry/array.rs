use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rectangular planar array on the plane `z = z_plane`.
///
/// Antennas sit on the corner-anchored grid `(p·spacing_x, q·spacing_y)` for
/// `p < N_x`, `q < N_y`, with `N_x = round(length_x / spacing_x)`. Antenna `i`
/// is `(p, q) = (i mod N_x, i / N_x)`, i.e. x varies fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarArray<T> {
    length_x: T,
    length_y: T,
    spacing_x: T,
    spacing_y: T,
    z_plane: T,
    wavelength: T,
}

fn positive<T: Real>(field: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArray {
            field,
            reason: format!("must be strictly positive and finite, got {}", v),
        })
    }
}

impl<T: Real> PlanarArray<T> {
    pub fn new(
        length_x: T,
        length_y: T,
        spacing_x: T,
        spacing_y: T,
        z_plane: T,
        wavelength: T,
    ) -> Result<Self> {
        positive("length_x", length_x)?;
        positive("length_y", length_y)?;
        positive("spacing_x", spacing_x)?;
        positive("spacing_y", spacing_y)?;
        positive("wavelength", wavelength)?;
        if !z_plane.is_finite() {
            return Err(Error::InvalidArray {
                field: "z_plane",
                reason: "must be finite".into(),
            });
        }
        let array = Self {
            length_x,
            length_y,
            spacing_x,
            spacing_y,
            z_plane,
            wavelength,
        };
        if array.nx() == 0 || array.ny() == 0 {
            return Err(Error::InvalidArray {
                field: "spacing",
                reason: "exceeds twice the aperture; no antenna fits".into(),
            });
        }
        Ok(array)
    }

    /// Square aperture of side `length` with equal spacing on both axes, at `z = 0`.
    pub fn square(length: T, spacing: T, wavelength: T) -> Result<Self> {
        Self::new(length, length, spacing, spacing, T::zero(), wavelength)
    }

    pub fn with_z_plane(mut self, z_plane: T) -> Self {
        self.z_plane = z_plane;
        self
    }

    pub fn length_x(&self) -> T {
        self.length_x
    }
    pub fn length_y(&self) -> T {
        self.length_y
    }
    pub fn spacing_x(&self) -> T {
        self.spacing_x
    }
    pub fn spacing_y(&self) -> T {
        self.spacing_y
    }
    pub fn z_plane(&self) -> T {
        self.z_plane
    }
    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Wavenumber `2π/λ`.
    pub fn kappa(&self) -> T {
        T::two_pi() / self.wavelength
    }

    pub fn nx(&self) -> usize {
        (self.length_x / self.spacing_x).round().to_usize().unwrap_or(0)
    }

    pub fn ny(&self) -> usize {
        (self.length_y / self.spacing_y).round().to_usize().unwrap_or(0)
    }

    /// Total number of antennas.
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spacing at or below half a wavelength on both axes, so the sampled field
    /// loses no information.
    pub fn is_nyquist(&self) -> bool {
        let half = self.wavelength / T::lit(2.0) * (T::one() + T::lit(1e-12));
        self.spacing_x <= half && self.spacing_y <= half
    }

    /// False when the smaller aperture side is under four wavelengths, where
    /// the series expansion becomes a coarse approximation.
    pub fn is_large_aperture(&self) -> bool {
        self.length_x.min(self.length_y) / self.wavelength >= T::lit(4.0)
    }

    /// The grid exactly spans the aperture (`N_x·spacing_x = length_x` on both
    /// axes), which turns the Fourier basis into a column subset of a 2D IDFT.
    pub fn is_uniform(&self) -> bool {
        let tol = T::lit(1e-9);
        let ex = (T::from_usize_lossy(self.nx()) * self.spacing_x - self.length_x).abs();
        let ey = (T::from_usize_lossy(self.ny()) * self.spacing_y - self.length_y).abs();
        ex <= tol * self.length_x && ey <= tol * self.length_y
    }

    /// Grid coordinates `(p, q)` of antenna `index`.
    pub fn grid_index(&self, index: usize) -> (usize, usize) {
        (index % self.nx(), index / self.nx())
    }

    /// Position `(x, y)` of antenna `index` in meters.
    pub fn position(&self, index: usize) -> (T, T) {
        let (p, q) = self.grid_index(index);
        (
            T::from_usize_lossy(p) * self.spacing_x,
            T::from_usize_lossy(q) * self.spacing_y,
        )
    }

    pub fn positions(&self) -> Vec<(T, T)> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }
}

/// Far-field (Fraunhofer) distance `2L²/λ` of an aperture of size `length`.
pub fn fraunhofer_distance<T: Real>(length: T, wavelength: T) -> T {
    T::lit(2.0) * length * length / wavelength
}

/// Free-space wavelength for a carrier frequency in Hz.
pub fn wavelength_from_frequency<T: Real>(frequency_hz: T) -> T {
    T::lit(299_792_458.0) / frequency_hz
}
