//! Fourier-plane-wave channel model for holographic MIMO.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

/// Double-precision aliases for the common entry points.
pub type Array = geometry::PlanarArray<f64>;
pub type Lattice = geometry::CellLattice<f64>;
pub type Spectrum = spectra::SpectralFactor<f64>;
pub type Coupling = spectra::CouplingMatrix<f64>;
pub type Basis = channel::FourierBasis<f64>;

/// Single-precision counterparts.
pub type Array32 = geometry::PlanarArray<f32>;
pub type Lattice32 = geometry::CellLattice<f32>;
pub type Spectrum32 = spectra::SpectralFactor<f32>;
pub type Coupling32 = spectra::CouplingMatrix<f32>;
pub type Basis32 = channel::FourierBasis<f32>;
