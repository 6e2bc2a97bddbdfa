//! Array geometry, the wavenumber lattice and the angular image of its cells.

mod array;
mod lattice;
mod region;

pub use array::{fraunhofer_distance, wavelength_from_frequency, PlanarArray};
pub use lattice::{count_asymptotic, enumerate_cells, gamma, WavenumberCell};
pub use region::{angular_region, AngularRegion, CellLattice, EdgeBound, SubRegion};
