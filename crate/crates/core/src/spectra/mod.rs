//! Angular power spectra of the scattering environment and the resulting
//! coupling-coefficient variances.

mod coupling;
mod factor;
mod vmf;

pub use coupling::{
    coupling_variances, coupling_variances_separable, receive_variances, receive_variances_with_tol,
    significant_cells, significant_count, significant_set, CouplingMatrix, SignificantSet,
    DEFAULT_REL_TOL,
};
pub use factor::{AngularBox, JointFn, SeparableFn, SpectralFactor};
pub use vmf::{
    circular_variance, concentration_from_circular_variance, mean_resultant_length, vmf_density,
    VmfCluster,
};
