//! Fourier bases, migration filters and random channel realizations.

mod basis;
mod correlation;
mod rng;
mod synthesis;

pub use basis::{build_basis, build_basis_with, migration_filter, FourierBasis, MigrationFilter, PhaseSign, FFT_MIN_SIDE};
pub use correlation::{
    clarke_correlation, correlation_matrix, discard_fraction, estimate_variances, generate_from_correlation,
    kronecker_correlations, lowrank_discard_fraction, sinc, CorrelationFactors, CovarianceAccumulator, VarianceEstimate,
    MAX_EXPLICIT_SIDE,
};
pub use rng::GaussianStream;
pub use synthesis::{
    assemble_spatial, project_angular, sample_angular, AngularChannel, AngularSampler, ChannelModel, SpatialChannel,
};
