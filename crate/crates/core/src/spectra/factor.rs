use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectra::VmfCluster;

/// Angular rectangle `[θ_min, θ_max] × [φ_min, φ_max]` in radians.
///
/// An azimuth range with `phi_min > phi_max` wraps through `φ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularBox<T> {
    pub theta_min: T,
    pub theta_max: T,
    pub phi_min: T,
    pub phi_max: T,
}

impl<T: Real> AngularBox<T> {
    pub fn new(theta_min: T, theta_max: T, phi_min: T, phi_max: T) -> Result<Self> {
        let tau = T::two_pi();
        let ok = theta_min >= T::zero()
            && theta_min < theta_max
            && theta_max <= T::pi()
            && phi_min >= T::zero()
            && phi_min <= tau
            && phi_max >= T::zero()
            && phi_max <= tau
            && phi_min != phi_max;
        if !ok {
            return Err(Error::InvalidSpectrum(format!(
                "bad angular box θ∈[{}, {}], φ∈[{}, {}]",
                theta_min.to_f64_lossy(),
                theta_max.to_f64_lossy(),
                phi_min.to_f64_lossy(),
                phi_max.to_f64_lossy()
            )));
        }
        Ok(Self {
            theta_min,
            theta_max,
            phi_min,
            phi_max,
        })
    }

    pub fn contains(&self, theta: T, phi: T) -> bool {
        if theta < self.theta_min || theta > self.theta_max {
            return false;
        }
        if self.phi_min <= self.phi_max {
            phi >= self.phi_min && phi <= self.phi_max
        } else {
            phi >= self.phi_min || phi <= self.phi_max
        }
    }
}

pub type SeparableFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
pub type JointFn<T> = Arc<dyn Fn(T, T, T, T) -> T + Send + Sync>;

/// Angular power density `A²` of the scattering environment.
#[derive(Clone)]
pub enum SpectralFactor<T> {
    /// Constant over the hemisphere.
    Isotropic,
    /// Constant on the union of the boxes, zero elsewhere.
    ClusterUniform(Vec<AngularBox<T>>),
    VmfMixture(Vec<VmfCluster<T>>),
    /// `A²(θ, φ)` applied at each end.
    CustomSeparable(SeparableFn<T>),
    /// `A²(θ_r, φ_r, θ_s, φ_s)`.
    CustomJoint(JointFn<T>),
}

impl<T: Real> fmt::Debug for SpectralFactor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Isotropic => f.write_str("Isotropic"),
            Self::ClusterUniform(b) => f.debug_tuple("ClusterUniform").field(b).finish(),
            Self::VmfMixture(c) => f.debug_tuple("VmfMixture").field(c).finish(),
            Self::CustomSeparable(_) => f.write_str("CustomSeparable(..)"),
            Self::CustomJoint(_) => f.write_str("CustomJoint(..)"),
        }
    }
}

impl<T: Real> SpectralFactor<T> {
    /// Mixture of vMF clusters; weights must sum to one.
    pub fn vmf_mixture(clusters: Vec<VmfCluster<T>>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::InvalidSpectrum("mixture needs at least one cluster".into()));
        }
        let total = clusters.iter().fold(T::zero(), |acc, c| acc + c.weight);
        if (total - T::one()).abs() > T::lit(1e-12).max(T::eps() * T::lit(8.0)) {
            return Err(Error::InvalidSpectrum(format!(
                "mixture weights sum to {}",
                total.to_f64_lossy()
            )));
        }
        Ok(Self::VmfMixture(clusters))
    }

    pub fn cluster_uniform(boxes: Vec<AngularBox<T>>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidSpectrum("no cluster boxes".into()));
        }
        Ok(Self::ClusterUniform(boxes))
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, Self::CustomJoint(_))
    }

    /// One-sided density `A²(θ, φ)`; `None` for joint spectra.
    pub fn evaluate(&self, theta: T, phi: T) -> Option<T> {
        Some(match self {
            Self::Isotropic => T::one(),
            Self::ClusterUniform(boxes) => {
                if boxes.iter().any(|b| b.contains(theta, phi)) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::VmfMixture(clusters) => clusters
                .iter()
                .fold(T::zero(), |acc, c| acc + c.weight * c.density(theta, phi)),
            Self::CustomSeparable(f) => f(theta, phi),
            Self::CustomJoint(_) => return None,
        })
    }

    /// Azimuth and elevation discontinuities of the density.
    pub(crate) fn breakpoints(&self) -> (Vec<T>, Vec<T>) {
        match self {
            Self::ClusterUniform(boxes) => {
                let phis = boxes.iter().flat_map(|b| [b.phi_min, b.phi_max]).collect();
                let thetas = boxes.iter().flat_map(|b| [b.theta_min, b.theta_max]).collect();
                (phis, thetas)
            }
            _ => (Vec::new(), Vec::new()),
        }
    }
}
