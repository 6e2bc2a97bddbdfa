use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One von Mises–Fisher scattering cluster.
///
/// Angles are in radians; the modal direction is given by its elevation from
/// the array normal and its azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmfCluster<T> {
    pub weight: T,
    pub mean_elevation: T,
    pub mean_azimuth: T,
    pub concentration: T,
}

impl<T: Real> VmfCluster<T> {
    pub fn new(weight: T, mean_elevation: T, mean_azimuth: T, concentration: T) -> Result<Self> {
        if !(weight >= T::zero()) || !weight.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "cluster weight must be finite and non-negative, got {}",
                weight.to_f64_lossy()
            )));
        }
        if !(concentration >= T::zero()) || !concentration.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "concentration must be finite and non-negative, got {}",
                concentration.to_f64_lossy()
            )));
        }
        if !mean_elevation.is_finite() || !mean_azimuth.is_finite() {
            return Err(Error::InvalidSpectrum("modal direction must be finite".into()));
        }
        Ok(Self {
            weight,
            mean_elevation,
            mean_azimuth,
            concentration,
        })
    }

    /// Cluster specified by its circular variance instead of its concentration.
    pub fn from_circular_variance(
        weight: T,
        mean_elevation: T,
        mean_azimuth: T,
        circular_variance: T,
    ) -> Result<Self> {
        let alpha = concentration_from_circular_variance(circular_variance.to_f64_lossy())?;
        Self::new(weight, mean_elevation, mean_azimuth, T::lit(alpha))
    }

    pub fn density(&self, theta: T, phi: T) -> T {
        vmf_density(theta, phi, self.mean_elevation, self.mean_azimuth, self.concentration)
    }

    /// Modal direction as a unit vector.
    pub fn mean_direction(&self) -> [T; 3] {
        unit_vector(self.mean_elevation, self.mean_azimuth)
    }
}

fn unit_vector<T: Real>(theta: T, phi: T) -> [T; 3] {
    let s = theta.sin();
    [s * phi.cos(), s * phi.sin(), theta.cos()]
}

/// vMF density on the unit sphere, `c(α)·exp(α·⟨u, μ⟩)` with
/// `c(α) = α / (4π sinh α)`.
///
/// Evaluated as `α / (2π(1 − e^{−2α})) · e^{α(⟨u,μ⟩ − 1)}` so that neither
/// factor overflows for large `α`.
pub fn vmf_density<T: Real>(theta: T, phi: T, mean_elevation: T, mean_azimuth: T, alpha: T) -> T {
    let four_pi = T::lit(4.0 * PI);
    if alpha == T::zero() {
        return T::one() / four_pi;
    }
    let dot = theta.sin() * mean_elevation.sin() * (phi - mean_azimuth).cos()
        + theta.cos() * mean_elevation.cos();
    let two = T::lit(2.0);
    // 1 − e^{−2α} without cancellation for small α
    let denom = -(-(two * alpha)).exp_m1();
    let norm = alpha / (T::lit(2.0 * PI) * denom);
    norm * (alpha * (dot - T::one())).exp()
}

/// Mean resultant length `coth α − 1/α` of a vMF distribution on the sphere.
pub fn mean_resultant_length(alpha: f64) -> f64 {
    if alpha < 1e-4 {
        return alpha / 3.0 - alpha.powi(3) / 45.0;
    }
    1.0 / alpha.tanh() - 1.0 / alpha
}

/// Circular variance `1 − ‖E[u]‖²` of a vMF distribution.
pub fn circular_variance(alpha: f64) -> f64 {
    let r = mean_resultant_length(alpha);
    1.0 - r * r
}

/// Inverts [`circular_variance`] by bisection in `log α`.
pub fn concentration_from_circular_variance(nu2: f64) -> Result<f64> {
    if !(nu2 > 0.0 && nu2 <= 1.0) {
        return Err(Error::InvalidSpectrum(format!(
            "circular variance must lie in (0, 1], got {nu2}"
        )));
    }
    if nu2 == 1.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e9f64.ln());
    if circular_variance(hi.exp()) > nu2 {
        return Err(Error::InvalidSpectrum(format!(
            "circular variance {nu2} too small to invert"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if circular_variance(mid.exp()) > nu2 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn uniform_limit() {
        let v = vmf_density(0.3, 1.0, 0.5, 2.0, 0.0f64);
        assert_eq!(v, 1.0 / (4.0 * PI));
        // continuity towards the limit
        let v = vmf_density(0.3, 1.0, 0.5, 2.0, 1e-9f64);
        assert!((v * 4.0 * PI - 1.0).abs() < 1e-8);
    }

    #[test]
    fn modal_maximum() {
        for alpha in [0.5, 3.0, 50.0] {
            let v = vmf_density(0.4, 1.3, 0.4, 1.3, alpha);
            let expected = alpha / (4.0 * PI * f64::sinh(alpha)) * alpha.exp();
            assert!((v - expected).abs() < 1e-12 * expected);
        }
        // log-domain evaluation keeps very large concentrations finite
        let v = vmf_density(0.4, 1.3, 0.4, 1.3, 5000.0f64);
        assert!((v - 5000.0 / (2.0 * PI)).abs() < 1e-9 * v);
    }

    #[test]
    fn normalized_over_sphere() {
        // dense product grid in (cos θ, φ)
        let rule = GaussLegendre::<f64>::new(48);
        for &(alpha, mt, mp) in &[(0.0, 0.0, 0.0), (2.0, 1.0, 0.3), (200.0, 0.52, 0.26), (400.0, 0.17, PI)] {
            let panels = 64;
            let mut total = 0.0;
            for pc in 0..panels {
                let c0 = -1.0 + 2.0 * pc as f64 / panels as f64;
                let c1 = c0 + 2.0 / panels as f64;
                for (c, wc) in rule.mapped(c0, c1) {
                    for pp in 0..panels {
                        let p0 = 2.0 * PI * pp as f64 / panels as f64;
                        let p1 = p0 + 2.0 * PI / panels as f64;
                        for (p, wp) in rule.mapped(p0, p1) {
                            total += wc * wp * vmf_density(c.acos(), p, mt, mp, alpha);
                        }
                    }
                }
            }
            assert!((total - 1.0).abs() < 1e-6, "alpha={alpha}: {total}");
        }
    }

    #[test]
    fn circular_variance_round_trip() {
        for nu2 in [0.9, 0.3, 0.01, 0.005, 1e-5] {
            let a = concentration_from_circular_variance(nu2).unwrap();
            assert!((circular_variance(a) - nu2).abs() < 1e-12, "{nu2}");
        }
        assert_eq!(concentration_from_circular_variance(1.0).unwrap(), 0.0);
        assert!(concentration_from_circular_variance(0.0).is_err());
        assert!(concentration_from_circular_variance(1.5).is_err());
        let a = concentration_from_circular_variance(0.01).unwrap();
        assert!((a - 199.5).abs() < 0.1, "{a}");
    }
}
