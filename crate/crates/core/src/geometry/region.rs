use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{enumerate_cells, PlanarArray, WavenumberCell};
use crate::quadrature::{integrate_azimuth, AdaptiveOptions};
use crate::scalar::Real;

/// Edge of a cell seen from the origin along azimuth φ.
///
/// `X(v)` is the line `|ux| = v`, `Y(v)` the line `|uy| = v`. Along the ray the
/// radial coordinate `sin θ` equals `v/|cos φ|` resp. `v/|sin φ|`, clamped to
/// the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeBound<T> {
    X(T),
    Y(T),
}

impl<T: Real> EdgeBound<T> {
    /// `sin θ` on this edge at azimuth `phi`, clamped to `[0, 1]`.
    pub fn radius(&self, phi: T) -> T {
        let (v, c) = match *self {
            EdgeBound::X(v) => (v, phi.cos().abs()),
            EdgeBound::Y(v) => (v, phi.sin().abs()),
        };
        if v <= T::zero() {
            return T::zero();
        }
        if v >= c {
            return T::one();
        }
        (v / c).min(T::one())
    }

    pub fn theta(&self, phi: T) -> T {
        self.radius(phi).asin()
    }

    /// Azimuth in the reflected first quadrant where the edge meets the horizon.
    fn saturation(&self) -> Option<T> {
        match *self {
            EdgeBound::X(v) if v > T::zero() && v < T::one() => Some(v.acos()),
            EdgeBound::Y(v) if v > T::zero() && v < T::one() => Some(v.asin()),
            _ => None,
        }
    }
}

/// Azimuth interval with its lower and upper θ edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SubRegion<T> {
    pub phi_start: T,
    pub phi_end: T,
    pub lower: EdgeBound<T>,
    pub upper: EdgeBound<T>,
    kinks: Vec<T>,
}

impl<T: Real> SubRegion<T> {
    /// `(θ_min, θ_max)` at `phi`, with `θ_min ≤ θ_max` enforced.
    pub fn theta_bounds(&self, phi: T) -> (T, T) {
        let lo = self.lower.theta(phi);
        let hi = self.upper.theta(phi);
        (lo, hi.max(lo))
    }

    /// Interior azimuths where a θ edge saturates at the horizon.
    pub fn breakpoints(&self) -> Vec<T> {
        self.kinks.clone()
    }

    pub fn width(&self) -> T {
        self.phi_end - self.phi_start
    }
}

/// Image of a wavenumber cell on the upper hemisphere.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRegion<T> {
    pub cell: (i64, i64),
    pub orthant: u8,
    pieces: Vec<SubRegion<T>>,
}

impl<T: Real> AngularRegion<T> {
    /// Azimuth pieces sorted by `phi_start`.
    pub fn pieces(&self) -> &[SubRegion<T>] {
        &self.pieces
    }

    pub fn phi_range(&self) -> (T, T) {
        let first = self.pieces.first().map(|p| p.phi_start).unwrap_or(T::zero());
        let last = self.pieces.last().map(|p| p.phi_end).unwrap_or(T::zero());
        (first, last)
    }

    /// Whether direction `(theta, phi)` lies in the region.
    pub fn contains(&self, theta: T, phi: T) -> bool {
        let tau = T::two_pi();
        let mut phi = phi % tau;
        if phi < T::zero() {
            phi += tau;
        }
        self.pieces.iter().any(|p| {
            if phi < p.phi_start || phi > p.phi_end {
                return false;
            }
            let (lo, hi) = p.theta_bounds(phi);
            theta >= lo && theta <= hi
        })
    }

    /// Solid angle `∫∫ sin θ dθ dφ`, with the θ integral done in closed form.
    pub fn solid_angle(&self) -> Result<T> {
        self.solid_angle_with_tol(T::lit(1e-10).max(T::eps() * T::lit(64.0)))
    }

    pub fn solid_angle_with_tol(&self, rel_tol: T) -> Result<T> {
        let opts = AdaptiveOptions::relative(rel_tol).with_initial_panels(2);
        integrate_azimuth(
            self,
            &[],
            |phi, p| {
                // cos θ = sqrt(1 − ρ²) avoids the asin round trip
                let rl = p.lower.radius(phi);
                let ru = p.upper.radius(phi).max(rl);
                Ok((T::one() - rl * rl).sqrt() - (T::one() - ru * ru).sqrt())
            },
            &opts,
        )
        .map(|e| e.value)
    }
}

fn to_azimuth<T: Real>(orthant: u8, reflected: T) -> T {
    let pi = T::lit(PI);
    match orthant {
        1 => reflected,
        2 => pi - reflected,
        3 => pi + reflected,
        _ => T::lit(2.0 * PI) - reflected,
    }
}

/// Decomposes the hemisphere image of `cell` into azimuth pieces with analytic
/// θ edges.
///
/// The cell is reflected into the first quadrant, where its near/far x extents
/// are `p ≤ q` and y extents `r ≤ s`. The pieces are bounded by the azimuths of
/// the corners `(q, r)`, `(p, r)`, `(q, s)` and `(p, s)`.
pub fn angular_region<T: Real>(
    cell: &WavenumberCell<T>,
    _array: &PlanarArray<T>,
) -> Result<AngularRegion<T>> {
    if !cell.intersects_disk() {
        return Err(Error::CellOutsideDisk {
            lx: cell.lx,
            ly: cell.ly,
        });
    }
    let sort2 = |a: T, b: T| {
        let (a, b) = (a.abs(), b.abs());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let (p, q) = sort2(cell.x_min, cell.x_max);
    let (r, s) = sort2(cell.y_min, cell.y_max);
    let orthant = cell.orthant();

    let phi1 = r.atan2(q);
    let phi4 = s.atan2(p);
    let theta_b = s.atan2(q);
    let origin = p == T::zero() && r == T::zero();
    let theta_a = if origin { theta_b } else { r.atan2(p) };
    let (phi2, phi3) = if theta_a <= theta_b {
        (theta_a, theta_b)
    } else {
        (theta_b, theta_a)
    };
    let middle = if theta_a <= theta_b {
        (EdgeBound::X(p), EdgeBound::X(q))
    } else {
        (EdgeBound::Y(r), EdgeBound::Y(s))
    };

    let spans = [
        (phi1, phi2, EdgeBound::Y(r), EdgeBound::X(q)),
        (phi2, phi3, middle.0, middle.1),
        (phi3, phi4, EdgeBound::X(p), EdgeBound::Y(s)),
    ];
    let tiny = T::eps() * T::lit(16.0);
    let mut pieces = Vec::with_capacity(3);
    for (a, b, lower, upper) in spans {
        if b - a <= tiny {
            continue;
        }
        let mut kinks: Vec<T> = [lower.saturation(), upper.saturation()]
            .into_iter()
            .flatten()
            .filter(|&k| k > a && k < b)
            .map(|k| to_azimuth(orthant, k))
            .collect();
        let (x, y) = (to_azimuth(orthant, a), to_azimuth(orthant, b));
        let (start, end) = if x <= y { (x, y) } else { (y, x) };
        kinks.sort_by(|u, v| u.partial_cmp(v).expect("finite azimuth"));
        pieces.push(SubRegion {
            phi_start: start,
            phi_end: end,
            lower,
            upper,
            kinks,
        });
    }
    pieces.sort_by(|u, v| u.phi_start.partial_cmp(&v.phi_start).expect("finite azimuth"));
    Ok(AngularRegion {
        cell: cell.index(),
        orthant,
        pieces,
    })
}

/// Lattice cells of one array together with their angular regions, in
/// enumeration order.
#[derive(Debug, Clone)]
pub struct CellLattice<T> {
    pub cells: Vec<WavenumberCell<T>>,
    pub regions: Vec<AngularRegion<T>>,
}

impl<T: Real> CellLattice<T> {
    pub fn new(array: &PlanarArray<T>) -> Result<Self> {
        let cells = enumerate_cells(array);
        let regions = cells
            .iter()
            .map(|c| angular_region(c, array))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cells, regions })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn indices(&self) -> Vec<(i64, i64)> {
        self.cells.iter().map(|c| c.index()).collect()
    }

    /// Position of cell `(lx, ly)` in enumeration order.
    pub fn position(&self, lx: i64, ly: i64) -> Option<usize> {
        self.cells.iter().position(|c| c.lx == lx && c.ly == ly)
    }
}
