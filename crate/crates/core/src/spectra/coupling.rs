use std::cell::Cell;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CellLattice;
use crate::quadrature::{integrate_region, RegionRule};
use crate::scalar::Real;
use crate::spectra::SpectralFactor;

pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Variances of the angular coupling coefficients, normalized to unit total
/// power. Rows follow the receive lattice, columns the source lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    pub values: DMatrix<T>,
    pub receive_cells: Vec<(i64, i64)>,
    pub source_cells: Vec<(i64, i64)>,
    /// Receive and source marginals when the matrix is their outer product.
    pub separable: Option<(DVector<T>, DVector<T>)>,
}

impl<T: Real> CouplingMatrix<T> {
    /// Outer product of two marginals, each rescaled to unit sum.
    pub fn from_marginals(
        receive: DVector<T>,
        source: DVector<T>,
        receive_cells: Vec<(i64, i64)>,
        source_cells: Vec<(i64, i64)>,
    ) -> Result<Self> {
        if receive.len() != receive_cells.len() || source.len() != source_cells.len() {
            return Err(Error::DimensionMismatch {
                context: "coupling marginals",
                expected: format!("{}x{}", receive_cells.len(), source_cells.len()),
                found: format!("{}x{}", receive.len(), source.len()),
            });
        }
        let receive = normalize_vector(receive)?;
        let source = normalize_vector(source)?;
        let values = &receive * source.transpose();
        Ok(Self {
            values,
            receive_cells,
            source_cells,
            separable: Some((receive, source)),
        })
    }

    /// Arbitrary non-negative matrix, rescaled to unit total.
    pub fn from_values(
        values: DMatrix<T>,
        receive_cells: Vec<(i64, i64)>,
        source_cells: Vec<(i64, i64)>,
    ) -> Result<Self> {
        if values.nrows() != receive_cells.len() || values.ncols() != source_cells.len() {
            return Err(Error::DimensionMismatch {
                context: "coupling matrix",
                expected: format!("{}x{}", receive_cells.len(), source_cells.len()),
                found: format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidSpectrum("negative or non-finite variance".into()));
        }
        let total = values.sum();
        if total <= T::zero() {
            return Err(Error::EmptySpectrum);
        }
        Ok(Self {
            values: values / total,
            receive_cells,
            source_cells,
            separable: None,
        })
    }

    pub fn n_receive(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_source(&self) -> usize {
        self.values.ncols()
    }

    pub fn total_power(&self) -> T {
        self.values.sum()
    }

    /// Row sums: receive-side angular power distribution.
    pub fn receive_marginal(&self) -> DVector<T> {
        match &self.separable {
            Some((r, _)) => r.clone(),
            None => DVector::from_iterator(self.n_receive(), self.values.row_iter().map(|r| r.sum())),
        }
    }

    /// Column sums: source-side angular power distribution.
    pub fn source_marginal(&self) -> DVector<T> {
        match &self.separable {
            Some((_, s)) => s.clone(),
            None => DVector::from_iterator(self.n_source(), self.values.column_iter().map(|c| c.sum())),
        }
    }
}

fn normalize_vector<T: Real>(v: DVector<T>) -> Result<DVector<T>> {
    if v.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidSpectrum("negative or non-finite variance".into()));
    }
    let total = v.sum();
    if total <= T::zero() {
        return Err(Error::EmptySpectrum);
    }
    Ok(v / total)
}

/// Per-cell power `∫∫ A² sin θ dθ dφ` of a one-sided spectrum, normalized to
/// unit sum.
pub fn receive_variances<T: Real>(spectral: &SpectralFactor<T>, lattice: &CellLattice<T>) -> Result<DVector<T>> {
    receive_variances_with_tol(spectral, lattice, T::lit(DEFAULT_REL_TOL))
}

pub fn receive_variances_with_tol<T: Real>(
    spectral: &SpectralFactor<T>,
    lattice: &CellLattice<T>,
    rel_tol: T,
) -> Result<DVector<T>> {
    if !spectral.is_separable() {
        return Err(Error::NotSeparable);
    }
    let (phi_breaks, theta_breaks) = spectral.breakpoints();
    let raw: Vec<Result<T>> = lattice
        .regions
        .par_iter()
        .map(|region| match spectral {
            SpectralFactor::Isotropic => region.solid_angle(),
            _ => {
                let bad = Cell::new(false);
                let est = integrate_region(
                    region,
                    &phi_breaks,
                    &theta_breaks,
                    |theta, phi| {
                        let a2 = spectral.evaluate(theta, phi).unwrap_or(T::zero());
                        if !(a2 >= T::zero()) || !a2.is_finite() {
                            bad.set(true);
                            return T::zero();
                        }
                        a2 * theta.sin()
                    },
                    rel_tol,
                )?;
                if bad.get() {
                    return Err(Error::InvalidSpectrum(
                        "spectral factor returned a negative or non-finite value".into(),
                    ));
                }
                Ok(est.value)
            }
        })
        .collect();
    let values = raw.into_iter().collect::<Result<Vec<T>>>()?;
    normalize_vector(DVector::from_vec(values))
}

/// Coupling variances for one spectral factor shared by both ends.
///
/// Separable factors are integrated per end and combined as an outer product;
/// [`SpectralFactor::CustomJoint`] goes through a 4D tensor-product rule.
pub fn coupling_variances<T: Real>(
    spectral: &SpectralFactor<T>,
    source: &CellLattice<T>,
    receive: &CellLattice<T>,
) -> Result<CouplingMatrix<T>> {
    match spectral {
        SpectralFactor::CustomJoint(f) => {
            let values = joint_variances(f.as_ref(), receive, source, T::lit(DEFAULT_REL_TOL), 64)?;
            CouplingMatrix::from_values(values, receive.indices(), source.indices())
        }
        _ => coupling_variances_separable(spectral, spectral, source, receive),
    }
}

/// Separable coupling with distinct spectra at each end.
pub fn coupling_variances_separable<T: Real>(
    receive_spectrum: &SpectralFactor<T>,
    source_spectrum: &SpectralFactor<T>,
    source: &CellLattice<T>,
    receive: &CellLattice<T>,
) -> Result<CouplingMatrix<T>> {
    let r = receive_variances(receive_spectrum, receive)?;
    let s = receive_variances(source_spectrum, source)?;
    CouplingMatrix::from_marginals(r, s, receive.indices(), source.indices())
}

/// 4D tensor-product quadrature, doubling the per-axis order from 8 until
/// every entry is stable to `rel_tol`.
pub(crate) fn joint_variances<T: Real>(
    f: &(dyn Fn(T, T, T, T) -> T + Send + Sync),
    receive: &CellLattice<T>,
    source: &CellLattice<T>,
    rel_tol: T,
    max_order: usize,
) -> Result<DMatrix<T>> {
    let mut order = 8;
    let mut previous: Option<DMatrix<T>> = None;
    loop {
        let rr: Vec<RegionRule<T>> = receive.regions.iter().map(|r| RegionRule::new(r, order)).collect();
        let rs: Vec<RegionRule<T>> = source.regions.iter().map(|r| RegionRule::new(r, order)).collect();
        let rows: Vec<Result<Vec<T>>> = rr
            .par_iter()
            .map(|ri| {
                rs.iter()
                    .map(|sj| {
                        let mut acc = T::zero();
                        for &(tr, pr, wr) in &ri.nodes {
                            let mut inner = T::zero();
                            for &(ts, ps, ws) in &sj.nodes {
                                let v = f(tr, pr, ts, ps);
                                if !(v >= T::zero()) || !v.is_finite() {
                                    return Err(Error::InvalidSpectrum(
                                        "joint spectral factor returned a negative or non-finite value".into(),
                                    ));
                                }
                                inner += ws * v;
                            }
                            acc += wr * inner;
                        }
                        Ok(acc)
                    })
                    .collect()
            })
            .collect();
        let mut m = DMatrix::zeros(receive.len(), source.len());
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        let total = m.sum();
        if let Some(prev) = &previous {
            let floor = total * T::lit(1e-14);
            let mut worst = T::zero();
            let mut converged = true;
            for (a, b) in m.iter().zip(prev.iter()) {
                let d = (*a - *b).abs();
                worst = worst.max(d);
                if d > rel_tol * a.abs() + floor {
                    converged = false;
                }
            }
            if converged {
                return Ok(m);
            }
            if order >= max_order {
                return Err(Error::Quadrature {
                    estimate: total.to_f64_lossy(),
                    error_bound: worst.to_f64_lossy(),
                    depth: order,
                });
            }
        }
        previous = Some(m);
        order *= 2;
    }
}

/// Entries kept by the greedy power selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificantSet {
    /// Row-major mask of selected entries.
    pub mask: DMatrix<bool>,
    pub receive_count: usize,
    pub source_count: usize,
}

/// Picks entries in decreasing order of variance (ties by row-major index)
/// until their cumulative power reaches `fraction` of the total.
pub fn significant_set<T: Real>(matrix: &CouplingMatrix<T>, fraction: T) -> SignificantSet {
    let (nr, ns) = matrix.values.shape();
    let order = greedy_order(nr * ns, |k| matrix.values[(k / ns, k % ns)]);
    let total = matrix.values.sum();
    let mut mask = DMatrix::from_element(nr, ns, false);
    for k in select(&order, |k| matrix.values[(k / ns, k % ns)], total, fraction) {
        mask[(k / ns, k % ns)] = true;
    }
    let receive_count = mask.row_iter().filter(|r| r.iter().any(|&b| b)).count();
    let source_count = mask.column_iter().filter(|c| c.iter().any(|&b| b)).count();
    SignificantSet {
        mask,
        receive_count,
        source_count,
    }
}

/// Number of cells the greedy selection keeps from a one-sided variance map.
pub fn significant_count<T: Real>(variances: &[T], fraction: T) -> usize {
    significant_cells(variances, fraction).len()
}

/// Indices of the cells kept by the greedy selection, in selection order.
pub fn significant_cells<T: Real>(variances: &[T], fraction: T) -> Vec<usize> {
    let order = greedy_order(variances.len(), |k| variances[k]);
    let total = variances.iter().fold(T::zero(), |a, &b| a + b);
    select(&order, |k| variances[k], total, fraction)
}

fn greedy_order<T: Real>(n: usize, value: impl Fn(usize) -> T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&a, &b| value(b).partial_cmp(&value(a)).unwrap_or(std::cmp::Ordering::Equal));
    order
}

fn select<T: Real>(order: &[usize], value: impl Fn(usize) -> T, total: T, fraction: T) -> Vec<usize> {
    let mut picked = Vec::new();
    if total <= T::zero() {
        return picked;
    }
    let target = fraction * total;
    let mut acc = T::zero();
    for &k in order {
        let v = value(k);
        if v <= T::zero() {
            break;
        }
        if fraction < T::one() && acc >= target {
            break;
        }
        picked.push(k);
        acc += v;
    }
    picked
}
