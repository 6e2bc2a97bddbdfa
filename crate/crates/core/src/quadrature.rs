//! Adaptive Gauss–Legendre quadrature and nested integration over
//! [`AngularRegion`](crate::geometry::AngularRegion)s.
//!
//! The outer azimuth integral is split at every kink of the θ bounds (the
//! azimuths where a bound saturates at the horizon), and each smooth piece is
//! remapped with `φ(u) = φa + (φb − φa)(3u² − 2u³)` which absorbs the
//! square-root behaviour of `cos θ` at saturation points. Refinement is
//! globally adaptive: the interval with the largest local error estimate is
//! bisected until the summed error falls below tolerance.

use crate::error::{Error, Result};
use crate::geometry::{AngularRegion, SubRegion};
use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Rule with `n` nodes, computed by Newton iteration on `P_n` in `f64`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x);
        }
        acc
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Value of an integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Initial equal subdivisions before adaptivity kicks in.
    pub initial_panels: usize,
    /// Maximum bisection depth of any interval.
    pub max_depth: usize,
    /// Cap on the total number of live intervals.
    pub max_intervals: usize,
}

impl<T: Real> AdaptiveOptions<T> {
    pub fn relative(rel_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol: T::zero(),
            initial_panels: 2,
            max_depth: 48,
            max_intervals: 20_000,
        }
    }

    pub fn with_initial_panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

const RULE_ORDER: usize = 10;

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    depth: usize,
}

/// Globally adaptive bisection with a 10-point Gauss–Legendre rule.
///
/// The error of a panel is `|G(a,b) − G(a,m) − G(m,b)|`; the refined sum is
/// kept as the panel value.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: &AdaptiveOptions<T>,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let rule: GaussLegendre<T> = GaussLegendre::new(RULE_ORDER);
    let two = T::lit(2.0);
    let eval = |lo: T, hi: T, f: &mut F| -> (T, T) {
        let whole = rule.integrate(lo, hi, &mut *f);
        let mid = (lo + hi) / two;
        let halves = rule.integrate(lo, mid, &mut *f) + rule.integrate(mid, hi, &mut *f);
        (halves, (whole - halves).abs())
    };

    let n0 = opts.initial_panels.max(1);
    let step = (b - a) / T::from_usize_lossy(n0);
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(n0 * 4);
    for i in 0..n0 {
        let lo = a + step * T::from_usize_lossy(i);
        let hi = if i + 1 == n0 { b } else { lo + step };
        let (value, error) = eval(lo, hi, &mut f);
        panels.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
            depth: 0,
        });
    }

    loop {
        let mut total = T::zero();
        let mut err = T::zero();
        for p in &panels {
            total += p.value;
            err += p.error;
        }
        let target = (opts.rel_tol * total.abs()).max(opts.abs_tol);
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total.to_f64_lossy(),
                error_bound: err.to_f64_lossy(),
                depth: 0,
            });
        }
        // bisect the worst panel
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0usize, -T::one()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) / two;
        if p.depth + 1 > opts.max_depth || panels.len() + 2 > opts.max_intervals || mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature {
                estimate: total.to_f64_lossy(),
                error_bound: err.to_f64_lossy(),
                depth: p.depth,
            });
        }
        let (v1, e1) = eval(p.a, mid, &mut f);
        let (v2, e2) = eval(mid, p.b, &mut f);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
            depth: p.depth + 1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
            depth: p.depth + 1,
        });
    }
}

/// Smoothing map `u ↦ 3u² − 2u³` on `[0,1]` and its derivative.
#[inline]
fn smoothstep<T: Real>(u: T) -> (T, T) {
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    (u * u * (three - two * u), six * u * (T::one() - u))
}

/// Integrates `g(φ, piece)` over the azimuth extent of `region`.
///
/// `g` receives the azimuth and the piece containing it and returns the inner
/// θ integral. `extra_breaks` are additional azimuths where `g` is not
/// smooth (e.g. edges of a piecewise-constant spectrum).
pub fn integrate_azimuth<T, G>(
    region: &AngularRegion<T>,
    extra_breaks: &[T],
    mut g: G,
    opts: &AdaptiveOptions<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    G: FnMut(T, &SubRegion<T>) -> Result<T>,
{
    let mut value = T::zero();
    let mut error = T::zero();
    let mut failure: Option<Error> = None;
    for piece in region.pieces() {
        let mut breaks = piece.breakpoints();
        breaks.extend(
            extra_breaks
                .iter()
                .copied()
                .filter(|&x| x > piece.phi_start && x < piece.phi_end),
        );
        breaks.push(piece.phi_start);
        breaks.push(piece.phi_end);
        breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        breaks.dedup();
        for w in breaks.windows(2) {
            let (pa, pb) = (w[0], w[1]);
            if pb <= pa {
                continue;
            }
            let width = pb - pa;
            let est = integrate_adaptive(
                |u| {
                    if failure.is_some() {
                        return T::zero();
                    }
                    let (s, ds) = smoothstep(u);
                    let phi = pa + width * s;
                    match g(phi, piece) {
                        Ok(v) => v * width * ds,
                        Err(e) => {
                            failure = Some(e);
                            T::zero()
                        }
                    }
                },
                T::zero(),
                T::one(),
                opts,
            )?;
            if let Some(e) = failure.take() {
                return Err(e);
            }
            value += est.value;
            error += est.error;
        }
    }
    Ok(Estimate { value, error })
}

/// Adaptive nested quadrature of `f(θ, φ)` over `region` (outer φ, inner θ).
///
/// The integrand is the full measure density: pass `sin θ · A²(θ, φ)` for a
/// solid-angle weighted integral.
pub fn quadrature_integrate<T, F>(region: &AngularRegion<T>, f: F, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T, T) -> T,
{
    integrate_region(region, &[], &[], f, rel_tol).map(|e| e.value)
}

/// [`quadrature_integrate`] with breakpoint hints and the error estimate.
pub fn integrate_region<T, F>(
    region: &AngularRegion<T>,
    phi_breaks: &[T],
    theta_breaks: &[T],
    f: F,
    rel_tol: T,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(T, T) -> T,
{
    let outer = AdaptiveOptions::relative(rel_tol).with_initial_panels(4);
    let inner = AdaptiveOptions::relative(rel_tol * T::lit(0.1));
    integrate_azimuth(
        region,
        phi_breaks,
        |phi, piece| {
            let (lo, hi) = piece.theta_bounds(phi);
            if hi <= lo {
                return Ok(T::zero());
            }
            let mut acc = T::zero();
            let mut edges: Vec<T> = theta_breaks
                .iter()
                .copied()
                .filter(|&t| t > lo && t < hi)
                .collect();
            edges.insert(0, lo);
            edges.push(hi);
            for w in edges.windows(2) {
                acc += integrate_adaptive(|theta| f(theta, phi), w[0], w[1], &inner)?.value;
            }
            Ok(acc)
        },
        &outer,
    )
}

/// Fixed tensor-product rule over one region: nodes `(θ, φ)` with weights that
/// already include the `sin θ` solid-angle density.
#[derive(Debug, Clone)]
pub struct RegionRule<T> {
    pub nodes: Vec<(T, T, T)>,
}

impl<T: Real> RegionRule<T> {
    /// `order` Gauss–Legendre points per smooth azimuth piece and per θ line.
    pub fn new(region: &AngularRegion<T>, order: usize) -> Self {
        let rule = GaussLegendre::<T>::new(order);
        let mut nodes = Vec::new();
        for piece in region.pieces() {
            let mut breaks = piece.breakpoints();
            breaks.push(piece.phi_start);
            breaks.push(piece.phi_end);
            breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
            breaks.dedup();
            for w in breaks.windows(2) {
                let (pa, pb) = (w[0], w[1]);
                let width = pb - pa;
                if width <= T::zero() {
                    continue;
                }
                for (u, wu) in rule.mapped(T::zero(), T::one()) {
                    let (s, ds) = smoothstep(u);
                    let phi = pa + width * s;
                    let wphi = wu * width * ds;
                    let (lo, hi) = piece.theta_bounds(phi);
                    if hi <= lo {
                        continue;
                    }
                    for (theta, wt) in rule.mapped(lo, hi) {
                        nodes.push((theta, phi, wphi * wt * theta.sin()));
                    }
                }
            }
        }
        Self { nodes }
    }

    pub fn total_weight(&self) -> T {
        self.nodes.iter().fold(T::zero(), |acc, n| acc + n.2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angular_region, enumerate_cells, PlanarArray};

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(10);
        // degree 19 is integrated exactly
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(18));
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let v = rule.integrate(0.0, 2.0, |x| 3.0 * x * x);
        assert!((v - 8.0).abs() < 1e-13);
        let w: f64 = GaussLegendre::<f64>::new(33).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let opts = AdaptiveOptions::relative(1e-10);
        let e = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, &opts).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_zero_integrand() {
        let opts = AdaptiveOptions::relative(1e-8);
        let e = integrate_adaptive(|_x: f64| 0.0, 0.0, 1.0, &opts).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let mut opts = AdaptiveOptions::relative(1e-14);
        opts.max_depth = 3;
        // discontinuity at an irrational point cannot be resolved in 3 bisections
        let r = integrate_adaptive(|x: f64| if x < 0.3183 { 1.0 } else { 0.0 }, 0.0, 1.0, &opts);
        match r {
            Err(Error::Quadrature { estimate, .. }) => assert!((estimate - 0.3183).abs() < 0.1),
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn sin_theta_integrand_is_solid_angle() {
        let a = PlanarArray::square(10.0, 0.5, 1.0).unwrap();
        for cell in enumerate_cells(&a).iter().step_by(37) {
            let region = angular_region(cell, &a).unwrap();
            let q = quadrature_integrate(&region, |t: f64, _| t.sin(), 1e-10).unwrap();
            let s = region.solid_angle().unwrap();
            assert!((q - s).abs() <= 1e-9 * s.max(1e-12), "{q} vs {s}");
            let z = quadrature_integrate(&region, |_, _| 0.0, 1e-10).unwrap();
            assert_eq!(z, 0.0);
        }
    }

    #[test]
    fn tensor_rule_weights_match_solid_angle() {
        let a = PlanarArray::<f64>::square(3.0, 0.5, 1.0).unwrap();
        for cell in enumerate_cells(&a) {
            let region = angular_region(&cell, &a).unwrap();
            let s = region.solid_angle().unwrap();
            let w = RegionRule::new(&region, 24).total_weight();
            assert!((w - s).abs() <= 1e-7 * s, "{:?}: {w} vs {s}", cell.index());
        }
    }
}
