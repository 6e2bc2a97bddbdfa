//! Dense complex helpers built on real-valued kernels.
//!
//! Complex products are split into four real GEMMs so they run through
//! nalgebra's blocked real multiply.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub fn split<T: Real>(m: &CMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub fn join<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>) -> CMatrix<T> {
    re.zip_map(im, |a, b| Complex::new(a, b))
}

/// `a · b`.
pub fn mul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = &ar * &br;
    re -= &ai * &bi;
    let mut im = &ar * &bi;
    im += &ai * &br;
    join(&re, &im)
}

/// `aᴴ · b`.
pub fn mul_adjoint_left<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.nrows(), b.nrows(), "inner dimensions");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = ar.tr_mul(&br);
    re += ai.tr_mul(&bi);
    let mut im = ar.tr_mul(&bi);
    im -= ai.tr_mul(&br);
    join(&re, &im)
}

/// `a · bᴴ`.
pub fn mul_adjoint_right<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.ncols(), "inner dimensions");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = &ar * br.transpose();
    re += &ai * bi.transpose();
    let mut im = &ai * br.transpose();
    im -= &ar * bi.transpose();
    join(&re, &im)
}

/// Gram matrix on the smaller side: `a aᴴ` if `a` is wide, else `aᴴ a`.
pub fn small_gram<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    if a.nrows() <= a.ncols() {
        mul_adjoint_right(a, a)
    } else {
        mul_adjoint_left(a, a)
    }
}

/// `log₂ det(I + scale · g)` for Hermitian positive semi-definite `g`.
pub fn log2det_identity_plus<T: Real>(g: &CMatrix<T>, scale: T) -> Result<T> {
    let n = g.nrows();
    let mut m = g * Complex::new(scale, T::zero());
    for i in 0..n {
        m[(i, i)] += Complex::new(T::one(), T::zero());
    }
    let chol = Cholesky::new(m).ok_or_else(|| Error::InvalidArgument("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..n {
        acc += l[(i, i)].re.ln();
    }
    Ok(T::lit(2.0) * acc / T::lit(std::f64::consts::LN_2))
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Eigenvalues of a real symmetric matrix in descending order.
pub fn symmetric_eigenvalues<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = m.clone().singular_values().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Frobenius norm of `a − b`.
pub fn frobenius_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y).norm_sqr())
        .sqrt()
}

pub fn frobenius_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
}
