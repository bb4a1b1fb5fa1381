//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Unit-modulus complex number `e^{j phase}`.
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    let (s, c) = libm::sincos(phase);
    Complex64::new(c, s)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// `‖AᴴA − I‖_F`, the deviation of the columns of `a` from an orthonormal set.
pub fn orthonormality_defect(a: &CMatrix) -> f64 {
    let gram = a.adjoint() * a;
    let n = gram.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            acc += (gram[(i, j)] - target).norm_sqr();
        }
    }
    libm::sqrt(acc)
}

/// Thin QR factor `Q` of `a` with the convention that `R` has a nonnegative real diagonal.
pub fn orthonormalize_columns(a: &CMatrix) -> CMatrix {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..r.nrows().min(r.ncols()) {
        let d = r[(j, j)];
        let m = d.norm();
        if m > 0.0 {
            let phase = d / m;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `log2 det(M)` for a Hermitian positive definite `M`, via Cholesky.
pub fn log2_det_hpd(m: &CMatrix) -> Result<f64> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        acc += libm::log2(l[(i, i)].re);
    }
    Ok(2.0 * acc)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    use core::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut y = x - two_pi * libm::floor((x + PI) / two_pi);
    // y is now in [-π, π)
    if y <= -PI {
        y += two_pi;
    }
    y
}
