//! Dense float linear algebra: the independent eigenvalue oracle and
//! null vectors.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::roots::sort_roots;
use crate::scalar::C64;

/// Eigenvalues from a complex Schur decomposition, sorted by real part.
pub fn dense_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical { message: "Schur iteration did not converge".into(), partial: vec![] })?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    sort_roots(&mut ev);
    Ok(ev)
}

/// Unit vector minimizing `|A v|` (right singular vector of the smallest
/// singular value), with that singular value.
pub fn null_vector(a: &DMatrix<C64>) -> (DVector<C64>, f64) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let v: DVector<C64> = vt.row(k).transpose().map(|z| z.conj());
    (v, svd.singular_values[k])
}

/// Eigenvector of `m` for the eigenvalue `e`, unit 2-norm.
pub fn eigenvector(m: &DMatrix<C64>, e: C64) -> DVector<C64> {
    let n = m.nrows();
    let shifted = m - DMatrix::<C64>::identity(n, n) * e;
    null_vector(&shifted).0
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn norm2(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_a_non_normal_matrix() {
        // [[1, 2], [0, 3]]
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(3.0, 0.0)]);
        let ev = dense_eigenvalues(&m).unwrap();
        assert!((ev[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - C64::new(3.0, 0.0)).norm() < 1e-14);
        let v = eigenvector(&m, ev[1]);
        let r = &m * &v - &v * ev[1];
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let ev = dense_eigenvalues(&m).unwrap();
        assert!((ev[0].im.abs() - 1.0).abs() < 1e-14 && (ev[1].im.abs() - 1.0).abs() < 1e-14);
    }
}
