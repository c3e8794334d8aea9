//! Hilbert-space metrics `Θ = Θ† > 0` with `H†Θ = ΘH`: the full Dieudonné
//! nullspace, banded ansätze, and the κ-weighted spectral formula built from
//! eigenvectors of `H†`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::spectra::dense::{dense_eigenvalues, eigenvector};
use crate::spectra::{is_real_spectrum, spectral_diameter, REALITY_TOL_REL};

/// Relative singular-value threshold for nullspace detection.
pub const NULL_TOL: f64 = 1e-10;
/// Dual-basis condition number above which metric construction refuses.
pub const MAX_CONDITION: f64 = 1e10;
/// Relative eigenvalue gap below which the spectrum counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub is_positive_definite: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Whether a Cholesky factorization succeeded (cross-check).
    pub cholesky: bool,
}

impl PositivityReport {
    pub fn of(theta: &DMatrix<C64>) -> PositivityReport {
        let herm = (theta + theta.adjoint()) * C64::new(0.5, 0.0);
        let ev = SymmetricEigen::new(herm.clone()).eigenvalues;
        let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        PositivityReport {
            is_positive_definite: min > 1e-12 * max && max > 0.0,
            min_eigenvalue: min,
            max_eigenvalue: max,
            cholesky: Cholesky::new(herm).is_some(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    NullspaceCombination { coefficients: Vec<f64> },
    Spectral { kappa: Vec<f64> },
    /// Unique solution within the band `|i - j| <= bandwidth`
    /// (bandwidth 0 is the diagonal ansatz).
    Banded { bandwidth: usize },
}

#[derive(Clone, Debug)]
pub struct MetricCandidate {
    pub theta: DMatrix<C64>,
    pub provenance: Provenance,
    pub positivity: PositivityReport,
}

fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖H†Θ − ΘH‖_F`.
pub fn dieudonne_residual(h: &DMatrix<C64>, theta: &DMatrix<C64>) -> f64 {
    frob(&(h.adjoint() * theta - theta * h))
}

impl MetricCandidate {
    fn new(theta: DMatrix<C64>, provenance: Provenance) -> MetricCandidate {
        let positivity = PositivityReport::of(&theta);
        MetricCandidate { theta, provenance, positivity }
    }

    /// `‖H†Θ − ΘH‖ / (‖H‖ ‖Θ‖)`, Frobenius norms.
    pub fn relative_residual(&self, h: &DMatrix<C64>) -> f64 {
        dieudonne_residual(h, &self.theta) / (frob(h) * frob(&self.theta)).max(f64::MIN_POSITIVE)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.theta - self.theta.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unit Frobenius norm.
    pub fn normalized(&self) -> MetricCandidate {
        let s = frob(&self.theta);
        let theta = &self.theta / C64::new(s, 0.0);
        MetricCandidate::new(theta, self.provenance.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.theta.nrows();
        let rows: Vec<Vec<String>> =
            (0..n).map(|i| (0..n).map(|j| format_complex(self.theta[(i, j)])).collect()).collect();
        json!({ "theta": rows, "provenance": self.provenance, "positivity": self.positivity })
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{}{}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

/// Spectrum of `h`, refused unless real and non-degenerate.
fn checked_spectrum(h: &DMatrix<C64>) -> Result<Vec<C64>> {
    let ev = dense_eigenvalues(h)?;
    let (real, max_imag) = is_real_spectrum(&ev, REALITY_TOL_REL);
    if !real {
        return Err(Error::Spectrum(format!("complex spectrum (max |Im E| = {max_imag:.3e})")));
    }
    let scale = spectral_diameter(&ev).max(1.0);
    for w in ev.windows(2) {
        if (w[1] - w[0]).norm() < DEGENERACY_GAP * scale {
            return Err(Error::Spectrum(format!("degenerate eigenvalue near {:.6}", w[0].re)));
        }
    }
    Ok(ev)
}

/// Real coordinates of Hermitian matrices: `Θ_ii` for each `i`, and
/// `√2 Re Θ_ij`, `√2 Im Θ_ij` for each `i < j` with `j - i <= band`, so that
/// the coordinate inner product is the Frobenius one.
fn hermitian_basis(n: usize, band: usize) -> Vec<DMatrix<C64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = DMatrix::zeros(n, n);
        e[(i, i)] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for i in 0..n {
        for j in i + 1..n.min(i + band + 1) {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = C64::new(r, 0.0);
            e[(j, i)] = C64::new(r, 0.0);
            out.push(e);
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = C64::new(0.0, r);
            e[(j, i)] = C64::new(0.0, -r);
            out.push(e);
        }
    }
    out
}

/// Frobenius-orthonormal nullspace of `Θ ↦ H†Θ − ΘH` over the given
/// Hermitian coordinates.
fn restricted_nullspace(h: &DMatrix<C64>, basis: &[DMatrix<C64>]) -> Vec<DMatrix<C64>> {
    let n = h.nrows();
    let ha = h.adjoint();
    let rows = 2 * n * n;
    let mut a = DMatrix::<f64>::zeros(rows, basis.len());
    for (k, e) in basis.iter().enumerate() {
        let img = &ha * e - e * h;
        for (idx, z) in img.iter().enumerate() {
            a[(2 * idx, k)] = z.re;
            a[(2 * idx + 1, k)] = z.im;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = NULL_TOL * smax.max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            let mut theta = DMatrix::<C64>::zeros(n, n);
            for (c, e) in basis.iter().enumerate() {
                theta += e * C64::new(vt[(k, c)], 0.0);
            }
            out.push(theta);
        }
    }
    out
}

/// All Hermitian solutions of `H†Θ = ΘH`, as a Frobenius-orthonormal basis.
/// For a real non-degenerate spectrum its dimension is `N`.
pub fn dieudonne_nullspace(h: &DMatrix<C64>) -> Result<Vec<DMatrix<C64>>> {
    checked_spectrum(h)?;
    let n = h.nrows();
    Ok(restricted_nullspace(h, &hermitian_basis(n, n)))
}

/// Coefficients of `theta` in an orthonormal basis and the relative
/// Frobenius error of the reconstruction.
pub fn project(basis: &[DMatrix<C64>], theta: &DMatrix<C64>) -> (Vec<f64>, f64) {
    let coeffs: Vec<f64> = basis.iter().map(|b| (b.adjoint() * theta).trace().re).collect();
    let mut rec = DMatrix::<C64>::zeros(theta.nrows(), theta.ncols());
    for (b, c) in basis.iter().zip(&coeffs) {
        rec += b * C64::new(*c, 0.0);
    }
    let err = frob(&(theta - rec)) / frob(theta).max(f64::MIN_POSITIVE);
    (coeffs, err)
}

/// The metric `Σ c_k B_k` from nullspace coordinates.
pub fn nullspace_combination(basis: &[DMatrix<C64>], coefficients: &[f64]) -> Result<MetricCandidate> {
    if basis.is_empty() || basis.len() != coefficients.len() {
        return Err(Error::Input(format!("{} coefficients for a {}-dimensional basis", coefficients.len(), basis.len())));
    }
    let mut theta = DMatrix::<C64>::zeros(basis[0].nrows(), basis[0].ncols());
    for (b, c) in basis.iter().zip(coefficients) {
        theta += b * C64::new(*c, 0.0);
    }
    Ok(MetricCandidate::new(theta, Provenance::NullspaceCombination { coefficients: coefficients.to_vec() }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Second component equal to 1.
    SecondComponent,
    /// Unit 2-norm (used when the second component vanishes).
    UnitNorm,
}

#[derive(Clone, Debug)]
pub struct EigenbasisDual {
    /// Columns are eigenvectors of `H†`, in the stored normalization.
    pub kets: DMatrix<C64>,
    /// The same columns at unit 2-norm.
    pub unit_kets: DMatrix<C64>,
    /// Eigenvalues of `H` (sorted by real part); column `j` has `H†` eigenvalue `conj(E_j)`.
    pub eigenvalues: Vec<C64>,
    pub normalization: Vec<Normalization>,
    /// 2-norm condition number of the column-normalized basis.
    pub condition: f64,
}

impl EigenbasisDual {
    pub fn ket(&self, j: usize) -> Vec<C64> {
        self.kets.column(j).iter().cloned().collect()
    }
}

pub fn dual_eigenbasis(h: &DMatrix<C64>) -> Result<EigenbasisDual> {
    let ev = checked_spectrum(h)?;
    let n = h.nrows();
    let ha = h.adjoint();
    let mut kets = DMatrix::<C64>::zeros(n, n);
    let mut unit = DMatrix::<C64>::zeros(n, n);
    let mut normalization = Vec::with_capacity(n);
    for (j, e) in ev.iter().enumerate() {
        let v = eigenvector(&ha, e.conj());
        unit.set_column(j, &v);
        let scaled = if n > 1 && v[1].norm() > 1e-12 {
            normalization.push(Normalization::SecondComponent);
            &v / v[1]
        } else {
            normalization.push(Normalization::UnitNorm);
            v
        };
        kets.set_column(j, &scaled);
    }
    let sv = unit.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::Conditioning(condition));
    }
    Ok(EigenbasisDual { kets, unit_kets: unit, eigenvalues: ev, normalization, condition })
}

/// `Θ = Σ_j κ_j Ξ_j Ξ_j†` over the unit-norm dual eigenbasis; positive
/// definite for positive weights, the identity for Hermitian `H` and unit κ.
pub fn spectral_metric(h: &DMatrix<C64>, kappa: &[f64]) -> Result<MetricCandidate> {
    let n = h.nrows();
    if kappa.len() != n {
        return Err(Error::Input(format!("{} weights for N = {n}", kappa.len())));
    }
    if let Some(k) = kappa.iter().find(|k| !k.is_finite() || **k <= 0.0) {
        return Err(Error::Input(format!("weights must be positive, got {k}")));
    }
    let dual = dual_eigenbasis(h)?;
    let mut theta = DMatrix::<C64>::zeros(n, n);
    for (j, k) in kappa.iter().enumerate() {
        let x = dual.unit_kets.column(j);
        theta += (x * x.adjoint()) * C64::new(*k, 0.0);
    }
    Ok(MetricCandidate::new(theta, Provenance::Spectral { kappa: kappa.to_vec() }))
}

/// The unique (up to scale) Hermitian solution with `Θ_ij = 0` for
/// `|i - j| > bandwidth`, normalized to unit Frobenius norm and positive
/// trace; `None` when only `Θ = 0` fits the band.
pub fn banded_metric(h: &DMatrix<C64>, bandwidth: usize) -> Result<Option<MetricCandidate>> {
    let n = h.nrows();
    let mut sol = restricted_nullspace(h, &hermitian_basis(n, bandwidth));
    match sol.len() {
        0 => Ok(None),
        1 => {
            let mut theta = sol.pop().expect("one solution");
            let tr = theta.trace().re;
            let lead = if tr.abs() > 1e-12 { tr } else { theta.iter().map(|z| z.re).find(|x| x.abs() > 1e-12).unwrap_or(1.0) };
            if lead < 0.0 {
                theta = -theta;
            }
            let s = frob(&theta);
            Ok(Some(MetricCandidate::new(theta / C64::new(s, 0.0), Provenance::Banded { bandwidth })))
        }
        d => Err(Error::Ambiguity(d)),
    }
}

/// `‖M − M†‖ / ‖M‖` for `M = Ω H Ω⁻¹`, `Θ = Ω†Ω` (Cholesky, `Ω = L†`):
/// the Hamiltonian is self-adjoint in the inner product defined by `Θ`.
pub fn quasi_hermiticity_error(h: &DMatrix<C64>, theta: &DMatrix<C64>) -> Result<f64> {
    let herm = (theta + theta.adjoint()) * C64::new(0.5, 0.0);
    let chol = Cholesky::new(herm).ok_or_else(|| Error::Input("metric is not positive definite".into()))?;
    let omega = chol.l().adjoint();
    let inv = omega
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical { message: "singular metric factor".into(), partial: vec![] })?;
    let m = &omega * h * inv;
    Ok(frob(&(&m - m.adjoint())) / frob(&m).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, ModelSpec};

    fn two_coupling(a: &str, b: &str) -> DMatrix<C64> {
        let json = format!(r#"{{"family":"nnim","dim":4,"params":{{"a":"{a}","b":"{b}"}},"couplings":["-b","a"]}}"#);
        Model::from_spec(&ModelSpec::from_json(&json).unwrap()).unwrap().float_matrix().unwrap().to_dense()
    }

    fn real(rows: &[&[f64]]) -> DMatrix<C64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn hermitian_commutant() {
        let h = real(&[&[1.0, 0.5, 0.0], &[0.5, 2.0, 0.3], &[0.0, 0.3, 4.0]]);
        let basis = dieudonne_nullspace(&h).unwrap();
        assert_eq!(basis.len(), 3);
        let (_, err) = project(&basis, &DMatrix::identity(3, 3));
        assert!(err < 1e-10);
        let m = spectral_metric(&h, &[1.0; 3]).unwrap();
        assert!((m.theta - DMatrix::<C64>::identity(3, 3)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn seed_two_by_two_family() {
        // [[2, -1-l], [-1+l, 2]]: Θ = [[p, q], [q, r]] with (1-l) r = (1+l) p
        // and q real, free
        let l = 0.5;
        let h = real(&[&[2.0, -1.0 - l], &[-1.0 + l, 2.0]]);
        let basis = dieudonne_nullspace(&h).unwrap();
        assert_eq!(basis.len(), 2);
        let theta = real(&[&[1.0 - l, 0.7], &[0.7, 1.0 + l]]);
        assert!(dieudonne_residual(&h, &theta) < 1e-14);
        assert!(project(&basis, &theta).1 < 1e-12);
        let d = banded_metric(&h, 0).unwrap().unwrap();
        assert!((d.theta[(0, 0)].re / d.theta[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_coupling_small_parameters() {
        let h = two_coupling("1/2", "1/2");
        assert_eq!(dieudonne_nullspace(&h).unwrap().len(), 4);
        let d = banded_metric(&h, 0).unwrap().unwrap();
        assert!(d.positivity.is_positive_definite);
        assert!(d.relative_residual(&h) < 1e-10);
        assert!(quasi_hermiticity_error(&h, &d.theta).unwrap() < 1e-8);
    }

    #[test]
    fn two_coupling_paradox_point() {
        let h = two_coupling("1/2", "3/4*sqrt(2)");
        let d = banded_metric(&h, 0).unwrap().unwrap();
        assert!(!d.positivity.is_positive_definite);
        assert!(d.positivity.min_eigenvalue < 0.0);
        let s = spectral_metric(&h, &[1.0; 4]).unwrap();
        assert!(s.positivity.is_positive_definite && s.positivity.cholesky);
        assert!(s.relative_residual(&h) < 1e-10);
        assert!(s.hermiticity_error() < 1e-12);
        let basis = dieudonne_nullspace(&h).unwrap();
        assert!(project(&basis, &s.theta).1 < 1e-9);
        let s2 = spectral_metric(&h, &[2.0; 4]).unwrap();
        assert!((s2.theta - &s.theta * C64::new(2.0, 0.0)).iter().all(|z| z.norm() < 1e-12 * frob(&s.theta)));
    }

    #[test]
    fn diagonal_positivity_changes_sign_near_one() {
        let min = |b: &str| banded_metric(&two_coupling("1/2", b), 0).unwrap().unwrap().positivity.min_eigenvalue;
        assert!(min("19/20") > 0.0);
        assert!(min("21/20") < 0.0);
    }

    #[test]
    fn refuses_complex_and_degenerate_spectra() {
        let h = real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(matches!(dieudonne_nullspace(&h), Err(Error::Spectrum(_))));
        let h = real(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(spectral_metric(&h, &[1.0, 1.0]), Err(Error::Spectrum(_))));
        let h = real(&[&[1.0, 0.0], &[0.0, 2.0]]);
        assert!(matches!(spectral_metric(&h, &[1.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn near_defective_basis_is_refused() {
        // eigenvalues 0 and 1e-6 of a nearly Jordan block
        let h = real(&[&[0.0, 1.0], &[0.0, 1e-9]]);
        let r = dual_eigenbasis(&h);
        assert!(matches!(r, Err(Error::Conditioning(_)) | Err(Error::Spectrum(_))), "{r:?}");
    }

    #[test]
    fn wide_band_is_ambiguous() {
        let h = two_coupling("1/2", "1/2");
        assert!(matches!(banded_metric(&h, 3), Err(Error::Ambiguity(4))));
    }
}
