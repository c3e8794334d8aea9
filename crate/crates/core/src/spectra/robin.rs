//! Edge diagnostics for the boundary-interaction model: the exact two-row
//! identity and the Robin-type residual it motivates at large N.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Family, Model, TriMatrix};
use crate::scalar::C64;
use crate::spectra::dense::{dense_eigenvalues, eigenvector};

#[derive(Clone, Debug, Serialize)]
pub struct RobinRecord {
    pub dim: usize,
    pub lambda: f64,
    pub energy: C64,
    /// `|(1-E)(-Δ-E)ψ₂ + λ²ψ₂ - λ δψ|` for unit-norm `ψ`.
    pub identity_residual: f64,
    /// `λψ₂ - δψ` for unit-norm `ψ` with `ψ₂` real and nonnegative.
    pub robin_residual: C64,
    /// `|λψ₂ - δψ| / |ψ₂|`.
    pub robin_relative: f64,
    /// `δψ = ψ₁ - ψ₂`.
    pub delta_psi: C64,
}

/// Reads `λ` off the first coupling pair, `(sup, sub) = (-1-λ, -1+λ)`.
fn edge_lambda(h: &TriMatrix) -> C64 {
    (h.get(1, 0) - h.get(0, 1)) / 2.0
}

/// Checks the identity obtained by eliminating `ψ₁` from the first two
/// rows of `Hψ = Eψ`.
pub fn robin_identity_check(model: &Model, energy: C64, psi: &DVector<C64>) -> Result<RobinRecord> {
    if model.spec.family != Family::Bim {
        return Err(Error::Input("the Robin diagnostic applies to BIM matrices only".into()));
    }
    let n = model.dim();
    if n < 6 {
        return Err(Error::UnsupportedDimension(format!("the Robin diagnostic needs N >= 6, got {n}")));
    }
    if psi.len() != n {
        return Err(Error::Input(format!("eigenvector has {} components for N = {n}", psi.len())));
    }
    let h = model.float_matrix()?;
    let lam = edge_lambda(&h);
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::Input("zero eigenvector".into()));
    }
    // unit norm, ψ₂ on the nonnegative real axis
    let phase = if psi[1].norm() > 0.0 { psi[1].conj() / psi[1].norm() } else { C64::new(1.0, 0.0) };
    let v: Vec<C64> = psi.iter().map(|z| z * phase / norm).collect();
    let one = C64::new(1.0, 0.0);
    let delta = v[0] - v[1];
    let lap = -v[0] + v[1] * 2.0 - v[2];
    let lhs = (one - energy) * (lap - energy * v[1]);
    let rhs = -lam * lam * v[1] + lam * delta;
    let robin = lam * v[1] - delta;
    Ok(RobinRecord {
        dim: n,
        lambda: lam.re,
        energy,
        identity_residual: (lhs - rhs).norm(),
        robin_residual: robin,
        robin_relative: if v[1].norm() > 0.0 { robin.norm() / v[1].norm() } else { f64::INFINITY },
        delta_psi: delta,
    })
}

/// The diagnostic for every eigenpair of a bound BIM model, eigenvalues
/// sorted by real part.
pub fn robin_all(model: &Model) -> Result<Vec<RobinRecord>> {
    let h = model.float_matrix()?.to_dense();
    let ev = dense_eigenvalues(&h)?;
    ev.iter().map(|&e| robin_identity_check(model, e, &eigenvector(&h, e))).collect()
}

/// Record for the lowest real eigenvalue, if any.
pub fn robin_lowest_real(model: &Model) -> Result<Option<RobinRecord>> {
    let all = robin_all(model)?;
    let scale = all.iter().map(|r| r.energy.norm()).fold(1.0, f64::max);
    Ok(all.into_iter().find(|r| r.energy.im.abs() <= 1e-10 * scale))
}
