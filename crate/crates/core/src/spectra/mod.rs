//! Eigenvalues at concrete parameter points via the exact secular
//! polynomial, reality classification, sweeps, scans and the boundary
//! (Robin) diagnostics.

pub mod dense;
pub mod robin;
pub mod scan;
pub mod sweep;

use indexmap::IndexMap;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::{MultiPoly, UPoly};
use crate::roots::{aberth, sort_roots};
use crate::scalar::{cdd_sqrt, cdd_to_c64, grat_to_cdd, rat_to_dd, AlgNum, CDd, Dd, GRat, C64};
use crate::secular::{char_poly, SecularPoly};

pub const REALITY_TOL_REL: f64 = 1e-10;
pub const REALITY_TOL_ABS: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub reality: bool,
    pub max_imag: f64,
    pub params: IndexMap<String, String>,
}

/// Largest pairwise distance.
pub fn spectral_diameter(ev: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in ev.iter().enumerate() {
        for b in &ev[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// `max |Im E| <= max(tol_rel * diameter, 1e-12)`.
pub fn is_real_spectrum(ev: &[C64], tol_rel: f64) -> (bool, f64) {
    let max_imag = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let tol = (tol_rel * spectral_diameter(ev)).max(REALITY_TOL_ABS);
    (max_imag <= tol, max_imag)
}

/// Largest distance from an eigenvalue to the nearest conjugate of another
/// (or itself, when real).
pub fn conjugate_pairing_error(ev: &[C64]) -> f64 {
    let mut used = vec![false; ev.len()];
    let mut worst: f64 = 0.0;
    for i in 0..ev.len() {
        if used[i] {
            continue;
        }
        let target = ev[i].conj();
        let (j, d) = (0..ev.len())
            .filter(|&j| !used[j] && j != i)
            .map(|j| (j, (ev[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((i, f64::INFINITY));
        let self_d = (ev[i] - target).norm();
        used[i] = true;
        if self_d <= d {
            worst = worst.max(self_d);
        } else {
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Roots of an exact rational polynomial in double-double, via its
/// squarefree decomposition; multiplicities are reproduced.
pub fn exact_roots(f: &UPoly) -> Result<Vec<CDd>> {
    let mut out = Vec::new();
    let zero_mult = f.coeffs().iter().take_while(|c| c.is_zero()).count();
    out.extend(std::iter::repeat_n(CDd::new(Dd::zero(), Dd::zero()), zero_mult));
    let f = UPoly::new(f.coeffs()[zero_mult..].to_vec());
    for (factor, mult) in f.squarefree_decomposition() {
        let cs: Vec<CDd> = factor.coeffs().iter().map(|c| CDd::new(rat_to_dd(c), Dd::zero())).collect();
        let rs = aberth(&cs)?;
        for r in rs {
            // real factors have conjugate-symmetric roots; tiny imaginary dust on
            // a root isolated as real is removed by the Sturm count below
            out.extend(std::iter::repeat_n(r, mult));
        }
        let real_count = factor.count_real_roots();
        if real_count == factor.degree() {
            let start = out.len() - factor.degree() * mult;
            for z in &mut out[start..] {
                z.im = Dd::zero();
            }
        }
    }
    Ok(out)
}

/// Roots of the centered polynomial in the shifted energy variable.
/// `even` selects the `s = e^2` route (roots come back as `±sqrt(s)`).
pub fn centered_roots(coeffs: &[AlgNum], even: bool) -> Result<Vec<CDd>> {
    let rat: Option<Vec<_>> = coeffs.iter().map(AlgNum::as_rat).collect();
    if even {
        let half: Vec<AlgNum> = coeffs.iter().step_by(2).cloned().collect();
        let s_roots = centered_roots(&half, false)?;
        let mut out = Vec::with_capacity(2 * s_roots.len());
        for s in s_roots {
            let r = cdd_sqrt(&s);
            out.push(r);
            out.push(-r);
        }
        return Ok(out);
    }
    match rat {
        Some(r) => exact_roots(&UPoly::new(r)),
        None => {
            let cs: Vec<CDd> = coeffs.iter().map(AlgNum::to_cdd).collect();
            aberth(&cs)
        }
    }
}

/// Precomputed secular polynomial of a model, ready to be specialized at
/// many parameter points.
#[derive(Clone, Debug)]
pub struct SecularSolver {
    /// Centered polynomial `det(H - (e + c))` in the free and irrational parameters.
    pub poly: SecularPoly,
    pub free: Vec<String>,
    pub fixed: IndexMap<String, AlgNum>,
    pub even: bool,
}

impl SecularSolver {
    pub fn new(model: &Model) -> Result<Self> {
        let h = model.rational_matrix();
        let c = model.natural_shift().unwrap_or_else(GRat::zero);
        let poly = char_poly(&h).shift(&c)?;
        let even = poly.is_even() && poly.degree() % 2 == 0;
        let fixed: IndexMap<String, AlgNum> =
            model.bound_values().into_iter().filter(|(_, v)| v.as_grat().is_none()).collect();
        Ok(SecularSolver { poly, free: model.free_params(), fixed, even })
    }

    fn bind(&self, free: &[AlgNum]) -> Result<IndexMap<String, AlgNum>> {
        if free.len() != self.free.len() {
            return Err(Error::Input(format!("expected {} free values, got {}", self.free.len(), free.len())));
        }
        let mut v = self.fixed.clone();
        for (k, x) in self.free.iter().zip(free) {
            v.insert(k.clone(), x.clone());
        }
        Ok(v)
    }

    /// Eigenvalues (physical, shift re-added) at the given free values.
    pub fn eigenvalues_at(&self, free: &[AlgNum]) -> Result<Vec<C64>> {
        let values = self.bind(free)?;
        let cs = self.poly.specialize(&values)?;
        let even = self.even && cs.iter().skip(1).step_by(2).all(Zero::is_zero);
        let shift = grat_to_cdd(&self.poly.shift);
        let mut ev: Vec<C64> = centered_roots(&cs, even)?.iter().map(|r| cdd_to_c64(&(r + shift))).collect();
        sort_roots(&mut ev);
        Ok(ev)
    }

    /// Specialized centered polynomial with the free values substituted
    /// exactly (rational points only).
    pub fn specialize_rat(&self, free: &[AlgNum]) -> Result<Option<UPoly>> {
        let values = self.bind(free)?;
        self.poly.specialize_rat(&values)
    }

    /// The polynomial in the free parameters and the spectral variable `e`,
    /// with the fixed values substituted (only for Gaussian-rational fixed values).
    pub fn free_poly(&self) -> Option<MultiPoly> {
        if !self.fixed.is_empty() {
            return None;
        }
        Some(MultiPoly::from_coefficients_in("__e", &self.poly.coeffs))
    }
}

/// Spectrum of a fully bound model.
pub fn eigenvalues(model: &Model) -> Result<SpectrumResult> {
    model.require_bound()?;
    let solver = SecularSolver::new(model)?;
    let ev = solver.eigenvalues_at(&[])?;
    let (reality, max_imag) = is_real_spectrum(&ev, REALITY_TOL_REL);
    let params = model.bound_values().into_iter().map(|(k, v)| (k, v.to_string())).collect();
    Ok(SpectrumResult { eigenvalues: ev, reality, max_imag, params })
}

/// Independent dense-eigensolver spectrum of a fully bound model.
pub fn dense_spectrum(model: &Model) -> Result<Vec<C64>> {
    dense::dense_eigenvalues(&model.float_matrix()?.to_dense())
}

/// Matches two spectra by greedy nearest neighbours and returns the
/// largest distance, relative to `max(1, max |E|)`.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(1.0, f64::max);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap_or((0, f64::INFINITY));
        if j < used.len() {
            used[j] = true;
        }
        worst = worst.max(d);
    }
    worst / scale
}
