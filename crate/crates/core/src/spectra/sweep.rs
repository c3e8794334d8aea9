use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::{format_rat, rat_int, AlgNum, Rat, C64};
use crate::spectra::{is_real_spectrum, SecularSolver, SpectrumResult, REALITY_TOL_REL};

/// Minimum eigenvalue gap, relative to `max(1, diameter)`, below which a
/// sweep point is reported as a collision.
pub const COLLISION_GAP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct CollisionEvent {
    pub value: f64,
    pub min_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub param: String,
    /// Exact parameter values along the path.
    #[serde(skip)]
    pub path: Vec<Rat>,
    pub values: Vec<f64>,
    pub spectra: Vec<SpectrumResult>,
    pub collision_events: Vec<CollisionEvent>,
}

fn min_gap(ev: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for (i, a) in ev.iter().enumerate() {
        for b in &ev[i + 1..] {
            g = g.min((a - b).norm());
        }
    }
    g
}

/// Spectra along `steps` equally spaced exact values of the single free
/// parameter, `lo` and `hi` included.
pub fn sweep(model: &Model, lo: &Rat, hi: &Rat, steps: usize) -> Result<SweepResult> {
    let free = model.free_params();
    if free.len() != 1 {
        return Err(Error::Input(format!("sweep needs exactly one free parameter, model has {}", free.len())));
    }
    if steps < 2 || lo >= hi {
        return Err(Error::Input("sweep needs lo < hi and at least 2 steps".into()));
    }
    let solver = SecularSolver::new(model)?;
    let denom = rat_int(steps as i64 - 1);
    let path: Vec<Rat> = (0..steps).map(|k| lo + (hi - lo) * rat_int(k as i64) / &denom).collect();
    let spectra = path
        .par_iter()
        .map(|t| {
            let ev = solver.eigenvalues_at(&[AlgNum::from_rat(t.clone())])?;
            let (reality, max_imag) = is_real_spectrum(&ev, REALITY_TOL_REL);
            let mut params = indexmap::IndexMap::new();
            params.insert(free[0].clone(), format_rat(t));
            Ok(SpectrumResult { eigenvalues: ev, reality, max_imag, params })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = path.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect();
    let collision_events = spectra
        .iter()
        .zip(&values)
        .filter_map(|(s, &v)| {
            let g = min_gap(&s.eigenvalues);
            let scale = crate::spectra::spectral_diameter(&s.eigenvalues).max(1.0);
            (g < COLLISION_GAP * scale).then_some(CollisionEvent { value: v, min_gap: g })
        })
        .collect();
    Ok(SweepResult { param: free[0].clone(), path, values, spectra, collision_events })
}

impl SweepResult {
    /// Columns: parameter, Re(E_1..N), Im(E_1..N).
    pub fn to_csv(&self) -> String {
        let n = self.spectra.first().map_or(0, |s| s.eigenvalues.len());
        let mut out = String::from(&self.param);
        for k in 1..=n {
            out.push_str(&format!(",re{k}"));
        }
        for k in 1..=n {
            out.push_str(&format!(",im{k}"));
        }
        out.push('\n');
        for (v, s) in self.values.iter().zip(&self.spectra) {
            out.push_str(&format!("{v}"));
            for e in &s.eigenvalues {
                out.push_str(&format!(",{}", e.re));
            }
            for e in &s.eigenvalues {
                out.push_str(&format!(",{}", e.im));
            }
            out.push('\n');
        }
        out
    }
}
