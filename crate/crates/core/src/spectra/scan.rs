//! Reality-domain scans over a two-parameter box.
//!
//! A cell is black when the spectrum is entirely real somewhere on it.
//! In exact mode this is decided line by line: along each cell edge and
//! each cell midline the reality status can only change at real roots of
//! the discriminant, so the lines are cut at those roots and one rational
//! point per piece is classified with an exact real-root count. Thin
//! spikes of the domain are therefore never missed, whatever their width.
//! When the secular polynomial is not available over the rationals the
//! scan falls back to classifying cell centres numerically.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::{discriminant, MultiPoly, UPoly};
use crate::scalar::{rat_int, simplest_rational_in, AlgNum, Rat};
use crate::spectra::{is_real_spectrum, SecularSolver, REALITY_TOL_REL};

pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct DomainScan {
    pub params: Vec<String>,
    /// `[lo, hi]` for each parameter.
    pub bounds: [(f64, f64); 2],
    /// Cells along the first and second parameter.
    pub resolution: (usize, usize),
    /// Row-major over the second parameter: cell `(i, j)` is `mask[j * nx + i]`.
    #[serde(skip)]
    pub mask: Vec<bool>,
    pub boundary_cells: Vec<(usize, usize)>,
    /// Whether the exact line analysis was used.
    pub exact: bool,
}

impl DomainScan {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.resolution.0 + i]
    }

    pub fn cell_size(&self) -> (f64, f64) {
        let (nx, ny) = self.resolution;
        ((self.bounds[0].1 - self.bounds[0].0) / nx as f64, (self.bounds[1].1 - self.bounds[1].0) / ny as f64)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let (dx, dy) = self.cell_size();
        (self.bounds[0].0 + (i as f64 + 0.5) * dx, self.bounds[1].0 + (j as f64 + 0.5) * dy)
    }

    /// Cell containing a point of the box.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (dx, dy) = self.cell_size();
        let fx = ((x - self.bounds[0].0) / dx).floor();
        let fy = ((y - self.bounds[1].0) / dy).floor();
        let (nx, ny) = self.resolution;
        (fx >= 0.0 && fy >= 0.0 && (fx as usize) < nx && (fy as usize) < ny).then_some((fx as usize, fy as usize))
    }

    pub fn black_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
        let (nx, ny) = self.resolution;
        let mut v = Vec::with_capacity(4);
        if i > 0 {
            v.push((i - 1, j));
        }
        if i + 1 < nx {
            v.push((i + 1, j));
        }
        if j > 0 {
            v.push((i, j - 1));
        }
        if j + 1 < ny {
            v.push((i, j + 1));
        }
        v.into_iter()
    }

    /// 4-connected components of the black cells, largest first.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let (nx, ny) = self.resolution;
        let mut seen = vec![false; nx * ny];
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if !self.get(i, j) || seen[j * nx + i] {
                    continue;
                }
                seen[j * nx + i] = true;
                let mut comp = Vec::new();
                let mut stack = vec![(i, j)];
                while let Some((a, b)) = stack.pop() {
                    comp.push((a, b));
                    for (c, d) in self.neighbours(a, b) {
                        if self.get(c, d) && !seen[d * nx + c] {
                            seen[d * nx + c] = true;
                            stack.push((c, d));
                        }
                    }
                }
                out.push(comp);
            }
        }
        out.sort_by_key(|c| std::cmp::Reverse(c.len()));
        out
    }

    /// Binary greyscale PPM (P5): black for a real spectrum, white
    /// otherwise; the top row is the largest value of the second parameter.
    pub fn to_ppm(&self) -> Vec<u8> {
        let (nx, ny) = self.resolution;
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for j in (0..ny).rev() {
            for i in 0..nx {
                out.push(if self.get(i, j) { 0 } else { 255 });
            }
        }
        out
    }

    /// One line per cell: indices, centre coordinates, 1 for real.
    pub fn to_csv(&self) -> String {
        let (nx, ny) = self.resolution;
        let mut out = format!("i,j,{},{},real\n", self.params[0], self.params[1]);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = self.cell_center(i, j);
                out.push_str(&format!("{i},{j},{x},{y},{}\n", u8::from(self.get(i, j))));
            }
        }
        out
    }
}

fn boundary_of(mask: &DomainScan) -> Vec<(usize, usize)> {
    let (nx, ny) = mask.resolution;
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let here = mask.get(i, j);
            if mask.neighbours(i, j).any(|(a, b)| mask.get(a, b) != here) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Scans the two free parameters of `model` over `bounds` on an
/// `nx × ny` cell grid.
pub fn domain_scan(model: &Model, bounds: [(Rat, Rat); 2], resolution: (usize, usize)) -> Result<DomainScan> {
    let free = model.free_params();
    if free.len() > 2 {
        return Err(Error::Unsupported(format!(
            "scan needs exactly 2 free parameters, model has {} ({}); bind the others",
            free.len(),
            free.join(", ")
        )));
    }
    if free.len() < 2 {
        return Err(Error::Input(format!("scan needs exactly 2 free parameters, model has {}", free.len())));
    }
    let (nx, ny) = resolution;
    if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
        return Err(Error::Input(format!("scan resolution must be at least {MIN_RESOLUTION} per axis")));
    }
    if bounds.iter().any(|(lo, hi)| lo >= hi) {
        return Err(Error::Input("scan box needs lo < hi on both axes".into()));
    }
    let solver = SecularSolver::new(model)?;
    let ctx = Ctx { solver, free, bounds, nx, ny };
    let (mask, exact) = match ctx.critical()? {
        Some(c) => (ctx.exact_mask(&c)?, true),
        None => (ctx.sampled_mask()?, false),
    };
    let f = |r: &Rat| r.to_f64().unwrap_or(f64::NAN);
    let mut scan = DomainScan {
        params: ctx.free.clone(),
        bounds: [(f(&ctx.bounds[0].0), f(&ctx.bounds[0].1)), (f(&ctx.bounds[1].0), f(&ctx.bounds[1].1))],
        resolution,
        mask,
        boundary_cells: Vec::new(),
        exact,
    };
    scan.boundary_cells = boundary_of(&scan);
    Ok(scan)
}

struct Ctx {
    solver: SecularSolver,
    free: Vec<String>,
    bounds: [(Rat, Rat); 2],
    nx: usize,
    ny: usize,
}

impl Ctx {
    /// Polynomial in the two parameters whose zero set contains every
    /// point where the reality status can change, or `None` when the exact
    /// route is unavailable.
    fn critical(&self) -> Result<Option<MultiPoly>> {
        let p = &self.solver.poly;
        if !self.solver.fixed.is_empty() || !p.is_real() {
            return Ok(None);
        }
        let c = if self.solver.even {
            // E^2 = s: all E real iff all s real and nonnegative
            let s = p.to_even_var()?;
            let f = MultiPoly::from_coefficients_in("__s", &s.coeffs);
            &discriminant(&f, "__s")? * &s.coeffs[0]
        } else {
            let f = MultiPoly::from_coefficients_in("__e", &p.coeffs);
            discriminant(&f, "__e")?
        };
        Ok(if c.is_zero() { None } else { Some(c) })
    }

    fn point(&self, axis: usize, along: &Rat, fixed: &Rat) -> [AlgNum; 2] {
        let (a, b) = (AlgNum::from_rat(along.clone()), AlgNum::from_rat(fixed.clone()));
        if axis == 0 {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// Reality at a rational point, exactly when the coefficients are rational.
    fn real_at(&self, p: &[AlgNum; 2]) -> Result<bool> {
        match self.solver.specialize_rat(p)? {
            Some(f) => {
                let q = f.squarefree_part();
                Ok(q.count_real_roots() == q.degree())
            }
            None => {
                let ev = self.solver.eigenvalues_at(p)?;
                Ok(is_real_spectrum(&ev, REALITY_TOL_REL).0)
            }
        }
    }

    /// Grid line `k` (in half-cell steps) across the axis other than `axis`:
    /// returns the open sub-intervals (along `axis`) with a real spectrum.
    fn line(&self, crit: &MultiPoly, axis: usize, k: usize) -> Result<Vec<(f64, f64)>> {
        let other = 1 - axis;
        let n_other = if other == 0 { self.nx } else { self.ny };
        let (olo, ohi) = &self.bounds[other];
        let fixed = olo + (ohi - olo) * rat_int(k as i64) / rat_int(2 * n_other as i64);
        let (lo, hi) = self.bounds[axis].clone();
        let g: Option<UPoly> = crit.substitute(&self.free[other], &MultiPoly::from_rat(fixed.clone())).to_upoly(&self.free[axis]);
        let f = |r: &Rat| r.to_f64().unwrap_or(f64::NAN);
        let mut out = Vec::new();
        let g = match g {
            Some(g) if !g.is_zero() => g,
            _ => {
                // the line lies inside the critical set: classify half-cell pieces
                let n = if axis == 0 { self.nx } else { self.ny };
                for s in 0..2 * n {
                    let a = &lo + (&hi - &lo) * rat_int(s as i64) / rat_int(2 * n as i64);
                    let b = &lo + (&hi - &lo) * rat_int(s as i64 + 1) / rat_int(2 * n as i64);
                    let mid = (&a + &b) / rat_int(2);
                    if self.real_at(&self.point(axis, &mid, &fixed))? {
                        out.push((f(&a), f(&b)));
                    }
                }
                return Ok(merge(out));
            }
        };
        let width = (&hi - &lo) / rat_int(1 << 40);
        let roots: Vec<(Rat, Rat)> = g.isolate_real_roots(&width).into_iter().filter(|(a, b)| b > &lo && a < &hi).collect();
        // pieces between consecutive roots, clipped to the box
        let mut left = (lo.clone(), lo.clone());
        for next in roots.iter().cloned().chain(std::iter::once((hi.clone(), hi.clone()))) {
            let (l, r) = (left.1.clone(), next.0.clone());
            if l < r {
                let q = (&r - &l) / rat_int(4);
                let t = simplest_rational_in(&(&l + &q), &(&r - &q));
                if self.real_at(&self.point(axis, &t, &fixed))? {
                    let mid = |x: &(Rat, Rat)| (f(&x.0) + f(&x.1)) / 2.0;
                    out.push((mid(&left), mid(&next)));
                }
            }
            left = next;
        }
        Ok(merge(out))
    }

    fn exact_mask(&self, crit: &MultiPoly) -> Result<Vec<bool>> {
        let (nx, ny) = (self.nx, self.ny);
        // lines of constant second parameter run along axis 0, and vice versa
        let along0: Vec<Vec<(f64, f64)>> = (0..=2 * ny).into_par_iter().map(|k| self.line(crit, 0, k)).collect::<Result<_>>()?;
        let along1: Vec<Vec<(f64, f64)>> = (0..=2 * nx).into_par_iter().map(|k| self.line(crit, 1, k)).collect::<Result<_>>()?;
        let f = |r: &Rat| r.to_f64().unwrap_or(f64::NAN);
        let (x0, x1) = (f(&self.bounds[0].0), f(&self.bounds[0].1));
        let (y0, y1) = (f(&self.bounds[1].0), f(&self.bounds[1].1));
        let xs: Vec<f64> = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| y0 + (y1 - y0) * j as f64 / ny as f64).collect();
        let hits = |ivs: &[(f64, f64)], a: f64, b: f64| ivs.iter().any(|&(p, q)| p < b && q > a);
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let horiz = (2 * j..=2 * j + 2).any(|k| hits(&along0[k], xs[i], xs[i + 1]));
                let vert = (2 * i..=2 * i + 2).any(|k| hits(&along1[k], ys[j], ys[j + 1]));
                mask[j * nx + i] = horiz || vert;
            }
        }
        Ok(mask)
    }

    fn sampled_mask(&self) -> Result<Vec<bool>> {
        let (nx, ny) = (self.nx, self.ny);
        let centre = |axis: usize, k: usize, n: usize| {
            let (lo, hi) = &self.bounds[axis];
            lo + (hi - lo) * rat_int(2 * k as i64 + 1) / rat_int(2 * n as i64)
        };
        (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % nx, idx / nx);
                let p = [AlgNum::from_rat(centre(0, i, nx)), AlgNum::from_rat(centre(1, j, ny))];
                self.real_at(&p)
            })
            .collect()
    }
}

fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}
