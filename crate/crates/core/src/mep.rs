//! Maximal exceptional points: the parameter values at which every
//! eigenvalue collides with every other. They are the common zeros of all
//! non-leading coefficients of the centered secular polynomial; the system
//! is reduced by iterated resultants, solved coordinate by coordinate,
//! recombined, polished and certified.

use std::fmt;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::{resultant, MultiPoly, UPoly};
use crate::roots::aberth;
use crate::scalar::{
    cdd_abs, cdd_to_c64, dd_abs, dd_div, dd_to_f64, dd_to_rat, format_rat, format_sig, grat_to_cdd, rat, CDd, Dd,
    Rat, C64,
};
use crate::secular::{char_poly, SecularPoly};
use crate::spectra::dense::{dense_eigenvalues, norm2};

/// Largest number of unknowns handled by elimination.
pub const MAX_UNKNOWNS: usize = 3;
/// Eigenvalue cluster radius above which a solution is rejected.
pub const CERT_RADIUS: f64 = 1e-4;
/// Acceptance threshold for the polished residuals.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PolySystem {
    pub equations: Vec<MultiPoly>,
    pub unknowns: Vec<String>,
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.equations {
            writeln!(f, "{e} = 0")?;
        }
        Ok(())
    }
}

/// The equations "every non-leading coefficient vanishes", in the
/// polynomial's own variable (centered `E` or `s = E^2`).
pub fn mep_system(p: &SecularPoly) -> PolySystem {
    let p = p.monic();
    let equations: Vec<MultiPoly> = p.coeffs[..p.degree()].iter().filter(|c| !c.is_zero()).cloned().collect();
    PolySystem { equations, unknowns: p.params() }
}

fn normalized(p: MultiPoly) -> MultiPoly {
    match p.leading().map(|(_, c)| c.clone()) {
        Some(c) => p.scale(&(crate::scalar::GRat::from(Rat::from_integer(1.into())) / c)),
        None => p,
    }
}

/// A univariate polynomial in `keep` vanishing at the `keep` coordinate of
/// every solution of `sys`.
pub fn eliminate(sys: &PolySystem, keep: &str) -> Result<UPoly> {
    if !sys.unknowns.iter().any(|u| u == keep) {
        return Err(Error::Input(format!("`{keep}` is not an unknown of the system")));
    }
    let mut eqs: Vec<MultiPoly> = sys.equations.iter().filter(|e| !e.is_zero()).cloned().map(normalized).collect();
    for v in sys.unknowns.iter().filter(|u| *u != keep) {
        let (with, mut next): (Vec<MultiPoly>, Vec<MultiPoly>) = eqs.into_iter().partition(|e| e.degree_in(v) > 0);
        let mut any = false;
        for i in 0..with.len() {
            for j in i + 1..with.len() {
                let r = resultant(&with[i], &with[j], v)?;
                if !r.is_zero() {
                    any = true;
                    let r = normalized(r);
                    if !next.contains(&r) {
                        next.push(r);
                    }
                }
            }
        }
        if with.len() >= 2 && !any {
            return Err(Error::Component(format!(
                "every resultant in `{v}` vanishes identically; the solution set is positive-dimensional (add a symmetry-fixing equation)"
            )));
        }
        eqs = next;
    }
    let mut g: Option<UPoly> = None;
    for e in &eqs {
        let u = e
            .to_upoly(keep)
            .ok_or_else(|| Error::Unsupported("elimination needs real rational coefficients".into()))?;
        if u.is_zero() {
            continue;
        }
        g = Some(match g {
            None => u,
            Some(g) => g.gcd(&u),
        });
    }
    g.ok_or_else(|| Error::Component(format!("no equation constrains `{keep}`; the solution set is positive-dimensional")))
}

/// A real root of an eliminant: exact when rational.
#[derive(Clone, Debug)]
pub struct RealRoot {
    pub exact: Option<Rat>,
    pub value: Dd,
}

/// Real roots of `q`, refined to double-double.
pub fn real_roots(q: &UPoly) -> Vec<RealRoot> {
    let p = q.squarefree_part();
    let dp = p.derivative();
    p.isolate_real_roots(&rat(1, 1_000_000_000_000))
        .into_iter()
        .map(|(lo, hi)| {
            if lo == hi {
                return RealRoot { value: crate::scalar::rat_to_dd(&lo), exact: Some(lo) };
            }
            let mut x = crate::scalar::rat_to_dd(&((&lo + &hi) / rat(2, 1)));
            for _ in 0..4 {
                let d = dp.eval_dd(x);
                if d.is_zero() {
                    break;
                }
                x -= dd_div(p.eval_dd(x), d);
            }
            RealRoot { exact: None, value: x }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Degeneracy {
    /// Collision point (the trace over N).
    pub center: C64,
    /// Largest distance from the center of the roots of the secular
    /// polynomial evaluated at the double-double point.
    pub cluster_radius: f64,
    /// The same for a dense float eigensolve of the float matrix.
    pub dense_radius: f64,
    /// `10 ε^(1/N) ‖H‖`, the expected float scatter of an N-fold block.
    pub dense_bound: f64,
    /// Numerical ranks of `(H - c)^k`, `k = 1..N`.
    pub jordan_rank_profile: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MepSolution {
    pub point: IndexMap<String, Dd>,
    pub exact: IndexMap<String, Option<Rat>>,
    pub residuals: Vec<f64>,
    pub degeneracy: Degeneracy,
}

impl MepSolution {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.point.get(name).map(dd_to_f64)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Decimal string at `digits` significant digits (exact value when known).
    pub fn format_value(&self, name: &str, digits: usize) -> String {
        match (self.exact.get(name), self.point.get(name)) {
            (Some(Some(r)), _) => format_rat(r),
            (_, Some(x)) => format_sig(&dd_to_rat(x), digits),
            _ => String::new(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let point: IndexMap<&String, String> = self.point.keys().map(|k| (k, self.format_value(k, 20))).collect();
        let exact: IndexMap<&String, Option<String>> =
            self.exact.iter().map(|(k, v)| (k, v.as_ref().map(format_rat))).collect();
        let d = &self.degeneracy;
        json!({
            "point": point,
            "exact": exact,
            "residuals": self.residuals,
            "degeneracy": {
                "center": [d.center.re, d.center.im],
                "cluster_radius": d.cluster_radius,
                "dense_radius": d.dense_radius,
                "dense_bound": d.dense_bound,
                "jordan_rank_profile": d.jordan_rank_profile,
            }
        })
    }
}

fn eval_dd(e: &MultiPoly, names: &[String], x: &[Dd]) -> CDd {
    e.eval(
        |n| names.iter().position(|m| m == n).map(|k| CDd::new(x[k], Dd::zero())),
        grat_to_cdd,
    )
    .unwrap_or_else(|_| CDd::new(Dd::from(f64::NAN), Dd::zero()))
}

fn derivative(e: &MultiPoly, v: &str) -> MultiPoly {
    let cs = e.coefficients_in(v);
    let d: Vec<MultiPoly> =
        cs.iter().enumerate().skip(1).map(|(k, c)| c.scale(&crate::scalar::grat_real(crate::scalar::rat_int(k as i64)))).collect();
    MultiPoly::from_coefficients_in(v, &d)
}

fn residuals(sys: &PolySystem, x: &[Dd]) -> Vec<f64> {
    sys.equations.iter().map(|e| dd_to_f64(&cdd_abs(&eval_dd(e, &sys.unknowns, x)))).collect()
}

/// Gauss–Newton on the (possibly overdetermined) system: residuals in
/// double-double, Jacobian in double.
fn polish(sys: &PolySystem, jac: &[Vec<MultiPoly>], x: &mut [Dd]) {
    let m = sys.equations.len();
    let n = x.len();
    for _ in 0..8 {
        let f: Vec<CDd> = sys.equations.iter().map(|e| eval_dd(e, &sys.unknowns, x)).collect();
        let xf: Vec<Dd> = x.to_vec();
        let j = DMatrix::from_fn(m, n, |r, c| cdd_to_c64(&eval_dd(&jac[r][c], &sys.unknowns, &xf)).re);
        let rhs = DVector::from_fn(m, |r, _| -dd_to_f64(&f[r].re));
        let Ok(step) = j.svd(true, true).solve(&rhs, 1e-14) else { return };
        let mut big = 0.0f64;
        for k in 0..n {
            x[k] += Dd::from(step[k]);
            big = big.max(step[k].abs() / dd_to_f64(&dd_abs(x[k])).max(1.0));
        }
        if big < 1e-31 {
            return;
        }
    }
}

/// Whether the system is invariant (up to sign per equation) under
/// negating every unknown.
fn odd_symmetric(sys: &PolySystem) -> bool {
    sys.equations.iter().all(|e| {
        let f = sys.unknowns.iter().fold(e.clone(), |acc, v| acc.substitute(v, &-MultiPoly::var(v)));
        f == *e || f == -e.clone()
    })
}

/// Certificate of an N-fold collision at a bound model.
pub fn certify(model: &Model) -> Result<Degeneracy> {
    model.require_bound()?;
    let n = model.dim();
    let c = model
        .natural_shift()
        .ok_or_else(|| Error::Unsupported("the trace is not constant; no collision center".into()))?;
    let center = grat_to_cdd(&c);
    // primary route: roots of det(H - E) at the double-double point
    let values = model.bound_values();
    let h = char_poly(&model.matrix).shift(&c)?;
    let cs: Vec<CDd> = h
        .coeffs
        .iter()
        .map(|p| p.eval(|v| values.get(v).map(|a| a.to_cdd()), grat_to_cdd))
        .collect::<Result<_>>()?;
    let roots = aberth(&cs)?;
    let cluster_radius = roots.iter().map(|z| dd_to_f64(&cdd_abs(z))).fold(0.0, f64::max);
    let dense = model.float_matrix()?.to_dense();
    let c64 = cdd_to_c64(&center);
    let ev = dense_eigenvalues(&dense)?;
    let dense_radius = ev.iter().map(|z| (z - c64).norm()).fold(0.0, f64::max);
    let hn = norm2(&dense);
    let dense_bound = 10.0 * (f64::EPSILON / 2.0).powf(1.0 / n as f64) * hn;
    let a = &dense - DMatrix::<C64>::identity(n, n) * c64;
    let an = norm2(&a).max(1.0);
    let mut pow = DMatrix::<C64>::identity(n, n);
    let mut profile = Vec::with_capacity(n);
    for k in 1..=n {
        pow = &pow * &a;
        let sv = pow.clone().svd(false, false).singular_values;
        let tol = 1e-8 * an.powi(k as i32);
        profile.push(sv.iter().filter(|&&s| s > tol).count());
    }
    Ok(Degeneracy { center: c64, cluster_radius, dense_radius, dense_bound, jordan_rank_profile: profile })
}

fn key_order(a: &MepSolution, b: &MepSolution) -> std::cmp::Ordering {
    let last = |s: &MepSolution| s.point.values().last().map(dd_to_f64).unwrap_or(0.0);
    last(b).abs().total_cmp(&last(a).abs()).then(last(b).total_cmp(&last(a)))
}

/// All real maximal exceptional points of the model's free parameters.
pub fn solve_mep(model: &Model) -> Result<Vec<MepSolution>> {
    let free = model.free_params();
    if free.len() > MAX_UNKNOWNS {
        return Err(Error::Unsupported(format!(
            "elimination handles at most {MAX_UNKNOWNS} unknowns, model has {}; bind some parameters",
            free.len()
        )));
    }
    let bound = model.bound_values();
    if bound.values().any(|v| v.as_grat().is_none()) {
        return Err(Error::Unsupported("MEP elimination needs rational values for the bound parameters".into()));
    }
    let c = model
        .natural_shift()
        .ok_or_else(|| Error::Unsupported("the trace is not constant; no collision center".into()))?;
    let p = char_poly(&model.rational_matrix()).shift(&c)?;
    let p = if p.is_even() && p.degree() % 2 == 0 { p.to_even_var()? } else { p };
    let mut sys = mep_system(&p);
    // order the unknowns as declared
    sys.unknowns = free.iter().filter(|f| sys.unknowns.contains(f)).cloned().collect();
    if free.is_empty() {
        return Ok(if sys.equations.is_empty() {
            vec![MepSolution {
                point: IndexMap::new(),
                exact: IndexMap::new(),
                residuals: Vec::new(),
                degeneracy: certify(model)?,
            }]
        } else {
            Vec::new()
        });
    }
    if sys.unknowns.len() < free.len() {
        return Err(Error::Component(format!(
            "parameters {} do not enter the secular polynomial; the solution set is positive-dimensional",
            free.iter().filter(|f| !sys.unknowns.contains(f)).cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    let names = sys.unknowns.clone();
    let per_var: Vec<Vec<RealRoot>> =
        names.iter().map(|v| eliminate(&sys, v).map(|q| real_roots(&q))).collect::<Result<_>>()?;
    let jac: Vec<Vec<MultiPoly>> =
        sys.equations.iter().map(|e| names.iter().map(|v| derivative(e, v)).collect()).collect();
    let scale = sys.equations.iter().map(|e| e.max_abs_coeff().to_f64().unwrap_or(1.0)).fold(1.0, f64::max);

    let mut found: Vec<(Vec<Dd>, Vec<Option<Rat>>)> = Vec::new();
    let mut idx = vec![0usize; names.len()];
    if per_var.iter().all(|r| !r.is_empty()) {
        'outer: loop {
            let combo: Vec<&RealRoot> = idx.iter().enumerate().map(|(k, &i)| &per_var[k][i]).collect();
            let mut x: Vec<Dd> = combo.iter().map(|r| r.value).collect();
            let exact: Vec<Option<Rat>> = combo.iter().map(|r| r.exact.clone()).collect();
            let size = x.iter().map(|v| dd_to_f64(&dd_abs(*v))).fold(1.0, f64::max);
            let screen = residuals(&sys, &x).into_iter().fold(0.0, f64::max);
            if screen <= 1e-6 * scale * size.powi(4) {
                let all_exact = exact.iter().all(Option::is_some);
                let exact_ok = all_exact && {
                    let vals: IndexMap<&String, Rat> = names.iter().zip(&exact).map(|(n, r)| (n, r.clone().unwrap())).collect();
                    sys.equations.iter().all(|e| {
                        e.eval(|n| vals.get(&n.to_string()).map(|r| crate::scalar::grat_real(r.clone())), |g| g.clone())
                            .map(|v| v.is_zero())
                            .unwrap_or(false)
                    })
                };
                if !all_exact {
                    polish(&sys, &jac, &mut x);
                }
                let res = residuals(&sys, &x).into_iter().fold(0.0, f64::max);
                if (all_exact && exact_ok) || (!all_exact && res <= RESIDUAL_TOL) {
                    let dup = found.iter().any(|(y, _)| {
                        y.iter().zip(&x).all(|(a, b)| dd_to_f64(&dd_abs(*a - *b)) <= 1e-10 * dd_to_f64(&dd_abs(*a)).max(1.0))
                    });
                    if !dup {
                        found.push((x, if all_exact { exact } else { vec![None; names.len()] }));
                    }
                }
            }
            // next combination
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < per_var[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
    }

    if odd_symmetric(&sys) {
        let partners: Vec<(Vec<Dd>, Vec<Option<Rat>>)> = found
            .iter()
            .map(|(x, e)| (x.iter().map(|v| -*v).collect(), e.iter().map(|r| r.as_ref().map(|r| -r)).collect()))
            .collect();
        for p in partners {
            let dup = found.iter().any(|(y, _)| {
                y.iter().zip(&p.0).all(|(a, b)| dd_to_f64(&dd_abs(*a - *b)) <= 1e-10 * dd_to_f64(&dd_abs(*a)).max(1.0))
            });
            if !dup {
                found.push(p);
            }
        }
    }

    let mut out = Vec::with_capacity(found.len());
    for (x, exact) in found {
        let assign: Vec<(String, crate::scalar::AlgNum)> = names
            .iter()
            .zip(&x)
            .zip(&exact)
            .map(|((n, v), e)| {
                let r = e.clone().unwrap_or_else(|| dd_to_rat(v));
                (n.clone(), crate::scalar::AlgNum::from_rat(r))
            })
            .collect();
        let degeneracy = certify(&model.bind(&assign)?)?;
        if degeneracy.cluster_radius > CERT_RADIUS {
            return Err(Error::Certification(format!(
                "eigenvalue cluster radius {:.3e} at a polished elimination root exceeds {CERT_RADIUS:e}",
                degeneracy.cluster_radius
            )));
        }
        out.push(MepSolution {
            residuals: residuals(&sys, &x),
            point: names.iter().cloned().zip(x).collect(),
            exact: names.iter().cloned().zip(exact).collect(),
            degeneracy,
        });
    }
    out.sort_by(key_order);
    Ok(out)
}
