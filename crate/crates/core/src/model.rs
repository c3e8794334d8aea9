//! The four tridiagonal Hamiltonian families, their JSON description,
//! the parity matrix and the PT-symmetry residual.

use std::fmt;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::parse::{parse_expr, parse_poly, parse_rat};
use crate::poly::MultiPoly;
use crate::scalar::{grat, grat_i, grat_real, rat, rat_int, AlgNum, GRat, Rat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gpm,
    Bim,
    Nnim,
    Aom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Gpm => "gpm",
            Family::Bim => "bim",
            Family::Nnim => "nnim",
            Family::Aom => "aom",
        };
        f.write_str(s)
    }
}

/// Sign pattern of the NNIM/BIM couplings: `A` repeats each end's
/// (sup, sub) pair at the mirrored position, `B` swaps it there.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[default]
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AomMode {
    /// single coupling `g`, pair k carries `g^2 k (N-k)`
    G,
    /// `g^2 = 1 - t`
    T,
    /// squared couplings listed from the center pair outwards
    Squared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    #[serde(default = "one_str")]
    pub h: String,
    #[serde(default = "zero_str")]
    pub x0: String,
}

fn one_str() -> String {
    "1".into()
}
fn zero_str() -> String {
    "0".into()
}

/// GPM potential: an expression in `x` (and the parameters) or a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Potential {
    Expr(String),
    Table(Vec<String>),
}

/// Declarative description of one model instance.
///
/// Parameter values are expression strings (`"1/2"`, `"3/4*sqrt(2)"`,
/// `"1/2+1/3 i"`); `null` leaves the parameter free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub dim: usize,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub params: IndexMap<String, Option<String>>,
    /// NNIM couplings (outermost first) as expressions in the parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<String>>,
    /// Explicit GPM diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<AomMode>,
}

impl ModelSpec {
    pub fn new(family: Family, dim: usize) -> Self {
        ModelSpec {
            family,
            dim,
            variant: Variant::A,
            params: IndexMap::new(),
            couplings: None,
            diag: None,
            potential: None,
            lattice: None,
            mode: None,
        }
    }

    pub fn param(mut self, name: &str, value: Option<&str>) -> Self {
        self.params.insert(name.to_string(), value.map(str::to_string));
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// One off-diagonal pair `(H[k][k+1], H[k+1][k])`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pair {
    Explicit { sup: MultiPoly, sub: MultiPoly },
    /// `sup = +c`, `sub = -c` with only `c^2` stored.
    Antisymmetric { square: MultiPoly },
}

impl Pair {
    /// `sup * sub`, the only combination the determinant recurrence needs.
    pub fn product(&self) -> MultiPoly {
        match self {
            Pair::Explicit { sup, sub } => sup * sub,
            Pair::Antisymmetric { square } => -square,
        }
    }

    fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Pair {
        match self {
            Pair::Explicit { sup, sub } => Pair::Explicit { sup: f(sup), sub: f(sub) },
            Pair::Antisymmetric { square } => Pair::Antisymmetric { square: f(square) },
        }
    }
}

/// Exact tridiagonal matrix with polynomial entries in the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTriMatrix {
    pub diag: Vec<MultiPoly>,
    pub pairs: Vec<Pair>,
}

impl SymTriMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn products(&self) -> Vec<MultiPoly> {
        self.pairs.iter().map(Pair::product).collect()
    }

    pub fn trace(&self) -> MultiPoly {
        self.diag.iter().fold(MultiPoly::zero(), |a, d| &a + d)
    }

    /// Substitutes exact values for some of the parameters.
    pub fn substitute(&self, values: &[(String, MultiPoly)]) -> SymTriMatrix {
        let sub = |p: &MultiPoly| values.iter().fold(p.clone(), |acc, (n, v)| acc.substitute(n, v));
        SymTriMatrix {
            diag: self.diag.iter().map(sub).collect(),
            pairs: self.pairs.iter().map(|p| p.map(sub)).collect(),
        }
    }

    pub fn used_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |p: &MultiPoly| {
            for v in p.used_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        for d in &self.diag {
            push(d);
        }
        for p in &self.pairs {
            match p {
                Pair::Explicit { sup, sub } => {
                    push(sup);
                    push(sub);
                }
                Pair::Antisymmetric { square } => push(square),
            }
        }
        out
    }

    /// Entries in the square-root extension; every parameter must be bound.
    pub fn exact_entries(&self, values: &IndexMap<String, AlgNum>) -> Result<AlgTriMatrix> {
        let ev = |p: &MultiPoly| eval_alg(p, values);
        let diag = self.diag.iter().map(ev).collect::<Result<Vec<_>>>()?;
        let mut sup = Vec::new();
        let mut sub = Vec::new();
        for p in &self.pairs {
            match p {
                Pair::Explicit { sup: a, sub: b } => {
                    sup.push(ev(a)?);
                    sub.push(ev(b)?);
                }
                Pair::Antisymmetric { square } => {
                    let sq = ev(square)?;
                    let r = sq.as_rat().ok_or_else(|| {
                        Error::Unsupported("exact square root of an irrational squared coupling".into())
                    })?;
                    let c = AlgNum::sqrt_rat(&r)?;
                    sub.push(-c.clone());
                    sup.push(c);
                }
            }
        }
        Ok(AlgTriMatrix { diag, sup, sub })
    }

    /// Float matrix; `value_of` must bind every used parameter.
    pub fn numeric(&self, value_of: &dyn Fn(&str) -> Option<C64>) -> Result<TriMatrix> {
        let ev = |p: &MultiPoly| p.eval(value_of, crate::scalar::grat_to_c64);
        let diag = self.diag.iter().map(ev).collect::<Result<Vec<_>>>()?;
        let mut sup = Vec::new();
        let mut sub = Vec::new();
        for p in &self.pairs {
            match p {
                Pair::Explicit { sup: a, sub: b } => {
                    sup.push(ev(a)?);
                    sub.push(ev(b)?);
                }
                Pair::Antisymmetric { square } => {
                    let c = ev(square)?.sqrt();
                    sup.push(c);
                    sub.push(-c);
                }
            }
        }
        Ok(TriMatrix { diag, sup, sub })
    }
}

fn eval_alg(p: &MultiPoly, values: &IndexMap<String, AlgNum>) -> Result<AlgNum> {
    p.eval(|n| values.get(n).cloned(), |c| AlgNum::from_grat(c.clone()))
}

/// Fully bound exact matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgTriMatrix {
    pub diag: Vec<AlgNum>,
    pub sup: Vec<AlgNum>,
    pub sub: Vec<AlgNum>,
}

impl AlgTriMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> AlgNum {
        if i == j {
            self.diag[i].clone()
        } else if j == i + 1 {
            self.sup[i].clone()
        } else if i == j + 1 {
            self.sub[j].clone()
        } else {
            AlgNum::zero()
        }
    }

    pub fn to_c64(&self) -> TriMatrix {
        TriMatrix {
            diag: self.diag.iter().map(AlgNum::to_c64).collect(),
            sup: self.sup.iter().map(AlgNum::to_c64).collect(),
            sub: self.sub.iter().map(AlgNum::to_c64).collect(),
        }
    }
}

/// Tridiagonal matrix with float entries.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMatrix {
    pub diag: Vec<C64>,
    pub sup: Vec<C64>,
    pub sub: Vec<C64>,
}

impl TriMatrix {
    pub fn new(diag: Vec<C64>, sup: Vec<C64>, sub: Vec<C64>) -> Result<Self> {
        if diag.is_empty() || sup.len() + 1 != diag.len() || sub.len() + 1 != diag.len() {
            return Err(Error::Input("inconsistent tridiagonal lengths".into()));
        }
        Ok(TriMatrix { diag, sup, sub })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.sup[i]
        } else if i == j + 1 {
            self.sub[j]
        } else {
            C64::zero()
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.sup)
            .chain(&self.sub)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn pt_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.get(n - 1 - j, i).conj() - self.get(n - 1 - i, j);
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// The index-reversal matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityMatrix {
    pub dim: usize,
}

impl ParityMatrix {
    pub fn new(dim: usize) -> Self {
        ParityMatrix { dim }
    }

    pub fn apply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        v.iter().rev().cloned().collect()
    }

    pub fn get(&self, i: usize, j: usize) -> i32 {
        (i + j + 1 == self.dim) as i32
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| C64::new(self.get(i, j) as f64, 0.0))
    }
}

/// Exact PT residual `max |(H^† P - P H)_ij|`; zero iff the bound matrix
/// is PT-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct PtResidual {
    pub is_zero: bool,
    pub value: f64,
}

pub fn pt_residual(h: &AlgTriMatrix) -> PtResidual {
    let n = h.dim();
    let mut is_zero = true;
    let mut value: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            // (H^† P)_ij = conj(H_{n-1-j, i}), (P H)_ij = H_{n-1-i, j}
            let d = h.get(n - 1 - j, i).conj() - h.get(n - 1 - i, j);
            if !d.is_zero() {
                is_zero = false;
                value = value.max(d.to_c64().norm());
            }
        }
    }
    PtResidual { is_zero, value }
}

fn minus_one() -> MultiPoly {
    MultiPoly::from_int(-1)
}

fn laplacean_pairs(n: usize) -> Vec<Pair> {
    (0..n - 1).map(|_| Pair::Explicit { sup: minus_one(), sub: minus_one() }).collect()
}

/// GPM from a potential table: `diag_k = 2 + h^2 V_k`, off-diagonals `-1`.
pub fn build_gpm(n: usize, potential: &[MultiPoly], h: &Rat) -> Result<SymTriMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(format!("GPM needs N >= 2, got {n}")));
    }
    if potential.len() != n {
        return Err(Error::Input(format!("potential table has {} entries for N = {n}", potential.len())));
    }
    let h2 = grat_real(h * h);
    let two = MultiPoly::from_int(2);
    Ok(SymTriMatrix {
        diag: potential.iter().map(|v| &two + &v.scale(&h2)).collect(),
        pairs: laplacean_pairs(n),
    })
}

/// GPM in the folded form: `diag = (-i p1, -i p2, .., [0], .., i p2, i p1)`
/// with the shift 2 and `h^2` absorbed; parameters listed outermost first.
pub fn build_gpm_folded(n: usize, params: &[MultiPoly]) -> Result<SymTriMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(format!("GPM needs N >= 2, got {n}")));
    }
    if params.len() > n / 2 {
        return Err(Error::Input(format!("GPM N = {n} takes at most {} parameters", n / 2)));
    }
    let mi = MultiPoly::constant(grat(Rat::zero(), rat_int(-1)));
    let pi = MultiPoly::constant(grat_i());
    let mut diag = vec![MultiPoly::zero(); n];
    for (k, p) in params.iter().enumerate() {
        diag[k] = &mi * p;
        diag[n - 1 - k] = &pi * p;
    }
    Ok(SymTriMatrix { diag, pairs: laplacean_pairs(n) })
}

/// Lattice points `x_j = x0 + h (j - (N+1)/2)`, `j = 1..N`.
pub fn lattice_points(n: usize, h: &Rat, x0: &Rat) -> Vec<Rat> {
    let mid = rat(n as i64 + 1, 2);
    (1..=n).map(|j| x0 + h * (rat_int(j as i64) - &mid)).collect()
}

/// NNIM: diagonal 2, pair k from each end carries coupling `c_k`
/// (outermost first); odd k give `(-1-c, -1+c)`, even k `(-1+c, -1-c)`.
pub fn build_nnim(n: usize, couplings: &[MultiPoly], variant: Variant) -> Result<SymTriMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(format!("NNIM needs N >= 2, got {n}")));
    }
    let k_max = n / 2;
    if couplings.len() > k_max {
        return Err(Error::Input(format!("NNIM N = {n} takes at most {k_max} couplings, got {}", couplings.len())));
    }
    let one = MultiPoly::from_int(1);
    let mut pairs = Vec::with_capacity(n - 1);
    for j in 1..n {
        let m = j.min(n - j);
        let c = couplings.get(m - 1).cloned().unwrap_or_default();
        let (mut sup, mut sub) = if m % 2 == 1 {
            (&(-&one) - &c, &(-&one) + &c)
        } else {
            (&(-&one) + &c, &(-&one) - &c)
        };
        if variant == Variant::B && j > n - j {
            std::mem::swap(&mut sup, &mut sub);
        }
        pairs.push(Pair::Explicit { sup, sub });
    }
    Ok(SymTriMatrix { diag: vec![MultiPoly::from_int(2); n], pairs })
}

/// BIM: the NNIM with only the outermost coupling.
pub fn build_bim(n: usize, lambda: &MultiPoly, variant: Variant) -> Result<SymTriMatrix> {
    if n < 4 {
        return Err(Error::UnsupportedDimension(format!("BIM needs N >= 4, got {n}")));
    }
    build_nnim(n, std::slice::from_ref(lambda), variant)
}

/// How the AOM couplings are given.
#[derive(Clone, Debug)]
pub enum AomCoupling {
    G(MultiPoly),
    /// `g^2` directly (the `t` form passes `1 - t`).
    GSquared(MultiPoly),
    /// Squared couplings from the center pair outwards.
    Squared(Vec<MultiPoly>),
}

/// AOM: `diag = (1, 3, .., 2N-1)`, antisymmetric pairs `sup = c, sub = -c`.
pub fn build_aom(n: usize, coupling: &AomCoupling) -> Result<SymTriMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(format!("AOM needs N >= 2, got {n}")));
    }
    let k_count = n / 2;
    let squares: Vec<MultiPoly> = match coupling {
        AomCoupling::G(g) => {
            let g2 = g * g;
            (1..n).map(|j| g2.scale(&grat_real(rat_int((j * (n - j)) as i64)))).collect()
        }
        AomCoupling::GSquared(g2) => (1..n).map(|j| g2.scale(&grat_real(rat_int((j * (n - j)) as i64)))).collect(),
        AomCoupling::Squared(vals) => {
            if vals.len() != k_count {
                return Err(Error::Input(format!(
                    "AOM N = {n} takes {k_count} squared couplings, got {}",
                    vals.len()
                )));
            }
            for v in vals {
                if let Some(c) = v.as_constant() {
                    if !c.im.is_zero() || c.re.is_negative() {
                        return Err(Error::Input(format!("negative squared coupling {v}")));
                    }
                }
            }
            (1..n).map(|j| vals[k_count - j.min(n - j)].clone()).collect()
        }
    };
    Ok(SymTriMatrix {
        diag: (0..n).map(|k| MultiPoly::from_int(2 * k as i64 + 1)).collect(),
        pairs: squares.into_iter().map(|square| Pair::Antisymmetric { square }).collect(),
    })
}

/// A model with its exact matrix and parameter bindings.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    pub matrix: SymTriMatrix,
    /// Every declared parameter, in declaration order, with its value.
    pub values: IndexMap<String, Option<AlgNum>>,
}

impl Model {
    pub fn from_spec(spec: &ModelSpec) -> Result<Model> {
        let n = spec.dim;
        if n < 2 {
            return Err(Error::UnsupportedDimension(format!("dim must be >= 2, got {n}")));
        }
        let mut values = IndexMap::new();
        for (name, v) in &spec.params {
            if name == "i" || name == "x" || name == "sqrt" {
                return Err(Error::Input(format!("reserved parameter name `{name}`")));
            }
            let parsed = v.as_deref().map(|s| parse_expr(s).and_then(|e| e.to_alg())).transpose()?;
            values.insert(name.clone(), parsed);
        }
        let names: Vec<MultiPoly> = spec.params.keys().map(|k| MultiPoly::var(k)).collect();
        let exprs = |list: &[String]| list.iter().map(|s| parse_poly(s)).collect::<Result<Vec<_>>>();
        let matrix = match spec.family {
            Family::Gpm => {
                if let Some(d) = &spec.diag {
                    if d.len() != n {
                        return Err(Error::Input(format!("diag has {} entries for N = {n}", d.len())));
                    }
                    SymTriMatrix { diag: exprs(d)?, pairs: laplacean_pairs(n) }
                } else if let Some(pot) = &spec.potential {
                    let lat = spec.lattice.clone().unwrap_or(Lattice { h: one_str(), x0: zero_str() });
                    let h = parse_rat(&lat.h)?;
                    if !h.is_positive() {
                        return Err(Error::Input("lattice spacing h must be positive".into()));
                    }
                    let x0 = parse_rat(&lat.x0)?;
                    let table = match pot {
                        Potential::Table(t) => exprs(t)?,
                        Potential::Expr(e) => {
                            let v = parse_poly(e)?;
                            lattice_points(n, &h, &x0)
                                .into_iter()
                                .map(|x| v.substitute("x", &MultiPoly::from_rat(x)))
                                .collect()
                        }
                    };
                    build_gpm(n, &table, &h)?
                } else {
                    build_gpm_folded(n, &names)?
                }
            }
            Family::Bim => {
                if names.len() != 1 {
                    return Err(Error::Input("BIM takes exactly one parameter".into()));
                }
                build_bim(n, &names[0], spec.variant)?
            }
            Family::Nnim => {
                let c = match &spec.couplings {
                    Some(list) => exprs(list)?,
                    None => names.clone(),
                };
                build_nnim(n, &c, spec.variant)?
            }
            Family::Aom => {
                let mode = spec.mode.unwrap_or_else(|| {
                    if spec.params.contains_key("g") {
                        AomMode::G
                    } else if spec.params.contains_key("t") {
                        AomMode::T
                    } else {
                        AomMode::Squared
                    }
                });
                let one_param = |p: &str| -> Result<MultiPoly> {
                    if spec.params.len() != 1 || !spec.params.contains_key(p) {
                        return Err(Error::Input(format!("AOM `{p}` mode takes the single parameter `{p}`")));
                    }
                    Ok(MultiPoly::var(p))
                };
                let c = match mode {
                    AomMode::G => AomCoupling::G(one_param("g")?),
                    AomMode::T => AomCoupling::GSquared(&MultiPoly::from_int(1) - &one_param("t")?),
                    AomMode::Squared => AomCoupling::Squared(names.clone()),
                };
                let m = build_aom(n, &c)?;
                if mode == AomMode::Squared {
                    for (name, v) in &values {
                        if let Some(r) = v.as_ref().and_then(AlgNum::as_rat) {
                            if r.is_negative() {
                                return Err(Error::Input(format!("negative squared coupling {name} = {r}")));
                            }
                        }
                    }
                }
                m
            }
        };
        for v in matrix.used_vars() {
            if !values.contains_key(&v) {
                return Err(Error::Input(format!("expression uses undeclared parameter `{v}`")));
            }
        }
        Ok(Model { spec: spec.clone(), matrix, values })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn free_params(&self) -> Vec<String> {
        self.values.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k.clone()).collect()
    }

    pub fn bound_values(&self) -> IndexMap<String, AlgNum> {
        self.values
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.clone(), v.clone())))
            .collect()
    }

    /// Copy with additional parameters bound.
    pub fn bind(&self, assign: &[(String, AlgNum)]) -> Result<Model> {
        let mut m = self.clone();
        for (k, v) in assign {
            match m.values.get_mut(k) {
                Some(slot) => *slot = Some(v.clone()),
                None => return Err(Error::Input(format!("unknown parameter `{k}`"))),
            }
        }
        Ok(m)
    }

    /// Matrix with the Gaussian-rational parameter values substituted;
    /// irrational and free parameters stay symbolic.
    pub fn rational_matrix(&self) -> SymTriMatrix {
        let subs: Vec<(String, MultiPoly)> = self
            .values
            .iter()
            .filter_map(|(k, v)| v.as_ref().and_then(AlgNum::as_grat).map(|g| (k.clone(), MultiPoly::constant(g))))
            .collect();
        self.matrix.substitute(&subs)
    }

    /// Exact entries; fails when a parameter is free.
    pub fn exact_matrix(&self) -> Result<AlgTriMatrix> {
        self.require_bound()?;
        self.matrix.exact_entries(&self.bound_values())
    }

    pub fn require_bound(&self) -> Result<()> {
        let free = self.free_params();
        if free.is_empty() {
            Ok(())
        } else {
            Err(Error::Input(format!("unbound parameters: {}", free.join(", "))))
        }
    }

    /// Float matrix with the free parameters set to `free` (in order).
    pub fn float_matrix_at(&self, free: &[f64]) -> Result<TriMatrix> {
        let names = self.free_params();
        if names.len() != free.len() {
            return Err(Error::Input(format!("expected {} free values, got {}", names.len(), free.len())));
        }
        let bound = self.bound_values();
        let lookup = |n: &str| -> Option<C64> {
            if let Some(v) = bound.get(n) {
                return Some(v.to_c64());
            }
            names.iter().position(|m| m == n).map(|k| C64::new(free[k], 0.0))
        };
        self.matrix.numeric(&lookup)
    }

    pub fn float_matrix(&self) -> Result<TriMatrix> {
        self.require_bound()?;
        self.float_matrix_at(&[])
    }

    /// The constant about which the family's spectrum is symmetric
    /// (the mean of the diagonal when that is a constant).
    pub fn natural_shift(&self) -> Option<GRat> {
        let t = self.matrix.trace().as_constant()?;
        Some(t / grat_real(rat_int(self.dim() as i64)))
    }
}

/// N=2 starting matrices; all share `E = 2 ± sqrt(1 - λ^2)`.
pub fn seed_matrices(lambda: &MultiPoly) -> Vec<SymTriMatrix> {
    let mut out = Vec::new();
    let mi = MultiPoly::constant(grat(Rat::zero(), rat_int(-1)));
    let v = vec![&mi * lambda, -&(&mi * lambda)];
    out.push(build_gpm(2, &v, &Rat::one()).expect("N = 2 GPM"));
    // second and third coincide at N = 2
    let nn = build_nnim(2, &[-lambda], Variant::A).expect("N = 2 NNIM");
    out.push(nn.clone());
    out.push(nn);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::scalar::grat_i;

    fn p(s: &str) -> MultiPoly {
        parse_poly(s).unwrap()
    }

    fn sup_sub(m: &SymTriMatrix, j: usize) -> (MultiPoly, MultiPoly) {
        match &m.pairs[j] {
            Pair::Explicit { sup, sub } => (sup.clone(), sub.clone()),
            _ => panic!("explicit pair expected"),
        }
    }

    #[test]
    fn gpm_folded_three() {
        let m = build_gpm_folded(3, &[p("a")]).unwrap();
        assert_eq!(m.diag, vec![p("-i*a"), p("0"), p("i*a")]);
        assert!(m.products().iter().all(|x| *x == p("1")));
        assert!(build_gpm_folded(3, &[p("a"), p("b")]).is_err());
    }

    #[test]
    fn gpm_free_laplacean() {
        let m = build_gpm(2, &[p("0"), p("0")], &Rat::one()).unwrap();
        assert_eq!(m.diag, vec![p("2"), p("2")]);
        assert!(build_gpm(3, &[p("0")], &Rat::one()).is_err());
    }

    #[test]
    fn two_coupling_nnim_layout() {
        // sup/sub per row: (-1+b, -1-b), (-1+a, -1-a), (-1+b, -1-b)
        let m = build_nnim(4, &[p("-b"), p("a")], Variant::A).unwrap();
        assert_eq!(sup_sub(&m, 0), (p("-1+b"), p("-1-b")));
        assert_eq!(sup_sub(&m, 1), (p("-1+a"), p("-1-a")));
        assert_eq!(sup_sub(&m, 2), (p("-1+b"), p("-1-b")));
    }

    #[test]
    fn bim_variants() {
        let a = build_bim(4, &p("l"), Variant::A).unwrap();
        let b = build_bim(4, &p("l"), Variant::B).unwrap();
        assert_eq!(sup_sub(&a, 0), (p("-1-l"), p("-1+l")));
        assert_eq!(sup_sub(&a, 2), (p("-1-l"), p("-1+l")));
        assert_eq!(sup_sub(&b, 2), (p("-1+l"), p("-1-l")));
        assert_eq!(sup_sub(&a, 1), (p("-1"), p("-1")));
        assert!(matches!(build_bim(3, &p("l"), Variant::A), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn nnim_coupling_count() {
        assert!(build_nnim(4, &[p("a"), p("b"), p("c")], Variant::A).is_err());
        assert!(build_nnim(5, &[p("a"), p("b")], Variant::A).is_ok());
    }

    #[test]
    fn aom_ladder() {
        let m = build_aom(4, &AomCoupling::G(p("1"))).unwrap();
        assert_eq!(m.products(), vec![p("-3"), p("-4"), p("-3")]);
        let f = m.numeric(&|_| None).unwrap();
        assert!((f.sup[0].re - 3f64.sqrt()).abs() < 1e-15 && (f.sub[0].re + 3f64.sqrt()).abs() < 1e-15);
        let sq = build_aom(4, &AomCoupling::Squared(vec![p("a"), p("b")])).unwrap();
        assert_eq!(sq.products(), vec![p("-b"), p("-a"), p("-b")]);
        assert!(build_aom(4, &AomCoupling::Squared(vec![p("-1"), p("1")])).is_err());
    }

    #[test]
    fn parity_involution() {
        let pm = ParityMatrix::new(5).to_dense();
        assert_eq!(&pm * &pm, DMatrix::identity(5, 5));
        assert_eq!(pm.transpose(), pm);
    }

    #[test]
    fn pt_residual_detects_broken_corner() {
        let spec = ModelSpec::new(Family::Bim, 6).param("l", Some("1/3"));
        let m = Model::from_spec(&spec).unwrap();
        let mut e = m.exact_matrix().unwrap();
        assert!(pt_residual(&e).is_zero);
        // break one corner to -1 + 2λ
        e.sub[0] = AlgNum::from_rat(rat(-1, 3));
        let r = pt_residual(&e);
        assert!(!r.is_zero && r.value > 0.0);
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = r#"{"family":"nnim","dim":10,"variant":"A","params":{"t":"1/2"},"couplings":["t","t","t","t","t"]}"#;
        let spec = ModelSpec::from_json(s).unwrap();
        assert_eq!(ModelSpec::from_json(&spec.to_json()).unwrap(), spec);
        let m = Model::from_spec(&spec).unwrap();
        assert!(m.free_params().is_empty());
        assert_eq!(m.natural_shift(), Some(grat_real(rat_int(2))));
        let bad = r#"{"family":"nnim","dim":4,"params":{"a":null},"couplings":["q"]}"#;
        assert!(Model::from_spec(&ModelSpec::from_json(bad).unwrap()).is_err());
    }

    #[test]
    fn gpm_potential_on_symmetric_lattice() {
        let s = r#"{"family":"gpm","dim":4,"params":{},"potential":"i*x^3","lattice":{"h":"1/2","x0":"0"}}"#;
        let m = Model::from_spec(&ModelSpec::from_json(s).unwrap()).unwrap();
        let e = m.exact_matrix().unwrap();
        assert!(pt_residual(&e).is_zero);
        // x_1 = -3/4: 2 + h^2 i x^3 = 2 - 27/256 i
        assert_eq!(e.diag[0].as_grat(), Some(grat(rat_int(2), rat(-27, 256))));
        let _ = grat_i();
    }

    #[test]
    fn seeds_have_same_spectrum() {
        for m in seed_matrices(&p("l")) {
            // det(H - E) = E^2 - tr E + det; det = 4 - (1 - l^2) ... identical across seeds
            let det = &(&m.diag[0] * &m.diag[1]) - &m.products()[0];
            assert_eq!(det, p("3 + l^2"));
            assert_eq!(m.trace(), p("4"));
        }
    }
}
