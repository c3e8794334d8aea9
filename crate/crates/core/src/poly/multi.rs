use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::upoly::UPoly;
use crate::scalar::{format_grat, format_rat, grat_real, GRat, Rat, Ring};

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the Gaussian rationals in named variables.
///
/// Zero coefficients are never stored. Binary operations on polynomials
/// with different variable lists work over the union of the lists.
#[derive(Clone, Debug)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, GRat>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn constant(c: GRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial(Vec::new()), c);
        }
        MultiPoly { vars: Vec::new(), terms }
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::constant(grat_real(r))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(crate::scalar::rat_int(n))
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial(vec![1]), GRat::one());
        MultiPoly { vars: vec![name.to_string()], terms }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Variables that actually occur with a positive exponent.
    pub fn used_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(k, _)| self.terms.keys().any(|m| m.0[*k] > 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<GRat> {
        match self.terms.len() {
            0 => Some(GRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    pub fn conj(&self) -> Self {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Largest absolute value over real and imaginary coefficient parts.
    pub fn max_abs_coeff(&self) -> Rat {
        self.terms
            .values()
            .flat_map(|c| [c.re.abs(), c.im.abs()])
            .fold(Rat::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.var_index(name) {
            Some(k) => self.terms.keys().map(|m| m.0[k]).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &GRat)> {
        self.terms.iter().next_back()
    }

    fn with_vars(&self, vars: &[String]) -> MultiPoly {
        if vars == self.vars.as_slice() {
            return self.clone();
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("superset"))
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = vec![0u32; vars.len()];
                for (k, &x) in m.0.iter().enumerate() {
                    e[map[k]] = x;
                }
                (Monomial(e), c.clone())
            })
            .collect();
        MultiPoly { vars: vars.to_vec(), terms }
    }

    fn unify(&self, other: &MultiPoly) -> (MultiPoly, MultiPoly) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        (self.with_vars(&vars), other.with_vars(&vars))
    }

    /// Drops variables that no term uses.
    pub fn trimmed(&self) -> MultiPoly {
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&k| self.terms.keys().any(|m| m.0[k] > 0))
            .collect();
        if keep.len() == self.vars.len() {
            return self.clone();
        }
        MultiPoly {
            vars: keep.iter().map(|&k| self.vars[k].clone()).collect(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial(keep.iter().map(|&k| m.0[k]).collect()), c.clone()))
                .collect(),
        }
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, GRat>, m: Monomial, c: GRat) {
        if c.is_zero() {
            return;
        }
        match terms.get_mut(&m) {
            Some(e) => {
                *e = &*e + c;
                if e.is_zero() {
                    terms.remove(&m);
                }
            }
            None => {
                terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &GRat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly { vars: self.vars.clone(), terms: BTreeMap::new() };
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::constant(GRat::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficients as a univariate polynomial in `name`; index = power.
    pub fn coefficients_in(&self, name: &str) -> Vec<MultiPoly> {
        let Some(k) = self.var_index(name) else {
            return vec![self.clone()];
        };
        let deg = self.degree_in(name) as usize;
        let mut out = vec![MultiPoly { vars: self.vars.clone(), terms: BTreeMap::new() }; deg + 1];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let p = e[k] as usize;
            e[k] = 0;
            Self::insert_term(&mut out[p].terms, Monomial(e), c.clone());
        }
        out.into_iter().map(|p| p.trimmed()).collect()
    }

    /// Inverse of [`coefficients_in`](Self::coefficients_in).
    pub fn from_coefficients_in(name: &str, coeffs: &[MultiPoly]) -> MultiPoly {
        let x = MultiPoly::var(name);
        let mut acc = MultiPoly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * &x) + c;
        }
        acc
    }

    /// Replaces variable `name` by `value`.
    pub fn substitute(&self, name: &str, value: &MultiPoly) -> MultiPoly {
        let coeffs = self.coefficients_in(name);
        let mut acc = MultiPoly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        acc.trimmed()
    }

    /// Evaluates in any ring, given a value for every used variable.
    pub fn eval<T: Ring>(
        &self,
        value_of: impl Fn(&str) -> Option<T>,
        coeff: impl Fn(&GRat) -> T,
    ) -> Result<T> {
        let mut values = Vec::with_capacity(self.vars.len());
        for (k, v) in self.vars.iter().enumerate() {
            if self.terms.keys().any(|m| m.0[k] > 0) {
                let x = value_of(v).ok_or_else(|| Error::Input(format!("unbound variable `{v}`")))?;
                values.push(Some(x));
            } else {
                values.push(None);
            }
        }
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (k, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = values[k].as_ref().unwrap();
                    for _ in 0..e {
                        t = t * x.clone();
                    }
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Exact multivariate division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        if d.is_zero() {
            return None;
        }
        let (mut p, d) = self.unify(d);
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let dinv = GRat::one() / dc;
        let mut q = MultiPoly { vars: p.vars.clone(), terms: BTreeMap::new() };
        while let Some((pm, pc)) = p.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !dm.divides(&pm) {
                return None;
            }
            let e: Vec<u32> = pm.0.iter().zip(&dm.0).map(|(a, b)| a - b).collect();
            let c = pc * &dinv;
            let mut t = MultiPoly { vars: p.vars.clone(), terms: BTreeMap::new() };
            t.terms.insert(Monomial(e), c);
            p = &p - &(&t * &d);
            q = &q + &t;
        }
        Some(q.trimmed())
    }

    /// Univariate view with real rational coefficients.
    pub fn to_upoly(&self, name: &str) -> Option<UPoly> {
        let used = self.used_vars();
        if used.iter().any(|v| v != name) || !self.is_real() {
            return None;
        }
        let coeffs = self
            .coefficients_in(name)
            .into_iter()
            .map(|c| c.as_constant().map(|g| g.re))
            .collect::<Option<Vec<_>>>()?;
        Some(UPoly::new(coeffs))
    }

    pub fn from_upoly(name: &str, p: &UPoly) -> MultiPoly {
        let coeffs: Vec<MultiPoly> = p.coeffs().iter().map(|c| MultiPoly::from_rat(c.clone())).collect();
        MultiPoly::from_coefficients_in(name, &coeffs)
    }
}

impl Default for MultiPoly {
    fn default() -> Self {
        MultiPoly::zero()
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl Eq for MultiPoly {}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.unify(rhs);
        for (m, c) in b.terms {
            MultiPoly::insert_term(&mut a.terms, m, c);
        }
        a
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.unify(rhs);
        for (m, c) in b.terms {
            MultiPoly::insert_term(&mut a.terms, m, -c);
        }
        a
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let (a, b) = self.unify(rhs);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                // exponents add under multiplication
                #[allow(clippy::suspicious_arithmetic_impl)]
                let e = Monomial(ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect());
                MultiPoly::insert_term(&mut terms, e, ca * cb);
            }
        }
        MultiPoly { vars: a.vars, terms }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl Zero for MultiPoly {
    fn zero() -> Self {
        MultiPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for MultiPoly {
    fn one() -> Self {
        MultiPoly::constant(GRat::one())
    }
}

fn monomial_string(vars: &[String], m: &Monomial) -> String {
    m.0.iter()
        .zip(vars)
        .filter(|(e, _)| **e > 0)
        .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

/// Writes `coeff * mono` as a signed term; returns (is_negative, body).
pub(crate) fn term_string(c: &GRat, mono: &str) -> (bool, String) {
    let real = c.im.is_zero();
    let imag = c.re.is_zero() && !real;
    if real || imag {
        let v = if real { &c.re } else { &c.im };
        let neg = v.is_negative();
        let a = v.abs();
        let unit = if imag { "i" } else { "" };
        let body = match (a.is_one(), mono.is_empty(), imag) {
            (true, true, false) => "1".to_string(),
            (true, true, true) => "i".to_string(),
            (true, false, false) => mono.to_string(),
            (true, false, true) => format!("i*{mono}"),
            (false, true, _) => {
                if imag {
                    format!("{}*{unit}", format_rat(&a))
                } else {
                    format_rat(&a)
                }
            }
            (false, false, _) => {
                if imag {
                    format!("{}*i*{mono}", format_rat(&a))
                } else {
                    format!("{}*{mono}", format_rat(&a))
                }
            }
        };
        (neg, body)
    } else if mono.is_empty() {
        (false, format!("({})", format_grat(c)))
    } else {
        (false, format!("({})*{mono}", format_grat(c)))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // canonical variable order so output is independent of construction
        let mut vars = self.vars.clone();
        vars.sort();
        let p = self.with_vars(&vars);
        let mut first = true;
        for (m, c) in p.terms.iter().rev() {
            let (neg, body) = term_string(c, &monomial_string(&p.vars, m));
            match (first, neg) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}
