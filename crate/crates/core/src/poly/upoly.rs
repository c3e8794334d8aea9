//! Exact univariate polynomials over the rationals: Euclidean algorithm,
//! squarefree decomposition and Sturm-sequence real-root isolation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::multi::term_string;
use crate::scalar::{bigint_sign, grat_real, rat_to_dd, simplest_rational_in, Dd, Rat};

/// Coefficients stored low power first; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<Rat>,
}

impl UPoly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect())
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly { c: vec![Rat::one()] }
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        UPoly { c: vec![Rat::zero(), Rat::one()] }
    }

    pub fn constant(r: Rat) -> Self {
        Self::new(vec![r])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(self.c.iter().map(|x| x * r).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rat::one() / self.lead()))
    }

    pub fn add(&self, o: &UPoly) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new(
            (0..n)
                .map(|k| {
                    let a = self.c.get(k).cloned().unwrap_or_else(Rat::zero);
                    let b = o.c.get(k).cloned().unwrap_or_else(Rat::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, o: &UPoly) -> Self {
        self.add(&o.scale(&-Rat::one()))
    }

    pub fn mul(&self, o: &UPoly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * Rat::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.c.clone();
        let dl = d.lead();
        let dd = d.degree();
        if r.len() < d.c.len() {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Rat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / &dl;
            if !f.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] -= &f * b;
                }
            }
            q[k] = f;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &UPoly) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            // keep sizes in check
            b = r.primitive();
        }
        a.monic()
    }

    /// Scaled to coprime integer coefficients with positive leading term.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = self.c.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let sign = if ints.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        Self::new(ints.into_iter().map(|x| Rat::from_integer(x * &sign / &g)).collect())
    }

    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        self.primitive().c.iter().map(|x| x.to_integer()).collect()
    }

    pub fn squarefree_part(&self) -> Self {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's algorithm: `self = lead * prod f_k^k` with each `f_k` squarefree
    /// and pairwise coprime. Returns the nonconstant factors with multiplicities.
    pub fn squarefree_decomposition(&self) -> Vec<(UPoly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut k = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            k += 1;
        }
        out
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.c.iter().rev().fold(Rat::zero(), |acc, a| acc * x + a)
    }

    pub fn sign_at(&self, x: &Rat) -> i32 {
        IntPoly::from_upoly(self).sign_at(x)
    }

    pub fn eval_dd(&self, x: Dd) -> Dd {
        self.c.iter().rev().fold(Dd::from(0.0), |acc, a| acc * x + rat_to_dd(a))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * x + a.to_f64().unwrap_or(f64::NAN))
    }

    /// Strict upper bound on the modulus of every root (Cauchy).
    pub fn root_bound(&self) -> Rat {
        let l = self.lead().abs();
        let m = self.c[..self.degree()]
            .iter()
            .map(|a| a.abs() / &l)
            .fold(Rat::zero(), |a, b| if b > a { b } else { a });
        Rat::one() + m
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            // next term is -rem, rescaled by a positive factor to keep sizes small
            let p = r.primitive();
            let p = if r.lead().is_positive() { p.scale(&-Rat::one()) } else { p };
            seq.push(p);
        }
        seq.pop();
        seq
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        let seq = self.sturm_sequence();
        let at = |neg: bool| {
            variations(seq.iter().map(|p| {
                let s = if p.lead().is_positive() { 1 } else { -1 };
                if neg && p.degree() % 2 == 1 {
                    -s
                } else {
                    s
                }
            }))
        };
        at(true) - at(false)
    }

    /// Distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots_in(&self, seq: &[UPoly], a: &Rat, b: &Rat) -> usize {
        let ints: Vec<IntPoly> = seq.iter().map(IntPoly::from_upoly).collect();
        count_in(&ints, a, b)
    }

    /// Disjoint intervals each containing exactly one real root, of width
    /// at most `width`, in increasing order. Exact rational roots come back
    /// as degenerate intervals.
    pub fn isolate_real_roots(&self, width: &Rat) -> Vec<(Rat, Rat)> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let p = self.squarefree_part();
        if p.degree() == 0 {
            return Vec::new();
        }
        let seq: Vec<IntPoly> = p.sturm_sequence().iter().map(IntPoly::from_upoly).collect();
        let pi = &seq[0];
        let b = p.root_bound();
        let mut stack = vec![(-b.clone(), b)];
        let mut found = Vec::new();
        while let Some((lo, hi)) = stack.pop() {
            let n = count_in(&seq, &lo, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 {
                let (a, b) = refine_int(pi, lo, hi, width);
                // a rational root shows up as the simplest rational of its interval
                let r = simplest_rational_in(&a, &b);
                found.push(if pi.sign_at(&r) == 0 { (r.clone(), r) } else { (a, b) });
                continue;
            }
            let mid = split_point(pi, &lo, &hi);
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        found.sort_by(|x, y| x.0.cmp(&y.0));
        found
    }

    /// Shrinks `(lo, hi]`, which holds exactly one simple root, by bisection.
    pub fn refine(&self, lo: Rat, hi: Rat, width: &Rat) -> (Rat, Rat) {
        refine_int(&IntPoly::from_upoly(self), lo, hi, width)
    }

    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let (neg, body) = term_string(&grat_real(a.clone()), &mono);
            match (s.is_empty(), neg) {
                (true, false) => s.push_str(&body),
                (true, true) => s.push_str(&format!("-{body}")),
                (false, false) => s.push_str(&format!(" + {body}")),
                (false, true) => s.push_str(&format!(" - {body}")),
            }
        }
        s
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_in("x"))
    }
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// A point strictly inside `(lo, hi)` that is not a root of `p`.
fn split_point(p: &IntPoly, lo: &Rat, hi: &Rat) -> Rat {
    let w = hi - lo;
    for (n, d) in [(1i64, 2i64), (7, 16), (9, 16), (5, 16), (11, 16), (3, 8), (5, 8)] {
        let m = lo + &w * Rat::new(BigInt::from(n), BigInt::from(d));
        if p.sign_at(&m) != 0 {
            return m;
        }
    }
    // at most deg(p) roots, so one of many dyadic points works
    let mut den = 32i64;
    loop {
        for num in 1..den {
            let m = lo + &w * Rat::new(BigInt::from(num), BigInt::from(den));
            if p.sign_at(&m) != 0 {
                return m;
            }
        }
        den *= 2;
    }
}

/// Positive multiple of a rational polynomial with integer coefficients,
/// for sign evaluation without rational normalization.
struct IntPoly {
    c: Vec<BigInt>,
}

impl IntPoly {
    fn from_upoly(p: &UPoly) -> Self {
        let l = p.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        IntPoly { c: p.c.iter().map(|x| x.numer() * (&l / x.denom())).collect() }
    }

    /// Sign of `p(n/d)` from `sum c_k n^k d^(deg-k)`, `d > 0`.
    fn sign_at(&self, x: &Rat) -> i32 {
        let (n, d) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut dp = BigInt::one();
        for a in self.c.iter().rev() {
            acc = acc * n + a * &dp;
            dp *= d;
        }
        bigint_sign(&acc)
    }
}

fn count_in(seq: &[IntPoly], a: &Rat, b: &Rat) -> usize {
    let va = variations(seq.iter().map(|p| p.sign_at(a)));
    let vb = variations(seq.iter().map(|p| p.sign_at(b)));
    va.saturating_sub(vb)
}

fn refine_int(p: &IntPoly, mut lo: Rat, mut hi: Rat, width: &Rat) -> (Rat, Rat) {
    if p.sign_at(&hi) == 0 {
        return (hi.clone(), hi);
    }
    let two = Rat::from_integer(BigInt::from(2));
    let mut slo = p.sign_at(&lo);
    if slo == 0 {
        // the root sits strictly inside; nudge the open end
        let eps = (&hi - &lo) / Rat::from_integer(BigInt::from(1024));
        lo = &lo + eps;
        slo = p.sign_at(&lo);
        if slo == 0 {
            return (lo.clone(), lo);
        }
    }
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        match p.sign_at(&mid) {
            0 => return (mid.clone(), mid),
            s if s == slo => lo = mid,
            _ => hi = mid,
        }
    }
    (lo, hi)
}
