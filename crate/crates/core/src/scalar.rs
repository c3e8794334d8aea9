//! Exact and extended-precision scalars.
//!
//! `Rat` and `GRat` are the exact coefficient domains (rationals and
//! Gaussian rationals). `AlgNum` extends them by square roots of rationals,
//! which is enough to bind parameters such as `3/4*sqrt(2)` exactly.
//! `Dd` is a double-double float used by the root finders.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type GRat = Complex<Rat>;
pub type Dd = TwoFloat;
pub type CDd = Complex<Dd>;
pub type C64 = Complex<f64>;

/// Commutative ring operations shared by every coefficient type used in
/// polynomial evaluation.
pub trait Ring:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Zero + One
{
}

impl<T> Ring for T where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> + Zero + One
{
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn grat(re: Rat, im: Rat) -> GRat {
    Complex::new(re, im)
}

pub fn grat_real(re: Rat) -> GRat {
    Complex::new(re, Rat::zero())
}

pub fn grat_i() -> GRat {
    Complex::new(Rat::zero(), Rat::one())
}

pub fn is_real(g: &GRat) -> bool {
    g.im.is_zero()
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Gaussian rational in the `p/q+r/s i` layout used by the JSON documents.
pub fn format_grat(g: &GRat) -> String {
    match (g.re.is_zero(), g.im.is_zero()) {
        (_, true) => format_rat(&g.re),
        (true, false) => format!("{} i", format_rat(&g.im)),
        (false, false) => {
            let sign = if g.im.is_negative() { '-' } else { '+' };
            format!("{}{}{} i", format_rat(&g.re), sign, format_rat(&g.im.abs()))
        }
    }
}

/// Parses a decimal literal (`1.25`, `-3e-2`, `7`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rat> {
    let bad = || Error::Input(format!("malformed number `{s}`"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rat::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rat::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Rounds a rational to `digits` significant decimal digits.
pub fn format_sig(r: &Rat, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Estimate the decimal exponent, then correct.
    let mut e = (a.numer().bits() as i64 - a.denom().bits() as i64) * 30103 / 100000;
    let ten = Rat::from_integer(BigInt::from(10));
    let pow10 = |k: i64| -> Rat {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            Rat::one() / num_traits::pow(ten.clone(), (-k) as usize)
        }
    };
    while a >= pow10(e + 1) {
        e += 1;
    }
    while a < pow10(e) {
        e -= 1;
    }
    let scaled = &a * pow10(digits as i64 - 1 - e);
    let mut m = scaled.round().to_integer();
    if m >= num_traits::pow(BigInt::from(10), digits) {
        m /= 10;
        e += 1;
    }
    let ds = m.to_string();
    let body = if (-5..digits as i64).contains(&e) {
        if e >= 0 {
            let (ip, fp) = ds.split_at(e as usize + 1);
            if fp.is_empty() {
                ip.to_string()
            } else {
                format!("{ip}.{fp}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), ds)
        }
    } else {
        let (h, t) = ds.split_at(1);
        format!("{h}.{t}e{e}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Largest square dividing `n` and the squarefree rest: `n = s^2 * f`.
fn square_split(mut n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut f = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        let mut k = 0;
        while n.is_multiple_of(p) {
            n /= p;
            k += 1;
        }
        s *= p.pow(k / 2);
        if k % 2 == 1 {
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, f * n)
}

/// Element of a multiquadratic extension: `sum_d c_d * sqrt(d)` with
/// squarefree radicands `d >= 1` and Gaussian-rational `c_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgNum {
    terms: BTreeMap<u64, GRat>,
}

impl AlgNum {
    pub fn from_grat(g: GRat) -> Self {
        let mut terms = BTreeMap::new();
        if !g.is_zero() {
            terms.insert(1, g);
        }
        AlgNum { terms }
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::from_grat(grat_real(r))
    }

    /// Exact square root of a real rational.
    pub fn sqrt_rat(r: &Rat) -> Result<Self> {
        if r.is_zero() {
            return Ok(Self::zero());
        }
        let neg = r.is_negative();
        let a = r.abs();
        // sqrt(p/q) = sqrt(p*q)/q
        let pq = a.numer() * a.denom();
        let pq = pq
            .to_u64()
            .ok_or_else(|| Error::Input("radicand too large for exact square root".into()))?;
        let (s, f) = square_split(pq);
        let coef = Rat::new(BigInt::from(s), a.denom().clone());
        let c = if neg { grat(Rat::zero(), coef) } else { grat_real(coef) };
        let mut terms = BTreeMap::new();
        terms.insert(f, c);
        Ok(AlgNum { terms })
    }

    /// The value as a Gaussian rational, when no radical survives.
    pub fn as_grat(&self) -> Option<GRat> {
        match self.terms.len() {
            0 => Some(GRat::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.as_grat().filter(is_real).map(|g| g.re)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(is_real)
    }

    pub fn conj(&self) -> Self {
        AlgNum {
            terms: self.terms.iter().map(|(d, c)| (*d, c.conj())).collect(),
        }
    }

    pub fn to_cdd(&self) -> CDd {
        let mut acc = CDd::new(Dd::zero(), Dd::zero());
        for (d, c) in &self.terms {
            let root = Dd::from(*d as f64).sqrt();
            acc += grat_to_cdd(c) * CDd::new(root, Dd::zero());
        }
        acc
    }

    pub fn to_c64(&self) -> C64 {
        cdd_to_c64(&self.to_cdd())
    }
}

impl fmt::Display for AlgNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(d, c)| {
                if *d == 1 {
                    format_grat(c)
                } else {
                    format!("({})*sqrt({d})", format_grat(c))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Zero for AlgNum {
    fn zero() -> Self {
        AlgNum { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for AlgNum {
    fn one() -> Self {
        Self::from_rat(Rat::one())
    }
}

impl Add for AlgNum {
    type Output = AlgNum;
    fn add(mut self, rhs: AlgNum) -> AlgNum {
        for (d, c) in rhs.terms {
            let e = self.terms.entry(d).or_insert_with(GRat::zero);
            *e = &*e + c;
            if e.is_zero() {
                self.terms.remove(&d);
            }
        }
        self
    }
}

impl Neg for AlgNum {
    type Output = AlgNum;
    fn neg(self) -> AlgNum {
        AlgNum {
            terms: self.terms.into_iter().map(|(d, c)| (d, -c)).collect(),
        }
    }
}

impl Sub for AlgNum {
    type Output = AlgNum;
    fn sub(self, rhs: AlgNum) -> AlgNum {
        self + (-rhs)
    }
}

impl Mul for AlgNum {
    type Output = AlgNum;
    fn mul(self, rhs: AlgNum) -> AlgNum {
        let mut out = AlgNum::zero();
        for (d1, c1) in &self.terms {
            for (d2, c2) in &rhs.terms {
                // sqrt(d1)*sqrt(d2) = g*sqrt(d1*d2/g^2), g = gcd(d1, d2)
                let g = d1.gcd(d2);
                let d = (d1 / g) * (d2 / g);
                let c = c1 * c2 * grat_real(rat_int(g as i64));
                let mut t = BTreeMap::new();
                t.insert(d, c);
                out = out + AlgNum { terms: t };
            }
        }
        out
    }
}

pub fn rat_to_dd(r: &Rat) -> Dd {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return Dd::from(hi);
    }
    let rest = r - Rat::from_float(hi).unwrap_or_else(Rat::zero);
    let lo = rest.to_f64().unwrap_or(0.0);
    Dd::from(hi) + Dd::from(lo)
}

pub fn grat_to_cdd(g: &GRat) -> CDd {
    CDd::new(rat_to_dd(&g.re), rat_to_dd(&g.im))
}

pub fn grat_to_c64(g: &GRat) -> C64 {
    C64::new(g.re.to_f64().unwrap_or(f64::NAN), g.im.to_f64().unwrap_or(f64::NAN))
}

pub fn dd_to_f64(x: &Dd) -> f64 {
    x.hi() + x.lo()
}

pub fn cdd_to_c64(z: &CDd) -> C64 {
    C64::new(dd_to_f64(&z.re), dd_to_f64(&z.im))
}

pub fn c64_to_cdd(z: &C64) -> CDd {
    CDd::new(Dd::from(z.re), Dd::from(z.im))
}

/// Exact rational value of a double-double.
pub fn dd_to_rat(x: &Dd) -> Rat {
    let hi = Rat::from_float(x.hi()).unwrap_or_else(Rat::zero);
    let lo = Rat::from_float(x.lo()).unwrap_or_else(Rat::zero);
    hi + lo
}

pub fn dd_abs(x: Dd) -> Dd {
    if x < Dd::zero() {
        -x
    } else {
        x
    }
}

pub fn cdd_abs(z: &CDd) -> Dd {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Double-double quotient with one residual correction; the plain `/` of
/// `TwoFloat` is only accurate to about double precision.
pub fn dd_div(a: Dd, b: Dd) -> Dd {
    let q = a / b;
    let r = a - q * b;
    q + r / b
}

/// Principal square root in double-double precision.
pub fn cdd_sqrt(z: &CDd) -> CDd {
    let r = cdd_abs(z);
    if r == Dd::zero() {
        return CDd::new(Dd::zero(), Dd::zero());
    }
    let two = Dd::from(2.0);
    if z.re >= Dd::zero() {
        let t = ((r + z.re) / two).sqrt();
        CDd::new(t, dd_div(z.im, two * t))
    } else {
        let t = ((r - z.re) / two).sqrt();
        let t_signed = if z.im < Dd::zero() { -t } else { t };
        CDd::new(dd_div(dd_abs(z.im), two * t), t_signed)
    }
}

/// The simplest rational (smallest denominator) in the closed interval
/// `[lo, hi]`, via continued fractions.
pub fn simplest_rational_in(lo: &Rat, hi: &Rat) -> Rat {
    if lo > hi {
        return simplest_rational_in(hi, lo);
    }
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Rat::zero();
    }
    if hi.is_negative() {
        return -simplest_rational_in(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if &(&fl + Rat::one()) <= hi {
        return fl + Rat::one();
    }
    // lo and hi share the integer part; recurse on reciprocals of the fractional parts.
    let inner = simplest_rational_in(&(Rat::one() / (hi - &fl)), &(Rat::one() / (lo - &fl)));
    fl + Rat::one() / inner
}

pub fn bigint_sign(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_decimal("-3e-2").unwrap(), rat(-3, 100));
        assert_eq!(parse_decimal(".5").unwrap(), rat(1, 2));
        assert!(parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn grat_layout() {
        assert_eq!(format_grat(&grat(rat(1, 2), rat(-3, 4))), "1/2-3/4 i");
        assert_eq!(format_grat(&grat(rat(0, 1), rat(2, 1))), "2 i");
        assert_eq!(format_grat(&grat_real(rat(-7, 3))), "-7/3");
    }

    #[test]
    fn surds_multiply_exactly() {
        let r2 = AlgNum::sqrt_rat(&rat_int(2)).unwrap();
        let r8 = AlgNum::sqrt_rat(&rat_int(8)).unwrap();
        assert_eq!((r2.clone() * r2.clone()).as_rat(), Some(rat_int(2)));
        assert_eq!((r2.clone() * r8).as_rat(), Some(rat_int(4)));
        let r3 = AlgNum::sqrt_rat(&rat(3, 4)).unwrap();
        let r6 = r2 * r3;
        assert!(r6.as_grat().is_none());
        assert!((r6.to_c64().re - 6f64.sqrt() / 2.0).abs() < 1e-15);
        let im = AlgNum::sqrt_rat(&rat_int(-4)).unwrap();
        assert_eq!(im.as_grat(), Some(grat(Rat::zero(), rat_int(2))));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(&rat(1, 3), 5), "0.33333");
        assert_eq!(format_sig(&rat(-2, 3), 3), "-0.667");
        assert_eq!(format_sig(&rat(999_999, 1), 3), "1.00e6");
        assert_eq!(format_sig(&rat(1234, 1), 4), "1234");
        assert_eq!(format_sig(&rat(1, 1000), 2), "0.0010");
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_rational_in(&rat(29, 10), &rat(31, 10)), rat_int(3));
        assert_eq!(simplest_rational_in(&rat(33, 100), &rat(34, 100)), rat(1, 3));
        assert_eq!(simplest_rational_in(&rat(-34, 100), &rat(-33, 100)), rat(-1, 3));
    }

    #[test]
    fn dd_division_is_double_double_accurate() {
        let q = dd_div(Dd::from(1.0), Dd::from(3.0));
        let err = (dd_to_rat(&q) - rat(1, 3)).abs();
        assert!(err < rat(1, 10).pow(31));
        let z = cdd_sqrt(&CDd::new(Dd::from(-3.0), Dd::from(4.0)));
        assert_eq!(cdd_to_c64(&z), C64::new(1.0, 2.0));
    }

    #[test]
    fn dd_roundtrip() {
        let third = rat(1, 3);
        let d = rat_to_dd(&third);
        let back = dd_to_rat(&d);
        let err = (back - third).abs();
        assert!(err < rat(1, 10).pow(31));
    }
}
