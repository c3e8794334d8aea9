//! Aberth–Ehrlich simultaneous root finding, generic over the float type
//! (plain `f64` or double-double).

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Dd, C64};

/// Float types the root finder can run in.
pub trait Precision: Float + FromPrimitive + std::fmt::Debug {
    /// Unit roundoff of the arithmetic.
    fn unit_roundoff() -> f64;
    fn to_f64_lossy(self) -> f64;
    /// Exact conversion from `f64`. (`FromPrimitive::from_f64` truncates to
    /// an integer for `TwoFloat`.)
    fn lit(x: f64) -> Self;
}

impl Precision for f64 {
    fn unit_roundoff() -> f64 {
        f64::EPSILON / 2.0
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
    fn lit(x: f64) -> Self {
        x
    }
}

impl Precision for Dd {
    fn unit_roundoff() -> f64 {
        // 2^-104
        4.930380657631324e-32
    }
    fn to_f64_lossy(self) -> f64 {
        self.hi() + self.lo()
    }
    fn lit(x: f64) -> Self {
        Dd::from(x)
    }
}

pub const MAX_SWEEPS: usize = 500;

fn horner<T: Precision>(c: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + *a;
    }
    (p, dp)
}

/// `sum |c_k| |z|^k`, the scale for the backward error at `z`.
fn abs_horner<T: Precision>(c: &[Complex<T>], r: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, a| acc * r + a.norm())
}

/// All complex roots of `sum c_k z^k` (coefficients low power first).
///
/// Returns an error carrying the current iterates if the sweeps do not
/// converge within [`MAX_SWEEPS`].
pub fn aberth<T: Precision>(coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let mut c: Vec<Complex<T>> = coeffs.to_vec();
    while c.last().is_some_and(|a| a.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::Input("root finding on the zero polynomial".into()));
    }
    // exact zero roots
    let zeros = c.iter().take_while(|a| a.is_zero()).count();
    let c: Vec<Complex<T>> = c[zeros..].to_vec();
    let n = c.len() - 1;
    let mut roots = vec![Complex::zero(); zeros];
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }

    let nt = T::from_usize(n).unwrap();
    let lead = c[n];
    let center = -c[n - 1] / (lead * Complex::new(nt, T::zero()));
    // radius from the shifted constant term, safeguarded by the Cauchy bound
    let cauchy = T::one()
        + c[..n]
            .iter()
            .map(|a| a.norm() / lead.norm())
            .fold(T::zero(), |a, b| a.max(b));
    let shifted0 = horner(&c, center).0.norm() / lead.norm();
    let mut radius = shifted0.powf(T::one() / nt);
    if !(radius.is_finite() && radius > T::zero()) {
        radius = cauchy;
    }
    let two_pi = T::lit(std::f64::consts::TAU);
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let th = two_pi * T::from_usize(k).unwrap() / nt + T::lit(0.4);
            center + Complex::from_polar(radius, th)
        })
        .collect();

    let u = T::lit(T::unit_roundoff());
    let tol = u * T::lit(8.0 * n as f64);
    let mut done = vec![false; n];
    let mut extra = 0;
    for _sweep in 0..MAX_SWEEPS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(&c, z[i]);
            let scale = abs_horner(&c, z[i].norm());
            if p.norm() <= tol * scale {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::zero();
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if !d.is_zero() {
                        s = s + d.inv();
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - ratio * s;
            let w = if denom.is_zero() || !dp.norm().is_finite() { ratio } else { ratio / denom };
            if !w.re.is_finite() || !w.im.is_finite() {
                // perturb out of a singular configuration
                z[i] = z[i] + Complex::new(radius * u.sqrt(), radius * u.sqrt());
                continue;
            }
            z[i] = z[i] - w;
            if w.norm() <= u * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            // a couple of extra sweeps with the converged set as polish
            extra += 1;
            if extra > 2 {
                roots.extend(z);
                return Ok(roots);
            }
            done.iter_mut().for_each(|d| *d = false);
        }
    }
    roots.extend(z);
    Err(Error::Numerical {
        message: format!("Aberth iteration did not converge in {MAX_SWEEPS} sweeps"),
        partial: roots.iter().map(|r| C64::new(r.re.to_f64_lossy(), r.im.to_f64_lossy())).collect(),
    })
}

/// Relative backward error of `z` as a root: `|p(z)| / sum |c_k||z|^k`.
pub fn backward_error<T: Precision>(coeffs: &[Complex<T>], z: Complex<T>) -> f64 {
    let p = horner(coeffs, z).0.norm();
    let s = abs_horner(coeffs, z.norm());
    if s.is_zero() {
        0.0
    } else {
        (p / s).to_f64_lossy()
    }
}

/// Sorts by real part, then imaginary part.
pub fn sort_roots(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn quadratic_and_zero_roots() {
        // z^2 (z^2 - 3z + 2)
        let mut r = aberth(&[c(0.0), c(0.0), c(2.0), c(-3.0), c(1.0)]).unwrap();
        sort_roots(&mut r);
        let want = [0.0, 0.0, 1.0, 2.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - c(b)).norm() < 1e-14);
        }
    }

    #[test]
    fn double_double_is_more_accurate() {
        // roots 1/3 and 1/7 of 21 z^2 - 10 z + 1
        let dd = |x: f64| Complex::new(Dd::from(x), Dd::from(0.0));
        let r = aberth(&[dd(1.0), dd(-10.0), dd(21.0)]).unwrap();
        let third = crate::scalar::rat_to_dd(&crate::scalar::rat(1, 3));
        let best = r.iter().map(|z| (z.re - third).abs().to_f64_lossy()).fold(f64::MAX, f64::min);
        assert!(best < 1e-30);
    }

    #[test]
    fn double_double_complex_pair_converges() {
        // z^2 + 379/64 z + 18.06987..., roots off the real axis
        let dd = |x: Dd| Complex::new(x, Dd::from(0.0));
        let c0 = Dd::new_add(18.06987071223627, 1.506870526754273e-15);
        let cs = [dd(c0), dd(Dd::from(5.921875)), dd(Dd::from(1.0))];
        let r = aberth(&cs).unwrap();
        for z in &r {
            assert!(backward_error(&cs, *z) < 1e-30);
        }
        assert!((r[0].re.to_f64_lossy() + 2.9609375).abs() < 1e-15);
    }

    #[test]
    fn complex_pair() {
        let mut r = aberth(&[c(1.0), c(0.0), c(1.0)]).unwrap();
        sort_roots(&mut r);
        assert!((r[0] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn recovers_prescribed_roots(roots in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8)) {
            // expand prod (z - r_k)
            let mut p = vec![C64::new(1.0, 0.0)];
            for &(re, im) in &roots {
                let r = C64::new(re, im);
                let mut q = vec![C64::new(0.0, 0.0); p.len() + 1];
                for (k, a) in p.iter().enumerate() {
                    q[k + 1] += a;
                    q[k] -= a * r;
                }
                p = q;
            }
            let found = aberth(&p).unwrap();
            for z in &found {
                prop_assert!(backward_error(&p, *z) < 1e-12);
            }
        }
    }
}
