use crate::error::{Error, Result};
use crate::poly::multi::MultiPoly;

/// Fraction-free (Bareiss) determinant over the polynomial ring.
pub fn bareiss_det(mut m: Vec<Vec<MultiPoly>>) -> Result<MultiPoly> {
    let n = m.len();
    if n == 0 {
        return Ok(MultiPoly::from_int(1));
    }
    let mut sign = false;
    let mut prev = MultiPoly::from_int(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            // smallest nonzero pivot keeps intermediate growth down
            let swap = (k + 1..n)
                .filter(|&i| !m[i][k].is_zero())
                .min_by_key(|&i| m[i][k].num_terms());
            match swap {
                Some(i) => {
                    m.swap(i, k);
                    sign = !sign;
                }
                None => return Ok(MultiPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .ok_or_else(|| Error::Component("inexact Bareiss step".into()))?;
            }
            m[i][k] = MultiPoly::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if sign { -d } else { d })
}

/// Sylvester resultant of `f` and `g` with respect to `var`.
pub fn resultant(f: &MultiPoly, g: &MultiPoly, var: &str) -> Result<MultiPoly> {
    let fc = f.coefficients_in(var);
    let gc = g.coefficients_in(var);
    let m = fc.len() - 1;
    let n = gc.len() - 1;
    if f.is_zero() || g.is_zero() {
        return Ok(MultiPoly::zero());
    }
    if m == 0 {
        return Ok(f.pow(n as u32));
    }
    if n == 0 {
        return Ok(g.pow(m as u32));
    }
    let size = m + n;
    let mut rows = vec![vec![MultiPoly::zero(); size]; size];
    // rows hold coefficients from the highest power down
    for r in 0..n {
        for (k, c) in fc.iter().rev().enumerate() {
            rows[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in gc.iter().rev().enumerate() {
            rows[n + r][r + k] = c.clone();
        }
    }
    Ok(bareiss_det(rows)?.trimmed())
}

/// Discriminant-like eliminant: the resultant of `f` and its derivative
/// in `var` (up to the usual leading-coefficient factor).
pub fn discriminant(f: &MultiPoly, var: &str) -> Result<MultiPoly> {
    let cs = f.coefficients_in(var);
    let d: Vec<MultiPoly> = cs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&crate::scalar::grat_real(crate::scalar::rat_int(k as i64))))
        .collect();
    let fp = MultiPoly::from_coefficients_in(var, &d);
    resultant(f, &fp, var)
}
