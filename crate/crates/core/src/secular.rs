//! Exact secular polynomials `det(H - E)` of tridiagonal matrices.

use std::fmt;

use indexmap::IndexMap;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymTriMatrix;
use crate::poly::multi::term_string;
use crate::poly::{MultiPoly, UPoly};
use crate::scalar::{format_grat, grat_real, rat_int, AlgNum, GRat, C64};

/// Univariate polynomial in the spectral variable with coefficients that
/// are polynomials in the model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SecularPoly {
    /// `"E"`, or `"s"` after the even-variable reduction.
    pub var: String,
    /// Index = power of the spectral variable.
    pub coeffs: Vec<MultiPoly>,
    /// Physical energy = polynomial variable + shift (for `s`: `E = shift ± sqrt(s)`).
    pub shift: GRat,
}

/// Characteristic polynomial via `D_k = (a_k - E) D_{k-1} - b_{k-1} c_{k-1} D_{k-2}`.
pub fn char_poly(h: &SymTriMatrix) -> SecularPoly {
    let n = h.dim();
    let products = h.products();
    // polynomials in E as coefficient vectors
    let mut prev2: Vec<MultiPoly> = vec![MultiPoly::one()];
    let mut prev: Vec<MultiPoly> = vec![h.diag[0].clone(), -MultiPoly::one()];
    for k in 1..n {
        let mut next = vec![MultiPoly::zero(); k + 2];
        for (j, c) in prev.iter().enumerate() {
            next[j] = &next[j] + &(&h.diag[k] * c);
            next[j + 1] = &next[j + 1] - c;
        }
        for (j, c) in prev2.iter().enumerate() {
            next[j] = &next[j] - &(&products[k - 1] * c);
        }
        prev2 = prev;
        prev = next;
    }
    SecularPoly { var: "E".into(), coeffs: prev.into_iter().map(|c| c.trimmed()).collect(), shift: GRat::zero() }
}

impl SecularPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Replaces the variable `E` by `E + c`; the recorded shift grows by `c`.
    pub fn shift(&self, c: &GRat) -> Result<SecularPoly> {
        if self.var != "E" {
            return Err(Error::Input("shift applies to the energy variable only".into()));
        }
        let cp = MultiPoly::constant(c.clone());
        // Horner: p(E + c) = (((a_n)(E+c) + a_{n-1})(E+c) + ...)
        let mut acc: Vec<MultiPoly> = Vec::new();
        for a in self.coeffs.iter().rev() {
            let mut next = vec![MultiPoly::zero(); acc.len() + 1];
            for (j, x) in acc.iter().enumerate() {
                next[j + 1] = &next[j + 1] + x;
                next[j] = &next[j] + &(x * &cp);
            }
            next[0] = &next[0] + a;
            acc = next;
        }
        Ok(SecularPoly { var: "E".into(), coeffs: acc, shift: &self.shift + c })
    }

    /// Substitutes `s = E^2`; every odd power must vanish exactly.
    pub fn to_even_var(&self) -> Result<SecularPoly> {
        if self.var != "E" {
            return Err(Error::Input("already in the even variable".into()));
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 2 == 1 && !c.is_zero() {
                return Err(Error::OddTerm { power: k });
            }
        }
        if self.degree() % 2 == 1 {
            return Err(Error::OddTerm { power: self.degree() });
        }
        Ok(SecularPoly {
            var: "s".into(),
            coeffs: self.coeffs.iter().step_by(2).cloned().collect(),
            shift: self.shift.clone(),
        })
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| k % 2 == 0 || c.is_zero())
    }

    /// Parameters occurring in the coefficients.
    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.coeffs {
            for v in c.used_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(MultiPoly::is_real)
    }

    /// Normalized to a leading coefficient of +1 (the leading coefficient is
    /// always the constant `(-1)^N`).
    pub fn monic(&self) -> SecularPoly {
        let lead = self.coeffs.last().and_then(MultiPoly::as_constant).unwrap_or_else(GRat::one);
        let inv = GRat::one() / lead;
        SecularPoly {
            var: self.var.clone(),
            coeffs: self.coeffs.iter().map(|c| c.scale(&inv)).collect(),
            shift: self.shift.clone(),
        }
    }

    /// Substitutes exact values for some of the parameters.
    pub fn substitute(&self, values: &[(String, MultiPoly)]) -> SecularPoly {
        let sub = |p: &MultiPoly| values.iter().fold(p.clone(), |acc, (n, v)| acc.substitute(n, v));
        SecularPoly { var: self.var.clone(), coeffs: self.coeffs.iter().map(sub).collect(), shift: self.shift.clone() }
    }

    /// Coefficients with every parameter bound.
    pub fn specialize(&self, values: &IndexMap<String, AlgNum>) -> Result<Vec<AlgNum>> {
        self.coeffs
            .iter()
            .map(|c| c.eval(|n| values.get(n).cloned(), |g| AlgNum::from_grat(g.clone())))
            .collect()
    }

    /// Real rational specialization as an exact univariate polynomial, when
    /// the bound values make every coefficient rational.
    pub fn specialize_rat(&self, values: &IndexMap<String, AlgNum>) -> Result<Option<UPoly>> {
        let cs = self.specialize(values)?;
        Ok(cs.iter().map(AlgNum::as_rat).collect::<Option<Vec<_>>>().map(UPoly::new))
    }

    /// Value at a complex point of the polynomial variable.
    pub fn evaluate(&self, values: &IndexMap<String, AlgNum>, at: C64) -> Result<C64> {
        let cs = self.specialize(values)?;
        Ok(cs.iter().rev().fold(C64::zero(), |acc, c| acc * at + c.to_c64()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SecularJson {
            var: self.var.clone(),
            shift: format_grat(&self.shift),
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        })
        .expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct SecularJson {
    var: String,
    shift: String,
    degree: usize,
    coeffs: Vec<String>,
}

impl fmt::Display for SecularPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => self.var.clone(),
                _ => format!("{}^{k}", self.var),
            };
            let (neg, body) = match c.as_constant() {
                Some(g) => term_string(&g, &mono),
                None if mono.is_empty() => {
                    let s = c.to_string();
                    match s.strip_prefix('-') {
                        Some(rest) => (true, rest.to_string()),
                        None => (false, s),
                    }
                }
                None => (false, format!("({c})*{mono}")),
            };
            match (first, neg) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Shift by the family's natural center, reduce to `s = E^2` when the
/// shifted polynomial is even, and normalize to a monic polynomial.
pub fn centered(h: &SymTriMatrix, c: &GRat) -> Result<SecularPoly> {
    let p = char_poly(h).shift(c)?;
    Ok(if p.is_even() && p.degree() % 2 == 0 { p.to_even_var()? } else { p }.monic())
}

/// `trace / N` when the trace is a constant.
pub fn trace_center(h: &SymTriMatrix) -> Option<GRat> {
    h.trace().as_constant().map(|t| t / grat_real(rat_int(h.dim() as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_aom, build_gpm_folded, build_nnim, AomCoupling, Variant};
    use crate::poly::parse_poly;
    use crate::scalar::rat;

    fn p(s: &str) -> MultiPoly {
        parse_poly(s).unwrap()
    }

    fn coeffs(sp: &SecularPoly) -> Vec<MultiPoly> {
        sp.coeffs.clone()
    }

    fn two() -> GRat {
        grat_real(rat_int(2))
    }

    #[test]
    fn diagonal_two_by_two() {
        let h = SymTriMatrix {
            diag: vec![p("1"), p("3")],
            pairs: vec![crate::model::Pair::Explicit { sup: p("0"), sub: p("0") }],
        };
        // (1-E)(3-E)
        assert_eq!(coeffs(&char_poly(&h)), vec![p("3"), p("-4"), p("1")]);
    }

    #[test]
    fn gpm_four_in_s() {
        let h = build_gpm_folded(4, &[p("α"), p("β")]).unwrap();
        let s = char_poly(&h).to_even_var().unwrap();
        assert_eq!(coeffs(&s), vec![p("α^2*β^2 + 2*α*β - α^2 + 1"), p("α^2 + β^2 - 3"), p("1")]);
        assert!(s.is_real());
    }

    #[test]
    fn nnim_four_quartic() {
        let h = build_nnim(4, &[p("-β"), p("α")], Variant::A).unwrap();
        let e = char_poly(&h).shift(&two()).unwrap();
        assert_eq!(
            coeffs(&e),
            vec![p("1 - 2*β^2 + β^4"), p("0"), p("α^2 - 3 + 2*β^2"), p("0"), p("1")]
        );
    }

    #[test]
    fn aom_quadratic_and_cubic() {
        let h4 = build_aom(4, &AomCoupling::Squared(vec![p("α"), p("β")])).unwrap();
        let s4 = char_poly(&h4).shift(&grat_real(rat_int(4))).unwrap().to_even_var().unwrap();
        assert_eq!(coeffs(&s4), vec![p("9 + 6*β - 9*α + β^2"), p("-10 + 2*β + α"), p("1")]);

        let h6 = build_aom(6, &AomCoupling::Squared(vec![p("α"), p("β"), p("γ")])).unwrap();
        let s6 = char_poly(&h6).shift(&grat_real(rat_int(6))).unwrap().to_even_var().unwrap().monic();
        assert_eq!(s6.coeffs[2], p("-35 + 2*γ + α + 2*β"));
        assert_eq!(s6.coeffs[1], p("-34*α + 2*α*γ + 259 + β^2 + γ^2 + 28*γ + 2*β*γ - 44*β"));
        assert_eq!(
            s6.coeffs[0],
            p("-225 - 30*γ + 30*α*γ - 10*β*γ - 150*β - 25*β^2 + α*γ^2 + 225*α - γ^2")
        );

        let h2 = build_aom(2, &AomCoupling::Squared(vec![p("α")])).unwrap();
        let s2 = char_poly(&h2).shift(&two()).unwrap().to_even_var().unwrap();
        assert_eq!(coeffs(&s2), vec![p("α - 1"), p("1")]);
    }

    #[test]
    fn odd_terms_are_rejected() {
        let h = build_gpm_folded(3, &[p("a")]).unwrap();
        let e = char_poly(&h).shift(&GRat::one()).unwrap();
        assert!(matches!(e.to_even_var(), Err(Error::OddTerm { .. })));
    }

    #[test]
    fn evaluation_by_hand() {
        let h = build_gpm_folded(4, &[p("α"), p("β")]).unwrap();
        let s = char_poly(&h).to_even_var().unwrap();
        let mut v = IndexMap::new();
        v.insert("α".to_string(), AlgNum::zero());
        v.insert("β".to_string(), AlgNum::zero());
        let z = s.evaluate(&v, C64::new(1.0, 0.0)).unwrap();
        assert_eq!(z, C64::new(-1.0, 0.0));
        v.shift_remove("β");
        assert!(s.evaluate(&v, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn free_lattice_specialization() {
        let cs: Vec<MultiPoly> = (0..5).map(|_| p("t")).collect();
        let h = build_nnim(10, &cs, Variant::A).unwrap();
        let mut v = IndexMap::new();
        v.insert("t".to_string(), AlgNum::zero());
        let u = char_poly(&h).specialize_rat(&v).unwrap().unwrap();
        for k in 1..=10 {
            let e = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 11.0).cos();
            assert!(u.eval_f64(e).abs() < 1e-8, "{k} {}", u.eval_f64(e));
        }
        assert_eq!(u.lead(), rat(1, 1));
    }

    #[test]
    fn display_layout() {
        let h = build_gpm_folded(4, &[p("α"), p("β")]).unwrap();
        let s = char_poly(&h).to_even_var().unwrap();
        assert_eq!(s.to_string(), "s^2 + (α^2 + β^2 - 3)*s + α^2*β^2 - α^2 + 2*α*β + 1");
    }
}
