use nalgebra::{DMatrix, Schur, SymmetricEigen};
use proptest::prelude::*;

use qcat::metric::{spectral_metric, MetricCandidate};
use qcat::model::{pt_residual, Model, ModelSpec};
use qcat::poly::UPoly;
use qcat::scalar::{format_rat, grat_real, rat, Rat, C64};
use qcat::secular::char_poly;
use qcat::spectra::eigenvalues;
use qcat::spectra::robin::robin_all;

fn rational(bound: i64) -> impl Strategy<Value = Rat> {
    (2i64..=24).prop_flat_map(move |d| (-(bound * d) + 1..bound * d).prop_map(move |n| rat(n, d)))
}

fn build(json: String) -> Model {
    Model::from_spec(&ModelSpec::from_json(&json).unwrap()).unwrap()
}

fn params(prefix: &str, vals: &[Rat]) -> String {
    vals.iter().enumerate().map(|(k, v)| format!("\"{prefix}{k}\":\"{}\"", format_rat(v))).collect::<Vec<_>>().join(",")
}

/// Instances of the PT-symmetric families with real parameters.
fn pt_instance() -> impl Strategy<Value = Model> {
    (2usize..=8, 0usize..3, prop::collection::vec(rational(1), 4)).prop_map(|(n, fam, vals)| {
        let k = n / 2;
        let json = match fam {
            0 => format!(r#"{{"family":"gpm","dim":{n},"params":{{{}}}}}"#, params("p", &vals[..k])),
            1 => format!(r#"{{"family":"nnim","dim":{n},"params":{{{}}}}}"#, params("c", &vals[..k])),
            _ => format!(r#"{{"family":"bim","dim":{},"params":{{"l":"{}"}}}}"#, n.max(4), format_rat(&vals[0])),
        };
        build(json)
    })
}

fn any_instance() -> impl Strategy<Value = Model> {
    prop_oneof![
        3 => pt_instance(),
        1 => (2usize..=8, prop::collection::vec(rational(1), 4)).prop_map(|(n, vals)| {
            let sq: Vec<Rat> = vals[..n / 2].iter().map(|v| v * v).collect();
            build(format!(r#"{{"family":"aom","dim":{n},"params":{{{}}}}}"#, params("q", &sq)))
        }),
    ]
}

fn dense(m: &Model) -> DMatrix<C64> {
    m.float_matrix().unwrap().to_dense()
}

fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn oracle(h: &DMatrix<C64>) -> Vec<C64> {
    let t = Schur::new(h.clone()).unpack().1;
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

fn matched(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    a.iter()
        .map(|x| {
            let (j, d) = (0..b.len())
                .filter(|j| !used[*j])
                .map(|j| (j, (x - b[j]).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            used[j] = true;
            d
        })
        .fold(0.0, f64::max)
}

fn similarity_defect(h: &DMatrix<C64>, c: &MetricCandidate) -> f64 {
    let e = SymmetricEigen::new((&c.theta + c.theta.adjoint()) * C64::new(0.5, 0.0));
    let root = DMatrix::from_diagonal(&e.eigenvalues.map(|x| C64::new(x.sqrt(), 0.0)));
    let omega = &e.eigenvectors * root * e.eigenvectors.adjoint();
    let k = &omega * h * omega.clone().try_inverse().unwrap();
    frob(&(&k - k.adjoint())) / frob(h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pt_residual_vanishes_exactly(m in pt_instance()) {
        let r = pt_residual(&m.exact_matrix().unwrap());
        prop_assert!(r.is_zero, "residual {}", r.value);
    }

    #[test]
    fn aom_is_never_pt_symmetric(n in 2usize..=8, v in rational(1)) {
        let m = build(format!(r#"{{"family":"aom","dim":{n},"params":{{"g":"{}"}}}}"#, format_rat(&v)));
        prop_assert!(!pt_residual(&m.exact_matrix().unwrap()).is_zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn secular_roots_match_dense_eigensolve(m in any_instance()) {
        let exact = eigenvalues(&m).unwrap().eigenvalues;
        let d = matched(&exact, &oracle(&dense(&m)));
        prop_assert!(d <= 1e-8, "{d:e}");
    }

    #[test]
    fn metric_similarity_is_hermitian(m in any_instance(), ks in prop::collection::vec(0.25f64..4.0, 8)) {
        let h = dense(&m);
        if let Ok(c) = spectral_metric(&h, &ks[..h.nrows()]) {
            prop_assert!(c.positivity.is_positive_definite);
            prop_assert!(similarity_defect(&h, &c) <= 1e-8);
        }
    }

    #[test]
    fn shift_moves_the_spectrum(m in pt_instance(), c in rational(3)) {
        let p = char_poly(&m.rational_matrix());
        let q = p.shift(&grat_real(c.clone())).unwrap().shift(&grat_real(-c)).unwrap();
        prop_assert_eq!(p.coeffs, q.coeffs);
    }

    #[test]
    fn secular_constant_is_the_determinant(m in pt_instance()) {
        let p = char_poly(&m.rational_matrix());
        let det = dense(&m).determinant();
        let c0 = p.coeffs[0].as_constant().unwrap();
        let c0 = C64::new(qcat::scalar::rat_to_dd(&c0.re).hi(), qcat::scalar::rat_to_dd(&c0.im).hi());
        prop_assert!((c0 - det).norm() <= 1e-10 * det.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn robin_identity_holds(idx in 0usize..3, l in rational(1)) {
        let n = [10, 20, 40][idx];
        let m = build(format!(r#"{{"family":"bim","dim":{n},"params":{{"l":"{}"}}}}"#, format_rat(&l)));
        for r in robin_all(&m).unwrap() {
            prop_assert!(r.identity_residual <= 1e-10, "{} at E = {}", r.identity_residual, r.energy);
        }
    }
}

#[test]
fn squarefree_root_counts() {
    // (x - 1)^2 (x + 2): three roots with multiplicity, two distinct
    let p = UPoly::from_ints(&[2, -3, 0, 1]);
    assert_eq!(p.squarefree_part().degree(), 2);
    assert_eq!(p.count_real_roots(), 2);
}
