use bernfad::linalg::{
    banded_lu_factor, dense_inf_condition_number, gauss_legendre, hilbert, hilbert_condition_exact, inf_condition_number,
};
use bernfad::opmatrix::BandedMatrix;
use bernfad::oracle::integrate_monomial_unit;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Random banded matrix with a boosted diagonal so the draw is not
/// near-singular too often; pivoting is still exercised.
fn banded() -> impl Strategy<Value = BandedMatrix> {
    (3usize..=60, 1usize..=4, 1usize..=4).prop_flat_map(|(n, kl, ku)| {
        prop::collection::vec(-1.0..1.0f64, n * (kl + ku + 1)).prop_map(move |vals| {
            let mut it = vals.into_iter();
            BandedMatrix::from_fn(n, n, kl, ku, |i, j| {
                let v = it.next().unwrap();
                if i == j {
                    v + 0.5_f64.copysign(v)
                } else {
                    v
                }
            })
        })
    })
}

proptest! {
    #[test]
    fn quadrature_exact_to_degree_2n_minus_1(
        n in prop::sample::select(vec![2usize, 5, 20]),
        raw in prop::collection::vec(-1.0..1.0f64, 40),
    ) {
        let coeffs = &raw[..2 * n];
        let rule = gauss_legendre(n).unwrap();
        let q = rule.integrate(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c));
        let mono: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_float(c).unwrap()).collect();
        let exact = integrate_monomial_unit(&mono).to_f64().unwrap();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
        prop_assert!((q - exact).abs() <= 1e-13 * scale.max(exact.abs()), "{q} vs {exact}");
    }

    #[test]
    fn quadrature_rule_shape(n in 1usize..=40) {
        let rule = gauss_legendre(n).unwrap();
        let total: f64 = rule.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-14);
        prop_assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rule.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn lu_reconstructs_permuted_matrix(m in banded()) {
        let lu = banded_lu_factor(&m).unwrap();
        let (p, l, u) = lu.factors_dense();
        let pa = p.matmul(&m.to_dense()).unwrap();
        let lu_prod = l.matmul(&u).unwrap();
        let scale = m.to_dense().norm_inf().max(1.0);
        prop_assert!(pa.max_abs_diff(&lu_prod) <= 1e-12 * scale);
        prop_assert!(lu.u().upper() <= m.lower() + m.upper());
    }

    #[test]
    fn lu_solves_reconstruct_identity(m in banded()) {
        let lu = banded_lu_factor(&m).unwrap();
        let n = m.rows();
        let inv = lu.inverse_columns().unwrap();
        for (j, col) in inv.iter().enumerate() {
            let back = m.matvec(col).unwrap();
            for (i, v) in back.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - want).abs() <= 1e-10 * n as f64, "({i},{j}): {v}");
            }
        }
    }

    #[test]
    fn condition_number_consistency(m in banded()) {
        let banded = inf_condition_number(&m).unwrap();
        let dense = dense_inf_condition_number(&m.to_dense()).unwrap();
        prop_assert!(banded >= 1.0);
        prop_assert!((banded - dense).abs() <= 1e-8 * dense);
    }
}

#[test]
fn identity_has_unit_condition() {
    assert_eq!(inf_condition_number(&BandedMatrix::identity(7)).unwrap(), 1.0);
}

#[test]
fn hilbert_condition_numbers() {
    let c = hilbert_condition_exact(4).unwrap();
    assert_eq!((*c.numer(), *c.denom()), (28375, 1));
    for n in 2..=8 {
        let exact = hilbert_condition_exact(n).unwrap();
        let exact = *exact.numer() as f64 / *exact.denom() as f64;
        let dense = dense_inf_condition_number(&hilbert(n)).unwrap();
        assert!((dense / exact - 1.0).abs() < 1e-6, "n = {n}: {dense} vs {exact}");
    }
}
