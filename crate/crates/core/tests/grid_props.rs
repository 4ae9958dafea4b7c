use std::f64::consts::PI;
use std::sync::OnceLock;

use ibnls_core::grid::{build_grid, mass};
use ibnls_core::{RadialField, SpectralLaplacian};
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian(op: &SpectralLaplacian) -> RadialField {
    RadialField::from_real(op.grid(), |r| (-r * r / 2.0).exp())
}

#[test]
fn gaussian_moments_in_several_dimensions() {
    for dim in [5u32, 6, 8] {
        let op = SpectralLaplacian::new(&build_grid(dim, 12.0, 2000).unwrap()).unwrap();
        let u = gaussian(&op);
        let n = dim as f64;
        let base = PI.powf(n / 2.0);
        let cases = [
            (mass(&u), base),
            (op.sobolev_norm(1.0, &u).unwrap().powi(2), n / 2.0 * base),
            (op.sobolev_norm(2.0, &u).unwrap().powi(2), n * (n + 2.0) / 4.0 * base),
        ];
        for (got, want) in cases {
            assert!((got / want - 1.0).abs() < 1e-4, "N={dim}: {got} vs {want}");
        }
    }
}

#[test]
fn laplacian_norm_converges_at_second_order() {
    let exact = 8.75 * PI.powf(2.5);
    let errors: Vec<f64> = [250, 500, 1000, 2000]
        .iter()
        .map(|&m| {
            let op = SpectralLaplacian::new(&build_grid(5, 12.0, m).unwrap()).unwrap();
            (op.sobolev_norm(2.0, &gaussian(&op)).unwrap().powi(2) - exact).abs()
        })
        .collect();
    for pair in errors.windows(2) {
        let slope = (pair[0] / pair[1]).log2();
        assert!((slope - 2.0).abs() <= 0.3, "slope {slope}, errors {errors:?}");
    }
}

fn op() -> &'static SpectralLaplacian {
    static OP: OnceLock<SpectralLaplacian> = OnceLock::new();
    OP.get_or_init(|| SpectralLaplacian::new(&build_grid(6, 10.0, 160).unwrap()).unwrap())
}

fn field() -> impl Strategy<Value = RadialField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 160)
        .prop_map(|v| RadialField::new(op().grid().clone(), v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn norm(u: &RadialField) -> f64 {
    u.inner(u).re.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(u in field()) {
        let back = op().synthesis(&op().analysis(&u).unwrap());
        let diff = RadialField::new(u.grid().clone(), back.values().iter().zip(u.values()).map(|(a, b)| a - b).collect()).unwrap();
        prop_assert!(norm(&diff) < 1e-10 * norm(&u));
    }

    #[test]
    fn parseval(u in field()) {
        let c = op().analysis(&u).unwrap();
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((total / mass(&u) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn operator_is_self_adjoint(u in field(), v in field()) {
        let lu = op().apply(&u).unwrap();
        let lv = op().apply(&v).unwrap();
        let gap = (lu.inner(&v) - u.inner(&lv)).norm();
        prop_assert!(gap < 1e-9 * norm(&u) * norm(&v), "{}", gap);
    }
}
