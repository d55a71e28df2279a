use parageo::curves::{integrate, ConformalCoupled, ConformalState};
use parageo::geometry::{zoo, MetricField};
use parageo::tractor::{metric_with, parallel_transport, tractor_derivative, CurveSamples, Tractor};
use parageo::verify::{check_tractor_gauge, TestSpace};
use parageo::Expr;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tractor() -> impl Strategy<Value = Tractor> {
    (-1.0..1.0f64, prop::collection::vec(-1.0..1.0f64, 3), -1.0..1.0f64).prop_map(|(l, a, m)| Tractor::new(l, a, m))
}

fn curve(m: &MetricField, space: TestSpace, seed: u64) -> CurveSamples {
    let (x, v, a) = space.sample(&mut ChaCha8Rng::seed_from_u64(seed));
    let s = ConformalState::new(x, v, a);
    let tr = integrate(&ConformalCoupled { metric: m }, &s.to_vec(), 0.0, 0.5, 1e-3).unwrap();
    CurveSamples::from_trajectory(&tr, 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// `X·H(u, w) = H(D_X u, w) + H(u, D_X w)` for fields with constant
    /// components.
    #[test]
    fn connection_preserves_the_metric(
        u in tractor(), w in tractor(),
        x in prop::collection::vec(-0.5..0.5f64, 3),
        dir in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let m = zoo::sphere_stereographic(3).unwrap();
        let zero = Tractor::zero(3);
        let du = tractor_derivative(&m, &x, &dir, &u, &zero).unwrap();
        let dw = tractor_derivative(&m, &x, &dir, &w, &zero).unwrap();
        let g_inv = m.at(&x).unwrap().g_inv;
        let h_at = |eps: f64| {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + eps * b).collect();
            metric_with(&m.at(&y).unwrap().g_inv, &u, &w)
        };
        let eps = 1e-5;
        let fd = (h_at(eps) - h_at(-eps)) / (2.0 * eps);
        let analytic = metric_with(&g_inv, &du, &w) + metric_with(&g_inv, &u, &dw);
        prop_assert!((fd - analytic).abs() < 1e-7 * (1.0 + fd.abs()), "{fd} vs {analytic}");
    }

    #[test]
    fn transport_is_linear(u in tractor(), w in tractor(), a in -2.0..2.0f64, b in -2.0..2.0f64, seed in any::<u64>()) {
        let m = zoo::sphere_stereographic(3).unwrap();
        let c = curve(&m, TestSpace::Sphere, seed);
        let tu = parallel_transport(&m, &c, &u, None).unwrap();
        let tw = parallel_transport(&m, &c, &w, None).unwrap();
        let tc = parallel_transport(&m, &c, &u.combine(a, &w, b), None).unwrap();
        let (end_u, end_w, end_c) = (tu.tractors.last().unwrap(), tw.tractors.last().unwrap(), tc.tractors.last().unwrap());
        let want = end_u.combine(a, end_w, b).to_vec();
        for (x, y) in end_c.to_vec().iter().zip(&want) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
    }

    /// Polarization: `H(u(t), w(t))` is conserved, not only `H(u, u)`.
    #[test]
    fn transport_preserves_the_bilinear_form(u in tractor(), w in tractor(), seed in any::<u64>()) {
        let m = zoo::hyperbolic_halfspace(3).unwrap();
        let c = curve(&m, TestSpace::Hyperbolic, seed);
        let tu = parallel_transport(&m, &c, &u, None).unwrap();
        let tw = parallel_transport(&m, &c, &w, None).unwrap();
        let h = |i: usize| metric_with(&m.at(&c.positions[i]).unwrap().g_inv, &tu.tractors[i], &tw.tractors[i]);
        let h0 = h(0);
        for i in (0..c.times.len()).step_by(50) {
            prop_assert!((h(i) - h0).abs() < 1e-8);
        }
    }

    #[test]
    fn transport_commutes_with_gauge_change(u in tractor(), seed in any::<u64>()) {
        let m = zoo::euclidean(3).unwrap();
        let c = curve(&m, TestSpace::Flat, seed);
        let f = Expr::parse("0.2*x1 - 0.1*sin(x2*x3)", 3).unwrap();
        let r = check_tractor_gauge(&m, &f, &c, &u).unwrap();
        prop_assert!(r.passed, "{r:?}");
    }
}

#[test]
fn flat_line_closed_forms() {
    // x = t e1, v = e1, S = 0: λ' = 0, α' = λ v♭, μ' = α(v)
    let m = zoo::euclidean(3).unwrap();
    let tr = integrate(
        &ConformalCoupled { metric: &m },
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        0.0,
        1.0,
        1e-2,
    )
    .unwrap();
    let c = CurveSamples::from_trajectory(&tr, 3).unwrap();

    // u0 = (0, e1♭, 0): α stays e1♭, μ = t, H ≡ 1
    let p = parallel_transport(&m, &c, &Tractor::new(0.0, vec![1.0, 0.0, 0.0], 0.0), None).unwrap();
    for (i, t) in p.times.iter().enumerate() {
        let u = &p.tractors[i];
        assert!((u.mu - t).abs() < 1e-9 && u.lambda == 0.0 && u.alpha == vec![1.0, 0.0, 0.0]);
        assert!((p.h_values[i] - 1.0).abs() < 1e-9);
    }

    // u0 = (1, 0, 0): λ = 1, α = t e1♭, μ = t²/2, H = |α|² − 2λμ ≡ 0
    let p = parallel_transport(&m, &c, &Tractor::new(1.0, vec![0.0; 3], 0.0), None).unwrap();
    for (i, t) in p.times.iter().enumerate() {
        let u = &p.tractors[i];
        assert!((u.alpha[0] - t).abs() < 1e-9 && (u.mu - 0.5 * t * t).abs() < 1e-9 && u.lambda == 1.0);
        assert!(p.h_values[i].abs() < 1e-9);
    }
}
