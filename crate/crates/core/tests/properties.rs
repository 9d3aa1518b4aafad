//! Property-based checks: expression printing round-trips, curvature
//! identities hold for random valid invariant triples, and power-law fits
//! recover synthetic exponents.

use proptest::prelude::*;

use ruled_surfaces::classify::fit_power_law;
use ruled_surfaces::expr::Expr;
use ruled_surfaces::families::{family_normal_curvature, CurveFamily};
use ruled_surfaces::geometry::{curvature_scalars, normal_curvature, DirectionUV};
use ruled_surfaces::profile::{InvariantProfile, ScalarProfile};

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4.0..4.0_f64).prop_map(Expr::Const),
        Just(Expr::Pi),
        Just(Expr::E),
        Just(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                ruled_surfaces::expr::BinOp::Add,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                ruled_surfaces::expr::BinOp::Sub,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                ruled_surfaces::expr::BinOp::Mul,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                ruled_surfaces::expr::BinOp::Div,
                Box::new(a),
                Box::new(b)
            )),
            inner
                .clone()
                .prop_map(|a| Expr::Unary(ruled_surfaces::expr::UnaryFn::Sin, Box::new(a))),
            inner
                .clone()
                .prop_map(|a| Expr::Unary(ruled_surfaces::expr::UnaryFn::Cos, Box::new(a))),
            inner.prop_map(|a| Expr::Unary(ruled_surfaces::expr::UnaryFn::Neg, Box::new(a))),
        ]
    })
}

/// Constant profiles respecting sign σ = sign δ (λ and δ share their sign or
/// λ = 0 with δ > 0).
fn arb_invariants() -> impl Strategy<Value = (f64, f64, f64)> {
    (
        -2.0..2.0_f64,
        prop_oneof![0.2..2.0_f64, -2.0..-0.2_f64],
        0.0..1.5_f64,
    )
        .prop_map(|(k, d, l_mag)| (k, d, l_mag * d.signum()))
}

proptest! {
    #[test]
    fn printed_expressions_reparse_to_the_same_tree(e in arb_expr()) {
        // one print-parse round settles the representation (negative literals
        // come back as a unary minus); after that, printing is a fixpoint
        let reparsed = Expr::parse(&e.to_string()).unwrap();
        let text = reparsed.to_string();
        prop_assert_eq!(Expr::parse(&text).unwrap().to_string(), text);
        for u in [-1.3, 0.0, 0.7, 2.9] {
            match (e.eval(u), reparsed.eval(u)) {
                (Ok(a), Ok(b)) => prop_assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "eval mismatch at u = {}: {} vs {}", u, a, b
                ),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "eval disagreement at u = {}: {:?} vs {:?}", u, a, b),
            }
        }
    }

    #[test]
    fn directions_are_normalized(du in -5.0..5.0_f64, dv in -5.0..5.0_f64) {
        prop_assume!(du.abs() + dv.abs() > 1e-6);
        let d = DirectionUV::new(du, dv).unwrap();
        prop_assert!((d.du * d.du + d.dv * d.dv - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn curvature_identities_hold_for_random_profiles(
        (k, d, l) in arb_invariants(),
        u in 0.1..6.0_f64,
        v in -3.0..3.0_f64,
        angle in 0.0..std::f64::consts::PI,
    ) {
        let profile = InvariantProfile::new(
            ScalarProfile::constant(k),
            ScalarProfile::constant(d),
            ScalarProfile::constant(l),
            (0.0, 2.0 * std::f64::consts::PI),
        ).unwrap();
        let pg = curvature_scalars(&profile, u, v).unwrap();
        prop_assert!(pg.gauss < 0.0);
        prop_assert!(pg.k1 >= pg.k2);
        let scale = pg.k1.abs() + pg.k2.abs();
        prop_assert!((pg.k1 * pg.k2 - pg.gauss).abs() <= 1e-10 * pg.gauss.abs());
        prop_assert!((pg.k1 + pg.k2 - 2.0 * pg.mean).abs() <= 1e-10 * scale.max(1e-14));
        // expected Gaussian curvature -δ²/w⁴
        let w2 = v * v + d * d;
        prop_assert!((pg.gauss + d * d / (w2 * w2)).abs() <= 1e-12 * pg.gauss.abs());
        // normal curvature lies between the principal curvatures
        let dir = DirectionUV::new(angle.cos(), angle.sin()).unwrap();
        let kn = normal_curvature(&profile, u, v, dir).unwrap();
        prop_assert!(kn >= pg.k2 - 1e-10 * scale && kn <= pg.k1 + 1e-10 * scale);
        // the S3 family realizes twice the mean curvature
        let s3 = family_normal_curvature(CurveFamily::S3, &profile, u, v).unwrap();
        prop_assert!((s3 - 2.0 * pg.mean).abs() <= 1e-10 * scale.max(1e-14));
    }

    #[test]
    fn power_law_fit_recovers_synthetic_exponents(
        n in -5..3_i32,
        amp in 0.3..3.0_f64,
        wobble in 0.0..0.5_f64,
    ) {
        let us: Vec<f64> = (0..7).map(|i| 0.2 + 0.6 * i as f64).collect();
        let vs = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let mut kn = Vec::new();
        let mut w = Vec::new();
        for &u in &us {
            let f = amp * (1.0 + wobble * u.sin());
            let wr: Vec<f64> = vs.iter().map(|&v| (v * v + 1.0_f64).sqrt()).collect();
            kn.push(wr.iter().map(|&wv| f * wv.powi(n)).collect::<Vec<_>>());
            w.push(wr);
        }
        let fit = fit_power_law(&us, &kn, &w, 1e-9).unwrap();
        prop_assert!(fit.accepted);
        prop_assert_eq!(fit.exponent, n);
    }
}
