use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use cubesum::curve::{build_basis, build_window, curve_second, curve_y, CurveParams, WindowSummary};
use cubesum::driver::{sample_window, trial_rng, DriverConfig};
use cubesum::io::{format_result_line, parse_result_line};
use cubesum::lattice::default_delta;
use cubesum::pyramid::{
    default_eps, enumerate_candidates, expected_volume, map_candidate, CandidateVector, DEFAULT_BOX_CAP,
};
use cubesum::real::{from_f64, int, pow2_rational, ratio, to_f64, Rational};
use cubesum::verify::{canonicalize, eval_report_form, eval_search_form, Solution, SolutionRecord};

fn x0_strategy() -> impl Strategy<Value = f64> {
    (-10.0f64..10.0).prop_filter("away from the singular point", |x| (x - 0.5f64.cbrt()).abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cube_identity(x0 in x0_strategy(), c in 1u32..=3) {
        let c_params = CurveParams::new(c, 96).unwrap();
        let x0 = from_f64(x0).unwrap();
        prop_assume!((to_f64(&x0) - (1.0 / c as f64).cbrt()).abs() > 1e-3);
        let y = curve_y(&c_params, &x0).unwrap();
        let lhs = y.pow(3) + int(c as i64) * x0.pow(3);
        let scale = (int(c as i64) * x0.pow(3)).abs().max(int(1));
        let rel = ((lhs - int(1)) / scale).abs();
        prop_assert!(rel <= pow2_rational(-96 + 8));
    }

    #[test]
    fn tangent_lies_on_one_side(x0 in x0_strategy(), t in -1.0f64..1.0) {
        let p = CurveParams::default();
        let h = ratio(1, 1000);
        let x0 = from_f64(x0).unwrap();
        let window = build_window(&p, &x0, &h, &ratio(1, 100_000), &int(1000));
        prop_assume!(window.is_ok());
        let w = window.unwrap();
        let f2 = curve_second(&p, &x0, &w.y0).unwrap();
        let x = &x0 + &h / int(2) * from_f64(t).unwrap();
        let tangent = &w.a * &x + (&w.y0 - &w.a * &x0);
        let gap = tangent - curve_y(&p, &x).unwrap();
        // Rounding of A and Y0 at the window's precision allows a tiny overshoot.
        let slack = pow2_rational(-(w.bits as i64) + 16);
        if f2.is_negative() {
            prop_assert!(gap >= -slack);
        } else if f2.is_positive() {
            prop_assert!(gap <= slack);
        }
    }

    #[test]
    fn form_consistency(c in 1u32..=3, x in -10_000i64..10_000, y in -10_000i64..10_000, z in -10_000i64..10_000) {
        let (x, y, z) = (BigInt::from(x), BigInt::from(y), BigInt::from(z));
        prop_assert_eq!(eval_report_form(c, &x, &y, &z), eval_search_form(c, &x, &y, &-&z));
    }

    #[test]
    fn canonical_sign(c in 1u32..=2, x in -1_000_000i64..1_000_000, y in -1_000_000i64..1_000_000, z in -1_000_000i64..1_000_000) {
        let cand = CandidateVector::new(x, y, z);
        let neg = CandidateVector::new(-x, -y, -z);
        match canonicalize(c, &cand) {
            None => prop_assert!(canonicalize(c, &neg).is_none()),
            Some(s) => {
                prop_assert!(s.d.is_positive());
                prop_assert!(s.holds());
                prop_assert_eq!(Some(s), canonicalize(c, &neg));
            }
        }
    }

    #[test]
    fn result_line_round_trip(
        x in -(1i64 << 20)..(1 << 20), y in -(1i64 << 20)..(1 << 20), z in -(1i64 << 20)..(1 << 20),
        seed in any::<u64>(), trial in 0i64..1_000_000, x0 in -10.0f64..10.0, h in 1e-6f64..1e-2,
    ) {
        let mut s = Solution::new(2, x, y, z);
        let (mut sx, mut sy, mut sz) = (BigInt::from(x), BigInt::from(y), BigInt::from(z));
        if s.d.is_negative() {
            sx = -sx; sy = -sy; sz = -sz;
            s = Solution { c: 2, d: -s.d, x: sx.clone(), y: sy.clone(), z: sz.clone() };
        }
        prop_assume!(!s.d.is_zero() && s.d <= BigInt::from(u64::MAX));
        let rec = SolutionRecord {
            solution: s,
            window: Some(WindowSummary { x0, h, k: 10.0 * h * h, l: 1.0 / h }),
            seed,
            trial,
        };
        let line = format_result_line(&rec, None).unwrap();
        prop_assert_eq!(parse_result_line(&line).unwrap(), rec);
    }
}

#[test]
fn map_consistency_and_counts() {
    let cfg = DriverConfig::default();
    let eps = default_eps();
    let mut anomalies = 0;
    for t in 0..100 {
        let w = sample_window(&mut trial_rng(31, t), &cfg).unwrap();
        let red = build_basis(&w).reduce(&default_delta()).unwrap();
        let e = enumerate_candidates(&red, &eps, DEFAULT_BOX_CAP).unwrap();
        for p in &e.points {
            let v: [Rational; 3] = p.v.map(int);
            let cand = map_candidate(&red.m, &p.v);
            let orig = [cand.x, cand.y, cand.z_s].map(Rational::from_integer);
            assert_eq!(red.h.mul_vec(&v), red.f.mul_vec(&orig));
        }
        // Lattice points in a pyramid track its volume up to a boundary term.
        let vol = to_f64(&expected_volume(&red.h));
        let n = e.cone_count() as f64;
        if (n - vol).abs() > 4.0 * vol.powf(2.0 / 3.0) + 8.0 {
            anomalies += 1;
            eprintln!("trial {t}: {n} cone points against volume {vol:.2}");
        }
    }
    assert!(anomalies <= 10, "{anomalies} count anomalies");
}

#[test]
fn finer_delta_still_reduces() {
    let cfg = DriverConfig::default();
    let delta = ratio(999, 1000);
    for t in 0..50 {
        let w = sample_window(&mut trial_rng(8, t), &cfg).unwrap();
        let red = build_basis(&w).reduce(&delta).unwrap();
        assert!(red.is_reduced());
    }
}
