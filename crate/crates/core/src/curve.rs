//! The curve `Y = (1 - c X^3)^(1/3)` near which rational points are sought,
//! its tangent data at a window centre, and the scaled lattice basis built
//! from a window.
//!
//! All real quantities are evaluated at a configurable number of significant
//! bits and then kept as exact rationals, so everything downstream of
//! [`build_basis`] is exact.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::QMat3;
use crate::real::{self, ceil_log2, int, ratio, round_to_bits, to_f64, Rational};

/// Smallest distance to the singular point accepted for any evaluation.
pub fn base_margin() -> Rational {
    ratio(1, 1_000_000)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveParams {
    pub c: u32,
    pub precision_bits: u32,
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams { c: 2, precision_bits: 128 }
    }
}

impl CurveParams {
    pub fn new(c: u32, precision_bits: u32) -> Result<Self> {
        let p = CurveParams { c, precision_bits };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c < 1 {
            return Err(Error::InvalidParams("coefficient c must be at least 1".into()));
        }
        if self.precision_bits < 64 {
            return Err(Error::InvalidParams("precision_bits must be at least 64".into()));
        }
        Ok(())
    }

    fn coeff(&self) -> Rational {
        int(self.c as i64)
    }

    /// Precision actually used for a window with denominator bound `l`:
    /// at least `2 * log2(L) + 64` bits.
    pub fn bits_for(&self, l: &Rational) -> u32 {
        let need = 2 * ceil_log2(l).max(0) + 64;
        self.precision_bits.max(need as u32)
    }

    /// `(1/c)^(1/3)`, where the curve crosses `Y = 0`.
    pub fn singular_point(&self, bits: u32) -> Rational {
        real::real_cbrt(&ratio(1, self.c as i64), bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `0 <= X0 < (1/c)^(1/3)`: both coordinates positive.
    A,
    /// `X0 > (1/c)^(1/3)`: `Y` negative.
    B,
    /// `X0 < 0`: `Y` positive.
    C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchWindow {
    pub params: CurveParams,
    /// Bits of working precision used for this window.
    pub bits: u32,
    pub x0: Rational,
    pub h: Rational,
    pub k: Rational,
    pub l: Rational,
    pub y0: Rational,
    pub a: Rational,
    pub b: Rational,
    pub region: Region,
}

impl SearchWindow {
    /// Curve value on the straight line `Y = A X + B` at `x`.
    pub fn midline(&self, x: &Rational) -> Rational {
        &self.a * x + &self.b
    }

    pub fn summary(&self) -> WindowSummary {
        WindowSummary { x0: to_f64(&self.x0), h: to_f64(&self.h), k: to_f64(&self.k), l: to_f64(&self.l) }
    }
}

/// Floating summary of a window for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    #[serde(rename = "X0")]
    pub x0: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

/// The lattice basis of a window. Columns `f1, f2, f3` multiply the integer
/// unknowns `x, y, z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub matrix: QMat3,
    pub window: SearchWindow,
}

impl Basis {
    pub fn columns(&self) -> [[Rational; 3]; 3] {
        [self.matrix.col(0), self.matrix.col(1), self.matrix.col(2)]
    }
}

fn check_margin(params: &CurveParams, x0: &Rational, margin: &Rational, bits: u32) -> Result<()> {
    if (x0 - params.singular_point(bits)).abs() < *margin {
        return Err(Error::SingularPoint { x0: to_f64(x0), margin: to_f64(margin) });
    }
    Ok(())
}

fn check_y0(x0: &Rational, y0: &Rational) -> Result<()> {
    if y0.abs() < base_margin() {
        return Err(Error::SingularPoint { x0: to_f64(x0), margin: to_f64(&base_margin()) });
    }
    Ok(())
}

/// `f(X0) = cbrt(1 - c X0^3)` at `params.precision_bits`.
pub fn curve_y(params: &CurveParams, x0: &Rational) -> Result<Rational> {
    curve_y_bits(params, x0, params.precision_bits)
}

fn curve_y_bits(params: &CurveParams, x0: &Rational, bits: u32) -> Result<Rational> {
    check_margin(params, x0, &base_margin(), bits)?;
    let t = int(1) - params.coeff() * x0.pow(3);
    Ok(real::real_cbrt(&t, bits))
}

/// Tangent slope `A = -c X0^2 / Y0^2`.
pub fn curve_slope(params: &CurveParams, x0: &Rational, y0: &Rational) -> Result<Rational> {
    check_y0(x0, y0)?;
    let a = -(params.coeff() * x0 * x0) / (y0 * y0);
    Ok(round_to_bits(&a, params.precision_bits))
}

/// Second derivative `f''(X0) = -2c X0 / Y0^5`.
pub fn curve_second(params: &CurveParams, x0: &Rational, y0: &Rational) -> Result<Rational> {
    check_y0(x0, y0)?;
    let f2 = -(int(2) * params.coeff() * x0) / y0.pow(5);
    Ok(round_to_bits(&f2, params.precision_bits))
}

pub fn classify_interval(params: &CurveParams, x0: &Rational) -> Result<Region> {
    check_margin(params, x0, &base_margin(), params.precision_bits)?;
    Ok(region_of(params, x0, params.precision_bits))
}

fn region_of(params: &CurveParams, x0: &Rational, bits: u32) -> Region {
    if x0.is_negative() {
        Region::C
    } else if *x0 < params.singular_point(bits) {
        Region::A
    } else {
        Region::B
    }
}

/// Build the window centred at `x0` of width `h`, band half-thickness `k` and
/// denominator bound `l`.
///
/// The intercept `B = Y0 - A X0 + h^2 f''(X0) / 16` gives the line of slope
/// `A` that crosses the curve inside the window instead of lying on one side.
pub fn build_window(
    params: &CurveParams,
    x0: &Rational,
    h: &Rational,
    k: &Rational,
    l: &Rational,
) -> Result<SearchWindow> {
    params.validate()?;
    if !h.is_positive() || !k.is_positive() {
        return Err(Error::InvalidParams("h and K must be positive".into()));
    }
    if *l <= int(1) {
        return Err(Error::InvalidParams("L must exceed 1".into()));
    }
    let bits = params.bits_for(l);
    let p = CurveParams { c: params.c, precision_bits: bits };
    let margin = h.clone().max(base_margin());
    check_margin(&p, x0, &margin, bits)?;

    let y0 = curve_y_bits(&p, x0, bits)?;
    let a = curve_slope(&p, x0, &y0)?;
    let f2 = curve_second(&p, x0, &y0)?;
    let b = round_to_bits(&(&y0 - &a * x0 + h * h * &f2 / int(16)), bits);
    Ok(SearchWindow {
        params: params.clone(),
        bits,
        x0: x0.clone(),
        h: h.clone(),
        k: k.clone(),
        l: l.clone(),
        y0,
        a,
        b,
        region: region_of(&p, x0, bits),
    })
}

/// Convenience wrapper taking decimal text, e.g. `("0.31415", "0.001", "1e-5", "1000")`.
pub fn build_window_decimal(params: &CurveParams, x0: &str, h: &str, k: &str, l: &str) -> Result<SearchWindow> {
    build_window(
        params,
        &real::parse_decimal(x0)?,
        &real::parse_decimal(h)?,
        &real::parse_decimal(k)?,
        &real::parse_decimal(l)?,
    )
}

/// Basis with rows `(2/(hL), 0, -2X0/(hL))`, `(-A/(KL), 1/(KL), -B/(KL))`,
/// `(0, 0, 1/L)`, each entry rounded at the window's precision.
pub fn build_basis(window: &SearchWindow) -> Basis {
    let w = window;
    let r = |q: Rational| round_to_bits(&q, w.bits);
    let hl = &w.h * &w.l;
    let kl = &w.k * &w.l;
    let zero = Rational::zero();
    let matrix = QMat3::from_rows([
        [r(int(2) / &hl), zero.clone(), r(-(int(2) * &w.x0) / &hl)],
        [r(-&w.a / &kl), r(int(1) / &kl), r(-&w.b / &kl)],
        [zero.clone(), zero, r(int(1) / &w.l)],
    ]);
    Basis { matrix, window: window.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{parse_decimal as dec, pow2_rational};

    fn p2() -> CurveParams {
        CurveParams::default()
    }

    fn close(a: &Rational, b: f64, tol: f64) -> bool {
        (to_f64(a) - b).abs() <= tol
    }

    #[test]
    fn curve_values() {
        assert_eq!(curve_y(&p2(), &int(0)).unwrap(), int(1));
        assert_eq!(curve_slope(&p2(), &int(0), &int(1)).unwrap(), int(0));
        assert_eq!(curve_second(&p2(), &int(0), &int(1)).unwrap(), int(0));
        // Y0 < 0 past the singular point.
        assert!(curve_y(&p2(), &int(1)).unwrap().is_negative());
        let at_singular = p2().singular_point(128);
        assert!(matches!(curve_y(&p2(), &at_singular), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn worked_example_slope_and_second_derivative() {
        let x0 = dec("0.31415").unwrap();
        let y0 = curve_y(&p2(), &x0).unwrap();
        let a = curve_slope(&p2(), &x0, &y0).unwrap();
        assert!(close(&a, -0.205986, 1e-4));
        // 40-digit reference evaluation of -4 X0 / Y0^5.
        let f2 = curve_second(&p2(), &x0, &y0).unwrap();
        assert!(close(&f2, -1.398077065028211, 1e-12));
    }

    #[test]
    fn slope_at_minus_one() {
        let y0 = curve_y(&p2(), &int(-1)).unwrap();
        let a = curve_slope(&p2(), &int(-1), &y0).unwrap();
        let expected = -2.0 * 3f64.powf(-2.0 / 3.0);
        assert!(close(&a, expected, 1e-14));
        assert!(curve_second(&p2(), &int(-1), &y0).unwrap().is_positive());
    }

    #[test]
    fn regions() {
        assert_eq!(classify_interval(&p2(), &dec("0.3").unwrap()).unwrap(), Region::A);
        assert_eq!(classify_interval(&p2(), &int(0)).unwrap(), Region::A);
        assert_eq!(classify_interval(&p2(), &int(1)).unwrap(), Region::B);
        assert_eq!(classify_interval(&p2(), &int(-5)).unwrap(), Region::C);
        let c1 = CurveParams::new(1, 64).unwrap();
        assert_eq!(classify_interval(&c1, &dec("0.9").unwrap()).unwrap(), Region::A);
        assert!(classify_interval(&c1, &int(1)).is_err());
    }

    #[test]
    fn worked_example_window() {
        let w = build_window_decimal(&p2(), "0.31415", "0.001", "0.00001", "1000").unwrap();
        assert!(close(&w.a, -0.205986, 1e-4));
        assert!(close(&w.b, 1.043599, 1e-4));
        assert_eq!(w.region, Region::A);
        assert!(w.bits >= 2 * 10 + 64);
    }

    #[test]
    fn zero_centre_midline_is_tangent() {
        let w = build_window_decimal(&p2(), "0", "0.3", "0.001", "50").unwrap();
        assert_eq!(w.b, int(1));
        assert_eq!(w.a, int(0));
    }

    #[test]
    fn midline_straddles_curve() {
        let w = build_window_decimal(&p2(), "0.5", "0.01", "0.001", "100").unwrap();
        let f = |x: &Rational| curve_y(&p2(), x).unwrap();
        let centre_gap = f(&w.x0) - w.midline(&w.x0);
        assert!(centre_gap.is_positive());
        let shrink = dec("0.999").unwrap();
        for side in [-1, 1] {
            let x = &w.x0 + int(side) * &w.h / int(2) * &shrink;
            assert!((f(&x) - w.midline(&x)).is_negative(), "side {side}");
        }
    }

    #[test]
    fn rejects_bad_windows() {
        let p = p2();
        let e = build_window_decimal(&p, "0.1", "0", "0.1", "10");
        assert!(matches!(e, Err(Error::InvalidParams(_))));
        let e = build_window_decimal(&p, "0.1", "0.1", "-1", "10");
        assert!(matches!(e, Err(Error::InvalidParams(_))));
        let e = build_window_decimal(&p, "0.1", "0.1", "0.1", "1");
        assert!(matches!(e, Err(Error::InvalidParams(_))));
        // Within h of the singular point 0.7937...
        let e = build_window_decimal(&p, "0.79", "0.01", "0.1", "10");
        assert!(matches!(e, Err(Error::SingularPoint { .. })));
        assert!(CurveParams::new(0, 128).is_err());
        assert!(CurveParams::new(2, 32).is_err());
    }

    #[test]
    fn worked_example_basis_entries() {
        let w = build_window_decimal(&p2(), "0.31415", "0.001", "0.00001", "1000").unwrap();
        let f = build_basis(&w).matrix.to_f64();
        let printed = [[2.0, 0.0, -0.6283], [20.5986, 100.0, -104.3599], [0.0, 0.0, 0.001]];
        let unit = [[1.0, 1.0, 1e-4], [1e-4, 1.0, 1e-4], [1.0, 1.0, 1e-3]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((f[i][j] - printed[i][j]).abs() <= 2.0 * unit[i][j], "entry ({i},{j}) = {}", f[i][j]);
            }
        }
    }

    #[test]
    fn trivial_basis() {
        // h = 2, K = 1, L = 1 breaks the window-validation rules, so assemble it by hand.
        let w = SearchWindow {
            params: p2(),
            bits: 128,
            x0: int(0),
            h: int(2),
            k: int(1),
            l: int(1),
            y0: int(1),
            a: int(0),
            b: int(1),
            region: Region::A,
        };
        let expect = QMat3::from_rows([[int(1), int(0), int(0)], [int(0), int(1), int(-1)], [int(0), int(0), int(1)]]);
        assert_eq!(build_basis(&w).matrix, expect);
    }

    #[test]
    fn basis_determinant() {
        for (x0, h, k, l) in
            [("0.31415", "0.001", "1e-5", "1000"), ("-3.2", "0.01", "0.001", "100"), ("2.5", "1e-4", "1e-7", "10000")]
        {
            let w = build_window_decimal(&p2(), x0, h, k, l).unwrap();
            let b = build_basis(&w);
            let det = b.matrix.det();
            let expect = int(2) / (&w.h * &w.k * w.l.pow(3));
            let rel = ((det - &expect) / &expect).abs();
            assert!(rel <= pow2_rational(-(w.bits as i64) + 4), "{x0}");
        }
    }

    #[test]
    fn same_pattern_in_every_region() {
        for x0 in ["0.4", "1.7", "-6"] {
            let w = build_window_decimal(&p2(), x0, "0.001", "1e-5", "1000").unwrap();
            let m = build_basis(&w).matrix;
            assert!(m.get(0, 1).is_zero() && m.get(2, 0).is_zero() && m.get(2, 1).is_zero());
            assert_eq!(*m.get(0, 0), int(2));
            assert!(close(m.get(0, 2), -2.0 * to_f64(&w.x0), 1e-12));
            assert!(close(m.get(1, 0), -to_f64(&w.a) * 100.0, 1e-9));
            assert!(close(m.get(1, 2), -to_f64(&w.b) * 100.0, 1e-9));
        }
    }
}
