//! Exact-rational LLL reduction of a 3x3 column basis.
//!
//! The reduction tracks the integer transform `M` so that `H = F * M`, with
//! `M` unimodular. Every quantity, including the Gram-Schmidt data, is an
//! exact rational, so the size-reduction and Lovasz conditions can be checked
//! without tolerance.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::curve::Basis;
use crate::error::{Error, Result};
use crate::matrix::{IMat3, QMat3};
use crate::real::{int, ratio, round_nearest, Rational};

type Vector = [Rational; 3];

fn dot(a: &Vector, b: &Vector) -> Rational {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn axpy(y: &Vector, q: &Rational, x: &Vector) -> Vector {
    // y - q * x
    std::array::from_fn(|i| &y[i] - q * &x[i])
}

/// Gram-Schmidt data of a column basis `b_0, b_1, b_2`:
/// `b_i = b*_i + sum_{j<i} mu[i][j] b*_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSchmidt {
    pub ortho: [Vector; 3],
    pub mu: [[Rational; 3]; 3],
    /// Squared norms `|b*_i|^2`.
    pub norms: [Rational; 3],
}

impl GramSchmidt {
    /// `prod |b*_i|^2`, which equals `det^2` of the basis.
    pub fn norm_product(&self) -> Rational {
        &self.norms[0] * &self.norms[1] * &self.norms[2]
    }
}

pub fn gram_schmidt(basis: &QMat3) -> Result<GramSchmidt> {
    let cols = [basis.col(0), basis.col(1), basis.col(2)];
    gram_schmidt_cols(&cols)
}

fn gram_schmidt_cols(cols: &[Vector; 3]) -> Result<GramSchmidt> {
    let zero = || Rational::zero();
    let mut ortho: [Vector; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    let mut mu: [[Rational; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
    let mut norms: [Rational; 3] = std::array::from_fn(|_| zero());
    for i in 0..3 {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&cols[i], &ortho[j]) / &norms[j];
            v = axpy(&v, &mu[i][j], &ortho[j]);
        }
        norms[i] = dot(&v, &v);
        if norms[i].is_zero() {
            return Err(Error::DegenerateBasis);
        }
        mu[i][i] = Rational::one();
        ortho[i] = v;
    }
    Ok(GramSchmidt { ortho, mu, norms })
}

/// Integer 3x3 matrix with determinant +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodularTransform(IMat3);

impl UnimodularTransform {
    pub fn new(m: IMat3) -> Result<Self> {
        if is_unimodular(&m) {
            Ok(UnimodularTransform(m))
        } else {
            Err(Error::InvalidParams("matrix is not unimodular".into()))
        }
    }

    pub fn identity() -> Self {
        UnimodularTransform(IMat3::identity())
    }

    pub fn matrix(&self) -> &IMat3 {
        &self.0
    }

    pub fn det(&self) -> BigInt {
        self.0.det()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLattice {
    pub f: QMat3,
    pub m: UnimodularTransform,
    pub h: QMat3,
    pub delta: Rational,
    gso_cache: OnceLock<GramSchmidt>,
}

impl ReducedLattice {
    /// Gram-Schmidt data of `H`, computed on first use.
    pub fn gso(&self) -> &GramSchmidt {
        self.gso_cache.get_or_init(|| gram_schmidt(&self.h).expect("reduced basis is nonsingular"))
    }

    /// Size reduction `|mu_ij| <= 1/2` and the Lovasz condition, checked exactly.
    pub fn is_reduced(&self) -> bool {
        let g = self.gso();
        let half = ratio(1, 2);
        for i in 0..3 {
            for j in 0..i {
                if g.mu[i][j].abs() > half {
                    return false;
                }
            }
        }
        (1..3).all(|k| {
            let mu = &g.mu[k][k - 1];
            &self.delta * &g.norms[k - 1] <= &g.norms[k] + mu * mu * &g.norms[k - 1]
        })
    }

    pub fn columns(&self) -> [Vector; 3] {
        [self.h.col(0), self.h.col(1), self.h.col(2)]
    }
}

pub fn default_delta() -> Rational {
    ratio(3, 4)
}

/// LLL-reduce the columns of `f` with parameter `delta` in `(1/4, 1)`.
///
/// The columns are scaled to integers by their common denominator and
/// reduced with integral Gram-Schmidt data (`d_i` and `lambda_ij`), which
/// follows the same steps as rational LLL without any fractions.
pub fn lll_reduce(f: &QMat3, delta: &Rational) -> Result<ReducedLattice> {
    if *delta <= ratio(1, 4) || *delta >= int(1) {
        return Err(Error::InvalidParams("delta must lie in (1/4, 1)".into()));
    }
    if f.det().is_zero() {
        return Err(Error::DegenerateBasis);
    }
    let denom = f.rows().iter().flatten().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    let scaled: [[BigInt; 3]; 3] = std::array::from_fn(|j| {
        std::array::from_fn(|i| {
            let x = f.get(i, j);
            x.numer() * (&denom / x.denom())
        })
    });
    let (_, m) = integral_lll(scaled, delta.numer(), delta.denom());
    let m = UnimodularTransform(IMat3::from_cols(m));
    let h = f.mul_mat(&m.0.to_rational());
    Ok(ReducedLattice { f: f.clone(), m, h, delta: delta.clone(), gso_cache: OnceLock::new() })
}

fn idot(a: &[BigInt; 3], b: &[BigInt; 3]) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// Integral LLL on basis vectors `b` (full rank). Returns the reduced vectors
/// and, for each, its coefficients in the input basis.
///
/// `d[i]` is the Gram determinant of the first `i` vectors (`d[0] = 1`) and
/// `lam[k][j] = d[j + 1] * mu_kj`; both stay integral throughout.
#[allow(clippy::needless_range_loop)]
fn integral_lll(mut b: [[BigInt; 3]; 3], p: &BigInt, q: &BigInt) -> ([[BigInt; 3]; 3], [[BigInt; 3]; 3]) {
    const N: usize = 3;
    let z = BigInt::zero;
    let mut coeff: [[BigInt; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { BigInt::one() } else { z() }));
    let mut d: [BigInt; N + 1] = std::array::from_fn(|_| z());
    let mut lam: [[BigInt; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| z()));
    d[0] = BigInt::one();
    d[1] = idot(&b[0], &b[0]);

    fn red(
        b: &mut [[BigInt; 3]; 3],
        coeff: &mut [[BigInt; 3]; 3],
        lam: &mut [[BigInt; 3]; 3],
        d: &[BigInt; 4],
        k: usize,
        l: usize,
    ) {
        let dl = &d[l + 1];
        if (&lam[k][l] * 2i32).abs() <= *dl {
            return;
        }
        let qk = round_nearest(&Rational::new(lam[k][l].clone(), dl.clone()));
        let (bl, cl) = (b[l].clone(), coeff[l].clone());
        for i in 0..3 {
            b[k][i] -= &qk * &bl[i];
            coeff[k][i] -= &qk * &cl[i];
        }
        lam[k][l] -= &qk * dl;
        for i in 0..l {
            let t = &qk * &lam[l][i];
            lam[k][i] -= t;
        }
    }

    let mut k = 1;
    let mut kmax = 0;
    while k < N {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = idot(&b[k], &b[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k + 1] = u;
                }
            }
        }
        loop {
            red(&mut b, &mut coeff, &mut lam, &d, k, k - 1);
            let l = &lam[k][k - 1];
            // Lovasz fails: q d_k d_{k-2} < p d_{k-1}^2 - q lambda^2, shifted by one for d[0] = 1.
            let swap = q * &d[k + 1] * &d[k - 1] < p * &d[k] * &d[k] - q * l * l;
            if !swap {
                break;
            }
            b.swap(k, k - 1);
            coeff.swap(k, k - 1);
            for j in 0..k - 1 {
                let t = std::mem::take(&mut lam[k][j]);
                lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
            }
            let lk = lam[k][k - 1].clone();
            let bb = (&d[k - 1] * &d[k + 1] + &lk * &lk) / &d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &lk * &t) / &d[k];
                lam[i][k - 1] = (&bb * &t + &lk * &lam[i][k]) / &d[k + 1];
            }
            d[k] = bb;
            if k > 1 {
                k -= 1;
            }
        }
        for l in (0..k - 1).rev() {
            red(&mut b, &mut coeff, &mut lam, &d, k, l);
        }
        k += 1;
    }
    (b, coeff)
}

impl Basis {
    pub fn reduce(&self, delta: &Rational) -> Result<ReducedLattice> {
        lll_reduce(&self.matrix, delta)
    }
}

pub fn is_unimodular(m: &IMat3) -> bool {
    m.det().abs().is_one()
}

/// Whether the columns of `f` and `h` generate the same lattice.
pub fn lattices_equal(f: &QMat3, h: &QMat3) -> Result<bool> {
    let fi = f.inverse().ok_or(Error::DegenerateBasis)?;
    let hi = h.inverse().ok_or(Error::DegenerateBasis)?;
    Ok(fi.mul_mat(h).is_integral() && hi.mul_mat(f).is_integral())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_basis, build_window_decimal, CurveParams};
    use crate::real::{parse_decimal, to_f64};

    fn q(rows: [[i64; 3]; 3]) -> QMat3 {
        IMat3::from_i64(rows).to_rational()
    }

    #[test]
    fn gram_schmidt_identity() {
        let g = gram_schmidt(&QMat3::identity()).unwrap();
        assert_eq!(QMat3::from_cols(g.ortho.clone()), QMat3::identity());
        for i in 0..3 {
            for j in 0..i {
                assert!(g.mu[i][j].is_zero());
            }
        }
    }

    #[test]
    fn gram_schmidt_triangular() {
        // Columns (1,0,0), (1,1,0), (1,1,1).
        let b = q([[1, 1, 1], [0, 1, 1], [0, 0, 1]]);
        let g = gram_schmidt(&b).unwrap();
        assert_eq!(g.mu[1][0], int(1));
        assert_eq!(g.mu[2][0], int(1));
        assert_eq!(g.mu[2][1], int(1));
        assert_eq!(g.norm_product(), b.det() * b.det());
    }

    #[test]
    fn gram_schmidt_detects_dependence() {
        let b = q([[1, 2, 0], [1, 2, 1], [0, 0, 1]]);
        assert!(matches!(gram_schmidt(&b), Err(Error::DegenerateBasis)));
        assert!(matches!(lll_reduce(&b, &default_delta()), Err(Error::DegenerateBasis)));
    }

    #[test]
    fn reduce_identity() {
        let r = lll_reduce(&QMat3::identity(), &default_delta()).unwrap();
        assert!(is_unimodular(r.m.matrix()));
        assert!(lattices_equal(&r.f, &r.h).unwrap());
        assert!(r.is_reduced());
    }

    #[test]
    fn reduce_diagonal() {
        let f = QMat3::diag([int(5), ratio(1, 7), int(3)]);
        let r = lll_reduce(&f, &default_delta()).unwrap();
        assert_eq!(r.h.det().abs(), ratio(15, 7));
        // Each reduced column is a signed generator of the orthogonal lattice.
        for col in r.columns() {
            assert_eq!(col.iter().filter(|x| !x.is_zero()).count(), 1);
        }
        assert!(r.is_reduced());
        assert!(lattices_equal(&f, &r.h).unwrap());
    }

    #[test]
    fn delta_range() {
        let f = QMat3::identity();
        assert!(lll_reduce(&f, &ratio(1, 4)).is_err());
        assert!(lll_reduce(&f, &int(1)).is_err());
        assert!(lll_reduce(&f, &ratio(999, 1000)).is_ok());
    }

    #[test]
    fn unimodular_checks() {
        assert!(is_unimodular(&IMat3::identity()));
        assert!(!is_unimodular(&IMat3::diag([1, 1, 2].map(BigInt::from))));
        let printed = IMat3::from_i64([[-15, -74, -313], [-47, -230, -976], [-48, -235, -997]]);
        assert!(is_unimodular(&printed));
        assert!(UnimodularTransform::new(IMat3::diag([1, 1, 2].map(BigInt::from))).is_err());
    }

    #[test]
    fn lattice_equality() {
        let f = q([[2, 1, 0], [0, 3, 1], [1, 0, 1]]);
        assert!(lattices_equal(&f, &f).unwrap());
        let m = IMat3::from_i64([[1, 2, 3], [0, 1, 4], [0, 0, 1]]);
        assert!(lattices_equal(&f, &f.mul_mat(&m.to_rational())).unwrap());
        let d = QMat3::diag([int(2), int(1), int(1)]);
        assert!(!lattices_equal(&QMat3::identity(), &d).unwrap());
    }

    #[test]
    fn worked_example_first_vector_is_short() {
        let w = build_window_decimal(&CurveParams::default(), "0.31415", "0.001", "0.00001", "1000").unwrap();
        let r = build_basis(&w).reduce(&default_delta()).unwrap();
        let first = r.h.col(0);
        let norm = to_f64(&dot(&first, &first)).sqrt();
        assert!(norm <= 0.68, "first column norm {norm}");
        assert!(r.is_reduced());
        assert!(is_unimodular(r.m.matrix()));
    }

    #[test]
    fn deterministic() {
        let w = build_window_decimal(&CurveParams::default(), "-2.75", "0.0004", "1.6e-6", "2500").unwrap();
        let b = build_basis(&w);
        let d = parse_decimal("0.99").unwrap();
        assert_eq!(b.reduce(&d).unwrap().m, b.reduce(&d).unwrap().m);
    }
}
