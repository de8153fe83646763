//! Integer points of the feasible pyramid in reduced coordinates.
//!
//! With `u = H v'`, the pyramid is `{ |u1| <= u3, |u2| <= u3, 0 <= u3 <= 1 }`,
//! the convex hull of the origin and the four solutions of `H v' = (+-1, +-1, 1)`.
//! We scan the outward-rounded bounding box of those five vertices and keep
//! the points that pass the membership test. A fixed set of short probe
//! vectors (the reduced basis vectors and their simplest combinations) is
//! always reported as well, since the shortest lattice vectors often sit just
//! outside the cone.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{ReducedLattice, UnimodularTransform};
use crate::matrix::QMat3;
use crate::real::{int, ratio, Rational};

pub const DEFAULT_BOX_CAP: u128 = 10_000_000;

pub fn default_eps() -> Rational {
    ratio(1, 1_000_000_000)
}

/// Candidate in search form, `d = c x^3 + y^3 - z_s^3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateVector {
    pub x: BigInt,
    pub y: BigInt,
    pub z_s: BigInt,
}

impl CandidateVector {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>, z_s: impl Into<BigInt>) -> Self {
        CandidateVector { x: x.into(), y: y.into(), z_s: z_s.into() }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z_s.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    /// `H^{-1} (s1, s2, 1)` for `(s1, s2)` in `(+,+), (+,-), (-,+), (-,-)`.
    pub base_vertices: [[Rational; 3]; 4],
    pub eps: Rational,
}

/// Inclusive integer bounding box in primed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl BoundingBox {
    pub fn point_count(&self) -> u128 {
        (0..3).map(|i| (self.hi[i] - self.lo[i] + 1) as u128).product()
    }

    pub fn contains(&self, v: &[i64; 3]) -> bool {
        (0..3).all(|i| self.lo[i] <= v[i] && v[i] <= self.hi[i])
    }

    /// Points in `z`-major, then `y`, then `x` order.
    pub fn points(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        (self.lo[2]..=self.hi[2]).flat_map(move |z| {
            (self.lo[1]..=self.hi[1]).flat_map(move |y| (self.lo[0]..=self.hi[0]).map(move |x| [x, y, z]))
        })
    }
}

const SIGNS: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn pyramid_vertices(h: &QMat3, eps: &Rational) -> Result<Pyramid> {
    let inv = h.inverse().ok_or(Error::DegenerateBasis)?;
    let base_vertices = SIGNS.map(|(s1, s2)| inv.mul_vec(&[int(s1), int(s2), int(1)]));
    Ok(Pyramid { base_vertices, eps: eps.clone() })
}

impl Pyramid {
    /// Bounding box of the apex and base vertices, rounded outward.
    pub fn bounding_box(&self) -> Result<BoundingBox> {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for v in &self.base_vertices {
            for i in 0..3 {
                let too_big = || Error::BoxTooLarge { points: u128::MAX, cap: 0 };
                let f = v[i].floor().to_integer().to_i64().ok_or_else(too_big)?;
                let c = v[i].ceil().to_integer().to_i64().ok_or_else(too_big)?;
                lo[i] = lo[i].min(f);
                hi[i] = hi[i].max(c);
            }
        }
        Ok(BoundingBox { lo, hi })
    }
}

/// Membership test with `H` scaled to an integer matrix by a common denominator.
#[derive(Debug, Clone)]
pub struct ConeTest {
    scaled: [[BigInt; 3]; 3],
    denom: BigInt,
    slack: BigInt,
}

impl ConeTest {
    pub fn new(h: &QMat3, eps: &Rational) -> Self {
        let denom = h.rows().iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let x = h.get(i, j);
                x.numer() * (&denom / x.denom())
            })
        });
        let slack = (eps * Rational::from_integer(denom.clone())).floor().to_integer();
        ConeTest { scaled, denom, slack }
    }

    pub fn contains(&self, v: &[i64; 3]) -> bool {
        let v = v.map(BigInt::from);
        let u: [BigInt; 3] = std::array::from_fn(|i| {
            let r = &self.scaled[i];
            &r[0] * &v[0] + &r[1] * &v[1] + &r[2] * &v[2]
        });
        self.contains_scaled(&u)
    }

    /// Test on `u = denom * H v'`, which is integral.
    fn contains_scaled(&self, u: &[BigInt; 3]) -> bool {
        // floor(eps * denom) is the exact integer slack for integral u.
        let top = &u[2] + &self.slack;
        u[0].abs() <= top && u[1].abs() <= top && u[2] >= -&self.slack && &u[2] - &self.denom <= self.slack
    }

    fn column(&self, j: usize) -> [BigInt; 3] {
        std::array::from_fn(|i| self.scaled[i][j].clone())
    }

    /// Members of `bbox`, in box order, stepping `u` by columns of `H`
    /// instead of multiplying per point.
    pub fn scan(&self, bbox: &BoundingBox) -> Vec<[i64; 3]> {
        let cols = [self.column(0), self.column(1), self.column(2)];
        let add = |u: &mut [BigInt; 3], c: &[BigInt; 3]| {
            for i in 0..3 {
                u[i] += &c[i];
            }
        };
        let start = bbox.lo.map(BigInt::from);
        let mut u_z: [BigInt; 3] =
            std::array::from_fn(|i| (0..3).map(|j| &self.scaled[i][j] * &start[j]).sum::<BigInt>());
        let mut out = Vec::new();
        for z in bbox.lo[2]..=bbox.hi[2] {
            let mut u_y = u_z.clone();
            for y in bbox.lo[1]..=bbox.hi[1] {
                let mut u = u_y.clone();
                for x in bbox.lo[0]..=bbox.hi[0] {
                    if (x, y, z) != (0, 0, 0) && self.contains_scaled(&u) {
                        out.push([x, y, z]);
                    }
                    add(&mut u, &cols[0]);
                }
                add(&mut u_y, &cols[1]);
            }
            add(&mut u_z, &cols[2]);
        }
        out
    }
}

/// Whether `H v'` lies in the pyramid enlarged by `eps` on every face.
pub fn contains(h: &QMat3, v: &[i64; 3], eps: &Rational) -> bool {
    ConeTest::new(h, eps).contains(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointSource {
    Cone,
    /// A probe vector that failed the membership test.
    Probe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimedPoint {
    pub v: [i64; 3],
    pub source: PointSource,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub bounding_box: BoundingBox,
    pub points: Vec<PrimedPoint>,
}

impl Enumeration {
    pub fn cone_points(&self) -> impl Iterator<Item = &[i64; 3]> {
        self.points.iter().filter(|p| p.source == PointSource::Cone).map(|p| &p.v)
    }

    pub fn cone_count(&self) -> usize {
        self.cone_points().count()
    }

    pub fn probe_count(&self) -> usize {
        self.points.len() - self.cone_count()
    }
}

/// `+-e1, +-e2, +-e3` and `+-e1 +- e2`.
pub const PROBES: [[i64; 3]; 10] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [-1, -1, 0],
];

/// Non-origin integer points of the pyramid of `h`, in box order.
pub fn enumerate_cone(h: &QMat3, eps: &Rational, cap: u128) -> Result<(BoundingBox, Vec<[i64; 3]>)> {
    let bbox = pyramid_vertices(h, eps)?.bounding_box()?;
    let points = bbox.point_count();
    if points > cap {
        return Err(Error::BoxTooLarge { points, cap });
    }
    Ok((bbox, ConeTest::new(h, eps).scan(&bbox)))
}

/// Cone points of the reduced lattice followed by the in-box probes the
/// membership test rejected. Never yields the origin or a duplicate.
pub fn enumerate_candidates(red: &ReducedLattice, eps: &Rational, cap: u128) -> Result<Enumeration> {
    let (bbox, cone) = enumerate_cone(&red.h, eps, cap)?;
    let test = ConeTest::new(&red.h, eps);
    let mut points: Vec<PrimedPoint> = cone.into_iter().map(|v| PrimedPoint { v, source: PointSource::Cone }).collect();
    for p in PROBES {
        if bbox.contains(&p) && !test.contains(&p) {
            points.push(PrimedPoint { v: p, source: PointSource::Probe });
        }
    }
    Ok(Enumeration { bounding_box: bbox, points })
}

/// `(x, y, z_s) = M v'`.
pub fn map_candidate(m: &UnimodularTransform, v: &[i64; 3]) -> CandidateVector {
    let [x, y, z_s] = m.matrix().mul_vec(&v.map(BigInt::from));
    CandidateVector { x, y, z_s }
}

/// Volume `(4/3) / |det H|` of the pyramid in primed coordinates.
pub fn expected_volume(h: &QMat3) -> Rational {
    ratio(4, 3) / h.det().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IMat3;

    fn quarter_diag() -> QMat3 {
        QMat3::diag([ratio(1, 2), ratio(1, 2), ratio(1, 4)])
    }

    #[test]
    fn identity_vertices() {
        let p = pyramid_vertices(&QMat3::identity(), &Rational::zero()).unwrap();
        for (v, (s1, s2)) in p.base_vertices.iter().zip(SIGNS) {
            assert_eq!(v, &[int(s1), int(s2), int(1)]);
        }
    }

    #[test]
    fn scaled_vertices() {
        let p = pyramid_vertices(&quarter_diag(), &Rational::zero()).unwrap();
        for (v, (s1, s2)) in p.base_vertices.iter().zip(SIGNS) {
            assert_eq!(v, &[int(2 * s1), int(2 * s2), int(4)]);
        }
        let b = p.bounding_box().unwrap();
        assert_eq!(b, BoundingBox { lo: [-2, -2, 0], hi: [2, 2, 4] });
    }

    #[test]
    fn membership() {
        let id = QMat3::identity();
        let zero = Rational::zero();
        assert!(contains(&id, &[0, 0, 1], &zero));
        assert!(!contains(&id, &[2, 0, 1], &zero));
        assert!(contains(&id, &[1, -1, 1], &zero));
        assert!(!contains(&id, &[0, 0, 2], &zero));
        assert!(!contains(&id, &[0, 0, -1], &zero));
        // Slack admits points just outside.
        let h = QMat3::diag([int(1), int(1), ratio(1, 2)]);
        assert!(!contains(&h, &[1, 0, 1], &zero));
        assert!(contains(&h, &[1, 0, 1], &ratio(1, 2)));
    }

    #[test]
    fn quarter_diag_has_44_cone_points() {
        let (_, cone) = enumerate_cone(&quarter_diag(), &Rational::zero(), DEFAULT_BOX_CAP).unwrap();
        assert_eq!(cone.len(), 44);
        let per_plane: Vec<usize> = (0..=4).map(|z| cone.iter().filter(|v| v[2] == z).count()).collect();
        assert_eq!(per_plane, vec![0, 1, 9, 9, 25]);
    }

    #[test]
    fn identity_cone_and_probes() {
        let red = crate::lattice::lll_reduce(&QMat3::identity(), &crate::lattice::default_delta()).unwrap();
        let e = enumerate_candidates(&red, &Rational::zero(), DEFAULT_BOX_CAP).unwrap();
        let cone: Vec<_> = e.cone_points().cloned().collect();
        // The whole z = 1 plane of the box: |x|, |y| <= 1.
        assert_eq!(cone.len(), 9);
        assert!(cone.contains(&[0, 0, 1]));
        assert!(e.points.iter().all(|p| p.v != [0, 0, 0]));
        let mut seen = std::collections::HashSet::new();
        assert!(e.points.iter().all(|p| seen.insert(p.v)));
        assert!(e.points.iter().any(|p| p.v == [1, 0, 0] && p.source == PointSource::Probe));
    }

    #[test]
    fn box_cap() {
        let h = QMat3::diag([ratio(1, 1000), ratio(1, 1000), ratio(1, 1000)]);
        assert!(matches!(enumerate_cone(&h, &Rational::zero(), 1000), Err(Error::BoxTooLarge { .. })));
    }

    #[test]
    fn mapping() {
        let id = UnimodularTransform::identity();
        assert_eq!(map_candidate(&id, &[3, -4, 5]), CandidateVector::new(3, -4, 5));
        let m = UnimodularTransform::new(IMat3::from_i64([[-15, -74, -313], [-47, -230, -976], [-48, -235, -997]]))
            .unwrap();
        assert_eq!(map_candidate(&m, &[1, 0, 0]), CandidateVector::new(-15, -47, -48));
        assert_eq!(map_candidate(&m, &[0, 1, 0]), CandidateVector::new(-74, -230, -235));
    }

    #[test]
    fn degenerate() {
        let h = QMat3::diag([int(1), int(0), int(1)]);
        assert!(matches!(pyramid_vertices(&h, &Rational::zero()), Err(Error::DegenerateBasis)));
    }
}
