//! Exact verification, canonical reporting form and filters.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::curve::WindowSummary;
use crate::error::{Error, Result};
use crate::pyramid::CandidateVector;

fn cube(v: &BigInt) -> BigInt {
    v * v * v
}

/// `c x^3 + y^3 - z_s^3`.
pub fn eval_search_form(c: u32, x: &BigInt, y: &BigInt, z_s: &BigInt) -> BigInt {
    BigInt::from(c) * cube(x) + cube(y) - cube(z_s)
}

/// `c x^3 + y^3 + z^3`.
pub fn eval_report_form(c: u32, x: &BigInt, y: &BigInt, z: &BigInt) -> BigInt {
    BigInt::from(c) * cube(x) + cube(y) + cube(z)
}

/// A verified solution in reporting form with `d > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    pub c: u32,
    pub d: BigInt,
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
}

impl Solution {
    pub fn new(c: u32, x: impl Into<BigInt>, y: impl Into<BigInt>, z: impl Into<BigInt>) -> Self {
        let (x, y, z) = (x.into(), y.into(), z.into());
        let d = eval_report_form(c, &x, &y, &z);
        Solution { c, d, x, y, z }
    }

    pub fn holds(&self) -> bool {
        eval_report_form(self.c, &self.x, &self.y, &self.z) == self.d
    }

    pub fn min_yz(&self) -> BigInt {
        self.y.abs().min(self.z.abs())
    }
}

/// Map a search-form candidate to reporting form (`z = -z_s`), negating all
/// three coordinates when needed so that `d > 0`. `None` when `d = 0`.
pub fn canonicalize(c: u32, cand: &CandidateVector) -> Option<Solution> {
    let d = eval_search_form(c, &cand.x, &cand.y, &cand.z_s);
    if d.is_zero() {
        return None;
    }
    let (x, y, z) = (cand.x.clone(), cand.y.clone(), -&cand.z_s);
    Some(if d.is_negative() { Solution { c, d: -d, x: -x, y: -y, z: -z } } else { Solution { c, d, x, y, z } })
}

/// A solution together with where it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub solution: Solution,
    pub window: Option<WindowSummary>,
    pub seed: u64,
    /// Trial index, `-1` for oracle output.
    pub trial: i64,
}

impl SolutionRecord {
    pub fn validate(&self) -> Result<()> {
        let s = &self.solution;
        if !s.holds() {
            return Err(Error::InvalidRecord(format!("{}*{}^3 + {}^3 + {}^3 != {}", s.c, s.x, s.y, s.z, s.d)));
        }
        if !s.d.is_positive() {
            return Err(Error::InvalidRecord(format!("d = {} is not positive", s.d)));
        }
        Ok(())
    }
}

const MAX_MODULUS: u32 = 16;

/// Local obstructions: the residues `c a^3 + b^3 + e^3` reaches modulo every `m <= 16`.
#[derive(Debug, Clone)]
pub struct ResidueFilter {
    c: u32,
    reachable: Vec<Vec<bool>>,
}

impl ResidueFilter {
    pub fn new(c: u32) -> Self {
        let reachable = (0..=MAX_MODULUS)
            .map(|m| {
                if m < 2 {
                    return vec![true];
                }
                let mut hit = vec![false; m as usize];
                let cubes: Vec<u64> = (0..m as u64).map(|a| a * a * a % m as u64).collect();
                for &a in &cubes {
                    for &b in &cubes {
                        for &e in &cubes {
                            hit[((c as u64 * a + b + e) % m as u64) as usize] = true;
                        }
                    }
                }
                hit
            })
            .collect();
        ResidueFilter { c, reachable }
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn admissible(&self, d: &BigInt) -> bool {
        (2..=MAX_MODULUS).all(|m| {
            let r = d.mod_floor_u32(m);
            self.reachable[m as usize][r as usize]
        })
    }
}

trait ModFloor {
    fn mod_floor_u32(&self, m: u32) -> u32;
}

impl ModFloor for BigInt {
    fn mod_floor_u32(&self, m: u32) -> u32 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(m)).to_u32().expect("residue below modulus")
    }
}

/// Whether congruences rule out every solution for `d`. For `c = 1` this is
/// exactly `d mod 9 in {4, 5}`; `c = 2` has no obstruction.
pub fn residue_admissible(c: u32, d: &BigInt) -> bool {
    match c {
        1 => !matches!(d.mod_floor_u32(9), 4 | 5),
        2 => true,
        _ => ResidueFilter::new(c).admissible(d),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    /// Empty means any `d <= d_max`.
    pub wanted: BTreeSet<u64>,
    pub d_max: u64,
    pub min_yz: u64,
}

impl Default for TargetSet {
    fn default() -> Self {
        TargetSet { wanted: BTreeSet::new(), d_max: 10_000, min_yz: 100 }
    }
}

impl TargetSet {
    pub fn new(wanted: impl IntoIterator<Item = u64>, d_max: u64, min_yz: u64) -> Result<Self> {
        let wanted: BTreeSet<u64> = wanted.into_iter().collect();
        if d_max == 0 && !wanted.is_empty() {
            return Err(Error::InvalidTargets("d_max is 0 but targets were given".into()));
        }
        if let Some(&big) = wanted.iter().find(|&&d| d > d_max) {
            return Err(Error::InvalidTargets(format!("target {big} exceeds d_max = {d_max}")));
        }
        Ok(TargetSet { wanted, d_max, min_yz })
    }

    /// Reject targets that congruences already rule out for this `c`.
    pub fn check_residues(&self, c: u32) -> Result<()> {
        let filter = ResidueFilter::new(c);
        match self.wanted.iter().find(|&&d| !filter.admissible(&BigInt::from(d))) {
            Some(d) => {
                Err(Error::InvalidTargets(format!("d = {d} has no solutions for c = {c} (residue obstruction)")))
            }
            None => Ok(()),
        }
    }

    pub fn admits(&self, s: &Solution) -> bool {
        let Some(d) = s.d.to_u64() else { return false };
        d > 0
            && d <= self.d_max
            && s.min_yz() > BigInt::from(self.min_yz)
            && (self.wanted.is_empty() || self.wanted.contains(&d))
    }
}

pub fn admissible_solution(rec: &SolutionRecord, targets: &TargetSet) -> bool {
    targets.admits(&rec.solution)
}

/// Upper limit on `(2 * box_bound + 1)^3` for [`brute_force_oracle`].
pub const ORACLE_CAP: u128 = 100_000_000;

/// Every `(x, y, z)` with coordinates in `[-box_bound, box_bound]` and
/// `0 < c x^3 + y^3 + z^3 <= d_max`, grouped by `d`, each group sorted.
pub fn brute_force_oracle(c: u32, box_bound: u32, d_max: u64) -> Result<BTreeMap<u64, Vec<Solution>>> {
    let side = 2 * box_bound as u128 + 1;
    if side.pow(3) > ORACLE_CAP {
        return Err(Error::BoxTooLarge { points: side.pow(3), cap: ORACLE_CAP });
    }
    let b = box_bound as i64;
    let cubes: Vec<i128> = (-b..=b).map(|v| (v as i128).pow(3)).collect();
    let mut hits: Vec<(i64, i64, i64, u64)> = (-b..=b)
        .into_par_iter()
        .flat_map_iter(|x| {
            let cx = c as i128 * (x as i128).pow(3);
            let cubes = &cubes;
            (-b..=b).flat_map(move |y| {
                let cy = cx + cubes[(y + b) as usize];
                (-b..=b).filter_map(move |z| {
                    let d = cy + cubes[(z + b) as usize];
                    (d > 0 && d <= d_max as i128).then_some((x, y, z, d as u64))
                })
            })
        })
        .collect();
    hits.sort_by_key(|&(x, y, z, d)| (d, x, y, z));
    let mut out: BTreeMap<u64, Vec<Solution>> = BTreeMap::new();
    for (x, y, z, d) in hits {
        out.entry(d).or_default().push(Solution { c, d: BigInt::from(d), x: x.into(), y: y.into(), z: z.into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn search_form_examples() {
        assert_eq!(eval_search_form(2, &big(-15), &big(-47), &big(-48)), big(19));
        assert_eq!(eval_search_form(2, &big(-74), &big(-230), &big(-235)), big(427));
        assert_eq!(eval_search_form(2, &big(0), &big(1), &big(1)), big(0));
    }

    #[test]
    fn report_form_examples() {
        assert_eq!(eval_report_form(2, &big(26478194), &big(108525095), &big(-109565866)), big(1247));
        assert_eq!(eval_report_form(2, &big(0), &big(0), &big(0)), big(0));
        assert_eq!(eval_report_form(1, &big(3), &big(4), &big(5)), big(216));
    }

    #[test]
    fn largest_table_row_is_exact() {
        let s = Solution::new(2, -5609033023i64, -1349280025i64, 7083296297i64);
        assert_eq!(s.d, big(8114));
    }

    #[test]
    fn canonical_forms() {
        let s = canonicalize(2, &CandidateVector::new(-15, -47, -48)).unwrap();
        assert_eq!((s.d, s.x, s.y, s.z), (big(19), big(-15), big(-47), big(48)));
        let s = canonicalize(2, &CandidateVector::new(15, 47, 48)).unwrap();
        assert_eq!((s.d, s.x, s.y, s.z), (big(19), big(-15), big(-47), big(48)));
        let s = canonicalize(2, &CandidateVector::new(1, 1, 1)).unwrap();
        assert_eq!((s.d, s.x, s.y, s.z), (big(2), big(1), big(1), big(-1)));
        assert!(canonicalize(2, &CandidateVector::new(0, 1, 1)).is_none());
    }

    #[test]
    fn residues() {
        assert!(!residue_admissible(1, &big(13)));
        assert!(residue_admissible(2, &big(148)));
        assert!(residue_admissible(1, &big(9)));
        assert!(!residue_admissible(1, &big(-4)));
        // The closed-form rules agree with the residue tables.
        let (t1, t2) = (ResidueFilter::new(1), ResidueFilter::new(2));
        for d in -500..500 {
            assert_eq!(t1.admissible(&big(d)), residue_admissible(1, &big(d)), "c=1 d={d}");
            assert!(t2.admissible(&big(d)), "c=2 d={d}");
        }
    }

    #[test]
    fn target_filters() {
        let open = TargetSet::new([], 10_000, 100).unwrap();
        let small = Solution::new(2, -15, -47, 48);
        assert!(!open.admits(&small));
        let row = Solution::new(2, 26478194, 108525095, -109565866i64);
        let wanted = TargetSet::new([1247, 1462], 10_000, 100).unwrap();
        assert!(wanted.admits(&row));
        let other = TargetSet::new([1462], 10_000, 100).unwrap();
        assert!(!other.admits(&row));
        let over = Solution { d: big(10_001), ..row.clone() };
        assert!(!open.admits(&over));
        assert!(TargetSet::new([20_000], 10_000, 100).is_err());
        assert!(TargetSet::new([13], 100, 0).unwrap().check_residues(1).is_err());
        assert!(TargetSet::new([13], 100, 0).unwrap().check_residues(2).is_ok());
    }

    #[test]
    fn record_validation() {
        let rec = SolutionRecord { solution: Solution::new(2, 0, 3, -2), window: None, seed: 0, trial: -1 };
        rec.validate().unwrap();
        let mut bad = rec.clone();
        bad.solution.d = big(20);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn oracle_examples() {
        let map = brute_force_oracle(2, 5, 100).unwrap();
        assert!(map[&19].contains(&Solution::new(2, 0, 3, -2)));
        assert!(brute_force_oracle(2, 0, 100).unwrap().is_empty());
        for (d, sols) in brute_force_oracle(1, 5, 10).unwrap() {
            assert!(residue_admissible(1, &big(d as i64)));
            assert!(sols.iter().all(Solution::holds));
        }
        assert!(matches!(brute_force_oracle(2, 1000, 10), Err(Error::BoxTooLarge { .. })));
    }
}
