use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of points a single box enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 20_000_000;

/// `Z^{d1} x Z_{N_1} x ... x Z_{N_{d2}}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgaGroup {
    pub free_rank: usize,
    pub cyclic_moduli: Vec<i64>,
}

/// Group element; cyclic coordinates are always reduced into `0..N_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupPoint {
    pub coords: Vec<i64>,
}

impl GroupPoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, c) in self.coords.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl From<Vec<i64>> for GroupPoint {
    fn from(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

/// `B_R(k)`, all points within sup-distance `R` of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupBox {
    pub center: GroupPoint,
    pub radius: u64,
}

impl GroupBox {
    pub fn new(center: GroupPoint, radius: u64) -> Self {
        Self { center, radius }
    }
}

impl FgaGroup {
    pub fn new(free_rank: usize, cyclic_moduli: Vec<i64>) -> Result<Self> {
        if free_rank + cyclic_moduli.len() == 0 {
            return Err(Error::InvalidGroup("group has no coordinates".into()));
        }
        if let Some(n) = cyclic_moduli.iter().find(|&&n| n < 1) {
            return Err(Error::InvalidGroup(format!("cyclic modulus {n} < 1")));
        }
        Ok(Self {
            free_rank,
            cyclic_moduli,
        })
    }

    /// `Z^d`.
    pub fn lattice(d: usize) -> Self {
        Self::new(d, Vec::new()).expect("d >= 1")
    }

    /// `Z_{N_1} x ... x Z_{N_k}`.
    pub fn cyclic(moduli: Vec<i64>) -> Result<Self> {
        Self::new(0, moduli)
    }

    pub fn rank(&self) -> usize {
        self.free_rank + self.cyclic_moduli.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Order of the finite part.
    pub fn torsion_order(&self) -> i64 {
        self.cyclic_moduli.iter().product()
    }

    pub fn modulus(&self, j: usize) -> Option<i64> {
        j.checked_sub(self.free_rank).map(|c| self.cyclic_moduli[c])
    }

    pub fn zero(&self) -> GroupPoint {
        GroupPoint::new(vec![0; self.rank()])
    }

    /// Builds a point, reducing cyclic coordinates.
    pub fn point(&self, coords: Vec<i64>) -> Result<GroupPoint> {
        if coords.len() != self.rank() {
            return Err(Error::CoordinateCount {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        Ok(self.reduce(coords))
    }

    fn reduce(&self, mut coords: Vec<i64>) -> GroupPoint {
        for (c, n) in coords[self.free_rank..].iter_mut().zip(&self.cyclic_moduli) {
            *c = c.rem_euclid(*n);
        }
        GroupPoint { coords }
    }

    pub fn check(&self, p: &GroupPoint) -> Result<()> {
        if p.dim() != self.rank() {
            return Err(Error::CoordinateCount {
                expected: self.rank(),
                found: p.dim(),
            });
        }
        for (c, n) in p.coords[self.free_rank..].iter().zip(&self.cyclic_moduli) {
            if !(0..*n).contains(c) {
                return Err(Error::InvalidGroup(format!("cyclic coordinate {c} not reduced mod {n}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        self.reduce(a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        self.reduce(a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &GroupPoint) -> GroupPoint {
        self.reduce(a.coords.iter().map(|x| -x).collect())
    }

    /// Per-coordinate distance: `|d|` on free coordinates, circular on cyclic ones.
    pub fn coord_distance(&self, j: usize, a: i64, b: i64) -> u64 {
        let d = (a - b).unsigned_abs();
        match self.modulus(j) {
            None => d,
            Some(n) => {
                let d = (a - b).rem_euclid(n) as u64;
                d.min(n as u64 - d)
            }
        }
    }

    /// `||a - b||_inf`.
    pub fn distance(&self, a: &GroupPoint, b: &GroupPoint) -> u64 {
        (0..self.rank())
            .map(|j| self.coord_distance(j, a.coords[j], b.coords[j]))
            .max()
            .unwrap_or(0)
    }

    pub fn norm(&self, a: &GroupPoint) -> u64 {
        (0..self.rank())
            .map(|j| self.coord_distance(j, a.coords[j], 0))
            .max()
            .unwrap_or(0)
    }

    /// Number of values a single coordinate takes within distance `r`.
    pub fn coord_count(&self, j: usize, r: u64) -> u64 {
        let full = 2 * r + 1;
        match self.modulus(j) {
            None => full,
            Some(n) => full.min(n as u64),
        }
    }

    /// `|B_R(0)|`, identical for every centre.
    pub fn box_size(&self, r: u64) -> u128 {
        (0..self.rank()).map(|j| self.coord_count(j, r) as u128).product()
    }

    /// Coordinate values within distance `r` of `c`, in increasing offset order.
    pub(crate) fn coord_range(&self, j: usize, c: i64, r: u64) -> Vec<i64> {
        let r = r as i64;
        match self.modulus(j) {
            None => (c - r..=c + r).collect(),
            Some(n) if 2 * r + 1 >= n => (0..n).collect(),
            Some(n) => (-r..=r).map(|o| (c + o).rem_euclid(n)).collect(),
        }
    }

    pub fn box_points(&self, b: &GroupBox) -> Result<Vec<GroupPoint>> {
        self.box_points_capped(b, DEFAULT_ENUMERATION_CAP)
    }

    /// All points of `b` in lexicographic order of their offsets.
    pub fn box_points_capped(&self, b: &GroupBox, cap: usize) -> Result<Vec<GroupPoint>> {
        self.check(&b.center)?;
        let size = self.box_size(b.radius);
        if size > cap as u128 {
            return Err(Error::EnumerationCap { size, cap });
        }
        let ranges: Vec<Vec<i64>> = (0..self.rank())
            .map(|j| self.coord_range(j, b.center.coords[j], b.radius))
            .collect();
        Ok(cartesian(&ranges).into_iter().map(GroupPoint::new).collect())
    }
}

pub(crate) fn cartesian(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::with_capacity(ranges.len())];
    for range in ranges {
        let mut next = Vec::with_capacity(out.len() * range.len());
        for prefix in &out {
            for &v in range {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sizes_match_product_formula() {
        let z = FgaGroup::lattice(1);
        let pts = z.box_points(&GroupBox::new(z.zero(), 2)).unwrap();
        let coords: Vec<i64> = pts.iter().map(|p| p.coords[0]).collect();
        assert_eq!(coords, vec![-2, -1, 0, 1, 2]);

        let g = FgaGroup::new(1, vec![2]).unwrap();
        assert_eq!(g.box_points(&GroupBox::new(g.zero(), 1)).unwrap().len(), 6);

        let z2 = FgaGroup::lattice(2);
        let k = z2.point(vec![7, -3]).unwrap();
        assert_eq!(z2.box_points(&GroupBox::new(k, 3)).unwrap().len(), 49);
    }

    #[test]
    fn cyclic_boxes_have_centre_free_size() {
        for n in 1..9 {
            let g = FgaGroup::new(1, vec![n]).unwrap();
            for r in 0..6 {
                let sizes: Vec<usize> = (0..n)
                    .map(|c| {
                        let centre = g.point(vec![3, c]).unwrap();
                        let pts = g.box_points(&GroupBox::new(centre.clone(), r)).unwrap();
                        assert!(pts.iter().all(|p| g.distance(p, &centre) <= r));
                        pts.len()
                    })
                    .collect();
                assert!(sizes.iter().all(|&s| s as u128 == g.box_size(r)));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let z3 = FgaGroup::lattice(3);
        let err = z3.box_points_capped(&GroupBox::new(z3.zero(), 10), 1000);
        assert!(matches!(err, Err(Error::EnumerationCap { size: 9261, .. })));
    }

    #[test]
    fn arithmetic_reduces() {
        let g = FgaGroup::new(1, vec![5]).unwrap();
        let a = g.point(vec![2, 4]).unwrap();
        let b = g.point(vec![-1, 3]).unwrap();
        assert_eq!(g.add(&a, &b).coords, vec![1, 2]);
        assert_eq!(g.sub(&b, &a).coords, vec![-3, 4]);
        assert_eq!(g.distance(&a, &b), 3);
    }
}
