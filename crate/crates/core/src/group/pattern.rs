use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::fga::{cartesian, FgaGroup, GroupBox, GroupPoint};
use crate::error::{Error, Result};
use crate::linalg::Label;

/// Subset of `G` that is periodic in the free coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet {
    pub group: FgaGroup,
    /// One positive period per free coordinate.
    pub period: Vec<i64>,
    /// Points of the fundamental cell `prod [0, p_j) x H` that belong to the set.
    pub residues: BTreeSet<GroupPoint>,
}

impl PatternSet {
    pub fn new(group: FgaGroup, period: Vec<i64>, residues: impl IntoIterator<Item = GroupPoint>) -> Result<Self> {
        if period.len() != group.free_rank {
            return Err(Error::CoordinateCount {
                expected: group.free_rank,
                found: period.len(),
            });
        }
        if let Some(p) = period.iter().find(|&&p| p < 1) {
            return Err(Error::InvalidParameter(format!("period {p} < 1")));
        }
        let residues: BTreeSet<GroupPoint> = residues.into_iter().collect();
        for r in &residues {
            group.check(r)?;
            if r.coords.iter().zip(&period).any(|(c, p)| !(0..*p).contains(c)) {
                return Err(Error::InvalidParameter(format!("residue {r} outside the fundamental cell")));
            }
        }
        Ok(Self { group, period, residues })
    }

    /// `m Z + r` style progressions on `Z`.
    pub fn progression(modulus: i64, residues: &[i64]) -> Result<Self> {
        let group = FgaGroup::lattice(1);
        let pts = residues.iter().map(|r| GroupPoint::new(vec![r.rem_euclid(modulus)]));
        Self::new(group, vec![modulus], pts)
    }

    pub fn cell_size(&self) -> i64 {
        self.period.iter().product::<i64>() * self.group.torsion_order()
    }

    fn residue_of(&self, p: &GroupPoint) -> GroupPoint {
        let mut coords = p.coords.clone();
        for (c, per) in coords.iter_mut().zip(&self.period) {
            *c = c.rem_euclid(*per);
        }
        GroupPoint::new(coords)
    }

    pub fn contains(&self, p: &GroupPoint) -> bool {
        self.residues.contains(&self.residue_of(p))
    }

    /// Exact Beurling density `|residues| / |cell|`.
    pub fn density(&self) -> Ratio<i64> {
        Ratio::new(self.residues.len() as i64, self.cell_size())
    }

    pub fn points_in_box(&self, b: &GroupBox) -> Result<Vec<GroupPoint>> {
        Ok(self
            .group
            .box_points(b)?
            .into_iter()
            .filter(|p| self.contains(p))
            .collect())
    }

    /// Identity map restricted to the pattern points inside `window`.
    pub fn to_map(&self, window: &GroupBox) -> Result<IndexedFamilyMap> {
        let points = self.points_in_box(window)?;
        let labels = points.iter().map(|p| Label(p.to_string())).collect();
        IndexedFamilyMap::new(self.group.clone(), labels, points)
    }
}

/// Localization map `a: I -> G` on a finite index window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexedFamilyMap {
    pub group: FgaGroup,
    pub labels: Vec<Label>,
    pub points: Vec<GroupPoint>,
    #[serde(skip)]
    lookup: HashMap<Label, usize>,
}

impl IndexedFamilyMap {
    pub fn new(group: FgaGroup, labels: Vec<Label>, points: Vec<GroupPoint>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: points.len(),
            });
        }
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        for p in &points {
            group.check(p)?;
        }
        Ok(Self {
            group,
            labels,
            points,
            lookup,
        })
    }

    /// `i -> f(i)` on `Z`, labels are the integers themselves.
    pub fn on_integers(indices: impl IntoIterator<Item = i64>, f: impl Fn(i64) -> i64) -> Self {
        let (labels, points): (Vec<_>, Vec<_>) = indices
            .into_iter()
            .map(|i| (Label::from(i), GroupPoint::new(vec![f(i)])))
            .unzip();
        Self::new(FgaGroup::lattice(1), labels, points).expect("distinct integer labels")
    }

    /// Restores the label index after deserialization.
    pub fn reindex(mut self) -> Result<Self> {
        let (g, l, p) = (
            std::mem::replace(&mut self.group, FgaGroup::lattice(1)),
            std::mem::take(&mut self.labels),
            std::mem::take(&mut self.points),
        );
        Self::new(g, l, p)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        if self.lookup.is_empty() && !self.labels.is_empty() {
            return self.labels.iter().position(|l| l == label);
        }
        self.lookup.get(label).copied()
    }

    pub fn point(&self, label: &Label) -> Option<&GroupPoint> {
        self.position(label).map(|i| &self.points[i])
    }

    /// Positions of `subset` in this map; unknown labels are an error.
    pub fn positions_of(&self, subset: &[Label]) -> Result<Vec<usize>> {
        subset
            .iter()
            .map(|l| {
                self.position(l)
                    .ok_or_else(|| Error::InvalidParameter(format!("label {l} not in the index set")))
            })
            .collect()
    }

    /// Composes with a coordinate change `U^{-1}` into another group.
    pub fn map_points(&self, group: FgaGroup, f: impl Fn(&GroupPoint) -> GroupPoint) -> Result<Self> {
        Self::new(group, self.labels.clone(), self.points.iter().map(f).collect())
    }
}

impl PartialEq for IndexedFamilyMap {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.labels == other.labels && self.points == other.points
    }
}

pub(crate) fn box_cells(group: &FgaGroup, lo: &[i64], hi: &[i64]) -> Vec<GroupPoint> {
    let mut ranges: Vec<Vec<i64>> = lo.iter().zip(hi).map(|(a, b)| (*a..*b).collect()).collect();
    ranges.extend(group.cyclic_moduli.iter().map(|&n| (0..n).collect()));
    cartesian(&ranges).into_iter().map(GroupPoint::new).collect()
}
