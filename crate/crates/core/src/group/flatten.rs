use super::fga::{FgaGroup, GroupPoint};
use super::pattern::IndexedFamilyMap;
use crate::error::{Error, Result};

/// Bijection `U: Z^d -> Z^d x H` with `H` finite of order `N`.
///
/// `U(k) = (k_1, .., k_{d-1}, floor(k_d / N), u(k_d mod N))`, where `u` lists
/// `H` in mixed-radix order with the last cyclic coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flattening {
    group: FgaGroup,
    order: i64,
}

pub fn flatten_group(group: &FgaGroup) -> Result<Flattening> {
    if group.free_rank == 0 {
        return Err(Error::InvalidGroup("flattening needs at least one free coordinate".into()));
    }
    Ok(Flattening {
        group: group.clone(),
        order: group.torsion_order(),
    })
}

impl Flattening {
    pub fn group(&self) -> &FgaGroup {
        &self.group
    }

    pub fn domain(&self) -> FgaGroup {
        FgaGroup::lattice(self.group.free_rank)
    }

    /// `u(t)` for `t` in `0..N`.
    pub fn enumerate_torsion(&self, mut t: i64) -> Vec<i64> {
        let mut digits = vec![0; self.group.cyclic_moduli.len()];
        for (d, n) in digits.iter_mut().zip(&self.group.cyclic_moduli).rev() {
            *d = t % n;
            t /= n;
        }
        digits
    }

    fn torsion_index(&self, h: &[i64]) -> i64 {
        h.iter().zip(&self.group.cyclic_moduli).fold(0, |acc, (d, n)| acc * n + d)
    }

    pub fn forward(&self, k: &GroupPoint) -> GroupPoint {
        let d = self.group.free_rank;
        let last = k.coords[d - 1];
        let mut coords = k.coords[..d - 1].to_vec();
        coords.push(last.div_euclid(self.order));
        coords.extend(self.enumerate_torsion(last.rem_euclid(self.order)));
        GroupPoint::new(coords)
    }

    pub fn inverse(&self, g: &GroupPoint) -> GroupPoint {
        let d = self.group.free_rank;
        let mut coords = g.coords[..d].to_vec();
        coords[d - 1] = g.coords[d - 1] * self.order + self.torsion_index(&g.coords[d..]);
        GroupPoint::new(coords)
    }

    /// `b = U^{-1} o a`.
    pub fn pull_back(&self, map: &IndexedFamilyMap) -> Result<IndexedFamilyMap> {
        if map.group != self.group {
            return Err(Error::InvalidGroup("map targets a different group".into()));
        }
        map.map_points(self.domain(), |p| self.inverse(p))
    }

    /// `a = U o b`.
    pub fn push_forward(&self, map: &IndexedFamilyMap) -> Result<IndexedFamilyMap> {
        map.map_points(self.group.clone(), |p| self.forward(p))
    }
}
