use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::group::{FgaGroup, GroupBox, GroupPoint};
use crate::error::Result;

/// Nonnegative decay profile `r: G -> [0, inf)` on a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub group: FgaGroup,
    #[serde(with = "entries")]
    pub values: BTreeMap<GroupPoint, f64>,
    /// `tail_sums[R] = sum_{||k|| > R} r(k)`; zero beyond the last entry.
    pub tail_sums: Vec<f64>,
    pub p: u8,
}

impl Envelope {
    /// Drops zero values; negative values are clamped to zero.
    pub fn new(group: FgaGroup, values: BTreeMap<GroupPoint, f64>, p: u8) -> Self {
        let values: BTreeMap<GroupPoint, f64> = values.into_iter().filter(|(_, v)| *v > 0.0).collect();
        let reach = values.keys().map(|k| group.norm(k)).max().unwrap_or(0) as usize;
        let mut shells = vec![0.0; reach + 1];
        for (k, v) in &values {
            shells[group.norm(k) as usize] += v;
        }
        let mut tail_sums = vec![0.0; reach + 1];
        for r in (0..reach).rev() {
            tail_sums[r] = tail_sums[r + 1] + shells[r + 1];
        }
        Self {
            group,
            values,
            tail_sums,
            p,
        }
    }

    /// Samples `f` on `B_radius(0)`.
    pub fn from_fn(group: FgaGroup, radius: u64, p: u8, f: impl Fn(&GroupPoint) -> f64) -> Result<Self> {
        let pts = group.box_points(&GroupBox::new(group.zero(), radius))?;
        let values = pts.into_iter().map(|k| {
            let v = f(&k);
            (k, v)
        });
        Ok(Self::new(group, values.collect(), p))
    }

    pub fn get(&self, k: &GroupPoint) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// `Delta_r(R)`.
    pub fn tail(&self, r: u64) -> f64 {
        self.tail_sums.get(r as usize).copied().unwrap_or(0.0)
    }

    pub fn reach(&self) -> u64 {
        self.tail_sums.len().saturating_sub(1) as u64
    }

    pub fn norm_p(&self) -> f64 {
        lp_norm(self.values.values().copied(), self.p)
    }

    pub fn support(&self) -> Vec<GroupPoint> {
        self.values.keys().cloned().collect()
    }

    /// Largest value on every sup-norm shell `||k|| = s`.
    pub fn shell_maxima(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.reach() as usize + 1];
        for (k, v) in &self.values {
            let s = self.group.norm(k) as usize;
            out[s] = out[s].max(*v);
        }
        out
    }

    /// Partial sums of `r^p` over growing boxes.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut shells = vec![0.0; self.reach() as usize + 1];
        for (k, v) in &self.values {
            shells[self.group.norm(k) as usize] += v.powi(self.p as i32);
        }
        shells
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }
}

pub(crate) fn lp_norm(values: impl Iterator<Item = f64>, p: u8) -> f64 {
    if p <= 1 {
        values.sum()
    } else {
        values.map(|v| v.powi(p as i32)).sum::<f64>().powf(1.0 / p as f64)
    }
}

mod entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::group::GroupPoint;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        offset: GroupPoint,
        value: f64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<GroupPoint, f64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = m
            .iter()
            .map(|(k, v)| Entry {
                offset: k.clone(),
                value: *v,
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<GroupPoint, f64>, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(v.into_iter().map(|e| (e.offset, e.value)).collect())
    }
}
