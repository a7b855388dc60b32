use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::oracle::{evaluate, Answer, QueryRecord};
use super::spec::RecursiveOracleSpec;
use crate::{Error, Result};

/// Hit set and potential `Z = Σ_{x∈S} L^{−d(x)}`, `L = log₂|A|/3`, where `S`
/// holds the hit nodes with no hit ancestor.
#[derive(Clone, Debug, Default)]
pub struct ZTracker {
    base: f64,
    hit: HashSet<Vec<usize>>,
    s: HashSet<Vec<usize>>,
    pub z: f64,
    pub deltas: Vec<f64>,
}

impl ZTracker {
    pub fn new(card_a: usize) -> Self {
        Self { base: (card_a as f64).log2() / 3.0, ..Default::default() }
    }

    pub fn weight(&self, depth: usize) -> f64 {
        self.base.powi(-(depth as i32))
    }

    pub fn in_s(&self, node: &[usize]) -> bool {
        self.s.contains(node)
    }

    /// Records a hit on `node` and returns the change in `Z`.
    pub fn hit(&mut self, node: &[usize]) -> f64 {
        let before = self.z;
        let has_hit_ancestor = (0..node.len()).any(|k| self.hit.contains(&node[..k]));
        let fresh = self.hit.insert(node.to_vec());
        if fresh && !has_hit_ancestor {
            let removed: Vec<Vec<usize>> =
                self.s.iter().filter(|y| y.len() > node.len() && y.starts_with(node)).cloned().collect();
            for y in removed {
                self.s.remove(&y);
                self.z -= self.weight(y.len());
            }
            self.s.insert(node.to_vec());
            self.z += self.weight(node.len());
        }
        self.z - before
    }

    pub fn miss(&mut self) -> f64 {
        0.0
    }

    /// `Z` recomputed from `S`.
    pub fn recomputed(&self) -> f64 {
        self.s.iter().map(|x| self.weight(x.len())).sum()
    }
}

/// Internal-node increments grouped by the number of earlier queries at the
/// same node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct P5Group {
    pub prior_queries: usize,
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
    /// `2 / (|A|^{1/3} − prior_queries)`, infinite once the denominator is ≤ 0.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefereeReport {
    pub z_trace: Vec<f64>,
    pub deltas: Vec<f64>,
    pub final_z: f64,
    pub root_hit: bool,
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    pub p4: bool,
    pub max_leaf_delta: f64,
    pub leaf_bound: f64,
    pub p5: Vec<P5Group>,
}

impl RefereeReport {
    pub fn exact_properties_hold(&self) -> bool {
        self.p1 && self.p2 && self.p3 && self.p4
    }
}

/// Replays `log` against `spec`, checking each record's result and the
/// potential's properties after every query.
pub fn z_referee(spec: &RecursiveOracleSpec, log: &[QueryRecord]) -> Result<RefereeReport> {
    let mut t = ZTracker::new(spec.card_a());
    let p1 = t.z == 0.0;
    let mut p3 = true;
    let mut max_leaf_delta = 0.0f64;
    let mut z_trace = Vec::with_capacity(log.len());
    let mut per_node: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut groups: BTreeMap<usize, P5Group> = BTreeMap::new();
    let cube_root = (spec.card_a() as f64).cbrt();

    for (i, rec) in log.iter().enumerate() {
        if rec.index != i {
            return Err(Error::Integrity(format!("record {i} carries index {}", rec.index)));
        }
        let expect = evaluate(spec, &rec.path, rec.guess).map_err(|e| Error::Integrity(format!("record {i}: {e}")))?;
        if expect != rec.result {
            return Err(Error::Integrity(format!("record {i} claims {:?}, oracle gives {expect:?}", rec.result)));
        }
        let is_hit = rec.result != Answer::Fail;
        let delta = if is_hit { t.hit(&rec.path) } else { t.miss() };
        t.deltas.push(delta);
        if !is_hit && delta != 0.0 {
            p3 = false;
        }
        if (t.z - t.recomputed()).abs() > 1e-12 || t.z < -1e-12 {
            p3 = false;
        }
        if rec.path.len() == spec.depth {
            max_leaf_delta = max_leaf_delta.max(delta);
        } else {
            let prior = per_node.entry(rec.path.clone()).or_insert(0);
            let g = groups.entry(*prior).or_insert_with(|| P5Group {
                prior_queries: *prior,
                bound: if cube_root > *prior as f64 { 2.0 / (cube_root - *prior as f64) } else { f64::INFINITY },
                ..Default::default()
            });
            g.count += 1;
            g.sum += delta;
            g.sum_sq += delta * delta;
            *prior += 1;
        }
        z_trace.push(t.z);
    }

    let root_hit = log.iter().any(|r| r.path.is_empty() && r.result != Answer::Fail);
    let p2 = !root_hit || (t.in_s(&[]) && t.z == 1.0);
    let leaf_bound = t.weight(spec.depth);
    Ok(RefereeReport {
        final_z: t.z,
        deltas: t.deltas,
        z_trace,
        root_hit,
        p1,
        p2,
        p3,
        p4: max_leaf_delta <= leaf_bound + 1e-12,
        max_leaf_delta,
        leaf_bound,
        p5: groups.into_values().collect(),
    })
}
