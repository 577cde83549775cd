//! Exact minimum-weight hitting sets by branch and bound.

use crate::error::{Error, Result};
use crate::features::FeatureSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingInstance {
    universe: usize,
    members: Vec<FeatureSet>,
    weights: Vec<u64>,
}

impl HittingInstance {
    pub fn new(universe: usize) -> Self {
        Self {
            universe,
            members: Vec::new(),
            weights: vec![1; universe],
        }
    }

    /// Per-element weights, all positive.
    pub fn with_weights(universe: usize, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != universe {
            return Err(Error::Usage(format!(
                "{} weights for a universe of {universe}",
                weights.len()
            )));
        }
        if weights.contains(&0) {
            return Err(Error::Usage("hitting-set weights must be positive".into()));
        }
        Ok(Self {
            universe,
            members: Vec::new(),
            weights,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[FeatureSet] {
        &self.members
    }

    pub fn add(&mut self, member: FeatureSet) -> Result<()> {
        if member.bound() > self.universe {
            return Err(Error::Usage(format!("set {member} exceeds 1..{}", self.universe)));
        }
        self.members.push(member);
        Ok(())
    }

    pub fn cost(&self, x: &FeatureSet) -> u64 {
        x.iter().map(|i| self.weights[i]).sum()
    }
}

struct Solver<'a> {
    inst: &'a HittingInstance,
    best: Option<(u64, Vec<usize>)>,
}

impl Solver<'_> {
    fn better(&self, cost: u64, set: &[usize]) -> bool {
        match &self.best {
            None => true,
            Some((c, s)) => cost < *c || (cost == *c && set < s.as_slice()),
        }
    }

    /// Disjoint-packing lower bound on the extra cost needed.
    fn lower_bound(&self, open: &[usize], excluded: &[bool]) -> u64 {
        let mut used = vec![false; self.inst.universe];
        let mut bound = 0;
        for &k in open {
            let member = &self.inst.members[k];
            let avail: Vec<usize> = member.iter().filter(|&i| !excluded[i]).collect();
            if avail.iter().any(|&i| used[i]) {
                continue;
            }
            bound += avail.iter().map(|&i| self.inst.weights[i]).min().unwrap_or(0);
            avail.iter().for_each(|&i| used[i] = true);
        }
        bound
    }

    fn branch(&mut self, chosen: &mut Vec<usize>, cost: u64, excluded: &mut Vec<bool>) {
        let open: Vec<usize> = (0..self.inst.members.len())
            .filter(|&k| !self.inst.members[k].iter().any(|i| chosen.contains(&i)))
            .collect();
        if open.is_empty() {
            let mut set = chosen.clone();
            set.sort_unstable();
            if self.better(cost, &set) {
                self.best = Some((cost, set));
            }
            return;
        }
        if open.iter().any(|&k| self.inst.members[k].iter().all(|i| excluded[i])) {
            return;
        }
        if let Some((best, _)) = &self.best {
            if cost + self.lower_bound(&open, excluded) > *best {
                return;
            }
        }
        let mut degree = vec![0usize; self.inst.universe];
        for &k in &open {
            for i in self.inst.members[k].iter().filter(|&i| !excluded[i]) {
                degree[i] += 1;
            }
        }
        let pick = (0..self.inst.universe)
            .filter(|&i| degree[i] > 0)
            .max_by(|&a, &b| degree[a].cmp(&degree[b]).then(b.cmp(&a)))
            .expect("an open member has an available element");
        chosen.push(pick);
        self.branch(chosen, cost + self.inst.weights[pick], excluded);
        chosen.pop();
        excluded[pick] = true;
        self.branch(chosen, cost, excluded);
        excluded[pick] = false;
    }
}

/// Greedy cover used as the initial incumbent.
fn greedy(inst: &HittingInstance) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut open: Vec<&FeatureSet> = inst.members.iter().collect();
    while !open.is_empty() {
        let mut degree = vec![0usize; inst.universe];
        for s in &open {
            s.iter().for_each(|i| degree[i] += 1);
        }
        let pick = (0..inst.universe)
            .filter(|&i| degree[i] > 0)
            .max_by(|&a, &b| {
                let ra = degree[a] as f64 / inst.weights[a] as f64;
                let rb = degree[b] as f64 / inst.weights[b] as f64;
                ra.total_cmp(&rb).then(b.cmp(&a))
            })
            .expect("open members are non-empty");
        chosen.push(pick);
        open.retain(|s| !s.contains(pick));
    }
    chosen.sort_unstable();
    chosen
}

/// A minimum-weight set meeting every member; among optima, the
/// lexicographically smallest.
pub fn min_hitting_set(instance: &HittingInstance) -> Result<FeatureSet> {
    if let Some(k) = instance.members.iter().position(FeatureSet::is_empty) {
        return Err(Error::Infeasible(format!(
            "member {} is empty and cannot be hit",
            k + 1
        )));
    }
    let start = greedy(instance);
    let mut solver = Solver {
        inst: instance,
        best: Some((start.iter().map(|&i| instance.weights[i]).sum(), start)),
    };
    solver.branch(&mut Vec::new(), 0, &mut vec![false; instance.universe]);
    let (_, set) = solver.best.expect("greedy provides an incumbent");
    Ok(FeatureSet::from_indices(set))
}
