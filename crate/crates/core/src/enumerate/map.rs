use std::fmt;

use crate::features::FeatureSet;

/// A literal over selector `p_var` (0-based); `positive` means `p_var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    fn value(self, assignment: &[Option<bool>]) -> Option<bool> {
        assignment[self.var].map(|v| v == self.positive)
    }
}

/// Clause set over one selector per feature. `p_i = true` means feature `i`
/// is free.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapFormula {
    vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl MapFormula {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Adds a clause; an empty clause makes the formula unsatisfiable.
    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        assert!(clause.iter().all(|l| l.var < self.vars), "literal out of range");
        self.clauses.push(clause);
    }

    /// Excludes every assignment whose free set contains `cxp`.
    pub fn block_free_supersets(&mut self, cxp: &FeatureSet) {
        self.add_clause(cxp.iter().map(Lit::neg).collect());
    }

    /// Excludes every assignment whose fixed set contains `axp`.
    pub fn block_fixed_supersets(&mut self, axp: &FeatureSet) {
        self.add_clause(axp.iter().map(Lit::pos).collect());
    }

    /// Unit propagation to fixpoint. Returns `false` on conflict.
    fn propagate(&self, a: &mut [Option<bool>], trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for clause in &self.clauses {
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &lit in clause {
                    match lit.value(a) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(lit);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open, unassigned) {
                    (0, _) => return false,
                    (1, Some(lit)) => {
                        a[lit.var] = Some(lit.positive);
                        trail.push(lit.var);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&self, a: &mut Vec<Option<bool>>, prefer: bool) -> bool {
        let mut trail = Vec::new();
        if !self.propagate(a, &mut trail) {
            trail.iter().for_each(|&v| a[v] = None);
            return false;
        }
        let Some(var) = a.iter().position(Option::is_none) else {
            return true;
        };
        for phase in [prefer, !prefer] {
            a[var] = Some(phase);
            if self.search(a, prefer) {
                return true;
            }
            a[var] = None;
        }
        trail.iter().for_each(|&v| a[v] = None);
        false
    }

    /// A satisfying assignment, deciding the lowest unassigned variable first
    /// with phase `prefer`; `None` when unsatisfiable. Deterministic.
    pub fn next_model(&self, prefer: bool) -> Option<Vec<bool>> {
        let mut a = vec![None; self.vars];
        self.search(&mut a, prefer)
            .then(|| a.into_iter().map(|v| v.expect("complete assignment")).collect())
    }
}

impl fmt::Display for MapFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c
                    .iter()
                    .map(|l| format!("{}p{}", if l.positive { "" } else { "¬" }, l.var + 1))
                    .collect();
                format!("({})", lits.join(" ∨ "))
            })
            .collect();
        write!(f, "{}", clauses.join(" ∧ "))
    }
}
