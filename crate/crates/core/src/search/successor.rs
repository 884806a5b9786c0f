use thiserror::Error;

use crate::sas::{Operator, Task};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("operator {op} is not applicable")]
pub struct InapplicableOperator {
    pub op: usize,
}

pub fn is_applicable(op: &Operator, state: &[usize]) -> bool {
    op.preconditions.iter().all(|f| state[f.var] == f.value)
}

/// Successor state of `state` under operator `op`. Effects whose conditions do
/// not hold in `state` are skipped.
pub fn apply_operator(task: &Task, state: &[usize], op: usize) -> Result<Vec<usize>, InapplicableOperator> {
    let operator = &task.operators[op];
    if !is_applicable(operator, state) {
        return Err(InapplicableOperator { op });
    }
    let mut next = state.to_vec();
    apply_effects(operator, state, &mut next);
    Ok(next)
}

/// Writes the effects of `op` (assumed applicable in `state`) into `out`,
/// which must start as a copy of `state`.
pub fn apply_effects(op: &Operator, state: &[usize], out: &mut [usize]) {
    for eff in &op.effects {
        if eff.conditions.iter().all(|c| state[c.var] == c.value) {
            out[eff.var] = eff.value;
        }
    }
}

/// Operators applicable in `state`, in ascending index order.
pub fn applicable_operators(task: &Task, state: &[usize]) -> Vec<usize> {
    (0..task.operators.len())
        .filter(|&i| is_applicable(&task.operators[i], state))
        .collect()
}

/// Indexed applicability test: every operator is listed under each of its
/// precondition atoms and fires once all of them are matched.
pub struct SuccessorGenerator {
    by_atom: Vec<Vec<u32>>,
    unconditional: Vec<u32>,
    num_pre: Vec<u32>,
    offsets: Vec<usize>,
    hits: Vec<u32>,
    touched: Vec<u32>,
}

impl SuccessorGenerator {
    pub fn new(task: &Task) -> Self {
        let mut by_atom = vec![Vec::new(); task.num_atoms()];
        let mut unconditional = Vec::new();
        let mut num_pre = Vec::with_capacity(task.operators.len());
        for (i, op) in task.operators.iter().enumerate() {
            num_pre.push(op.preconditions.len() as u32);
            if op.preconditions.is_empty() {
                unconditional.push(i as u32);
            }
            for &f in &op.preconditions {
                by_atom[task.atoms().id(f)].push(i as u32);
            }
        }
        let offsets = (0..task.variables.len()).map(|v| task.atoms().offset(v)).collect();
        SuccessorGenerator {
            by_atom,
            unconditional,
            num_pre,
            offsets,
            hits: vec![0; task.operators.len()],
            touched: Vec::new(),
        }
    }

    pub fn applicable(&mut self, state: &[usize], out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.unconditional.iter().map(|&o| o as usize));
        for (var, &value) in state.iter().enumerate() {
            for &op in &self.by_atom[self.offsets[var] + value] {
                let h = &mut self.hits[op as usize];
                if *h == 0 {
                    self.touched.push(op);
                }
                *h += 1;
                if *h == self.num_pre[op as usize] {
                    out.push(op as usize);
                }
            }
        }
        for op in self.touched.drain(..) {
            self.hits[op as usize] = 0;
        }
        out.sort_unstable();
    }
}
