use fixedbitset::FixedBitSet;

use crate::sas::Task;

/// One (operator, effect) pair of the delete relaxation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxedOp {
    /// Operator preconditions plus effect conditions, as sorted atom ids.
    pub pre: Vec<u32>,
    pub add: u32,
    pub op: u32,
}

/// Delete relaxation of a task with conditional effects compiled away.
#[derive(Debug, Clone)]
pub struct RelaxedTask {
    pub ops: Vec<RelaxedOp>,
    pub precondition_of: Vec<Vec<u32>>,
    pub achievers: Vec<Vec<u32>>,
    pub goal: Vec<u32>,
    num_atoms: usize,
}

impl RelaxedTask {
    pub fn new(task: &Task) -> Self {
        let atoms = task.atoms();
        let n = atoms.len();
        let mut ops = Vec::new();
        for (i, op) in task.operators.iter().enumerate() {
            for eff in &op.effects {
                let mut pre: Vec<u32> = op
                    .preconditions
                    .iter()
                    .chain(&eff.conditions)
                    .map(|&f| atoms.id(f) as u32)
                    .collect();
                pre.sort_unstable();
                pre.dedup();
                ops.push(RelaxedOp {
                    pre,
                    add: atoms.id(crate::sas::Fact::new(eff.var, eff.value)) as u32,
                    op: i as u32,
                });
            }
        }
        let mut precondition_of = vec![Vec::new(); n];
        let mut achievers = vec![Vec::new(); n];
        for (r, op) in ops.iter().enumerate() {
            for &p in &op.pre {
                precondition_of[p as usize].push(r as u32);
            }
            achievers[op.add as usize].push(r as u32);
        }
        let goal = task.goal.iter().map(|&f| atoms.id(f) as u32).collect();
        RelaxedTask {
            ops,
            precondition_of,
            achievers,
            goal,
            num_atoms: n,
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    /// Atoms reachable in the delete relaxation from `start`, never using a
    /// relaxed operator for which `blocked` holds.
    pub fn reachable(&self, start: impl IntoIterator<Item = u32>, blocked: impl Fn(u32) -> bool) -> FixedBitSet {
        let mut reached = FixedBitSet::with_capacity(self.num_atoms);
        let mut unsat: Vec<u32> = self.ops.iter().map(|o| o.pre.len() as u32).collect();
        let mut stack = Vec::new();
        for a in start {
            if !reached.put(a as usize) {
                stack.push(a);
            }
        }
        let fire = |r: usize, reached: &mut FixedBitSet, stack: &mut Vec<u32>| {
            let add = self.ops[r].add;
            if !blocked(r as u32) && !reached.put(add as usize) {
                stack.push(add);
            }
        };
        for (r, &u) in unsat.iter().enumerate() {
            if u == 0 {
                fire(r, &mut reached, &mut stack);
            }
        }
        while let Some(a) = stack.pop() {
            for &r in &self.precondition_of[a as usize] {
                let u = &mut unsat[r as usize];
                *u -= 1;
                if *u == 0 {
                    fire(r as usize, &mut reached, &mut stack);
                }
            }
        }
        reached
    }

    pub fn state_atoms<'a>(&self, task: &'a Task, state: &'a [usize]) -> impl Iterator<Item = u32> + 'a {
        state
            .iter()
            .enumerate()
            .map(move |(v, &x)| (task.atoms().offset(v) + x) as u32)
    }

    pub fn goal_reachable(&self, reached: &FixedBitSet) -> bool {
        self.goal.iter().all(|&g| reached.contains(g as usize))
    }
}
