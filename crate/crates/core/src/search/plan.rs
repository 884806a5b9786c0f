use std::fmt::Write as _;

use super::successor::{apply_effects, is_applicable};
use crate::sas::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanCheck {
    Valid,
    /// The operator at this step is not applicable.
    Inapplicable { step: usize },
    GoalUnmet,
}

impl PlanCheck {
    pub fn is_valid(self) -> bool {
        self == PlanCheck::Valid
    }
}

/// Executes `plan` from the initial state and checks that it reaches the goal.
pub fn validate_plan(task: &Task, plan: &[usize]) -> PlanCheck {
    let mut state = task.initial_state.clone();
    let mut next = state.clone();
    for (step, &op) in plan.iter().enumerate() {
        let Some(operator) = task.operators.get(op) else {
            return PlanCheck::Inapplicable { step };
        };
        if !is_applicable(operator, &state) {
            return PlanCheck::Inapplicable { step };
        }
        next.copy_from_slice(&state);
        apply_effects(operator, &state, &mut next);
        std::mem::swap(&mut state, &mut next);
    }
    if task.is_goal(&state) {
        PlanCheck::Valid
    } else {
        PlanCheck::GoalUnmet
    }
}

/// IPC plan format: one `(name)` line per step and a trailing cost comment.
pub fn format_plan(task: &Task, plan: &[usize]) -> String {
    let mut out = String::new();
    for &op in plan {
        let _ = writeln!(out, "({})", task.operators[op].name);
    }
    let _ = writeln!(out, "; cost = {} (unit cost)", plan.len());
    out
}
