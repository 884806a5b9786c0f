mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use nolan::heuristics::RelaxedTask;
use nolan::landmarks::{passes_removal_test, LandmarkGraph, LandmarkStatus};
use nolan::sas::Fact;
use nolan::search::{applicable_operators, apply_operator};
use nolan::Task;

/// Landmark values along `plan`, with the status of the last state.
fn walk(task: &Task, graph: &LandmarkGraph, plan: &[usize]) -> (Vec<u32>, LandmarkStatus, Vec<usize>) {
    let mut s = task.initial_state.clone();
    let (h, mut status) = graph.evaluate(&LandmarkStatus::empty(graph), &s);
    let mut values = vec![h];
    for &o in plan {
        s = apply_operator(task, &s, o).unwrap();
        let (h, next) = graph.evaluate(&status, &s);
        for i in 0..graph.len() {
            if !graph.landmarks[i].is_goal && graph.is_accepted(&status, &s, i) {
                assert!(graph.is_accepted(&next, &s, i), "non-goal acceptance is monotone");
            }
        }
        status = next;
        values.push(h);
    }
    (values, status, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn landmarks_are_sound(seed in any::<u64>()) {
        let task = common::random_task(&mut StdRng::seed_from_u64(seed));
        let relaxed = RelaxedTask::new(&task);
        let graph = LandmarkGraph::generate(&task, &relaxed);
        for lm in &graph.landmarks {
            prop_assert!(common::is_relaxed_landmark(&task, lm.fact), "{:?}", lm.fact);
            prop_assert!(passes_removal_test(&task, &relaxed, lm.atom));
        }
        if let Some(plan) = common::bfs_plan(&task) {
            let (values, _, _) = walk(&task, &graph, &plan);
            prop_assert_eq!(*values.last().unwrap(), 0);
            prop_assert!(values.iter().all(|&h| h as usize <= graph.len()));
        }
    }

    #[test]
    fn random_walks_keep_invariants(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let task = common::random_task(&mut rng);
        let graph = LandmarkGraph::generate(&task, &RelaxedTask::new(&task));
        let mut s = task.initial_state.clone();
        let mut status = graph.evaluate(&LandmarkStatus::empty(&graph), &s).1;
        for _ in 0..20 {
            let applicable = applicable_operators(&task, &s);
            let preferred = graph.preferred_operators(&status, &task, &s, &applicable);
            prop_assert!(preferred.iter().all(|o| applicable.contains(o)));
            let Some(&o) = applicable.choose(&mut rng) else { break };
            s = apply_operator(&task, &s, o).unwrap();
            let (h, next) = graph.evaluate(&status, &s);
            prop_assert!(h as usize <= graph.len());
            for i in 0..graph.len() {
                if status.reached.contains(i) {
                    prop_assert!(next.reached.contains(i));
                }
            }
            status = next;
        }
    }
}

#[test]
fn chain_landmarks() {
    let task = &common::fixtures()[0].1;
    let graph = LandmarkGraph::generate(task, &RelaxedTask::new(task));
    let mut facts: Vec<Fact> = graph.landmarks.iter().map(|l| l.fact).collect();
    facts.sort();
    assert_eq!(facts, vec![Fact::new(0, 1), Fact::new(0, 2)]);
    let v1 = graph.index_of(Fact::new(0, 1), task).unwrap();
    let v2 = graph.index_of(Fact::new(0, 2), task).unwrap();
    assert_eq!(graph.orderings(), vec![(v1, v2)]);
    let (values, _, _) = walk(task, &graph, &[0, 1]);
    assert_eq!(values, vec![2, 1, 0]);
}
