mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use nolan::heuristics::DeleteRelaxation;
use nolan::search::applicable_operators;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hadd_and_hff_against_oracles(seed in any::<u64>()) {
        let task = common::random_task(&mut StdRng::seed_from_u64(seed));
        let mut h = DeleteRelaxation::new(&task);
        for s in common::reachable_states(&task, 300) {
            let add = h.hadd(&task, &s);
            prop_assert_eq!(add, common::naive_hadd(&task, &s));
            let ff = h.hff(&task, &s);
            prop_assert_eq!(ff.value.is_none(), add.is_none());
            let goal = task.is_goal(&s);
            if let (Some(f), Some(a)) = (ff.value, add) {
                prop_assert!(u64::from(f) <= a);
                prop_assert_eq!(f == 0, goal);
                prop_assert_eq!(a == 0, goal);
                prop_assert_eq!(ff.relaxed_plan.len() as u32, f);
                prop_assert!(common::relaxed_replay_reaches_goal(&task, &s, &ff.relaxed_plan));
            }
            let applicable = applicable_operators(&task, &s);
            prop_assert!(ff.preferred.iter().all(|o| applicable.contains(o)));
        }
    }
}

#[test]
fn fixture_values() {
    let fx = common::fixtures();
    let chain = &fx[0].1;
    let mut h = DeleteRelaxation::new(chain);
    assert_eq!(h.hadd(chain, &[0]), Some(2));
    assert_eq!(h.hff(chain, &[0]).value, Some(2));
    assert_eq!(h.hff(chain, &[0]).preferred, vec![0]);
    let unsolvable = &fx[1].1;
    let mut h = DeleteRelaxation::new(unsolvable);
    assert_eq!(h.hadd(unsolvable, &[0]), None);
    assert_eq!(h.hff(unsolvable, &[0]).value, None);
    let pair = &fx[2].1;
    let mut h = DeleteRelaxation::new(pair);
    assert_eq!(h.hadd(pair, &[0, 0]), Some(2));
    assert_eq!(h.hff(pair, &[0, 0]).value, Some(2));
}
