use proptest::prelude::*;
use satpath_core::dynamics::{construct_path, path_minimum_index, validate_path, PathOptions, Termination};
use satpath_core::solvers::DeskSolver;
use satpath_core::{GroupPartition, MixedProfile, NormalFormGame, SatisficingConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grouped_paths_are_legal_and_end_well(
        payoffs in prop::collection::vec(-1.0f64..1.0, 24),
        start in prop::collection::vec(0usize..2, 3),
        whole in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let g = NormalFormGame::new(vec![2, 2, 2], payoffs).unwrap();
        let groups = if whole { vec![vec![0, 1], vec![2]] } else { vec![vec![0], vec![1], vec![2]] };
        let cfg = SatisficingConfig::new(1e-6, GroupPartition::new(3, groups).unwrap()).unwrap();
        let s0 = MixedProfile::pure(&[2, 2, 2], &start).unwrap();
        let opts = PathOptions { seed, ..PathOptions::default() };
        let path = construct_path(&g, &s0, &cfg, &DeskSolver::default(), &opts).unwrap();
        prop_assert!(validate_path(&g, &path).unwrap());
        prop_assert_eq!(path.profiles.len(), path.step_count + 1);
        prop_assert_eq!(path.terminal_is_equilibrium, path.termination == Termination::Equilibrium);
        if path.terminal_is_equilibrium {
            let last = path.last().unwrap();
            prop_assert!(g.is_eps_equilibrium(last, 1e-6).unwrap());
        }
        let counts = path.group_counts();
        let k = path_minimum_index(&path).unwrap();
        prop_assert!(counts.iter().all(|&c| c >= counts[k]));
    }
}

#[test]
fn tampered_paths_fail_validation() {
    let g = NormalFormGame::bimatrix(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let cfg = SatisficingConfig::singletons(0.0, 2).unwrap();
    let s0 = MixedProfile::pure(&[2, 2], &[0, 1]).unwrap();
    let mut path = construct_path(&g, &s0, &cfg, &DeskSolver::default(), &PathOptions::default()).unwrap();
    assert!(validate_path(&g, &path).unwrap());
    // every player is satisfied at the terminal equilibrium, so any move is illegal
    assert!(path.terminal_is_equilibrium);
    let last = path.last().unwrap().clone();
    let one_one = MixedProfile::pure(&[2, 2], &[1, 1]).unwrap();
    let moved = if last.approx_eq(&one_one, 1e-9) {
        MixedProfile::pure(&[2, 2], &[0, 0]).unwrap()
    } else {
        one_one
    };
    path.per_step_satisfied.push(g.satisfied_groups(&moved, &cfg).unwrap());
    path.profiles.push(moved);
    path.step_count += 1;
    assert!(!validate_path(&g, &path).unwrap());
}
