use proptest::prelude::*;
use satpath_core::markov::{
    apply_value_operator, compile_k_step, evaluate_policy, freeze_players_stochastic, induced_mdp_best_response,
    stationary_regrets, value_lipschitz_bound, KStepGame, StationaryPolicyProfile, StochasticGame,
};
use satpath_core::{NormalFormGame, StationaryPolicyProfile64, StochasticGame64};

const TOL: f64 = 1e-9;

fn distribution(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, m).prop_map(|w| {
        let w: Vec<f64> = w.into_iter().map(|x| x + 1e-3).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    })
}

fn policy(counts: Vec<usize>, states: usize) -> impl Strategy<Value = StationaryPolicyProfile64> {
    counts
        .into_iter()
        .map(|m| prop::collection::vec(distribution(m), states))
        .collect::<Vec<_>>()
        .prop_map(|p| StationaryPolicyProfile::new(p).unwrap())
}

fn game(max_players: usize) -> impl Strategy<Value = StochasticGame64> {
    (
        prop::collection::vec(1usize..=3, 1..=max_players),
        1usize..=3,
        0.0f64..0.95,
    )
        .prop_flat_map(|(counts, states, gamma)| {
            let n = counts.len();
            let rows = states * counts.iter().product::<usize>();
            (
                prop::collection::vec(distribution(states), rows),
                prop::collection::vec(-1.0f64..1.0, rows * n),
            )
                .prop_map(move |(kernel, payoffs)| {
                    let transition = kernel.into_iter().flatten().collect();
                    StochasticGame::new(counts.clone(), states, transition, payoffs, vec![gamma; n]).unwrap()
                })
        })
}

fn game_and_policies(
    max_players: usize,
) -> impl Strategy<Value = (StochasticGame64, StationaryPolicyProfile64, StationaryPolicyProfile64)> {
    game(max_players).prop_flat_map(|g| {
        let counts = g.action_counts().to_vec();
        let x = g.num_states();
        (Just(g), policy(counts.clone(), x), policy(counts, x))
    })
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn value_operator_contracts((g, pi, _s) in game_and_policies(3), seed in prop::collection::vec(-5.0f64..5.0, 6)) {
        let x = g.num_states();
        let (p, q) = (&seed[..x], &seed[3..3 + x]);
        for i in 0..g.num_players() {
            let a = apply_value_operator(&g, &pi, i, p).unwrap();
            let b = apply_value_operator(&g, &pi, i, q).unwrap();
            prop_assert!(sup(&a, &b) <= g.discount(i) * sup(p, q) + 1e-12);
        }
    }

    #[test]
    fn values_obey_the_a_priori_bound((g, pi, _s) in game_and_policies(3)) {
        let m = g.max_abs_payoff();
        for i in 0..g.num_players() {
            let h = evaluate_policy(&g, &pi, i, TOL).unwrap();
            let norm = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            prop_assert!(norm <= m / (1.0 - g.discount(i)) + TOL);
            // the fixed point is reproduced by one more application
            let again = apply_value_operator(&g, &pi, i, &h).unwrap();
            prop_assert!(sup(&again, &h) <= 2.0 * TOL);
        }
    }

    #[test]
    fn values_are_lipschitz_in_the_policy((g, pi, sigma) in game_and_policies(3)) {
        let d = pi.distance(&sigma);
        for i in 0..g.num_players() {
            let a = evaluate_policy(&g, &pi, i, TOL).unwrap();
            let b = evaluate_policy(&g, &sigma, i, TOL).unwrap();
            prop_assert!(sup(&a, &b) <= value_lipschitz_bound(&g, i) * d + 2.0 * TOL);
        }
    }

    #[test]
    fn frozen_subgame_values_match((g, pi, _s) in game_and_policies(3), mask in any::<u8>()) {
        let n = g.num_players();
        prop_assume!(n >= 2);
        let mut frozen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if frozen.is_empty() {
            frozen.push(0);
        }
        if frozen.len() == n {
            frozen.pop();
        }
        let sub = freeze_players_stochastic(&g, &pi, &frozen).unwrap();
        let sub_pi = sub.project(&pi);
        prop_assert_eq!(sub.embed(&sub_pi).unwrap(), pi.clone());
        for (k, &i) in sub.free_players.iter().enumerate() {
            let a = evaluate_policy(&sub.game, &sub_pi, k, TOL).unwrap();
            let b = evaluate_policy(&g, &pi, i, TOL).unwrap();
            prop_assert!(sup(&a, &b) <= 2.0 * TOL);
        }
    }

    #[test]
    fn best_response_dominates_the_policy((g, pi, _s) in game_and_policies(3)) {
        for i in 0..g.num_players() {
            let h = evaluate_policy(&g, &pi, i, TOL).unwrap();
            let (best, greedy) = induced_mdp_best_response(&g, &pi, i, TOL).unwrap();
            for x in 0..g.num_states() {
                prop_assert!(best[x] >= h[x] - 2.0 * TOL);
            }
            let mut policy: Vec<Vec<f64>> = vec![vec![0.0; g.action_counts()[i]]; g.num_states()];
            for (x, &a) in greedy.iter().enumerate() {
                policy[x][a] = 1.0;
            }
            let responded = pi.with_player_policy(i, policy).unwrap();
            let achieved = evaluate_policy(&g, &responded, i, TOL).unwrap();
            let gamma = g.discount(i);
            prop_assert!(sup(&achieved, &best) <= 4.0 * TOL / (1.0 - gamma));
        }
        prop_assert!(stationary_regrets(&g, &pi, TOL).unwrap().iter().all(|&r| r >= -2.0 * TOL));
    }

    #[test]
    fn lifted_policies_keep_their_values((g, pi, _s) in game_and_policies(2)) {
        let kg = KStepGame::new(g.clone(), 1).unwrap();
        let compiled = compile_k_step(&kg).unwrap();
        let lifted = compiled.lift_policy(&pi).unwrap();
        for i in 0..g.num_players() {
            let base = evaluate_policy(&g, &pi, i, TOL).unwrap();
            let up = evaluate_policy(&compiled.game, &lifted, i, TOL).unwrap();
            for (y, state) in compiled.state_map.iter().enumerate() {
                prop_assert!((up[y] - base[state.state]).abs() <= 2.0 * TOL);
            }
        }
    }
}

#[test]
fn single_state_regrets_match_the_stage_game() {
    let nf = NormalFormGame::bimatrix(
        &[vec![0.2, -0.7, 0.4], vec![0.9, 0.1, -0.3]],
        &[vec![-0.1, 0.8, 0.0], vec![0.5, -0.6, 0.3]],
    )
    .unwrap();
    let g = StochasticGame::from_normal_form(&nf, vec![0.0, 0.0]).unwrap();
    let s = satpath_core::MixedProfile::new(vec![vec![0.3, 0.7], vec![0.2, 0.5, 0.3]]).unwrap();
    let pi = StationaryPolicyProfile::from_mixed(&s, 1);
    let regrets = stationary_regrets(&g, &pi, TOL).unwrap();
    for (i, r) in regrets.iter().enumerate() {
        assert!((r - nf.regret(&s, i).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn k_step_state_space_grows_geometrically() {
    let base = StochasticGame::new(vec![2, 2], 2, vec![0.5; 16], vec![0.0; 16], vec![0.5, 0.5]).unwrap();
    for k in 1..=3 {
        let kg = KStepGame::new(base.clone(), k).unwrap();
        assert_eq!(kg.compiled_states(), Some(2 * 4usize.pow(k as u32)));
        for y in 0..kg.compiled_states().unwrap() {
            let s = kg.decode(y);
            assert_eq!(kg.state_index(s.state, &s.history), y);
        }
    }
    assert!(KStepGame::new(base, 0).is_err());
}
