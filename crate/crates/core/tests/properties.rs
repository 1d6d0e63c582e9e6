//! Property tests over randomly generated instances, policies, and
//! datasets.

use proptest::prelude::*;

use ail_core::expert::{estimate_occupancy, estimation_error};
use ail_core::instance::{make_fig2, make_rbas, InstanceSpec, LabeledInstance};
use ail_core::learners::{matching_loss, tvail_lp, Divergence};
use ail_core::mdp::{
    compute_occupancy, flow_conservation_gap, KernelStep, NonStationaryPolicy, OccupancyMeasure,
    SaTable, TabularMDP, TransitionKernel,
};
use ail_core::metrics::{approx_condition_lhs, epsilon_with_optimum, in_candidate_set};

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    let mut out: Vec<f64> = weights.iter().map(|w| w / sum).collect();
    let drift: f64 = out.iter().sum::<f64>() - 1.0;
    out[0] -= drift;
    out
}

prop_compose! {
    fn arb_mdp()(
        ns in 2usize..=4,
        na in 2usize..=3,
        h in 1usize..=4,
    )(
        kernel_w in prop::collection::vec(0.05f64..1.0, ns * na * ns),
        rho_w in prop::collection::vec(0.05f64..1.0, ns),
        ns in Just(ns),
        na in Just(na),
        h in Just(h),
    ) -> TabularMDP {
        let mut dense = vec![0.0; ns * na * ns];
        for (row_idx, chunk) in kernel_w.chunks(ns).enumerate() {
            let row = normalized(chunk.to_vec());
            dense[row_idx * ns..(row_idx + 1) * ns].copy_from_slice(&row);
        }
        let kernel = TransitionKernel::Stationary(
            KernelStep::from_dense(ns, na, &dense).unwrap(),
        );
        let reward = SaTable::zeros(h, ns, na);
        TabularMDP::new(ns, na, h, kernel, reward, normalized(rho_w)).unwrap()
    }
}

fn arb_policy_for(ns: usize, na: usize, h: usize) -> impl Strategy<Value = NonStationaryPolicy> {
    prop::collection::vec(0.02f64..1.0, h * ns * na).prop_map(move |w| {
        let mut probs = SaTable::zeros(h, ns, na);
        for hh in 0..h {
            for s in 0..ns {
                let base = (hh * ns + s) * na;
                let row = normalized(w[base..base + na].to_vec());
                probs.row_mut(hh, s).copy_from_slice(&row);
            }
        }
        NonStationaryPolicy::new(probs).unwrap()
    })
}

fn arb_mdp_policy() -> impl Strategy<Value = (TabularMDP, NonStationaryPolicy)> {
    arb_mdp().prop_flat_map(|mdp| {
        let (ns, na, h) = (mdp.num_states, mdp.num_actions, mdp.horizon);
        (Just(mdp), arb_policy_for(ns, na, h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn occupancy_is_normalized_and_flow_conserving((mdp, policy) in arb_mdp_policy()) {
        let occ = compute_occupancy(&mdp, &policy).unwrap();
        occ.validate().unwrap();
        prop_assert!(flow_conservation_gap(&mdp, &occ) < 1e-9);
    }

    #[test]
    fn estimation_error_satisfies_triangle_inequality(
        seeds in prop::collection::vec(0u64..1000, 3),
        n in 1usize..5,
    ) {
        let inst = make_fig2().unwrap();
        let occs: Vec<OccupancyMeasure> = seeds
            .iter()
            .map(|&s| {
                let data = ail_core::expert::collect(&inst, n, s).unwrap();
                estimate_occupancy(&data, 3, 2).unwrap()
            })
            .collect();
        let d = |a: &OccupancyMeasure, b: &OccupancyMeasure| {
            estimation_error(a, b).unwrap().total
        };
        prop_assert!(d(&occs[0], &occs[2]) <= d(&occs[0], &occs[1]) + d(&occs[1], &occs[2]) + 1e-12);
        prop_assert!(d(&occs[0], &occs[1]) >= 0.0);
        prop_assert!((d(&occs[0], &occs[1]) - d(&occs[1], &occs[0])).abs() < 1e-15);
    }

    #[test]
    fn lp_optimum_lower_bounds_random_policies((mdp, policy) in arb_mdp_policy()) {
        // Use the policy's own occupancy perturbed into a valid target.
        let target = compute_occupancy(&mdp, &NonStationaryPolicy::uniform(
            mdp.horizon, mdp.num_states, mdp.num_actions)).unwrap();
        let (_, optimum) = tvail_lp(&mdp, &target).unwrap();
        let loss = matching_loss(&mdp, &policy, &target, Divergence::L1).unwrap();
        prop_assert!(optimum <= loss + 1e-7, "optimum {optimum} loss {loss}");
    }
}

/// Condition left-hand side never exceeds the optimization error, over
/// random candidate-set policies on instances with reachable bad
/// absorbing states.
fn check_condition_inequality(inst: &LabeledInstance, policy: &NonStationaryPolicy) {
    let data = ail_core::expert::collect(inst, 2, 11).unwrap();
    let target = estimate_occupancy(&data, inst.mdp.num_states, inst.mdp.num_actions).unwrap();
    assert!(in_candidate_set(inst, policy));
    let (_, optimum) = tvail_lp(&inst.mdp, &target).unwrap();
    let loss = matching_loss(&inst.mdp, policy, &target, Divergence::L1).unwrap();
    let eps = epsilon_with_optimum(loss, optimum);
    let lhs = approx_condition_lhs(inst, policy, &target).unwrap();
    assert!(lhs <= eps + 1e-9, "lhs {lhs} eps {eps}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn condition_lhs_bounded_by_epsilon_on_fig2(
        policy in arb_policy_for(3, 2, 2),
    ) {
        let inst = make_fig2().unwrap();
        check_condition_inequality(&inst, &policy);
    }

    #[test]
    fn condition_lhs_bounded_by_epsilon_on_wider_instance(
        policy in arb_policy_for(6, 2, 3),
    ) {
        let inst = make_rbas(&InstanceSpec::rbas(6, 5, 2, 3)).unwrap();
        check_condition_inequality(&inst, &policy);
    }
}
