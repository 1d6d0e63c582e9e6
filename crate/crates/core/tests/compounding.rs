//! Behavioral cloning compounds its per-step mistakes on the reset-style
//! hard instance: at a fixed dataset size the gap grows superlinearly in
//! the horizon while the sample budget keeps the quadratic regime active.

use ail_core::expert::collect;
use ail_core::instance::make_offline_lower_bound;
use ail_core::learners::bc_fit;
use ail_core::metrics::imitation_gap;
use ail_core::seed::derive_seed;
use ail_core::stats::mean;

#[test]
fn cloning_gap_grows_superlinearly_in_horizon() {
    let n = 20;
    let seeds = 200;
    let mut means = Vec::new();
    for h in [8usize, 16, 32] {
        let inst = make_offline_lower_bound(3, h, n).unwrap();
        let gaps: Vec<f64> = (0..seeds)
            .map(|i| {
                let data = collect(&inst, n, derive_seed(4242, &[h as u64, i])).unwrap();
                let policy = bc_fit(&data, 3, 2).unwrap();
                imitation_gap(&inst, &policy).unwrap().gap
            })
            .collect();
        means.push(mean(&gaps));
    }
    let doubling_8 = means[1] / means[0];
    let doubling_16 = means[2] / means[1];
    assert!(
        doubling_8 >= 3.0 && doubling_16 >= 3.0,
        "gap means {means:?}, doubling ratios {doubling_8:.2} and {doubling_16:.2}"
    );
}
