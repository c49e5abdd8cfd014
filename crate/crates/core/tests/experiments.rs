use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rank1::experiments::{
    adversary_trial, coupon_sweep, genie_outcome, hitting_time, success_sweep, trial_rng,
    CouponState, RowspaceWalk,
};
use rank1::tensor::{all_indices, design_rank};

/// Counts flipped entries by visiting every index: the genie's sign at a
/// coordinate is wrong when the coordinate was missed and is truly negative.
fn flipped_by_enumeration(negative: &[Vec<bool>], collected: &CouponState) -> u64 {
    let n = negative.len();
    let d = negative[0].len();
    all_indices(d, n)
        .filter(|ix| {
            let wrong = ix
                .coords()
                .iter()
                .enumerate()
                .filter(|&(l, &i)| !collected.is_seen(l, i) && negative[l][i - 1])
                .count();
            wrong % 2 == 1
        })
        .count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn genie_error_matches_enumeration(
        (d, n) in (1usize..=6, 1usize..=4),
        rounds in 0u64..12,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let negative: Vec<Vec<bool>> = (0..n).map(|_| (0..d).map(|_| rng.random_bool(0.5)).collect()).collect();
        let mut state = CouponState::new(d, n);
        for _ in 0..rounds {
            state.draw(&mut rng);
        }
        let out = genie_outcome(1.5, &negative, &state).unwrap();
        let flipped = flipped_by_enumeration(&negative, &state);
        prop_assert_eq!(out.flipped_entries, flipped);
        prop_assert!((out.frobenius_error - 3.0 * (flipped as f64).sqrt()).abs() <= 1e-12);
        prop_assert_eq!(out.missed_variables, state.total());
    }

    #[test]
    fn coupon_bookkeeping_is_consistent(
        (d, n) in (1usize..=8, 1usize..=4),
        rounds in 0u64..30,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = CouponState::new(d, n);
        let mut prev = state.total();
        for _ in 0..rounds {
            let fresh = state.draw(&mut rng);
            prop_assert_eq!(prev - state.total(), fresh);
            prev = state.total();
        }
        prop_assert_eq!(state.remaining().iter().sum::<usize>(), state.total());
        let unseen = (0..n).map(|l| (1..=d).filter(|&b| !state.is_seen(l, b)).count()).sum::<usize>();
        prop_assert_eq!(unseen, state.total());
        prop_assert_eq!(state.draws(), rounds);
    }

    #[test]
    fn walk_rank_is_nondecreasing_and_capped(
        (d, n) in (1usize..=6, 1usize..=3),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut walk = RowspaceWalk::new(d, n);
        prop_assert_eq!(walk.target(), design_rank(d, n));
        let mut prev = walk.rank();
        while !walk.is_complete() {
            let r = walk.step(&mut rng);
            prop_assert!(r == prev || r == prev + 1);
            prop_assert!(r <= walk.target());
            prev = r;
        }
    }
}

#[test]
fn first_round_leaves_d_minus_one_per_urn() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (d, n) in [(2, 1), (5, 3), (40, 2)] {
        let mut state = CouponState::new(d, n);
        state.draw(&mut rng);
        assert_eq!(state.total(), (d - 1) * n);
    }
}

#[test]
fn single_missed_negative_coordinate_flips_one_slice() {
    // d = 6, N = 3: every coordinate seen except urn 1 ball 4, which is negative.
    let (d, n) = (6, 3);
    let mut state = CouponState::new(d, n);
    for b in 1..=d {
        let first = if b == 4 { 1 } else { b };
        state.observe(&[first, b, b]);
    }
    assert_eq!(state.total(), 1);
    let mut negative = vec![vec![false; d]; n];
    negative[0][3] = true;
    let out = genie_outcome(1.0, &negative, &state).unwrap();
    assert_eq!(out.flipped_entries, 36);
    assert_eq!(out.frobenius_error, 12.0);
    assert!(out.is_big_error(d, n));
}

#[test]
fn all_seen_means_no_error() {
    let out = adversary_trial(3, 2, 1.0, 10_000, 1).unwrap();
    assert_eq!(out.missed_variables, 0);
    assert_eq!(out.flipped_entries, 0);
    assert_eq!(out.frobenius_error, 0.0);
}

#[test]
fn sweeps_are_deterministic() {
    let a = success_sweep(4, 2, &[10, 20, 40], 50, 9).unwrap();
    let b = success_sweep(4, 2, &[10, 20, 40], 50, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|p| p[0].successes <= p[1].successes));
    assert_eq!(
        coupon_sweep(10, 2, 5, 100, 3).unwrap(),
        coupon_sweep(10, 2, 5, 100, 3).unwrap()
    );
}

#[test]
fn hitting_time_within_sample_bound_at_d8() {
    let trials = 300;
    let within = (0..trials)
        .filter(|&i| hitting_time(8, 2, &mut trial_rng(11, i)) <= 522)
        .count();
    assert!(within * 3 >= 2 * trials as usize, "{within}/{trials}");
}

#[test]
fn coupon_never_misses_with_one_ball() {
    let p = coupon_sweep(1, 3, 1, 50, 0).unwrap();
    assert_eq!(p.successes, 0);
    assert_eq!(p.rate(), 0.0);
}
