//! Seeded Monte-Carlo experiments: rowspace growth under uniform row
//! sampling, certification rate sweeps, the parallel coupon collector, and
//! the genie estimator behind the sample lower bound.
//!
//! Trial `i` of a sweep with master seed `s` draws from a ChaCha8 stream
//! seeded with `s` on stream `i`, so sweeps are reproducible regardless of
//! how many threads run them. A single-trial entry point called with seed
//! `s` uses stream 0 and matches trial 0 of the sweep.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::completion::random_index;
use crate::error::{Error, Result};
use crate::f2lin::{f2_in_span, BitMatrix, BitVec, F2Basis};
use crate::tensor::{all_indices, design_rank, design_row_unchecked, num_entries};

/// Exponent of the draw budget `beta * d * ln(dN)` for the lower bound.
pub const LOWER_BOUND_BETA: f64 = 0.25;

/// Smallest `dN` at which the coupon-collector bound is stated to hold.
pub const LOWER_BOUND_MIN_DN: usize = 78;

/// Outcome of a single trial. Only the fields relevant to the experiment are
/// populated.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub d: usize,
    pub n: usize,
    pub m: u64,
    pub seed: u64,
    pub certified: bool,
    pub hitting_time: Option<u64>,
    pub frobenius_error: Option<f64>,
    pub missed_ball: Option<bool>,
    pub signs_exact: Option<bool>,
    pub max_rel_error: Option<f64>,
}

impl TrialRecord {
    pub fn new(d: usize, n: usize, m: u64, seed: u64) -> Self {
        TrialRecord {
            d,
            n,
            m,
            seed,
            certified: false,
            hitting_time: None,
            frobenius_error: None,
            missed_ball: None,
            signs_exact: None,
            max_rel_error: None,
        }
    }
}

/// RNG for trial `trial` of a sweep seeded with `master`.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

/// Draw count `r - 1 + ceil(d ln(3 d^(N r)))` with `r = dN - (N - 1)`, which
/// bounds the failure probability of the rowspace walk by 1/3.
pub fn upper_bound_sample_count(d: usize, n: usize) -> u64 {
    let r = design_rank(d, n) as f64;
    let log_term = 3f64.ln() + n as f64 * r * (d as f64).ln();
    (r - 1.0) as u64 + (d as f64 * log_term).ceil() as u64
}

/// `floor(beta d ln(dN))` with `beta = 1/4`.
pub fn lower_bound_draws(d: usize, n: usize) -> u64 {
    (LOWER_BOUND_BETA * d as f64 * ((d * n) as f64).ln()).floor() as u64
}

/// One-sided Clopper-Pearson lower confidence bound at level `1 - alpha`.
pub fn clopper_pearson_lower(successes: u64, trials: u64, alpha: f64) -> f64 {
    assert!(successes <= trials && trials > 0);
    if successes == 0 {
        return 0.0;
    }
    let beta = Beta::new(successes as f64, (trials - successes + 1) as f64)
        .expect("positive shape parameters");
    beta.inverse_cdf(alpha)
}

fn validate_shape(d: usize, n: usize) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(Error::BadParameter(format!(
            "d and N must be positive (got d={d}, N={n})"
        )));
    }
    Ok(())
}

/// Cumulative GF(2) span of uniformly drawn design rows.
#[derive(Debug, Clone)]
pub struct RowspaceWalk {
    d: usize,
    n: usize,
    basis: F2Basis,
    target: usize,
    draws: u64,
}

impl RowspaceWalk {
    pub fn new(d: usize, n: usize) -> Self {
        RowspaceWalk {
            d,
            n,
            basis: F2Basis::new(d * n),
            target: design_rank(d, n),
            draws: 0,
        }
    }

    /// Draws one row and returns the updated span dimension.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let ix = random_index(self.d, self.n, rng);
        let row = BitVec::from_ones(
            self.d * self.n,
            design_row_unchecked(ix.coords(), self.d).columns(),
        );
        self.basis.insert(row);
        self.draws += 1;
        self.basis.rank()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn is_complete(&self) -> bool {
        self.basis.rank() == self.target
    }
}

/// Number of draws until the span reaches the full design rank.
pub fn hitting_time<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> u64 {
    let mut walk = RowspaceWalk::new(d, n);
    while !walk.is_complete() {
        walk.step(rng);
    }
    walk.draws()
}

pub fn dim_growth_trial(d: usize, n: usize, seed: u64) -> Result<u64> {
    validate_shape(d, n)?;
    Ok(hitting_time(d, n, &mut trial_rng(seed, 0)))
}

/// Hitting-time records for `trials` independent walks.
pub fn dim_growth_records(d: usize, n: usize, trials: u64, seed: u64) -> Result<Vec<TrialRecord>> {
    validate_shape(d, n)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let t = hitting_time(d, n, &mut trial_rng(seed, i));
            let mut rec = TrialRecord::new(d, n, t, seed);
            rec.hitting_time = Some(t);
            rec.certified = true;
            rec
        })
        .collect())
}

/// Aggregated successes at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub param: u64,
    pub trials: u64,
    pub successes: u64,
}

impl RatePoint {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    pub fn lower_bound(&self, alpha: f64) -> f64 {
        clopper_pearson_lower(self.successes, self.trials, alpha)
    }
}

/// Certification rate after `m` draws, for each `m`.
///
/// Each trial walks one draw sequence; `m` draws certify exactly when the
/// walk's hitting time is at most `m`, so all `m` share the same trials and
/// the rates are nondecreasing in `m`.
pub fn success_sweep(
    d: usize,
    n: usize,
    m_list: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<RatePoint>> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    let times: Vec<u64> = dim_growth_records(d, n, trials, seed)?
        .into_iter()
        .map(|r| r.hitting_time.expect("hitting time recorded"))
        .collect();
    Ok(m_list
        .iter()
        .map(|&m| RatePoint {
            param: m,
            trials,
            successes: times.iter().filter(|&&t| t <= m).count() as u64,
        })
        .collect())
}

/// N urns of d balls; each round draws one ball from every urn.
#[derive(Debug, Clone)]
pub struct CouponState {
    d: usize,
    seen: Vec<Vec<bool>>,
    remaining: Vec<usize>,
    total: usize,
    t: u64,
}

impl CouponState {
    pub fn new(d: usize, n: usize) -> Self {
        CouponState {
            d,
            seen: vec![vec![false; d]; n],
            remaining: vec![d; n],
            total: d * n,
            t: 0,
        }
    }

    /// Records one round with the given 1-based ball per urn; returns the
    /// number of newly seen balls.
    pub fn observe(&mut self, balls: &[usize]) -> usize {
        assert_eq!(balls.len(), self.seen.len());
        let mut fresh = 0;
        for (urn, &b) in balls.iter().enumerate() {
            let slot = &mut self.seen[urn][b - 1];
            if !*slot {
                *slot = true;
                self.remaining[urn] -= 1;
                fresh += 1;
            }
        }
        self.total -= fresh;
        self.t += 1;
        fresh
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let balls: Vec<usize> = (0..self.seen.len())
            .map(|_| rng.random_range(1..=self.d))
            .collect();
        self.observe(&balls)
    }

    /// Unseen balls per urn.
    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn draws(&self) -> u64 {
        self.t
    }

    pub fn is_seen(&self, urn: usize, ball: usize) -> bool {
        self.seen[urn][ball - 1]
    }
}

fn coupon_run<R: Rng + ?Sized>(d: usize, n: usize, t_draws: u64, rng: &mut R) -> bool {
    let mut state = CouponState::new(d, n);
    for _ in 0..t_draws {
        state.draw(rng);
    }
    state.total() >= 1
}

/// Whether some ball is still unseen after `t_draws` rounds.
pub fn coupon_trial(d: usize, n: usize, t_draws: u64, seed: u64) -> Result<bool> {
    validate_shape(d, n)?;
    Ok(coupon_run(d, n, t_draws, &mut trial_rng(seed, 0)))
}

pub fn coupon_sweep(d: usize, n: usize, t_draws: u64, trials: u64, seed: u64) -> Result<RatePoint> {
    validate_shape(d, n)?;
    let misses = (0..trials)
        .into_par_iter()
        .filter(|&i| coupon_run(d, n, t_draws, &mut trial_rng(seed, i)))
        .count() as u64;
    Ok(RatePoint {
        param: t_draws,
        trials,
        successes: misses,
    })
}

/// Error of the genie estimator on one random sign tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryOutcome {
    /// Factor coordinates not touched by any sampled entry.
    pub missed_variables: usize,
    /// Missed coordinates whose true sign is negative.
    pub wrong_guesses: usize,
    /// Entries whose reconstructed sign is wrong.
    pub flipped_entries: u64,
    pub frobenius_error: f64,
}

impl AdversaryOutcome {
    /// `||U_hat - U||_F >= rho sqrt(d^(N-1))`, decided in integers:
    /// the error is `2 rho sqrt(flipped)`.
    pub fn is_big_error(&self, d: usize, n: usize) -> bool {
        let slice = (d as u128).pow(n as u32 - 1);
        4 * self.flipped_entries as u128 >= slice
    }
}

fn adversary_run<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rho: f64,
    m: u64,
    rng: &mut R,
) -> Result<AdversaryOutcome> {
    let negative: Vec<Vec<bool>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_bool(0.5)).collect())
        .collect();
    let mut collected = CouponState::new(d, n);
    for _ in 0..m {
        collected.draw(rng);
    }
    genie_outcome(rho, &negative, &collected)
}

/// Error of the genie estimator on `rho * (u_1 ⊗ ... ⊗ u_N)` with
/// `(u_l)_i = -1` where `negative[l][i]`, given which coordinates the samples
/// collected.
///
/// The genie knows every collected coordinate and guesses +1 for the rest,
/// so its sign is wrong exactly on missed coordinates with true sign -1.
pub fn genie_outcome(
    rho: f64,
    negative: &[Vec<bool>],
    collected: &CouponState,
) -> Result<AdversaryOutcome> {
    let n = negative.len();
    let d = collected.d;
    assert_eq!(collected.seen.len(), n);
    let wrong: Vec<u64> = (0..n)
        .map(|urn| {
            (1..=d)
                .filter(|&b| !collected.is_seen(urn, b) && negative[urn][b - 1])
                .count() as u64
        })
        .collect();
    // An entry is flipped when it picks an odd number of wrong coordinates:
    // flipped = (d^N - prod_l (d - 2 w_l)) / 2.
    let overflow = || Error::BadParameter("d^N overflows".into());
    let total = num_entries(d, n).map(i128::from).ok_or_else(overflow)?;
    let mut signed = 1i128;
    for &w in &wrong {
        signed = signed
            .checked_mul(d as i128 - 2 * w as i128)
            .ok_or_else(overflow)?;
    }
    let flipped = ((total - signed) / 2) as u64;
    Ok(AdversaryOutcome {
        missed_variables: collected.total(),
        wrong_guesses: wrong.iter().sum::<u64>() as usize,
        flipped_entries: flipped,
        frobenius_error: 2.0 * rho * (flipped as f64).sqrt(),
    })
}

fn validate_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter(format!(
            "rho must be positive (got {rho})"
        )))
    }
}

/// Random `rho`-scaled sign tensor, `m` uniform samples, genie reconstruction.
pub fn adversary_trial(
    d: usize,
    n: usize,
    rho: f64,
    m: u64,
    seed: u64,
) -> Result<AdversaryOutcome> {
    validate_shape(d, n)?;
    validate_rho(rho)?;
    adversary_run(d, n, rho, m, &mut trial_rng(seed, 0))
}

/// Counts trials with error at least `rho sqrt(d^(N-1))`.
pub fn adversary_sweep(
    d: usize,
    n: usize,
    rho: f64,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<RatePoint> {
    validate_shape(d, n)?;
    validate_rho(rho)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| adversary_run(d, n, rho, m, &mut trial_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatePoint {
        param: m,
        trials,
        successes: outcomes.iter().filter(|o| o.is_big_error(d, n)).count() as u64,
    })
}

/// Full design matrix over GF(2), rows in index order.
pub fn full_design_matrix(d: usize, n: usize) -> BitMatrix {
    let mut a = BitMatrix::new(d * n);
    for ix in all_indices(d, n) {
        a.push_ones(design_row_unchecked(ix.coords(), d).columns());
    }
    a
}

/// Number of design rows outside the span of `w`, or `None` when `w` already
/// has full design rank.
pub fn independent_row_count(d: usize, n: usize, w: &BitMatrix) -> Option<u64> {
    let mut basis = F2Basis::new(d * n);
    for r in w.rows() {
        basis.insert(r);
    }
    if basis.rank() >= design_rank(d, n) {
        return None;
    }
    let a = full_design_matrix(d, n);
    Some(a.rows().filter(|row| !f2_in_span(w, row)).count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceReport {
    pub trials: u64,
    pub skipped: u64,
    pub min_independent: Option<u64>,
    pub holds: bool,
}

/// Samples subspaces `W` of the design row space that contain at least one
/// design row and have deficient dimension, and checks that at least
/// `d^(N-1)` design rows fall outside each.
///
/// Generators past the first are either single design rows or sums of up to
/// three design rows, so `W` need not be spanned by design rows alone.
pub fn subspace_independence_check(
    d: usize,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<SubspaceReport> {
    validate_shape(d, n)?;
    match num_entries(d, n) {
        Some(total) if total <= 4096 => {}
        _ => {
            return Err(Error::BadParameter(
                "subspace_independence_check needs d^N <= 4096".into(),
            ))
        }
    }
    let r = design_rank(d, n);
    let need = (d as u64).pow(n as u32 - 1);
    let mut report = SubspaceReport {
        trials: 0,
        skipped: 0,
        min_independent: None,
        holds: true,
    };
    if r == 1 {
        // Any W holding a design row already has full dimension.
        return Ok(report);
    }
    let width = d * n;
    let mut rng = trial_rng(seed, 0);
    let random_row = |rng: &mut ChaCha8Rng| {
        let ix = random_index(d, n, rng);
        BitVec::from_ones(width, design_row_unchecked(ix.coords(), d).columns())
    };
    let max_attempts = trials.saturating_mul(1000).max(1000);
    let mut attempts = 0;
    while report.trials < trials {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::BadParameter(
                "could not sample enough proper subspaces".into(),
            ));
        }
        let mut w = BitMatrix::new(width);
        w.push_row(&random_row(&mut rng));
        let extra = rng.random_range(0..r);
        for _ in 0..extra {
            let mut g = random_row(&mut rng);
            if rng.random_bool(0.5) {
                for _ in 0..rng.random_range(1..=2) {
                    g.xor_assign(&random_row(&mut rng));
                }
            }
            w.push_row(&g);
        }
        match independent_row_count(d, n, &w) {
            None => report.skipped += 1,
            Some(count) => {
                report.trials += 1;
                report.min_independent =
                    Some(report.min_independent.map_or(count, |m| m.min(count)));
                if count < need {
                    report.holds = false;
                }
            }
        }
    }
    Ok(report)
}

pub const SWEEP_HEADER: &str = "experiment,d,N,m,trials,successes,rate";
pub const COUPON_HEADER: &str = "experiment,d,N,t,trials,misses,rate";
pub const ADVERSARY_HEADER: &str = "experiment,d,N,rho,m,trials,big_error_count,rate";

pub fn write_rate_rows<W: Write + ?Sized>(
    out: &mut W,
    header: &str,
    experiment: &str,
    d: usize,
    n: usize,
    points: &[RatePoint],
) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for p in points {
        writeln!(
            out,
            "{experiment},{d},{n},{},{},{},{:.6}",
            p.param,
            p.trials,
            p.successes,
            p.rate()
        )?;
    }
    Ok(())
}

pub fn write_adversary_rows<W: Write + ?Sized>(
    out: &mut W,
    d: usize,
    n: usize,
    rho: f64,
    points: &[RatePoint],
) -> io::Result<()> {
    writeln!(out, "{ADVERSARY_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "adversary,{d},{n},{rho},{},{},{},{:.6}",
            p.param,
            p.trials,
            p.successes,
            p.rate()
        )?;
    }
    Ok(())
}
