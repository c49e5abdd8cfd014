//! Command-line frontend.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::completion::{complete, SampleSet};
use crate::error::{Error, Result};
use crate::experiments::{
    adversary_sweep, coupon_sweep, dim_growth_records, full_design_matrix, lower_bound_draws,
    success_sweep, upper_bound_sample_count, write_adversary_rows, write_rate_rows, RatePoint,
    COUPON_HEADER, SWEEP_HEADER,
};
use crate::f2lin::f2_rank;
use crate::io::{read_indices, read_observed, write_entry, write_factors};
use crate::reallin::{real_rank, DenseMatrix, DEFAULT_PIVOT_TOL};
use crate::tensor::{all_indices, design_rank, num_entries, FactorList};

/// Largest `d^N` for which `rank` materializes the full design matrix.
const MAX_RANK_ROWS: u64 = 1 << 16;

#[derive(Debug, Parser)]
#[command(
    name = "rank1",
    version,
    about = "Exact rank-1 tensor completion and sampling experiments"
)]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random factor file.
    Gen(GenArgs),
    /// Complete a tensor from observed entries.
    Complete(CompleteArgs),
    /// Print `formula f2 real` ranks of the full design matrix.
    Rank(ShapeArgs),
    /// Certification rate after m draws.
    Sweep(SweepArgs),
    /// Fraction of rowspace walks reaching full rank within the sample bound.
    Dimgrowth(TrialsArgs),
    /// Parallel coupon collector miss rate.
    Coupon(CouponArgs),
    /// Genie estimator error rate on random sign tensors.
    Adversary(AdversaryArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ShapeArgs {
    /// Mode dimension.
    #[arg(long = "d")]
    pub d: usize,
    /// Number of modes.
    #[arg(long = "n")]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Smallest coordinate magnitude.
    #[arg(long, default_value_t = 0.1)]
    pub mag_min: f64,
    /// Largest coordinate magnitude.
    #[arg(long, default_value_t = 10.0)]
    pub mag_max: f64,
    /// Probability that a coordinate is negative.
    #[arg(long, default_value_t = 0.5)]
    pub neg_prob: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Observed entries, `i_1 ... i_N value` per line.
    #[arg(long)]
    pub input: PathBuf,
    /// `all`, `none`, or a file of `i_1 ... i_N` lines.
    #[arg(long, default_value = "all")]
    pub query: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Single draw count (default: the rowspace-walk bound).
    #[arg(long)]
    pub m: Option<u64>,
    /// Comma-separated draw counts.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct TrialsArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct CouponArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Rounds per trial (default: floor(d ln(dN) / 4)).
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Samples per trial (default: floor(d ln(dN) / 4)).
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

/// Process exit code for an error: 1 when the samples cannot come from a
/// nonzero rank-1 tensor, 2 for anything wrong with the input itself.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InconsistentSigns | Error::InconsistentMagnitudes => 1,
        _ => 2,
    }
}

fn check_shape(s: ShapeArgs) -> Result<()> {
    if s.d == 0 || s.n == 0 {
        return Err(Error::BadParameter("--d and --n must be positive".into()));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::BadParameter("--trials must be at least 1".into()));
    }
    Ok(())
}

fn open_output<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, stdout),
        Command::Complete(a) => cmd_complete(a, stdout, stderr),
        Command::Rank(a) => cmd_rank(*a, stdout),
        Command::Sweep(a) => cmd_sweep(a, seed, stdout),
        Command::Dimgrowth(a) => cmd_dimgrowth(a, seed, stdout, stderr),
        Command::Coupon(a) => cmd_coupon(a, seed, stdout),
        Command::Adversary(a) => cmd_adversary(a, seed, stdout),
    }
}

/// Random factors: magnitudes log-uniform in `[mag_min, mag_max]`, each sign
/// negative with probability `neg_prob`.
pub fn generate_factors(
    d: usize,
    n: usize,
    seed: u64,
    mag_min: f64,
    mag_max: f64,
    neg_prob: f64,
) -> Result<FactorList> {
    if !(mag_min > 0.0 && mag_min <= mag_max && mag_max.is_finite()) {
        return Err(Error::BadParameter(format!(
            "magnitude range must satisfy 0 < min <= max (got [{mag_min}, {mag_max}])"
        )));
    }
    if !(0.0..=1.0).contains(&neg_prob) {
        return Err(Error::BadParameter(format!(
            "negative probability must lie in [0, 1] (got {neg_prob})"
        )));
    }
    if d == 0 || n == 0 {
        return Err(Error::BadParameter("d and N must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (mag_min.ln(), mag_max.ln());
    let factors = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let mag = if mag_min == mag_max {
                        mag_min
                    } else {
                        rng.random_range(lo..=hi).exp()
                    };
                    if rng.random_bool(neg_prob) {
                        -mag
                    } else {
                        mag
                    }
                })
                .collect()
        })
        .collect();
    FactorList::new(factors)
}

pub fn cmd_gen(a: &GenArgs, seed: u64, stdout: &mut dyn Write) -> Result<()> {
    check_shape(a.shape)?;
    let t = generate_factors(a.shape.d, a.shape.n, seed, a.mag_min, a.mag_max, a.neg_prob)?;
    let mut out = open_output(&a.output, stdout)?;
    write_factors(&mut out, &t)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_complete(
    a: &CompleteArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    check_shape(a.shape)?;
    let (d, n) = (a.shape.d, a.shape.n);
    let entries = read_observed(BufReader::new(File::open(&a.input)?), n)?;
    let samples = SampleSet::from_entries(d, n, entries)?;
    let queries = match a.query.as_str() {
        "none" => Vec::new(),
        "all" => {
            num_entries(d, n).ok_or_else(|| Error::BadParameter("d^N overflows".into()))?;
            all_indices(d, n).collect()
        }
        path => read_indices(BufReader::new(File::open(path)?), n)?,
    };
    for q in &queries {
        q.validate(d, n)?;
    }
    let completed = complete(&samples)?;
    let mut out = open_output(&a.output, stdout)?;
    for q in &queries {
        write_entry(&mut out, q, completed.query(q)?)?;
    }
    out.flush()?;
    writeln!(stderr, "certified: {}", completed.certified())?;
    Ok(())
}

pub fn cmd_rank(s: ShapeArgs, stdout: &mut dyn Write) -> Result<()> {
    check_shape(s)?;
    match num_entries(s.d, s.n) {
        Some(rows) if rows <= MAX_RANK_ROWS => {}
        _ => {
            return Err(Error::BadParameter(format!(
                "rank needs d^N <= {MAX_RANK_ROWS}"
            )))
        }
    }
    let a = full_design_matrix(s.d, s.n);
    let mut dense = DenseMatrix::with_width(a.width());
    for row in a.rows() {
        dense.push_row(
            &row.to_bits()
                .iter()
                .map(|&b| f64::from(u8::from(b)))
                .collect::<Vec<_>>(),
        );
    }
    writeln!(
        stdout,
        "{} {} {}",
        design_rank(s.d, s.n),
        f2_rank(&a),
        real_rank(&dense, DEFAULT_PIVOT_TOL)
    )?;
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, seed: u64, stdout: &mut dyn Write) -> Result<()> {
    check_shape(a.shape)?;
    check_trials(a.trials)?;
    let mut ms: Vec<u64> = a.m.into_iter().chain(a.m_list.iter().copied()).collect();
    if ms.is_empty() {
        ms.push(upper_bound_sample_count(a.shape.d, a.shape.n));
    }
    let points = success_sweep(a.shape.d, a.shape.n, &ms, a.trials, seed)?;
    write_rate_rows(stdout, SWEEP_HEADER, "sweep", a.shape.d, a.shape.n, &points)?;
    Ok(())
}

pub fn cmd_dimgrowth(
    a: &TrialsArgs,
    seed: u64,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    check_shape(a.shape)?;
    check_trials(a.trials)?;
    let (d, n) = (a.shape.d, a.shape.n);
    let bound = upper_bound_sample_count(d, n);
    let records = dim_growth_records(d, n, a.trials, seed)?;
    let times: Vec<u64> = records.iter().filter_map(|r| r.hitting_time).collect();
    let point = RatePoint {
        param: bound,
        trials: a.trials,
        successes: times.iter().filter(|&&t| t <= bound).count() as u64,
    };
    write_rate_rows(stdout, SWEEP_HEADER, "dimgrowth", d, n, &[point])?;
    let mean = times.iter().sum::<u64>() as f64 / times.len() as f64;
    let max = times.iter().max().copied().unwrap_or(0);
    writeln!(
        stderr,
        "mean hitting time {mean:.3}, max {max}, bound {bound}"
    )?;
    Ok(())
}

pub fn cmd_coupon(a: &CouponArgs, seed: u64, stdout: &mut dyn Write) -> Result<()> {
    check_shape(a.shape)?;
    check_trials(a.trials)?;
    let (d, n) = (a.shape.d, a.shape.n);
    let t = a.t.unwrap_or_else(|| lower_bound_draws(d, n));
    let point = coupon_sweep(d, n, t, a.trials, seed)?;
    write_rate_rows(stdout, COUPON_HEADER, "coupon", d, n, &[point])?;
    Ok(())
}

pub fn cmd_adversary(a: &AdversaryArgs, seed: u64, stdout: &mut dyn Write) -> Result<()> {
    check_shape(a.shape)?;
    check_trials(a.trials)?;
    let (d, n) = (a.shape.d, a.shape.n);
    let m = a.m.unwrap_or_else(|| lower_bound_draws(d, n));
    let point = adversary_sweep(d, n, a.rho, m, a.trials, seed)?;
    write_adversary_rows(stdout, d, n, a.rho, &[point])?;
    Ok(())
}
