//! Exact completion of a rank-1 tensor from sampled entries.
//!
//! Every observed entry contributes one row to two linear systems with the
//! same coefficient matrix: a parity system over GF(2) for the signs and a
//! real system for the log magnitudes. Any solution pair `(y1, y2)` of the
//! sampled systems reproduces every sampled entry, and reproduces the whole
//! tensor once the sampled rows span the row space of the full design matrix.
//! That condition is checked with a single GF(2) rank computation, since the
//! full matrix has rank `dN - (N - 1)` over both fields and GF(2) rank never
//! exceeds real rank for 0/1 matrices.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::experiments::TrialRecord;
use crate::f2lin::{f2_rank, f2_solve, BitMatrix, BitSystem, BitVec, F2Basis};
use crate::reallin::{real_solve, DenseMatrix, RealSystem};
use crate::tensor::{
    all_indices, decompose_value, design_rank, design_row_unchecked, phi_inv, EntryIndex,
    FactorList, ObservedEntry,
};

/// Largest `d^N` that [`run_pipeline`] will enumerate.
pub const MAX_ENUMERATED_ENTRIES: u64 = 10_000_000;

/// A deduplicated observed entry with its two right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRow {
    pub index: EntryIndex,
    pub value: f64,
    pub sign_bit: bool,
    pub log_mag: f64,
}

/// Multiset of observed entries, kept in draw order, plus the set of
/// distinct indices.
#[derive(Debug, Clone)]
pub struct SampleSet {
    d: usize,
    n: usize,
    draws: Vec<ObservedEntry>,
    unique: Vec<SampledRow>,
    lookup: HashMap<EntryIndex, usize>,
}

impl SampleSet {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::BadParameter(format!(
                "d and N must be positive (got d={d}, N={n})"
            )));
        }
        Ok(SampleSet {
            d,
            n,
            draws: Vec::new(),
            unique: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn from_entries(
        d: usize,
        n: usize,
        entries: impl IntoIterator<Item = ObservedEntry>,
    ) -> Result<Self> {
        let mut s = SampleSet::new(d, n)?;
        for e in entries {
            s.push(e)?;
        }
        Ok(s)
    }

    /// Adds one draw. Returns whether its index was new.
    pub fn push(&mut self, entry: ObservedEntry) -> Result<bool> {
        entry.index.validate(self.d, self.n)?;
        let (sign_bit, log_mag) = decompose_value(entry.value)?;
        if let Some(&k) = self.lookup.get(&entry.index) {
            let first = self.unique[k].value;
            if first != entry.value {
                return Err(Error::ContradictorySamples {
                    index: entry.index.coords().to_vec(),
                    first,
                    second: entry.value,
                });
            }
            self.draws.push(entry);
            return Ok(false);
        }
        self.lookup.insert(entry.index.clone(), self.unique.len());
        self.unique.push(SampledRow {
            index: entry.index.clone(),
            value: entry.value,
            sign_bit,
            log_mag,
        });
        self.draws.push(entry);
        Ok(true)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.d * self.n
    }

    pub fn draws(&self) -> &[ObservedEntry] {
        &self.draws
    }

    pub fn unique_rows(&self) -> &[SampledRow] {
        &self.unique
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// The GF(2) coefficient matrix of the distinct sampled rows.
    pub fn design_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.width());
        for row in &self.unique {
            m.push_ones(design_row_unchecked(row.index.coords(), self.d).columns());
        }
        m
    }
}

fn random_coords<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(1..=d)).collect()
}

/// Uniform index in `[d]^N`.
pub fn random_index<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> EntryIndex {
    EntryIndex::new(random_coords(d, n, rng))
}

/// Draws `m` indices uniformly with replacement and records their values.
pub fn sample_uniform(t: &FactorList, m: usize, seed: u64) -> Result<SampleSet> {
    sample_uniform_with_rng(t, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_uniform_with_rng<R: Rng + ?Sized>(
    t: &FactorList,
    m: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::BadParameter(
            "sample count m must be at least 1".into(),
        ));
    }
    let mut s = SampleSet::new(t.d(), t.n())?;
    for _ in 0..m {
        let coords = random_coords(t.d(), t.n(), rng);
        let value = t.entry_unchecked(&coords);
        s.push(ObservedEntry {
            index: EntryIndex::new(coords),
            value,
        })?;
    }
    Ok(s)
}

/// Keeps drawing uniform entries until the sampled rows certify, or until
/// `max_draws` draws have been taken.
pub fn sample_until_certified<R: Rng + ?Sized>(
    t: &FactorList,
    rng: &mut R,
    max_draws: usize,
) -> Result<SampleSet> {
    let (d, n) = (t.d(), t.n());
    let target = design_rank(d, n);
    let mut basis = F2Basis::new(d * n);
    let mut s = SampleSet::new(d, n)?;
    while basis.rank() < target && s.draws().len() < max_draws {
        let coords = random_coords(d, n, rng);
        let value = t.entry_unchecked(&coords);
        let row = BitVec::from_ones(d * n, design_row_unchecked(&coords, d).columns());
        s.push(ObservedEntry {
            index: EntryIndex::new(coords),
            value,
        })?;
        basis.insert(row);
    }
    Ok(s)
}

/// The sign and log-magnitude systems over the distinct sampled rows.
pub fn build_systems(s: &SampleSet) -> Result<(BitSystem, RealSystem)> {
    let width = s.width();
    let rows = s.unique_rows();
    let mut bits = BitMatrix::new(width);
    let mut reals = DenseMatrix::with_width(width);
    let mut dense = vec![0.0; width];
    for row in rows {
        let design = design_row_unchecked(row.index.coords(), s.d());
        bits.push_ones(design.columns());
        dense.iter_mut().for_each(|x| *x = 0.0);
        for c in design.columns() {
            dense[c] = 1.0;
        }
        reals.push_row(&dense);
    }
    let sign_rhs = BitVec::from_bits(&rows.iter().map(|r| r.sign_bit).collect::<Vec<_>>());
    let log_rhs = rows.iter().map(|r| r.log_mag).collect();
    Ok((
        BitSystem::new(bits, sign_rhs),
        RealSystem::new(reals, log_rhs),
    ))
}

/// Whether the sampled rows span the full design row space.
pub fn certify(s: &SampleSet) -> bool {
    f2_rank(&s.design_matrix()) == design_rank(s.d(), s.n())
}

/// Solutions of the two sampled systems; answers any entry query.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedTensor {
    d: usize,
    n: usize,
    y1: BitVec,
    y2: Vec<f64>,
    certified: bool,
}

impl CompletedTensor {
    pub fn from_parts(d: usize, n: usize, y1: BitVec, y2: Vec<f64>, certified: bool) -> Self {
        assert_eq!(y1.len(), d * n);
        assert_eq!(y2.len(), d * n);
        CompletedTensor {
            d,
            n,
            y1,
            y2,
            certified,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sign_solution(&self) -> &BitVec {
        &self.y1
    }

    pub fn log_solution(&self) -> &[f64] {
        &self.y2
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Sign bit and log magnitude of the reconstructed entry.
    pub fn query_parts(&self, ix: &EntryIndex) -> Result<(bool, f64)> {
        ix.validate(self.d, self.n)?;
        Ok(self.parts_unchecked(ix.coords()))
    }

    fn parts_unchecked(&self, coords: &[usize]) -> (bool, f64) {
        let mut parity = false;
        let mut log_mag = 0.0;
        for c in design_row_unchecked(coords, self.d).columns() {
            parity ^= self.y1.get(c);
            log_mag += self.y2[c];
        }
        (parity, log_mag)
    }

    pub fn query(&self, ix: &EntryIndex) -> Result<f64> {
        let (bit, log_mag) = self.query_parts(ix)?;
        Ok(phi_inv(bit).as_f64() * log_mag.exp())
    }
}

/// Solves both sampled systems and records whether the sample set certifies.
pub fn complete(s: &SampleSet) -> Result<CompletedTensor> {
    let (bits, reals) = build_systems(s)?;
    let y1 = f2_solve(&bits).map_err(|_| Error::InconsistentSigns)?;
    let y2 = real_solve(&reals).map_err(|_| Error::InconsistentMagnitudes)?;
    let certified = f2_rank(&bits.matrix) == design_rank(s.d(), s.n());
    Ok(CompletedTensor::from_parts(s.d(), s.n(), y1, y2, certified))
}

/// Compares a completion against the true tensor over every entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullComparison {
    pub signs_exact: bool,
    pub max_rel_error: f64,
    pub frobenius_error: f64,
}

pub fn compare_full(t: &FactorList, c: &CompletedTensor) -> Result<FullComparison> {
    if (t.d(), t.n()) != (c.d(), c.n()) {
        return Err(Error::BadParameter(
            "tensor and completion shapes differ".into(),
        ));
    }
    match t.num_entries() {
        Some(total) if total <= MAX_ENUMERATED_ENTRIES => {}
        _ => {
            return Err(Error::BadParameter(format!(
                "d^N exceeds {MAX_ENUMERATED_ENTRIES} entries"
            )))
        }
    }
    let mut out = FullComparison {
        signs_exact: true,
        max_rel_error: 0.0,
        frobenius_error: 0.0,
    };
    let mut sq = 0.0;
    for ix in all_indices(t.d(), t.n()) {
        let truth = t.entry_unchecked(ix.coords());
        let (bit, log_mag) = c.parts_unchecked(ix.coords());
        let magnitude = log_mag.exp();
        let estimate = phi_inv(bit).as_f64() * magnitude;
        if (estimate < 0.0) != (truth < 0.0) {
            out.signs_exact = false;
        }
        let rel = (magnitude - truth.abs()).abs() / truth.abs();
        out.max_rel_error = out.max_rel_error.max(rel);
        sq += (estimate - truth).powi(2);
    }
    out.frobenius_error = sq.sqrt();
    Ok(out)
}

/// Sample, complete, and measure the error over the full tensor.
pub fn run_pipeline(t: &FactorList, m: usize, seed: u64) -> Result<TrialRecord> {
    let s = sample_uniform(t, m, seed)?;
    let c = complete(&s)?;
    let cmp = compare_full(t, &c)?;
    let mut rec = TrialRecord::new(t.d(), t.n(), m as u64, seed);
    rec.certified = c.certified();
    rec.signs_exact = Some(cmp.signs_exact);
    rec.max_rel_error = Some(cmp.max_rel_error);
    rec.frobenius_error = Some(cmp.frobenius_error);
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(pairs: &[(&[usize], f64)]) -> Vec<ObservedEntry> {
        pairs
            .iter()
            .map(|(ix, v)| ObservedEntry::new(ix.to_vec(), *v).unwrap())
            .collect()
    }

    fn example_tensor() -> FactorList {
        FactorList::new(vec![vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap()
    }

    fn example_samples() -> SampleSet {
        SampleSet::from_entries(
            2,
            2,
            entries(&[(&[1, 1], 3.0), (&[1, 2], 4.0), (&[2, 1], -6.0)]),
        )
        .unwrap()
    }

    #[test]
    fn single_cell_tensor() {
        let t = FactorList::new(vec![vec![-2.5]]).unwrap();
        let s = sample_uniform(&t, 17, 3).unwrap();
        assert!(s.draws().iter().all(|e| e.index.coords() == [1]));
        assert_eq!(s.unique_rows().len(), 1);
    }

    #[test]
    fn uniform_frequencies() {
        let t = example_tensor();
        let s = sample_uniform(&t, 10_000, 42).unwrap();
        let mut counts = HashMap::new();
        for e in s.draws() {
            *counts.entry(e.index.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        for c in counts.values() {
            let f = *c as f64 / 10_000.0;
            assert!((f - 0.25).abs() <= 0.02, "frequency {f}");
        }
    }

    #[test]
    fn zero_draws_rejected() {
        assert!(matches!(
            sample_uniform(&example_tensor(), 0, 0),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = example_tensor();
        let a = sample_uniform(&t, 50, 9).unwrap();
        let b = sample_uniform(&t, 50, 9).unwrap();
        assert_eq!(a.draws(), b.draws());
    }

    #[test]
    fn build_systems_single_entry() {
        let s = SampleSet::from_entries(2, 2, entries(&[(&[2, 1], -6.0)])).unwrap();
        let (bits, reals) = build_systems(&s).unwrap();
        assert_eq!(bits.matrix.row(0).to_string(), "0110");
        assert!(bits.rhs.get(0));
        assert_eq!(reals.matrix.row(0), &[0.0, 1.0, 1.0, 0.0]);
        assert!((reals.rhs[0] - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn build_systems_empty_and_dedup() {
        let s = SampleSet::new(2, 2).unwrap();
        let (bits, reals) = build_systems(&s).unwrap();
        assert_eq!(bits.matrix.nrows(), 0);
        assert_eq!(reals.matrix.nrows(), 0);

        let s = SampleSet::from_entries(2, 2, entries(&[(&[1, 1], 3.0), (&[1, 1], 3.0)])).unwrap();
        assert_eq!(s.draws().len(), 2);
        let (bits, _) = build_systems(&s).unwrap();
        assert_eq!(bits.matrix.nrows(), 1);
    }

    #[test]
    fn contradictory_duplicates_rejected() {
        let err =
            SampleSet::from_entries(2, 2, entries(&[(&[1, 1], 1.0), (&[1, 1], -1.0)])).unwrap_err();
        assert!(matches!(err, Error::ContradictorySamples { .. }));
    }

    #[test]
    fn invalid_index_rejected() {
        let err = SampleSet::from_entries(2, 2, entries(&[(&[3, 1], 1.0)])).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { .. }));
    }

    #[test]
    fn certify_examples() {
        assert!(certify(&example_samples()));
        let s = SampleSet::from_entries(2, 2, entries(&[(&[1, 1], 3.0), (&[2, 2], -8.0)])).unwrap();
        assert!(!certify(&s));
        let t = example_tensor();
        let all = SampleSet::from_entries(
            2,
            2,
            all_indices(2, 2).map(|ix| {
                let v = t.entry(&ix).unwrap();
                ObservedEntry::new(ix, v).unwrap()
            }),
        )
        .unwrap();
        assert!(certify(&all));
    }

    #[test]
    fn complete_recovers_unsampled_entry() {
        let c = complete(&example_samples()).unwrap();
        assert!(c.certified());
        let v = c.query(&[2, 2].into()).unwrap();
        assert!((v + 8.0).abs() <= 8.0 * 1e-12, "{v}");
        let v = c.query(&[2, 1].into()).unwrap();
        assert!((v + 6.0).abs() <= 6.0 * 1e-12, "{v}");
        assert!(c.query(&[3, 1].into()).is_err());
    }

    #[test]
    fn zero_solution_queries_one() {
        let c = CompletedTensor::from_parts(3, 2, BitVec::zeros(6), vec![0.0; 6], false);
        for ix in all_indices(3, 2) {
            assert_eq!(c.query(&ix).unwrap(), 1.0);
        }
    }

    #[test]
    fn all_ones_pipeline_is_exact() {
        let t = FactorList::new(vec![vec![1.0; 3]; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = sample_until_certified(&t, &mut rng, 10_000).unwrap();
        let c = complete(&s).unwrap();
        assert!(c.certified());
        let cmp = compare_full(&t, &c).unwrap();
        assert_eq!(cmp.frobenius_error, 0.0);
        assert!(cmp.signs_exact);
    }

    #[test]
    fn single_draw_never_certifies() {
        let t = FactorList::new(vec![vec![1.5, -2.0, 0.5]; 2]).unwrap();
        for seed in 0..20 {
            let rec = run_pipeline(&t, 1, seed).unwrap();
            assert!(!rec.certified);
        }
    }

    #[test]
    fn non_rank_one_input_is_inconsistent() {
        // (1,1)(2,2) vs (1,2)(2,1) products disagree: 1*4 != 2*3.
        let s = SampleSet::from_entries(
            2,
            2,
            entries(&[
                (&[1, 1], 1.0),
                (&[1, 2], 2.0),
                (&[2, 1], 3.0),
                (&[2, 2], 4.0),
            ]),
        )
        .unwrap();
        assert!(matches!(complete(&s), Err(Error::InconsistentMagnitudes)));

        let s = SampleSet::from_entries(
            2,
            2,
            entries(&[
                (&[1, 1], 1.0),
                (&[1, 2], 1.0),
                (&[2, 1], 1.0),
                (&[2, 2], -1.0),
            ]),
        )
        .unwrap();
        assert!(matches!(complete(&s), Err(Error::InconsistentSigns)));
    }
}
