//! Rank-1 tensors, entry indices, and the maps between entries and rows of
//! the design matrix.
//!
//! Indices are 1-based at every public boundary. A tensor entry
//! `U(i_1, ..., i_N) = prod_l (u_l)[i_l]` is split into a sign bit and a log
//! magnitude, each of which is linear in the corresponding split of the
//! factor coordinates. The coefficient row for entry `(i_1, ..., i_N)` is the
//! concatenation of indicator vectors `[e_{i_1}, ..., e_{i_N}]`, which
//! [`design_row`] stores sparsely as `N` column positions.

use crate::error::{Error, Result};

/// Sign of a nonzero real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v.is_sign_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `phi(z) = -(z - 1) / 2`: maps `+1 -> 0` and `-1 -> 1`, turning sign products
/// into parities.
pub fn phi(s: Sign) -> bool {
    s == Sign::Minus
}

pub fn phi_inv(bit: bool) -> Sign {
    if bit {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

/// Splits a nonzero value into `(phi(sgn v), ln |v|)`.
pub fn decompose_value(v: f64) -> Result<(bool, f64)> {
    if v == 0.0 {
        return Err(Error::ZeroValue);
    }
    Ok((phi(Sign::of(v)), v.abs().ln()))
}

/// Inverse of [`decompose_value`].
pub fn recompose_value(sign_bit: bool, log_mag: f64) -> f64 {
    phi_inv(sign_bit).as_f64() * log_mag.exp()
}

/// A 1-based multi-index `(i_1, ..., i_N)` into `[d]^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryIndex(Vec<usize>);

impl EntryIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        EntryIndex(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_valid(&self, d: usize, n: usize) -> bool {
        self.0.len() == n && self.0.iter().all(|&i| (1..=d).contains(&i))
    }

    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        if self.is_valid(d, n) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: self.0.clone(),
                d,
                n,
            })
        }
    }
}

impl From<Vec<usize>> for EntryIndex {
    fn from(coords: Vec<usize>) -> Self {
        EntryIndex(coords)
    }
}

impl<const K: usize> From<[usize; K]> for EntryIndex {
    fn from(coords: [usize; K]) -> Self {
        EntryIndex(coords.to_vec())
    }
}

/// One sampled entry of the tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedEntry {
    pub index: EntryIndex,
    pub value: f64,
}

impl ObservedEntry {
    pub fn new(index: impl Into<EntryIndex>, value: f64) -> Result<Self> {
        if value == 0.0 {
            return Err(Error::ZeroValue);
        }
        Ok(ObservedEntry {
            index: index.into(),
            value,
        })
    }
}

/// The N factor vectors of a rank-1 tensor with all coordinates nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList {
    d: usize,
    factors: Vec<Vec<f64>>,
}

impl FactorList {
    pub fn new(factors: Vec<Vec<f64>>) -> Result<Self> {
        let n = factors.len();
        if n == 0 {
            return Err(Error::BadParameter(
                "at least one factor is required".into(),
            ));
        }
        let d = factors[0].len();
        if d == 0 {
            return Err(Error::BadParameter(
                "factor length d must be positive".into(),
            ));
        }
        for (mode, u) in factors.iter().enumerate() {
            if u.len() != d {
                return Err(Error::BadParameter(format!(
                    "factor {} has length {}, expected {d}",
                    mode + 1,
                    u.len()
                )));
            }
            if let Some(coord) = u.iter().position(|&x| x == 0.0) {
                return Err(Error::ZeroCoordinate {
                    mode: mode + 1,
                    coord: coord + 1,
                });
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::BadParameter(format!(
                    "factor {} has a non-finite coordinate",
                    mode + 1
                )));
            }
        }
        Ok(FactorList { d, factors })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    /// `prod_l (u_l)[i_l]`.
    pub fn entry(&self, ix: &EntryIndex) -> Result<f64> {
        ix.validate(self.d, self.n())?;
        Ok(self.entry_unchecked(ix.coords()))
    }

    pub(crate) fn entry_unchecked(&self, coords: &[usize]) -> f64 {
        self.factors
            .iter()
            .zip(coords)
            .map(|(u, &i)| u[i - 1])
            .product()
    }

    /// Number of entries `d^N`, or `None` on overflow.
    pub fn num_entries(&self) -> Option<u64> {
        num_entries(self.d, self.n())
    }
}

pub fn num_entries(d: usize, n: usize) -> Option<u64> {
    (d as u64).checked_pow(u32::try_from(n).ok()?)
}

/// Rank of the full design matrix: `dN - (N - 1)`.
pub fn design_rank(d: usize, n: usize) -> usize {
    d * n - (n - 1)
}

/// Row-major mixed-radix encoding `1 + sum_l (i_l - 1) d^(N-l)`.
pub fn pi_encode(ix: &EntryIndex, d: usize, n: usize) -> Result<u64> {
    ix.validate(d, n)?;
    let overflow = || Error::BadParameter(format!("d^N overflows for d={d}, N={n}"));
    num_entries(d, n).ok_or_else(overflow)?;
    let k = ix
        .coords()
        .iter()
        .fold(0u64, |acc, &i| acc * d as u64 + (i as u64 - 1));
    Ok(k + 1)
}

pub fn pi_decode(k: u64, d: usize, n: usize) -> Result<EntryIndex> {
    let total = num_entries(d, n)
        .ok_or_else(|| Error::BadParameter(format!("d^N overflows for d={d}, N={n}")))?;
    if k == 0 || k > total {
        return Err(Error::BadParameter(format!(
            "linear index {k} is outside [1, {total}]"
        )));
    }
    let mut rest = k - 1;
    let mut coords = vec![0; n];
    for slot in coords.iter_mut().rev() {
        *slot = (rest % d as u64) as usize + 1;
        rest /= d as u64;
    }
    Ok(EntryIndex(coords))
}

/// Sparse design row: position `l` is `(l-1) d + i_l`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DesignRow {
    positions: Vec<usize>,
}

impl DesignRow {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// 0-based column indices, one per block.
    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.positions.iter().map(|p| p - 1)
    }

    pub fn to_dense(&self, width: usize) -> Vec<f64> {
        let mut row = vec![0.0; width];
        for c in self.columns() {
            row[c] = 1.0;
        }
        row
    }
}

pub fn design_row(ix: &EntryIndex, d: usize, n: usize) -> Result<DesignRow> {
    ix.validate(d, n)?;
    Ok(design_row_unchecked(ix.coords(), d))
}

pub(crate) fn design_row_unchecked(coords: &[usize], d: usize) -> DesignRow {
    DesignRow {
        positions: coords.iter().enumerate().map(|(l, &i)| l * d + i).collect(),
    }
}

/// Iterates `[d]^N` in row-major order.
pub fn all_indices(d: usize, n: usize) -> impl Iterator<Item = EntryIndex> {
    let total = num_entries(d, n).expect("d^N overflows u64");
    (1..=total).map(move |k| pi_decode(k, d, n).expect("k in range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(factors: &[&[f64]]) -> FactorList {
        FactorList::new(factors.iter().map(|u| u.to_vec()).collect()).unwrap()
    }

    #[test]
    fn make_tensor_examples() {
        let ones = t(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(all_indices(2, 2).all(|ix| ones.entry(&ix).unwrap() == 1.0));

        let u = t(&[&[2.0, 3.0], &[5.0, 7.0]]);
        assert_eq!(u.entry(&[1, 1].into()).unwrap(), 10.0);
        assert_eq!(u.entry(&[1, 2].into()).unwrap(), 14.0);
        assert_eq!(u.entry(&[2, 1].into()).unwrap(), 15.0);
        assert_eq!(u.entry(&[2, 2].into()).unwrap(), 21.0);

        let err = FactorList::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::ZeroCoordinate { mode: 1, coord: 2 }));
    }

    #[test]
    fn ragged_factors_rejected() {
        assert!(matches!(
            FactorList::new(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(Error::BadParameter(_))
        ));
        assert!(FactorList::new(vec![]).is_err());
    }

    #[test]
    fn entry_examples() {
        let u = t(&[&[1.0, -2.0], &[3.0, 4.0]]);
        assert_eq!(u.entry(&[2, 2].into()).unwrap(), -8.0);
        let v = t(&[&[1.0, 9.0], &[5.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(v.entry(&[1, 2, 1].into()).unwrap(), 1.0);
        assert!(matches!(
            u.entry(&[3, 1].into()),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(u.entry(&[1, 1, 1].into()).is_err());
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_encode(&[1, 1].into(), 3, 2).unwrap(), 1);
        assert_eq!(pi_encode(&[2, 3].into(), 3, 2).unwrap(), 6);
        let k = pi_encode(&[3, 2].into(), 3, 2).unwrap();
        assert_eq!(pi_decode(k, 3, 2).unwrap(), EntryIndex::from([3, 2]));
        assert!(pi_decode(0, 3, 2).is_err());
        assert!(pi_decode(10, 3, 2).is_err());
        assert!(pi_encode(&[0, 1].into(), 3, 2).is_err());
    }

    #[test]
    fn pi_is_bijective_on_small_grids() {
        for d in 1..=6 {
            for n in 1..=4 {
                let total = num_entries(d, n).unwrap();
                let mut seen = vec![false; total as usize];
                for k in 1..=total {
                    let ix = pi_decode(k, d, n).unwrap();
                    assert_eq!(pi_encode(&ix, d, n).unwrap(), k);
                    seen[(k - 1) as usize] = true;
                }
                assert!(seen.into_iter().all(|s| s));
            }
        }
    }

    #[test]
    fn phi_examples() {
        assert!(!phi(Sign::Plus));
        assert!(phi(Sign::Minus));
        assert_eq!(phi_inv(phi(Sign::Minus)), Sign::Minus);
        assert_eq!(phi_inv(phi(Sign::Plus)), Sign::Plus);
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose_value(1.0).unwrap(), (false, 0.0));
        let (b, l) = decompose_value(-6.0).unwrap();
        assert!(b);
        assert!((l - 1.791_759_469_228_055).abs() < 1e-15);
        let (b, l) = decompose_value(std::f64::consts::E).unwrap();
        assert!(!b);
        assert!((l - 1.0).abs() < 1e-15);
        assert!(matches!(decompose_value(0.0), Err(Error::ZeroValue)));
        assert!(matches!(decompose_value(-0.0), Err(Error::ZeroValue)));
    }

    #[test]
    fn design_row_examples() {
        assert_eq!(
            design_row(&[2, 1].into(), 2, 2).unwrap().positions(),
            &[2, 3]
        );
        assert_eq!(
            design_row(&[2, 1].into(), 2, 2).unwrap().to_dense(4),
            vec![0.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(
            design_row(&[1, 1].into(), 2, 2).unwrap().positions(),
            &[1, 3]
        );
        assert_eq!(
            design_row(&[3, 1, 2].into(), 3, 3).unwrap().positions(),
            &[3, 4, 8]
        );
        assert!(design_row(&[3, 1].into(), 2, 2).is_err());
    }

    #[test]
    fn design_rows_distinct_and_blocked() {
        let (d, n) = (3, 3);
        let rows: Vec<DesignRow> = all_indices(d, n)
            .map(|ix| design_row(&ix, d, n).unwrap())
            .collect();
        for r in &rows {
            for (l, p) in r.positions().iter().enumerate() {
                assert!((l * d + 1..=(l + 1) * d).contains(p));
            }
        }
        let unique: std::collections::HashSet<_> = rows.iter().collect();
        assert_eq!(unique.len(), rows.len());
    }
}
