//! Brute-force verifiers for small instances.
//!
//! Nothing here shares code with the production elimination routines: GF(2)
//! ranks are found by enumerating the span of a greedily grown basis, real
//! ranks by fraction-free (Bareiss) elimination in exact integer arithmetic,
//! and solution sets by enumerating every vector in `F2^(dN)`.

use crate::completion::SampleSet;
use crate::error::Result;
use crate::tensor::{all_indices, design_row, design_row_unchecked, EntryIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    F2,
    Real,
}

/// Largest width the GF(2) span enumeration accepts.
pub const MAX_F2_WIDTH: usize = 26;

/// Largest GF(2) nullity the solution-set enumeration is sized for.
pub const MAX_NULLITY: usize = 12;

/// Anchor design row followed by `N` blocks of `d - 1` difference rows
/// `e_1 + e_k` (GF(2)) or `e_1 - e_k` (reals), `k = 2..=d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisMatrix {
    pub width: usize,
    pub field: Field,
    pub rows: Vec<Vec<i64>>,
}

pub fn phi_basis(d: usize, n: usize, anchor: &EntryIndex, field: Field) -> Result<BasisMatrix> {
    let width = d * n;
    let mut rows = vec![dense_design_row(anchor.coords(), d, width)];
    design_row(anchor, d, n)?;
    let other = match field {
        Field::F2 => 1,
        Field::Real => -1,
    };
    for block in 0..n {
        for k in 1..d {
            let mut row = vec![0; width];
            row[block * d] = 1;
            row[block * d + k] = other;
            rows.push(row);
        }
    }
    Ok(BasisMatrix { width, field, rows })
}

fn dense_design_row(coords: &[usize], d: usize, width: usize) -> Vec<i64> {
    let mut row = vec![0; width];
    for c in design_row_unchecked(coords, d).columns() {
        row[c] = 1;
    }
    row
}

/// All `d^N` design rows as dense integer vectors.
pub fn full_design_rows(d: usize, n: usize) -> Vec<Vec<i64>> {
    all_indices(d, n)
        .map(|ix| dense_design_row(ix.coords(), d, d * n))
        .collect()
}

fn to_mask(row: &[i64]) -> u64 {
    assert!(row.len() <= 64);
    row.iter()
        .enumerate()
        .filter(|(_, &x)| x.rem_euclid(2) == 1)
        .fold(0u64, |m, (i, _)| m | (1 << i))
}

fn f2_span_rank(rows: &[Vec<i64>]) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    assert!(
        width <= MAX_F2_WIDTH,
        "GF(2) span enumeration supports width <= {MAX_F2_WIDTH}, got {width}"
    );
    let mut member = vec![0u64; ((1usize << width) / 64).max(1)];
    let has = |m: &[u64], x: u64| (m[(x / 64) as usize] >> (x % 64)) & 1 == 1;
    let mut span = vec![0u64];
    member[0] |= 1;
    let mut rank = 0;
    for row in rows {
        let v = to_mask(row);
        if has(&member, v) {
            continue;
        }
        let len = span.len();
        for i in 0..len {
            let x = span[i] ^ v;
            span.push(x);
            member[(x / 64) as usize] |= 1 << (x % 64);
        }
        rank += 1;
    }
    debug_assert_eq!(span.len(), 1 << rank);
    rank
}

fn exact_real_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let nrows = m.len();
    let width = m.first().map_or(0, Vec::len);
    let mut prev: i128 = 1;
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col];
        let (top, bottom) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom {
            let lead = row[col];
            for (x, &p) in row[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                let num = pivot
                    .checked_mul(*x)
                    .and_then(|a| lead.checked_mul(p).and_then(|b| a.checked_sub(b)))
                    .expect("Bareiss overflow");
                assert_eq!(num % prev, 0, "Bareiss division must be exact");
                *x = num / prev;
            }
            row[col] = 0;
        }
        prev = pivot;
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Exact rank over the chosen field.
pub fn bf_rank(rows: &[Vec<i64>], field: Field) -> usize {
    match field {
        Field::F2 => f2_span_rank(rows),
        Field::Real => exact_real_rank(rows),
    }
}

/// Whether two row sets span the same space: `rank A = rank B = rank [A; B]`.
pub fn bf_rowspace_equal(a: &[Vec<i64>], b: &[Vec<i64>], field: Field) -> bool {
    let ra = bf_rank(a, field);
    let rb = bf_rank(b, field);
    if ra != rb {
        return false;
    }
    let stacked: Vec<Vec<i64>> = a.iter().chain(b).cloned().collect();
    bf_rank(&stacked, field) == ra
}

/// Whether the samples determine the tensor: every GF(2) solution of the
/// sampled sign system gives the same sign pattern on all `d^N` entries, and
/// the sampled rows have the same real nullity as the full design matrix.
///
/// Panics when `dN > 20`.
pub fn bf_unique_joint_solution(s: &SampleSet) -> bool {
    let (d, n) = (s.d(), s.n());
    let width = d * n;
    assert!(width <= 20, "solution enumeration needs dN <= 20");

    let sampled: Vec<(u64, bool)> = s
        .unique_rows()
        .iter()
        .map(|r| {
            (
                to_mask(&dense_design_row(r.index.coords(), d, width)),
                r.sign_bit,
            )
        })
        .collect();
    let full = full_design_rows(d, n);
    let full_masks: Vec<u64> = full.iter().map(|r| to_mask(r)).collect();
    let parity = |a: u64, y: u64| (a & y).count_ones() & 1 == 1;

    let mut reference: Option<Vec<bool>> = None;
    let mut signs_unique = true;
    for y in 0..(1u64 << width) {
        if !sampled.iter().all(|&(row, b)| parity(row, y) == b) {
            continue;
        }
        let pattern: Vec<bool> = full_masks.iter().map(|&row| parity(row, y)).collect();
        match &reference {
            None => reference = Some(pattern),
            Some(r) if *r != pattern => {
                signs_unique = false;
                break;
            }
            Some(_) => {}
        }
    }
    if reference.is_none() || !signs_unique {
        return false;
    }

    let sampled_dense: Vec<Vec<i64>> = s
        .unique_rows()
        .iter()
        .map(|r| dense_design_row(r.index.coords(), d, width))
        .collect();
    bf_rank(&sampled_dense, Field::Real) == bf_rank(&full, Field::Real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ObservedEntry;

    fn bits(rows: &[&str]) -> Vec<Vec<i64>> {
        rows.iter()
            .map(|r| r.chars().map(|c| if c == '1' { 1 } else { 0 }).collect())
            .collect()
    }

    #[test]
    fn phi_basis_examples() {
        let b = phi_basis(2, 2, &[1, 1].into(), Field::F2).unwrap();
        assert_eq!(b.rows, bits(&["1010", "1100", "0011"]));
        let b = phi_basis(2, 2, &[1, 1].into(), Field::Real).unwrap();
        assert_eq!(
            b.rows,
            vec![vec![1, 0, 1, 0], vec![1, -1, 0, 0], vec![0, 0, 1, -1]]
        );
        let b = phi_basis(5, 3, &[2, 5, 1].into(), Field::F2).unwrap();
        assert_eq!(b.rows.len(), 13);
        assert!(phi_basis(2, 2, &[3, 1].into(), Field::F2).is_err());
    }

    #[test]
    fn rowspace_equal_examples() {
        let basis = phi_basis(2, 2, &[1, 1].into(), Field::F2).unwrap();
        assert!(bf_rowspace_equal(
            &basis.rows,
            &full_design_rows(2, 2),
            Field::F2
        ));
        assert!(!bf_rowspace_equal(
            &bits(&["1010"]),
            &bits(&["0101"]),
            Field::F2
        ));
        let a = bits(&["1100", "0110"]);
        assert!(bf_rowspace_equal(&a, &a, Field::F2));
        assert!(bf_rowspace_equal(&a, &a, Field::Real));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(bf_rank(&full_design_rows(2, 2), Field::F2), 3);
        assert_eq!(bf_rank(&full_design_rows(3, 3), Field::F2), 7);
        assert_eq!(bf_rank(&full_design_rows(3, 3), Field::Real), 7);
        assert_eq!(bf_rank(&bits(&["0010"]), Field::F2), 1);
        assert_eq!(bf_rank(&bits(&["0010"]), Field::Real), 1);
    }

    #[test]
    fn fields_differ_on_odd_cycle() {
        // Rows of a triangle's incidence matrix: dependent mod 2, independent over R.
        let tri = bits(&["110", "011", "101"]);
        assert_eq!(bf_rank(&tri, Field::F2), 2);
        assert_eq!(bf_rank(&tri, Field::Real), 3);
    }

    fn samples(d: usize, n: usize, idx: &[&[usize]]) -> SampleSet {
        SampleSet::from_entries(
            d,
            n,
            idx.iter()
                .map(|ix| ObservedEntry::new(ix.to_vec(), 2.0).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn unique_joint_solution_examples() {
        assert!(bf_unique_joint_solution(&samples(
            2,
            2,
            &[&[1, 1], &[1, 2], &[2, 1]]
        )));
        assert!(!bf_unique_joint_solution(&samples(2, 2, &[&[1, 1]])));
        assert!(bf_unique_joint_solution(&samples(
            2,
            2,
            &[&[1, 1], &[1, 2], &[2, 1], &[2, 2]]
        )));
        assert!(!bf_unique_joint_solution(&SampleSet::new(2, 2).unwrap()));
    }
}
