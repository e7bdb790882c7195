//! Sparse matrices over F₂ and their rank.
//!
//! Three rank routines share one contract:
//! [`rank_reference`] is plain dense elimination on a byte matrix,
//! [`rank_bitpacked`] eliminates rows packed into `u64` words, and
//! [`rank_f2`] runs a Markowitz-style sparse elimination first and hands the
//! dense remainder to the bit-packed kernel.

use serde::Serialize;

/// Column-major sparse matrix over F₂. Each column is a sorted list of the
/// row indices holding a 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<u32>>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            columns: (0..n as u32).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from columns given as unsorted multisets of row
    /// indices; repeated entries cancel in pairs.
    pub fn from_columns(rows: usize, columns: Vec<Vec<u32>>) -> Self {
        let cols = columns.len();
        let columns = columns.into_iter().map(reduce_mod2).collect();
        Self {
            rows,
            cols,
            columns,
        }
    }

    pub fn from_dense(dense: &[Vec<bool>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let columns = (0..cols)
            .map(|j| {
                (0..rows)
                    .filter(|&i| dense[i][j])
                    .map(|i| i as u32)
                    .collect()
            })
            .collect();
        Self {
            rows,
            cols,
            columns,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &i in col {
                out[i as usize][j] = true;
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[j].binary_search(&(i as u32)).is_ok()
    }

    pub fn transpose(&self) -> Self {
        let mut columns = vec![Vec::new(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &i in col {
                columns[i as usize].push(j as u32);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            columns,
        }
    }

    /// The product `next · self` (apply `self` first).
    ///
    /// # Panics
    /// Panics if the shapes do not compose.
    pub fn then(&self, next: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, next.cols, "shape mismatch in composition");
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut acc: Vec<u32> = col
                    .iter()
                    .flat_map(|&k| next.columns[k as usize].iter().copied())
                    .collect();
                acc.sort_unstable();
                dedup_mod2(acc)
            })
            .collect();
        SparseMatrix {
            rows: next.rows,
            cols: self.cols,
            columns,
        }
    }

    /// Triplets `(row, col, 1)` in column order.
    pub fn triplets(&self) -> Vec<(u32, u32, u8)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&i| (i, j as u32, 1)))
            .collect()
    }
}

fn reduce_mod2(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    dedup_mod2(v)
}

/// Removes pairs of equal entries from a sorted list.
fn dedup_mod2(v: Vec<u32>) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Dense Gaussian elimination on a byte matrix. Slow and obviously correct.
pub fn rank_reference(m: &SparseMatrix) -> usize {
    let mut a: Vec<Vec<u8>> = m
        .to_dense()
        .into_iter()
        .map(|r| r.into_iter().map(u8::from).collect())
        .collect();
    let mut rank = 0;
    for j in 0..m.cols {
        let Some(p) = (rank..m.rows).find(|&i| a[i][j] == 1) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if row[j] == 1 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Row elimination with rows packed 64 columns per word.
pub fn rank_bitpacked(m: &SparseMatrix) -> usize {
    let words = m.cols.div_ceil(64);
    let mut rows = vec![0u64; m.rows * words];
    for (j, col) in m.columns.iter().enumerate() {
        for &i in col {
            rows[i as usize * words + j / 64] |= 1u64 << (j % 64);
        }
    }
    packed_rank(&mut rows, m.rows, words)
}

fn packed_rank(rows: &mut [u64], nrows: usize, words: usize) -> usize {
    let mut rank = 0;
    for w in 0..words {
        for bit in 0..64 {
            if rank == nrows {
                return rank;
            }
            let mask = 1u64 << bit;
            let Some(p) = (rank..nrows).find(|&i| rows[i * words + w] & mask != 0) else {
                continue;
            };
            if p != rank {
                for k in w..words {
                    rows.swap(p * words + k, rank * words + k);
                }
            }
            let (head, tail) = rows.split_at_mut((rank + 1) * words);
            let pivot = &head[rank * words..];
            for row in tail.chunks_exact_mut(words) {
                if row[w] & mask != 0 {
                    for k in w..words {
                        row[k] ^= pivot[k];
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Columns whose degree exceeds this are left for the dense kernel.
const SPARSE_DEGREE_LIMIT: usize = 48;

/// Rank over F₂: sparse pivoting while it stays cheap, then bit-packed
/// elimination on whatever is left.
pub fn rank_f2(m: &SparseMatrix) -> usize {
    let mut cols: Vec<Vec<u32>> = m.columns.clone();
    let mut row_cols: Vec<Vec<u32>> = vec![Vec::new(); m.rows];
    for (j, col) in cols.iter().enumerate() {
        for &i in col {
            row_cols[i as usize].push(j as u32);
        }
    }
    let mut alive = vec![true; cols.len()];
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); 2];
    let push = |buckets: &mut Vec<Vec<u32>>, j: u32, deg: usize| {
        if deg >= buckets.len() {
            buckets.resize(deg + 1, Vec::new());
        }
        buckets[deg].push(j);
    };
    for (j, col) in cols.iter().enumerate() {
        push(&mut buckets, j as u32, col.len());
    }
    let mut rank = 0;
    let mut lowest = 0;
    loop {
        // Pop the alive column of least degree (entries may be stale).
        let mut found = None;
        while lowest < buckets.len() && lowest <= SPARSE_DEGREE_LIMIT {
            match buckets[lowest].pop() {
                Some(j) if alive[j as usize] && cols[j as usize].len() == lowest => {
                    found = Some(j as usize);
                    break;
                }
                Some(_) => {}
                None => lowest += 1,
            }
        }
        let Some(c) = found else { break };
        if lowest == 0 {
            alive[c] = false;
            continue;
        }
        let pivot_col = std::mem::take(&mut cols[c]);
        let r = *pivot_col
            .iter()
            .min_by_key(|&&i| row_cols[i as usize].len())
            .expect("nonempty column");
        let others: Vec<u32> = row_cols[r as usize]
            .iter()
            .copied()
            .filter(|&j| j as usize != c)
            .collect();
        for &x in &pivot_col {
            row_cols[x as usize].retain(|&j| j as usize != c);
        }
        for c2 in others {
            let old = std::mem::take(&mut cols[c2 as usize]);
            let new = symmetric_difference(&old, &pivot_col);
            for &x in &pivot_col {
                let rc = &mut row_cols[x as usize];
                if old.binary_search(&x).is_ok() {
                    if let Some(pos) = rc.iter().position(|&j| j == c2) {
                        rc.swap_remove(pos);
                    }
                } else {
                    rc.push(c2);
                }
            }
            let deg = new.len();
            cols[c2 as usize] = new;
            push(&mut buckets, c2, deg);
            lowest = lowest.min(deg);
        }
        alive[c] = false;
        rank += 1;
    }

    // Dense remainder.
    let rest: Vec<&Vec<u32>> = cols
        .iter()
        .enumerate()
        .filter(|(j, col)| alive[*j] && !col.is_empty())
        .map(|(_, col)| col)
        .collect();
    if rest.is_empty() {
        return rank;
    }
    let mut row_index = vec![u32::MAX; m.rows];
    let mut nrows = 0u32;
    for col in &rest {
        for &i in col.iter() {
            if row_index[i as usize] == u32::MAX {
                row_index[i as usize] = nrows;
                nrows += 1;
            }
        }
    }
    // Pack the transpose (rank is the same) so the shorter side is the word axis.
    let (nr, nc) = (nrows as usize, rest.len());
    if nc <= nr {
        let words = nc.div_ceil(64);
        let mut packed = vec![0u64; nr * words];
        for (j, col) in rest.iter().enumerate() {
            for &i in col.iter() {
                packed[row_index[i as usize] as usize * words + j / 64] |= 1u64 << (j % 64);
            }
        }
        rank + packed_rank(&mut packed, nr, words)
    } else {
        let words = nr.div_ceil(64);
        let mut packed = vec![0u64; nc * words];
        for (j, col) in rest.iter().enumerate() {
            for &i in col.iter() {
                let r = row_index[i as usize] as usize;
                packed[j * words + r / 64] |= 1u64 << (r % 64);
            }
        }
        rank + packed_rank(&mut packed, nc, words)
    }
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_ranks(m: &SparseMatrix) -> [usize; 3] {
        [rank_reference(m), rank_bitpacked(m), rank_f2(m)]
    }

    #[test]
    fn small_cases() {
        assert_eq!(all_ranks(&SparseMatrix::identity(3)), [3, 3, 3]);
        assert_eq!(all_ranks(&SparseMatrix::zero(4, 5)), [0, 0, 0]);
        assert_eq!(all_ranks(&SparseMatrix::zero(0, 0)), [0, 0, 0]);
        let m = SparseMatrix::from_dense(&[
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ]);
        assert_eq!(all_ranks(&m), [2, 2, 2]);
    }

    #[test]
    fn repeated_entries_cancel() {
        let m = SparseMatrix::from_columns(3, vec![vec![2, 0, 2], vec![1, 1]]);
        assert_eq!(m.columns, vec![vec![0], vec![]]);
    }

    #[test]
    fn composition() {
        let a = SparseMatrix::from_columns(2, vec![vec![0, 1], vec![1]]);
        let b = SparseMatrix::from_columns(1, vec![vec![0], vec![0]]);
        // b·a: column 0 -> rows {0} + {0} = 0, column 1 -> {0}
        assert_eq!(a.then(&b).columns, vec![vec![], vec![0]]);
        assert_eq!(a.transpose().transpose(), a);
    }

    fn matrix(max: usize) -> impl Strategy<Value = SparseMatrix> {
        (0..max, 0..max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(0..r.max(1) as u32, 0..=r), c)
                .prop_map(move |cols| SparseMatrix::from_columns(r.max(1), cols))
        })
    }

    proptest! {
        #[test]
        fn paths_agree(m in matrix(40)) {
            let r = rank_reference(&m);
            prop_assert_eq!(rank_bitpacked(&m), r);
            prop_assert_eq!(rank_f2(&m), r);
            prop_assert_eq!(rank_f2(&m.transpose()), r);
        }
    }
}
