//! Sparse vectors over arbitrary ordered key sets, and exact row reduction
//! with eagerly-recorded elimination combinations.
//!
//! Every quotient-space computation in this crate reduces to membership tests
//! in the row span of a growing set of relation vectors. [`RowBasis`] keeps the
//! inserted vectors in mutually-reduced form (pivot = smallest key in each
//! row's support) and records, for every row, the exact combination of
//! original insertions that produced it, so certificates can be extracted
//! without re-elimination.

use crate::rat::Rat;
use std::collections::BTreeMap;

/// A finite formal linear combination of keys with nonzero rational
/// coefficients; iteration follows key order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseVector<K: Ord + Clone> {
    entries: BTreeMap<K, Rat>,
}

impl<K: Ord + Clone> Default for SparseVector<K> {
    fn default() -> Self {
        SparseVector { entries: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> SparseVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(key: K) -> Self {
        let mut v = Self::new();
        v.add(key, Rat::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, key: &K) -> Rat {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    pub fn contains_key(&self, key: &K) -> bool {
        self.entries.contains_key(key)
    }

    /// Smallest key in the support, if any.
    pub fn min_key(&self) -> Option<&K> {
        self.entries.keys().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rat)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.entries.keys()
    }

    /// Adds `coeff` to the entry at `key`, dropping it if the sum is zero.
    pub fn add(&mut self, key: K, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.entries.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &Rat, other: &SparseVector<K>) {
        if c.is_zero() {
            return;
        }
        for (k, v) in other.iter() {
            self.add(k.clone(), c * v);
        }
    }

    pub fn scale(&mut self, c: &Rat) {
        if c.is_zero() {
            self.entries.clear();
            return;
        }
        for v in self.entries.values_mut() {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn negated(&self) -> Self {
        self.scaled(&-Rat::one())
    }

    pub fn sub(&self, other: &SparseVector<K>) -> Self {
        let mut out = self.clone();
        out.add_scaled(&-Rat::one(), other);
        out
    }

    pub fn map_keys<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> SparseVector<L> {
        let mut out = SparseVector::new();
        for (k, v) in self.iter() {
            out.add(f(k), v.clone());
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rat)> for SparseVector<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rat)>>(iter: I) -> Self {
        let mut v = SparseVector::new();
        for (k, c) in iter {
            v.add(k, c);
        }
        v
    }
}

/// Outcome of inserting a vector into a [`RowBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The vector was already in the span. `combination` expresses it exactly
    /// over previously inserted vectors, by insertion index.
    Absorbed { combination: SparseVector<usize> },
    /// The vector extended the basis with a new pivot row.
    Extended { pivot_index: usize },
}

struct Row<K: Ord + Clone> {
    vec: SparseVector<K>,
    /// This row as a combination of originally inserted vectors.
    combo: SparseVector<usize>,
}

/// A mutually-reduced set of sparse rows supporting incremental insertion,
/// span-membership tests, and exact combination extraction.
///
/// Invariants: each row's pivot is the smallest key in its support and carries
/// coefficient 1; no row has support on another row's pivot; every row equals
/// its recorded combination of inserted vectors.
pub struct RowBasis<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    inserted: usize,
}

impl<K: Ord + Clone> Default for RowBasis<K> {
    fn default() -> Self {
        RowBasis { rows: BTreeMap::new(), inserted: 0 }
    }
}

impl<K: Ord + Clone> RowBasis<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of `insert` calls so far (absorbed ones included).
    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn row(&self, pivot: &K) -> Option<(&SparseVector<K>, &SparseVector<usize>)> {
        self.rows.get(pivot).map(|r| (&r.vec, &r.combo))
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Reduces `v` against the basis; the result has no support on any pivot.
    pub fn reduce(&self, v: &SparseVector<K>) -> SparseVector<K> {
        self.reduce_with_combo(v).0
    }

    /// Reduces `v`, also returning the combination of inserted vectors that
    /// was subtracted: `v = result + Σ combo[m] · inserted_m`.
    pub fn reduce_with_combo(&self, v: &SparseVector<K>) -> (SparseVector<K>, SparseVector<usize>) {
        let mut residual = v.clone();
        let mut combo = SparseVector::new();
        self.reduce_in_place(&mut residual, &mut combo);
        (residual, combo)
    }

    fn reduce_in_place(&self, residual: &mut SparseVector<K>, combo: &mut SparseVector<usize>) {
        // Subtracting a row with pivot k only introduces keys > k, so one
        // ascending sweep terminates.
        loop {
            let hit = residual
                .keys()
                .find(|k| self.rows.contains_key(k))
                .cloned();
            let Some(k) = hit else { break };
            let c = residual.coeff(&k);
            let row = &self.rows[&k];
            residual.add_scaled(&-c.clone(), &row.vec);
            combo.add_scaled(&c, &row.combo);
        }
    }

    /// Inserts `v`, assigning it the next insertion index. Reports either the
    /// exact combination witnessing `v` ∈ span, or the new pivot.
    pub fn insert(&mut self, v: SparseVector<K>) -> InsertOutcome {
        let index = self.inserted;
        self.inserted += 1;
        let mut residual = v;
        let mut subtracted = SparseVector::new();
        self.reduce_in_place(&mut residual, &mut subtracted);
        if residual.is_zero() {
            return InsertOutcome::Absorbed { combination: subtracted };
        }
        // Combination for the stored row: v itself minus what was subtracted.
        let mut combo = SparseVector::unit(index);
        combo.add_scaled(&-Rat::one(), &subtracted);
        let pivot = residual.min_key().cloned().expect("nonzero residual");
        let lead = residual.coeff(&pivot);
        let inv = lead.recip().expect("pivot coefficient nonzero");
        residual.scale(&inv);
        combo.scale(&inv);
        // Keep rows mutually reduced: eliminate the new pivot upstream.
        let affected: Vec<K> = self
            .rows
            .iter()
            .filter(|(_, row)| row.vec.contains_key(&pivot))
            .map(|(p, _)| p.clone())
            .collect();
        for p in affected {
            let c = self.rows[&p].vec.coeff(&pivot);
            let row = self.rows.get_mut(&p).expect("row exists");
            row.vec.add_scaled(&-c.clone(), &residual);
            row.combo.add_scaled(&-c, &combo);
        }
        self.rows.insert(pivot, Row { vec: residual, combo });
        InsertOutcome::Extended { pivot_index: index }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // -- independent dense oracle ------------------------------------------
    // Plain Gaussian elimination over Vec<Vec<Rat>>; shares nothing with
    // RowBasis except the scalar type.

    fn dense_rank(rows: &[Vec<Rat>]) -> usize {
        let mut m: Vec<Vec<Rat>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot_row) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, pivot_row);
            let lead = m[rank][col].clone();
            for c in 0..cols {
                m[rank][c] = m[rank][c].clone() / lead.clone();
            }
            for r in 0..m.len() {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..cols {
                        let sub = f.clone() * m[rank][c].clone();
                        m[r][c] = m[r][c].clone() - sub;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn dense_member(rows: &[Vec<Rat>], v: &[Rat]) -> bool {
        let mut all: Vec<Vec<Rat>> = rows.to_vec();
        let base = dense_rank(&all);
        all.push(v.to_vec());
        dense_rank(&all) == base
    }

    fn sv(entries: &[(u32, i64)]) -> SparseVector<u32> {
        entries.iter().map(|&(k, c)| (k, Rat::from_int(c))).collect()
    }

    fn densify(v: &SparseVector<u32>, cols: usize) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); cols];
        for (k, c) in v.iter() {
            out[*k as usize] = c.clone();
        }
        out
    }

    // -- sparse vector basics ----------------------------------------------

    #[test]
    fn zero_entries_are_never_stored() {
        let mut v = sv(&[(1, 2), (3, -2)]);
        v.add(1, Rat::from_int(-2));
        assert!(!v.contains_key(&1));
        v.add(3, Rat::from_int(2));
        assert!(v.is_zero());
        v.add(5, Rat::zero());
        assert!(v.is_zero());
    }

    #[test]
    fn iteration_is_key_ordered() {
        let v = sv(&[(9, 1), (2, 1), (5, 1)]);
        let keys: Vec<u32> = v.keys().copied().collect();
        assert_eq!(keys, vec![2, 5, 9]);
    }

    // -- row basis ----------------------------------------------------------

    #[test]
    fn reduce_of_zero_and_of_basis_rows() {
        let mut b = RowBasis::new();
        let v = sv(&[(0, 1), (1, 2)]);
        b.insert(v.clone());
        assert!(b.reduce(&SparseVector::new()).is_zero());
        assert!(b.reduce(&v).is_zero());
        assert!(b.reduce(&v.scaled(&Rat::new(7, 3))).is_zero());
    }

    #[test]
    fn insert_zero_absorbs_with_empty_combination() {
        let mut b: RowBasis<u32> = RowBasis::new();
        match b.insert(SparseVector::new()) {
            InsertOutcome::Absorbed { combination } => assert!(combination.is_zero()),
            other => panic!("expected absorption, got {other:?}"),
        }
    }

    #[test]
    fn reinsert_is_absorbed_with_unit_combination() {
        let mut b = RowBasis::new();
        let v = sv(&[(2, 3), (4, -1)]);
        assert!(matches!(b.insert(v.clone()), InsertOutcome::Extended { pivot_index: 0 }));
        match b.insert(v) {
            InsertOutcome::Absorbed { combination } => {
                assert_eq!(combination, SparseVector::unit(0usize));
            }
            other => panic!("expected absorption, got {other:?}"),
        }
    }

    #[test]
    fn residual_outside_span_matches_dense_oracle() {
        // Three fixed "random" vectors over 5 keys; v deliberately outside.
        let rows = [
            sv(&[(0, 1), (2, 2), (4, -1)]),
            sv(&[(1, 3), (2, 1)]),
            sv(&[(0, 2), (1, -1), (3, 5)]),
        ];
        let v = sv(&[(0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]);
        let mut b = RowBasis::new();
        for r in &rows {
            b.insert(r.clone());
        }
        let residual = b.reduce(&v);
        assert!(!residual.is_zero());
        let dense_rows: Vec<Vec<Rat>> = rows.iter().map(|r| densify(r, 5)).collect();
        assert!(!dense_member(&dense_rows, &densify(&v, 5)));
        // And the residual differs from v by a span element.
        let diff = v.sub(&residual);
        assert!(dense_member(&dense_rows, &densify(&diff, 5)));
    }

    fn xorshift(state: &mut u64) -> u64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        *state
    }

    fn random_vectors(n: usize, keys: u32, seed: u64) -> Vec<SparseVector<u32>> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                (0..keys)
                    .filter_map(|k| {
                        let r = xorshift(&mut s) % 5;
                        // ~40% fill, small signed coefficients
                        if r < 2 {
                            Some((k, Rat::from_int((xorshift(&mut s) % 9) as i64 - 4)))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn rank_of_random_set_matches_dense_oracle() {
        let vecs = random_vectors(100, 20, 0x5eed);
        let mut b = RowBasis::new();
        for v in &vecs {
            b.insert(v.clone());
        }
        let dense: Vec<Vec<Rat>> = vecs.iter().map(|v| densify(v, 20)).collect();
        assert_eq!(b.rank(), dense_rank(&dense));
    }

    #[test]
    fn rank_and_membership_are_insertion_order_independent() {
        let vecs = random_vectors(12, 8, 0xabcdef);
        let probe = sv(&[(0, 1), (3, -2), (7, 1)]);
        let mut reference: Option<(usize, bool)> = None;
        // 50 deterministic shuffles via seeded permutation generation.
        let mut s = 0x94_u64;
        for _ in 0..50 {
            let mut order: Vec<usize> = (0..vecs.len()).collect();
            for i in (1..order.len()).rev() {
                let j = (xorshift(&mut s) as usize) % (i + 1);
                order.swap(i, j);
            }
            let mut b = RowBasis::new();
            for &i in &order {
                b.insert(vecs[i].clone());
            }
            let got = (b.rank(), b.reduce(&probe).is_zero());
            match reference {
                None => reference = Some(got),
                Some(r) => assert_eq!(got, r),
            }
        }
    }

    #[test]
    fn reduce_is_idempotent() {
        let vecs = random_vectors(10, 10, 77);
        let mut b = RowBasis::new();
        for v in &vecs {
            b.insert(v.clone());
        }
        for v in random_vectors(20, 10, 78) {
            let once = b.reduce(&v);
            assert_eq!(b.reduce(&once), once);
        }
    }

    #[test]
    fn combination_records_replay_exactly() {
        let vecs = random_vectors(30, 12, 0xfeed);
        let mut b = RowBasis::new();
        let mut originals: Vec<SparseVector<u32>> = Vec::new();
        for v in &vecs {
            let outcome = b.insert(v.clone());
            originals.push(v.clone());
            if let InsertOutcome::Absorbed { combination } = outcome {
                let mut rebuilt = SparseVector::new();
                for (m, c) in combination.iter() {
                    rebuilt.add_scaled(c, &originals[*m]);
                }
                assert_eq!(&rebuilt, v, "absorption combination must replay");
            }
        }
        // Every stored row's combination replays to the row itself.
        let pivots: Vec<u32> = b.pivots().copied().collect();
        for p in pivots {
            let (vec, combo) = b.row(&p).unwrap();
            let mut rebuilt = SparseVector::new();
            for (m, c) in combo.iter() {
                rebuilt.add_scaled(c, &originals[*m]);
            }
            assert_eq!(&rebuilt, vec, "row combination must replay");
        }
    }

    #[test]
    fn reduce_with_combo_reconstructs_input() {
        let vecs = random_vectors(15, 10, 3);
        let mut b = RowBasis::new();
        for v in &vecs {
            b.insert(v.clone());
        }
        for v in random_vectors(10, 10, 4) {
            let (residual, combo) = b.reduce_with_combo(&v);
            let mut rebuilt = residual;
            for (m, c) in combo.iter() {
                rebuilt.add_scaled(c, &vecs[*m]);
            }
            assert_eq!(rebuilt, v);
        }
    }
}
