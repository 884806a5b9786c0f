//! Bounded novelty over atoms and atom pairs, split by partition key.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

/// Estimated table size above which novelty falls back to single atoms.
pub const FALLBACK_THRESHOLD_BYTES: u64 = 2 << 30;

/// Values of the partition heuristics, `<h1(s), ..., hn(s)>`.
pub type PartitionKey = Vec<u32>;

/// `P * ceil((A + [k = 2] * A(A-1)/2) / 8)`, saturating.
pub fn estimate_table_bytes(atoms: u64, partitions: u64, bound: u8) -> u64 {
    let a = atoms as u128;
    let bits = if bound >= 2 { a + a * a.saturating_sub(1) / 2 } else { a };
    let bytes = (partitions as u128).saturating_mul(bits.div_ceil(8));
    u64::try_from(bytes).unwrap_or(u64::MAX)
}

/// Index of the unordered pair `{a, b}`, `a != b`, in `[0, A(A-1)/2)`.
#[inline]
pub fn pair_index(a: usize, b: usize) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    hi * (hi - 1) / 2 + lo
}

struct Record {
    atoms: FixedBitSet,
    pairs: Option<FixedBitSet>,
}

pub struct NoveltyTable {
    bound: u8,
    num_atoms: usize,
    fallback: bool,
    records: HashMap<PartitionKey, Record>,
    bytes: u64,
}

impl NoveltyTable {
    /// `partitions` is the proxy bound on distinct keys used for the memory
    /// estimate; the fallback to `k = 1` is decided here once.
    pub fn new(bound: u8, num_atoms: usize, partitions: u64) -> Self {
        assert!(bound == 1 || bound == 2, "novelty bound must be 1 or 2");
        let fallback = bound == 2 && estimate_table_bytes(num_atoms as u64, partitions, bound) > FALLBACK_THRESHOLD_BYTES;
        NoveltyTable {
            bound,
            num_atoms,
            fallback,
            records: HashMap::new(),
            bytes: 0,
        }
    }

    pub fn bound(&self) -> u8 {
        self.bound
    }

    pub fn fallback_engaged(&self) -> bool {
        self.fallback
    }

    fn effective_bound(&self) -> u8 {
        if self.fallback {
            1
        } else {
            self.bound
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        self.bytes
    }

    pub fn num_partitions(&self) -> usize {
        self.records.len()
    }

    /// Novelty of a state given by its sorted atom ids (one per variable),
    /// in `1..=k+1`. Marks all of its atoms (and pairs, for `k = 2`) as seen.
    pub fn evaluate(&mut self, atoms: &[usize], key: &[u32]) -> u8 {
        let use_pairs = self.effective_bound() == 2;
        let n = self.num_atoms;
        if !self.records.contains_key(key) {
            let pairs = use_pairs.then(|| FixedBitSet::with_capacity(n * n.saturating_sub(1) / 2));
            self.bytes += (n.div_ceil(8) + pairs.as_ref().map_or(0, |p| p.len().div_ceil(8))) as u64;
            self.records.insert(
                key.to_vec(),
                Record {
                    atoms: FixedBitSet::with_capacity(n),
                    pairs,
                },
            );
        }
        let mut novelty = self.effective_bound() + 1;
        let record = self.records.get_mut(key).expect("record inserted above");
        for &a in atoms {
            if !record.atoms.put(a) {
                novelty = 1;
            }
        }
        if let Some(pairs) = record.pairs.as_mut() {
            for (i, &a) in atoms.iter().enumerate() {
                for &b in &atoms[i + 1..] {
                    if !pairs.put(pair_index(a, b)) {
                        novelty = novelty.min(2);
                    }
                }
            }
        }
        novelty
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn estimates() {
        assert_eq!(estimate_table_bytes(4, 1, 2), 2);
        assert_eq!(estimate_table_bytes(4, 1, 1), 1);
        let big = estimate_table_bytes(100_000, 300, 2);
        assert_eq!(big, 300 * 625_006_250);
        assert!(big > FALLBACK_THRESHOLD_BYTES);
        assert!(NoveltyTable::new(2, 100_000, 300).fallback_engaged());
        assert!(!NoveltyTable::new(2, 4, 1).fallback_engaged());
    }

    // PAIR atoms: v0=0 -> 0, v0=1 -> 1, v1=0 -> 2, v1=1 -> 3
    fn atoms(s: [usize; 2]) -> Vec<usize> {
        vec![s[0], 2 + s[1]]
    }

    #[test]
    fn pair_traces() {
        let mut t = NoveltyTable::new(2, 4, 1);
        assert_eq!(t.evaluate(&atoms([0, 0]), &[]), 1);
        assert_eq!(t.evaluate(&atoms([1, 1]), &[]), 1);

        for bound in [1u8, 2] {
            let mut t = NoveltyTable::new(bound, 4, 1);
            for s in [[0, 0], [1, 0], [0, 1]] {
                t.evaluate(&atoms(s), &[]);
            }
            assert_eq!(t.evaluate(&atoms([1, 1]), &[]), 2);
        }

        let mut t = NoveltyTable::new(2, 4, 1);
        t.evaluate(&atoms([0, 0]), &[7]);
        assert_eq!(t.evaluate(&atoms([0, 0]), &[7]), 3);
        assert_eq!(t.evaluate(&atoms([0, 0]), &[8]), 1);
    }

    #[test]
    fn fallback_acts_as_bound_one() {
        let mut t = NoveltyTable::new(2, 4, 1 << 40);
        assert!(t.fallback_engaged());
        t.evaluate(&atoms([0, 0]), &[]);
        assert_eq!(t.evaluate(&atoms([0, 0]), &[]), 2);
    }

    proptest! {
        #[test]
        fn pair_index_is_a_bijection(n in 2usize..60) {
            let mut seen = vec![false; n * (n - 1) / 2];
            for b in 1..n {
                for a in 0..b {
                    let i = pair_index(a, b);
                    prop_assert_eq!(i, pair_index(b, a));
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            prop_assert!(seen.into_iter().all(|x| x));
        }
    }
}
