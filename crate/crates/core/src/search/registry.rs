//! Bit-packed state storage with duplicate detection.

use std::hash::{BuildHasher, Hash};

use hashbrown::HashTable;
use hashbrown::DefaultHashBuilder;
use thiserror::Error;

/// Dense handle of a registered state. The initial state is always id 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("state registry exceeded its memory budget of {budget} bytes")]
pub struct MemoryLimit {
    pub budget: u64,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    word: usize,
    shift: u32,
    mask: u64,
}

/// Packs variable values into 64-bit words. No variable straddles a word
/// boundary; variables are placed first-fit in order of decreasing width.
#[derive(Debug, Clone)]
pub struct StatePacker {
    slots: Vec<Slot>,
    words: usize,
}

fn bits_for(domain_size: usize) -> u32 {
    if domain_size <= 1 {
        1
    } else {
        usize::BITS - (domain_size - 1).leading_zeros()
    }
}

impl StatePacker {
    pub fn new(domain_sizes: impl IntoIterator<Item = usize>) -> Self {
        let widths: Vec<u32> = domain_sizes.into_iter().map(bits_for).collect();
        let mut order: Vec<usize> = (0..widths.len()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(widths[v]));
        let mut used: Vec<u32> = Vec::new();
        let mut slots = vec![
            Slot {
                word: 0,
                shift: 0,
                mask: 0
            };
            widths.len()
        ];
        for var in order {
            let bits = widths[var];
            let word = match used.iter().position(|&u| u + bits <= 64) {
                Some(w) => w,
                None => {
                    used.push(0);
                    used.len() - 1
                }
            };
            let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
            slots[var] = Slot {
                word,
                shift: used[word],
                mask,
            };
            used[word] += bits;
        }
        StatePacker {
            slots,
            words: used.len().max(1),
        }
    }

    pub fn words_per_state(&self) -> usize {
        self.words
    }

    pub fn pack_into(&self, values: &[usize], out: &mut [u64]) {
        out.fill(0);
        for (slot, &v) in self.slots.iter().zip(values) {
            out[slot.word] |= (v as u64 & slot.mask) << slot.shift;
        }
    }

    pub fn unpack_into(&self, packed: &[u64], out: &mut Vec<usize>) {
        out.clear();
        out.extend(
            self.slots
                .iter()
                .map(|s| ((packed[s.word] >> s.shift) & s.mask) as usize),
        );
    }
}

/// Interns states: equal value arrays always map to the same [`StateId`], and
/// ids are issued consecutively from 0.
pub struct StateRegistry {
    packer: StatePacker,
    data: Vec<u64>,
    table: HashTable<u32>,
    hasher: DefaultHashBuilder,
    scratch: Vec<u64>,
    budget: u64,
}

impl StateRegistry {
    pub fn new(domain_sizes: impl IntoIterator<Item = usize>, budget_bytes: u64) -> Self {
        let packer = StatePacker::new(domain_sizes);
        let scratch = vec![0; packer.words_per_state()];
        StateRegistry {
            packer,
            data: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
            scratch,
            budget: budget_bytes,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.packer.words
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Bytes held by the packed buffer and the hash table, counted by capacity.
    pub fn memory_bytes(&self) -> u64 {
        (self.data.capacity() * 8 + self.table.capacity() * (std::mem::size_of::<u32>() + 1)) as u64
    }

    fn bytes_after_insert(&self) -> u64 {
        let w = self.packer.words;
        let data_cap = if self.data.len() + w > self.data.capacity() {
            (self.data.capacity() * 2).max(self.data.len() + w)
        } else {
            self.data.capacity()
        };
        let table_cap = if self.table.len() == self.table.capacity() {
            (self.table.capacity() * 2).max(4)
        } else {
            self.table.capacity()
        };
        (data_cap * 8 + table_cap * (std::mem::size_of::<u32>() + 1)) as u64
    }

    fn hash_words(hasher: &DefaultHashBuilder, words: &[u64]) -> u64 {
        hasher.hash_one(words)
    }

    /// Returns the id of `values` and whether it was registered by this call.
    pub fn register(&mut self, values: &[usize]) -> Result<(StateId, bool), MemoryLimit> {
        let w = self.packer.words;
        self.packer.pack_into(values, &mut self.scratch);
        let hash = Self::hash_words(&self.hasher, &self.scratch);
        let data = &self.data;
        let scratch = &self.scratch;
        let eq = |&id: &u32| &data[id as usize * w..(id as usize + 1) * w] == scratch.as_slice();
        if let Some(&id) = self.table.find(hash, eq) {
            return Ok((StateId(id), false));
        }
        if self.bytes_after_insert() > self.budget {
            return Err(MemoryLimit { budget: self.budget });
        }
        let id = u32::try_from(self.len()).map_err(|_| MemoryLimit { budget: self.budget })?;
        let data = &self.data;
        let hasher = &self.hasher;
        self.table.insert_unique(hash, id, |&i| {
            Self::hash_words(hasher, &data[i as usize * w..(i as usize + 1) * w])
        });
        self.data.extend_from_slice(&self.scratch);
        Ok((StateId(id), true))
    }

    pub fn lookup(&self, id: StateId, out: &mut Vec<usize>) {
        let w = self.packer.words;
        self.packer.unpack_into(&self.data[id.index() * w..(id.index() + 1) * w], out);
    }

    pub fn get(&self, id: StateId) -> Vec<usize> {
        let mut out = Vec::new();
        self.lookup(id, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interning() {
        let mut reg = StateRegistry::new([3, 2], u64::MAX);
        assert_eq!(reg.register(&[0, 0]).unwrap(), (StateId(0), true));
        assert_eq!(reg.register(&[0, 0]).unwrap(), (StateId(0), false));
        assert_eq!(reg.register(&[2, 1]).unwrap(), (StateId(1), true));
        assert_eq!(reg.register(&[1, 1]).unwrap(), (StateId(2), true));
        assert_eq!(reg.register(&[2, 1]).unwrap(), (StateId(1), false));
        assert_eq!(reg.get(StateId(2)), vec![1, 1]);
        assert_eq!(reg.len(), 3);
    }

    #[test]
    fn budget_exceeded() {
        let mut reg = StateRegistry::new([1000; 20], 256);
        let mut hit = false;
        for i in 0..1000 {
            let mut s = vec![0; 20];
            s[0] = i;
            match reg.register(&s) {
                Ok(_) => {}
                Err(e) => {
                    assert_eq!(e.budget, 256);
                    hit = true;
                    break;
                }
            }
        }
        assert!(hit);
        assert!(reg.memory_bytes() <= 256);
    }

    #[test]
    fn wide_domains() {
        let packer = StatePacker::new([2, 1 << 40, 7, 1]);
        let mut packed = vec![0; packer.words_per_state()];
        let values = [1, (1 << 40) - 1, 6, 0];
        packer.pack_into(&values, &mut packed);
        let mut out = Vec::new();
        packer.unpack_into(&packed, &mut out);
        assert_eq!(out, values);
    }

    proptest! {
        #[test]
        fn pack_roundtrip(domains in prop::collection::vec(1usize..300, 1..40), seed in any::<u64>()) {
            let values: Vec<usize> = domains
                .iter()
                .enumerate()
                .map(|(i, &d)| (seed.rotate_left(i as u32) as usize) % d)
                .collect();
            let packer = StatePacker::new(domains.iter().copied());
            let mut packed = vec![0; packer.words_per_state()];
            packer.pack_into(&values, &mut packed);
            let mut out = Vec::new();
            packer.unpack_into(&packed, &mut out);
            prop_assert_eq!(out, values);
        }
    }
}
