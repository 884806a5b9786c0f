//! Keyed FIFO sublists combined by alternation with preferred-operator boosting.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::search::StateId;

/// Default boost credit granted to every preferred-only sublist on progress.
pub const DEFAULT_BOOST: i64 = 1000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OpenListError {
    #[error("sublist is empty")]
    EmptyList,
    #[error("all sublists are empty")]
    AllEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heuristic {
    Ff,
    Lm,
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Ff => "h_ff",
            Heuristic::Lm => "h_lm",
        })
    }
}

/// One component of a lexicographic key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KeyComponent {
    Heuristic(Heuristic),
    /// Novelty under the given partition heuristics (empty for plain `w`).
    Novelty(Vec<Heuristic>),
    /// `1 - pref`, so preferred entries sort first.
    NotPreferred,
    G,
}

impl fmt::Display for KeyComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyComponent::Heuristic(h) => write!(f, "{h}"),
            KeyComponent::Novelty(p) => {
                f.write_str("w<")?;
                for (i, h) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{h}")?;
                }
                f.write_str(">")
            }
            KeyComponent::NotPreferred => f.write_str("1-pref"),
            KeyComponent::G => f.write_str("g"),
        }
    }
}

/// Declarative description of one sublist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SublistSpec {
    pub key: Vec<KeyComponent>,
    pub preferred_only: bool,
}

impl SublistSpec {
    pub fn new(key: Vec<KeyComponent>, preferred_only: bool) -> Self {
        SublistSpec { key, preferred_only }
    }

    pub fn admits(&self, preferred: bool) -> bool {
        preferred || !self.preferred_only
    }
}

impl fmt::Display for SublistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, c) in self.key.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("> fifo")?;
        if self.preferred_only {
            f.write_str(" preferred-only")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub state: StateId,
    pub key: Vec<u32>,
    pub insertion_seq: u64,
}

/// Buckets of FIFO queues ordered by key.
#[derive(Debug, Clone, Default)]
pub struct Sublist {
    buckets: BTreeMap<Vec<u32>, VecDeque<(u64, StateId)>>,
    len: usize,
}

impl Sublist {
    pub fn push(&mut self, entry: Entry) {
        self.buckets
            .entry(entry.key)
            .or_default()
            .push_back((entry.insertion_seq, entry.state));
        self.len += 1;
    }

    /// Smallest key first; equal keys in insertion order.
    pub fn pop_best(&mut self) -> Result<Entry, OpenListError> {
        let mut bucket = self.buckets.first_entry().ok_or(OpenListError::EmptyList)?;
        let (insertion_seq, state) = bucket.get_mut().pop_front().expect("buckets are never empty");
        let key = if bucket.get().is_empty() {
            bucket.remove_entry().0
        } else {
            bucket.key().clone()
        };
        self.len -= 1;
        Ok(Entry {
            state,
            key,
            insertion_seq,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_buckets(&self) -> usize {
        self.buckets.len()
    }
}

/// Ordered sublists with alternation counters. A single-sublist policy never
/// boosts.
#[derive(Debug, Clone)]
pub struct OpenPolicy {
    specs: Vec<SublistSpec>,
    lists: Vec<Sublist>,
    counters: Vec<i64>,
    boost_amount: Option<i64>,
    next_seq: u64,
}

impl OpenPolicy {
    pub fn new(specs: Vec<SublistSpec>, boost_amount: Option<i64>) -> Self {
        assert!(!specs.is_empty(), "a policy needs at least one sublist");
        let n = specs.len();
        OpenPolicy {
            specs,
            lists: vec![Sublist::default(); n],
            counters: vec![0; n],
            boost_amount,
            next_seq: 0,
        }
    }

    pub fn specs(&self) -> &[SublistSpec] {
        &self.specs
    }

    pub fn boost_amount(&self) -> Option<i64> {
        self.boost_amount
    }

    pub fn counters(&self) -> &[i64] {
        &self.counters
    }

    pub fn sublist(&self, i: usize) -> &Sublist {
        &self.lists[i]
    }

    pub fn len(&self) -> usize {
        self.lists.iter().map(Sublist::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.iter().all(Sublist::is_empty)
    }

    pub fn num_buckets(&self) -> usize {
        self.lists.iter().map(Sublist::num_buckets).sum()
    }

    /// Inserts `state` into every sublist admitting it; `key_of` supplies the
    /// key for each receiving sublist. Returns the insertion sequence number.
    pub fn push(
        &mut self,
        state: StateId,
        preferred: bool,
        mut key_of: impl FnMut(usize, &SublistSpec) -> Vec<u32>,
    ) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        for (i, (spec, list)) in self.specs.iter().zip(&mut self.lists).enumerate() {
            if spec.admits(preferred) {
                let key = key_of(i, spec);
                debug_assert_eq!(key.len(), spec.key.len());
                list.push(Entry {
                    state,
                    key,
                    insertion_seq: seq,
                });
            }
        }
        seq
    }

    /// Nonempty sublist with the lowest counter (lowest index on ties); its
    /// counter is then incremented.
    pub fn alternation_select(&mut self) -> Result<usize, OpenListError> {
        let best = (0..self.lists.len())
            .filter(|&i| !self.lists[i].is_empty())
            .min_by_key(|&i| (self.counters[i], i))
            .ok_or(OpenListError::AllEmpty)?;
        self.counters[best] += 1;
        Ok(best)
    }

    pub fn pop_best(&mut self, sublist: usize) -> Result<Entry, OpenListError> {
        self.lists[sublist].pop_best()
    }

    /// Selects a sublist and pops its best entry.
    pub fn pop(&mut self) -> Result<(usize, Entry), OpenListError> {
        let i = self.alternation_select()?;
        Ok((i, self.lists[i].pop_best()?))
    }

    /// Lowers the counter of every preferred-only sublist by the boost amount.
    pub fn boost(&mut self) {
        let Some(amount) = self.boost_amount else { return };
        for (spec, c) in self.specs.iter().zip(&mut self.counters) {
            if spec.preferred_only {
                *c -= amount;
            }
        }
    }
}

impl fmt::Display for OpenPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.boost_amount {
            Some(b) if self.specs.len() > 1 => writeln!(f, "alternation boost={b}")?,
            Some(b) => writeln!(f, "single boost={b}")?,
            None if self.specs.len() > 1 => writeln!(f, "alternation")?,
            None => writeln!(f, "single")?,
        }
        for (i, s) in self.specs.iter().enumerate() {
            writeln!(f, "  [{i}] {s}")?;
        }
        Ok(())
    }
}
