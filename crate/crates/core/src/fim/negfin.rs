//! NegNodeset miner over bit-coded transaction sets.
//!
//! Frequent items are ranked by descending support (ties by token). Every
//! itemset is anchored on its lowest-ranked (least frequent) item, and all
//! node sets of that anchor are bitmaps over the transactions containing it:
//! bit `j` of `col[y]` says whether the anchor's `j`-th transaction also holds
//! item `y`. For an itemset `P` and two extension items `x`, `y` ranked above
//! the anchor:
//!
//! ```text
//! neg(P y)   = pos(P) & !col[y]
//! sup(P y)   = sup(P) - |neg(P y)|
//! neg(P x y) = neg(P y) & col[x]
//! sup(P x y) = sup(P x) - |neg(P x y)|
//! ```
//!
//! so only negative sets are materialized and every support is one AND plus
//! a popcount. Extensions whose support equals their parent's are promoted:
//! they occur in every transaction of the parent and are combined as a
//! subset product instead of being searched.

use crate::fim::TransactionDatabase;

struct Extension {
    rank: u32,
    neg: Vec<u64>,
    support: u64,
}

fn popcount(words: &[u64]) -> u64 {
    words.iter().map(|w| w.count_ones() as u64).sum()
}

struct Search<'a> {
    /// Columns of the current anchor, `words` u64s per rank.
    cols: &'a [u64],
    words: usize,
    minsup: u64,
    out: Vec<(Vec<u32>, u64)>,
}

impl Search<'_> {
    fn col(&self, rank: u32) -> &[u64] {
        let start = rank as usize * self.words;
        &self.cols[start..start + self.words]
    }

    /// Emits `base` combined with every subset of `promoted`.
    fn emit(&mut self, base: &[u32], promoted: &[u32], support: u64) {
        let mut stack: Vec<u32> = base.to_vec();
        self.emit_rec(&mut stack, promoted, support);
    }

    fn emit_rec(&mut self, current: &mut Vec<u32>, rest: &[u32], support: u64) {
        match rest.split_first() {
            None => self.out.push((current.clone(), support)),
            Some((&first, tail)) => {
                self.emit_rec(current, tail, support);
                current.push(first);
                self.emit_rec(current, tail, support);
                current.pop();
            }
        }
    }

    fn expand(&mut self, prefix: &mut Vec<u32>, members: &[Extension], promoted: &[u32]) {
        for (i, x) in members.iter().enumerate() {
            let mut child_members = Vec::new();
            let mut child_promoted = promoted.to_vec();
            for y in &members[i + 1..] {
                let neg: Vec<u64> = y.neg.iter().zip(self.col(x.rank)).map(|(n, c)| n & c).collect();
                let support = x.support - popcount(&neg);
                if support < self.minsup {
                    continue;
                }
                if support == x.support {
                    child_promoted.push(y.rank);
                } else {
                    child_members.push(Extension {
                        rank: y.rank,
                        neg,
                        support,
                    });
                }
            }
            prefix.push(x.rank);
            self.emit(prefix, &child_promoted, x.support);
            if !child_members.is_empty() {
                self.expand(prefix, &child_members, &child_promoted);
            }
            prefix.pop();
        }
    }
}

/// Returns `(universe indices, support)` for every frequent itemset, in no
/// particular order.
pub(super) fn mine(db: &TransactionDatabase, minsup: u64) -> Vec<(Vec<u32>, u64)> {
    let m = db.universe.len();
    let mut counts = vec![0u64; m];
    for t in &db.transactions {
        for &i in t {
            counts[i as usize] += 1;
        }
    }

    // universe indices are already in token order, so a stable sort on
    // descending count breaks ties lexicographically
    let mut frequent: Vec<u32> = (0..m as u32).filter(|&i| counts[i as usize] >= minsup).collect();
    frequent.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]));
    let mut rank_of = vec![u32::MAX; m];
    for (r, &i) in frequent.iter().enumerate() {
        rank_of[i as usize] = r as u32;
    }

    // ranked transactions, flattened: transaction t is ranks[starts[t]..starts[t + 1]]
    let mut ranks = Vec::new();
    let mut starts = vec![0usize];
    let mut holders: Vec<Vec<u32>> = vec![Vec::new(); frequent.len()];
    for (tid, t) in db.transactions.iter().enumerate() {
        for &i in t {
            let r = rank_of[i as usize];
            if r != u32::MAX {
                ranks.push(r);
                holders[r as usize].push(tid as u32);
            }
        }
        starts.push(ranks.len());
    }

    let mut out = Vec::new();
    let mut cols = Vec::new();
    for anchor in 0..frequent.len() as u32 {
        let tids = &holders[anchor as usize];
        let anchor_support = tids.len() as u64;
        let words = tids.len().div_ceil(64);
        cols.clear();
        cols.resize(anchor as usize * words, 0u64);
        for (j, &tid) in tids.iter().enumerate() {
            for &r in &ranks[starts[tid as usize]..starts[tid as usize + 1]] {
                if r < anchor {
                    cols[r as usize * words + j / 64] |= 1u64 << (j % 64);
                }
            }
        }

        let mut search = Search {
            cols: &cols,
            words,
            minsup,
            out,
        };
        let mut members = Vec::new();
        let mut promoted = Vec::new();
        for y in 0..anchor {
            // pos(anchor) is every bit, so neg is the complement of the column
            let mut neg: Vec<u64> = search.col(y).iter().map(|c| !c).collect();
            if tids.len() % 64 != 0 {
                *neg.last_mut().expect("non-empty") &= (1u64 << (tids.len() % 64)) - 1;
            }
            let support = anchor_support - popcount(&neg);
            if support < minsup {
                continue;
            }
            if support == anchor_support {
                promoted.push(y);
            } else {
                members.push(Extension {
                    rank: y,
                    neg,
                    support,
                });
            }
        }
        let mut prefix = vec![anchor];
        search.emit(&prefix, &promoted, anchor_support);
        search.expand(&mut prefix, &members, &promoted);
        out = search.out;
    }

    out.into_iter()
        .map(|(ranks, s)| (ranks.iter().map(|&r| frequent[r as usize]).collect(), s))
        .collect()
}
