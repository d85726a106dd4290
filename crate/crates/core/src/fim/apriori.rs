use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::fim::TransactionDatabase;

/// Largest universe the levelwise oracle accepts.
pub const ORACLE_ITEM_LIMIT: usize = 20;

/// Levelwise candidate generation with a full containment scan per
/// candidate. Items and transactions are packed into `u32` masks.
pub(super) fn mine(db: &TransactionDatabase, minsup: u64) -> Result<Vec<(Vec<u32>, u64)>> {
    let m = db.universe.len();
    if m > ORACLE_ITEM_LIMIT {
        return Err(Error::UniverseTooLarge {
            items: m,
            limit: ORACLE_ITEM_LIMIT,
        });
    }
    let masks: Vec<u32> = db
        .transactions
        .iter()
        .map(|t| t.iter().fold(0u32, |acc, &i| acc | (1 << i)))
        .collect();
    let count = |candidate: u32| masks.iter().filter(|&&t| t & candidate == candidate).count() as u64;

    let mut out = Vec::new();
    let mut level: Vec<u32> = (0..m as u32)
        .map(|i| 1u32 << i)
        .filter(|&c| count(c) >= minsup)
        .collect();

    while !level.is_empty() {
        for &c in &level {
            out.push((bits_of(c), count(c)));
        }
        let frequent: HashSet<u32> = level.iter().copied().collect();
        // join candidates that share everything but their highest item
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &c in &level {
            groups.entry(c & !highest_bit(c)).or_default().push(c);
        }
        let mut next = HashSet::new();
        for group in groups.values() {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    let joined = a | b;
                    let closed = bits_of(joined)
                        .iter()
                        .all(|&bit| frequent.contains(&(joined & !(1 << bit))));
                    if closed && count(joined) >= minsup {
                        next.insert(joined);
                    }
                }
            }
        }
        let mut next: Vec<u32> = next.into_iter().collect();
        next.sort_unstable();
        level = next;
    }
    Ok(out)
}

fn bits_of(mask: u32) -> Vec<u32> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

fn highest_bit(mask: u32) -> u32 {
    1 << (31 - mask.leading_zeros())
}
