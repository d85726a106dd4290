//! Frequent itemset mining over neighborhood transactions.
//!
//! [`mine_frequent_itemsets`] is a NegNodeset miner (prefix tree with
//! bitmap-coded nodes, set-enumeration search). [`mine_frequent_itemsets_oracle`]
//! is a plain levelwise Apriori used as a reference.

mod apriori;
mod negfin;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::neighborhood::{csv_field, TransactionSet};

pub use apriori::ORACLE_ITEM_LIMIT;

pub const DEFAULT_MINSUP_RELATIVE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemUniverse {
    items: Vec<String>,
    index: HashMap<String, u32>,
}

impl ItemUniverse {
    pub fn from_sorted(items: Vec<String>) -> Self {
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        ItemUniverse { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn token(&self, index: u32) -> &str {
        &self.items[index as usize]
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }
}

/// Multiset of transactions over a dense item universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDatabase {
    pub universe: ItemUniverse,
    /// Each transaction is a strictly ascending list of universe indices.
    pub transactions: Vec<Vec<u32>>,
}

impl TransactionDatabase {
    pub fn n(&self) -> usize {
        self.transactions.len()
    }

    /// Keeps only the given items (tokens absent from the universe are
    /// ignored); transactions left empty are retained so `n` is unchanged.
    pub fn restrict_to<S: AsRef<str>>(&self, keep: &[S]) -> TransactionDatabase {
        let kept: BTreeSet<&str> = keep
            .iter()
            .map(AsRef::as_ref)
            .filter(|t| self.universe.index_of(t).is_some())
            .collect();
        let universe = ItemUniverse::from_sorted(kept.iter().map(|s| (*s).to_owned()).collect());
        let transactions = self
            .transactions
            .iter()
            .map(|t| {
                t.iter()
                    .filter_map(|&i| universe.index_of(self.universe.token(i)))
                    .collect()
            })
            .collect();
        TransactionDatabase {
            universe,
            transactions,
        }
    }
}

/// Builds a database from item lists. Duplicate transactions are kept;
/// duplicate items within one transaction collapse.
pub fn build_database<I, T, S>(transactions: I) -> Result<TransactionDatabase>
where
    I: IntoIterator<Item = T>,
    T: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let raw: Vec<BTreeSet<String>> = transactions
        .into_iter()
        .map(|t| t.into_iter().map(|s| s.as_ref().to_owned()).collect())
        .collect();
    if raw.is_empty() {
        return Err(Error::EmptyInput("transaction database has no transactions".into()));
    }
    let tokens: BTreeSet<&String> = raw.iter().flatten().collect();
    let universe = ItemUniverse::from_sorted(tokens.into_iter().cloned().collect());
    let transactions = raw
        .iter()
        .map(|t| t.iter().map(|s| universe.index[s]).collect())
        .collect();
    Ok(TransactionDatabase {
        universe,
        transactions,
    })
}

pub fn database_from_transaction_set(ts: &TransactionSet) -> Result<TransactionDatabase> {
    build_database(ts.item_lists())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequentItemset {
    pub items: Vec<String>,
    pub support: u64,
    pub relative_support: f64,
}

impl FrequentItemset {
    pub fn key(&self) -> String {
        self.items.join(" ")
    }
}

/// Length first, then lexicographic over the token lists.
pub fn canonical_order(a: &[String], b: &[String]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Threshold {
    Relative(f64),
    Absolute(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    threshold: Threshold,
}

impl MiningParams {
    pub fn relative(minsup: f64) -> Result<Self> {
        if !(minsup > 0.0 && minsup <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "relative minimum support must be in (0, 1], got {minsup}"
            )));
        }
        Ok(MiningParams {
            threshold: Threshold::Relative(minsup),
        })
    }

    pub fn absolute(minsup: u64) -> Result<Self> {
        if minsup == 0 {
            return Err(Error::InvalidParameter(
                "absolute minimum support must be at least 1".into(),
            ));
        }
        Ok(MiningParams {
            threshold: Threshold::Absolute(minsup),
        })
    }

    pub fn minsup_relative(&self) -> Option<f64> {
        match self.threshold {
            Threshold::Relative(r) => Some(r),
            Threshold::Absolute(_) => None,
        }
    }

    /// Smallest count `c` with `c / n >= minsup_relative`.
    pub fn minsup_absolute(&self, n: usize) -> u64 {
        match self.threshold {
            Threshold::Absolute(c) => c,
            Threshold::Relative(rel) => {
                let n_f = n as f64;
                let mut c = (rel * n_f).ceil().max(1.0) as u64;
                while c > 1 && (c - 1) as f64 / n_f >= rel {
                    c -= 1;
                }
                while (c as f64) / n_f < rel {
                    c += 1;
                }
                c
            }
        }
    }
}

/// Absolute support; items missing from the universe give 0.
pub fn support<S: AsRef<str>>(db: &TransactionDatabase, itemset: &[S]) -> u64 {
    let mut indices = Vec::with_capacity(itemset.len());
    for token in itemset {
        match db.universe.index_of(token.as_ref()) {
            Some(i) => indices.push(i),
            None => return 0,
        }
    }
    indices.sort_unstable();
    indices.dedup();
    db.transactions
        .iter()
        .filter(|t| indices.iter().all(|i| t.binary_search(i).is_ok()))
        .count() as u64
}

pub fn relative_support<S: AsRef<str>>(db: &TransactionDatabase, itemset: &[S]) -> f64 {
    support(db, itemset) as f64 / db.n() as f64
}

fn finish(db: &TransactionDatabase, raw: Vec<(Vec<u32>, u64)>) -> Vec<FrequentItemset> {
    let n = db.n() as f64;
    let mut out: Vec<FrequentItemset> = raw
        .into_iter()
        .map(|(mut idx, support)| {
            idx.sort_unstable();
            FrequentItemset {
                items: idx.iter().map(|&i| db.universe.token(i).to_owned()).collect(),
                support,
                relative_support: support as f64 / n,
            }
        })
        .collect();
    out.sort_by(|a, b| canonical_order(&a.items, &b.items));
    out
}

/// All non-empty itemsets with support at or above the threshold, in
/// canonical order.
pub fn mine_frequent_itemsets(db: &TransactionDatabase, params: &MiningParams) -> Vec<FrequentItemset> {
    let minsup = params.minsup_absolute(db.n());
    finish(db, negfin::mine(db, minsup))
}

/// Levelwise reference miner; refuses universes above [`ORACLE_ITEM_LIMIT`].
pub fn mine_frequent_itemsets_oracle(
    db: &TransactionDatabase,
    params: &MiningParams,
) -> Result<Vec<FrequentItemset>> {
    let minsup = params.minsup_absolute(db.n());
    Ok(finish(db, apriori::mine(db, minsup)?))
}

pub fn format_itemsets_csv(itemsets: &[FrequentItemset]) -> String {
    let mut out = String::from("itemset,support,relative_support\n");
    for fi in itemsets {
        let _ = writeln!(
            out,
            "{},{},{:.6}",
            csv_field(&fi.key()),
            fi.support,
            fi.relative_support
        );
    }
    out
}

pub fn write_itemsets_csv(itemsets: &[FrequentItemset], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_itemsets_csv(itemsets)).map_err(|e| Error::io(path, e))
}

/// Reads an itemset CSV. Relative supports come back at printed precision.
pub fn read_itemsets_csv(path: impl AsRef<Path>) -> Result<Vec<FrequentItemset>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_itemsets_csv(&text).map_err(|m| Error::malformed(path, m))
}

pub fn parse_itemsets_csv(text: &str) -> std::result::Result<Vec<FrequentItemset>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("itemset,support,relative_support") => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.rsplitn(3, ',');
        let (rel, sup, key) = match (fields.next(), fields.next(), fields.next()) {
            (Some(r), Some(s), Some(k)) => (r, s, k),
            _ => return Err(format!("line {}: expected 3 fields", lineno + 2)),
        };
        let key = key.trim_matches('"');
        let support = sup
            .parse::<u64>()
            .map_err(|e| format!("line {}: support: {e}", lineno + 2))?;
        let relative_support = rel
            .parse::<f64>()
            .map_err(|e| format!("line {}: relative_support: {e}", lineno + 2))?;
        let items: Vec<String> = key.split_whitespace().map(str::to_owned).collect();
        if items.is_empty() {
            return Err(format!("line {}: empty itemset", lineno + 2));
        }
        if !seen.insert(key.to_owned()) {
            return Err(format!("line {}: duplicate itemset {key:?}", lineno + 2));
        }
        out.push(FrequentItemset {
            items,
            support,
            relative_support,
        });
    }
    Ok(out)
}
