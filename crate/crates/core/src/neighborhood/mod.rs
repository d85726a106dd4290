//! Neighborhood transactions: each polygon becomes the set of its own
//! land-use code plus the codes of every polygon within the buffer distance.
//!
//! The buffer is evaluated as a distance predicate (`polygon_distance <= d`),
//! which is exact for a closed Euclidean buffer and avoids building
//! arc-approximated buffer polygons.

mod distance;
mod index;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::LandUseLayer;

pub use distance::polygon_distance;
pub use index::SpatialIndex;

pub const DEFAULT_BUFFER_DISTANCE: f64 = 100.0;

pub fn build_spatial_index(layer: &LandUseLayer) -> SpatialIndex<'_> {
    SpatialIndex::build(layer)
}

/// Canonical transaction: items strictly ascending, own code included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub source_id: String,
    pub items: Vec<String>,
}

impl Transaction {
    pub fn new<I, S>(source_id: impl Into<String>, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = items.into_iter().map(Into::into).collect();
        Transaction {
            source_id: source_id.into(),
            items: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_subset_of(&self, other: &Transaction) -> bool {
        // both sorted
        let mut rest = other.items.iter();
        self.items.iter().all(|x| rest.any(|y| y == x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransactionSet {
    pub city_name: String,
    pub buffer_distance: f64,
    pub transactions: Vec<Transaction>,
}

impl TransactionSet {
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn item_lists(&self) -> impl Iterator<Item = &[String]> {
        self.transactions.iter().map(|t| t.items.as_slice())
    }

    /// Sorted union of all item tokens.
    pub fn items(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self
            .transactions
            .iter()
            .flat_map(|t| t.items.iter().map(String::as_str))
            .collect();
        set.into_iter().collect()
    }
}

/// One transaction per layer feature, in layer order.
pub fn extract_transactions(layer: &LandUseLayer, d: f64) -> Result<TransactionSet> {
    index::check_distance(d)?;
    let idx = SpatialIndex::build(layer);
    let transactions = (0..layer.len())
        .into_par_iter()
        .map(|pos| {
            let own = &layer.features[pos];
            let neighbors = idx.neighbor_positions(pos, d)?;
            let codes = std::iter::once(own.code.as_str())
                .chain(neighbors.iter().map(|&n| layer.features[n].code.as_str()));
            Ok(Transaction::new(own.id.clone(), codes))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransactionSet {
        city_name: layer.city_name.clone(),
        buffer_distance: d,
        transactions,
    })
}

/// Space-separated items, one transaction per LF-terminated line, no ids.
pub fn format_transactions(ts: &TransactionSet) -> String {
    let mut out = String::new();
    for t in &ts.transactions {
        out.push_str(&t.items.join(" "));
        out.push('\n');
    }
    out
}

pub fn export_transactions(ts: &TransactionSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_transactions(ts)).map_err(|e| Error::io(path, e))
}

/// Parses the transactions text format. Blank lines are skipped; items on a
/// line are deduplicated and sorted.
pub fn parse_transactions(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| {
            let set: BTreeSet<&str> = line.split_whitespace().collect();
            set.into_iter().map(str::to_owned).collect::<Vec<_>>()
        })
        .filter(|items| !items.is_empty())
        .collect()
}

pub fn read_transactions(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_transactions(&text))
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Presence/absence table: `source_id` then one 0/1 column per item.
pub fn format_dichotomous(ts: &TransactionSet) -> String {
    let items = ts.items();
    let mut out = String::from("source_id");
    for item in &items {
        out.push(',');
        out.push_str(&csv_field(item));
    }
    out.push('\n');
    for t in &ts.transactions {
        out.push_str(&csv_field(&t.source_id));
        for item in &items {
            let present = t.items.binary_search_by(|x| x.as_str().cmp(item)).is_ok();
            let _ = write!(out, ",{}", u8::from(present));
        }
        out.push('\n');
    }
    out
}

pub fn export_dichotomous(ts: &TransactionSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_dichotomous(ts)).map_err(|e| Error::io(path, e))
}
