//! Cities x frequent-itemsets matrix of relative supports.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fim::FrequentItemset;
use crate::neighborhood::csv_field;

/// Canonical column label: tokens sorted and joined by single spaces.
pub fn fi_key<S: AsRef<str>>(itemset: &[S]) -> Result<String> {
    if itemset.is_empty() {
        return Err(Error::InvalidParameter("itemset key of an empty itemset".into()));
    }
    let mut tokens: Vec<&str> = itemset.iter().map(AsRef::as_ref).collect();
    tokens.sort_unstable();
    Ok(tokens.join(" "))
}

fn key_order(a: &str, b: &str) -> Ordering {
    let ta: Vec<&str> = a.split(' ').collect();
    let tb: Vec<&str> = b.split(' ').collect();
    ta.len().cmp(&tb.len()).then_with(|| ta.cmp(&tb))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CityFIMatrix {
    pub city_names: Vec<String>,
    pub fi_columns: Vec<String>,
    /// Row-major, `city_names.len() * fi_columns.len()`.
    pub values: Vec<f64>,
}

impl CityFIMatrix {
    pub fn rows(&self) -> usize {
        self.city_names.len()
    }

    pub fn cols(&self) -> usize {
        self.fi_columns.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.values[r * c..(r + 1) * c]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn get(&self, city: &str, key: &str) -> Option<f64> {
        let r = self.city_names.iter().position(|c| c == city)?;
        let c = self.fi_columns.iter().position(|k| k == key)?;
        Some(self.values[r * self.cols() + c])
    }
}

/// Merges per-city mining results. Rows are sorted by city name, columns by
/// itemset length then token order; absent itemsets are 0.
pub fn merge_city_fis<'a, I, S>(results: I) -> Result<CityFIMatrix>
where
    I: IntoIterator<Item = (S, &'a [FrequentItemset])>,
    S: AsRef<str>,
{
    let mut per_city: BTreeMap<String, HashMap<String, f64>> = BTreeMap::new();
    for (city, fis) in results {
        let city = city.as_ref().to_owned();
        let mut cells = HashMap::with_capacity(fis.len());
        for fi in fis {
            let key = fi_key(&fi.items)?;
            if cells.insert(key.clone(), fi.relative_support).is_some() {
                return Err(Error::DuplicateItemset { city, key });
            }
        }
        if per_city.insert(city.clone(), cells).is_some() {
            return Err(Error::InvalidParameter(format!("city {city} listed twice")));
        }
    }
    if per_city.is_empty() {
        return Err(Error::EmptyInput("no cities to merge".into()));
    }

    let mut columns: Vec<String> = per_city
        .values()
        .flat_map(|cells| cells.keys().cloned())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    columns.sort_by(|a, b| key_order(a, b));

    let mut values = Vec::with_capacity(per_city.len() * columns.len());
    for cells in per_city.values() {
        values.extend(columns.iter().map(|k| cells.get(k).copied().unwrap_or(0.0)));
    }
    Ok(CityFIMatrix {
        city_names: per_city.into_keys().collect(),
        fi_columns: columns,
        values,
    })
}

/// Keeps the columns whose maximum over cities reaches `min_relative_support`.
pub fn filter_columns(matrix: &CityFIMatrix, min_relative_support: f64) -> Result<CityFIMatrix> {
    if !(0.0..=1.0).contains(&min_relative_support) {
        return Err(Error::InvalidParameter(format!(
            "column threshold must be in [0, 1], got {min_relative_support}"
        )));
    }
    let cols = matrix.cols();
    let keep: Vec<usize> = (0..cols)
        .filter(|&c| {
            (0..matrix.rows()).any(|r| matrix.values[r * cols + c] >= min_relative_support)
        })
        .collect();
    let mut values = Vec::with_capacity(matrix.rows() * keep.len());
    for r in 0..matrix.rows() {
        values.extend(keep.iter().map(|&c| matrix.values[r * cols + c]));
    }
    Ok(CityFIMatrix {
        city_names: matrix.city_names.clone(),
        fi_columns: keep.iter().map(|&c| matrix.fi_columns[c].clone()).collect(),
        values,
    })
}

pub fn format_matrix_csv(matrix: &CityFIMatrix) -> String {
    let mut out = String::from("city");
    for key in &matrix.fi_columns {
        out.push(',');
        out.push_str(&csv_field(key));
    }
    out.push('\n');
    for (r, city) in matrix.city_names.iter().enumerate() {
        out.push_str(&csv_field(city));
        for v in matrix.row(r) {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(matrix: &CityFIMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix_csv(matrix)).map_err(|e| Error::io(path, e))
}

pub fn parse_matrix_csv(text: &str) -> std::result::Result<CityFIMatrix, String> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header = lines.next().ok_or("empty matrix file")?;
    let mut header_fields = header.split(',');
    if header_fields.next() != Some("city") {
        return Err("matrix header must start with `city`".into());
    }
    let fi_columns: Vec<String> = header_fields.map(str::to_owned).collect();
    let mut city_names = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let city = fields.next().unwrap_or_default().trim_matches('"');
        let row: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<std::result::Result<_, _>>()?;
        if row.len() != fi_columns.len() {
            return Err(format!(
                "row {} has {} values, header has {} columns",
                i + 1,
                row.len(),
                fi_columns.len()
            ));
        }
        city_names.push(city.to_owned());
        values.extend(row);
    }
    if city_names.is_empty() {
        return Err("matrix has no rows".into());
    }
    Ok(CityFIMatrix {
        city_names,
        fi_columns,
        values,
    })
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<CityFIMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text).map_err(|m| Error::malformed(path, m))
}
