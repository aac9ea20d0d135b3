use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Replaces each category by its relative frequency in the column.
///
/// The denominator is the full column length, nulls included, so every
/// encoded value lies in `(0, 1]`. Nulls stay null.
pub fn frequency_encode<T: Hash + Eq>(column: &[Option<T>]) -> Result<Vec<Option<f64>>> {
    if column.is_empty() {
        return Err(Error::invalid("cannot frequency-encode an empty column"));
    }
    let mut counts: FxHashMap<&T, usize> = FxHashMap::default();
    for v in column.iter().flatten() {
        *counts.entry(v).or_default() += 1;
    }
    let n = column.len() as f64;
    Ok(column
        .iter()
        .map(|v| v.as_ref().map(|v| counts[v] as f64 / n))
        .collect())
}
