//! Entity-table ingestion from CSV and relation output as JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::kernel::{Structure, Tuple};
use crate::semantics::Relation;

use super::workspace::Workspace;

/// Adds the rows of a CSV file to a structure as keys classified under
/// `entity`.
///
/// The header must name exactly the entity type's indices, in any order,
/// plus an optional `key` column. Without it, row `n` (counting data rows
/// from 1) gets the key `<entity>#<n>`. A key already in the structure is
/// reused if its tuple matches. Row numbers in errors count data rows from 1;
/// header problems are reported at row 0.
pub fn load_entity_table(
    csv_path: &Path,
    structure: &str,
    entity: &str,
    ws: &mut Workspace,
) -> Result<usize> {
    let file = csv_path.display().to_string();
    let fail = |row: usize, message: String| Error::Csv {
        file: file.clone(),
        row,
        message,
    };
    let decl = ws.structure(structure)?;
    let m = &decl.structure;
    let sig = m.schema().sig_of(entity)?.clone();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| fail(0, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| fail(0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut seen = BTreeSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(fail(0, format!("column `{h}` appears twice")));
        }
        if h != "key" && !sig.has_index(h) {
            return Err(fail(0, format!("extra column `{h}`: `{entity}` has signature {sig}")));
        }
    }
    for i in sig.index_names() {
        if !seen.contains(i) {
            return Err(fail(0, format!("missing column `{i}` for `{entity}`")));
        }
    }
    let key_col = header.iter().position(|h| h == "key");

    let mut universe = m.universe().clone();
    let mut classes: BTreeMap<String, BTreeSet<String>> = m.classification().clone();
    let mut explicit = BTreeSet::new();
    let mut rows = 0;
    for (n, record) in reader.records().enumerate() {
        let row = n + 1;
        let record = record.map_err(|e| fail(row, e.to_string()))?;
        let mut entries = Vec::new();
        for (c, value) in record.iter().enumerate() {
            let col = &header[c];
            if Some(c) == key_col {
                continue;
            }
            let sort = sig.sort_of(col).expect("header was checked");
            let extent = m.domain().extent(sort)?;
            if !extent.contains(value) {
                return Err(fail(
                    row,
                    format!("column `{col}`: value \"{value}\" is outside the extent of `{sort}`"),
                ));
            }
            entries.push((col.clone(), value.to_string()));
        }
        let tuple = Tuple::new(entries);
        let key = match key_col {
            Some(c) => {
                let k = record.get(c).unwrap_or_default().to_string();
                if !explicit.insert(k.clone()) {
                    return Err(fail(row, format!("duplicate key `{k}`")));
                }
                k
            }
            None => format!("{entity}#{row}"),
        };
        if let Ok(prev) = universe.tuple_of(&key) {
            if prev != &tuple {
                return Err(fail(
                    row,
                    format!("key `{key}` already has tuple {prev}, not {tuple}"),
                ));
            }
        }
        universe.insert(key.clone(), tuple);
        classes.entry(key).or_default().insert(entity.to_string());
        rows += 1;
    }
    let updated = Structure::new(m.schema().clone(), m.domain().clone(), universe, classes)?;
    ws.replace_structure(structure, updated)?;
    Ok(rows)
}

/// Canonical JSON for a relation: an array of objects keyed by index name,
/// rows in sorted order.
pub fn relation_json(r: &Relation) -> Value {
    Value::Array(r.rows.iter().map(tuple_json).collect())
}

pub fn tuple_json(t: &Tuple) -> Value {
    let mut obj = Map::new();
    for (i, v) in t.entries() {
        obj.insert(i.to_string(), Value::String(v.to_string()));
    }
    Value::Object(obj)
}
