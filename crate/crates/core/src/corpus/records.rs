use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const RECORD_COLUMNS: [&str; 7] = [
    "id",
    "title",
    "product",
    "priority",
    "type",
    "depends_on",
    "see_also",
];

/// One issue-tracker enhancement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementRecord {
    pub id: String,
    pub title: String,
    pub product: String,
    pub priority: String,
    pub issue_type: String,
    pub depends_on: Vec<String>,
    pub see_also: Vec<String>,
}

impl RequirementRecord {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        RequirementRecord {
            id: id.into(),
            title: title.into(),
            product: String::new(),
            priority: String::new(),
            issue_type: String::new(),
            depends_on: Vec::new(),
            see_also: Vec::new(),
        }
    }
}

fn parse_links(cell: &str, own_id: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    cell.split(';')
        .map(str::trim)
        .filter(|id| !id.is_empty() && *id != own_id)
        .filter(|id| seen.insert(id.to_string()))
        .map(str::to_string)
        .collect()
}

/// Reads a records CSV (`id,title,product,priority,type,depends_on,see_also`).
///
/// Column order is free; link cells hold semicolon-separated ids. Self links
/// are dropped.
pub fn load_records<R: Read>(source: R) -> Result<Vec<RequirementRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut columns = [0usize; 7];
    for (slot, name) in columns.iter_mut().zip(RECORD_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut ids = HashSet::new();
    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let row_no = row + 2;
        let rec = result?;
        let cell = |i: usize| rec.get(columns[i]).unwrap_or("");
        let id = cell(0).trim().to_string();
        if id.is_empty() {
            return Err(Error::Integrity(format!("row {row_no}: empty id")));
        }
        if !ids.insert(id.clone()) {
            return Err(Error::Integrity(format!(
                "row {row_no}: duplicate id `{id}`"
            )));
        }
        records.push(RequirementRecord {
            title: cell(1).to_string(),
            product: cell(2).to_string(),
            priority: cell(3).to_string(),
            issue_type: cell(4).to_string(),
            depends_on: parse_links(cell(5), &id),
            see_also: parse_links(cell(6), &id),
            id,
        });
    }
    Ok(records)
}

pub fn load_records_path(path: impl AsRef<Path>) -> Result<Vec<RequirementRecord>> {
    load_records(File::open(path)?)
}

pub fn write_records<W: Write>(sink: W, records: &[RequirementRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(RECORD_COLUMNS)?;
    for r in records {
        writer.write_record([
            r.id.as_str(),
            &r.title,
            &r.product,
            &r.priority,
            &r.issue_type,
            &r.depends_on.join(";"),
            &r.see_also.join(";"),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
