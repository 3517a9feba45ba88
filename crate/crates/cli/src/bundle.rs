use serde::{Deserialize, Serialize};

/// A named numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(with = "cells")]
    pub rows: Vec<Vec<f64>>,
}

/// JSON has no NaN or infinity; those travel as strings.
mod cells {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Vec<Cell>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| if v.is_finite() { Cell::Num(v) } else { Cell::Text(v.to_string()) })
                    .collect()
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let raw: Vec<Vec<Cell>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|c| match c {
                        Cell::Num(v) => Ok(v),
                        Cell::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom),
                    })
                    .collect()
            })
            .collect()
    }
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub run: String,
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// What the analysis reference is.
    pub reference: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: Metadata,
    pub tables: Vec<Table>,
}

impl ResultBundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Equality ignoring wall time, with NaN equal to itself.
    pub fn same_results(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.metadata.wall_time_s = other.metadata.wall_time_s;
        serde_json::to_string(&a).ok() == serde_json::to_string(other).ok()
    }
}

pub const REFERENCE_NOTE: &str = "analysis reference is a brute-force superposition of exact electric and \
magnetic dipole fields over sub-sampled cells, self-converged in the sampling order; no full-wave solver is involved";
