//! Raw records, protected-group definitions and numeric encoding.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ColumnBuilder, FeatureMatrix};

/// Literal used by the source data for a missing value.
pub const MISSING: &str = "?";

/// One parsed record; cells are stored back to back in a single buffer.
#[derive(Debug, Clone, PartialEq)]
struct Record {
    text: String,
    ends: Vec<u32>,
}

impl Record {
    fn cell(&self, i: usize) -> &str {
        let start = if i == 0 { 0 } else { self.ends[i - 1] as usize };
        &self.text[start..self.ends[i] as usize]
    }
}

/// Text-valued table, no type coercion applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    column_names: Vec<String>,
    rows: Vec<Record>,
}

impl RecordTable {
    pub fn new<S: Into<String>>(column_names: impl IntoIterator<Item = S>) -> Result<Self> {
        let column_names: Vec<String> = column_names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        Ok(Self { column_names, rows: Vec::new() })
    }

    /// Builds a table from literal rows; handy in tests.
    pub fn from_rows(columns: &[&str], rows: &[&[&str]]) -> Result<Self> {
        let mut table = Self::new(columns.iter().copied())?;
        for row in rows {
            table.push_row(row.iter().copied())?;
        }
        Ok(table)
    }

    pub fn push_row<'a>(&mut self, cells: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let mut text = String::new();
        let mut ends = Vec::with_capacity(self.column_names.len());
        for cell in cells {
            text.push_str(cell);
            ends.push(text.len() as u32);
        }
        if ends.len() != self.column_names.len() {
            return Err(Error::RaggedRow {
                row: self.rows.len(),
                expected: self.column_names.len(),
                found: ends.len(),
            });
        }
        self.rows.push(Record { text, ends });
        Ok(())
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn cell(&self, row: usize, col: usize) -> &str {
        self.rows[row].cell(col)
    }

    pub fn column(&self, name: &str) -> Result<impl Iterator<Item = &str> + '_> {
        let c = self.column_index(name)?;
        Ok(self.rows.iter().map(move |r| r.cell(c)))
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = &str> + '_ {
        let r = &self.rows[row];
        (0..r.ends.len()).map(move |i| r.cell(i))
    }

    /// Drops every row whose `column` value is in `values`; returns how many went.
    pub fn exclude_rows(&mut self, column: &str, values: &[String]) -> Result<usize> {
        let c = self.column_index(column)?;
        let before = self.rows.len();
        self.rows.retain(|r| !values.iter().any(|v| v == r.cell(c)));
        Ok(before - self.rows.len())
    }
}

/// Membership test over the raw text of a protected attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    OneOf(Vec<String>),
    NotOneOf(Vec<String>),
    /// Value is an interval bin such as `[20,30)` whose midpoint is at least the bound.
    BinMidpointAtLeast(f64),
    BinMidpointBelow(f64),
}

impl Predicate {
    fn is_bin(&self) -> bool {
        matches!(self, Self::BinMidpointAtLeast(_) | Self::BinMidpointBelow(_))
    }

    fn matches(&self, value: &str, midpoint: Option<f64>) -> bool {
        match self {
            Self::OneOf(set) => set.iter().any(|v| v == value),
            Self::NotOneOf(set) => !set.iter().any(|v| v == value),
            Self::BinMidpointAtLeast(t) => midpoint.is_some_and(|m| m >= *t),
            Self::BinMidpointBelow(t) => midpoint.is_some_and(|m| m < *t),
        }
    }
}

/// Parses `[lo,hi)` or `[lo-hi)` and returns the midpoint.
pub fn bin_midpoint(value: &str) -> Option<f64> {
    let inner = value.trim().strip_prefix('[')?.strip_suffix(')')?;
    let sep = inner.find(',').or_else(|| inner.get(1..)?.find('-').map(|i| i + 1))?;
    let lo: f64 = inner[..sep].trim().parse().ok()?;
    let hi: f64 = inner[sep + 1..].trim().parse().ok()?;
    (lo <= hi).then(|| (lo + hi) / 2.0)
}

/// Privileged/unprivileged definition for one protected attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub attribute: String,
    pub privileged: Predicate,
    pub unprivileged: Predicate,
    #[serde(default)]
    pub favorable_label: u8,
}

impl GroupSpec {
    pub fn age() -> Self {
        Self {
            name: "age".into(),
            attribute: "age".into(),
            privileged: Predicate::BinMidpointAtLeast(25.0),
            unprivileged: Predicate::BinMidpointBelow(25.0),
            favorable_label: 0,
        }
    }

    pub fn gender() -> Self {
        Self {
            name: "gender".into(),
            attribute: "gender".into(),
            privileged: Predicate::OneOf(vec!["Male".into()]),
            unprivileged: Predicate::OneOf(vec!["Female".into()]),
            favorable_label: 0,
        }
    }

    pub fn race() -> Self {
        Self {
            name: "race".into(),
            attribute: "race".into(),
            privileged: Predicate::NotOneOf(vec!["AfricanAmerican".into(), MISSING.into()]),
            unprivileged: Predicate::OneOf(vec!["AfricanAmerican".into()]),
            favorable_label: 0,
        }
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::age(), Self::gender(), Self::race()]
    }

    pub fn with_favorable(mut self, label: u8) -> Self {
        self.favorable_label = label;
        self
    }

    /// Checks the label and that the two predicates cannot both match a value.
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidGroupSpec { name: self.name.clone(), reason: reason.into() };
        if self.favorable_label > 1 {
            return Err(invalid("favorable_label must be 0 or 1"));
        }
        use Predicate::*;
        let disjoint = match (&self.privileged, &self.unprivileged) {
            (OneOf(a), OneOf(b)) => a.iter().all(|v| !b.contains(v)),
            (OneOf(a), NotOneOf(b)) | (NotOneOf(b), OneOf(a)) => a.iter().all(|v| b.contains(v)),
            (BinMidpointAtLeast(hi), BinMidpointBelow(lo)) | (BinMidpointBelow(lo), BinMidpointAtLeast(hi)) => lo <= hi,
            _ => false,
        };
        if !disjoint {
            return Err(invalid("privileged and unprivileged predicates overlap or cannot be shown disjoint"));
        }
        Ok(())
    }
}

/// Maps the readmission column to `1` for `<30`, `0` for `>30` and `NO`.
pub fn derive_label(table: &RecordTable, column: &str) -> Result<Vec<u8>> {
    table
        .column(column)?
        .enumerate()
        .map(|(row, v)| {
            let t = v.trim();
            if t == "<30" {
                Ok(1)
            } else if t == ">30" || t.eq_ignore_ascii_case("no") {
                Ok(0)
            } else {
                Err(Error::UnknownLabel { row, value: v.to_string() })
            }
        })
        .collect()
}

/// Binary group membership (1 = privileged) and a mask of rows matching neither predicate.
pub fn binarize_protected(table: &RecordTable, spec: &GroupSpec) -> Result<(Vec<u8>, Vec<bool>)> {
    spec.validate()?;
    let needs_bins = spec.privileged.is_bin() || spec.unprivileged.is_bin();
    let n = table.n_rows();
    let mut values = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for (row, v) in table.column(&spec.attribute)?.enumerate() {
        let mid = if needs_bins {
            Some(bin_midpoint(v).ok_or_else(|| Error::BadAgeBin { row, value: v.to_string() })?)
        } else {
            None
        };
        if spec.privileged.matches(v, mid) {
            values.push(1);
            mask.push(false);
        } else if spec.unprivileged.matches(v, mid) {
            values.push(0);
            mask.push(false);
        } else {
            values.push(0);
            mask.push(true);
        }
    }
    Ok((values, mask))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedColumn {
    pub name: String,
    pub favorable_label: u8,
    /// 1 = privileged, 0 = unprivileged; meaningless where `missing` is set.
    pub values: Vec<u8>,
    pub missing: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeConfig {
    pub id_columns: Vec<String>,
    pub label_column: String,
    pub numeric_columns: Vec<String>,
    pub group_specs: Vec<GroupSpec>,
    pub include_protected: bool,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self {
            id_columns: vec!["encounter_id".into(), "patient_nbr".into()],
            label_column: "readmitted".into(),
            numeric_columns: [
                "time_in_hospital",
                "num_lab_procedures",
                "num_procedures",
                "num_medications",
                "number_outpatient",
                "number_emergency",
                "number_inpatient",
                "number_diagnoses",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            group_specs: GroupSpec::defaults(),
            include_protected: true,
        }
    }
}

/// Numeric features, labels, protected columns and per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: FeatureMatrix,
    pub feature_names: Vec<String>,
    pub labels: Vec<u8>,
    pub protected: Vec<ProtectedColumn>,
    pub weights: Vec<f64>,
    pub row_ids: Vec<String>,
}

impl EncodedDataset {
    /// Assembles a dataset with unit weights and positional row ids.
    pub fn new(features: FeatureMatrix, labels: Vec<u8>, protected: Vec<ProtectedColumn>) -> Result<Self> {
        let n = labels.len();
        let data = Self {
            feature_names: (0..features.n_cols()).map(|i| format!("x{i}")).collect(),
            features,
            labels,
            protected,
            weights: vec![1.0; n],
            row_ids: (0..n).map(|i| i.to_string()).collect(),
        };
        data.validate()?;
        Ok(data)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        let check = |found: usize| {
            if found == n {
                Ok(())
            } else {
                Err(Error::LengthMismatch { expected: n, found })
            }
        };
        check(self.features.n_rows())?;
        check(self.weights.len())?;
        check(self.row_ids.len())?;
        if self.feature_names.len() != self.features.n_cols() {
            return Err(Error::LengthMismatch { expected: self.features.n_cols(), found: self.feature_names.len() });
        }
        ensure_binary(&self.labels)?;
        for p in &self.protected {
            check(p.values.len())?;
            check(p.missing.len())?;
            ensure_binary(&p.values)?;
        }
        if let Some(i) = self.weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig(format!("weight at row {i} is not a positive finite number")));
        }
        Ok(())
    }

    pub fn protected(&self, name: &str) -> Result<&ProtectedColumn> {
        self.protected
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownGroupSpec(name.to_string()))
    }

    /// Rows `idx` in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let pick = |v: &[u8]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            features: self.features.select_rows(idx),
            feature_names: self.feature_names.clone(),
            labels: pick(&self.labels),
            protected: self
                .protected
                .iter()
                .map(|p| ProtectedColumn {
                    name: p.name.clone(),
                    favorable_label: p.favorable_label,
                    values: pick(&p.values),
                    missing: idx.iter().map(|&i| p.missing[i]).collect(),
                })
                .collect(),
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            row_ids: idx.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    pub fn with_unit_weights(mut self) -> Self {
        self.weights.iter_mut().for_each(|w| *w = 1.0);
        self
    }
}

pub(crate) fn ensure_binary(v: &[u8]) -> Result<()> {
    match v.iter().position(|&x| x > 1) {
        Some(index) => Err(Error::NotBinary { index, value: v[index] }),
        None => Ok(()),
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { (values[m - 1] + values[m]) / 2.0 })
}

/// Encodes a table: numeric columns parsed (missing → column median), every
/// other kept column one-hot encoded with one indicator per observed value.
pub fn encode_features(table: &RecordTable, config: &EncodeConfig) -> Result<EncodedDataset> {
    let labels = derive_label(table, &config.label_column)?;
    let mut protected = Vec::with_capacity(config.group_specs.len());
    for spec in &config.group_specs {
        let (values, missing) = binarize_protected(table, spec)?;
        protected.push(ProtectedColumn { name: spec.name.clone(), favorable_label: spec.favorable_label, values, missing });
    }
    for col in &config.numeric_columns {
        table.column_index(col)?;
    }

    let mut dropped: BTreeSet<&str> = config.id_columns.iter().map(String::as_str).collect();
    dropped.insert(config.label_column.as_str());
    if !config.include_protected {
        dropped.extend(config.group_specs.iter().map(|s| s.attribute.as_str()));
    }
    let numeric: BTreeSet<&str> = config.numeric_columns.iter().map(String::as_str).collect();

    let n = table.n_rows();
    let mut feature_names = Vec::new();
    // (source column, first feature index, optional category map)
    let mut plan: Vec<(usize, usize, Option<BTreeMap<&str, usize>>)> = Vec::new();
    let mut numeric_values: BTreeMap<usize, Vec<f64>> = BTreeMap::new();

    for (c, name) in table.column_names().iter().enumerate() {
        if dropped.contains(name.as_str()) {
            continue;
        }
        let first = feature_names.len();
        if numeric.contains(name.as_str()) {
            let mut parsed = Vec::with_capacity(n);
            let mut observed = Vec::with_capacity(n);
            for row in 0..n {
                let raw = table.cell(row, c).trim();
                if raw == MISSING || raw.is_empty() {
                    parsed.push(f64::NAN);
                } else {
                    let v: f64 = raw.parse().map_err(|_| Error::NumericParse {
                        column: name.clone(),
                        row,
                        value: raw.to_string(),
                    })?;
                    parsed.push(v);
                    observed.push(v);
                }
            }
            let fill = median(&mut observed).unwrap_or(0.0);
            parsed.iter_mut().filter(|v| v.is_nan()).for_each(|v| *v = fill);
            numeric_values.insert(c, parsed);
            feature_names.push(name.clone());
            plan.push((c, first, None));
        } else {
            let categories: BTreeSet<&str> = (0..n).map(|row| table.cell(row, c)).collect();
            let map: BTreeMap<&str, usize> = categories.iter().enumerate().map(|(i, &v)| (v, first + i)).collect();
            feature_names.extend(categories.iter().map(|v| format!("{name}={v}")));
            plan.push((c, first, Some(map)));
        }
    }

    let mut builder = ColumnBuilder::new(n, feature_names.len());
    for (c, first, categories) in &plan {
        match categories {
            None => {
                for (row, &v) in numeric_values[c].iter().enumerate() {
                    builder.push(row, *first, v);
                }
            }
            Some(map) => {
                for row in 0..n {
                    builder.push(row, map[table.cell(row, *c)], 1.0);
                }
            }
        }
    }

    let row_ids = match config.id_columns.iter().find_map(|c| table.column_index(c).ok()) {
        Some(c) => (0..n).map(|row| table.cell(row, c).to_string()).collect(),
        None => (0..n).map(|row| row.to_string()).collect(),
    };

    let data = EncodedDataset {
        features: builder.finish(),
        feature_names,
        labels,
        protected,
        weights: vec![1.0; n],
        row_ids,
    };
    data.validate()?;
    Ok(data)
}

/// Label-stratified train/test partition. Both sides keep the input row order.
pub fn split(data: &EncodedDataset, test_fraction: f64, seed: u64) -> Result<(EncodedDataset, EncodedDataset)> {
    let (train, test) = split_indices(&data.labels, test_fraction, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

pub fn split_indices(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    ensure_binary(labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; labels.len()];
    for label in 0..=1u8 {
        let mut stratum: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let size = stratum.len();
        if size == 0 {
            continue;
        }
        let mut take = libm::round(test_fraction * size as f64) as usize;
        if test_fraction > 0.0 && test_fraction < 1.0 {
            if size < 2 {
                return Err(Error::StratumTooSmall { label, size });
            }
            take = take.clamp(1, size - 1);
        }
        stratum.shuffle(&mut rng);
        for &i in &stratum[..take] {
            is_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| is_test[i]);
    Ok((train, test))
}
