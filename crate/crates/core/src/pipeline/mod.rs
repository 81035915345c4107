//! Missing-value imputation, colour normalization and one-hot encoding,
//! fitted on a training table and applied to any table with the same
//! feature columns.

mod color;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    CellValue, ColumnKind, ColumnRole, ColumnSchema, DataTable, Schema, BRAND, COLOUR,
    MANUFACTURER, PRICE, PRODUCTS, SHIPMENT, WEIGHT_POUNDS,
};
use crate::matrix::FeatureMatrix;

pub use color::{normalize_color, ColorLexicon, COLOURFUL, COMPOSITE};

/// Token used when both columns of a cross-filled pair are missing.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot fit the pipeline on an empty training table")]
    EmptyTrain,
    #[error("table does not match the fitted schema: {0}")]
    SchemaMismatch(String),
    #[error("invalid imputation plan: {0}")]
    InvalidPlan(String),
    #[error("invalid colour lexicon: {0}")]
    InvalidLexicon(String),
}

/// How one column's missing cells are filled before encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum ColumnStrategy {
    /// Numeric: missing means zero. Categorical: missing encodes as an
    /// all-zero indicator block.
    ZeroFill,
    /// Categorical: take the partner column's value, then [`UNKNOWN`].
    CrossFill { partner: String },
    /// Numeric: mean over training rows with the same brand and product,
    /// then the same product, then all rows, then zero.
    HierarchicalMean { brand: String, product: String },
    /// Categorical: [`normalize_color`], missing encodes as all zeros.
    ColorNormalize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub column: String,
    #[serde(flatten)]
    pub strategy: ColumnStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImputationPlan {
    entries: Vec<PlanEntry>,
}

impl ImputationPlan {
    pub fn new(entries: Vec<PlanEntry>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn strategy(&self, column: &str) -> Option<&ColumnStrategy> {
        self.entries
            .iter()
            .find(|e| e.column == column)
            .map(|e| &e.strategy)
    }

    /// The listing rules for columns of the product-listing schema; every
    /// other column (or one whose partner columns are absent) is zero-filled.
    pub fn default_for(schema: &Schema) -> Self {
        let has = |name: &str, kind: ColumnKind| {
            schema
                .column(name)
                .is_some_and(|c| c.kind == kind && c.role == ColumnRole::Feature)
        };
        let cat = ColumnKind::Categorical;
        let hierarchical = || {
            if has(BRAND, cat) && has(PRODUCTS, cat) {
                ColumnStrategy::HierarchicalMean {
                    brand: BRAND.into(),
                    product: PRODUCTS.into(),
                }
            } else {
                ColumnStrategy::ZeroFill
            }
        };
        let entries = schema
            .columns()
            .iter()
            .map(|c| {
                let strategy = match (c.name.as_str(), c.kind, c.role) {
                    (_, _, ColumnRole::Target) => ColumnStrategy::ZeroFill,
                    (BRAND, ColumnKind::Categorical, _) if has(MANUFACTURER, cat) => {
                        ColumnStrategy::CrossFill {
                            partner: MANUFACTURER.into(),
                        }
                    }
                    (MANUFACTURER, ColumnKind::Categorical, _) if has(BRAND, cat) => {
                        ColumnStrategy::CrossFill {
                            partner: BRAND.into(),
                        }
                    }
                    (COLOUR, ColumnKind::Categorical, _) => ColumnStrategy::ColorNormalize,
                    (PRICE | SHIPMENT | WEIGHT_POUNDS, ColumnKind::Numeric, _) => hierarchical(),
                    _ => ColumnStrategy::ZeroFill,
                };
                PlanEntry {
                    column: c.name.clone(),
                    strategy,
                }
            })
            .collect();
        Self { entries }
    }

    /// Every feature column has exactly one strategy that suits its kind, and
    /// the target is zero-filled.
    pub fn validate(&self, schema: &Schema) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::InvalidPlan(msg));
        for entry in &self.entries {
            if schema.column(&entry.column).is_none() {
                return fail(format!("column {:?} is not in the schema", entry.column));
            }
        }
        let categorical_feature = |name: &str| {
            schema
                .column(name)
                .is_some_and(|c| c.kind == ColumnKind::Categorical && c.role == ColumnRole::Feature)
        };
        for column in schema.columns() {
            let found: Vec<_> = self
                .entries
                .iter()
                .filter(|e| e.column == column.name)
                .collect();
            let [entry] = found.as_slice() else {
                return fail(format!(
                    "column {:?} has {} strategies, expected one",
                    column.name,
                    found.len()
                ));
            };
            let ok = match (&entry.strategy, column.kind, column.role) {
                (ColumnStrategy::ZeroFill, _, _) => true,
                (_, _, ColumnRole::Target) => false,
                (ColumnStrategy::CrossFill { partner }, ColumnKind::Categorical, _) => {
                    partner != &column.name && categorical_feature(partner)
                }
                (ColumnStrategy::HierarchicalMean { brand, product }, ColumnKind::Numeric, _) => {
                    categorical_feature(brand) && categorical_feature(product)
                }
                (ColumnStrategy::ColorNormalize, ColumnKind::Categorical, _) => true,
                _ => false,
            };
            if !ok {
                return fail(format!(
                    "strategy {:?} does not fit column {:?}",
                    entry.strategy, column.name
                ));
            }
        }
        Ok(())
    }
}

/// Training-set means used for hierarchical imputation of one column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans {
    /// brand -> product -> mean
    pub brand_product: BTreeMap<String, BTreeMap<String, f64>>,
    pub product: BTreeMap<String, f64>,
    pub global: Option<f64>,
}

impl GroupMeans {
    fn lookup(&self, brand: Option<&str>, product: Option<&str>) -> f64 {
        let by_brand = brand
            .zip(product)
            .and_then(|(b, p)| self.brand_product.get(b)?.get(p));
        let by_product = product.and_then(|p| self.product.get(p));
        by_brand
            .or(by_product)
            .copied()
            .or(self.global)
            .unwrap_or(0.0)
    }
}

/// Everything fitted on the training partition: the resolved plan,
/// per-column vocabularies and group means, and the output column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    features: Vec<ColumnSchema>,
    target: String,
    plan: ImputationPlan,
    lexicon: ColorLexicon,
    /// Sorted vocabulary of every categorical feature.
    vocabularies: BTreeMap<String, Vec<String>>,
    group_means: BTreeMap<String, GroupMeans>,
    layout: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTable {
    pub matrix: FeatureMatrix,
    /// Zero-filled targets, when the table carries the target column.
    pub targets: Option<Vec<f64>>,
}

/// Column positions of the fitted features inside one concrete table.
struct Binding<'a> {
    state: &'a EncoderState,
    /// table index of each entry of `state.features`
    positions: Vec<usize>,
    by_name: BTreeMap<&'a str, usize>,
}

impl<'a> Binding<'a> {
    fn new(state: &'a EncoderState, schema: &Schema) -> Result<Self, PipelineError> {
        let mut positions = Vec::with_capacity(state.features.len());
        let mut by_name = BTreeMap::new();
        for feature in &state.features {
            let idx = schema.index_of(&feature.name).ok_or_else(|| {
                PipelineError::SchemaMismatch(format!("missing column {:?}", feature.name))
            })?;
            if schema.columns()[idx].kind != feature.kind {
                return Err(PipelineError::SchemaMismatch(format!(
                    "column {:?} changed kind",
                    feature.name
                )));
            }
            positions.push(idx);
            by_name.insert(feature.name.as_str(), idx);
        }
        Ok(Self {
            state,
            positions,
            by_name,
        })
    }

    fn strategy(&self, column: &str) -> &'a ColumnStrategy {
        self.state
            .plan
            .strategy(column)
            .expect("validated plan covers every feature")
    }

    /// Categorical value after imputation and normalization; `None` encodes
    /// as an all-zero block.
    fn categorical(&self, row: &[CellValue], column: &str) -> Option<String> {
        let own = row[self.by_name[column]].as_str();
        match self.strategy(column) {
            ColumnStrategy::CrossFill { partner } => Some(
                own.or_else(|| row[self.by_name[partner.as_str()]].as_str())
                    .unwrap_or(UNKNOWN)
                    .to_string(),
            ),
            ColumnStrategy::ColorNormalize => own.map(|c| normalize_color(c, &self.state.lexicon)),
            _ => own.map(str::to_string),
        }
    }

    fn encode_row(&self, row: &[CellValue]) -> Vec<f64> {
        let state = self.state;
        let mut out = Vec::with_capacity(state.layout.len());
        for (feature, &pos) in state.features.iter().zip(&self.positions) {
            if feature.kind != ColumnKind::Numeric {
                continue;
            }
            let value = match (row[pos].as_f64(), self.strategy(&feature.name)) {
                (Some(v), _) => v,
                (None, ColumnStrategy::HierarchicalMean { brand, product }) => {
                    let brand = self.categorical(row, brand);
                    let product = self.categorical(row, product);
                    state.group_means[&feature.name].lookup(brand.as_deref(), product.as_deref())
                }
                (None, _) => 0.0,
            };
            out.push(value);
        }
        for feature in &state.features {
            if feature.kind != ColumnKind::Categorical {
                continue;
            }
            let vocab = &state.vocabularies[&feature.name];
            let start = out.len();
            out.resize(start + vocab.len(), 0.0);
            if let Some(value) = self.categorical(row, &feature.name) {
                if let Ok(i) = vocab.binary_search(&value) {
                    out[start + i] = 1.0;
                }
            }
        }
        out
    }
}

impl EncoderState {
    pub fn layout(&self) -> &[String] {
        &self.layout
    }

    pub fn features(&self) -> &[ColumnSchema] {
        &self.features
    }

    /// The schema the state was fitted on, for reading data to score.
    pub fn schema(&self) -> Schema {
        let mut columns = self.features.clone();
        columns.push(ColumnSchema::target(&self.target));
        Schema::new(columns).expect("fitted from a valid schema")
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn plan(&self) -> &ImputationPlan {
        &self.plan
    }

    pub fn vocabulary(&self, column: &str) -> Option<&[String]> {
        self.vocabularies.get(column).map(Vec::as_slice)
    }

    pub fn group_means(&self, column: &str) -> Option<&GroupMeans> {
        self.group_means.get(column)
    }

    pub fn transform(&self, table: &DataTable) -> Result<EncodedTable, PipelineError> {
        transform(table, self)
    }
}

/// Fits vocabularies, group means and the output layout on `train`.
///
/// The layout lists the numeric features in schema order, then one
/// `column=value` indicator per vocabulary entry of each categorical feature.
pub fn fit_pipeline(
    train: &DataTable,
    plan: &ImputationPlan,
    lexicon: &ColorLexicon,
) -> Result<EncoderState, PipelineError> {
    let schema = train.schema();
    plan.validate(schema)?;
    if train.n_rows() == 0 {
        return Err(PipelineError::EmptyTrain);
    }
    let mut state = EncoderState {
        features: schema.features().cloned().collect(),
        target: schema.target().name.clone(),
        plan: plan.clone(),
        lexicon: lexicon.clone(),
        vocabularies: BTreeMap::new(),
        group_means: BTreeMap::new(),
        layout: Vec::new(),
    };
    let binding = Binding::new(&state, schema)?;

    let mut vocabularies = BTreeMap::new();
    let mut group_means = BTreeMap::new();
    for feature in &state.features {
        match (feature.kind, binding.strategy(&feature.name)) {
            (ColumnKind::Categorical, _) => {
                let mut vocab: Vec<String> = train
                    .rows()
                    .iter()
                    .filter_map(|row| binding.categorical(row, &feature.name))
                    .collect();
                vocab.sort();
                vocab.dedup();
                vocabularies.insert(feature.name.clone(), vocab);
            }
            (ColumnKind::Numeric, ColumnStrategy::HierarchicalMean { brand, product }) => {
                let pos = binding.by_name[feature.name.as_str()];
                let mut by_pair: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
                let mut by_product: BTreeMap<String, (f64, usize)> = BTreeMap::new();
                let mut global = (0.0, 0usize);
                for row in train.rows() {
                    let Some(v) = row[pos].as_f64() else { continue };
                    let b = binding.categorical(row, brand);
                    let p = binding.categorical(row, product);
                    if let Some(p) = p {
                        if let Some(b) = b {
                            accumulate(by_pair.entry((b, p.clone())).or_default(), v);
                        }
                        accumulate(by_product.entry(p).or_default(), v);
                    }
                    accumulate(&mut global, v);
                }
                let mut means = GroupMeans {
                    global: finite_mean(global),
                    ..GroupMeans::default()
                };
                for ((b, p), acc) in by_pair {
                    if let Some(m) = finite_mean(acc) {
                        means.brand_product.entry(b).or_default().insert(p, m);
                    }
                }
                for (p, acc) in by_product {
                    if let Some(m) = finite_mean(acc) {
                        means.product.insert(p, m);
                    }
                }
                group_means.insert(feature.name.clone(), means);
            }
            (ColumnKind::Numeric, _) => {}
        }
    }

    let mut layout: Vec<String> = state
        .features
        .iter()
        .filter(|f| f.kind == ColumnKind::Numeric)
        .map(|f| f.name.clone())
        .collect();
    for feature in state
        .features
        .iter()
        .filter(|f| f.kind == ColumnKind::Categorical)
    {
        for value in &vocabularies[&feature.name] {
            layout.push(format!("{}={}", feature.name, value));
        }
    }
    state.vocabularies = vocabularies;
    state.group_means = group_means;
    state.layout = layout;
    Ok(state)
}

fn accumulate(acc: &mut (f64, usize), value: f64) {
    acc.0 += value;
    acc.1 += 1;
}

fn finite_mean((sum, count): (f64, usize)) -> Option<f64> {
    let mean = sum / count as f64;
    (count > 0 && mean.is_finite()).then_some(mean)
}

/// Dense, finite encoding of `table` under a fitted state. Rows are encoded
/// in parallel; the output is identical to a sequential pass.
pub fn transform(table: &DataTable, state: &EncoderState) -> Result<EncodedTable, PipelineError> {
    let binding = Binding::new(state, table.schema())?;
    let encoded: Vec<Vec<f64>> = table
        .rows()
        .par_iter()
        .map(|row| binding.encode_row(row))
        .collect();
    let width = state.layout.len();
    let mut data = Vec::with_capacity(encoded.len() * width);
    for row in &encoded {
        data.extend_from_slice(row);
    }
    let matrix = FeatureMatrix::new(encoded.len(), width, data, state.layout.clone())
        .expect("every encoded row has layout width");

    let targets = match table.schema().column(&state.target) {
        Some(c) if c.kind == ColumnKind::Numeric => Some(
            table
                .column(&state.target)
                .expect("column exists")
                .map(|cell| cell.as_f64().unwrap_or(0.0))
                .collect(),
        ),
        _ => None,
    };
    Ok(EncodedTable { matrix, targets })
}
