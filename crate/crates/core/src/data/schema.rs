use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

impl ColumnSchema {
    pub fn feature(name: &str, kind: ColumnKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            role: ColumnRole::Feature,
        }
    }

    pub fn target(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            role: ColumnRole::Target,
        }
    }
}

/// Ordered set of column descriptions with unique names and exactly one
/// target column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColumnSchema>", into = "Vec<ColumnSchema>")]
pub struct Schema {
    columns: Vec<ColumnSchema>,
}

pub const PRODUCTS: &str = "Products";
pub const BRAND: &str = "Brand";
pub const COLOUR: &str = "Colour";
pub const MANUFACTURER: &str = "Manufacturer";
pub const PRICE: &str = "Price";
pub const RATING: &str = "Rating";
pub const NUMBER_OF_RATING: &str = "Number of Rating";
pub const SHIPMENT: &str = "Shipment";
pub const WEIGHT_POUNDS: &str = "Weight Pounds";
pub const SALES: &str = "Sales";

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for column in &columns {
            if column.name.trim().is_empty() {
                return Err(DataError::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(column.name.as_str()) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    column.name
                )));
            }
        }
        let targets = columns
            .iter()
            .filter(|c| c.role == ColumnRole::Target)
            .collect::<Vec<_>>();
        match targets.as_slice() {
            [target] if target.kind == ColumnKind::Numeric => Ok(Self { columns }),
            [target] => Err(DataError::InvalidSchema(format!(
                "target column {:?} must be numeric",
                target.name
            ))),
            _ => Err(DataError::InvalidSchema(format!(
                "expected exactly one target column, found {}",
                targets.len()
            ))),
        }
    }

    /// The product-listing schema: nine features plus the `Sales` target.
    pub fn product_listing() -> Self {
        use ColumnKind::*;
        Self::new(vec![
            ColumnSchema::feature(PRODUCTS, Categorical),
            ColumnSchema::feature(BRAND, Categorical),
            ColumnSchema::feature(COLOUR, Categorical),
            ColumnSchema::feature(MANUFACTURER, Categorical),
            ColumnSchema::feature(PRICE, Numeric),
            ColumnSchema::feature(RATING, Numeric),
            ColumnSchema::feature(NUMBER_OF_RATING, Numeric),
            ColumnSchema::feature(SHIPMENT, Numeric),
            ColumnSchema::feature(WEIGHT_POUNDS, Numeric),
            ColumnSchema::target(SALES),
        ])
        .expect("built-in schema is valid")
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| DataError::InvalidSchema(e.to_string()))
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == ColumnRole::Target)
            .expect("schema invariant: one target")
    }

    pub fn target(&self) -> &ColumnSchema {
        &self.columns[self.target_index()]
    }

    pub fn features(&self) -> impl Iterator<Item = &ColumnSchema> {
        self.columns
            .iter()
            .filter(|c| c.role == ColumnRole::Feature)
    }

    pub fn feature_count(&self) -> usize {
        self.features().count()
    }
}

impl TryFrom<Vec<ColumnSchema>> for Schema {
    type Error = DataError;

    fn try_from(columns: Vec<ColumnSchema>) -> Result<Self, Self::Error> {
        Schema::new(columns)
    }
}

impl From<Schema> for Vec<ColumnSchema> {
    fn from(schema: Schema) -> Self {
        schema.columns
    }
}
