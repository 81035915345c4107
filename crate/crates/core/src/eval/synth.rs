//! Seeded generator of product listings with a planted sales signal.
//!
//! Latent log-sales rise with review count and rating (rating matters more
//! once a product has many reviews), fall with a product's price rank inside
//! its category, and carry a per-brand effect plus Gaussian noise. Sales are
//! whole units capped below 10000.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    CellValue, DataTable, Schema, BRAND, COLOUR, MANUFACTURER, NUMBER_OF_RATING, PRICE, PRODUCTS,
    RATING, SALES, SHIPMENT, WEIGHT_POUNDS,
};

#[derive(Debug, Error, PartialEq)]
pub enum SyntheticError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_products: usize,
    pub categories: Vec<String>,
    pub n_brands: usize,
    /// Probability that a cell of the named column is blanked.
    pub missing_rates: BTreeMap<String, f64>,
    /// Standard deviation of the log-sales noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let rates = [
            (BRAND, 0.03),
            (COLOUR, 0.08),
            (MANUFACTURER, 0.12),
            (PRICE, 0.04),
            (RATING, 0.02),
            (NUMBER_OF_RATING, 0.02),
            (SHIPMENT, 0.15),
            (WEIGHT_POUNDS, 0.10),
        ];
        Self {
            n_products: 1565,
            categories: vec![
                "wireless headphones".into(),
                "gaming keyboards".into(),
                "computer mice".into(),
                "air fryers".into(),
            ],
            n_brands: 40,
            missing_rates: rates.iter().map(|(c, r)| (c.to_string(), *r)).collect(),
            noise: 0.35,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    /// Every column blanked at the same rate.
    pub fn with_uniform_missingness(mut self, rate: f64) -> Self {
        self.missing_rates = Schema::product_listing()
            .columns()
            .iter()
            .map(|c| (c.name.clone(), rate))
            .collect();
        self
    }

    pub fn validate(&self) -> Result<(), SyntheticError> {
        let fail = |msg: String| Err(SyntheticError::InvalidSpec(msg));
        if self.n_products < 10 {
            return fail(format!("n_products must be >= 10, got {}", self.n_products));
        }
        if self.categories.is_empty() || self.categories.iter().any(|c| c.trim().is_empty()) {
            return fail("categories must be non-empty names".into());
        }
        if self.n_brands == 0 {
            return fail("n_brands must be >= 1".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail("noise must be finite and >= 0".into());
        }
        let schema = Schema::product_listing();
        for (column, rate) in &self.missing_rates {
            if schema.index_of(column).is_none() {
                return fail(format!("missing rate for unknown column {column:?}"));
            }
            if !(0.0..=1.0).contains(rate) {
                return fail(format!("missing rate for {column:?} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Price and weight medians plus spreads for one category.
struct CategoryProfile {
    price_median: f64,
    weight_median: f64,
    colours: &'static [&'static str],
}

const DEVICE_COLOURS: &[&str] = &[
    "Black",
    "black",
    "White",
    "dark grey",
    "Matte Black",
    "Space Grey",
    "silver",
    "Rose Gold",
    "navy blue",
    "red",
    "black/red",
    "black and white",
    "Teal",
    "red, white & blue",
    "pink/white/grey",
];
const APPLIANCE_COLOURS: &[&str] = &[
    "Black",
    "black",
    "White",
    "Stainless Steel",
    "silver",
    "grey",
    "dark grey",
    "Red",
    "Mint",
    "black/silver",
    "white & grey",
];

fn profile(category_index: usize, category: &str) -> CategoryProfile {
    match category {
        "wireless headphones" => CategoryProfile {
            price_median: 60.0,
            weight_median: 0.5,
            colours: DEVICE_COLOURS,
        },
        "gaming keyboards" => CategoryProfile {
            price_median: 70.0,
            weight_median: 2.2,
            colours: DEVICE_COLOURS,
        },
        "computer mice" => CategoryProfile {
            price_median: 28.0,
            weight_median: 0.3,
            colours: DEVICE_COLOURS,
        },
        "air fryers" => CategoryProfile {
            price_median: 95.0,
            weight_median: 11.0,
            colours: APPLIANCE_COLOURS,
        },
        _ => CategoryProfile {
            price_median: 20.0 + 15.0 * category_index as f64,
            weight_median: 0.5 + category_index as f64,
            colours: DEVICE_COLOURS,
        },
    }
}

const NAME_HEADS: &[&str] = &[
    "Zen", "Volt", "Aero", "Nova", "Pulse", "Apex", "Lumi", "Kine", "Sono", "Ferro",
];
const NAME_TAILS: &[&str] = &["tek", "wave", "ix", "core", "lab", "forge"];

fn brand_name(i: usize) -> String {
    let head = NAME_HEADS[i % NAME_HEADS.len()];
    let tail = NAME_TAILS[(i / NAME_HEADS.len()) % NAME_TAILS.len()];
    let round = i / (NAME_HEADS.len() * NAME_TAILS.len());
    if round == 0 {
        format!("{head}{tail}")
    } else {
        format!("{head}{tail} {}", round + 1)
    }
}

struct Brand {
    name: String,
    manufacturer: String,
    category: usize,
    effect: f64,
}

struct Product {
    category: usize,
    brand: usize,
    colour: String,
    price: f64,
    rating: f64,
    reviews: f64,
    shipment: f64,
    weight: f64,
}

fn round_to(value: f64, step: f64) -> f64 {
    (value / step).round() * step
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DataTable, SyntheticError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let n_categories = spec.categories.len();
    let profiles: Vec<CategoryProfile> = spec
        .categories
        .iter()
        .enumerate()
        .map(|(i, c)| profile(i, c))
        .collect();

    // a few parent companies own several brands each
    let parents = ["Orbis Group", "Hallmark Devices", "Kestrel Holdings"];
    let brands: Vec<Brand> = (0..spec.n_brands)
        .map(|i| {
            let name = brand_name(i);
            let manufacturer = if rng.random_bool(0.25) {
                parents.choose(&mut rng).expect("non-empty").to_string()
            } else {
                format!("{name} Electronics")
            };
            Brand {
                manufacturer,
                category: i % n_categories,
                effect: 0.5 * standard.sample(&mut rng),
                name,
            }
        })
        .collect();
    let by_category: Vec<Vec<usize>> = (0..n_categories)
        .map(|c| {
            (0..brands.len())
                .filter(|&b| brands[b].category == c)
                .collect()
        })
        .collect();
    let reviews_dist = LogNormal::<f64>::new(5.0, 1.7).expect("valid lognormal");

    let products: Vec<Product> = (0..spec.n_products)
        .map(|_| {
            let category = rng.random_range(0..n_categories);
            let p = &profiles[category];
            // mostly the category's own brands, sometimes any brand
            let brand = match by_category[category].choose(&mut rng) {
                Some(&b) if rng.random_bool(0.85) => b,
                _ => rng.random_range(0..brands.len()),
            };
            let price = round_to(
                p.price_median * (0.55 * standard.sample(&mut rng)).exp(),
                0.01,
            )
            .max(4.99);
            let weight = round_to(
                p.weight_median * (0.3 * standard.sample(&mut rng)).exp(),
                0.01,
            )
            .max(0.05);
            let shipment = if rng.random_bool(0.6) {
                0.0
            } else {
                round_to(3.0 + 0.4 * weight + rng.random_range(0.0..6.0), 0.01)
            };
            let reviews: f64 = reviews_dist.sample(&mut rng);
            let reviews = reviews.floor().min(250_000.0);
            let rating = if reviews == 0.0 {
                0.0
            } else {
                round_to(
                    (4.2 + 0.45 * standard.sample(&mut rng)).clamp(1.0, 5.0),
                    0.1,
                )
            };
            Product {
                category,
                brand,
                colour: p.colours.choose(&mut rng).expect("non-empty").to_string(),
                price,
                rating,
                reviews,
                shipment,
                weight,
            }
        })
        .collect();

    let price_rank = price_ranks(&products, n_categories);

    let rows: Vec<Vec<CellValue>> = products
        .iter()
        .zip(&price_rank)
        .map(|(p, &rank)| {
            let log_reviews = (1.0 + p.reviews).ln();
            let trust = (log_reviews / 6.0).min(1.0);
            let log_sales = 0.6 + 0.95 * log_reviews + 1.4 * trust * (p.rating - 4.0) - 1.2 * rank
                + brands[p.brand].effect
                - 0.15 * p.shipment.min(10.0) / 10.0
                + spec.noise * standard.sample(&mut rng);
            let sales = log_sales.exp().round().clamp(0.0, 9999.0);
            let brand = &brands[p.brand];
            vec![
                CellValue::categorical(&spec.categories[p.category]),
                CellValue::categorical(&brand.name),
                CellValue::categorical(&p.colour),
                CellValue::categorical(&brand.manufacturer),
                CellValue::numeric(p.price),
                CellValue::numeric(p.rating),
                CellValue::numeric(p.reviews),
                CellValue::numeric(p.shipment),
                CellValue::numeric(p.weight),
                CellValue::numeric(sales),
            ]
        })
        .collect();

    let schema = Schema::product_listing();
    let rates: Vec<f64> = schema
        .columns()
        .iter()
        .map(|c| spec.missing_rates.get(&c.name).copied().unwrap_or(0.0))
        .collect();
    let rows = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(&rates)
                .map(|(cell, &rate)| {
                    if rate > 0.0 && rng.random_bool(rate) {
                        CellValue::Missing
                    } else {
                        cell
                    }
                })
                .collect()
        })
        .collect();
    debug_assert_eq!(schema.columns()[9].name, SALES);
    debug_assert_eq!(schema.columns()[0].name, PRODUCTS);
    Ok(DataTable::new(schema, rows).expect("generated rows match the schema"))
}

/// Rank of each price within its category scaled to [0, 1]; ties share the
/// lower rank.
fn price_ranks(products: &[Product], n_categories: usize) -> Vec<f64> {
    let mut ranks = vec![0.0; products.len()];
    for c in 0..n_categories {
        let mut members: Vec<usize> = (0..products.len())
            .filter(|&i| products[i].category == c)
            .collect();
        members.sort_by(|&a, &b| {
            products[a]
                .price
                .total_cmp(&products[b].price)
                .then(a.cmp(&b))
        });
        let denom = (members.len().max(2) - 1) as f64;
        let mut rank = 0;
        for (k, &i) in members.iter().enumerate() {
            if k > 0 && products[members[k - 1]].price < products[i].price {
                rank = k;
            }
            ranks[i] = rank as f64 / denom;
        }
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::default_bins;
    use crate::data::{read_csv, write_csv_to};

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            n_products: 600,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let b = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_rows(), 1565);
    }

    #[test]
    fn zero_rates_leave_no_gaps() {
        let spec = small().with_uniform_missingness(0.0);
        let t = generate_synthetic(&spec).unwrap();
        assert!(t.rows().iter().flatten().all(|c| !c.is_missing()));
    }

    #[test]
    fn sales_cover_every_bin() {
        let t = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let bins = default_bins();
        let mut counts = vec![0usize; bins.n_bins()];
        for cell in t.column(SALES).unwrap() {
            counts[bins.bin_of(cell.as_f64().unwrap()).unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");

        let t = generate_synthetic(&SyntheticSpec {
            n_products: 500,
            ..Default::default()
        })
        .unwrap();
        let mut seen = vec![false; bins.n_bins()];
        for cell in t.column(SALES).unwrap() {
            seen[bins.bin_of(cell.as_f64().unwrap()).unwrap()] = true;
        }
        assert!(seen.iter().all(|&s| s), "{seen:?}");
    }

    #[test]
    fn value_ranges() {
        let t = generate_synthetic(&small()).unwrap();
        for cell in t.column(RATING).unwrap().flat_map(CellValue::as_f64) {
            assert!((0.0..=5.0).contains(&cell));
        }
        for cell in t.column(SALES).unwrap().flat_map(CellValue::as_f64) {
            assert!((0.0..10000.0).contains(&cell) && cell.fract() == 0.0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = generate_synthetic(&small()).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&t, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), t.schema()).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        write_csv_to(&back, &mut again).unwrap();
        assert_eq!(read_csv(again.as_slice(), t.schema()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = small();
        spec.n_products = 9;
        assert!(generate_synthetic(&spec).is_err());
        let mut spec = small();
        spec.missing_rates.insert(PRICE.into(), 1.5);
        assert!(generate_synthetic(&spec).is_err());
        let mut spec = small();
        spec.missing_rates.insert("Stock".into(), 0.1);
        assert!(generate_synthetic(&spec).is_err());
    }
}
