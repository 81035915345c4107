use salesboost::baselines::{FittedModel, ModelSpec};
use salesboost::boost::TrainConfig;
use salesboost::data::{load_csv, load_csv_unlabeled, write_csv, Schema};
use salesboost::eval::{generate_synthetic, SyntheticSpec, TargetMode};
use salesboost::model_io::ModelDocument;
use salesboost::pipeline::{fit_pipeline, ColorLexicon, ImputationPlan};

fn small_spec() -> SyntheticSpec {
    SyntheticSpec {
        n_products: 400,
        seed: 11,
        ..Default::default()
    }
}

#[test]
fn csv_to_saved_model_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("listings.csv");
    let table = generate_synthetic(&small_spec()).unwrap();
    write_csv(&table, &csv).unwrap();
    let loaded = load_csv(&csv, &Schema::product_listing()).unwrap();
    assert_eq!(loaded, table);

    let state = fit_pipeline(
        &loaded,
        &ImputationPlan::default_for(loaded.schema()),
        &ColorLexicon::default(),
    )
    .unwrap();
    let enc = state.transform(&loaded).unwrap();
    let mode = TargetMode::binned();
    let y = mode.apply(enc.targets.as_ref().unwrap()).unwrap();
    let spec = ModelSpec::Xgboost(TrainConfig {
        n_trees: 30,
        ..Default::default()
    });
    let model = spec.fit(&enc.matrix, &y).unwrap();
    let before = model.predict(&enc.matrix).unwrap();

    let path = dir.path().join("model.json");
    ModelDocument {
        model,
        pipeline: Some(state),
        target: Some(mode.clone()),
    }
    .save(&path)
    .unwrap();

    let doc = ModelDocument::load(&path).unwrap();
    assert_eq!(doc.target, Some(mode));
    let state = doc.pipeline.as_ref().unwrap();
    let fresh = load_csv_unlabeled(&csv, &state.schema()).unwrap();
    let after = doc
        .model
        .predict(&state.transform(&fresh).unwrap().matrix)
        .unwrap();
    assert!(before
        .iter()
        .zip(&after)
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn every_model_family_round_trips_through_a_file() {
    let table = generate_synthetic(&small_spec()).unwrap();
    let state = fit_pipeline(
        &table,
        &ImputationPlan::default_for(table.schema()),
        &ColorLexicon::default(),
    )
    .unwrap();
    let enc = state.transform(&table).unwrap();
    let y = enc.targets.clone().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, spec) in salesboost::baselines::default_roster() {
        let model = spec.fit(&enc.matrix, &y).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        ModelDocument::bare(model.clone()).save(&path).unwrap();
        let back = ModelDocument::load(&path).unwrap().model;
        assert_eq!(back, model, "{name}");
        let kind = if matches!(model, FittedModel::Ensemble(_)) {
            "ensemble"
        } else {
            "linear"
        };
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(&format!(r#""kind": "{kind}""#)), "{name}");
    }
}

#[test]
fn scoring_data_may_omit_the_target() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("new.csv");
    std::fs::write(
        &csv,
        "Products,Brand,Colour,Manufacturer,Price,Rating,Number of Rating,Shipment,Weight Pounds\n\
         computer mice,Zentek,dark grey,,$24.99,4.5,\"1,204\",0,0.3\n",
    )
    .unwrap();
    let table = load_csv_unlabeled(&csv, &Schema::product_listing()).unwrap();
    assert_eq!(table.n_rows(), 1);
    assert!(table.row(0)[9].is_missing());
    assert!(load_csv(&csv, &Schema::product_listing()).is_err());
}
