use std::collections::BTreeSet;
use std::fs;

use urbanfim::clustering::read_assignment_json;
use urbanfim::fixtures::grid_layer;
use urbanfim::geo::{write_feature_collection, LandUseFeature, LandUseLayer, DEFAULT_CODE_ATTRIBUTE};
use urbanfim::neighborhood::extract_transactions;
use urbanfim::pipeline::{
    read_manifest, run_buffer_sweep, run_pipeline, structural_check, write_synthetic_bundle,
    InputEntry, PipelineConfig,
};
use urbanfim::ErrorKind;

#[test]
fn synthetic_bundle_separates_families() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_synthetic_bundle(dir.path(), 42).unwrap();
    let manifest = run_pipeline(&cfg).unwrap();
    assert_eq!(manifest.count("extract"), 6);
    assert_eq!(manifest.count("mine"), 6);
    assert_eq!(manifest.count("matrix"), 1);
    assert!(manifest.entries.iter().any(|e| e.path == "embedding.csv"));
    assert!(manifest.entries.iter().any(|e| e.path == "dendrogram.json"));
    assert!(manifest.entries.iter().filter(|e| e.path.ends_with(".svg")).count() >= 3);

    let a = read_assignment_json(cfg.output_dir.join("assignment.json")).unwrap();
    assert_eq!(a.k, 2);
    let groups: BTreeSet<Vec<&str>> = a.members().into_iter().collect();
    let expected: BTreeSet<Vec<&str>> = [
        vec!["CITY_A1", "CITY_A2", "CITY_A3"],
        vec!["CITY_B1", "CITY_B2", "CITY_B3"],
    ]
    .into_iter()
    .collect();
    assert_eq!(groups, expected);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = write_synthetic_bundle(dir.path(), 3).unwrap();
    cfg.embedding = urbanfim::embedding::EmbeddingMethod::Umap;
    cfg.umap.n_neighbors = 3;
    cfg.umap.epochs = 100;
    cfg.output_dir = dir.path().join("run1");
    let first = run_pipeline(&cfg).unwrap();
    cfg.output_dir = dir.path().join("run2");
    cfg.jobs = Some(1);
    let second = run_pipeline(&cfg).unwrap();
    assert_eq!(first.entries, second.entries);
    assert_eq!(
        fs::read(dir.path().join("run1/manifest.json")).unwrap(),
        fs::read(dir.path().join("run2/manifest.json")).unwrap()
    );
}

#[test]
fn k_range_must_fit_city_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        k_max: 10,
        ..write_synthetic_bundle(dir.path(), 1).unwrap()
    };
    assert_eq!(run_pipeline(&cfg).unwrap_err().kind(), ErrorKind::Config);
}

#[test]
fn cut_distance_overrides_chosen_k() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        cut_distance: Some(0.0),
        ..write_synthetic_bundle(dir.path(), 2).unwrap()
    };
    run_pipeline(&cfg).unwrap();
    let a = read_assignment_json(cfg.output_dir.join("assignment.json")).unwrap();
    assert_eq!(a.k, 6);
}

/// Checkerboard of 10 m squares with 5 m gaps plus one far-away polygon.
fn gapped_layer() -> LandUseLayer {
    let grid = grid_layer("GRID", 5, 5, 10.0, 5.0, |c, r| {
        if (c + r) % 2 == 0 { "11100" } else { "12100" }.to_owned()
    });
    let mut features = grid.features;
    features.push(LandUseFeature::rect("isolated", "31000", 500.0, 500.0, 510.0, 510.0));
    LandUseLayer::new("GRID", features, DEFAULT_CODE_ATTRIBUTE).unwrap()
}

#[test]
fn five_meter_gaps_join_between_four_and_six() {
    let layer = gapped_layer();
    let at4 = extract_transactions(&layer, 4.0).unwrap();
    let at6 = extract_transactions(&layer, 6.0).unwrap();
    for (a, b) in at4.transactions.iter().zip(&at6.transactions) {
        if a.source_id == "isolated" {
            assert_eq!(a.items, b.items);
        } else {
            assert_eq!(a.len(), 1, "{}", a.source_id);
            assert!(b.len() > a.len(), "{}", b.source_id);
        }
    }
}

#[test]
fn sweep_rows_follow_distances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.geojson");
    write_feature_collection(&gapped_layer(), &path).unwrap();
    let cfg = PipelineConfig {
        inputs: vec![InputEntry {
            city_name: "GRID".into(),
            path,
        }],
        output_dir: dir.path().join("out"),
        ..PipelineConfig::default()
    };
    let r = run_buffer_sweep(&cfg, &[0.0, 4.0, 6.0, 100.0]).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.windows(2).all(|w| w[0].median_transaction_length <= w[1].median_transaction_length));
    assert_eq!(r.rows[1].median_transaction_length, 1.0);
    assert_eq!(r.rows[2].median_transaction_length, 2.0);
    assert!(r.rows.iter().all(|row| row.transaction_count == 26));
    assert!(dir.path().join("out/buffer_sweep.csv").is_file());

    let two = PipelineConfig {
        inputs: vec![cfg.inputs[0].clone(), InputEntry { city_name: "B".into(), ..cfg.inputs[0].clone() }],
        ..cfg.clone()
    };
    assert_eq!(run_buffer_sweep(&two, &[1.0]).unwrap_err().kind(), ErrorKind::Config);
    assert_eq!(run_buffer_sweep(&cfg, &[]).unwrap_err().kind(), ErrorKind::Config);
}

#[test]
fn structural_check_on_synthetic_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_synthetic_bundle(dir.path(), 9).unwrap();
    run_pipeline(&cfg).unwrap();
    let cities: Vec<String> = cfg.inputs.iter().map(|i| i.city_name.clone()).collect();
    let report = structural_check(&cfg.output_dir, &cities, 3).unwrap();
    assert!(report.failures().is_empty(), "{:?}", report.failures());
    let too_many = structural_check(&cfg.output_dir, &cities, 7).unwrap();
    assert_eq!(too_many.failures().len(), 1);
}

#[test]
fn manifest_lists_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_synthetic_bundle(dir.path(), 4).unwrap();
    run_pipeline(&cfg).unwrap();
    let entries = read_manifest(cfg.output_dir.join("manifest.json")).unwrap();
    assert!(entries.iter().all(|e| !e.path.starts_with('/') && e.sha256.len() == 64));
    assert!(entries.iter().any(|e| e.path == "transactions/CITY_A1.transactions.txt"));
}
