use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use urbanfim::fixtures::{village_layer, VILLAGE_TRANSACTIONS_TEXT};
use urbanfim::geo::write_feature_collection;
use urbanfim::pipeline::{sha256_hex, write_synthetic_bundle};

const VILLAGE_ITEMSETS_CSV: &str = "itemset,support,relative_support
B,6,0.857143
C,7,1.000000
G,3,0.428571
W,3,0.428571
B C,6,0.857143
B W,3,0.428571
C G,3,0.428571
C W,3,0.428571
B C W,3,0.428571
";

fn urbanfim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urbanfim"))
        .args(args)
        .env_remove("URBANFIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = urbanfim(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn hash(p: &Path) -> String {
    sha256_hex(&fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display())))
}

#[test]
fn mine_village_gives_itemsets() {
    let dir = tempfile::tempdir().unwrap();
    let tx = dir.path().join("village.txt");
    fs::write(&tx, VILLAGE_TRANSACTIONS_TEXT).unwrap();
    let abs = dir.path().join("abs.csv");
    ok(&["mine", "--transactions", s(&tx), "--minsup-abs", "3", "--out", s(&abs)]);
    assert_eq!(fs::read_to_string(&abs).unwrap(), VILLAGE_ITEMSETS_CSV);

    let rel = dir.path().join("rel.csv");
    let three_sevenths = format!("{}", 3.0 / 7.0);
    ok(&["mine", "--transactions", s(&tx), "--minsup", &three_sevenths, "--out", s(&rel)]);
    assert_eq!(fs::read_to_string(&rel).unwrap(), VILLAGE_ITEMSETS_CSV);
}

#[test]
fn extract_village_layer() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("VILLAGE.geojson");
    write_feature_collection(&village_layer(), &geo).unwrap();
    let tx = dir.path().join("t.txt");
    let dich = dir.path().join("t.csv");
    ok(&[
        "extract", "--input", s(&geo), "--buffer-distance", "1", "--out", s(&tx), "--dichotomous", s(&dich),
    ]);
    assert_eq!(fs::read_to_string(&tx).unwrap(), VILLAGE_TRANSACTIONS_TEXT);
    let table = fs::read_to_string(&dich).unwrap();
    assert_eq!(table.lines().next(), Some("source_id,B,C,G,W"));
    assert_eq!(table.lines().nth(4), Some("4,1,1,1,1"));
}

#[test]
fn cluster_needs_only_an_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("embedding.csv");
    fs::write(&emb, "city,x,y\nA,0,0\nB,1,0\nC,10,0\nD,11,0\n").unwrap();
    let stdout = ok(&["cluster", "--embedding", s(&emb), "--k-min", "2", "--k-max", "3", "--out-dir", s(dir.path())]);
    assert!(stdout.contains("k=2"), "{stdout}");
    let assignment = fs::read_to_string(dir.path().join("assignment.json")).unwrap();
    assert!(assignment.contains("\"k\": 2"));
    assert!(dir.path().join("dendrogram.json").is_file());
    assert!(dir.path().join("k_selection.csv").is_file());
}

#[test]
fn pipeline_equals_stage_composition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_synthetic_bundle(dir.path(), 5).unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, cfg.to_json()).unwrap();
    let full = dir.path().join("full");
    ok(&["pipeline", "--config", s(&config), "--out-dir", s(&full)]);

    let staged = dir.path().join("staged");
    let mut fi_args = Vec::new();
    for input in &cfg.inputs {
        let city = &input.city_name;
        let tx = staged.join(format!("transactions/{city}.transactions.txt"));
        let fi = staged.join(format!("itemsets/{city}.fi.csv"));
        ok(&["extract", "--input", s(&input.path), "--city", city, "--out", s(&tx)]);
        ok(&["mine", "--transactions", s(&tx), "--minsup", "0.1", "--out", s(&fi)]);
        fi_args.push(fi);
    }
    let matrix = staged.join("city_fi_matrix.csv");
    let mut args = vec!["matrix", "--out", s(&matrix), "--fi"];
    args.extend(fi_args.iter().map(|p| s(p)));
    ok(&args);
    let emb = staged.join("embedding.csv");
    ok(&["embed", "--matrix", s(&matrix), "--embedding", "pca", "--out", s(&emb)]);
    ok(&["cluster", "--embedding", s(&emb), "--k-min", "2", "--k-max", "5", "--out-dir", s(&staged)]);
    let mut report = vec![
        "report".to_string(),
        "--embedding".into(),
        s(&emb).into(),
        "--dendrogram".into(),
        s(&staged.join("dendrogram.json")).into(),
        "--assignment".into(),
        s(&staged.join("assignment.json")).into(),
        "--out-dir".into(),
        s(&staged).into(),
    ];
    for input in &cfg.inputs {
        report.push("--layer".into());
        report.push(format!("{}={}", input.city_name, input.path.display()));
    }
    ok(&report.iter().map(String::as_str).collect::<Vec<_>>());

    let manifest = urbanfim::pipeline::read_manifest(full.join("manifest.json")).unwrap();
    assert_eq!(manifest.len(), 6 + 6 + 1 + 2 + 3 + 6 + 3);
    for entry in &manifest {
        assert_eq!(hash(&staged.join(&entry.path)), entry.sha256, "{}", entry.path);
    }
}

#[test]
fn single_city_stops_after_mining() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("t1.geojson");
    write_feature_collection(&village_layer(), &geo).unwrap();
    let out = dir.path().join("out");
    let input = format!("T1={}", geo.display());
    let stdout = ok(&["pipeline", "--input", &input, "--buffer-distance", "1", "--out-dir", s(&out)]);
    assert!(stdout.contains("clustering needs at least 2 cities"), "{stdout}");
    assert!(out.join("itemsets/T1.fi.csv").is_file());
    assert!(!out.join("city_fi_matrix.csv").exists());
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("t1.geojson");
    write_feature_collection(&village_layer(), &geo).unwrap();
    let input = format!("T1={}", geo.display());
    let out = dir.path().join("out");
    let stdout = ok(&["sweep", "--input", &input, "--distances", "0,1,5", "--out-dir", s(&out)]);
    let csv = fs::read_to_string(out.join("buffer_sweep.csv")).unwrap();
    assert_eq!(stdout, csv);
    let header = "buffer_distance_m,transaction_count,median_transaction_length,mean_transaction_length,fi_count";
    assert_eq!(csv.lines().next(), Some(header));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let tx = dir.path().join("t.txt");
    fs::write(&tx, VILLAGE_TRANSACTIONS_TEXT).unwrap();
    let out = s(&dir.path().join("x.csv")).to_owned();

    let bad_minsup = urbanfim(&["mine", "--transactions", s(&tx), "--minsup", "1.5", "--out", &out]);
    assert_eq!(bad_minsup.status.code(), Some(2));

    let missing = urbanfim(&["mine", "--transactions", "/nonexistent/t.txt", "--out", &out]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/t.txt"));

    let input = "X=/nonexistent/x.geojson".to_string();
    let stage = urbanfim(&["pipeline", "--input", &input, "--out-dir", s(dir.path())]);
    assert_eq!(stage.status.code(), Some(4));
    let err = String::from_utf8_lossy(&stage.stderr);
    assert!(err.contains("extract") && err.contains("city X"), "{err}");

    let unknown = urbanfim(&["pipeline", "--input", "no-equals-sign"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_config = dir.path().join("bad.json");
    fs::write(&bad_config, r#"{"not_a_field": 1}"#).unwrap();
    let cfg = urbanfim(&["pipeline", "--config", s(&bad_config)]);
    assert_eq!(cfg.status.code(), Some(2));
}

#[test]
fn cli_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_synthetic_bundle(dir.path(), 5).unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, cfg.to_json()).unwrap();
    // the file allows k up to 5; the flag narrows it
    let out = dir.path().join("o");
    ok(&["pipeline", "--config", s(&config), "--k-max", "3", "--out-dir", s(&out)]);
    let table = fs::read_to_string(out.join("k_selection.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2);
}

#[test]
fn synth_config_runs_from_any_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_urbanfim"))
            .args(args)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["synth", "--out-dir", "bundle", "--seed", "3"]);
    run(&["pipeline", "--config", "bundle/config.json"]);
    assert!(dir.path().join("bundle/out/manifest.json").is_file());
}
