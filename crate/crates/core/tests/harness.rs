use dbn_ucrl::agents::Algorithm;
use dbn_ucrl::harness::{run_experiment, write_csv, write_outputs, ExperimentConfig, CSV_HEADER};

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let result = run_experiment(cfg).unwrap();
    let mut out = Vec::new();
    write_csv(&result.traces, &mut out).unwrap();
    out
}

#[test]
fn csv_is_independent_of_worker_count() {
    let mut cfg = ExperimentConfig::new("riverswim-product", 3000, Algorithm::ALL.to_vec(), 3);
    cfg.base_seed = 9;
    cfg.workers = Some(1);
    let one = csv_bytes(&cfg);
    cfg.workers = Some(4);
    let four = csv_bytes(&cfg);
    assert_eq!(one, four);
    assert_eq!(one, csv_bytes(&cfg));
    let text = String::from_utf8(one).unwrap();
    assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
    assert!(!text.contains('\r'));
}

#[test]
fn outputs_land_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("riverswim", 500, vec![Algorithm::DbnUcrl], 2);
    cfg.name = Some("smoke".into());
    let result = run_experiment(&cfg).unwrap();
    let (csv, json) = write_outputs(&result, dir.path()).unwrap();
    assert!(csv.ends_with("smoke.csv") && json.ends_with("smoke.json"));
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(sidecar["runs"].as_array().unwrap().len() == 2);
}

#[test]
fn replanning_is_a_minority_of_runtime_on_riverswim() {
    let cfg = ExperimentConfig::new("riverswim", 100_000, vec![Algorithm::DbnUcrl], 1);
    let result = run_experiment(&cfg).unwrap();
    let tr = &result.traces[0];
    assert!(
        tr.planning_secs < 0.5 * tr.total_secs,
        "planning {:.4}s of {:.4}s over {} episodes",
        tr.planning_secs,
        tr.total_secs,
        tr.episodes
    );
}
