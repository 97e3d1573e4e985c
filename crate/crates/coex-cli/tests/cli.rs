//! End-to-end tests of the `coex` binary: flags, file formats, exit codes
//! and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coex_cli::schema::parse_scenario_str;
use coex_cli::table::parse_csv;
use coex_core::profiles::reference_scenario;

fn coex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coex"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = coex().args(args).output().expect("binary must launch");
    assert!(
        out.status.success(),
        "coex {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process must exit normally")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file must exist")
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn path_str(dir: &tempfile::TempDir, name: &str) -> (PathBuf, String) {
    let p = dir.path().join(name);
    let s = p.display().to_string();
    (p, s)
}

#[test]
fn emitted_scenario_file_parses_back_to_the_reference_scenario() {
    let dir = tmp();
    let (path, path_s) = path_str(&dir, "reference.json");
    run_ok(&["emit-scenario", "--out", &path_s]);
    let parsed = parse_scenario_str(&read(&path)).expect("emitted scenario must parse");
    assert_eq!(parsed, reference_scenario(), "round trip must be lossless");
}

#[test]
fn analytic_distance_sweep_writes_a_monotone_table() {
    let dir = tmp();
    let (path, path_s) = path_str(&dir, "sweep.csv");
    run_ok(&[
        "run",
        "--sweep",
        "distance:10:200:5",
        "--mode",
        "analytic",
        "--out",
        &path_s,
    ]);
    let text = read(&path);
    assert!(text.starts_with("# table: coex sweep"));
    assert!(text.contains("# seed: 42"));
    assert!(text.contains("# tool_version:"));
    assert!(text.contains("# git_describe:"));
    let table = parse_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 5);
    let p: Vec<f64> = table
        .values("p_sc_analytic")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert!(p.windows(2).all(|w| w[0] > w[1]), "monotone decrease: {p:?}");
    // Analytic runs leave the Monte-Carlo columns empty.
    assert!(table.values("p_sc_mc").unwrap().iter().all(Option::is_none));
}

#[test]
fn same_seed_and_flags_give_byte_identical_tables() {
    let dir = tmp();
    let (a, a_s) = path_str(&dir, "a.csv");
    let (b, b_s) = path_str(&dir, "b.csv");
    let args = |out: &str| {
        vec![
            "run".to_string(),
            "--sweep".into(),
            "distance:20:120:4".into(),
            "--mode".into(),
            "both".into(),
            "--trials".into(),
            "2000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    run_ok(&args(&a_s).iter().map(String::as_str).collect::<Vec<_>>());
    run_ok(&args(&b_s).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(read(&a), read(&b), "repeat runs must be byte-identical");
}

#[test]
fn stdout_equals_file_output() {
    let dir = tmp();
    let (path, path_s) = path_str(&dir, "t.csv");
    let args = [
        "run",
        "--sweep",
        "distance:50:150:3",
        "--mode",
        "analytic",
    ];
    let stdout_run = run_ok(&args);
    run_ok(&[&args[..], &["--out", &path_s]].concat());
    assert_eq!(String::from_utf8_lossy(&stdout_run.stdout), read(&path));
}

#[test]
fn malformed_scenario_exits_one_and_names_the_key() {
    let dir = tmp();
    let (path, path_s) = path_str(&dir, "bad.json");
    // Unknown key: a typo the schema rejects by name.
    let mut text = String::new();
    {
        let emit = run_ok(&["emit-scenario"]);
        text.push_str(&String::from_utf8_lossy(&emit.stdout));
    }
    let text = text.replacen("\"tx_power_dbm\"", "\"tx_power_db\"", 1);
    std::fs::write(&path, text).unwrap();
    let out = coex()
        .args(["run", "--scenario", &path_s, "--sweep", "distance:10:100:3"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tx_power_db"), "stderr: {stderr}");

    // Semantic violation: right keys, impossible value; the error names the
    // key path in file terms.
    let emit = run_ok(&["emit-scenario"]);
    let text = String::from_utf8_lossy(&emit.stdout)
        .replacen("\"bandwidth_hz\": 125000.0", "\"bandwidth_hz\": -1.0", 1);
    std::fs::write(&path, text).unwrap();
    let out = coex()
        .args(["run", "--scenario", &path_s, "--sweep", "distance:10:100:3"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bandwidth_hz"), "stderr: {stderr}");
}

#[test]
fn unreadable_scenario_path_exits_one() {
    let out = coex()
        .args([
            "run",
            "--scenario",
            "/nonexistent/nowhere.json",
            "--sweep",
            "distance:10:100:3",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn bad_sweep_spec_exits_one() {
    let out = coex()
        .args(["run", "--sweep", "distance:500:10:50"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("min must be below max"));
}

#[test]
fn unknown_flag_is_an_input_error() {
    let out = coex().args(["run", "--swoop", "d:1:2:3"]).output().unwrap();
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn analytic_mode_with_trials_warns_and_succeeds() {
    let out = run_ok(&[
        "run",
        "--sweep",
        "distance:10:100:3",
        "--mode",
        "analytic",
        "--trials",
        "50",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("trials ignored"), "stderr: {stderr}");
    // No warning when trials is left at its default.
    let out = run_ok(&["run", "--sweep", "distance:10:100:3", "--mode", "analytic"]);
    assert!(!String::from_utf8_lossy(&out.stderr).contains("trials ignored"));
}

#[test]
fn zero_energy_model_exits_two() {
    let dir = tmp();
    let (path, path_s) = path_str(&dir, "zero-energy.json");
    let emit = run_ok(&["emit-scenario"]);
    let text = String::from_utf8_lossy(&emit.stdout)
        .replace("\"circuit_power_w\": 0.1", "\"circuit_power_w\": 0.0")
        .replace("\"rx_power_w\": 0.1", "\"rx_power_w\": 0.0")
        .replace("\"pa_overhead\": 0.7", "\"pa_overhead\": 0.0")
        .replace("\"active_time_s\": 2.0", "\"active_time_s\": 0.0")
        .replace("\"ack_time_s\": 1.0", "\"ack_time_s\": 0.0");
    std::fs::write(&path, text).unwrap();
    let out = coex()
        .args([
            "run",
            "--scenario",
            &path_s,
            "--sweep",
            "distance:10:100:3",
            "--mode",
            "analytic",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2, "numerical failure must exit 2");
    assert!(String::from_utf8_lossy(&out.stderr).contains("lifetime"));
}

#[test]
fn json_flag_emits_a_parseable_document() {
    let out = run_ok(&[
        "run",
        "--sweep",
        "sinr_threshold:0:6:3",
        "--mode",
        "analytic",
        "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["meta"]["mode"], "analytic");
    assert_eq!(doc["meta"]["seed"], "42");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["p_sc_analytic"].as_f64().unwrap() > rows[2]["p_sc_analytic"].as_f64().unwrap());
    assert!(rows[0]["p_sc_mc"].is_null());
}

#[test]
fn mrc_flag_adds_the_joint_reception_column() {
    let out = run_ok(&[
        "run",
        "--sweep",
        "distance:30:90:3",
        "--mode",
        "analytic",
        "--mrc",
        "30,45,60",
    ]);
    let table = parse_csv(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let mrc = table.values("p_sc_mrc").unwrap();
    let single = table.values("p_sc_analytic").unwrap();
    for (m, s) in mrc.iter().zip(&single) {
        let (m, s) = (m.unwrap(), s.unwrap());
        assert!((0.0..=1.0).contains(&m));
        // Joint reception across three APs beats the single fixed link.
        assert!(m + 2e-3 >= s, "mrc {m} vs single {s}");
    }
}

#[test]
fn ap_count_sweep_runs_through_the_binary() {
    let out = run_ok(&[
        "run",
        "--sweep",
        "ap_count:1:3:3",
        "--mode",
        "analytic",
        "--mrc",
        "50,75,100",
        "--distance",
        "50",
    ]);
    let table = parse_csv(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let mrc: Vec<f64> = table
        .values("p_sc_mrc")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert!(mrc[0] < mrc[1] && mrc[1] < mrc[2], "{mrc:?}");
}

#[test]
fn degrade_reports_fifty_percent_for_halved_success() {
    let dir = tmp();
    let (single, single_s) = path_str(&dir, "single.csv");
    let (multi, multi_s) = path_str(&dir, "multi.csv");
    let (out_path, out_s) = path_str(&dir, "report.csv");
    let header = "sweep_value,p_sc_analytic,p_sc_mc,mc_ci,n_tx_mean,delay_s,energy_J,lifetime_s";
    std::fs::write(&single, format!("{header}\n10,0.8,,,1,1,1,4e7\n20,0.5,,,1,1,1,2e7\n")).unwrap();
    std::fs::write(&multi, format!("{header}\n10,0.4,,,1,1,1,3e7\n20,0.5,,,1,1,1,2e7\n")).unwrap();
    run_ok(&["degrade", &multi_s, "--compare", &single_s, "--out", &out_s]);
    let text = read(&out_path);
    let table = parse_csv(&text).unwrap();
    assert_eq!(
        table.values("success_degradation_pct").unwrap(),
        vec![Some(50.0), Some(0.0)]
    );
    assert_eq!(
        table.values("lifetime_degradation_pct").unwrap(),
        vec![Some(25.0), Some(0.0)]
    );
    assert!(text.contains("# argmax_success_degradation: sweep_value=10, pct=50"));

    // Identical tables degrade by zero everywhere.
    run_ok(&["degrade", &single_s, "--compare", &single_s, "--out", &out_s]);
    let table = parse_csv(&read(&out_path)).unwrap();
    assert!(table
        .values("success_degradation_pct")
        .unwrap()
        .iter()
        .all(|v| *v == Some(0.0)));
}

#[test]
fn degrade_rejects_mismatched_grids() {
    let dir = tmp();
    let (single, single_s) = path_str(&dir, "single.csv");
    let (multi, multi_s) = path_str(&dir, "multi.csv");
    let header = "sweep_value,p_sc_analytic,p_sc_mc,mc_ci,n_tx_mean,delay_s,energy_J,lifetime_s";
    std::fs::write(&single, format!("{header}\n10,0.8,,,1,1,1,4e7\n")).unwrap();
    std::fs::write(&multi, format!("{header}\n15,0.4,,,1,1,1,3e7\n")).unwrap();
    let out = coex()
        .args(["degrade", &multi_s, "--compare", &single_s])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatched sweep grids"));
}

#[test]
fn degrade_composes_with_run_outputs() {
    let dir = tmp();
    let (single_scn, single_scn_s) = path_str(&dir, "single.json");
    let (single_tbl, single_tbl_s) = path_str(&dir, "single.csv");
    let (multi_tbl, multi_tbl_s) = path_str(&dir, "multi.csv");

    // Single-technology scenario: drop the interferer class from the
    // emitted reference file.
    let emit = run_ok(&["emit-scenario"]);
    let text = String::from_utf8_lossy(&emit.stdout).to_string();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let classes = doc["classes"].as_array_mut().unwrap();
    classes.truncate(1);
    std::fs::write(&single_scn, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let sweep = "distance:40:80:3";
    run_ok(&[
        "run", "--scenario", &single_scn_s, "--sweep", sweep, "--mode", "analytic", "--out",
        &single_tbl_s,
    ]);
    run_ok(&["run", "--sweep", sweep, "--mode", "analytic", "--out", &multi_tbl_s]);
    let out = run_ok(&["degrade", &multi_tbl_s, "--compare", &single_tbl_s, "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let pct = row["success_degradation_pct"].as_f64().unwrap();
        assert!(pct > 0.0 && pct < 100.0, "interference must cost something: {pct}");
    }
    let _ = (single_tbl, multi_tbl);
}

#[test]
fn sampled_overlap_and_frozen_topology_flags_are_accepted() {
    let out = run_ok(&[
        "run",
        "--sweep",
        "distance:40:80:2",
        "--mode",
        "mc",
        "--trials",
        "500",
        "--sampled-overlap",
        "--frozen-topology",
        "--antithetic",
    ]);
    let table = parse_csv(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(table.rows.len(), 2);
    let p = table.values("p_sc_mc").unwrap();
    assert!(p.iter().all(|v| v.is_some()));
}
