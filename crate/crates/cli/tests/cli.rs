//! End-to-end plumbing checks: file formats, id translation, exit codes
//! and the frozen small-fixture answers.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const G1: &str = "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3\n";

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commscore"))
        .args(args)
        .current_dir(dir)
        .env_remove("COMMSCORE_THREADS")
        .output()
        .expect("spawning the binary")
}

fn run(dir: &Path, args: &[&str]) -> String {
    let out = bin(dir, args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn fixture(contents: &[(&str, &str)]) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    for (name, text) in contents {
        fs::write(tmp.path().join(name), text).unwrap();
    }
    tmp
}

#[test]
fn detect_finds_the_seed_triangle() {
    let tmp = fixture(&[("g.txt", G1)]);
    let out = run(tmp.path(), &["detect", "--graph", "g.txt", "--seed", "0", "--score", "conductance"]);
    assert_eq!(out, "0 1 2\n");
    let out = run(tmp.path(), &["detect", "--graph", "g.txt", "--seed", "4"]);
    assert_eq!(out, "3 4 5\n");
}

#[test]
fn detect_lc_takes_the_global_sweep_minimum() {
    let tmp = fixture(&[("g.txt", G1)]);
    let out = run(tmp.path(), &["detect", "--graph", "g.txt", "--seed", "0", "--lc"]);
    assert_eq!(out, "0 1 2\n");
}

#[test]
fn detect_all_lists_nested_communities_and_writes_the_curve() {
    let tmp = fixture(&[("g.txt", G1)]);
    let out =
        run(tmp.path(), &["detect", "--graph", "g.txt", "--seed", "0", "--all", "--curve", "c.tsv"]);
    assert_eq!(out.lines().next(), Some("0 1 2"));

    let curve = fs::read_to_string(tmp.path().join("c.tsv")).unwrap();
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "k\tconductance");
    assert_eq!(lines.len(), 7, "full six-node sweep plus header");
    let row3: Vec<&str> = lines[3].split('\t').collect();
    assert_eq!(row3[0], "3");
    let value: f64 = row3[1].parse().unwrap();
    assert!((value - 1.0 / 7.0).abs() < 1e-15);
}

#[test]
fn detect_translates_external_ids() {
    let tmp = fixture(&[("g.txt", "100 200\n100 300\n200 300\n300 7\n7 8\n8 9\n7 9\n")]);
    let out = run(tmp.path(), &["detect", "--graph", "g.txt", "--seed", "200"]);
    assert_eq!(out, "100 200 300\n");
}

#[test]
fn score_table_has_requested_columns_and_exact_values() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n")]);
    let out = run(
        tmp.path(),
        &["score", "--graph", "g.txt", "--communities", "c.txt", "--scores", "conductance,tpr"],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "community\tsize\tconductance\ttpr");
    assert_eq!(lines.len(), 3);
    let row: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(row[..2], ["0", "3"]);
    assert_eq!(row[2].parse::<f64>().unwrap(), 1.0 / 7.0);
    assert_eq!(row[3].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn goodness_table_on_the_triangle() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n")]);
    let out = run(tmp.path(), &["goodness", "--graph", "g.txt", "--communities", "c.txt"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "community\tsize\tseparability\tdensity\tcohesiveness\tccf");
    assert_eq!(lines[1], "0\t3\t3\t1\t1\t1");
}

#[test]
fn communities_are_split_and_size_filtered() {
    // one raw group made of two components, plus a pair
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 4 5\n0 1 2\n")]);
    let all = run(tmp.path(), &["score", "--graph", "g.txt", "--communities", "c.txt"]);
    assert_eq!(all.lines().count(), 4, "split yields {{0,1}}, {{4,5}}, {{0,1,2}}");
    let filtered = run(
        tmp.path(),
        &["score", "--graph", "g.txt", "--communities", "c.txt", "--min-size", "3"],
    );
    assert_eq!(filtered.lines().count(), 2);
}

#[test]
fn unknown_member_ids_warn_on_stderr() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 99\n")]);
    let out = bin(tmp.path(), &["score", "--graph", "g.txt", "--communities", "c.txt"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning") && err.contains("1 unknown node id"), "stderr: {err}");
}

#[test]
fn perturb_emits_one_row_per_grid_point() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n")]);
    let out = run(
        tmp.path(),
        &[
            "perturb",
            "--graph",
            "g.txt",
            "--communities",
            "c.txt",
            "--score",
            "conductance",
            "--strategy",
            "nodeswap",
            "--grid",
            "0.1:0.6:6",
            "--trials",
            "5",
        ],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "score\tstrategy\tp\tz\tdegenerate");
    assert_eq!(lines.len(), 7);
    for line in &lines[1..] {
        let row: Vec<&str> = line.split('\t').collect();
        assert_eq!(row[0], "conductance");
        assert_eq!(row[1], "nodeswap");
        assert!(row[4] == "true" || row[4] == "false");
    }
}

#[test]
fn correlate_prints_matrix_then_groups() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n0 1\n4 5\n2 3\n")]);
    let out = run(tmp.path(), &["correlate", "--graph", "g.txt", "--communities", "c.txt"]);
    let mut tables = out.split("\n\n");
    let matrix: Vec<&str> = tables.next().unwrap().lines().collect();
    assert_eq!(matrix[0].split('\t').count(), 14, "label column plus 13 scores");
    assert_eq!(matrix.len(), 14);
    let diag: Vec<&str> = matrix[1].split('\t').collect();
    assert_eq!(diag[0], "internal-density");
    assert_eq!(diag[1], "1");
    let groups: Vec<&str> = tables.next().unwrap().lines().collect();
    assert_eq!(groups[0], "group\tscores");
    assert!(groups.len() >= 2);
}

#[test]
fn synth_detection_round_trip_is_perfect_at_extreme_probabilities() {
    let tmp = fixture(&[]);
    let summary = run(
        tmp.path(),
        &[
            "synth",
            "--blocks",
            "2",
            "--block-size",
            "3",
            "--p-in",
            "1.0",
            "--p-out",
            "0.0",
            "--seed-rng",
            "5",
            "--graph-out",
            "g.txt",
            "--communities-out",
            "c.txt",
        ],
    );
    assert_eq!(summary, "nodes\tedges\tcommunities\n6\t6\t2\n");
    assert_eq!(fs::read_to_string(tmp.path().join("c.txt")).unwrap(), "0 1 2\n3 4 5\n");

    let eval = run(
        tmp.path(),
        &["eval-seed", "--graph", "g.txt", "--communities", "c.txt", "--seeds", "6"],
    );
    let mean: Vec<&str> =
        eval.lines().last().expect("aggregate row").split('\t').collect();
    assert_eq!(mean[0], "mean");
    assert_eq!(mean[5], "1", "mean F1 must be exactly 1, got {eval}");
}

#[test]
fn eval_seed_single_seed_mode() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n")]);
    let out = run(
        tmp.path(),
        &["eval-seed", "--graph", "g.txt", "--communities", "c.txt", "--seed", "0"],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "seed\ttruth\tdetected\tprecision\trecall\tf1\tf1_over_truth");
    assert_eq!(lines[1], "0\t1\t1\t1\t1\t1\t1");
    assert_eq!(lines.len(), 3);
}

#[test]
fn stats_summarizes_graph_and_communities() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n")]);
    let graph_only = run(tmp.path(), &["stats", "--graph", "g.txt"]);
    assert_eq!(graph_only, "nodes\tedges\tmedian_degree\n6\t7\t2\n");
    let with_comms =
        run(tmp.path(), &["stats", "--graph", "g.txt", "--communities", "c.txt"]);
    assert_eq!(
        with_comms,
        "nodes\tedges\tmedian_degree\tcommunities\tmin_size\tmax_size\tmean_size\n\
         6\t7\t2\t2\t3\t3\t3\n"
    );
}

#[test]
fn usage_errors_exit_2_and_data_errors_exit_1() {
    let tmp = fixture(&[("g.txt", G1), ("bad.txt", "0 not-a-number\n")]);
    let dir = tmp.path();

    // usage: unknown subcommand, unknown flag, bad token values
    assert_eq!(bin(dir, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(dir, &["stats", "--graph", "g.txt", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        bin(dir, &["detect", "--graph", "g.txt", "--seed", "0", "--score", "conductanc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin(dir, &["perturb", "--graph", "g.txt", "--communities", "g.txt", "--grid", "0:2:3"])
            .status
            .code(),
        Some(2)
    );

    // data: missing file, malformed file, unknown seed node
    assert_eq!(bin(dir, &["stats", "--graph", "missing.txt"]).status.code(), Some(1));
    assert_eq!(bin(dir, &["stats", "--graph", "bad.txt"]).status.code(), Some(1));
    assert_eq!(
        bin(dir, &["detect", "--graph", "g.txt", "--seed", "42"]).status.code(),
        Some(1)
    );

    // a broken thread-count env setting is a data error, not a panic
    let out = Command::new(env!("CARGO_BIN_EXE_commscore"))
        .args(["stats", "--graph", "g.txt"])
        .current_dir(dir)
        .env("COMMSCORE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn threads_flag_and_env_agree() {
    let tmp = fixture(&[("g.txt", G1), ("c.txt", "0 1 2\n3 4 5\n")]);
    let flagged = run(
        tmp.path(),
        &["score", "--graph", "g.txt", "--communities", "c.txt", "--threads", "2"],
    );
    let out = Command::new(env!("CARGO_BIN_EXE_commscore"))
        .args(["score", "--graph", "g.txt", "--communities", "c.txt"])
        .current_dir(tmp.path())
        .env("COMMSCORE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(flagged.as_bytes(), out.stdout.as_slice());
}
