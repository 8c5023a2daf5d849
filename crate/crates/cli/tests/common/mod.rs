#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_files(dir: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub reports: Vec<Value>,
}

pub fn run_bin(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_verikit"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 output");
    let reports = stdout
        .lines()
        .filter(|l| l.starts_with('{') && l.ends_with('}'))
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("report is not JSON ({e}): {l}")))
        .collect();
    Run {
        code: out.status.code().expect("exit code"),
        stdout,
        reports,
    }
}

/// `(arguments, expected exit code)`; paths are relative to the fixture directory.
pub fn exit_matrix() -> Vec<(Vec<&'static str>, i32)> {
    let rows: &[(&str, i32)] = &[
        ("kkos solve valid/kkos_path.json", 0),
        ("kkos solve valid/kkos_budget_tight.json", 1),
        ("kkos solve valid/kkos_cycle.json", 2),
        ("kkos reduce valid/kkos_reduce_triangle.json", 0),
        ("kkos reduce valid/kkos_reduce_too_big.json", 1),
        ("kkos reduce valid/kkos_path.json", 2),
        ("kkos certify valid/kkos_certify_edge.json", 0),
        ("kkos certify valid/kkos_certify_dominated.json", 1),
        ("kkos solve invalid/kkos_y_sums_to_2.json", 2),
        ("wilber bound valid/wilber_sequence.json", 0),
        ("wilber merge-check valid/wilber_interleave.json", 0),
        ("wilber decompose valid/wilber_sequence.json", 0),
        ("wilber bound invalid/wilber_key_out_of_range.json", 2),
        ("heap analyze valid/heap_fifo.json", 0),
        ("heap check valid/heap_fifo.json --epsilon 1/4", 0),
        ("heap check valid/heap_fifo.json --epsilon 3/2", 2),
        ("heap check invalid/rational_zero_den.json", 2),
        ("heap analyze invalid/heap_double_insert.json", 2),
        ("partition chi valid/partition_shift_m5.json --assert-greater 2", 0),
        ("partition chi valid/partition_shift_m5.json --assert-greater 3", 1),
        ("partition counterexample valid/partition_shift_m5.json", 1),
        ("partition counterexample valid/partition_shift_m9.json", 0),
        ("partition chi valid/partition_cyclic_k3.json --assert-greater 4", 0),
        ("partition color valid/partition_cyclic_k3.json", 0),
        ("partition color valid/partition_system.json", 0),
        ("partition color valid/partition_unbounded.json", 1),
        ("partition color valid/partition_shift_m5.json", 2),
        ("partition chi invalid/partition_two_sources.json", 2),
        ("tiling verify valid/tiling_sqrt2_5.json", 0),
        ("tiling verify valid/tiling_golden.json", 0),
        ("tiling verify valid/tiling_explicit.json", 0),
        ("tiling verify valid/tiling_perturbed.json", 1),
        ("tiling construct valid/tiling_sqrt2_5.json", 0),
        ("tiling verify valid/tiling_rational_epsilon.json", 2),
        ("tiling verify invalid/surd_not_square_free.json", 2),
        ("tiling verify invalid/surd_zero_den.json", 2),
        ("cce build valid/cce_s3_build.json", 0),
        ("cce check valid/cce_s2_all.json", 0),
        ("cce check valid/cce_s2_single.json", 1),
        ("cce check valid/cce_s2_single.json --epsilon 1", 0),
        ("cce search valid/cce_s2_search.json", 0),
        ("cce search valid/cce_s2_search.json --epsilon 0 --kmax 3", 1),
        ("cce search invalid/rational_not_reduced.json", 2),
        ("cce check invalid/cce_bad_action.json", 2),
        ("cce check valid/heap_fifo.json", 2),
        ("kkos solve invalid/malformed.json", 2),
        ("kkos solve invalid/unknown_kind.json", 2),
        ("heap analyze invalid/wrong_version.json", 2),
        ("kkos solve missing/nothing.json", 2),
        ("frobnicate valid/kkos_path.json", 2),
        ("kkos explode valid/kkos_path.json", 2),
        ("--format yaml kkos solve valid/kkos_path.json", 2),
        ("--jobs 2 wilber bound valid/wilber_sequence.json valid/wilber_interleave.json", 0),
        ("--jobs 2 kkos solve valid/kkos_path.json valid/kkos_budget_tight.json valid/kkos_cycle.json", 2),
    ];
    rows.iter().map(|(a, c)| (a.split_whitespace().collect(), *c)).collect()
}

/// Runs the matrix; returns a description of every row that misbehaved.
pub fn check_exit_matrix() -> Vec<String> {
    let mut failures = Vec::new();
    for (args, expected) in exit_matrix() {
        let run = run_bin(&args);
        let line = args.join(" ");
        if run.code != expected {
            failures.push(format!("{line}: exit {} (expected {expected}): {}", run.code, run.stdout));
            continue;
        }
        if run.reports.is_empty() {
            failures.push(format!("{line}: no JSON report"));
        }
        for r in &run.reports {
            let verdict = r["verdict"].as_str().unwrap_or("");
            let ok = match verdict {
                "holds" => true,
                "violated" | "infeasible" => !r["witness"].is_null(),
                "error" => r["error"]["message"].is_string(),
                _ => false,
            };
            if !ok {
                failures.push(format!("{line}: malformed report {r}"));
            }
        }
    }
    failures
}

/// Every valid fixture must already be in canonical form.
pub fn check_roundtrip() -> Vec<String> {
    let mut failures = Vec::new();
    for path in fixture_files("valid") {
        let text = std::fs::read_to_string(&path).unwrap();
        match verikit_cli::wire::parse_instance(&text) {
            Ok(file) => {
                let canonical = file.to_canonical_string();
                if canonical != text {
                    failures.push(format!("{}: not canonical", path.display()));
                }
                if verikit_cli::wire::parse_instance(&canonical).as_ref() != Ok(&file) {
                    failures.push(format!("{}: reparse differs", path.display()));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    failures
}
