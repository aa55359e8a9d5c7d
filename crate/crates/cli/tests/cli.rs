//! End-to-end checks of the `stdmap` binary: argument handling, exit
//! codes, error JSON, and the headline numbers.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stdmap"))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("stdmap-cli-{}-{name}", std::process::id()))
}

#[test]
fn bryuno_matches_published_value() {
    let out = tmp("bryuno.csv");
    let result = bin()
        .args(["bryuno", "--omega", "[500,(1)]", "--digits", "30"])
        .args(["--output", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("6.2183599"), "{stdout}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("omega,B,digits_valid"));
    let _ = std::fs::remove_file(out);
}

#[test]
fn rho1_subcommand() {
    let out = tmp("rho1.csv");
    let result = bin()
        .args(["rho1", "--omega", "[2,10,(1)]"])
        .args(["--output", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("0.514"), "{stdout}");
    let _ = std::fs::remove_file(out);
}

#[test]
fn residue_subcommand_fixed_point() {
    let out = tmp("residue.csv");
    let result = bin()
        .args(["residue", "--p", "0", "--q", "1", "--epsilon", "0.5"])
        .args(["--output", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(String::from_utf8(result.stdout).unwrap().contains("0.125"));
    let _ = std::fs::remove_file(out);
}

#[test]
fn domain_error_is_json_with_exit_1() {
    // Bryuno of a rational rotation number diverges
    let result = bin()
        .args(["bryuno", "--omega", "[2]"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(json["code"], "rotation");
    assert!(json["message"].as_str().unwrap().contains("Bryuno"));
    assert!(json["context"].is_object());
}

#[test]
fn parse_error_exits_2() {
    let result = bin().args(["bryuno"]).output().unwrap(); // missing --omega
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn bad_bracket_is_domain_error() {
    let result = bin().args(["bryuno", "--omega", "[zzz]"]).output().unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8(result.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(json["code"], "rotation");
}

#[test]
fn critical_golden_to_four_digits() {
    // the acceptance-criterion example: file contains 0.9716
    let out = tmp("critical.csv");
    let cache = tmp("critical-cache");
    let result = bin()
        .args(["critical", "--omega", "[(1)]", "--target-digits", "4"])
        .args(["--k-max", "14", "--max-q", "5000", "--max-digits", "150"])
        .args(["--output", out.to_str().unwrap()])
        .args(["--cache-dir", cache.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("0.9716"), "{csv}");
    // resumable state + history written
    assert!(out.with_extension("history.json").exists());
    let rerun = bin()
        .args(["critical", "--omega", "[(1)]", "--target-digits", "4"])
        .args(["--k-max", "14", "--max-q", "5000", "--max-digits", "150"])
        .args(["--output", out.to_str().unwrap()])
        .args(["--cache-dir", cache.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(rerun.status.success());
    let csv2 = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv, csv2, "cached rerun not identical");
    let _ = std::fs::remove_file(out.with_extension("history.json"));
    let _ = std::fs::remove_file(out);
    let _ = std::fs::remove_dir_all(cache);
}

#[test]
fn slopes_and_fit_from_csv() {
    let data = tmp("table1.csv");
    let mut csv = String::from("omega,value\n");
    for (omega, value) in [
        ("[500,(1)]", "0.016585"),
        ("[700,(1)]", "0.0121005"),
        ("[1000,(1)]", "0.0086401"),
        ("[2000,(1)]", "0.0044599"),
        ("[4000,(1)]", "0.0022854"),
        ("[7000,(1)]", "0.0013265"),
    ] {
        csv.push_str(&format!("\"{omega}\",{value}\n"));
    }
    std::fs::write(&data, csv).unwrap();

    let slopes_out = tmp("slopes.csv");
    let result = bin()
        .args(["slopes", "--input", data.to_str().unwrap()])
        .args(["--output", slopes_out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let slopes = std::fs::read_to_string(&slopes_out).unwrap();
    assert!(slopes.contains("0.9399"), "{slopes}");

    let fit_out = tmp("fit.csv");
    let result = bin()
        .args(["fit", "--input", data.to_str().unwrap(), "--model", "linear"])
        .args(["--output", fit_out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    let summary = String::from_utf8(result.stdout).unwrap();
    assert!(summary.contains("beta"), "{summary}");

    for f in [data, slopes_out, fit_out] {
        let _ = std::fs::remove_file(f);
    }
}

#[test]
fn reproduce_t11_is_exact() {
    let dir = tmp("repro-t11");
    let result = bin()
        .args(["reproduce", "--table", "T11", "--tier", "desk"])
        .args(["--output", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(dir.join("T11.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16); // header + 15 rows
    assert!(dir.join("summary.txt").exists());
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn lindstedt_dump() {
    let out = tmp("lindstedt.csv");
    let result = bin()
        .args(["lindstedt", "--omega", "[(1)]", "--order", "6", "--digits", "40"])
        .args(["--output", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("k,nu,s_nu"));
    assert!(csv.lines().count() > 6);
    let _ = std::fs::remove_file(out);
}
