use std::io::Write;
use std::process::Command;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use simd_redc::limbs::rem_oracle;
use simd_redc::presets::find_preset;
use simd_redc::BigInt;
use simd_redc_cli::{run, Cli, Outcome};

fn exec(args: &[&str]) -> (Outcome, Option<String>) {
    let mut argv = vec!["simd-redc"];
    argv.extend_from_slice(args);
    run(&Cli::try_parse_from(argv).expect("arguments parse"))
}

fn stdout(args: &[&str]) -> String {
    let (out, err) = exec(args);
    assert_eq!(out.code, 0, "{args:?}: {err:?}");
    out.stdout
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_simd-redc")).args(args).output().unwrap()
}

fn redc_counts(backend: &str, seed: &str) -> Value {
    let out = stdout(&["count", "--prime", "p503", "--backend", backend, "--ops", "redc", "--seed", seed]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["shape_deterministic"], true);
    v["ops"][0]["counts"].clone()
}

#[test]
fn examples_reproduce() {
    let out = stdout(&["examples"]);
    assert!(out.contains("result: PASS"));
    assert!(!out.contains("MISMATCH"));
    assert!(out.contains("expected (40000,20001,0,0)"));
    let v: Value = serde_json::from_str(&stdout(&["examples", "--json"])).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn default_validation_passes() {
    let out = stdout(&["validate", "--trials", "32"]);
    assert!(out.ends_with("result: PASS\n"), "{out}");
    for suite in ["precompute", "addition", "generic-reduction", "friendly-reduction", "field", "lazy"] {
        assert!(out.contains(&format!("suite {suite}")), "{suite}");
    }
}

#[test]
fn validation_is_reproducible() {
    for prime in ["p62207", "p434"] {
        let args = ["validate", "--prime", prime, "--trials", "24", "--seed", "42", "--json"];
        assert_eq!(stdout(&args), stdout(&args));
    }
    let a = binary(&["validate", "--trials", "16", "--seed", "9"]);
    let b = binary(&["validate", "--trials", "16", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn corrupted_precompute_is_reported() {
    let out = binary(&["validate", "--trials", "4", "--corrupt-precompute", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("context construction failed"), "{text}");
    assert!(text.ends_with("result: FAIL\n"));
}

#[test]
fn p503_count_claim() {
    assert_eq!(redc_counts("friendly-reference", "1")["lane_mul_product"], 32);
    assert_eq!(redc_counts("friendly-proposed", "1")["lane_mul_product"], 24);
}

#[test]
fn counts_depend_only_on_shape() {
    for backend in ["generic-reference", "generic-proposed", "friendly-reference", "friendly-proposed"] {
        assert_eq!(redc_counts(backend, "1"), redc_counts(backend, "77"), "{backend}");
    }
    let a = stdout(&["count", "--prime", "p62207", "--seed", "3"]);
    let b = stdout(&["count", "--prime", "p62207", "--seed", "4"]);
    assert_eq!(a, b);
}

#[test]
fn empty_count_costs_nothing() {
    let v: Value = serde_json::from_str(&stdout(&["count", "--ops", "none"])).unwrap();
    assert_eq!(v["ops"].as_array().unwrap().len(), 0);
    for report in v["total"]["reports"].as_array().unwrap() {
        assert_eq!(report["weighted_cycles"], 0);
        assert!(report["counts"].as_object().unwrap().values().all(|c| c == 0));
    }
}

#[test]
fn sve_profile_prices_multiplies_at_nine_cycles() {
    let v: Value = serde_json::from_str(&stdout(&[
        "count",
        "--backend",
        "friendly-proposed",
        "--ops",
        "redc",
        "--profile",
        "a64fx-sve",
    ]))
    .unwrap();
    let report = &v["ops"][0]["reports"][0];
    assert_eq!(report["profile"], "a64fx-sve");
    assert!(report["weighted_cycles"].as_u64().unwrap() >= 24 * 9);
}

#[test]
fn redc_one_shots() {
    assert_eq!(stdout(&["redc", "0x0", "--prime", "p62207"]), "0x0\n");
    for backend in ["generic-reference", "generic-proposed", "friendly-reference", "friendly-proposed"] {
        assert_eq!(stdout(&["redc", "0x5f5e100", "--prime", "p62207", "--backend", backend]), "0xdb88\n");
    }
    let (out, err) = exec(&["redc", "0xf2ff0000", "--prime", "p62207"]);
    assert_eq!(out.code, 2);
    assert!(err.unwrap().contains("pR = 0xf2ff0000"));
}

#[test]
fn mulmod_matches_oracle() {
    let preset = find_preset("p503").unwrap();
    let p = preset.modulus().unwrap();
    let cfg = preset.cfg().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for backend in ["generic-proposed", "friendly-proposed"] {
        for _ in 0..8 {
            let mut draw = || {
                let raw: Vec<u64> = (0..9).map(|_| rng.gen()).collect();
                rem_oracle(&BigInt::from_limbs(raw, cfg.with_limbs(9).unwrap()).unwrap(), &p).unwrap()
            };
            let (a, b) = (draw(), draw());
            let want = rem_oracle(&(&a * &b), &p).unwrap().to_hex();
            let got = stdout(&["mulmod", &a.to_hex(), &b.to_hex(), "--backend", backend]);
            assert_eq!(got.trim(), want);
        }
    }
    let (out, err) = exec(&["mulmod", "0xf2ff", "0x1", "--prime", "p62207"]);
    assert_eq!(out.code, 2);
    assert!(err.unwrap().contains("bound p"));
}

#[test]
fn config_file_mirrors_flags() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "prime = \"p62207\"\ntrials = 20\nseed = 5\nadd-strategy = \"reduced-saturate:4\"").unwrap();
    let path = file.path().to_str().unwrap();
    let from_file = stdout(&["validate", "--config", path]);
    let from_flags = stdout(&[
        "validate",
        "--prime",
        "p62207",
        "--trials",
        "20",
        "--seed",
        "5",
        "--add-strategy",
        "reduced-saturate:4",
    ]);
    assert_eq!(from_file, from_flags);
    assert!(from_file.contains("reduced-saturate:4"));
    // flags override the file
    assert!(stdout(&["validate", "--config", path, "--seed", "6"]).contains("seed 6"));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "primes = \"p62207\"").unwrap();
    assert_eq!(exec(&["validate", "--config", bad.path().to_str().unwrap()]).0.code, 2);
}

#[test]
fn user_presets_load() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "[[prime]]\nname = \"p2fff\"\np = \"0x2fff\"\nomega = 4\nlimbs = 4").unwrap();
    let path = file.path().to_str().unwrap();
    let out = stdout(&["validate", "--presets", path, "--prime", "p2fff", "--trials", "16"]);
    assert!(out.contains("suite lazy"));
    assert!(!out.contains("skipped: R <= 4p"));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["validate", "--prime", "p9999"],
        vec!["validate", "--add-strategy", "reduced-popcount:43"],
        vec!["validate", "--backend", "montgomery"],
        vec!["count", "--profile", "zen4"],
        vec!["count", "--ops", "mul"],
        vec!["validate", "--prime", "0x10"],
        vec!["count", "--prime", "0xfffd", "--omega", "4", "--backend", "friendly-proposed"],
    ] {
        let (out, err) = exec(&args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(err.is_some());
    }
    assert_eq!(binary(&["validate", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn hex_primes_pick_a_radix() {
    let out = stdout(&["validate", "--prime", "0xf2ff", "--omega", "4", "--trials", "8"]);
    assert!(out.contains("(omega=4, limbs=4)"));
    let out = stdout(&["validate", "--prime", "p503", "--omega", "52", "--limbs", "10", "--trials", "8"]);
    assert!(out.contains("(omega=52, limbs=10)"));
}
