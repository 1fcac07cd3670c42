mod common;

use sha2::{Digest, Sha256};
use tempfile::tempdir;

use common::{conforms, cubecover, cubecover_env, write, ERDOS};

#[test]
fn verify_covsys_exit_codes() {
    let dir = tempdir().unwrap();
    let erdos = write(dir.path(), "erdos.txt", ERDOS);
    let run = cubecover(&["verify-covsys", erdos.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json();
    conforms("verify-covsys", &doc);
    assert_eq!(doc["is_cover"], true);
    assert_eq!(doc["is_distinct"], true);
    assert_eq!(doc["is_exact"], false);
    assert_eq!(doc["lcm"], 12);
    let digest = hex::encode(Sha256::digest(ERDOS.as_bytes()));
    assert_eq!(doc["manifest"]["input_digests"][erdos.to_str().unwrap()], digest.as_str());

    let half = write(dir.path(), "half.txt", "0 mod 2\n");
    let run = cubecover(&["verify-covsys", half.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 1);
    let doc = run.json();
    conforms("verify-covsys", &doc);
    assert_eq!(doc["uncovered"], serde_json::json!([1]));
    assert_eq!(doc["mndr"], serde_json::Value::Null);

    let bad = write(dir.path(), "bad.txt", "0 mod 2\n3 mod\n");
    let run = cubecover(&["verify-covsys", bad.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("line 2"), "{}", run.stderr);

    let run = cubecover(&["verify-covsys", bad.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 2);
    let doc = run.json();
    conforms("error", &doc);
    assert_eq!(doc["error"]["kind"], "parse");

    let missing = dir.path().join("missing.txt");
    assert_eq!(cubecover(&["verify-covsys", missing.to_str().unwrap()]).code, 2);
}

#[test]
fn verify_covsys_reports_structure_for_exact_covers() {
    let dir = tempdir().unwrap();
    let exact = write(dir.path(), "exact.txt", "# split 0 mod 1 by 2, then 1 mod 2 by 3\n0 mod 2\n1 mod 6\n3 mod 6\n5 mod 6\n");
    let run = cubecover(&["verify-covsys", exact.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 0);
    let doc = run.json();
    conforms("verify-covsys", &doc);
    assert_eq!(doc["is_exact"], true);
    assert_eq!(doc["mndr"]["holds"], true);
    assert_eq!(doc["znam"]["smallest_prime"], 2);
    assert_eq!(doc["znam"]["multiplicity"], 3);
    let text = cubecover(&["verify-covsys", exact.to_str().unwrap()]).stdout;
    assert!(text.contains("top moduli equal: yes"));
}

#[test]
fn crt_map_examples() {
    let dir = tempdir().unwrap();
    let sys = write(dir.path(), "s30.txt", "0 mod 2\n1 mod 3\n2 mod 5\n7 mod 10\n");
    let run = cubecover(&["crt-map", sys.to_str().unwrap(), "--check", "--json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = run.json();
    conforms("crt-map", &doc);
    assert_eq!(doc["primes"], serde_json::json!([2, 3, 5]));
    let seven = &doc["subboxes"][3];
    assert_eq!((seven["residue"].as_u64(), seven["modulus"].as_u64()), (Some(7), Some(10)));
    let fixed: Vec<(u64, u64)> = seven["fixed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["prime"].as_u64().unwrap(), f["value"].as_u64().unwrap()))
        .collect();
    assert_eq!(fixed, vec![(2, 1), (5, 2)]);
    assert_eq!(doc["equivalence"], true);

    let boxes = dir.path().join("s30.box");
    let run = cubecover(&["crt-map", sys.to_str().unwrap(), "-o", boxes.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    let run = cubecover(&["box-check", boxes.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 1, "the system leaves residues uncovered");
    let doc = run.json();
    conforms("box-check", &doc);
    assert_eq!(doc["uncovered_count"], 8);
    assert_eq!(doc["reciprocals"]["sum"], "31/30");

    let erdos = write(dir.path(), "erdos.txt", ERDOS);
    let run = cubecover(&["crt-map", erdos.to_str().unwrap()]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("2^2"), "{}", run.stderr);
    let doc = cubecover(&["crt-map", erdos.to_str().unwrap(), "--json"]).json();
    conforms("error", &doc);
    assert_eq!(doc["error"]["kind"], "unsupported");

    let one = write(dir.path(), "one.txt", "0 mod 1\n");
    let doc = cubecover(&["crt-map", one.to_str().unwrap(), "--json"]).json();
    conforms("crt-map", &doc);
    assert_eq!(doc["subboxes"][0]["fixed"], serde_json::json!([]));
}

#[test]
fn bounds_tables() {
    let run = cubecover(&["bounds", "--table", "A", "--max-n", "14", "--json"]);
    assert_eq!(run.code, 0);
    let doc = run.json();
    conforms("bounds", &doc);
    assert_eq!(doc["rows"][13]["n"], 14);
    assert_eq!(doc["rows"][13]["bound"], 10);
    assert_eq!(doc["rows"][13]["value"], "19321/16384");
    assert_eq!(doc["notes"].as_array().unwrap().len(), 1);

    let text = cubecover(&["bounds", "--table", "b", "--max-n", "4", "--mode", "strict"]).stdout;
    let last = text.lines().last().unwrap();
    assert_eq!(last.split_whitespace().collect::<Vec<_>>(), vec!["4", "2", "3/2"]);

    let run = cubecover(&["bounds", "--table", "A", "--max-n", "0"]);
    assert_eq!(run.code, 2);
    assert_eq!(cubecover(&["bounds", "--table", "C"]).code, 2);
}

#[test]
fn construct_check_round_trip() {
    let dir = tempdir().unwrap();
    for (n, t) in [(1, 1), (3, 1), (5, 2), (9, 4), (10, 3), (7, 7)] {
        let path = dir.path().join(format!("p{n}_{t}.dnf"));
        let run = cubecover(&["dnf-construct", "--n", &n.to_string(), "--t", &t.to_string(), "-o", path.to_str().unwrap()]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let min = t.min(n - t);
        let run = cubecover(&["dnf-check", path.to_str().unwrap(), "--min-size", &min.to_string(), "--json"]);
        assert_eq!(run.code, 0, "n={n} t={t}: {}", run.stdout);
        let doc = run.json();
        conforms("dnf-check", &doc);
        assert_eq!(doc["is_tautology"], true);
        assert_eq!(doc["is_distinct"], true);
        assert_eq!(doc["min_term_size"], min);
    }
    let doc = cubecover(&["dnf-construct", "--n", "4", "--t", "1", "--json"]).json();
    conforms("dnf-construct", &doc);
    assert_eq!(doc["term_count"], 8);
    assert_eq!(cubecover(&["dnf-construct", "--n", "4", "--t", "2"]).code, 2);
    assert_eq!(cubecover(&["dnf-construct", "--n", "4", "--t", "0"]).code, 2);
}

#[test]
fn dnf_check_negative_and_exact() {
    let dir = tempdir().unwrap();
    let partial = write(dir.path(), "p.dnf", "n = 3\nx1\nx2\nx3\n");
    let run = cubecover(&["dnf-check", partial.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 1);
    assert_eq!(run.json()["uncovered_count"], 1);

    let exact = write(dir.path(), "e.dnf", "n = 2\nx1\n!x1 & x2\n!x1 & !x2\n");
    let doc = cubecover(&["dnf-check", exact.to_str().unwrap(), "--json"]).json();
    conforms("dnf-check", &doc);
    assert_eq!(doc["is_exact"], true);
    assert_eq!(doc["mndr"]["holds"], true);
    assert_eq!(doc["mndr"]["multiplicity"], 2);

    let bad = write(dir.path(), "b.dnf", "n = 3\nx1 & y2\n");
    let run = cubecover(&["dnf-check", bad.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("line 2"));
}

#[test]
fn search_writes_witness_and_outcome() {
    let dir = tempdir().unwrap();
    let witness = dir.path().join("w.dnf");
    let outcome = dir.path().join("o.json");
    let run = cubecover(&[
        "search",
        "--n",
        "3",
        "--uniform",
        "1",
        "--strategy",
        "exhaustive",
        "--witness",
        witness.to_str().unwrap(),
        "--outcome",
        outcome.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let doc = run.json();
    conforms("search", &doc);
    assert_eq!(doc["status"], "ProvedImpossible");
    assert_eq!(doc["uncovered_count"], 1);
    assert_eq!(doc["manifest"]["seed"], 0);
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&outcome).unwrap()).unwrap();
    conforms("search", &file);
    assert_eq!(file["terms"], doc["terms"]);

    let check = cubecover(&["dnf-check", witness.to_str().unwrap(), "--json"]).json();
    assert_eq!(check["uncovered_count"], 1);
    assert_eq!(check["is_distinct"], true);

    let run = cubecover(&["search", "--n", "6", "--min-size", "4", "--witness", witness.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    let check = cubecover(&["dnf-check", witness.to_str().unwrap(), "--min-size", "4"]);
    assert_eq!(check.code, 0, "{}", check.stdout);
}

#[test]
fn search_stdout_is_a_dnf_file() {
    let dir = tempdir().unwrap();
    let run = cubecover(&["search", "--n", "5", "--min-size", "3"]);
    assert_eq!(run.code, 0);
    let path = write(dir.path(), "s.dnf", &run.stdout);
    assert_eq!(cubecover(&["dnf-check", path.to_str().unwrap(), "--min-size", "3"]).code, 0);
}

#[test]
fn search_argument_errors() {
    assert_eq!(cubecover(&["search", "--n", "4"]).code, 2);
    assert_eq!(cubecover(&["search", "--n", "4", "--min-size", "2", "--uniform", "2"]).code, 2);
    assert_eq!(cubecover(&["search", "--n", "4", "--min-size", "5"]).code, 2);
    assert_eq!(cubecover(&["search", "--n", "4", "--min-size", "2", "--budget", "0"]).code, 2);
    let run = cubecover(&["search", "--n", "12", "--min-size", "6", "--strategy", "exhaustive", "--json"]);
    assert_eq!(run.code, 4);
    conforms("error", &run.json());
    assert_eq!(cubecover(&["search", "--n", "25", "--min-size", "6"]).code, 4);
}

#[test]
fn search_is_identical_across_workers() {
    let base = ["search", "--n", "10", "--min-size", "7", "--force-search", "--node-limit", "1500", "--budget", "600", "--json"];
    let one = cubecover(&base).json();
    let mut args = base.to_vec();
    args.extend(["--workers", "3"]);
    let three = cubecover(&args).json();
    for key in ["status", "uncovered_count", "terms", "nodes_explored"] {
        assert_eq!(one[key], three[key], "{key}");
    }
}

#[test]
fn point_cap_from_environment() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("p.dnf");
    cubecover(&["dnf-construct", "--n", "9", "--t", "4", "-o", path.to_str().unwrap()]);
    let run = cubecover_env(&["dnf-check", path.to_str().unwrap(), "--json"], &[("CUBECOVER_POINT_CAP", "256")]);
    assert_eq!(run.code, 4, "{}", run.stdout);
    assert_eq!(run.json()["error"]["kind"], "capacity");
    let run = cubecover_env(&["dnf-check", path.to_str().unwrap(), "--json"], &[("CUBECOVER_POINT_CAP", "512")]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json()["manifest"]["point_cap"], 512);
    let run = cubecover_env(&["bounds", "--table", "A"], &[("CUBECOVER_POINT_CAP", "lots")]);
    assert_eq!(run.code, 2);

    // the congruence window has its own cap on the lcm
    let sys = write(dir.path(), "big.txt", "0 mod 65536\n1 mod 65537\n");
    let run = cubecover(&["verify-covsys", sys.to_str().unwrap()]);
    assert_eq!(run.code, 4, "{}", run.stderr);
    assert!(run.stderr.contains("bits"), "{}", run.stderr);
}

#[test]
fn box_check_parallel_and_cover() {
    let dir = tempdir().unwrap();
    let cover = write(dir.path(), "c.box", "box: 2 2\nfix 1=1\nfix 2=1\nfix 1=0 2=0\n");
    let doc = cubecover(&["box-check", cover.to_str().unwrap(), "--json"]).json();
    conforms("box-check", &doc);
    assert_eq!(doc["is_cover"], true);
    assert_eq!(doc["is_non_parallel"], true);
    assert_eq!(doc["min_fixed"], 1);

    let parallel = write(dir.path(), "p.box", "box: 3 2\nfix 1=0\nfix 1=1\nfix 1=2\n");
    let run = cubecover(&["box-check", parallel.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 0);
    let doc = run.json();
    assert_eq!(doc["is_non_parallel"], false);
    assert_eq!(doc["parallel_violations"].as_array().unwrap().len(), 3);

    let bad = write(dir.path(), "b.box", "box: 2 2\nfix 3=0\n");
    assert_eq!(cubecover(&["box-check", bad.to_str().unwrap()]).code, 2);
}
