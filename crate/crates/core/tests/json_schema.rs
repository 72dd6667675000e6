use binsamp::cli::run;
use serde_json::Value;

const REPORT_FIELDS: [&str; 10] =
    ["alpha", "beta", "c", "n", "p", "safety_factor", "term_arith", "term_lanczos", "value", "zeta"];

fn json_lines(args: &[&str]) -> Vec<Value> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["binsamp"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    assert!(code == 0 || code == 1, "{args:?}: {}", String::from_utf8_lossy(&err));
    String::from_utf8(out)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn bound_reports_have_fixed_fields() {
    for args in [
        vec!["sample", "--n", "100", "--p", "0.3", "--delta-in", "1e-9", "--count", "3"],
        vec!["sample", "--n", "8", "--p", "0.3", "--beta", "64"],
        vec!["bound", "--n", "500", "--p", "0.6", "--beta", "64"],
        vec!["select-precision", "--n", "1000000", "--p", "0.3", "--delta-in", "1e-9"],
    ] {
        let lines = json_lines(&args);
        assert_eq!(lines.len(), 1);
        assert_eq!(keys(&lines[0]), REPORT_FIELDS);
        assert!(lines[0]["n"].is_u64());
        assert!(lines[0]["value"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn huge_n_is_a_json_number() {
    let n = "123456789012345678901234567890";
    let lines = json_lines(&["bound", "--n", n, "--p", "0.25", "--beta", "256"]);
    let text = serde_json::to_string(&lines[0]["n"]).unwrap();
    assert_eq!(text, n);
}

#[test]
fn estimator_output_has_fixed_fields() {
    let dir = std::env::temp_dir().join(format!("binsamp-schema-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("f.dnf");
    std::fs::write(&file, "p dnf 22 2\n1 2 0\n-3 0\n").unwrap();
    let f = file.to_str().unwrap();
    for (kappa, failed) in [("0.5", false), ("1e-12", true)] {
        let lines = json_lines(&["dnf", "count", f, "--kappa", kappa]);
        assert_eq!(keys(&lines[0]), ["T", "delta_prime", "estimate", "failed", "final_p_log2"]);
        assert_eq!(lines[0]["failed"], failed);
        assert_eq!(lines[0]["estimate"].is_null(), failed);
        assert!(lines[0]["final_p_log2"].as_i64().unwrap() <= 0);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
