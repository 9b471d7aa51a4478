use std::process::{Command, Output};

fn drinfeld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drinfeld"))
        .args(args)
        .env_remove("DRINFELD_PREC")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a TSV report: everything after the '#' lines and the header.
fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

#[test]
fn certificate_json_carries_the_constant() {
    let o = drinfeld(&["certificate", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["config"]["q"], 3);
    // 2400·4/ln 2 = 13849.8723925...
    let lo: f64 = v["result"]["final_bound_loglog"]["lo"].as_str().unwrap().parse().unwrap();
    let hi: f64 = v["result"]["final_bound_loglog"]["hi"].as_str().unwrap().parse().unwrap();
    let want = 9600.0 / std::f64::consts::LN_2;
    assert!(lo <= want + 1e-9 && want - 1e-9 <= hi, "{lo} {hi}");
}

#[test]
fn andre_oort_search_finds_degree_eight_only() {
    let o = drinfeld(&["search-andre-oort", "--q", "3", "--dbound", "81", "--prec", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let hits = rows(&o);
    assert!(!hits.is_empty());
    assert!(hits.iter().all(|r| r[0] == "8"));
    // (T − T²)⁴ with T − T² = 2T² + T over F_3.
    assert!(hits.iter().any(|r| r[1] == "T^8+2*T^7+2*T^5+T^4"));
    assert!(stdout(&o).contains("# hits=6 min_hit_deg=8 forbidden_max_deg=7"));
}

#[test]
fn verify_q2_passes() {
    let o = drinfeld(&["verify", "--q", "2", "--dbound", "64", "--prec", "24"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(rows(&o).iter().all(|r| r[1] == "true"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["search-units", "--q", "2", "--dbound", "16", "--prec", "24", "--output", "json"];
    let a = drinfeld(&args);
    let b = drinfeld(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = drinfeld(&["enumerate", "--q", "3", "--dbound", "27"]);
    let d = drinfeld(&["enumerate", "--q", "3", "--dbound", "27"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn single_order_commands() {
    let o = drinfeld(&["class-number", "--q", "3", "--disc", "2*T^2+T"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &rows(&o)[0];
    assert_eq!((r[0].as_str(), r[1].as_str(), r[2].as_str(), r[3].as_str(), r[4].as_str()), ("2", "2", "2", "1,1", "0"));

    let o = drinfeld(&["hilbert", "--q", "3", "--disc", "2*T^2+T"]);
    assert_eq!(rows(&o)[0][1], "T^8+2*T^7+2*T^5+T^4");
    assert!(stdout(&o).contains("# truncation a = 1, b = 0:"));

    let o = drinfeld(&["height", "--q", "3", "--disc", "2*T^2+T"]);
    let r = &rows(&o)[0];
    assert_eq!((r[1].as_str(), r[2].as_str()), ("9,-1", "9/2"));

    let o = drinfeld(&["enumerate", "--q", "2", "--insep", "--conductor", "T"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!rows(&o).is_empty());
}

#[test]
fn configuration_is_echoed() {
    let o = Command::new(env!("CARGO_BIN_EXE_drinfeld"))
        .args(["hilbert", "--q", "3", "--disc", "2*T^2+T", "--seed", "7"])
        .env("DRINFELD_PREC", "40")
        .output()
        .unwrap();
    let s = stdout(&o);
    assert!(s.contains("prec=40 seed=7"), "{s}");
    assert!(s.contains("# F_q^2 modulus over F_p (low to high): "));
    assert!(s.contains("# order: "));
}

#[test]
fn bad_input_exits_3() {
    for args in [
        vec!["certificate", "--q", "6"],
        vec!["certificate", "--q", "32"],
        vec!["certificate"],
        vec!["hilbert", "--q", "3"],
        vec!["hilbert", "--q", "3", "--disc", "T^2+1"],
        vec!["hilbert", "--q", "3", "--disc", "T^^2"],
        vec!["hilbert", "--q", "2", "--disc", "T"],
        vec!["frobnicate", "--q", "3"],
        vec!["certificate", "--q", "3", "--modulus", "1,2,x"],
    ] {
        let o = drinfeld(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
    }
    assert_eq!(drinfeld(&["certificate", "--q", "32", "--allow-large-q"]).status.code(), Some(0));
}

#[test]
fn help_documents_columns() {
    let o = drinfeld(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for cmd in ["search-andre-oort", "search-units", "certificate", "verify"] {
        assert!(s.contains(cmd));
    }
    assert!(s.contains("Exit codes: 0 ok, 1 invariant violation, 2 precision exhausted, 3 bad input."));
}
