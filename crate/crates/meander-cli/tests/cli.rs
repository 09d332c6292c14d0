use std::process::{Command, Output};
use std::str::FromStr;

use meander_core::exactval::{parse_rational, PiValue};
use meander_core::meanderconst::constants;
use serde_json::Value;

fn meander(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meander")).args(args).env("RUST_LOG", "warn").output().expect("spawn meander")
}

fn stdout(args: &[&str]) -> String {
    let out = meander(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    serde_json::from_str(&stdout(&a)).unwrap()
}

#[test]
fn correlator_value() {
    assert_eq!(stdout(&["correlator", "2", "2", "3"]), "29/5760\n");
    assert_eq!(stdout(&["correlator", "1", "1", "1"]), "1/24\n");
}

#[test]
fn constants_json_round_trip() {
    let j = json(&["constants", "--genus", "2", "--bigons", "2"]);
    assert_eq!(j["p1"], "9230760/337 * pi^-10");
    assert_eq!(j["p1_decimal"], "0.292489");
    assert_eq!(j["seed"], 0);
    let c = constants(2, 2).unwrap();
    let pi = |k: &str| PiValue::from_str(j[k].as_str().unwrap()).unwrap();
    assert_eq!(pi("vol"), c.vol);
    assert_eq!(pi("cyl11"), c.cyl11);
    assert_eq!(pi("c1"), c.c1);
    assert_eq!(pi("p1"), c.p1);
    assert_eq!(pi("c_gn"), c.c_gn);
    assert_eq!(parse_rational(j["cyl1"].as_str().unwrap()).unwrap(), c.cyl1);
}

#[test]
fn tables_verbatim() {
    let t1 = json(&["tables", "sep-nonsep"]);
    let got: Vec<&str> = t1["rows"].as_array().unwrap().iter().map(|r| r["limit"].as_str().unwrap()).collect();
    assert_eq!(
        got,
        [
            "1/6",
            "1/36",
            "5/882",
            "35/28344",
            "7/25218",
            "77/1210716",
            "143/9686190",
            "715/206641008",
            "12155/14878191186"
        ]
    );
    let t2 = stdout(&["tables", "two-correlators", "--format", "csv"]);
    assert_eq!(
        t2,
        "g,sum\n1,1/8\n2,49/2880\n3,1181/725760\n4,467/3870720\n5,33631/4598415360\n6,322873/860823355392\n7,205001/12297476505600\n"
    );
    let ex = json(&["tables", "probability-example"]);
    assert_eq!(ex["vol_q22"], "337/18144 * pi^10");
    assert_eq!(ex["cyl1_q22"], "2035/4");
    assert_eq!(ex["p22"], "9230760/337 * pi^-10");
    assert_eq!(ex["p22_decimal"], "0.292489");
}

#[test]
fn deterministic_and_seeded_sampling() {
    let args = ["oracle", "quadratic", "--max-width", "5", "--sample", "2000", "--seed", "42", "--format", "csv"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert!(a.starts_with("genus,bigons,mu,single_h,single_v,squares,count,ci_low,ci_high,hits,samples\n"));
    let j = json(&["oracle", "quadratic", "--max-width", "2", "--sample", "10", "--seed", "9"]);
    assert_eq!(j["seed"], 9);
    let err = meander(&["oracle", "oriented", "--crossings", "3", "--genus", "1"]);
    assert!(String::from_utf8_lossy(&err.stderr).is_empty());
    let logged = Command::new(env!("CARGO_BIN_EXE_meander"))
        .args(["--seed", "5", "correlator", "0", "0", "0", "0"])
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&logged.stderr).contains("seed = 5"));
}

#[test]
fn oracle_csv_shape() {
    let csv = stdout(&["oracle", "quadratic", "--max-width", "4", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("genus,bigons,mu,single_h,single_v,squares,count"));
    let meanders: u64 = lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[0] == "0" && f[4] == "true" && f[5] == "4")
        .map(|f| f[6].parse::<u64>().unwrap())
        .sum();
    assert_eq!(meanders, 2);
    assert_eq!(stdout(&["oracle", "oriented", "--crossings", "3", "--genus", "1"]), "4\n");
    let ab = json(&["oracle", "abelian", "--max-squares", "3"]);
    let tori: u64 = ab["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["genus"] == 1 && r["single_v"] == true && r["squares"] == 3)
        .map(|r| r["count"].as_u64().unwrap())
        .sum();
    assert_eq!(tori, 2);
}

#[test]
fn asym_commands() {
    let v = json(&["asym", "abelian-p1-expansion", "--params", "g=10"]);
    assert!((v["ln_value"].as_f64().unwrap().exp() - 0.027278).abs() < 1e-5);
    let list = stdout(&["asym", "list", "--format", "csv"]);
    assert!(list.lines().count() > 20);
    let check = stdout(&["asym", "check", "cyl1-large-n", "--params", "g=1", "--range", "10..12", "--format", "csv"]);
    let mut lines = check.lines();
    assert_eq!(lines.next(), Some("n,exact,asymptotic,ratio"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(meander(&["bogus"]).status.code(), Some(2));
    assert_eq!(meander(&["asym", "no-such-form"]).status.code(), Some(2));
    assert_eq!(meander(&["oracle", "quadratic", "--max-width", "30"]).status.code(), Some(3));
    assert_eq!(meander(&["abelian", "--genus", "3"]).status.code(), Some(3));
    assert_eq!(meander(&["volume", "--genus", "0", "--bigons", "1"]).status.code(), Some(4));
    assert_eq!(meander(&["correlator", "0", "1"]).status.code(), Some(4));
    assert_eq!(meander(&["--help"]).status.code(), Some(0));
}

#[test]
fn volume_table_file() {
    let dir = std::env::temp_dir().join(format!("meander-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.txt");
    std::fs::write(&good, "# genus coefficient pi exponent\n3 1/10000 6\n").unwrap();
    let j = json(&["abelian", "--genus", "3", "--volume-table", good.to_str().unwrap()]);
    assert_eq!(j["vol_h"], "1/10000 * pi^6");
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "3 1/2\n").unwrap();
    assert_eq!(meander(&["abelian", "--genus", "3", "--volume-table", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.join("missing.txt");
    assert_eq!(
        meander(&["abelian", "--genus", "3", "--volume-table", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}
