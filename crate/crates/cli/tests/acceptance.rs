//! Acceptance gate for the command-line surface: fixed invocations of
//! `classify`, `power` and `region` must reproduce the committed golden
//! files byte for byte, across three parameter sets that span the three
//! regimes.  Any change to the output format shows up here as a diff.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

/// The three fixed parameter sets: one per regime.
const SETS: [(&str, &[&str]); 3] = [
    ("anticoercive", &["--n", "5", "--p", "3", "--q", "3"]),
    ("homogeneous", &["--n", "3", "--p", "2", "--q", "2"]),
    ("coercive", &["--n", "3", "--p", "1.5", "--q", "2.5"]),
];

/// The weight pair used with each set above.
const WEIGHTS: [&[&str]; 3] = [
    &["--a", "-0.5", "--b", "-0.5"],
    &["--a", "-2", "--b", "-2"],
    &["--a", "1", "--b", "-1"],
];

fn golden_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect()
}

fn check_golden(criterion: &str, name: &str, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_hle"))
        .args(args)
        .output()
        .expect("the binary runs");
    assert!(
        out.status.success(),
        "ACCEPTANCE {criterion}: FAIL — `hle {}` exited with {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let expected = fs::read(golden_path(name))
        .unwrap_or_else(|err| panic!("ACCEPTANCE {criterion}: FAIL — fixture {name} unreadable: {err}"));
    assert!(
        out.stdout == expected,
        "ACCEPTANCE {criterion}: FAIL — {name} differs from the committed fixture\n\
         expected: {}\n\
         actual:   {}",
        String::from_utf8_lossy(&expected),
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn acceptance_cli_golden_files() {
    const CRITERION: &str = "cli_golden_files";
    for (idx, (label, sys)) in SETS.iter().enumerate() {
        let weights = WEIGHTS[idx];

        let mut classify = vec!["classify"];
        classify.extend_from_slice(sys);
        classify.extend_from_slice(weights);
        check_golden(CRITERION, &format!("{label}_classify.json"), &classify);

        let mut power = vec!["power"];
        power.extend_from_slice(sys);
        power.extend_from_slice(weights);
        check_golden(CRITERION, &format!("{label}_power.json"), &power);

        let mut region = vec!["region"];
        region.extend_from_slice(sys);
        region.extend_from_slice(&["--grid", "8"]);
        check_golden(CRITERION, &format!("{label}_region.csv"), &region);
    }
    println!("ACCEPTANCE {CRITERION}: PASS");
}
