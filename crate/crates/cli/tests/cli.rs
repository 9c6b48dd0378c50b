use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn templar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_templar")).args(args).current_dir(dir).env_remove("TEMPLAR_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

const TEMPLATE: &str = "var a = 0; var b = 0; var i = 0;\na = intVal(0, 1000).eval();\nl: b = arithmetic(intId(a, b), intVal(1, 9)).eval();\ni = i + 1;\nif (relation(intId(i), intVal(1, 8); <).eval()) l;\nhalt;\n";

#[test]
fn gen_writes_requested_files_deterministically() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("t.tj"), TEMPLATE).unwrap();
    let run = |out: &str, opt: &str| {
        let o = templar(&["gen", "-t", "t.tj", "-n", "3", "--seed", "7", "--max-iterations", "500", "--opt", opt, "--out", out], d.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files(&d.path().join(out))
    };
    let first = run("a", "all");
    assert_eq!(first.iter().filter(|(n, _)| n.starts_with("gen-") && n.ends_with(".tj")).count(), 3);
    assert!(first.iter().any(|(n, _)| n == "manifest.json"));
    assert_eq!(run("b", "all"), first);
    let none = run("c", "none");
    let programs = |v: &[(String, Vec<u8>)]| v.iter().filter(|(n, _)| n.starts_with("gen-")).cloned().collect::<Vec<_>>();
    assert_eq!(programs(&none), programs(&first));
    assert_eq!(programs(&run("d", "early-stop,hot-fill")), programs(&first));
}

#[test]
fn seed_comes_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let with_env = Command::new(env!("CARGO_BIN_EXE_templar"))
        .args(["gen", "-t", "bundled:sum_compare", "-n", "2", "--max-iterations", "500", "--out", "e"])
        .current_dir(d.path())
        .env("TEMPLAR_SEED", "99")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert!(templar(&["gen", "-t", "bundled:sum_compare", "-n", "2", "--max-iterations", "500", "--seed", "99", "--out", "f"], d.path()).status.success());
    assert_eq!(files(&d.path().join("e")), files(&d.path().join("f")));
    let random = templar(&["gen", "-t", "bundled:sum_compare", "-n", "1", "--max-iterations", "500", "--seed", "random", "--out", "g"], d.path());
    assert!(String::from_utf8_lossy(&random.stderr).contains("seed: "));
}

#[test]
fn run_checksums_agree_and_holes_exit_3() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p.tj"), "var x = 3; var y = 0; y = y + x; if (y < 100) done; x = 0 - x; done: halt;").unwrap();
    let sums: Vec<String> =
        ["ref", "vm", "tiered:1:1"].iter().map(|b| stdout(&templar(&["run", "p.tj", "--backend", b, "--iters", "50"], d.path()))).collect();
    assert_eq!(sums[0].trim().len(), 16);
    assert!(sums.iter().all(|s| *s == sums[0]));
    assert_eq!(stdout(&templar(&["run", "p.tj", "--iters", "0"], d.path())).trim(), "0000000000000000");
    fs::write(d.path().join("h.tj"), "var a = 0; a = intVal().eval(); halt;").unwrap();
    assert_ne!(templar(&["run", "h.tj"], d.path()).status.code(), Some(0));
    assert_eq!(templar(&["run", "h.tj", "--allow-holes"], d.path()).status.code(), Some(3));
}

#[test]
fn campaign_exit_codes_and_repro() {
    let d = tempfile::tempdir().unwrap();
    let common = ["campaign", "-t", "bundled:const_relation", "-t", "bundled:sum_compare", "-n", "10", "--max-iterations", "2000", "--iters", "300"];
    let clean = templar(&common, d.path());
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    assert!(stdout(&clean).is_empty());

    let mut args = common.to_vec();
    args.extend(["--inject", "FOLD_LT_SWAP", "--out", "run"]);
    let faulty = templar(&args, d.path());
    assert_eq!(faulty.status.code(), Some(1));
    let reports: Vec<serde_json::Value> = stdout(&faulty).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!reports.is_empty());
    for r in &reports {
        let cmd = r["repro"].as_str().unwrap();
        let argv: Vec<&str> = cmd.split_whitespace().skip(1).collect();
        let again = templar(&argv, d.path());
        let verdict: serde_json::Value = serde_json::from_str(stdout(&again).trim()).unwrap();
        assert_eq!(verdict, r["verdict"], "{cmd}");
    }
    let saved = fs::read_to_string(d.path().join("run/reports.jsonl")).unwrap();
    assert_eq!(saved, stdout(&faulty));

    let reloaded = templar(&["campaign", "--manifest", "run/manifest.json"], d.path());
    assert_eq!(reloaded.status.code(), Some(1));
    assert_eq!(stdout(&reloaded), stdout(&faulty));

    let missing = templar(&["campaign", "-t", "nope.tj", "-n", "1"], d.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn extract_output_parses_and_generates() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p.tj"), "var s1 = 0; var s2 = 0; s1 = 45350238; s2 = 681339300; if (s1 < s2) l9; l9: halt;").unwrap();
    let o = templar(&["extract", "--input", "p.tj", "--inputs", "s1,s2", "--out", "p.tmpl.tj"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("p.tmpl.tj")).unwrap();
    assert!(text.contains("if (relation(intId(), intId()).eval()) l9;"), "{text}");
    let g = templar(&["gen", "-t", "p.tmpl.tj", "-n", "2", "--max-iterations", "50", "--out", "out"], d.path());
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let bad = templar(&["extract", "--input", "p.tj", "--inputs", "zz"], d.path());
    assert!(!bad.status.success());
}
