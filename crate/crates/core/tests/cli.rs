use std::fs;
use std::path::Path;
use std::process::Command;

fn lobexec(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lobexec")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, "[grid]\nnt = 8\nnx = 10\nnk = 5\n\n[mc]\npaths = 50\nsteps = 40\n\n[simulate]\nwrite_paths = 2\n").unwrap();
    path.to_string_lossy().into_owned()
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_for_a_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let out = out.to_str().unwrap();
        for cmd in ["solve", "simulate", "policy"] {
            let o = lobexec(&[cmd, "--config", &cfg, "--out", out, "--seed", "17"]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let o = lobexec(&["sweep", "--config", &cfg, "--out", out, "--axis", "lambda", "--values", "0,1,2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(read_dir(Path::new(out)));
    }
    assert_eq!(runs[0], runs[1]);
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["value_field.bin", "slice_t0.csv", "costs.csv", "path_0.csv", "simulate.json", "policy.csv", "rollout.json", "sweep.csv"] {
        assert!(names.contains(&expected), "missing {expected}");
    }

    let other = tmp.path().join("c");
    let o = lobexec(&["simulate", "--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "18"]);
    assert!(o.status.success());
    assert_ne!(fs::read(other.join("costs.csv")).unwrap(), runs[0].iter().find(|(n, _)| n == "costs.csv").unwrap().1);
}

#[test]
fn stability_violation_names_the_time_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nnt = 2\nsubsteps = 1\n").unwrap();
    let o = lobexec(&["solve", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid.nt") && err.contains("stability bound"), "{err}");
}

#[test]
fn bad_configs_exit_nonzero_with_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, needle) in [("[market]\nsigma = -0.2\n", "market.sigma"), ("[market]\nkappa = 1\n", "kappa"), ("[utility]\nfamily = \"cubic\"\n", "utility.family")] {
        let cfg = tmp.path().join("c.toml");
        fs::write(&cfg, text).unwrap();
        let o = lobexec(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{err}");
    }
}

#[test]
fn simulate_accepts_each_strategy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    for s in ["twap", "terminal", "greedy", "jumps"] {
        let out = tmp.path().join(s);
        let o = lobexec(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--strategy", s]);
        assert!(o.status.success(), "{s}: {}", String::from_utf8_lossy(&o.stderr));
        let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("simulate.json")).unwrap()).unwrap();
        assert_eq!(json["strategy"], s);
        assert_eq!(json["records"].as_array().unwrap().len(), 50);
    }
}
