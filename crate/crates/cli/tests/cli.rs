//! End-to-end tests of the `wden` binary: wiring, exit codes, config
//! handling and run-to-run determinism.

use std::path::PathBuf;
use std::process::Command;

fn wden() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wden"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wden_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn list_prints_the_catalog() {
    let out = wden().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "sphere_heat",
        "reduction_ks",
        "potential_oracle",
        "cm_adjudicate",
        "stationary",
        "spin_fk",
        "flat_hamiltonian",
        "generator",
    ] {
        assert!(text.contains(name), "catalog missing {name}");
    }
    assert!(text.contains("e:SL") && text.contains("e:QCMS"));
    assert!(text.lines().count() >= 9);
}

#[test]
fn run_writes_results_and_artifacts() {
    let dir = temp_dir("adjudicate");
    let out = wden()
        .args([
            "run",
            "--experiment",
            "cm_adjudicate",
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["experiment"], "cm_adjudicate");
    assert_eq!(results["anchor"], "e:QCMS");
    assert_eq!(results["pass"], true);
    assert!(dir.join("adjudication.json").is_file());
    let table = std::fs::read_to_string(dir.join("adjudication.txt")).unwrap();
    assert!(table.contains("verdict"));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("ALL CHECKS PASS"));
}

#[test]
fn same_config_twice_gives_byte_identical_results() {
    let dir = temp_dir("determinism");
    let cfg_path = dir.join("exp.toml");
    std::fs::write(
        &cfg_path,
        "experiment = sphere_heat\nmaster_seed = 99\nn_paths = 2000\ndt = 0.002\nt = 0.5\n",
    )
    .unwrap();
    let run = |tag: &str| -> Vec<u8> {
        let out_dir = dir.join(tag);
        let out = wden()
            .args([
                "run",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let summary = String::from_utf8_lossy(&out.stdout).to_string();
        assert!(summary.contains("heat_kernel_mean_deviation"));
        assert!(summary.contains("exp(-t)"));
        assert!(summary.contains("ALL CHECKS PASS"));
        std::fs::read(out_dir.join("results.json")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "results.json must be byte-identical across runs");
}

#[test]
fn smoke_every_experiment_with_reduced_paths() {
    // wiring check: every catalog entry runs and passes its checks at a
    // reduced path count (statistical budgets scale with the stderr)
    for (name, paths) in [
        ("sphere_heat", "2000"),
        ("bessel_moment", "5000"),
        ("reduction_ks", "1200"),
        ("generator", "6000"),
        ("potential_oracle", "40"),
        ("cm_adjudicate", "8"),
        ("stationary", "8000"),
        ("spin_fk", "3000"),
        ("flat_hamiltonian", "3000"),
        ("ground_state", "0"),
    ] {
        let dir = temp_dir(&format!("smoke_{name}"));
        let mut args = vec![
            "run".to_string(),
            "--experiment".to_string(),
            name.to_string(),
            "--seed".to_string(),
            "31415".to_string(),
            "--out".to_string(),
            dir.to_str().unwrap().to_string(),
        ];
        if paths != "0" {
            args.push("--paths".to_string());
            args.push(paths.to_string());
        }
        let out = wden().args(&args).output().unwrap();
        assert!(
            out.status.success(),
            "{name} failed with status {:?}\nstdout: {}\nstderr: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn exit_codes() {
    // missing seed: config error
    let out = wden()
        .args(["run", "--experiment", "sphere_heat"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("master_seed"));

    // unknown experiment: config error
    let out = wden()
        .args(["run", "--experiment", "nope", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // config parse error carries the line number
    let dir = temp_dir("badcfg");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "experiment = sphere_heat\nbroken line\n").unwrap();
    let out = wden()
        .args(["run", "--config", cfg.to_str().unwrap(), "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // tolerance failure: exit 2 (an impossible tolerance scale)
    let dir = temp_dir("tolfail");
    let out = wden()
        .args([
            "run",
            "--experiment",
            "potential_oracle",
            "--seed",
            "5",
            "--paths",
            "20",
            "--tolerance-scale",
            "1e-12",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // numeric fault: exit 3 (dt incompatible with the stationary grid)
    let dir = temp_dir("numfail");
    let out = wden()
        .args([
            "run",
            "--experiment",
            "stationary",
            "--seed",
            "5",
            "--paths",
            "100",
            "--dt",
            "0.3",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
