use std::path::Path;
use std::process::{Command, Output};

fn qcent(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qcent"));
    c.args(args).env_remove("QCENT_WORKERS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("spawn qcent")
}

fn small_config(dir: &Path, t_final: f64, extra: &str) -> String {
    let path = dir.join(format!("small-{t_final}.toml"));
    std::fs::write(
        &path,
        format!(
            "name = \"small\"\nstate_kind = \"cat_channel\"\nalpha = 1.0\ne0 = 15.0\n\
             grid_n = 128\nt_final = {t_final:?}\nn_traj = 20000\nseed = 3\n{extra}"
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_and_validate() {
    let out = qcent(&["list-presets"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2e", "fig3c", "fig6-regular", "fig7"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1.0, "");
    let out = qcent(&["validate", "--config", &cfg], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcent(&["run", "--preset", "fig9"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("runner.unknown_preset"));

    let bad = small_config(dir.path(), 1.0, "grid_half_width = 3.0\n");
    let out = qcent(&["validate", "--config", &bad], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config.grid_too_small"));

    let out = qcent(&["validate", "--config", "/nonexistent/x.toml"], &[]);
    assert_eq!(out.status.code(), Some(3));

    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg = small_config(dir.path(), 0.0, "");
    let out = qcent(&["run", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn csv_is_byte_identical_across_workers_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1.0, "");
    let mut csvs = Vec::new();
    for (i, (flag, env)) in [("1", ""), ("3", ""), ("", "2"), ("1", "")].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let mut args = vec!["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()];
        if !flag.is_empty() {
            args.extend(["--workers", flag]);
        }
        let envs: Vec<(&str, &str)> = if env.is_empty() { vec![] } else { vec![("QCENT_WORKERS", env)] };
        let out = qcent(&args, &envs);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("small.svg").exists());
        csvs.push(std::fs::read(out_dir.join("small.csv")).unwrap());
    }
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,S_L_q,S_V_q,S_L_cl,S_V_cl,norm_drift,energy_drift,oor_frac");
    assert_eq!(text.lines().count(), 1 + 5);
}
