use std::process::Command;

use haarclt_cli::{parse_config, run, write_csv, Experiment, ExperimentConfig, ResultRecord};

fn metric<'a>(records: &'a [ResultRecord], name: &str) -> Vec<&'a ResultRecord> {
    records.iter().filter(|r| r.metric == name).collect()
}

#[test]
fn clt_records_sigma_squared_two_for_two_cos() {
    let cfg = parse_config(
        "experiment = clt\nsizes = 16\nreplicas = 10000\nseed = 7\n\
         [function]\nname = 2cos\nfamily = trig\ncoefficients = (1, 1.0, 0.0)\n",
    )
    .unwrap();
    let records = run(&cfg).unwrap();
    let target = metric(&records, "sigma2_target");
    assert_eq!(target.len(), 1);
    assert!((target[0].value - 2.0).abs() < 1e-12);
    assert_eq!(target[0].parameters["n"], "16");
    let var = metric(&records, "sample_variance")[0];
    assert!(
        (var.value - 2.0).abs() < 4.0 * var.uncertainty.unwrap(),
        "{var:?}"
    );
    assert_eq!(metric(&records, "w1_distance").len(), 1);
}

#[test]
fn rate_reports_theoretical_exponent() {
    let cfg = parse_config(
        "experiment = rate\nsizes = 2, 3, 4\nreplicas = 200\n\
         [function]\nfamily = analytic\nrho = 0.5\n[rate]\nk = 2\n",
    )
    .unwrap();
    let records = run(&cfg).unwrap();
    let e = metric(&records, "theoretical_exponent");
    assert_eq!(e.len(), 1);
    assert!((e[0].value + 2.0 / 9.0).abs() < 1e-15);
    assert_eq!(metric(&records, "w1_distance").len(), 3);
}

#[test]
fn truncation_k2_n1000() {
    let cfg = parse_config("experiment = truncation\nsizes = 1000\n[truncation]\nk = 2\n").unwrap();
    let records = run(&cfg).unwrap();
    let d = metric(&records, "d_opt")[0].value;
    assert!(d == 3.0 || d == 4.0, "d = {d}");
    let x0 = metric(&records, "x0")[0].value;
    assert!((x0 - 3.51).abs() < 0.01, "x0 = {x0}");
}

#[test]
fn ortho_table_has_every_pair() {
    let mut cfg = ExperimentConfig::new(Experiment::Ortho);
    cfg.sizes = vec![3];
    cfg.max_power = 4;
    cfg.replicas = 2000;
    let records = run(&cfg).unwrap();
    let targets = metric(&records, "target");
    assert_eq!(targets.len(), 16);
    for t in targets {
        let (i, j) = (&t.parameters["i"], &t.parameters["j"]);
        let expected = if i == j {
            j.parse::<f64>().unwrap().min(3.0)
        } else {
            0.0
        };
        assert_eq!(t.value, expected);
    }
}

#[test]
fn coeffs_recovers_power_decay() {
    let cfg = parse_config(
        "experiment = coeffs\n[function]\nfamily = power\nkappa = 3\nterms = 64\n[coeffs]\ncount = 32\nj_min = 2\n",
    )
    .unwrap();
    let records = run(&cfg).unwrap();
    assert_eq!(metric(&records, "coeff_abs").len(), 33);
    let kappa = metric(&records, "kappa_hat")[0].value;
    assert!((kappa - 3.0).abs() < 1e-6, "kappa_hat = {kappa}");
    assert_eq!(metric(&records, "decay_bound").len(), 32);
}

#[test]
fn sampler_check_diagnostics() {
    let mut cfg = ExperimentConfig::new(Experiment::SamplerCheck);
    cfg.sizes = vec![4, 8];
    cfg.replicas = 500;
    let records = run(&cfg).unwrap();
    for r in metric(&records, "max_unitarity_defect_per_n") {
        assert!(r.value < 1e-10);
    }
    for r in metric(&records, "max_trace_path_gap_per_n") {
        assert!(r.value < 1e-8);
    }
    for r in metric(&records, "trace_abs2_mean") {
        assert!((r.value - 1.0).abs() < 4.0 * r.uncertainty.unwrap());
    }
}

#[test]
fn trace_method_uses_truncation() {
    let cfg = parse_config(
        "experiment = clt\nsizes = 8, 16\nreplicas = 500\nmethod = trace\ntruncation = 4\n\
         [function]\nfamily = analytic\nrho = 0.3\n",
    )
    .unwrap();
    let records = run(&cfg).unwrap();
    assert!(records
        .iter()
        .all(|r| r.parameters.get("d").map(String::as_str) == Some("4")));
    assert_eq!(metric(&records, "sigma2_truncated").len(), 2);
}

fn strip_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn identical_config_gives_identical_output() {
    let cfg = parse_config(
        "experiment = clt\nsizes = 4, 8\nreplicas = 300\nseed = 99\n\
         [function]\nfamily = power\nkappa = 2.5\nterms = 32\n",
    )
    .unwrap();
    let render = || {
        let mut buf = Vec::new();
        write_csv(&run(&cfg).unwrap(), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let (a, b) = (render(), render());
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
    assert!(a.starts_with("experiment,parameters,metric,value,uncertainty,wall_time_s"));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_haarclt"))
}

#[test]
fn binary_writes_file_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "experiment = clt\nsizes = 4\nreplicas = 200\n[function]\nfamily = analytic\nrho = 0.4\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let status = binary()
            .args(["clt", "--config"])
            .arg(&config)
            .args(["--seed", "5", "--format", "json", "--output"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        for r in v.as_array_mut().unwrap() {
            assert_eq!(r["parameters"]["seed"], "5");
            r.as_object_mut().unwrap().remove("wall_time_s");
        }
        outputs.push(v);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn binary_exits_nonzero_on_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "experiment = clt\nreplicas = 0\nsizez = 4\n").unwrap();
    let out = binary()
        .args(["clt", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("replicas") && err.contains("sizez") && err.contains("function"),
        "{err}"
    );

    let missing = binary()
        .args(["clt", "--config", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/x.cfg"));

    let wrong = binary()
        .args(["ortho", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!wrong.status.success());

    let trunc = dir.path().join("trunc.cfg");
    std::fs::write(
        &trunc,
        "experiment = truncation\nsizes = 100\n[truncation]\nk = 3\n",
    )
    .unwrap();
    let ok = binary()
        .args(["truncation", "--config"])
        .arg(&trunc)
        .output()
        .unwrap();
    assert!(ok.status.success());
    let unwritable = binary()
        .args(["truncation", "--config"])
        .arg(&trunc)
        .args(["--output", "/nonexistent/dir/out.csv"])
        .output()
        .unwrap();
    assert!(!unwritable.status.success());
    assert!(String::from_utf8_lossy(&unwritable.stderr).contains("/nonexistent/dir/out.csv"));
}

#[test]
fn binary_stdout_csv() {
    let out = binary()
        .args(["ortho", "--replicas", "50"])
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment,parameters"));
    assert_eq!(text.lines().count(), 1 + 100 * 5);
}
