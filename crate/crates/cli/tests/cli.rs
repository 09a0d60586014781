use std::process::{Command, Output};

fn catsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn fig2_has_one_row_per_grid_point() {
    let out = catsim(&["fig2", "--beta", "1.5,2.5", "--eta", "0.8:1.0:0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("abs_beta,eta,"));
    assert_eq!(lines.count(), 2 * 21);
}

#[test]
fn four_cat_amplitudes_follow_the_comb() {
    let out = catsim(&[
        "state", "four_cat", "--beta", "1.5", "--arg", "45deg", "--k", "1", "--dim", "24", "--format", "json",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["dim"], 24);
    let amps = json["amplitudes"].as_array().unwrap();
    for (n, z) in amps.iter().enumerate() {
        let mag = z[0].as_f64().unwrap().hypot(z[1].as_f64().unwrap());
        if n % 4 != 1 {
            assert!(mag < 1e-12, "level {n} has {mag}");
        }
    }
}

#[test]
fn json_output_carries_metadata() {
    let out = catsim(&["fig4", "--alpha", "0.5", "--m", "1,2", "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["metadata"]["figure"], "fig4");
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn coherent_qfi_is_four() {
    let out = catsim(&["qfi", "--state", "coherent:1.0", "--phi", "0,45deg"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let q: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((q - 4.0).abs() < 1e-3, "{line}");
    }
}

#[test]
fn exit_codes_distinguish_failures() {
    assert_eq!(catsim(&["nonsense"]).status.code(), Some(2));
    assert_eq!(catsim(&["fig2", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(
        catsim(&["state", "coherent", "--beta", "6", "--dim", "8"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        catsim(&["fig5", "--n", "1", "--beta", "0.5", "--out", "/nonexistent/dir/x.csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn plot_script_is_written() {
    let dir = std::env::temp_dir().join(format!("catsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("fig5.csv");
    let plot = dir.join("fig5.gp");
    let out = catsim(&[
        "fig5",
        "--n",
        "2",
        "--beta",
        "0.8",
        "--out",
        csv.to_str().unwrap(),
        "--plot-script",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() == 2);
    assert!(std::fs::read_to_string(&plot).unwrap().contains("fig5.csv"));
    std::fs::remove_dir_all(&dir).unwrap();
}
