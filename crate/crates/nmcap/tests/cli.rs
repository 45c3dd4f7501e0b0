use std::path::Path;
use std::process::{Command, Output};

fn nmcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmcap"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_report_to_stdout_and_summary_to_stderr() {
    let out = nmcap(&["run", "--m", "3", "--beta", "0.3", "--bits", "1000"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = stdout.lines().collect();
    assert_eq!(
        lines[0],
        "m,qam_order,beta,alpha,snr_db,subcarrier,ber,floor_flag,evm_pct,spec_eff,fec_pass,bits_tested"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("3,4,0.3,0,inf,1,0.0001,1,"));
    assert!(lines[1].ends_with(",1,1000"));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.contains("errors=0"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("modem.conf");
    std::fs::write(
        &cfg,
        "# test\nm = 2\nbeta = 0.5\nalpha = 0.2\nqam_order = 16\n",
    )
    .unwrap();
    let report = dir.path().join("r.csv");
    let out = nmcap(&[
        "run",
        "--config",
        path(&cfg),
        "--alpha",
        "0.1",
        "--bits",
        "800",
        "--out",
        path(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("2,16,0.5,0.1,"));
}

#[test]
fn bad_config_and_arguments_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "m = 2\ngamma = 1\n").unwrap();
    let out = nmcap(&["run", "--config", path(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    assert!(!nmcap(&["run", "--alpha", "1.2", "--bits", "100"])
        .status
        .success());
    assert!(!nmcap(&["run", "--channel", "fibre"]).status.success());
    assert!(!nmcap(&["run", "--bits", "101"]).status.success());
}

#[test]
fn run_dumps_waveform_and_constellation() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("tx.bin");
    let con = dir.path().join("rx.csv");
    let out = nmcap(&[
        "run",
        "--m",
        "2",
        "--bits",
        "200",
        "--channel",
        "led",
        "--snr-db",
        "20",
        "--dump-waveform",
        path(&wav),
        "--dump-constellation",
        path(&con),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&wav).unwrap();
    assert_eq!(&bytes[..8], b"NMCAPWAV");
    assert_eq!(bytes.len() % 8, 0);
    let text = std::fs::read_to_string(&con).unwrap();
    assert_eq!(text.lines().next(), Some("subcarrier,real,imag"));
    assert_eq!(text.lines().count(), 1 + 2 * 100);
}

#[test]
fn sweep_over_the_reference_grid_writes_216_rows_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("grid.csv");
    let out = nmcap(&[
        "sweep",
        "--alpha",
        "0,0.1,0.2,0.3,0.4,0.5",
        "--bits",
        "200",
        "--out",
        path(&out_path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("point,m,qam_order,beta,alpha,snr_db,subcarrier,ber,floor_flag,evm_pct,spec_eff,fec_pass,bits_tested,error")
    );
    assert_eq!(lines.count(), 216);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("36 points"));
    assert_eq!(stderr.lines().count(), 1 + 36);

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("grid.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["points"], 36);
    assert_eq!(meta["failed_points"].as_array().unwrap().len(), 0);
    assert_eq!(meta["plan"]["channel"], "ideal");
}

#[test]
fn sweep_default_alpha_grid_steps_by_five_percent() {
    let out = nmcap(&["sweep", "--m", "1", "--beta", "0.5", "--bits", "20"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let alphas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(alphas.len(), 11);
    for (i, a) in alphas.iter().enumerate() {
        assert!((a - 0.05 * i as f64).abs() < 1e-12);
    }
}

#[test]
fn empty_sweep_list_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("never.csv");
    let out = nmcap(&["sweep", "--alpha", "", "--out", path(&out_path)]);
    assert!(!out.status.success());
    assert!(!out_path.exists());
}

#[test]
fn failing_point_is_recorded_and_exit_is_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("partial.csv");
    let out = nmcap(&[
        "sweep",
        "--m",
        "2",
        "--beta",
        "0.1",
        "--alpha",
        "0,1.5,0.1",
        "--bits",
        "100",
        "--out",
        path(&out_path),
    ]);
    assert!(!out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 + 1 + 2);
    assert!(rows[2].starts_with("1,2,4,0.1,1.5,"));
    assert!(rows[2].split(',').next_back().unwrap().contains("alpha"));
    assert!(rows[3].starts_with("2,"));
    let meta = std::fs::read_to_string(dir.path().join("partial.csv.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["failed_points"], serde_json::json!([1]));
}

#[test]
fn filters_dump_lists_every_tap() {
    let out = nmcap(&[
        "filters",
        "dump",
        "--m",
        "2",
        "--beta",
        "0.1",
        "--span-symbols",
        "4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // n_s = ceil(2·2·1.1) = 5, so 2·4·5 + 1 = 41 taps per response.
    assert_eq!(text.lines().count(), 1 + 4 * 41);
    assert!(text.lines().nth(1).unwrap().starts_with("1,I,0,"));
    assert!(text.lines().last().unwrap().starts_with("2,Q,40,"));
}

#[test]
fn spectrum_peaks_inside_the_signal_band() {
    let out = nmcap(&[
        "spectrum",
        "--m",
        "2",
        "--beta",
        "0.1",
        "--bits",
        "20000",
        "--segments",
        "8",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("freq_hz,power_db"));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (f, p) = l.split_once(',').unwrap();
            (f.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    let peak = rows
        .iter()
        .cloned()
        .fold((0.0, f64::MIN), |a, r| if r.1 > a.1 { r } else { a });
    assert_eq!(peak.1, 0.0);
    assert!(peak.0 > 0.0 && peak.0 < 3e6, "{peak:?}");
    let received = nmcap(&[
        "spectrum",
        "--m",
        "2",
        "--received",
        "--channel",
        "led",
        "--bits",
        "2000",
    ]);
    assert!(received.status.success());
    assert!(!nmcap(&["spectrum", "--snr-db", "10"]).status.success());
}
