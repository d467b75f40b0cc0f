use std::path::Path;
use std::process::{Command, Output};

fn saxmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saxmine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth_file(dir: &Path, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join("series.csv");
    let meta = dir.join("meta.json");
    let mut args = vec!["synth", "--output", p(&out), "--meta", p(&meta)];
    args.extend_from_slice(extra);
    let o = saxmine(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn planted_discord_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(
        dir.path(),
        &["--kind", "planted-discord", "--len", "2000", "--period", "48", "--seed", "4", "--start", "0"],
    );
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    let planted = meta["meta"]["planted"][0].as_u64().unwrap();

    let o = saxmine(&["detect", "--algo", "hotsax", "--input", p(&input), "--window", "48"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let at = report["discord"]["location"].as_u64().unwrap();
    assert!(at.abs_diff(planted) <= 48, "{at} vs {planted}");
    assert_eq!(report["series_meta"]["step_seconds"], 60.0);
    assert_eq!(report["config"]["algorithm"], "hotsax");
}

#[test]
fn reports_rerun_byte_identical_from_their_config() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--kind", "step", "--len", "3000", "--period", "60", "--seed", "2"]);
    let args = [
        "detect", "--algo", "chaosgame", "--input", p(&input), "--window", "20", "--lead", "40", "--lag", "80",
    ];
    let first = saxmine(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, saxmine(&args).stdout);

    let saved = dir.path().join("report.json");
    std::fs::write(&saved, &first.stdout).unwrap();
    let again = saxmine(&["detect", "--algo", "chaosgame", "--input", p(&input), "--config", p(&saved)]);
    assert_eq!(first.stdout, again.stdout);

    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let from = report["scores"]["valid_from"].as_u64().unwrap();
    let to = report["scores"]["valid_to"].as_u64().unwrap();
    for a in report["alarms"].as_array().unwrap() {
        assert!((from..=to).contains(&a.as_u64().unwrap()));
    }
    let text = String::from_utf8(first.stdout).unwrap();
    let order: Vec<usize> = ["\"config\"", "\"series_meta\"", "\"scores\"", "\"alarms\"", "\"timing\""]
        .iter()
        .map(|k| text.rfind(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
}

#[test]
fn plot_data_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--kind", "sine", "--len", "500", "--period", "50"]);
    let o = saxmine(&[
        "detect", "--algo", "sequitur", "--input", p(&input), "--window", "40", "--format", "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "index,value,score,alarm_flag");
    assert_eq!(lines.count(), 500);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_file(dir.path(), &["--kind", "sine", "--len", "3000"]);

    let o = saxmine(&["detect", "--algo", "chaosgame", "--input", p(&input), "--alpha", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha = 4"));
    assert_eq!(saxmine(&["detect", "--algo", "nope", "--input", p(&input)]).status.code(), Some(2));
    assert_eq!(saxmine(&["synth", "--kind", "noise", "--len", "0"]).status.code(), Some(2));

    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "0,1\n60,x\n").unwrap();
    let o = saxmine(&["detect", "--algo", "sequitur", "--input", p(&broken)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2"));
    let missing = dir.path().join("missing.csv");
    assert_eq!(saxmine(&["detect", "--algo", "sequitur", "--input", p(&missing)]).status.code(), Some(3));

    let big = dir.path().join("big");
    std::fs::create_dir(&big).unwrap();
    let noise = synth_file(&big, &["--kind", "noise", "--len", "20000", "--noise", "1"]);
    let o = saxmine(&["detect", "--algo", "brute", "--input", p(&noise), "--window", "100", "--timeout-s", "0.05"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn small_bench() {
    let o = saxmine(&[
        "bench", "--sizes", "2000,4000", "--algos", "sequitur,chaosgame", "--reps", "3", "--window", "40",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("algorithm,size,label,repetitions,mean_seconds,std_seconds,timed_out\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("# ratio")).count(), 2);
    assert_eq!(saxmine(&["bench", "--sizes", "4000,2000"]).status.code(), Some(2));
}
