use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn corepool(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corepool"))
        .args(args)
        .current_dir(dir)
        .env_remove("COREPOOL_PROFILE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_usecase1() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(
        &["generate", "--usecase", "1", "--seed", "42", "-o", "w.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id,kind,utilization");
    assert_eq!(lines.len(), 81);
    assert_eq!(lines.iter().filter(|l| l.contains(",SDR,")).count(), 50);

    let o = corepool(
        &["generate", "--usecase", "1", "--seed", "42", "-o", "w2.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("w.csv")).unwrap(),
        fs::read(dir.path().join("w2.csv")).unwrap()
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["generate", "--usecase", "9"][..],
        &[
            "compare",
            "--usecase",
            "2",
            "--profile",
            "asus-80core",
            "--trials",
            "0",
        ],
        &["power-curve", "--profile", "asus-80core", "--steps", "1"],
        &["generate"],
        &["reproduce"],
    ] {
        let o = corepool(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn runtime_errors_exit_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(
        &[
            "compare",
            "--usecase",
            "1",
            "--profile",
            "no-such-profile",
            "-o",
            "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("r.csv").exists());

    fs::write(
        dir.path().join("bad.json"),
        r#"{"sdr_count":1,"sdr_range":[90,10],"sdn_count":0,"sdn_range":[0,0]}"#,
    )
    .unwrap();
    let o = corepool(
        &["generate", "--spec", "bad.json", "-o", "w.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("w.csv").exists());
}

#[test]
fn compare_reports_savings() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(
        &[
            "compare",
            "--usecase",
            "2",
            "--profile",
            "asus-80core",
            "--trials",
            "20",
            "--seed",
            "7",
            "-o",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    let savings: f64 = out
        .lines()
        .find(|l| l.starts_with("median cores"))
        .and_then(|l| l.split("savings ").nth(1))
        .and_then(|s| s.trim_end_matches("%)").parse().ok())
        .unwrap();
    assert!((10.0..=25.0).contains(&savings), "{out}");
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);

    let o = corepool(
        &[
            "compare",
            "--usecase",
            "2",
            "--profile",
            "asus-80core",
            "--trials",
            "3",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"schema\": 1"));
}

#[test]
fn compare_with_spec_file_and_csv_profile() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("mix.json"),
        r#"{"sdr_count":10,"sdr_range":[60,80],"sdn_count":10,"sdn_range":[30,50]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("tiny.csv"),
        "load,watts\n0,40\n0.5,90\n1,150\n",
    )
    .unwrap();
    let o = corepool(
        &[
            "compare",
            "--spec",
            "mix.json",
            "--profile",
            "tiny.csv",
            "--cores",
            "8",
            "--trials",
            "4",
            "-o",
            "r.json",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(text.contains("\"profile\": \"tiny\""));
    assert!(text.contains("\"label\": \"mix\""));

    let o = corepool(
        &["compare", "--spec", "mix.json", "--profile", "tiny.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn profile_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("asus-80core.json"),
        r#"{"name":"asus-80core","cores_per_server":80,"curve":[[0,111],[1,600]]}"#,
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_corepool"))
        .args(["power-curve", "--profile", "asus-80core", "--steps", "2"])
        .env("COREPOOL_PROFILE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "load,watts\n0,111\n1,600\n");
}

#[test]
fn power_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(
        &["power-curve", "--profile", "asus-80core", "--steps", "11"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "0,100");
    assert_eq!(lines[11], "1,500");

    let o = corepool(
        &["power-curve", "--profile", "hpe-400core", "--steps", "2"],
        dir.path(),
    );
    assert!(stdout(&o).lines().nth(1).unwrap() == "0,700");
}

#[test]
fn reproduce_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(&["reproduce", "--all", "-o", "a"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let o = corepool(&["reproduce", "--all", "-o", "b"], dir.path());
    assert!(o.status.success());
    let mut names: Vec<String> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert!(names.contains(&"summary.md".to_string()));
    assert_eq!(names.iter().filter(|n| n.ends_with(".csv")).count(), 6);
    for n in &names {
        assert_eq!(
            fs::read(dir.path().join("a").join(n)).unwrap(),
            fs::read(dir.path().join("b").join(n)).unwrap(),
            "{n}"
        );
    }

    let o = corepool(
        &["reproduce", "--usecase", "1", "--format", "json", "-o", "c"],
        dir.path(),
    );
    assert!(o.status.success());
    let count = fs::read_dir(dir.path().join("c"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "json")
        })
        .count();
    assert_eq!(count, 2);
}

#[test]
fn allocate_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(&["allocate", "--usecase", "2", "--seed", "3"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"scheme\": \"SHARED\""));
    assert!(text.contains("\"sdn_fraction\""));
    let o = corepool(
        &[
            "allocate",
            "--usecase",
            "2",
            "--scheme",
            "separate",
            "--separate-sdn",
            "fluid",
        ],
        dir.path(),
    );
    let text = stdout(&o);
    assert!(text.contains("SEPARATE_SDR") && text.contains("SEPARATE_SDN"));
}

#[test]
fn measurement_export_and_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let o = corepool(&["measurements", "-o", "m.csv"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(text.lines().count(), 47);

    let o = corepool(
        &[
            "measurements",
            "--input",
            "m.csv",
            "--prb",
            "50",
            "--protocol",
            "udp",
            "--bandwidth",
            "20",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("50,UDP,20.0,20.0,84.7,0.0"));

    let o = corepool(
        &[
            "measurements",
            "--prb",
            "25",
            "--protocol",
            "tcp",
            "--bandwidth",
            "100",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}
