use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn twopair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twopair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twopair-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn oracle_check_passes() {
    let o = twopair(&["oracle-check"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("all-present: 625/625 grid points OK"), "{text}");
    assert!(text.lines().last().unwrap().contains("passed"));
}

#[test]
fn analytic_default_grid_has_625_rows() {
    let o = twopair(&["analytic"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 625);
    for row in rows {
        let diff: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-12);
    }
}

#[test]
fn analytic_single_point() {
    let o = twopair(&["analytic", "--formula", "eq3", "--theta", "0,90,0,90"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = data_rows(&text)[0];
    let p: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((p - 0.0625).abs() < 1e-15);
}

#[test]
fn absent_polarizers_fill_one_side_columns() {
    let o = twopair(&["analytic", "--set", "theta1=absent", "--set", "theta2=absent"]);
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.starts_with("absent,absent,")));
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = scratch("badcfg");
    let path = dir.join("bad.cfg");
    fs::write(&path, "theta1 = 0\nwindow34 = soon\n").unwrap();
    let o = twopair(&["analytic", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("window34"), "{err}");
}

#[test]
fn wavepacket_origin_and_boundary() {
    let o = twopair(&["wavepacket", "--taus", "0:0:1", "--tau34", "0:1.2:13", "--theta-diff", "45:45:1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# bell_region_product_quoted = 6.6300000000000003e-1"));
    let rows: Vec<Vec<f64>> = data_rows(&text)
        .iter()
        .map(|r| r.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][4], 1.0);
    assert!(rows.iter().all(|r| r[6] < 1e-6));

    let o = twopair(&["wavepacket", "--taus", "1:1:1", "--tau34", "0.6:0.7:11", "--theta-diff", "0:0:1"]);
    let text = stdout(&o);
    let flags: Vec<(f64, u8)> = data_rows(&text)
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[1].parse().unwrap(), f[5].parse().unwrap())
        })
        .collect();
    for (x, flag) in flags {
        assert_eq!(flag == 1, x < 0.632974, "{x}");
    }
}

#[test]
fn montecarlo_requires_seed() {
    let o = twopair(&["montecarlo", "--n-events", "100"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn zero_efficiency_exits_cleanly() {
    let o = twopair(&["montecarlo", "--seed", "1", "--n-events", "5000", "--set", "efficiency3=0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("statistics unavailable") && err.contains("5000 emitted"), "{err}");
}

#[test]
fn montecarlo_outputs_are_reproducible() {
    let dir = scratch("mc");
    let run = |tag: &str| {
        let out = dir.join(format!("{tag}.txt"));
        let o = twopair(&[
            "montecarlo",
            "--seed",
            "11",
            "--n-events",
            "50000",
            "--set",
            "window34=2e-13",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(&out).unwrap(),
            fs::read(dir.join(format!("{tag}_hist.csv"))).unwrap(),
        )
    };
    let (a, ha) = run("a");
    let (b, hb) = run("b");
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    let hist = String::from_utf8(ha).unwrap();
    assert!(hist.contains("\ntau34_over_T,count\n"));
    assert!(!hist.contains('\r'));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = scratch("echo");
    let first = dir.join("first.csv");
    let o = twopair(&[
        "chsh",
        "--seed",
        "3",
        "--n-events",
        "40000",
        "--set",
        "window34=1e-13",
        "--set",
        "sigma_s=2e-13",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&first).unwrap();
    let cfg: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# config: "))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg_path = dir.join("echo.cfg");
    fs::write(&cfg_path, cfg).unwrap();
    let second = dir.join("second.csv");
    let o = twopair(&["chsh", "--config", cfg_path.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(text, fs::read_to_string(&second).unwrap());
}

#[test]
fn chsh_modes() {
    let o = twopair(&["chsh", "--analytic"]);
    let text = stdout(&o);
    let s: f64 = data_rows(&text)[0].split(',').nth(8).unwrap().parse().unwrap();
    assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-12);

    let o = twopair(&["chsh", "--seed", "5", "--n-events", "400000", "--set", "window34=5e-14"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let f: Vec<f64> = data_rows(&text)[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert!(f[8] > 2.0 + 3.0 * f[9], "{} +- {}", f[8], f[9]);

    // wide window with sigma_s = T: visibility below the threshold
    let o = twopair(&[
        "chsh", "--seed", "5", "--n-events", "400000", "--set", "sigma_s=1e-12", "--set", "window34=inf",
    ]);
    let text = stdout(&o);
    let f: Vec<f64> = data_rows(&text)[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert!(f[8] < 2.0, "{}", f[8]);

    let o = twopair(&["chsh", "--lhv", "--seed", "5", "--n-events", "100000"]);
    let text = stdout(&o);
    let f: Vec<f64> = data_rows(&text)[0].split(',').map(|x| x.parse().unwrap()).collect();
    assert!(f[8] <= 2.0 + 3.0 * f[9]);
}
