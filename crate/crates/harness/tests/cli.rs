use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lcgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcgeom")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lcgeom-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p
}

const GAUSS: &str = r#"{ form = "gaussian", dim = 1 }"#;
const INTERVAL: &str = r#"{ form = "indicator", body = { kind = "interval", lo = -1.0, hi = 1.0 } }"#;

#[test]
fn catalog_lists_forms_and_checks() {
    let o = lcgeom(&["catalog"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for word in ["half-exponential", "polytope", "divergence-pairing", "uniqueness-sanity"] {
        assert!(text.contains(word), "{word} missing from catalog");
    }
}

#[test]
fn delta_reports_both_sides() {
    let o = lcgeom(&["delta", "--f", GAUSS, "--g", INTERVAL]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let check = &v[0]["checks"][0];
    assert_eq!(check["name"], "main-theorem/default");
    assert!((check["rhs"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(v[0]["schema_version"], lcgeom_harness::SCHEMA_VERSION);
}

#[test]
fn impossible_tolerance_fails_with_exit_code_one() {
    let o = lcgeom(&["delta", "--f", GAUSS, "--g", INTERVAL, "--tol", "0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("scenario,check,lhs,rhs,residual,tolerance,pass,error\n"));
    assert!(text.contains(",false,"));
}

#[test]
fn plot_table_carries_quotient_curves() {
    let o = lcgeom(&["delta", "--f", GAUSS, "--g", INTERVAL, "--format", "plot", "--schedule-depth", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("scenario,check,series,x,y\n"));
    assert_eq!(text.lines().filter(|l| l.contains(",quotients/default,")).count(), 7);
}

#[test]
fn measures_and_quermass_subcommands() {
    let o = lcgeom(&["measures", "--f", r#"{ form = "half-exponential", dim = 2 }"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = lcgeom(&[
        "quermass",
        "--k",
        r#"{ kind = "box", lo = [-1.0, -1.0], hi = [1.0, 1.0] }"#,
        "--l",
        r#"{ kind = "unit-ball", dim = 2 }"#,
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("quermass,"));
}

#[test]
fn tv_defaults_to_the_euclidean_ball() {
    let o = lcgeom(&["tv", "--f", r#"{ form = "gaussian", dim = 2 }"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tv = v[0]["checks"][0]["rhs"].as_f64().unwrap();
    let oracle = 2.0 * std::f64::consts::PI * (std::f64::consts::PI / 2.0).sqrt();
    assert!((tv - oracle).abs() < 1e-7);
}

#[test]
fn coarea_from_a_grid_file_with_polygon_export() {
    let dir = scratch("grid");
    let f = lcgeom::LogConcaveFn::power(2, 1.0, 1.0).unwrap();
    let field = lcgeom::tv::GridField::sample(&f, &[-20.0, -20.0], &[20.0, 20.0], 129).unwrap();
    let grid = dir.join("field.csv");
    lcgeom_harness::io::write_grid_field(&field, std::fs::File::create(&grid).unwrap()).unwrap();
    let polys = dir.join("levels.csv");
    let o = lcgeom(&[
        "coarea",
        "--f",
        r#"{ form = "power", dim = 2, alpha = 1.0, p = 1.0 }"#,
        "--l",
        r#"{ kind = "unit-ball", dim = 2 }"#,
        "--field",
        grid.to_str().unwrap(),
        "--levels",
        "0.25,0.5",
        "--polygons",
        polys.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = std::fs::read_to_string(&polys).unwrap();
    assert!(rows.starts_with("s,vertex,x1,x2\n"));
    assert!(rows.lines().any(|l| l.starts_with("0.25,")) && rows.lines().any(|l| l.starts_with("0.5,")));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_reports_load_errors_and_keeps_going() {
    let dir = scratch("errors");
    write(&dir, "a-broken.toml", "id = \"broken\"\nf = { form = \"gaussian\", dim = 1 }\nchecks = [\"main-theorem\"\n");
    write(&dir, "b-banana.toml", "id = \"banana\"\nf = { form = \"banana\" }\nchecks = [\"centering\"]\n");
    write(&dir, "c-zero.toml", "id = \"zero\"\nf = { form = \"zero\", dim = 1 }\nchecks = [\"centering\"]\n");
    write(&dir, "d-good.toml", "id = \"good\"\nf = { form = \"gaussian\", dim = 1 }\nchecks = [\"centering\"]\n");
    let out = dir.join("out.json");
    let o = lcgeom(&["verify", dir.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("a-broken.toml") && err.contains("line"), "{err}");
    assert!(err.contains("banana"), "{err}");
    assert!(err.contains("integral"), "{err}");
    let reports = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&reports).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["scenario"]["id"], "good");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn seed_flag_satisfies_the_pointwise_requirement() {
    let dir = scratch("seed");
    let p = write(
        &dir,
        "pw.toml",
        &format!("id = \"pw\"\nf = {GAUSS}\ng = {INTERVAL}\nchecks = [\"pointwise\"]\n[options]\npointwise_points = 3\n"),
    );
    let o = lcgeom(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"));
    let o = lcgeom(&["verify", p.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::remove_dir_all(dir).unwrap();
}
