use std::path::PathBuf;
use std::process::{Command, Output};

use conslaw_core::{Expression, JetContext};
use serde_json::Value;

fn conslaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conslaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conslaw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn structured(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let out = conslaw(&all);
    (serde_json::from_str(&stdout(&out)).expect("json"), code(&out))
}

#[test]
fn construct_ode_prints_u_tt() {
    let out = conslaw(&["construct-ode", "--factors", "1;t", "--H", "u"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "u_tt\n");
}

#[test]
fn kdv_current_verifies() {
    let out = conslaw(&[
        "verify-current",
        "--G",
        "-(u*u_x + u_xxx)",
        "--rho",
        "u^2/2",
        "--sigma",
        "u^3/3 + u*u_xx - u_x^2/2",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn degenerate_factors_are_input_errors() {
    let out = conslaw(&["construct-ode", "--factors", "0;0", "--H", "u"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Wronskian"));
}

#[test]
fn negative_verdicts_exit_one() {
    let out = conslaw(&["verify-current", "--G", "-u_xxx", "--rho", "u^2", "--sigma", "u"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (1, "false\n"));
    let out = conslaw(&["verify-factor", "--L", "u''", "--factors", "1; u"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "1: true\nu: false\n");
    let out = conslaw(&["flux", "--G", "-u_xxx", "--rho", "u*u_x^2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_input_exits_two() {
    for args in [
        vec!["construct-ode", "--factors", "1;t", "--H", "u +"],
        vec!["construct-ode", "--factors", "1;t"],
        vec!["totald", "--f", "v", "--var", "x"],
        vec!["totald", "--f", "u", "--var", "z"],
        vec!["verify-family", "--family", "q", "--L", "u_t"],
        vec!["construct-ode", "--context", "vars t; unknowns", "--factors", "1", "--H", "u"],
        vec!["no-such-command"],
        vec![],
    ] {
        assert_eq!(code(&conslaw(&args)), 2, "{args:?}");
    }
}

#[test]
fn structured_fields_and_round_trip() {
    let (doc, status) = structured(&["construct-ode", "--factors", "1;t;u'", "--H", "-u*u''/u''' + u'^2/(2*u''')"]);
    assert_eq!(status, 0);
    let keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["command", "inputs", "order_report", "result", "sign_note", "verdicts"]);
    assert_eq!(doc["command"], "construct-ode");
    assert!(doc["sign_note"].as_str().unwrap().contains("+1"));
    assert_eq!(doc["order_report"]["p"], 3);
    assert_eq!(doc["order_report"]["bound_holds"], true);
    let ctx = JetContext::parse(doc["inputs"]["context"].as_str().unwrap()).unwrap();
    let l = Expression::parse(&ctx, doc["result"].as_str().unwrap()).unwrap();
    assert_eq!(l, Expression::parse(&ctx, "u_tt").unwrap());
    let h = Expression::parse(&ctx, doc["inputs"]["H"].as_str().unwrap()).unwrap();
    assert_eq!(h.to_string(), doc["inputs"]["H"]);
}

#[test]
fn output_is_deterministic() {
    let args = ["first-integrals", "--factors", "-sin(t); cos(t)", "--H", "u", "--format", "structured"];
    let a = conslaw(&args);
    let b = conslaw(&args);
    assert_eq!(a.stdout, b.stdout);
    let (doc, _) = structured(&args[..5]);
    assert_eq!(doc["result"], serde_json::json!(["u*cos(t) - u_t*sin(t)", "u_t*cos(t) + u*sin(t)"]));
}

#[test]
fn job_files_and_overrides() {
    let job = scratch(
        "kdv.job",
        "# KdV from two densities\ncommand construct-evolution\nvars t x; unknowns u\ndensities = u; u^2/2\nH = -u_x/2 - u^3/(6*u_x)\n",
    );
    let job = job.to_str().unwrap();
    let out = conslaw(&["--job", job]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "-u*u_x - u_xxx\n"));
    let out = conslaw(&["construct-evolution", "--job", job, "--densities", "u"]);
    assert_eq!(code(&out), 0);
    let out = conslaw(&["flux", "--job", job]);
    assert_eq!(code(&out), 2);
}

#[test]
fn vorticity_closure_from_file() {
    let file = scratch("closure.txt", "P1 = psi_y\nP3 = psi_xx\nS2 = x*psi\nS3 = psi_x\n");
    let (doc, status) = structured(&["vorticity-closure", file.to_str().unwrap()]);
    assert_eq!(status, 0);
    for k in ["circulation", "momentum_x", "momentum_y", "energy"] {
        assert_eq!(doc["verdicts"][k], true, "{k}");
    }
    assert_eq!(doc["inputs"]["P2"], "0");
    let ctx = JetContext::parse(doc["inputs"]["context"].as_str().unwrap()).unwrap();
    assert!(Expression::parse(&ctx, doc["result"].as_str().unwrap()).is_ok());
}

#[test]
fn families() {
    let out = conslaw(&[
        "construct-family",
        "--family",
        "omega",
        "--context",
        "vars t x y; unknowns psi",
        "--G",
        "0; 0; y",
        "--G",
        "0; 0; -psi",
        "--G",
        "-y; psi; 0",
        "--omega",
        "psi_xx + psi_yy",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    let ctx = JetContext::parse("vars t x y; unknowns psi").unwrap();
    let l = Expression::parse(&ctx, lines.next().unwrap()).unwrap();
    let lhs = Expression::parse(&ctx, "psi_txx + psi_tyy + psi_x*(psi_xxy + psi_yyy) - psi_y*(psi_xxx + psi_xyy)").unwrap();
    assert_eq!(l, -&lhs);
    assert_eq!(lines.next(), Some("omega family: true"));

    let out = conslaw(&["construct-family", "--family", "affine", "--base", "t", "--K", "u^2/2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "u_x^2 + u*u_xx\naffine family: true\n");
    let out = conslaw(&["verify-family", "--family", "h", "--args", "t", "--L", "u_t + u*u_x"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (1, "false\n"));
    let out = conslaw(&["verify-family", "--family", "h", "--args", "t", "--L", "u_xx + u*u_x"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn euler_and_total_derivative() {
    let out = conslaw(&["euler", "--f", "u_x^2/2 + u^3"]);
    assert_eq!(stdout(&out), "3*u^2 - u_xx\n");
    let out = conslaw(&["totald", "--f", "u*u_x", "--var", "x"]);
    assert_eq!(stdout(&out), "u_x^2 + u*u_xx\n");
    let out = conslaw(&["euler", "--f", "u*v_x", "--context", "vars x; unknowns u v", "--unknown", "v"]);
    assert_eq!(stdout(&out), "-u_x\n");
}

#[test]
fn help_succeeds() {
    let out = conslaw(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("construct-ode"));
}
