use std::process::Command;

fn divrbf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_divrbf")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(divrbf(&["sweep", "--hammersley", "10"]).status.code(), Some(1));
    assert_eq!(divrbf(&["sweep", "--hammersley", "10", "--eps", "2", "--kernel", "tps"]).status.code(), Some(1));
    assert_eq!(divrbf(&["sweep", "--hammersley", "10", "--eps", "0:1:3"]).status.code(), Some(1));
    assert_eq!(divrbf(&["sweep", "--eps", "1"]).status.code(), Some(1));
    assert_eq!(divrbf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(divrbf(&["--help"]).status.code(), Some(0));
}

#[test]
fn nodes_are_written() {
    let out = divrbf(&["nodes", "--hammersley", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn sweep_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = divrbf(&[
        "sweep", "--hammersley", "20", "--eps", "0.1:2:3", "--kernel", "imq", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let header = "epsilon,err_field_direct,err_field_qr,err_stream_direct,err_stream_qr,cond_direct,status_direct,status_qr";
    let rows: Vec<&str> = text.lines().skip_while(|l| *l != header).skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("2,"));
}

#[test]
fn all_rows_failing_exits_2() {
    let out = divrbf(&["sweep", "--hammersley", "40", "--eps", "1e-9", "--method", "direct"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1e-9,NA,NA,NA,NA,NA,not_spd,skipped"), "{text}");
}

#[test]
fn missing_file_exits_3() {
    assert_eq!(divrbf(&["sweep", "--nodes", "/nonexistent/nodes.txt", "--eps", "1"]).status.code(), Some(3));
}

#[test]
fn interp_from_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.txt");
    std::fs::write(&samples, "0 0 1 1 0 0\n1 0 0 0 1 0\n0 1 0 0 0 1\n-1 0 0 0 0 1\n").unwrap();
    let out_path = dir.path().join("f.csv");
    let out = divrbf(&[
        "interp", "--samples", samples.to_str().unwrap(), "--eps", "1", "--method", "direct",
        "--eval", "grid:2x3", "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert_eq!(text.lines().next(), Some("x,y,z,ux,uy,uz,psi"));
}

#[test]
fn verify_passes() {
    let out = divrbf(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
