use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rackcoop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rackcoop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn encode_repair_collect() {
    let work = tempfile::tempdir().unwrap();
    let (input, dir, out) = (
        work.path().join("in"),
        work.path().join("c"),
        work.path().join("out"),
    );
    fs::write(&input, b"hello racks").unwrap();

    let o = rackcoop(&[
        "encode",
        "--params",
        "8,4,2,4,2,2",
        "--seed",
        "3",
        "--in",
        p(&input),
        "--out",
        p(&dir),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(dir.join("manifest.json").exists());
    assert!(dir.join("rack_4").join("node_2.bin").exists());

    let o = rackcoop(&[
        "repair",
        "--dir",
        p(&dir),
        "--racks",
        "2,3",
        "--nodes",
        "2:1,3:2",
        "--helpers",
        "1,4",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let t = text(&o);
    assert!(t.contains("rack 2 cross-rack download: 5"), "{t}");
    assert!(t.contains("rack 3 cross-rack download: 5"), "{t}");

    let o = rackcoop(&[
        "collect",
        "--out",
        p(&dir),
        "--nodes",
        "1:2,2:1,3:2,4:1",
        "--recover",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(fs::read(&out).unwrap(), b"hello racks");
}

#[test]
fn erased_nodes_are_repaired_from_disk() {
    let work = tempfile::tempdir().unwrap();
    let (input, dir, out) = (
        work.path().join("in"),
        work.path().join("c"),
        work.path().join("out"),
    );
    fs::write(&input, [9u8; 18]).unwrap();
    let o = rackcoop(&[
        "encode",
        "--params",
        "8,4,2,4,2,2",
        "--in",
        p(&input),
        "--out",
        p(&dir),
        "--raw",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let o = rackcoop(&["erase", "--dir", p(&dir), "--nodes", "1:1,4:1"]);
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(
        fs::metadata(dir.join("rack_1").join("node_1.bin"))
            .unwrap()
            .len(),
        0
    );
    let o = rackcoop(&[
        "repair",
        "--dir",
        p(&dir),
        "--racks",
        "1,4",
        "--nodes",
        "1",
        "--helpers",
        "2,3",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let o = rackcoop(&[
        "collect",
        "--out",
        p(&dir),
        "--nodes",
        "1:1,1:2,4:1,4:2",
        "--recover",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert_eq!(fs::read(&out).unwrap(), vec![9u8; 18]);
}

#[test]
fn exit_codes() {
    let work = tempfile::tempdir().unwrap();
    let input = work.path().join("in");
    let dir = work.path().join("c");
    fs::write(&input, [1u8; 15]).unwrap();
    // too large for B = 18 bytes with the length header
    let o = rackcoop(&[
        "encode",
        "--params",
        "8,4,2,4,2,2",
        "--in",
        p(&input),
        "--out",
        p(&dir),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    assert!(text(&o).contains("B = 18"));

    let o = rackcoop(&["tradeoff", "--params", "8,4,2,4,3,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("does not divide"), "{}", text(&o));

    fs::write(&input, [1u8; 10]).unwrap();
    let o = rackcoop(&[
        "encode",
        "--params",
        "8,4,2,4,2,2",
        "--in",
        p(&input),
        "--out",
        p(&dir),
    ]);
    assert!(o.status.success());
    // f = 2 racks must fail together
    let o = rackcoop(&[
        "repair",
        "--dir",
        p(&dir),
        "--racks",
        "1",
        "--nodes",
        "1",
        "--helpers",
        "2,4",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));

    let node = dir.join("rack_2").join("node_1.bin");
    let mut bytes = fs::read(&node).unwrap();
    bytes[3] ^= 0x40;
    fs::write(&node, bytes).unwrap();
    let o = rackcoop(&[
        "repair",
        "--dir",
        p(&dir),
        "--racks",
        "1,3",
        "--nodes",
        "1",
        "--helpers",
        "2,4",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("digest"), "{}", text(&o));
}

#[test]
fn tradeoff_and_mincut() {
    let work = tempfile::tempdir().unwrap();
    let csv = work.path().join("curve.csv");
    let o = rackcoop(&[
        "tradeoff",
        "--params",
        "8,4,2,4,2,2",
        "--B",
        "18",
        "--sweep",
        "4",
        "--csv",
        p(&csv),
    ]);
    assert!(o.status.success());
    let t = text(&o);
    assert!(t.contains("MSRCR (alpha, gamma) = (9/2, 27/4)"), "{t}");
    assert!(t.contains("MBRCR (alpha, gamma) = (5, 5)"), "{t}");
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 + 5);

    let o = rackcoop(&[
        "verify-mincut",
        "--params",
        "8,4,2,4,2,2",
        "--alpha",
        "5",
        "--beta1",
        "2",
        "--beta2",
        "1",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("oracle min-cut: 18"));

    let o = rackcoop(&[
        "verify-mincut",
        "--params",
        "6,5,2,3,2,1",
        "--alpha",
        "5",
        "--beta1",
        "3",
        "--beta2",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn bench_reports_bandwidth() {
    let o = rackcoop(&[
        "bench",
        "--params",
        "8,4,2,4,2,2",
        "--rounds",
        "3",
        "--probes",
        "4",
        "--seed",
        "9",
    ]);
    assert!(o.status.success(), "{}", text(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("field GF(2^8)"), "{stdout}");
    assert!(!stdout.contains("elapsed"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("elapsed"));
}
