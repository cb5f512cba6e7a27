use std::path::Path;
use std::process::{Command, Output};

use ccn_dart::sim::parse_csv;

fn dartlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dartlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TWO_NODES: &str = "\
# two routers, anchor at 1
node 0 0 0
node 1 1 0
link 0 1 15
anchor /p1 1
";

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn csvs(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn minimal_two_router_run_writes_one_csv_with_delays() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "two.topo", TWO_NODES);
    write(
        dir.path(),
        "c.cfg",
        "topology = file\ntopology_file = two.topo\nschemes = dart\ncachings = none\nrates = 5\nduration_s = 4\ncatalog_size = 20\n",
    );
    let o = dartlab(&["run", "c.cfg", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let res = dir.path().join("res");
    assert_eq!(csvs(&res), vec!["dart_none_5_s1.csv"]);
    let rows = parse_csv(&std::fs::read_to_string(res.join("dart_none_5_s1.csv")).unwrap()).unwrap();
    let count = rows.iter().find(|r| r.router == "all" && r.metric == "delay_count").unwrap().value;
    assert!(count > 0.0);
    // Router 0's consumers are one link from the anchor; router 1's are served locally.
    let mean = rows.iter().find(|r| r.router == "all" && r.metric == "delay_ms_mean").unwrap().value;
    assert!(mean > 0.0 && mean <= 30.0, "{mean}");
    assert!(res.join("topology.txt").exists());
}

#[test]
fn sweep_writes_every_cell_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sweep.cfg",
        "routers = 8\narea_side = 20\nlink_radius = 10\nrates = [5, 20]\nseeds = [1, 2]\n\
         cachings = [onpath, edge, none]\nduration_s = 3\ncatalog_size = 100\noutput = a\n",
    );
    let o = dartlab(&["run", "sweep.cfg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = dir.path().join("a");
    let files = csvs(&a);
    assert_eq!(files.len(), 2 * 3 * 2 * 2);

    let o = dartlab(&["run", "sweep.cfg", "--out", "b"], dir.path());
    assert!(o.status.success());
    let b = dir.path().join("b");
    for f in &files {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }

    // The manifest is itself a config reproducing the same cells.
    let o = dartlab(&["run", "a/manifest.txt", "--out", "c"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in &files {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(dir.path().join("c").join(f)).unwrap());
    }

    let o = dartlab(&["compare", "a"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("caching none"));
    for fig in ["fig3.dat", "fig4.dat", "fig5.dat"] {
        assert!(a.join(fig).exists());
    }
}

#[test]
fn seed_flag_replaces_the_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.cfg",
        "routers = 6\narea_side = 10\nlink_radius = 8\nrates = 5\nseeds = [1, 2, 3]\nduration_s = 2\ncatalog_size = 50\nschemes = ndn\ncachings = edge\n",
    );
    let o = dartlab(&["run", "c.cfg", "--seed", "9", "--out", "o", "--audit=off"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csvs(&dir.path().join("o")), vec!["ndn_edge_5_s9.csv"]);
}

#[test]
fn bad_config_exits_one_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", "rates = [10, 20]\n# comment\nzipf_alpha = steep\n");
    let o = dartlab(&["run", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.cfg:3"), "{}", stderr(&o));

    write(dir.path(), "unknown.cfg", "rates = 10\nratez = 10\n");
    let o = dartlab(&["run", "unknown.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":2"));

    let o = dartlab(&["run", "missing.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dartlab(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(dartlab(&["--audit=sometimes", "scenario", "fig1-stale"], dir.path()).status.code(), Some(1));
    assert_eq!(dartlab(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(dartlab(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn every_scenario_passes_and_writes_its_trace() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig1-rankloop", "fig1-stale", "fig2-sharing"] {
        let trace = format!("{name}.trace");
        let o = dartlab(&["scenario", name, "--trace", &trace], dir.path());
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains(&format!("scenario {name} passed")));
        assert!(!stdout(&o).contains("FAIL"));
        let text = std::fs::read_to_string(dir.path().join(&trace)).unwrap();
        assert!(text.contains(" RX INT "), "{name}");
    }
    let o = dartlab(&["scenario", "fig7"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_rejects_ndn_only_input() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.cfg",
        "routers = 6\narea_side = 10\nlink_radius = 8\nrates = 5\nduration_s = 2\ncatalog_size = 50\nschemes = ndn\noutput = o\n",
    );
    assert!(dartlab(&["run", "c.cfg"], dir.path()).status.success());
    let o = dartlab(&["compare", "o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing dart cells"), "{}", stderr(&o));
}

#[test]
fn compare_with_one_rate_reports_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.cfg",
        "routers = 6\narea_side = 10\nlink_radius = 8\nrates = 5\nduration_s = 2\ncatalog_size = 50\ncachings = onpath\noutput = o\n",
    );
    assert!(dartlab(&["run", "c.cfg"], dir.path()).status.success());
    let o = dartlab(&["compare", "o", "--out", "figs"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("insufficient data"));
    assert!(dir.path().join("figs/fig3.dat").exists());
}
