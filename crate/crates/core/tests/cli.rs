use std::path::Path;
use std::process::{Command, Output};

use nk_deliberation::experiments::AGGREGATE_HEADER;
use nk_deliberation::seed::{salt, split_seed};
use nk_deliberation::{Beliefs, NeighborScheme, NkLandscape};

fn nkdelib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nkdelib"))
        .args(args)
        .output()
        .expect("spawn nkdelib")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Splits a file into its `#` header lines and CSV rows.
fn read_csv(p: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(p).unwrap();
    assert!(text.ends_with('\n'));
    let (comments, rows): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    (
        comments.into_iter().map(String::from).collect(),
        rows.into_iter()
            .map(|r| r.split(',').map(String::from).collect())
            .collect(),
    )
}

#[test]
fn lone_agent_run_reports_one_solution() {
    let o = nkdelib(&["run", "--m", "1", "--n", "4", "--k", "0", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "distinct_solutions=1"), "{out}");
    assert!(out.lines().any(|l| l == "consensus_round=1"), "{out}");
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(nkdelib(&["--help"]).status.code(), Some(0));
    assert_eq!(nkdelib(&["sweep-alpha", "--help"]).status.code(), Some(0));
    assert_eq!(nkdelib(&["--version"]).status.code(), Some(0));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = path(dir.path(), "bad.toml");
    std::fs::write(&bad_key, "colour = \"blue\"\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--bogus"],
        vec![],
        vec!["frobnicate"],
        vec!["run", "--n", "10", "--k", "10"],
        vec!["run", "--alpha", "1.5"],
        vec!["run", "--alpha", "linear:0"],
        vec!["run", "--policy", "greedy"],
        vec!["run", "--dm", "agent:9"],
        vec!["run", "--n", "abc"],
        vec!["run", "--config", &bad_key],
        vec!["run", "--config", "/nonexistent/nk.toml"],
        vec!["sweep-alpha", "--runs", "0"],
        vec!["compare-schedules", "--runs", "1"],
        vec!["sweep-alpha", "--workers", "0", "--runs", "2"],
    ];
    for args in cases {
        let o = nkdelib(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("nkdelib: "), "{err}");
    }
}

#[test]
fn unwritable_output_exits_with_three() {
    let o = nkdelib(&["run", "--output", "/nonexistent/dir/trace.csv"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = nkdelib(&[
        "sweep-alpha",
        "--runs",
        "2",
        "--output",
        "/nonexistent/dir/s.csv",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);
}

#[test]
fn flags_override_the_config_file_and_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let conf = path(dir.path(), "nk.toml");
    std::fs::write(
        &conf,
        "# desk-scale defaults\nn = 8\nk = 2\nm = 3\nalpha = \"linear:0:1\"\nseed = 17\nt_max = 40\n",
    )
    .unwrap();
    let trace = path(dir.path(), "trace.csv");
    let o = nkdelib(&[
        "run",
        "--config",
        &conf,
        "--k",
        "3",
        "--workers",
        "2",
        "--output",
        &trace,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&trace);
    for line in [
        "# nkdelib run",
        "# n = 8",
        "# k = 3",
        "# m = 3",
        "# t_max = 40",
        "# alpha = linear:0:1",
        "# master_seed = 17",
    ] {
        assert!(
            header.iter().any(|h| h == line),
            "missing {line:?} in {header:?}"
        );
    }
    assert!(!header.iter().any(|h| h.contains("workers")));
    assert_eq!(
        rows[0][..4],
        ["round", "alpha", "proposer", "consensus_after"]
    );
    assert_eq!(rows[0].len(), 4 + 4 * 3);
    assert!(rows.len() > 1 && rows.len() <= 41);
}

#[test]
fn sweep_writes_runs_and_a_consistent_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let runs = path(dir.path(), "sweep.csv");
    let o = nkdelib(&[
        "sweep-alpha",
        "--k-values",
        "0,5",
        "--alphas",
        "0,0.5",
        "--runs",
        "30",
        "--resamples",
        "200",
        "--seed",
        "9",
        "--output",
        &runs,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("k5/const:0.5"));

    let (header, run_rows) = read_csv(&runs);
    assert!(header.iter().any(|h| h == "# master_seed = 9"));
    assert!(header.iter().any(|h| h == "# k_values = 0,5"));
    assert!(!header.iter().any(|h| h.starts_with("# alpha =") || h.starts_with("# k =")));
    assert_eq!(
        run_rows[0].join(","),
        "condition_label,k,w,alpha_spec,run_index,seed,distinct_solutions,dm_value,dm_value_normalized,consensus_round,rounds_executed"
    );
    assert_eq!(run_rows.len(), 1 + 4 * 30);

    let (agg_header, agg_rows) = read_csv(&path(dir.path(), "sweep_aggregate.csv"));
    assert_eq!(agg_header, header);
    assert_eq!(agg_rows[0].join(","), AGGREGATE_HEADER);
    let cols: Vec<&str> = AGGREGATE_HEADER.split(',').collect();
    let col = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let labels: Vec<&str> = agg_rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        labels,
        ["k0/const:0", "k0/const:0.5", "k5/const:0", "k5/const:0.5"]
    );

    for row in &agg_rows[1..] {
        assert_eq!(row.len(), cols.len());
        let counts: Vec<f64> = run_rows[1..]
            .iter()
            .filter(|r| r[0] == row[0])
            .map(|r| r[6].parse().unwrap())
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let f = |name: &str| row[col(name)].parse::<f64>().unwrap();
        assert_eq!(f("mean"), mean, "{}", row[0]);
        assert_eq!(f("runs"), 30.0);
        assert!(f("ci_low") <= mean && mean <= f("ci_high"));
        if row[0].starts_with("k0/") {
            assert_eq!(
                (f("mean"), f("sd"), f("ci_low"), f("ci_high")),
                (1.0, 0.0, 1.0, 1.0)
            );
        }
    }
}

#[test]
fn schedule_comparison_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "cmp.csv");
    let o = nkdelib(&[
        "compare-schedules",
        "--schedule-a",
        "const:0.2",
        "--schedule-b",
        "const:0.2",
        "--runs",
        "12",
        "--resamples",
        "100",
        "--output",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&path(dir.path(), "cmp_comparison.csv"));
    assert_eq!(
        rows[0].join(","),
        "label_a,label_b,runs,mean_a,mean_b,mean_difference,p_value"
    );
    assert_eq!(rows[1][0], "a/const:0.2");
    assert_eq!(rows[1][2], "12");
    assert_eq!(rows[1][5].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][6].parse::<f64>().unwrap(), 1.0);
    assert_eq!(read_csv(&path(dir.path(), "cmp_aggregate.csv")).1.len(), 3);
}

#[test]
fn dumped_landscapes_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let plain = path(dir.path(), "plain.json");
    let o = nkdelib(&[
        "dump-landscape",
        "--n",
        "6",
        "--k",
        "2",
        "--scheme",
        "adjacent",
        "--seed",
        "4",
        "--output",
        &plain,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let loaded = NkLandscape::load(std::fs::File::open(&plain).unwrap()).unwrap();
    assert_eq!(
        loaded,
        NkLandscape::generate(6, 2, NeighborScheme::Adjacent, 4).unwrap()
    );

    let o = nkdelib(&[
        "dump-landscape",
        "--n",
        "6",
        "--k",
        "2",
        "--m",
        "3",
        "--seed",
        "4",
        "--run-truth",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let from_stdout = NkLandscape::load(o.stdout.as_slice()).unwrap();
    let beliefs = Beliefs::generate(
        6,
        2,
        3,
        0.0,
        NeighborScheme::Random,
        split_seed(4, salt::BELIEFS, 0),
    )
    .unwrap();
    assert_eq!(&from_stdout, beliefs.truth());
}
