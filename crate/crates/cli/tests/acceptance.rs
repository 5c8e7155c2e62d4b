//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.
//!
//! Criteria 3 and 8 need a slice of the public NASA 1995 HTTP access log:
//! set `WUMPREP_NASA_LOG` to an uncompressed file of at least 100,000 lines,
//! or place it at `data/NASA_access_log_Jul95` in the workspace root.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::oracle;
use common::{any_entry, cleaning_corpus, small_log};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use support::{dir_contents, fixture, run_shuttle, synthetic_clf, shuttle_sessions_csv, wumprep};
use wumprep::{parse_bytes, RunReport};
use wumprep_core::*;

const NASA_SLICE_LINES: usize = 100_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn joint(entries: Vec<LogEntry>) -> JointLog {
    JointLog { entries, source_count: 1 }
}

fn partition(set: &SessionSet) -> Vec<Vec<usize>> {
    oracle::canonical(set.visits.iter().map(|v| v.entries.clone()).collect())
}

fn sessionize(entries: Vec<LogEntry>, config: SessionizerConfig) -> (AnnotatedLog, SessionSet) {
    let (_, ann) = assign_users(joint(entries));
    let set = session_gen(&ann, &config);
    (ann, set)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parser_golden() -> Outcome {
    let start = Instant::now();
    let text = fs::read_to_string(fixture("sample.log")).map_err(|e| e.to_string())?;
    let expected = [
        ("72.30.252.91", "2006-06-18T12:28:33Z", "/robots.txt", 200, 52),
        ("83.77.134.184", "2006-06-18T12:29:40Z", "/vanuatu/export/system/modules/VTO/resources/stylesheet/vto.css", 200, 7797),
        ("83.77.134.184", "2006-06-18T12:29:41Z", "/vanuatu/export/sites/VTO/fr/kids/volcanoes/ambrym_eruption.html", 200, 26812),
        ("83.77.134.184", "2006-06-18T12:29:41Z", "/vanuatu/export/system/modules/VTO/resources/images/nto_kids_logo.jpg", 200, 10420),
        ("83.77.134.184", "2006-06-18T12:29:41Z", "/vanuatu/export/system/modules/VTO/resources/images/vanuatu.gif", 200, 40892),
    ];
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.len() == 5, || format!("{} lines in fixture", lines.len()))?;
    for (line, (ip, time, url, status, bytes)) in lines.iter().zip(expected) {
        let e = parse_line(line, LogFormat::Combined).map_err(|e| format!("{line}: {e}"))?;
        let got = (e.ip.as_str(), e.time.iso8601().to_string(), e.url.as_str(), e.status, e.bytes);
        ensure(got == (ip, time.to_string(), url, status, Some(bytes)), || format!("{got:?}"))?;
        let back = parse_line(&canonicalize(&e, LogFormat::Combined).unwrap(), LogFormat::Combined).unwrap();
        ensure(back == e, || format!("round trip changed {line}"))?;
    }
    runner(2000)
        .run(&any_entry(), |e| {
            let f = LogFormat::minimal_for(&e);
            let back = parse_line(&canonicalize(&e, f).unwrap(), f).map_err(|err| TestCaseError::fail(err.to_string()))?;
            prop_assert_eq!(back, e);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("5 lines match, 2000 random entries round-trip, {took:.0?}"))
}

fn shuttle_sessions() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = run_shuttle(dir.path());
    let took = within(Duration::from_secs(1), start)?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let visits = fs::read_to_string(dir.path().join("visits.csv")).map_err(|e| e.to_string())?;
    let n = visits.lines().count() - 1;
    ensure(n == 3, || format!("{n} visits"))?;
    let detail = fs::read_to_string(dir.path().join("session_detail.csv")).map_err(|e| e.to_string())?;
    ensure(detail == shuttle_sessions_csv(), || format!("session_detail.csv differs:\n{detail}"))?;
    Ok(format!("3 visits, 14 rows identical with ids 9/10/11 as 1/2/3, {took:.0?}"))
}

fn nasa_log() -> Result<PathBuf, String> {
    let default = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/NASA_access_log_Jul95");
    let path = std::env::var_os("WUMPREP_NASA_LOG").map(PathBuf::from).unwrap_or(default);
    if path.is_file() {
        Ok(path)
    } else {
        Err(format!("NASA log not found at {} (set WUMPREP_NASA_LOG)", path.display()))
    }
}

/// The first 100,000 lines of the NASA log, written to `dir`.
fn nasa_slice(dir: &Path) -> Result<(PathBuf, Vec<u8>), String> {
    let data = fs::read(nasa_log()?).map_err(|e| e.to_string())?;
    let mut end = 0;
    for _ in 0..NASA_SLICE_LINES {
        match data[end..].iter().position(|&b| b == b'\n') {
            Some(i) => end += i + 1,
            None => return Err(format!("NASA log has fewer than {NASA_SLICE_LINES} lines")),
        }
    }
    let slice = data[..end].to_vec();
    let path = dir.join("nasa_slice.log");
    fs::write(&path, &slice).map_err(|e| e.to_string())?;
    Ok((path, slice))
}

fn run_nasa(slice: &Path, out: &Path) -> Result<(Duration, RunReport, String), String> {
    let start = Instant::now();
    let input = format!("nasa={}", slice.display());
    let o = wumprep(&["run", "-i", &input, "--reference", "nasa-jul95", "--out", out.to_str().unwrap()]);
    let took = start.elapsed();
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let report = serde_json::from_str(&fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok((took, report, String::from_utf8_lossy(&o.stdout).into_owned()))
}

fn nasa_reduction() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (slice, _) = nasa_slice(dir.path())?;
    let (took, report, text) = run_nasa(&slice, &dir.path().join("out"))?;
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    let pct = report.reduction_percent.ok_or("no reduction reported")?;
    ensure((62.0..=92.0).contains(&pct), || format!("reduction {pct:.2}% outside [62, 92]"))?;
    for column in ["Website", "Duration", "Original Size", "Size after Preprocessing", "% Reduction in Size", "No. of Sessions", "No. of Users"] {
        ensure(text.contains(column), || format!("report lacks column {column:?}"))?;
    }
    Ok(format!("reduction {pct:.2}%, {} sessions, {} users, {took:.0?}", report.sessions, report.users))
}

fn sessionizer_oracle() -> Outcome {
    runner(1000)
        .run(&(small_log(50, 5), any::<bool>()), |(entries, rule)| {
            let expected = oracle::literal_sessions(&entries, 1800, rule);
            let (_, set) = sessionize(entries, SessionizerConfig { timeout_seconds: 1800, referrer_rule: rule });
            prop_assert_eq!(partition(&set), expected);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 of 1000 random logs match the literal procedure".into())
}

fn cleaning_conservation() -> Outcome {
    let conserved = |entries: Vec<LogEntry>, config: &CleaningConfig| -> Result<(), String> {
        let n = entries.len() as u64;
        let (log, r) = clean(joint(entries), config);
        ensure(r.input_count == n && r.input_count == r.kept_count + r.dropped_total() && log.len() as u64 == r.kept_count, || {
            format!("{r:?}")
        })
    };
    for name in ["sample.log", "shuttle.log"] {
        let data = fs::read(fixture(name)).map_err(|e| e.to_string())?;
        let (entries, _, _) = parse_bytes(&data, None, Path::new(name)).map_err(|e| e.to_string())?;
        conserved(entries, &CleaningConfig::default())?;
    }
    let synthetic = synthetic_clf(5000, 17).join("\n");
    let (entries, _, _) = parse_bytes(synthetic.as_bytes(), None, Path::new("synthetic")).map_err(|e| e.to_string())?;
    conserved(entries, &CleaningConfig::default())?;

    let config = (
        proptest::collection::btree_set("[a-z]{2,4}|gif|css|html|jpg", 0..5),
        proptest::collection::btree_set("[a-z]{2,4}|gif|css|html|jpg|txt", 1..5),
        any::<bool>(),
        any::<bool>(),
        (100u16..400, 0u16..300),
    );
    runner(250)
        .run(&(cleaning_corpus(), config), |(entries, (base, extra, get_only, robots_txt, (lo, width)))| {
            let mut small = CleaningConfig {
                drop_extensions: base,
                robots_txt_rule: robots_txt,
                keep_status: vec![(lo, lo + width)],
                ..Default::default()
            };
            if get_only {
                small.drop_methods = MethodFilter::DropAllExcept(BTreeSet::from(["GET".to_string()]));
            }
            let mut large = small.clone();
            large.drop_extensions.extend(extra);
            let (_, r_small) = clean(joint(entries.clone()), &small);
            let (_, r_large) = clean(joint(entries.clone()), &large);
            prop_assert!(r_large.kept_count <= r_small.kept_count);
            for r in [&r_small, &r_large] {
                prop_assert_eq!(r.input_count, r.kept_count + r.dropped_total());
                prop_assert_eq!(r.input_count, entries.len() as u64);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("3 corpora conserve counts; 250 random config pairs conserve and are monotone".into())
}

fn aggregation_consistency() -> Outcome {
    runner(200)
        .run(&(small_log(50, 5), any::<bool>()), |(entries, rule)| {
            let n = entries.len() as u64;
            let groups = oracle::group_by_user(&entries);
            let (ann, set) = sessionize(entries, SessionizerConfig { referrer_rule: rule, ..Default::default() });
            if n > 0 {
                let total: f64 = server_shares(&ann.log).iter().map(|s| s.percent).sum();
                prop_assert!((total - 100.0).abs() <= 1e-9, "shares sum to {}", total);
            }
            let days = period_aggregates(&ann, &set, Granularity::Day);
            prop_assert_eq!(days.iter().map(|d| d.request_count).sum::<u64>(), n);
            let aggs = session_aggregates(&set);
            prop_assert_eq!(aggs.len(), groups.len());
            for a in &aggs {
                let first = ann.iter().find(|(u, _)| *u == a.user_id).unwrap().1;
                prop_assert_eq!(a.page_views, groups[&oracle::identity(first)].0);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("200 random logs: shares sum to 100, day counts sum to |log|, page views match group-by".into())
}

fn anonymization_invariance() -> Outcome {
    runner(200)
        .run(&(small_log(50, 5), any::<bool>()), |(entries, rule)| {
            let config = SessionizerConfig { referrer_rule: rule, ..Default::default() };
            let (plain_log, plain) = sessionize(entries.clone(), config);
            let (anon_log, anon) = sessionize(anonymize(joint(entries), AnonymizeMode::Hash).entries, config);
            prop_assert_eq!(partition(&plain), partition(&anon));
            prop_assert_eq!(plain_log.user_ids, anon_log.user_ids);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("200 random logs: identical visit partitions with hashed clients".into())
}

fn throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (slice, data) = nasa_slice(dir.path())?;
    let start = Instant::now();
    let (_, report, format) = parse_bytes(&data, None, &slice).map_err(|e| e.to_string())?;
    let rate = report.total_lines as f64 / start.elapsed().as_secs_f64();
    let (took, _, _) = run_nasa(&slice, &dir.path().join("out"))?;
    ensure(took < Duration::from_secs(10), || format!("run took {took:?}"))?;
    ensure(rate >= 50_000.0, || format!("parse rate {rate:.0} lines/s"))?;
    Ok(format!("run {took:.2?}, parse {rate:.0} lines/s ({format})"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.log"), dir.path().join("b.log"));
    fs::write(&a, synthetic_clf(3000, 23).join("\n")).map_err(|e| e.to_string())?;
    fs::write(&b, synthetic_clf(3000, 29).join("\n")).map_err(|e| e.to_string())?;
    let inputs = [format!("www1={}", a.display()), format!("www2={}:5", b.display()), format!("www3={}", fixture("sample.log").display())];
    let mut outputs = Vec::new();
    for run in ["first", "second"] {
        let out = dir.path().join(run);
        let o = wumprep(&[
            "-q", "run", "-i", &inputs[0], "-i", &inputs[1], "-i", &inputs[2], "--anonymize", "--period", "week", "--out",
            out.to_str().unwrap(),
        ]);
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        outputs.push(dir_contents(&out));
    }
    ensure(outputs[0] == outputs[1], || "output directories differ".into())?;
    Ok(format!("{} files byte-identical across two runs", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("parser golden lines and round trip", parser_golden),
        ("session listing reconstruction", shuttle_sessions),
        ("size reduction on NASA slice", nasa_reduction),
        ("sessionizer oracle equivalence", sessionizer_oracle),
        ("cleaning conservation and monotonicity", cleaning_conservation),
        ("aggregation consistency", aggregation_consistency),
        ("anonymization invariance", anonymization_invariance),
        ("throughput on NASA slice", throughput),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
