#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn wumprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wumprep")).args(args).output().expect("binary runs")
}

/// The published session listing: session id, address, time, page.
pub const SHUTTLE_SESSIONS: &str = "\
9\t128.102.204.243\t1995-07-22 01:16:58\t/shuttle/missions/sts-73/mission-sts-73.html
9\t128.102.204.243\t1995-07-22 01:17:25\t/shuttle/missions/sts-74/mission-sts-74.html
9\t128.102.204.243\t1995-07-22 01:17:38\t/shuttle/missions/sts-72/mission-sts-72.html
9\t128.102.204.243\t1995-07-22 01:17:45\t/shuttle/missions/sts-75/mission-sts-75.html
9\t128.102.204.243\t1995-07-22 01:17:52\t/shuttle/missions/sts-76/mission-sts-76.html
9\t128.102.204.243\t1995-07-22 01:17:58\t/shuttle/missions/sts-77/mission-sts-77.html
9\t128.102.204.243\t1995-07-22 01:18:05\t/shuttle/missions/sts-78/mission-sts-78.html
10\t128.102.210.40\t1995-07-20 23:27:49\t/shuttle/countdown/countdown.html
10\t128.102.210.40\t1995-07-20 23:28:11\t/shuttle/technology/sts-newsref/stsref-toc.html
10\t128.102.210.40\t1995-07-20 23:28:57\t/shuttle/technology/sts-newsref/sts_mes.html
10\t128.102.210.40\t1995-07-20 23:29:11\t/shuttle/countdown/liftoff.html
10\t128.102.210.40\t1995-07-20 23:30:18\t/shuttle/missions/sts-69/mission-sts-69.html
11\t128.102.210.40\t1995-07-21 01:58:47\t/shuttle/countdown/countdown.html
11\t128.102.210.40\t1995-07-21 01:59:12\t/shuttle/countdown/liftoff.html
";

/// The shuttle session listing as `session_detail.csv` would hold it. The published ids
/// 9, 10, 11 are numbered from 1 in an exported run.
pub fn shuttle_sessions_csv() -> String {
    let mut ids = BTreeMap::new();
    let mut out = String::from("session_id,ip,datetime,url\n");
    for line in SHUTTLE_SESSIONS.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        let next = ids.len() + 1;
        let id = *ids.entry(cols[0]).or_insert(next);
        out.push_str(&format!("{id},{},{},{}\n", cols[1], cols[2], cols[3]));
    }
    out
}

/// Runs the whole pipeline on the shuttle session fixture with the referrer rule off.
pub fn run_shuttle(out: &Path) -> Output {
    let input = format!("nasa={}", fixture("shuttle.log").display());
    wumprep(&["-q", "run", "-i", &input, "--referrer-rule", "off", "--timeout-seconds", "1800", "--out", out.to_str().unwrap()])
}

/// All files of a directory, name to bytes.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

/// A deterministic CLF log of `n` lines from a handful of clients.
pub fn synthetic_clf(n: usize, seed: u64) -> Vec<String> {
    let mut state = seed | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let pages = ["/index.html", "/a/b.html", "/img/logo.gif", "/style.css", "/cgi-bin/q?x=1", "/docs/", "/robots.txt", "/x.jpg"];
    let methods = ["GET", "GET", "GET", "POST", "HEAD"];
    let statuses = [200, 200, 200, 304, 404, 500, 302];
    let mut t = 806_000_000i64;
    (0..n)
        .map(|_| {
            t += (next() % 90) as i64;
            let host = format!("h{}.example.net", next() % 40);
            let (days, secs) = (t.div_euclid(86_400), t.rem_euclid(86_400));
            let (y, m, d) = civil(days);
            let month = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"][m - 1];
            format!(
                "{host} - - [{d:02}/{month}/{y}:{:02}:{:02}:{:02} -0400] \"{} {} HTTP/1.0\" {} {}",
                secs / 3600,
                secs / 60 % 60,
                secs % 60,
                methods[(next() % 5) as usize],
                pages[(next() % 8) as usize],
                statuses[(next() % 7) as usize],
                next() % 50_000
            )
        })
        .collect()
}

// Days since 1970-01-01 to a calendar date, by counting.
fn civil(mut days: i64) -> (i64, usize, i64) {
    let mut y = 1970;
    loop {
        let len = if (y % 4 == 0 && y % 100 != 0) || y % 400 == 0 { 366 } else { 365 };
        if days < len {
            break;
        }
        days -= len;
        y += 1;
    }
    let leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    let lens = [31, if leap { 29 } else { 28 }, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let mut m = 0;
    while days >= lens[m] {
        days -= lens[m];
        m += 1;
    }
    (y, m + 1, days + 1)
}
