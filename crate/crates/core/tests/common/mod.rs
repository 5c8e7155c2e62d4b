#![allow(dead_code)]

use proptest::prelude::*;
use wumprep_core::{LogEntry, Timestamp};

pub fn base_entry() -> LogEntry {
    LogEntry {
        server: String::new(),
        ip: "127.0.0.1".into(),
        ident: None,
        login: None,
        time: Timestamp::new(0, 0),
        method: "GET".into(),
        url: "/".into(),
        protocol: "HTTP/1.0".into(),
        status: 200,
        bytes: None,
        referrer: None,
        agent: None,
        line_no: 0,
    }
}

fn token() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.@]{1,8}"
}

fn quoted_text() -> impl Strategy<Value = String> {
    // Anything printable, including quotes, backslashes, spaces and non-ASCII.
    "[ -~àé漢\t]{0,40}".prop_filter("dash means absent", |s| s != "-")
}

/// Arbitrary valid entries; every field survives a canonical round trip.
pub fn any_entry() -> impl Strategy<Value = LogEntry> {
    (
        "[a-z0-9.:]{1,15}",
        proptest::option::of(token()),
        proptest::option::of(token()),
        (-2_000_000_000i64..4_000_000_000i64, -840i16..=840),
        "[A-Z]{1,7}",
        prop_oneof!["/[A-Za-z0-9/._~%?=&\\\\\"-]{0,30}", "https?://[a-z.]{1,10}/[a-z/]{0,10}"],
        prop_oneof![Just("HTTP/1.0".to_string()), Just("HTTP/1.1".to_string()), "[A-Z]{1,4}/[0-9]"],
        100u16..=599,
        proptest::option::of(any::<u64>()),
        proptest::option::of(quoted_text()),
        proptest::option::of(quoted_text()),
    )
        .prop_map(|(ip, ident, login, (utc, off), method, url, protocol, status, bytes, referrer, agent)| LogEntry {
            server: String::new(),
            ip,
            ident,
            login,
            time: Timestamp::new(utc, off),
            method,
            url,
            protocol,
            status,
            bytes,
            referrer,
            agent,
            line_no: 0,
        })
}

/// A small, time-ordered clickstream: up to `max_len` requests from up to
/// `max_users` clients over a pool of pages; referrers are absent, a page
/// requested earlier, or an absolute URL to such a page.
pub fn small_log(max_len: usize, max_users: usize) -> impl Strategy<Value = Vec<LogEntry>> {
    let row = (
        0..max_users,
        0u32..6,
        0i64..2400,
        0usize..8,
        0u8..4,
        0usize..64,
        0usize..4,
        any::<bool>(),
    );
    proptest::collection::vec(row, 0..=max_len).prop_map(|rows| {
        let mut t = 799_000_000i64;
        let mut out: Vec<LogEntry> = Vec::with_capacity(rows.len());
        for (i, (user, gap_kind, gap, page, ref_kind, ref_pick, server, login)) in rows.into_iter().enumerate() {
            t += match gap_kind {
                0 => 0,
                1..=3 => gap % 300,
                _ => gap,
            };
            let mut e = base_entry();
            e.line_no = i as u64 + 1;
            e.time = Timestamp::new(t, 0);
            e.ip = format!("10.0.0.{}", user % 3);
            e.agent = Some(format!("agent-{}", user / 3));
            if login && user == 4 {
                e.login = Some("alice".into());
            }
            e.url = format!("/p{page}.html");
            e.server = ["www1", "www2", "www3", "www4"][server].into();
            e.referrer = match ref_kind {
                0 => None,
                _ if out.is_empty() => None,
                1 | 2 => Some(out[ref_pick % out.len()].url.clone()),
                _ => Some(format!("http://site.example{}", out[ref_pick % out.len()].url)),
            };
            out.push(e);
        }
        out
    })
}

/// Entries mixing page and resource extensions, robot agents, odd
/// methods and failing statuses.
pub fn cleaning_corpus() -> impl Strategy<Value = Vec<LogEntry>> {
    let exts = ["html", "htm", "gif", "JPG", "css", "js", "txt", "pdf", "", "png"];
    let agents = ["Mozilla/4.0 (compatible; MSIE 6.0)", "Googlebot/2.1", "Yahoo! Slurp", "ia_archiver", "Lynx/2.8", "WebCrawler/3.0"];
    proptest::collection::vec(
        (any_entry(), 0usize..10, 0usize..7, 0usize..6, prop_oneof![Just(200u16), Just(304), Just(404), Just(500), 100u16..600], 0usize..5),
        0..80,
    )
    .prop_map(move |rows| {
        rows.into_iter()
            .map(|(mut e, ext, agent, method, status, ip)| {
                e.ip = format!("h{ip}");
                e.url = match exts[ext] {
                    "" => "/dir/".to_string(),
                    "txt" if ip == 0 => "/robots.txt".to_string(),
                    x => format!("/p/file.{x}"),
                };
                e.agent = agents.get(agent).map(|a| a.to_string());
                e.method = ["GET", "POST", "HEAD", "PUT", "OPTIONS", "get"][method].to_string();
                e.status = status;
                e
            })
            .collect()
    })
}

pub mod oracle;
