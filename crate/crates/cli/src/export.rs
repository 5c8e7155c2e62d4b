//! The relational output: seven CSV tables keyed by request, user and visit ids.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use wumprep_core::{
    AnnotatedLog, PeriodAggregate, ServerShare, SessionAggregate, SessionSet, UserKey, UserTable,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestRow {
    pub request_id: u64,
    pub server: String,
    pub user_id: u32,
    pub visit_id: u32,
    pub timestamp_utc: String,
    pub method: String,
    pub url: String,
    pub protocol: String,
    pub status: u16,
    pub bytes: Option<u64>,
    pub referrer: Option<String>,
    pub agent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRow {
    pub user_id: u32,
    pub kind: String,
    pub login: Option<String>,
    pub ip: Option<String>,
    pub agent: Option<String>,
    pub first_seen: String,
    pub request_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitRow {
    pub visit_id: u32,
    pub user_id: u32,
    pub start: String,
    pub end: String,
    pub page_views: u64,
}

/// One request per row, laid out like a session listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDetailRow {
    pub session_id: u32,
    pub ip: String,
    pub datetime: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionAggregateRow {
    pub user_id: u32,
    pub visit_count: u64,
    pub length_seconds: i64,
    pub page_views: u64,
    pub first: String,
    pub last: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodAggregateRow {
    pub granularity: String,
    pub bucket: String,
    pub unique_visitors: u64,
    pub unique_agents: u64,
    pub visit_count: u64,
    pub request_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerShareRow {
    pub server_name: String,
    pub request_count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportBundle {
    pub requests: Vec<RequestRow>,
    pub users: Vec<UserRow>,
    pub visits: Vec<VisitRow>,
    pub session_detail: Vec<SessionDetailRow>,
    pub session_aggregates: Vec<SessionAggregateRow>,
    pub period_aggregates: Vec<PeriodAggregateRow>,
    pub server_shares: Vec<ServerShareRow>,
}

pub const TABLE_FILES: [&str; 7] = [
    "requests.csv",
    "users.csv",
    "visits.csv",
    "session_detail.csv",
    "session_aggregates.csv",
    "period_aggregates.csv",
    "server_shares.csv",
];

/// Everything the tables are built from.
pub struct Model<'a> {
    pub log: &'a AnnotatedLog,
    pub users: &'a UserTable,
    pub sessions: &'a SessionSet,
    pub session_aggregates: &'a [SessionAggregate],
    pub period_aggregates: &'a [PeriodAggregate],
    pub server_shares: &'a [ServerShare],
}

impl ExportBundle {
    pub fn build(m: &Model<'_>) -> Self {
        let entries = &m.log.log.entries;
        let visit_of = m.sessions.visit_of_entries(entries.len());

        let requests = m
            .log
            .iter()
            .enumerate()
            .map(|(i, (user_id, e))| RequestRow {
                request_id: i as u64 + 1,
                server: e.server.clone(),
                user_id,
                visit_id: visit_of[i],
                timestamp_utc: e.time.iso8601().to_string(),
                method: e.method.clone(),
                url: e.url.clone(),
                protocol: e.protocol.clone(),
                status: e.status,
                bytes: e.bytes,
                referrer: e.referrer.clone(),
                agent: e.agent.clone(),
            })
            .collect();

        let users = m
            .users
            .users
            .iter()
            .map(|u| {
                let (login, ip, agent) = match &u.key {
                    UserKey::Login(l) => (Some(l.clone()), None, None),
                    UserKey::IpAgent { ip, agent } => (None, Some(ip.clone()), agent.clone()),
                };
                UserRow {
                    user_id: u.user_id,
                    kind: u.key.kind().to_string(),
                    login,
                    ip,
                    agent,
                    first_seen: u.first_seen.iso8601().to_string(),
                    request_count: u.request_count,
                }
            })
            .collect();

        let visits = m
            .sessions
            .visits
            .iter()
            .map(|v| VisitRow {
                visit_id: v.visit_id,
                user_id: v.user_id,
                start: v.start.iso8601().to_string(),
                end: v.end.iso8601().to_string(),
                page_views: v.page_views(),
            })
            .collect();

        let session_detail = m
            .sessions
            .visits
            .iter()
            .flat_map(|v| {
                v.entries.iter().map(move |&i| {
                    let e = &entries[i];
                    SessionDetailRow {
                        session_id: v.visit_id,
                        ip: e.ip.clone(),
                        datetime: e.time.plain().to_string(),
                        url: e.url.clone(),
                    }
                })
            })
            .collect();

        let session_aggregates = m
            .session_aggregates
            .iter()
            .map(|a| SessionAggregateRow {
                user_id: a.user_id,
                visit_count: a.visit_count,
                length_seconds: a.length_seconds,
                page_views: a.page_views,
                first: a.first.iso8601().to_string(),
                last: a.last.iso8601().to_string(),
            })
            .collect();

        let period_aggregates = m
            .period_aggregates
            .iter()
            .map(|p| PeriodAggregateRow {
                granularity: p.granularity.name().to_string(),
                bucket: wumprep_core::Timestamp::new(p.bucket, 0).iso8601().to_string(),
                unique_visitors: p.unique_visitors,
                unique_agents: p.unique_agents,
                visit_count: p.visit_count,
                request_count: p.request_count,
            })
            .collect();

        let server_shares = m
            .server_shares
            .iter()
            .map(|s| ServerShareRow { server_name: s.server_name.clone(), request_count: s.request_count, percent: s.percent })
            .collect();

        ExportBundle { requests, users, visits, session_detail, session_aggregates, period_aggregates, server_shares }
    }

    /// Checks that every foreign key resolves.
    pub fn check_integrity(&self) -> Result<()> {
        let users: BTreeSet<u32> = self.users.iter().map(|u| u.user_id).collect();
        let visits: BTreeSet<u32> = self.visits.iter().map(|v| v.visit_id).collect();
        let fail = |msg: String| Err(Error::RefIntegrityViolation(msg));
        if users.len() != self.users.len() {
            return fail("duplicate user_id in users".into());
        }
        if visits.len() != self.visits.len() {
            return fail("duplicate visit_id in visits".into());
        }
        for r in &self.requests {
            if !users.contains(&r.user_id) {
                return fail(format!("request {} references unknown user {}", r.request_id, r.user_id));
            }
            if !visits.contains(&r.visit_id) {
                return fail(format!("request {} references unknown visit {}", r.request_id, r.visit_id));
            }
        }
        for v in &self.visits {
            if !users.contains(&v.user_id) {
                return fail(format!("visit {} references unknown user {}", v.visit_id, v.user_id));
            }
        }
        for s in &self.session_detail {
            if !visits.contains(&s.session_id) {
                return fail(format!("session_detail references unknown visit {}", s.session_id));
            }
        }
        for a in &self.session_aggregates {
            if !users.contains(&a.user_id) {
                return fail(format!("session aggregate references unknown user {}", a.user_id));
            }
        }
        if self.session_detail.len() != self.requests.len() {
            return fail(format!(
                "session_detail has {} rows but requests has {}",
                self.session_detail.len(),
                self.requests.len()
            ));
        }
        Ok(())
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(true)
        .from_path(path)
        .map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

fn write_table<T: Serialize>(dir: &Path, name: &str, rows: &[T], headers: &[&str]) -> Result<PathBuf> {
    let path = dir.join(name);
    let wrap = |source| Error::Csv { path: path.clone(), source };
    let mut w = csv_writer(&path)?;
    if rows.is_empty() {
        w.write_record(headers).map_err(wrap)?;
    }
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

const HEADERS: [&[&str]; 7] = [
    &["request_id", "server", "user_id", "visit_id", "timestamp_utc", "method", "url", "protocol", "status", "bytes", "referrer", "agent"],
    &["user_id", "kind", "login", "ip", "agent", "first_seen", "request_count"],
    &["visit_id", "user_id", "start", "end", "page_views"],
    &["session_id", "ip", "datetime", "url"],
    &["user_id", "visit_count", "length_seconds", "page_views", "first", "last"],
    &["granularity", "bucket", "unique_visitors", "unique_agents", "visit_count", "request_count"],
    &["server_name", "request_count", "percent"],
];

fn write_selected(bundle: &ExportBundle, out_dir: &Path, tables: std::ops::Range<usize>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    tables
        .map(|t| {
            let (name, headers) = (TABLE_FILES[t], HEADERS[t]);
            match t {
                0 => write_table(out_dir, name, &bundle.requests, headers),
                1 => write_table(out_dir, name, &bundle.users, headers),
                2 => write_table(out_dir, name, &bundle.visits, headers),
                3 => write_table(out_dir, name, &bundle.session_detail, headers),
                4 => write_table(out_dir, name, &bundle.session_aggregates, headers),
                5 => write_table(out_dir, name, &bundle.period_aggregates, headers),
                _ => write_table(out_dir, name, &bundle.server_shares, headers),
            }
        })
        .collect()
}

/// Writes all seven tables into `out_dir`, creating it when needed.
pub fn export_tables(bundle: &ExportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    bundle.check_integrity()?;
    write_selected(bundle, out_dir, 0..7)
}

/// Writes only the session, period and server aggregate tables.
pub fn export_summary_tables(bundle: &ExportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    write_selected(bundle, out_dir, 4..7)
}

fn read_table<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<Vec<T>> {
    let path = dir.join(name);
    let mut r = csv::Reader::from_path(&path).map_err(|source| Error::Csv { path: path.clone(), source })?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(|source| Error::Csv { path, source })
}

/// Reads a directory written by [`export_tables`].
pub fn read_tables(dir: &Path) -> Result<ExportBundle> {
    Ok(ExportBundle {
        requests: read_table(dir, TABLE_FILES[0])?,
        users: read_table(dir, TABLE_FILES[1])?,
        visits: read_table(dir, TABLE_FILES[2])?,
        session_detail: read_table(dir, TABLE_FILES[3])?,
        session_aggregates: read_table(dir, TABLE_FILES[4])?,
        period_aggregates: read_table(dir, TABLE_FILES[5])?,
        server_shares: read_table(dir, TABLE_FILES[6])?,
    })
}
