//! Aggregated variables at the user-session and calendar-period levels, plus
//! request URL generalization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroUsize;

use crate::identity::{AnnotatedLog, UserId};
use crate::merger::JointLog;
use crate::sessionizer::SessionSet;
use crate::time::{civil_from_days, days_from_civil, Timestamp};

/// All visits of one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionAggregate {
    pub user_id: UserId,
    pub visit_count: u64,
    pub length_seconds: i64,
    pub page_views: u64,
    pub first: Timestamp,
    pub last: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Granularity {
    Hour,
    Day,
    /// Weeks start on Monday.
    Week,
    Month,
}

impl Granularity {
    /// Start of the UTC calendar bucket containing `utc`.
    pub fn bucket_start(self, utc: i64) -> i64 {
        let days = utc.div_euclid(86_400);
        match self {
            Granularity::Hour => utc.div_euclid(3600) * 3600,
            Granularity::Day => days * 86_400,
            // 1970-01-01 was a Thursday, three days after a Monday.
            Granularity::Week => (days - (days + 3).rem_euclid(7)) * 86_400,
            Granularity::Month => {
                let (y, m, _) = civil_from_days(days);
                days_from_civil(y, m, 1) * 86_400
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Hour => "hour",
            Granularity::Day => "day",
            Granularity::Week => "week",
            Granularity::Month => "month",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Granularity {
    type Err = UnknownGranularity;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hour" => Ok(Granularity::Hour),
            "day" => Ok(Granularity::Day),
            "week" => Ok(Granularity::Week),
            "month" => Ok(Granularity::Month),
            _ => Err(UnknownGranularity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownGranularity;

impl fmt::Display for UnknownGranularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of hour, day, week, month")
    }
}

impl core::error::Error for UnknownGranularity {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodAggregate {
    pub granularity: Granularity,
    /// Bucket start, UTC epoch seconds.
    pub bucket: i64,
    pub unique_visitors: u64,
    pub unique_agents: u64,
    pub visit_count: u64,
    pub request_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerShare {
    pub server_name: String,
    pub request_count: u64,
    pub percent: f64,
}

/// One aggregate per user that has visits, ordered by user id.
pub fn session_aggregates(sessions: &SessionSet) -> Vec<SessionAggregate> {
    sessions
        .per_user_visits
        .iter()
        .filter_map(|(&user_id, ids)| {
            let visits: Vec<_> = ids.iter().filter_map(|&id| sessions.visit(id)).collect();
            let first = visits.iter().map(|v| v.start).min_by_key(|t| t.utc)?;
            let last = visits.iter().map(|v| v.end).max_by_key(|t| t.utc)?;
            Some(SessionAggregate {
                user_id,
                visit_count: visits.len() as u64,
                length_seconds: last.utc - first.utc,
                page_views: visits.iter().map(|v| v.page_views()).sum(),
                first,
                last,
            })
        })
        .collect()
}

#[derive(Default)]
struct Bucket<'a> {
    visitors: BTreeSet<UserId>,
    agents: BTreeSet<&'a str>,
    visits: u64,
    requests: u64,
}

/// Per-bucket counts; visits count in the bucket of their start; empty
/// buckets are omitted.
pub fn period_aggregates(log: &AnnotatedLog, sessions: &SessionSet, granularity: Granularity) -> Vec<PeriodAggregate> {
    let mut buckets: BTreeMap<i64, Bucket<'_>> = BTreeMap::new();
    for (uid, e) in log.iter() {
        let b = buckets.entry(granularity.bucket_start(e.time.utc)).or_default();
        b.requests += 1;
        b.visitors.insert(uid);
        if let Some(agent) = e.agent.as_deref() {
            b.agents.insert(agent);
        }
    }
    for v in &sessions.visits {
        buckets.entry(granularity.bucket_start(v.start.utc)).or_default().visits += 1;
    }
    buckets
        .into_iter()
        .map(|(bucket, b)| PeriodAggregate {
            granularity,
            bucket,
            unique_visitors: b.visitors.len() as u64,
            unique_agents: b.agents.len() as u64,
            visit_count: b.visits,
            request_count: b.requests,
        })
        .collect()
}

/// Share of requests per server, ordered by server name.
pub fn server_shares(log: &JointLog) -> Vec<ServerShare> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for e in &log.entries {
        *counts.entry(e.server.as_str()).or_default() += 1;
    }
    let total = log.entries.len() as f64;
    counts
        .into_iter()
        .map(|(name, n)| ServerShare { server_name: String::from(name), request_count: n, percent: 100.0 * n as f64 / total })
        .collect()
}

/// Truncates the path to its first `depth` segments, marking truncation
/// with a trailing `/`. The query string is always removed.
pub fn generalize_url(url: &str, depth: NonZeroUsize) -> String {
    let url = url.split('?').next().unwrap_or(url);
    let (prefix, path) = match url.find("://") {
        Some(i) => match url[i + 3..].find('/') {
            Some(j) => url.split_at(i + 3 + j),
            None => (url, ""),
        },
        None => ("", url),
    };
    let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    let mut out = String::from(prefix);
    if segments.len() <= depth.get() {
        out.push_str(path);
        return out;
    }
    for seg in &segments[..depth.get()] {
        out.push('/');
        out.push_str(seg);
    }
    out.push('/');
    out
}
