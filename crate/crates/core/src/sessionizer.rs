//! Visit reconstruction.
//!
//! Each user's requests are walked in time order. A request starts a new
//! history when it arrives more than the timeout after the user's previous
//! request, or when its referrer is not a page already present in one of the
//! user's histories. Otherwise it joins the history that most recently
//! accessed the referrer page.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::identity::{user_key, AnnotatedLog, UserId, UserKey};
use crate::time::Timestamp;

pub const DEFAULT_TIMEOUT_SECONDS: u32 = 1800;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionizerConfig {
    /// Maximum gap between two consecutive requests of one visit. Must be > 0.
    pub timeout_seconds: u32,
    /// When off, only the timeout splits visits.
    pub referrer_rule: bool,
}

impl Default for SessionizerConfig {
    fn default() -> Self {
        SessionizerConfig { timeout_seconds: DEFAULT_TIMEOUT_SECONDS, referrer_rule: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Visit {
    /// 1-based, dense, in creation order.
    pub visit_id: u32,
    pub user_id: UserId,
    /// Indices into the annotated log, time-ordered.
    pub entries: Vec<usize>,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Visit {
    pub fn page_views(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn length_seconds(&self) -> i64 {
        self.end.utc - self.start.utc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionSet {
    pub visits: Vec<Visit>,
    pub per_user_visits: BTreeMap<UserId, Vec<u32>>,
}

impl SessionSet {
    pub fn visit(&self, visit_id: u32) -> Option<&Visit> {
        self.visits.get((visit_id as usize).checked_sub(1)?)
    }

    /// `result[i]` is the visit id of annotated-log entry `i`.
    pub fn visit_of_entries(&self, entry_count: usize) -> Vec<u32> {
        let mut out = alloc::vec![0; entry_count];
        for v in &self.visits {
            for &i in &v.entries {
                out[i] = v.visit_id;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferrerNotFound;

impl fmt::Display for ReferrerNotFound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("referrer is not the url of any entry in the histories")
    }
}

impl core::error::Error for ReferrerNotFound {}

/// The request path of a referrer: scheme and host are removed from
/// absolute URLs, query strings are kept.
pub fn referrer_path(referrer: &str) -> &str {
    match referrer.find("://") {
        Some(i) => {
            let rest = &referrer[i + 3..];
            rest.find('/').map_or("/", |j| &rest[j..])
        }
        None => referrer,
    }
}

/// One page access inside a history under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageHit<'a> {
    pub url: &'a str,
    pub utc: i64,
}

/// Index of the history holding the most recent access to `referrer`;
/// equal times go to the later history.
pub fn distance(histories: &[Vec<PageHit<'_>>], referrer: &str) -> Result<usize, ReferrerNotFound> {
    let target = referrer_path(referrer);
    let mut best: Option<(i64, usize)> = None;
    for (idx, history) in histories.iter().enumerate() {
        for hit in history.iter().filter(|h| h.url == target) {
            if best.is_none_or(|b| (hit.utc, idx) >= b) {
                best = Some((hit.utc, idx));
            }
        }
    }
    best.map(|(_, idx)| idx).ok_or(ReferrerNotFound)
}

/// Splits every user's requests into visits.
///
/// Users are processed in [`UserKey`] order (address, then agent) and visit
/// ids follow that creation order.
pub fn session_gen(log: &AnnotatedLog, config: &SessionizerConfig) -> SessionSet {
    let entries = &log.log.entries;

    let mut per_user: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
    for (i, &uid) in log.user_ids.iter().enumerate() {
        per_user.entry(uid).or_default().push(i);
    }
    let mut order: Vec<(UserKey, UserId)> = per_user.iter().map(|(&uid, idx)| (user_key(&entries[idx[0]]), uid)).collect();
    order.sort();

    let timeout = i64::from(config.timeout_seconds);
    let mut set = SessionSet::default();
    for (_, uid) in order {
        let mut timeline = per_user.remove(&uid).unwrap_or_default();
        timeline.sort_by_key(|&i| (entries[i].time.utc, i));

        // Visit positions (into `set.visits`) of this user's histories.
        let mut histories: Vec<usize> = Vec::new();
        // url -> (time, history) of its most recent access.
        let mut last_access: BTreeMap<&str, (i64, usize)> = BTreeMap::new();
        let mut prev_utc: Option<i64> = None;

        for i in timeline {
            let e = &entries[i];
            let t = e.time.utc;
            let timed_out = prev_utc.is_none_or(|p| t - p > timeout);
            let target = if timed_out {
                None
            } else if config.referrer_rule {
                e.referrer.as_deref().and_then(|r| last_access.get(referrer_path(r))).map(|&(_, h)| h)
            } else {
                histories.len().checked_sub(1)
            };
            let h = match target {
                Some(h) => {
                    let visit = &mut set.visits[histories[h]];
                    visit.entries.push(i);
                    visit.end = e.time;
                    h
                }
                None => {
                    let visit_id = set.visits.len() as u32 + 1;
                    set.visits.push(Visit { visit_id, user_id: uid, entries: alloc::vec![i], start: e.time, end: e.time });
                    set.per_user_visits.entry(uid).or_default().push(visit_id);
                    histories.push(set.visits.len() - 1);
                    histories.len() - 1
                }
            };
            let slot = last_access.entry(e.url.as_str()).or_insert((t, h));
            if (t, h) > *slot {
                *slot = (t, h);
            }
            prev_utc = Some(t);
        }
    }
    set
}
