//! Brute-force reference implementations used to check the library.
//! Nothing here calls into the code paths under test beyond plain data types.

use std::collections::{BTreeMap, BTreeSet};

use wumprep_core::LogEntry;

fn strip_host(r: &str) -> &str {
    match r.split_once("://") {
        Some((_, rest)) => match rest.find('/') {
            Some(j) => &rest[j..],
            None => "/",
        },
        None => r,
    }
}

/// User identity: login, else (ip, agent).
pub fn identity(e: &LogEntry) -> Identity {
    match &e.login {
        Some(l) => (Some(l.clone()), String::new(), None),
        None => (None, e.ip.clone(), e.agent.clone()),
    }
}

/// Literal session generation: sort by user then time; for each request,
/// open a new history if the gap exceeds the timeout or the referrer is not
/// in any of the user's histories; else add it to the history that most
/// recently accessed the referrer. Returns groups of entry indices as a
/// canonical (sorted) partition.
pub fn literal_sessions(entries: &[LogEntry], timeout: i64, referrer_rule: bool) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        (identity(&entries[a]), entries[a].time.utc, a).cmp(&(identity(&entries[b]), entries[b].time.utc, b))
    });

    let mut all: Vec<Vec<usize>> = Vec::new();
    let mut histories: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<(_, i64)> = None;
    for j in order {
        let e = &entries[j];
        let who = identity(e);
        let same_user = prev.as_ref().is_some_and(|(p, _)| *p == who);
        if !same_user {
            all.append(&mut histories);
            prev = None;
        }
        let gap_exceeded = match &prev {
            None => true,
            Some((_, t)) => e.time.utc - t > timeout,
        };
        let in_histories = |r: &str| histories.iter().flatten().any(|&k| entries[k].url == strip_host(r));
        let referrer_missing = referrer_rule && !e.referrer.as_deref().is_some_and(in_histories);
        if gap_exceeded || referrer_missing {
            histories.push(vec![j]);
        } else if referrer_rule {
            let target = strip_host(e.referrer.as_deref().unwrap());
            let mut best: Option<(i64, usize)> = None;
            for (h, hist) in histories.iter().enumerate() {
                for &k in hist {
                    if entries[k].url == target {
                        let cand = (entries[k].time.utc, h);
                        if best.is_none_or(|b| cand >= b) {
                            best = Some(cand);
                        }
                    }
                }
            }
            histories[best.unwrap().1].push(j);
        } else {
            histories.last_mut().unwrap().push(j);
        }
        prev = Some((who, e.time.utc));
    }
    all.append(&mut histories);
    canonical(all)
}

pub fn canonical(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

/// Linear-scan filter with the default predicates spelled out independently.
pub struct FilterRules<'a> {
    pub extensions: &'a BTreeSet<String>,
    pub keep_methods: Option<&'a BTreeSet<String>>,
    pub status_lo: u16,
    pub status_hi: u16,
    pub robot_words: &'a [&'a str],
    pub robots_txt: bool,
}

pub fn brute_force_filter(entries: &[LogEntry], rules: &FilterRules<'_>) -> Vec<usize> {
    let mut robots: BTreeSet<(String, Option<String>)> = BTreeSet::new();
    for e in entries {
        let agent_hit = e
            .agent
            .as_ref()
            .is_some_and(|a| rules.robot_words.iter().any(|w| a.to_lowercase().contains(w)));
        let path = strip_host(&e.url).split(['?', '#']).next().unwrap();
        if agent_hit || (rules.robots_txt && path == "/robots.txt") {
            robots.insert((e.ip.clone(), e.agent.clone()));
        }
    }
    let mut kept = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        if robots.contains(&(e.ip.clone(), e.agent.clone())) {
            continue;
        }
        let path = strip_host(&e.url).split(['?', '#']).next().unwrap();
        let last = path.rsplit('/').next().unwrap();
        if let Some((_, ext)) = last.rsplit_once('.') {
            if rules.extensions.contains(&ext.to_lowercase()) {
                continue;
            }
        }
        if let Some(keep) = rules.keep_methods {
            if !keep.contains(&e.method) {
                continue;
            }
        }
        if e.status < rules.status_lo || e.status > rules.status_hi {
            continue;
        }
        kept.push(i);
    }
    kept
}

/// Group-by of entries per user: (request count, first time, last time).
pub type Identity = (Option<String>, String, Option<String>);

pub fn group_by_user(entries: &[LogEntry]) -> BTreeMap<Identity, (u64, i64, i64)> {
    let mut m = BTreeMap::new();
    for e in entries {
        let s = m.entry(identity(e)).or_insert((0u64, i64::MAX, i64::MIN));
        s.0 += 1;
        s.1 = s.1.min(e.time.utc);
        s.2 = s.2.max(e.time.utc);
    }
    m
}
