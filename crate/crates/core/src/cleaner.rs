//! Removal of requests that carry no navigation signal: embedded resources,
//! robot traffic, non-page methods and failed responses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::merger::JointLog;
use crate::parser::{canonical_len, LogEntry};

pub const DEFAULT_DROP_EXTENSIONS: [&str; 16] = [
    "jpg", "jpeg", "gif", "png", "bmp", "ico", "css", "js", "swf", "mp3", "mp4", "avi", "mpg", "wav", "zip", "gz",
];

pub const DEFAULT_ROBOT_KEYWORDS: [&str; 5] = ["bot", "crawler", "spider", "slurp", "archiver"];

/// Which request methods are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodFilter {
    /// Drop every method not in the set.
    DropAllExcept(BTreeSet<String>),
    /// Drop exactly the methods in the set.
    Drop(BTreeSet<String>),
}

impl MethodFilter {
    pub fn drops(&self, method: &str) -> bool {
        match self {
            MethodFilter::DropAllExcept(keep) => !keep.contains(method),
            MethodFilter::Drop(drop) => drop.contains(method),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnonymizeMode {
    #[default]
    Off,
    Hash,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleaningConfig {
    /// Lowercase, without the dot.
    pub drop_extensions: BTreeSet<String>,
    pub drop_methods: MethodFilter,
    /// Inclusive status ranges that are kept; everything else is dropped.
    pub keep_status: Vec<(u16, u16)>,
    /// Lowercase substrings of robot user agents.
    pub robot_agent_keywords: BTreeSet<String>,
    /// Flag every client that fetched `/robots.txt`.
    pub robots_txt_rule: bool,
    pub anonymize: AnonymizeMode,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            drop_extensions: DEFAULT_DROP_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            drop_methods: MethodFilter::DropAllExcept(["GET", "POST"].iter().map(|s| s.to_string()).collect()),
            keep_status: alloc::vec![(200, 399)],
            robot_agent_keywords: DEFAULT_ROBOT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            robots_txt_rule: true,
            anonymize: AnonymizeMode::Off,
        }
    }
}

impl CleaningConfig {
    /// A configuration that keeps everything.
    pub fn keep_all() -> Self {
        CleaningConfig {
            drop_extensions: BTreeSet::new(),
            drop_methods: MethodFilter::Drop(BTreeSet::new()),
            keep_status: alloc::vec![(100, 599)],
            robot_agent_keywords: BTreeSet::new(),
            robots_txt_rule: false,
            anonymize: AnonymizeMode::Off,
        }
    }

    pub fn keeps_status(&self, status: u16) -> bool {
        self.keep_status.iter().any(|&(lo, hi)| (lo..=hi).contains(&status))
    }
}

/// Counts behind the size reduction figures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleaningReport {
    pub input_count: u64,
    pub kept_count: u64,
    pub dropped_by_extension: u64,
    pub dropped_by_method: u64,
    pub dropped_by_status: u64,
    pub dropped_as_robot: u64,
    /// Canonical line bytes before and after cleaning.
    pub input_bytes: u64,
    pub kept_bytes: u64,
}

impl CleaningReport {
    pub fn dropped_total(&self) -> u64 {
        self.dropped_by_extension + self.dropped_by_method + self.dropped_by_status + self.dropped_as_robot
    }

    /// `None` when there was no input.
    pub fn reduction_percent(&self) -> Option<f64> {
        (self.input_bytes > 0).then(|| 100.0 * (1.0 - self.kept_bytes as f64 / self.input_bytes as f64))
    }
}

/// A client as seen by robot detection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClientKey {
    pub ip: String,
    pub agent: Option<String>,
}

impl ClientKey {
    pub fn of(entry: &LogEntry) -> Self {
        ClientKey { ip: entry.ip.clone(), agent: entry.agent.clone() }
    }
}

fn url_path(url: &str) -> &str {
    let path = match url.find("://") {
        Some(i) => url[i + 3..].find('/').map_or("/", |j| &url[i + 3 + j..]),
        None => url,
    };
    path.split(['?', '#']).next().unwrap_or(path)
}

/// Extension of the last path segment, lowercased; `None` when it has none.
pub fn url_extension(url: &str) -> Option<String> {
    let path = url_path(url);
    let segment = path.rsplit('/').next().unwrap_or(path);
    let dot = segment.rfind('.')?;
    let ext = &segment[dot + 1..];
    (!ext.is_empty()).then(|| ext.to_ascii_lowercase())
}

pub fn is_irrelevant_resource(url: &str, config: &CleaningConfig) -> bool {
    url_extension(url).is_some_and(|ext| config.drop_extensions.contains(&ext))
}

fn has_robot_keyword(agent: &str, config: &CleaningConfig) -> bool {
    if config.robot_agent_keywords.is_empty() {
        return false;
    }
    let agent = agent.to_ascii_lowercase();
    config.robot_agent_keywords.iter().any(|k| agent.contains(k.as_str()))
}

/// Clients whose agent names a robot, or that fetched `/robots.txt` when that
/// rule is on.
pub fn detect_robots(log: &JointLog, config: &CleaningConfig) -> BTreeSet<ClientKey> {
    let mut verdicts: BTreeMap<(&str, Option<&str>), bool> = BTreeMap::new();
    for e in &log.entries {
        let key = (e.ip.as_str(), e.agent.as_deref());
        let by_txt = config.robots_txt_rule && url_path(&e.url) == "/robots.txt";
        let flagged = verdicts
            .entry(key)
            .or_insert_with(|| e.agent.as_deref().is_some_and(|a| has_robot_keyword(a, config)));
        *flagged |= by_txt;
    }
    verdicts
        .into_iter()
        .filter(|(_, robot)| *robot)
        .map(|((ip, agent), _)| ClientKey { ip: ip.to_string(), agent: agent.map(str::to_string) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Keep,
    Robot,
    Extension,
    Method,
    Status,
}

/// First matching drop reason, in attribution order robot, extension, method, status.
pub fn verdict(entry: &LogEntry, robots: &BTreeSet<ClientKey>, config: &CleaningConfig) -> Verdict {
    if !robots.is_empty() && robots.contains(&ClientKey::of(entry)) {
        Verdict::Robot
    } else if is_irrelevant_resource(&entry.url, config) {
        Verdict::Extension
    } else if config.drop_methods.drops(&entry.method) {
        Verdict::Method
    } else if !config.keeps_status(entry.status) {
        Verdict::Status
    } else {
        Verdict::Keep
    }
}

/// Drops useless requests, keeping the relative order of the rest.
///
/// Anonymization is not applied here; see [`anonymize`].
pub fn clean(log: JointLog, config: &CleaningConfig) -> (JointLog, CleaningReport) {
    let robots = detect_robots(&log, config);
    let mut report = CleaningReport::default();
    let source_count = log.source_count;
    let mut kept = Vec::with_capacity(log.entries.len());
    for e in log.entries {
        let size = canonical_len(&e);
        report.input_count += 1;
        report.input_bytes += size;
        match verdict(&e, &robots, config) {
            Verdict::Keep => {
                report.kept_count += 1;
                report.kept_bytes += size;
                kept.push(e);
            }
            Verdict::Robot => report.dropped_as_robot += 1,
            Verdict::Extension => report.dropped_by_extension += 1,
            Verdict::Method => report.dropped_by_method += 1,
            Verdict::Status => report.dropped_by_status += 1,
        }
    }
    (JointLog { entries: kept, source_count }, report)
}

/// Replaces each distinct client address with `u0001`, `u0002`, ... in order
/// of first appearance.
pub fn anonymize(mut log: JointLog, mode: AnonymizeMode) -> JointLog {
    if mode == AnonymizeMode::Off {
        return log;
    }
    let mut tokens: BTreeMap<String, String> = BTreeMap::new();
    for e in &mut log.entries {
        let next = tokens.len() + 1;
        let token = tokens.entry(core::mem::take(&mut e.ip)).or_insert_with(|| format!("u{next:04}"));
        e.ip.clone_from(token);
    }
    log
}
