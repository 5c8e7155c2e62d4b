//! Joining per-server logs into one time-ordered log.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::parser::LogEntry;

/// The requests logged by one web server.
#[derive(Debug, Clone, Default)]
pub struct LogSource {
    pub server_name: String,
    pub entries: Vec<LogEntry>,
    /// Added to every entry's UTC time before ordering.
    pub clock_skew_seconds: i64,
}

impl LogSource {
    pub fn new(server_name: impl Into<String>, entries: Vec<LogEntry>) -> Self {
        LogSource { server_name: server_name.into(), entries, clock_skew_seconds: 0 }
    }

    pub fn with_skew(mut self, seconds: i64) -> Self {
        self.clock_skew_seconds = seconds;
        self
    }
}

/// Requests from every server, ascending by UTC time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JointLog {
    pub entries: Vec<LogEntry>,
    pub source_count: usize,
}

impl JointLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct server names, sorted.
    pub fn servers(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.server.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MergeError {
    DuplicateServerName(String),
    EmptyServerName,
}

impl fmt::Display for MergeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MergeError::DuplicateServerName(name) => write!(f, "server name {name:?} given more than once"),
            MergeError::EmptyServerName => f.write_str("server name must not be empty"),
        }
    }
}

impl core::error::Error for MergeError {}

/// Returns `entry` with its UTC time moved by `skew_seconds`; the logged
/// zone offset is kept.
pub fn apply_skew(mut entry: LogEntry, skew_seconds: i64) -> LogEntry {
    entry.time = entry.time.with_utc(entry.time.utc + skew_seconds);
    entry
}

/// Heap cursor; the derived order is the merge order.
#[derive(PartialEq, Eq)]
struct Head {
    utc: i64,
    source: usize,
    line_no: u64,
    seq: usize,
}

impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.utc, self.source, self.line_no, self.seq).cmp(&(other.utc, other.source, other.line_no, other.seq))
    }
}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Merges all sources into a joint log.
///
/// The result equals concatenating every (skew-corrected) source and stably
/// sorting by `(utc, server_name, line_no)`, independent of the order of
/// `sources`. Each source is sorted on its own first so out-of-order input is
/// tolerated, then the sorted runs are k-way merged.
pub fn merge(sources: Vec<LogSource>) -> Result<JointLog, MergeError> {
    let mut sources = sources;
    let mut names = BTreeSet::new();
    for s in &sources {
        if s.server_name.is_empty() {
            return Err(MergeError::EmptyServerName);
        }
        if !names.insert(s.server_name.clone()) {
            return Err(MergeError::DuplicateServerName(s.server_name.clone()));
        }
    }
    sources.sort_by(|a, b| a.server_name.cmp(&b.server_name));
    let source_count = sources.len();

    let mut runs: Vec<Vec<LogEntry>> = sources
        .into_iter()
        .map(|src| {
            let mut run: Vec<LogEntry> = src
                .entries
                .into_iter()
                .map(|mut e| {
                    e.server.clone_from(&src.server_name);
                    apply_skew(e, src.clock_skew_seconds)
                })
                .collect();
            let sorted = run.windows(2).all(|w| (w[0].time.utc, w[0].line_no) <= (w[1].time.utc, w[1].line_no));
            if !sorted {
                run.sort_by_key(|e| (e.time.utc, e.line_no));
            }
            run
        })
        .collect();

    let total = runs.iter().map(Vec::len).sum();
    if runs.len() == 1 {
        let entries = runs.pop().unwrap_or_default();
        return Ok(JointLog { entries, source_count });
    }

    let mut cursors: Vec<_> = runs.iter_mut().map(|r| core::mem::take(r).into_iter().enumerate()).collect();
    let mut pending: Vec<Option<LogEntry>> = Vec::with_capacity(cursors.len());
    let mut heap = BinaryHeap::with_capacity(cursors.len());
    for (source, cursor) in cursors.iter_mut().enumerate() {
        pending.push(None);
        if let Some((seq, e)) = cursor.next() {
            heap.push(Reverse(Head { utc: e.time.utc, source, line_no: e.line_no, seq }));
            pending[source] = Some(e);
        }
    }

    let mut entries = Vec::with_capacity(total);
    while let Some(Reverse(head)) = heap.pop() {
        let source = head.source;
        if let Some(e) = pending[source].take() {
            entries.push(e);
        }
        if let Some((seq, e)) = cursors[source].next() {
            heap.push(Reverse(Head { utc: e.time.utc, source, line_no: e.line_no, seq }));
            pending[source] = Some(e);
        }
    }
    Ok(JointLog { entries, source_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_line, LogFormat};
    use crate::time::Timestamp;
    use alloc::string::ToString;
    use alloc::vec;

    fn entry(utc: i64, line_no: u64) -> LogEntry {
        let mut e = parse_line(r#"h - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1"#, LogFormat::Clf).unwrap();
        e.time = Timestamp::new(utc, 0);
        e.line_no = line_no;
        e
    }

    #[test]
    fn empty_merge() {
        let log = merge(Vec::new()).unwrap();
        assert!(log.is_empty());
        assert_eq!(log.source_count, 0);
    }

    #[test]
    fn duplicate_names_rejected() {
        let r = merge(vec![LogSource::new("a", vec![]), LogSource::new("a", vec![])]);
        assert_eq!(r, Err(MergeError::DuplicateServerName("a".to_string())));
        assert_eq!(merge(vec![LogSource::new("", vec![])]), Err(MergeError::EmptyServerName));
    }

    #[test]
    fn ties_break_on_server_then_line() {
        let a = LogSource::new("b", vec![entry(5, 1), entry(5, 2)]);
        let b = LogSource::new("a", vec![entry(5, 9), entry(4, 10)]);
        let log = merge(vec![a, b]).unwrap();
        let got: Vec<_> = log.entries.iter().map(|e| (e.time.utc, e.server.as_str(), e.line_no)).collect();
        assert_eq!(got, vec![(4, "a", 10), (5, "a", 9), (5, "b", 1), (5, "b", 2)]);
    }

    #[test]
    fn skew_shifts_utc_only() {
        let e = entry(1000, 1);
        assert_eq!(apply_skew(e.clone(), 0), e);
        let shifted = apply_skew(e.clone(), 3600);
        assert_eq!(shifted.time.utc, 4600);
        assert_eq!(shifted.time.offset_minutes, e.time.offset_minutes);
        let log = merge(vec![LogSource::new("x", vec![e]).with_skew(-90)]).unwrap();
        assert_eq!(log.entries[0].time.utc, 910);
    }

    #[test]
    fn skew_on_sample_time() {
        let t = Timestamp::parse_clf("18/Jun/2006:12:28:33 +0000").unwrap();
        let mut e = entry(0, 1);
        e.time = t;
        assert_eq!(apply_skew(e, 3600).time.iso8601().to_string(), "2006-06-18T13:28:33Z");
    }
}
