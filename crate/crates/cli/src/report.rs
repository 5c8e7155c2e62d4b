//! Run summary: size reduction, session and user counts, plus an echo of
//! the configuration that produced them.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wumprep_core::{CleaningReport, Timestamp};

/// Previously published preprocessing results, printed next to a run for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    NasaAug95,
    NasaJul95,
    AcademicMay01,
}

impl FromStr for Reference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nasa-aug95" => Ok(Reference::NasaAug95),
            "nasa-jul95" => Ok(Reference::NasaJul95),
            "academic-may01" => Ok(Reference::AcademicMay01),
            _ => Err(format!("unknown reference {s:?}; expected nasa-aug95, nasa-jul95 or academic-may01")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub website: String,
    pub duration: String,
    pub original_size: String,
    pub size_after_preprocessing: String,
    pub reduction_percent: f64,
    pub sessions: u64,
    pub users: u64,
}

impl Reference {
    pub fn row(self) -> ReferenceRow {
        let (website, duration, original, after, pct, sessions, users) = match self {
            Reference::NasaAug95 => ("NASA", "1-10 Aug 95", "75361 bytes (7.6MB)", "20362 bytes", 72.98, 6821, 5421),
            Reference::NasaJul95 => ("NASA", "20-24 July 95", "205532 bytes (20.6MB)", "57092 bytes", 72.22, 16810, 12525),
            Reference::AcademicMay01 => ("Academic Site", "12-28 May 2001", "28972 bytes (2.9MB)", "5043 bytes", 82.5, 1645, 936),
        };
        ReferenceRow {
            website: website.into(),
            duration: duration.into(),
            original_size: original.into(),
            size_after_preprocessing: after.into(),
            reduction_percent: pct,
            sessions,
            users,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    pub server: String,
    pub path: String,
    pub skew_seconds: i64,
    pub format: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub inputs: Vec<InputEcho>,
    pub drop_extensions: Vec<String>,
    pub drop_methods: String,
    pub keep_status: Vec<String>,
    pub robot_agent_keywords: Vec<String>,
    pub robots_txt_rule: bool,
    pub anonymize: bool,
    pub timeout_seconds: u32,
    pub referrer_rule: bool,
    pub period: String,
    pub generalize_depth: usize,
}

/// Request counts through the stages.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub lines_read: u64,
    pub lines_rejected: u64,
    pub merged: u64,
    pub kept: u64,
    pub dropped_as_robot: u64,
    pub dropped_by_extension: u64,
    pub dropped_by_method: u64,
    pub dropped_by_status: u64,
}

/// What the pipeline measured besides cleaning.
#[derive(Debug, Clone, Default)]
pub struct RunCounts {
    pub website: String,
    pub first: Option<Timestamp>,
    pub last: Option<Timestamp>,
    pub lines_read: u64,
    pub lines_rejected: u64,
    pub sessions: u64,
    pub users: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub website: String,
    /// `YYYY-MM-DD to YYYY-MM-DD` (UTC), empty without input.
    pub duration: String,
    pub original_size_bytes: u64,
    pub size_after_preprocessing_bytes: u64,
    /// Absent when there was no input.
    pub reduction_percent: Option<f64>,
    pub sessions: u64,
    pub users: u64,
    pub stages: StageCounts,
    pub config: ConfigEcho,
    pub reference: Option<ReferenceRow>,
}

pub fn render_report(cleaning: &CleaningReport, counts: &RunCounts, config: ConfigEcho, reference: Option<Reference>) -> RunReport {
    let duration = match (counts.first, counts.last) {
        (Some(a), Some(b)) => format!("{} to {}", &a.iso8601().to_string()[..10], &b.iso8601().to_string()[..10]),
        _ => String::new(),
    };
    RunReport {
        website: counts.website.clone(),
        duration,
        original_size_bytes: cleaning.input_bytes,
        size_after_preprocessing_bytes: cleaning.kept_bytes,
        reduction_percent: cleaning.reduction_percent(),
        sessions: counts.sessions,
        users: counts.users,
        stages: StageCounts {
            lines_read: counts.lines_read,
            lines_rejected: counts.lines_rejected,
            merged: cleaning.input_count,
            kept: cleaning.kept_count,
            dropped_as_robot: cleaning.dropped_as_robot,
            dropped_by_extension: cleaning.dropped_by_extension,
            dropped_by_method: cleaning.dropped_by_method,
            dropped_by_status: cleaning.dropped_by_status,
        },
        config,
        reference: reference.map(Reference::row),
    }
}

pub fn format_percent(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.2}%"),
        None => "n/a".to_string(),
    }
}

const HEADER: [&str; 7] = [
    "Website",
    "Duration",
    "Original Size",
    "Size after Preprocessing",
    "% Reduction in Size",
    "No. of Sessions",
    "No. of Users",
];

fn table(rows: &[[String; 7]]) -> String {
    let mut widths = HEADER.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let header = HEADER.map(String::from);
    for row in std::iter::once(&header).chain(rows) {
        let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut rows = vec![[
            if self.website.is_empty() { "-".to_string() } else { self.website.clone() },
            if self.duration.is_empty() { "-".to_string() } else { self.duration.clone() },
            format!("{} bytes", self.original_size_bytes),
            format!("{} bytes", self.size_after_preprocessing_bytes),
            format_percent(self.reduction_percent),
            self.sessions.to_string(),
            self.users.to_string(),
        ]];
        if let Some(r) = &self.reference {
            rows.push([
                format!("{} (reference)", r.website),
                r.duration.clone(),
                r.original_size.clone(),
                r.size_after_preprocessing.clone(),
                format!("{:.2}%", r.reduction_percent),
                r.sessions.to_string(),
                r.users.to_string(),
            ]);
        }
        let mut out = table(&rows);
        let s = &self.stages;
        let _ = writeln!(
            out,
            "\nlines read {}, rejected {}; requests merged {}, kept {}; dropped: robot {}, extension {}, method {}, status {}",
            s.lines_read,
            s.lines_rejected,
            s.merged,
            s.kept,
            s.dropped_as_robot,
            s.dropped_by_extension,
            s.dropped_by_method,
            s.dropped_by_status
        );
        let c = &self.config;
        for i in &c.inputs {
            let _ = writeln!(out, "input {}={} (skew {} s, {})", i.server, i.path, i.skew_seconds, i.format);
        }
        let _ = writeln!(
            out,
            "drop extensions [{}]; methods: {}; keep status [{}]; robot keywords [{}]; robots.txt rule {}; anonymize {}",
            c.drop_extensions.join(","),
            c.drop_methods,
            c.keep_status.join(","),
            c.robot_agent_keywords.join(","),
            if c.robots_txt_rule { "on" } else { "off" },
            if c.anonymize { "hash" } else { "off" },
        );
        let _ = writeln!(
            out,
            "timeout {} s; referrer rule {}; period {}; generalize depth {}",
            c.timeout_seconds,
            if c.referrer_rule { "on" } else { "off" },
            c.period,
            c.generalize_depth
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
