//! The stage sequence: merge, clean, identify users, sessionize, summarize, export.

use std::collections::BTreeMap;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use wumprep_core::{
    anonymize, assign_users, clean, generalize_url, merge, period_aggregates, server_shares, session_aggregates, session_gen,
    AnnotatedLog, CleaningConfig, CleaningReport, Granularity, JointLog, LogFormat, LogSource, MethodFilter, ParseReport,
    PeriodAggregate, ServerShare, SessionAggregate, SessionSet, SessionizerConfig, UserTable,
};

use crate::error::{Error, Result};
use crate::export::{export_tables, ExportBundle, Model};
use crate::input::{load_sources, InputSpec};
use crate::intermediate::read_intermediate;
use crate::report::{render_report, ConfigEcho, InputEcho, Reference, RunCounts, RunReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    /// Raw log files, one per server.
    Raw(Vec<InputSpec>),
    /// A file written by an earlier stage.
    Intermediate(PathBuf),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: InputSource,
    /// `None` detects the format per input.
    pub format: Option<LogFormat>,
    pub cleaning: CleaningConfig,
    pub sessionizer: SessionizerConfig,
    pub period: Granularity,
    /// Request URLs are truncated to this many path segments on export.
    pub generalize_depth: Option<NonZeroUsize>,
    pub reference: Option<Reference>,
}

impl PipelineConfig {
    pub fn new(input: InputSource) -> Self {
        PipelineConfig {
            input,
            format: None,
            cleaning: CleaningConfig::default(),
            sessionizer: SessionizerConfig::default(),
            period: Granularity::Day,
            generalize_depth: None,
            reference: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceStats {
    pub server: String,
    pub path: String,
    pub skew_seconds: i64,
    pub format: String,
    pub report: ParseReport,
}

/// Parsed inputs, before merging.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub sources: Vec<LogSource>,
    pub stats: Vec<SourceStats>,
}

pub fn load(config: &PipelineConfig) -> Result<Loaded> {
    match &config.input {
        InputSource::Raw(specs) => {
            if specs.is_empty() {
                return Err(Error::Usage("at least one --input is required".into()));
            }
            let loaded = load_sources(specs, config.format)?;
            let stats = specs
                .iter()
                .zip(&loaded)
                .map(|(spec, l)| SourceStats {
                    server: spec.server.clone(),
                    path: spec.path.display().to_string(),
                    skew_seconds: spec.skew_seconds,
                    format: l.format.name().to_string(),
                    report: l.report.clone(),
                })
                .collect();
            Ok(Loaded { sources: loaded.into_iter().map(|l| l.source).collect(), stats })
        }
        InputSource::Intermediate(path) => {
            let data = if path == Path::new("-") {
                let mut buf = Vec::new();
                std::io::Read::read_to_end(&mut std::io::stdin().lock(), &mut buf).map_err(|e| Error::io(path, e))?;
                buf
            } else {
                fs::read(path).map_err(|e| Error::io(path, e))?
            };
            let rows = read_intermediate(&data, path)?;
            let mut by_server: BTreeMap<String, Vec<_>> = BTreeMap::new();
            for (mut entry, _) in rows {
                let list = by_server.entry(entry.server.clone()).or_default();
                entry.line_no = list.len() as u64 + 1;
                list.push(entry);
            }
            let stats = by_server
                .iter()
                .map(|(server, entries)| SourceStats {
                    server: server.clone(),
                    path: path.display().to_string(),
                    skew_seconds: 0,
                    format: "intermediate".into(),
                    report: ParseReport {
                        total_lines: entries.len() as u64,
                        parsed: entries.len() as u64,
                        ..Default::default()
                    },
                })
                .collect();
            let sources = by_server.into_iter().map(|(server, entries)| LogSource::new(server, entries)).collect();
            Ok(Loaded { sources, stats })
        }
    }
}

/// Drops useless requests, then renames clients when anonymization is on.
pub fn clean_stage(log: JointLog, config: &CleaningConfig) -> (JointLog, CleaningReport) {
    let (log, report) = clean(log, config);
    (anonymize(log, config.anonymize), report)
}

pub struct Sessionized {
    pub users: UserTable,
    pub log: AnnotatedLog,
    pub sessions: SessionSet,
}

pub fn sessionize_stage(log: JointLog, config: &SessionizerConfig) -> Sessionized {
    let (users, log) = assign_users(log);
    let sessions = session_gen(&log, config);
    Sessionized { users, log, sessions }
}

pub struct Summary {
    pub session_aggregates: Vec<SessionAggregate>,
    pub period_aggregates: Vec<PeriodAggregate>,
    pub server_shares: Vec<ServerShare>,
}

pub fn summarize_stage(s: &Sessionized, period: Granularity) -> Summary {
    Summary {
        session_aggregates: session_aggregates(&s.sessions),
        period_aggregates: period_aggregates(&s.log, &s.sessions, period),
        server_shares: server_shares(&s.log.log),
    }
}

fn method_echo(filter: &MethodFilter) -> String {
    match filter {
        MethodFilter::DropAllExcept(keep) => format!("drop all except {}", keep.iter().cloned().collect::<Vec<_>>().join(",")),
        MethodFilter::Drop(drop) if drop.is_empty() => "keep all".into(),
        MethodFilter::Drop(drop) => format!("drop {}", drop.iter().cloned().collect::<Vec<_>>().join(",")),
    }
}

pub fn config_echo(config: &PipelineConfig, stats: &[SourceStats]) -> ConfigEcho {
    ConfigEcho {
        inputs: stats
            .iter()
            .map(|s| InputEcho { server: s.server.clone(), path: s.path.clone(), skew_seconds: s.skew_seconds, format: s.format.clone() })
            .collect(),
        drop_extensions: config.cleaning.drop_extensions.iter().cloned().collect(),
        drop_methods: method_echo(&config.cleaning.drop_methods),
        keep_status: config.cleaning.keep_status.iter().map(|(lo, hi)| format!("{lo}-{hi}")).collect(),
        robot_agent_keywords: config.cleaning.robot_agent_keywords.iter().cloned().collect(),
        robots_txt_rule: config.cleaning.robots_txt_rule,
        anonymize: config.cleaning.anonymize == wumprep_core::AnonymizeMode::Hash,
        timeout_seconds: config.sessionizer.timeout_seconds,
        referrer_rule: config.sessionizer.referrer_rule,
        period: config.period.name().to_string(),
        generalize_depth: config.generalize_depth.map_or(0, NonZeroUsize::get),
    }
}

pub struct RunOutput {
    pub bundle: ExportBundle,
    pub report: RunReport,
}

/// Runs every stage in order and builds the export bundle and report.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput> {
    if config.sessionizer.timeout_seconds == 0 {
        return Err(Error::Usage("--timeout-seconds must be positive".into()));
    }
    let loaded = load(config)?;
    let echo = config_echo(config, &loaded.stats);
    let lines_read = loaded.stats.iter().map(|s| s.report.total_lines).sum();
    let lines_rejected = loaded.stats.iter().map(|s| s.report.rejected).sum();

    let merged = merge(loaded.sources)?;
    let website = merged.servers().into_iter().collect::<Vec<_>>().join("+");
    let (first, last) = (merged.entries.first().map(|e| e.time), merged.entries.last().map(|e| e.time));

    let (cleaned, cleaning) = clean_stage(merged, &config.cleaning);
    let mut s = sessionize_stage(cleaned, &config.sessionizer);
    let summary = summarize_stage(&s, config.period);

    if let Some(depth) = config.generalize_depth {
        for e in &mut s.log.log.entries {
            e.url = generalize_url(&e.url, depth);
        }
    }

    let bundle = ExportBundle::build(&Model {
        log: &s.log,
        users: &s.users,
        sessions: &s.sessions,
        session_aggregates: &summary.session_aggregates,
        period_aggregates: &summary.period_aggregates,
        server_shares: &summary.server_shares,
    });
    bundle.check_integrity()?;

    let counts = RunCounts {
        website,
        first,
        last,
        lines_read,
        lines_rejected,
        sessions: s.sessions.visits.len() as u64,
        users: s.users.len() as u64,
    };
    let report = render_report(&cleaning, &counts, echo, config.reference);
    Ok(RunOutput { bundle, report })
}

/// Writes the seven tables and `report.json`.
pub fn write_run(output: &RunOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = export_tables(&output.bundle, out_dir)?;
    let report_path = out_dir.join("report.json");
    fs::write(&report_path, output.report.to_json()).map_err(|e| Error::io(&report_path, e))?;
    paths.push(report_path);
    Ok(paths)
}
