//! Command line front end.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wumprep_core::{merge, AnonymizeMode, CleaningConfig, Granularity, JointLog, LogFormat, MethodFilter, SessionizerConfig, UserId};

use crate::error::{Error, Result};
use crate::export::{export_summary_tables, ExportBundle, Model, TABLE_FILES};
use crate::input::InputSpec;
use crate::intermediate::write_intermediate;
use crate::pipeline::{self, clean_stage, load, run_pipeline, sessionize_stage, summarize_stage, InputSource, PipelineConfig};
use crate::report::{format_percent, Reference};

#[derive(Debug, Parser)]
#[command(name = "wumprep", version, about = "Preprocess web server access logs into sessionized relational tables")]
pub struct Cli {
    /// Suppress the report and stage summaries.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse raw logs and write them in the intermediate format.
    Parse(StageArgs),
    /// Parse and merge into one time-ordered log.
    Merge(StageArgs),
    /// Merge, then drop resources, robots, other methods and failed requests.
    Clean(CleanStageArgs),
    /// Clean, then assign users and reconstruct visits.
    Sessionize(SessionStageArgs),
    /// Sessionize, then write the aggregate tables.
    Summarize(SummarizeArgs),
    /// Run every stage and export all tables and the report.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Clf,
    Eclf,
    Combined,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum AnonymizeArg {
    Off,
    Hash,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PeriodArg {
    Hour,
    Day,
    Week,
    Month,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReferenceArg {
    NasaAug95,
    NasaJul95,
    AcademicMay01,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// A server log, `server_name=path[:skew_seconds]`; `-` as the path reads stdin.
    #[arg(long = "input", short = 'i', value_name = "SERVER=PATH[:SKEW]", conflicts_with = "from")]
    pub inputs: Vec<InputSpec>,
    /// Read a file written by an earlier stage instead of raw logs.
    #[arg(long, value_name = "FILE")]
    pub from: Option<PathBuf>,
    /// Log layout of the raw inputs.
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// Extension to drop (repeatable, comma separated); replaces the default list.
    #[arg(long = "drop-ext", value_delimiter = ',', value_name = "EXT")]
    pub drop_ext: Vec<String>,
    /// Drop no extension at all.
    #[arg(long, conflicts_with = "drop_ext")]
    pub keep_all_extensions: bool,
    /// Request method to keep (repeatable); all others are dropped. Default GET and POST.
    #[arg(long = "keep-method", value_delimiter = ',', value_name = "METHOD")]
    pub keep_method: Vec<String>,
    /// Inclusive status range to keep, `lo-hi` (repeatable). Default 200-399.
    #[arg(long = "keep-status", value_name = "LO-HI", value_parser = parse_status_range)]
    pub keep_status: Vec<(u16, u16)>,
    /// User-agent substring marking a robot (repeatable); replaces the default list.
    #[arg(long = "robot-keyword", value_delimiter = ',', value_name = "WORD")]
    pub robot_keyword: Vec<String>,
    /// Do not flag clients for fetching /robots.txt.
    #[arg(long)]
    pub no_robots_txt_rule: bool,
    /// Replace client addresses with opaque tokens.
    #[arg(long, value_enum, num_args = 0..=1, default_value = "off", default_missing_value = "hash")]
    pub anonymize: AnonymizeArg,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// Maximum gap between two requests of one visit.
    #[arg(long, default_value_t = wumprep_core::sessionizer::DEFAULT_TIMEOUT_SECONDS)]
    pub timeout_seconds: u32,
    /// Require a request's referrer to be a page already in one of the user's visits.
    #[arg(long, value_enum, default_value = "on")]
    pub referrer_rule: Switch,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Calendar period for the period aggregates (UTC).
    #[arg(long, value_enum, default_value = "day")]
    pub period: PeriodArg,
    /// Truncate exported request URLs to N path segments; 0 keeps them.
    #[arg(long, default_value_t = 0)]
    pub generalize_depth: usize,
}

#[derive(Debug, Args)]
pub struct CleanStageArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    #[command(flatten)]
    pub clean: CleanArgs,
}

#[derive(Debug, Args)]
pub struct SessionStageArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    #[command(flatten)]
    pub clean: CleanArgs,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub clean: CleanArgs,
    #[command(flatten)]
    pub session: SessionArgs,
    #[command(flatten)]
    pub summary: SummaryArgs,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub clean: CleanArgs,
    #[command(flatten)]
    pub session: SessionArgs,
    #[command(flatten)]
    pub summary: SummaryArgs,
    /// Print published reference figures next to the measured ones.
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    /// Output directory for the tables and report.json.
    #[arg(long, short)]
    pub out: PathBuf,
}

fn parse_status_range(s: &str) -> std::result::Result<(u16, u16), String> {
    let (lo, hi) = s.split_once('-').ok_or_else(|| format!("expected lo-hi, got {s:?}"))?;
    let lo: u16 = lo.trim().parse().map_err(|_| format!("bad status {lo:?}"))?;
    let hi: u16 = hi.trim().parse().map_err(|_| format!("bad status {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

impl InputArgs {
    fn source(&self) -> Result<InputSource> {
        match &self.from {
            Some(path) => Ok(InputSource::Intermediate(path.clone())),
            None if self.inputs.is_empty() => Err(Error::Usage("give at least one --input or a --from file".into())),
            None => Ok(InputSource::Raw(self.inputs.clone())),
        }
    }

    fn format(&self) -> Option<LogFormat> {
        match self.format {
            FormatArg::Auto => None,
            FormatArg::Clf => Some(LogFormat::Clf),
            FormatArg::Eclf => Some(LogFormat::Eclf),
            FormatArg::Combined => Some(LogFormat::Combined),
        }
    }

    fn config(&self) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::new(self.source()?);
        c.format = self.format();
        Ok(c)
    }
}

impl CleanArgs {
    fn apply(&self, c: &mut CleaningConfig) {
        if self.keep_all_extensions {
            c.drop_extensions.clear();
        } else if !self.drop_ext.is_empty() {
            c.drop_extensions =
                self.drop_ext.iter().map(|e| e.trim().trim_start_matches('.').to_ascii_lowercase()).filter(|e| !e.is_empty()).collect();
        }
        if !self.keep_method.is_empty() {
            c.drop_methods = MethodFilter::DropAllExcept(self.keep_method.iter().map(|m| m.trim().to_string()).collect());
        }
        if !self.keep_status.is_empty() {
            c.keep_status = self.keep_status.clone();
        }
        if !self.robot_keyword.is_empty() {
            c.robot_agent_keywords =
                self.robot_keyword.iter().map(|k| k.trim().to_ascii_lowercase()).filter(|k| !k.is_empty()).collect::<BTreeSet<_>>();
        }
        c.robots_txt_rule = !self.no_robots_txt_rule;
        c.anonymize = match self.anonymize {
            AnonymizeArg::Off => AnonymizeMode::Off,
            AnonymizeArg::Hash => AnonymizeMode::Hash,
        };
    }
}

impl SessionArgs {
    fn config(&self) -> Result<SessionizerConfig> {
        if self.timeout_seconds == 0 {
            return Err(Error::Usage("--timeout-seconds must be positive".into()));
        }
        Ok(SessionizerConfig { timeout_seconds: self.timeout_seconds, referrer_rule: self.referrer_rule == Switch::On })
    }
}

impl SummaryArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        c.period = match self.period {
            PeriodArg::Hour => Granularity::Hour,
            PeriodArg::Day => Granularity::Day,
            PeriodArg::Week => Granularity::Week,
            PeriodArg::Month => Granularity::Month,
        };
        c.generalize_depth = NonZeroUsize::new(self.generalize_depth);
    }
}

fn write_stage_output(out: Option<&Path>, log: &JointLog, user_ids: Option<&[UserId]>) -> Result<()> {
    match out {
        Some(path) if path != Path::new("-") => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = io::BufWriter::new(file);
            write_intermediate(&mut w, &log.entries, user_ids).map_err(|e| Error::io(path, e))?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        _ => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            write_intermediate(&mut w, &log.entries, user_ids).map_err(|e| Error::io("<stdout>", e))?;
            w.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn note(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn parse_notes(quiet: bool, loaded: &pipeline::Loaded) {
    for s in &loaded.stats {
        note(
            quiet,
            format!(
                "{}: {} lines, {} parsed, {} rejected ({})",
                s.server, s.report.total_lines, s.report.parsed, s.report.rejected, s.format
            ),
        );
    }
}

fn merged(config: &PipelineConfig, quiet: bool) -> Result<JointLog> {
    let loaded = load(config)?;
    parse_notes(quiet, &loaded);
    Ok(merge(loaded.sources)?)
}

fn cleaned(config: &PipelineConfig, quiet: bool) -> Result<JointLog> {
    let (log, report) = clean_stage(merged(config, quiet)?, &config.cleaning);
    note(
        quiet,
        format!(
            "kept {} of {} requests; {} -> {} bytes, reduction {}",
            report.kept_count,
            report.input_count,
            report.input_bytes,
            report.kept_bytes,
            format_percent(report.reduction_percent())
        ),
    );
    Ok(log)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let quiet = cli.quiet;
    match &cli.command {
        Command::Parse(a) => {
            let config = a.input.config()?;
            let loaded = load(&config)?;
            parse_notes(quiet, &loaded);
            let entries = loaded
                .sources
                .into_iter()
                .flat_map(|s| {
                    let name = s.server_name;
                    s.entries.into_iter().map(move |mut e| {
                        e.server.clone_from(&name);
                        e
                    })
                })
                .collect();
            write_stage_output(a.out.as_deref(), &JointLog { entries, source_count: 0 }, None)
        }
        Command::Merge(a) => {
            let config = a.input.config()?;
            write_stage_output(a.out.as_deref(), &merged(&config, quiet)?, None)
        }
        Command::Clean(a) => {
            let mut config = a.stage.input.config()?;
            a.clean.apply(&mut config.cleaning);
            write_stage_output(a.stage.out.as_deref(), &cleaned(&config, quiet)?, None)
        }
        Command::Sessionize(a) => {
            let mut config = a.stage.input.config()?;
            a.clean.apply(&mut config.cleaning);
            config.sessionizer = a.session.config()?;
            let s = sessionize_stage(cleaned(&config, quiet)?, &config.sessionizer);
            note(quiet, format!("{} users, {} visits", s.users.len(), s.sessions.visits.len()));
            write_stage_output(a.stage.out.as_deref(), &s.log.log, Some(&s.log.user_ids))
        }
        Command::Summarize(a) => {
            let mut config = a.input.config()?;
            a.clean.apply(&mut config.cleaning);
            config.sessionizer = a.session.config()?;
            a.summary.apply(&mut config);
            let s = sessionize_stage(cleaned(&config, quiet)?, &config.sessionizer);
            let summary = summarize_stage(&s, config.period);
            let bundle = ExportBundle::build(&Model {
                log: &s.log,
                users: &s.users,
                sessions: &s.sessions,
                session_aggregates: &summary.session_aggregates,
                period_aggregates: &summary.period_aggregates,
                server_shares: &summary.server_shares,
            });
            export_summary_tables(&bundle, &a.out)?;
            note(quiet, format!("wrote {}, {}, {}", TABLE_FILES[4], TABLE_FILES[5], TABLE_FILES[6]));
            Ok(())
        }
        Command::Run(a) => {
            let mut config = a.input.config()?;
            a.clean.apply(&mut config.cleaning);
            config.sessionizer = a.session.config()?;
            a.summary.apply(&mut config);
            config.reference = a.reference.map(|r| match r {
                ReferenceArg::NasaAug95 => Reference::NasaAug95,
                ReferenceArg::NasaJul95 => Reference::NasaJul95,
                ReferenceArg::AcademicMay01 => Reference::AcademicMay01,
            });
            let output = run_pipeline(&config)?;
            pipeline::write_run(&output, &a.out)?;
            if !quiet {
                print!("{}", output.report.to_text());
            }
            Ok(())
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wumprep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
