//! Reading raw log files into parsed entries.

use std::borrow::Cow;
use std::fs;
use std::io::{self, BufRead, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::thread;

use wumprep_core::{detect_format, parse_line, LogEntry, LogFormat, LogSource, ParseReport};

use crate::error::{Error, Result};

/// Lines inspected when the format is detected automatically.
pub const DETECT_SAMPLE_LINES: usize = 1000;

/// One `--input server=path[:skew_seconds]` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSpec {
    pub server: String,
    /// `-` reads standard input.
    pub path: PathBuf,
    pub skew_seconds: i64,
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (server, rest) = s
            .split_once('=')
            .ok_or_else(|| format!("expected server=path[:skew_seconds], got {s:?}"))?;
        if server.contains(['\t', '\n', '\r']) {
            return Err(format!("server name {server:?} contains a tab or line break"));
        }
        if server.is_empty() || rest.is_empty() {
            return Err(format!("expected server=path[:skew_seconds], got {s:?}"));
        }
        let (path, skew) = match rest.rsplit_once(':') {
            Some((p, k)) if !p.is_empty() && k.parse::<i64>().is_ok() => (p, k.parse().unwrap_or(0)),
            _ => (rest, 0),
        };
        Ok(InputSpec { server: server.to_string(), path: PathBuf::from(path), skew_seconds: skew })
    }
}

/// A parsed source together with its accounting.
#[derive(Debug, Clone)]
pub struct LoadedSource {
    pub source: LogSource,
    pub format: LogFormat,
    pub report: ParseReport,
}

fn decode(line: &[u8]) -> Cow<'_, str> {
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    String::from_utf8_lossy(line)
}

fn split_lines(data: &[u8]) -> impl Iterator<Item = &[u8]> {
    let body = data.strip_suffix(b"\n").unwrap_or(data);
    let empty = data.is_empty();
    body.split(|&b| b == b'\n').filter(move |_| !empty)
}

/// Parses every line of `source`; malformed lines are recorded, not fatal.
pub fn parse_stream<R: BufRead>(mut source: R, format: LogFormat) -> io::Result<(Vec<LogEntry>, ParseReport)> {
    let mut entries = Vec::new();
    let mut report = ParseReport::default();
    let mut buf = Vec::with_capacity(256);
    let mut line_no = 0u64;
    loop {
        buf.clear();
        if source.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = buf.strip_suffix(b"\n").unwrap_or(&buf);
        record(&mut entries, &mut report, line_no, line, format);
    }
    Ok((entries, report))
}

fn record(entries: &mut Vec<LogEntry>, report: &mut ParseReport, line_no: u64, line: &[u8], format: LogFormat) {
    match parse_line(&decode(line), format) {
        Ok(mut e) => {
            e.line_no = line_no;
            entries.push(e);
            report.record(line_no, Ok(()));
        }
        Err(wumprep_core::ParseError::MalformedLine(reason)) => report.record(line_no, Err(reason)),
    }
}

/// Parses an in-memory log, detecting the format when `format` is `None`.
///
/// An input without any line is CLF by convention; an input whose sample
/// contains no parseable line is an error.
pub fn parse_bytes(data: &[u8], format: Option<LogFormat>, path: &Path) -> Result<(Vec<LogEntry>, ParseReport, LogFormat)> {
    let format = match format {
        Some(f) => f,
        None => {
            let sample: Vec<Cow<'_, str>> = split_lines(data)
                .map(decode)
                .filter(|l| !l.trim().is_empty())
                .take(DETECT_SAMPLE_LINES)
                .collect();
            if sample.is_empty() {
                LogFormat::Clf
            } else {
                detect_format(sample.iter().map(|l| l.as_ref())).map_err(|_| Error::NoParseableInput(path.to_path_buf()))?
            }
        }
    };
    let mut entries = Vec::new();
    let mut report = ParseReport::default();
    for (i, line) in split_lines(data).enumerate() {
        record(&mut entries, &mut report, i as u64 + 1, line, format);
    }
    if report.total_lines > 0 && report.parsed == 0 {
        return Err(Error::NoParseableInput(path.to_path_buf()));
    }
    Ok((entries, report, format))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut data = Vec::new();
        io::stdin().lock().read_to_end(&mut data).map_err(|e| Error::io(path, e))?;
        Ok(data)
    } else {
        fs::read(path).map_err(|e| Error::io(path, e))
    }
}

/// Reads and parses all inputs, one thread per file. Results keep input order.
pub fn load_sources(inputs: &[InputSpec], format: Option<LogFormat>) -> Result<Vec<LoadedSource>> {
    let stdin_uses = inputs.iter().filter(|i| i.path == Path::new("-")).count();
    if stdin_uses > 0 && inputs.len() > 1 {
        return Err(Error::Usage("standard input (`-`) is only accepted as the single input".into()));
    }
    thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|spec| {
                scope.spawn(move || -> Result<LoadedSource> {
                    let data = read_all(&spec.path)?;
                    let (entries, report, format) = parse_bytes(&data, format, &spec.path)?;
                    Ok(LoadedSource {
                        source: LogSource::new(spec.server.clone(), entries).with_skew(spec.skew_seconds),
                        format,
                        report,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("parser thread panicked")).collect()
    })
}
