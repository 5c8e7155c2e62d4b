//! CLF / ECLF / combined access-log lines.
//!
//! A line is `host ident login [date] "method url protocol" status bytes`,
//! optionally followed by a quoted referrer (ECLF) and a quoted user agent
//! (combined). A lone `-` in any optional field means the value is absent.

use alloc::string::String;
use core::fmt::{self, Write};

use crate::time::{TimeError, Timestamp};

/// Which trailing fields a log line carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogFormat {
    /// No referrer, no agent.
    Clf,
    /// Adds the referrer.
    Eclf,
    /// Adds the referrer and the user agent.
    Combined,
}

impl LogFormat {
    pub const ALL: [LogFormat; 3] = [LogFormat::Clf, LogFormat::Eclf, LogFormat::Combined];

    pub fn has_referrer(self) -> bool {
        self >= LogFormat::Eclf
    }

    pub fn has_agent(self) -> bool {
        self == LogFormat::Combined
    }

    /// The narrowest format that holds every populated field of `entry`.
    pub fn minimal_for(entry: &LogEntry) -> LogFormat {
        if entry.agent.is_some() {
            LogFormat::Combined
        } else if entry.referrer.is_some() {
            LogFormat::Eclf
        } else {
            LogFormat::Clf
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogFormat::Clf => "clf",
            LogFormat::Eclf => "eclf",
            LogFormat::Combined => "combined",
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for LogFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "clf" | "common" => Ok(LogFormat::Clf),
            "eclf" | "extended" => Ok(LogFormat::Eclf),
            "combined" => Ok(LogFormat::Combined),
            _ => Err(UnknownFormat),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownFormat;

impl fmt::Display for UnknownFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of clf, eclf, combined")
    }
}

impl core::error::Error for UnknownFormat {}

/// One access-log record.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogEntry {
    /// Web server name, assigned when the entry is merged into a joint log.
    pub server: String,
    pub ip: String,
    pub ident: Option<String>,
    /// Authenticated user, the third field of the line.
    pub login: Option<String>,
    pub time: Timestamp,
    pub method: String,
    pub url: String,
    pub protocol: String,
    pub status: u16,
    pub bytes: Option<u64>,
    pub referrer: Option<String>,
    pub agent: Option<String>,
    /// 1-based position in the source file.
    pub line_no: u64,
}

/// Why a line was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MalformedReason {
    Empty,
    MissingField(&'static str),
    UnbracketedDate,
    Date(TimeError),
    UnterminatedQuote(&'static str),
    Request,
    Url,
    Status,
    Bytes,
    TrailingData,
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MalformedReason::Empty => f.write_str("empty line"),
            MalformedReason::MissingField(name) => write!(f, "missing {name} field"),
            MalformedReason::UnbracketedDate => f.write_str("date is not enclosed in brackets"),
            MalformedReason::Date(e) => write!(f, "bad date: {e}"),
            MalformedReason::UnterminatedQuote(name) => write!(f, "unterminated quoted {name}"),
            MalformedReason::Request => f.write_str("request is not `method url protocol`"),
            MalformedReason::Url => f.write_str("url is neither a path nor an absolute URL"),
            MalformedReason::Status => f.write_str("status is not a number in 100-599"),
            MalformedReason::Bytes => f.write_str("byte count is neither a number nor `-`"),
            MalformedReason::TrailingData => f.write_str("unexpected fields after the last one of the format"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    MalformedLine(MalformedReason),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::MalformedLine(r) => write!(f, "malformed line: {r}"),
        }
    }
}

impl core::error::Error for ParseError {}

impl From<MalformedReason> for ParseError {
    fn from(r: MalformedReason) -> Self {
        ParseError::MalformedLine(r)
    }
}

/// Format detection found nothing to go on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoParseableLines;

impl fmt::Display for NoParseableLines {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no sample line matches CLF, ECLF or combined layout")
    }
}

impl core::error::Error for NoParseableLines {}

/// The entry carries fields the requested format cannot hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatTooNarrow {
    pub format: LogFormat,
    pub needed: LogFormat,
}

impl fmt::Display for FormatTooNarrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "entry needs {} but format is {}", self.needed, self.format)
    }
}

impl core::error::Error for FormatTooNarrow {}

/// Per-stream parse accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub total_lines: u64,
    pub parsed: u64,
    pub rejected: u64,
    pub rejects: alloc::vec::Vec<(u64, MalformedReason)>,
}

impl ParseReport {
    pub fn record(&mut self, line_no: u64, outcome: Result<(), MalformedReason>) {
        self.total_lines += 1;
        match outcome {
            Ok(()) => self.parsed += 1,
            Err(reason) => {
                self.rejected += 1;
                self.rejects.push((line_no, reason));
            }
        }
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

fn is_blank(b: u8) -> bool {
    b == b' ' || b == b'\t'
}

impl<'a> Cursor<'a> {
    fn skip_blanks(&mut self) {
        let b = self.text.as_bytes();
        while self.pos < b.len() && is_blank(b[self.pos]) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_blanks();
        self.pos >= self.text.len()
    }

    fn token(&mut self, name: &'static str) -> Result<&'a str, MalformedReason> {
        self.skip_blanks();
        let b = self.text.as_bytes();
        let start = self.pos;
        while self.pos < b.len() && !is_blank(b[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(MalformedReason::MissingField(name));
        }
        Ok(&self.text[start..self.pos])
    }

    fn bracketed(&mut self) -> Result<&'a str, MalformedReason> {
        self.skip_blanks();
        let b = self.text.as_bytes();
        if self.pos >= b.len() {
            return Err(MalformedReason::MissingField("date"));
        }
        if b[self.pos] != b'[' {
            return Err(MalformedReason::UnbracketedDate);
        }
        let start = self.pos + 1;
        let end = self.text[start..]
            .find(']')
            .map(|i| start + i)
            .ok_or(MalformedReason::UnbracketedDate)?;
        self.pos = end + 1;
        Ok(&self.text[start..end])
    }

    /// Reads a double-quoted field, undoing `\"` and `\\` escapes.
    fn quoted(&mut self, name: &'static str) -> Result<String, MalformedReason> {
        self.skip_blanks();
        let b = self.text.as_bytes();
        if self.pos >= b.len() {
            return Err(MalformedReason::MissingField(name));
        }
        if b[self.pos] != b'"' {
            return Err(MalformedReason::UnterminatedQuote(name));
        }
        let mut out = String::new();
        let mut i = self.pos + 1;
        let mut run = i;
        loop {
            match b.get(i) {
                None => return Err(MalformedReason::UnterminatedQuote(name)),
                Some(b'"') => {
                    out.push_str(&self.text[run..i]);
                    i += 1;
                    break;
                }
                Some(b'\\') if matches!(b.get(i + 1), Some(b'"') | Some(b'\\')) => {
                    out.push_str(&self.text[run..i]);
                    run = i + 1;
                    i += 2;
                }
                Some(_) => i += 1,
            }
        }
        if i < b.len() && !is_blank(b[i]) {
            return Err(MalformedReason::UnterminatedQuote(name));
        }
        self.pos = i;
        Ok(out)
    }
}

fn optional(token: &str) -> Option<String> {
    (token != "-").then(|| String::from(token))
}

fn optional_owned(value: String) -> Option<String> {
    (value != "-").then_some(value)
}

fn is_valid_url(url: &str) -> bool {
    url.starts_with('/') || url.contains("://")
}

/// Parses one raw line. Trailing `\r`/`\n` are ignored.
pub fn parse_line(line: &str, format: LogFormat) -> Result<LogEntry, ParseError> {
    let line = line.trim_end_matches(['\n', '\r']);
    let mut cur = Cursor { text: line, pos: 0 };
    if cur.at_end() {
        return Err(MalformedReason::Empty.into());
    }
    let ip = cur.token("host")?;
    let ident = cur.token("ident")?;
    let login = cur.token("login")?;
    let date = cur.bracketed()?;
    let time = Timestamp::parse_clf(date).map_err(MalformedReason::Date)?;

    let request = cur.quoted("request")?;
    let mut parts = request.split_ascii_whitespace();
    let (method, url, protocol) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(m), Some(u), Some(p), None) => (m, u, p),
        _ => return Err(MalformedReason::Request.into()),
    };
    if !is_valid_url(url) {
        return Err(MalformedReason::Url.into());
    }

    let status = cur.token("status")?;
    let status: u16 = match status.parse() {
        Ok(s) if (100..=599).contains(&s) && status.len() == 3 => s,
        _ => return Err(MalformedReason::Status.into()),
    };
    let bytes = match cur.token("bytes")? {
        "-" => None,
        b if b.bytes().all(|c| c.is_ascii_digit()) => Some(b.parse().map_err(|_| MalformedReason::Bytes)?),
        _ => return Err(MalformedReason::Bytes.into()),
    };

    let referrer = if format.has_referrer() {
        optional_owned(cur.quoted("referrer")?)
    } else {
        None
    };
    let agent = if format.has_agent() {
        optional_owned(cur.quoted("agent")?)
    } else {
        None
    };
    if !cur.at_end() {
        return Err(MalformedReason::TrailingData.into());
    }

    Ok(LogEntry {
        server: String::new(),
        ip: String::from(ip),
        ident: optional(ident),
        login: optional(login),
        time,
        method: String::from(method),
        url: String::from(url),
        protocol: String::from(protocol),
        status,
        bytes,
        referrer,
        agent,
        line_no: 0,
    })
}

/// Picks the richest format that at least 90% of the parseable sample lines
/// satisfy, falling back to the best-supported format.
pub fn detect_format<'a, I>(sample: I) -> Result<LogFormat, NoParseableLines>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut hits = [0usize; 3];
    let mut parseable = 0usize;
    for line in sample {
        let mut any = false;
        for (slot, format) in LogFormat::ALL.iter().enumerate() {
            if parse_line(line, *format).is_ok() {
                hits[slot] += 1;
                any = true;
            }
        }
        parseable += usize::from(any);
    }
    if parseable == 0 {
        return Err(NoParseableLines);
    }
    for slot in (0..3).rev() {
        if hits[slot] * 10 >= parseable * 9 {
            return Ok(LogFormat::ALL[slot]);
        }
    }
    // Nothing reaches the threshold; take the most common, richer wins ties.
    let best = (0..3).rev().max_by_key(|&s| (hits[s], s)).unwrap_or(0);
    Ok(LogFormat::ALL[best])
}

fn write_escaped<W: Write>(out: &mut W, value: &str) -> fmt::Result {
    let mut run = 0;
    for (i, c) in value.char_indices() {
        if c == '"' || c == '\\' {
            out.write_str(&value[run..i])?;
            out.write_char('\\')?;
            run = i;
        }
    }
    out.write_str(&value[run..])
}

fn write_quoted<W: Write>(out: &mut W, value: Option<&str>) -> fmt::Result {
    let Some(value) = value else {
        return out.write_str("\"-\"");
    };
    out.write_char('"')?;
    write_escaped(out, value)?;
    out.write_char('"')
}

/// Writes the canonical line for `entry` without checking that `format` can
/// hold it; fields the format lacks are silently omitted.
pub fn write_canonical<W: Write>(out: &mut W, entry: &LogEntry, format: LogFormat) -> fmt::Result {
    write!(
        out,
        "{} {} {} [{}] \"",
        entry.ip,
        entry.ident.as_deref().unwrap_or("-"),
        entry.login.as_deref().unwrap_or("-"),
        entry.time.clf(),
    )?;
    write_escaped(out, &entry.method)?;
    out.write_char(' ')?;
    write_escaped(out, &entry.url)?;
    out.write_char(' ')?;
    write_escaped(out, &entry.protocol)?;
    write!(out, "\" {} ", entry.status)?;
    match entry.bytes {
        Some(b) => write!(out, "{b}")?,
        None => out.write_char('-')?,
    }
    if format.has_referrer() {
        out.write_char(' ')?;
        write_quoted(out, entry.referrer.as_deref())?;
    }
    if format.has_agent() {
        out.write_char(' ')?;
        write_quoted(out, entry.agent.as_deref())?;
    }
    Ok(())
}

/// Renders `entry` as a single log line in `format`.
pub fn canonicalize(entry: &LogEntry, format: LogFormat) -> Result<String, FormatTooNarrow> {
    let needed = LogFormat::minimal_for(entry);
    if needed > format {
        return Err(FormatTooNarrow { format, needed });
    }
    Ok(canonicalize_lossy(entry, format))
}

/// Like [`canonicalize`] but drops referrer/agent the format cannot carry.
pub fn canonicalize_lossy(entry: &LogEntry, format: LogFormat) -> String {
    let mut out = String::with_capacity(128);
    let _ = write_canonical(&mut out, entry, format);
    out
}

struct Counter(usize);

impl Write for Counter {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0 += s.len();
        Ok(())
    }
}

/// Byte length of the canonical line in the entry's minimal format,
/// including the line terminator.
pub fn canonical_len(entry: &LogEntry) -> u64 {
    let mut c = Counter(0);
    let _ = write_canonical(&mut c, entry, LogFormat::minimal_for(entry));
    c.0 as u64 + 1
}
