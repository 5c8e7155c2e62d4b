//! Stage-to-stage file format: one request per line,
//! `server<TAB>user_id<TAB>combined log line`, with `-` for an unassigned user.

use std::io::{self, Write};
use std::path::Path;

use wumprep_core::parser::write_canonical;
use wumprep_core::{parse_line, LogEntry, LogFormat, UserId};

use crate::error::{Error, Result};

pub fn write_intermediate<W: Write>(out: &mut W, entries: &[LogEntry], user_ids: Option<&[UserId]>) -> io::Result<()> {
    let mut line = String::with_capacity(256);
    for (i, e) in entries.iter().enumerate() {
        line.clear();
        line.push_str(&e.server);
        line.push('\t');
        match user_ids.and_then(|ids| ids.get(i)) {
            Some(id) => line.push_str(&id.to_string()),
            None => line.push('-'),
        }
        line.push('\t');
        // Writing into a String cannot fail.
        let _ = write_canonical(&mut line, e, LogFormat::Combined);
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses an intermediate file. Entries get the server from the first column
/// and their row number as `line_no`.
pub fn read_intermediate(data: &[u8], path: &Path) -> Result<Vec<(LogEntry, Option<UserId>)>> {
    let text = String::from_utf8_lossy(data);
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let bad = |reason: String| Error::Intermediate { path: path.to_path_buf(), line: line_no, reason };
        if line.is_empty() {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let (Some(server), Some(user), Some(raw)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected server<TAB>user_id<TAB>log line".into()));
        };
        let user = match user {
            "-" => None,
            u => Some(u.parse::<UserId>().map_err(|_| bad(format!("bad user id {u:?}")))?),
        };
        let mut entry = parse_line(raw, LogFormat::Combined).map_err(|e| bad(e.to_string()))?;
        entry.server = server.to_string();
        entry.line_no = line_no;
        rows.push((entry, user));
    }
    Ok(rows)
}
