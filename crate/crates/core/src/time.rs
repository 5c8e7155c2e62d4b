//! Zone-aware access-log timestamps and the UTC calendar arithmetic used by
//! the parser, the merger and the period aggregates.

use core::fmt;

/// Largest accepted zone offset, in minutes (UTC+14:00 / UTC-14:00).
pub const MAX_OFFSET_MINUTES: i32 = 14 * 60;

const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// A request time as logged by the server.
///
/// `utc` is zone-normalized epoch seconds; `offset_minutes` is the zone the
/// server logged in, kept so the entry can be rendered back unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Timestamp {
    pub utc: i64,
    pub offset_minutes: i16,
}

/// Broken-down calendar fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CivilDateTime {
    pub year: i64,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeError {
    Layout,
    Month,
    OutOfRange,
    Offset,
}

impl fmt::Display for TimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeError::Layout => f.write_str("date is not dd/Mon/yyyy:HH:MM:SS +zzzz"),
            TimeError::Month => f.write_str("unknown month name"),
            TimeError::OutOfRange => f.write_str("date field out of range"),
            TimeError::Offset => f.write_str("zone offset out of range"),
        }
    }
}

impl core::error::Error for TimeError {}

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = month as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Inverse of [`days_from_civil`].
pub fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + i64::from(month <= 2);
    (year, month, day)
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 31,
    }
}

impl CivilDateTime {
    pub fn from_epoch(secs: i64) -> Self {
        let days = secs.div_euclid(86_400);
        let rem = secs.rem_euclid(86_400) as u32;
        let (year, month, day) = civil_from_days(days);
        CivilDateTime {
            year,
            month,
            day,
            hour: rem / 3600,
            minute: rem / 60 % 60,
            second: rem % 60,
        }
    }

    pub fn to_epoch(&self) -> i64 {
        days_from_civil(self.year, self.month, self.day) * 86_400
            + i64::from(self.hour * 3600 + self.minute * 60 + self.second)
    }
}

fn digits(bytes: &[u8]) -> Option<u32> {
    if bytes.is_empty() || !bytes.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(bytes.iter().fold(0u32, |acc, b| acc * 10 + u32::from(b - b'0')))
}

impl Timestamp {
    pub fn new(utc: i64, offset_minutes: i16) -> Self {
        Timestamp { utc, offset_minutes }
    }

    /// Parses the bracket contents of a log line, e.g. `18/Jun/2006:12:28:33 +0000`.
    pub fn parse_clf(text: &str) -> Result<Self, TimeError> {
        let b = text.as_bytes();
        if b.len() != 26 || b[2] != b'/' || b[6] != b'/' || b[11] != b':' || b[14] != b':' || b[17] != b':' || b[20] != b' ' {
            return Err(TimeError::Layout);
        }
        let day = digits(&b[0..2]).ok_or(TimeError::Layout)?;
        let month = MONTHS
            .iter()
            .position(|m| m.as_bytes() == &b[3..6])
            .ok_or(TimeError::Month)? as u32
            + 1;
        let year = digits(&b[7..11]).ok_or(TimeError::Layout)? as i64;
        let hour = digits(&b[12..14]).ok_or(TimeError::Layout)?;
        let minute = digits(&b[15..17]).ok_or(TimeError::Layout)?;
        let second = digits(&b[18..20]).ok_or(TimeError::Layout)?;
        let sign = match b[21] {
            b'+' => 1i32,
            b'-' => -1i32,
            _ => return Err(TimeError::Layout),
        };
        let off_h = digits(&b[22..24]).ok_or(TimeError::Layout)? as i32;
        let off_m = digits(&b[24..26]).ok_or(TimeError::Layout)? as i32;

        if day == 0 || day > days_in_month(year, month) || hour > 23 || minute > 59 || second > 60 {
            return Err(TimeError::OutOfRange);
        }
        if off_m > 59 {
            return Err(TimeError::Offset);
        }
        let offset = sign * (off_h * 60 + off_m);
        if offset.abs() > MAX_OFFSET_MINUTES {
            return Err(TimeError::Offset);
        }
        let wall = CivilDateTime { year, month, day, hour, minute, second }.to_epoch();
        Ok(Timestamp {
            utc: wall - i64::from(offset) * 60,
            offset_minutes: offset as i16,
        })
    }

    /// Wall-clock time in the original zone.
    pub fn local(&self) -> CivilDateTime {
        CivilDateTime::from_epoch(self.utc + i64::from(self.offset_minutes) * 60)
    }

    pub fn utc_civil(&self) -> CivilDateTime {
        CivilDateTime::from_epoch(self.utc)
    }

    pub fn with_utc(self, utc: i64) -> Self {
        Timestamp { utc, ..self }
    }

    /// `dd/Mon/yyyy:HH:MM:SS ±zzzz` in the original zone.
    pub fn clf(&self) -> ClfTime {
        ClfTime(*self)
    }

    /// `YYYY-MM-DDTHH:MM:SSZ`.
    pub fn iso8601(&self) -> IsoTime {
        IsoTime(self.utc)
    }

    /// `YYYY-MM-DD HH:MM:SS` in UTC.
    pub fn plain(&self) -> PlainTime {
        PlainTime(self.utc)
    }
}

pub struct ClfTime(Timestamp);
pub struct IsoTime(i64);
pub struct PlainTime(i64);

impl fmt::Display for ClfTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0.local();
        let off = i32::from(self.0.offset_minutes);
        let sign = if off < 0 { '-' } else { '+' };
        write!(
            f,
            "{:02}/{}/{:04}:{:02}:{:02}:{:02} {}{:02}{:02}",
            c.day,
            MONTHS[c.month as usize - 1],
            c.year,
            c.hour,
            c.minute,
            c.second,
            sign,
            off.abs() / 60,
            off.abs() % 60
        )
    }
}

impl fmt::Display for IsoTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = CivilDateTime::from_epoch(self.0);
        write!(
            f,
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
            c.year, c.month, c.day, c.hour, c.minute, c.second
        )
    }
}

impl fmt::Display for PlainTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = CivilDateTime::from_epoch(self.0);
        write!(
            f,
            "{:04}-{:02}-{:02} {:02}:{:02}:{:02}",
            c.year, c.month, c.day, c.hour, c.minute, c.second
        )
    }
}

/// Parses `YYYY-MM-DDTHH:MM:SSZ` or `YYYY-MM-DD HH:MM:SS` (both UTC) into epoch seconds.
pub fn parse_iso8601(text: &str) -> Option<i64> {
    let b = text.as_bytes();
    let body = match b.len() {
        20 if b[10] == b'T' && b[19] == b'Z' => &b[..19],
        19 if b[10] == b' ' => b,
        _ => return None,
    };
    if body[4] != b'-' || body[7] != b'-' || body[13] != b':' || body[16] != b':' {
        return None;
    }
    let year = digits(&body[0..4])? as i64;
    let month = digits(&body[5..7])?;
    let day = digits(&body[8..10])?;
    let hour = digits(&body[11..13])?;
    let minute = digits(&body[14..16])?;
    let second = digits(&body[17..19])?;
    if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) || hour > 23 || minute > 59 || second > 59 {
        return None;
    }
    Some(CivilDateTime { year, month, day, hour, minute, second }.to_epoch())
}
