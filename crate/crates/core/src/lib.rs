//! Web access log preprocessing: parse CLF/ECLF/combined lines, merge logs
//! from several servers, clean out resource and robot requests, identify
//! users, reconstruct visits and compute aggregate statistics.
//!
//! The crate is `no_std` and only needs `alloc`; reading files, exporting
//! tables and the command line live in the `wumprep` crate.

#![no_std]

extern crate alloc;

pub mod cleaner;
pub mod identity;
pub mod merger;
pub mod parser;
pub mod sessionizer;
pub mod summarizer;
pub mod time;

pub use cleaner::{anonymize, clean, detect_robots, is_irrelevant_resource, AnonymizeMode, CleaningConfig, CleaningReport, ClientKey, MethodFilter};
pub use identity::{assign_users, user_key, AnnotatedLog, UserId, UserKey, UserRecord, UserTable};
pub use merger::{apply_skew, merge, JointLog, LogSource, MergeError};
pub use parser::{
    canonical_len, canonicalize, canonicalize_lossy, detect_format, parse_line, FormatTooNarrow, LogEntry, LogFormat, MalformedReason,
    NoParseableLines, ParseError, ParseReport,
};
pub use sessionizer::{distance, referrer_path, session_gen, PageHit, ReferrerNotFound, SessionSet, SessionizerConfig, Visit};
pub use summarizer::{generalize_url, period_aggregates, server_shares, session_aggregates, Granularity, PeriodAggregate, ServerShare, SessionAggregate};
pub use time::Timestamp;
