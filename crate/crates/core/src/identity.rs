//! User identification: the login when the server recorded one, otherwise
//! the client address together with its user agent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::merger::JointLog;
use crate::parser::LogEntry;
use crate::time::Timestamp;

pub type UserId = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UserKey {
    Login(String),
    IpAgent { ip: String, agent: Option<String> },
}

impl UserKey {
    pub fn kind(&self) -> &'static str {
        match self {
            UserKey::Login(_) => "login",
            UserKey::IpAgent { .. } => "ip_agent",
        }
    }
}

pub fn user_key(entry: &LogEntry) -> UserKey {
    match &entry.login {
        Some(login) => UserKey::Login(login.clone()),
        None => UserKey::IpAgent { ip: entry.ip.clone(), agent: entry.agent.clone() },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: UserId,
    pub key: UserKey,
    pub first_seen: Timestamp,
    pub request_count: u64,
}

/// Users in first-appearance order; `users[i].user_id == i + 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserTable {
    pub users: Vec<UserRecord>,
}

impl UserTable {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn get(&self, id: UserId) -> Option<&UserRecord> {
        self.users.get((id as usize).checked_sub(1)?)
    }
}

/// A joint log whose entries carry user ids (`user_ids[i]` belongs to `log.entries[i]`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedLog {
    pub log: JointLog,
    pub user_ids: Vec<UserId>,
}

impl AnnotatedLog {
    pub fn len(&self) -> usize {
        self.log.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &LogEntry)> {
        self.user_ids.iter().copied().zip(&self.log.entries)
    }
}

pub fn assign_users(log: JointLog) -> (UserTable, AnnotatedLog) {
    let mut ids: BTreeMap<UserKey, UserId> = BTreeMap::new();
    let mut table = UserTable::default();
    let mut user_ids = Vec::with_capacity(log.entries.len());
    for e in &log.entries {
        let key = user_key(e);
        let id = match ids.get(&key) {
            Some(&id) => id,
            None => {
                let id = table.users.len() as UserId + 1;
                ids.insert(key.clone(), id);
                table.users.push(UserRecord { user_id: id, key, first_seen: e.time, request_count: 0 });
                id
            }
        };
        let rec = &mut table.users[id as usize - 1];
        rec.request_count += 1;
        if e.time.utc < rec.first_seen.utc {
            rec.first_seen = e.time;
        }
        user_ids.push(id);
    }
    (table, AnnotatedLog { log, user_ids })
}
