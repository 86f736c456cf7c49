//! Append-only per-user event logs, one NDJSON file per user.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use phn_core::hse::{FitnessTest, UserProfile};
use phn_core::ingest::{parse_stream, serialize_samples, MinuteSample};
use phn_core::trainload::Workout;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {reason}")]
    Corrupt { file: String, line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSetting {
    pub roi: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Profile { profile: UserProfile },
    /// Accepted samples in the canonical CSV form.
    Samples { lines: Vec<String> },
    Test { test: FitnessTest },
    Goal { goal: GoalSetting },
    Workout { workout: Workout },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Everything derived from one user's log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserState {
    pub profile: Option<UserProfile>,
    pub samples: BTreeMap<DateTime<Utc>, MinuteSample>,
    pub tests: Vec<FitnessTest>,
    pub goal: Option<GoalSetting>,
    pub workouts: Vec<Workout>,
    pub last_seq: u64,
    pub last_ts: Option<DateTime<Utc>>,
}

impl UserState {
    pub fn apply(&mut self, e: &Event) {
        match &e.kind {
            EventKind::Profile { profile } => self.profile = Some(profile.clone()),
            EventKind::Samples { lines } => {
                for s in parse_stream(lines).samples {
                    self.samples.insert(s.ts, s);
                }
            }
            EventKind::Test { test } => self.tests.push(test.clone()),
            EventKind::Goal { goal } => self.goal = Some(goal.clone()),
            EventKind::Workout { workout } => self.workouts.push(*workout),
        }
        self.last_seq = e.seq;
        self.last_ts = Some(e.ts);
    }

    pub fn samples(&self) -> Vec<MinuteSample> {
        self.samples.values().cloned().collect()
    }
}

pub fn samples_event(samples: &[MinuteSample]) -> EventKind {
    EventKind::Samples { lines: serialize_samples(samples) }
}

struct Slot {
    /// Serializes writers; readers only take the snapshot lock briefly.
    writer: Mutex<()>,
    snapshot: RwLock<Arc<UserState>>,
}

/// User logs, held in memory and mirrored to `dir` when one is given.
pub struct Store {
    dir: Option<PathBuf>,
    users: RwLock<HashMap<String, Arc<Slot>>>,
}

pub fn valid_user_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl Store {
    pub fn in_memory() -> Self {
        Self { dir: None, users: RwLock::new(HashMap::new()) }
    }

    /// Opens `dir`, replaying every `<user>.ndjson` log in `(ts, seq)` order.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut users = HashMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
            .collect();
        paths.sort();
        for path in paths {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).filter(|s| valid_user_id(s)) else {
                continue;
            };
            let state = replay(&read_log(&path)?);
            users.insert(
                id.to_string(),
                Arc::new(Slot { writer: Mutex::new(()), snapshot: RwLock::new(Arc::new(state)) }),
            );
        }
        Ok(Self { dir: Some(dir), users: RwLock::new(users) })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn slot(&self, id: &str) -> Option<Arc<Slot>> {
        self.users.read().unwrap().get(id).cloned()
    }

    fn slot_or_create(&self, id: &str) -> Arc<Slot> {
        if let Some(s) = self.slot(id) {
            return s;
        }
        let mut users = self.users.write().unwrap();
        users
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(Slot { writer: Mutex::new(()), snapshot: RwLock::new(Arc::default()) }))
            .clone()
    }

    /// Current state of a user, if the user has any events.
    pub fn snapshot(&self, id: &str) -> Option<Arc<UserState>> {
        self.slot(id).map(|s| s.snapshot.read().unwrap().clone()).filter(|s| s.last_seq > 0)
    }

    pub fn user_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.users.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Appends the events `decide` returns, holding the user's write lock.
    /// `decide` sees the state as of the lock and may refuse with an error.
    pub fn write<E, F>(&self, id: &str, decide: F) -> Result<Result<Arc<UserState>, E>, StoreError>
    where
        F: FnOnce(&UserState) -> Result<Vec<EventKind>, E>,
    {
        let slot = self.slot_or_create(id);
        let _guard = slot.writer.lock().unwrap();
        let current = slot.snapshot.read().unwrap().clone();
        let kinds = match decide(&current) {
            Ok(k) => k,
            Err(e) => return Ok(Err(e)),
        };
        let mut next = (*current).clone();
        let mut lines = String::new();
        for kind in kinds {
            let now = Utc::now();
            let ts = next.last_ts.map_or(now, |t| t.max(now));
            let e = Event { seq: next.last_seq + 1, ts, kind };
            lines.push_str(&serde_json::to_string(&e).expect("events serialize"));
            lines.push('\n');
            next.apply(&e);
        }
        if let Some(dir) = &self.dir {
            let mut f = OpenOptions::new().create(true).append(true).open(dir.join(format!("{id}.ndjson")))?;
            f.write_all(lines.as_bytes())?;
            f.sync_data()?;
        }
        let next = Arc::new(next);
        *slot.snapshot.write().unwrap() = next.clone();
        Ok(Ok(next))
    }
}

pub fn read_log(path: &Path) -> Result<Vec<Event>, StoreError> {
    let name = path.display().to_string();
    let mut events = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(&line)
            .map_err(|err| StoreError::Corrupt { file: name.clone(), line: i + 1, reason: err.to_string() })?;
        events.push(e);
    }
    Ok(events)
}

/// Folds events in `(ts, seq)` order.
pub fn replay(events: &[Event]) -> UserState {
    let mut sorted: Vec<&Event> = events.iter().collect();
    sorted.sort_by(|a, b| (a.ts, a.seq).cmp(&(b.ts, b.seq)));
    let mut s = UserState::default();
    for e in sorted {
        s.apply(e);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        assert!(valid_user_id("alice_01-x"));
        assert!(!valid_user_id("../etc"));
        assert!(!valid_user_id(""));
    }

    #[test]
    fn write_then_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let r: Result<_, ()> = store
            .write("u1", |_| Ok(vec![EventKind::Profile { profile: UserProfile::example() }]))
            .unwrap();
        assert_eq!(r.unwrap().last_seq, 1);
        let refused: Result<_, &str> = store.write("u1", |_| Err("no")).unwrap();
        assert!(refused.is_err());
        let again = Store::open(dir.path()).unwrap();
        assert_eq!(again.snapshot("u1"), store.snapshot("u1"));
        assert!(again.snapshot("nobody").is_none());
    }

    #[test]
    fn replay_orders_by_ts_then_seq() {
        let t = Utc::now();
        let g = |roi: &str| EventKind::Goal { goal: GoalSetting { roi: roi.into(), k: 1 } };
        let events = vec![
            Event { seq: 2, ts: t, kind: g("b") },
            Event { seq: 1, ts: t, kind: g("a") },
        ];
        assert_eq!(replay(&events).goal.unwrap().roi, "b");
    }
}
