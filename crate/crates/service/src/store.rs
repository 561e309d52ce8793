//! In-memory dataset sessions keyed by unguessable ids, evicted when idle.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use curfit_core::{DataSplit, Dataset, RankedModels, ResultDocument};
use rand::Rng;
use tokio::sync::Mutex;

/// Everything produced by the most recent training run on a dataset, swapped in
/// as one unit so readers never see a document from one run and models from another.
#[derive(Debug)]
pub struct TrainedResult {
    pub document: ResultDocument,
    pub split: DataSplit,
    pub ranked: RankedModels,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub name: String,
    pub dataset: Arc<Dataset>,
    pub result: Option<Arc<TrainedResult>>,
    /// Held for the duration of a training run so runs on one dataset queue up.
    pub train_lock: Arc<Mutex<()>>,
}

#[derive(Debug)]
struct Slot {
    session: Session,
    last_used: Instant,
}

#[derive(Debug)]
pub struct SessionStore {
    slots: RwLock<HashMap<String, Slot>>,
    ttl: Duration,
}

/// 128 random bits, lower-case hex.
fn fresh_id() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            slots: RwLock::new(HashMap::new()),
            ttl,
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Stores a freshly parsed dataset and returns its id.
    pub fn insert(&self, name: String, dataset: Dataset) -> String {
        let mut slots = self.slots.write().expect("session store poisoned");
        let now = Instant::now();
        slots.retain(|_, slot| now.duration_since(slot.last_used) < self.ttl);
        let id = loop {
            let id = fresh_id();
            if !slots.contains_key(&id) {
                break id;
            }
        };
        slots.insert(
            id.clone(),
            Slot {
                session: Session {
                    name,
                    dataset: Arc::new(dataset),
                    result: None,
                    train_lock: Arc::new(Mutex::new(())),
                },
                last_used: now,
            },
        );
        id
    }

    /// Looks a session up and refreshes its idle timer; expired sessions are gone.
    pub fn get(&self, id: &str) -> Option<Session> {
        let mut slots = self.slots.write().expect("session store poisoned");
        let now = Instant::now();
        let slot = slots.get_mut(id)?;
        if now.duration_since(slot.last_used) >= self.ttl {
            slots.remove(id);
            return None;
        }
        slot.last_used = now;
        Some(slot.session.clone())
    }

    /// Replaces the stored result; returns false if the session has since expired.
    pub fn set_result(&self, id: &str, result: Arc<TrainedResult>) -> bool {
        let mut slots = self.slots.write().expect("session store poisoned");
        match slots.get_mut(id) {
            Some(slot) => {
                slot.session.result = Some(result);
                slot.last_used = Instant::now();
                true
            }
            None => false,
        }
    }

    /// Drops every session idle for longer than the TTL; returns how many went.
    pub fn evict_expired(&self) -> usize {
        let mut slots = self.slots.write().expect("session store poisoned");
        let now = Instant::now();
        let before = slots.len();
        slots.retain(|_, slot| now.duration_since(slot.last_used) < self.ttl);
        before - slots.len()
    }

    pub fn len(&self) -> usize {
        self.slots.read().expect("session store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
