use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Final marked-edge energy of one ball at one `(T, α, schedule)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub ball_id: String,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub schedule_id: String,
    pub energy: f64,
    pub method: String,
    pub tol: f64,
    pub steps: usize,
    pub wall_time: f64,
}

/// `(ball_id, T bits, α bits, schedule_id)`
pub type CacheKey = (String, u64, u64, String);

pub fn cache_key(ball_id: &str, t: f64, alpha: f64, schedule_id: &str) -> CacheKey {
    (ball_id.to_string(), t.to_bits(), alpha.to_bits(), schedule_id.to_string())
}

struct Inner {
    records: HashMap<CacheKey, EnergyRecord>,
    file: Option<File>,
}

/// Append-only energy store, optionally backed by a CSV file. Appends are
/// serialised through a mutex so worker threads can share one cache.
pub struct EnergyCache {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

const HEADER: &str = "ball_id,T,alpha,schedule_id,energy,method,tol,steps,wall_time";

impl EnergyCache {
    pub fn in_memory() -> Self {
        Self { path: None, inner: Mutex::new(Inner { records: HashMap::new(), file: None }) }
    }

    /// Opens (or creates) a CSV-backed cache and loads every row. Later rows
    /// for the same key win.
    pub fn open(path: &Path) -> Result<Self> {
        let mut records = HashMap::new();
        let exists = path.exists() && std::fs::metadata(path)?.len() > 0;
        if exists {
            let mut rdr = csv::Reader::from_path(path)?;
            for (i, row) in rdr.deserialize::<EnergyRecord>().enumerate() {
                let rec = row.map_err(|e| Error::Format { path: path.display().to_string(), reason: format!("row {}: {e}", i + 2) })?;
                records.insert(cache_key(&rec.ball_id, rec.t, rec.alpha, &rec.schedule_id), rec);
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if !exists {
            writeln!(file, "{HEADER}")?;
        }
        Ok(Self { path: Some(path.to_path_buf()), inner: Mutex::new(Inner { records, file: Some(file) }) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, ball_id: &str, t: f64, alpha: f64, schedule_id: &str) -> Option<EnergyRecord> {
        self.inner.lock().unwrap().records.get(&cache_key(ball_id, t, alpha, schedule_id)).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a record and, for file-backed caches, appends one CSV row.
    pub fn insert(&self, rec: EnergyRecord) -> Result<()> {
        let mut inner = self.inner.lock().unwrap();
        if let Some(file) = inner.file.as_mut() {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.serialize(&rec)?;
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            file.write_all(&bytes)?;
            file.flush()?;
        }
        inner.records.insert(cache_key(&rec.ball_id, rec.t, rec.alpha, &rec.schedule_id), rec);
        Ok(())
    }

    pub fn records(&self) -> Vec<EnergyRecord> {
        let mut out: Vec<EnergyRecord> = self.inner.lock().unwrap().records.values().cloned().collect();
        out.sort_by(|a, b| {
            (&a.ball_id, &a.schedule_id)
                .cmp(&(&b.ball_id, &b.schedule_id))
                .then(a.t.total_cmp(&b.t))
                .then(a.alpha.total_cmp(&b.alpha))
        });
        out
    }
}
