use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ball::{Edge, MarkedBall};
use super::canon::canonicalize;
use super::hash::{hash_ball, BallHashKey};
use super::iso::is_isomorphic;
use super::Omega;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// First line of a ball database file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseHeader {
    pub format_version: u32,
    pub d: usize,
    pub p: usize,
    pub total_count: usize,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    d: usize,
    p: usize,
    nodes: usize,
    edges: &'a [Edge],
    marked_edge: Edge,
    omega_class: Option<Omega>,
    hash_key: &'a BallHashKey,
}

#[derive(Deserialize)]
struct RecordIn {
    id: String,
    d: usize,
    p: usize,
    nodes: usize,
    edges: Vec<Edge>,
    marked_edge: Edge,
    omega_class: Option<Omega>,
    hash_key: BallHashKey,
}

/// Deduplicated set of marked balls of one radius, bucketed by hash key.
#[derive(Clone, Debug, Default)]
pub struct BallDatabase {
    d: usize,
    p: usize,
    buckets: BTreeMap<BallHashKey, Vec<MarkedBall>>,
    total_count: usize,
}

impl BallDatabase {
    pub fn new(d: usize, p: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("degree bound d={d} must be >= 2")));
        }
        Ok(Self { d, p, buckets: BTreeMap::new(), total_count: 0 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.total_count
    }

    pub fn is_empty(&self) -> bool {
        self.total_count == 0
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Adds `ball` (stored in canonical labelling) unless an isomorphic ball
    /// is already present. Returns whether it was new.
    pub fn insert(&mut self, ball: MarkedBall) -> Result<bool> {
        if ball.d() != self.d || ball.p() != self.p {
            return Err(Error::InvalidParameter(format!(
                "ball (d={}, p={}) does not belong in a (d={}, p={}) database",
                ball.d(),
                ball.p(),
                self.d,
                self.p
            )));
        }
        ball.validate()?;
        let mut canon = canonicalize(&ball);
        canon.set_radius(ball.p());
        Ok(self.insert_canonical(canon))
    }

    pub(crate) fn insert_canonical(&mut self, ball: MarkedBall) -> bool {
        let key = hash_ball(&ball);
        let bucket = self.buckets.entry(key).or_default();
        if bucket.iter().any(|b| is_isomorphic(b, &ball)) {
            return false;
        }
        let at = bucket.partition_point(|b| b.id() < ball.id());
        bucket.insert(at, ball);
        self.total_count += 1;
        true
    }

    /// Balls in bucket order, by id within a bucket.
    pub fn balls(&self) -> impl Iterator<Item = &MarkedBall> {
        self.buckets.values().flatten()
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&BallHashKey, &[MarkedBall])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn get(&self, id: &str) -> Option<&MarkedBall> {
        self.balls().find(|b| b.id() == id)
    }

    /// Number of balls that are already whole d-regular graphs.
    pub fn closed_count(&self) -> usize {
        self.balls().filter(|b| b.is_closed()).count()
    }

    pub fn count_by_class(&self, omega: Omega) -> usize {
        self.balls().filter(|b| b.omega_class() == Some(omega)).count()
    }

    pub fn header(&self) -> DatabaseHeader {
        DatabaseHeader { format_version: FORMAT_VERSION, d: self.d, p: self.p, total_count: self.total_count }
    }

    /// Merges balls of another radius into one working set (e.g. for
    /// certification over `B_1 ∪ B_2`); the radius of the result is the larger.
    pub fn union(&self, other: &BallDatabase) -> Result<Vec<MarkedBall>> {
        if self.d != other.d {
            return Err(Error::InvalidParameter(format!("cannot merge d={} with d={}", self.d, other.d)));
        }
        Ok(self.balls().chain(other.balls()).cloned().collect())
    }

    pub fn write_jsonl(&self, w: impl Write) -> Result<()> {
        let mut w = BufWriter::new(w);
        serde_json::to_writer(&mut w, &self.header())?;
        w.write_all(b"\n")?;
        for (key, bucket) in &self.buckets {
            for b in bucket {
                let rec = RecordOut {
                    id: b.id(),
                    d: b.d(),
                    p: b.p(),
                    nodes: b.node_count(),
                    edges: b.edges(),
                    marked_edge: b.marked_edge(),
                    omega_class: b.omega_class(),
                    hash_key: key,
                };
                serde_json::to_writer(&mut w, &rec)?;
                w.write_all(b"\n")?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_jsonl(File::create(path)?)
    }

    /// Reads a database, re-validating every ball and recomputing its hash.
    pub fn read_jsonl(r: impl std::io::Read, origin: &str) -> Result<Self> {
        let fail = |line: usize, reason: String| Error::Format { path: origin.to_string(), reason: format!("line {line}: {reason}") };
        let mut lines = BufReader::new(r).lines();
        let header_line = lines.next().ok_or_else(|| fail(1, "missing header".into()))??;
        let header: DatabaseHeader = serde_json::from_str(&header_line).map_err(|e| fail(1, e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(fail(1, format!("unsupported format_version {}", header.format_version)));
        }
        let mut db = Self::new(header.d, header.p)?;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: RecordIn = serde_json::from_str(&line).map_err(|e| fail(lineno, e.to_string()))?;
            if rec.d != header.d || rec.p != header.p {
                return Err(fail(lineno, format!("record (d={}, p={}) disagrees with header", rec.d, rec.p)));
            }
            let mut ball = MarkedBall::from_parts(rec.d, rec.p, rec.nodes, rec.edges.clone(), rec.marked_edge);
            if ball.edges() != rec.edges.as_slice() {
                return Err(fail(lineno, "edge list is not in canonical sorted order".into()));
            }
            ball.validate().map_err(|e| fail(lineno, e.to_string()))?;
            let omega = ball.derive_omega();
            if omega != rec.omega_class {
                return Err(fail(lineno, format!("stored omega_class {:?} but structure gives {:?}", rec.omega_class, omega)));
            }
            ball.set_identity(rec.id, omega);
            let key = hash_ball(&ball);
            if key != rec.hash_key {
                return Err(fail(lineno, format!("stored hash key does not match recomputed {key}")));
            }
            let bucket = db.buckets.entry(key).or_default();
            bucket.push(ball);
            db.total_count += 1;
        }
        for bucket in db.buckets.values_mut() {
            bucket.sort_by(|a, b| a.id().cmp(b.id()));
        }
        if db.total_count != header.total_count {
            return Err(fail(1, format!("header total_count {} but {} records", header.total_count, db.total_count)));
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_jsonl(File::open(path)?, &path.display().to_string())
    }
}
