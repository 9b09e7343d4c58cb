use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{BoundaryError, BoundaryPatch, BoundaryRecord, BoundarySource, Bump, SourceTerm, TimeGrid, TimeProfile};

const MAGIC: &[u8; 8] = b"DIRACRSP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// All four degrees driven and all three normal traces measured.
    Complete,
    /// Only a degree-1 control (plus its induced degree-2 companion) and the
    /// degree-2 normal trace.
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    /// Hash of mesh and materials that produced the records.
    pub fingerprint: String,
    pub kind: SystemKind,
    pub grid: TimeGrid,
    /// Sources are supported in `(-source_window, 0)`.
    pub source_window: f64,
    pub integrator: String,
    pub sizes: [usize; 3],
    pub record_degrees: [bool; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseEntry {
    pub label: String,
    pub source: BoundarySource,
    pub record: BoundaryRecord,
}

/// Sources paired with their measured normal traces, all on one grid and one
/// patch.  This plus the patch is the only input of the recovery side.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseDataset {
    pub header: DatasetHeader,
    pub patch: BoundaryPatch,
    pub entries: Vec<ResponseEntry>,
}

#[derive(Serialize, Deserialize)]
struct TermMeta {
    degree: usize,
    spatial: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EntryMeta {
    label: String,
    bump: Option<Bump>,
    terms: Vec<TermMeta>,
}

#[derive(Serialize, Deserialize)]
struct FileMeta {
    header: DatasetHeader,
    patch: BoundaryPatch,
    entries: Vec<EntryMeta>,
}

impl ResponseDataset {
    pub fn new(header: DatasetHeader, patch: BoundaryPatch) -> Result<Self, BoundaryError> {
        patch.validate()?;
        if header.sizes != patch.sizes() {
            return Err(BoundaryError::Mismatch("header sizes differ from patch".into()));
        }
        if header.grid.index_of(0.0).is_none() || header.grid.start > -header.source_window + 1e-12 * header.grid.step {
            return Err(BoundaryError::Mismatch("grid must contain t = 0 and start at or before the source window".into()));
        }
        Ok(ResponseDataset { header, patch, entries: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grid(&self) -> TimeGrid {
        self.header.grid
    }

    /// Grid index of `t = 0`.
    pub fn origin(&self) -> usize {
        self.header.grid.index_of(0.0).expect("validated at construction")
    }

    pub fn push(&mut self, entry: ResponseEntry) -> Result<usize, BoundaryError> {
        self.check_entry(&entry)?;
        self.entries.push(entry);
        Ok(self.entries.len() - 1)
    }

    fn check_entry(&self, e: &ResponseEntry) -> Result<(), BoundaryError> {
        let h = &self.header;
        if !e.source.grid.same_as(&h.grid) || !e.record.grid.same_as(&h.grid) {
            return Err(BoundaryError::Mismatch(format!("entry '{}' is on a different time grid", e.label)));
        }
        if e.record.sizes != h.sizes || e.record.present() != h.record_degrees {
            return Err(BoundaryError::Mismatch(format!("entry '{}' record layout differs from header", e.label)));
        }
        e.source.check_support(&self.patch)?;
        if h.kind == SystemKind::Physical && e.source.has_degree(0) {
            return Err(BoundaryError::Mismatch(format!("physical entry '{}' drives degree 0", e.label)));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), BoundaryError> {
        let meta = FileMeta {
            header: self.header.clone(),
            patch: self.patch.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryMeta {
                    label: e.label.clone(),
                    bump: e.source.bump,
                    terms: e.source.terms.iter().map(|t| TermMeta { degree: t.degree, spatial: t.spatial.clone() }).collect(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&meta)?;
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut put = |xs: &[f64]| -> std::io::Result<()> {
            for x in xs {
                w.write_all(&x.to_le_bytes())?;
            }
            Ok(())
        };
        for e in &self.entries {
            for t in &e.source.terms {
                put(&t.profile.values)?;
                put(&t.profile.rates)?;
            }
            for tr in &e.record.traces {
                put(tr)?;
            }
        }
        drop(put);
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BoundaryError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(BoundaryError::Format("bad magic".into()));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let meta: FileMeta = serde_json::from_slice(&json)?;
        let mut take = |n: usize| -> Result<Vec<f64>, BoundaryError> {
            let mut buf = vec![0u8; n * 8];
            r.read_exact(&mut buf).map_err(|e| BoundaryError::Format(format!("truncated payload: {e}")))?;
            Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let h = meta.header.clone();
        let nt = h.grid.len;
        let mut ds = ResponseDataset::new(meta.header, meta.patch)?;
        for em in meta.entries {
            let mut source = BoundarySource::zero(h.grid, h.sizes);
            source.bump = em.bump;
            for tm in em.terms {
                if tm.degree >= 3 || tm.spatial.len() != h.sizes[tm.degree] {
                    return Err(BoundaryError::Format(format!("entry '{}' has a malformed source term", em.label)));
                }
                let values = take(nt)?;
                let rates = take(nt)?;
                source.terms.push(SourceTerm { degree: tm.degree, spatial: tm.spatial, profile: TimeProfile { values, rates } });
            }
            let mut record = BoundaryRecord::zeros(h.grid, h.sizes, h.record_degrees);
            for j in 0..3 {
                if h.record_degrees[j] {
                    record.traces[j] = take(nt * h.sizes[j])?;
                }
            }
            ds.push(ResponseEntry { label: em.label, source, record })?;
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(BoundaryError::Format(format!("{} trailing bytes", rest.len())));
        }
        Ok(ds)
    }

    /// Rejects datasets that do not belong together before pairing them.
    pub fn check_compatible(&self, other: &ResponseDataset) -> Result<(), BoundaryError> {
        if self.header.fingerprint != other.header.fingerprint {
            return Err(BoundaryError::Mismatch("datasets come from different systems".into()));
        }
        if !self.header.grid.same_as(&other.header.grid) || self.patch != other.patch {
            return Err(BoundaryError::Mismatch("datasets use different grids or patches".into()));
        }
        Ok(())
    }
}
