//! On-disk cache of generated inputs, keyed by generator kind, parameters
//! and seed.
//!
//! Files are little-endian: a 4-byte magic, a `u32` format version, the
//! generator metadata, then the raw arrays.

use super::{Distribution, Graph, GraphKind, WorkloadError, WorkloadSpec};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const GRAPH_MAGIC: &[u8; 4] = b"LSCG";
const WORKLOAD_MAGIC: &[u8; 4] = b"LSCW";
const VERSION: u32 = 1;

pub fn graph_key(kind: GraphKind, nv: usize, seed: u64) -> String {
    match kind {
        GraphKind::Uniform { max_degree } => format!("graph-uniform-nv{nv}-maxdeg{max_degree}-seed{seed}"),
        GraphKind::ScaleFree { gamma } => format!("graph-scalefree-nv{nv}-gamma{gamma}-seed{seed}"),
        GraphKind::Explicit => format!("graph-explicit-nv{nv}-seed{seed}"),
    }
}

pub fn workload_key(distribution: Distribution, n: usize, beta: f64, seed: u64) -> String {
    format!("workload-{}-n{n}-beta{beta}-seed{seed}", distribution.name())
}

#[derive(Debug, Clone)]
pub struct BinaryCache {
    dir: PathBuf,
}

impl BinaryCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self, WorkloadError> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(BinaryCache { dir: dir.as_ref().to_path_buf() })
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.bin"))
    }

    pub fn graph<F>(&self, key: &str, generate: F) -> Result<Graph, WorkloadError>
    where
        F: FnOnce() -> Result<Graph, WorkloadError>,
    {
        self.load_or_store(key, decode_graph, encode_graph, generate)
    }

    pub fn workload<F>(&self, key: &str, generate: F) -> Result<WorkloadSpec, WorkloadError>
    where
        F: FnOnce() -> Result<WorkloadSpec, WorkloadError>,
    {
        self.load_or_store(key, decode_workload, encode_workload, generate)
    }

    fn load_or_store<T>(
        &self,
        key: &str,
        decode: fn(&[u8]) -> Result<T, WorkloadError>,
        encode: fn(&T) -> Vec<u8>,
        generate: impl FnOnce() -> Result<T, WorkloadError>,
    ) -> Result<T, WorkloadError> {
        let path = self.path_for(key);
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(v) = decode(&bytes) {
                return Ok(v);
            }
        }
        let value = generate()?;
        // write to a temporary name first so readers never see a torn file
        let tmp = path.with_extension("bin.tmp");
        fs::File::create(&tmp)?.write_all(&encode(&value))?;
        fs::rename(&tmp, &path)?;
        Ok(value)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WorkloadError> {
        if self.buf.len() < n {
            return Err(WorkloadError::Invalid("truncated cache file".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, WorkloadError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, WorkloadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WorkloadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, WorkloadError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<(), WorkloadError> {
        if self.take(4)? != magic || self.u32()? != VERSION {
            return Err(WorkloadError::Invalid("cache file has the wrong magic or version".into()));
        }
        Ok(())
    }

    fn len(&mut self) -> Result<usize, WorkloadError> {
        let n = self.u64()? as usize;
        // every element is at least 4 bytes, so anything longer is corrupt
        if n > self.buf.len() / 4 + 1 {
            return Err(WorkloadError::Invalid("cache length field out of range".into()));
        }
        Ok(n)
    }
}

pub fn encode_graph(g: &Graph) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * g.offsets().len() + 4 * g.edge_count());
    out.extend_from_slice(GRAPH_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (tag, param) = match g.kind {
        GraphKind::Uniform { max_degree } => (0u8, max_degree as f64),
        GraphKind::ScaleFree { gamma } => (1, gamma),
        GraphKind::Explicit => (2, 0.0),
    };
    out.push(tag);
    out.extend_from_slice(&param.to_bits().to_le_bytes());
    out.extend_from_slice(&g.seed.to_le_bytes());
    out.extend_from_slice(&(g.offsets().len() as u64).to_le_bytes());
    for &o in g.offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    out.extend_from_slice(&(g.edge_count() as u64).to_le_bytes());
    for &t in g.targets() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

pub fn decode_graph(bytes: &[u8]) -> Result<Graph, WorkloadError> {
    let mut r = Reader { buf: bytes };
    r.header(GRAPH_MAGIC)?;
    let tag = r.u8()?;
    let param = r.f64()?;
    let seed = r.u64()?;
    let kind = match tag {
        0 => GraphKind::Uniform { max_degree: param as usize },
        1 => GraphKind::ScaleFree { gamma: param },
        2 => GraphKind::Explicit,
        _ => return Err(WorkloadError::Invalid(format!("unknown graph kind tag {tag}"))),
    };
    let n_off = r.len()?;
    let offsets = (0..n_off).map(|_| r.u64().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    let n_t = r.len()?;
    let targets = (0..n_t).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let mut g = Graph::from_csr(offsets, targets)?;
    g.kind = kind;
    g.seed = seed;
    Ok(g)
}

pub fn encode_workload(w: &WorkloadSpec) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + 8 * w.costs.len());
    out.extend_from_slice(WORKLOAD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match w.distribution {
        Distribution::Linear => 0,
        Distribution::ExpIncreasing => 1,
        Distribution::ExpDecreasing => 2,
    });
    out.extend_from_slice(&w.beta.to_bits().to_le_bytes());
    out.extend_from_slice(&w.seed.to_le_bytes());
    out.extend_from_slice(&(w.costs.len() as u64).to_le_bytes());
    for &c in &w.costs {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

pub fn decode_workload(bytes: &[u8]) -> Result<WorkloadSpec, WorkloadError> {
    let mut r = Reader { buf: bytes };
    r.header(WORKLOAD_MAGIC)?;
    let distribution = match r.u8()? {
        0 => Distribution::Linear,
        1 => Distribution::ExpIncreasing,
        2 => Distribution::ExpDecreasing,
        t => return Err(WorkloadError::Invalid(format!("unknown distribution tag {t}"))),
    };
    let beta = r.f64()?;
    let seed = r.u64()?;
    let n = r.len()?;
    let costs = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    Ok(WorkloadSpec { costs, distribution, beta, seed })
}
