//! Run manifests and on-disk run archives.
//!
//! An archive directory holds copies of its inputs, so every audit runs
//! offline: the schedule is re-solved from the inputs, the stream is read
//! back from `stream.bin`.
//!
//! ```text
//! manifest.json  family.json  target.json  [observable.json]
//! schedule.json  status.json  stream.bin   index.bin
//! tracking.csv   transitivity.csv  certificate.json  pairs.csv ...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::construct::{
    inject_fault, CheckpointEntry, Construction, ConstructionConfig, GammaMode, ItemKind, NestedFamily, PairCheck,
    ScheduleConfig, SymbolStream, TargetPath, TrackingReport, TransitivityReport,
};
use crate::error::{Error, Result};
use crate::irregular::{
    birkhoff_trace, classify_limit_set, irregular_target, BirkhoffTrace, Classification, Observable, Variant,
};
use crate::shift::Word;

const STREAM_MAGIC: &[u8; 4] = b"SYMS";
const INDEX_MAGIC: &[u8; 4] = b"SYMI";
const VERSION: u16 = 1;
const ENTRY_BYTES: usize = 32;

fn one() -> usize {
    1
}

/// What to construct. Paths are relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub family: PathBuf,
    /// Target path file; omitted when `variant` builds the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// Level the variant targets are built on.
    #[serde(default = "one")]
    pub level: usize,
    /// Open cylinder `[u]`, one base-36 digit per symbol.
    #[serde(default)]
    pub u: String,
    pub eta: f64,
    pub bands: usize,
    pub horizon: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: GammaMode,
    #[serde(default = "default_zeta_cap")]
    pub zeta_cap: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_zeta_cap() -> u64 {
    ScheduleConfig::default().zeta_cap
}

fn default_budget() -> usize {
    ScheduleConfig::default().budget
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })
    }

    pub fn u_word(&self) -> Result<Vec<u8>> {
        Ok(Word::parse(self.u.trim())?.0)
    }

    pub fn config(&self) -> ConstructionConfig {
        ConstructionConfig {
            schedule: ScheduleConfig { bands: self.bands, eta: self.eta, zeta_cap: self.zeta_cap, budget: self.budget },
            mode: self.mode,
        }
    }

    /// Loads and cross-checks every referenced file.
    pub fn resolve(&self, dir: &Path) -> Result<(NestedFamily, TargetPath, Option<Observable>)> {
        let family = NestedFamily::load(&dir.join(&self.family))?;
        let observable = self.observable.as_ref().map(|p| Observable::load(&dir.join(p))).transpose()?;
        let path = match (&self.target, self.variant) {
            (Some(t), _) => TargetPath::load(&dir.join(t))?,
            (None, Some(v)) => {
                let obs = observable.as_ref().ok_or_else(|| Error::InvalidArgument("a variant needs an observable".into()))?;
                irregular_target(obs, &family, self.level, v, self.eta)?.path
            }
            (None, None) => return Err(Error::InvalidArgument("manifest names neither a target nor a variant".into())),
        };
        path.check_against(&family)?;
        if let Some(o) = &observable {
            if o.alphabet_size != family.alphabet_size() {
                return Err(Error::InvalidArgument("observable and family alphabets differ".into()));
            }
        }
        if let Some(p) = family.ambient().first_violation(&self.u_word()?) {
            return Err(Error::Density(format!("cylinder word is not admissible at position {p}")));
        }
        Ok((family, path, observable))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub seed: u64,
    pub bands: usize,
    pub bands_done: usize,
    pub horizon: u64,
    /// Base symbols on disk.
    pub length: u64,
    pub complete: bool,
    /// Band a resumed run restarts after.
    pub resumable_at: Option<usize>,
}

/// Writes `bytes` to a temporary sibling, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Packed symbol file: magic, version, alphabet, seed, length, then 4
/// symbols per byte (2 bits each, low bits first) for alphabets up to 4,
/// one byte per symbol otherwise.
pub fn pack_stream(alphabet: usize, seed: u64, symbols: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + symbols.len() / 4 + 1);
    out.extend_from_slice(STREAM_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(alphabet as u16).to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    if alphabet <= 4 {
        for chunk in symbols.chunks(4) {
            out.push(chunk.iter().enumerate().fold(0u8, |b, (i, &s)| b | (s << (2 * i))));
        }
    } else {
        out.extend_from_slice(symbols);
    }
    out
}

/// Inverse of [`pack_stream`]: `(alphabet, seed, symbols)`.
pub fn unpack_stream(bytes: &[u8]) -> Result<(usize, u64, Vec<u8>)> {
    let bad = |msg: &str| Error::Parse { path: "stream.bin".into(), msg: msg.into() };
    if bytes.len() < 24 || &bytes[..4] != STREAM_MAGIC {
        return Err(bad("not a packed stream"));
    }
    if u16::from_le_bytes([bytes[4], bytes[5]]) != VERSION {
        return Err(bad("unsupported version"));
    }
    let alphabet = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let seed = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let len = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = &bytes[24..];
    let symbols = if alphabet <= 4 {
        if body.len() != len.div_ceil(4) {
            return Err(bad("length does not match payload"));
        }
        (0..len).map(|i| (body[i / 4] >> (2 * (i % 4))) & 3).collect()
    } else {
        if body.len() != len {
            return Err(bad("length does not match payload"));
        }
        body.to_vec()
    };
    Ok((alphabet, seed, symbols))
}

/// Checkpoint index: magic, version, count, then fixed 32-byte records
/// `(item, end, band, kind, block_id)` sorted by `end`.
pub fn pack_index(entries: &[CheckpointEntry]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + ENTRY_BYTES * entries.len());
    out.extend_from_slice(INDEX_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for e in entries {
        out.extend_from_slice(&e.item.to_le_bytes());
        out.extend_from_slice(&e.end.to_le_bytes());
        out.extend_from_slice(&e.band.to_le_bytes());
        let kind = match e.kind {
            ItemKind::Origin => 0u8,
            ItemKind::Block => 1,
            ItemKind::Net => 2,
        };
        out.extend_from_slice(&[kind, 0, 0, 0]);
        out.extend_from_slice(&e.block_id.to_le_bytes());
    }
    out
}

pub fn unpack_index(bytes: &[u8]) -> Result<Vec<CheckpointEntry>> {
    let bad = |msg: &str| Error::Parse { path: "index.bin".into(), msg: msg.into() };
    if bytes.len() < 16 || &bytes[..4] != INDEX_MAGIC {
        return Err(bad("not a checkpoint index"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + n * ENTRY_BYTES {
        return Err(bad("count does not match payload"));
    }
    bytes[16..]
        .chunks(ENTRY_BYTES)
        .map(|r| {
            let u = |a: usize| u64::from_le_bytes(r[a..a + 8].try_into().unwrap());
            let kind = match r[20] {
                0 => ItemKind::Origin,
                1 => ItemKind::Block,
                2 => ItemKind::Net,
                _ => return Err(bad("unknown item kind")),
            };
            Ok(CheckpointEntry {
                item: u(0),
                end: u(8),
                band: u32::from_le_bytes(r[16..20].try_into().unwrap()),
                kind,
                block_id: u(24),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditKind {
    Tracking,
    Transitivity,
    Certificate,
    Birkhoff,
    Classify,
}

impl AuditKind {
    pub const ALL: [AuditKind; 5] =
        [AuditKind::Tracking, AuditKind::Transitivity, AuditKind::Certificate, AuditKind::Birkhoff, AuditKind::Classify];

    pub fn name(self) -> &'static str {
        match self {
            AuditKind::Tracking => "tracking",
            AuditKind::Transitivity => "transitivity",
            AuditKind::Certificate => "certificate",
            AuditKind::Birkhoff => "birkhoff",
            AuditKind::Classify => "classify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub format: Format,
    /// Word length of the transitivity audit.
    pub depth: usize,
    /// Base position before which Birkhoff extremes and clusters are not
    /// counted; `None` means half of band 1.
    pub burn_in: Option<u64>,
    /// Cluster radius of the classification.
    pub tolerance: f64,
    pub pairs: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { format: Format::Csv, depth: 6, burn_in: None, tolerance: 0.05, pairs: 100 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditOutcome {
    pub kind: AuditKind,
    pub pass: bool,
    /// One-line summary for the terminal.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// A run directory.
#[derive(Clone, Debug)]
pub struct RunArchive {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunArchive {
    /// Creates `dir` with copies of the manifest's inputs. A variant target
    /// is materialized into `target.json`.
    pub fn create(dir: &Path, manifest: &RunManifest, manifest_dir: &Path) -> Result<Self> {
        let (family, path, observable) = manifest.resolve(manifest_dir)?;
        fs::create_dir_all(dir)?;
        let mut local = manifest.clone();
        write_atomic(&dir.join("family.json"), serde_json::to_string_pretty(&family.to_file())?.as_bytes())?;
        local.family = "family.json".into();
        write_atomic(&dir.join("target.json"), serde_json::to_string_pretty(&path.to_json())?.as_bytes())?;
        local.target = Some("target.json".into());
        if let Some(o) = observable {
            write_atomic(&dir.join("observable.json"), serde_json::to_string_pretty(&o)?.as_bytes())?;
            local.observable = Some("observable.json".into());
        }
        write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&local)?.as_bytes())?;
        for stale in ["status.json", "stream.bin", "index.bin"] {
            let p = dir.join(stale);
            if p.exists() {
                fs::remove_file(p)?;
            }
        }
        Ok(RunArchive { dir: dir.to_path_buf(), manifest: local })
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let manifest = RunManifest::load(&dir.join("manifest.json"))?;
        Ok(RunArchive { dir: dir.to_path_buf(), manifest })
    }

    pub fn construction(&self) -> Result<Construction> {
        let (family, path, _) = self.manifest.resolve(&self.dir)?;
        Construction::new(family, path, &self.manifest.u_word()?, self.manifest.config())
    }

    pub fn observable(&self) -> Result<Option<Observable>> {
        self.manifest.observable.as_ref().map(|p| Observable::load(&self.dir.join(p))).transpose()
    }

    pub fn status(&self) -> Result<Option<Status>> {
        let p = self.dir.join("status.json");
        if !p.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
    }

    /// The constructed point as stored.
    pub fn base_symbols(&self) -> Result<Vec<u8>> {
        let bytes = fs::read(self.dir.join("stream.bin"))
            .map_err(|e| Error::InvalidArgument(format!("missing stream.bin in {}: {e}", self.dir.display())))?;
        Ok(unpack_stream(&bytes)?.2)
    }

    pub fn entries(&self) -> Result<Vec<CheckpointEntry>> {
        let bytes = fs::read(self.dir.join("index.bin"))
            .map_err(|e| Error::InvalidArgument(format!("missing index.bin in {}: {e}", self.dir.display())))?;
        unpack_index(&bytes)
    }

    /// The working stream rebuilt from disk.
    pub fn load_stream(&self, c: &Construction) -> Result<SymbolStream> {
        let status = self.status()?.ok_or_else(|| Error::InvalidArgument("archive has no status; run construct first".into()))?;
        let base = self.base_symbols()?;
        let mut stream = c.new_stream(status.seed);
        stream.symbols = c.working_symbols(&base)?;
        stream.entries = self.entries()?;
        stream.bands_done = status.bands_done;
        Ok(stream)
    }

    fn save(&self, c: &Construction, stream: &SymbolStream) -> Result<Status> {
        let s = c.schedule();
        let base = c.base_symbols(stream);
        let horizon = self.manifest.horizon;
        let complete = stream.bands_done == s.bands || base.len() as u64 >= horizon;
        let status = Status {
            seed: stream.seed,
            bands: s.bands,
            bands_done: stream.bands_done,
            horizon,
            length: base.len() as u64,
            complete,
            resumable_at: (!complete).then_some(stream.bands_done),
        };
        write_atomic(&self.dir.join("schedule.json"), serde_json::to_string_pretty(s)?.as_bytes())?;
        write_atomic(&self.dir.join("stream.bin"), &pack_stream(c.family.alphabet_size(), stream.seed, &base))?;
        write_atomic(&self.dir.join("index.bin"), &pack_index(&stream.entries))?;
        write_atomic(&self.dir.join("status.json"), serde_json::to_string_pretty(&status)?.as_bytes())?;
        Ok(status)
    }

    /// Generates up to band `stop_after` (all bands by default), resuming
    /// after the last completed band when the archive holds a partial run.
    pub fn run(&self, stop_after: Option<usize>) -> Result<Status> {
        let c = self.construction()?;
        let s = c.schedule();
        let mut stream = match self.status()? {
            Some(st) if st.complete => return Ok(st),
            Some(st) => {
                let mut stream = self.load_stream(&c)?;
                let b = st.bands_done;
                stream.truncate_to_band(s, b);
                stream
            }
            None => c.new_stream(self.manifest.seed),
        };
        c.generate(&mut stream, stop_after.unwrap_or(s.bands), Some(self.manifest.horizon))?;
        self.save(&c, &stream)
    }

    /// Regenerates the stream from scratch and compares it with the stored
    /// bytes.
    pub fn reproduces(&self) -> Result<bool> {
        let c = self.construction()?;
        let status = self.status()?.ok_or_else(|| Error::InvalidArgument("archive has no status".into()))?;
        let mut stream = c.new_stream(status.seed);
        let until = if status.complete { status.bands } else { status.bands_done };
        c.generate(&mut stream, until, Some(self.manifest.horizon))?;
        let fresh = pack_stream(c.family.alphabet_size(), status.seed, &c.base_symbols(&stream));
        Ok(fresh == fs::read(self.dir.join("stream.bin"))?)
    }

    /// Overwrites item `j` with an atypical window, for testing the audits.
    pub fn inject_fault(&self, j: usize) -> Result<()> {
        let c = self.construction()?;
        let mut stream = self.load_stream(&c)?;
        inject_fault(&mut stream, &c.working, c.schedule(), j)?;
        let base = c.base_symbols(&stream);
        write_atomic(&self.dir.join("stream.bin"), &pack_stream(c.family.alphabet_size(), stream.seed, &base))
    }

    fn horizon(&self, stream_len: usize) -> u64 {
        self.manifest.horizon.min(stream_len as u64)
    }

    fn write_report(&self, name: &str, opts: &AuditOptions, csv: String, json: String) -> Result<PathBuf> {
        let (file, body) = match opts.format {
            Format::Csv => (format!("{name}.csv"), csv),
            Format::Json => (format!("{name}.json"), json),
        };
        let p = self.dir.join(file);
        write_atomic(&p, body.as_bytes())?;
        Ok(p)
    }

    /// Runs one audit over the stored stream and writes its report.
    pub fn audit(&self, kind: AuditKind, opts: &AuditOptions) -> Result<AuditOutcome> {
        let c = self.construction()?;
        let stream = self.load_stream(&c)?;
        let seed = stream.seed;
        let base = c.base_symbols(&stream);
        let horizon = self.horizon(base.len());
        let burn_in = opts.burn_in.unwrap_or(c.base_position(c.schedule().band_end(1)) / 2);
        let wrap = |v: serde_json::Value| serde_json::to_string_pretty(&serde_json::json!({ "seed": seed, "report": v }));
        match kind {
            AuditKind::Tracking => {
                let r = c.tracking(&stream, horizon)?;
                let p = self.write_report("tracking", opts, tracking_csv(&r, seed), wrap(serde_json::to_value(&r)?)?)?;
                let maxima: Vec<String> = r.band_maxima.iter().map(|(b, d)| format!("band {b}: {d:.6}")).collect();
                let summary = match r.first_failure() {
                    Some(f) if !f.window_ok => format!(
                        "tracking FAIL at checkpoint {} (item {}, band {}): window does not match its assignment",
                        f.checkpoint, f.item, f.band
                    ),
                    Some(f) => format!(
                        "tracking FAIL at checkpoint {} (item {}, band {}): distance {:.6} > envelope {:.6}",
                        f.checkpoint,
                        f.item,
                        f.band,
                        f.distance,
                        f.envelope + f.truncation
                    ),
                    None => format!("tracking pass over {} checkpoints; maxima {}", r.rows.len(), maxima.join(", ")),
                };
                Ok(AuditOutcome { kind, pass: r.pass(), summary, files: vec![p] })
            }
            AuditKind::Transitivity => {
                let r = c.transitivity(&stream, opts.depth, stream.len() as u64);
                let p = self.write_report("transitivity", opts, transitivity_csv(&r, seed), wrap(serde_json::to_value(&r)?)?)?;
                let summary = format!(
                    "transitivity {}: {} of {} words of length <= {} hit before their deadline",
                    if r.pass() { "pass" } else { "FAIL" },
                    r.rows.len() - r.failures(),
                    r.rows.len(),
                    r.depth
                );
                Ok(AuditOutcome { kind, pass: r.pass(), summary, files: vec![p] })
            }
            AuditKind::Certificate => {
                let cert = c.certificate();
                let pairs = c.pairs(&stream, opts.pairs, seed);
                let good = pairs.iter().filter(|p| p.separated && p.admissible).count();
                let pass = cert.pass && good == pairs.len();
                let cert_csv = format!(
                    "# seed={seed}\nlog_count,length,rate,floor,inf_entropy,margin,pass\n{},{},{},{},{},{},{}\n",
                    cert.log_count,
                    cert.length,
                    cert.rate,
                    cert.floor,
                    cert.inf_entropy,
                    cert.rate - cert.floor,
                    cert.pass
                );
                let p1 = self.write_report("certificate", opts, cert_csv, wrap(serde_json::to_value(&cert)?)?)?;
                let p2 = self.write_report("pairs", opts, pairs_csv(&pairs, seed), wrap(serde_json::to_value(&pairs)?)?)?;
                let summary = format!(
                    "certificate {}: rate {:.4} vs floor {:.4} (margin {:+.4}); {good}/{} sampled pairs separated and admissible",
                    if pass { "pass" } else { "FAIL" },
                    cert.rate,
                    cert.floor,
                    cert.rate - cert.floor,
                    pairs.len()
                );
                Ok(AuditOutcome { kind, pass, summary, files: vec![p1, p2] })
            }
            AuditKind::Birkhoff => {
                let obs = self.observable()?.ok_or_else(|| Error::InvalidArgument("manifest has no observable".into()))?;
                let t = birkhoff_trace(&base, &obs, &c.base_checkpoints(&stream), horizon, burn_in);
                let p = self.write_report("birkhoff", opts, birkhoff_csv(&t, seed), wrap(serde_json::to_value(&t)?)?)?;
                let pass = !t.rows.is_empty();
                let summary = match (t.liminf, t.limsup) {
                    (Some(a), Some(b)) => {
                        format!("birkhoff: liminf {a:.4}, limsup {b:.4}, oscillation {:.4} after position {burn_in}", b - a)
                    }
                    _ => "birkhoff: no checkpoint after the burn-in".to_string(),
                };
                Ok(AuditOutcome { kind, pass, summary, files: vec![p] })
            }
            AuditKind::Classify => {
                let cl = classify_limit_set(
                    &base,
                    &c.family,
                    self.manifest.level,
                    &c.base_checkpoints(&stream),
                    horizon,
                    burn_in,
                    opts.tolerance,
                    crate::construct::AUDIT_DEPTH,
                );
                let p = self.write_report("classify", opts, classify_csv(&cl, seed), wrap(serde_json::to_value(&cl)?)?)?;
                let pass = match (cl.tag, self.manifest.variant) {
                    (Some(t), Some(v)) => t == v,
                    (Some(_), None) => true,
                    (None, _) => false,
                };
                let summary = match (&cl.tag, &cl.inconclusive) {
                    (Some(t), _) => format!(
                        "classify: variant ({t}) with {} cluster(s){}",
                        cl.clusters.len(),
                        self.manifest.variant.map(|v| format!(", expected ({v})")).unwrap_or_default()
                    ),
                    (None, Some(why)) => format!("classify: inconclusive, {why}"),
                    (None, None) => "classify: inconclusive".to_string(),
                };
                Ok(AuditOutcome { kind, pass, summary, files: vec![p] })
            }
        }
    }
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn tracking_csv(r: &TrackingReport, seed: u64) -> String {
    let mut s = format!("# seed={seed}\nitem,band,checkpoint,distance,envelope,window_ok,pass\n");
    for row in &r.rows {
        let e = row.envelope + row.truncation;
        let _ = writeln!(s, "{},{},{},{},{},{},{}", row.item, row.band, row.checkpoint, row.distance, e, row.window_ok, row.pass);
    }
    s
}

pub fn transitivity_csv(r: &TransitivityReport, seed: u64) -> String {
    let mut s = format!("# seed={seed}\nlevel,word,first_hit,deadline,pass\n");
    for row in &r.rows {
        let _ = writeln!(s, "{},{},{},{},{}", row.level, row.word, opt(row.first_hit), opt(row.deadline), row.pass);
    }
    s
}

pub fn pairs_csv(pairs: &[PairCheck], seed: u64) -> String {
    let mut s = format!("# seed={seed}\nitem,separated_within,separated,admissible\n");
    for p in pairs {
        let _ = writeln!(s, "{},{},{},{}", p.item, p.separated_within, p.separated, p.admissible);
    }
    s
}

pub fn birkhoff_csv(t: &BirkhoffTrace, seed: u64) -> String {
    let mut s = format!("# seed={seed}\ncheckpoint,average,running_liminf,running_limsup\n");
    for r in &t.rows {
        let _ = writeln!(s, "{},{},{},{}", r.checkpoint, r.average, opt(r.running_liminf), opt(r.running_limsup));
    }
    s
}

pub fn classify_csv(c: &Classification, seed: u64) -> String {
    let mut s = format!(
        "# seed={seed}\n# tag={}\n# inconclusive={}\ncluster,members,first_checkpoint,outside_mass,level_supported\n",
        opt(c.tag),
        c.inconclusive.clone().unwrap_or_default()
    );
    for (i, k) in c.clusters.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{},{}", k.members, k.first_checkpoint, k.outside_mass, k.level_supported);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_stream_roundtrip() {
        for a in [2usize, 4, 7] {
            let syms: Vec<u8> = (0..1001u32).map(|i| (i * 7 % a as u32) as u8).collect();
            let (a2, seed, back) = unpack_stream(&pack_stream(a, 9, &syms)).unwrap();
            assert_eq!((a2, seed), (a, 9));
            assert_eq!(back, syms);
        }
        assert_eq!(pack_stream(2, 0, &[0; 10_000]).len(), 24 + 2500);
    }

    #[test]
    fn index_roundtrip() {
        let e = vec![
            CheckpointEntry { item: 0, end: 4, band: 1, kind: ItemKind::Origin, block_id: 0 },
            CheckpointEntry { item: 1, end: 90, band: 1, kind: ItemKind::Block, block_id: u64::MAX - 3 },
            CheckpointEntry { item: 2, end: 99, band: 1, kind: ItemKind::Net, block_id: 5 },
        ];
        assert_eq!(unpack_index(&pack_index(&e)).unwrap(), e);
        assert!(unpack_index(b"SYMI").is_err());
    }
}
