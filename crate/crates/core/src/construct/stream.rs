//! Generation of the constructed point as a symbol stream.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::ShiftSystem;

use super::family::NestedFamily;
use super::schedule::{smallest_extension, ItemKind, Plan, Schedule};

/// One finished item: its checkpoint `M_j` and what was placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub item: u64,
    pub end: u64,
    pub band: u32,
    pub kind: ItemKind,
    /// FNV-1a fingerprint of a block window, the net index of a visit,
    /// 0 for the origin.
    pub block_id: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolStream {
    pub alphabet: usize,
    pub seed: u64,
    pub symbols: Vec<u8>,
    pub entries: Vec<CheckpointEntry>,
    /// Bands written completely.
    pub bands_done: usize,
}

impl SymbolStream {
    pub fn new(alphabet: usize, seed: u64) -> Self {
        SymbolStream { alphabet, seed, symbols: Vec::new(), entries: Vec::new(), bands_done: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Drops everything after band `k` (band 0 clears the stream).
    pub fn truncate_to_band(&mut self, schedule: &Schedule, k: usize) {
        let (len, items) = if k == 0 { (0, 0) } else { (schedule.band_end(k) as usize, schedule.band_end_item(k) + 1) };
        self.symbols.truncate(len);
        self.entries.truncate(items);
        self.bands_done = self.bands_done.min(k);
    }
}

pub fn fnv1a(w: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in w {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Random source of band `k`: one ChaCha stream per band, so any band can
/// be regenerated on its own.
pub fn band_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Windows of band `k` in item order (the origin first for band 1).
pub fn band_windows(plan: &Plan, seed: u64, k: usize) -> Result<Vec<Vec<u8>>> {
    let s = &plan.schedule;
    let p = s.plan(k);
    let mut out = Vec::with_capacity((p.reps + p.t) as usize + 1);
    if k == 1 {
        out.push(s.x0.clone());
    }
    let mut rng = band_rng(seed, k);
    let gamma = &plan.gammas[k - 1];
    for _ in 0..p.reps {
        out.push(gamma.sample(&mut rng).ok_or_else(|| Error::Construction { band: k, msg: "empty typical set".into() })?);
    }
    out.extend(plan.nets[k - 1].iter().cloned());
    Ok(out)
}

/// Writes bands `stream.bands_done + 1 ..= until_band`, stopping early once
/// `horizon` symbols exist (the stream is then cut to exactly `horizon`).
pub fn generate_point(
    family: &NestedFamily,
    plan: &Plan,
    stream: &mut SymbolStream,
    until_band: usize,
    horizon: Option<u64>,
) -> Result<()> {
    let s = &plan.schedule;
    let until = until_band.min(s.bands);
    let horizon = horizon.unwrap_or(u64::MAX);
    let mut connectors: HashMap<(usize, u8, u8, u64), Vec<u8>> = HashMap::new();
    let mut next_windows: Option<Vec<Vec<u8>>> = None;
    for k in stream.bands_done + 1..=until {
        if stream.symbols.len() as u64 >= horizon {
            break;
        }
        let windows = match next_windows.take() {
            Some(w) => w,
            None => band_windows(plan, stream.seed, k)?,
        };
        let following = if k < s.bands { Some(band_windows(plan, stream.seed, k + 1)?) } else { None };
        let first_item = if k == 1 { 0 } else { s.band_end_item(k - 1) + 1 };
        debug_assert_eq!(stream.symbols.len() as u64, if k == 1 { 0 } else { s.band_end(k - 1) });
        for (i, w) in windows.iter().enumerate() {
            let j = first_item + i;
            let item = s.item(j);
            debug_assert_eq!(item.window as usize, w.len());
            stream.symbols.extend_from_slice(w);
            let tail = (item.len - item.window) as usize;
            let last = *w.last().unwrap();
            let next_first = windows.get(i + 1).or(following.as_ref().and_then(|f| f.first())).map(|x| x[0]);
            let next_band = if i + 1 < windows.len() { k } else { (k + 1).min(s.bands) };
            let sys: &ShiftSystem = family.level(s.plan(next_band).glue_level);
            let fill = match next_first {
                Some(f) => {
                    let key = (s.plan(next_band).glue_level, last, f, tail as u64 + 1);
                    match connectors.get(&key) {
                        Some(c) => c.clone(),
                        None => {
                            let c = sys.connector(last, f, tail + 1).ok_or_else(|| Error::Construction {
                                band: k,
                                msg: format!("no connector of length {tail} after item {j}"),
                            })?;
                            connectors.insert(key, c.clone());
                            c
                        }
                    }
                }
                None => {
                    let ext = smallest_extension(sys, &[last], tail + 1)
                        .ok_or_else(|| Error::Construction { band: k, msg: "no continuation".into() })?;
                    ext[1..].to_vec()
                }
            };
            stream.symbols.extend_from_slice(&fill);
            let block_id = match item.kind {
                ItemKind::Origin => 0,
                ItemKind::Block => fnv1a(w),
                ItemKind::Net => item.ordinal as u64,
            };
            if stream.symbols.len() as u64 > horizon {
                stream.symbols.truncate(horizon as usize);
                return Ok(());
            }
            stream.entries.push(CheckpointEntry {
                item: j as u64,
                end: stream.symbols.len() as u64,
                band: k as u32,
                kind: item.kind,
                block_id,
            });
            if stream.symbols.len() as u64 == horizon && j < s.band_end_item(k) {
                return Ok(());
            }
        }
        stream.bands_done = k;
        next_windows = following;
    }
    Ok(())
}

/// Overwrites the window of item `j` with the lexicographically smallest
/// admissible word of the same length: an atypical block for fault
/// injection.
pub fn inject_fault(stream: &mut SymbolStream, family: &NestedFamily, schedule: &Schedule, j: usize) -> Result<()> {
    let item = schedule.item(j);
    let (a, b) = (item.start as usize, (item.start + item.window) as usize);
    if b > stream.symbols.len() {
        return Err(Error::InvalidArgument(format!("item {j} lies beyond the stream")));
    }
    let sys = family.level(schedule.plan(item.band).glue_level);
    let w = smallest_extension(sys, &[], b - a).ok_or_else(|| Error::InvalidArgument("empty level".into()))?;
    stream.symbols[a..b].copy_from_slice(&w);
    Ok(())
}
