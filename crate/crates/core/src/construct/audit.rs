//! Audits of a constructed stream: window reproduction, tracking of the
//! working measures, transitivity and the separated-family certificate.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;
use crate::measure::{word_code, CylinderCounter, CylinderTable};
use crate::shift::{separated, Word};

use super::chain::MeasureChain;
use super::family::NestedFamily;
use super::schedule::{ItemKind, Plan, Schedule};
use super::stream::{band_rng, SymbolStream};

/// Depth of the tracking audit.
pub const AUDIT_DEPTH: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub items_checked: usize,
    pub mismatches: Vec<usize>,
    /// First inadmissible position of the prefix in the ambient system.
    pub first_violation: Option<usize>,
}

impl WindowReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty() && self.first_violation.is_none()
    }
}

/// Every complete item window reproduces its assignment: the origin equals
/// `x_0`, blocks lie in `Gamma_k`, visits equal their net word.
pub fn verify_windows(stream: &SymbolStream, family: &NestedFamily, plan: &Plan) -> WindowReport {
    let s = &plan.schedule;
    let mut rep = WindowReport { first_violation: family.ambient().first_violation(&stream.symbols), ..Default::default() };
    for j in 0..s.item_count() {
        let item = s.item(j);
        let (a, b) = (item.start as usize, (item.start + item.window) as usize);
        if b > stream.symbols.len() {
            break;
        }
        let w = &stream.symbols[a..b];
        let ok = match item.kind {
            ItemKind::Origin => w == s.x0.as_slice(),
            ItemKind::Block => plan.gammas[item.band - 1].contains(w),
            ItemKind::Net => plan.nets[item.band - 1][item.ordinal - 1] == w,
        };
        rep.items_checked += 1;
        if !ok {
            rep.mismatches.push(j);
        }
    }
    rep
}

/// What a checkpoint is compared against.
#[derive(Clone, Debug)]
pub struct CheckpointTarget {
    pub item: usize,
    pub band: usize,
    /// Prefix length of the audited stream.
    pub position: u64,
    pub target: usize,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub item: usize,
    pub checkpoint: u64,
    pub band: usize,
    pub distance: f64,
    pub envelope: f64,
    pub truncation: f64,
    /// The item's own window reproduces its assignment.
    pub window_ok: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub depth: usize,
    pub rows: Vec<TrackingRow>,
    /// Largest distance seen in each band (bands without checkpoints are
    /// absent).
    pub band_maxima: Vec<(usize, f64)>,
}

impl TrackingReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&TrackingRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    /// Marks the rows of items whose windows do not reproduce their
    /// assignment: an atypical block fails at its own checkpoint even when
    /// the prefix dilutes it below the envelope.
    pub fn mark_windows(&mut self, windows: &WindowReport) {
        for r in &mut self.rows {
            if windows.mismatches.binary_search(&r.item).is_ok() {
                r.window_ok = false;
                r.pass = false;
            }
        }
    }

    pub fn maxima_strictly_decreasing(&self) -> bool {
        self.band_maxima.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Envelopes of the construction: band 1 gets `K_1/M_j + 2 eps_1 +
/// 4 zeta_1`, band `k >= 2` gets `9 zeta_{k-1} + 4 eps_{k-1} +
/// d(gamma_{k-1}, gamma_k)`.
pub fn tracking_targets(schedule: &Schedule, chain: &MeasureChain, depth: usize) -> Result<Vec<CheckpointTarget>> {
    let mut out = Vec::with_capacity(schedule.item_count());
    let mut steps = vec![0.0; schedule.bands + 1];
    for k in 2..=schedule.bands {
        steps[k] = chain.gamma_step(k - 1, depth)?;
    }
    let p1 = schedule.plan(1);
    for j in 0..schedule.item_count() {
        let k = schedule.band_of(j);
        let m = schedule.checkpoint(j);
        let envelope = if k == 1 {
            p1.k_gap as f64 / m as f64 + 2.0 * p1.eps + 4.0 * p1.zeta()
        } else {
            let p = schedule.plan(k - 1);
            9.0 * p.zeta() + 4.0 * p.eps + steps[k]
        };
        out.push(CheckpointTarget { item: j, band: k, position: m, target: k - 1, envelope });
    }
    Ok(out)
}

/// Streams the prefix once and compares each checkpoint's empirical table
/// with its target table.
pub fn audit_tracking(
    symbols: &[u8],
    alphabet: usize,
    targets: &[CheckpointTarget],
    tables: &[CylinderTable],
    depth: usize,
    horizon: u64,
) -> TrackingReport {
    let mut counter = CylinderCounter::new(alphabet, depth);
    let limit = (horizon as usize).min(symbols.len());
    let mut rows = Vec::new();
    let mut pos = 0usize;
    for t in targets {
        if t.position as usize > limit || t.position == 0 {
            if t.position as usize > limit {
                break;
            }
            continue;
        }
        counter.extend(&symbols[pos..t.position as usize]);
        pos = t.position as usize;
        let (d, trunc) = counter.table().distance(&tables[t.target]);
        rows.push(TrackingRow {
            item: t.item,
            checkpoint: t.position,
            band: t.band,
            distance: d,
            envelope: t.envelope,
            truncation: trunc,
            window_ok: true,
            pass: d <= t.envelope + trunc,
        });
    }
    let mut band_maxima: Vec<(usize, f64)> = Vec::new();
    for r in &rows {
        match band_maxima.last_mut() {
            Some((b, m)) if *b == r.band => *m = m.max(r.distance),
            _ => band_maxima.push((r.band, r.distance)),
        }
    }
    TrackingReport { depth, rows, band_maxima }
}

/// Tracking audit of a direct construction against the stretched
/// sequence of working measures.
pub fn verify_tracking(stream: &SymbolStream, schedule: &Schedule, chain: &MeasureChain, horizon: u64) -> Result<TrackingReport> {
    let targets = tracking_targets(schedule, chain, AUDIT_DEPTH)?;
    let tables: Vec<CylinderTable> =
        chain.gammas[..schedule.bands].iter().map(|g| g.table(AUDIT_DEPTH)).collect::<Result<_>>()?;
    Ok(audit_tracking(&stream.symbols, stream.alphabet, &targets, &tables, AUDIT_DEPTH, horizon))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitivityRow {
    pub level: usize,
    pub word: String,
    pub first_hit: Option<u64>,
    pub deadline: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub depth: usize,
    pub horizon: u64,
    pub rows: Vec<TransitivityRow>,
}

impl TransitivityReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

/// First occurrence (start index) of every word of length `1..=depth`.
pub struct FirstHits {
    alphabet: usize,
    hits: Vec<Vec<Option<u64>>>,
}

impl FirstHits {
    pub fn scan(symbols: &[u8], alphabet: usize, depth: usize) -> Self {
        let mut hits: Vec<Vec<Option<u64>>> = (1..=depth).map(|l| vec![None; alphabet.pow(l as u32)]).collect();
        let mut remaining: usize = hits.iter().map(Vec::len).sum();
        for i in 0..symbols.len() {
            if remaining == 0 {
                break;
            }
            let mut code = 0usize;
            for l in 1..=depth.min(symbols.len() - i) {
                code = code * alphabet + symbols[i + l - 1] as usize;
                let slot = &mut hits[l - 1][code];
                if slot.is_none() {
                    *slot = Some(i as u64);
                    remaining -= 1;
                }
            }
        }
        FirstHits { alphabet, hits }
    }

    pub fn first(&self, w: &[u8]) -> Option<u64> {
        if w.is_empty() || w.len() > self.hits.len() || w.iter().any(|&s| s as usize >= self.alphabet) {
            return None;
        }
        self.hits[w.len() - 1][word_code(w, self.alphabet)]
    }
}

/// For every level `k` and every admissible word of length at most
/// `depth`, the first hit must come before the end of the first band
/// `b >= k` whose net pins at least that many coordinates.
pub fn verify_transitivity(
    stream: &SymbolStream,
    family: &NestedFamily,
    schedule: &Schedule,
    depth: usize,
    horizon: u64,
) -> TransitivityReport {
    let limit = (horizon as usize).min(stream.symbols.len());
    let hits = FirstHits::scan(&stream.symbols[..limit], stream.alphabet, depth);
    let mut rows = Vec::new();
    for k in 1..=family.len() {
        for len in 1..=depth {
            let deadline = (k..=schedule.bands)
                .find(|&b| schedule.plan(b).m >= len && schedule.plan(b).net_level >= k)
                .map(|b| schedule.band_end(b));
            for w in family.level(k).words(len) {
                let first_hit = hits.first(&w);
                let pass = match (first_hit, deadline) {
                    (Some(h), Some(d)) => h + len as u64 <= d,
                    (Some(_), None) => true,
                    (None, _) => false,
                };
                rows.push(TransitivityRow { level: k, word: Word(w).to_string(), first_hit, deadline, pass });
            }
        }
    }
    TransitivityReport { depth, horizon: limit as u64, rows }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `sum_i N_i ln |Gamma_i|`.
    pub log_count: f64,
    /// Length `M_{S_B - 1}` the family is separated over.
    pub length: u64,
    pub rate: f64,
    /// `H* - eta`.
    pub floor: f64,
    pub inf_entropy: f64,
    pub pass: bool,
    /// First band whose partial rate falls below the floor.
    pub violated_band: Option<usize>,
}

/// Exact count of the separated family `F_B` against its length.
pub fn separated_family_certificate(schedule: &Schedule, inf_entropy: f64) -> Certificate {
    let b = schedule.bands;
    let floor = schedule.h_star - schedule.eta;
    let mut log_count = 0.0;
    let mut violated_band = None;
    for k in 1..=b {
        let p = schedule.plan(k);
        let count: num_bigint::BigUint = p.gamma_count.parse().unwrap_or_default();
        log_count += p.reps as f64 * linalg::big_ln(&count);
        let len = schedule.checkpoint(schedule.band_end_item(k) - 1);
        if violated_band.is_none() && log_count / (len as f64) < floor {
            violated_band = Some(k);
        }
    }
    let length = schedule.checkpoint(schedule.band_end_item(b) - 1);
    let rate = log_count / length as f64;
    Certificate { log_count, length, rate, floor, inf_entropy, pass: rate >= floor, violated_band }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub item: usize,
    pub separated_within: u64,
    pub separated: bool,
    pub admissible: bool,
}

/// Draws `count` family members differing from the stream in one block:
/// the block is redrawn from `Gamma_k` and both adjacent connectors are
/// recomputed. Each pair must be separated at scale 1/2 within the end of
/// that item, and the modified prefix must stay admissible.
pub fn sample_separated_pairs(
    stream: &SymbolStream,
    family: &NestedFamily,
    plan: &Plan,
    count: usize,
    seed: u64,
) -> Vec<PairCheck> {
    let s = &plan.schedule;
    let blocks: Vec<usize> = (0..s.item_count())
        .filter(|&j| {
            let it = s.item(j);
            it.kind == ItemKind::Block && it.start + it.len < stream.symbols.len() as u64
        })
        .collect();
    let mut rng = band_rng(seed ^ 0x5eb_a4a7e, 0);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let Some(&j) = blocks.choose(&mut rng) else { break };
        let it = s.item(j);
        let gamma = &plan.gammas[it.band - 1];
        let (a, b) = (it.start as usize, (it.start + it.window) as usize);
        let old = &stream.symbols[a..b];
        let mut new = gamma.sample(&mut rng).unwrap_or_else(|| old.to_vec());
        for _ in 0..64 {
            if new != old {
                break;
            }
            new = gamma.sample(&mut rng).unwrap_or_else(|| old.to_vec());
        }
        let end = (it.start + it.len) as usize;
        let mut z: Vec<u8> = stream.symbols[..=end].to_vec();
        z[a..b].copy_from_slice(&new);
        // connector into the block
        let sys = family.level(s.plan(it.band).glue_level);
        let prev = s.item(j - 1);
        let (pa, pb) = ((prev.start + prev.window) as usize, it.start as usize);
        let mut admissible = true;
        match sys.connector(z[pa - 1], new[0], pb - pa + 1) {
            Some(c) => z[pa..pb].copy_from_slice(&c),
            None => admissible = false,
        }
        match sys.connector(new[new.len() - 1], z[end], end - b + 1) {
            Some(c) => z[b..end].copy_from_slice(&c),
            None => admissible = false,
        }
        admissible &= family.ambient().is_admissible(&z);
        let within = s.checkpoint(j);
        out.push(PairCheck {
            item: j,
            separated_within: within,
            separated: separated(&stream.symbols, &z, within as usize, 0.5),
            admissible,
        });
    }
    out
}
