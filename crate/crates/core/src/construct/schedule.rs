//! Integer schedule of the banded construction: scales, nets, gaps,
//! segment lengths, repetition counts and checkpoints.
//!
//! Band `k` places `N_k` typical blocks of length `n_k` (each followed by
//! `K_k - 1` connector symbols), then visits the `t_k` words of the net
//! `Delta_k`, one every `K_k` symbols; the last visit is followed by the
//! bridge into band `k + 1`. Item 0 pins the start to the open set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::separation::{count_words, typical_words, TypicalMode, TypicalWordSet, EPS_STAR};
use crate::shift::{m_of_eps, ShiftSystem};

use super::chain::MeasureChain;
use super::family::NestedFamily;

/// `zeta_1` is chosen on a grid of this resolution.
pub const ZETA_GRID: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub bands: usize,
    pub eta: f64,
    /// Upper bound for `zeta_1`, in units of `1 / ZETA_GRID`.
    pub zeta_cap: u64,
    /// Candidate classes examined per typical-word set.
    pub budget: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { bands: 3, eta: 0.3, zeta_cap: 300, budget: 20_000 }
    }
}

/// Everything the schedule fixes for one band index `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPlan {
    pub band: usize,
    pub eps: f64,
    /// Coordinates pinned at scale `eps`.
    pub m: usize,
    pub zeta_num: u64,
    pub zeta_den: u64,
    /// Level whose length-`m` words form the net `Delta_k`.
    pub net_level: usize,
    pub t: u64,
    /// `L_k`: level carrying the band's gluing.
    pub glue_level: usize,
    pub spec_gap: u64,
    /// `K_k = spec_gap + m - 1`.
    pub k_gap: u64,
    /// Level `l_k` carrying `gamma_k` (0 when no measure is attached).
    pub gamma_level: usize,
    pub n: u64,
    /// Smallest length tried that met the counting bound.
    pub n_star: u64,
    pub gamma_count: String,
    pub gamma_log_count: f64,
    /// `N_k` (0 beyond the last constructed band).
    pub reps: u64,
}

impl BandPlan {
    pub fn zeta(&self) -> f64 {
        self.zeta_num as f64 / self.zeta_den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Origin,
    Block,
    Net,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Item {
    pub index: usize,
    pub band: usize,
    pub kind: ItemKind,
    /// Repetition (blocks) or net index (visits), 1-based; 0 for the origin.
    pub ordinal: usize,
    pub start: u64,
    pub window: u64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub bands: usize,
    pub eta: f64,
    pub h_star: f64,
    pub u: Vec<u8>,
    pub eps0: f64,
    pub l0: usize,
    /// Start window of the point, length `m_1`.
    pub x0: Vec<u8>,
    /// Band plans for `k = 1..=bands + 2`; `n` is set up to `bands + 1`.
    pub plans: Vec<BandPlan>,
    /// `M_j` for every item `j = 0..=S_B`.
    pub checkpoints: Vec<u64>,
}

/// `eps_1 = min(eps*/6, eps_0/2)` and `eps_k = eps_1 / 2^k` for `k >= 2`.
pub fn eps_sequence(u_len: usize, count: usize) -> Vec<f64> {
    let eps0 = 0.5f64.powi(u_len as i32);
    let e1 = (EPS_STAR / 6.0).min(eps0 / 2.0);
    (1..=count).map(|k| if k == 1 { e1 } else { e1 / 2f64.powi(k as i32) }).collect()
}

/// Lexicographically smallest admissible word of length `len` extending
/// `prefix` (every admissible word of a level extends).
pub fn smallest_extension(system: &ShiftSystem, prefix: &[u8], len: usize) -> Option<Vec<u8>> {
    if !system.is_admissible(prefix) && !prefix.is_empty() {
        return None;
    }
    let mut w = prefix.to_vec();
    if w.is_empty() && len > 0 {
        w.push(*system.used_symbols().first()?);
    }
    while w.len() < len {
        let last = *w.last().unwrap();
        let next = (0..system.alphabet_size() as u8).find(|&b| system.allows(last, b))?;
        w.push(next);
    }
    w.truncate(len.max(prefix.len()));
    Some(w)
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

/// Largest `z <= cap` (grid units) with `5 z (H* - eta) < eta`.
pub fn choose_zeta1(cap: u64, h_star: f64, eta: f64) -> u64 {
    let slack = h_star - eta;
    if slack <= 0.0 {
        return cap;
    }
    (1..=cap).rev().find(|&z| 5.0 * (z as f64 / ZETA_GRID as f64) * slack < eta).unwrap_or(1)
}

/// The schedule together with its realized typical-word sets and nets.
#[derive(Clone, Debug)]
pub struct Plan {
    pub schedule: Schedule,
    /// `Gamma_k` for `k = 1..=bands`.
    pub gammas: Vec<TypicalWordSet>,
    /// `Delta_k` for `k = 1..=bands`, lexicographic.
    pub nets: Vec<Vec<Vec<u8>>>,
}

/// Solves the schedule for `bands` bands. `chain` needs `bands + 1`
/// entries.
pub fn solve_schedule(family: &NestedFamily, chain: &MeasureChain, u: &[u8], cfg: &ScheduleConfig) -> Result<Plan> {
    let b = cfg.bands;
    if b == 0 {
        return Err(Error::InvalidArgument("at least one band".into()));
    }
    if chain.len() < b + 1 {
        return Err(Error::InvalidArgument(format!("chain has {} entries, need {}", chain.len(), b + 1)));
    }
    let levels = family.len();
    let l0 = family.smallest_level_containing(u).ok_or_else(|| {
        let w = crate::shift::Word(u.to_vec());
        Error::Density(format!(
            "cylinder {w} is not admissible in any level (density certified to depth {})",
            family.density_depth()
        ))
    })?;
    let eps = eps_sequence(u.len(), b + 2);
    let h_star = chain.entropy_floor;
    let z1 = choose_zeta1(cfg.zeta_cap, h_star, cfg.eta);

    let mut plans: Vec<BandPlan> = Vec::with_capacity(b + 2);
    let mut glue_prev = 0;
    for k in 1..=b + 2 {
        let m = m_of_eps(eps[k - 1]);
        let net_level = k.min(levels);
        let gamma_level = chain.levels.get(k - 1).copied().unwrap_or(0);
        let mut glue = gamma_level.max(k).max(glue_prev);
        if k == 1 {
            glue = glue.max(l0);
        }
        let glue = glue.min(levels);
        glue_prev = glue;
        let spec_gap = family.level(glue).specification_gap(eps[k - 1]).map_err(|e| match e {
            Error::NotMixing(p) => {
                Error::Construction { band: k, msg: format!("level {glue} has period {p}; use the power route") }
            }
            e => e,
        })? as u64;
        let t = count_words(family.level(net_level), m);
        let t: u64 = t.try_into().map_err(|_| Error::Budget(format!("net of band {k} too large")))?;
        plans.push(BandPlan {
            band: k,
            eps: eps[k - 1],
            m,
            zeta_num: z1,
            zeta_den: ZETA_GRID << (k - 1),
            net_level,
            t,
            glue_level: glue,
            spec_gap,
            k_gap: spec_gap + m as u64 - 1,
            gamma_level,
            n: 0,
            n_star: 0,
            gamma_count: String::new(),
            gamma_log_count: 0.0,
            reps: 0,
        });
    }

    // segment lengths
    let mut gammas = Vec::with_capacity(b);
    for k in 1..=b + 1 {
        let (p, q) = (plans[k - 1].zeta_num as u128, plans[k - 1].zeta_den as u128);
        let need = q * (plans[k - 1].t as u128 * plans[k - 1].k_gap as u128 + plans[k].k_gap as u128);
        let n_min = ceil_div(need, p).max(2) as u64;
        let system = family.level(plans[k - 1].gamma_level.max(1));
        let (n, set) = find_segment_length(system, &chain.gammas[k - 1], plans[k - 1].zeta(), n_min, h_star, cfg.budget)
            .map_err(|e| Error::Construction { band: k, msg: e.to_string() })?;
        let plan = &mut plans[k - 1];
        plan.n = n;
        plan.n_star = n;
        plan.gamma_count = set.exact_count.to_string();
        plan.gamma_log_count = set.log_count();
        if k <= b {
            gammas.push(set);
        }
    }

    // repetition counts
    let mut prev_reps = 0u64;
    for k in 1..=b {
        let mut reps = prev_reps + 1;
        let sum_prev: u128 = plans[..k - 1].iter().map(|p| p.reps as u128 * p.n as u128).sum();
        let nk = plans[k - 1].n as u128;
        if k < b {
            // first display at index k
            let (p, q) = (plans[k - 1].zeta_num as u128, plans[k - 1].zeta_den as u128);
            let lhs = q * a1_lhs(&plans, k);
            let need = ceil_div(lhs.saturating_sub(p * sum_prev), p * nk);
            reps = reps.max(need as u64);
        }
        if k >= 2 {
            // second display at index k - 1
            let (p, q) = (plans[k - 1].zeta_num as u128, plans[k - 1].zeta_den as u128);
            let lhs = q * a2_lhs(&plans, k - 1);
            let need = ceil_div(lhs.saturating_sub(p * sum_prev), p * nk);
            reps = reps.max(need as u64);
        }
        plans[k - 1].reps = reps;
        prev_reps = reps;
    }

    let x0 = smallest_extension(family.level(l0), u, plans[0].m)
        .ok_or_else(|| Error::Density("no extension of the cylinder word".into()))?;
    let mut schedule = Schedule {
        bands: b,
        eta: cfg.eta,
        h_star,
        u: u.to_vec(),
        eps0: 0.5f64.powi(u.len() as i32),
        l0,
        x0,
        plans,
        checkpoints: Vec::new(),
    };
    let mut acc = 0u64;
    let items = schedule.item_count();
    let mut cps = Vec::with_capacity(items);
    for j in 0..items {
        acc += schedule.item_len(j);
        cps.push(acc);
    }
    schedule.checkpoints = cps;
    let nets = (1..=b).map(|k| family.level(schedule.plans[k - 1].net_level).words(schedule.plans[k - 1].m)).collect();
    Ok(Plan { schedule, gammas, nets })
}

/// `n_{k+1} + (t_{k+1} - 1) K_{k+1} + 2 K_{k+2} + n_{k+2}`.
fn a1_lhs(plans: &[BandPlan], k: usize) -> u128 {
    let p1 = &plans[k];
    let p2 = &plans[k + 1];
    p1.n as u128 + (p1.t as u128 - 1) * p1.k_gap as u128 + 2 * p2.k_gap as u128 + p2.n as u128
}

/// `sum_{j<=k} (N_j (n_j + K_j - 1) + t_j K_j) + K_{k+1}`.
fn a2_lhs(plans: &[BandPlan], k: usize) -> u128 {
    plans[..k].iter().map(|p| p.reps as u128 * (p.n + p.k_gap - 1) as u128 + p.t as u128 * p.k_gap as u128).sum::<u128>()
        + plans[k].k_gap as u128
}

/// Smallest `n >= n_min` whose typical set has at least `e^{n H*}` words.
fn find_segment_length(
    system: &ShiftSystem,
    gamma: &Measure,
    zeta: f64,
    n_min: u64,
    h_star: f64,
    budget: usize,
) -> Result<(u64, TypicalWordSet)> {
    // pair-count classes certify nothing finer than the depth-2 tail
    let floor = crate::measure::truncation_bound(2, system.alphabet_size());
    if zeta <= floor {
        return Err(Error::Budget(format!(
            "zeta {zeta:.5} is below the pair-count certification floor {floor:.5}; raise eta or use fewer bands"
        )));
    }
    let mut n = n_min;
    let mut tries = 0;
    loop {
        let set = typical_words(system, gamma, zeta, n as usize, TypicalMode::Sample, budget)?;
        if !set.is_empty() && set.log_count() >= n as f64 * h_star {
            return Ok((n, set));
        }
        tries += 1;
        if tries > 200 {
            return Err(Error::Budget(format!("no length from {n_min} meets the counting bound")));
        }
        n = if tries < 32 { n + 1 } else { n + n.div_ceil(8) };
    }
}

/// One checked inequality, cross-multiplied to integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub band: usize,
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

impl Schedule {
    pub fn plan(&self, k: usize) -> &BandPlan {
        &self.plans[k - 1]
    }

    /// `S_k = sum_{i<=k} (N_i + t_i)`.
    pub fn band_end_item(&self, k: usize) -> usize {
        self.plans[..k].iter().map(|p| (p.reps + p.t) as usize).sum()
    }

    pub fn item_count(&self) -> usize {
        self.band_end_item(self.bands) + 1
    }

    /// Band of item `j` (the origin belongs to band 1).
    pub fn band_of(&self, j: usize) -> usize {
        let mut end = 0;
        for k in 1..=self.bands {
            end += (self.plans[k - 1].reps + self.plans[k - 1].t) as usize;
            if j <= end {
                return k;
            }
        }
        self.bands
    }

    pub fn item(&self, j: usize) -> Item {
        let start = if j == 0 { 0 } else { self.checkpoints.get(j - 1).copied().unwrap_or(0) };
        if j == 0 {
            let p = &self.plans[0];
            return Item { index: 0, band: 1, kind: ItemKind::Origin, ordinal: 0, start, window: p.m as u64, len: p.k_gap };
        }
        let k = self.band_of(j);
        let p = &self.plans[k - 1];
        let off = j - self.band_end_item(k - 1);
        if off <= p.reps as usize {
            Item { index: j, band: k, kind: ItemKind::Block, ordinal: off, start, window: p.n, len: p.n + p.k_gap - 1 }
        } else {
            let i = off - p.reps as usize;
            let len = if (i as u64) < p.t { p.k_gap } else { self.plans[k].k_gap };
            Item { index: j, band: k, kind: ItemKind::Net, ordinal: i, start, window: p.m as u64, len }
        }
    }

    fn item_len(&self, j: usize) -> u64 {
        // before checkpoints exist
        if j == 0 {
            return self.plans[0].k_gap;
        }
        let k = self.band_of(j);
        let p = &self.plans[k - 1];
        let off = j - self.band_end_item(k - 1);
        if off <= p.reps as usize {
            p.n + p.k_gap - 1
        } else if ((off - p.reps as usize) as u64) < p.t {
            p.k_gap
        } else {
            self.plans[k].k_gap
        }
    }

    /// `M_j`.
    pub fn checkpoint(&self, j: usize) -> u64 {
        self.checkpoints[j]
    }

    /// Length of the stream after all bands.
    pub fn total_len(&self) -> u64 {
        *self.checkpoints.last().unwrap()
    }

    /// End of band `k` in symbols, `M_{S_k}`.
    pub fn band_end(&self, k: usize) -> u64 {
        self.checkpoints[self.band_end_item(k)]
    }

    /// The three inequality families plus monotonicity of `N_k`, all in
    /// exact integer arithmetic.
    pub fn check_inequalities(&self) -> Vec<InequalityCheck> {
        let b = self.bands;
        let p = &self.plans;
        let mut out = Vec::new();
        let mut push = |name: &str, band: usize, lhs: u128, rhs: u128| {
            out.push(InequalityCheck { name: name.into(), band, lhs, rhs, holds: lhs <= rhs });
        };
        for k in 1..=b {
            let (z, q) = (p[k - 1].zeta_num as u128, p[k - 1].zeta_den as u128);
            push("segment", k, q * (p[k - 1].t as u128 * p[k - 1].k_gap as u128 + p[k].k_gap as u128), z * p[k - 1].n as u128);
        }
        let sum_nn = |k: usize| -> u128 { p[..k].iter().map(|x| x.reps as u128 * x.n as u128).sum() };
        for k in 1..b {
            let (z, q) = (p[k - 1].zeta_num as u128, p[k - 1].zeta_den as u128);
            push("bridge", k, q * a1_lhs(p, k), z * sum_nn(k));
            let (z, q) = (p[k].zeta_num as u128, p[k].zeta_den as u128);
            push("overhead", k, q * a2_lhs(p, k), z * sum_nn(k + 1));
        }
        for k in 1..b {
            push("increasing", k, p[k - 1].reps as u128 + 1, p[k].reps as u128);
        }
        for k in 1..=b {
            push(
                "zeta-decreasing",
                k,
                p[k].zeta_num as u128 * p[k - 1].zeta_den as u128 + 1,
                p[k - 1].zeta_num as u128 * p[k].zeta_den as u128,
            );
        }
        out
    }

    /// Largest `M_{j+1} / M_j` over band `k`'s checkpoints.
    pub fn max_ratio(&self, k: usize) -> f64 {
        let lo = self.band_end_item(k - 1);
        let hi = self.band_end_item(k);
        (lo.max(1)..=hi)
            .filter(|&j| j + 1 < self.checkpoints.len())
            .map(|j| self.checkpoints[j + 1] as f64 / self.checkpoints[j] as f64)
            .fold(1.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_chain() {
        let e = eps_sequence(0, 3);
        assert_eq!(e[0], 1.0 / 12.0);
        assert_eq!(e[1], 1.0 / 48.0);
        assert_eq!(eps_sequence(4, 1)[0], 1.0 / 32.0);
        let ms: Vec<usize> = eps_sequence(0, 4).iter().map(|&x| m_of_eps(x)).collect();
        assert_eq!(ms, vec![4, 6, 7, 8]);
    }

    #[test]
    fn segment_bound_by_substitution() {
        // t = 5, K = 2, K' = 2, zeta = 1/10: 10 * (10 + 2) / 1 = 120
        assert_eq!(ceil_div(10 * (5 * 2 + 2), 1), 120);
    }

    #[test]
    fn zeta_choice() {
        assert_eq!(choose_zeta1(300, 0.39, 0.3), 300);
        assert_eq!(choose_zeta1(300, 0.1, 0.3), 300);
        // 5 z (1.0 - 0.1) < 0.1  =>  z < 0.0222
        assert_eq!(choose_zeta1(300, 1.0, 0.1), 22);
    }

    #[test]
    fn smallest_extension_golden() {
        let g = ShiftSystem::golden_mean();
        assert_eq!(smallest_extension(&g, &[1], 4).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(smallest_extension(&g, &[], 3).unwrap(), vec![0, 0, 0]);
        assert!(smallest_extension(&g, &[1, 1], 3).is_none());
    }
}
