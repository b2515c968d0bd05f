//! The full pipeline, with the detour through a power system for families
//! whose levels are transitive but not mixing.
//!
//! With period `k`, the construction runs on blocks of length `k` that
//! start in the cyclic class `D_0`, where `f^k` is mixing. The base point
//! is the decoded block stream with its first `i_0` symbols dropped, so
//! that it starts in the class of the open set's first symbol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{decomposition_average, BlockView, CylinderTable, Measure};
use crate::shift::{PowerSystem, ShiftSystem};

use super::audit::{
    audit_tracking, sample_separated_pairs, separated_family_certificate, tracking_targets, verify_tracking, verify_transitivity,
    verify_windows, Certificate, PairCheck, TrackingReport, TransitivityReport, WindowReport, AUDIT_DEPTH,
};
use super::chain::{build_chain, GammaMode, MeasureChain};
use super::family::{NestedFamily, TargetPath};
use super::schedule::{eps_sequence, smallest_extension, solve_schedule, Plan, Schedule, ScheduleConfig};
use super::stream::{generate_point, SymbolStream};

#[derive(Clone, Debug, PartialEq)]
pub enum Route {
    Identity,
    Power {
        k: usize,
        /// Class of the open set's first symbol.
        i0: usize,
        /// Base symbols dropped in front of the point, length `i0`.
        prefix: Vec<u8>,
        /// Block coding of the ambient system; levels share its alphabet.
        ambient: PowerSystem,
    },
}

impl Route {
    pub fn period(&self) -> usize {
        match self {
            Route::Identity => 1,
            Route::Power { k, .. } => *k,
        }
    }

    pub fn offset(&self) -> usize {
        match self {
            Route::Identity => 0,
            Route::Power { i0, .. } => *i0,
        }
    }
}

/// Class labels relative to the class of `s0`, `None` for unused symbols.
fn relative_labels(system: &ShiftSystem, s0: u8) -> Result<(usize, Vec<Option<usize>>)> {
    let d = system.periodic_decomposition()?;
    let p = d.period;
    let c0 = d.class_of(s0).ok_or_else(|| Error::Nesting(format!("symbol {s0} unused in {}", system.label())))?;
    let labels = (0..system.alphabet_size() as u8).map(|s| d.class_of(s).map(|c| (c + p - c0) % p)).collect();
    Ok((p, labels))
}

/// Power-restricted family on the `D_0` classes, or `None` when every
/// level is mixing already. Returns the period and the ambient block
/// coding with the family.
pub fn mixing_route(family: &NestedFamily) -> Result<Option<(usize, PowerSystem, NestedFamily)>> {
    let k = family.level(1).period()?;
    let all_mixing = k == 1 && family.levels().iter().all(ShiftSystem::is_mixing) && family.ambient().is_mixing();
    if all_mixing {
        return Ok(None);
    }
    let s0 = family.level(1).used_symbols()[0];
    let (_, base_labels) = relative_labels(family.level(1), s0)?;
    let systems: Vec<&ShiftSystem> = family.levels().iter().chain(std::iter::once(family.ambient())).collect();
    let mut starts = Vec::with_capacity(systems.len());
    for (i, sys) in systems.iter().enumerate() {
        let (p, labels) = relative_labels(sys, s0)?;
        if k % p != 0 {
            return Err(Error::Nesting(format!("level {} has period {p}, which does not divide {k}", i + 1)));
        }
        for s in family.level(1).used_symbols() {
            let (a, b) = (base_labels[s as usize].unwrap(), labels[s as usize]);
            if b != Some(a % p) {
                return Err(Error::Nesting(format!(
                    "symbol {s} lies in class {a} of level 1 but in class {b:?} of level {}",
                    i + 1
                )));
            }
        }
        let start: Vec<u8> = (0..sys.alphabet_size() as u8).filter(|&s| labels[s as usize] == Some(0)).collect();
        starts.push(start);
    }
    let amb = family.ambient();
    let amb_start = starts.last().unwrap();
    let blocks: Vec<Vec<u8>> = amb.words(k).into_iter().filter(|w| amb_start.contains(&w[0])).collect();
    let mut levels = Vec::with_capacity(family.len());
    for (i, sys) in family.levels().iter().enumerate() {
        levels.push(PowerSystem::on_blocks(sys, k, blocks.clone(), &starts[i])?.block_system);
    }
    let ambient = PowerSystem::on_blocks(amb, k, blocks, amb_start)?;
    let working = NestedFamily::new(format!("{}^{k}", family.label()), levels, Some(ambient.block_system.clone()))?;
    Ok(Some((k, ambient, working)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionConfig {
    #[serde(flatten)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub mode: GammaMode,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig { schedule: ScheduleConfig::default(), mode: GammaMode::Direct }
    }
}

/// A solved construction: the route, the working family and chain, and the
/// plan. Streams are generated on the working family; audits report at the
/// base level.
#[derive(Clone, Debug)]
pub struct Construction {
    pub family: NestedFamily,
    pub path: TargetPath,
    pub u: Vec<u8>,
    pub config: ConstructionConfig,
    pub route: Route,
    pub working: NestedFamily,
    pub chain: MeasureChain,
    pub plan: Plan,
}

impl Construction {
    pub fn new(family: NestedFamily, path: TargetPath, u: &[u8], config: ConstructionConfig) -> Result<Self> {
        let bands = config.schedule.bands;
        let eta = config.schedule.eta;
        if let Some(p) = family.ambient().first_violation(u) {
            return Err(Error::Density(format!("cylinder word is not admissible at position {p}")));
        }
        match mixing_route(&family)? {
            None => {
                let eps = eps_sequence(u.len(), bands + 1);
                let chain = build_chain(&family, &path, eta, config.mode, &eps)?;
                let plan = solve_schedule(&family, &chain, u, &config.schedule)?;
                Ok(Construction {
                    working: family.clone(),
                    family,
                    path,
                    u: u.to_vec(),
                    config,
                    route: Route::Identity,
                    chain,
                    plan,
                })
            }
            Some((k, ambient, working)) => {
                if config.mode == GammaMode::Measure {
                    return Err(Error::InvalidArgument("measure mode is not available on the power route".into()));
                }
                let (i0, prefix, wu) = transport_open_set(&family, &ambient, k, u)?;
                let eps = eps_sequence(wu.len(), bands + 1);
                let base_chain = build_chain(&family, &path, eta, GammaMode::Direct, &eps)?;
                let chain = lift_chain(base_chain, &ambient)?;
                let plan = solve_schedule(&working, &chain, &wu, &config.schedule)?;
                Ok(Construction {
                    family,
                    path,
                    u: u.to_vec(),
                    config,
                    route: Route::Power { k, i0, prefix, ambient },
                    working,
                    chain,
                    plan,
                })
            }
        }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.plan.schedule
    }

    pub fn new_stream(&self, seed: u64) -> SymbolStream {
        SymbolStream::new(self.working.alphabet_size(), seed)
    }

    /// Working-stream length needed for `horizon` base symbols.
    pub fn working_horizon(&self, horizon: u64) -> u64 {
        let k = self.route.period() as u64;
        (horizon + self.route.offset() as u64).div_ceil(k)
    }

    /// Base position of working position `m`.
    pub fn base_position(&self, m: u64) -> u64 {
        (m * self.route.period() as u64).saturating_sub(self.route.offset() as u64)
    }

    /// Checkpoints of the written items as base positions.
    pub fn base_checkpoints(&self, stream: &SymbolStream) -> Vec<u64> {
        stream.entries.iter().map(|e| self.base_position(e.end)).filter(|&m| m > 0).collect()
    }

    pub fn generate(&self, stream: &mut SymbolStream, until_band: usize, horizon: Option<u64>) -> Result<()> {
        generate_point(&self.working, &self.plan, stream, until_band, horizon.map(|h| self.working_horizon(h)))
    }

    /// The constructed point itself.
    pub fn base_symbols(&self, stream: &SymbolStream) -> Vec<u8> {
        match &self.route {
            Route::Identity => stream.symbols.clone(),
            Route::Power { i0, ambient, .. } => {
                let mut z = ambient.decode(&stream.symbols);
                z.drain(..(*i0).min(z.len()));
                z
            }
        }
    }

    /// Inverse of [`Construction::base_symbols`] on prefixes ending at a
    /// block boundary.
    pub fn working_symbols(&self, base: &[u8]) -> Result<Vec<u8>> {
        match &self.route {
            Route::Identity => Ok(base.to_vec()),
            Route::Power { prefix, ambient, .. } => {
                let mut w = prefix.clone();
                w.extend_from_slice(base);
                ambient.encode(&w).ok_or_else(|| Error::InvalidArgument("stream does not decode into blocks".into()))
            }
        }
    }

    /// Tracking at the base level: checkpoints `k M_j - i_0` against the
    /// averaged working measures; the power route adds the boundary term
    /// `(i_0 + k depth) / (k M_j)` to each envelope. Rows of items whose
    /// window fails its membership check fail as well.
    pub fn tracking(&self, stream: &SymbolStream, horizon: u64) -> Result<TrackingReport> {
        let s = self.schedule();
        let mut report = match &self.route {
            Route::Identity => verify_tracking(stream, s, &self.chain, horizon)?,
            Route::Power { k, i0, ambient, .. } => {
                let base = self.base_symbols(stream);
                let mut targets = tracking_targets(s, &self.chain, AUDIT_DEPTH)?;
                for t in &mut targets {
                    let km = (*k as u64 * t.position) as f64;
                    t.envelope += (*i0 + k * AUDIT_DEPTH) as f64 / km;
                    t.position = self.base_position(t.position);
                }
                let tables: Vec<CylinderTable> = self.chain.gammas[..s.bands]
                    .iter()
                    .map(|g| decomposition_average(g, ambient, self.family.alphabet_size())?.table(AUDIT_DEPTH))
                    .collect::<Result<_>>()?;
                audit_tracking(&base, self.family.alphabet_size(), &targets, &tables, AUDIT_DEPTH, horizon)
            }
        };
        report.mark_windows(&self.windows(stream));
        Ok(report)
    }

    /// Base-level targets `gamma'_k` of the tracking audit.
    pub fn base_targets(&self) -> Result<Vec<Measure>> {
        let b = self.schedule().bands;
        match &self.route {
            Route::Identity => Ok(self.chain.gammas[..b].to_vec()),
            Route::Power { ambient, .. } => {
                self.chain.gammas[..b].iter().map(|g| decomposition_average(g, ambient, self.family.alphabet_size())).collect()
            }
        }
    }

    pub fn windows(&self, stream: &SymbolStream) -> WindowReport {
        verify_windows(stream, &self.working, &self.plan)
    }

    /// Transitivity on the working family (the base family on the
    /// identity route). `horizon` is in working symbols.
    pub fn transitivity(&self, stream: &SymbolStream, depth: usize, horizon: u64) -> TransitivityReport {
        verify_transitivity(stream, &self.working, self.schedule(), depth, horizon)
    }

    /// Certificate in working units.
    pub fn certificate(&self) -> Certificate {
        let inf = self.path.inf_entropy() * self.route.period() as f64;
        separated_family_certificate(self.schedule(), inf)
    }

    pub fn pairs(&self, stream: &SymbolStream, count: usize, seed: u64) -> Vec<PairCheck> {
        sample_separated_pairs(stream, &self.working, &self.plan, count, seed)
    }
}

/// `(i_0, c, u')`: the class of `u_0`, the smallest `c` of length `i_0`
/// with `c u` admissible in the smallest level containing `u`, and the
/// block word of `c u` padded to a block boundary.
fn transport_open_set(family: &NestedFamily, ambient: &PowerSystem, k: usize, u: &[u8]) -> Result<(usize, Vec<u8>, Vec<u8>)> {
    if u.is_empty() {
        return Ok((0, Vec::new(), Vec::new()));
    }
    let l0 = family
        .smallest_level_containing(u)
        .ok_or_else(|| Error::Density("cylinder word is not admissible in any level".into()))?;
    let sys = family.level(l0);
    let starts: Vec<u8> = ambient.blocks.iter().map(|b| b[0]).collect();
    let (i0, c) = (0..k)
        .find_map(|i| {
            sys.words(i + 1)
                .into_iter()
                .find(|w| starts.contains(&w[0]) && w[i] == u[0] && sys.is_admissible(&[&w[..i], u].concat()))
                .map(|w| (i, w[..i].to_vec()))
        })
        .ok_or_else(|| Error::Density("cylinder word cannot be reached from a block start".into()))?;
    let cu = [&c[..], u].concat();
    let len = cu.len().div_ceil(k) * k;
    let padded = smallest_extension(sys, &cu, len).ok_or_else(|| Error::Density("no extension of the cylinder word".into()))?;
    let wu = ambient.encode(&padded).ok_or_else(|| Error::Density("cylinder word does not decode into blocks".into()))?;
    Ok((i0, c, wu))
}

/// Working chain of the power route: each `gamma_k` seen on blocks.
fn lift_chain(base: MeasureChain, ambient: &PowerSystem) -> Result<MeasureChain> {
    let gammas: Vec<Measure> = base
        .gammas
        .iter()
        .map(|g| BlockView::new(ambient.clone(), g.clone()).map(|v| Measure::BlockView(Box::new(v))))
        .collect::<Result<_>>()?;
    let gamma_entropies: Vec<f64> = gammas.iter().map(Measure::entropy).collect::<Result<_>>()?;
    let inf = gamma_entropies.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MeasureChain { gammas, gamma_entropies, entropy_floor: inf - base.eta, ..base })
}
