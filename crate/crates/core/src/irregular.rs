//! Observables, irregular targets, Birkhoff traces and classification of
//! the limit set of a constructed stream.
//!
//! "Uniformly hyperbolic" in the symbolic skeleton means "supported in a
//! level of the family"; "full support" means charging cylinders outside
//! the declared level.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::construct::{NestedFamily, TargetPath, DENSITY_CAP};
use crate::error::{Error, Result};
use crate::measure::{
    full_support_measure, parse_number, word_code, ConvexCombination, CylinderCounter, CylinderTable, MarkovMeasure, Measure,
};
use crate::separation::count_words;
use crate::shift::ShiftSystem;

/// A locally constant function: `phi(x) = table[code(x_0 .. x_{l-1})]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub alphabet_size: usize,
    pub window: usize,
    pub table: Vec<f64>,
}

impl Observable {
    pub fn new(alphabet_size: usize, window: usize, table: Vec<f64>) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("observable window must be positive".into()));
        }
        if table.len() != alphabet_size.pow(window as u32) {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {}",
                table.len(),
                alphabet_size.pow(window as u32)
            )));
        }
        if let Some(i) = table.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("table entry {i} is not finite")));
        }
        Ok(Observable { alphabet_size, window, table })
    }

    /// `phi(x) = x_0`.
    pub fn coordinate(alphabet_size: usize) -> Self {
        Observable { alphabet_size, window: 1, table: (0..alphabet_size).map(|s| s as f64).collect() }
    }

    pub fn constant(alphabet_size: usize, c: f64) -> Self {
        Observable { alphabet_size, window: 1, table: vec![c; alphabet_size] }
    }

    pub fn eval(&self, w: &[u8]) -> f64 {
        self.table[word_code(&w[..self.window], self.alphabet_size)]
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.table.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `{"type": "coordinate", "alphabet_size"}`, `{"type": "constant",
    /// "alphabet_size", "value"}` or `{"alphabet_size", "window", "table"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let a = v.get("alphabet_size").and_then(Value::as_u64).unwrap_or(2) as usize;
        match v.get("type").and_then(Value::as_str) {
            Some("coordinate") => Ok(Self::coordinate(a)),
            Some("constant") => Ok(Self::constant(a, parse_number(v.get("value").unwrap_or(&Value::Null))?)),
            Some(other) if other != "table" => Err(Error::InvalidArgument(format!("unknown observable type {other:?}"))),
            _ => {
                let window = v.get("window").and_then(Value::as_u64).unwrap_or(1) as usize;
                let table = v
                    .get("table")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidArgument("observable needs \"table\"".into()))?
                    .iter()
                    .map(parse_number)
                    .collect::<Result<Vec<_>>>()?;
                Self::new(a, window, table)
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value =
            serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_json(&v).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })
    }
}

/// `∫ phi dmu` from the cylinder masses at depth `window`.
pub fn spread(obs: &Observable, mu: &Measure) -> Result<f64> {
    let t = mu.table(obs.window)?;
    Ok(t.masses[obs.window - 1].iter().zip(&obs.table).map(|(m, v)| m * v).sum())
}

/// Periodic words of `system` up to period `max_period`: admissible words
/// whose last symbol may be followed by the first.
fn cycles(system: &ShiftSystem, max_period: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for p in 1..=max_period {
        for w in system.words(p) {
            if system.allows(*w.last().unwrap(), w[0]) {
                out.push(w);
            }
        }
    }
    out
}

/// Average of `phi` along the periodic orbit of `w`.
fn orbit_average(obs: &Observable, w: &[u8]) -> f64 {
    let p = w.len();
    let ext: Vec<u8> = (0..p + obs.window).map(|i| w[i % p]).collect();
    (0..p).map(|i| obs.eval(&ext[i..])).sum::<f64>() / p as f64
}

/// Periodic orbits minimizing and maximizing `∫ phi` over `system`, with
/// their integrals.
pub fn extremal_orbits(obs: &Observable, system: &ShiftSystem, max_period: usize) -> ((Vec<u8>, f64), (Vec<u8>, f64)) {
    let mut lo = (Vec::new(), f64::INFINITY);
    let mut hi = (Vec::new(), f64::NEG_INFINITY);
    for w in cycles(system, max_period) {
        let v = orbit_average(obs, &w);
        if v < lo.1 - 1e-15 {
            lo = (w.clone(), v);
        }
        if v > hi.1 + 1e-15 {
            hi = (w, v);
        }
    }
    (lo, hi)
}

/// Period bound used when searching extremal orbits.
pub const ORBIT_PERIOD: usize = 8;

/// Zero spread means every periodic orbit up to [`ORBIT_PERIOD`] has the
/// same integral.
pub fn has_zero_spread(obs: &Observable, system: &ShiftSystem) -> bool {
    let ((_, lo), (_, hi)) = extremal_orbits(obs, system, ORBIT_PERIOD.max(obs.window + 1));
    hi - lo <= 1e-12
}

/// For an observable of zero spread, the first table entry whose
/// perturbation by `delta` creates nonzero spread, with the new range.
pub fn perturbation_witness(obs: &Observable, system: &ShiftSystem, delta: f64) -> Option<(usize, f64)> {
    let period = ORBIT_PERIOD.max(obs.window + 1);
    for i in 0..obs.table.len() {
        let w = crate::measure::code_word(i, obs.window, obs.alphabet_size);
        if !system.is_admissible(&w) {
            continue;
        }
        let mut p = obs.clone();
        p.table[i] += delta;
        let ((_, lo), (_, hi)) = extremal_orbits(&p, system, period);
        if hi - lo > 0.0 {
            return Some((i, hi - lo));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Segment between two measures of the level with different integrals.
    A,
    /// The Parry measure of the level.
    B,
    /// Segment from a level measure to a full-support measure.
    C,
    /// Segment between two full-support measures.
    D,
    /// One full-support measure.
    E,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            "d" => Ok(Variant::D),
            "e" => Ok(Variant::E),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?} (expected a to e)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
            Variant::D => "d",
            Variant::E => "e",
        };
        f.write_str(c)
    }
}

/// Grid for the mixing weights.
const THETA_GRID: u32 = 100;

/// Smallest grid value `theta` in `(0, 1)` with `ok(theta)`.
fn smallest_theta(ok: impl Fn(f64) -> bool) -> Option<f64> {
    (1..THETA_GRID).map(|i| i as f64 / THETA_GRID as f64).find(|&t| ok(t))
}

fn mix(theta: f64, x: &ConvexCombination, y: &ConvexCombination) -> Result<ConvexCombination> {
    ConvexCombination::mix(theta, x, y)
}

#[derive(Clone, Debug)]
pub struct IrregularTarget {
    pub path: TargetPath,
    pub variant: Variant,
    pub theta: f64,
    pub spreads: Vec<f64>,
    pub entropies: Vec<f64>,
}

/// Target path for one of the five variants on level `n0`.
///
/// `nu_i = theta mu + (1 - theta) mu_i` mixes the Parry measure `mu` of
/// the level with the extremal periodic measures `mu_i`; `theta` is the
/// smallest grid value keeping `h(nu_i) >= h(mu) - eta`, which keeps the
/// endpoint integrals as far apart as the entropy budget allows.
pub fn irregular_target(
    obs: &Observable,
    family: &NestedFamily,
    n0: usize,
    variant: Variant,
    eta: f64,
) -> Result<IrregularTarget> {
    if n0 == 0 || n0 > family.len() {
        return Err(Error::InvalidArgument(format!("no level {n0}")));
    }
    if obs.alphabet_size != family.alphabet_size() {
        return Err(Error::InvalidArgument("observable and family alphabets differ".into()));
    }
    let level = family.level(n0);
    let period = ORBIT_PERIOD.max(obs.window + 1);
    let ((w1, s1), (w2, s2)) = extremal_orbits(obs, level, period);
    if s2 - s1 <= 1e-12 {
        return Err(Error::InvalidArgument(format!("observable has zero spread on level {n0}")));
    }
    let a = family.alphabet_size();
    let single = |m: MarkovMeasure, l: usize| ConvexCombination::single(m, l);
    let mu = single(MarkovMeasure::parry(level)?, n0);
    let mu1 = single(MarkovMeasure::periodic_orbit(a, &w1)?, n0);
    let mu2 = single(MarkovMeasure::periodic_orbit(a, &w2)?, n0);
    let h = mu.entropy();
    let theta = smallest_theta(|t| t * h + (1.0 - t) * mu1.entropy().min(mu2.entropy()) >= h - eta)
        .ok_or_else(|| Error::InvalidArgument(format!("no mixing weight keeps the entropy loss below {eta}")))?;
    let nu1 = mix(theta, &mu, &mu1)?;
    let nu2 = mix(theta, &mu, &mu2)?;
    let int = |c: &ConvexCombination| spread(obs, &Measure::Convex(c.clone()));

    // full-support measure pulled toward nu_2 until its integral is within
    // half the gap of nu_2's
    let base = full_support_measure(family.levels())?;
    let (i1, i2) = (int(&nu1)?, int(&nu2)?);
    let omega = {
        let mut found = None;
        for i in 0..THETA_GRID {
            let s = i as f64 / THETA_GRID as f64;
            let w = if i == 0 { base.clone() } else { mix(s, &nu2, &base)? };
            if (int(&w)? - i2).abs() < 0.5 * (i2 - i1) {
                found = Some(w);
                break;
            }
        }
        found.ok_or_else(|| Error::InvalidArgument("no full-support measure near the upper endpoint".into()))?
    };

    let (path, theta_used) = match variant {
        Variant::A => (TargetPath::segment(nu1.clone(), nu2.clone())?, theta),
        Variant::B => (TargetPath::singleton(mu.clone()), 1.0),
        Variant::C | Variant::D => {
            let ok = |t: f64| t * nu1.entropy() + (1.0 - t) * omega.entropy() >= h - 2.0 * eta;
            let feasible: Vec<f64> = (1..THETA_GRID).map(|i| i as f64 / THETA_GRID as f64).filter(|&t| ok(t)).collect();
            if feasible.len() < 2 {
                return Err(Error::InvalidArgument("no pair of mixing weights meets the entropy bound".into()));
            }
            // keep at least half the weight on omega so both ends stay full support
            let t1 = feasible[0];
            let t2 = feasible.iter().copied().rfind(|&t| t <= 0.5).unwrap_or(t1);
            if t2 <= t1 {
                return Err(Error::InvalidArgument("no pair of mixing weights meets the entropy bound".into()));
            }
            let omega1 = mix(t1, &nu1, &omega)?;
            let omega2 = mix(t2, &nu1, &omega)?;
            if variant == Variant::C {
                (TargetPath::segment(nu1.clone(), omega1)?, t1)
            } else {
                (TargetPath::segment(omega1, omega2)?, t1)
            }
        }
        Variant::E => {
            let t = smallest_theta(|t| t * h + (1.0 - t) * omega.entropy() >= h - eta).unwrap_or(0.99);
            (TargetPath::singleton(mix(t, &mu, &omega)?), t)
        }
    };
    let spreads = path.vertices().iter().map(int).collect::<Result<Vec<_>>>()?;
    let entropies = path.vertices().iter().map(|v| v.entropy()).collect();
    Ok(IrregularTarget { path, variant, theta: theta_used, spreads, entropies })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffRow {
    pub checkpoint: u64,
    pub average: f64,
    pub running_liminf: Option<f64>,
    pub running_limsup: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffTrace {
    pub burn_in: u64,
    pub rows: Vec<BirkhoffRow>,
    pub liminf: Option<f64>,
    pub limsup: Option<f64>,
}

impl BirkhoffTrace {
    pub fn oscillation(&self) -> f64 {
        match (self.liminf, self.limsup) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Checkpoint averages `(1/M) sum_{i<M} phi(sigma^i z)`, over the windows
/// that fit in the first `M` symbols. Running extremes only count
/// checkpoints at or after `burn_in`.
pub fn birkhoff_trace(symbols: &[u8], obs: &Observable, checkpoints: &[u64], horizon: u64, burn_in: u64) -> BirkhoffTrace {
    let limit = (horizon as usize).min(symbols.len());
    let l = obs.window;
    let mut rows = Vec::new();
    let mut sum = 0.0;
    let mut done = 0usize; // windows summed so far
    let (mut lo, mut hi): (Option<f64>, Option<f64>) = (None, None);
    for &m in checkpoints {
        let m = m as usize;
        if m > limit {
            break;
        }
        if m < l {
            continue;
        }
        let upto = m - l + 1;
        while done < upto {
            sum += obs.eval(&symbols[done..done + l]);
            done += 1;
        }
        let avg = sum / upto as f64;
        if m as u64 >= burn_in {
            lo = Some(lo.map_or(avg, |x| x.min(avg)));
            hi = Some(hi.map_or(avg, |x| x.max(avg)));
        }
        rows.push(BirkhoffRow { checkpoint: m as u64, average: avg, running_liminf: lo, running_limsup: hi });
    }
    BirkhoffTrace { burn_in, rows, liminf: lo, limsup: hi }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: usize,
    pub first_checkpoint: u64,
    /// Mass outside the declared level's words at the audit depth.
    pub outside_mass: f64,
    pub level_supported: bool,
    pub center: CylinderTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: Option<Variant>,
    pub inconclusive: Option<String>,
    pub clusters: Vec<Cluster>,
    /// Whether the point itself is outside every level's support: asserted
    /// only when the ambient strictly exceeds every level.
    pub pointwise_nonhyperbolic: Option<bool>,
}

/// Clusters the checkpoint empirical measures (after `burn_in`) at radius
/// `tolerance` and tags the limit set: one or several clusters, each
/// supported in level `n0` or charging cylinders outside it.
#[allow(clippy::too_many_arguments)]
pub fn classify_limit_set(
    symbols: &[u8],
    family: &NestedFamily,
    n0: usize,
    checkpoints: &[u64],
    horizon: u64,
    burn_in: u64,
    tolerance: f64,
    depth: usize,
) -> Classification {
    let limit = (horizon as usize).min(symbols.len());
    let a = family.alphabet_size();
    let mut counter = CylinderCounter::new(a, depth);
    let mut pos = 0usize;
    let mut clusters: Vec<Cluster> = Vec::new();
    let level = family.level(n0);
    let outside: Vec<bool> =
        (0..a.pow(depth as u32)).map(|c| !level.is_admissible(&crate::measure::code_word(c, depth, a))).collect();
    for &m in checkpoints {
        let m = m as usize;
        if m > limit {
            break;
        }
        counter.extend(&symbols[pos..m]);
        pos = m;
        if (m as u64) < burn_in || m < depth {
            continue;
        }
        let t = counter.table();
        let dists: Vec<f64> = clusters.iter().map(|c| c.center.distance(&t).0).collect();
        let nearest = dists.iter().copied().enumerate().min_by(|x, y| x.1.total_cmp(&y.1));
        match nearest {
            Some((i, d)) if d <= tolerance => clusters[i].members += 1,
            _ => {
                let om: f64 = t.masses[depth - 1].iter().zip(&outside).filter(|(_, &o)| o).map(|(x, _)| x).sum();
                clusters.push(Cluster {
                    members: 1,
                    first_checkpoint: m as u64,
                    outside_mass: om,
                    level_supported: om <= tolerance,
                    center: t,
                });
            }
        }
    }
    let diameter = clusters.iter().flat_map(|x| clusters.iter().map(move |y| x.center.distance(&y.center).0)).fold(0.0, f64::max);
    let lo = clusters.iter().map(|c| c.outside_mass).fold(f64::INFINITY, f64::min);
    let hi = clusters.iter().map(|c| c.outside_mass).fold(0.0, f64::max);
    let near = |x: f64| x > 0.5 * tolerance && x < 2.0 * tolerance;
    let inconclusive = if clusters.is_empty() {
        Some("no checkpoint after the burn-in".to_string())
    } else if clusters.len() > 1 && diameter <= 2.0 * tolerance {
        Some(format!("clusters span {diameter:.4}, too close to the radius to tell a point from a segment"))
    } else if near(lo) || near(hi) {
        Some(format!("outside mass between {lo:.4} and {hi:.4} is too close to the tolerance"))
    } else {
        None
    };
    // a segment is tagged by its two ends: the clusters with least and most
    // mass outside the level
    let tag = inconclusive.is_none().then_some(match (clusters.len(), lo <= tolerance, hi <= tolerance) {
        (1, true, _) => Variant::B,
        (1, false, _) => Variant::E,
        (_, true, true) => Variant::A,
        (_, true, false) => Variant::C,
        (_, false, _) => Variant::D,
    });
    let strict = (1..=DENSITY_CAP).any(|l| count_words(family.ambient(), l) != count_words(family.levels().last().unwrap(), l));
    let pointwise_nonhyperbolic = match tag {
        Some(Variant::C | Variant::D | Variant::E) if strict => Some(true),
        _ => None,
    };
    Classification { tag, inconclusive, clusters, pointwise_nonhyperbolic }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_of_coordinate() {
        let phi = Observable::coordinate(2);
        let b = Measure::Markov(MarkovMeasure::bernoulli(&[0.7, 0.3]).unwrap());
        assert!((spread(&phi, &b).unwrap() - 0.3).abs() < 1e-12);
        let g = Measure::Markov(MarkovMeasure::parry(&ShiftSystem::golden_mean()).unwrap());
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spread(&phi, &g).unwrap() - 1.0 / (1.0 + golden * golden)).abs() < 1e-9);
    }

    #[test]
    fn extremal_orbits_of_coordinate() {
        let phi = Observable::coordinate(2);
        let ((w1, s1), (w2, s2)) = extremal_orbits(&phi, &ShiftSystem::golden_mean(), 6);
        assert_eq!((w1, s1), (vec![0], 0.0));
        assert_eq!(s2, 0.5);
        assert_eq!(w2, vec![0, 1]);
    }

    #[test]
    fn trace_of_constant_observable() {
        let t = birkhoff_trace(&[0, 1, 1, 0, 1], &Observable::constant(2, 3.0), &[1, 3, 5], 5, 0);
        assert!(t.rows.iter().all(|r| r.average == 3.0));
        assert_eq!(t.oscillation(), 0.0);
    }
}
