//! Invariant measures on shift spaces, empirical measures of finite words,
//! and the weak* metric built from cylinder indicators.
//!
//! The separating family is the list of all cylinder indicators over the
//! full alphabet, ordered by word length and then lexicographically; the
//! `k`-th indicator (1-based) carries weight `2^-k`.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::shift::{PowerSystem, ShiftSystem, SystemFile};

pub const STATIONARY_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;

/// Base-`a` code of a word, first symbol most significant.
pub fn word_code(w: &[u8], a: usize) -> usize {
    w.iter().fold(0, |c, &s| c * a + s as usize)
}

pub fn code_word(mut code: usize, len: usize, a: usize) -> Vec<u8> {
    let mut w = vec![0u8; len];
    for i in (0..len).rev() {
        w[i] = (code % a) as u8;
        code /= a;
    }
    w
}

/// 1-based position of `[w]` in the canonical separating family.
pub fn canonical_index(w: &[u8], a: usize) -> usize {
    (1..w.len()).map(|i| a.pow(i as u32)).sum::<usize>() + word_code(w, a) + 1
}

/// Number of cylinders of depth `1..=depth`.
pub fn k_max(depth: usize, a: usize) -> usize {
    (1..=depth).map(|l| a.pow(l as u32)).sum()
}

/// Tail `sum_{k > k_max} 2^-k = 2^-k_max` left out by truncating at `depth`.
pub fn truncation_bound(depth: usize, a: usize) -> f64 {
    0.5f64.powi(k_max(depth, a).min(i32::MAX as usize) as i32)
}

/// Cylinder masses of a measure for every word of length `1..=depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderTable {
    pub alphabet: usize,
    /// `masses[l - 1][word_code(w)]` for `|w| = l`.
    pub masses: Vec<Vec<f64>>,
}

impl CylinderTable {
    pub fn from_fn(alphabet: usize, depth: usize, mut mass: impl FnMut(&[u8]) -> f64) -> Self {
        let masses =
            (1..=depth).map(|l| (0..alphabet.pow(l as u32)).map(|c| mass(&code_word(c, l, alphabet))).collect()).collect();
        CylinderTable { alphabet, masses }
    }

    pub fn depth(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, w: &[u8]) -> Option<f64> {
        if w.is_empty() {
            return Some(1.0);
        }
        if w.iter().any(|&s| s as usize >= self.alphabet) {
            return Some(0.0);
        }
        self.masses.get(w.len() - 1).map(|m| m[word_code(w, self.alphabet)])
    }

    pub fn truncate(&self, depth: usize) -> CylinderTable {
        CylinderTable { alphabet: self.alphabet, masses: self.masses[..depth.min(self.depth())].to_vec() }
    }

    /// Truncated weak* distance over the common depth, with its tail bound.
    pub fn distance(&self, other: &CylinderTable) -> (f64, f64) {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let depth = self.depth().min(other.depth());
        let a = self.alphabet;
        let mut value = 0.0;
        let mut offset = 0usize;
        for l in 0..depth {
            for (c, (x, y)) in self.masses[l].iter().zip(&other.masses[l]).enumerate() {
                let k = offset + c + 1;
                value += 0.5f64.powi(k.min(2000) as i32) * (x - y).abs();
            }
            offset += a.pow(l as u32 + 1);
        }
        (value, truncation_bound(depth, a))
    }

    /// `(f_* nu)[w] = sum_s nu[s w]`, one level shallower.
    pub fn pushforward(&self) -> CylinderTable {
        let a = self.alphabet;
        let masses = (1..self.depth())
            .map(|l| {
                let size = a.pow(l as u32);
                (0..size).map(|c| (0..a).map(|s| self.masses[l][s * size + c]).sum()).collect()
            })
            .collect();
        CylinderTable { alphabet: a, masses }
    }

    pub fn combine(parts: &[(f64, &CylinderTable)]) -> CylinderTable {
        let first = parts[0].1;
        let depth = parts.iter().map(|(_, t)| t.depth()).min().unwrap();
        let mut out = CylinderTable {
            alphabet: first.alphabet,
            masses: (1..=depth).map(|l| vec![0.0; first.alphabet.pow(l as u32)]).collect(),
        };
        for (w, t) in parts {
            for l in 0..depth {
                for (o, x) in out.masses[l].iter_mut().zip(&t.masses[l]) {
                    *o += w * x;
                }
            }
        }
        out
    }

    /// Largest violation of `mass(w) = sum_s mass(w s)` across depths.
    pub fn consistency_defect(&self) -> f64 {
        let a = self.alphabet;
        let mut worst = (self.masses.first().map(|m| m.iter().sum::<f64>()).unwrap_or(1.0) - 1.0).abs();
        for l in 1..self.depth() {
            for c in 0..a.pow(l as u32) {
                let s: f64 = (0..a).map(|b| self.masses[l][c * a + b]).sum();
                worst = worst.max((s - self.masses[l - 1][c]).abs());
            }
        }
        worst
    }
}

/// A stationary Markov chain of order `r`: states are words of length `r`
/// and each step appends one symbol. Order 1 is the usual chain `(P, pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure {
    alphabet: usize,
    order: usize,
    /// `next[state][b]`: probability that `b` follows the state word.
    next: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

impl MarkovMeasure {
    /// Order-1 chain with the stationary vector found by a linear solve.
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(&p)?;
        let pi = linalg::stationary(&p).ok_or_else(|| Error::InvalidMeasure("stationary vector is not unique".into()))?;
        let pi = pi.into_iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { x }).collect();
        Self::with_stationary(p, pi)
    }

    pub fn with_stationary(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let a = p.len();
        Self::higher_order(a, 1, p, pi)
    }

    pub fn higher_order(alphabet: usize, order: usize, next: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        if alphabet == 0 || order == 0 {
            return Err(Error::InvalidMeasure("empty alphabet or zero order".into()));
        }
        let states = alphabet.pow(order as u32);
        if next.len() != states || pi.len() != states || next.iter().any(|r| r.len() != alphabet) {
            return Err(Error::InvalidMeasure("transition table has the wrong shape".into()));
        }
        check_stochastic(&next)?;
        if pi.iter().any(|&x| x < 0.0) || (pi.iter().sum::<f64>() - 1.0).abs() > STATIONARY_TOL {
            return Err(Error::InvalidMeasure("pi is not a probability vector".into()));
        }
        let m = MarkovMeasure { alphabet, order, next, pi };
        let r = m.stationary_residual();
        if r > STATIONARY_TOL {
            return Err(Error::InvalidMeasure(format!("pi is not stationary (residual {r:.3e})")));
        }
        Ok(m)
    }

    /// Higher-order chain whose stationary vector is solved numerically.
    pub fn higher_order_solved(alphabet: usize, order: usize, next: Vec<Vec<f64>>) -> Result<Self> {
        let states = alphabet.pow(order as u32);
        let mut t = vec![vec![0.0; states]; states];
        for s in 0..states {
            for b in 0..alphabet {
                t[s][(s * alphabet + b) % states] += next[s][b];
            }
        }
        let pi = linalg::stationary(&t).ok_or_else(|| Error::InvalidMeasure("stationary vector is not unique".into()))?;
        let pi = pi.into_iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { x }).collect();
        Self::higher_order(alphabet, order, next, pi)
    }

    pub fn bernoulli(p: &[f64]) -> Result<Self> {
        Self::with_stationary(vec![p.to_vec(); p.len()], p.to_vec())
    }

    /// Measure of maximal entropy on a transitive SFT.
    pub fn parry(system: &ShiftSystem) -> Result<Self> {
        if !system.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let a: Vec<Vec<f64>> = system.transitions().iter().map(|r| r.iter().map(|&b| b as u8 as f64).collect()).collect();
        let (lambda, v, u) = linalg::perron(&a);
        let n = a.len();
        let used: Vec<bool> = (0..n).map(|i| system.is_used(i as u8)).collect();
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match used[i] {
                        true => a[i][j] * v[j] / (lambda * v[i]),
                        false => (i == j) as u8 as f64,
                    })
                    .collect()
            })
            .collect();
        let z: f64 = (0..n).filter(|&i| used[i]).map(|i| u[i] * v[i]).sum();
        let pi: Vec<f64> = (0..n).map(|i| if used[i] { u[i] * v[i] / z } else { 0.0 }).collect();
        // renormalize rows against Perron round-off
        let p: Vec<Vec<f64>> = p
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|x| x / s).collect()
            })
            .collect();
        Self::with_stationary(p, pi)
    }

    /// Point mass equidistributed on the orbit of the periodic stream `word^inf`.
    pub fn periodic_orbit(alphabet: usize, word: &[u8]) -> Result<Self> {
        let len = word.len();
        if len == 0 || word.iter().any(|&s| s as usize >= alphabet) {
            return Err(Error::InvalidMeasure("periodic word empty or off-alphabet".into()));
        }
        let at = |i: usize| word[i % len];
        // smallest order whose windows determine the next symbol
        let order = (1..=len)
            .find(|&r| (0..len).all(|i| (0..len).all(|j| (0..r).any(|t| at(i + t) != at(j + t)) || at(i + r) == at(j + r))))
            .unwrap_or(len);
        let states = alphabet.pow(order as u32);
        let mut next = vec![vec![1.0 / alphabet as f64; alphabet]; states];
        let mut pi = vec![0.0; states];
        for i in 0..len {
            let s = word_code(&(0..order).map(|t| at(i + t)).collect::<Vec<_>>(), alphabet);
            pi[s] += 1.0 / len as f64;
            let mut row = vec![0.0; alphabet];
            row[at(i + order) as usize] = 1.0;
            next[s] = row;
        }
        Self::higher_order(alphabet, order, next, pi)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Transition rows (`P` for order 1).
    pub fn p(&self) -> &[Vec<f64>] {
        &self.next
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    fn stationary_residual(&self) -> f64 {
        let states = self.pi.len();
        let mut out = vec![0.0; states];
        for s in 0..states {
            for b in 0..self.alphabet {
                out[(s * self.alphabet + b) % states] += self.pi[s] * self.next[s][b];
            }
        }
        out.iter().zip(&self.pi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn mass(&self, w: &[u8]) -> f64 {
        let a = self.alphabet;
        let r = self.order;
        if w.iter().any(|&s| s as usize >= a) {
            return 0.0;
        }
        if w.len() < r {
            let span = a.pow((r - w.len()) as u32);
            let start = word_code(w, a) * span;
            return self.pi[start..start + span].iter().sum();
        }
        let mut m = self.pi[word_code(&w[..r], a)];
        for i in 0..w.len() - r {
            if m == 0.0 {
                return 0.0;
            }
            m *= self.next[word_code(&w[i..i + r], a)][w[i + r] as usize];
        }
        m
    }

    /// `-sum_s pi_s sum_b P(s, b) log P(s, b)` in nats.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (s, &p) in self.pi.iter().enumerate() {
            if p > 0.0 {
                for &q in &self.next[s] {
                    if q > 0.0 {
                        h -= p * q * q.ln();
                    }
                }
            }
        }
        h.max(0.0)
    }

    pub fn table(&self, depth: usize) -> CylinderTable {
        CylinderTable::from_fn(self.alphabet, depth, |w| self.mass(w))
    }

    /// Every word of positive mass (up to length `order + 1`) is admissible.
    pub fn is_supported_in(&self, system: &ShiftSystem) -> bool {
        if system.alphabet_size() != self.alphabet {
            return false;
        }
        let t = self.table(self.order + 1);
        t.masses.iter().enumerate().all(|(l, ms)| {
            ms.iter().enumerate().all(|(c, &m)| m <= 0.0 || system.is_admissible(&code_word(c, l + 1, self.alphabet)))
        })
    }

    /// Positive-transition graph restricted to states of positive mass is
    /// strongly connected (an ergodicity certificate).
    pub fn is_irreducible(&self) -> bool {
        let states = self.pi.len();
        let live: Vec<usize> = (0..states).filter(|&s| self.pi[s] > 0.0).collect();
        if live.is_empty() {
            return false;
        }
        let succ = |s: usize| -> Vec<usize> {
            (0..self.alphabet).filter(|&b| self.next[s][b] > 0.0).map(|b| (s * self.alphabet + b) % states).collect()
        };
        let reach = |start: usize, forward: bool| -> Vec<bool> {
            let mut seen = vec![false; states];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                let nbrs: Vec<usize> =
                    if forward { succ(u) } else { live.iter().copied().filter(|&v| succ(v).contains(&u)).collect() };
                for v in nbrs {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        let f = reach(live[0], true);
        let b = reach(live[0], false);
        live.iter().all(|&s| f[s] && b[s]) && (0..states).all(|s| !f[s] || self.pi[s] > 0.0)
    }

    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<u8> {
        let a = self.alphabet;
        let r = self.order;
        let states = self.pi.len();
        let mut s = pick(&self.pi, rng);
        let mut out = code_word(s, r, a);
        while out.len() < n {
            let b = pick(&self.next[s], rng);
            out.push(b as u8);
            s = (s * a + b) % states;
        }
        out.truncate(n);
        out
    }
}

fn pick<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

fn check_stochastic(p: &[Vec<f64>]) -> Result<()> {
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(0.0..=1.0 + STATIONARY_TOL).contains(&x)) {
            return Err(Error::InvalidMeasure(format!("row {i} has an entry outside [0, 1]")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > STATIONARY_TOL {
            return Err(Error::InvalidMeasure(format!("row {i} sums to {s}, not 1")));
        }
    }
    Ok(())
}

/// One summand of a convex combination, tagged with the smallest level
/// of the nested family that contains its support.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub measure: MarkovMeasure,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCombination {
    components: Vec<Component>,
}

impl ConvexCombination {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMeasure("convex combination without components".into()));
        }
        let a = components[0].measure.alphabet();
        if components.iter().any(|c| c.measure.alphabet() != a) {
            return Err(Error::InvalidMeasure("components over different alphabets".into()));
        }
        if components.iter().any(|c| !(c.weight > 0.0)) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let s: f64 = components.iter().map(|c| c.weight).sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {s}")));
        }
        Ok(ConvexCombination { components })
    }

    pub fn single(measure: MarkovMeasure, level: usize) -> Self {
        ConvexCombination { components: vec![Component { weight: 1.0, measure, level }] }
    }

    /// `tau * x + (1 - tau) * y`, flattened; `tau` in `[0, 1]`.
    pub fn mix(tau: f64, x: &ConvexCombination, y: &ConvexCombination) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidArgument(format!("mixing weight {tau} outside [0, 1]")));
        }
        let mut comps = Vec::new();
        for (w, side) in [(tau, x), (1.0 - tau, y)] {
            if w > 0.0 {
                comps.extend(side.components.iter().map(|c| Component { weight: w * c.weight, ..c.clone() }));
            }
        }
        ConvexCombination::new(comps)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn alphabet(&self) -> usize {
        self.components[0].measure.alphabet()
    }

    pub fn mass(&self, w: &[u8]) -> f64 {
        self.components.iter().map(|c| c.weight * c.measure.mass(w)).sum()
    }

    pub fn entropy(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.measure.entropy()).sum()
    }

    pub fn table(&self, depth: usize) -> CylinderTable {
        CylinderTable::from_fn(self.alphabet(), depth, |w| self.mass(w))
    }

    /// Largest level tag among the components.
    pub fn level(&self) -> usize {
        self.components.iter().map(|c| c.level).max().unwrap_or(1)
    }

    /// Drops components outside level `n` and renormalizes.
    pub fn restrict_normalize(&self, n: usize) -> Result<Self> {
        let kept: Vec<Component> = self.components.iter().filter(|c| c.level <= n).cloned().collect();
        let z: f64 = kept.iter().map(|c| c.weight).sum();
        if kept.is_empty() || z <= 0.0 {
            return Err(Error::InvalidMeasure(format!("no mass on level {n}")));
        }
        let mut kept: Vec<Component> = kept.into_iter().map(|c| Component { weight: c.weight / z, ..c }).collect();
        let s: f64 = kept.iter().map(|c| c.weight).sum();
        kept[0].weight += 1.0 - s;
        ConvexCombination::new(kept)
    }
}

/// Truncated-convention empirical measure of a finite word:
/// `mass(w) = count(w) / (n - |w| + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub n: usize,
    pub table: CylinderTable,
}

impl EmpiricalMeasure {
    pub fn from_word(word: &[u8], alphabet: usize, depth: usize) -> Self {
        let mut c = CylinderCounter::new(alphabet, depth);
        c.extend(word);
        EmpiricalMeasure { n: word.len(), table: c.table() }
    }
}

/// Incremental cylinder counts of a growing stream.
#[derive(Clone, Debug)]
pub struct CylinderCounter {
    alphabet: usize,
    depth: usize,
    counts: Vec<Vec<u64>>,
    recent: usize,
    n: usize,
}

impl CylinderCounter {
    pub fn new(alphabet: usize, depth: usize) -> Self {
        CylinderCounter {
            alphabet,
            depth,
            counts: (1..=depth).map(|l| vec![0; alphabet.pow(l as u32)]).collect(),
            recent: 0,
            n: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, s: u8) {
        let a = self.alphabet;
        self.recent = (self.recent * a + s as usize) % a.pow(self.depth as u32);
        self.n += 1;
        let avail = self.n.min(self.depth);
        let mut modulus = 1usize;
        for l in 1..=avail {
            modulus *= a;
            self.counts[l - 1][self.recent % modulus] += 1;
        }
    }

    pub fn extend(&mut self, w: &[u8]) {
        for &s in w {
            self.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn counts(&self, l: usize) -> &[u64] {
        &self.counts[l - 1]
    }

    pub fn table(&self) -> CylinderTable {
        let masses = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, cs)| {
                let windows = (self.n + 1).saturating_sub(i + 1);
                cs.iter().map(|&c| if windows == 0 { 0.0 } else { c as f64 / windows as f64 }).collect()
            })
            .collect();
        CylinderTable { alphabet: self.alphabet, masses }
    }
}

/// The base-level measure `(1/k) sum_{i<k} f^i_* nu` of a measure `nu` of
/// a power system on block words.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAverage {
    pub power: PowerSystem,
    pub base_alphabet: usize,
    pub inner: Measure,
}

impl PowerAverage {
    fn lifted_mass_at(&self, w: &[u8], offset: usize) -> Result<f64> {
        // sum of nu(B) over block words B whose decoding has w at `offset`
        let k = self.power.exponent;
        let nblocks = (offset + w.len()).div_ceil(k);
        let mut total = 0.0;
        let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
        while let Some(bw) = stack.pop() {
            if bw.len() == nblocks {
                total += self.inner.mass(&bw)?;
                continue;
            }
            for (b, block) in self.power.blocks.iter().enumerate() {
                let start = bw.len() * k;
                let ok = block.iter().enumerate().all(|(t, &s)| {
                    let pos = start + t;
                    pos < offset || pos >= offset + w.len() || w[pos - offset] == s
                });
                if ok {
                    let mut nb = bw.clone();
                    nb.push(b as u8);
                    stack.push(nb);
                }
            }
        }
        Ok(total)
    }

    pub fn mass(&self, w: &[u8]) -> Result<f64> {
        let k = self.power.exponent;
        let mut s = 0.0;
        for i in 0..k {
            s += self.lifted_mass_at(w, i)?;
        }
        Ok(s / k as f64)
    }
}

/// An `f`-invariant base measure `alpha` seen by the power system: the
/// normalized restriction to the union `Y` of block starts,
/// `nu(B) = alpha([decode B]) / alpha(Y)`. `Y` is `f^k`-invariant, and
/// `h(nu, f^k) = k h(alpha)` for each ergodic component.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockView {
    pub power: PowerSystem,
    pub inner: Measure,
    norm: f64,
}

impl BlockView {
    pub fn new(power: PowerSystem, inner: Measure) -> Result<Self> {
        let mut norm = 0.0;
        for b in &power.blocks {
            norm += inner.mass(b)?;
        }
        if !(norm > 0.0) {
            return Err(Error::InvalidMeasure("measure gives no mass to the block starts".into()));
        }
        Ok(BlockView { power, inner, norm })
    }

    pub fn mass(&self, bw: &[u8]) -> Result<f64> {
        if bw.is_empty() {
            return Ok(1.0);
        }
        if bw.iter().any(|&b| b as usize >= self.power.blocks.len()) {
            return Ok(0.0);
        }
        Ok(self.inner.mass(&self.power.decode(bw))? / self.norm)
    }

    pub fn entropy(&self) -> Result<f64> {
        let k = self.power.exponent as f64;
        match &self.inner {
            Measure::Convex(c) => {
                let mut h = 0.0;
                for comp in c.components() {
                    let y: f64 = self.power.blocks.iter().map(|b| comp.measure.mass(b)).sum();
                    h += comp.weight * y / self.norm * k * comp.measure.entropy();
                }
                Ok(h)
            }
            m => Ok(k * m.entropy()?),
        }
    }
}

/// Any measure the toolkit can evaluate on cylinders.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Markov(MarkovMeasure),
    Convex(ConvexCombination),
    Empirical(EmpiricalMeasure),
    Pushforward(Box<Measure>),
    PowerAverage(Box<PowerAverage>),
    BlockView(Box<BlockView>),
}

impl From<MarkovMeasure> for Measure {
    fn from(m: MarkovMeasure) -> Self {
        Measure::Markov(m)
    }
}

impl From<ConvexCombination> for Measure {
    fn from(m: ConvexCombination) -> Self {
        Measure::Convex(m)
    }
}

impl Measure {
    pub fn alphabet(&self) -> usize {
        match self {
            Measure::Markov(m) => m.alphabet(),
            Measure::Convex(c) => c.alphabet(),
            Measure::Empirical(e) => e.table.alphabet,
            Measure::Pushforward(m) => m.alphabet(),
            Measure::PowerAverage(p) => p.base_alphabet,
            Measure::BlockView(b) => b.power.blocks.len(),
        }
    }

    pub fn mass(&self, w: &[u8]) -> Result<f64> {
        match self {
            Measure::Markov(m) => Ok(m.mass(w)),
            Measure::Convex(c) => Ok(c.mass(w)),
            Measure::Empirical(e) => e.table.mass(w).ok_or_else(|| {
                Error::InvalidArgument(format!("empirical table has depth {}, asked {}", e.table.depth(), w.len()))
            }),
            Measure::Pushforward(m) => {
                let a = m.alphabet() as u8;
                let mut s = 0.0;
                let mut sw = Vec::with_capacity(w.len() + 1);
                for b in 0..a {
                    sw.clear();
                    sw.push(b);
                    sw.extend_from_slice(w);
                    s += m.mass(&sw)?;
                }
                Ok(s)
            }
            Measure::PowerAverage(p) => p.mass(w),
            Measure::BlockView(b) => b.mass(w),
        }
    }

    pub fn table(&self, depth: usize) -> Result<CylinderTable> {
        match self {
            Measure::Markov(m) => Ok(m.table(depth)),
            Measure::Convex(c) => Ok(c.table(depth)),
            Measure::Empirical(e) if e.table.depth() >= depth => Ok(e.table.truncate(depth)),
            Measure::Pushforward(m) => Ok(m.table(depth + 1)?.pushforward()),
            _ => {
                let a = self.alphabet();
                let mut masses = Vec::with_capacity(depth);
                for l in 1..=depth {
                    let row: Result<Vec<f64>> = (0..a.pow(l as u32)).map(|c| self.mass(&code_word(c, l, a))).collect();
                    masses.push(row?);
                }
                Ok(CylinderTable { alphabet: a, masses })
            }
        }
    }

    /// Metric entropy in nats. Empirical measures are rejected.
    pub fn entropy(&self) -> Result<f64> {
        match self {
            Measure::Markov(m) => Ok(m.entropy()),
            Measure::Convex(c) => Ok(c.entropy()),
            Measure::Empirical(_) => {
                Err(Error::InvalidMeasure("entropy of an empirical measure: use a block-entropy estimate".into()))
            }
            Measure::Pushforward(m) => m.entropy(),
            Measure::PowerAverage(p) => Ok(p.inner.entropy()? / p.power.exponent as f64),
            Measure::BlockView(b) => b.entropy(),
        }
    }

    pub fn pushforward(&self) -> Measure {
        Measure::Pushforward(Box::new(self.clone()))
    }
}

/// Truncated weak* distance at cylinder depth `depth` with its exact tail bound.
pub fn wstar_distance(mu: &Measure, nu: &Measure, depth: usize) -> Result<(f64, f64)> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if mu.alphabet() != nu.alphabet() {
        return Err(Error::InvalidArgument("measures over different alphabets".into()));
    }
    Ok(mu.table(depth)?.distance(&nu.table(depth)?))
}

/// Base measure induced by an invariant measure `nu` of the power system.
pub fn decomposition_average(nu: &Measure, power: &PowerSystem, base_alphabet: usize) -> Result<Measure> {
    if nu.alphabet() != power.blocks.len() {
        return Err(Error::InvalidMeasure(format!(
            "measure over {} symbols, power system has {} blocks",
            nu.alphabet(),
            power.blocks.len()
        )));
    }
    if power.exponent == 1 {
        if let Measure::Markov(_) | Measure::Convex(_) = nu {
            if power.blocks.iter().enumerate().all(|(i, b)| b == &vec![i as u8]) {
                return Ok(nu.clone());
            }
        }
    }
    Ok(Measure::PowerAverage(Box::new(PowerAverage { power: power.clone(), base_alphabet, inner: nu.clone() })))
}

/// `sum_n w_n Parry(X_n)` with `w_n = 2^-n` for all but the last level,
/// which takes the remaining tail mass.
pub fn full_support_measure(levels: &[ShiftSystem]) -> Result<ConvexCombination> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    let n = levels.len();
    let mut comps = Vec::with_capacity(n);
    for (i, sys) in levels.iter().enumerate() {
        let w = if i + 1 < n { 0.5f64.powi(i as i32 + 1) } else { 0.5f64.powi(n as i32 - 1) };
        comps.push(Component { weight: w, measure: MarkovMeasure::parry(sys)?, level: i + 1 });
    }
    ConvexCombination::new(comps)
}

/// Parses `"p/q"`, a decimal string, or a JSON number.
pub fn parse_number(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::InvalidMeasure("bad number".into())),
        Value::String(s) => {
            let s = s.trim();
            if let Some((p, q)) = s.split_once('/') {
                let p: f64 = p.trim().parse().map_err(|_| Error::InvalidMeasure(format!("bad rational {s:?}")))?;
                let q: f64 = q.trim().parse().map_err(|_| Error::InvalidMeasure(format!("bad rational {s:?}")))?;
                if q == 0.0 {
                    return Err(Error::InvalidMeasure(format!("zero denominator in {s:?}")));
                }
                Ok(p / q)
            } else {
                s.parse().map_err(|_| Error::InvalidMeasure(format!("bad number {s:?}")))
            }
        }
        _ => Err(Error::InvalidMeasure(format!("expected a number, found {v}"))),
    }
}

fn numbers(v: Option<&Value>, what: &str) -> Result<Vec<f64>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidMeasure(format!("missing array {what:?}")))?
        .iter()
        .map(parse_number)
        .collect()
}

fn matrix(v: Option<&Value>, what: &str) -> Result<Vec<Vec<f64>>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidMeasure(format!("missing matrix {what:?}")))?
        .iter()
        .map(|r| numbers(Some(r), what))
        .collect()
}

/// Markov-type measure from its JSON description. Accepted types:
/// `markov` (`P`, optional `pi`), `bernoulli` (`p`), `parry` (`system`),
/// `periodic` (`alphabet_size`, `word`).
pub fn markov_from_json(v: &Value) -> Result<MarkovMeasure> {
    let ty = v.get("type").and_then(Value::as_str).unwrap_or("");
    match ty {
        "markov" => {
            let p = matrix(v.get("P"), "P")?;
            match v.get("pi") {
                Some(pi) => MarkovMeasure::with_stationary(p, numbers(Some(pi), "pi")?),
                None => MarkovMeasure::new(p),
            }
        }
        "bernoulli" => MarkovMeasure::bernoulli(&numbers(v.get("p"), "p")?),
        "parry" => {
            let f: SystemFile = serde_json::from_value(
                v.get("system").cloned().ok_or_else(|| Error::InvalidMeasure("parry needs \"system\"".into()))?,
            )?;
            MarkovMeasure::parry(&ShiftSystem::try_from(f)?)
        }
        "periodic" => {
            let a = v.get("alphabet_size").and_then(Value::as_u64).unwrap_or(2) as usize;
            let w = v.get("word").and_then(Value::as_str).unwrap_or("");
            MarkovMeasure::periodic_orbit(a, &crate::shift::Word::parse(w)?.0)
        }
        other => Err(Error::InvalidMeasure(format!("unknown measure type {other:?}"))),
    }
}

/// Any measure file: the Markov types above or
/// `{"type": "convex", "components": [{"weight", "level", "measure"}]}`.
pub fn measure_from_json(v: &Value) -> Result<ConvexCombination> {
    if v.get("type").and_then(Value::as_str) == Some("convex") {
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidMeasure("convex needs \"components\"".into()))?;
        let mut out = Vec::new();
        for c in comps {
            let weight = parse_number(c.get("weight").unwrap_or(&Value::Null))?;
            let level = c.get("level").and_then(Value::as_u64).unwrap_or(1) as usize;
            let inner = measure_from_json(c.get("measure").unwrap_or(&Value::Null))?;
            for ic in inner.components {
                out.push(Component { weight: weight * ic.weight, measure: ic.measure, level: level.max(ic.level) });
            }
        }
        ConvexCombination::new(out)
    } else {
        let level = v.get("level").and_then(Value::as_u64).unwrap_or(1) as usize;
        Ok(ConvexCombination::single(markov_from_json(v)?, level))
    }
}

pub fn load_measure(path: &Path) -> Result<ConvexCombination> {
    let text = std::fs::read_to_string(path)?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })?;
    measure_from_json(&v).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })
}

pub fn markov_to_json(m: &MarkovMeasure) -> Value {
    json!({
        "type": "markov",
        "order": m.order,
        "alphabet_size": m.alphabet,
        "P": m.next,
        "pi": m.pi,
    })
}

pub fn convex_to_json(c: &ConvexCombination) -> Value {
    json!({
        "type": "convex",
        "components": c.components.iter().map(|x| json!({
            "weight": x.weight,
            "level": x.level,
            "measure": markov_to_json(&x.measure),
        })).collect::<Vec<_>>(),
    })
}
