//! One-sided subshifts of finite type and their topological toolkit.
//!
//! Points are symbol streams; the metric is the cylinder metric
//! `d(x, y) = 2^-min{i : x_i != y_i}`. All predicates on balls and
//! separation reduce to coordinate agreement and are evaluated exactly.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, BoolMatrix};

/// A subshift of finite type given by a 0/1 transition matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile", into = "SystemFile")]
pub struct ShiftSystem {
    label: String,
    transitions: BoolMatrix,
}

/// On-disk form: `{"label", "alphabet_size", "transitions": [[0|1]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub label: String,
    pub alphabet_size: usize,
    pub transitions: Vec<Vec<u8>>,
}

impl TryFrom<SystemFile> for ShiftSystem {
    type Error = Error;
    fn try_from(f: SystemFile) -> Result<Self> {
        if f.transitions.len() != f.alphabet_size {
            return Err(Error::InvalidSystem(format!("alphabet_size {} but {} rows", f.alphabet_size, f.transitions.len())));
        }
        let mut rows = Vec::with_capacity(f.alphabet_size);
        for (i, row) in f.transitions.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => r.push(false),
                    1 => r.push(true),
                    _ => return Err(Error::InvalidSystem(format!("entry ({i},{j}) is {v}, expected 0 or 1"))),
                }
            }
            rows.push(r);
        }
        ShiftSystem::new(f.label, rows)
    }
}

impl From<ShiftSystem> for SystemFile {
    fn from(s: ShiftSystem) -> Self {
        SystemFile {
            label: s.label,
            alphabet_size: s.transitions.len(),
            transitions: s.transitions.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect(),
        }
    }
}

impl ShiftSystem {
    /// Validates: square matrix, alphabet of at least two symbols, no
    /// stranded symbol (every row and column has a 1).
    pub fn new(label: impl Into<String>, transitions: BoolMatrix) -> Result<Self> {
        let n = transitions.len();
        if n < 2 {
            return Err(Error::InvalidSystem(format!("alphabet size {n}: the space must have at least two points")));
        }
        Self::checked(label.into(), transitions, false)
    }

    /// Block systems of a power map may legitimately have a single symbol,
    /// and a lower level of a block family may leave blocks unused (zero row
    /// and zero column). Unused symbols are ignored by every analysis.
    pub(crate) fn new_block(label: impl Into<String>, transitions: BoolMatrix) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::InvalidSystem("empty block alphabet".into()));
        }
        let s = Self::checked(label.into(), transitions, true)?;
        if s.used_symbols().is_empty() {
            return Err(Error::InvalidSystem("no usable block".into()));
        }
        Ok(s)
    }

    fn checked(label: String, transitions: BoolMatrix, allow_unused: bool) -> Result<Self> {
        let n = transitions.len();
        if n > 255 {
            return Err(Error::InvalidSystem("alphabet larger than 255".into()));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSystem(format!("row {i} has length {}", row.len())));
            }
        }
        for i in 0..n {
            let out = transitions[i].iter().any(|&b| b);
            let inc = transitions.iter().any(|r| r[i]);
            if allow_unused && !out && !inc {
                continue;
            }
            if !out {
                return Err(Error::InvalidSystem(format!("symbol {i} has no successor")));
            }
            if !inc {
                return Err(Error::InvalidSystem(format!("symbol {i} has no predecessor")));
            }
        }
        Ok(ShiftSystem { label, transitions })
    }

    pub fn is_used(&self, s: u8) -> bool {
        (s as usize) < self.alphabet_size() && self.transitions[s as usize].iter().any(|&b| b)
    }

    pub fn used_symbols(&self) -> Vec<u8> {
        (0..self.alphabet_size() as u8).filter(|&s| self.is_used(s)).collect()
    }

    pub fn from_rows(label: &str, rows: &[&[u8]]) -> Result<Self> {
        Self::new(label, rows.iter().map(|r| r.iter().map(|&x| x != 0).collect()).collect())
    }

    pub fn full_shift(k: usize) -> Result<Self> {
        Self::new(format!("full-{k}"), vec![vec![true; k]; k])
    }

    pub fn golden_mean() -> Self {
        Self::from_rows("golden-mean", &[&[1, 1], &[1, 0]]).expect("valid")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphabet_size(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &BoolMatrix {
        &self.transitions
    }

    #[inline]
    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.transitions[a as usize][b as usize]
    }

    /// Index of the first forbidden transition, if any.
    pub fn first_violation(&self, w: &[u8]) -> Option<usize> {
        if let Some(i) = w.iter().position(|&s| !self.is_used(s)) {
            return Some(i);
        }
        w.windows(2).position(|p| !self.allows(p[0], p[1]))
    }

    pub fn is_admissible(&self, w: &[u8]) -> bool {
        self.first_violation(w).is_none()
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Vec<u8>> {
        let a = self.alphabet_size() as u8;
        let mut out: Vec<Vec<u8>> =
            if n == 0 { vec![vec![]] } else { (0..a).filter(|&s| self.is_used(s)).map(|s| vec![s]).collect() };
        for _ in 1..n {
            let mut next = Vec::with_capacity(out.len() * 2);
            for w in &out {
                let last = *w.last().unwrap();
                for s in 0..a {
                    if self.allows(last, s) {
                        let mut v = w.clone();
                        v.push(s);
                        next.push(v);
                    }
                }
            }
            out = next;
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.alphabet_size();
        let used = self.used_symbols();
        let start = used[0] as usize;
        let reach = |forward: bool| -> bool {
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut q = VecDeque::from([start]);
            while let Some(u) = q.pop_front() {
                for v in 0..n {
                    let e = if forward { self.transitions[u][v] } else { self.transitions[v][u] };
                    if e && !seen[v] {
                        seen[v] = true;
                        q.push_back(v);
                    }
                }
            }
            used.iter().all(|&s| seen[s as usize])
        };
        reach(true) && reach(false)
    }

    /// Least `N` with `A^N` entrywise positive, or `None` if the system is
    /// irreducible but not mixing.
    pub fn primitivity_index(&self) -> Result<Option<usize>> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let used = self.used_symbols();
        let n = used.len();
        let bound = (n - 1) * (n - 1) + 1;
        let mut p = self.transitions.clone();
        for k in 1..=bound {
            if used.iter().all(|&i| used.iter().all(|&j| p[i as usize][j as usize])) {
                return Ok(Some(k));
            }
            p = linalg::bool_mul(&p, &self.transitions);
        }
        Ok(None)
    }

    pub fn is_mixing(&self) -> bool {
        matches!(self.primitivity_index(), Ok(Some(_)))
    }

    /// Period of an irreducible system: gcd of cycle lengths.
    pub fn period(&self) -> Result<usize> {
        Ok(self.cyclic_labels()?.0)
    }

    fn cyclic_labels(&self) -> Result<(usize, Vec<usize>)> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let n = self.alphabet_size();
        let start = self.used_symbols()[0] as usize;
        let mut depth = vec![usize::MAX; n];
        depth[start] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            for v in 0..n {
                if self.transitions[u][v] && depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    q.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..n {
            for v in 0..n {
                if self.transitions[u][v] {
                    let diff = (depth[u] + 1).abs_diff(depth[v]);
                    g = gcd(g, diff);
                }
            }
        }
        let g = g.max(1);
        Ok((g, depth.into_iter().map(|d| if d == usize::MAX { usize::MAX } else { d % g }).collect()))
    }

    /// Cyclic classes `D_0, ..., D_{k-1}` with `D_0` containing the first
    /// used symbol, and a shortest periodic word through it.
    pub fn periodic_decomposition(&self) -> Result<PeriodicDecomposition> {
        let (period, labels) = self.cyclic_labels()?;
        let mut classes = vec![Vec::new(); period];
        for (s, &c) in labels.iter().enumerate() {
            if c != usize::MAX {
                classes[c].push(s as u8);
            }
        }
        let base_periodic_point = self.shortest_cycle(classes[0][0]);
        Ok(PeriodicDecomposition { period, classes, base_periodic_point })
    }

    /// Shortest cycle through `s`, as the word `s ... ` (without repeating s).
    fn shortest_cycle(&self, s: u8) -> Vec<u8> {
        let n = self.alphabet_size();
        let mut prev = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        for v in 0..n {
            if self.transitions[s as usize][v] {
                if v == s as usize {
                    return vec![s];
                }
                if prev[v] == usize::MAX {
                    prev[v] = s as usize;
                    q.push_back(v);
                }
            }
        }
        while let Some(u) = q.pop_front() {
            if self.transitions[u][s as usize] {
                let mut path = vec![u as u8];
                let mut cur = u;
                while prev[cur] != s as usize {
                    cur = prev[cur];
                    path.push(cur as u8);
                }
                path.push(s);
                path.reverse();
                return path;
            }
            for v in 0..n {
                if self.transitions[u][v] && prev[v] == usize::MAX && v != s as usize {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        Vec::new()
    }

    /// Specification gap for exact tracing on prescribed windows: the
    /// primitivity index, independent of `epsilon`.
    pub fn specification_gap(&self, _epsilon: f64) -> Result<usize> {
        match self.primitivity_index()? {
            Some(n) => Ok(n),
            None => Err(Error::NotMixing(self.period()?)),
        }
    }

    /// Gap needed between a window traced at scale `epsilon` (which pins
    /// `m(epsilon)` coordinates) and the next window.
    pub fn tracing_gap(&self, epsilon: f64) -> Result<usize> {
        Ok(self.specification_gap(epsilon)? + m_of_eps(epsilon) - 1)
    }

    /// Lexicographically smallest word `c` of length `gap - 1` with
    /// `from c to` admissible.
    pub fn connector(&self, from: u8, to: u8, gap: usize) -> Option<Vec<u8>> {
        if gap == 0 {
            return None;
        }
        let n = self.alphabet_size();
        // can[i][s]: from s one reaches `to` in exactly i steps
        let mut can = vec![vec![false; n]; gap];
        can[0][to as usize] = true;
        for i in 1..gap {
            for s in 0..n {
                can[i][s] = (0..n).any(|t| self.transitions[s][t] && can[i - 1][t]);
            }
        }
        let mut cur = from as usize;
        let mut out = Vec::with_capacity(gap - 1);
        for remaining in (1..gap).rev() {
            let next = (0..n).find(|&t| self.transitions[cur][t] && can[remaining][t])?;
            let _ = remaining;
            out.push(next as u8);
            cur = next;
        }
        if self.transitions[cur][to as usize] {
            Some(out)
        } else {
            None
        }
    }

    /// Concatenates segments with `gap - 1` connector symbols between
    /// consecutive ones, so segment `i+1` starts exactly `gap` after the
    /// last index of segment `i`.
    pub fn glue_segments(&self, segments: &[Word], gap: usize) -> Result<Word> {
        let n = self.specification_gap(0.0)?;
        if gap < n {
            return Err(Error::InvalidArgument(format!("gap {gap} below primitivity index {n}")));
        }
        let mut out: Vec<u8> = Vec::new();
        for (i, seg) in segments.iter().enumerate() {
            if let Some(p) = self.first_violation(&seg.0) {
                return Err(Error::NotAdmissible(p));
            }
            if seg.0.is_empty() {
                return Err(Error::InvalidArgument(format!("segment {i} is empty")));
            }
            if let Some(&last) = out.last() {
                let c = self.connector(last, seg.0[0], gap).ok_or_else(|| Error::InvalidSystem("no connecting path".into()))?;
                out.extend(c);
            }
            out.extend_from_slice(&seg.0);
        }
        Ok(Word(out))
    }

    /// Traces a `delta`-pseudo-orbit (`delta <= 1/4`) given as finite
    /// prefixes of its points: the tracing stream takes coordinate 0 of
    /// each entry.
    pub fn shadow_pseudo_orbit(&self, pseudo_orbit: &[Vec<u8>], delta: f64) -> Result<Word> {
        if !(delta > 0.0 && delta <= 0.25) {
            return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1/4]")));
        }
        for (i, p) in pseudo_orbit.iter().enumerate() {
            if p.len() < 2 {
                return Err(Error::InvalidArgument(format!("pseudo-orbit entry {i} shorter than 2")));
            }
        }
        for i in 0..pseudo_orbit.len().saturating_sub(1) {
            let d = prefix_distance(&pseudo_orbit[i][1..], &pseudo_orbit[i + 1]);
            if d >= delta {
                return Err(Error::PseudoOrbitGap { index: i, distance: d });
            }
        }
        let y: Vec<u8> = pseudo_orbit.iter().map(|p| p[0]).collect();
        if let Some(p) = self.first_violation(&y) {
            return Err(Error::NotAdmissible(p));
        }
        Ok(Word(y))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `m` with `2^-m <= epsilon`.
pub fn m_of_eps(epsilon: f64) -> usize {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut m = 0usize;
    while 0.5f64.powi(m as i32) > epsilon {
        m += 1;
    }
    m
}

/// Cylinder distance between two points known through finite prefixes.
/// If the prefixes agree on their common length `l`, returns the upper
/// bound `2^-l`.
pub fn prefix_distance(x: &[u8], y: &[u8]) -> f64 {
    let l = x.len().min(y.len());
    match (0..l).find(|&i| x[i] != y[i]) {
        Some(i) => 0.5f64.powi(i as i32),
        None => 0.5f64.powi(l as i32),
    }
}

/// `d_n(x, y) <= epsilon`, which holds iff the streams agree on
/// coordinates `0..n + m(epsilon) - 1`.
pub fn bowen_close(x: &[u8], y: &[u8], n: usize, epsilon: f64) -> bool {
    if epsilon >= 1.0 {
        return true;
    }
    let need = n + m_of_eps(epsilon) - 1;
    x.len() >= need && y.len() >= need && x[..need] == y[..need]
}

/// `(n, epsilon)`-separation: `d_n(x, y) > epsilon`. With `epsilon = 1/2`
/// this is "differ somewhere in `0..n`".
pub fn separated(x: &[u8], y: &[u8], n: usize, epsilon: f64) -> bool {
    if epsilon >= 1.0 {
        return false;
    }
    // d(f^i x, f^i y) > eps iff x, y differ somewhere in i..i + m(eps) - 1
    let span = (n + m_of_eps(epsilon) - 1).min(x.len()).min(y.len());
    (0..span).any(|i| x[i] != y[i])
}

/// A finite word over the alphabet `0..alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    /// Parses digits/letters (base 36).
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| c.to_digit(36).map(|d| d as u8).ok_or_else(|| Error::InvalidArgument(format!("bad symbol {c:?}"))))
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", std::char::from_digit(s as u32, 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

impl From<&[u8]> for Word {
    fn from(s: &[u8]) -> Self {
        Word(s.to_vec())
    }
}

/// Cyclic classes of an irreducible system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicDecomposition {
    pub period: usize,
    pub classes: Vec<Vec<u8>>,
    /// A periodic word through a symbol of `D_0`.
    pub base_periodic_point: Vec<u8>,
}

impl PeriodicDecomposition {
    pub fn class_of(&self, s: u8) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&s))
    }

    /// Trivial single-class decomposition used to take plain powers.
    pub fn trivial(system: &ShiftSystem) -> Self {
        PeriodicDecomposition {
            period: 1,
            classes: vec![system.used_symbols()],
            base_periodic_point: system.shortest_cycle(system.used_symbols()[0]),
        }
    }
}

/// The `k`-th power restricted to one cyclic class, recoded on blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSystem {
    pub exponent: usize,
    /// Block symbol `b` stands for the base word `blocks[b]`.
    pub blocks: Vec<Vec<u8>>,
    pub block_system: ShiftSystem,
}

impl PowerSystem {
    /// Power system on blocks of length `k` whose first symbol lies in
    /// `start`.
    pub fn build(base: &ShiftSystem, k: usize, start: &[u8]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("exponent must be positive".into()));
        }
        let blocks: Vec<Vec<u8>> = base.words(k).into_iter().filter(|w| start.contains(&w[0])).collect();
        let all = vec![true; blocks.len()];
        let (transitions, keep) = block_graph(base, &blocks, &all);
        let idx: Vec<usize> = (0..blocks.len()).filter(|&i| keep[i]).collect();
        let blocks: Vec<Vec<u8>> = idx.iter().map(|&i| blocks[i].clone()).collect();
        let t: BoolMatrix = idx.iter().map(|&i| idx.iter().map(|&j| transitions[i][j]).collect()).collect();
        let block_system = ShiftSystem::new_block(format!("{}^{k}", base.label()), t)?;
        Ok(PowerSystem { exponent: k, blocks, block_system })
    }

    /// Power system over a fixed block alphabet (all of length `k`). Blocks
    /// that are not admissible in `base`, do not start in `start`, or
    /// cannot be continued both ways stay in the alphabet as unused symbols
    /// so that nested levels share one block coding.
    pub fn on_blocks(base: &ShiftSystem, k: usize, blocks: Vec<Vec<u8>>, start: &[u8]) -> Result<Self> {
        if k == 0 || blocks.iter().any(|b| b.len() != k) {
            return Err(Error::InvalidArgument(format!("blocks must all have length {k}")));
        }
        let admissible: Vec<bool> = blocks.iter().map(|b| start.contains(&b[0]) && base.is_admissible(b)).collect();
        let (t, keep) = block_graph(base, &blocks, &admissible);
        let n = blocks.len();
        let t: BoolMatrix = (0..n).map(|i| (0..n).map(|j| keep[i] && keep[j] && t[i][j]).collect()).collect();
        let block_system = ShiftSystem::new_block(format!("{}^{k}", base.label()), t)?;
        Ok(PowerSystem { exponent: k, blocks, block_system })
    }

    /// Restriction of `f^k` to the class `D_0` of a periodic decomposition.
    pub fn restrict(base: &ShiftSystem, decomposition: &PeriodicDecomposition) -> Result<Self> {
        Self::build(base, decomposition.period, &decomposition.classes[0])
    }

    /// Base word for a block word.
    pub fn decode(&self, block_word: &[u8]) -> Vec<u8> {
        block_word.iter().flat_map(|&b| self.blocks[b as usize].iter().copied()).collect()
    }

    /// Block word for a base word whose length is a multiple of `k`.
    pub fn encode(&self, base_word: &[u8]) -> Option<Vec<u8>> {
        if !base_word.len().is_multiple_of(self.exponent) {
            return None;
        }
        base_word.chunks(self.exponent).map(|c| self.blocks.iter().position(|b| b == c).map(|p| p as u8)).collect()
    }
}

/// Block transition graph and the blocks that survive iterated pruning of
/// symbols without successors or predecessors (a bi-infinite orbit never
/// visits those).
fn block_graph(base: &ShiftSystem, blocks: &[Vec<u8>], candidate: &[bool]) -> (BoolMatrix, Vec<bool>) {
    let n = blocks.len();
    let t: BoolMatrix = (0..n).map(|i| (0..n).map(|j| base.allows(*blocks[i].last().unwrap(), blocks[j][0])).collect()).collect();
    let mut keep = candidate.to_vec();
    loop {
        let mut changed = false;
        for i in 0..n {
            if keep[i] {
                let out = (0..n).any(|j| keep[j] && t[i][j]);
                let inc = (0..n).any(|j| keep[j] && t[j][i]);
                if !out || !inc {
                    keep[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (t, keep)
}

impl ShiftSystem {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}
