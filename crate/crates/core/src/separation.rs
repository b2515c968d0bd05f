//! Word counting, typical-word sets and entropy estimates.
//!
//! At the separation scale 1/2 of the cylinder metric, distinct words of
//! length `n` are `(n, 1/2)`-separated, so separated sets are just word sets
//! and their sizes are integers.
//!
//! A word's depth-2 empirical statistics are fixed by its pair-count
//! matrix `F` and its last symbol, so typical sets are unions of type
//! classes `{w : pair counts of w = F, w_0 = u}`. Class sizes are exact:
//! by the BEST theorem the number of words is
//! `t_u(G') * prod_w (d'_w - 1)! / prod_ij F_ij!`, where `G'` is the
//! multigraph `F` plus one closing edge `last -> first`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::measure::{truncation_bound, wstar_distance, ConvexCombination, CylinderTable, MarkovMeasure, Measure};
use crate::shift::ShiftSystem;

/// Separation scale of the cylinder metric.
pub const EPS_STAR: f64 = 0.5;

/// Exact number of admissible words of length `n`.
pub fn count_words(system: &ShiftSystem, n: usize) -> BigUint {
    match n {
        0 => BigUint::one(),
        1 => BigUint::from(system.used_symbols().len()),
        _ => linalg::count_paths(system.transitions(), n - 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    WordCount,
    SeparatedSet,
    BlockFrequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub n: usize,
    pub method: EstimateMethod,
    pub error_note: String,
}

/// `(1/n) log #{admissible words of length n}`.
pub fn estimate_entropy_word_count(system: &ShiftSystem, n: usize) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let c = count_words(system, n);
    Ok(EntropyEstimate {
        value: linalg::big_ln(&c) / n as f64,
        n,
        method: EstimateMethod::WordCount,
        error_note: "upper estimate; n * value is subadditive and value decreases to h_top at rate O(1/n)".into(),
    })
}

/// Conditional block entropy `H_l - H_{l-1}` of a word's empirical measure.
pub fn block_entropy_estimate(word: &[u8], alphabet: usize, l: usize) -> EntropyEstimate {
    let h = |len: usize| -> f64 {
        if len == 0 || word.len() < len {
            return 0.0;
        }
        let mut counts: HashMap<&[u8], usize> = HashMap::new();
        for w in word.windows(len) {
            *counts.entry(w).or_default() += 1;
        }
        let total = (word.len() - len + 1) as f64;
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                -p * p.ln()
            })
            .sum()
    };
    let _ = alphabet;
    EntropyEstimate {
        value: (h(l) - h(l - 1)).max(0.0),
        n: word.len(),
        method: EstimateMethod::BlockFrequency,
        error_note: format!("block length {l}; biased low when the word is short compared to alphabet^{l}"),
    }
}

// ---------------------------------------------------------------------------
// exact class sizes

fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

fn legendre(mut n: u64, p: u64) -> i64 {
    let mut e = 0;
    while n > 0 {
        n /= p;
        e += n as i64;
    }
    e
}

fn product_tree(mut xs: Vec<BigUint>) -> BigUint {
    if xs.is_empty() {
        return BigUint::one();
    }
    while xs.len() > 1 {
        let mut next = Vec::with_capacity(xs.len().div_ceil(2));
        let mut it = xs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        xs = next;
    }
    xs.pop().unwrap()
}

/// Number of words with pair-count matrix `f` (dense `a x a`) that start
/// at `u` and end at `v`, with its natural log.
pub fn class_size(f: &[Vec<u64>], u: usize, v: usize) -> (BigUint, f64) {
    let a = f.len();
    let mut g: Vec<Vec<u64>> = f.to_vec();
    g[v][u] += 1;
    let out: Vec<u64> = g.iter().map(|r| r.iter().sum()).collect();
    let inn: Vec<u64> = (0..a).map(|j| g.iter().map(|r| r[j]).sum()).collect();
    if out != inn {
        return (BigUint::zero(), f64::NEG_INFINITY);
    }
    let active: Vec<usize> = (0..a).filter(|&w| out[w] > 0).collect();
    // Laplacian minor at root u
    let others: Vec<usize> = active.iter().copied().filter(|&w| w != u).collect();
    let lap: Vec<Vec<BigInt>> = others
        .iter()
        .map(|&i| {
            others
                .iter()
                .map(|&j| {
                    let d = if i == j { out[i] as i64 } else { 0 };
                    BigInt::from(d - g[i][j] as i64)
                })
                .collect()
        })
        .collect();
    let t = linalg::det_bareiss(&lap);
    let Some(mut t) = t.to_biguint().filter(|x| !x.is_zero()) else {
        return (BigUint::zero(), f64::NEG_INFINITY);
    };
    let maxd = out.iter().copied().max().unwrap_or(0) as usize;
    let mut factors = Vec::new();
    let mut ln = 0.0;
    for p in primes_up_to(maxd) {
        let mut e: i64 = active.iter().map(|&w| legendre(out[w] - 1, p)).sum();
        for row in f {
            for &x in row {
                if x >= p {
                    e -= legendre(x, p);
                }
            }
        }
        if e > 0 {
            factors.push(BigUint::from(p).pow(e as u32));
            ln += e as f64 * (p as f64).ln();
        } else if e < 0 {
            let pp = BigUint::from(p).pow((-e) as u32);
            debug_assert!((&t % &pp).is_zero(), "non-integral class size");
            t /= pp;
        }
    }
    ln += linalg::big_ln(&t);
    factors.push(t);
    (product_tree(factors), ln)
}

// ---------------------------------------------------------------------------
// typical words

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalMode {
    Enumerate,
    Sample,
}

/// One type class: all words of length `n` with pair counts `counts`
/// (dense `a x a`) starting at `first` and ending at `last`.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeClass {
    pub first: u8,
    pub last: u8,
    pub counts: Vec<Vec<u64>>,
    pub size: BigUint,
    pub ln_size: f64,
}

/// Depth-2 statistics used by the membership predicate.
#[derive(Clone, Debug)]
struct Predicate {
    alphabet: usize,
    target: CylinderTable,
    zeta: f64,
    /// `allowed[i][j]`: admissible and charged by the target
    allowed: Vec<Vec<bool>>,
}

impl Predicate {
    fn new(system: &ShiftSystem, target: &Measure, zeta: f64) -> Result<Self> {
        let a = system.alphabet_size();
        if target.alphabet() != a {
            return Err(Error::InvalidArgument("target and system alphabets differ".into()));
        }
        if !(zeta > 0.0) {
            return Err(Error::InvalidArgument("zeta must be positive".into()));
        }
        let target = target.table(2)?;
        let allowed = (0..a)
            .map(|i| (0..a).map(|j| system.allows(i as u8, j as u8) && target.masses[1][i * a + j] > 0.0).collect())
            .collect();
        Ok(Predicate { alphabet: a, target, zeta, allowed })
    }

    /// Certified upper bound on the weak* distance between the empirical
    /// measure of any word with these statistics and the target.
    fn distance_bound(&self, f: &[Vec<u64>], last: usize, n: usize) -> f64 {
        let a = self.alphabet;
        let mut value = 0.0;
        for s in 0..a {
            let c = f[s].iter().sum::<u64>() + (s == last) as u64;
            value += 0.5f64.powi(s as i32 + 1) * (c as f64 / n as f64 - self.target.masses[0][s]).abs();
        }
        if n >= 2 {
            for i in 0..a {
                for j in 0..a {
                    let k = a + i * a + j + 1;
                    let m = f[i][j] as f64 / (n - 1) as f64;
                    value += 0.5f64.powi(k as i32) * (m - self.target.masses[1][i * a + j]).abs();
                }
            }
            value + truncation_bound(2, a)
        } else {
            value + truncation_bound(1, a)
        }
    }

    fn passes(&self, f: &[Vec<u64>], last: usize, n: usize) -> bool {
        self.distance_bound(f, last, n) <= self.zeta
    }
}

fn first_of(f: &[Vec<u64>], last: usize) -> Option<usize> {
    let a = f.len();
    let mut first = None;
    for i in 0..a {
        let net = f[i].iter().sum::<u64>() as i64 - (0..a).map(|j| f[j][i]).sum::<u64>() as i64 + (i == last) as i64;
        match net {
            0 => {}
            1 if first.is_none() => first = Some(i),
            _ => return None,
        }
    }
    Some(first.unwrap_or(last))
}

/// A typical-word set: the union of its type classes.
#[derive(Clone, Debug)]
pub struct TypicalWordSet {
    pub n: usize,
    pub zeta: f64,
    pub mode: TypicalMode,
    pub classes: Vec<TypeClass>,
    pub exact_count: BigUint,
    /// False when the enumeration budget ran out.
    pub certified: bool,
    /// Materialized members (enumerate mode, small sets only).
    pub words: Vec<Vec<u8>>,
    predicate: Predicate,
    cumulative: Vec<f64>,
}

impl TypicalWordSet {
    fn from_classes(n: usize, mode: TypicalMode, predicate: Predicate, mut classes: Vec<TypeClass>, certified: bool) -> Self {
        classes.sort_by(|x, y| (x.first, x.last, &x.counts).cmp(&(y.first, y.last, &y.counts)));
        let exact_count = classes.iter().map(|c| &c.size).sum();
        let mx = classes.iter().map(|c| c.ln_size).fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        let cumulative = classes
            .iter()
            .map(|c| {
                acc += (c.ln_size - mx).exp();
                acc
            })
            .collect();
        TypicalWordSet {
            n,
            zeta: predicate.zeta,
            mode,
            classes,
            exact_count,
            certified,
            words: Vec::new(),
            predicate,
            cumulative,
        }
    }

    pub fn log_count(&self) -> f64 {
        linalg::big_ln(&self.exact_count)
    }

    pub fn is_empty(&self) -> bool {
        self.exact_count.is_zero()
    }

    /// Certified distance bound for an arbitrary word, or `None` if it
    /// uses a pair outside the target's support.
    pub fn distance_bound(&self, word: &[u8]) -> Option<f64> {
        let a = self.predicate.alphabet;
        let mut f = vec![vec![0u64; a]; a];
        for p in word.windows(2) {
            let (i, j) = (p[0] as usize, p[1] as usize);
            if i >= a || j >= a || !self.predicate.allowed[i][j] {
                return None;
            }
            f[i][j] += 1;
        }
        Some(self.predicate.distance_bound(&f, *word.last()? as usize, word.len()))
    }

    /// Membership: right length, supported transitions, predicate passes.
    pub fn contains(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.distance_bound(word).is_some_and(|d| d <= self.zeta)
    }

    /// Uniform draw from the union of classes.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<Vec<u8>> {
        let total = *self.cumulative.last()?;
        let x = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x).min(self.classes.len() - 1);
        Some(sample_class(&self.classes[i], self.n, rng))
    }
}

/// Uniform word from one type class: Wilson's algorithm draws the tree of
/// last exits toward the final symbol, then out-edges are shuffled.
pub fn sample_class<R: Rng>(class: &TypeClass, n: usize, rng: &mut R) -> Vec<u8> {
    let f = &class.counts;
    let a = f.len();
    let (u, v) = (class.first as usize, class.last as usize);
    let out: Vec<u64> = f.iter().map(|r| r.iter().sum()).collect();
    let active: Vec<usize> = (0..a).filter(|&w| out[w] > 0 || w == v).collect();
    let step = |w: usize, rng: &mut R| -> usize {
        let mut x = rng.gen_range(0..out[w]);
        for j in 0..a {
            if x < f[w][j] {
                return j;
            }
            x -= f[w][j];
        }
        unreachable!()
    };
    let mut in_tree = vec![false; a];
    let mut next = vec![usize::MAX; a];
    in_tree[v] = true;
    for &w in &active {
        let mut cur = w;
        while !in_tree[cur] {
            next[cur] = step(cur, rng);
            cur = next[cur];
        }
        let mut cur = w;
        while !in_tree[cur] {
            in_tree[cur] = true;
            cur = next[cur];
        }
    }
    let mut queues: Vec<Vec<u8>> = vec![Vec::new(); a];
    for &w in &active {
        let mut q: Vec<u8> = Vec::with_capacity(out[w] as usize);
        for j in 0..a {
            let mut c = f[w][j];
            if w != v && j == next[w] {
                c -= 1;
            }
            q.extend(std::iter::repeat_n(j as u8, c as usize));
        }
        q.shuffle(rng);
        if w != v {
            q.push(next[w] as u8);
        }
        q.reverse(); // pop from the back
        queues[w] = q;
    }
    let mut word = Vec::with_capacity(n);
    let mut cur = u;
    word.push(u as u8);
    while word.len() < n {
        let s = queues[cur].pop().expect("class counts are consistent");
        word.push(s);
        cur = s as usize;
    }
    word
}

/// Incremental DP over `(last symbol, pair counts)`, one symbol per step.
pub struct ClassDp {
    predicate: Predicate,
    n: usize,
    states: HashMap<(u8, Vec<u64>), BigUint>,
    budget: usize,
    exhausted: bool,
}

impl ClassDp {
    fn new(system: &ShiftSystem, target: &Measure, zeta: f64, budget: usize) -> Result<Self> {
        let predicate = Predicate::new(system, target, zeta)?;
        let a = predicate.alphabet;
        let t = predicate.target.clone();
        let states = (0..a).filter(|&s| t.masses[0][s] > 0.0).map(|s| ((s as u8, vec![0u64; a * a]), BigUint::one())).collect();
        Ok(ClassDp { predicate, n: 1, states, budget, exhausted: false })
    }

    fn step(&mut self) {
        let a = self.predicate.alphabet;
        let mut next: HashMap<(u8, Vec<u64>), BigUint> = HashMap::with_capacity(self.states.len() * 2);
        for ((last, f), c) in &self.states {
            for j in 0..a {
                if self.predicate.allowed[*last as usize][j] {
                    let mut g = f.clone();
                    g[*last as usize * a + j] += 1;
                    *next.entry((j as u8, g)).or_default() += c;
                }
            }
        }
        self.n += 1;
        if next.len() > self.budget {
            self.exhausted = true;
        }
        self.states = next;
    }

    fn snapshot(&self) -> TypicalWordSet {
        let a = self.predicate.alphabet;
        let mut classes = Vec::new();
        for ((last, flat), c) in &self.states {
            let f: Vec<Vec<u64>> = flat.chunks(a).map(|r| r.to_vec()).collect();
            if self.predicate.passes(&f, *last as usize, self.n) {
                let first = first_of(&f, *last as usize).expect("dp states are trails");
                classes.push(TypeClass {
                    first: first as u8,
                    last: *last,
                    counts: f,
                    size: c.clone(),
                    ln_size: linalg::big_ln(c),
                });
            }
        }
        TypicalWordSet::from_classes(self.n, TypicalMode::Enumerate, self.predicate.clone(), classes, !self.exhausted)
    }
}

/// Largest word list materialized in enumerate mode.
pub const MATERIALIZE_LIMIT: usize = 1 << 16;

/// Typical words of length `n`: admissible words using only transitions
/// charged by `target` whose empirical measure is certified within `zeta`.
///
/// Enumerate mode finds every class by dynamic programming (state budget
/// `budget`). Sample mode takes the classes whose pair counts lie within a
/// small box around `(n - 1)` times the target pair masses, examining at
/// most `budget` candidates.
pub fn typical_words(
    system: &ShiftSystem,
    target: &Measure,
    zeta: f64,
    n: usize,
    mode: TypicalMode,
    budget: usize,
) -> Result<TypicalWordSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    match mode {
        TypicalMode::Enumerate => {
            let mut dp = ClassDp::new(system, target, zeta, budget)?;
            while dp.n < n && !dp.exhausted {
                dp.step();
            }
            if dp.n < n {
                let mut s = dp.snapshot();
                s.n = n;
                s.classes.clear();
                s.exact_count = BigUint::zero();
                s.certified = false;
                return Ok(s);
            }
            let mut set = dp.snapshot();
            if set.exact_count <= BigUint::from(MATERIALIZE_LIMIT) {
                set.words = materialize(system, &set);
            }
            Ok(set)
        }
        TypicalMode::Sample => sample_mode(system, target, zeta, n, budget),
    }
}

fn materialize(system: &ShiftSystem, set: &TypicalWordSet) -> Vec<Vec<u8>> {
    let n = set.n;
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u8>> = (0..system.alphabet_size() as u8)
        .filter(|&s| set.predicate.target.masses[0][s as usize] > 0.0)
        .map(|s| vec![s])
        .collect();
    stack.reverse();
    while let Some(w) = stack.pop() {
        if w.len() == n {
            if set.contains(&w) {
                out.push(w);
            }
            continue;
        }
        let last = *w.last().unwrap() as usize;
        for j in (0..system.alphabet_size()).rev() {
            if set.predicate.allowed[last][j] {
                let mut x = w.clone();
                x.push(j as u8);
                stack.push(x);
            }
        }
    }
    out
}

fn sample_mode(system: &ShiftSystem, target: &Measure, zeta: f64, n: usize, budget: usize) -> Result<TypicalWordSet> {
    let predicate = Predicate::new(system, target, zeta)?;
    let a = predicate.alphabet;
    if n == 1 {
        let mut classes = Vec::new();
        for s in 0..a {
            let f = vec![vec![0u64; a]; a];
            if predicate.target.masses[0][s] > 0.0 && predicate.passes(&f, s, 1) {
                classes.push(TypeClass { first: s as u8, last: s as u8, counts: f, size: BigUint::one(), ln_size: 0.0 });
            }
        }
        return Ok(TypicalWordSet::from_classes(1, TypicalMode::Sample, predicate, classes, true));
    }
    let pairs: Vec<(usize, usize)> =
        (0..a).flat_map(|i| (0..a).map(move |j| (i, j))).filter(|&(i, j)| predicate.allowed[i][j]).collect();
    let total_mass: f64 = pairs.iter().map(|&(i, j)| predicate.target.masses[1][i * a + j]).sum();
    let m = (n - 1) as f64;
    let center: Vec<f64> = pairs.iter().map(|&(i, j)| m * predicate.target.masses[1][i * a + j] / total_mass).collect();
    let base: Vec<i64> = center.iter().map(|c| c.round() as i64).collect();
    let p = pairs.len();
    let mut radius = 3i64;
    while radius > 0 && ((2 * radius + 1) as f64).powi(p as i32 - 1) > budget as f64 {
        radius -= 1;
    }
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    let push_candidate = |offs: &[i64], out: &mut Vec<Vec<i64>>| {
        let mut f: Vec<i64> = base.iter().zip(offs).map(|(b, o)| b + o).collect();
        let s: i64 = f[..p - 1].iter().sum();
        f[p - 1] = (n - 1) as i64 - s;
        if f.iter().all(|&x| x >= 0) {
            out.push(f);
        }
    };
    if radius > 0 {
        let mut offs = vec![-radius; p];
        loop {
            push_candidate(&offs, &mut candidates);
            let mut k = 0;
            while k < p - 1 && offs[k] == radius {
                offs[k] = -radius;
                k += 1;
            }
            if k >= p - 1 {
                break;
            }
            offs[k] += 1;
        }
    } else {
        // too many pairs for a full box: deterministic pseudo-random offsets
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..budget {
            let offs: Vec<i64> = (0..p).map(|_| rng.gen_range(-2..=2)).collect();
            if seen.insert(offs.clone()) {
                push_candidate(&offs, &mut candidates);
            }
        }
    }
    let mut classes = Vec::new();
    for fv in candidates {
        let mut f = vec![vec![0u64; a]; a];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            f[i][j] = fv[k] as u64;
        }
        for last in 0..a {
            let Some(first) = first_of(&f, last) else { continue };
            let out_last: u64 = f[last].iter().sum();
            let in_last: u64 = (0..a).map(|i| f[i][last]).sum();
            if out_last + in_last == 0 {
                continue;
            }
            if !predicate.passes(&f, last, n) {
                continue;
            }
            let (size, ln_size) = class_size(&f, first, last);
            if !size.is_zero() {
                classes.push(TypeClass { first: first as u8, last: last as u8, counts: f.clone(), size, ln_size });
            }
        }
    }
    Ok(TypicalWordSet::from_classes(n, TypicalMode::Sample, predicate, classes, true))
}

// ---------------------------------------------------------------------------
// uniform separation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub n: usize,
    /// Decimal string of the exact count.
    pub count: String,
    pub log_count: f64,
    pub margin: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub zeta: f64,
    pub eta: f64,
    pub entropy: f64,
    pub n_star: Option<usize>,
    pub margin: Vec<f64>,
    pub counts: Vec<String>,
    pub rows: Vec<SeparationRow>,
}

/// Largest `n` handled by the enumeration DP in reports.
pub const ENUMERATE_LIMIT: usize = 64;

/// For each `zeta`, exact typical-word counts over `ns` with margins
/// `log |Gamma_n| - n (h - eta)`; `n_star` is the least tested `n` from
/// which every margin is nonnegative.
pub fn certify_uniform_separation(
    system: &ShiftSystem,
    measure: &Measure,
    zetas: &[f64],
    eta: f64,
    ns: &[usize],
) -> Result<Vec<SeparationReport>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument("eta must be positive".into()));
    }
    let h = measure.entropy()?;
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut reports = Vec::new();
    for &zeta in zetas {
        let mut rows = Vec::new();
        let small: Vec<usize> = ns.iter().copied().filter(|&n| n <= ENUMERATE_LIMIT).collect();
        if !small.is_empty() {
            let mut dp = ClassDp::new(system, measure, zeta, usize::MAX)?;
            for &n in &small {
                while dp.n < n {
                    dp.step();
                }
                rows.push(row(&dp.snapshot(), h, eta));
            }
        }
        for &n in ns.iter().filter(|&&n| n > ENUMERATE_LIMIT) {
            rows.push(row(&typical_words(system, measure, zeta, n, TypicalMode::Sample, 20_000)?, h, eta));
        }
        let n_star =
            rows.iter().enumerate().find(|(i, _)| rows[*i..].iter().all(|r| r.margin >= 0.0 && r.certified)).map(|(_, r)| r.n);
        reports.push(SeparationReport {
            zeta,
            eta,
            entropy: h,
            n_star,
            margin: rows.iter().map(|r| r.margin).collect(),
            counts: rows.iter().map(|r| r.count.clone()).collect(),
            rows,
        });
    }
    Ok(reports)
}

fn row(set: &TypicalWordSet, h: f64, eta: f64) -> SeparationRow {
    let lc = set.log_count();
    SeparationRow {
        n: set.n,
        count: set.exact_count.to_string(),
        log_count: lc,
        margin: lc - set.n as f64 * (h - eta),
        certified: set.certified,
    }
}

// ---------------------------------------------------------------------------
// entropy-dense approximation

#[derive(Clone, Debug)]
pub struct DenseApprox {
    pub measure: MarkovMeasure,
    pub distance: f64,
    pub truncation: f64,
    pub entropy: f64,
    pub target_entropy: f64,
    pub method: String,
}

/// Depth at which candidate approximations are compared with the target.
pub const APPROX_DEPTH: usize = 6;

/// An ergodic Markov measure on `system` within `zeta` of `target` with
/// entropy above `h(target) - eta`.
///
/// Candidates, in order: the target itself when it is one irreducible
/// chain; order-`r` Markovizations of the target (same `(r+1)`-cylinder
/// masses, entropy never below the target's); the same chains switched into
/// the Parry chain with probability `rho` on a log grid; single components.
pub fn entropy_dense_approx(system: &ShiftSystem, target: &ConvexCombination, zeta: f64, eta: f64) -> Result<DenseApprox> {
    let h = target.entropy();
    let a = system.alphabet_size();
    if target.alphabet() != a {
        return Err(Error::InvalidArgument("target and system alphabets differ".into()));
    }
    let tm: Measure = target.clone().into();
    let mut best: Option<(f64, f64)> = None;
    let mut check = |m: MarkovMeasure, method: String| -> Result<Option<DenseApprox>> {
        if !m.is_irreducible() || !m.is_supported_in(system) {
            return Ok(None);
        }
        let (d, b) = wstar_distance(&m.clone().into(), &tm, APPROX_DEPTH)?;
        let e = m.entropy();
        let cand = (d + b, h - e);
        best = Some(match best {
            None => cand,
            Some(x) => {
                if cand.0 + cand.1.max(0.0) < x.0 + x.1.max(0.0) {
                    cand
                } else {
                    x
                }
            }
        });
        if d + b < zeta && e > h - eta {
            return Ok(Some(DenseApprox { measure: m, distance: d, truncation: b, entropy: e, target_entropy: h, method }));
        }
        Ok(None)
    };
    if target.components().len() == 1 {
        let m = target.components()[0].measure.clone();
        if let Some(r) = check(m, "identity".into())? {
            return Ok(r);
        }
    }
    let parry = MarkovMeasure::parry(system)?;
    let max_order = (1..=8).rev().find(|&r| a.pow(r as u32) <= 256).unwrap_or(1);
    for r in 1..=max_order {
        let states = a.pow(r as u32);
        let next: Vec<Vec<f64>> = (0..states)
            .map(|s| {
                let w = crate::measure::code_word(s, r, a);
                let ms = target.mass(&w);
                let last = *w.last().unwrap() as usize;
                if ms > 0.0 {
                    (0..a)
                        .map(|b| {
                            let mut wb = w.clone();
                            wb.push(b as u8);
                            target.mass(&wb) / ms
                        })
                        .collect()
                } else {
                    parry.p()[last].clone()
                }
            })
            .collect();
        // renormalize rounding drift
        let next: Vec<Vec<f64>> = next
            .into_iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let pi: Vec<f64> = (0..states).map(|s| target.mass(&crate::measure::code_word(s, r, a))).collect();
        let z: f64 = pi.iter().sum();
        let pi: Vec<f64> = pi.into_iter().map(|x| x / z).collect();
        if let Ok(m) = MarkovMeasure::higher_order(a, r, next.clone(), pi.clone())
            .or_else(|_| MarkovMeasure::higher_order_solved(a, r, next.clone()))
        {
            if let Some(res) = check(m, format!("markovization order {r}"))? {
                return Ok(res);
            }
        }
        for e in 1..=12 {
            let rho = 10f64.powf(-(e as f64) / 2.0);
            let mixed: Vec<Vec<f64>> = next
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    let last = s % a;
                    row.iter().zip(&parry.p()[last]).map(|(x, y)| (1.0 - rho) * x + rho * y).collect()
                })
                .collect();
            if let Ok(m) = MarkovMeasure::higher_order_solved(a, r, mixed) {
                if let Some(res) = check(m, format!("switching chain order {r}, rho {rho:.1e}"))? {
                    return Ok(res);
                }
            }
        }
    }
    let mut comps: Vec<_> = target.components().to_vec();
    comps.sort_by(|x, y| y.weight.total_cmp(&x.weight));
    for c in comps {
        if let Some(res) = check(c.measure.clone(), format!("majority component (weight {:.3})", c.weight))? {
            return Ok(res);
        }
    }
    let (d, g) = best.unwrap_or((f64::INFINITY, f64::INFINITY));
    Err(Error::Approximation { distance: d, entropy_gap: g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use rand::SeedableRng;

    fn bern(p: f64) -> MarkovMeasure {
        MarkovMeasure::bernoulli(&[1.0 - p, p]).unwrap()
    }

    fn fib(n: usize) -> BigUint {
        let (mut a, mut b) = (BigUint::zero(), BigUint::one());
        for _ in 0..n {
            let c = &a + &b;
            a = b;
            b = c;
        }
        a
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_words(&ShiftSystem::full_shift(2).unwrap(), 3), BigUint::from(8u32));
        let g = ShiftSystem::golden_mean();
        assert_eq!(count_words(&g, 3), BigUint::from(5u32));
        for n in 1..60 {
            assert_eq!(count_words(&g, n), fib(n + 2));
        }
    }

    #[test]
    fn word_count_entropy() {
        let g = ShiftSystem::golden_mean();
        let e = estimate_entropy_word_count(&g, 32).unwrap();
        assert!((e.value - linalg::big_ln(&fib(34)) / 32.0).abs() < 1e-12);
        assert!((estimate_entropy_word_count(&ShiftSystem::full_shift(2).unwrap(), 17).unwrap().value - 2f64.ln()).abs() < 1e-12);
        let c4 = ShiftSystem::from_rows("c4", &[&[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0]]).unwrap();
        for n in [1, 10, 100] {
            assert!((estimate_entropy_word_count(&c4, n).unwrap().value - 4f64.ln() / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn class_sizes_small() {
        // 0010 and 0100
        let f = vec![vec![1, 1], vec![1, 0]];
        assert_eq!(class_size(&f, 0, 0).0, BigUint::from(2u32));
        let f = vec![vec![2, 0], vec![0, 0]];
        assert_eq!(class_size(&f, 0, 0).0, BigUint::one());
        // unbalanced
        assert!(class_size(&[vec![0, 2], vec![0, 0]], 0, 1).0.is_zero());
    }

    #[test]
    fn class_sizes_match_brute_force() {
        let a = 3usize;
        let n = 7usize;
        let mut tally: HashMap<(u8, u8, Vec<Vec<u64>>), u64> = HashMap::new();
        for code in 0..a.pow(n as u32) {
            let w = crate::measure::code_word(code, n, a);
            let mut f = vec![vec![0u64; a]; a];
            for p in w.windows(2) {
                f[p[0] as usize][p[1] as usize] += 1;
            }
            *tally.entry((w[0], w[n - 1], f)).or_default() += 1;
        }
        for ((u, v, f), c) in tally {
            assert_eq!(class_size(&f, u as usize, v as usize).0, BigUint::from(c), "{f:?} {u} {v}");
        }
    }

    #[test]
    fn vacuous_predicate_counts_everything() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let t: Measure = bern(0.5).into();
        let s = typical_words(&full, &t, 1.0, 10, TypicalMode::Enumerate, 1 << 20).unwrap();
        assert_eq!(s.exact_count, BigUint::from(1024u32));
        assert_eq!(s.words.len(), 1024);
    }

    #[test]
    fn sampler_is_uniform_on_a_class() {
        let f = vec![vec![2, 2], vec![2, 1]];
        let (size, _) = class_size(&f, 0, 0);
        let class = TypeClass { first: 0, last: 0, counts: f.clone(), size: size.clone(), ln_size: 0.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
        let draws = 20_000;
        for _ in 0..draws {
            let w = sample_class(&class, 8, &mut rng);
            let mut g = vec![vec![0u64; 2]; 2];
            for p in w.windows(2) {
                g[p[0] as usize][p[1] as usize] += 1;
            }
            assert_eq!(g, f);
            assert_eq!((w[0], w[7]), (0, 0));
            *seen.entry(w).or_default() += 1;
        }
        let k = size.to_usize().unwrap();
        assert_eq!(seen.len(), k);
        let expect = draws as f64 / k as f64;
        for &c in seen.values() {
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt(), "{c} vs {expect}");
        }
    }

    #[test]
    fn golden_typical_entropy() {
        let g = ShiftSystem::golden_mean();
        let parry: Measure = MarkovMeasure::parry(&g).unwrap().into();
        let s = typical_words(&g, &parry, 0.1, 24, TypicalMode::Enumerate, 1 << 22).unwrap();
        assert!((s.log_count() / 24.0 - 1.618_033_988_749_895f64.ln()).abs() < 0.1);
        for w in &s.words {
            assert!(g.is_admissible(w));
        }
    }

    #[test]
    fn sample_mode_words_are_members() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let t: Measure = bern(0.3).into();
        let s = typical_words(&full, &t, 0.05, 500, TypicalMode::Sample, 10_000).unwrap();
        assert!(!s.is_empty());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w = s.sample(&mut rng).unwrap();
            assert_eq!(w.len(), 500);
            assert!(s.contains(&w));
        }
        assert!(s.log_count() / 500.0 > bern(0.3).entropy() - 0.05);
    }

    #[test]
    fn dense_approx_examples() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let single = ConvexCombination::single(bern(0.3), 1);
        let r = entropy_dense_approx(&full, &single, 0.01, 0.01).unwrap();
        assert_eq!(r.measure, bern(0.3));
        let mix = ConvexCombination::mix(0.5, &ConvexCombination::single(bern(0.2), 1), &ConvexCombination::single(bern(0.8), 1))
            .unwrap();
        let r = entropy_dense_approx(&full, &mix, 0.05, 0.05).unwrap();
        assert!(r.measure.is_irreducible());
        assert!(r.distance + r.truncation < 0.05 && r.entropy > mix.entropy() - 0.05);
        let pm = ConvexCombination::mix(
            0.9,
            &ConvexCombination::single(bern(0.5), 1),
            &ConvexCombination::single(MarkovMeasure::periodic_orbit(2, &[0]).unwrap(), 1),
        )
        .unwrap();
        let r = entropy_dense_approx(&full, &pm, 0.1, 0.1).unwrap();
        assert!(r.distance + r.truncation < 0.1 && r.entropy > pm.entropy() - 0.1);
    }
}
