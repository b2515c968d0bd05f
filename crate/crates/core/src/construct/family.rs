//! Nested families of levels and polygonal target sets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measure::{convex_to_json, measure_from_json, ConvexCombination, MarkovMeasure};
use crate::separation::count_words;
use crate::shift::{ShiftSystem, SystemFile, Word};

/// Depth up to which the density of the union of levels is checked.
pub const DENSITY_CAP: usize = 12;

/// Nondecreasing transitive levels `X_1 ⊆ X_2 ⊆ ...` inside an ambient
/// system.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedFamily {
    label: String,
    levels: Vec<ShiftSystem>,
    ambient: ShiftSystem,
    density_depth: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default)]
    pub label: String,
    pub levels: Vec<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<SystemFile>,
}

fn pair_name(a: u8, b: u8) -> String {
    Word(vec![a, b]).to_string()
}

/// First pair allowed in `inner` but forbidden in `outer`.
fn escaping_pair(inner: &ShiftSystem, outer: &ShiftSystem) -> Option<(u8, u8)> {
    let n = inner.alphabet_size() as u8;
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).find(|&(a, b)| inner.allows(a, b) && !outer.allows(a, b))
}

impl NestedFamily {
    /// Validates alphabets, transitivity and nesting; `ambient` defaults to
    /// the last level.
    pub fn new(label: impl Into<String>, levels: Vec<ShiftSystem>, ambient: Option<ShiftSystem>) -> Result<Self> {
        let Some(last) = levels.last().cloned() else {
            return Err(Error::InvalidArgument("family without levels".into()));
        };
        let a = levels[0].alphabet_size();
        let ambient = ambient.unwrap_or(last.clone());
        for (i, l) in levels.iter().chain(std::iter::once(&ambient)).enumerate() {
            if l.alphabet_size() != a {
                return Err(Error::InvalidSystem(format!("level {} has alphabet {}, expected {a}", i + 1, l.alphabet_size())));
            }
            if !l.is_transitive() {
                return Err(Error::InvalidSystem(format!("level {} ({}) is not transitive", i + 1, l.label())));
            }
        }
        for (i, w) in levels.windows(2).enumerate() {
            if let Some((x, y)) = escaping_pair(&w[0], &w[1]) {
                return Err(Error::Nesting(format!(
                    "level {} allows the word {} but level {} forbids it",
                    i + 1,
                    pair_name(x, y),
                    i + 2
                )));
            }
        }
        if let Some((x, y)) = escaping_pair(&last, &ambient) {
            return Err(Error::Nesting(format!(
                "level {} allows the word {} but the ambient system forbids it",
                levels.len(),
                pair_name(x, y)
            )));
        }
        let density_depth =
            (1..=DENSITY_CAP).take_while(|&l| count_words(&ambient, l) == count_words(&last, l)).last().unwrap_or(0);
        Ok(NestedFamily { label: label.into(), levels, ambient, density_depth })
    }

    pub fn single(system: ShiftSystem) -> Self {
        let label = system.label().to_string();
        Self::new(label, vec![system], None).expect("a transitive system is a valid one-level family")
    }

    /// Golden mean shift inside the full 2-shift.
    pub fn golden_in_full() -> Self {
        let full = ShiftSystem::full_shift(2).unwrap();
        Self::new("golden-in-full", vec![ShiftSystem::golden_mean(), full], None).unwrap()
    }

    /// Two nested period-2 systems on four symbols with cyclic classes
    /// `{0, 1}` and `{2, 3}`.
    pub fn period_two() -> Self {
        let l1 = ShiftSystem::from_rows("period2-inner", &[&[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 1, 0, 0], &[1, 0, 0, 0]]).unwrap();
        let l2 = ShiftSystem::from_rows("period2-outer", &[&[0, 0, 1, 0], &[0, 0, 1, 1], &[1, 1, 0, 0], &[1, 0, 0, 0]]).unwrap();
        Self::new("period-two", vec![l1, l2], None).unwrap()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn levels(&self) -> &[ShiftSystem] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Level `k` (1-based), capped at the last level.
    pub fn level(&self, k: usize) -> &ShiftSystem {
        &self.levels[k.clamp(1, self.levels.len()) - 1]
    }

    pub fn ambient(&self) -> &ShiftSystem {
        &self.ambient
    }

    pub fn alphabet_size(&self) -> usize {
        self.ambient.alphabet_size()
    }

    /// Every ambient cylinder of depth at most this meets some level.
    pub fn density_depth(&self) -> usize {
        self.density_depth
    }

    /// Smallest level in which `w` is admissible.
    pub fn smallest_level_containing(&self, w: &[u8]) -> Option<usize> {
        if w.is_empty() {
            return Some(1);
        }
        self.levels.iter().position(|l| l.is_admissible(w)).map(|i| i + 1)
    }

    pub fn from_file(f: FamilyFile) -> Result<Self> {
        let levels: Result<Vec<ShiftSystem>> = f.levels.into_iter().map(ShiftSystem::try_from).collect();
        let ambient = f.ambient.map(ShiftSystem::try_from).transpose()?;
        Self::new(f.label, levels?, ambient)
    }

    pub fn to_file(&self) -> FamilyFile {
        let ambient = (self.ambient != *self.levels.last().unwrap()).then(|| self.ambient.clone().into());
        FamilyFile { label: self.label.clone(), levels: self.levels.iter().cloned().map(Into::into).collect(), ambient }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let f: FamilyFile =
            serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_file(f)
    }
}

/// A polygonal path `v_0 - v_1 - ... - v_S` of invariant measures; `K` is
/// the union of its segments.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPath {
    vertices: Vec<ConvexCombination>,
}

impl TargetPath {
    pub fn new(vertices: Vec<ConvexCombination>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidMeasure("target path without vertices".into()));
        };
        let a = first.alphabet();
        if let Some(i) = vertices.iter().position(|v| v.alphabet() != a) {
            return Err(Error::InvalidMeasure(format!("vertex {i} has a different alphabet")));
        }
        Ok(TargetPath { vertices })
    }

    pub fn singleton(v: ConvexCombination) -> Self {
        TargetPath { vertices: vec![v] }
    }

    pub fn segment(a: ConvexCombination, b: ConvexCombination) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn vertices(&self) -> &[ConvexCombination] {
        &self.vertices
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn alphabet(&self) -> usize {
        self.vertices[0].alphabet()
    }

    /// Point at parameter `t` in `[0, segments]`.
    pub fn at(&self, t: f64) -> ConvexCombination {
        let s = self.segments();
        if s == 0 {
            return self.vertices[0].clone();
        }
        let t = t.clamp(0.0, s as f64);
        let i = (t.floor() as usize).min(s - 1);
        let tau = t - i as f64;
        if tau <= 0.0 {
            return self.vertices[i].clone();
        }
        if tau >= 1.0 {
            return self.vertices[i + 1].clone();
        }
        ConvexCombination::mix(1.0 - tau, &self.vertices[i], &self.vertices[i + 1]).expect("tau in (0, 1)")
    }

    /// Entropy is affine, so the infimum over `K` sits at a vertex.
    pub fn inf_entropy(&self) -> f64 {
        self.vertices.iter().map(|v| v.entropy()).fold(f64::INFINITY, f64::min)
    }

    /// Every component must live on the level it is tagged with.
    pub fn check_against(&self, family: &NestedFamily) -> Result<()> {
        if self.alphabet() != family.alphabet_size() {
            return Err(Error::InvalidMeasure(format!(
                "target alphabet {} differs from family alphabet {}",
                self.alphabet(),
                family.alphabet_size()
            )));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            for (j, c) in v.components().iter().enumerate() {
                if c.level == 0 || c.level > family.len() {
                    return Err(Error::InvalidMeasure(format!("vertex {i} component {j}: no level {}", c.level)));
                }
                if !c.measure.is_supported_in(family.level(c.level)) {
                    return Err(Error::InvalidMeasure(format!("vertex {i} component {j} is not supported in level {}", c.level)));
                }
            }
        }
        Ok(())
    }

    /// `{"vertices": [measure, ...]}` or a single measure.
    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("vertices").and_then(Value::as_array) {
            Some(vs) => Self::new(vs.iter().map(measure_from_json).collect::<Result<_>>()?),
            None => Ok(Self::singleton(measure_from_json(v)?)),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "vertices": self.vertices.iter().map(convex_to_json).collect::<Vec<_>>() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value =
            serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_json(&v).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })
    }

    /// Parry measure of `system` tagged with `level`.
    pub fn parry(system: &ShiftSystem, level: usize) -> Result<Self> {
        Ok(Self::singleton(ConvexCombination::single(MarkovMeasure::parry(system)?, level)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broken_nesting_names_the_word() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let err = NestedFamily::new("bad", vec![full, ShiftSystem::golden_mean()], None).unwrap_err();
        assert!(err.to_string().contains("11"), "{err}");
    }

    #[test]
    fn density_depth_of_shipped_families() {
        assert_eq!(NestedFamily::golden_in_full().density_depth(), DENSITY_CAP);
        let g = ShiftSystem::golden_mean();
        let f = NestedFamily::new("g", vec![g], Some(ShiftSystem::full_shift(2).unwrap())).unwrap();
        assert_eq!(f.density_depth(), 1);
    }

    #[test]
    fn family_file_round_trip() {
        let f = NestedFamily::period_two();
        let back = NestedFamily::from_file(serde_json::from_str(&serde_json::to_string(&f.to_file()).unwrap()).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn path_points_and_inf_entropy() {
        let b = |p: f64| ConvexCombination::single(MarkovMeasure::bernoulli(&[1.0 - p, p]).unwrap(), 1);
        let k = TargetPath::segment(b(0.2), b(0.5)).unwrap();
        assert!((k.at(0.5).mass(&[1]) - 0.35).abs() < 1e-12);
        assert!((k.at(1.0).mass(&[1]) - 0.5).abs() < 1e-12);
        let h02 = -(0.2f64 * 0.2f64.ln() + 0.8 * 0.8f64.ln());
        assert!((k.inf_entropy() - h02).abs() < 1e-12);
    }
}
