//! The dense sequence `alpha_k` through the target set and the working
//! measures `gamma_k` built from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{wstar_distance, ConvexCombination, Measure};
use crate::separation::{entropy_dense_approx, APPROX_DEPTH};

use super::family::{NestedFamily, TargetPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GammaMode {
    /// Typical words of `alpha_k` itself.
    #[default]
    Direct,
    /// Typical words of an ergodic Markov approximation of `alpha_k`.
    Measure,
}

/// First `count` parameters of the dyadic zigzag over `[0, segments]`:
/// sweep `r` moves in steps of `segments / 2^r`, alternating direction,
/// so `0, 1, 1/2, 0, 1/4, 1/2, 3/4, 1, 7/8, ...` for one segment.
pub fn zigzag(count: usize, segments: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(0.0);
    if segments == 0 {
        out.resize(count, 0.0);
        return out;
    }
    let s = segments as f64;
    let mut r = 0u32;
    while out.len() < count {
        let steps = 1usize << r;
        let h = s / steps as f64;
        for i in 1..=steps {
            if out.len() == count {
                break;
            }
            let t = if r.is_multiple_of(2) { i as f64 * h } else { s - i as f64 * h };
            out.push(t);
        }
        r += 1;
    }
    out
}

/// `alphas[k-1]`, `gammas[k-1]` and `levels[k-1]` belong to index `k`.
#[derive(Clone, Debug)]
pub struct MeasureChain {
    pub params: Vec<f64>,
    pub alphas: Vec<ConvexCombination>,
    pub gammas: Vec<Measure>,
    /// Level `l_k` carrying `gamma_k`.
    pub levels: Vec<usize>,
    pub gamma_entropies: Vec<f64>,
    pub eta: f64,
    /// `H* = inf_k h(gamma_k) - eta` over the computed prefix.
    pub entropy_floor: f64,
    pub mode: GammaMode,
}

impl MeasureChain {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `d(gamma_k, gamma_{k+1})` at depth `depth` plus its truncation bound.
    pub fn gamma_step(&self, k: usize, depth: usize) -> Result<f64> {
        let (d, b) = wstar_distance(&self.gammas[k - 1], &self.gammas[k], depth)?;
        Ok(d + b)
    }

    /// Consecutive `d(alpha_k, alpha_{k+1})` at `depth`.
    pub fn alpha_steps(&self, depth: usize) -> Result<Vec<f64>> {
        self.alphas
            .windows(2)
            .map(|w| wstar_distance(&w[0].clone().into(), &w[1].clone().into(), depth).map(|(d, _)| d))
            .collect()
    }
}

/// Builds `count` chain entries. In measure mode `eps[k-1]` bounds both
/// `d(beta_k, alpha_k)` and `d(gamma_k, beta_k)`.
pub fn build_chain(family: &NestedFamily, path: &TargetPath, eta: f64, mode: GammaMode, eps: &[f64]) -> Result<MeasureChain> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    path.check_against(family)?;
    let count = eps.len();
    let params = zigzag(count, path.segments());
    let alphas: Vec<ConvexCombination> = params.iter().map(|&t| path.at(t)).collect();
    let mut gammas = Vec::with_capacity(count);
    let mut levels = Vec::with_capacity(count);
    for (k, alpha) in alphas.iter().enumerate() {
        match mode {
            GammaMode::Direct => {
                levels.push(alpha.level());
                gammas.push(Measure::Convex(alpha.clone()));
            }
            GammaMode::Measure => {
                let (l, beta) = restrict_to_level(family, alpha, eps[k], eta)?;
                let approx = entropy_dense_approx(family.level(l), &beta, eps[k], eta)
                    .map_err(|e| Error::Construction { band: k + 1, msg: e.to_string() })?;
                levels.push(l);
                gammas.push(Measure::Markov(approx.measure));
            }
        }
    }
    let gamma_entropies: Vec<f64> = gammas.iter().map(Measure::entropy).collect::<Result<_>>()?;
    let inf = gamma_entropies.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MeasureChain { params, alphas, gammas, levels, gamma_entropies, eta, entropy_floor: inf - eta, mode })
}

/// Smallest level `l` whose normalized restriction is `eps`-close to
/// `alpha` and loses at most `eta` entropy.
fn restrict_to_level(family: &NestedFamily, alpha: &ConvexCombination, eps: f64, eta: f64) -> Result<(usize, ConvexCombination)> {
    let h = alpha.entropy();
    let am: Measure = alpha.clone().into();
    for l in 1..=family.len() {
        let Ok(beta) = alpha.restrict_normalize(l) else { continue };
        let (d, b) = wstar_distance(&beta.clone().into(), &am, APPROX_DEPTH)?;
        if d + b < eps && beta.entropy() >= h - eta {
            return Ok((l, beta));
        }
    }
    Ok((alpha.level(), alpha.clone()))
}
