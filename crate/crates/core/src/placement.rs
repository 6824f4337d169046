//! Weighted pseudo-random selection of Fog, Cloud and LDNS nodes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{closeness, HopTable, NodeId};

// per-role stream separators, xored into the placement seed
const FOG_STREAM: u64 = 0x6a09_e667_f3bc_c908;
const CLOUD_STREAM: u64 = 0xbb67_ae85_84ca_a73b;
const LDNS_STREAM: u64 = 0x3c6e_f372_fe94_f82b;

#[derive(Debug, Error, PartialEq)]
pub enum PlacementError {
    #[error("cannot place {k} points: only {available} nodes have positive weight")]
    InsufficientCandidates { k: usize, available: usize },
    #[error("invalid node weight {0}")]
    BadWeight(f64),
}

/// Node weighting used by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementMode {
    /// Proportional to node population.
    Pop,
    /// Proportional to closeness centrality.
    Cls,
}

impl fmt::Display for PlacementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlacementMode::Pop => "pop",
            PlacementMode::Cls => "cls",
        })
    }
}

impl FromStr for PlacementMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pop" => Ok(PlacementMode::Pop),
            "cls" => Ok(PlacementMode::Cls),
            other => Err(format!("unknown placement mode {other:?} (expected pop or cls)")),
        }
    }
}

/// Sampling weights for `mode`, indexed by node id.
pub fn node_weights(mode: PlacementMode, populations: &[u64], hops: &HopTable) -> Vec<f64> {
    match mode {
        PlacementMode::Pop => populations.iter().map(|&p| p as f64).collect(),
        PlacementMode::Cls => (0..hops.node_count() as u32)
            .map(|v| closeness(hops, NodeId(v)))
            .collect(),
    }
}

/// Draws `k` distinct nodes sequentially without replacement, each draw
/// proportional to weight among the remaining candidates. Returned in draw
/// order.
pub fn place_points<R: Rng>(weights: &[f64], k: usize, rng: &mut R) -> Result<Vec<NodeId>, PlacementError> {
    if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(PlacementError::BadWeight(w));
    }
    let available = weights.iter().filter(|&&w| w > 0.0).count();
    if k > available {
        return Err(PlacementError::InsufficientCandidates { k, available });
    }
    let mut remaining = weights.to_vec();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = remaining.iter().sum();
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            pick = Some(i);
            acc += w;
            if target < acc {
                break;
            }
        }
        // float slack can leave target just past the last bucket; `pick` is
        // then the last positive-weight node
        let i = pick.expect("a positive-weight candidate remains");
        remaining[i] = 0.0;
        chosen.push(NodeId(i as u32));
    }
    Ok(chosen)
}

/// [`place_points`] with a fresh generator seeded from `seed`.
pub fn place_points_seeded(weights: &[f64], k: usize, seed: u64) -> Result<Vec<NodeId>, PlacementError> {
    place_points(weights, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub fog: usize,
    pub cloud: usize,
    pub ldns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementConfig {
    pub mode: PlacementMode,
    pub counts: RoleCounts,
}

/// Role-tagged node sets. Roles may share nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub fog: Vec<NodeId>,
    pub cloud: Vec<NodeId>,
    pub ldns: Vec<NodeId>,
    pub seed: u64,
}

impl Placement {
    /// Fog and Cloud nodes, deduplicated and sorted.
    pub fn service_points(&self) -> Vec<NodeId> {
        let mut points: Vec<NodeId> = self.fog.iter().chain(&self.cloud).copied().collect();
        points.sort_unstable();
        points.dedup();
        points
    }
}

/// Places every role with an independent sub-stream of `seed`.
pub fn place_all(
    populations: &[u64],
    hops: &HopTable,
    config: &PlacementConfig,
    seed: u64,
) -> Result<Placement, PlacementError> {
    let weights = node_weights(config.mode, populations, hops);
    let sorted = |k, stream| -> Result<Vec<NodeId>, PlacementError> {
        let mut nodes = place_points_seeded(&weights, k, seed ^ stream)?;
        nodes.sort_unstable();
        Ok(nodes)
    };
    Ok(Placement {
        fog: sorted(config.counts.fog, FOG_STREAM)?,
        cloud: sorted(config.counts.cloud, CLOUD_STREAM)?,
        ldns: sorted(config.counts.ldns, LDNS_STREAM)?,
        seed,
    })
}
