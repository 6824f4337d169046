//! Population ingestion, the Zipf service catalogue and per-trial demand.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::{NetworkGraph, NodeId};

const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("population grid is empty")]
    EmptyGrid,
    #[error("population line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("bitrate set is empty")]
    EmptyBitrateSet,
    #[error("catalogue needs at least one item")]
    EmptyCatalogue,
    #[error("Zipf exponent must be finite and non-negative, got {0}")]
    BadExponent(f64),
    #[error("load fraction must lie in [0, 1], got {0}")]
    BadLoadFraction(f64),
    #[error("target bitrate must be positive, got {0}")]
    BadTarget(f64),
    #[error("all node populations are zero")]
    ZeroPopulation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationCell {
    pub lat: f64,
    pub lon: f64,
    pub count: u64,
}

/// Geolocated population counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    cells: Vec<PopulationCell>,
}

impl PopulationGrid {
    pub fn new(cells: Vec<PopulationCell>) -> Result<Self, WorkloadError> {
        if !cells.iter().any(|c| c.count > 0) {
            return Err(WorkloadError::EmptyGrid);
        }
        Ok(Self { cells })
    }

    /// Parses `lat,lon,count` records. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, WorkloadError> {
        let mut cells = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| WorkloadError::Parse { line: i + 1, reason };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let lat: f64 = fields[0].parse().map_err(|_| err(format!("bad latitude {:?}", fields[0])))?;
            let lon: f64 = fields[1].parse().map_err(|_| err(format!("bad longitude {:?}", fields[1])))?;
            let count: u64 = fields[2].parse().map_err(|_| err(format!("bad count {:?}", fields[2])))?;
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(err(format!("coordinates out of range: {lat},{lon}")));
            }
            cells.push(PopulationCell { lat, lon, count });
        }
        Self::new(cells)
    }

    pub fn cells(&self) -> &[PopulationCell] {
        &self.cells
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }
}

/// Central angle between two points, in radians (haversine form).
pub fn great_circle(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin()
}

pub fn great_circle_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    EARTH_RADIUS_KM * great_circle(lat1, lon1, lat2, lon2)
}

/// Voronoi assignment: each cell's count goes to the geodesically nearest
/// node, ties to the lowest node id. Indexed by node id.
pub fn assign_population(graph: &NetworkGraph, grid: &PopulationGrid) -> Result<Vec<u64>, WorkloadError> {
    if grid.cells.is_empty() {
        return Err(WorkloadError::EmptyGrid);
    }
    let mut totals = vec![0u64; graph.node_count()];
    for cell in &grid.cells {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for node in graph.nodes() {
            let d = great_circle(cell.lat, cell.lon, node.lat, node.lon);
            if d < best_d {
                best_d = d;
                best = node.id.index();
            }
        }
        totals[best] += cell.count;
    }
    Ok(totals)
}

/// 1-based popularity rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl ItemId {
    /// Zero-based position in the catalogue.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub id: ItemId,
    pub probability: f64,
    /// Bits per second.
    pub bitrate: f64,
}

/// Zipf-ranked items, each with a fixed bitrate.
#[derive(Debug, Clone)]
pub struct ServiceCatalogue {
    items: Vec<Item>,
    alpha: f64,
}

impl ServiceCatalogue {
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn item(&self, id: ItemId) -> &Item {
        &self.items[id.index()]
    }

    /// `Σ p_i · b_i`, the mean bitrate of one request.
    pub fn expected_bitrate(&self) -> f64 {
        self.items.iter().map(|i| i.probability * i.bitrate).sum()
    }
}

/// Zipf probabilities `i^-α / H` with bitrates drawn uniformly from
/// `bitrates` per item.
pub fn build_catalogue(n: usize, alpha: f64, bitrates: &[f64], seed: u64) -> Result<ServiceCatalogue, WorkloadError> {
    if n == 0 {
        return Err(WorkloadError::EmptyCatalogue);
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(WorkloadError::BadExponent(alpha));
    }
    if bitrates.is_empty() {
        return Err(WorkloadError::EmptyBitrateSet);
    }
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
    // smallest terms first
    let harmonic: f64 = weights.iter().rev().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = weights
        .iter()
        .enumerate()
        .map(|(i, w)| Item {
            id: ItemId(i as u32 + 1),
            probability: w / harmonic,
            bitrate: *bitrates.choose(&mut rng).expect("non-empty"),
        })
        .collect();
    Ok(ServiceCatalogue { items, alpha })
}

/// Request counts per `(node, item)`; each request is a 1-second chunk per
/// epoch second, so a count is also a rate in requests per second.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    requests: BTreeMap<(NodeId, ItemId), u32>,
    /// Seconds.
    pub epoch: f64,
    /// Bits per second.
    pub offered_bitrate: f64,
}

impl DemandMatrix {
    /// Builds a matrix from explicit counts, computing the offered bitrate
    /// against `catalogue`.
    pub fn from_counts<I>(counts: I, catalogue: &ServiceCatalogue) -> Self
    where
        I: IntoIterator<Item = ((NodeId, ItemId), u32)>,
    {
        let mut requests = BTreeMap::new();
        for (key, count) in counts {
            if count > 0 {
                *requests.entry(key).or_insert(0) += count;
            }
        }
        let offered_bitrate = requests
            .iter()
            .map(|(&(_, item), &c)| f64::from(c) * catalogue.item(item).bitrate)
            .sum();
        Self {
            requests,
            epoch: 1.0,
            offered_bitrate,
        }
    }

    /// Entries in `(node, item)` order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, ItemId, u32)> + '_ {
        self.requests.iter().map(|(&(v, i), &c)| (v, i, c))
    }

    pub fn get(&self, node: NodeId, item: ItemId) -> u32 {
        self.requests.get(&(node, item)).copied().unwrap_or(0)
    }

    pub fn total_requests(&self) -> u64 {
        self.requests.values().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

/// Draws one trial's demand.
///
/// The active-user budget `U = target / E[bitrate]` is split across nodes in
/// proportion to `load_fraction · population`, rounded per node; every user
/// requests one item sampled from the catalogue.
pub fn draw_demand(
    populations: &[u64],
    catalogue: &ServiceCatalogue,
    load_fraction: f64,
    target_bitrate: f64,
    seed: u64,
) -> Result<DemandMatrix, WorkloadError> {
    if !(0.0..=1.0).contains(&load_fraction) {
        return Err(WorkloadError::BadLoadFraction(load_fraction));
    }
    if !(target_bitrate.is_finite() && target_bitrate > 0.0) {
        return Err(WorkloadError::BadTarget(target_bitrate));
    }
    let total_pop: u64 = populations.iter().sum();
    if total_pop == 0 {
        return Err(WorkloadError::ZeroPopulation);
    }
    if load_fraction == 0.0 {
        return Ok(DemandMatrix::from_counts(std::iter::empty(), catalogue));
    }

    let budget = target_bitrate / catalogue.expected_bitrate();
    let weight_total = load_fraction * total_pop as f64;
    let sampler = WeightedIndex::new(catalogue.items().iter().map(|i| i.probability))
        .expect("catalogue probabilities are positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for (v, &pop) in populations.iter().enumerate() {
        let users = (budget * load_fraction * pop as f64 / weight_total).round() as u64;
        for _ in 0..users {
            let item = ItemId(sampler.sample(&mut rng) as u32 + 1);
            *counts.entry((NodeId(v as u32), item)).or_insert(0u32) += 1;
        }
    }
    Ok(DemandMatrix::from_counts(counts, catalogue))
}
