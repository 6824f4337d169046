//! Experiment harness: trial evaluation, parameter sweeps and CSV output.

mod config;
mod sweep;
mod trial;

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::pcf::PcfError;
use crate::placement::PlacementError;
use crate::srouter::{ArcLoad, ResolveError};
use crate::topology::{all_pairs, load_topology_with, HopTable, NetworkGraph, TopologyError, UnlocatedNodes};
use crate::workload::{assign_population, PopulationGrid, WorkloadError};

pub use config::{Arch, CatalogueConfig, GridAxes, GridConfig, ScenarioConfig, SchemeKind, Settings};
pub use sweep::{run_sweep, run_sweep_in, SummaryRow, Sweep, TrialRecord};
pub use trial::{evaluate, run_trial, trial_inputs, trial_seed, TrialInputs, TrialMetrics};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {1}", .0.display())]
    Path(PathBuf, #[source] io::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Pcf(#[from] PcfError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    TomlRead(#[from] toml::de::Error),
    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),
    #[error("ECDF of an empty sample set")]
    EmptySamples,
}

/// Per-run state shared by every trial: the graph, its hop table and the
/// population attached to each node.
#[derive(Debug, Clone)]
pub struct Environment {
    pub graph: NetworkGraph,
    pub hops: HopTable,
    pub populations: Vec<u64>,
}

impl Environment {
    pub fn new(graph: NetworkGraph, grid: &PopulationGrid) -> Result<Self, Error> {
        let populations = assign_population(&graph, grid)?;
        let hops = all_pairs(&graph);
        Ok(Self {
            graph,
            hops,
            populations,
        })
    }

    /// Builds an environment from explicit per-node populations.
    pub fn with_populations(graph: NetworkGraph, populations: Vec<u64>) -> Result<Self, Error> {
        if populations.len() != graph.node_count() {
            return Err(Error::Config(format!(
                "{} populations for {} nodes",
                populations.len(),
                graph.node_count()
            )));
        }
        let hops = all_pairs(&graph);
        Ok(Self {
            graph,
            hops,
            populations,
        })
    }

    pub fn load(topology: &Path, population: &Path) -> Result<Self, Error> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::Path(p.to_path_buf(), e));
        let graph = load_topology_with(&read(topology)?, UnlocatedNodes::Reject)?;
        let grid = PopulationGrid::parse(&read(population)?)?;
        Self::new(graph, &grid)
    }
}

/// Core traffic in bits per second: per-arc load summed over arcs.
pub fn backhaul(load: &ArcLoad) -> f64 {
    load.total()
}

/// Empirical CDF as `(hops, fraction of samples <= hops)` at each distinct
/// value.
pub fn ecdf(samples: &[u32]) -> Result<Vec<(u32, f64)>, Error> {
    let mut counts = BTreeMap::new();
    for &s in samples {
        *counts.entry(s).or_insert(0u64) += 1;
    }
    ecdf_from_counts(&counts)
}

/// [`ecdf`] over a histogram.
pub fn ecdf_from_counts(counts: &BTreeMap<u32, u64>) -> Result<Vec<(u32, f64)>, Error> {
    let n: u64 = counts.values().sum();
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let mut acc = 0;
    Ok(counts
        .iter()
        .map(|(&h, &c)| {
            acc += c;
            (h, acc as f64 / n as f64)
        })
        .collect())
}
