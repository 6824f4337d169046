use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{backhaul, ecdf_from_counts, run_trial, trial_seed, Environment, Error, ScenarioConfig};

/// Condensed result of one trial of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Index into [`Sweep::configs`].
    pub config: usize,
    pub trial: usize,
    pub seed: u64,
    pub offered_bitrate: f64,
    pub unicast_backhaul: f64,
    /// Aligned with the configuration's catchment list.
    pub multicast_backhaul: Vec<f64>,
    pub path_counts: BTreeMap<u32, u64>,
}

/// Mean and sample standard deviation of backhaul across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config: usize,
    /// `None` for unicast.
    pub catchment: Option<f64>,
    pub trials: usize,
    pub mean_backhaul: f64,
    pub std_backhaul: f64,
    pub mean_offered: f64,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub configs: Vec<ScenarioConfig>,
    /// Ordered by configuration, then trial.
    pub trials: Vec<TrialRecord>,
}

/// Runs every configuration, loading each distinct topology/population pair
/// once.
pub fn run_sweep(configs: &[ScenarioConfig], parallel: bool) -> Result<Sweep, Error> {
    let mut envs: BTreeMap<(PathBuf, PathBuf), Environment> = BTreeMap::new();
    for c in configs {
        let key = (c.settings.topology.clone(), c.settings.population.clone());
        if let std::collections::btree_map::Entry::Vacant(slot) = envs.entry(key) {
            let env = Environment::load(&slot.key().0, &slot.key().1)?;
            slot.insert(env);
        }
    }
    run_with(configs, parallel, |c| &envs[&(c.settings.topology.clone(), c.settings.population.clone())])
}

/// Runs every configuration against one prepared environment.
pub fn run_sweep_in(env: &Environment, configs: &[ScenarioConfig], parallel: bool) -> Result<Sweep, Error> {
    run_with(configs, parallel, |_| env)
}

fn run_with<'e, F>(configs: &[ScenarioConfig], parallel: bool, env_of: F) -> Result<Sweep, Error>
where
    F: Fn(&ScenarioConfig) -> &'e Environment + Sync,
{
    for c in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.settings.trials).map(move |t| (i, t)))
        .collect();
    let job = |&(ci, t): &(usize, usize)| -> Result<TrialRecord, Error> {
        let config = &configs[ci];
        let m = run_trial(env_of(config), config, t)?;
        let mut path_counts = BTreeMap::new();
        for &h in &m.path_samples {
            *path_counts.entry(h).or_insert(0u64) += 1;
        }
        Ok(TrialRecord {
            config: ci,
            trial: t,
            seed: trial_seed(config.settings.seed, t),
            offered_bitrate: m.offered_bitrate,
            unicast_backhaul: backhaul(&m.unicast),
            multicast_backhaul: m.multicast.iter().map(|(_, l)| backhaul(l)).collect(),
            path_counts,
        })
    };
    let trials = if parallel {
        jobs.par_iter().map(job).collect::<Result<Vec<_>, _>>()?
    } else {
        jobs.iter().map(job).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Sweep {
        configs: configs.to_vec(),
        trials,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn catchment_label(t: Option<f64>) -> String {
    t.map_or_else(|| "unicast".to_string(), |t| t.to_string())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    trial_seed: &'static str,
    pathlen_pooling: &'static str,
    configs: &'a [ScenarioConfig],
}

impl Sweep {
    pub fn records(&self, config: usize) -> impl Iterator<Item = &TrialRecord> + '_ {
        self.trials.iter().filter(move |r| r.config == config)
    }

    /// One unicast row per configuration followed by one row per catchment
    /// interval.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for (ci, config) in self.configs.iter().enumerate() {
            let recs: Vec<&TrialRecord> = self.records(ci).collect();
            let (mean_offered, _) = mean_std(&recs.iter().map(|r| r.offered_bitrate).collect::<Vec<_>>());
            let mut push = |catchment, xs: Vec<f64>| {
                let (mean, std) = mean_std(&xs);
                rows.push(SummaryRow {
                    config: ci,
                    catchment,
                    trials: xs.len(),
                    mean_backhaul: mean,
                    std_backhaul: std,
                    mean_offered,
                });
            };
            push(None, recs.iter().map(|r| r.unicast_backhaul).collect());
            for (k, &t) in config.catchment.iter().enumerate() {
                push(Some(t), recs.iter().map(|r| r.multicast_backhaul[k]).collect());
            }
        }
        rows
    }

    /// Path-length ECDF of a configuration, pooling all its trials.
    pub fn ecdf(&self, config: usize) -> Result<Vec<(u32, f64)>, Error> {
        let mut pooled = BTreeMap::new();
        for r in self.records(config) {
            for (&h, &c) in &r.path_counts {
                *pooled.entry(h).or_insert(0) += c;
            }
        }
        ecdf_from_counts(&pooled)
    }

    /// Writes `backhaul.csv`, `pathlen.csv`, `summary.csv` and
    /// `manifest.toml` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), Error> {
        fs::create_dir_all(dir).map_err(|e| Error::Path(dir.to_path_buf(), e))?;
        let key_header = ["arch", "fog_k", "cloud_k", "ldns_k", "mode"];
        let key = |c: &ScenarioConfig| {
            [
                c.arch.to_string(),
                c.fog.to_string(),
                c.cloud.to_string(),
                c.ldns.to_string(),
                c.placement.to_string(),
            ]
        };

        let mut w = csv::Writer::from_path(dir.join("backhaul.csv"))?;
        w.write_record(key_header.iter().chain(&["T", "trial", "backhaul_bps", "seed", "offered_bps"]))?;
        for r in &self.trials {
            let c = &self.configs[r.config];
            let series = std::iter::once((None, r.unicast_backhaul))
                .chain(c.catchment.iter().zip(&r.multicast_backhaul).map(|(&t, &b)| (Some(t), b)));
            for (t, b) in series {
                let mut rec = key(c).to_vec();
                rec.extend([
                    catchment_label(t),
                    r.trial.to_string(),
                    b.to_string(),
                    r.seed.to_string(),
                    r.offered_bitrate.to_string(),
                ]);
                w.write_record(&rec)?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("pathlen.csv"))?;
        w.write_record(key_header.iter().chain(&["hops", "cum_fraction"]))?;
        for (ci, c) in self.configs.iter().enumerate() {
            for (h, f) in self.ecdf(ci)? {
                let mut rec = key(c).to_vec();
                rec.extend([h.to_string(), f.to_string()]);
                w.write_record(&rec)?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(key_header.iter().chain(&[
            "T",
            "trials",
            "mean_backhaul_bps",
            "std_backhaul_bps",
            "mean_offered_bps",
        ]))?;
        for row in self.summary() {
            let mut rec = key(&self.configs[row.config]).to_vec();
            rec.extend([
                catchment_label(row.catchment),
                row.trials.to_string(),
                row.mean_backhaul.to_string(),
                row.std_backhaul.to_string(),
                row.mean_offered.to_string(),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;

        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            trial_seed: "splitmix64(seed ^ splitmix64(trial))",
            pathlen_pooling: "all trials of a configuration",
            configs: &self.configs,
        };
        let path = dir.join("manifest.toml");
        fs::write(&path, toml::to_string(&manifest)?).map_err(|e| Error::Path(path, e))?;
        Ok(())
    }
}
