use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Error;
use crate::fabric::{Scheme, DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_HASHES, DEFAULT_BLOOM_SEED};
use crate::placement::{PlacementMode, RoleCounts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// Service routing through the PCF.
    Icn,
    /// DNS redirection baseline.
    Dns,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Icn => "icn",
            Arch::Dns => "dns",
        })
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icn" => Ok(Arch::Icn),
            "dns" => Ok(Arch::Dns),
            other => Err(format!("unknown architecture {other:?} (expected icn or dns)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Exact,
    Bloom,
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(SchemeKind::Exact),
            "bloom" => Ok(SchemeKind::Bloom),
            other => Err(format!("unknown forwarding scheme {other:?} (expected exact or bloom)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogueConfig {
    pub items: usize,
    pub alpha: f64,
    pub bitrates_mbps: Vec<f64>,
}

impl Default for CatalogueConfig {
    fn default() -> Self {
        Self {
            items: 1000,
            alpha: 0.8,
            bitrates_mbps: vec![20.0, 40.0, 60.0],
        }
    }
}

impl CatalogueConfig {
    pub fn bitrates_bps(&self) -> Vec<f64> {
        self.bitrates_mbps.iter().map(|m| m * 1e6).collect()
    }
}

/// Everything shared by the points of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub topology: PathBuf,
    pub population: PathBuf,
    pub catalogue: CatalogueConfig,
    pub load_fraction: f64,
    /// Offered demand in bits per second.
    pub target_bitrate: f64,
    pub fog_cache_fraction: f64,
    pub trials: usize,
    pub seed: u64,
    /// Count Fog→Cloud pulls in backhaul.
    pub count_fallback: bool,
    pub scheme: SchemeKind,
    pub bloom_bits: usize,
    pub bloom_hashes: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            topology: PathBuf::new(),
            population: PathBuf::new(),
            catalogue: CatalogueConfig::default(),
            load_fraction: 0.4,
            target_bitrate: 70e9,
            fog_cache_fraction: 0.1,
            trials: 50,
            seed: 1,
            count_fallback: true,
            scheme: SchemeKind::Exact,
            bloom_bits: DEFAULT_BLOOM_BITS,
            bloom_hashes: DEFAULT_BLOOM_HASHES,
        }
    }
}

impl Settings {
    pub fn forwarding_scheme(&self) -> Scheme {
        match self.scheme {
            SchemeKind::Exact => Scheme::Exact,
            SchemeKind::Bloom => Scheme::Bloom {
                m: self.bloom_bits,
                k: self.bloom_hashes,
                seed: DEFAULT_BLOOM_SEED,
            },
        }
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub arch: Arch,
    pub fog: usize,
    pub cloud: usize,
    pub ldns: usize,
    pub placement: PlacementMode,
    /// Catchment intervals in seconds; empty means unicast only.
    pub catchment: Vec<f64>,
    #[serde(flatten)]
    pub settings: Settings,
}

impl ScenarioConfig {
    pub fn counts(&self) -> RoleCounts {
        RoleCounts {
            fog: self.fog,
            cloud: self.cloud,
            ldns: self.ldns,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let s = &self.settings;
        let fail = |msg: String| Err(Error::Config(msg));
        if s.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.cloud == 0 {
            return fail("at least one cloud point is required".into());
        }
        match self.arch {
            Arch::Icn if self.ldns != 0 => return fail(format!("icn runs take no LDNS points (got {})", self.ldns)),
            Arch::Dns if self.ldns == 0 => return fail("dns runs need at least one LDNS point".into()),
            Arch::Dns if !self.catchment.is_empty() => {
                return fail("dns runs are unicast only; catchment list must be empty".into())
            }
            _ => {}
        }
        if let Some(t) = self.catchment.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return fail(format!("catchment interval must be non-negative, got {t}"));
        }
        if !(0.0..=1.0).contains(&s.load_fraction) {
            return fail(format!("load_fraction must lie in [0, 1], got {}", s.load_fraction));
        }
        if !(s.target_bitrate.is_finite() && s.target_bitrate > 0.0) {
            return fail(format!("target_bitrate must be positive, got {}", s.target_bitrate));
        }
        if s.catalogue.items == 0 || s.catalogue.bitrates_mbps.is_empty() {
            return fail("catalogue needs items and at least one bitrate".into());
        }
        if s.scheme == SchemeKind::Bloom && (s.bloom_bits == 0 || s.bloom_hashes == 0) {
            return fail("bloom_bits and bloom_hashes must be positive".into());
        }
        Ok(())
    }

    /// `arch,fog,cloud,ldns,mode` key used in output rows.
    pub fn key(&self) -> String {
        format!("{},{},{},{},{}", self.arch, self.fog, self.cloud, self.ldns, self.placement)
    }
}

/// Axes of a sweep grid. Icn points ignore `ldns`; dns points ignore
/// `catchment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridAxes {
    pub arch: Vec<Arch>,
    pub placement: Vec<PlacementMode>,
    pub fog: Vec<usize>,
    pub cloud: Vec<usize>,
    pub ldns: Vec<usize>,
    pub catchment: Vec<f64>,
}

impl Default for GridAxes {
    fn default() -> Self {
        Self {
            arch: vec![Arch::Icn, Arch::Dns],
            placement: vec![PlacementMode::Pop],
            fog: vec![2, 4, 6, 8],
            cloud: vec![2, 4, 6, 8],
            ldns: vec![2, 4, 6, 8],
            catchment: vec![0.1, 1.0, 10.0],
        }
    }
}

/// Sweep description file: shared settings at the top level plus a
/// `[grid]` table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(flatten)]
    pub settings: Settings,
    #[serde(default)]
    pub grid: GridAxes,
}

impl GridConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a grid file; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Path(path.to_path_buf(), e))?;
        let mut grid = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut grid.settings.topology, &mut grid.settings.population] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(grid)
    }

    /// Every grid point, in arch / placement / fog / cloud / ldns order.
    pub fn expand(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for &arch in &self.grid.arch {
            for &placement in &self.grid.placement {
                for &fog in &self.grid.fog {
                    for &cloud in &self.grid.cloud {
                        let (ldns_axis, catchment) = match arch {
                            Arch::Icn => (vec![0], self.grid.catchment.clone()),
                            Arch::Dns => (self.grid.ldns.clone(), Vec::new()),
                        };
                        for ldns in ldns_axis {
                            out.push(ScenarioConfig {
                                arch,
                                fog,
                                cloud,
                                ldns,
                                placement,
                                catchment: catchment.clone(),
                                settings: self.settings.clone(),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
