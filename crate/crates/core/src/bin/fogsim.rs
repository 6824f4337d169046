use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fogsim::harness::{run_sweep, Arch, CatalogueConfig, GridConfig, ScenarioConfig, SchemeKind, Settings};
use fogsim::placement::PlacementMode;

#[derive(Parser)]
#[command(version, about = "Fog delivery simulator over an ICN core and a DNS baseline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write CSV results.
    Run(RunArgs),
    /// Run every point of a grid file.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Print path-length ECDFs from a pathlen.csv as gnuplot blocks.
    Ecdf {
        #[arg(long)]
        input: PathBuf,
    },
    /// Print mean backhaul per configuration from a backhaul.csv as
    /// whitespace-separated columns.
    Summarize {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    population: PathBuf,
    #[arg(long, default_value = "icn")]
    arch: Arch,
    #[arg(long, default_value_t = 2)]
    fog: usize,
    #[arg(long, default_value_t = 2)]
    cloud: usize,
    #[arg(long, default_value_t = 0)]
    ldns: usize,
    #[arg(long, default_value = "pop")]
    placement: PlacementMode,
    /// Catchment intervals in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    catchment: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Leave Fog-to-Cloud pulls out of backhaul.
    #[arg(long)]
    no_fallback_load: bool,
    #[arg(long, default_value = "exact")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 1000)]
    items: usize,
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    load_fraction: f64,
    /// Offered demand in Gb/s.
    #[arg(long, default_value_t = 70.0)]
    target_gbps: f64,
    #[arg(long, default_value_t = 0.1)]
    fog_cache_fraction: f64,
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            arch: self.arch,
            fog: self.fog,
            cloud: self.cloud,
            ldns: self.ldns,
            placement: self.placement,
            catchment: self.catchment.clone(),
            settings: Settings {
                topology: self.topology.clone(),
                population: self.population.clone(),
                catalogue: CatalogueConfig {
                    items: self.items,
                    alpha: self.alpha,
                    ..CatalogueConfig::default()
                },
                load_fraction: self.load_fraction,
                target_bitrate: self.target_gbps * 1e9,
                fog_cache_fraction: self.fog_cache_fraction,
                trials: self.trials,
                seed: self.seed,
                count_fallback: !self.no_fallback_load,
                scheme: self.scheme,
                ..Settings::default()
            },
        }
    }
}

fn read_rows(path: &PathBuf) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn column(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column {name}"))
}

fn print_ecdf(input: &PathBuf) -> Result<()> {
    let (header, rows) = read_rows(input)?;
    let hops = column(&header, "hops")?;
    let frac = column(&header, "cum_fraction")?;
    let mut last_key = None;
    for row in &rows {
        let key: Vec<&str> = row.iter().take(hops).collect();
        if last_key.as_ref() != Some(&key) {
            if last_key.is_some() {
                println!("\n");
            }
            println!("# {}", key.join(" "));
            println!("# hops cum_fraction");
            last_key = Some(key);
        }
        println!("{} {}", &row[hops], &row[frac]);
    }
    Ok(())
}

fn print_summary(input: &PathBuf) -> Result<()> {
    let (header, rows) = read_rows(input)?;
    let catchment = column(&header, "T")?;
    let value = column(&header, "backhaul_bps")?;
    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in &rows {
        let key: Vec<String> = row.iter().take(catchment + 1).map(str::to_string).collect();
        let v: f64 = row[value].parse().with_context(|| format!("bad backhaul {:?}", &row[value]))?;
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(v);
    }
    println!("# {} trials mean_gbps std_gbps", header.iter().take(catchment + 1).collect::<Vec<_>>().join(" "));
    for key in order {
        let xs = &groups[&key];
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        println!("{} {} {} {}", key.join(" "), xs.len(), mean / 1e9, std / 1e9);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let config = args.config();
            config.validate()?;
            let sweep = run_sweep(&[config], !args.sequential)?;
            sweep.write(&args.out)?;
            for row in sweep.summary() {
                let t = row.catchment.map_or("unicast".to_string(), |t| format!("T={t}"));
                println!("{t}: {:.3} Gb/s (std {:.3})", row.mean_backhaul / 1e9, row.std_backhaul / 1e9);
            }
        }
        Command::Sweep { grid, out, sequential } => {
            let grid = GridConfig::load(&grid).with_context(|| format!("reading grid {}", grid.display()))?;
            let configs = grid.expand();
            if configs.is_empty() {
                bail!("grid has no points");
            }
            let sweep = run_sweep(&configs, !sequential)?;
            sweep.write(&out)?;
            eprintln!("{} configurations, {} trials written to {}", configs.len(), sweep.trials.len(), out.display());
        }
        Command::Ecdf { input } => print_ecdf(&input)?,
        Command::Summarize { input } => print_summary(&input)?,
    }
    Ok(())
}
