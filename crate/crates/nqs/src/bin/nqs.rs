//! Experiment driver: every subcommand produces deterministic CSV data plus
//! a JSON sidecar carrying the resolved configuration.

use clap::{Parser, Subcommand};
use nqs::bounds;
use nqs::error::{Error, Result};
use nqs::exact::lanczos::{HamiltonianKind, HamiltonianSpec};
use nqs::experiments::{self, EtaSource, RunWriter, TrainSpec};
use nqs::lrfd::DecayProfile;
use nqs::presets::{self, Preset};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "nqs", version, about = "RBM spin-chain toolkit: truncation bounds, exact oracles, VMC")]
struct Cli {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed for anything stochastic (sampling, Lanczos starts).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config file (TOML/JSON): training spec or decay profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact truncation errors vs closed-form bounds (fig2a/fig2b).
    TruncSweep {
        #[arg(long, default_value = "fig2b")]
        preset: String,
        #[arg(long)]
        l: Option<usize>,
        /// Largest profile-node count in the sweep (default 20·L).
        #[arg(long)]
        nh_max: Option<usize>,
        #[arg(long, default_value_t = 60)]
        proxy_levels: usize,
    },
    /// Minimal hidden-node counts N_h*(L, ε₀): exact search vs bounds.
    NhScaling {
        #[arg(long, default_value = "fig2b")]
        preset: String,
        /// Comma-separated target errors.
        #[arg(long, default_value = "1e-7,1e-10")]
        eps: String,
        #[arg(long, default_value_t = 5)]
        l_min: usize,
        #[arg(long, default_value_t = 15)]
        l_max: usize,
        #[arg(long, default_value_t = 60)]
        proxy_levels: usize,
    },
    /// z-correlation curves and the half-chain inset (fig3 family).
    Correlations {
        #[arg(long, default_value = "0.5,1,2")]
        alpha_q: String,
        #[arg(long, default_value = "10,12,14,16,18,20,22")]
        l_list: String,
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// η-surface grid, ridge and fitted slope of a preset or checkpoint.
    Eta {
        #[arg(long, conflicts_with = "checkpoint")]
        preset: Option<String>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, default_value_t = 20)]
        alpha: usize,
    },
    /// Delta-state amplitude spectra and certified ratio bounds (fig5).
    Kron {
        #[arg(long, default_value = "3,2,1.5,1.2,1.1")]
        delta_p: String,
        #[arg(long, default_value_t = presets::FIG5_L)]
        l: usize,
        #[arg(long, default_value_t = presets::FIG5_MU0)]
        mu0: f64,
    },
    /// VMC ground-state training from a --config TOML file.
    Train,
    /// Lanczos exact diagonalization of cluster/TFIM/XXZ chains.
    Ed {
        /// cluster | tfim | xxz
        #[arg(long)]
        model: String,
        #[arg(long)]
        l: usize,
        /// B_x for TFIM, J_z for XXZ (ignored for cluster).
        #[arg(long)]
        coupling: Option<f64>,
        #[arg(long, default_value_t = false)]
        export_state: bool,
        #[arg(long, default_value_t = false)]
        export_json: bool,
    },
    /// List the named presets with their parameter settings.
    Presets,
    /// Evaluate the bound machinery for one (profile, L, Nh).
    BoundEval {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        nh: usize,
    },
    /// Map a profile to its complexity-scaling class.
    Classify {
        #[arg(long)]
        preset: Option<String>,
    },
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number '{s}': {e}")))
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad integer '{s}': {e}")))
        })
        .collect()
}

fn load_profile(config: &Option<PathBuf>, preset: &Option<String>) -> Result<DecayProfile> {
    match (preset, config) {
        (Some(name), _) => Ok(presets::preset_profile(Preset::parse(name)?)),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            if path.extension().is_some_and(|e| e == "json") {
                DecayProfile::from_json(&text)
            } else {
                DecayProfile::from_toml(&text)
            }
        }
        (None, None) => Err(Error::Config(
            "need either --preset or --config with a profile file".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.cmd {
        Cmd::TruncSweep { preset, l, nh_max, proxy_levels } => {
            let preset = Preset::parse(&preset)?;
            let l = l.unwrap_or_else(|| preset.default_l());
            let nh_max = nh_max.unwrap_or(20 * l);
            let w = RunWriter::new(&cli.out, "trunc-sweep", cli.seed)?;
            let path = experiments::run_trunc_sweep(&w, preset, l, nh_max, proxy_levels)?;
            println!("wrote {}", path.display());
        }
        Cmd::NhScaling { preset, eps, l_min, l_max, proxy_levels } => {
            let preset = Preset::parse(&preset)?;
            let eps = parse_f64_list(&eps)?;
            let w = RunWriter::new(&cli.out, "nh-scaling", cli.seed)?;
            let path =
                experiments::run_nh_scaling(&w, preset, &eps, (l_min, l_max), proxy_levels)?;
            println!("wrote {}", path.display());
        }
        Cmd::Correlations { alpha_q, l_list, levels } => {
            let alpha_q = parse_f64_list(&alpha_q)?;
            let l_list = parse_usize_list(&l_list)?;
            let w = RunWriter::new(&cli.out, "correlations", cli.seed)?;
            let path = experiments::run_correlations(&w, &alpha_q, &l_list, levels)?;
            println!("wrote {}", path.display());
        }
        Cmd::Eta { preset, checkpoint, l, alpha } => {
            let source = match (preset, checkpoint) {
                (Some(name), None) => {
                    let preset = Preset::parse(&name)?;
                    EtaSource::Preset {
                        preset,
                        l: l.unwrap_or_else(|| preset.default_l()),
                        alpha,
                    }
                }
                (None, Some(path)) => EtaSource::Checkpoint(path),
                _ => {
                    return Err(Error::Config(
                        "eta needs exactly one of --preset or --checkpoint".into(),
                    ))
                }
            };
            let w = RunWriter::new(&cli.out, "eta", cli.seed)?;
            let path = experiments::run_eta(&w, source)?;
            println!("wrote {}", path.display());
        }
        Cmd::Kron { delta_p, l, mu0 } => {
            let delta_p = parse_f64_list(&delta_p)?;
            let w = RunWriter::new(&cli.out, "kron", cli.seed)?;
            let path = experiments::run_kron(&w, &delta_p, l, mu0)?;
            println!("wrote {}", path.display());
        }
        Cmd::Train => {
            let path = cli
                .config
                .ok_or_else(|| Error::Config("train needs --config <spec.toml>".into()))?;
            let mut spec = TrainSpec::from_toml(&std::fs::read_to_string(&path)?)?;
            if cli.seed != 0 {
                spec.vmc.seed = cli.seed;
            }
            let w = RunWriter::new(&cli.out, "train", spec.vmc.seed)?;
            let result = experiments::run_train(&w, &spec)?;
            if result.diverged {
                return Err(Error::Numerical(format!(
                    "training diverged after {} iterations (trace written)",
                    result.energy_trace.len()
                )));
            }
            println!(
                "trained {} iterations; artifacts in {}",
                result.energy_trace.len(),
                w.dir().display()
            );
        }
        Cmd::Ed { model, l, coupling, export_state, export_json } => {
            let kind = match model.to_ascii_lowercase().as_str() {
                "cluster" => HamiltonianKind::Cluster,
                "tfim" => HamiltonianKind::Tfim { bx: coupling.unwrap_or(1.0) },
                "xxz" => HamiltonianKind::Xxz { jz: coupling.unwrap_or(-0.2) },
                other => return Err(Error::Config(format!("unknown model '{other}'"))),
            };
            let h = HamiltonianSpec::new(kind, l)?;
            let w = RunWriter::new(&cli.out, "ed", cli.seed)?;
            let energy = experiments::run_ed(&w, &h, cli.seed, export_state, export_json)?;
            println!("E0 = {energy:.12}");
        }
        Cmd::Presets => {
            print!("{}", experiments::presets_listing());
        }
        Cmd::BoundEval { preset, l, nh } => {
            let profile = load_profile(&cli.config, &preset)?;
            let w = RunWriter::new(&cli.out, "bound-eval", cli.seed)?;
            let rep = experiments::run_bound_eval(&w, &profile, l, nh)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Cmd::Classify { preset } => {
            let profile = load_profile(&cli.config, &preset)?;
            let class = bounds::classify_manifold(&profile);
            println!("{}", serde_json::to_string_pretty(&class)?);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
