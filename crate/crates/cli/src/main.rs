use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use token_opt::chain::{
    chain_lazy_maxdeg, chain_metropolis_uniform, chain_simple_rw, chain_two_state, MarkovChain,
};
use token_opt::graph::{build_complete, build_cycle, build_random_geometric, build_torus, Graph};
use token_opt::harness::{
    parse_config, reproduce_fig1, run_config, scaling_table, worker_pool, write_outputs,
    Fig1Variant, HarnessError, ScalingFamily,
};
use token_opt::times::{chain_times, ChainTimes};

#[derive(Parser)]
#[command(
    name = "token-opt",
    version,
    about = "Random-walk token optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Cycle,
    Torus,
    Complete,
    Geometric,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainKind {
    Srw,
    Lazy,
    Metropolis,
    TwoState,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Homogeneous,
    Heterogeneous,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cycle,
    Torus2d,
    Complete,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and Monte-Carlo chain times as one CSV row.
    ChainTimes {
        #[arg(long, value_enum)]
        graph: GraphKind,
        /// Node count (for a torus: side^dim, unless --side is given).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        side: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        #[arg(long)]
        graph_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "srw")]
        chain: ChainKind,
        /// Flip probability of the two-state chain.
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        /// Accuracy of the tau_mix column (default pi_min / 2).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 200)]
        mc_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the column names first.
        #[arg(long)]
        header: bool,
    },
    /// Runs every seed of a JSON config and writes per-seed and aggregate CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The four-algorithm comparison on the canned problems.
    ReproduceFig1 {
        #[arg(long, value_enum)]
        variant: Variant,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact hitting and mixing times across graph sizes with log-log slopes.
    Scaling {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_chain(
    graph: GraphKind,
    n: Option<usize>,
    side: Option<usize>,
    dim: usize,
    radius: f64,
    graph_file: Option<PathBuf>,
    chain: ChainKind,
    p: f64,
    seed: u64,
) -> Result<MarkovChain, HarnessError> {
    if let ChainKind::TwoState = chain {
        return Ok(chain_two_state(p)?);
    }
    let need_n = || n.ok_or_else(|| config_err("--n is required for this graph"));
    let g: Graph = match graph {
        GraphKind::Cycle => build_cycle(need_n()?)?,
        GraphKind::Complete => build_complete(need_n()?)?,
        GraphKind::Geometric => build_random_geometric(need_n()?, radius, seed)?,
        GraphKind::Torus => {
            let side = match (side, n) {
                (Some(s), _) => s,
                (None, Some(n)) => {
                    let s = (n as f64).powf(1.0 / dim as f64).round() as usize;
                    if s.pow(dim as u32) != n {
                        return Err(config_err(format!(
                            "--n {n} is not a perfect power {dim} for a torus"
                        )));
                    }
                    s
                }
                (None, None) => return Err(config_err("--n or --side is required for a torus")),
            };
            build_torus(side, dim)?
        }
        GraphKind::File => {
            let path = graph_file
                .ok_or_else(|| config_err("--graph-file is required with --graph file"))?;
            Graph::read_edge_list(&path)?
        }
    };
    Ok(match chain {
        ChainKind::Srw => chain_simple_rw(&g)?,
        ChainKind::Lazy => chain_lazy_maxdeg(&g)?,
        ChainKind::Metropolis => chain_metropolis_uniform(&g)?,
        ChainKind::TwoState => unreachable!(),
    })
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::ChainTimes {
            graph,
            n,
            side,
            dim,
            radius,
            graph_file,
            chain,
            p,
            eps,
            mc_reps,
            seed,
            header,
        } => {
            let chain = build_chain(graph, n, side, dim, radius, graph_file, chain, p, seed)?;
            let times = chain_times(&chain, eps, mc_reps, seed)?;
            if header {
                println!("{}", ChainTimes::CSV_HEADER);
            }
            println!("{}", times.csv_row());
        }
        Command::Run { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| HarnessError::Io {
                path: config.display().to_string(),
                source: e,
            })?;
            let cfg = parse_config(&text)?;
            let dir = out.or_else(|| cfg.output.clone()).ok_or_else(|| {
                config_err("output: no output directory (set `output` or pass --out)")
            })?;
            let pool = worker_pool()?;
            let result = run_config(&cfg, &pool)?;
            write_outputs(&dir, &cfg, &result)?;
            let last = result.aggregate.last();
            println!(
                "{}: {} seeds, T = {}, final mean f-gap {:e} at {} communications",
                cfg.algorithm.name.as_str(),
                result.traces.len(),
                cfg.replication.horizon,
                last.f_gap_mean,
                last.comms
            );
        }
        Command::ReproduceFig1 {
            variant,
            seeds,
            out,
        } => {
            let variant = match variant {
                Variant::Homogeneous => Fig1Variant::Homogeneous,
                Variant::Heterogeneous => Fig1Variant::Heterogeneous,
            };
            let pool = worker_pool()?;
            let summary = reproduce_fig1(variant, seeds, Some(&out), &pool)?;
            print!("{}", summary.to_csv());
        }
        Command::Scaling { family, sizes, out } => {
            let family = match family {
                Family::Cycle => ScalingFamily::Cycle,
                Family::Torus2d => ScalingFamily::Torus2d,
                Family::Complete => ScalingFamily::Complete,
            };
            let table = scaling_table(family, &sizes)?;
            write(&out, &table.to_csv())?;
            let fit_path = out.with_extension("fit.csv");
            write(&fit_path, &table.fit_csv())?;
            print!("{}", table.to_csv());
            println!();
            print!("{}", table.fit_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
