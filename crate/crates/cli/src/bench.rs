use std::time::Instant;

use clap::Args;

use wdom::generate::partial_ktree;
use wdom::{decompose, make_nice, solve_lmax_with, solve_wdom_with, SolveOptions};

use crate::{usage, CliError, Method, Problem, Strategy};

pub const LONG_ABOUT: &str = "\
Time the solvers on random partial k-trees and print CSV.

Every (n, k, rep) triple draws one graph from the seed, so rows that differ
only in w, L or strategy share their instance. Unless --method is given, the
decomposition is the one the generator builds (width at most k).

Columns:
  problem        wds or lmax
  n, k, w        instance size, k-tree parameter, domination threshold
  L              budget (empty for wds)
  strategy       naive or convolution
  rep            repetition index
  wall_time_ms   solve time, excluding generation and decomposition
  table_cells    total cells over all DP tables built
  size_or_value  optimum found";

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1000, 2000, 4000])]
    ns: Vec<usize>,
    #[arg(long = "k", value_delimiter = ',', default_values_t = [2, 3])]
    ks: Vec<usize>,
    #[arg(long = "w", value_delimiter = ',', default_values_t = [1, 2])]
    ws: Vec<usize>,
    /// Budgets for lmax rows.
    #[arg(long = "budget", value_delimiter = ',', default_values_t = [10])]
    budgets: Vec<usize>,
    #[arg(long = "problem", value_enum, value_delimiter = ',', default_values = ["wds"])]
    problems: Vec<Problem>,
    #[arg(long = "strategy", value_enum, value_delimiter = ',', default_values = ["naive", "convolution"])]
    strategies: Vec<Strategy>,
    /// Probability that each k-tree edge is kept.
    #[arg(long, default_value_t = 0.8)]
    keep: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Decompose with a heuristic instead of using the construction.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

pub fn run(args: BenchArgs) -> Result<(), CliError> {
    if args.threads == 0 || args.ws.contains(&0) {
        return Err(usage("--threads and --w must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    println!("problem,n,k,w,L,strategy,rep,wall_time_ms,table_cells,size_or_value");
    for &n in &args.ns {
        for &k in &args.ks {
            for rep in 0..args.reps {
                let seed = args.seed.wrapping_add(rep as u64);
                let p = partial_ktree(n, k, args.keep, seed).map_err(usage)?;
                let td = match args.method {
                    Some(m) => decompose(&p.graph, m.into()),
                    None => p.decomposition,
                };
                let nd = make_nice(&td, &p.graph).map_err(usage)?;
                for &w in &args.ws {
                    for &problem in &args.problems {
                        let budgets: Vec<Option<usize>> = match problem {
                            Problem::Wds => vec![None],
                            Problem::Lmax => args.budgets.iter().map(|&l| Some(l)).collect(),
                        };
                        for budget in budgets {
                            for &strategy in &args.strategies {
                                let opts = SolveOptions {
                                    strategy: strategy.into(),
                                    witness: false,
                                };
                                let start = Instant::now();
                                let (value, stats) = match budget {
                                    None => {
                                        let s = solve_wdom_with(&p.graph, &nd, w, &opts)?;
                                        (s.size, s.stats)
                                    }
                                    Some(l) => {
                                        let s = solve_lmax_with(&p.graph, &nd, w, l, &opts)?;
                                        (s.value, s.stats)
                                    }
                                };
                                let ms = start.elapsed().as_millis();
                                let l = budget.map(|l| l.to_string()).unwrap_or_default();
                                let strategy = wdom::JoinStrategy::from(strategy);
                                println!(
                                    "{problem},{n},{k},{w},{l},{strategy},{rep},{ms},{},{value}",
                                    stats.table_cells
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
