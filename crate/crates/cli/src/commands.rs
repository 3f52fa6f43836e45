use std::fs::File;
use std::io::BufReader;

use paamm::control::{value_iteration_oracle, GridSpec, RiccatiResiduals};
use paamm::dynamics::{
    parse_price_csv, predicted_liquidity_growth_rate, predicted_lvr_rate, predicted_second_moment, replay_historical,
    seed_pool, simulate_path, stationary_moments, stationary_path_rates, PathRates,
};
use paamm::{
    feedback_constant, feedback_lambda, lambda_star, solve_riccati, BlockRecord64, ControlParams64, G3m64,
    InvariantCurve, PoolState64, SimConfig64,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, FrontierArgs, MomentsArgs, OptimalLambdaArgs, PoolArgs, ReplayArgs, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::output::{json, num, CsvTable, RunManifest, Sink};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Rerun(args) => {
            let manifest = RunManifest::read(&args.manifest)?;
            let mut recorded = manifest.command;
            *recorded.out_mut() = args.out;
            run(recorded)
        }
        other => {
            let mut sink = Sink::new(&other.clone().out_mut().clone())?;
            let inputs = match &other {
                Command::Simulate(a) => simulate(a, &mut sink).map(|_| Vec::new()),
                Command::Moments(a) => moments(a, &mut sink).map(|_| Vec::new()),
                Command::Frontier(a) => frontier(a, &mut sink).map(|_| Vec::new()),
                Command::OptimalLambda(a) => optimal_lambda(a, &mut sink).map(|_| Vec::new()),
                Command::Replay(a) => replay(a, &mut sink).map(|_| vec![a.input.clone()]),
                Command::Rerun(_) => unreachable!("handled above"),
            }?;
            sink.finish(&other, inputs)
        }
    }
}

fn check_pool_args(pool: &PoolArgs) -> CliResult<G3m64> {
    if pool.lambda.is_empty() {
        return Err(CliError::Usage("--lambda needs at least one value".into()));
    }
    if let Some(bad) = pool.lambda.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return Err(CliError::Usage(format!("--lambda {bad} is outside (0, 1]")));
    }
    if pool.period == 0 {
        return Err(CliError::Usage("--period must be at least 1".into()));
    }
    G3m64::new(pool.theta).map_err(|_| CliError::Usage(format!("--theta {} is outside (0, 1)", pool.theta)))
}

fn check_positive(name: &str, value: f64) -> CliResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {value}")))
    }
}

const BLOCK_COLUMNS: [&str; 11] = [
    "lambda",
    "block",
    "log_true_price",
    "top_gap",
    "bot_gap",
    "log_liquidity",
    "lvr",
    "cum_lvr",
    "norm_lvr",
    "risky_weight",
    "tracking_error",
];

#[derive(Serialize)]
struct BlockRow {
    lambda: f64,
    block: u64,
    log_true_price: f64,
    top_gap: f64,
    bot_gap: f64,
    log_liquidity: f64,
    lvr: f64,
    cum_lvr: f64,
    norm_lvr: f64,
    risky_weight: f64,
    tracking_error: f64,
}

/// Summary of one path, with closed-form counterparts where they exist.
#[derive(Serialize)]
struct PathSummary {
    lambda: f64,
    theta: f64,
    blocks: usize,
    summary_samples: usize,
    cumulative_lvr: f64,
    initial_log_liquidity: f64,
    final_log_liquidity: f64,
    gap_mean: f64,
    gap_second_moment: f64,
    gap_variance: f64,
    predicted_gap_second_moment: Option<f64>,
    lvr_rate: f64,
    predicted_lvr_rate: Option<f64>,
    liquidity_growth_rate: f64,
    predicted_liquidity_growth_rate: Option<f64>,
    mean_tracking_error: f64,
}

struct PathRun {
    lambda: f64,
    records: Vec<BlockRecord64>,
    initial_log_liquidity: f64,
}

fn summarize(run: &PathRun, theta: f64, burn_in: usize, dt: f64, sigma: Option<f64>) -> PathSummary {
    let kept = &run.records[burn_in.min(run.records.len())..];
    let n = kept.len().max(1) as f64;
    let mean = |f: &dyn Fn(&BlockRecord64) -> f64| kept.iter().map(f).sum::<f64>() / n;
    let gap_mean = mean(&|r| r.top_gap);
    let gap_second_moment = mean(&|r| r.top_gap * r.top_gap);
    let start = if burn_in == 0 {
        run.initial_log_liquidity
    } else {
        run.records[burn_in - 1].log_liquidity
    };
    let end = run.records.last().map_or(start, |r| r.log_liquidity);
    let lambda = run.lambda;
    PathSummary {
        lambda,
        theta,
        blocks: run.records.len(),
        summary_samples: kept.len(),
        cumulative_lvr: run.records.iter().map(|r| r.lvr).sum(),
        initial_log_liquidity: run.initial_log_liquidity,
        final_log_liquidity: end,
        gap_mean,
        gap_second_moment,
        gap_variance: gap_second_moment - gap_mean * gap_mean,
        predicted_gap_second_moment: sigma.map(|s| predicted_second_moment(lambda, s, dt)),
        lvr_rate: mean(&|r| r.norm_lvr) / dt,
        predicted_lvr_rate: sigma.map(|s| predicted_lvr_rate(lambda, theta, s)),
        liquidity_growth_rate: (end - start) / (n * dt),
        predicted_liquidity_growth_rate: sigma.map(|s| predicted_liquidity_growth_rate(lambda, theta, s)),
        mean_tracking_error: mean(&|r| r.tracking_error),
    }
}

fn block_rows(run: &PathRun) -> impl Iterator<Item = BlockRow> + '_ {
    let mut cum = 0.0;
    run.records.iter().map(move |r| {
        cum += r.lvr;
        BlockRow {
            lambda: run.lambda,
            block: r.block,
            log_true_price: r.log_true_price,
            top_gap: r.top_gap,
            bot_gap: r.bot_gap,
            log_liquidity: r.log_liquidity,
            lvr: r.lvr,
            cum_lvr: cum,
            norm_lvr: r.norm_lvr,
            risky_weight: r.risky_weight,
            tracking_error: r.tracking_error,
        }
    })
}

fn emit_paths(sink: &mut Sink, runs: &[PathRun], summaries: &[PathSummary], format: Format) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut table = CsvTable::new(&BLOCK_COLUMNS);
            for run in runs {
                for b in block_rows(run) {
                    table.row(&[
                        num(b.lambda),
                        b.block.to_string(),
                        num(b.log_true_price),
                        num(b.top_gap),
                        num(b.bot_gap),
                        num(b.log_liquidity),
                        num(b.lvr),
                        num(b.cum_lvr),
                        num(b.norm_lvr),
                        num(b.risky_weight),
                        num(b.tracking_error),
                    ]);
                }
            }
            sink.emit("blocks.csv", &table.finish())?;
        }
        Format::Json => {
            let rows: Vec<BlockRow> = runs.iter().flat_map(block_rows).collect();
            sink.emit("blocks.json", &json(&rows))?;
        }
    }
    sink.emit_aux("summary.json", &json(&summaries))
}

fn initial_log_liquidity(pool: &PoolState64) -> CliResult<f64> {
    Ok(pool.curve().invariant_value(pool.total_reserves())?.ln())
}

fn simulate(args: &SimulateArgs, sink: &mut Sink) -> CliResult<()> {
    let curve = check_pool_args(&args.pool)?;
    check_positive("initial-x", args.initial_x)?;
    check_positive("initial-price", args.initial_price)?;
    if args.blocks == 0 {
        return Err(CliError::Usage("--blocks must be at least 1".into()));
    }
    let g = &args.gbm;
    let config = SimConfig64::new(g.mu, g.sigma, g.dt, args.blocks, args.burn_in, g.seed)?;
    let runs = args
        .pool
        .lambda
        .par_iter()
        .map(|&lambda| {
            let pool = seed_pool(curve, lambda, args.pool.period, args.initial_x, args.initial_price.ln())?;
            let initial = initial_log_liquidity(&pool)?;
            Ok(PathRun {
                lambda,
                records: simulate_path(&config, pool)?,
                initial_log_liquidity: initial,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let summaries: Vec<_> = runs
        .iter()
        .map(|r| summarize(r, args.pool.theta, args.burn_in, g.dt, Some(g.sigma)))
        .collect();
    emit_paths(sink, &runs, &summaries, args.format)
}

fn replay(args: &ReplayArgs, sink: &mut Sink) -> CliResult<()> {
    let curve = check_pool_args(&args.pool)?;
    check_positive("initial-x", args.initial_x)?;
    check_positive("dt", args.dt)?;
    let file = File::open(&args.input).map_err(CliError::io(&args.input))?;
    let prices = parse_price_csv::<f64, _>(BufReader::new(file)).map_err(|source| CliError::Input {
        path: args.input.clone(),
        source,
    })?;
    let Some(first) = prices.first() else {
        return Err(CliError::Input {
            path: args.input.clone(),
            source: paamm::Error::Parse {
                line: 1,
                message: "no price observations".into(),
            },
        });
    };
    let runs = args
        .pool
        .lambda
        .par_iter()
        .map(|&lambda| {
            let pool = seed_pool(curve, lambda, args.pool.period, args.initial_x, first.price.ln())?;
            let initial = initial_log_liquidity(&pool)?;
            Ok(PathRun {
                lambda,
                records: replay_historical(&prices, pool)?,
                initial_log_liquidity: initial,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let summaries: Vec<_> = runs
        .iter()
        .map(|r| summarize(r, args.pool.theta, 0, args.dt, None))
        .collect();
    emit_paths(sink, &runs, &summaries, args.format)
}

#[derive(Serialize)]
struct MomentsRow {
    lambda: f64,
    theta: f64,
    n_samples: usize,
    mean_gap: f64,
    mean_gap_std_error: f64,
    second_moment: f64,
    second_moment_std_error: f64,
    predicted_second_moment: f64,
    ratio: f64,
    ratio_std_error: f64,
}

fn moments(args: &MomentsArgs, sink: &mut Sink) -> CliResult<()> {
    check_pool_args(&args.pool)?;
    if args.blocks == 0 {
        return Err(CliError::Usage("--blocks must be at least 1".into()));
    }
    let g = &args.gbm;
    let config = SimConfig64::new(g.mu, g.sigma, g.dt, args.blocks + args.burn_in, args.burn_in, g.seed)?;
    let theta = args.pool.theta;
    let rows = args
        .pool
        .lambda
        .par_iter()
        .map(|&lambda| {
            let est = stationary_moments(lambda, theta, &config)?;
            let predicted = predicted_second_moment(lambda, g.sigma, g.dt);
            Ok(MomentsRow {
                lambda,
                theta,
                n_samples: est.n_samples,
                mean_gap: est.mean_gap,
                mean_gap_std_error: est.mean_std_error,
                second_moment: est.second_moment_gap,
                second_moment_std_error: est.std_error,
                predicted_second_moment: predicted,
                ratio: est.second_moment_gap / predicted,
                ratio_std_error: est.std_error / predicted,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    match args.format {
        Format::Json => sink.emit("moments.json", &json(&rows)),
        Format::Csv => {
            let mut table = CsvTable::new(&[
                "lambda",
                "theta",
                "n_samples",
                "mean_gap",
                "mean_gap_std_error",
                "second_moment",
                "second_moment_std_error",
                "predicted_second_moment",
                "ratio",
                "ratio_std_error",
            ]);
            for r in &rows {
                table.row(&[
                    num(r.lambda),
                    num(r.theta),
                    r.n_samples.to_string(),
                    num(r.mean_gap),
                    num(r.mean_gap_std_error),
                    num(r.second_moment),
                    num(r.second_moment_std_error),
                    num(r.predicted_second_moment),
                    num(r.ratio),
                    num(r.ratio_std_error),
                ]);
            }
            sink.emit("moments.csv", &table.finish())
        }
    }
}

#[derive(Serialize)]
struct FrontierRow {
    lambda: f64,
    gap_variance: f64,
    gap_variance_std_error: f64,
    predicted_gap_variance: f64,
    lvr_rate: f64,
    lvr_rate_std_error: f64,
    predicted_lvr_rate: f64,
    liquidity_growth_rate: f64,
    liquidity_growth_rate_std_error: f64,
    predicted_liquidity_growth_rate: f64,
}

const FRONTIER_COLUMNS: [&str; 10] = [
    "lambda",
    "gap_variance",
    "gap_variance_std_error",
    "predicted_gap_variance",
    "lvr_rate",
    "lvr_rate_std_error",
    "predicted_lvr_rate",
    "liquidity_growth_rate",
    "liquidity_growth_rate_std_error",
    "predicted_liquidity_growth_rate",
];

/// Mean of replication estimates and the standard error of that mean.
fn pool_estimates(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut sum, mut var, mut n) = (0.0, 0.0, 0.0);
    for (value, se) in pairs {
        sum += value;
        var += se * se;
        n += 1.0;
    }
    (sum / n, var.sqrt() / n)
}

fn frontier(args: &FrontierArgs, sink: &mut Sink) -> CliResult<()> {
    check_pool_args(&args.pool)?;
    if args.blocks == 0 || args.replications == 0 {
        return Err(CliError::Usage("--blocks and --replications must be at least 1".into()));
    }
    let g = &args.gbm;
    let theta = args.pool.theta;
    let config = SimConfig64::new(g.mu, g.sigma, g.dt, args.blocks + args.burn_in, args.burn_in, g.seed)?;
    let jobs: Vec<(f64, u64)> = args
        .pool
        .lambda
        .iter()
        .flat_map(|&l| (0..args.replications).map(move |r| (l, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(lambda, r)| stationary_path_rates(lambda, theta, &config.with_seed(g.seed.wrapping_add(r))))
        .collect::<Result<Vec<PathRates<f64>>, _>>()?;
    let reps = args.replications as usize;
    let rows: Vec<FrontierRow> = args
        .pool
        .lambda
        .iter()
        .zip(results.chunks(reps))
        .map(|(&lambda, chunk)| {
            let (gap_variance, gap_se) = pool_estimates(chunk.iter().map(|r| (r.gap.variance(), r.gap.std_error)));
            let (lvr, lvr_se) = pool_estimates(chunk.iter().map(|r| (r.lvr.rate, r.lvr.std_error)));
            let (growth, growth_se) = pool_estimates(
                chunk
                    .iter()
                    .map(|r| (r.liquidity_growth.rate, r.liquidity_growth.std_error)),
            );
            FrontierRow {
                lambda,
                gap_variance,
                gap_variance_std_error: gap_se,
                predicted_gap_variance: predicted_second_moment(lambda, g.sigma, g.dt),
                lvr_rate: lvr,
                lvr_rate_std_error: lvr_se,
                predicted_lvr_rate: predicted_lvr_rate(lambda, theta, g.sigma),
                liquidity_growth_rate: growth,
                liquidity_growth_rate_std_error: growth_se,
                predicted_liquidity_growth_rate: predicted_liquidity_growth_rate(lambda, theta, g.sigma),
            }
        })
        .collect();
    match args.format {
        Format::Json => sink.emit("frontier.json", &json(&rows)),
        Format::Csv => {
            let mut table = CsvTable::new(&FRONTIER_COLUMNS);
            for r in &rows {
                table.row(&[
                    num(r.lambda),
                    num(r.gap_variance),
                    num(r.gap_variance_std_error),
                    num(r.predicted_gap_variance),
                    num(r.lvr_rate),
                    num(r.lvr_rate_std_error),
                    num(r.predicted_lvr_rate),
                    num(r.liquidity_growth_rate),
                    num(r.liquidity_growth_rate_std_error),
                    num(r.predicted_liquidity_growth_rate),
                ]);
            }
            sink.emit("frontier.csv", &table.finish())
        }
    }
}

#[derive(Serialize)]
struct Residuals {
    v2: f64,
    v1: f64,
    v0: Option<f64>,
}

impl From<RiccatiResiduals<f64>> for Residuals {
    fn from(r: RiccatiResiduals<f64>) -> Self {
        Self {
            v2: r.v2,
            v1: r.v1,
            v0: r.v0,
        }
    }
}

#[derive(Serialize)]
struct OracleSummary {
    state_points: usize,
    state_half_width: f64,
    action_points: usize,
    action_step: f64,
    iterations: usize,
    final_change: f64,
    fitted_v2: f64,
    v2_relative_error: f64,
    max_policy_deviation: f64,
    max_policy_deviation_steps: f64,
    policy_table: Option<String>,
}

#[derive(Serialize)]
struct OptimalLambdaReport {
    gamma: f64,
    rho: f64,
    dt: f64,
    mu: f64,
    sigma: f64,
    lambda_lower: f64,
    beta: f64,
    lambda_star: f64,
    v2: f64,
    v1: f64,
    v0: Option<f64>,
    feedback_constant: f64,
    residuals: Residuals,
    oracle: Option<OracleSummary>,
}

const POLICY_TABLE: &str = "oracle_policy.csv";

fn optimal_lambda(args: &OptimalLambdaArgs, sink: &mut Sink) -> CliResult<()> {
    let params = ControlParams64::new(args.gamma, args.rho, args.dt, args.mu, args.sigma, args.lambda_lower)?;
    let sol = solve_riccati(&params)?;
    let oracle = if args.oracle {
        let states = GridSpec::stationary_states(&params, &sol, args.std_devs, args.states)?;
        let actions = GridSpec::actions(&params, args.action_step)?;
        let table = value_iteration_oracle(&params, &states, &actions)?;
        let [_, _, fitted_v2] = table.fit_quadratic(table.inner_half())?;
        let step = table.action_step();
        let greedy = table.policy_lambda();
        let closed: Vec<f64> = table
            .states
            .iter()
            .map(|&g| feedback_lambda(g, &sol, &params))
            .collect();
        let max_dev = table
            .inner_half()
            .map(|i| (greedy[i] - closed[i]).abs())
            .fold(0.0, f64::max);
        let policy_table = if sink.is_dir() {
            let mut csv = CsvTable::new(&["gap", "value", "u", "lambda_greedy", "lambda_feedback", "inner"]);
            let inner = table.inner_half();
            for i in 0..table.states.len() {
                csv.row(&[
                    num(table.states[i]),
                    num(table.values[i]),
                    num(table.actions[table.policy[i]]),
                    num(greedy[i]),
                    num(closed[i]),
                    u8::from(inner.contains(&i)).to_string(),
                ]);
            }
            sink.emit(POLICY_TABLE, &csv.finish())?;
            Some(POLICY_TABLE.to_owned())
        } else {
            None
        };
        Some(OracleSummary {
            state_points: states.points,
            state_half_width: states.upper,
            action_points: actions.points,
            action_step: step,
            iterations: table.iterations,
            final_change: table.final_change,
            fitted_v2,
            v2_relative_error: (fitted_v2 / sol.v2 - 1.0).abs(),
            max_policy_deviation: max_dev,
            max_policy_deviation_steps: max_dev / step,
            policy_table,
        })
    } else {
        None
    };
    let report = OptimalLambdaReport {
        gamma: args.gamma,
        rho: args.rho,
        dt: args.dt,
        mu: args.mu,
        sigma: args.sigma,
        lambda_lower: args.lambda_lower,
        beta: sol.beta,
        lambda_star: lambda_star(args.gamma),
        v2: sol.v2,
        v1: sol.v1,
        v0: sol.v0,
        feedback_constant: feedback_constant(&sol, &params),
        residuals: sol.residuals(&params).into(),
        oracle,
    };
    sink.emit("optimal_lambda.json", &json(&report))
}
