use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use copula_crm::engine::{DiscreteSelection, McmcFitter};
use copula_crm::rng::derive_seed;
use copula_crm::simulation::{characteristics, run_study, StudyResult, TrialSummary};
use copula_crm::{DesignConfig, Scenario, StudySpec};
use copula_crm_service::{simulated_log, TrialEvent};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{num, opt, write_csv, write_json};
use crate::{usage, Failure};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Selection {
    Band,
    CurveRounding,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's true attribution fraction
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    /// Root seed; replicate r uses a seed derived from it
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores); output does not depend on it
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Design configuration JSON; defaults apply to missing fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rule turning the final estimate into grid combinations
    #[arg(long, value_enum)]
    discrete_selection: Option<Selection>,
    /// MCMC iterations per refit, burn-in included
    #[arg(long)]
    chain_length: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Points of the x grid for the pointwise metrics
    #[arg(long, default_value_t = 51)]
    x_grid_points: usize,
    /// Write every trial's event log under `traces/`
    #[arg(long)]
    traces: bool,
}

fn load_scenario(path: &Path, eta: Option<f64>) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))
        .map_err(usage)?;
    let mut s: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("invalid scenario {}", path.display()))
        .map_err(usage)?;
    if let Some(eta) = eta {
        s = s.with_eta(eta);
    }
    s.validate()
        .with_context(|| format!("invalid scenario {}", path.display()))
        .map_err(usage)?;
    Ok(s)
}

fn load_config(args: &SimulateArgs) -> Result<DesignConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))
                .map_err(usage)?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid config {}", path.display()))
                .map_err(usage)?
        }
        None => DesignConfig::default(),
    };
    if let Some(sel) = args.discrete_selection {
        config.discrete_selection = match sel {
            Selection::Band => DiscreteSelection::Band,
            Selection::CurveRounding => DiscreteSelection::CurveRounding,
        };
    }
    if let Some(n) = args.chain_length {
        config.mcmc.chain_length = n;
    }
    if let Some(n) = args.burn_in {
        config.mcmc.burn_in = n;
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

fn trace_id(r: usize) -> String {
    format!("trial-{r:06}")
}

/// Runs the study while keeping each trial's event log.
fn run_with_traces(
    scenario: &Scenario,
    config: &DesignConfig,
    spec: &StudySpec,
) -> Result<(StudyResult, Vec<Vec<TrialEvent>>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.threads).build()?;
    let runs = pool.install(|| {
        (0..spec.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(spec.root_seed, r as u64);
                let (mut run, events) = simulated_log(scenario, config, seed, &trace_id(r), &McmcFitter)?;
                run.summary.replicate = r;
                Ok((run.summary, events))
            })
            .collect::<copula_crm::Result<Vec<_>>>()
    })?;
    let (trials, logs): (Vec<TrialSummary>, Vec<Vec<TrialEvent>>) = runs.into_iter().unzip();
    let characteristics = characteristics(scenario, config, spec, &trials)?;
    let result = StudyResult {
        scenario: scenario.clone(),
        config: config.clone(),
        spec: spec.clone(),
        characteristics,
        trials,
        traces: None,
    };
    Ok((result, logs))
}

pub fn run(args: SimulateArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.scenario, args.eta)?;
    let config = load_config(&args)?;
    if args.replicates == 0 {
        return Err(usage(anyhow::anyhow!("--replicates must be at least 1")));
    }
    let spec = StudySpec {
        replicates: args.replicates,
        root_seed: args.seed,
        threads: args.threads,
        x_grid_points: args.x_grid_points,
        ..StudySpec::default()
    };
    let traces = args.traces || args.replicates == 1;
    let (study, logs) = if traces {
        run_with_traces(&scenario, &config, &spec)?
    } else {
        (run_study(&scenario, &config, &spec)?, Vec::new())
    };

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_outputs(&args.out, &study)?;
    if traces {
        let dir = args.out.join("traces");
        fs::create_dir_all(&dir)?;
        for (r, events) in logs.iter().enumerate() {
            let mut text = String::new();
            for e in events {
                text.push_str(&serde_json::to_string(e)?);
                text.push('\n');
            }
            fs::write(dir.join(format!("{}.ndjson", trace_id(r))), text)?;
        }
    }

    let oc = &study.characteristics;
    println!(
        "{}: eta={} m={} avg%DLT={} %>{}={} %>{}={} %stopped={}",
        scenario.label,
        num(scenario.eta_true),
        oc.replicates,
        num(oc.avg_pct_dlt),
        num(config.theta + 0.05),
        num(oc.pct_trials_rate_gt_theta_p05),
        num(config.theta + 0.10),
        num(oc.pct_trials_rate_gt_theta_p10),
        num(oc.pct_stopped)
    );
    if let Some(sel) = oc.discrete_pct_selection {
        println!(
            "selection: >=25%={} >=50%={} >=75%={} all={}",
            num(sel.at_least_25),
            num(sel.at_least_50),
            num(sel.at_least_75),
            num(sel.all)
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn write_outputs(out: &Path, study: &StudyResult) -> Result<()> {
    let oc = &study.characteristics;
    let scenario = &study.scenario;
    let mut spec = serde_json::to_value(&study.spec)?;
    if let Some(o) = spec.as_object_mut() {
        o.remove("threads");
    }
    write_json(
        &out.join("study.json"),
        &json!({
            "scenario": scenario,
            "config": study.config,
            "spec": spec,
            "characteristics": oc,
        }),
    )?;

    let eta = num(scenario.eta_true);
    write_csv(
        Some(&out.join("safety.csv")),
        &strings(&[
            "scenario",
            "eta",
            "avg_pct_toxicities",
            "pct_trials_rate_gt_theta_plus_0.05",
            "pct_trials_rate_gt_theta_plus_0.10",
            "pct_stopped",
        ]),
        &[vec![
            scenario.label.clone(),
            eta.clone(),
            num(oc.avg_pct_dlt),
            num(oc.pct_trials_rate_gt_theta_p05),
            num(oc.pct_trials_rate_gt_theta_p10),
            num(oc.pct_stopped),
        ]],
    )?;

    if let Some(sel) = oc.discrete_pct_selection {
        write_csv(
            Some(&out.join("selection.csv")),
            &strings(&["scenario", "eta", "at_least_25", "at_least_50", "at_least_75", "all"]),
            &[vec![
                scenario.label.clone(),
                eta,
                num(sel.at_least_25),
                num(sel.at_least_50),
                num(sel.at_least_75),
                num(sel.all),
            ]],
        )?;
    }

    if !oc.x_grid.is_empty() {
        let cfg = &study.config;
        let truth = scenario.true_curve(cfg.theta, 2, cfg.x_bounds, cfg.y_bounds)?;
        let mut header = strings(&["x", "true_y", "bias"]);
        header.extend(oc.pointwise_pct_recommendation.iter().map(|p| format!("pct_rec_p{}", num(p.p))));
        let rows: Vec<Vec<String>> = oc
            .x_grid
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut row = vec![
                    num(x),
                    opt(truth.as_ref().and_then(|t| t.y_at(x))),
                    opt(oc.pointwise_bias[i]),
                ];
                row.extend(oc.pointwise_pct_recommendation.iter().map(|p| opt(p.values[i])));
                row
            })
            .collect();
        write_csv(Some(&out.join("pointwise.csv")), &header, &rows)?;
    }

    let rows: Vec<Vec<String>> = study
        .trials
        .iter()
        .map(|t| {
            let m = t.medians;
            let cells: Vec<String> = t
                .recommended_cells()
                .iter()
                .map(|(ix, iy)| format!("{}:{}", ix + 1, iy + 1))
                .collect();
            vec![
                t.replicate.to_string(),
                t.seed.to_string(),
                t.patients.to_string(),
                t.dlts.to_string(),
                num(t.dlt_rate()),
                t.stopped.to_string(),
                t.cohorts.to_string(),
                opt(m.map(|m| m.alpha)),
                opt(m.map(|m| m.beta)),
                opt(m.map(|m| m.gamma)),
                opt(m.map(|m| m.eta)),
                cells.join(";"),
            ]
        })
        .collect();
    write_csv(
        Some(&out.join("trials.csv")),
        &strings(&[
            "replicate",
            "seed",
            "patients",
            "dlts",
            "dlt_rate",
            "stopped",
            "cohorts",
            "median_alpha",
            "median_beta",
            "median_gamma",
            "median_eta",
            "recommended_levels",
        ]),
        &rows,
    )
}
