use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use copula_crm::model::mtd_curve;
use copula_crm::simulation::{make_grid_scenario, WorkingModel};
use copula_crm::{DoseBounds, ModelParams, Scenario};

use crate::output::{num, opt, write_csv, write_json};
use crate::{usage, Failure};

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: f64,
    /// Lower end of both standardized dose ranges
    #[arg(long, default_value_t = 0.05)]
    dose_min: f64,
    /// Upper end of both standardized dose ranges
    #[arg(long, default_value_t = 0.3)]
    dose_max: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        let p = ModelParams::new(self.alpha, self.beta, self.gamma, 0.0);
        p.validate().map_err(usage)?;
        Ok(p)
    }

    fn bounds(&self) -> Result<DoseBounds, Failure> {
        let b = DoseBounds {
            min: self.dose_min,
            max: self.dose_max,
        };
        if !(b.min >= 0.0 && b.min < b.max && b.max <= 1.0) {
            return Err(usage(anyhow::anyhow!(
                "dose range [{}, {}] must satisfy 0 <= min < max <= 1",
                b.min,
                b.max
            )));
        }
        Ok(b)
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Dose levels of drug D1
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Dose levels of drug D2 (defaults to --levels)
    #[arg(long)]
    levels2: Option<usize>,
    /// CSV output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the grid as a scenario file
    #[arg(long)]
    scenario_out: Option<PathBuf>,
    /// True attribution fraction stored in --scenario-out
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value = "generated")]
    label: String,
}

/// Rows run from the highest D1 level down, columns over D2 levels.
pub fn scenario_table(args: TableArgs) -> Result<(), Failure> {
    let m = &args.model;
    m.params()?;
    let bounds = m.bounds()?;
    let ny = args.levels2.unwrap_or(args.levels);
    let table = make_grid_scenario(WorkingModel::new(m.alpha, m.beta, m.gamma), args.levels, ny, bounds, bounds)
        .map_err(usage)?;

    let mut header = vec!["d1_level".to_string(), "x".to_string()];
    header.extend(table.y_levels.iter().map(|y| format!("y={}", num(*y))));
    let rows: Vec<Vec<String>> = (0..table.x_levels.len())
        .rev()
        .map(|ix| {
            let mut row = vec![(ix + 1).to_string(), num(table.x_levels[ix])];
            row.extend(table.probs[ix].iter().map(|p| num(*p)));
            row
        })
        .collect();
    write_csv(args.out.as_deref(), &header, &rows)?;

    if let Some(path) = &args.scenario_out {
        let scenario = Scenario::prob_table(args.label.clone(), table, args.eta);
        scenario.validate().map_err(usage)?;
        write_json(path, &scenario).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Target DLT probability
    #[arg(long)]
    theta: f64,
    /// Number of equally spaced x values
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// CSV output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One row per x; `in_range` is 0 where the contour leaves the dose square.
pub fn curve(args: CurveArgs) -> Result<(), Failure> {
    let m = &args.model;
    let params = m.params()?;
    let bounds = m.bounds()?;
    let curve = mtd_curve(&params, args.theta, args.points, bounds, bounds).map_err(usage)?;
    let header: Vec<String> = ["x", "y", "in_range"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| vec![num(p.x), opt(p.y), u8::from(p.y.is_some()).to_string()])
        .collect();
    write_csv(args.out.as_deref(), &header, &rows)?;
    Ok(())
}
