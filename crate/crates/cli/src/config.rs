use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Bounds,
    Angular,
    Phasespace,
    Weyl,
    All,
}

impl Experiment {
    pub const SINGLE: [Experiment; 4] = [
        Experiment::Bounds,
        Experiment::Angular,
        Experiment::Phasespace,
        Experiment::Weyl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Bounds => "bounds",
            Experiment::Angular => "angular",
            Experiment::Phasespace => "phasespace",
            Experiment::Weyl => "weyl",
            Experiment::All => "all",
        }
    }

    pub fn expand(&self) -> Vec<Experiment> {
        match self {
            Experiment::All => Self::SINGLE.to_vec(),
            single => vec![*single],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Evaluate and maximize Bell-CHSH correlators built from unitary operators.
#[derive(Debug, Clone, Parser)]
#[command(name = "chsh", version)]
pub struct RunConfig {
    /// Experiment to run.
    #[arg(long, value_enum, default_value = "all")]
    pub experiment: Experiment,

    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Output file; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,

    /// Seed for the optimizer's start points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Total objective evaluations per maximization (overrides the defaults).
    #[arg(long)]
    pub budget: Option<usize>,

    /// Simplex convergence tolerance (overrides the default).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Print the report layout and exit.
    #[arg(long)]
    pub print_schema: bool,
}

impl RunConfig {
    /// Checks the values clap cannot check on its own.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(budget) = self.budget {
            if budget == 0 {
                return Err("--budget must be positive".into());
            }
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(format!("--tol must be positive and finite, got {tol}"));
            }
        }
        Ok(())
    }

    pub fn writes_stdout(&self) -> bool {
        self.out.as_os_str() == "-"
    }
}
