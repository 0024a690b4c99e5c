use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "kgflow",
    version,
    about = "Klein-Gordon barrier scattering, energy-momentum flows and trajectories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one barrier and report the amplitudes.
    Solve(SolveArgs),
    /// Transmission probability over a (V, a) grid.
    Scan(ScanArgs),
    /// Density, λ and the three velocities along x.
    Field(FieldArgs),
    /// Integrate a bundle of world lines.
    Traj(TrajArgs),
    /// Compare integrate-then-boost with boost-then-integrate.
    BoostCheck(BoostArgs),
    /// Barrier height giving a requested reflection.
    FindV(FindArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Incident momentum.
    #[arg(long, conflicts_with = "omega", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Incident frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Rest mass [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Barrier height [default: 0].
    #[arg(long = "V", allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Barrier width [default: 12].
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// scalar | electrostatic (required when V > 0).
    #[arg(long)]
    pub kind: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SpecArgs {
    fn overlay(&self) -> RunConfig {
        RunConfig {
            k: self.k,
            omega: self.omega,
            m: self.m,
            v: self.v,
            a: self.a,
            kind: self.kind.clone(),
            format: self.format.clone(),
            out: self.out.clone(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    #[arg(long)]
    pub v_steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub a_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a_max: Option<f64>,
    #[arg(long)]
    pub a_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_steps: Option<usize>,
    /// Time of the profile.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Explicit seed positions (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub seeds: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed_max: Option<f64>,
    #[arg(long)]
    pub seed_count: Option<usize>,
    /// uniform | lambda
    #[arg(long)]
    pub seeding: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Step halving on velocity spikes [default: true].
    #[arg(long)]
    pub adaptive: Option<bool>,
}

impl SeedArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.seeds = self.seeds.clone();
        c.seed_min = self.seed_min;
        c.seed_max = self.seed_max;
        c.seed_count = self.seed_count;
        c.seeding = self.seeding.clone();
        c.t0 = self.t0;
        c.t_end = self.t_end;
        c.dt = self.dt;
        c.adaptive = self.adaptive;
    }
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// schrodinger | debroglie | eigen [default: eigen]
    #[arg(long)]
    pub law: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoostArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Rapidities to test (comma separated) [default: 0.1,0.3,1.0].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rapidities: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FindArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Reflection to reach, in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub target: Option<f64>,
    /// amplitude (|R|) | probability (|R|²) [default: amplitude]
    #[arg(long)]
    pub measure: Option<String>,
    /// Lower end of the V bracket (scanned when omitted).
    #[arg(long, allow_negative_numbers = true)]
    pub v_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v_hi: Option<f64>,
}

impl Command {
    pub fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Self::Solve(a) => a.spec.config.as_ref(),
            Self::Scan(a) => a.spec.config.as_ref(),
            Self::Field(a) => a.spec.config.as_ref(),
            Self::Traj(a) => a.spec.config.as_ref(),
            Self::BoostCheck(a) => a.spec.config.as_ref(),
            Self::FindV(a) => a.spec.config.as_ref(),
        }
    }

    /// Flag values as a config overlay.
    pub fn overlay(&self) -> RunConfig {
        match self {
            Self::Solve(a) => a.spec.overlay(),
            Self::Scan(a) => RunConfig {
                v_min: a.v_min,
                v_max: a.v_max,
                v_steps: a.v_steps,
                a_min: a.a_min,
                a_max: a.a_max,
                a_steps: a.a_steps,
                ..a.spec.overlay()
            },
            Self::Field(a) => RunConfig {
                x_min: a.x_min,
                x_max: a.x_max,
                x_steps: a.x_steps,
                t: a.t,
                ..a.spec.overlay()
            },
            Self::Traj(a) => {
                let mut c = RunConfig {
                    law: a.law.clone(),
                    ..a.spec.overlay()
                };
                a.seeds.apply(&mut c);
                c
            }
            Self::BoostCheck(a) => {
                let mut c = RunConfig {
                    rapidities: a.rapidities.clone(),
                    ..a.spec.overlay()
                };
                a.seeds.apply(&mut c);
                c
            }
            Self::FindV(a) => RunConfig {
                target: a.target,
                measure: a.measure.clone(),
                v_lo: a.v_lo,
                v_hi: a.v_hi,
                ..a.spec.overlay()
            },
        }
    }
}
