use clap::{Args, Parser, Subcommand};
use fracstab::cli::{self, Command, Exit, Overrides, RunManifest, SweepParam};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracstab", version, about = "Stability analysis for 3-D multi-order fractional linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Classify the characteristic function into its structural case.
    Classify(Common),
    /// Print Q(s), its simple form and the rho sets.
    PrintCharfn(Common),
    /// Run every criterion and the winding-number oracle.
    Analyze(Common),
    /// Count right-half-plane zeros of Q by the argument principle.
    Oracle(Common),
    /// Integrate the system and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Keep every n-th grid point in trajectory.csv.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Decay test of the nonlinear system from a ladder of initial radii.
    Basin {
        #[command(flatten)]
        common: Common,
        /// Comma-separated radii (defaults to [basin] radii in the config).
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Evaluate criteria and oracle along a one-parameter family.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// a<i><j> or alpha<i>.
        #[arg(long)]
        param: String,
        /// lo:hi:n or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
}

#[derive(Args)]
struct Common {
    /// System file (.toml or .json).
    config: PathBuf,
    /// Directory for CSV, SVG and diagnostic output.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial state as x1,x2,x3.
    #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, conflicts_with = "diag")]
    nu: Option<f64>,
    /// lo:hi
    #[arg(long, conflicts_with = "diag", allow_hyphen_values = true)]
    window: Option<String>,
    /// nu=<v>,window=<lo>:<hi>
    #[arg(long)]
    diag: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Write contour.csv (oracle only).
    #[arg(long)]
    dump_contour: bool,
    /// Write SVG plots next to the CSV files (simulate only).
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn overrides(&self) -> Result<Overrides, cli::CliError> {
        let (mut nu, mut window) = (self.nu, self.window.as_deref().map(cli::parse_window).transpose()?);
        if let Some(d) = &self.diag {
            (nu, window) = cli::parse_diag(d)?;
        }
        Ok(Overrides {
            step: self.step,
            t_end: self.t_end,
            x0: self.x0.as_ref().map(|v| [v[0], v[1], v[2]]),
            nu,
            window,
            epsilon: self.epsilon,
            radius: self.radius,
        })
    }
}

fn manifest(cli: Cli) -> Result<RunManifest, cli::CliError> {
    let (common, command) = match cli.command {
        Sub::Classify(c) => (c, Command::Classify),
        Sub::PrintCharfn(c) => (c, Command::PrintCharFn),
        Sub::Analyze(c) => (c, Command::Analyze),
        Sub::Oracle(c) => {
            let dump_contour = c.dump_contour;
            (c, Command::Oracle { dump_contour })
        }
        Sub::Simulate { common, stride } => {
            let svg = common.svg;
            (common, Command::Simulate { stride, svg })
        }
        Sub::Basin { common, radii } => (common, Command::Basin { radii }),
        Sub::Sweep { common, param, grid } => {
            let param = SweepParam::parse(&param)?;
            let values = cli::parse_grid(&grid)?;
            (common, Command::Sweep { param, values })
        }
    };
    Ok(RunManifest {
        command,
        overrides: common.overrides()?,
        input: common.config,
        output_dir: common.out,
    })
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Usage.code() as u8 } else { 0 });
        }
    };
    let result = manifest(parsed).and_then(|m| cli::run(&m, &mut std::io::stdout().lock()));
    match result {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::Usage.code() as u8)
        }
    }
}
