//! `optloss` — capacities of lossy quantum-optical channels from the
//! command line.
//!
//! Subcommands expose the library layer one computation at a time:
//! `capacity` for single-point evaluations, `optimize` for the
//! power-constrained prior optimization of the photon-counting channel,
//! `table` for the eight-row regression table, and `diagram` / `curves`
//! for the grid data behind the optimality-region and curve plots. Data
//! commands emit CSV (or JSON with `--format json`) that is
//! byte-deterministic for a fixed parameter set; every file written is
//! referenced by a manifest placed next to it.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use optloss::blahut::{blahut_run, gap_indices, solve_power, BlahutConfig, BlahutRun};
use optloss::blahut::{GAP_THRESHOLD, SUPPORT_THRESHOLD};
use optloss::diagrams::{
    self, default_eta_grid, default_n_grid, default_number_n_grid, linear_grid, log_grid, sweep,
    ChannelKind, SweepSpec,
};
use optloss::gaussian::{
    hall_bound, heterodyne_capacity, homodyne_mi, optimal_xi, unoptimized_homodyne_mi,
    SqueezedEncoding,
};
use optloss::number::{discrete_mi, LossKernel};
use optloss::reference;
use optloss::types::{thermal_prior, ChannelPoint};

use output::{fmt_full, Cell, DataFormat, DataTable, Emitter, Report, ReportFormat, Unit};

#[derive(Parser)]
#[command(
    name = "optloss",
    version,
    about = "Capacities of quantum-optical channels in the presence of loss",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutual information of one channel at one (eta, N) operating point.
    Capacity(CapacityArgs),
    /// Optimize the photon-number prior under loss and a power budget.
    Optimize(OptimizeArgs),
    /// Recompute the eight regression rows and compare with the reference
    /// values; exits nonzero if any column misses its tolerance.
    Table(TableArgs),
    /// Optimality-region data over the loss-power plane (one row per grid
    /// cell: capacities of the compared channels and the winner).
    Diagram(DiagramArgs),
    /// Curve families: squeezing budget vs power (fig1), percent gain of
    /// loss-aware squeezing (fig4), degradation at fixed power (fig5).
    Curves(CurvesArgs),
}

/// `--bits` / `--nats` choose the rendering of information columns; the
/// underlying values are identical.
#[derive(Args, Debug)]
struct UnitFlags {
    /// Report information in bits.
    #[arg(long, conflicts_with = "nats")]
    bits: bool,
    /// Report information in nats (the default).
    #[arg(long)]
    nats: bool,
}

impl UnitFlags {
    fn unit(&self) -> Unit {
        if self.bits {
            Unit::Bits
        } else {
            Unit::Nats
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Coherent,
    Squeezed,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriorArg {
    Thermal,
    Optimal,
}

#[derive(Args)]
struct CapacityArgs {
    /// Channel to evaluate.
    #[arg(long, value_enum)]
    channel: ChannelArg,
    /// Attenuation factor in (0, 1].
    #[arg(long)]
    eta: f64,
    /// Mean photon number at the transmitter.
    #[arg(long)]
    n: f64,
    /// Prior for the number channel.
    #[arg(long, value_enum, default_value_t = PriorArg::Thermal)]
    prior: PriorArg,
    /// Evaluate the squeezed channel at this xi = e^{-2r} instead of the
    /// loss-optimal squeezing.
    #[arg(long)]
    xi: Option<f64>,
    /// Fock-space truncation for the number channel.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    /// Iteration budget for `--prior optimal`.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Attenuation factor in (0, 1].
    #[arg(long)]
    eta: f64,
    /// Target mean photon number; the multiplier is found by bisection.
    #[arg(long, conflicts_with = "mu")]
    n: Option<f64>,
    /// Run at this fixed Lagrange multiplier instead of targeting a power.
    #[arg(long)]
    mu: Option<f64>,
    /// Fock-space truncation.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    /// Iteration cap.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    /// Where to write the converged prior (CSV, columns n,p_n).
    #[arg(long, default_value = "blahut_prior.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args)]
struct TableArgs {
    /// Fock-space truncation.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    /// Iteration budget per row (the tolerances are calibrated at 1e4).
    #[arg(long, default_value_t = reference::REGRESSION_MAX_ITERS)]
    iters: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiagramKind {
    /// Coherent vs squeezed with the lossless-case squeezing.
    Fig2,
    /// Coherent vs loss-optimized squeezed.
    Fig3,
    /// Coherent vs thermal-prior number channel.
    Fig6,
    /// Coherent vs optimized number channel.
    Fig8,
    /// Coherent vs optimized squeezed vs optimized number.
    Fig9,
}

impl DiagramKind {
    fn channels(self) -> Vec<ChannelKind> {
        match self {
            DiagramKind::Fig2 => vec![ChannelKind::Coherent, ChannelKind::SqueezedLosslessPrior],
            DiagramKind::Fig3 => vec![ChannelKind::Coherent, ChannelKind::SqueezedOptimized],
            DiagramKind::Fig6 => vec![ChannelKind::Coherent, ChannelKind::NumberThermal],
            DiagramKind::Fig8 => vec![ChannelKind::Coherent, ChannelKind::NumberOptimized],
            DiagramKind::Fig9 => vec![
                ChannelKind::Coherent,
                ChannelKind::SqueezedOptimized,
                ChannelKind::NumberOptimized,
            ],
        }
    }

    fn needs_number_channel(self) -> bool {
        !matches!(self, DiagramKind::Fig2 | DiagramKind::Fig3)
    }
}

#[derive(Args)]
struct DiagramArgs {
    /// Which channel comparison to sweep.
    #[arg(long, value_enum)]
    kind: DiagramKind,
    /// Attenuation grid, `lo:hi:steps` (linear). Default 0.02:1:50.
    #[arg(long)]
    eta_grid: Option<GridSpec>,
    /// Power grid, `lo:hi:steps[:log]`. Default 0.1:100:60:log for the
    /// Gaussian figures, 0.1:40:60:log when a number channel is swept.
    #[arg(long)]
    n_grid: Option<GridSpec>,
    /// Fock-space truncation for the number channels.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    /// Per-cell optimizer budget (region labels need far fewer iterations
    /// than the regression table).
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    unit: UnitFlags,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveKind {
    /// Optimal squeezing photons versus N, one column per eta.
    Fig1,
    /// Percent improvement of loss-aware squeezing, one column per eta.
    Fig4,
    /// Mutual information versus eta at fixed N for the three channels
    /// with lossless-case priors.
    Fig5,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, value_enum)]
    kind: CurveKind,
    /// Attenuations for the fig1/fig4 curve families.
    #[arg(long, value_delimiter = ',')]
    eta_list: Option<Vec<f64>>,
    /// Power grid for fig1/fig4, `lo:hi:steps[:log]`.
    #[arg(long)]
    n_grid: Option<GridSpec>,
    /// Attenuation grid for fig5, `lo:hi:steps`.
    #[arg(long)]
    eta_grid: Option<GridSpec>,
    /// Fixed mean photon number for fig5.
    #[arg(long, default_value_t = 10.0)]
    n: f64,
    /// Fock-space truncation for the fig5 number channel.
    #[arg(long, default_value_t = 200)]
    dim: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    unit: UnitFlags,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
}

/// A grid given as `lo:hi:steps` (linear) or `lo:hi:steps:log`.
#[derive(Debug, Clone)]
struct GridSpec(Vec<f64>);

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err("expected lo:hi:steps[:log]".to_string());
        }
        let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
        let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
        let steps: usize = parts[2].parse().map_err(|e| format!("bad steps: {e}"))?;
        let grid = if parts.len() == 4 {
            if parts[3] != "log" {
                return Err(format!("unknown grid scale `{}`", parts[3]));
            }
            log_grid(lo, hi, steps)
        } else {
            linear_grid(lo, hi, steps)
        };
        grid.map(GridSpec).map_err(|e| e.to_string())
    }
}

fn trimmed(x: f64) -> String {
    format!("{x}")
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Capacity(args) => cmd_capacity(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Table(args) => cmd_table(args),
        Command::Diagram(args) => cmd_diagram(args),
        Command::Curves(args) => cmd_curves(args),
    }
}

fn cmd_capacity(args: CapacityArgs) -> Result<ExitCode> {
    let pt = ChannelPoint::new(args.eta, args.n)?;
    let mut report = Report::default();
    report.push("eta", Cell::Num(args.eta));
    report.push("n_mean", Cell::Num(args.n));

    match args.channel {
        ChannelArg::Coherent => {
            report.push("channel", Cell::from("coherent"));
            let mi = heterodyne_capacity(pt);
            report.push("mutual_information_nats", Cell::Num(mi.nats()));
            report.push("mutual_information_bits", Cell::Num(mi.bits()));
        }
        ChannelArg::Squeezed => {
            let (label, enc) = match args.xi {
                Some(xi) => ("squeezed", SqueezedEncoding::from_xi(xi, args.n)?),
                None => ("squeezed_optimized", optimal_xi(pt)),
            };
            report.push("channel", Cell::from(label));
            report.push("xi", Cell::Num(enc.squeeze_xi()));
            report.push("squeeze_photons", Cell::Num(enc.squeeze_photons()));
            let mi = homodyne_mi(pt, enc)?;
            let bound = hall_bound(pt);
            report.push("mutual_information_nats", Cell::Num(mi.nats()));
            report.push("mutual_information_bits", Cell::Num(mi.bits()));
            let achieved = (bound.nats() - mi.nats()).abs() <= 1e-9;
            report.push_annotated(
                "hall_bound_nats",
                Cell::Num(bound.nats()),
                if achieved {
                    "(achieved)"
                } else {
                    "(not achieved)"
                },
            );
            report.push("hall_bound_bits", Cell::Num(bound.bits()));
        }
        ChannelArg::Number => match args.prior {
            PriorArg::Thermal => {
                report.push("channel", Cell::from("number_thermal"));
                report.push("dim", Cell::Int(args.dim as u64));
                let kernel = LossKernel::new(args.eta, args.dim)?;
                let prior = thermal_prior(args.n, args.dim)?;
                let mi = discrete_mi(&prior, &kernel)?;
                report.push("mutual_information_nats", Cell::Num(mi.nats()));
                report.push("mutual_information_bits", Cell::Num(mi.bits()));
            }
            PriorArg::Optimal => {
                report.push("channel", Cell::from("number_optimized"));
                report.push("dim", Cell::Int(args.dim as u64));
                let cfg = BlahutConfig {
                    max_iters: args.iters,
                    dim: args.dim,
                    ..Default::default()
                };
                let run = solve_power(args.eta, args.n, &cfg)?;
                report.push("mutual_information_nats", Cell::Num(run.mi.nats()));
                report.push("mutual_information_bits", Cell::Num(run.mi.bits()));
                report.push("n_achieved", Cell::Num(run.n_mean));
                report.push("mu", Cell::Num(run.mu));
                report.push("iterations", Cell::Int(run.iters_used as u64));
            }
        },
    }

    print!("{}", report.render(args.format));
    Ok(ExitCode::SUCCESS)
}

fn run_report(report: &mut Report, run: &BlahutRun, eta: f64) -> Result<()> {
    report.push("eta", Cell::Num(eta));
    report.push("mu", Cell::Num(run.mu));
    report.push("n_achieved", Cell::Num(run.n_mean));
    report.push("mutual_information_nats", Cell::Num(run.mi.nats()));
    report.push("mutual_information_bits", Cell::Num(run.mi.bits()));
    report.push("iterations", Cell::Int(run.iters_used as u64));
    report.push("eps_i", Cell::Num(run.eps_i));
    report.push("eps_p", Cell::Num(run.eps_p));
    let improvement = optloss::blahut::percent_improvement(run, eta)?;
    report.push("improvement_pct", Cell::Num(improvement));
    let gaps = gap_indices(&run.prior, GAP_THRESHOLD, SUPPORT_THRESHOLD);
    report.push("gap_count", Cell::Int(gaps.len() as u64));
    if !gaps.is_empty() {
        let list = gaps
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        report.push("gap_indices", Cell::Text(list));
    }
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<ExitCode> {
    let cfg = BlahutConfig {
        max_iters: args.iters,
        dim: args.dim,
        ..Default::default()
    };
    let run = match (args.n, args.mu) {
        (Some(n), None) => solve_power(args.eta, n, &cfg)?,
        (None, Some(mu)) => blahut_run(&BlahutConfig { mu, ..cfg }, args.eta, None)?,
        (None, None) => bail!("provide a target power with --n or a multiplier with --mu"),
        (Some(_), Some(_)) => unreachable!("clap rejects --n with --mu"),
    };

    let mut prior_csv = String::from("n,p_n\n");
    for (n, &p) in run.prior.probs().iter().enumerate() {
        prior_csv.push_str(&format!("{n},{}\n", fmt_full(p)));
    }

    let parameters = serde_json::json!({
        "eta": args.eta,
        "n_target": args.n,
        "mu": args.mu,
        "dim": args.dim,
        "iters": args.iters,
    });
    let mut emitter = Emitter::new("optimize", parameters);
    emitter.emit(Some(&args.out), &prior_csv)?;

    let mut report = Report::default();
    run_report(&mut report, &run, args.eta)?;
    report.push("prior_file", Cell::Text(args.out.display().to_string()));
    print!("{}", report.render(args.format));
    emitter.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs) -> Result<ExitCode> {
    let cfg = BlahutConfig {
        max_iters: args.iters,
        dim: args.dim,
        ..Default::default()
    };
    let rows = reference::compute_table(&cfg)?;

    let mut table = DataTable::new([
        "row",
        "eta",
        "n_target",
        "n_achieved",
        "i_opt_bits",
        "i_opt_ref_bits",
        "delta_i_opt_bits",
        "i_th_bits",
        "i_th_ref_bits",
        "delta_i_th_bits",
        "i_coh_bits",
        "i_coh_ref_bits",
        "delta_i_coh_bits",
        "improvement_pct",
        "improvement_ref_pct",
        "delta_improvement_pct",
        "eps_i",
        "eps_p",
        "within_tol",
    ]);
    let mut all_ok = true;
    for row in &rows {
        let ok = row.within_tolerances();
        all_ok &= ok;
        table.push_row(vec![
            Cell::Text(row.reference.label.to_string()),
            Cell::Num(row.reference.eta),
            Cell::Num(row.reference.n_mean),
            Cell::Num(row.run.n_mean),
            Cell::Num(row.i_opt.bits()),
            Cell::Num(row.reference.i_opt_bits),
            Cell::Num(row.delta_i_opt_bits()),
            Cell::Num(row.i_th.bits()),
            Cell::Num(row.reference.i_th_bits),
            Cell::Num(row.delta_i_th_bits()),
            Cell::Num(row.i_coh.bits()),
            Cell::Num(row.reference.i_coh_bits),
            Cell::Num(row.delta_i_coh_bits()),
            Cell::Num(row.improvement_pct),
            Cell::Num(row.reference.improvement_pct),
            Cell::Num(row.delta_improvement_pct()),
            Cell::Num(row.run.eps_i),
            Cell::Num(row.run.eps_p),
            Cell::Bool(ok),
        ]);
    }

    let parameters = serde_json::json!({ "dim": args.dim, "iters": args.iters });
    let mut emitter = Emitter::new("table", parameters);
    emitter.emit(args.out.as_deref(), &table.render(args.format))?;
    emitter.finish()?;

    if !all_ok {
        eprintln!("table: at least one row missed its tolerance");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagram(args: DiagramArgs) -> Result<ExitCode> {
    let channels = args.kind.channels();
    let eta_grid = args
        .eta_grid
        .clone()
        .map(|g| g.0)
        .unwrap_or_else(default_eta_grid);
    let n_grid = args.n_grid.clone().map(|g| g.0).unwrap_or_else(|| {
        if args.kind.needs_number_channel() {
            default_number_n_grid()
        } else {
            default_n_grid()
        }
    });
    let blahut_cfg = args.kind.needs_number_channel().then(|| BlahutConfig {
        max_iters: args.iters,
        dim: args.dim,
        ..Default::default()
    });
    let spec = SweepSpec::new(eta_grid, n_grid, channels.clone(), blahut_cfg)?;
    let cells = sweep(&spec)?;

    let unit = args.unit.unit();
    let mut columns = vec!["eta".to_string(), "n_mean".to_string()];
    for kind in &channels {
        columns.push(format!("mi_{}_{}", kind.label(), unit.suffix()));
    }
    columns.push("winner".to_string());
    let mut table = DataTable::new(columns);
    for cell in &cells {
        let mut row = vec![Cell::Num(cell.point.eta()), Cell::Num(cell.point.n_mean())];
        for kind in &channels {
            row.push(Cell::Num(unit.convert(cell.capacities[kind])));
        }
        row.push(Cell::Text(cell.winner.label().to_string()));
        table.push_row(row);
    }

    let parameters = serde_json::json!({
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "eta_grid": spec.eta_grid,
        "n_grid": spec.n_grid,
        "dim": args.dim,
        "iters": args.iters,
        "unit": unit.suffix(),
    });
    let mut emitter = Emitter::new("diagram", parameters);
    emitter.emit(args.out.as_deref(), &table.render(args.format))?;
    emitter.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_curves(args: CurvesArgs) -> Result<ExitCode> {
    let unit = args.unit.unit();
    let (table, parameters) = match args.kind {
        CurveKind::Fig1 => {
            let etas = args
                .eta_list
                .clone()
                .unwrap_or_else(|| vec![1.0, 0.95, 0.85, 0.7, 0.5]);
            let n_grid = args
                .n_grid
                .clone()
                .map(|g| g.0)
                .unwrap_or_else(default_n_grid);
            let mut columns = vec!["n_mean".to_string()];
            for &eta in &etas {
                columns.push(format!("squeeze_photons_eta_{}", trimmed(eta)));
            }
            let mut table = DataTable::new(columns);
            let curves: Vec<Vec<(f64, f64)>> = etas
                .iter()
                .map(|&eta| diagrams::squeeze_photon_curve(eta, &n_grid))
                .collect::<optloss::Result<_>>()?;
            for (i, &n) in n_grid.iter().enumerate() {
                let mut row = vec![Cell::Num(n)];
                for curve in &curves {
                    row.push(Cell::Num(curve[i].1));
                }
                table.push_row(row);
            }
            let params = serde_json::json!({
                "kind": "fig1", "eta_list": etas, "n_grid": n_grid,
            });
            (table, params)
        }
        CurveKind::Fig4 => {
            let etas = args
                .eta_list
                .clone()
                .unwrap_or_else(|| vec![0.15, 0.25, 0.4, 0.6, 0.9]);
            let n_grid = args
                .n_grid
                .clone()
                .map(|g| g.0)
                .unwrap_or_else(default_n_grid);
            let mut columns = vec!["n_mean".to_string()];
            for &eta in &etas {
                columns.push(format!("improvement_pct_eta_{}", trimmed(eta)));
            }
            let mut table = DataTable::new(columns);
            for &n in &n_grid {
                let mut row = vec![Cell::Num(n)];
                for &eta in &etas {
                    let pt = ChannelPoint::new(eta, n)?;
                    let frozen = unoptimized_homodyne_mi(pt).nats();
                    let best = optloss::gaussian::optimized_homodyne_mi(pt).nats();
                    let pct = if frozen > 0.0 {
                        100.0 * (best - frozen) / frozen
                    } else {
                        0.0
                    };
                    row.push(Cell::Num(pct));
                }
                table.push_row(row);
            }
            let params = serde_json::json!({
                "kind": "fig4", "eta_list": etas, "n_grid": n_grid,
            });
            (table, params)
        }
        CurveKind::Fig5 => {
            let eta_grid = args
                .eta_grid
                .clone()
                .map(|g| g.0)
                .unwrap_or_else(default_eta_grid);
            let curve = diagrams::degradation_curve(args.n, &eta_grid, args.dim)?;
            let mut table = DataTable::new([
                "eta".to_string(),
                format!("mi_number_thermal_{}", unit.suffix()),
                format!("mi_coherent_{}", unit.suffix()),
                format!("mi_squeezed_lossless_prior_{}", unit.suffix()),
            ]);
            for i in 0..curve.eta.len() {
                table.push_row(vec![
                    Cell::Num(curve.eta[i]),
                    Cell::Num(unit.convert(curve.number_thermal[i])),
                    Cell::Num(unit.convert(curve.coherent[i])),
                    Cell::Num(unit.convert(curve.squeezed_lossless_prior[i])),
                ]);
            }
            let params = serde_json::json!({
                "kind": "fig5", "n": args.n, "eta_grid": eta_grid, "dim": args.dim,
                "unit": unit.suffix(),
            });
            (table, params)
        }
    };

    let mut emitter = Emitter::new("curves", parameters);
    emitter.emit(args.out.as_deref(), &table.render(args.format))?;
    emitter.finish()?;
    Ok(ExitCode::SUCCESS)
}
