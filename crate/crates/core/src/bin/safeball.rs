use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use safeball::harness::{
    load_instances, render_report, run_ball_comparison, run_dynamic_screening, to_stable_json,
    Config, ReportFormat, SyntheticSpec,
};
use safeball::{prox_grad_solve, BallKind, DynamicScreening, Error, SolveOptions};

#[derive(Parser)]
#[command(
    name = "safeball",
    version,
    about = "Safe balls and safe screening experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable), e.g. --set lambda_fracs=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed for synthetic instances
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn config(&self) -> Result<Config, Error> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        if let Some(seed) = self.seed {
            cfg.synthetic.seed = seed;
        }
        Ok(cfg)
    }

    fn report_format(&self) -> ReportFormat {
        match self.format {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build every applicable ball on a grid of cells and check them against u*
    CompareBalls(Common),
    /// Solve with dynamic screening and record screened counts over time
    ScreenRun(Common),
    /// Solve each configured instance at the first lambda fraction
    Solve {
        #[command(flatten)]
        common: Common,
        /// Ball driving dynamic screening (off when omitted)
        #[arg(long)]
        screen: Option<String>,
    },
    /// Write a synthetic instance as CSV (header, last column y)
    Gen {
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_normalize: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: GenFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    Csv,
    Libsvm,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen_text(spec: &SyntheticSpec, format: GenFormat) -> Result<String, Error> {
    let data = safeball::harness::generate(spec)?;
    let rows = data.a.to_rows();
    let mut out = String::new();
    match format {
        GenFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<String> = (1..=spec.n).map(|j| format!("x{j}")).collect();
            header.push("y".into());
            w.write_record(&header)?;
            for (row, y) in rows.iter().zip(&data.y) {
                let mut rec: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                rec.push(format!("{y:e}"));
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            out.push_str(&String::from_utf8(bytes).expect("utf-8"));
        }
        GenFormat::Libsvm => {
            for (row, y) in rows.iter().zip(&data.y) {
                out.push_str(&format!("{y:e}"));
                for (j, v) in row.iter().enumerate() {
                    if *v != 0.0 {
                        out.push_str(&format!(" {}:{v:e}", j + 1));
                    }
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::CompareBalls(common) => {
            let cfg = common.config()?;
            let instances = load_instances(&cfg)?;
            let report =
                run_ball_comparison(&instances, &cfg.lambda_fracs, &cfg.pairs, cfg.timings)?;
            write_output(
                common.out.as_deref(),
                &render_report(&report, common.report_format())?,
            )
        }
        Command::ScreenRun(common) => {
            let cfg = common.config()?;
            let instances = load_instances(&cfg)?;
            let report = run_dynamic_screening(&instances, &cfg)?;
            write_output(
                common.out.as_deref(),
                &render_report(&report, common.report_format())?,
            )
        }
        Command::Solve { common, screen } => {
            let cfg = common.config()?;
            if matches!(common.format, Format::Csv) {
                return Err(Error::InvalidParameter("solve only writes json".into()));
            }
            let dynamic_screening = match screen {
                Some(name) => Some(DynamicScreening {
                    ball: BallKind::parse(&name)
                        .ok_or_else(|| Error::InvalidParameter(format!("unknown ball `{name}`")))?,
                    period: cfg.period,
                    shadow: None,
                }),
                None => None,
            };
            let opts = SolveOptions {
                max_iters: cfg.max_iters,
                gap_tolerance: cfg.gap_tolerance,
                dynamic_screening,
                ..SolveOptions::default()
            };
            let frac = *cfg
                .lambda_fracs
                .first()
                .ok_or_else(|| Error::InvalidParameter("lambda_fracs is empty".into()))?;
            let mut results = std::collections::BTreeMap::new();
            for inst in load_instances(&cfg)? {
                let p = inst.problem(frac * inst.lambda_max()?)?;
                results.insert(inst.name.clone(), prox_grad_solve(&p, &opts)?);
            }
            write_output(common.out.as_deref(), &to_stable_json(&results)?)
        }
        Command::Gen {
            m,
            n,
            density,
            noise,
            seed,
            no_normalize,
            out,
            format,
        } => {
            let spec = SyntheticSpec {
                m,
                n,
                density,
                noise,
                seed,
                normalize: !no_normalize,
            };
            write_output(out.as_deref(), &gen_text(&spec, format)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
