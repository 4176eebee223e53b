//! `rieszlab`: build hosts, estimate Riesz-transform norms and run experiments.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rieszlab::experiments::{
    axis_profile, base_profile, exp_cylinder_lemma, exp_dichotomy, exp_heat_convergence, exp_localization,
    exp_rescaling, exp_sigma_bounds, fmt_float, heat_source, localization_source, sigma_default_fields,
    ExperimentReport, ManifoldSpec, Verdict, EXPERIMENT_IDS,
};
use rieszlab::io::{read_graph, write_field, write_graph};
use rieszlab::spectral::decompose_with_cap;
use rieszlab::{riesz_norm, Error, Restriction, WeightedGraphManifold};

use config::{HostKind, RunConfig};

const EX_FAIL: u8 = 2;
const EX_INCONCLUSIVE: u8 = 3;
const EX_USAGE: u8 = 64;
const EX_DATA: u8 = 65;
const EX_UNAVAILABLE: u8 = 69;
const EX_SOFTWARE: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "rieszlab", version, about = "Riesz transforms on weighted-graph manifolds")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config; default ".")
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config; default all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the configured host as a graph interchange file
    Build,
    /// Estimate the L^p norm of the Riesz transform on the configured host
    RieszNorm,
    /// Run one experiment and write its report
    Experiment {
        /// One of: cylinder, rescale, localize, heat, sigma-bounds, dichotomy
        id: String,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EX_USAGE,
            Failure::Data(_) => EX_DATA,
            Failure::Lib(e) => match e {
                Error::InvalidArgument(_) | Error::OutOfRange(_) | Error::SurgeryFailure(_) | Error::Parse { .. } => {
                    EX_DATA
                }
                Error::ResourceLimit(_) => EX_UNAVAILABLE,
                Error::Internal(_) | Error::Io(_) => EX_SOFTWARE,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::Data(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
}

impl Run {
    fn seed(&self) -> Result<u64, Failure> {
        self.cfg
            .seed
            .ok_or_else(|| Failure::Usage("a seed is required (--seed N or `seed` in the config)".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EX_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("rieszlab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Data(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| Failure::Data(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let run = Run { cfg, out };

    if let Command::Experiment { id } = &cli.command {
        if !EXPERIMENT_IDS.contains(&id.as_str()) {
            return Err(Failure::Usage(format!(
                "unknown experiment `{id}`; expected one of {}",
                EXPERIMENT_IDS.join(", ")
            )));
        }
    }
    if !matches!(cli.command, Command::Build) {
        run.seed()?;
    }
    if run.cfg.threads == Some(0) {
        return Err(Failure::Usage("--threads must be positive".into()));
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = run.cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Lib(Error::Internal(format!("thread pool: {e}"))))?;
    std::fs::create_dir_all(&run.out).map_err(|e| Failure::Lib(Error::Io(e)))?;
    let resolved = RunConfig {
        out: None,
        threads: None,
        ..run.cfg.clone()
    };
    write(&run.out.join("run.toml"), &resolved.to_toml())?;
    pool.install(|| match &cli.command {
        Command::Build => cmd_build(&run),
        Command::RieszNorm => cmd_riesz_norm(&run),
        Command::Experiment { id } => cmd_experiment(&run, id),
    })
}

/// The configured host with a label and, for glued hosts, the piece embeddings.
fn host(cfg: &RunConfig) -> Result<(String, WeightedGraphManifold, Vec<rieszlab::glue::Embedding>), Failure> {
    Ok(match cfg.host {
        HostKind::Base => match &cfg.base {
            ManifoldSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
                let doc = read_graph(&text)?;
                (cfg.base.label(), doc.graph, doc.embeddings)
            }
            spec => (spec.label(), spec.build()?, Vec::new()),
        },
        HostKind::Cylinder => {
            let c = cfg.cylinder.build()?;
            let label = format!("cylinder({};steps={})", cfg.cylinder.base.label(), cfg.cylinder.axis_steps);
            (label, c.graph().clone(), Vec::new())
        }
        HostKind::Glued => {
            let g = cfg.glued.build()?;
            let label = format!("glued(pieces={})", g.pieces().len());
            (label, g.ambient().clone(), g.embeddings().to_vec())
        }
    })
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::Lib(Error::Io(e)))
}

fn cmd_build(run: &Run) -> Result<u8, Failure> {
    let (label, g, emb) = host(&run.cfg)?;
    let d = decompose_with_cap(&g, run.cfg.max_vertices)?;
    let path = run.out.join("host.graph");
    write(&path, &write_graph(&g, &emb))?;
    println!("host {label}");
    println!("vertices {}", g.len());
    println!("edges {}", g.edges().len());
    println!("embeddings {}", emb.len());
    println!("spectral_gap {}", fmt_float(d.spectral_gap()));
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_riesz_norm(run: &Run) -> Result<u8, Failure> {
    let cfg = &run.cfg;
    let seed = run.seed()?;
    let (label, g, _) = host(cfg)?;
    let d = decompose_with_cap(&g, cfg.max_vertices)?;
    let opts = rieszlab::EstimatorOptions {
        seed,
        ..cfg.estimator.clone()
    };
    let mut csv = String::from("host_id,p,value,restarts,converged,witness_file\n");
    let mut converged = true;
    for &p in &cfg.p {
        let e = riesz_norm(&g, &d, p, &Restriction::All, &opts)?;
        let witness = format!("riesz_norm.witness.p{p}.txt");
        write(&run.out.join(&witness), &write_field(e.witness.values()))?;
        converged &= e.converged;
        let _ = writeln!(
            csv,
            "\"{label}\",{},{},{},{},{witness}",
            fmt_float(p),
            fmt_float(e.value),
            e.restarts,
            e.converged
        );
    }
    write(&run.out.join("riesz_norm.csv"), &csv)?;
    let verdict = if converged { Verdict::Pass } else { Verdict::Inconclusive };
    let line = format!("riesz-norm {verdict} host={label} exponents={}\n", cfg.p.len());
    write(&run.out.join("riesz_norm.verdict"), &line)?;
    print!("{line}");
    Ok(exit_code(verdict))
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => EX_FAIL,
        Verdict::Inconclusive => EX_INCONCLUSIVE,
    }
}

fn experiment(run: &Run, id: &str) -> Result<ExperimentReport, Failure> {
    let cfg = &run.cfg;
    let seed = run.seed()?;
    Ok(match id {
        "cylinder" => exp_cylinder_lemma(&cfg.base.build()?, &cfg.cylinder_lemma, seed)?,
        "rescale" => {
            let base = cfg.base.build()?;
            let r = &cfg.rescale;
            let f = base_profile(&base)?;
            let rho = axis_profile(r.axis_steps, r.spacing, r.profile_width, r.p)?;
            exp_rescaling(&base, &f, &rho, r)?
        }
        "localize" => {
            let g = cfg.glued.build()?;
            let h = localization_source(&g, &cfg.localize)?;
            exp_localization(&g, &h, &cfg.localize)?
        }
        "heat" => {
            let g = cfg.glued.build()?;
            let f = heat_source(&g, &cfg.heat)?;
            exp_heat_convergence(&g, &f, &cfg.heat, seed)?
        }
        "sigma-bounds" => {
            let c = cfg.cylinder.build()?;
            let (h, g) = sigma_default_fields(&c)?;
            exp_sigma_bounds(&c, &h, &g, &cfg.sigma_bounds)?
        }
        "dichotomy" => {
            let bases = cfg.bases.iter().map(|b| b.build()).collect::<Result<Vec<_>, _>>()?;
            exp_dichotomy(&bases, &cfg.dichotomy, seed)?
        }
        other => return Err(Failure::Usage(format!("unknown experiment `{other}`"))),
    })
}

fn cmd_experiment(run: &Run, id: &str) -> Result<u8, Failure> {
    let report = experiment(run, id)?;
    report.write(&run.out)?;
    print!("{}", report.verdict_line());
    Ok(exit_code(report.verdict))
}
