use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vem_spectra::adapt::Strategy;
use vem_spectra::eig::{solve_smallest, EigOptions};
use vem_spectra::experiment::{
    emit_report, run_strategy, run_test1, run_test2, Domain, ExperimentConfig, Format,
    MaterialParams, MeshFamily, Report, Test2Result,
};
use vem_spectra::mesh::{generate_vessel_mesh_with, PolyMesh, VesselDirichlet};
use vem_spectra::vem::{assemble_with, AssemblyOptions, StabilizationScaling};

/// Virtual element vibration modes of 2-D elastic solids.
#[derive(Parser)]
#[command(name = "vem-spectra", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "VEM_SPECTRA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
    /// Lowest vibration frequencies on one mesh.
    Solve(SolveArgs),
    /// Adaptive refinement on the vessel.
    Adapt(AdaptArgs),
    /// Run a configured study and write its tables, or re-render a saved one.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a benchmark mesh and write it as JSON.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Trapezoid,
    Hexagon,
    Triangle,
    Vessel,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clamp {
    OuterBottom,
    OuterBoundary,
}

impl From<Clamp> for VesselDirichlet {
    fn from(c: Clamp) -> Self {
        match c {
            Clamp::OuterBottom => Self::OuterBottom,
            Clamp::OuterBoundary => Self::OuterBoundary,
        }
    }
}

#[derive(Args)]
struct MeshSource {
    /// Read the mesh from this JSON file instead of generating one.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Elements per side (ignored for the vessel).
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Clamped part of the vessel boundary.
    #[arg(long, value_enum, default_value = "outer-bottom")]
    vessel_dirichlet: Clamp,
}

impl MeshSource {
    fn load(&self) -> Result<PolyMesh> {
        if let Some(path) = &self.mesh {
            return PolyMesh::read_json(path).with_context(|| format!("reading mesh {}", path.display()));
        }
        let Some(family) = self.family else {
            bail!("give either --mesh FILE or --family");
        };
        Ok(generate(family, self.n, self.vessel_dirichlet.into())?)
    }
}

fn generate(family: Family, n: usize, clamp: VesselDirichlet) -> vem_spectra::Result<PolyMesh> {
    match family {
        Family::Trapezoid => MeshFamily::Trapezoid.generate(n),
        Family::Hexagon => MeshFamily::Hexagon.generate(n),
        Family::Triangle => MeshFamily::Triangle.generate(n),
        Family::Vessel => generate_vessel_mesh_with(clamp),
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_enum, default_value = "outer-bottom")]
    vessel_dirichlet: Clamp,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MaterialArgs {
    /// Density; defaults to steel on the square and unit data on the vessel.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    young: Option<f64>,
    #[arg(long)]
    poisson: Option<f64>,
}

impl MaterialArgs {
    fn resolve(&self, base: MaterialParams) -> MaterialParams {
        MaterialParams {
            density: self.density.unwrap_or(base.density),
            young: self.young.unwrap_or(base.young),
            poisson: self.poisson.unwrap_or(base.poisson),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scaling {
    MeanEigenvalue,
    NonzeroMean,
    Trace,
}

impl From<Scaling> for StabilizationScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::MeanEigenvalue => Self::MeanEigenvalue,
            Scaling::NonzeroMean => Self::NonzeroMean,
            Scaling::Trace => Self::Trace,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    material: MaterialArgs,
    #[arg(long, default_value_t = 6)]
    num_modes: usize,
    #[arg(long, default_value_t = 1e-9)]
    eig_tol: f64,
    #[arg(long, value_enum)]
    stabilization: Option<Scaling>,
    /// Write the assembled stiffness and mass in Matrix Market format.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
    /// Also write the frequencies as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Vem,
    Fem,
    Uniform,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Vem => Self::Vem,
            StrategyArg::Fem => Self::Fem,
            StrategyArg::Uniform => Self::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Vessel,
}

#[derive(Args)]
struct AdaptArgs {
    #[arg(long, value_enum, default_value = "vessel")]
    domain: DomainArg,
    #[arg(long, value_enum, default_value = "vem")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 25_000)]
    max_dofs: usize,
    #[arg(long, default_value_t = 0.5)]
    mark_fraction: f64,
    /// Exact lowest frequency for errors and effectivity.
    #[arg(long, default_value_t = 0.1538)]
    reference: f64,
    #[arg(long, value_enum, default_value = "outer-bottom")]
    vessel_dirichlet: Clamp,
    #[arg(long, value_enum)]
    stabilization: Option<Scaling>,
    #[command(flatten)]
    material: MaterialArgs,
    #[arg(long, default_value_t = 1e-9)]
    eig_tol: f64,
    /// Directory for the step tables; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "from")]
    config: Option<PathBuf>,
    /// Saved JSON results to re-render instead of running.
    #[arg(long)]
    from: Option<PathBuf>,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    format: Vec<String>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Mesh { command: MeshCommand::Gen(args) } => mesh_gen(args),
        Command::Solve(args) => solve(args),
        Command::Adapt(args) => adapt(args),
        Command::Report(args) => report(args),
    }
}

fn mesh_gen(args: GenArgs) -> Result<()> {
    let mesh = generate(args.family, args.n, args.vessel_dirichlet.into())?;
    mesh.write_json(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{} vertices, {} elements, {} edges -> {}",
        mesh.num_vertices(),
        mesh.num_elements(),
        mesh.edges().len(),
        args.out.display()
    );
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let mesh = args.source.load()?;
    let base = match args.source.family {
        Some(Family::Vessel) => MaterialParams::UNIT,
        _ => MaterialParams::STEEL,
    };
    let material = args.material.resolve(base).material()?;
    let options = AssemblyOptions {
        scaling: args.stabilization.map(Into::into).unwrap_or_default(),
        dump_dir: args.dump_matrices.clone(),
    };
    let system = assemble_with(&mesh, &material, &options)?;
    let eig = EigOptions {
        tol: args.eig_tol,
        ..EigOptions::default()
    }
    .with_normalization(material.density);
    let solution = solve_smallest(&system.stiffness, &system.mass, args.num_modes, &eig)?;
    let omega = solution.frequencies()?;
    println!("N = {}", system.num_dofs());
    println!("{:>4}  {:>16}  {:>10}", "mode", "omega", "residual");
    for (i, (w, r)) in omega.iter().zip(&solution.residuals).enumerate() {
        println!("{:>4}  {:>16.6}  {:>10.2e}", i + 1, w, r);
    }
    if let Some(dir) = &args.dump_matrices {
        println!("matrices written to {}", dir.display());
    }
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "dofs": system.num_dofs(),
            "eigenvalues": solution.eigenvalues,
            "frequencies": omega,
            "residuals": solution.residuals,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn adapt(args: AdaptArgs) -> Result<()> {
    let DomainArg::Vessel = args.domain;
    let mut config = ExperimentConfig::vessel();
    config.max_dofs = args.max_dofs;
    config.mark_fraction = args.mark_fraction;
    config.reference = vec![args.reference];
    config.vessel_dirichlet = args.vessel_dirichlet.into();
    config.material = args.material.resolve(MaterialParams::UNIT);
    config.eig_tol = args.eig_tol;
    if let Some(s) = args.stabilization {
        config.stabilization = s.into();
    }
    let strategy: Strategy = args.strategy.into();
    config.refinement = vec![strategy];
    config.validate()?;
    println!(
        "{:>4} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "step", "N", "omega_h1", "error", "R2", "theta2", "J2", "eta2", "eff"
    );
    let run = run_strategy(&config, strategy, |s, _| {
        println!(
            "{:>4} {:>8} {:>10.6} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>8.4}",
            s.step,
            s.dofs,
            s.omega,
            s.error.unwrap_or(f64::NAN),
            s.r2,
            s.theta2,
            s.j2,
            s.eta2,
            s.effectivity.unwrap_or(f64::NAN)
        );
    })?;
    if let Some(rate) = run.rate {
        println!("error ~ N^{:.3}", rate.exponent);
    }
    if let Some(dir) = &args.out {
        let report = Report::Adaptive(Test2Result {
            reference: Some(args.reference),
            runs: vec![run],
        });
        for path in emit_report(&report, dir, &[Format::Csv, Format::Json, Format::Svg])? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let formats = args
        .format
        .iter()
        .map(|f| f.parse::<Format>())
        .collect::<vem_spectra::Result<Vec<_>>>()?;
    let (report, default_dir) = match (&args.config, &args.from) {
        (Some(path), None) => {
            let config = ExperimentConfig::read(path).with_context(|| format!("reading config {}", path.display()))?;
            let report = match config.domain {
                Domain::Square => Report::Uniform(run_test1(&config)?),
                Domain::Vessel => Report::Adaptive(run_test2(&config)?),
            };
            (report, Some(config.output_dir))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (Report::from_json(&text)?, None)
        }
        _ => bail!("give either --config FILE or --from FILE"),
    };
    let Some(dir) = args.out.or(default_dir) else {
        bail!("--out is required with --from");
    };
    print_summary(&report);
    for path in emit_report(&report, Path::new(&dir), &formats)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_summary(report: &Report) {
    match report {
        Report::Uniform(r) => {
            for (i, fit) in r.fits.iter().enumerate() {
                let last = r.runs.last().map(|run| run.frequencies[i]).unwrap_or(f64::NAN);
                match fit {
                    Some(f) => println!("mode {}: omega_h = {last:.3}, order {:.2}, extrapolated {:.3}", i + 1, f.order, f.limit),
                    None => println!("mode {}: omega_h = {last:.3}", i + 1),
                }
            }
        }
        Report::Adaptive(r) => {
            for run in &r.runs {
                let last = run.steps.last();
                println!(
                    "{}: {} steps, final N = {}, omega_h1 = {:.4}, rate {}",
                    run.strategy.name(),
                    run.steps.len(),
                    last.map_or(0, |s| s.dofs),
                    last.map_or(f64::NAN, |s| s.omega),
                    run.rate.map_or("n/a".into(), |f| format!("N^{:.3}", f.exponent))
                );
            }
        }
    }
}
