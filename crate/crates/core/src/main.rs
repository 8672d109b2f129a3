use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use modal_diversity::channel::crosstalk_matrix;
use modal_diversity::experiments::{
    distance_gain_table, output_dir_from_env, render_plot_data, run_sweep, BerTable, ExperimentPlan, PlanConfig,
    OUTPUT_DIR_ENV,
};
use modal_diversity::turbulence::{strehl_estimate, AtmosphereModel};

#[derive(Parser)]
#[command(name = "modaldiv", version, about = "Modal diversity FSO link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the BER sweep of a plan and write the CSV and plot files.
    #[command(after_help = format!("Set {OUTPUT_DIR_ENV} to redirect all output files."))]
    Run {
        /// Built-in plan (paper-n4, paper-n8) or a plan file.
        plan: String,
        /// Full-scale statistics and the extra 0.1 mm point.
        #[arg(long)]
        full_scale: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Ensemble crosstalk matrices of the plan's mode pair, without
    /// turbulence and at every sweep r0.
    Crosstalk {
        plan: String,
        /// Screens per matrix (default: the plan's screen count).
        #[arg(long)]
        screens: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Distance-gain table from a BER CSV written by `run`.
    Distances {
        csv: PathBuf,
        /// Cn² in m^(-2/3).
        #[arg(long)]
        cn2: f64,
        /// Wavelength in meters.
        #[arg(long)]
        wavelength: f64,
        /// Comma-separated target BERs.
        #[arg(long, value_delimiter = ',', required = true)]
        bers: Vec<f64>,
    },
    /// Check a plan without running it.
    Validate { plan: String },
}

fn load_plan(plan: &str, full_scale: bool, threads: Option<usize>) -> anyhow::Result<ExperimentPlan> {
    let mut cfg = PlanConfig::resolve(plan)?;
    cfg.full_scale |= full_scale;
    if threads.is_some() {
        cfg.threads = threads;
    }
    let plan = cfg.build(output_dir_from_env())?;
    plan.validate()?;
    Ok(plan)
}

fn output_dir(plan: &ExperimentPlan) -> anyhow::Result<PathBuf> {
    let dir = plan.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn run(plan: &str, full_scale: bool, threads: Option<usize>) -> anyhow::Result<()> {
    let plan = load_plan(plan, full_scale, threads)?;
    output_dir(&plan)?;
    let curve = run_sweep(&plan)?;
    let stem = plan.plot_stem().expect("plan has an output directory");
    let files = render_plot_data(&curve, &stem)?;
    print!("{}", curve.to_csv());
    if let Some(path) = plan.ber_csv_path() {
        eprintln!("wrote {}", path.display());
    }
    eprintln!("wrote {}", files.data.display());
    eprintln!("wrote {}", files.script.display());
    Ok(())
}

fn crosstalk(plan: &str, screens: Option<usize>, threads: Option<usize>) -> anyhow::Result<()> {
    let plan = load_plan(plan, false, threads)?;
    output_dir(&plan)?;
    let modes = [plan.mode_pair.0, plan.mode_pair.1];
    let n_screens = screens.unwrap_or(plan.link.n_screens);
    let mut r0s = vec![f64::INFINITY];
    r0s.extend(&plan.r0_sweep);
    let job = || -> anyhow::Result<()> {
        for &r0 in &r0s {
            let params = plan.link.turbulence.with_r0(r0)?;
            let m = crosstalk_matrix(&modes, &params, n_screens, plan.link.master_seed)?;
            let path = plan.crosstalk_path(r0).expect("plan has an output directory");
            m.write_csv(&path)?;
            println!("r0 = {} mm, SR = {:.4}", r0 * 1e3, strehl_estimate(plan.strehl_diameter, r0));
            print!("{}", m.to_csv());
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    };
    match plan.link.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(job),
        None => job(),
    }
}

fn distances(csv: &PathBuf, cn2: f64, wavelength: f64, bers: &[f64]) -> anyhow::Result<()> {
    let table = BerTable::read(csv)?;
    let atmosphere = AtmosphereModel::new(cn2, wavelength)?;
    let Some(div_label) = table.labels.iter().find(|l| l.starts_with("EGC")).cloned() else {
        bail!("{} has no diversity (EGC) column", csv.display());
    };
    let diversity = table.series(&div_label).expect("label from table");
    for label in table.labels.iter().filter(|l| **l != div_label) {
        let siso = table.series(label).expect("label from table");
        let t = distance_gain_table(&siso, &diversity, bers, &atmosphere)?;
        print!("{}", t.to_csv());
    }
    Ok(())
}

fn validate(plan: &str) -> anyhow::Result<()> {
    let plan = load_plan(plan, false, None)?;
    let grid = plan.link.turbulence.grid;
    println!("plan {} is valid", plan.name);
    println!(
        "  modes: {} + {}, waist {:.4} mm",
        plan.mode_pair.0.label(),
        plan.mode_pair.1.label(),
        plan.mode_pair.0.waist * 1e3
    );
    println!("  grid: {grid}");
    println!(
        "  sweep: {} points, {} to {} mm",
        plan.r0_sweep.len(),
        plan.r0_sweep[0] * 1e3,
        plan.r0_sweep[plan.r0_sweep.len() - 1] * 1e3
    );
    println!(
        "  link: {} bits x {} screens, noise {}, threshold {}, seed {}",
        plan.link.bits_per_screen,
        plan.link.n_screens,
        plan.link.noise_sigma,
        plan.link.threshold_fraction,
        plan.link.master_seed
    );
    for out in plan.outputs() {
        println!("  output: {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { plan, full_scale, threads } => run(plan, *full_scale, *threads),
        Command::Crosstalk { plan, screens, threads } => crosstalk(plan, *screens, *threads),
        Command::Distances { csv, cn2, wavelength, bers } => distances(csv, *cn2, *wavelength, bers),
        Command::Validate { plan } => validate(plan),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
