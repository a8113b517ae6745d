#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use thermoflow::dns::{init_from_eigenmode, init_random, write_series_csv, Checkpoint, Simulation, SolverConfig};
use thermoflow::harness::{
    example_discrepancy, run_experiment, write_outputs, ExperimentKind, ExperimentSpec, InitKind, SweepAxis, SweepGrid,
};
use thermoflow::manifold::{bifurcated_state, bifurcation_coefficient, count_cells, ring_radius, stream_function};
use thermoflow::params::{classify_regime, nondimensionalize, DEFAULT_CRITICAL_TOL};
use thermoflow::spectrum::{
    critical_search, critical_temperature, eigenvector, spectrum_table, write_spectrum_csv, Branch, ModeIndex,
};
use thermoflow::{DimensionlessParams, PhysicalParams};

#[derive(Parser)]
#[command(
    name = "thermoflow",
    version,
    about = "Onset of convection in an anisotropic fluid layer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical wavenumber, Rayleigh number and temperature difference.
    Critical {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        m_max: i64,
        #[arg(long)]
        json: bool,
    },
    /// Growth rates of every mode in a truncation.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the Rayleigh number of the configured temperatures.
        #[arg(long)]
        rayleigh: Option<f64>,
        #[arg(long = "mmax", default_value_t = 8)]
        m_max: i64,
        #[arg(long = "nmax", default_value_t = 8)]
        n_max: u32,
        /// Written to standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Reduced amplitude equations at `R = (1 + E) R_c`.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        super_eps: f64,
        #[arg(long, default_value_t = 1000)]
        m_max: i64,
        #[arg(long)]
        json: bool,
    },
    /// Stream function of a bifurcated state and its cell count.
    Cells {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        super_eps: f64,
        /// Ring coordinates; default to the point `(ring radius, 0)`.
        #[arg(long, allow_hyphen_values = true)]
        s1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        s2: Option<f64>,
        #[arg(long, default_value = "128,32", value_parser = parse_pair)]
        grid: (usize, usize),
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        plot_script: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        m_max: i64,
    },
    /// Direct simulation of the nonlinear system.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "64,32", value_parser = parse_pair)]
        modes: (usize, usize),
        /// Defaults to the recommended step for the truncation.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        tend: f64,
        #[arg(long, value_enum, default_value_t = Init::Eigenmode)]
        init: Init,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Continue from a checkpoint instead of building initial data.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        diag_every: usize,
        /// Drop the advection terms.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Verification experiments with CSV, plot-script and JSON outputs.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Critical wavenumber over a grid in aspect ratio and Prandtl ratio.
    Sweep {
        #[arg(long)]
        alpha: SweepAxis,
        #[arg(long)]
        pra: SweepAxis,
        #[arg(long)]
        kappa_a: f64,
        #[arg(long, default_value_t = 1000)]
        m_max: i64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Eigenmode,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Subcritical,
    Critical,
    Supercritical,
    Ring,
    Cells,
    All,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got '{s}'"))?;
    let a = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

fn load(path: &PathBuf) -> Result<(PhysicalParams, DimensionlessParams)> {
    let p = PhysicalParams::load(path).with_context(|| format!("reading {}", path.display()))?;
    let d = nondimensionalize(&p)?;
    Ok((p, d))
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn critical(config: PathBuf, m_max: i64, as_json: bool) -> Result<()> {
    let (p, _) = load(&config)?;
    let cp = critical_temperature(&p, m_max)?;
    let t_c = cp.t_c.context("critical temperature missing")?;
    let regime = classify_regime(&p, t_c, DEFAULT_CRITICAL_TOL)?;
    let note = example_discrepancy(&p, &cp);
    if as_json {
        let out = json!({ "critical": cp, "regime": regime, "note": note });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("m_c = {}", cp.m_c);
    println!("R_c = {:.10}", cp.r_c);
    println!("T_c = {t_c:.10}");
    println!("transversal_slope = {:.10e}", cp.transversal_slope);
    println!("regime = {} (margin {:.6e})", regime.tag, regime.margin);
    if !cp.n1_minimal {
        println!("warning: a higher vertical mode goes neutral first");
    }
    if cp.status == thermoflow::spectrum::SearchStatus::Truncated {
        println!("warning: minimum on the search bound m = {m_max}");
    }
    if let Some(n) = note {
        println!("note: {n}");
    }
    Ok(())
}

fn spectrum(config: PathBuf, rayleigh: Option<f64>, m_max: i64, n_max: u32, csv: Option<PathBuf>) -> Result<()> {
    let (_, d) = load(&config)?;
    let rows = spectrum_table(rayleigh.unwrap_or(d.rayleigh), &d, m_max, n_max)?;
    match csv {
        Some(path) => {
            let mut w = create(&path)?;
            write_spectrum_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_spectrum_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn reduced_params(config: &PathBuf, super_eps: f64, m_max: i64) -> Result<(PhysicalParams, DimensionlessParams)> {
    if !(super_eps > 0.0) {
        bail!("--super-eps must be positive");
    }
    let (p, d) = load(config)?;
    let d = d.with_sign(1);
    let cp = critical_search(&d, m_max)?;
    Ok((p, d.with_rayleigh((1.0 + super_eps) * cp.r_c)))
}

fn reduce(config: PathBuf, super_eps: f64, m_max: i64, as_json: bool) -> Result<()> {
    let (_, d) = reduced_params(&config, super_eps, m_max)?;
    let model = bifurcation_coefficient(&d, m_max)?;
    let ring = ring_radius(&model)?.radius();
    if as_json {
        let out = json!({
            "rayleigh": model.rayleigh, "r_c": model.r_c, "m_c": model.m_c,
            "beta": model.beta, "l": model.l, "ring_radius": ring,
            "l_proof_form": model.l_proof_form, "l_theorem_form": model.l_theorem_form,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!(
        "R = {:.10} (R_c = {:.10}, m_c = {})",
        model.rayleigh, model.r_c, model.m_c
    );
    println!("beta = {:.10e}", model.beta);
    println!("l = {:.10e}", model.l);
    println!("ring radius = {ring:.10}");
    println!(
        "published closed forms: {:.10e}, {:.10e}",
        model.l_proof_form, model.l_theorem_form
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cells(
    config: PathBuf,
    super_eps: f64,
    s1: Option<f64>,
    s2: Option<f64>,
    grid: (usize, usize),
    csv: Option<PathBuf>,
    plot_script: Option<PathBuf>,
    m_max: i64,
) -> Result<()> {
    let (p, d) = reduced_params(&config, super_eps, m_max)?;
    let model = bifurcation_coefficient(&d, m_max)?;
    let ring = ring_radius(&model)?.radius();
    let (s1, s2) = (s1.unwrap_or(ring), s2.unwrap_or(0.0));
    let sol = bifurcated_state(s1, s2, &model, Some(&p))?;
    let sampled = stream_function(&sol).sample(grid.0, grid.1)?;
    let n = count_cells(&sampled)?;
    println!("s = ({s1:.6}, {s2:.6}), ring radius {ring:.6}");
    println!("cells = {n} (2 m_c = {})", 2 * model.m_c);
    if let Some(path) = &csv {
        let mut w = create(path)?;
        sampled.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = plot_script {
        let csv_name = csv.as_ref().map_or("psi.csv".into(), |c| c.display().to_string());
        let png = path.with_extension("png").display().to_string();
        std::fs::write(&path, sampled.plot_script(&csv_name, &png))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    config: PathBuf,
    modes: (usize, usize),
    dt: Option<f64>,
    tend: f64,
    init: Init,
    delta: f64,
    angle: f64,
    seed: u64,
    resume: Option<PathBuf>,
    diag_every: usize,
    linear: bool,
    csv: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
) -> Result<()> {
    let (_, d) = load(&config)?;
    let eig = if d.sign == 1 {
        let cp = critical_search(&d, 1000)?;
        Some(eigenvector(ModeIndex::new(cp.m_c, 1)?, Branch::Plus, d.rayleigh, &d)?)
    } else {
        None
    };
    let restart = resume.as_ref().map(Checkpoint::load).transpose()?;
    let state = match (&restart, init) {
        (Some(c), _) => c.state.clone(),
        (None, Init::Eigenmode) => {
            let e = eig
                .as_ref()
                .context("eigenmode data needs heating from below (T0 > T1)")?;
            init_from_eigenmode(modes.0, modes.1, delta, angle, e)?
        }
        (None, Init::Random) => init_random(modes.0, modes.1, d.alpha, delta, seed)?,
    };
    let cfg = SolverConfig {
        modes_x: state.m_max(),
        modes_z: state.n_max(),
        dt: dt.unwrap_or_else(|| SolverConfig::recommended_dt(&d, state.m_max())),
        t_end: tend,
        nonlinear: !linear,
        diag_every,
        seed,
        ..SolverConfig::default()
    };
    let mut sim = match restart {
        Some(c) => Simulation::resume(cfg, d, Checkpoint { state, ..c })?,
        None => Simulation::new(cfg, d, state)?,
    };
    if let Some(e) = &eig {
        sim = sim.with_projection(e)?;
    }
    let series = sim.run()?;
    let last = series.last().context("empty run")?;
    println!(
        "t = {:.6}, steps = {}, dt = {:.6e}, l2 = {:.6e}, h1 = {:.6e}, |(x1, x2)| = {:.6e}",
        last.t,
        sim.steps(),
        sim.config().dt,
        last.l2(),
        last.h1(),
        last.amplitude_radius()
    );
    if let Some(path) = csv {
        let mut w = create(&path)?;
        write_series_csv(&series, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = checkpoint {
        sim.checkpoint().save(&path)?;
    }
    Ok(())
}

fn verify(suite: Suite, config: PathBuf, out: PathBuf) -> Result<bool> {
    let (p, d) = load(&config)?;
    let kinds: Vec<ExperimentKind> = match suite {
        Suite::Subcritical => vec![ExperimentKind::SubcriticalDecay],
        Suite::Critical => vec![ExperimentKind::CriticalDecay],
        Suite::Supercritical => vec![ExperimentKind::SupercriticalEscape],
        Suite::Ring => vec![ExperimentKind::RingAttractor],
        Suite::Cells => vec![ExperimentKind::CellFigure],
        Suite::All => ExperimentKind::ALL[..5].to_vec(),
    };
    let mut all = true;
    for kind in kinds {
        let params = if kind == ExperimentKind::SubcriticalDecay {
            d
        } else {
            d.with_sign(1)
        };
        let mut spec = ExperimentSpec::for_kind(kind, params).with_physical(p);
        if params.sign != 1 {
            spec.init = InitKind::Random { amplitude: 1e-6 };
        }
        let report = run_experiment(&spec)?;
        let manifest = write_outputs(&report, &out)?;
        print!("{}", report.summary());
        println!("  manifest: {}", manifest.display());
        all &= report.pass;
    }
    Ok(all)
}

fn sweep(alpha: SweepAxis, pra: SweepAxis, kappa_a: f64, m_max: i64, out: PathBuf) -> Result<bool> {
    let mut spec = ExperimentSpec::mc_sweep(SweepGrid {
        alpha,
        pr_a: pra,
        kappa_a,
    });
    spec.m_max = m_max;
    let report = run_experiment(&spec)?;
    let manifest = write_outputs(&report, &out)?;
    for row in &report.tables[0].rows {
        println!(
            "alpha = {:<10.4} pr_a = {:<10.4} m_c = {:<4} R_c = {:.6}{}",
            row[0],
            row[1],
            row[3],
            row[4],
            if row[5] != 0.0 { " (truncated)" } else { "" }
        );
    }
    print!("{}", report.summary());
    println!("  manifest: {}", manifest.display());
    Ok(report.pass)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let ok = match cli.command {
        Command::Critical { config, m_max, json } => critical(config, m_max, json).map(|_| true),
        Command::Spectrum {
            config,
            rayleigh,
            m_max,
            n_max,
            csv,
        } => spectrum(config, rayleigh, m_max, n_max, csv).map(|_| true),
        Command::Reduce {
            config,
            super_eps,
            m_max,
            json,
        } => reduce(config, super_eps, m_max, json).map(|_| true),
        Command::Cells {
            config,
            super_eps,
            s1,
            s2,
            grid,
            csv,
            plot_script,
            m_max,
        } => cells(config, super_eps, s1, s2, grid, csv, plot_script, m_max).map(|_| true),
        Command::Simulate {
            config,
            modes,
            dt,
            tend,
            init,
            delta,
            angle,
            seed,
            resume,
            diag_every,
            linear,
            csv,
            checkpoint,
        } => simulate(
            config, modes, dt, tend, init, delta, angle, seed, resume, diag_every, linear, csv, checkpoint,
        )
        .map(|_| true),
        Command::Verify { suite, config, out } => verify(suite, config, out),
        Command::Sweep {
            alpha,
            pra,
            kappa_a,
            m_max,
            out,
        } => sweep(alpha, pra, kappa_a, m_max, out),
    }?;
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
