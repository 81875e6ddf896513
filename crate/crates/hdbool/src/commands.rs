//! The five subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use hdbool_core::finite_n::{FiniteNPoint, ScanContext};
use hdbool_core::math::RunningMoments;
use hdbool_core::percolation::percolation_probe_scan;
use hdbool_core::rate_fn::{build_rate, check_moment_condition};
use hdbool_core::simulate::McPlan;
use hdbool_core::thresholds::{report_for_rate, GaussianConstants, CERTIFICATE_TOL};
use hdbool_core::{BranchingProbe, Error, RateFunction};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{render_report, render_table, CsvTable, Record, Value};
use crate::{record, CliError, Command, Format, RunOptions};

const NATS: &str = "all logarithms are natural; thresholds, log quantities and exponents are in nats";

// Samples are evaluated in parallel blocks and reduced in index order.
const MC_BLOCK: u64 = 1 << 14;

/// Runs one subcommand.
pub fn run(cmd: Command, opts: &RunOptions) -> Result<(), CliError> {
    let pool = thread_pool(opts.jobs)?;
    let cfg = match &opts.config {
        Some(p) => RunConfig::load(p)?,
        None if cmd == Command::GaussianReport => {
            RunConfig::parse("{}").map_err(|e| CliError::Config(e.to_string()))?
        }
        None => return Err(CliError::Config("--config is required".into())),
    };
    match cmd {
        Command::Thresholds => emit(opts, &thresholds(&cfg, opts.format)?),
        Command::Scan => scan(&cfg, opts, &pool),
        Command::Mc => emit(opts, &mc(&cfg, opts, &pool)?),
        Command::Branching => emit(opts, &branching(&cfg, opts.format, &pool)?),
        Command::GaussianReport => emit(opts, &gaussian_report(&cfg, opts.format)?),
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn sink(opts: &RunOptions) -> io::Result<Box<dyn Write>> {
    Ok(match &opts.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

// Writes a fully computed document, so failures leave no partial output.
fn emit(opts: &RunOptions, bytes: &[u8]) -> Result<(), CliError> {
    let mut out = sink(opts)?;
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn thresholds(cfg: &RunConfig, format: Format) -> Result<Vec<u8>, CliError> {
    let spec = cfg.model_spec()?;
    let rate = build_rate(&spec.radius_law)?;
    let r = report_for_rate(&rate, spec.rho)?;
    let mut rec: Record = record! {
        "rho_nats" => r.rho,
        "rstar" => r.rstar,
        "tau_d_nats" => r.tau_d,
        "tau_p_nats" => r.tau_p,
        "tau_v_nats" => r.tau_v,
        "r_d" => r.r_d,
        "r_p" => r.r_p,
        "r_v" => r.r_v,
        "tau_p_minus_tau_d_nats" => r.tau_p - r.tau_d,
        "tau_v_minus_tau_p_nats" => r.tau_v - r.tau_p,
        "regime" => r.regime.label(),
    };
    for c in r.certificates {
        if !c.holds(CERTIFICATE_TOL) {
            return Err(Error::Consistency(format!("{} certificate fails: {c:?}", c.target.name())).into());
        }
        let p = format!("certificate_{}", c.target.name());
        rec.extend(record! {
            format!("{p}_radius") => c.radius,
            format!("{p}_g") => c.g_value,
            format!("{p}_subgrad_lo") => c.subgrad_lo,
            format!("{p}_subgrad_hi") => c.subgrad_hi,
        });
    }
    if let Some(sigma) = rate.gaussian_sigma() {
        rec.extend(record! { "gaussian_c" => r.r_p / sigma });
    }
    let m = check_moment_condition(&spec.radius_law)?;
    rec.extend(record! { "moment_condition_gamma" => m.gamma, "moment_condition_satisfied" => m.satisfied });
    Ok(render_report(format, &[NATS.into()], &rec)?)
}

const SCAN_HEADER: [&str; 9] = [
    "n",
    "log_lambda_n",
    "coverage",
    "exponent_vf",
    "target_vf",
    "log_mean_degree",
    "exponent_deg",
    "target_deg",
    "supercritical",
];

fn scan_row(p: &FiniteNPoint) -> Vec<Value> {
    vec![
        p.n.into(),
        p.log_lambda_n.into(),
        p.coverage.into(),
        p.exponent_vf.into(),
        p.target_vf.into(),
        p.log_mean_degree.into(),
        p.exponent_deg.into(),
        p.target_deg.into(),
        p.supercritical.into(),
    ]
}

fn scan_notes() -> Vec<String> {
    vec![
        NATS.into(),
        "exponent_vf is (1/n) ln P(0 covered) when subcritical and (1/n) ln(-ln P(0 uncovered)) when supercritical"
            .into(),
    ]
}

// Rows are computed a pool-width at a time and written in n order as each
// batch finishes, so a long scan can be inspected while it runs.
fn scan(cfg: &RunConfig, opts: &RunOptions, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let spec = cfg.model_spec()?;
    let q = cfg.quadrature()?;
    let n_list = cfg.scan_n_list()?;
    let ctx = ScanContext::new(&spec, &q)?;
    let width = pool.current_num_threads().max(1);
    let batches = n_list.chunks(width);
    let compute = |chunk: &[u32]| pool.install(|| chunk.par_iter().map(|&n| ctx.point(n)).collect::<Vec<_>>());

    if opts.format == Format::Json {
        let mut rows = Vec::with_capacity(n_list.len());
        for chunk in batches {
            for p in compute(chunk) {
                let row = scan_row(&p?);
                rows.push(SCAN_HEADER.iter().map(|h| h.to_string()).zip(row).collect::<Record>());
            }
        }
        return emit(opts, &render_table(Format::Json, &scan_notes(), &rows)?);
    }

    let mut table = CsvTable::new(sink(opts)?, &scan_notes(), &SCAN_HEADER)?;
    for chunk in batches {
        for p in compute(chunk) {
            table.row(&scan_row(&p?))?;
        }
    }
    table.finish()?;
    Ok(())
}

fn mc(cfg: &RunConfig, opts: &RunOptions, pool: &rayon::ThreadPool) -> Result<Vec<u8>, CliError> {
    let spec = cfg.model_spec()?;
    let (n, quantity, mc_cfg) = cfg.mc(opts.seed)?;
    let plan = McPlan::new(&spec, n, &mc_cfg, quantity)?;
    let mut moments = RunningMoments::default();
    let mut start = 0;
    while start < mc_cfg.samples {
        let end = (start + MC_BLOCK).min(mc_cfg.samples);
        let values = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| plan.sample(i))
                .collect::<Result<Vec<f64>, _>>()
        })?;
        values.iter().for_each(|&v| moments.push(v));
        start = end;
    }
    let est = plan.estimate(&moments);
    let z = est
        .exact_reference
        .map(|x| (est.mean - x) / est.stderr)
        .filter(|z| z.is_finite());
    let rec: Record = record! {
        "quantity" => quantity.name(),
        "n" => n,
        "rho_nats" => spec.rho,
        "samples" => est.samples,
        "seed" => est.seed,
        "generator" => est.generator,
        "r_max" => plan.r_max(),
        "mean" => est.mean,
        "stderr" => est.stderr,
        "exact_reference" => est.exact_reference,
        "z_score" => z,
    };
    Ok(render_report(opts.format, &[NATS.into()], &rec)?)
}

fn branching(cfg: &RunConfig, format: Format, pool: &rayon::ThreadPool) -> Result<Vec<u8>, CliError> {
    let spec = cfg.model_spec()?;
    let q = cfg.quadrature()?;
    let (n_list, gamma) = cfg.branching()?;
    let probes: Vec<BranchingProbe> = pool.install(|| {
        n_list
            .par_iter()
            .map(|&n| percolation_probe_scan(&spec, &[n], gamma, &q).map(|v| v[0]))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows: Vec<Record> = probes
        .iter()
        .map(|p| {
            record! {
                "n" => p.n,
                "log_y_n" => p.log_y_n,
                "y_n_normalized_exponent" => p.normalized_exponent(),
                "survival" => p.survival,
                "thin_radius" => p.thin_radius,
            }
        })
        .collect();
    let notes = [
        NATS.into(),
        "probe: survival probability of a Poisson(y_n) branching process, not a finite-n percolation probability"
            .into(),
    ];
    Ok(render_table(format, &notes, &rows)?)
}

fn gaussian_report(cfg: &RunConfig, format: Format) -> Result<Vec<u8>, CliError> {
    let sigma = cfg.gaussian_sigma();
    let rate = RateFunction::gaussian_grain(sigma)?;
    let g = GaussianConstants::new(sigma);
    let solved = report_for_rate(&rate, g.tau_v)?;
    let checks = [
        ("tau_v", solved.tau_v, g.tau_v),
        ("tau_d", solved.tau_d, g.tau_d),
        ("tau_p", solved.tau_p, g.tau_p),
        ("r_v", solved.r_v, g.r_v),
        ("r_d", solved.r_d, g.r_d),
        ("r_p", solved.r_p, g.r_p),
    ];
    for (name, num, closed) in checks {
        if (num - closed).abs() > 1e-9 * closed.abs().max(1.0) {
            return Err(Error::Consistency(format!("{name}: solver {num} vs closed form {closed}")).into());
        }
    }
    let chain = [sigma, g.r_d, g.r_p, g.r_v, g.r_p + sigma, 2.0 * g.r_d];
    let lambda = hdbool_core::LogMgf::gaussian_grain(sigma);
    let rec: Record = record! {
        "sigma" => sigma,
        "c" => g.c,
        "r_v" => g.r_v,
        "r_d" => g.r_d,
        "r_p" => g.r_p,
        "rate_at_r_v_nats" => rate.value(g.r_v),
        "rate_at_r_d_nats" => rate.value(g.r_d),
        "rate_at_r_p_nats" => rate.value(g.r_p),
        "log_mgf_at_theta_1_over_sigma" => lambda.eval(1.0 / sigma),
        "tau_v_nats" => g.tau_v,
        "tau_d_nats" => g.tau_d,
        "tau_p_nats" => g.tau_p,
        "tau_v_solved_nats" => solved.tau_v,
        "tau_d_solved_nats" => solved.tau_d,
        "tau_p_solved_nats" => solved.tau_p,
        "radius_chain_ordered" => chain.windows(2).all(|w| w[0] < w[1]),
        "truncated_tau_v_nats" => g.tau_v_truncated,
        "truncated_tau_d_nats" => g.tau_v_truncated - std::f64::consts::LN_2,
        "tau_v_minus_truncated_tau_v_nats" => g.tau_v - g.tau_v_truncated,
        "minus_half_ln4_minus_1_nats" => -0.5 * (4f64.ln() - 1.0),
        "gaussian_tau_v_below_truncated" => g.tau_v < g.tau_v_truncated,
    };
    let notes = [
        NATS.into(),
        format!(
            "gaussian grains vs truncated grains of radius sigma: tau_v(gaussian) - tau_v(truncated) = -(ln 4 - 1)/2 = {}",
            crate::output::format_float(g.tau_v - g.tau_v_truncated)
        ),
    ];
    Ok(render_report(format, &notes, &rec)?)
}
