//! The pipeline behind `evpos run`: build, certify, analyse.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use evpos::analyzer::{
    check_criteria, individual_t0, positivity_scan, resolvent_positivity_check, self_adjoint_path, uniform_t0,
    CertificatePath, SpectralCertificate, FINITE_DIMENSION_CAVEAT,
};
use evpos::grid::{GridSpec, Spacing};
use evpos::models::{delay_dominance_scan, DiscretizedOperator, OperatorSpec, Window};
use evpos::spectral::expm_series;
use rayon::prelude::*;

use crate::config::{AnalysisConfig, AnalysisKind, DEFAULT_OUT_DIR};
use crate::report::{series_csv, sweep_csv, AnalysisResult, ErrorReport, Report, SweepPoint, Timings};
use crate::Failure;

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub out: Option<PathBuf>,
}

/// A finished run: the report and the extra files to write beside it.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub dir: PathBuf,
    pub files: Vec<(String, String)>,
    /// 0, or 3 when a numerical failure is embedded in the report.
    pub code: u8,
}

const SHIFT_CAVEAT: &str = "margins, B(t) and entries refer to the shifted semigroup e^{t(A - s(A))}";
const DEFAULT_RESOLVENT_OFFSETS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

fn scan_default() -> GridSpec {
    GridSpec {
        t_min: 1e-3,
        t_max: 10.0,
        samples: 200,
        spacing: Spacing::GeometricThenLinear,
    }
}

/// Applies the command-line overrides that do not depend on the operator.
pub fn apply_overrides(cfg: &mut AnalysisConfig, opts: &RunOptions) -> Result<(), Failure> {
    if let Some(d) = opts.delta {
        cfg.delta = d;
    }
    if let Some(s) = opts.seed {
        cfg.seed = Some(s);
    }
    if let (Some(seed), OperatorSpec::Synthetic(spec)) = (cfg.seed, &mut cfg.operator) {
        spec.seed = seed;
    }
    if let Some(dir) = &opts.out {
        cfg.output.dir = Some(dir.clone());
    }
    if let Some(g) = &mut cfg.grid {
        override_grid(g, opts);
    }
    cfg.validate()
}

fn override_grid(g: &mut GridSpec, opts: &RunOptions) {
    if let Some(t) = opts.t_max {
        g.t_max = t;
    }
    if let Some(n) = opts.samples {
        g.samples = n;
    }
}

/// The configured grid, or `default` with the overrides applied. Recorded in the echo.
fn resolve_grid(cfg: &mut AnalysisConfig, opts: &RunOptions, default: GridSpec) -> Result<GridSpec, Failure> {
    let g = match cfg.grid {
        Some(g) => g,
        None => {
            let mut g = default;
            override_grid(&mut g, opts);
            g
        }
    };
    g.validate().map_err(|e| Failure::config(format!("grid: {e}")))?;
    cfg.grid = Some(g);
    Ok(g)
}

fn certify(op: &DiscretizedOperator, cfg: &AnalysisConfig) -> evpos::Result<SpectralCertificate> {
    match cfg.path {
        CertificatePath::General => check_criteria(&op.generator, &op.lattice, &cfg.tolerances),
        CertificatePath::SelfAdjoint => self_adjoint_path(&op.generator, &op.lattice, &cfg.tolerances),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs `cfg`. Malformed or unsupported input returns `Err`; numerical
/// failures still produce a report, with the diagnostics in `error`.
pub fn execute(mut cfg: AnalysisConfig, opts: &RunOptions) -> Result<Outcome, Failure> {
    apply_overrides(&mut cfg, opts)?;
    let start = Instant::now();
    let mut report = Report {
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        deterministic: opts.deterministic,
        config: cfg.clone(),
        certificate: None,
        result: None,
        dominance_scan: None,
        caveats: vec![FINITE_DIMENSION_CAVEAT.to_string()],
        error: None,
        timings: None,
        files: vec![],
    };
    let mut files = vec![];
    let mut timings = Timings::default();
    let status = analyse(&mut cfg, opts, &mut report, &mut files, &mut timings);
    let code = match status {
        Ok(()) => 0,
        Err(f) if f.code == 3 => {
            report.error = Some(ErrorReport {
                exit_code: 3,
                message: f.message,
            });
            3
        }
        Err(f) => return Err(f),
    };
    timings.total_ms = ms(start);
    if !opts.deterministic {
        report.timings = Some(timings);
    }
    report.config = cfg.clone();
    report.files = std::iter::once(cfg.output.report.clone()).chain(files.iter().map(|(n, _)| n.clone())).collect();
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(Outcome {
        report,
        dir,
        files,
        code,
    })
}

fn analyse(
    cfg: &mut AnalysisConfig,
    opts: &RunOptions,
    report: &mut Report,
    files: &mut Vec<(String, String)>,
    timings: &mut Timings,
) -> Result<(), Failure> {
    if cfg.analysis == AnalysisKind::Sweep {
        let t = Instant::now();
        let (parameter, rows) = sweep(cfg, opts)?;
        timings.analysis_ms = ms(t);
        files.push((cfg.output.sweep.clone(), sweep_csv(&parameter, &rows)));
        report.caveats.push(SHIFT_CAVEAT.into());
        report.result = Some(AnalysisResult::Sweep { parameter, rows });
        return Ok(());
    }

    let t = Instant::now();
    let op = cfg
        .operator
        .build()
        .map_err(|e| Failure::from_core(&e).context(&format!("operator ({})", cfg.operator.kind())))?;
    timings.build_ms = ms(t);

    let t = Instant::now();
    let cert = certify(&op, cfg).map_err(|e| Failure::from_core(&e).context("certificate"))?;
    timings.certificate_ms = ms(t);
    report.certificate = Some(cert.clone());

    let t = Instant::now();
    let g = &op.generator;
    match cfg.analysis {
        AnalysisKind::Certify => {
            if let OperatorSpec::Delay(spec) = cfg.operator {
                let scan = delay_dominance_scan(spec.c, Window::default_for_delay())
                    .map_err(|e| Failure::from_core(&e).context("dominance scan"))?;
                if !scan.zero_is_only_root() {
                    report.caveats.push(format!(
                        "dominance scan: {} characteristic roots in the window, so 0 is not the only one",
                        scan.count
                    ));
                }
                report.dominance_scan = Some(scan);
            }
        }
        AnalysisKind::UniformT0 | AnalysisKind::IndividualT0 => {
            if !cert.passed() {
                report.caveats.push(format!("certificate failed ({}): no bound computed", cert.verdict.describe()));
            } else {
                let grid = resolve_grid(cfg, opts, GridSpec::for_gap(cert.dominance_gap))?;
                let r = if cfg.analysis == AnalysisKind::UniformT0 {
                    uniform_t0(g, &cert, &op.lattice, cfg.delta, &grid)
                } else {
                    let f = cfg.initial.clone().unwrap_or_else(|| {
                        let mut e = vec![0.0; g.n()];
                        e[0] = 1.0;
                        e
                    });
                    if f.len() != g.n() {
                        return Err(Failure::config(format!(
                            "initial: length {} does not match the operator dimension {}",
                            f.len(),
                            g.n()
                        )));
                    }
                    individual_t0(g, &cert, &f, &op.lattice, cfg.delta, &grid)
                }
                .map_err(|e| Failure::from_core(&e).context("bound"))?;
                let entries = expm_series(&g.shifted(-r.shift), &r.grid).map_err(|e| Failure::from_core(&e).context("series"))?;
                let rows = r.grid.iter().enumerate().map(|(k, &t)| {
                    (
                        t,
                        Some(r.margin_series[k]),
                        r.b_series.as_ref().map(|b| b[k]),
                        Some(entries.values[k].min()),
                    )
                });
                files.push((cfg.output.series.clone(), series_csv(rows)));
                report.caveats.push(SHIFT_CAVEAT.into());
                report.result = Some(AnalysisResult::Bound(r));
            }
        }
        AnalysisKind::PositivityScan => {
            let grid = resolve_grid(cfg, opts, scan_default())?;
            let scan = positivity_scan(g, &grid, 0.0).map_err(|e| Failure::from_core(&e).context("scan"))?;
            let rows = scan.times.iter().zip(&scan.min_entry).map(|(&t, &m)| (t, None, None, Some(m)));
            files.push((cfg.output.series.clone(), series_csv(rows)));
            report.caveats.push(SHIFT_CAVEAT.into());
            report.result = Some(AnalysisResult::Scan(scan));
        }
        AnalysisKind::ResolventCheck => {
            let offsets = cfg.resolvent_offsets.clone().unwrap_or(DEFAULT_RESOLVENT_OFFSETS.to_vec());
            let lambdas: Vec<f64> = offsets.iter().map(|o| cert.spectral_bound + o).collect();
            let margins = resolvent_positivity_check(g, &cert, &op.lattice, &lambdas)
                .map_err(|e| Failure::from_core(&e).context("resolvent"))?;
            report.result = Some(AnalysisResult::Resolvent { margins });
        }
        AnalysisKind::Sweep => unreachable!("handled above"),
    }
    timings.analysis_ms = ms(t);
    Ok(())
}

fn sweep(cfg: &mut AnalysisConfig, opts: &RunOptions) -> Result<(String, Vec<SweepPoint>), Failure> {
    let spec = cfg.sweep.clone().expect("validated");
    let grid = resolve_grid(cfg, opts, scan_default())?;
    let ops: Vec<(f64, OperatorSpec)> = spec
        .values()
        .into_iter()
        .map(|x| {
            let op = cfg.operator_with(&spec.parameter, x)?;
            op.validate()
                .map_err(|e| Failure::config(format!("sweep at {} = {x}: {e}", spec.parameter)))?;
            Ok((x, op))
        })
        .collect::<Result<_, _>>()?;
    let cfg = &*cfg;
    let rows: Vec<(SweepPoint, Option<Failure>)> = ops
        .par_iter()
        .map(|(value, op)| {
            let mut p = SweepPoint {
                value: *value,
                passed: false,
                reasons: String::new(),
                gap: None,
                t0: None,
                epsilon: None,
                min_entry: None,
                first_nonneg_time: None,
                error: None,
            };
            let run = |p: &mut SweepPoint| -> evpos::Result<()> {
                let built = op.build()?;
                let scan = positivity_scan(&built.generator, &grid, 0.0)?;
                p.min_entry = Some(scan.global_min());
                p.first_nonneg_time = scan.first_nonneg_time;
                let cert = certify(&built, cfg)?;
                p.passed = cert.passed();
                p.reasons = cert.verdict.describe();
                p.gap = Some(cert.dominance_gap).filter(|g| g.is_finite());
                if cert.passed() {
                    let r = uniform_t0(
                        &built.generator,
                        &cert,
                        &built.lattice,
                        cfg.delta,
                        &GridSpec::for_gap(cert.dominance_gap),
                    )?;
                    p.t0 = Some(r.t0);
                    p.epsilon = Some(r.epsilon);
                }
                Ok(())
            };
            let failure = run(&mut p).err().map(|e| {
                p.error = Some(e.to_string());
                Failure::from_core(&e)
            });
            (p, failure)
        })
        .collect();
    // Per-point numerical trouble is data; an unsupported path is not.
    if let Some(f) = rows.iter().filter_map(|(_, f)| f.as_ref()).find(|f| f.code == 4) {
        return Err(f.clone().context("sweep"));
    }
    Ok((spec.parameter, rows.into_iter().map(|(p, _)| p).collect()))
}
