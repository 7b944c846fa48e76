//! `fbiharm`: verify f-biharmonicity claims, solve the classified families,
//! and export reproducible reports and plot data.
//!
//! Exit codes: 0 = verified / predicate-numeric agreement, 1 = input or
//! evaluation error, 2 = the numeric verdict contradicts the algebraic
//! predicate (the most serious outcome).

// `!(v > 0.0)` deliberately treats NaN as a failed positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod suite;

use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;

use fbiharm_core::curves::{reconstruct_curve, CurveFrame, R3Family};
use fbiharm_core::functions::{one_dim_residual, solve_1d, ClosedFormWeight};
use fbiharm_core::maps::{inversion_is_f_biharmonic, InversionFamily};
use fbiharm_core::report::{annulus_points, ResidualReport, Sample};
use fbiharm_core::{FdConfig, ScalarField};

use output::{AnchorResult, OutputSink, Report, RunConfigOut, Table};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_DISAGREEMENT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "fbiharm",
    version,
    about = "f-biharmonic verification toolkit",
    allow_negative_numbers = true
)]
struct Cli {
    /// Residual tolerance for pass/fail verdicts. The verification suite
    /// scales its per-check gates proportionally to this value.
    #[arg(long, global = true, default_value_t = 1e-5)]
    tolerance: f64,

    /// Base finite-difference step; commands derive operator-appropriate
    /// multiples of it.
    #[arg(long, global = true, default_value_t = 1e-3)]
    fd_step: f64,

    /// Seed for sample-point generation.
    #[arg(long, global = true, env = "FBIHARM_SEED", default_value_t = 42)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the inversion family x/|x|^p with weight |x|^k: the numeric
    /// f-bitension residual against the algebraic classification.
    #[command(allow_negative_numbers = true)]
    VerifyInversion {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: f64,
        /// Annulus sample count (|x| in [0.5, 2]).
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Reconstruct a classified curve family and export s, position,
    /// curvature, torsion, and weight columns.
    #[command(allow_negative_numbers = true)]
    CurveExport {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long, default_value_t = 0.0)]
        c3: f64,
        /// Torsion ratio (helix family only).
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = -5.0)]
        start: f64,
        #[arg(long, default_value_t = 5.0)]
        end: f64,
        /// Arclength step of the reconstruction and of the exported rows.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Sample a cylinder patch carrying a family weight: chart grid, ambient
    /// points, mean curvature, weight, and both residuals per node.
    #[command(allow_negative_numbers = true)]
    SurfaceExport {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        #[arg(long, default_value_t = -2.0)]
        z_min: f64,
        #[arg(long, default_value_t = 2.0)]
        z_max: f64,
        /// Grid nodes along theta and z.
        #[arg(long, default_value_t = 24)]
        theta_samples: usize,
        #[arg(long, default_value_t = 9)]
        z_samples: usize,
    },
    /// Solve (f u'')'' = 0 by double quadrature and report the residual.
    #[command(name = "solve-1d", allow_negative_numbers = true)]
    Solve1d {
        /// `rational`, `exponential`, or a path to a CSV table of `x,f` rows.
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 1.0)]
        end: f64,
        /// Number of exported table rows.
        #[arg(long, default_value_t = 201)]
        rows: usize,
    },
    /// Run every anchored verification and summarize pass/fail per claim.
    VerifySuite,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyKind {
    Planar,
    Helix,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for fbiharm_core::hypersurfaces::ExponentSign {
    fn from(sign: SignArg) -> Self {
        match sign {
            SignArg::Plus => Self::Plus,
            SignArg::Minus => Self::Minus,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    if !(cli.tolerance > 0.0) || !(cli.fd_step > 0.0) {
        bail!("tolerance and fd-step must be positive");
    }
    let sink = OutputSink::new(cli.output.as_deref());
    let config = RunConfigOut {
        seed: cli.seed,
        fd_step: cli.fd_step,
        tolerance: cli.tolerance,
    };
    match &cli.command {
        Command::VerifyInversion { m, p, k, samples } => {
            cmd_verify_inversion(cli, &sink, config, *m, *p, *k, *samples)
        }
        Command::CurveExport {
            family,
            c1,
            c2,
            c3,
            c,
            start,
            end,
            step,
        } => cmd_curve_export(
            cli,
            &sink,
            config,
            *family,
            [*c1, *c2, *c3, *c],
            (*start, *end),
            *step,
        ),
        Command::SurfaceExport {
            radius,
            c1,
            c2,
            sign,
            z_min,
            z_max,
            theta_samples,
            z_samples,
        } => cmd_surface_export(
            cli,
            &sink,
            config,
            *radius,
            (*c1, *c2, (*sign).into()),
            (*z_min, *z_max),
            (*theta_samples, *z_samples),
        ),
        Command::Solve1d {
            weight,
            a,
            b,
            c,
            d,
            start,
            end,
            rows,
        } => cmd_solve_1d(
            cli,
            &sink,
            config,
            weight,
            [*a, *b, *c, *d],
            (*start, *end),
            *rows,
        ),
        Command::VerifySuite => cmd_verify_suite(cli, &sink, config),
    }
}

fn cmd_surface_export(
    cli: &Cli,
    sink: &OutputSink,
    config: RunConfigOut,
    radius: f64,
    weight_params: (f64, f64, fbiharm_core::hypersurfaces::ExponentSign),
    z_range: (f64, f64),
    grid: (usize, usize),
) -> anyhow::Result<u8> {
    use fbiharm_core::hypersurfaces::{
        cylinder_f_family, hypersurface_residual, surface_geometry, ParamSurface,
    };
    let (c1, c2, sign) = weight_params;
    let cfg = FdConfig::new(cli.fd_step * 10.0, 2, true).context("bad fd-step")?;
    let margin = 5.0 * cfg.step;
    let surface = ParamSurface::cylinder(radius, (z_range.0 - margin, z_range.1 + margin))
        .context("bad cylinder parameters")?;
    let f = ScalarField::new(2, move |x: &[f64]| {
        cylinder_f_family(radius, c1, c2, sign, x[1]).unwrap_or(f64::NAN)
    });

    let (nu, nv) = (grid.0.max(2), grid.1.max(2));
    let theta_lo = margin;
    let theta_hi = 2.0 * std::f64::consts::PI - margin;
    let mut table = Table::new(
        [
            "theta",
            "z",
            "x",
            "y",
            "z_ambient",
            "mean_curvature",
            "f",
            "normal_residual",
            "tangent_residual",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    let mut worst = 0.0f64;
    for i in 0..nu {
        let theta = theta_lo + (theta_hi - theta_lo) * i as f64 / (nu - 1) as f64;
        for j in 0..nv {
            let z = z_range.0 + (z_range.1 - z_range.0) * j as f64 / (nv - 1) as f64;
            let point = surface.chart_point(theta, z);
            let geometry = surface_geometry(&surface, (theta, z), &cfg)
                .context("geometry evaluation failed")?;
            let weight = cylinder_f_family(radius, c1, c2, sign, z)
                .context("weight positivity fails on the requested grid")?;
            let (normal, tangent) = hypersurface_residual(&surface, &f, (theta, z), 0.0, &cfg)
                .context("residual evaluation failed")?;
            worst = worst.max(normal).max(tangent);
            table.push_row(&[
                theta,
                z,
                point.x,
                point.y,
                point.z,
                geometry.mean_curvature,
                weight,
                normal,
                tangent,
            ]);
        }
    }
    let pass = worst <= cli.tolerance;
    match cli.format {
        Format::Csv => sink.write_csv(&table)?,
        Format::Json => {
            let out = output::TableReport {
                command: "surface-export".into(),
                config,
                anchor: format!("cylinder family surface grid R={radius} C1={c1} C2={c2} {sign:?}"),
                columns: table.header.clone(),
                rows: table.rows.clone(),
            };
            sink.write_json(&out)?;
        }
    }
    Ok(if pass { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_verify_inversion(
    cli: &Cli,
    sink: &OutputSink,
    config: RunConfigOut,
    m: usize,
    p: f64,
    k: f64,
    samples: usize,
) -> anyhow::Result<u8> {
    let family = InversionFamily::new(m, p, k).context("bad family parameters")?;
    let classification = inversion_is_f_biharmonic(&family);

    // fourth-difference operator: run the double-double path at a tenth of
    // the base step, where truncation alone controls the residual
    let cfg = FdConfig::new(cli.fd_step / 10.0, 2, true).context("bad fd-step")?;
    let points = annulus_points(m, samples, 0.5, 2.0, cli.seed);
    let mut residuals = Vec::with_capacity(points.len());
    for x in &points {
        let v = family
            .f_bitension_hp(x, &cfg)
            .with_context(|| format!("f-bitension evaluation failed at {x:?}"))?;
        residuals.push(Sample {
            point: x.clone(),
            residual: v.iter().map(|t| t * t).sum::<f64>().sqrt(),
        });
    }
    let report = ResidualReport::new(residuals, cli.tolerance);
    let numeric_pass = report.passed();
    let agreement = numeric_pass == classification.is_f_biharmonic;

    let anchor = AnchorResult {
        anchor: format!("inversion-family f-bitension m={m} p={p} k={k}"),
        max_residual: report.max_residual,
        verdict: verdict_str(numeric_pass),
    };
    let out = Report {
        command: "verify-inversion".into(),
        config,
        anchors: vec![anchor],
        predicate: Some(output::PredicateOut {
            is_f_biharmonic: classification.is_f_biharmonic,
            cases: classification.cases.iter().map(|c| c.to_string()).collect(),
            agreement: verdict_str(agreement),
        }),
        samples: Some(report.samples.iter().map(Into::into).collect()),
        verdict: verdict_str(numeric_pass),
    };
    match cli.format {
        Format::Json => sink.write_json(&out)?,
        Format::Csv => {
            let mut table = Table::new(point_header(m));
            for s in &report.samples {
                let mut row = s.point.clone();
                row.push(s.residual);
                table.push_row(&row);
            }
            sink.write_csv(&table)?;
        }
    }
    Ok(if agreement {
        EXIT_OK
    } else {
        EXIT_DISAGREEMENT
    })
}

fn point_header(m: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    h.push("residual".into());
    h
}

fn cmd_curve_export(
    cli: &Cli,
    sink: &OutputSink,
    config: RunConfigOut,
    kind: FamilyKind,
    constants: [f64; 4],
    interval: (f64, f64),
    step: f64,
) -> anyhow::Result<u8> {
    let [c1, c2, c3, c] = constants;
    let family = match kind {
        FamilyKind::Planar => R3Family::planar(c1, c2, c3),
        FamilyKind::Helix => R3Family::helix(c1, c2, c3, c),
    }
    .context("invalid family parameters")?;

    let start_frame = CurveFrame::standard(Vector3::zeros());
    let rec = reconstruct_curve(
        |s| family.curvature(s).0,
        |s| family.curvature(s).1,
        interval,
        &start_frame,
        step,
    )
    .context("reconstruction failed")?;

    let mut table = Table::new(
        ["s", "x", "y", "z", "kappa", "tau", "f"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for (i, s) in rec.s.iter().enumerate() {
        let p = rec.points[i];
        let (kappa, tau, f) = family.curvature(*s);
        table.push_row(&[*s, p.x, p.y, p.z, kappa, tau, f]);
    }
    match cli.format {
        Format::Csv => sink.write_csv(&table)?,
        Format::Json => {
            let out = output::TableReport {
                command: "curve-export".into(),
                config,
                anchor: format!(
                    "classified curve family {:?} c1={} c2={} c3={} c={}",
                    family.kind, family.c1, family.c2, family.c3, family.c
                ),
                columns: table.header.clone(),
                rows: table.rows.clone(),
            };
            sink.write_json(&out)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_solve_1d(
    cli: &Cli,
    sink: &OutputSink,
    config: RunConfigOut,
    weight: &str,
    coefficients: [f64; 4],
    interval: (f64, f64),
    rows: usize,
) -> anyhow::Result<u8> {
    let [a, b, c, d] = coefficients;
    let (f, weight_name) = load_weight(weight)?;
    let quadrature_step = (interval.1 - interval.0) / 2048.0;
    let solution = solve_1d(&f, a, b, c, d, interval, quadrature_step).context("solver failed")?;

    // nested fourth difference: widen the base step twentyfold
    let residual_cfg = FdConfig::new(cli.fd_step * 20.0, 2, true).context("bad fd-step")?;
    let inset = 5.0 * residual_cfg.step;
    let lo = interval.0 + inset;
    let hi = interval.1 - inset;
    if !(hi > lo) {
        bail!("interval too small for the residual stencil at this fd-step");
    }
    let mut table = Table::new(vec!["x".into(), "u".into(), "residual".into()]);
    let mut samples = Vec::with_capacity(rows);
    for i in 0..rows.max(2) {
        let x = lo + (hi - lo) * i as f64 / (rows.max(2) - 1) as f64;
        let r = one_dim_residual(solution.u(), &f, x, &residual_cfg)
            .context("residual evaluation failed")?;
        table.push_row(&[x, solution.eval(x), r]);
        samples.push(Sample {
            point: vec![x],
            residual: r,
        });
    }
    let report = ResidualReport::new(samples, cli.tolerance);
    let pass = report.passed();
    match cli.format {
        Format::Csv => sink.write_csv(&table)?,
        Format::Json => {
            let out = Report {
                command: "solve-1d".into(),
                config,
                anchors: vec![AnchorResult {
                    anchor: format!("one-dim solver residual, {weight_name} weight"),
                    max_residual: report.max_residual,
                    verdict: verdict_str(pass),
                }],
                predicate: None,
                samples: Some(report.samples.iter().map(Into::into).collect()),
                verdict: verdict_str(pass),
            };
            sink.write_json(&out)?;
        }
    }
    Ok(if pass { EXIT_OK } else { EXIT_ERROR })
}

fn load_weight(selector: &str) -> anyhow::Result<(ScalarField, String)> {
    match selector {
        "rational" => Ok((ClosedFormWeight::Rational.weight(), "rational".into())),
        "exponential" => Ok((ClosedFormWeight::Exponential.weight(), "exponential".into())),
        path => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read weight table {path}"))?;
            let mut rows: Vec<(f64, f64)> = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut parts = line.split(',');
                let x: f64 = match parts.next().map(str::trim).map(str::parse) {
                    Some(Ok(v)) => v,
                    _ if lineno == 0 => continue, // header row
                    _ => bail!("bad row {} in {path}", lineno + 1),
                };
                let f: f64 = parts
                    .next()
                    .map(str::trim)
                    .and_then(|s| s.parse().ok())
                    .with_context(|| format!("bad row {} in {path}", lineno + 1))?;
                if !(f > 0.0) {
                    bail!("tabulated weight is not positive at x = {x} (f = {f})");
                }
                rows.push((x, f));
            }
            if rows.len() < 2 {
                bail!("weight table {path} needs at least two rows");
            }
            rows.sort_by(|p, q| p.0.total_cmp(&q.0));
            let field =
                ScalarField::new(1, move |x: &[f64]| interp_linear(&rows, x[0])).require_positive();
            Ok((field, format!("tabulated({path})")))
        }
    }
}

fn interp_linear(rows: &[(f64, f64)], x: f64) -> f64 {
    let n = rows.len();
    if x <= rows[0].0 {
        return rows[0].1;
    }
    if x >= rows[n - 1].0 {
        return rows[n - 1].1;
    }
    let mut idx = rows.partition_point(|(xa, _)| *xa <= x);
    idx = idx.clamp(1, n - 1);
    let (x0, f0) = rows[idx - 1];
    let (x1, f1) = rows[idx];
    let t = (x - x0) / (x1 - x0);
    f0 + t * (f1 - f0)
}

fn cmd_verify_suite(cli: &Cli, sink: &OutputSink, config: RunConfigOut) -> anyhow::Result<u8> {
    let outcome = suite::run_suite(&suite::SuiteConfig {
        seed: cli.seed,
        fd_step: cli.fd_step,
        tolerance_scale: cli.tolerance / 1e-5,
    });
    let all_pass = outcome.iter().all(|c| c.pass);
    let anchors: Vec<AnchorResult> = outcome
        .iter()
        .map(|c| AnchorResult {
            anchor: c.anchor.clone(),
            max_residual: c.max_residual,
            verdict: verdict_str(c.pass),
        })
        .collect();
    for c in &outcome {
        if !c.pass {
            eprintln!("FAIL {} (max residual {:.3e})", c.anchor, c.max_residual);
        }
    }
    match cli.format {
        Format::Json => {
            let out = Report {
                command: "verify-suite".into(),
                config,
                anchors,
                predicate: None,
                samples: None,
                verdict: verdict_str(all_pass),
            };
            sink.write_json(&out)?;
        }
        Format::Csv => {
            let mut table = Table::new(vec![
                "anchor".into(),
                "max_residual".into(),
                "verdict".into(),
            ]);
            for a in &anchors {
                table.push_text_row(vec![
                    a.anchor.clone(),
                    output::format_float(a.max_residual),
                    a.verdict.clone(),
                ]);
            }
            sink.write_csv(&table)?;
        }
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_ERROR })
}

fn verdict_str(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.into()
}
