//! The `qcat` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::{apply_sets, emit, load_spec, parse_box, parse_resolution};
use crate::mep::solve_mep;
use crate::metric::{banded_metric, dieudonne_nullspace, dual_eigenbasis, quasi_hermiticity_error, spectral_metric};
use crate::model::{pt_residual, Model, Pair, SymTriMatrix};
use crate::poly::parse::{parse_grat, parse_rat};
use crate::scalar::{format_grat, C64};
use crate::secular::char_poly;
use crate::spectra::robin::{robin_all, robin_lowest_real, RobinRecord};
use crate::spectra::scan::domain_scan;
use crate::spectra::sweep::sweep;
use crate::spectra::{dense_spectrum, eigenvalues, spectrum_distance};

#[derive(Parser, Debug)]
#[command(name = "qcat", version, about = "Exact spectra, exceptional points and metrics of PT-symmetric tridiagonal Hamiltonians")]
pub struct Cli {
    /// Worker threads for scan and sweep (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model JSON file, or inline JSON.
    #[arg(long, short)]
    pub model: String,
    /// Parameter override `name=value` (`name=` frees it); repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub sets: Vec<String>,
    /// Write the result here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Pretty,
    Json,
    Csv,
    Ppm,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the matrix and its PT residual.
    Build {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Exact secular polynomial det(H - E), made monic.
    Secular {
        #[command(flatten)]
        m: ModelArgs,
        /// Energy shift c: print the polynomial in E - c.
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<String>,
        /// Require every odd power to vanish (after the shift).
        #[arg(long)]
        even: bool,
        /// Also substitute s = E^2 (implies --even).
        #[arg(long = "s")]
        s_var: bool,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Eigenvalues at a fully bound parameter point.
    Spectrum {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Spectra along the single free parameter.
    Sweep {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Reality domain of the two free parameters.
    Scan {
        #[command(flatten)]
        m: ModelArgs,
        /// `xlo:xhi,ylo:yhi` (first free parameter on x).
        #[arg(long = "box", allow_hyphen_values = true)]
        bbox: String,
        /// `N` or `NXxNY`.
        #[arg(long, default_value = "400")]
        res: String,
        #[arg(long, value_enum, default_value = "ppm")]
        format: Format,
    },
    /// Maximal exceptional points of the free parameters.
    Mep {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Metric candidates at a bound parameter point.
    Metric {
        #[command(flatten)]
        m: ModelArgs,
        /// Comma-separated positive weights (default all 1).
        #[arg(long)]
        kappa: Option<String>,
        /// Bandwidth of the banded ansatz (0 = diagonal).
        #[arg(long, default_value_t = 0)]
        band: usize,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Boundary-coupling diagnostics of a bound BIM model.
    Robin {
        #[command(flatten)]
        m: ModelArgs,
        /// Every eigenpair instead of the lowest real one.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    // buffered so the worker pool never touches the caller's writer
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut buf)),
            Err(e) => Err(Error::Input(format!("--threads: {e}"))),
        },
        None => dispatch(&cli.command, &mut buf),
    }
    .and_then(|()| Ok(out.write_all(&buf)?));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "qcat: {e}");
            e.exit_code()
        }
    }
}

fn model_of(m: &ModelArgs) -> Result<Model> {
    let mut spec = load_spec(&m.model)?;
    apply_sets(&mut spec, &m.sets)?;
    Model::from_spec(&spec)
}

fn allow(cmd: &str, f: Format, ok: &[Format]) -> Result<()> {
    if ok.contains(&f) {
        Ok(())
    } else {
        Err(Error::Input(format!("format {f:?} is not available for `{cmd}`").to_lowercase()))
    }
}

fn finish(m: &ModelArgs, text: String, out: &mut dyn Write) -> Result<()> {
    emit(m.output.as_deref(), text.as_bytes(), out)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn c64_str(z: C64) -> String {
    crate::metric::format_complex(z)
}

fn entry(h: &SymTriMatrix, i: usize, j: usize) -> String {
    if i == j {
        return h.diag[i].to_string();
    }
    let k = i.min(j);
    if i.abs_diff(j) != 1 {
        return "0".into();
    }
    match &h.pairs[k] {
        Pair::Explicit { sup, sub } => if j > i { sup } else { sub }.to_string(),
        Pair::Antisymmetric { square } => {
            let r = format!("sqrt({square})");
            if j > i {
                r
            } else {
                format!("-{r}")
            }
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Build { m, format } => {
            allow("build", *format, &[Format::Pretty, Format::Json])?;
            let model = model_of(m)?;
            let h = model.rational_matrix();
            let n = h.dim();
            let rows: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| entry(&h, i, j)).collect()).collect();
            let pt = if model.free_params().is_empty() {
                let r = pt_residual(&model.exact_matrix()?);
                Some((r.is_zero, r.value))
            } else {
                None
            };
            let text = if *format == Format::Json {
                json_text(&json!({
                    "family": model.spec.family.to_string(),
                    "dim": n,
                    "free": model.free_params(),
                    "matrix": rows,
                    "pt_residual": pt.map(|(z, v)| json!({"exact_zero": z, "value": v})),
                }))
            } else {
                let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
                let mut s = String::new();
                for r in &rows {
                    let cells: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
                    writeln!(s, "[ {} ]", cells.join("  ")).unwrap();
                }
                match pt {
                    Some((true, _)) => writeln!(s, "PT residual: 0 (exact)").unwrap(),
                    Some((false, v)) => writeln!(s, "PT residual: {v:e}").unwrap(),
                    None => writeln!(s, "PT residual: not evaluated (free parameters: {})", model.free_params().join(", ")).unwrap(),
                }
                s
            };
            finish(m, text, out)
        }
        Command::Secular { m, shift, even, s_var, format } => {
            allow("secular", *format, &[Format::Pretty, Format::Json])?;
            let model = model_of(m)?;
            let mut p = char_poly(&model.rational_matrix());
            if let Some(c) = shift {
                p = p.shift(&parse_grat(c)?)?;
            }
            if *even || *s_var {
                if let Some((k, _)) = p.coeffs.iter().enumerate().find(|(k, c)| k % 2 == 1 && !c.is_zero()) {
                    return Err(Error::OddTerm { power: k });
                }
            }
            if *s_var {
                p = p.to_even_var()?;
            }
            let p = p.monic();
            let text = if *format == Format::Json {
                json_text(&p.to_json())
            } else {
                let shifted = if num_traits::Zero::is_zero(&p.shift) {
                    String::new()
                } else {
                    let c = format_grat(&p.shift);
                    let e = match c.strip_prefix('-') {
                        Some(r) => format!("E + {r}"),
                        None if c.contains(['+', '-']) => format!("E - ({c})"),
                        None => format!("E - {c}"),
                    };
                    if p.var == "s" {
                        format!("    [s = ({e})^2]")
                    } else {
                        format!("    [E stands for {e}]")
                    }
                };
                format!("{p} = 0{shifted}\n")
            };
            finish(m, text, out)
        }
        Command::Spectrum { m, format } => {
            allow("spectrum", *format, &[Format::Pretty, Format::Json, Format::Csv])?;
            let model = model_of(m)?;
            let r = eigenvalues(&model)?;
            let oracle = dense_spectrum(&model)?;
            let dist = spectrum_distance(&r.eigenvalues, &oracle);
            let text = match format {
                Format::Json => json_text(&json!({
                    "eigenvalues": r.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "reality": r.reality,
                    "max_imag": r.max_imag,
                    "params": r.params,
                    "dense_oracle_distance": dist,
                })),
                Format::Csv => {
                    let mut s = String::from("k,re,im\n");
                    for (k, z) in r.eigenvalues.iter().enumerate() {
                        writeln!(s, "{},{},{}", k + 1, z.re, z.im).unwrap();
                    }
                    s
                }
                _ => {
                    let mut s = String::new();
                    for (k, z) in r.eigenvalues.iter().enumerate() {
                        writeln!(s, "E{:<3} {:>22.15}  {:>+22.15e}", k + 1, z.re, z.im).unwrap();
                    }
                    writeln!(s, "real spectrum: {}   max |Im E| = {:.3e}", r.reality, r.max_imag).unwrap();
                    writeln!(s, "dense oracle distance: {dist:.3e}").unwrap();
                    s
                }
            };
            finish(m, text, out)
        }
        Command::Sweep { m, from, to, steps, format } => {
            allow("sweep", *format, &[Format::Csv, Format::Json])?;
            let model = model_of(m)?;
            let r = sweep(&model, &parse_rat(from)?, &parse_rat(to)?, *steps)?;
            let text = if *format == Format::Json {
                json_text(&serde_json::to_value(&r)?)
            } else {
                r.to_csv()
            };
            finish(m, text, out)
        }
        Command::Scan { m, bbox, res, format } => {
            allow("scan", *format, &[Format::Ppm, Format::Csv, Format::Json])?;
            let model = model_of(m)?;
            let s = domain_scan(&model, parse_box(bbox)?, parse_resolution(res)?)?;
            let bytes = match format {
                Format::Ppm => s.to_ppm(),
                Format::Csv => s.to_csv().into_bytes(),
                _ => {
                    let comps = s.components();
                    json_text(&json!({
                        "params": s.params,
                        "bounds": s.bounds,
                        "resolution": s.resolution,
                        "exact": s.exact,
                        "black_cells": s.black_count(),
                        "components": comps.iter().map(Vec::len).collect::<Vec<_>>(),
                        "boundary_cells": s.boundary_cells.len(),
                    }))
                    .into_bytes()
                }
            };
            emit(m.output.as_deref(), &bytes, out)
        }
        Command::Mep { m, format } => {
            allow("mep", *format, &[Format::Pretty, Format::Json])?;
            let model = model_of(m)?;
            let sols = solve_mep(&model)?;
            let text = if *format == Format::Json {
                json_text(&serde_json::Value::Array(sols.iter().map(|s| s.to_json()).collect()))
            } else {
                let names: Vec<String> = sols.first().map(|s| s.point.keys().cloned().collect()).unwrap_or_default();
                let mut s = String::new();
                let head: Vec<String> = names.iter().map(|n| format!("{n:>16}")).collect();
                writeln!(s, "{}  {:>10}  {:>10}", head.join(""), "residual", "radius").unwrap();
                for x in &sols {
                    let cells: Vec<String> = names.iter().map(|n| format!("{:>16}", x.format_value(n, 10))).collect();
                    writeln!(s, "{}  {:>10.2e}  {:>10.2e}", cells.join(""), x.max_residual(), x.degeneracy.cluster_radius)
                        .unwrap();
                }
                if sols.is_empty() {
                    writeln!(s, "no real maximal exceptional points").unwrap();
                }
                s
            };
            finish(m, text, out)
        }
        Command::Metric { m, kappa, band, format } => {
            allow("metric", *format, &[Format::Pretty, Format::Json])?;
            let model = model_of(m)?;
            let h = model.float_matrix()?.to_dense();
            let n = h.nrows();
            let kappa: Vec<f64> = match kappa {
                Some(k) => k
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad weight `{x}`"))))
                    .collect::<Result<_>>()?,
                None => vec![1.0; n],
            };
            let basis = dieudonne_nullspace(&h)?;
            let dual = dual_eigenbasis(&h)?;
            let spectral = spectral_metric(&h, &kappa)?;
            let qh = quasi_hermiticity_error(&h, &spectral.theta)?;
            let banded = match banded_metric(&h, *band) {
                Ok(b) => Ok(b),
                Err(Error::Ambiguity(d)) => Err(d),
                Err(e) => return Err(e),
            };
            let text = if *format == Format::Json {
                let kets: Vec<Vec<String>> = (0..n).map(|j| dual.ket(j).into_iter().map(c64_str).collect()).collect();
                json_text(&json!({
                    "eigenvalues": dual.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "nullspace_dimension": basis.len(),
                    "dual_condition": dual.condition,
                    "dual_kets": kets,
                    "spectral": spectral.to_json(),
                    "spectral_relative_residual": spectral.relative_residual(&h),
                    "quasi_hermiticity_error": qh,
                    "banded": match &banded {
                        Ok(Some(b)) => b.to_json(),
                        Ok(None) => serde_json::Value::Null,
                        Err(d) => json!({"ambiguous_dimension": d}),
                    },
                }))
            } else {
                let mut s = String::new();
                writeln!(s, "Dieudonné nullspace dimension: {}", basis.len()).unwrap();
                writeln!(s, "dual eigenbasis condition number: {:.3e}", dual.condition).unwrap();
                for j in 0..n {
                    let e = dual.eigenvalues[j];
                    let comps: Vec<String> = dual.ket(j).into_iter().map(|z| format!("{:.10}", z.re)).collect();
                    writeln!(s, "  E = {:>14.10}  Xi = ({})", e.re, comps.join(", ")).unwrap();
                }
                let p = &spectral.positivity;
                writeln!(
                    s,
                    "spectral metric (kappa = {kappa:?}): positive definite {}, eigenvalues [{:.4e}, {:.4e}], residual {:.2e}, quasi-Hermiticity {:.2e}",
                    p.is_positive_definite,
                    p.min_eigenvalue,
                    p.max_eigenvalue,
                    spectral.relative_residual(&h),
                    qh
                )
                .unwrap();
                match &banded {
                    Ok(Some(b)) => {
                        let p = &b.positivity;
                        writeln!(
                            s,
                            "band-{band} metric: unique, positive definite {}, eigenvalues [{:.4e}, {:.4e}]",
                            p.is_positive_definite, p.min_eigenvalue, p.max_eigenvalue
                        )
                        .unwrap();
                        if *band == 0 {
                            let d: Vec<String> = (0..n).map(|i| format!("{:.10}", b.theta[(i, i)].re)).collect();
                            writeln!(s, "  diag = ({})", d.join(", ")).unwrap();
                        }
                    }
                    Ok(None) => writeln!(s, "band-{band} metric: none").unwrap(),
                    Err(d) => writeln!(s, "band-{band} metric: ambiguous ({d}-dimensional family)").unwrap(),
                }
                s
            };
            finish(m, text, out)
        }
        Command::Robin { m, all, format } => {
            allow("robin", *format, &[Format::Pretty, Format::Json])?;
            let model = model_of(m)?;
            let recs: Vec<RobinRecord> = if *all {
                robin_all(&model)?
            } else {
                robin_lowest_real(&model)?.into_iter().collect()
            };
            let text = if *format == Format::Json {
                json_text(&serde_json::to_value(&recs)?)
            } else {
                let mut s = format!(
                    "{:>5} {:>8} {:>26} {:>12} {:>12} {:>12}\n",
                    "N", "lambda", "E", "identity", "robin", "robin_rel"
                );
                for r in &recs {
                    writeln!(
                        s,
                        "{:>5} {:>8.4} {:>26} {:>12.3e} {:>12.3e} {:>12.3e}",
                        r.dim,
                        r.lambda,
                        c64_str(r.energy),
                        r.identity_residual,
                        r.robin_residual.norm(),
                        r.robin_relative
                    )
                    .unwrap();
                }
                if recs.is_empty() {
                    s.push_str("no real eigenvalue\n");
                }
                s
            };
            finish(m, text, out)
        }
    }
}
