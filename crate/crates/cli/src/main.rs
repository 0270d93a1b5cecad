use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ofi_core::assembly::{assemble_closed_form, assemble_exact, assemble_quadrature, closed_form_scale};
use ofi_core::io::read_spec_json;
use ofi_core::spectrum::{laplace_eigs_1d, outlier_report, tensor_eigs, tensor_residual_check, TensorSpec};
use ofi_core::symbols::SymbolFn;
use ofi_core::tau::{to_f64_matrix, StructuredMatrix};
use ofi_core::{alpha_coeffs, BoundaryKind, SpaceSpec};

mod output;

use output::{write_matrix, Cell, Format, Table};

/// Largest tensor problem whose dense residual check runs automatically.
const TENSOR_DENSE_LIMIT: usize = 2000;

#[derive(Parser)]
#[command(name = "ofi", version, about = "Outlier-free spline Galerkin matrices and their closed-form spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the symbol g_p^r on [0, pi].
    Symbol {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long, default_value_t = 65)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Assemble X^{p,r,b} as a dense matrix.
    Assemble {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compare the closed-form structure with quadrature.
    VerifyStructure {
        #[command(flatten)]
        space: SpaceArgs,
        /// Derivative order; both 0 and 1 when omitted.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Report the comparison below the structure threshold instead of refusing.
        #[arg(long)]
        below_threshold: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form eigenvalues, optionally with eigenvectors.
    Eigs {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_enum, default_value_t = Operator::Laplace)]
        matrix: Operator,
        #[arg(long)]
        vectors: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Discrete versus continuous spectrum with the relative-error bound.
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        sorted: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenvalues of the Dirichlet tensor-product problem on [0, 1]^d.
    Tensor {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Multi-indices used for the dense residual check.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        sorted: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve X^{p,r,b} x = b through the fast transform.
    Solve {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        r: Option<usize>,
        /// Whitespace-separated right-hand side; all ones when omitted.
        #[arg(long)]
        rhs: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// dirichlet | neumann | mixed | reduced
    #[arg(long)]
    kind: Option<BoundaryKind>,
    /// JSON file with keys p, n, kind, r; flags take precedence.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl SpaceArgs {
    fn resolve(&self, r: Option<usize>) -> Result<(SpaceSpec, Option<usize>)> {
        let file = self.spec.as_ref().map(|p| read_spec_json(p)).transpose()?;
        let p = self.p.or(file.map(|f| f.p)).ok_or_else(|| anyhow!("missing --p"))?;
        let n = self.n.or(file.map(|f| f.n)).ok_or_else(|| anyhow!("missing --n"))?;
        let kind = self.kind.or(file.map(|f| f.kind)).ok_or_else(|| anyhow!("missing --kind"))?;
        Ok((SpaceSpec::new(p, n, kind)?, r.or(file.map(|f| f.r))))
    }
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutArgs {
    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    fn table(&self, t: &Table) -> Result<()> {
        let mut buf = Vec::new();
        t.write(&mut buf, self.format.unwrap_or(Format::Csv))?;
        self.emit(&buf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    ClosedForm,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Operator {
    Laplace,
    Mass,
    Stiffness,
}

enum Outcome {
    Ok,
    ToleranceFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match init_threads().and_then(|_| run(cli.command)) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ToleranceFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let singular = matches!(e.downcast_ref::<ofi_core::Error>(), Some(ofi_core::Error::Singular { .. }));
            ExitCode::from(if singular { 3 } else { 1 })
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("OFI_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("OFI_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            bail!("OFI_THREADS must be a positive integer, got '{v}'");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Symbol { p, r, samples, out } => cmd_symbol(p, r, samples, &out),
        Command::Assemble { space, r, method, out } => cmd_assemble(&space, r, method, &out),
        Command::VerifyStructure { space, r, tol, below_threshold, out } => {
            cmd_verify_structure(&space, r, tol, below_threshold, &out)
        }
        Command::Eigs { space, matrix, vectors, out } => cmd_eigs(&space, matrix, vectors, &out),
        Command::Spectrum { space, sorted, out } => cmd_spectrum(&space, sorted, &out),
        Command::Tensor { p, n, samples, tol, sorted, out } => cmd_tensor(&p, &n, samples, tol, sorted, &out),
        Command::Solve { space, r, rhs, out } => cmd_solve(&space, r, rhs, &out),
    }
}

fn cmd_symbol(p: usize, r: usize, samples: usize, out: &OutArgs) -> Result<Outcome> {
    if samples == 0 {
        bail!("--samples must be at least 1");
    }
    let g = SymbolFn::spline(p, r)?;
    let mut t = Table::new(["theta", "value"]);
    for k in 0..samples {
        let theta = if samples == 1 {
            0.0
        } else if k + 1 == samples {
            PI
        } else {
            PI * k as f64 / (samples - 1) as f64
        };
        t.push(vec![theta.into(), g.eval(theta)?.into()]);
    }
    out.table(&t)?;
    Ok(Outcome::Ok)
}

fn cmd_assemble(space: &SpaceArgs, r: Option<usize>, method: Method, out: &OutArgs) -> Result<Outcome> {
    let (spec, r) = space.resolve(r)?;
    let r = r.unwrap_or(0);
    let a = match method {
        Method::Quadrature => assemble_quadrature(&spec, r)?,
        Method::ClosedForm => assemble_closed_form(&spec, r)?.dense(),
        Method::Exact => to_f64_matrix(&assemble_exact(&spec, r)?),
    };
    let mut buf = Vec::new();
    write_matrix(&mut buf, &a, out.format.unwrap_or(Format::Matrixmarket))?;
    out.emit(&buf)?;
    Ok(Outcome::Ok)
}

fn cmd_verify_structure(
    space: &SpaceArgs,
    r: Option<usize>,
    tol: f64,
    below_threshold: bool,
    out: &OutArgs,
) -> Result<Outcome> {
    let (spec, r) = space.resolve(r)?;
    let structured = spec.check_threshold();
    if !below_threshold {
        structured.as_ref().map_err(|e| anyhow!("{e}"))?;
    }
    let orders = match r {
        Some(r) => vec![r],
        None => vec![0, 1],
    };
    let mut t = Table::new(["r", "n", "threshold", "structured", "max_abs_diff", "scale", "ok"]);
    let mut failed = false;
    for r in orders {
        let quad = assemble_quadrature(&spec, r)?;
        let closed =
            StructuredMatrix::new(alpha_coeffs(spec.p, r)?, spec.n, spec.kind.algebra(), closed_form_scale(&spec, r))?;
        let diff = (closed.dense() - &quad).amax();
        let scale = quad.amax();
        let ok = diff <= tol * scale;
        if structured.is_ok() && !ok {
            failed = true;
        }
        t.push(vec![
            r.into(),
            spec.n.into(),
            spec.threshold().into(),
            structured.is_ok().into(),
            diff.into(),
            scale.into(),
            ok.into(),
        ]);
    }
    out.table(&t)?;
    Ok(if failed { Outcome::ToleranceFailed } else { Outcome::Ok })
}

fn cmd_eigs(space: &SpaceArgs, matrix: Operator, vectors: bool, out: &OutArgs) -> Result<Outcome> {
    let (spec, _) = space.resolve(None)?;
    let (theta, lambda, columns): (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) = match matrix {
        Operator::Laplace => {
            let l = laplace_eigs_1d(&spec)?;
            let cols = if vectors { (1..=spec.n).map(|j| l.eigenvector(j)).collect::<Result<_, _>>()? } else { vec![] };
            (l.theta().to_vec(), l.eigenvalues().to_vec(), cols)
        }
        Operator::Mass | Operator::Stiffness => {
            let r = usize::from(matrix == Operator::Stiffness);
            let es = assemble_closed_form(&spec, r)?.eigensystem();
            let cols =
                if vectors { (1..=spec.n).map(|j| es.eigenvector(j)).collect::<Result<_, _>>()? } else { vec![] };
            ((1..=spec.n).map(|j| es.theta(j)).collect(), es.eigenvalues().to_vec(), cols)
        }
    };
    let mut header = vec!["j".to_string(), "theta".into(), "lambda".into()];
    if vectors {
        header.extend((1..=spec.n).map(|i| format!("u{i}")));
    }
    let mut t = Table::new(header);
    for j in 0..spec.n {
        let mut row: Vec<Cell> = vec![(j + 1).into(), theta[j].into(), lambda[j].into()];
        if vectors {
            row.extend(columns[j].iter().map(|v| Cell::from(*v)));
        }
        t.push(row);
    }
    out.table(&t)?;
    Ok(Outcome::Ok)
}

fn cmd_spectrum(space: &SpaceArgs, sorted: bool, out: &OutArgs) -> Result<Outcome> {
    let (spec, _) = space.resolve(None)?;
    let report = outlier_report(&spec)?;
    let rows = if sorted { report.sorted_rows() } else { report.rows.clone() };
    let mut t = Table::new(["j", "theta", "lambda_discrete", "lambda_exact", "rel_error", "bound_rhs", "ok"]);
    for r in rows {
        t.push(vec![
            r.j.into(),
            r.theta.into(),
            r.lambda_discrete.into(),
            r.lambda_exact.into(),
            r.rel_error.into(),
            r.bound_rhs.into(),
            r.ok.into(),
        ]);
    }
    out.table(&t)?;
    eprintln!("max_rel_error = {:e}, all_ok = {}", report.max_rel_error, report.all_ok);
    Ok(if report.all_ok { Outcome::Ok } else { Outcome::ToleranceFailed })
}

fn cmd_tensor(p: &[usize], n: &[usize], samples: usize, tol: f64, sorted: bool, out: &OutArgs) -> Result<Outcome> {
    let tspec = TensorSpec::new(p, n)?;
    let eigs = tensor_eigs(&tspec)?;
    let total = tspec.total_size();
    if total > ofi_core::spectrum::TENSOR_CAP {
        bail!("{total} eigenvalues exceed the output cap of {}", ofi_core::spectrum::TENSOR_CAP);
    }
    let mut rows: Vec<(Vec<usize>, f64, f64)> =
        eigs.indices().map(|idx| Ok((idx.clone(), eigs.laplace(&idx)?, eigs.mass(&idx)?))).collect::<Result<_>>()?;
    if sorted {
        rows.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    }
    let mut header: Vec<String> = (1..=tspec.d()).map(|r| format!("j{r}")).collect();
    header.extend(["lambda_l", "lambda_m", "lambda_k"].map(String::from));
    let mut t = Table::new(header);
    for (idx, l, m) in &rows {
        let mut row: Vec<Cell> = idx.iter().map(|&j| Cell::from(j)).collect();
        row.extend([Cell::from(*l), Cell::from(*m), Cell::from(l * m)]);
        t.push(row);
    }
    out.table(&t)?;
    if total > TENSOR_DENSE_LIMIT || samples == 0 {
        eprintln!("residual check skipped (size {total})");
        return Ok(Outcome::Ok);
    }
    let all: Vec<Vec<usize>> = eigs.indices().collect();
    let picks: Vec<Vec<usize>> = if samples >= total {
        all
    } else if samples == 1 {
        vec![all[0].clone()]
    } else {
        (0..samples).map(|k| all[k * (total - 1) / (samples - 1)].clone()).collect()
    };
    let res = tensor_residual_check(&tspec, &picks)?;
    let ok = res <= tol;
    eprintln!("max ||K u - lambda M u|| / ||K||_F = {res:e} over {} multi-indices, ok = {ok}", picks.len());
    Ok(if ok { Outcome::Ok } else { Outcome::ToleranceFailed })
}

fn cmd_solve(space: &SpaceArgs, r: Option<usize>, rhs: Option<PathBuf>, out: &OutArgs) -> Result<Outcome> {
    let (spec, r) = space.resolve(r)?;
    let a = assemble_closed_form(&spec, r.unwrap_or(0))?;
    let b: Vec<f64> = match rhs {
        Some(path) => fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| anyhow!("bad number '{s}' in right-hand side")))
            .collect::<Result<_>>()?,
        None => vec![1.0; spec.n],
    };
    let x = a.solve(&b)?;
    let mut t = Table::new(["i", "x"]);
    for (i, v) in x.iter().enumerate() {
        t.push(vec![(i + 1).into(), (*v).into()]);
    }
    out.table(&t)?;
    Ok(Outcome::Ok)
}
