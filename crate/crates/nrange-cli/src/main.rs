//! Command-line front end: numerical ranges, unitary dilations, defect-one
//! range verification, and inner-function boundary analysis, all speaking
//! JSON on disk and optionally emitting SVG pictures of the unit disk.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use serde::Serialize;

use nrange_core::dilation::{self, EigTarget};
use nrange_core::inner::InnerFunctionSpec;
use nrange_core::svg::DiskPicture;
use nrange_core::{linalg, model, numrange};
use nrange_core::{ComplexMatrix, ConvexRegion, DilationError, InnerError, ModelError};

type C64 = Complex<f64>;

// exit codes: soft verification failures and classes of bad input get their
// own values so scripts can branch without parsing stderr
const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_NOT_CONTRACTION: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;
const EXIT_TARGET_IN_SPECTRUM: u8 = 4;
const EXIT_BAD_MULTIPLICITIES: u8 = 5;
const EXIT_UNDECLARED_TAIL: u8 = 6;

const MIN_PHI_SAMPLES: usize = 64;
const MIN_LAM_SAMPLES: usize = 36;

#[derive(Parser)]
#[command(
    name = "nrange",
    version,
    about = "Numerical ranges of contractions, unitary dilations, and model-space boundaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the numerical range of a complex matrix
    Range(RangeArgs),
    /// Build a minimal unitary dilation, optionally with prescribed eigenvalues
    Dilate(DilateArgs),
    /// Check a defect-one contraction's range against its dilation family
    Verify(VerifyArgs),
    /// Analyze an inner function: region, endpoint classes, matrix model
    Model(ModelArgs),
}

#[derive(Args)]
struct RangeArgs {
    /// Matrix JSON: {"dim": n, "entries": [[[re,im],...],...]}
    input: PathBuf,
    /// Angular support samples (even, ≥ 64)
    #[arg(long, default_value_t = 2048)]
    phi_samples: usize,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the region into this SVG file
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct DilateArgs {
    /// Matrix JSON of the contraction
    input: PathBuf,
    /// Prescribed unimodular eigenvalue as "re,im" or "re,im:multiplicity";
    /// repeat for several targets. Multiplicities must sum to the defect
    /// index. Without targets the defect unitary is the identity.
    #[arg(long = "eig", value_name = "RE,IM[:MULT]")]
    eigs: Vec<String>,
    /// Relative rank cutoff for the defect space
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    /// Write the dilation record here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw base range and dilation eigenvalues into this SVG file
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Matrix JSON of a defect-one contraction
    input: PathBuf,
    /// Angular support samples (even, ≥ 64)
    #[arg(long, default_value_t = 2048)]
    phi_samples: usize,
    /// Defect-circle samples (≥ 36)
    #[arg(long, alias = "grid", default_value_t = 720)]
    lam_samples: usize,
    /// Relative rank cutoff for the defect space
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    /// Largest acceptable support gap between the two constructions
    #[arg(long, default_value_t = 2e-3)]
    tol: f64,
    /// Write the verification report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw both regions into this SVG file
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Inner function JSON: {"zeros": [[re,im],...], "atoms": [{"angle","mass"},...], "tail": {...}?}
    input: PathBuf,
    /// Angular support samples (even, ≥ 64)
    #[arg(long, default_value_t = 2048)]
    phi_samples: usize,
    /// Unimodular targets for the root-polygon checks (≥ 36)
    #[arg(long, alias = "grid", default_value_t = 90)]
    lam_samples: usize,
    /// Directory for region.json / classification.json / matrix.json /
    /// poncelet.json; without it one combined report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw the reconstructed region into this SVG file
    #[arg(long)]
    svg: Option<PathBuf>,
}

// ---- failure plumbing ----

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: anyhow::Error) -> Self {
        Self { code, error }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: EXIT_BAD_INPUT, error }
    }
}

impl From<DilationError> for Failure {
    fn from(e: DilationError) -> Self {
        let code = match &e {
            DilationError::NotAContraction { .. } => EXIT_NOT_CONTRACTION,
            DilationError::TargetInSpectrum { .. } => EXIT_TARGET_IN_SPECTRUM,
            DilationError::BadMultiplicities { .. } => EXIT_BAD_MULTIPLICITIES,
            _ => EXIT_BAD_INPUT,
        };
        Self::new(code, anyhow!(e))
    }
}

impl From<InnerError> for Failure {
    fn from(e: InnerError) -> Self {
        let code = match &e {
            InnerError::UndeclaredTailVerdict { .. } => EXIT_UNDECLARED_TAIL,
            _ => EXIT_BAD_INPUT,
        };
        Self::new(code, anyhow!(e))
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Inner(inner) => inner.into(),
            other => Self::new(EXIT_BAD_INPUT, anyhow!(other)),
        }
    }
}

impl From<numrange::RegionError> for Failure {
    fn from(e: numrange::RegionError) -> Self {
        Self::new(EXIT_BAD_INPUT, anyhow!(e))
    }
}

impl From<linalg::LinalgError> for Failure {
    fn from(e: linalg::LinalgError) -> Self {
        Self::new(EXIT_BAD_INPUT, anyhow!(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Range(args) => run_range(args),
        Command::Dilate(args) => run_dilate(args),
        Command::Verify(args) => run_verify(args),
        Command::Model(args) => run_model(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

// ---- shared helpers ----

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("bad matrix JSON in {}", path.display()))
}

fn read_spec(path: &Path) -> Result<InnerFunctionSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("bad inner-function JSON in {}", path.display()))
}

fn check_phi(samples: usize) -> Result<()> {
    if samples < MIN_PHI_SAMPLES || samples % 2 != 0 {
        anyhow::bail!("--phi-samples must be even and at least {MIN_PHI_SAMPLES}, got {samples}");
    }
    Ok(())
}

fn check_lam(samples: usize) -> Result<()> {
    if samples < MIN_LAM_SAMPLES {
        anyhow::bail!("--lam-samples must be at least {MIN_LAM_SAMPLES}, got {samples}");
    }
    Ok(())
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    use std::io::Write;
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            // tolerate a closed pipe (e.g. `nrange range m.json | head`)
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other.context("cannot write to stdout")?,
            }
        }
    }
    Ok(())
}

fn write_svg(picture: &DiskPicture, path: &Path) -> Result<()> {
    fs::write(path, picture.render()).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_eig(raw: &str) -> Result<EigTarget> {
    let (point, mult) = match raw.split_once(':') {
        Some((p, m)) => {
            let multiplicity: usize =
                m.parse().with_context(|| format!("bad multiplicity in --eig {raw}"))?;
            (p, multiplicity)
        }
        None => (raw, 1),
    };
    let (re, im) = point
        .split_once(',')
        .ok_or_else(|| anyhow!("--eig expects RE,IM[:MULT], got {raw}"))?;
    let lambda = C64::new(
        re.trim().parse().with_context(|| format!("bad real part in --eig {raw}"))?,
        im.trim().parse().with_context(|| format!("bad imaginary part in --eig {raw}"))?,
    );
    if mult == 0 {
        anyhow::bail!("--eig multiplicity must be positive in {raw}");
    }
    Ok(EigTarget { lambda, multiplicity: mult })
}

// ---- range ----

#[derive(Serialize)]
struct RangeReport {
    dim: usize,
    phi_samples: usize,
    numerical_radius: f64,
    region: ConvexRegion,
}

fn run_range(args: RangeArgs) -> Result<(), Failure> {
    check_phi(args.phi_samples)?;
    let matrix = read_matrix(&args.input)?;
    let region = numrange::range_region(&matrix.as_array(), args.phi_samples)?;
    let numerical_radius =
        region.boundary().iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let report = RangeReport {
        dim: matrix.dim(),
        phi_samples: args.phi_samples,
        numerical_radius,
        region,
    };
    if let Some(path) = &args.svg {
        let mut picture = DiskPicture::new();
        picture.region(&report.region, "#4a90d9", "#1c5a96");
        write_svg(&picture, path)?;
    }
    emit(&report, args.out.as_deref())?;
    Ok(())
}

// ---- dilate ----

fn run_dilate(args: DilateArgs) -> Result<(), Failure> {
    let matrix = read_matrix(&args.input)?;
    let view = matrix.as_array();
    let targets: Vec<EigTarget> =
        args.eigs.iter().map(|raw| parse_eig(raw)).collect::<Result<_>>()?;
    let record = if targets.is_empty() {
        let pi = dilation::build_tilde(&view, args.rank_tol)?;
        let omega = ndarray::Array2::<C64>::eye(pi.d());
        let unitary = dilation::dilation_from_omega(&pi, &omega.view())?;
        dilation::DilationRecord {
            matrix: unitary,
            base_dim: pi.dim() - pi.d(),
            targets: Vec::new(),
            omega,
        }
    } else {
        dilation::dilation_with_eigenvalues(&view, &targets, args.rank_tol)?
    };
    if let Some(path) = &args.svg {
        let base = numrange::range_region(&view, 512)?;
        let (vals, _) = linalg::eig(&record.matrix.view())?;
        let mut picture = DiskPicture::new();
        picture.region(&base, "#4a90d9", "#1c5a96");
        picture.points(&vals.to_vec(), "#c0392b");
        write_svg(&picture, path)?;
    }
    emit(&record, args.out.as_deref())?;
    Ok(())
}

// ---- verify ----

#[derive(Serialize)]
struct VerifyReport {
    dim: usize,
    defect_index: usize,
    phi_samples: usize,
    lam_samples: usize,
    /// sup-gap between the dilation-family intersection and the sampled range
    gap: f64,
    /// the same gap with both grids doubled
    doubled_gap: f64,
    /// gap / doubled_gap; values well above 1 show grid-limited convergence
    shrink_factor: f64,
    tol: f64,
    pass: bool,
}

/// Intersection of the eigenvalue-polygon hulls of every U_ω over the ω-grid,
/// compared against the directly sampled range on the φ-grid.
fn family_gap(
    t: &ndarray::ArrayView2<'_, C64>,
    rank_tol: f64,
    phi_samples: usize,
    lam_samples: usize,
) -> Result<f64, Failure> {
    let pi = dilation::build_tilde(t, rank_tol)?;
    let mut hulls = Vec::with_capacity(lam_samples);
    for j in 0..lam_samples {
        let omega = ndarray::Array2::from_elem(
            (1, 1),
            C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / lam_samples as f64),
        );
        let unitary = dilation::dilation_from_omega(&pi, &omega.view())?;
        let (vals, _) = linalg::eig(&unitary.view())?;
        hulls.push(ConvexRegion::from_points(&vals.to_vec(), phi_samples)?);
    }
    let refs: Vec<&ConvexRegion> = hulls.iter().collect();
    let intersection = numrange::intersect_regions(&refs)?;
    let range = numrange::range_region(t, phi_samples)?;
    Ok(numrange::hausdorff_gap(&intersection, &range)?)
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    check_phi(args.phi_samples)?;
    check_lam(args.lam_samples)?;
    let matrix = read_matrix(&args.input)?;
    let view = matrix.as_array();
    let defect = dilation::defect_data(&view, args.rank_tol)?;
    if defect.index != 1 {
        return Err(Failure::new(
            EXIT_BAD_INPUT,
            anyhow!("verification needs defect index 1, this matrix has {}", defect.index),
        ));
    }
    let gap = family_gap(&view, args.rank_tol, args.phi_samples, args.lam_samples)?;
    let doubled_gap =
        family_gap(&view, args.rank_tol, 2 * args.phi_samples, 2 * args.lam_samples)?;
    let shrink_factor = if doubled_gap > 0.0 { gap / doubled_gap } else { f64::INFINITY };
    let report = VerifyReport {
        dim: matrix.dim(),
        defect_index: defect.index,
        phi_samples: args.phi_samples,
        lam_samples: args.lam_samples,
        gap,
        doubled_gap,
        shrink_factor,
        tol: args.tol,
        pass: gap <= args.tol,
    };
    if let Some(path) = &args.svg {
        let range = numrange::range_region(&view, args.phi_samples)?;
        let mut picture = DiskPicture::new();
        picture.region(&range, "#4a90d9", "#1c5a96");
        write_svg(&picture, path)?;
    }
    emit(&report, args.out.as_deref())?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VERIFY_FAIL,
            anyhow!("support gap {gap:.3e} exceeds tolerance {:.3e}", args.tol),
        ))
    }
}

// ---- model ----

#[derive(Serialize)]
struct EndpointRow {
    arc_start: f64,
    arc_end: f64,
    at_end: bool,
    verdict: nrange_core::EndpointVerdict,
}

#[derive(Serialize)]
struct PonceletRow {
    lambda: [f64; 2],
    angles: Vec<f64>,
    max_side_gap: f64,
    max_angle_mismatch: f64,
}

#[derive(Serialize)]
struct MatrixSection {
    matrix: ComplexMatrix,
    region: ConvexRegion,
    /// sup-gap between the chord-envelope region and the matrix range
    envelope_gap: f64,
    poncelet: Vec<PonceletRow>,
    worst_side_gap: f64,
    worst_angle_mismatch: f64,
}

#[derive(Serialize)]
struct ModelReport {
    degree: usize,
    phi_samples: usize,
    region: ConvexRegion,
    classification: Vec<EndpointRow>,
    /// present only for plain finite zero sets
    model: Option<MatrixSection>,
}

fn run_model(args: ModelArgs) -> Result<(), Failure> {
    check_phi(args.phi_samples)?;
    check_lam(args.lam_samples)?;
    let spec = read_spec(&args.input)?;
    let region = spec.envelope_region(args.phi_samples)?;

    let mut classification = Vec::new();
    for arc in spec.component_arcs() {
        if arc.full_circle {
            continue;
        }
        for at_end in [false, true] {
            let verdict = spec.classify_endpoint(&arc, at_end)?;
            classification.push(EndpointRow {
                arc_start: arc.start,
                arc_end: arc.end,
                at_end,
                verdict,
            });
        }
    }

    let finite_blaschke = spec.atoms().is_empty() && spec.tail().is_none();
    let model = if finite_blaschke {
        let zeros = spec.expanded_zeros();
        let matrix = model::model_matrix(&zeros)?;
        let matrix_region = numrange::range_region(&matrix.as_array(), args.phi_samples)?;
        let envelope_gap = numrange::hausdorff_gap(&region, &matrix_region)?;
        let mut poncelet = Vec::with_capacity(args.lam_samples);
        let mut worst_side_gap = 0.0f64;
        let mut worst_angle_mismatch = 0.0f64;
        for j in 0..args.lam_samples {
            let lambda =
                C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / args.lam_samples as f64);
            let report = model::poncelet_check(&matrix, &zeros, lambda)?;
            worst_side_gap = worst_side_gap.max(report.max_side_gap);
            worst_angle_mismatch = worst_angle_mismatch.max(report.max_angle_mismatch);
            poncelet.push(PonceletRow {
                lambda: [lambda.re, lambda.im],
                angles: report.angles,
                max_side_gap: report.max_side_gap,
                max_angle_mismatch: report.max_angle_mismatch,
            });
        }
        Some(MatrixSection {
            matrix,
            region: matrix_region,
            envelope_gap,
            poncelet,
            worst_side_gap,
            worst_angle_mismatch,
        })
    } else {
        None
    };

    if let Some(path) = &args.svg {
        let mut picture = DiskPicture::new();
        picture.region(&region, "#4a90d9", "#1c5a96");
        picture.points(&spec.expanded_zeros(), "#2c3e50");
        picture.circle_marks(
            &spec.atoms().iter().map(|a| a.angle).collect::<Vec<_>>(),
            "#7d3c98",
        );
        write_svg(&picture, path)?;
    }

    let report = ModelReport {
        degree: spec.degree(),
        phi_samples: args.phi_samples,
        region,
        classification,
        model,
    };
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            emit(&report.region, Some(&dir.join("region.json")))?;
            emit(&report.classification, Some(&dir.join("classification.json")))?;
            if let Some(section) = &report.model {
                emit(&section.matrix, Some(&dir.join("matrix.json")))?;
                emit(&section.poncelet, Some(&dir.join("poncelet.json")))?;
            }
        }
        None => emit(&report, None)?,
    }
    Ok(())
}
