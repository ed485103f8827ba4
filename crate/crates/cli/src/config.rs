//! Command-line arguments and the optional JSON configuration they override.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "yil", version, about = "Screened (Yukawa) nonlocal isoperimetric energy: evaluation, limits and gradient flow")]
pub struct Cli {
    /// JSON configuration file; explicit flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (falls back to YIL_THREADS, then to all cores).
    #[arg(long, global = true, env = "YIL_THREADS")]
    pub threads: Option<usize>,

    /// Output file, written atomically; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Energy of a shape through the bulk double integral and the boundary
    /// representations (isotropic and anisotropic blow-up); the two must agree.
    Energy(EnergyArgs),
    /// Large-λ behaviour on a fixed shape: the second-order expansion
    /// coefficient ∫κ²/(8πα⁴) at fixed α, or, with --sigma, convergence of
    /// λ²F to the perimeter-plus-elastica limit in the critical regime.
    Expansion(ExpansionArgs),
    /// Disk/annulus phase diagram of the perimeter-plus-elastica limit and the
    /// critical coefficient σ̄ where the optimal annulus ties with the disk.
    Phase(PhaseArgs),
    /// Area-preserving gradient flow of the energy through the
    /// Euler-Lagrange velocity -(κ + v - μ); writes the step,energy,area,residual trace.
    Flow(FlowArgs),
    /// Self-interaction of the unit-mass annulus as its hole moves off center,
    /// probing minimality of the concentric annulus.
    Centered(CenteredArgs),
    /// Exact electrolyte interface kernel against its Yukawa approximation,
    /// with the dipolar far-field slope.
    Kernels(KernelArgs),
    /// Self-checks: half-plane constant, representation equality on the unit
    /// disk against the covariogram oracle, and the phase boundary.
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Energy(_) => "energy",
            Command::Expansion(_) => "expansion",
            Command::Phase(_) => "phase",
            Command::Flow(_) => "flow",
            Command::Centered(_) => "centered",
            Command::Kernels(_) => "kernels",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Disk,
    Ellipse,
    Annulus,
    File,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ShapeArgs {
    /// Shape family.
    #[arg(long, value_enum)]
    pub shape: Option<ShapeKind>,
    /// Disk radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ellipse semi-axis along x.
    #[arg(long)]
    pub a: Option<f64>,
    /// Ellipse semi-axis along y.
    #[arg(long)]
    pub b: Option<f64>,
    /// Annulus inner radius r (outer radius √(1 + r²), area π).
    #[arg(long)]
    pub inner: Option<f64>,
    /// Curve-system JSON file for --shape file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Samples per curve.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Rescale the shape to this area.
    #[arg(long)]
    pub area: Option<f64>,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Bulk,
    Boundary,
    Anisotropic,
    Both,
    All,
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Screening parameter; alternatively give --sigma.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Critical-regime coefficient, fixing α through σ = λ²(1 - 1/(2πα²)).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Angular quadrature and radial cut-off tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Raster spacing for the bulk method.
    #[arg(long)]
    pub h: Option<f64>,
    /// Emit CSV rows instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct ExpansionArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Switches to the critical-regime check at this σ.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    /// Energy gap reported as a tie.
    #[arg(long)]
    pub tie_tol: Option<f64>,
    /// Print σ̄ and r̄ as JSON instead of the sweep.
    #[arg(long)]
    pub critical: bool,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dt_safety: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the shape every K steps (multiples of the recording interval).
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    #[arg(long)]
    pub snapshot_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CenteredArgs {
    /// Inner radius r of the unit-mass annulus.
    #[arg(long)]
    pub inner: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub offsets: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long)]
    pub eps_d: Option<f64>,
    /// Debye screening parameter.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Far-field fit range lower end, in units of 1/κ.
    #[arg(long)]
    pub fit_min: Option<f64>,
    #[arg(long)]
    pub fit_max: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
}

/// Keys accepted in the `--config` file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub subcommand: Option<String>,
    pub shape: Option<ShapeKind>,
    pub radius: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub inner: Option<f64>,
    pub file: Option<PathBuf>,
    pub samples: Option<usize>,
    pub area: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub method: Option<MethodArg>,
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub csv: Option<bool>,
    pub lambdas: Option<Vec<f64>>,
    pub sigmas: Option<Vec<f64>>,
    pub tie_tol: Option<f64>,
    pub critical: Option<bool>,
    pub steps: Option<usize>,
    pub dt_safety: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub snapshot_dir: Option<PathBuf>,
    pub offsets: Option<Vec<f64>>,
    pub eps_d: Option<f64>,
    pub kappa: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    /// Fills every unset shape flag from the file.
    pub fn merge_shape(&self, s: &ShapeArgs) -> ShapeArgs {
        ShapeArgs {
            shape: s.shape.or(self.shape),
            radius: s.radius.or(self.radius),
            a: s.a.or(self.a),
            b: s.b.or(self.b),
            inner: s.inner.or(self.inner),
            file: s.file.clone().or_else(|| self.file.clone()),
            samples: s.samples.or(self.samples),
            area: s.area.or(self.area),
        }
    }
}
