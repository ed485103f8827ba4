//! Subcommand implementations. Each returns the full artifact text so that the
//! caller can write it in one atomic step.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use yil_core::energy::{self, DEFAULT_TOL};
use yil_core::limits::{self, DEFAULT_TIE_TOL};
use yil_core::physics;
use yil_core::raster::disk_covariogram_integral;
use yil_core::{
    flow, ClosedCurve, CriticalRow, CurveSystem, EnergyReport, Error, ExpansionRow, FlowOptions, FlowRecord,
    HoleScanPoint, MonolayerParams, PhaseRow, ScreeningParams, Vec2,
};

use crate::config::{
    CenteredArgs, Command, EnergyArgs, ExpansionArgs, FileConfig, FlowArgs, KernelArgs, MethodArg, PhaseArgs,
    ShapeArgs, ShapeKind, ValidateArgs,
};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    /// The artifact was produced but reports failed checks.
    Checks(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) | Failure::Checks(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
            Failure::Checks(_) => "one or more validation checks failed",
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string().replace('\n', " ");
        if e.is_validation() {
            Failure::Validation(msg)
        } else {
            Failure::Numerical(msg)
        }
    }
}

type Out = Result<String, Failure>;

fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Validation(msg.into()))
}

pub fn dispatch(cmd: &Command, cfg: &FileConfig) -> Out {
    match cmd {
        Command::Energy(a) => energy_cmd(a, cfg),
        Command::Expansion(a) => expansion_cmd(a, cfg),
        Command::Phase(a) => phase_cmd(a, cfg),
        Command::Flow(a) => flow_cmd(a, cfg),
        Command::Centered(a) => centered_cmd(a, cfg),
        Command::Kernels(a) => kernels_cmd(a, cfg),
        Command::Validate(a) => validate_cmd(a, cfg),
    }
}

struct ShapeDefaults {
    kind: ShapeKind,
    a: f64,
    b: f64,
    samples: usize,
    area: Option<f64>,
}

const ENERGY_SHAPE: ShapeDefaults = ShapeDefaults { kind: ShapeKind::Disk, a: 2.0, b: 1.0, samples: 64, area: None };

fn build_shape(s: &ShapeArgs, d: &ShapeDefaults) -> Result<CurveSystem, Failure> {
    let kind = s.shape.unwrap_or(d.kind);
    let reject = |name: &str, present: bool| -> Result<(), Failure> {
        if present {
            invalid(format!("--{name} does not apply to shape {kind:?}").to_lowercase())
        } else {
            Ok(())
        }
    };
    reject("radius", s.radius.is_some() && kind != ShapeKind::Disk)?;
    reject("a", s.a.is_some() && kind != ShapeKind::Ellipse)?;
    reject("b", s.b.is_some() && kind != ShapeKind::Ellipse)?;
    reject("inner", s.inner.is_some() && kind != ShapeKind::Annulus)?;
    reject("file", s.file.is_some() && kind != ShapeKind::File)?;
    reject("samples", s.samples.is_some() && kind == ShapeKind::File)?;
    let n = s.samples.unwrap_or(d.samples);
    let system = match kind {
        ShapeKind::Disk => CurveSystem::disk(Vec2::new(0.0, 0.0), s.radius.unwrap_or(1.0), n)?,
        ShapeKind::Ellipse => CurveSystem::single(ClosedCurve::ellipse(
            Vec2::new(0.0, 0.0),
            s.a.unwrap_or(d.a),
            s.b.unwrap_or(d.b),
            n,
        )?),
        ShapeKind::Annulus => CurveSystem::unit_mass_annulus(s.inner.unwrap_or(1.0), n, n)?,
        ShapeKind::File => match &s.file {
            Some(p) => CurveSystem::load(p).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?,
            None => return invalid("--shape file needs --file"),
        },
    };
    match s.area.or(d.area) {
        Some(area) => Ok(system.rescaled_to_area(area)?),
        None => Ok(system),
    }
}

fn screening(lambda: f64, alpha: Option<f64>, sigma: Option<f64>) -> Result<ScreeningParams, Failure> {
    match (alpha, sigma) {
        (Some(_), Some(_)) => invalid("give either --alpha or --sigma, not both"),
        (Some(a), None) => Ok(ScreeningParams::new(lambda, a)?),
        (None, Some(s)) => Ok(ScreeningParams::from_sigma(lambda, s)?),
        (None, None) => Ok(ScreeningParams::new(lambda, 1.0)?),
    }
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv<T>(header: &str, rows: &[T], row: impl Fn(&T) -> String) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(&row(r));
        s.push('\n');
    }
    s
}

/// Largest sensible default raster spacing for the bulk method.
fn default_spacing(system: &CurveSystem, params: &ScreeningParams) -> f64 {
    0.01f64.min(system.min_length() / 64.0).min(1.0 / (8.0 * params.rate()))
}

#[derive(Serialize)]
struct EnergyOutput {
    lambda: f64,
    alpha: f64,
    sigma: f64,
    reports: Vec<EnergyReport>,
}

fn energy_cmd(a: &EnergyArgs, cfg: &FileConfig) -> Out {
    let shape = build_shape(&cfg.merge_shape(&a.shape), &ENERGY_SHAPE)?;
    let lambda = a.lambda.or(cfg.lambda).unwrap_or(2.0);
    let params = screening(lambda, a.alpha.or(cfg.alpha), a.sigma.or(cfg.sigma))?;
    let tol = a.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL);
    let method = a.method.or(cfg.method).unwrap_or(MethodArg::Boundary);
    let h = a.h.or(cfg.h).unwrap_or_else(|| default_spacing(&shape, &params));

    let mut reports = Vec::new();
    if matches!(method, MethodArg::Bulk | MethodArg::Both | MethodArg::All) {
        reports.push(energy::energy_bulk(&shape, &params, h)?);
    }
    if matches!(method, MethodArg::Boundary | MethodArg::Both | MethodArg::All) {
        reports.push(energy::energy_boundary(&shape, &params, tol)?);
    }
    if matches!(method, MethodArg::Anisotropic | MethodArg::All) {
        reports.push(energy::energy_boundary_anisotropic(&shape, &params, tol)?);
    }
    if a.csv || cfg.csv.unwrap_or(false) {
        return Ok(csv(EnergyReport::CSV_HEADER, &reports, |r| r.csv_row(&params)));
    }
    let out = EnergyOutput { lambda: params.lambda(), alpha: params.alpha(), sigma: params.sigma(), reports };
    let mut s = serde_json::to_string_pretty(&out).map_err(|e| Failure::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn expansion_cmd(a: &ExpansionArgs, cfg: &FileConfig) -> Out {
    let shape = build_shape(&cfg.merge_shape(&a.shape), &ENERGY_SHAPE)?;
    let lambdas = a.lambdas.clone().or_else(|| cfg.lambdas.clone()).unwrap_or_else(|| vec![16.0, 32.0, 64.0]);
    let tol = a.tol.or(cfg.tol).unwrap_or(1e-9);
    let alpha = a.alpha.or(cfg.alpha);
    match a.sigma.or(cfg.sigma) {
        Some(sigma) => {
            if alpha.is_some() {
                return invalid("give either --alpha or --sigma, not both");
            }
            let rows = limits::critical_limit_check(&shape, sigma, &lambdas, tol)?;
            Ok(csv(CriticalRow::CSV_HEADER, &rows, CriticalRow::csv_row))
        }
        None => {
            let rows = limits::expansion_check(&shape, alpha.unwrap_or(1.0), &lambdas, tol)?;
            Ok(csv(ExpansionRow::CSV_HEADER, &rows, ExpansionRow::csv_row))
        }
    }
}

#[derive(Serialize)]
struct CriticalOutput {
    sigma_bar: f64,
    r_bar: f64,
    disk_energy: f64,
}

fn phase_cmd(a: &PhaseArgs, cfg: &FileConfig) -> Out {
    if a.critical || cfg.critical.unwrap_or(false) {
        let (sigma_bar, r_bar) = limits::critical_sigma()?;
        let out = CriticalOutput { sigma_bar, r_bar, disk_energy: limits::disk_energy(sigma_bar) };
        let mut s = serde_json::to_string_pretty(&out).map_err(|e| Failure::Numerical(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }
    let sigmas = a
        .sigmas
        .clone()
        .or_else(|| cfg.sigmas.clone())
        .unwrap_or_else(|| (1..=30).map(|i| 0.01 * i as f64).collect());
    let tie = a.tie_tol.or(cfg.tie_tol).unwrap_or(DEFAULT_TIE_TOL);
    let rows = limits::phase_diagram_with_tol(&sigmas, tie)?;
    Ok(csv(PhaseRow::CSV_HEADER, &rows, PhaseRow::csv_row))
}

fn flow_cmd(a: &FlowArgs, cfg: &FileConfig) -> Out {
    let defaults = ShapeDefaults { kind: ShapeKind::Ellipse, a: 1.2, b: 1.0 / 1.2, samples: 32, area: Some(PI) };
    let shape = build_shape(&cfg.merge_shape(&a.shape), &defaults)?;
    let lambda = a.lambda.or(cfg.lambda).unwrap_or(16.0);
    let alpha = a.alpha.or(cfg.alpha);
    let sigma = a.sigma.or(cfg.sigma).or(if alpha.is_none() { Some(1.0) } else { None });
    let params = screening(lambda, alpha, sigma)?;
    let opts = FlowOptions {
        steps: a.steps.or(cfg.steps).unwrap_or(6000),
        dt_safety: a.dt_safety.or(cfg.dt_safety).unwrap_or(0.1),
        tol: a.tol.or(cfg.tol).unwrap_or(FlowOptions::default().tol),
        residual_target: None,
    };
    let every = a.snapshot_every.or(cfg.snapshot_every);
    let dir: Option<PathBuf> = a.snapshot_dir.clone().or_else(|| cfg.snapshot_dir.clone());
    let snapshots = match (every, &dir) {
        (Some(0), _) => return invalid("--snapshot-every must be positive"),
        (Some(k), Some(d)) => {
            std::fs::create_dir_all(d).map_err(|e| Failure::Validation(format!("{}: {e}", d.display())))?;
            Some((k, d.clone()))
        }
        (Some(_), None) => return invalid("--snapshot-every needs --snapshot-dir"),
        (None, Some(_)) => return invalid("--snapshot-dir needs --snapshot-every"),
        (None, None) => None,
    };
    let mut write_err: Option<Failure> = None;
    let state = flow::flow_run_with(&shape, &params, &opts, |rec, sys| {
        let Some((k, d)) = &snapshots else { return };
        if rec.step % k != 0 || write_err.is_some() {
            return;
        }
        let path = d.join(format!("shape_{:07}.json", rec.step));
        let res = sys
            .to_json_string()
            .map_err(Failure::from)
            .and_then(|s| std::fs::write(&path, s).map_err(|e| Failure::Validation(format!("{}: {e}", path.display()))));
        if let Err(e) = res {
            write_err = Some(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    Ok(csv(FlowRecord::CSV_HEADER, &state.trace, FlowRecord::csv_row))
}

fn centered_cmd(a: &CenteredArgs, cfg: &FileConfig) -> Out {
    let r = a.inner.or(cfg.inner).unwrap_or(1.0);
    let lambda = a.lambda.or(cfg.lambda).unwrap_or(2.0);
    let alpha = a.alpha.or(cfg.alpha).unwrap_or(1.0);
    let offsets = a
        .offsets
        .clone()
        .or_else(|| cfg.offsets.clone())
        .unwrap_or_else(|| vec![0.0, 0.1, 0.2, 0.3, 0.4]);
    let h = a.h.or(cfg.h).unwrap_or(0.005);
    let rows = limits::centered_hole_scan(r, lambda, alpha, &offsets, h)?;
    Ok(csv(HoleScanPoint::CSV_HEADER, &rows, HoleScanPoint::csv_row))
}

fn kernels_cmd(a: &KernelArgs, cfg: &FileConfig) -> Out {
    let eps_d = a.eps_d.or(cfg.eps_d).unwrap_or(MonolayerParams::WATER_EPS);
    let kappa = a.kappa.or(cfg.kappa).unwrap_or(1.0);
    let p = MonolayerParams::reduced(eps_d, kappa)?;
    if kappa == 0.0 {
        return invalid("the interface kernels need kappa > 0");
    }
    let radii = a.radii.clone().or_else(|| cfg.radii.clone()).unwrap_or_else(|| {
        (0..=40).map(|i| 0.1 * 10f64.powf(3.0 * i as f64 / 40.0) / kappa).collect()
    });
    let lo = a.fit_min.or(cfg.fit_min).unwrap_or(10.0);
    let hi = a.fit_max.or(cfg.fit_max).unwrap_or(100.0);
    if !(lo > 0.0 && hi > lo) {
        return invalid("need 0 < fit_min < fit_max");
    }
    let rows = physics::kernel_comparison(&p, &radii)?;
    let slope = physics::farfield_slope(&p, (lo / kappa, hi / kappa))?;
    let crossover = physics::yukawa_crossover(&p, 0.1)?;
    eprintln!("far-field log-slope on kappa*r in [{lo}, {hi}]: {}", sci(slope));
    match crossover {
        Some(r) => eprintln!("Yukawa relative error first exceeds 10% at kappa*r = {}", sci(r * kappa)),
        None => eprintln!("Yukawa relative error stays below 10% on the scanned range"),
    }
    Ok(csv(physics::KernelRow::CSV_HEADER, &rows, physics::KernelRow::csv_row))
}

struct Check {
    name: &'static str,
    value: f64,
    expected: f64,
    tolerance: f64,
}

impl Check {
    fn abs_err(&self) -> f64 {
        (self.value - self.expected).abs()
    }

    fn pass(&self) -> bool {
        self.abs_err() <= self.tolerance
    }
}

/// Any failing check is a numerical failure (exit 3), reported after the CSV
/// has been written.
fn validate_report(a: &ValidateArgs, cfg: &FileConfig) -> Result<(String, bool), Failure> {
    let tol = a.tol.or(cfg.tol).unwrap_or(1e-9);
    let h = a.h.or(cfg.h).unwrap_or(0.01);
    let mut checks = Vec::new();

    for &(l, al) in &[(1.0, 1.0), (2.0, 0.5)] {
        let c = energy::halfplane_constant(l, al)?;
        checks.push(Check {
            name: if l == 1.0 { "halfplane_1_1" } else { "halfplane_2_0.5" },
            value: c * l * l * al * al,
            expected: -2.0,
            tolerance: 1e-8,
        });
    }

    let params = ScreeningParams::new(2.0, 1.0)?;
    let disk = CurveSystem::disk(Vec2::new(0.0, 0.0), 1.0, 64)?;
    let bulk = energy::energy_bulk(&disk, &params, h)?;
    let bnd = energy::energy_boundary(&disk, &params, tol)?;
    checks.push(Check {
        name: "disk_bulk_minus_boundary",
        value: bulk.total - bnd.total,
        expected: 0.0,
        tolerance: bulk.est_error + bnd.est_error,
    });
    let cross = 2.0 * PI / params.rate() * PI - disk_covariogram_integral(1.0, 2.0, 1.0)?;
    let exact = 2.0 * PI - 4.0 / (4.0 * PI) * cross;
    checks.push(Check { name: "disk_boundary_vs_covariogram", value: bnd.total, expected: exact, tolerance: 1e-4 * exact.abs() });

    let (sigma_bar, r_bar) = limits::critical_sigma()?;
    checks.push(Check { name: "critical_sigma", value: sigma_bar, expected: 0.112736, tolerance: 1e-4 });
    checks.push(Check { name: "critical_r", value: r_bar, expected: 3.66882, tolerance: 1e-3 });

    let mut s = String::from("check,value,expected,abs_err,tolerance,pass\n");
    for c in &checks {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.name,
            sci(c.value),
            sci(c.expected),
            sci(c.abs_err()),
            sci(c.tolerance),
            c.pass()
        );
    }
    Ok((s, checks.iter().all(Check::pass)))
}

fn validate_cmd(a: &ValidateArgs, cfg: &FileConfig) -> Out {
    let (s, ok) = validate_report(a, cfg)?;
    if ok {
        Ok(s)
    } else {
        Err(Failure::Checks(s))
    }
}
