//! Command dispatch and the exit-code contract: 0 success (or verify
//! passed), 1 failed check or runtime error, 2 configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::cli::config::{load_config, parse_lambdas, ConfigError, RunConfig};
use crate::cli::export::{fields_csv, mesh_text, obj_text, tension_csv, write};
use crate::cli::report::{rejected_input, verify_analysis};
use crate::grid::ResidualStats;
use crate::immersion::{catalog_entries, classify_isotropy, isotropy_indicator, IsotropyClass, SurfaceKind};
use crate::linalg5::RVec5;
use crate::loop_family::{zcc_residual, LoopSample};
use crate::numfmt::fmt_num;
use crate::pipeline::Analysis;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const FAMILY_HEADER: &str = "lambda_re,lambda_im,zcc,orthogonality,sphere_deviation,conformality,u_dev,h1_dev,h2_dev,norm_h_dev,xi1_dev,xi2_dev,sigma_dev,K_dev,Kperp_dev,monodromy_x,monodromy_y,identity_gap";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Tension,
    Family,
    Energy,
    Verify,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Tension => "tension",
            Command::Family => "family",
            Command::Energy => "energy",
            Command::Verify => "verify",
            Command::Catalog => "catalog",
        }
    }
}

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub lambdas: Option<String>,
    pub n: Option<usize>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Human-readable summary for stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] crate::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

/// Loads the configuration, applies the overrides and runs `cmd`.
pub fn run_command(cmd: Command, config: Option<&Path>, overrides: &Overrides) -> Result<Outcome, RunError> {
    if cmd == Command::Catalog {
        return Ok(catalog());
    }
    let path = config.ok_or_else(|| ConfigError {
        line: 0,
        message: format!("`{}` needs --config", cmd.name()),
    })?;
    let mut cfg = load_config(path)?;
    apply_overrides(&mut cfg, overrides)?;
    execute(cmd, &cfg)
}

pub fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) -> Result<(), ConfigError> {
    if let Some(dir) = &o.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(list) = &o.lambdas {
        cfg.lambdas = parse_lambdas(list).map_err(|message| ConfigError { line: 0, message })?;
    }
    if let Some(n) = o.n {
        cfg.set_grid_size(n)?;
    }
    let grid = cfg.grid().map_err(|e| ConfigError {
        line: 0,
        message: e.to_string(),
    })?;
    cfg.path.validate(&grid).map_err(|e| ConfigError {
        line: 0,
        message: e.to_string(),
    })
}

/// Runs `cmd` on a parsed configuration.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cmd {
        Command::Catalog => Ok(catalog()),
        Command::Verify => verify(cfg),
        _ => {
            let a = Analysis::on_grid(cfg.spec.clone(), cfg.grid()?)?;
            let mut w = Writer::new(cfg);
            let summary = match cmd {
                Command::Analyze => analyze(&a, cfg, &mut w)?,
                Command::Tension => tension(&a, cfg, &mut w)?,
                Command::Family => family(&a, cfg, &mut w)?,
                Command::Energy => energy(&a, &mut w)?,
                Command::Verify | Command::Catalog => unreachable!(),
            };
            Ok(w.finish(EXIT_OK, summary))
        }
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(cfg: &RunConfig) -> Self {
        Writer {
            dir: cfg.output.dir.clone(),
            files: Vec::new(),
        }
    }

    fn put(&mut self, name: &str, text: &str) -> crate::Result<()> {
        let path = self.dir.join(name);
        write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, exit_code: i32, mut summary: String) -> Outcome {
        for f in &self.files {
            let _ = writeln!(summary, "wrote {}", f.display());
        }
        Outcome {
            exit_code,
            summary,
            files: self.files,
        }
    }
}

fn header(a: &Analysis) -> String {
    format!(
        "immersion: {}\ngrid: {} x {}\nmode: {:?}\n",
        a.spec.kind.id(),
        a.grid.nx,
        a.grid.ny,
        a.spec.mode
    )
}

/// Isotropic when `xi1^2 + xi2^2` vanishes relative to the Hopf scale.
pub fn isotropy(a: &Analysis) -> IsotropyClass {
    let ind: Vec<Complex64> = a
        .jets
        .iter()
        .enumerate()
        .map(|(k, j)| isotropy_indicator(j, &a.normals.n1[k], &a.normals.n2[k]))
        .collect();
    let scale = a.fields.data.iter().map(|d| d.hopf_sq()).fold(1.0, f64::max);
    classify_isotropy(&ind, 1e-8 * scale)
}

fn write_mesh(
    w: &mut Writer,
    cfg: &RunConfig,
    stem: &str,
    grid: &crate::grid::Grid,
    f: &[RVec5],
    tokens: Option<&[[String; 5]]>,
) -> crate::Result<()> {
    if cfg.output.mesh {
        w.put(&format!("{stem}.s4mesh"), &mesh_text(grid, f, tokens))?;
    }
    if cfg.output.obj {
        w.put(&format!("{stem}.obj"), &obj_text(grid, f, cfg.output.obj_axes))?;
    }
    Ok(())
}

fn analyze(a: &Analysis, cfg: &RunConfig, w: &mut Writer) -> crate::Result<String> {
    if cfg.output.fields {
        w.put("fields.csv", &fields_csv(a))?;
    }
    let f: Vec<RVec5> = a.jets.iter().map(|j| j.f).collect();
    let tokens = match &a.spec.kind {
        SurfaceKind::GridFile(d) => Some(d.tokens.as_slice()),
        _ => None,
    };
    write_mesh(w, cfg, "mesh", &a.grid, &f, tokens)?;
    let mut s = header(a);
    let _ = writeln!(s, "class: {}", isotropy(a));
    for (name, st) in a.residuals.stats(&a.grid) {
        let _ = writeln!(s, "{name}: max {} rms {}", fmt_num(st.max), fmt_num(st.rms));
    }
    Ok(s)
}

fn verdict_text(a: &Analysis, cfg: &RunConfig) -> (String, String) {
    let v = a.verdict(cfg.tolerances.verdict);
    let rows = [
        ("verdict", v.label().to_string()),
        ("class", isotropy(a).to_string()),
        ("tolerance", fmt_num(v.tolerance)),
        ("max_M", fmt_num(v.max_m)),
        ("max_gradH", fmt_num(v.max_grad_h)),
        ("route_gap", fmt_num(v.route_gap)),
        ("sparsity", fmt_num(v.sparsity)),
        ("realness", fmt_num(v.realness.iter().cloned().fold(0.0, f64::max))),
    ];
    let text: String = rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    (text, v.label().to_string())
}

fn tension(a: &Analysis, cfg: &RunConfig, w: &mut Writer) -> crate::Result<String> {
    let data = a.tension();
    w.put("tension.csv", &tension_csv(&a.grid, &data, &a.special_property()))?;
    let (text, _) = verdict_text(a, cfg);
    w.put("verdict.txt", &text)?;
    Ok(header(a) + &text)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn family_row(s: &LoopSample, zcc: f64) -> String {
    let d = &s.diagnostics;
    let cols = [
        fmt_num(s.lambda.re),
        fmt_num(s.lambda.im),
        fmt_num(zcc),
        fmt_num(d.orthogonality),
        fmt_num(d.sphere_deviation),
        fmt_num(d.conformality),
        fmt_num(d.max_u_dev),
        fmt_num(d.max_h_dev[0]),
        fmt_num(d.max_h_dev[1]),
        fmt_num(d.max_norm_h_dev),
        fmt_num(d.max_xi_dev[0]),
        fmt_num(d.max_xi_dev[1]),
        fmt_num(d.max_sigma_dev),
        fmt_num(d.max_k_dev),
        fmt_num(d.max_kperp_dev),
        opt(d.monodromy_x),
        opt(d.monodromy_y),
        opt(d.identity_gap),
    ];
    cols.join(",")
}

fn family(a: &Analysis, cfg: &RunConfig, w: &mut Writer) -> crate::Result<String> {
    let samples = a.family(&cfg.lambdas, &cfg.path)?;
    let mut csv = String::from(FAMILY_HEADER);
    csv.push('\n');
    let mut s = header(a);
    for (k, sample) in samples.iter().enumerate() {
        let zcc = ResidualStats::interior(&a.grid, &zcc_residual(&a.grid, &a.mc, sample.lambda)?).max;
        let _ = writeln!(csv, "{}", family_row(sample, zcc));
        let _ = writeln!(
            s,
            "lambda {}{:+}i: zcc {} monodromy x {} y {}",
            fmt_num(sample.lambda.re),
            sample.lambda.im,
            fmt_num(zcc),
            opt(sample.diagnostics.monodromy_x),
            opt(sample.diagnostics.monodromy_y)
        );
        write_mesh(
            w,
            cfg,
            &format!("family_{k:03}"),
            &sample.lattice,
            &sample.immersion(),
            None,
        )?;
    }
    w.put("family.csv", &csv)?;
    Ok(s)
}

fn energy(a: &Analysis, w: &mut Writer) -> crate::Result<String> {
    let text: String = a
        .energy()
        .entries()
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    w.put("energy.txt", &text)?;
    Ok(header(a) + &text)
}

fn verify(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut w = Writer::new(cfg);
    let built = cfg.grid().and_then(|g| Analysis::on_grid(cfg.spec.clone(), g));
    let (report, summary) = match built {
        Ok(a) => {
            let report = verify_analysis(&a, &cfg.tolerances)?;
            if cfg.output.fields {
                w.put("fields.csv", &fields_csv(&a))?;
            }
            (report, header(&a))
        }
        Err(e) => match rejected_input(&cfg.spec.kind, &e, &cfg.tolerances) {
            Some(r) => (r, format!("immersion: {}\nrejected: {e}\n", cfg.spec.kind.id())),
            None => return Err(e.into()),
        },
    };
    w.put("verify.csv", &report.to_csv())?;
    let mut s = summary;
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{} {}: max {} (threshold {})",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            fmt_num(c.max),
            fmt_num(c.threshold)
        );
    }
    let passed = report.passed();
    let _ = writeln!(s, "verify: {}", if passed { "PASS" } else { "FAIL" });
    Ok(w.finish(if passed { EXIT_OK } else { EXIT_FAILURE }, s))
}

/// Built-in surfaces with their closed-form values.
pub fn catalog() -> Outcome {
    let mut s = String::new();
    for e in catalog_entries() {
        let _ = writeln!(s, "{}\n  parameters: {}\n  {}", e.id, e.parameters, e.description);
        for (k, v) in &e.expected {
            let _ = writeln!(s, "  {k} = {}", fmt_num(*v));
        }
    }
    Outcome {
        exit_code: EXIT_OK,
        summary: s,
        files: Vec::new(),
    }
}
