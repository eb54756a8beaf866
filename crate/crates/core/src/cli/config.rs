//! Run configuration: a section-based `key = value` document.
//!
//! ```text
//! # comment
//! [immersion]
//! kind = moebius
//! inner = clifford_torus
//! center = 0.3, 0, 0, 0, 0
//! [grid]
//! nx = 64
//! ny = 64
//! ```
//!
//! Several `key=value` pairs and section headers may share a line, so the
//! one-line form `[immersion] kind=clifford_torus [grid] nx=64 ny=64` is
//! accepted too. Values may be quoted to contain spaces or `#`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::grid::Grid;
use crate::immersion::{read_grid_file, DerivativeMode, FdStep, ImmersionSpec, SurfaceKind, DEFAULT_RELATIVE_STEP};
use crate::linalg5::RVec5;
use crate::loop_family::{default_lambdas, PathConfig};

/// A configuration problem, with the 1-based line it was found on (0 when
/// the problem is not tied to one line).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// Thresholds of the `verify` suite. `None` means "derive from the grid".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structure: Option<f64>,
    pub frame: Option<f64>,
    pub flatness: Option<f64>,
    pub special: f64,
    pub verdict: Option<f64>,
    pub energy: Option<f64>,
    pub gauge: f64,
    pub on_sphere: f64,
    pub orthogonality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: None,
            frame: None,
            flatness: None,
            special: 1e-8,
            verdict: None,
            energy: None,
            gauge: 1e-10,
            on_sphere: crate::immersion::OFF_SPHERE_TOLERANCE,
            orthogonality: crate::frames::ORTHOGONALITY_TOLERANCE,
        }
    }
}

/// Output toggles.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub fields: bool,
    pub mesh: bool,
    pub obj: bool,
    /// Ambient coordinates shown by the OBJ companion.
    pub obj_axes: [usize; 3],
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            fields: true,
            mesh: true,
            obj: true,
            obj_axes: [0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ImmersionSpec,
    pub nx: usize,
    pub ny: usize,
    pub lambdas: Vec<Complex64>,
    pub path: PathConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl RunConfig {
    /// The analysis grid: `nx x ny` on the spec domain, or the file lattice.
    pub fn grid(&self) -> crate::Result<Grid> {
        if self.spec.kind.is_sampled() {
            self.spec.grid(self.nx)
        } else {
            Grid::new(self.spec.domain(), self.nx, self.ny)
        }
    }

    /// `--n` override: a square grid.
    pub fn set_grid_size(&mut self, n: usize) -> Result<(), ConfigError> {
        if n < crate::grid::MIN_NODES {
            return Err(err(0, format!("grid size {n} is below {}", crate::grid::MIN_NODES)));
        }
        self.nx = n;
        self.ny = n;
        Ok(())
    }
}

/// Splits a line into tokens: whitespace separated, `"..."` or `'...'` kept
/// whole (quotes removed), `#` outside quotes starts a comment.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<String>, ConfigError> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut has_token = false;
    for ch in line.chars() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => cur.push(ch),
            None => match ch {
                '#' => break,
                '"' | '\'' => {
                    quote = Some(ch);
                    has_token = true;
                }
                c if c.is_whitespace() => {
                    if has_token {
                        tokens.push(std::mem::take(&mut cur));
                        has_token = false;
                    }
                }
                '=' => {
                    // make `=` its own token so `k = v`, `k=v` and `k= v` agree
                    if has_token {
                        tokens.push(std::mem::take(&mut cur));
                        has_token = false;
                    }
                    tokens.push("=".to_string());
                }
                c => {
                    cur.push(c);
                    has_token = true;
                }
            },
        }
    }
    if quote.is_some() {
        return Err(err(lineno, "unterminated quote"));
    }
    if has_token {
        tokens.push(cur);
    }
    Ok(tokens)
}

/// One `key = value` entry.
#[derive(Debug, Clone)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

fn entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let tokens = tokenize(raw, lineno)?;
        let mut t = 0;
        while t < tokens.len() {
            let tok = &tokens[t];
            if tok.starts_with('[') {
                if !tok.ends_with(']') || tok.len() < 3 {
                    return Err(err(lineno, format!("malformed section header `{tok}`")));
                }
                section = tok[1..tok.len() - 1].trim().to_string();
                if !SECTIONS.contains(&section.as_str()) {
                    return Err(err(lineno, format!("unknown section [{section}]")));
                }
                t += 1;
                continue;
            }
            if tok == "=" {
                return Err(err(lineno, "`=` without a key"));
            }
            if tokens.get(t + 1).map(String::as_str) != Some("=") {
                return Err(err(lineno, format!("expected `{tok} = <value>`")));
            }
            // a value is everything up to the next `key =` or section header;
            // `theta=<rad>` inside a lambda list stays part of the value
            let mut value = Vec::new();
            let mut v = t + 2;
            while v < tokens.len() {
                let next_is_key = tokens.get(v + 1).map(String::as_str) == Some("=") && !is_value_word(&tokens[v]);
                if tokens[v].starts_with('[') || next_is_key {
                    break;
                }
                value.push(tokens[v].as_str());
                v += 1;
            }
            if value.is_empty() {
                return Err(err(lineno, format!("missing value for `{tok}`")));
            }
            if section.is_empty() {
                return Err(err(lineno, format!("`{tok}` appears before any [section]")));
            }
            out.push(Entry {
                section: section.clone(),
                key: tok.clone(),
                value: value
                    .join(" ")
                    .replace(" = ", "=")
                    .replace(" =", "=")
                    .replace("= ", "="),
                line: lineno,
            });
            t = v;
        }
    }
    Ok(out)
}

/// Words that can precede `=` inside a value rather than start a new entry.
fn is_value_word(tok: &str) -> bool {
    tok == "theta" || tok.ends_with(",theta")
}

const SECTIONS: [&str; 5] = ["immersion", "grid", "family", "tolerances", "output"];

fn allowed(section: &str) -> &'static [&'static str] {
    match section {
        "immersion" => &[
            "kind",
            "inner",
            "center",
            "a",
            "b",
            "radius",
            "path",
            "derivative_mode",
            "h",
        ],
        "grid" => &["nx", "ny"],
        "family" => &["lambdas", "substeps", "retract_every", "basepoint"],
        "tolerances" => &[
            "structure",
            "frame",
            "flatness",
            "special",
            "verdict",
            "energy",
            "gauge",
            "on_sphere",
            "orthogonality",
        ],
        "output" => &["dir", "fields", "mesh", "obj", "obj_axes"],
        _ => &[],
    }
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    e.value
        .parse::<f64>()
        .map_err(|_| err(e.line, format!("`{}` is not a number: {}", e.key, e.value)))
}

fn parse_positive(e: &Entry) -> Result<f64, ConfigError> {
    let v = parse_f64(e)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(err(e.line, format!("`{}` must be positive, got {}", e.key, e.value)));
    }
    Ok(v)
}

fn parse_count(e: &Entry, min: usize) -> Result<usize, ConfigError> {
    let v = e.value.parse::<usize>().map_err(|_| {
        err(
            e.line,
            format!("`{}` is not a non-negative integer: {}", e.key, e.value),
        )
    })?;
    if v < min {
        return Err(err(e.line, format!("`{}` must be at least {min}, got {v}", e.key)));
    }
    Ok(v)
}

fn parse_bool(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        v => Err(err(e.line, format!("`{}` is not a boolean: {v}", e.key))),
    }
}

fn parse_list(e: &Entry) -> Vec<String> {
    e.value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses `1`, `-0.5`, `i`, `-i`, `2.5i`, `0.6+0.8i`, `0.6-0.8i`, `1e-3-2e-1i`, `theta=<rad>`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if let Some(t) = s.strip_prefix("theta=") {
        return t.trim().parse::<f64>().ok().map(|th| Complex64::from_polar(1.0, th));
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // find the sign that separates real and imaginary parts (not an exponent sign)
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse::<f64>().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

/// Parses a lambda list (`,` or whitespace separated).
pub fn parse_lambdas(s: &str) -> Result<Vec<Complex64>, String> {
    let items: Vec<&str> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err("empty lambda list".into());
    }
    items
        .into_iter()
        .map(|t| {
            let l = parse_complex(t).ok_or_else(|| format!("cannot read `{t}` as a complex number"))?;
            if (l.norm() - 1.0).abs() > crate::loop_family::LAMBDA_TOLERANCE {
                return Err(format!(
                    "lambda {t} is not on the unit circle (|lambda| = {})",
                    l.norm()
                ));
            }
            Ok(l)
        })
        .collect()
}

#[derive(Default)]
struct ImmersionKeys {
    kind: Option<(String, usize)>,
    inner: Option<String>,
    center: Option<RVec5>,
    a: Option<f64>,
    b: Option<f64>,
    radius: Option<f64>,
    path: Option<String>,
    mode: Option<(String, usize)>,
    h: Option<f64>,
}

fn catalog_kind(name: &str, k: &ImmersionKeys, line: usize, base: &Path) -> Result<SurfaceKind, ConfigError> {
    match name {
        "equatorial_sphere" => Ok(SurfaceKind::EquatorialSphere {
            radius: k.radius.unwrap_or(0.5),
        }),
        "clifford_torus" => Ok(SurfaceKind::CliffordTorus),
        "pmc_torus" => Ok(SurfaceKind::PmcTorus {
            a: k.a.unwrap_or(0.75f64.sqrt()),
            b: k.b.unwrap_or(0.5),
        }),
        "grid_file" => {
            let p = k.path.as_ref().ok_or_else(|| err(line, "grid_file needs `path`"))?;
            let p = base.join(p);
            let data = read_grid_file(&p).map_err(|e| err(line, e.to_string()))?;
            Ok(SurfaceKind::GridFile(data))
        }
        other => Err(err(line, format!("unknown immersion kind `{other}`"))),
    }
}

/// Parses a configuration. Relative grid-file paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut imm = ImmersionKeys::default();
    let mut nx = 64;
    let mut ny = 64;
    let mut lambdas = default_lambdas();
    let mut path = PathConfig::default();
    let mut basepoint_line = 0;
    let mut tol = Tolerances::default();
    let mut output = OutputConfig::default();
    let mut seen: Vec<(String, String)> = Vec::new();

    for e in entries(text)? {
        if !allowed(&e.section).contains(&e.key.as_str()) {
            return Err(err(e.line, format!("unknown key `{}` in [{}]", e.key, e.section)));
        }
        let id = (e.section.clone(), e.key.clone());
        if seen.contains(&id) {
            return Err(err(e.line, format!("duplicate key `{}` in [{}]", e.key, e.section)));
        }
        seen.push(id);
        match (e.section.as_str(), e.key.as_str()) {
            ("immersion", "kind") => imm.kind = Some((e.value.clone(), e.line)),
            ("immersion", "inner") => imm.inner = Some(e.value.clone()),
            ("immersion", "center") => {
                let parts = parse_list(&e);
                let vals: Vec<f64> = parts
                    .iter()
                    .map(|p| p.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err(e.line, format!("`center` must be five numbers, got {}", e.value)))?;
                if vals.len() != 5 {
                    return Err(err(
                        e.line,
                        format!("`center` must be five numbers, got {}", vals.len()),
                    ));
                }
                imm.center = Some(RVec5::from_column_slice(&vals));
            }
            ("immersion", "a") => imm.a = Some(parse_positive(&e)?),
            ("immersion", "b") => imm.b = Some(parse_positive(&e)?),
            ("immersion", "radius") => imm.radius = Some(parse_positive(&e)?),
            ("immersion", "path") => imm.path = Some(e.value.clone()),
            ("immersion", "derivative_mode") => imm.mode = Some((e.value.clone(), e.line)),
            ("immersion", "h") => imm.h = Some(parse_positive(&e)?),
            ("grid", "nx") => nx = parse_count(&e, crate::grid::MIN_NODES)?,
            ("grid", "ny") => ny = parse_count(&e, crate::grid::MIN_NODES)?,
            ("family", "lambdas") => lambdas = parse_lambdas(&e.value).map_err(|m| err(e.line, m))?,
            ("family", "substeps") => path.substeps = parse_count(&e, 1)?,
            ("family", "retract_every") => path.retract_every = parse_count(&e, 0)?,
            ("family", "basepoint") => {
                let parts = parse_list(&e);
                let ij: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err(e.line, format!("`basepoint` must be two node indices, got {}", e.value)))?;
                if ij.len() != 2 {
                    return Err(err(e.line, "`basepoint` must be two node indices `i, j`"));
                }
                path.basepoint = (ij[0], ij[1]);
                basepoint_line = e.line;
            }
            ("tolerances", key) => {
                let v = parse_positive(&e)?;
                match key {
                    "structure" => tol.structure = Some(v),
                    "frame" => tol.frame = Some(v),
                    "flatness" => tol.flatness = Some(v),
                    "special" => tol.special = v,
                    "verdict" => tol.verdict = Some(v),
                    "energy" => tol.energy = Some(v),
                    "gauge" => tol.gauge = v,
                    "on_sphere" => tol.on_sphere = v,
                    _ => tol.orthogonality = v,
                }
            }
            ("output", "dir") => output.dir = PathBuf::from(&e.value),
            ("output", "fields") => output.fields = parse_bool(&e)?,
            ("output", "mesh") => output.mesh = parse_bool(&e)?,
            ("output", "obj") => output.obj = parse_bool(&e)?,
            ("output", "obj_axes") => {
                let parts = parse_list(&e);
                let axes: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| {
                        err(
                            e.line,
                            format!("`obj_axes` must be three indices in 0..5, got {}", e.value),
                        )
                    })?;
                if axes.len() != 3 || axes.iter().any(|&a| a > 4) {
                    return Err(err(e.line, "`obj_axes` must be three indices in 0..5"));
                }
                output.obj_axes = [axes[0], axes[1], axes[2]];
            }
            _ => unreachable!("keys are checked against the allowed list"),
        }
    }

    let (kind_name, kind_line) = imm.kind.clone().ok_or_else(|| err(0, "[immersion] needs `kind`"))?;
    let kind = match kind_name.as_str() {
        "moebius" => {
            let inner = imm.inner.clone().unwrap_or_else(|| "clifford_torus".to_string());
            if inner == "moebius" {
                return Err(err(kind_line, "nested Möbius kinds are not supported in configs"));
            }
            SurfaceKind::Moebius {
                inner: Box::new(catalog_kind(&inner, &imm, kind_line, base)?),
                center: imm.center.ok_or_else(|| err(kind_line, "moebius needs `center`"))?,
            }
        }
        name => catalog_kind(name, &imm, kind_line, base)?,
    };
    let sampled = kind.is_sampled();
    let mode = match imm.mode.as_ref().map(|(m, l)| (m.as_str(), *l)) {
        None if sampled => DerivativeMode::FiniteDifference(FdStep::GridSpacing),
        None | Some(("analytic", _)) => DerivativeMode::Analytic,
        Some(("fd_relative", _)) => {
            DerivativeMode::FiniteDifference(FdStep::Relative(imm.h.unwrap_or(DEFAULT_RELATIVE_STEP)))
        }
        Some(("fd_absolute", l)) => {
            DerivativeMode::FiniteDifference(FdStep::Absolute(imm.h.ok_or_else(|| err(l, "fd_absolute needs `h`"))?))
        }
        Some(("fd_grid", _)) => DerivativeMode::FiniteDifference(FdStep::GridSpacing),
        Some((m, l)) => {
            return Err(err(
                l,
                format!("unknown derivative_mode `{m}` (analytic, fd_relative, fd_absolute, fd_grid)"),
            ))
        }
    };
    let spec = ImmersionSpec::new(kind, mode).map_err(|e| err(kind_line, e.to_string()))?;
    let cfg = RunConfig {
        spec,
        nx,
        ny,
        lambdas,
        path,
        tolerances: tol,
        output,
    };
    let grid = cfg.grid().map_err(|e| err(kind_line, e.to_string()))?;
    cfg.path
        .validate(&grid)
        .map_err(|e| err(basepoint_line, e.to_string()))?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}
