//! Text lattice files: header `S4GRID nx ny x0 x1 y0 y1 px py`, then `nx * ny`
//! rows of five decimals, row-major with `y` outer.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::linalg5::RVec5;
use crate::numfmt::fmt_num;

/// Samples of `f` on a lattice, with the original text tokens kept for
/// pass-through export.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub path: String,
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
    pub samples: Vec<RVec5>,
    pub tokens: Vec<[String; 5]>,
}

impl GridData {
    /// Builds lattice data from samples (tokens are the formatted values).
    pub fn from_samples(path: impl Into<String>, grid: &Grid, samples: Vec<RVec5>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidSpec(format!(
                "{} samples for a {}x{} grid",
                samples.len(),
                grid.nx,
                grid.ny
            )));
        }
        let tokens = samples.iter().map(|v| std::array::from_fn(|k| fmt_num(v[k]))).collect();
        Ok(GridData {
            path: path.into(),
            nx: grid.nx,
            ny: grid.ny,
            domain: grid.domain,
            samples,
            tokens,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain, self.nx, self.ny)
    }

    /// Largest `| |f| - 1 |` over the samples and the node where it occurs.
    pub fn max_norm_deviation(&self) -> (f64, usize) {
        self.samples
            .iter()
            .enumerate()
            .map(|(k, v)| ((v.norm() - 1.0).abs(), k))
            .fold((0.0, 0), |acc, cur| if cur.0 > acc.0 { cur } else { acc })
    }

    pub fn to_text(&self) -> String {
        let d = &self.domain;
        let mut out = format!(
            "S4GRID {} {} {} {} {} {} {} {}\n",
            self.nx,
            self.ny,
            fmt_num(d.x_range.0),
            fmt_num(d.x_range.1),
            fmt_num(d.y_range.0),
            fmt_num(d.y_range.1),
            u8::from(d.periodic_x),
            u8::from(d.periodic_y)
        );
        for t in &self.tokens {
            let _ = writeln!(out, "{}", t.join(" "));
        }
        out
    }
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::GridFile {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses lattice text. Values are not required to lie on the sphere here;
/// that is checked when jets are formed.
pub fn parse_grid_text(path: &str, text: &str) -> Result<GridData> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 9 || fields[0] != "S4GRID" {
        return Err(parse_err(path, hline + 1, "expected `S4GRID nx ny x0 x1 y0 y1 px py`"));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(path, hline + 1, format!("bad integer `{s}`")))
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| parse_err(path, hline + 1, format!("bad number `{s}`")))
    };
    let flag = |s: &str| match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(parse_err(
            path,
            hline + 1,
            format!("periodic flag must be 0 or 1, got `{s}`"),
        )),
    };
    let (nx, ny) = (int(fields[1])?, int(fields[2])?);
    let domain = Domain::new(
        (num(fields[3])?, num(fields[4])?),
        (num(fields[5])?, num(fields[6])?),
        flag(fields[7])?,
        flag(fields[8])?,
    )
    .map_err(|e| parse_err(path, hline + 1, e.to_string()))?;
    let grid = Grid::new(domain, nx, ny).map_err(|e| parse_err(path, hline + 1, e.to_string()))?;
    let mut samples = Vec::with_capacity(grid.len());
    let mut tokens = Vec::with_capacity(grid.len());
    for (lno, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(parse_err(
                path,
                lno + 1,
                format!("expected 5 values, found {}", parts.len()),
            ));
        }
        let mut v = RVec5::zeros();
        for (k, p) in parts.iter().enumerate() {
            v[k] = p
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(path, lno + 1, format!("bad number `{p}`")))?;
        }
        if samples.len() == grid.len() {
            return Err(parse_err(
                path,
                lno + 1,
                format!("more than {} sample rows", grid.len()),
            ));
        }
        samples.push(v);
        tokens.push(std::array::from_fn(|k| parts[k].to_string()));
    }
    if samples.len() != grid.len() {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("expected {} sample rows, found {}", grid.len(), samples.len()),
        ));
    }
    Ok(GridData {
        path: path.to_string(),
        nx,
        ny,
        domain,
        samples,
        tokens,
    })
}

pub fn read_grid_file(path: &Path) -> Result<GridData> {
    let text = std::fs::read_to_string(path)?;
    parse_grid_text(&path.display().to_string(), &text)
}

pub fn write_grid_file(path: &Path, data: &GridData) -> Result<()> {
    std::fs::write(path, data.to_text())?;
    Ok(())
}
