//! File formats: pattern CSV, covariate rasters and path reports.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::lasso::PenaltyPath;
use crate::model::{CovariateField, Layout};
use crate::pattern::{MultiTypePattern, Point, Window};

fn csv_err(e: csv::Error) -> Error {
    Error::parse("pattern csv", e.to_string())
}

/// Reads `x,y,type` rows. Two optional leading comment lines are understood:
/// `# window: x_min x_max y_min y_max` and `# types: a,b,...` (label order, which
/// also keeps empty types). Without them the window is `window` (or the bounding
/// box) and types are 1-based integers, or string labels in order of first appearance.
pub fn read_pattern_csv<R: Read>(input: R, window: Option<Window<f64>>) -> Result<MultiTypePattern<f64>> {
    let mut text = String::new();
    std::io::BufReader::new(input).read_to_string(&mut text)?;
    let mut declared_window = None;
    let mut declared_types: Option<Vec<String>> = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("window:") {
            let nums: Vec<f64> = v
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::parse("pattern csv window", e.to_string())))
                .collect::<Result<_>>()?;
            if nums.len() != 4 {
                return Err(Error::parse("pattern csv window", "expected x_min x_max y_min y_max"));
            }
            declared_window = Some(Window::new(nums[0], nums[1], nums[2], nums[3])?);
        } else if let Some(v) = body.strip_prefix("types:") {
            declared_types = Some(v.split(',').map(|s| s.trim().to_string()).collect());
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse("pattern csv", format!("missing column '{name}'")))
    };
    let (cx, cy, ct) = (col("x")?, col("y")?, col("type")?);
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |c: usize| {
            rec.get(c)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("pattern csv row {}", line + 1), e.to_string()))
        };
        rows.push((num(cx)?, num(cy)?, rec.get(ct).unwrap_or("").to_string()));
    }
    let labels: Vec<String> = match declared_types {
        Some(l) => l,
        None if !rows.is_empty() && rows.iter().all(|r| r.2.parse::<usize>().is_ok_and(|v| v >= 1)) => {
            let p = rows.iter().map(|r| r.2.parse::<usize>().expect("checked")).max().expect("non-empty");
            (1..=p).map(|i| i.to_string()).collect()
        }
        None => {
            let mut seen: Vec<String> = Vec::new();
            for r in &rows {
                if !seen.contains(&r.2) {
                    seen.push(r.2.clone());
                }
            }
            seen
        }
    };
    let index: std::collections::HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let points = rows
        .iter()
        .map(|(x, y, t)| {
            index
                .get(t.as_str())
                .map(|&ty| Point::new(*x, *y, ty))
                .ok_or_else(|| Error::parse("pattern csv", format!("type '{t}' is not declared")))
        })
        .collect::<Result<Vec<_>>>()?;
    let window = match declared_window.or(window) {
        Some(w) => w,
        None => {
            let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for p in &points {
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
            Window::new(x0, x1, y0, y1)?
        }
    };
    MultiTypePattern::with_labels(window, points, labels)
}

/// Writes a pattern with its window and label order, so reading it back is exact.
pub fn write_pattern_csv<W: Write>(pattern: &MultiTypePattern<f64>, mut out: W) -> Result<()> {
    let w = pattern.window();
    writeln!(out, "# window: {} {} {} {}", w.x_min, w.x_max, w.y_min, w.y_max)?;
    writeln!(out, "# types: {}", pattern.labels().join(","))?;
    writeln!(out, "x,y,type")?;
    for p in pattern.points() {
        writeln!(out, "{},{},{}", p.x, p.y, pattern.labels()[p.ty])?;
    }
    Ok(())
}

/// Raster text: header `nx ny x0 y0 dx dy`, then `nx·ny` values, rows along `y`.
pub fn read_raster<R: Read>(input: R) -> Result<CovariateField<f64>> {
    let mut tokens = Vec::new();
    for line in std::io::BufReader::new(input).lines() {
        let line = line?;
        tokens.extend(line.split_whitespace().map(str::to_string));
    }
    let bad = |m: String| Error::parse("raster", m);
    if tokens.len() < 6 {
        return Err(bad("header needs nx ny x0 y0 dx dy".into()));
    }
    let nx: usize = tokens[0].parse().map_err(|e| bad(format!("nx: {e}")))?;
    let ny: usize = tokens[1].parse().map_err(|e| bad(format!("ny: {e}")))?;
    let head: Vec<f64> = tokens[2..6]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|e| bad(format!("header: {e}"))))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = tokens[6..]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|e| bad(format!("value '{t}': {e}"))))
        .collect::<Result<_>>()?;
    CovariateField::new(head[0], head[1], head[2], head[3], nx, ny, values)
}

pub fn write_raster<W: Write>(field: &CovariateField<f64>, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {} {} {} {}", field.nx, field.ny, field.x0, field.y0, field.dx, field.dy)?;
    for row in field.values.chunks(field.nx) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Path report: `gamma,objective,loglik,df,aic,converged,kkt,active` with the active
/// penalised groups joined by `;`.
pub fn write_path_csv<W: Write>(path: &PenaltyPath<f64>, layout: &Layout, labels: &[String], mut out: W) -> Result<()> {
    writeln!(out, "gamma,objective,loglik,df,aic,converged,kkt,active")?;
    for pt in &path.points {
        let active: Vec<String> = layout
            .groups()
            .iter()
            .zip(&pt.fit.active)
            .filter(|(g, &a)| g.penalized && a)
            .map(|(g, _)| g.name(labels))
            .collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            pt.fit.gamma,
            pt.fit.objective,
            pt.fit.loglik,
            pt.df,
            pt.aic,
            pt.fit.converged,
            pt.fit.kkt,
            active.join(";")
        )?;
    }
    Ok(())
}
