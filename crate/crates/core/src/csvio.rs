//! Plain CSV forms of crowd measures.
//!
//! ```text
//! atomic:  x1[,x2,...]            one row per agent
//! bumps:   r,profile,m_f / values / x1[,x2,...] / centers
//! grid:    L,M / values / rho / one average per row
//! cloud:   w,x1[,x2,...]          one row per point
//! ```
//! Lines starting with `#` are comments.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::measure::{make_bumps, AtomicMeasure, BumpProfile, CrowdMeasure, GridDensity1D, WeightedCloud};
use crate::space::Points;

fn coord_header(dim: usize) -> String {
    (1..=dim).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}

fn write_rows<W: Write>(out: &mut W, p: &Points, prefix: Option<&[f64]>) -> Result<()> {
    for (i, row) in p.iter().enumerate() {
        let mut line = String::new();
        if let Some(w) = prefix {
            line.push_str(&format!("{}", w[i]));
            line.push(',');
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        line.push_str(&cells.join(","));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_comments<W: Write>(out: &mut W, comments: &[String]) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    Ok(())
}

pub fn write_measure<W: Write>(out: &mut W, m: &CrowdMeasure, comments: &[String]) -> Result<()> {
    write_comments(out, comments)?;
    match m {
        CrowdMeasure::Atomic(a) => {
            writeln!(out, "{}", coord_header(a.dim()))?;
            write_rows(out, &a.points, None)?;
        }
        CrowdMeasure::Bumps(b) => {
            writeln!(out, "r,profile,m_f")?;
            writeln!(out, "{},{},{}", b.radius, b.profile.name(), b.first_moment())?;
            writeln!(out, "{}", coord_header(b.dim()))?;
            write_rows(out, &b.centers, None)?;
        }
        CrowdMeasure::Grid(g) => {
            writeln!(out, "L,M")?;
            writeln!(out, "{},{}", g.length, g.cells())?;
            writeln!(out, "rho")?;
            for v in &g.values {
                writeln!(out, "{v}")?;
            }
        }
        CrowdMeasure::Cloud(c) => {
            writeln!(out, "w,{}", coord_header(c.dim()))?;
            write_rows(out, &c.points, Some(&c.weights))?;
        }
    }
    Ok(())
}

fn numbers(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {lineno}: `{}` is not a number", s.trim())))
        })
        .collect()
}

fn rows_to_points(rows: &[(usize, &str)]) -> Result<Points> {
    let mut data = Vec::new();
    let mut dim = None;
    for &(n, line) in rows {
        let v = numbers(line, n)?;
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(Error::Parse(format!("line {n}: expected {d} columns, found {}", v.len())))
            }
            _ => {}
        }
        data.extend(v);
    }
    Points::new(dim.unwrap_or(1), data)
}

pub fn parse_measure(text: &str) -> Result<CrowdMeasure> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let Some(&(_, head)) = lines.first() else {
        return Err(Error::Parse("empty measure file".into()));
    };
    let first = head.split(',').next().unwrap_or("").trim();
    match first {
        "r" => {
            let (n, vals) = lines.get(1).ok_or_else(|| Error::Parse("bump header has no values".into()))?;
            let cells: Vec<&str> = vals.split(',').map(str::trim).collect();
            if cells.len() < 2 {
                return Err(Error::Parse(format!("line {n}: expected r,profile[,m_f]")));
            }
            let r: f64 = cells[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {n}: bad radius `{}`", cells[0])))?;
            let profile = BumpProfile::parse(cells[1])?;
            let body = lines.get(3..).unwrap_or(&[]);
            let atoms = AtomicMeasure::new(rows_to_points(body)?)?;
            Ok(make_bumps(&atoms, r, profile)?.into())
        }
        "L" => {
            let (n, vals) = lines.get(1).ok_or_else(|| Error::Parse("grid header has no values".into()))?;
            let v = numbers(vals, *n)?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("line {n}: expected L,M")));
            }
            let body = lines.get(3..).unwrap_or(&[]);
            let values = body
                .iter()
                .map(|(n, l)| numbers(l, *n).map(|v| v[0]))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != v[1] as usize {
                return Err(Error::Parse(format!("grid declares {} cells, found {}", v[1], values.len())));
            }
            Ok(GridDensity1D::new(v[0], values)?.into())
        }
        "w" => {
            let body = &lines[1..];
            let all = rows_to_points(body)?;
            let dim = all.dim();
            if dim < 2 {
                return Err(Error::Parse("cloud rows need a weight and coordinates".into()));
            }
            let mut weights = Vec::with_capacity(all.len());
            let mut coords = Vec::with_capacity(all.len() * (dim - 1));
            for row in all.iter() {
                weights.push(row[0]);
                coords.extend_from_slice(&row[1..]);
            }
            Ok(WeightedCloud::new(Points::new(dim - 1, coords)?, weights)?.into())
        }
        _ => {
            let body = if first.starts_with('x') { &lines[1..] } else { &lines[..] };
            Ok(AtomicMeasure::new(rows_to_points(body)?)?.into())
        }
    }
}

pub fn read_measure(path: &Path) -> Result<CrowdMeasure> {
    let f = std::fs::File::open(path)?;
    let mut text = String::new();
    for line in std::io::BufReader::new(f).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_measure(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::make_lattice;

    fn roundtrip(m: &CrowdMeasure) -> CrowdMeasure {
        let mut buf = Vec::new();
        write_measure(&mut buf, m, &["config echo".into()]).unwrap();
        parse_measure(std::str::from_utf8(&buf).unwrap()).unwrap()
    }

    #[test]
    fn all_kinds_roundtrip() {
        let atoms = make_lattice(2, 2).unwrap();
        let b = make_bumps(&atoms, 0.05, BumpProfile::Cosine).unwrap();
        let cases: Vec<CrowdMeasure> = vec![
            atoms.clone().into(),
            b.clone().into(),
            GridDensity1D::new(2.0, vec![1.0, 2.5, 0.0]).unwrap().into(),
            b.quadrature(2).unwrap().into(),
        ];
        for m in cases {
            let back = roundtrip(&m);
            match (&m, &back) {
                (CrowdMeasure::Cloud(a), CrowdMeasure::Cloud(b)) => {
                    assert_eq!(a.points, b.points);
                    assert_eq!(a.weights, b.weights);
                }
                _ => assert_eq!(m, back),
            }
        }
    }

    #[test]
    fn headerless_atoms() {
        let m = parse_measure("# hi\n0.5\n1.5\n").unwrap();
        assert_eq!(m.as_atomic().unwrap().points.as_slice(), &[0.5, 1.5]);
        assert!(parse_measure("1,2\n3\n").is_err());
    }
}
