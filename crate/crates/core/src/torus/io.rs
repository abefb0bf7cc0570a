//! Plain-text measure format.
//!
//! ```text
//! torus-measure v1 d=2 kind=particles
//! x1,x2,w
//! ...
//! ```
//! Grids replace the particle rows by a `shape,n1,...,nd` row followed by
//! one density value per row in row-major order. Fields may be separated by
//! commas or whitespace; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::measure::{GridDensity, ParticleCloud, TorusMeasure};

const MAGIC: &str = "torus-measure";

pub fn write_measure<S: Real>(mu: &TorusMeasure<S>) -> String {
    let mut out = String::new();
    let kind = match mu {
        TorusMeasure::Particles(_) => "particles",
        TorusMeasure::Grid(_) => "grid",
    };
    writeln!(out, "{MAGIC} v1 d={} kind={kind}", mu.dim()).unwrap();
    match mu {
        TorusMeasure::Particles(c) => {
            for i in 0..c.len() {
                for x in c.point(i) {
                    write!(out, "{x},").unwrap();
                }
                writeln!(out, "{}", c.weights()[i]).unwrap();
            }
        }
        TorusMeasure::Grid(g) => {
            let shape: Vec<String> = g.shape().iter().map(|n| n.to_string()).collect();
            writeln!(out, "shape,{}", shape.join(",")).unwrap();
            for v in g.values() {
                writeln!(out, "{v}").unwrap();
            }
        }
    }
    out
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("invalid number `{s}`") })
}

pub fn parse_measure<S: Real>(text: &str) -> Result<TorusMeasure<S>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty measure file".into() })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) || parts.next() != Some("v1") {
        return Err(Error::Parse { line: hline, msg: format!("expected `{MAGIC} v1` header") });
    }
    let (mut dim, mut kind) = (None, None);
    for p in parts {
        match p.split_once('=') {
            Some(("d", v)) => dim = Some(parse_num::<usize>(v, hline)?),
            Some(("kind", v)) => kind = Some(v.to_string()),
            _ => return Err(Error::Parse { line: hline, msg: format!("unknown header field `{p}`") }),
        }
    }
    let dim = dim.ok_or(Error::Parse { line: hline, msg: "missing d=".into() })?;
    match kind.as_deref() {
        Some("particles") => {
            let (mut coords, mut weights) = (Vec::new(), Vec::new());
            for (ln, l) in lines {
                let row: Vec<S> = fields(l).map(|f| parse_num(f, ln)).collect::<Result<_>>()?;
                if row.len() != dim + 1 {
                    return Err(Error::Parse { line: ln, msg: format!("expected {} fields, found {}", dim + 1, row.len()) });
                }
                coords.extend_from_slice(&row[..dim]);
                weights.push(row[dim]);
            }
            Ok(ParticleCloud::new(dim, coords, weights)?.into())
        }
        Some("grid") => {
            let (sl, shape_line) = lines.next().ok_or(Error::Parse { line: hline, msg: "missing shape row".into() })?;
            let mut f = fields(shape_line);
            if f.next() != Some("shape") {
                return Err(Error::Parse { line: sl, msg: "expected `shape,...` row".into() });
            }
            let shape: Vec<usize> = f.map(|s| parse_num(s, sl)).collect::<Result<_>>()?;
            if shape.len() != dim {
                return Err(Error::Parse { line: sl, msg: format!("shape has {} axes, header says d={dim}", shape.len()) });
            }
            let mut values = Vec::new();
            for (ln, l) in lines {
                for s in fields(l) {
                    values.push(parse_num::<S>(s, ln)?);
                }
            }
            Ok(GridDensity::new(shape, values)?.into())
        }
        _ => Err(Error::Parse { line: hline, msg: "kind must be `particles` or `grid`".into() }),
    }
}

pub fn read_measure<S: Real>(path: &Path) -> Result<TorusMeasure<S>> {
    parse_measure(&std::fs::read_to_string(path)?)
}

pub fn save_measure<S: Real>(mu: &TorusMeasure<S>, path: &Path) -> Result<()> {
    std::fs::write(path, write_measure(mu))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn particles_round_trip() {
        let mu: TorusMeasure<f64> = ParticleCloud::new(2, vec![0.1, 0.2, 3.0, 1e-17], vec![0.3, 0.7]).unwrap().into();
        let text = write_measure(&mu);
        assert!(text.starts_with("torus-measure v1 d=2 kind=particles\n"));
        assert_eq!(parse_measure::<f64>(&text).unwrap(), mu);
    }

    #[test]
    fn grid_round_trip() {
        let mu: TorusMeasure<f64> = GridDensity::from_fn(vec![3, 2], |x| 1.0 + x[0]).unwrap().into();
        assert_eq!(parse_measure::<f64>(&write_measure(&mu)).unwrap(), mu);
    }

    #[test]
    fn whitespace_rows_accepted() {
        let mu = parse_measure::<f64>("torus-measure v1 d=1 kind=particles\n0.5 0.25\n1.0\t0.75 # tail\n").unwrap();
        assert_eq!(mu.as_cloud().unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_measure::<f64>("torus-measure v1 d=1 kind=particles\n0.5 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_measure::<f64>("bogus\n").is_err());
        assert!(parse_measure::<f64>("torus-measure v1 d=1 kind=particles\n0.5 0.5\n").is_err());
    }
}
