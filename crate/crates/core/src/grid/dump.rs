//! Plain-text grid dumps: a header line `N n L m`, then `n^N` decimal values,
//! one per line, row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Domain, GridFunction};
use crate::error::{Error, Result};

pub fn write_dump<W: Write>(u: &GridFunction, mut out: W) -> Result<()> {
    let d = u.domain();
    writeln!(
        out,
        "{} {} {} {}",
        d.dim(),
        d.points_per_axis(),
        d.half_width(),
        d.support_margin()
    )?;
    for v in u.values() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    parse_dump(&text).map_err(|reason| Error::Dump {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_dump(text: &str) -> std::result::Result<GridFunction, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(format!("header has {} fields, expected 4", fields.len()));
    }
    let dim: usize = fields[0].parse().map_err(|e| format!("N: {e}"))?;
    let n: usize = fields[1].parse().map_err(|e| format!("n: {e}"))?;
    let half_width: f64 = fields[2].parse().map_err(|e| format!("L: {e}"))?;
    let margin: f64 = fields[3].parse().map_err(|e| format!("m: {e}"))?;
    let domain = Domain::new(dim, half_width, n, margin).map_err(|e| e.to_string())?;
    let mut values = Vec::with_capacity(domain.len());
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| format!("line {}: {e}", lineno + 2))?;
        values.push(v);
    }
    GridFunction::new(domain, values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_roundtrip_is_exact() {
        let d = Domain::new(2, 2.0, 32, 0.5).unwrap();
        let u = GridFunction::from_fn(d, |x| (x[0] * 1.3).sin() * x[1].exp() / 7.0).unwrap();
        let mut buf = Vec::new();
        write_dump(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("2 32 2 0.5\n"));
        let back = parse_dump(&text).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn corrupted_dumps_are_rejected() {
        assert!(parse_dump("").is_err());
        assert!(parse_dump("1 16 2\n").is_err());
        let short = format!("1 16 2 0.5\n{}", "0\n".repeat(15));
        assert!(parse_dump(&short).is_err());
        let bad = format!("1 16 2 0.5\n{}abc\n", "0\n".repeat(15));
        assert!(parse_dump(&bad).is_err());
    }
}
