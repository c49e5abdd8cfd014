//! Whitespace-separated text formats.
//!
//! Factor file: a header line `d N`, then `N` lines of `d` reals.
//! Entry file: one line per entry, `i_1 ... i_N value` with 1-based indices.
//! Blank lines and lines starting with `#` are ignored in both.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tensor::{EntryIndex, FactorList, ObservedEntry};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| {
            r.as_ref()
                .map(|(_, l)| {
                    let t = l.trim();
                    !t.is_empty() && !t.starts_with('#')
                })
                .unwrap_or(true)
        })
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a positive integer, got {tok:?}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("expected a real number, got {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

pub fn read_factors<R: BufRead>(reader: R) -> Result<FactorList> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `d N` header"))??;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(hline, "header must be `d N`"));
    }
    let d = parse_usize(toks[0], hline)?;
    let n = parse_usize(toks[1], hline)?;
    if d == 0 || n == 0 {
        return Err(parse_err(hline, "d and N must be positive"));
    }
    let mut factors = Vec::with_capacity(n);
    for line in lines {
        let (no, text) = line?;
        let u = text
            .split_whitespace()
            .map(|t| parse_f64(t, no))
            .collect::<Result<Vec<_>>>()?;
        if u.len() != d {
            return Err(parse_err(
                no,
                format!("expected {d} values, got {}", u.len()),
            ));
        }
        factors.push(u);
    }
    if factors.len() != n {
        return Err(parse_err(
            hline,
            format!("expected {n} factor lines, got {}", factors.len()),
        ));
    }
    FactorList::new(factors)
}

pub fn write_factors<W: Write>(out: &mut W, t: &FactorList) -> Result<()> {
    writeln!(out, "{} {}", t.d(), t.n())?;
    for u in t.factors() {
        let line: Vec<String> = u.iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", line.join("\t"))?;
    }
    Ok(())
}

/// Reads `i_1 ... i_N value` lines. Index ranges are checked by the caller.
pub fn read_observed<R: BufRead>(reader: R, n: usize) -> Result<Vec<ObservedEntry>> {
    let mut out = Vec::new();
    for line in content_lines(reader) {
        let (no, text) = line?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != n + 1 {
            return Err(parse_err(
                no,
                format!(
                    "expected {} fields (N indices and a value), got {}",
                    n + 1,
                    toks.len()
                ),
            ));
        }
        let coords = toks[..n]
            .iter()
            .map(|t| parse_usize(t, no))
            .collect::<Result<Vec<_>>>()?;
        let value = parse_f64(toks[n], no)?;
        if value == 0.0 {
            return Err(Error::ZeroValue);
        }
        out.push(ObservedEntry {
            index: EntryIndex::new(coords),
            value,
        });
    }
    Ok(out)
}

/// Reads `i_1 ... i_N` lines.
pub fn read_indices<R: BufRead>(reader: R, n: usize) -> Result<Vec<EntryIndex>> {
    let mut out = Vec::new();
    for line in content_lines(reader) {
        let (no, text) = line?;
        let coords = text
            .split_whitespace()
            .map(|t| parse_usize(t, no))
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != n {
            return Err(parse_err(
                no,
                format!("expected {n} indices, got {}", coords.len()),
            ));
        }
        out.push(EntryIndex::new(coords));
    }
    Ok(out)
}

/// Shortest decimal that round-trips the value rounded to 15 significant
/// digits, so `-7.999999999999998` prints as `-8`.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_entry<W: Write>(out: &mut W, ix: &EntryIndex, value: f64) -> Result<()> {
    for c in ix.coords() {
        write!(out, "{c} ")?;
    }
    writeln!(out, "{}", format_value(value))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_file_roundtrip() {
        let t = FactorList::new(vec![vec![1.5, -2.0, 3e-7], vec![4.0, 5.25, -6e10]]).unwrap();
        let mut buf = Vec::new();
        write_factors(&mut buf, &t).unwrap();
        let back = read_factors(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn factor_file_errors() {
        assert!(matches!(
            read_factors("".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_factors("2 2\n1 2\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_factors("2 1\n1 0\n".as_bytes()),
            Err(Error::ZeroCoordinate { .. })
        ));
        assert!(matches!(
            read_factors("2 1\n1 x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn observed_file() {
        let text = "# comment\n1 1 3\n\n2 1\t-6\n";
        let e = read_observed(text.as_bytes(), 2).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].index.coords(), &[2, 1]);
        assert_eq!(e[1].value, -6.0);
        assert!(matches!(
            read_observed("1 1 0\n".as_bytes(), 2),
            Err(Error::ZeroValue)
        ));
        assert!(read_observed("1 1\n".as_bytes(), 2).is_err());
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(-7.999999999999998), "-8");
        assert_eq!(format_value(14.0), "14");
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(
            format_value(-1.25e-30),
            "-0.00000000000000000000000000000125"
        );
    }
}
