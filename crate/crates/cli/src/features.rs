//! Feature files: one decimal per line, optionally preceded by
//! `#bounds lo:hi lo:hi ...`. Without the header every feature is in `[0, 1]`.
//! Blank lines and other `#` lines are ignored.

use std::fmt::Write as _;

use privrba_core::{Bounds, FeatureVector};

pub fn parse(text: &str) -> Result<FeatureVector, String> {
    let mut bounds = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("#bounds") {
            if i != 0 {
                return Err(format!("line {}: #bounds must be the first line", i + 1));
            }
            bounds = Some(parse_bounds(rest).map_err(|e| format!("line 1: {e}"))?);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| format!("line {}: {line:?} is not a number", i + 1))?;
        if !v.is_finite() {
            return Err(format!("line {}: value must be finite", i + 1));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err("no feature values".into());
    }
    let bounds = match bounds {
        Some(b) => b,
        None => vec![Bounds::new(0.0, 1.0).expect("unit interval"); values.len()],
    };
    FeatureVector::new(values, bounds).map_err(|e| e.to_string())
}

fn parse_bounds(spec: &str) -> Result<Vec<Bounds>, String> {
    spec.split_whitespace()
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("{pair:?} is not lo:hi"))?;
            let lo: f64 = lo
                .parse()
                .map_err(|_| format!("bad lower bound in {pair:?}"))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| format!("bad upper bound in {pair:?}"))?;
            Bounds::new(lo, hi).map_err(|e| e.to_string())
        })
        .collect()
}

/// Inverse of [`parse`]; always writes the header.
pub fn format(v: &FeatureVector) -> String {
    let mut out = String::from("#bounds");
    for b in v.bounds() {
        write!(out, " {:?}:{:?}", b.lo, b.hi).expect("write to string");
    }
    out.push('\n');
    for x in v.values() {
        writeln!(out, "{x:?}").expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bounds() {
        let v = parse("0.5\n\n0.25\n").unwrap();
        assert_eq!(v.values(), &[0.5, 0.25]);
        assert!(v.bounds().iter().all(|b| b.lo == 0.0 && b.hi == 1.0));
    }

    #[test]
    fn header_round_trip() {
        let v = parse("#bounds -1:1 0:100\n-0.5\n42.125\n").unwrap();
        assert_eq!(parse(&format(&v)).unwrap(), v);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("").is_err());
        assert!(parse("abc\n").is_err());
        assert!(parse("#bounds 0:1\n0.1\n0.2\n").is_err());
        assert!(parse("0.1\n#bounds 0:1\n").is_err());
        assert!(parse("#bounds 1:0\n0.5\n").is_err());
        assert!(parse("inf\n").is_err());
    }
}
