//! Number formatting and the CSV layouts the CLI writes.

use std::fmt::Write as _;
use std::str::FromStr;

use dmt_core::curve::TradeoffCurve;
use dmt_core::outage::OutageEstimate;
use dmt_core::slope::SlopeFit;
use dmt_core::Strategy;

use crate::ToolError;

pub const SIG_DIGITS: usize = 9;

pub const CURVE_HEADER: &str = "strategy,eta,r,d";
pub const MC_HEADER: &str = "snr_db,p_out,n_samples,n_outages,ci95";

/// `%.9g`: nine significant digits, trailing zeros dropped, scientific
/// notation outside `[1e-4, 1e9)`. Parsing the output and formatting again
/// gives the same string.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG_DIGITS as i32).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to what [`sig`] prints, for JSON output.
pub fn round_sig(x: f64) -> f64 {
    sig(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub strategy: Strategy,
    pub eta: f64,
    pub r: f64,
    pub d: f64,
}

/// Flattens curves into rows sorted by `(strategy, eta, r)`.
pub fn curve_rows(curves: &[TradeoffCurve]) -> Vec<CurveRow> {
    let mut rows: Vec<CurveRow> = curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| CurveRow {
                strategy: c.strategy,
                eta: c.eta,
                r: p.r,
                d: p.d,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.strategy
            .as_str()
            .cmp(b.strategy.as_str())
            .then(a.eta.total_cmp(&b.eta))
            .then(a.r.total_cmp(&b.r))
    });
    rows
}

pub fn write_curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{CURVE_HEADER}").unwrap();
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.strategy,
            sig(row.eta),
            sig(row.r),
            sig(row.d)
        )
        .unwrap();
    }
    out
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, ToolError> {
    let mut lines = text.lines();
    expect_header(lines.next(), CURVE_HEADER)?;
    lines
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|line| {
            let fields = split_fields(line, 4)?;
            Ok(CurveRow {
                strategy: fields[0]
                    .parse()
                    .map_err(|_| ToolError::Parse(format!("unknown strategy in `{line}`")))?,
                eta: number(fields[1])?,
                r: number(fields[2])?,
                d: number(fields[3])?,
            })
        })
        .collect()
}

/// Monte Carlo CSV body plus the optional slope trailer.
pub fn write_mc_csv(estimates: &[OutageEstimate], fit: Option<&SlopeFit>) -> String {
    let mut out = String::new();
    writeln!(out, "{MC_HEADER}").unwrap();
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},{}",
            sig(e.snr_db),
            sig(e.p_out),
            e.n_samples,
            e.n_outages,
            sig(e.ci95_halfwidth)
        )
        .unwrap();
    }
    if let Some(fit) = fit {
        writeln!(out, "# slope d_hat={} stderr={}", sig(fit.d_hat), sig(fit.stderr)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct McTable {
    pub rows: Vec<OutageEstimate>,
    /// `(d_hat, stderr)` from the trailer.
    pub slope: Option<(f64, f64)>,
}

pub fn parse_mc_csv(text: &str) -> Result<McTable, ToolError> {
    let mut lines = text.lines();
    expect_header(lines.next(), MC_HEADER)?;
    let mut rows = Vec::new();
    let mut slope = None;
    for line in lines.filter(|l| !l.is_empty()) {
        if let Some(trailer) = line.strip_prefix("# slope ") {
            slope = Some(parse_trailer(trailer)?);
            continue;
        }
        let f = split_fields(line, 5)?;
        rows.push(OutageEstimate {
            snr_db: number(f[0])?,
            p_out: number(f[1])?,
            n_samples: number(f[2])?,
            n_outages: number(f[3])?,
            ci95_halfwidth: number(f[4])?,
        });
    }
    Ok(McTable { rows, slope })
}

fn parse_trailer(s: &str) -> Result<(f64, f64), ToolError> {
    let mut d = None;
    let mut se = None;
    for part in s.split_whitespace() {
        match part.split_once('=') {
            Some(("d_hat", v)) => d = Some(number(v)?),
            Some(("stderr", v)) => se = Some(number(v)?),
            _ => return Err(ToolError::Parse(format!("bad slope trailer `{s}`"))),
        }
    }
    d.zip(se)
        .ok_or_else(|| ToolError::Parse(format!("incomplete slope trailer `{s}`")))
}

fn expect_header(line: Option<&str>, header: &str) -> Result<(), ToolError> {
    match line {
        Some(h) if h == header => Ok(()),
        other => Err(ToolError::Parse(format!(
            "expected header `{header}`, found `{}`",
            other.unwrap_or("")
        ))),
    }
}

fn split_fields(line: &str, n: usize) -> Result<Vec<&str>, ToolError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(ToolError::Parse(format!("expected {n} fields in `{line}`")));
    }
    Ok(fields)
}

fn number<T: FromStr>(s: &str) -> Result<T, ToolError> {
    s.parse()
        .map_err(|_| ToolError::Parse(format!("bad number `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig(2.0 / 3.0), "0.666666667");
        assert_eq!(sig(2.5), "2.5");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-1.25), "-1.25");
        assert_eq!(sig(1234567890.0), "1.23456789e+09");
        assert_eq!(sig(123456789.0), "123456789");
        assert_eq!(sig(3.2e-7), "3.2e-07");
        assert_eq!(sig(0.0001), "0.0001");
        assert_eq!(sig(1e-5), "1e-05");
        assert_eq!(sig(0.30000000000000004), "0.3");
        assert_eq!(sig(9.9999999999), "10");
    }

    #[test]
    fn formatting_is_idempotent() {
        for x in [1.0 / 7.0, 4.0 - 3.0 * 0.37, 1e-9 / 3.0, 6.02e23, 0.05, 35.0] {
            let s = sig(x);
            assert_eq!(sig(s.parse().unwrap()), s);
        }
    }

    #[test]
    fn mc_round_trip() {
        let rows = vec![
            OutageEstimate::from_counts(10.0, 1234, 100_000),
            OutageEstimate::from_counts(15.0, 3, 100_000),
        ];
        let fit = SlopeFit {
            d_hat: 0.3123,
            stderr: 0.0123,
            used: 2,
            excluded_snr_db: vec![],
        };
        let text = write_mc_csv(&rows, Some(&fit));
        let table = parse_mc_csv(&text).unwrap();
        assert_eq!(table.slope, Some((0.3123, 0.0123)));
        let again = write_mc_csv(
            &table.rows,
            table.slope.map(|(d_hat, stderr)| SlopeFit {
                d_hat,
                stderr,
                used: 0,
                excluded_snr_db: vec![],
            }).as_ref(),
        );
        assert_eq!(text, again);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_curve_csv("eta,r,d\n").is_err());
        assert!(parse_mc_csv("snr_db,p_out\n").is_err());
    }
}
