//! Comma-delimited tables for plotting, one header row each. Floats are
//! written as their shortest round-trip decimal form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::witness::{ContourGrid, Histogram, RegionHistograms, SmaxStatus, WitnessResult};

use super::result::LabeledCurve;

pub const CONTOUR_HEADER: &str = "squeezing_db,purity,s_max,status";

fn status_name(s: SmaxStatus) -> &'static str {
    match s {
        SmaxStatus::Crossing => "crossing",
        SmaxStatus::NoViolationAtZero => "no_violation_at_zero",
        SmaxStatus::CeilingLimited => "ceiling_limited",
    }
}

fn parse_status(s: &str) -> Option<SmaxStatus> {
    match s {
        "crossing" => Some(SmaxStatus::Crossing),
        "no_violation_at_zero" => Some(SmaxStatus::NoViolationAtZero),
        "ceiling_limited" => Some(SmaxStatus::CeilingLimited),
        _ => None,
    }
}

/// Row-major: squeezing outer, purity inner.
pub fn write_contour_csv<W: Write>(grid: &ContourGrid, mut out: W) -> Result<()> {
    writeln!(out, "{CONTOUR_HEADER}")?;
    for (i, db) in grid.squeezing_db.iter().enumerate() {
        for (j, p) in grid.purity.iter().enumerate() {
            let k = i * grid.purity.len() + j;
            writeln!(out, "{db},{p},{},{}", grid.s_max[k], status_name(grid.status[k]))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_contour_csv<R: BufRead>(input: R) -> Result<ContourGrid> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::MalformedDocument("empty contour table".into()))?;
    if header.trim() != CONTOUR_HEADER {
        return Err(Error::MalformedDocument(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |reason: &str| Error::BadSample {
            index,
            reason: reason.to_owned(),
        };
        if fields.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
        let status = parse_status(fields[3].trim()).ok_or_else(|| bad("unknown status"))?;
        rows.push((num(fields[0])?, num(fields[1])?, num(fields[2])?, status));
    }
    let mut squeezing_db: Vec<f64> = Vec::new();
    for r in &rows {
        if squeezing_db.last() != Some(&r.0) {
            squeezing_db.push(r.0);
        }
    }
    let per_row = if squeezing_db.is_empty() {
        0
    } else {
        rows.len() / squeezing_db.len()
    };
    let purity: Vec<f64> = rows.iter().take(per_row).map(|r| r.1).collect();
    if per_row * squeezing_db.len() != rows.len()
        || rows
            .iter()
            .enumerate()
            .any(|(k, r)| r.0 != squeezing_db[k / per_row] || r.1 != purity[k % per_row])
    {
        return Err(Error::MalformedDocument("contour rows are not a full row-major grid".into()));
    }
    Ok(ContourGrid {
        squeezing_db,
        purity,
        s_max: rows.iter().map(|r| r.2).collect(),
        status: rows.iter().map(|r| r.3).collect(),
    })
}

pub fn write_curve_csv<W: Write>(curves: &[LabeledCurve], mut out: W) -> Result<()> {
    writeln!(out, "state,s,lhs,violated")?;
    for c in curves {
        for p in &c.points {
            writeln!(out, "{},{},{},{}", c.label, p.distance, p.lhs, p.violated)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_scan_csv<W: Write>(results: &[WitnessResult], mut out: W) -> Result<()> {
    writeln!(out, "s,lhs,violated,delta,ave_var_x,prob_middle,var_p,uncertainty_lhs")?;
    for r in results {
        let unc = r.uncertainty_lhs.map(|u| u.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.distance, r.lhs, r.violated, r.delta, r.ave_var_x, r.prob_middle, r.var_p, unc
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Long format: `region,bin_lo,bin_hi,density`, region one of
/// `all`, `-1`, `0`, `+1`. Empty regions contribute no rows.
pub fn write_histogram_csv<W: Write>(h: &RegionHistograms, mut out: W) -> Result<()> {
    writeln!(out, "region,bin_lo,bin_hi,density")?;
    let rows = |hist: &Histogram, out: &mut W| -> Result<()> {
        let label = hist.region.map_or("all", |r| r.label());
        for (d, e) in hist.density.iter().zip(hist.edges.windows(2)) {
            writeln!(out, "{label},{},{},{d}", e[0], e[1])?;
        }
        Ok(())
    };
    for hist in h.iter() {
        rows(hist, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{contour_grid, GridRange, SmaxOptions};

    #[test]
    fn contour_round_trip_is_bit_exact() {
        let grid = contour_grid(
            GridRange::new(-4.0, 0.0, 3).unwrap(),
            GridRange::new(0.55, 1.0, 4).unwrap(),
            &SmaxOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_contour_csv(&grid, &mut buf).unwrap();
        let back = read_contour_csv(&buf[..]).unwrap();
        assert_eq!(back.squeezing_db, grid.squeezing_db);
        assert_eq!(back.purity, grid.purity);
        assert!(back.s_max.iter().zip(&grid.s_max).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back.status, grid.status);
    }

    #[test]
    fn contour_rejects_ragged_tables() {
        let text = format!("{CONTOUR_HEADER}\n-1,0.5,0.1,crossing\n-1,0.6,0.2,crossing\n0,0.5,0.3,crossing\n");
        assert!(read_contour_csv(text.as_bytes()).is_err());
        assert!(read_contour_csv("a,b\n".as_bytes()).is_err());
    }
}
