//! Line-oriented instance files:
//!
//! ```text
//! # comment
//! sizes: 1, 2, 4 - 1/100
//! batch: size=1 release=0 count=2
//! batch: size=3 release=1/2 count=1
//! faults: 399/100, 499/100
//! horizon: 599/100
//! ```
//!
//! Size indices are 1-based. A batch released after the horizon is accepted
//! and simply never runs.

use std::io::{BufRead, Write};

use super::{validate_instance, FaultSequence, Instance, PacketBatch, SizeCatalog, SizeFilter};
use crate::numeric::GoldenNumber;
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn literal(line: usize, tok: &str) -> Result<GoldenNumber> {
    tok.trim().parse::<GoldenNumber>().map_err(|_| parse_err(line, format!("invalid numeric literal `{}`", tok.trim())))
}

fn literal_list(line: usize, body: &str) -> Result<Vec<GoldenNumber>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|t| literal(line, t)).collect()
}

/// Reads an instance file, then checks every invariant.
pub fn read_instance<R: BufRead>(reader: R) -> Result<(Instance, FaultSequence)> {
    let mut sizes: Option<Vec<GoldenNumber>> = None;
    let mut batches = Vec::new();
    let mut faults: Option<Vec<GoldenNumber>> = None;
    let mut horizon: Option<GoldenNumber> = None;

    for (n, line) in reader.lines().enumerate() {
        let lineno = n + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, body) = line
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("expected `key: value`, found `{line}`")))?;
        match key.trim() {
            "sizes" => {
                if sizes.is_some() {
                    return Err(parse_err(lineno, "duplicate `sizes` line"));
                }
                sizes = Some(literal_list(lineno, body)?);
            }
            "batch" => batches.push(parse_batch(lineno, body)?),
            "faults" => {
                if faults.is_some() {
                    return Err(parse_err(lineno, "duplicate `faults` line"));
                }
                faults = Some(literal_list(lineno, body)?);
            }
            "horizon" => {
                if horizon.is_some() {
                    return Err(parse_err(lineno, "duplicate `horizon` line"));
                }
                horizon = Some(literal(lineno, body)?);
            }
            other => return Err(parse_err(lineno, format!("unknown key `{other}`"))),
        }
    }

    let sizes = sizes.ok_or_else(|| parse_err(0, "missing `sizes` line"))?;
    let horizon = horizon.ok_or_else(|| parse_err(0, "missing `horizon` line"))?;
    let inst = Instance::new(SizeCatalog::new_unchecked(sizes), batches);
    let faults = FaultSequence::new(faults.unwrap_or_default(), horizon);
    validate_instance(&inst, &faults).map_err(Error::Invalid)?;
    Ok((inst, faults))
}

fn parse_batch(line: usize, body: &str) -> Result<PacketBatch> {
    let (mut size, mut release, mut count) = (None, None, None);
    // `release=` may carry a literal with spaces, so split on the keys
    let mut rest = body.trim();
    while !rest.is_empty() {
        let (key, after) =
            rest.split_once('=').ok_or_else(|| parse_err(line, format!("expected `key=value` in `{rest}`")))?;
        let key = key.trim();
        let next = ["size=", "release=", "count="]
            .iter()
            .filter_map(|k| after.find(k))
            .min()
            .unwrap_or(after.len());
        let value = after[..next].trim();
        rest = after[next..].trim();
        match key {
            "size" => {
                let idx: usize = value.parse().map_err(|_| parse_err(line, format!("invalid size index `{value}`")))?;
                if idx == 0 {
                    return Err(parse_err(line, "size indices start at 1"));
                }
                size = Some(idx - 1);
            }
            "release" => release = Some(literal(line, value)?),
            "count" => count = Some(value.parse::<u64>().map_err(|_| parse_err(line, format!("invalid count `{value}`")))?),
            other => return Err(parse_err(line, format!("unknown batch field `{other}`"))),
        }
    }
    Ok(PacketBatch {
        size_index: size.ok_or_else(|| parse_err(line, "batch without `size=`"))?,
        release: release.unwrap_or_default(),
        count: count.ok_or_else(|| parse_err(line, "batch without `count=`"))?,
    })
}

pub fn write_instance<W: Write>(inst: &Instance, faults: &FaultSequence, mut w: W) -> Result<()> {
    let join = |v: &[GoldenNumber]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    writeln!(w, "sizes: {}", join(inst.catalog.sizes()))?;
    for b in &inst.batches {
        writeln!(w, "batch: size={} release={} count={}", b.size_index + 1, b.release, b.count)?;
    }
    writeln!(w, "faults: {}", join(&faults.faults))?;
    writeln!(w, "horizon: {}", faults.horizon)?;
    Ok(())
}

/// One row of a load report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadRow {
    pub filter: SizeFilter,
    pub u: GoldenNumber,
    pub v: GoldenNumber,
    pub load: GoldenNumber,
}

/// CSV with columns `filter,u,v,load`.
pub fn write_loads_csv<W: Write>(rows: &[LoadRow], w: W, digits: u32) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["filter", "u", "v", "load"])?;
    for r in rows {
        out.write_record([r.filter.to_string(), r.u.to_decimal(digits), r.v.to_decimal(digits), r.load.to_decimal(digits)])?;
    }
    out.flush()?;
    Ok(())
}
