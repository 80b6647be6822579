//! CSV trace format.
//!
//! One row per node per step, angles in radians, booleans as `0`/`1`,
//! channels 0-based:
//!
//! ```text
//! t,node,phase,channel,collided,success,reward,gated
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! trace read back yields bit-identical records.

use std::io::{BufRead, Write};

use crate::engine::{StepRecord, TraceSink};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,node,phase,channel,collided,success,reward,gated";
pub const PHASES_HEADER: &str = "t,node,phase_deg";

const COLUMNS: [&str; 8] = [
    "t", "node", "phase", "channel", "collided", "success", "reward", "gated",
];

fn flag(b: bool) -> u8 {
    u8::from(b)
}

pub fn write_record<W: Write>(w: &mut W, r: &StepRecord) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        r.t,
        r.node,
        r.phase_before,
        r.channel,
        flag(r.collided),
        flag(r.success),
        r.reward,
        flag(r.gated)
    )
}

/// Streams records to a writer as `trace.csv`.
pub struct CsvTraceSink<W: Write> {
    out: W,
}

impl<W: Write> CsvTraceSink<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for CsvTraceSink<W> {
    fn record(&mut self, record: &StepRecord) -> std::io::Result<()> {
        write_record(&mut self.out, record)
    }

    fn finish(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

/// Streams `t,node,phase_deg` rows for stripe plots.
pub struct PhaseDegreesSink<W: Write> {
    out: W,
}

impl<W: Write> PhaseDegreesSink<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{PHASES_HEADER}")?;
        Ok(Self { out })
    }
}

impl<W: Write> TraceSink for PhaseDegreesSink<W> {
    fn record(&mut self, r: &StepRecord) -> std::io::Result<()> {
        writeln!(
            self.out,
            "{},{},{}",
            r.t,
            r.node,
            r.phase_before.to_degrees()
        )
    }

    fn finish(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

fn check_header(line: &str) -> Result<()> {
    let got: Vec<&str> = line.trim_end().split(',').collect();
    for (i, want) in COLUMNS.iter().enumerate() {
        match got.get(i) {
            Some(g) if g == want => {}
            Some(g) => {
                return Err(Error::Trace(format!(
                    "header column {}: expected `{want}`, got `{g}`",
                    i + 1
                )))
            }
            None => return Err(Error::Trace(format!("header is missing column `{want}`"))),
        }
    }
    if got.len() > COLUMNS.len() {
        return Err(Error::Trace(format!(
            "header has unexpected extra column `{}`",
            got[COLUMNS.len()]
        )));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(raw: &str, column: &str, line_no: usize) -> Result<T> {
    raw.parse().map_err(|_| {
        Error::Trace(format!(
            "line {line_no}, column `{column}`: cannot parse {raw:?}"
        ))
    })
}

fn parse_flag(raw: &str, column: &str, line_no: usize) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Trace(format!(
            "line {line_no}, column `{column}`: expected 0 or 1, got {raw:?}"
        ))),
    }
}

pub fn parse_record(line: &str, line_no: usize) -> Result<StepRecord> {
    let fields: Vec<&str> = line.trim_end().split(',').collect();
    if fields.len() != COLUMNS.len() {
        return Err(Error::Trace(format!(
            "line {line_no}: expected {} fields, got {}",
            COLUMNS.len(),
            fields.len()
        )));
    }
    Ok(StepRecord {
        t: parse_field(fields[0], COLUMNS[0], line_no)?,
        node: parse_field(fields[1], COLUMNS[1], line_no)?,
        phase_before: parse_field(fields[2], COLUMNS[2], line_no)?,
        channel: parse_field(fields[3], COLUMNS[3], line_no)?,
        collided: parse_flag(fields[4], COLUMNS[4], line_no)?,
        success: parse_flag(fields[5], COLUMNS[5], line_no)?,
        reward: parse_field(fields[6], COLUMNS[6], line_no)?,
        gated: parse_flag(fields[7], COLUMNS[7], line_no)?,
    })
}

/// Iterates the records of a `trace.csv` stream after validating its header.
pub struct TraceReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Trace("empty file, missing header".into()))??;
        check_header(&header)?;
        Ok(Self { lines, line_no: 1 })
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<StepRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(parse_record(&line, self.line_no));
        }
    }
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<StepRecord>> {
    TraceReader::new(input)?.collect()
}
