use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::Point;
use crate::ingest::diary::ParseIssue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpsFix {
    /// Minutes since midnight.
    pub t_min: f64,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeLocationPath {
    pub person_id: String,
    /// Strictly increasing in time; never empty.
    pub points: Vec<GpsFix>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GpsReport {
    pub paths_kept: usize,
    pub paths_dropped: usize,
    pub rows_dropped: usize,
    pub issues: Vec<ParseIssue>,
}

/// Parses `person_id,t_min,x,y`. Rows for one person are expected in
/// chronological file order; repeated timestamps collapse to the last row,
/// and a person whose timestamps go backwards is dropped.
pub fn parse_gps<R: Read>(source: R) -> Result<(Vec<TimeLocationPath>, GpsReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["person_id", "t_min", "x", "y"] {
        return Err(Error::MalformedHeader(format!(
            "expected `person_id,t_min,x,y`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut report = GpsReport::default();
    let mut order: Vec<(String, Vec<GpsFix>, Option<String>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (row.len() == 4)
            .then(|| {
                let nums: Vec<Option<f64>> = (1..4)
                    .map(|i| row[i].parse::<f64>().ok().filter(|v| v.is_finite()))
                    .collect();
                match nums[..] {
                    [Some(t), Some(x), Some(y)] if !row[0].is_empty() => Some(GpsFix {
                        t_min: t,
                        position: Point::new(x, y),
                    }),
                    _ => None,
                }
            })
            .flatten();
        let Some(fix) = parsed else {
            report.rows_dropped += 1;
            report.issues.push(ParseIssue {
                line: Some(line),
                person_id: row.get(0).map(str::to_string),
                reason: "malformed row".to_string(),
            });
            continue;
        };
        let slot = *index.entry(row[0].to_string()).or_insert_with(|| {
            order.push((row[0].to_string(), Vec::new(), None));
            order.len() - 1
        });
        let (_, points, broken) = &mut order[slot];
        match points.last_mut() {
            Some(last) if last.t_min == fix.t_min => *last = fix,
            Some(last) if last.t_min > fix.t_min => {
                broken.get_or_insert_with(|| format!("timestamp {} after {} at line {line}", fix.t_min, last.t_min));
            }
            _ => points.push(fix),
        }
    }

    let mut paths = Vec::with_capacity(order.len());
    for (person_id, points, broken) in order {
        if let Some(reason) = broken {
            report.paths_dropped += 1;
            report.issues.push(ParseIssue {
                line: None,
                person_id: Some(person_id),
                reason: format!("non-monotonic timestamps: {reason}"),
            });
            continue;
        }
        paths.push(TimeLocationPath { person_id, points });
    }
    report.paths_kept = paths.len();
    Ok((paths, report))
}

pub fn write_gps<W: Write>(paths: &[TimeLocationPath], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["person_id", "t_min", "x", "y"])?;
    for path in paths {
        for p in &path.points {
            w.write_record([
                path.person_id.clone(),
                p.t_min.to_string(),
                p.position.x.to_string(),
                p.position.y.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<gps sink>", e))?;
    Ok(())
}
