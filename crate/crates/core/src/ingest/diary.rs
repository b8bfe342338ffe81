use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::Serialize;

use crate::activity::{ActivityClass, DAY_MINUTES};
use crate::error::{Error, Result};
use crate::ingest::codes::ActivityCodeMap;

const FIXED_COLUMNS: [&str; 5] = ["person_id", "weight", "start_min", "duration_min", "code"];
const ATTR_PREFIX: &str = "attr:";

/// One contiguous activity span in a diary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiaryEntry {
    pub start_min: u32,
    pub duration_min: u32,
    /// Raw source code; `None` for spans synthesized to fill uncovered time.
    pub code: Option<String>,
    pub class: ActivityClass,
}

impl DiaryEntry {
    pub fn end_min(&self) -> u32 {
        self.start_min + self.duration_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiaryRecord {
    pub person_id: String,
    pub sample_weight: f64,
    /// Sorted, non-overlapping, covering the whole day once gaps are filled.
    pub entries: Vec<DiaryEntry>,
    pub attributes: BTreeMap<String, String>,
}

impl DiaryRecord {
    /// Builds a record from `(start, duration, class)` spans, filling gaps with
    /// `gap_class`. Used by generators and tests that bypass CSV.
    pub fn from_spans(
        person_id: impl Into<String>,
        sample_weight: f64,
        spans: &[(u32, u32, ActivityClass)],
        gap_class: ActivityClass,
    ) -> Result<Self> {
        let person_id = person_id.into();
        let mut entries: Vec<DiaryEntry> = spans
            .iter()
            .map(|&(start_min, duration_min, class)| DiaryEntry {
                start_min,
                duration_min,
                code: Some(class.label().to_string()),
                class,
            })
            .collect();
        entries.sort_by_key(|e| e.start_min);
        check_entries(&entries).map_err(|reason| Error::invalid(&person_id, reason))?;
        if !(sample_weight.is_finite() && sample_weight >= 0.0) {
            return Err(Error::invalid(&person_id, "sample weight must be finite and >= 0"));
        }
        Ok(Self {
            person_id,
            sample_weight,
            entries: fill_gaps(entries, gap_class),
            attributes: BTreeMap::new(),
        })
    }

    pub fn covered_minutes(&self) -> u32 {
        self.entries.iter().map(|e| e.duration_min).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseIssue {
    /// 1-based line in the source, when the issue is tied to a row.
    pub line: Option<u64>,
    pub person_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub records_kept: usize,
    pub records_dropped: usize,
    pub rows_dropped: usize,
    pub issues: Vec<ParseIssue>,
}

impl ParseReport {
    fn drop_row(&mut self, line: u64, person_id: Option<&str>, reason: impl Into<String>) {
        self.rows_dropped += 1;
        self.issues.push(ParseIssue {
            line: Some(line),
            person_id: person_id.map(str::to_string),
            reason: reason.into(),
        });
    }

    fn drop_record(&mut self, person_id: &str, reason: impl Into<String>) {
        self.records_dropped += 1;
        self.issues.push(ParseIssue {
            line: None,
            person_id: Some(person_id.to_string()),
            reason: reason.into(),
        });
    }
}

struct PendingRecord {
    person_id: String,
    weight: f64,
    attributes: BTreeMap<String, String>,
    entries: Vec<DiaryEntry>,
    inconsistent: Option<String>,
}

/// Parses the diary CSV dialect: header
/// `person_id,weight,start_min,duration_min,code,attr:*`, one entry per row.
///
/// Bad rows are dropped; persons whose entries overlap or whose weight and
/// attributes disagree between rows are dropped whole. A malformed header is
/// the only fatal condition.
pub fn parse_diaries<R: Read>(source: R, code_map: &ActivityCodeMap) -> Result<(Vec<DiaryRecord>, ParseReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let attr_columns = check_header(&headers)?;

    let mut report = ParseReport::default();
    let mut order: Vec<PendingRecord> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != headers.len() {
            report.drop_row(
                line,
                row.get(0),
                format!("expected {} fields, found {}", headers.len(), row.len()),
            );
            continue;
        }
        let person_id = &row[0];
        if person_id.is_empty() {
            report.drop_row(line, None, "empty person_id");
            continue;
        }
        let parsed = parse_row(&row).and_then(|(weight, start, duration)| {
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(format!("invalid weight {weight}"));
            }
            if duration < 0 {
                return Err(format!("negative duration {duration}"));
            }
            if duration == 0 {
                return Err("zero duration".to_string());
            }
            if !(0..DAY_MINUTES as i64).contains(&start) {
                return Err(format!("start_min {start} outside 0..1439"));
            }
            if start + duration > DAY_MINUTES as i64 {
                return Err(format!("entry {start}+{duration} extends past midnight"));
            }
            Ok((weight, start as u32, duration as u32))
        });
        let (weight, start, duration) = match parsed {
            Ok(v) => v,
            Err(reason) => {
                report.drop_row(line, Some(person_id), reason);
                continue;
            }
        };

        let attributes: BTreeMap<String, String> = attr_columns
            .iter()
            .filter(|(col, _)| !row[*col].is_empty())
            .map(|(col, key)| (key.clone(), row[*col].to_string()))
            .collect();

        let slot = *index.entry(person_id.to_string()).or_insert_with(|| {
            order.push(PendingRecord {
                person_id: person_id.to_string(),
                weight,
                attributes: attributes.clone(),
                entries: Vec::new(),
                inconsistent: None,
            });
            order.len() - 1
        });
        let pending = &mut order[slot];
        if pending.inconsistent.is_none() {
            if pending.weight != weight {
                pending.inconsistent = Some(format!("inconsistent weight at line {line}"));
            } else if pending.attributes != attributes {
                pending.inconsistent = Some(format!("inconsistent attributes at line {line}"));
            }
        }
        let code = row[4].to_string();
        pending.entries.push(DiaryEntry {
            start_min: start,
            duration_min: duration,
            class: code_map.classify(&code),
            code: Some(code),
        });
    }

    let fallback = ActivityClass::Others;
    let mut records = Vec::with_capacity(order.len());
    for mut pending in order {
        if let Some(reason) = pending.inconsistent {
            report.drop_record(&pending.person_id, reason);
            continue;
        }
        pending.entries.sort_by_key(|e| e.start_min);
        if let Err(reason) = check_entries(&pending.entries) {
            report.drop_record(&pending.person_id, reason);
            continue;
        }
        records.push(DiaryRecord {
            person_id: pending.person_id,
            sample_weight: pending.weight,
            entries: fill_gaps(pending.entries, fallback),
            attributes: pending.attributes,
        });
    }
    report.records_kept = records.len();
    Ok((records, report))
}

fn check_header(headers: &csv::StringRecord) -> Result<Vec<(usize, String)>> {
    let fields: Vec<&str> = headers.iter().collect();
    if fields.len() < FIXED_COLUMNS.len() || fields[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err(Error::MalformedHeader(format!(
            "expected `{}` followed by attr:* columns, found `{}`",
            FIXED_COLUMNS.join(","),
            fields.join(",")
        )));
    }
    let mut attrs = Vec::new();
    for (i, name) in fields.iter().enumerate().skip(FIXED_COLUMNS.len()) {
        match name.strip_prefix(ATTR_PREFIX) {
            Some(key) if !key.is_empty() => attrs.push((i, key.to_string())),
            _ => {
                return Err(Error::MalformedHeader(format!(
                    "column `{name}` is not an attr:<key> column"
                )))
            }
        }
    }
    Ok(attrs)
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<(f64, i64, i64), String> {
    let weight = row[1]
        .parse::<f64>()
        .map_err(|_| format!("weight `{}` is not a number", &row[1]))?;
    let start = row[2]
        .parse::<i64>()
        .map_err(|_| format!("start_min `{}` is not an integer", &row[2]))?;
    let duration = row[3]
        .parse::<i64>()
        .map_err(|_| format!("duration_min `{}` is not an integer", &row[3]))?;
    Ok((weight, start, duration))
}

/// Entries must be sorted by start already.
fn check_entries(entries: &[DiaryEntry]) -> std::result::Result<(), String> {
    for e in entries {
        if e.duration_min == 0 || e.end_min() > DAY_MINUTES {
            return Err(format!("entry {}+{} outside the day", e.start_min, e.duration_min));
        }
    }
    for pair in entries.windows(2) {
        if pair[1].start_min < pair[0].end_min() {
            return Err(format!(
                "overlapping entries at minute {} and {}",
                pair[0].start_min, pair[1].start_min
            ));
        }
    }
    Ok(())
}

fn fill_gaps(entries: Vec<DiaryEntry>, gap_class: ActivityClass) -> Vec<DiaryEntry> {
    let mut out = Vec::with_capacity(entries.len() + 2);
    let mut cursor = 0;
    for e in entries {
        if e.start_min > cursor {
            out.push(DiaryEntry {
                start_min: cursor,
                duration_min: e.start_min - cursor,
                code: None,
                class: gap_class,
            });
        }
        cursor = e.end_min();
        out.push(e);
    }
    if cursor < DAY_MINUTES {
        out.push(DiaryEntry {
            start_min: cursor,
            duration_min: DAY_MINUTES - cursor,
            code: None,
            class: gap_class,
        });
    }
    out
}

/// Writes records in the normalized diary dialect. Gap-fill spans are omitted
/// (they are reconstructed on parse); attribute columns are the sorted union
/// of all keys.
pub fn write_diaries<W: Write>(records: &[DiaryRecord], sink: W) -> Result<()> {
    let keys: Vec<&String> = {
        let mut keys: Vec<&String> = records.iter().flat_map(|r| r.attributes.keys()).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let mut writer = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(keys.iter().map(|k| format!("{ATTR_PREFIX}{k}")));
    writer.write_record(&header)?;
    for record in records {
        for entry in &record.entries {
            let Some(code) = &entry.code else { continue };
            let mut row = vec![
                record.person_id.clone(),
                record.sample_weight.to_string(),
                entry.start_min.to_string(),
                entry.duration_min.to_string(),
                code.clone(),
            ];
            row.extend(
                keys.iter()
                    .map(|k| record.attributes.get(*k).cloned().unwrap_or_default()),
            );
            writer.write_record(&row)?;
        }
    }
    writer.flush().map_err(|e| Error::io("<diary sink>", e))?;
    Ok(())
}
