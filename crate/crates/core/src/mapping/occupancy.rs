use std::collections::HashMap;
use std::io::{Read, Write};

use crate::activity::{ActivityClass, NUM_CLASSES, STEPS};
use crate::error::{Error, Result};

/// Expected occupants per (step, building, class), plus the mass that could
/// not be placed at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    building_ids: Vec<String>,
    index: HashMap<String, usize>,
    /// `[(step * buildings + building) * NUM_CLASSES + class]`
    counts: Vec<f64>,
    /// Mass of classes that are never placed (travel).
    unplaced_travel: Vec<[f64; NUM_CLASSES]>,
    /// Mass left over after every eligible building reached capacity.
    unplaced_overflow: Vec<[f64; NUM_CLASSES]>,
    total_population: f64,
}

impl OccupancyField {
    pub(crate) fn zeroed(building_ids: Vec<String>, total_population: f64) -> Self {
        let index = building_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = building_ids.len();
        Self {
            building_ids,
            index,
            counts: vec![0.0; STEPS * n * NUM_CLASSES],
            unplaced_travel: vec![[0.0; NUM_CLASSES]; STEPS],
            unplaced_overflow: vec![[0.0; NUM_CLASSES]; STEPS],
            total_population,
        }
    }

    fn offset(&self, step: usize, building: usize) -> usize {
        (step * self.building_ids.len() + building) * NUM_CLASSES
    }

    pub(crate) fn cell_mut(&mut self, step: usize, building: usize) -> &mut [f64] {
        let o = self.offset(step, building);
        &mut self.counts[o..o + NUM_CLASSES]
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [f64] {
        &mut self.counts
    }

    pub(crate) fn set_unplaced(&mut self, step: usize, travel: [f64; NUM_CLASSES], overflow: [f64; NUM_CLASSES]) {
        self.unplaced_travel[step] = travel;
        self.unplaced_overflow[step] = overflow;
    }

    pub fn building_ids(&self) -> &[String] {
        &self.building_ids
    }

    pub fn building_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn total_population(&self) -> f64 {
        self.total_population
    }

    /// Per-class occupants of one building at one step.
    pub fn cell(&self, step: usize, building: usize) -> &[f64] {
        let o = self.offset(step, building);
        &self.counts[o..o + NUM_CLASSES]
    }

    pub fn count(&self, step: usize, building_id: &str, class: ActivityClass) -> f64 {
        self.building_index(building_id)
            .map_or(0.0, |b| self.cell(step, b)[class.index()])
    }

    pub fn building_total(&self, step: usize, building: usize) -> f64 {
        self.cell(step, building).iter().sum()
    }

    /// Occupants placed in buildings at a step.
    pub fn placed_total(&self, step: usize) -> f64 {
        let n = self.building_ids.len() * NUM_CLASSES;
        self.counts[step * n..(step + 1) * n].iter().sum()
    }

    pub fn unplaced_travel(&self, step: usize) -> &[f64; NUM_CLASSES] {
        &self.unplaced_travel[step]
    }

    pub fn unplaced_overflow(&self, step: usize) -> &[f64; NUM_CLASSES] {
        &self.unplaced_overflow[step]
    }

    pub fn unplaced_total(&self, step: usize) -> f64 {
        self.unplaced_travel[step].iter().sum::<f64>() + self.unplaced_overflow[step].iter().sum::<f64>()
    }

    /// Largest-remainder integer rounding of one step for display. The
    /// integers sum to the rounded placed total; ties go to the lower
    /// (building, class) position.
    pub fn rounded_step(&self, step: usize) -> Vec<[u64; NUM_CLASSES]> {
        let n = self.building_ids.len();
        let cells: Vec<f64> = (0..n).flat_map(|b| self.cell(step, b).to_vec()).collect();
        let target = cells.iter().sum::<f64>().round() as u64;
        let mut ints: Vec<u64> = cells.iter().map(|v| v.floor() as u64).collect();
        let mut remaining = target.saturating_sub(ints.iter().sum());
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = cells[a] - cells[a].floor();
            let rb = cells[b] - cells[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if remaining == 0 {
                break;
            }
            ints[i] += 1;
            remaining -= 1;
        }
        ints.chunks(NUM_CLASSES)
            .map(|c| c.try_into().expect("chunk of NUM_CLASSES"))
            .collect()
    }

    /// Writes `t,building_id,class,expected_count` for every non-zero count,
    /// ordered by step, building id, then class.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut order: Vec<usize> = (0..self.building_ids.len()).collect();
        order.sort_by(|&a, &b| self.building_ids[a].cmp(&self.building_ids[b]));
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["t", "building_id", "class", "expected_count"])?;
        for t in 0..STEPS {
            for &b in &order {
                for (k, v) in self.cell(t, b).iter().enumerate() {
                    if *v != 0.0 {
                        w.write_record([
                            t.to_string(),
                            self.building_ids[b].clone(),
                            ActivityClass::ALL[k].label().to_string(),
                            v.to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<occupancy sink>", e))?;
        Ok(())
    }

    /// Writes `t,class,reason,count` for non-zero unplaced mass, with reason
    /// `travel` or `overflow`.
    pub fn write_unplaced_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["t", "class", "reason", "count"])?;
        for t in 0..STEPS {
            for (reason, values) in [
                ("travel", &self.unplaced_travel[t]),
                ("overflow", &self.unplaced_overflow[t]),
            ] {
                for (k, v) in values.iter().enumerate() {
                    if *v != 0.0 {
                        w.write_record([
                            t.to_string(),
                            ActivityClass::ALL[k].label().to_string(),
                            reason.to_string(),
                            v.to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<unplaced sink>", e))?;
        Ok(())
    }

    /// Rebuilds a field from the two CSV exports and the building id list.
    pub fn read_csv<R1: Read, R2: Read>(
        counts: R1,
        unplaced: R2,
        building_ids: Vec<String>,
        total_population: f64,
    ) -> Result<Self> {
        let mut field = Self::zeroed(building_ids, total_population);
        let mut r = csv::Reader::from_reader(counts);
        if r.headers()?.iter().collect::<Vec<_>>() != ["t", "building_id", "class", "expected_count"] {
            return Err(Error::MalformedHeader(
                "occupancy header must be `t,building_id,class,expected_count`".into(),
            ));
        }
        for rec in r.records() {
            let rec = rec?;
            let loc = format!("occupancy line {}", rec.position().map_or(0, |p| p.line()));
            let t = parse_step(&rec[0], &loc)?;
            let b = field
                .building_index(&rec[1])
                .ok_or_else(|| Error::invalid(&loc, format!("unknown building `{}`", &rec[1])))?;
            let class: ActivityClass = rec[2].parse()?;
            let v: f64 = rec[3].parse().map_err(|_| Error::invalid(&loc, "bad expected_count"))?;
            field.cell_mut(t, b)[class.index()] = v;
        }
        let mut r = csv::Reader::from_reader(unplaced);
        if r.headers()?.iter().collect::<Vec<_>>() != ["t", "class", "reason", "count"] {
            return Err(Error::MalformedHeader(
                "unplaced header must be `t,class,reason,count`".into(),
            ));
        }
        for rec in r.records() {
            let rec = rec?;
            let loc = format!("unplaced line {}", rec.position().map_or(0, |p| p.line()));
            let t = parse_step(&rec[0], &loc)?;
            let class: ActivityClass = rec[1].parse()?;
            let v: f64 = rec[3].parse().map_err(|_| Error::invalid(&loc, "bad count"))?;
            match &rec[2] {
                "travel" => field.unplaced_travel[t][class.index()] = v,
                "overflow" => field.unplaced_overflow[t][class.index()] = v,
                other => return Err(Error::invalid(loc, format!("unknown reason `{other}`"))),
            }
        }
        Ok(field)
    }
}

fn parse_step(s: &str, loc: &str) -> Result<usize> {
    s.parse::<usize>()
        .ok()
        .filter(|t| *t < STEPS)
        .ok_or_else(|| Error::invalid(loc, format!("bad step `{s}`")))
}
