use crate::activity::{step_bounds, ActivityClass, STEPS};
use crate::ingest::DiaryRecord;

/// One class per 15-minute slot of a day.
pub type ActivitySequence = [ActivityClass; STEPS];

/// Assigns each slot the class that occupies most of its minutes. Ties go to
/// the entry that starts earlier. Uncovered slots (only possible for records
/// built by hand without gap filling) fall back to `Others`.
pub fn discretize(record: &DiaryRecord) -> ActivitySequence {
    let mut out = [ActivityClass::Others; STEPS];
    let mut entries: Vec<_> = record.entries.iter().collect();
    entries.sort_by_key(|e| e.start_min);
    let mut first = 0;
    for (step, slot) in out.iter_mut().enumerate() {
        let (lo, hi) = step_bounds(step);
        while first < entries.len() && entries[first].end_min() <= lo {
            first += 1;
        }
        let mut best: Option<(u32, ActivityClass)> = None;
        for e in &entries[first..] {
            if e.start_min >= hi {
                break;
            }
            let overlap = e.end_min().min(hi) - e.start_min.max(lo);
            if best.is_none_or(|(b, _)| overlap > b) {
                best = Some((overlap, e.class));
            }
        }
        if let Some((_, class)) = best {
            *slot = class;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActivityClass::*;

    fn record(spans: &[(u32, u32, ActivityClass)]) -> DiaryRecord {
        DiaryRecord::from_spans("p", 1.0, spans, Others).unwrap()
    }

    /// Per-minute majority vote with earlier-start tie-break.
    fn brute_force(record: &DiaryRecord) -> ActivitySequence {
        let mut minute_owner = vec![None; 1440];
        for (i, e) in record.entries.iter().enumerate() {
            for m in e.start_min..e.end_min() {
                minute_owner[m as usize] = Some(i);
            }
        }
        let mut out = [Others; STEPS];
        for (t, slot) in out.iter_mut().enumerate() {
            let mut counts = vec![0u32; record.entries.len()];
            for m in t * 15..(t + 1) * 15 {
                if let Some(i) = minute_owner[m] {
                    counts[i] += 1;
                }
            }
            let best = counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .max_by(|a, b| {
                    a.1.cmp(b.1)
                        .then(record.entries[b.0].start_min.cmp(&record.entries[a.0].start_min))
                })
                .map(|(i, _)| i);
            if let Some(i) = best {
                *slot = record.entries[i].class;
            }
        }
        out
    }

    #[test]
    fn all_day_single_class() {
        let seq = discretize(&record(&[(0, 1440, BiologicalNeeds)]));
        assert!(seq.iter().all(|c| *c == BiologicalNeeds));
    }

    #[test]
    fn exact_boundary_at_slot_32() {
        let seq = discretize(&record(&[(0, 480, BiologicalNeeds), (480, 960, Working)]));
        assert!(seq[..32].iter().all(|c| *c == BiologicalNeeds));
        assert!(seq[32..].iter().all(|c| *c == Working));
    }

    #[test]
    fn switch_at_minute_487_goes_to_later_class() {
        let r = record(&[(0, 487, BiologicalNeeds), (487, 953, Working)]);
        let seq = discretize(&r);
        assert_eq!(seq[32], Working);
        assert_eq!(seq[31], BiologicalNeeds);
        assert_eq!(seq, brute_force(&r));
    }

    #[test]
    fn tie_goes_to_earlier_entry() {
        // slot 0 split 5/5/5 between three entries
        let r = record(&[(0, 5, Working), (5, 5, Education), (10, 1430, BiologicalNeeds)]);
        assert_eq!(discretize(&r)[0], Working);
        assert_eq!(discretize(&r), brute_force(&r));
    }

    #[test]
    fn matches_brute_force_on_ragged_day() {
        let r = record(&[
            (0, 397, BiologicalNeeds),
            (397, 23, HouseholdManagement),
            (420, 38, Others),
            (458, 541, Working),
            (999, 7, Others),
            (1006, 52, PersonalObligations),
            (1100, 190, PersonalPreference),
            (1290, 150, BiologicalNeeds),
        ]);
        assert_eq!(discretize(&r), brute_force(&r));
    }
}
