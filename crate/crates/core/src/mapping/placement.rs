use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mapping::BuildingType;

type Row = Vec<(BuildingType, f64)>;

/// Which building types host each activity class, with shares summing to one.
/// An empty row means the class is tracked but not placed in any building
/// (used for travel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<ActivityClass, Row>", into = "BTreeMap<ActivityClass, Row>")]
pub struct ActivityPlacementTable {
    rows: [Row; NUM_CLASSES],
}

const SHARE_TOLERANCE: f64 = 1e-9;

impl ActivityPlacementTable {
    pub fn new(rows: [Row; NUM_CLASSES]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let class = ActivityClass::ALL[i];
            if row.is_empty() {
                continue;
            }
            for (btype, share) in row {
                if !(0.0..=1.0).contains(share) {
                    return Err(Error::InvalidPlacement(format!(
                        "{class} -> {btype} share {share} outside [0,1]"
                    )));
                }
            }
            let mut types: Vec<_> = row.iter().map(|(b, _)| *b).collect();
            types.sort();
            types.dedup();
            if types.len() != row.len() {
                return Err(Error::InvalidPlacement(format!("{class} lists a building type twice")));
            }
            let sum: f64 = row.iter().map(|(_, s)| s).sum();
            if (sum - 1.0).abs() > SHARE_TOLERANCE {
                return Err(Error::InvalidPlacement(format!("{class} shares sum to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn row(&self, class: ActivityClass) -> &[(BuildingType, f64)] {
        &self.rows[class.index()]
    }

    pub fn share(&self, class: ActivityClass, btype: BuildingType) -> f64 {
        self.row(class)
            .iter()
            .find(|(b, _)| *b == btype)
            .map_or(0.0, |(_, s)| *s)
    }

    /// Classes with an empty row, whose mass stays unplaced.
    pub fn is_unplaced(&self, class: ActivityClass) -> bool {
        self.rows[class.index()].is_empty()
    }

    /// Whether any class sends a positive share to `btype`.
    pub fn hosts(&self, class: ActivityClass, btype: BuildingType) -> bool {
        self.share(class, btype) > 0.0
    }
}

impl Default for ActivityPlacementTable {
    fn default() -> Self {
        use ActivityClass::*;
        use BuildingType::*;
        let mut rows: [Row; NUM_CLASSES] = Default::default();
        rows[EssentialHealth.index()] = vec![(PublicService, 1.0)];
        rows[BiologicalNeeds.index()] = vec![(Residential, 1.0)];
        rows[Working.index()] = vec![(Business, 1.0)];
        rows[ActivityClass::Education.index()] = vec![(BuildingType::Education, 1.0)];
        rows[HouseholdManagement.index()] = vec![(Residential, 1.0)];
        rows[PersonalObligations.index()] = vec![(Mercantile, 0.6), (PublicService, 0.4)];
        rows[PersonalPreference.index()] = vec![(Assembly, 0.5), (Residential, 0.5)];
        // travel stays unplaced
        Self::new(rows).expect("default placement table is valid")
    }
}

impl TryFrom<BTreeMap<ActivityClass, Row>> for ActivityPlacementTable {
    type Error = Error;

    fn try_from(map: BTreeMap<ActivityClass, Row>) -> Result<Self> {
        let mut rows: [Row; NUM_CLASSES] = Default::default();
        for class in ActivityClass::ALL {
            rows[class.index()] = map
                .get(&class)
                .cloned()
                .ok_or_else(|| Error::InvalidPlacement(format!("no row for {class} (use [] to leave it unplaced)")))?;
        }
        Self::new(rows)
    }
}

impl From<ActivityPlacementTable> for BTreeMap<ActivityClass, Row> {
    fn from(t: ActivityPlacementTable) -> Self {
        ActivityClass::ALL.into_iter().zip(t.rows).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_shape() {
        let t = ActivityPlacementTable::default();
        assert!(t.is_unplaced(ActivityClass::Others));
        assert_eq!(
            t.share(ActivityClass::PersonalObligations, BuildingType::Mercantile),
            0.6
        );
        assert!(t.hosts(ActivityClass::PersonalPreference, BuildingType::Residential));
        assert!(!t.hosts(ActivityClass::Working, BuildingType::Residential));
    }

    #[test]
    fn rejects_bad_rows() {
        let mut rows: [Row; NUM_CLASSES] = Default::default();
        rows[0] = vec![(BuildingType::Business, 0.7)];
        assert!(ActivityPlacementTable::new(rows.clone()).is_err());
        rows[0] = vec![(BuildingType::Business, 0.5), (BuildingType::Business, 0.5)];
        assert!(ActivityPlacementTable::new(rows).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let t = ActivityPlacementTable::default();
        let text = toml::to_string(&t).unwrap();
        let back: ActivityPlacementTable = toml::from_str(&text).unwrap();
        assert_eq!(back, t);
        let missing = "c01 = [[\"public_service\", 1.0]]";
        assert!(toml::from_str::<ActivityPlacementTable>(missing).is_err());
    }
}
