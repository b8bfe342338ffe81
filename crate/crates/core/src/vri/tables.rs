use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::activity::{ActivityClass, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rating {
    pub criticality: u8,
    pub relevance: u8,
}

/// Criticality and electricity relevance of each activity class, 1 to 5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<ActivityClass, Rating>",
    into = "BTreeMap<ActivityClass, Rating>"
)]
pub struct ActivityVulnerabilityTable {
    ratings: [Rating; NUM_CLASSES],
}

impl ActivityVulnerabilityTable {
    pub fn new(ratings: [Rating; NUM_CLASSES]) -> Result<Self> {
        for (class, r) in ActivityClass::ALL.iter().zip(&ratings) {
            for (name, v) in [("criticality", r.criticality), ("relevance", r.relevance)] {
                if !(1..=5).contains(&v) {
                    return Err(Error::InvalidWeights(format!("{class} {name} {v} outside 1..=5")));
                }
            }
        }
        Ok(Self { ratings })
    }

    pub fn rating(&self, class: ActivityClass) -> Rating {
        self.ratings[class.index()]
    }
}

impl Default for ActivityVulnerabilityTable {
    fn default() -> Self {
        let pairs = [(5, 5), (5, 2), (3, 4), (3, 3), (2, 3), (3, 3), (1, 5), (2, 1)];
        Self::new(pairs.map(|(criticality, relevance)| Rating { criticality, relevance }))
            .expect("default ratings are in range")
    }
}

impl TryFrom<BTreeMap<ActivityClass, Rating>> for ActivityVulnerabilityTable {
    type Error = Error;

    fn try_from(map: BTreeMap<ActivityClass, Rating>) -> Result<Self> {
        let mut ratings = [Rating {
            criticality: 1,
            relevance: 1,
        }; NUM_CLASSES];
        for class in ActivityClass::ALL {
            ratings[class.index()] = *map
                .get(&class)
                .ok_or_else(|| Error::InvalidWeights(format!("no rating for {class}")))?;
        }
        Self::new(ratings)
    }
}

impl From<ActivityVulnerabilityTable> for BTreeMap<ActivityClass, Rating> {
    fn from(t: ActivityVulnerabilityTable) -> Self {
        ActivityClass::ALL.into_iter().zip(t.ratings).collect()
    }
}

/// How criticality and relevance combine into one per-class factor in [1, 5].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    #[default]
    Geometric,
    Arithmetic,
}

impl CombineMode {
    pub fn combine(self, r: Rating) -> f64 {
        let (c, v) = (f64::from(r.criticality), f64::from(r.relevance));
        match self {
            CombineMode::Geometric => (c * v).sqrt(),
            CombineMode::Arithmetic => (c + v) / 2.0,
        }
    }
}

/// Aspect weights `(q_demographic, q_activity, q_building_env)`, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct VRIWeights {
    q: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    demographic: f64,
    activity: f64,
    building_env: f64,
}

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl VRIWeights {
    pub fn new(demographic: f64, activity: f64, building_env: f64) -> Result<Self> {
        let q = [demographic, activity, building_env];
        check_components(&q)?;
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights {q:?} sum to {sum}, expected 1 (use VRIWeights::normalized to rescale)"
            )));
        }
        Ok(Self { q })
    }

    /// Divides non-negative raw weights by their sum.
    pub fn normalized(demographic: f64, activity: f64, building_env: f64) -> Result<Self> {
        let q = [demographic, activity, building_env];
        check_components(&q)?;
        let sum: f64 = q.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        Ok(Self { q: q.map(|v| v / sum) })
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.q
    }

    pub fn demographic(&self) -> f64 {
        self.q[0]
    }

    pub fn activity(&self) -> f64 {
        self.q[1]
    }

    pub fn building_env(&self) -> f64 {
        self.q[2]
    }
}

fn check_components(q: &[f64; 3]) -> Result<()> {
    if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weights {q:?} must be finite and non-negative"
        )));
    }
    Ok(())
}

impl Default for VRIWeights {
    fn default() -> Self {
        Self { q: [0.4, 0.35, 0.25] }
    }
}

impl TryFrom<RawWeights> for VRIWeights {
    type Error = Error;
    fn try_from(r: RawWeights) -> Result<Self> {
        Self::new(r.demographic, r.activity, r.building_env)
    }
}

impl From<VRIWeights> for RawWeights {
    fn from(w: VRIWeights) -> Self {
        RawWeights {
            demographic: w.q[0],
            activity: w.q[1],
            building_env: w.q[2],
        }
    }
}

/// Weights on demographic share columns, keyed by column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemographicWeights(pub BTreeMap<String, f64>);

impl Default for DemographicWeights {
    fn default() -> Self {
        Self(
            [
                ("share_over_65", 0.30),
                ("share_under_5", 0.15),
                ("share_below_poverty", 0.20),
                ("share_disability", 0.20),
                ("share_no_vehicle", 0.15),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        )
    }
}

/// Weights on the building environment attribute scores. Keys left out of a
/// config file weigh zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvWeights {
    #[serde(default)]
    pub year_built: f64,
    #[serde(default)]
    pub floor_area_m2: f64,
    #[serde(default)]
    pub construction: f64,
    #[serde(default)]
    pub glazing: f64,
    #[serde(default)]
    pub energy_structure: f64,
}

impl EnvWeights {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.year_built,
            self.floor_area_m2,
            self.construction,
            self.glazing,
            self.energy_structure,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "environment weights {self:?} must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

impl Default for EnvWeights {
    fn default() -> Self {
        Self {
            year_built: 0.2,
            floor_area_m2: 0.1,
            construction: 0.2,
            glazing: 0.15,
            energy_structure: 0.35,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_activity_ratings() {
        let t = ActivityVulnerabilityTable::default();
        let r = t.rating(ActivityClass::PersonalPreference);
        assert_eq!((r.criticality, r.relevance), (1, 5));
        let r = t.rating(ActivityClass::BiologicalNeeds);
        assert_eq!((r.criticality, r.relevance), (5, 2));
    }

    #[test]
    fn table_toml_round_trip_and_range() {
        let t = ActivityVulnerabilityTable::default();
        let text = toml::to_string(&t).unwrap();
        assert_eq!(toml::from_str::<ActivityVulnerabilityTable>(&text).unwrap(), t);
        let bad = text.replacen("criticality = 5", "criticality = 6", 1);
        assert!(toml::from_str::<ActivityVulnerabilityTable>(&bad).is_err());
    }

    #[test]
    fn combine_modes() {
        let r = Rating {
            criticality: 1,
            relevance: 5,
        };
        assert!((CombineMode::Geometric.combine(r) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(CombineMode::Arithmetic.combine(r), 3.0);
        for k in 1..=5 {
            let r = Rating {
                criticality: k,
                relevance: k,
            };
            assert_eq!(CombineMode::Geometric.combine(r), f64::from(k));
        }
    }

    #[test]
    fn weights_validation() {
        assert!(VRIWeights::new(0.5, 0.5, 0.1).is_err());
        assert!(VRIWeights::new(-0.1, 0.6, 0.5).is_err());
        assert!(VRIWeights::normalized(0.0, 0.0, 0.0).is_err());
        let w = VRIWeights::normalized(2.0, 2.0, 1.0).unwrap();
        assert_eq!(w.as_array(), [0.4, 0.4, 0.2]);
        assert_eq!(VRIWeights::default().as_array(), [0.4, 0.35, 0.25]);
    }

    #[test]
    fn env_weights_subset_defaults_to_zero() {
        let w: EnvWeights = toml::from_str("glazing = 1.0").unwrap();
        assert_eq!(w.as_array(), [0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(toml::from_str::<EnvWeights>("roof = 1.0").is_err());
    }
}
