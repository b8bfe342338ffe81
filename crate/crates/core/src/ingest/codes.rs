use serde::{Deserialize, Serialize};

use crate::activity::ActivityClass;
use crate::error::{Error, Result};

/// Ordered first-match prefix table collapsing raw diary codes into the
/// eight activity classes. The last rule must have an empty prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, ActivityClass)>", into = "Vec<(String, ActivityClass)>")]
pub struct ActivityCodeMap {
    rules: Vec<(String, ActivityClass)>,
}

impl ActivityCodeMap {
    pub fn new(rules: Vec<(String, ActivityClass)>) -> Result<Self> {
        match rules.last() {
            Some((prefix, _)) if prefix.is_empty() => Ok(Self { rules }),
            _ => Err(Error::MissingCatchAll),
        }
    }

    pub fn rules(&self) -> &[(String, ActivityClass)] {
        &self.rules
    }

    pub fn classify(&self, code: &str) -> ActivityClass {
        let code = code.trim();
        self.rules
            .iter()
            .find(|(prefix, _)| code.starts_with(prefix.as_str()))
            .map(|(_, class)| *class)
            .expect("catch-all rule guarantees a match")
    }

    /// Class assigned to codes no other rule matches.
    pub fn fallback(&self) -> ActivityClass {
        self.rules.last().expect("non-empty").1
    }

    /// Default table for ATUS-style six-digit lexicon codes (tier 1/2 prefixes).
    pub fn atus_default() -> Self {
        use ActivityClass::*;
        let rules = [
            ("0103", EssentialHealth), // health-related self care
            ("0105", EssentialHealth), // personal emergencies
            ("01", BiologicalNeeds),   // sleeping, grooming, personal activities
            ("02", HouseholdManagement),
            ("03", PersonalObligations), // caring for household members
            ("04", PersonalObligations), // caring for non-household members
            ("05", Working),
            ("06", Education),
            ("07", PersonalObligations), // consumer purchases
            ("0804", EssentialHealth),   // medical and care services
            ("08", PersonalObligations), // financial, personal care services
            ("09", HouseholdManagement), // household services
            ("10", PersonalObligations), // government services, civic obligations
            ("11", BiologicalNeeds),     // eating and drinking
            ("12", PersonalPreference),  // socializing, relaxing, leisure
            ("13", PersonalPreference),  // sports, exercise
            ("14", PersonalPreference),  // religious activities
            ("15", PersonalObligations), // volunteering
            ("16", PersonalPreference),  // telephone calls
            ("18", Others),              // traveling
            ("", Others),
        ];
        Self {
            rules: rules.iter().map(|(p, c)| (p.to_string(), *c)).collect(),
        }
    }
}

impl Default for ActivityCodeMap {
    fn default() -> Self {
        Self::atus_default()
    }
}

impl TryFrom<Vec<(String, ActivityClass)>> for ActivityCodeMap {
    type Error = Error;

    fn try_from(rules: Vec<(String, ActivityClass)>) -> Result<Self> {
        Self::new(rules)
    }
}

impl From<ActivityCodeMap> for Vec<(String, ActivityClass)> {
    fn from(map: ActivityCodeMap) -> Self {
        map.rules
    }
}
