//! Activity classes and the 15-minute day grid shared by every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of slots in a simulated day.
pub const STEPS: usize = 96;
/// Width of one slot in minutes.
pub const STEP_MINUTES: u32 = 15;
/// Minutes in a day.
pub const DAY_MINUTES: u32 = 1440;
/// Number of activity classes.
pub const NUM_CLASSES: usize = 8;

const _: () = assert!(STEPS as u32 * STEP_MINUTES == DAY_MINUTES);

/// The eight canonical activity classes, in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActivityClass {
    /// c01: essential health activity
    EssentialHealth,
    /// c02: biological needs (eating, sleeping)
    BiologicalNeeds,
    /// c03: working
    Working,
    /// c04: education
    Education,
    /// c05: household management
    HouseholdManagement,
    /// c06: personal obligations (shopping, banking, childcare)
    PersonalObligations,
    /// c07: personal preference (leisure)
    PersonalPreference,
    /// c08: others, including travel outside
    Others,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; NUM_CLASSES] = [
        ActivityClass::EssentialHealth,
        ActivityClass::BiologicalNeeds,
        ActivityClass::Working,
        ActivityClass::Education,
        ActivityClass::HouseholdManagement,
        ActivityClass::PersonalObligations,
        ActivityClass::PersonalPreference,
        ActivityClass::Others,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Short label, `c01` through `c08`.
    pub fn label(self) -> &'static str {
        ["c01", "c02", "c03", "c04", "c05", "c06", "c07", "c08"][self.index()]
    }

    pub fn description(self) -> &'static str {
        match self {
            ActivityClass::EssentialHealth => "essential health activity",
            ActivityClass::BiologicalNeeds => "biological needs",
            ActivityClass::Working => "working",
            ActivityClass::Education => "education",
            ActivityClass::HouseholdManagement => "household management",
            ActivityClass::PersonalObligations => "personal obligations",
            ActivityClass::PersonalPreference => "personal preference",
            ActivityClass::Others => "others",
        }
    }
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ActivityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        ActivityClass::ALL
            .iter()
            .copied()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

impl Serialize for ActivityClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for ActivityClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Half-open minute range `[start, end)` covered by a slot.
pub fn step_bounds(step: usize) -> (u32, u32) {
    let start = step as u32 * STEP_MINUTES;
    (start, start + STEP_MINUTES)
}

/// Minute at the middle of a slot.
pub fn step_midpoint(step: usize) -> f64 {
    step as f64 * STEP_MINUTES as f64 + STEP_MINUTES as f64 / 2.0
}

/// `HH:MM` for the start of a slot.
pub fn step_clock(step: usize) -> String {
    let (start, _) = step_bounds(step);
    format!("{:02}:{:02}", start / 60, start % 60)
}
