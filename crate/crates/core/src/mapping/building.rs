use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geo::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingType {
    Residential,
    Business,
    Mercantile,
    PublicService,
    Assembly,
    Education,
}

impl BuildingType {
    pub const ALL: [BuildingType; 6] = [
        BuildingType::Residential,
        BuildingType::Business,
        BuildingType::Mercantile,
        BuildingType::PublicService,
        BuildingType::Assembly,
        BuildingType::Education,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuildingType::Residential => "residential",
            BuildingType::Business => "business",
            BuildingType::Mercantile => "mercantile",
            BuildingType::PublicService => "public_service",
            BuildingType::Assembly => "assembly",
            BuildingType::Education => "education",
        }
    }

    /// Types whose occupancy is bounded by a declared capacity.
    pub fn is_capacity_typed(self) -> bool {
        !matches!(self, BuildingType::Residential | BuildingType::Business)
    }
}

impl fmt::Display for BuildingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuildingType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BuildingType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown building type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchoolLevel {
    Primary,
    Middle,
    High,
    College,
}

impl SchoolLevel {
    pub const ALL: [SchoolLevel; 4] = [
        SchoolLevel::Primary,
        SchoolLevel::Middle,
        SchoolLevel::High,
        SchoolLevel::College,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchoolLevel::Primary => "primary",
            SchoolLevel::Middle => "middle",
            SchoolLevel::High => "high",
            SchoolLevel::College => "college",
        }
    }
}

impl FromStr for SchoolLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchoolLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown school_level `{s}`"))
    }
}

/// Type-specific attributes driving population allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Allocation {
    Residential { bedrooms: u32, vacancy_rate: f64 },
    Business { gross_floor_area: f64, worker_density: f64 },
    Capacity { capacity: f64 },
    Education { capacity: f64, school_level: SchoolLevel },
}

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(concat!("unknown ", stringify!($name), " `{}`"), s)),
                }
            }
        }
    };
}

string_enum!(Construction {
    LightFrame => "light_frame",
    Wood => "wood",
    Masonry => "masonry",
    Concrete => "concrete",
    Steel => "steel",
});

string_enum!(Glazing {
    Single => "single",
    Double => "double",
    Triple => "triple",
});

string_enum!(EnergyStructure {
    AllElectric => "all_electric",
    Mixed => "mixed",
    NonElectric => "non_electric",
});

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub year_built: i32,
    pub floor_area_m2: f64,
    pub construction: Construction,
    pub glazing: Glazing,
    pub energy_structure: EnergyStructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub building_id: String,
    pub btype: BuildingType,
    pub centroid: Point,
    pub zone_id: String,
    pub allocation: Allocation,
    pub environment: Environment,
}

impl Building {
    /// Upper bound on occupants for capacity-typed buildings.
    pub fn capacity(&self) -> Option<f64> {
        match self.allocation {
            Allocation::Capacity { capacity } | Allocation::Education { capacity, .. } => Some(capacity),
            _ => None,
        }
    }

    pub fn school_level(&self) -> Option<SchoolLevel> {
        match self.allocation {
            Allocation::Education { school_level, .. } => Some(school_level),
            _ => None,
        }
    }

    /// Checks that the allocation variant matches the type and ranges hold.
    pub fn validate(&self) -> Result<(), String> {
        let ok_variant = matches!(
            (self.btype, &self.allocation),
            (BuildingType::Residential, Allocation::Residential { .. })
                | (BuildingType::Business, Allocation::Business { .. })
                | (
                    BuildingType::Mercantile | BuildingType::PublicService | BuildingType::Assembly,
                    Allocation::Capacity { .. }
                )
                | (BuildingType::Education, Allocation::Education { .. })
        );
        if !ok_variant {
            return Err(format!("allocation attributes do not match type {}", self.btype));
        }
        match self.allocation {
            Allocation::Residential { vacancy_rate, .. } => {
                if !(0.0..=1.0).contains(&vacancy_rate) {
                    return Err(format!("vacancy_rate {vacancy_rate} outside [0,1]"));
                }
            }
            Allocation::Business {
                gross_floor_area,
                worker_density,
            } => {
                if !(gross_floor_area.is_finite() && gross_floor_area > 0.0) {
                    return Err(format!("gross_floor_area {gross_floor_area} must be > 0"));
                }
                if !(worker_density.is_finite() && worker_density > 0.0) {
                    return Err(format!("worker_density {worker_density} must be > 0"));
                }
            }
            Allocation::Capacity { capacity } | Allocation::Education { capacity, .. } => {
                if !(capacity.is_finite() && capacity >= 0.0) {
                    return Err(format!("negative capacity {capacity}"));
                }
            }
        }
        let env = &self.environment;
        if !(env.floor_area_m2.is_finite() && env.floor_area_m2 >= 0.0) {
            return Err(format!("negative floor_area_m2 {}", env.floor_area_m2));
        }
        if !(self.centroid.x.is_finite() && self.centroid.y.is_finite()) {
            return Err("centroid is not finite".to_string());
        }
        Ok(())
    }
}
