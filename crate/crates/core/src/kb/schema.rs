//! Closed-world vocabulary of the crisis-management ontology.
//!
//! Concepts follow the resource/location/people hierarchy: `Resource` splits
//! into human, material and moving resources, `Location` into rescue points and
//! shelters, and `People` into affected people and human resources.
//!
//! The predicates `has_Priority`, `has_Status`, `nb_of_Lying_Place`, `has_Name`
//! and `has_Occupied` are additions of this crate; the remaining ones follow the
//! reference triple sets for moving resources, rescue points and shelters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const CLASS_PREFIX: &str = "cmo:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Predicate {
    RdfType,
    IsAPartOf,
    NbOfSeat,
    NbOfLyingPlace,
    HasTotalPeople,
    HasTotalDisabled,
    HasAddress,
    HasCapacity,
    HasPriority,
    HasLocation,
    HasStatus,
    HasName,
    HasOccupied,
}

/// What kind of object a predicate accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    /// A schema class such as `cmo:Shelter`.
    Class,
    /// Another subject in the store.
    Identifier,
    Integer,
    Text,
    /// Text of the form `lat,lon`.
    Coordinate,
    /// One of the [`ResourceStatus`] keywords.
    Status,
}

impl Predicate {
    pub const ALL: [Predicate; 13] = [
        Predicate::RdfType,
        Predicate::IsAPartOf,
        Predicate::NbOfSeat,
        Predicate::NbOfLyingPlace,
        Predicate::HasTotalPeople,
        Predicate::HasTotalDisabled,
        Predicate::HasAddress,
        Predicate::HasCapacity,
        Predicate::HasPriority,
        Predicate::HasLocation,
        Predicate::HasStatus,
        Predicate::HasName,
        Predicate::HasOccupied,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Predicate::RdfType => "rdf:type",
            Predicate::IsAPartOf => "is_a_Part_of",
            Predicate::NbOfSeat => "nb_of_Seat",
            Predicate::NbOfLyingPlace => "nb_of_Lying_Place",
            Predicate::HasTotalPeople => "has_Total_People",
            Predicate::HasTotalDisabled => "has_Total_Disabled",
            Predicate::HasAddress => "has_Address",
            Predicate::HasCapacity => "has_capacity",
            Predicate::HasPriority => "has_Priority",
            Predicate::HasLocation => "has_Location",
            Predicate::HasStatus => "has_Status",
            Predicate::HasName => "has_Name",
            Predicate::HasOccupied => "has_Occupied",
        }
    }

    pub fn object_kind(&self) -> ObjectKind {
        match self {
            Predicate::RdfType => ObjectKind::Class,
            Predicate::IsAPartOf => ObjectKind::Identifier,
            Predicate::NbOfSeat
            | Predicate::NbOfLyingPlace
            | Predicate::HasTotalPeople
            | Predicate::HasTotalDisabled
            | Predicate::HasCapacity
            | Predicate::HasPriority
            | Predicate::HasOccupied => ObjectKind::Integer,
            Predicate::HasAddress | Predicate::HasName => ObjectKind::Text,
            Predicate::HasLocation => ObjectKind::Coordinate,
            Predicate::HasStatus => ObjectKind::Status,
        }
    }

    /// Everything except `rdf:type` and `is_a_Part_of` holds at most one value
    /// per subject.
    pub fn is_single_valued(&self) -> bool {
        !matches!(self, Predicate::RdfType | Predicate::IsAPartOf)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predicate {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predicate::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

impl PartialOrd for Predicate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Predicate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    Resource,
    HumanResource,
    MaterialResource,
    MovingResource,
    Driver,
    Vehicle,
    Minibus,
    Minivan,
    Van,
    Campervan,
    Suv,
    Berline,
    Boat,
    OtherVehicle,
    Location,
    RescuePoint,
    Shelter,
    People,
    AffectedPeople,
}

impl Class {
    pub const ALL: [Class; 19] = [
        Class::Resource,
        Class::HumanResource,
        Class::MaterialResource,
        Class::MovingResource,
        Class::Driver,
        Class::Vehicle,
        Class::Minibus,
        Class::Minivan,
        Class::Van,
        Class::Campervan,
        Class::Suv,
        Class::Berline,
        Class::Boat,
        Class::OtherVehicle,
        Class::Location,
        Class::RescuePoint,
        Class::Shelter,
        Class::People,
        Class::AffectedPeople,
    ];

    pub fn local_name(&self) -> &'static str {
        match self {
            Class::Resource => "Resource",
            Class::HumanResource => "HumanResource",
            Class::MaterialResource => "MaterialResource",
            Class::MovingResource => "MovingResource",
            Class::Driver => "Driver",
            Class::Vehicle => "Vehicle",
            Class::Minibus => "Minibus",
            Class::Minivan => "Minivan",
            Class::Van => "Van",
            Class::Campervan => "Campervan",
            Class::Suv => "SUV",
            Class::Berline => "Berline",
            Class::Boat => "Boat",
            Class::OtherVehicle => "OtherVehicle",
            Class::Location => "Location",
            Class::RescuePoint => "RescuePoint",
            Class::Shelter => "Shelter",
            Class::People => "People",
            Class::AffectedPeople => "AffectedPeople",
        }
    }

    pub fn iri(&self) -> String {
        format!("{CLASS_PREFIX}{}", self.local_name())
    }

    pub fn from_iri(iri: &str) -> Option<Class> {
        let local = iri.strip_prefix(CLASS_PREFIX)?;
        Class::ALL.into_iter().find(|c| c.local_name() == local)
    }

    pub fn parents(&self) -> &'static [Class] {
        match self {
            Class::Resource | Class::Location | Class::People => &[],
            Class::HumanResource => &[Class::Resource, Class::People],
            Class::MaterialResource | Class::MovingResource => &[Class::Resource],
            Class::Driver => &[Class::HumanResource],
            Class::Vehicle => &[Class::MaterialResource],
            Class::Minibus
            | Class::Minivan
            | Class::Van
            | Class::Campervan
            | Class::Suv
            | Class::Berline
            | Class::Boat
            | Class::OtherVehicle => &[Class::Vehicle],
            Class::RescuePoint | Class::Shelter => &[Class::Location],
            Class::AffectedPeople => &[Class::People],
        }
    }

    /// Reflexive, transitive subclass test.
    pub fn is_a(&self, ancestor: Class) -> bool {
        *self == ancestor || self.parents().iter().any(|p| p.is_a(ancestor))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VehicleClass {
    Minibus,
    Minivan,
    Van,
    Campervan,
    #[serde(rename = "SUV")]
    Suv,
    Berline,
    Boat,
    Other,
}

impl VehicleClass {
    pub fn class(&self) -> Class {
        match self {
            VehicleClass::Minibus => Class::Minibus,
            VehicleClass::Minivan => Class::Minivan,
            VehicleClass::Van => Class::Van,
            VehicleClass::Campervan => Class::Campervan,
            VehicleClass::Suv => Class::Suv,
            VehicleClass::Berline => Class::Berline,
            VehicleClass::Boat => Class::Boat,
            VehicleClass::Other => Class::OtherVehicle,
        }
    }

    /// Maps a vehicle subclass back; `cmo:Vehicle` itself counts as `Other`.
    pub fn from_class(class: Class) -> Option<VehicleClass> {
        Some(match class {
            Class::Minibus => VehicleClass::Minibus,
            Class::Minivan => VehicleClass::Minivan,
            Class::Van => VehicleClass::Van,
            Class::Campervan => VehicleClass::Campervan,
            Class::Suv => VehicleClass::Suv,
            Class::Berline => VehicleClass::Berline,
            Class::Boat => VehicleClass::Boat,
            Class::OtherVehicle | Class::Vehicle => VehicleClass::Other,
            _ => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            VehicleClass::Other => "Other",
            other => other.class().local_name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResourceStatus {
    #[default]
    Available,
    Unavailable,
    Dispatched,
}

impl ResourceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResourceStatus::Available => "available",
            ResourceStatus::Unavailable => "unavailable",
            ResourceStatus::Dispatched => "dispatched",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "available" => Some(ResourceStatus::Available),
            "unavailable" => Some(ResourceStatus::Unavailable),
            "dispatched" => Some(ResourceStatus::Dispatched),
            _ => None,
        }
    }
}
