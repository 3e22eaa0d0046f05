//! Typed views over the triple store.
//!
//! Materialization and validation share one inspection pass per view, so a
//! materialization can only fail for a reason `validate_consistency` also
//! reports.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schema::{Class, Predicate, ResourceStatus, VehicleClass};
use super::store::TripleStore;
use super::triple::{Term, Triple};
use crate::geo::GeoPoint;

/// A civil/volunteer driver paired with their vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingResource {
    pub id: String,
    pub driver_id: String,
    pub vehicle_id: String,
    pub vehicle_class: VehicleClass,
    /// Passenger seats, driver excluded.
    pub seats: u32,
    #[serde(default)]
    pub lying_places: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default)]
    pub status: ResourceStatus,
}

impl MovingResource {
    pub fn is_available(&self) -> bool {
        self.status == ResourceStatus::Available
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescuePoint {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
    pub nb_people: u32,
    #[serde(default)]
    pub nb_disabled: u32,
    /// 1 is the most urgent.
    #[serde(default = "default_priority")]
    pub priority: u32,
}

fn default_priority() -> u32 {
    1
}

impl RescuePoint {
    pub fn evacuees(&self) -> u32 {
        self.nb_people + self.nb_disabled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shelter {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
    pub capacity: u32,
    #[serde(default)]
    pub occupied: u32,
}

impl Shelter {
    pub fn remaining(&self) -> u32 {
        self.capacity.saturating_sub(self.occupied)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

/// The three typed views; also the shape of the entity bulk-load file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntitySet {
    #[serde(default)]
    pub moving_resources: Vec<MovingResource>,
    #[serde(default)]
    pub rescue_points: Vec<RescuePoint>,
    #[serde(default)]
    pub shelters: Vec<Shelter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    MovingResources,
    RescuePoints,
    Shelters,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entities {
    MovingResources(Vec<MovingResource>),
    RescuePoints(Vec<RescuePoint>),
    Shelters(Vec<Shelter>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ViolationKind {
    MissingProperty { property: String },
    MissingLocation,
    ConflictingValues { property: String },
    InvalidCount { property: String, value: i64 },
    PairCardinality { drivers: usize, vehicles: usize },
    UntypedPart { part: String },
    DanglingPart { target: String },
    AmbiguousType { classes: Vec<String> },
    CapacityExceeded { occupied: u32, capacity: u32 },
    InvalidPriority { value: i64 },
    EmptyRescuePoint,
    NoCapacity,
}

impl ViolationKind {
    pub fn code(&self) -> &'static str {
        match self {
            ViolationKind::MissingProperty { .. } => "missing_property",
            ViolationKind::MissingLocation => "missing_location",
            ViolationKind::ConflictingValues { .. } => "conflicting_values",
            ViolationKind::InvalidCount { .. } => "invalid_count",
            ViolationKind::PairCardinality { .. } => "pair_cardinality",
            ViolationKind::UntypedPart { .. } => "untyped_part",
            ViolationKind::DanglingPart { .. } => "dangling_part",
            ViolationKind::AmbiguousType { .. } => "ambiguous_type",
            ViolationKind::CapacityExceeded { .. } => "capacity_exceeded",
            ViolationKind::InvalidPriority { .. } => "invalid_priority",
            ViolationKind::EmptyRescuePoint => "empty_rescue_point",
            ViolationKind::NoCapacity => "no_capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub view: EntityKind,
    pub subject: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({:?})", self.subject, self.kind.code(), self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("inconsistent knowledge base: {} violation(s), first: {}", .violations.len(), .violations[0])]
pub struct ConsistencyError {
    pub violations: Vec<Violation>,
}

impl ConsistencyError {
    pub fn subjects(&self) -> BTreeSet<&str> {
        self.violations.iter().map(|v| v.subject.as_str()).collect()
    }
}

pub fn validate_consistency(store: &TripleStore) -> ConsistencyReport {
    let mut violations = inspect_moving_resources(store).1;
    violations.extend(inspect_rescue_points(store).1);
    violations.extend(inspect_shelters(store).1);
    violations.sort();
    violations.dedup();
    ConsistencyReport { violations }
}

pub fn materialize_entities(store: &TripleStore, kind: EntityKind) -> Result<Entities, ConsistencyError> {
    Ok(match kind {
        EntityKind::MovingResources => Entities::MovingResources(materialize_moving_resources(store)?),
        EntityKind::RescuePoints => Entities::RescuePoints(materialize_rescue_points(store)?),
        EntityKind::Shelters => Entities::Shelters(materialize_shelters(store)?),
    })
}

pub fn materialize_moving_resources(store: &TripleStore) -> Result<Vec<MovingResource>, ConsistencyError> {
    finish(inspect_moving_resources(store))
}

pub fn materialize_rescue_points(store: &TripleStore) -> Result<Vec<RescuePoint>, ConsistencyError> {
    finish(inspect_rescue_points(store))
}

pub fn materialize_shelters(store: &TripleStore) -> Result<Vec<Shelter>, ConsistencyError> {
    finish(inspect_shelters(store))
}

pub fn materialize_all(store: &TripleStore) -> Result<EntitySet, ConsistencyError> {
    let (moving_resources, mut violations) = inspect_moving_resources(store);
    let (rescue_points, v) = inspect_rescue_points(store);
    violations.extend(v);
    let (shelters, v) = inspect_shelters(store);
    violations.extend(v);
    if !violations.is_empty() {
        violations.sort();
        violations.dedup();
        return Err(ConsistencyError { violations });
    }
    Ok(EntitySet {
        moving_resources,
        rescue_points,
        shelters,
    })
}

fn finish<T>((items, mut violations): (Vec<T>, Vec<Violation>)) -> Result<Vec<T>, ConsistencyError> {
    if violations.is_empty() {
        Ok(items)
    } else {
        violations.sort();
        violations.dedup();
        Err(ConsistencyError { violations })
    }
}

struct Inspector<'a> {
    store: &'a TripleStore,
    view: EntityKind,
    violations: Vec<Violation>,
}

impl<'a> Inspector<'a> {
    fn new(store: &'a TripleStore, view: EntityKind) -> Self {
        Self {
            store,
            view,
            violations: Vec::new(),
        }
    }

    fn flag(&mut self, subject: &str, kind: ViolationKind) {
        self.violations.push(Violation {
            view: self.view,
            subject: subject.to_string(),
            kind,
        });
    }

    fn classes(&self, subject: &str) -> Vec<Class> {
        self.store
            .objects(subject, Predicate::RdfType)
            .filter_map(|t| t.as_id().and_then(Class::from_iri))
            .collect()
    }

    /// Flags subjects typed as more than one entity kind (or two vehicle classes).
    fn check_single_kind(&mut self, subject: &str) {
        let kinds: BTreeSet<Class> = self
            .classes(subject)
            .into_iter()
            .filter(|c| {
                matches!(c, Class::MovingResource | Class::RescuePoint | Class::Shelter | Class::Driver)
                    || c.is_a(Class::Vehicle)
            })
            .collect();
        if kinds.len() > 1 {
            let classes = kinds.iter().map(Class::iri).collect();
            self.flag(subject, ViolationKind::AmbiguousType { classes });
        }
    }

    fn single(&mut self, subject: &str, p: Predicate) -> Option<&'a Term> {
        let mut values = self.store.objects(subject, p);
        let first = values.next()?;
        if values.next().is_some() {
            self.flag(
                subject,
                ViolationKind::ConflictingValues {
                    property: p.as_str().into(),
                },
            );
            return None;
        }
        Some(first)
    }

    fn count(&mut self, subject: &str, p: Predicate) -> Option<u32> {
        let raw = self.single(subject, p)?.as_int()?;
        match u32::try_from(raw) {
            Ok(n) => Some(n),
            Err(_) => {
                self.flag(
                    subject,
                    ViolationKind::InvalidCount {
                        property: p.as_str().into(),
                        value: raw,
                    },
                );
                None
            }
        }
    }

    /// Like [`Self::count`] but flags absence. The `Err` arm means "already
    /// flagged", so callers just skip the entity.
    fn required_count(&mut self, subject: &str, p: Predicate) -> Result<u32, ()> {
        let present = self.store.objects(subject, p).next().is_some();
        if !present {
            self.flag(
                subject,
                ViolationKind::MissingProperty {
                    property: p.as_str().into(),
                },
            );
            return Err(());
        }
        self.count(subject, p).ok_or(())
    }

    fn optional_count(&mut self, subject: &str, p: Predicate, default: u32) -> Result<u32, ()> {
        if self.store.objects(subject, p).next().is_none() {
            return Ok(default);
        }
        self.count(subject, p).ok_or(())
    }

    fn text(&mut self, subject: &str, p: Predicate) -> Option<String> {
        self.single(subject, p).and_then(Term::as_text).map(str::to_string)
    }

    fn location(&mut self, subject: &str) -> Option<GeoPoint> {
        self.single(subject, Predicate::HasLocation)
            .and_then(Term::as_text)
            .and_then(|s| s.parse().ok())
    }

    fn typed_subjects(&self, class: Class) -> Vec<&'a str> {
        let iri = Term::id(class.iri());
        self.store
            .subjects_with(Predicate::RdfType, &iri)
            .collect::<Vec<_>>()
    }
}

fn inspect_moving_resources(store: &TripleStore) -> (Vec<MovingResource>, Vec<Violation>) {
    let mut ins = Inspector::new(store, EntityKind::MovingResources);
    let mut out = Vec::new();
    let resource_type = Term::id(Class::MovingResource.iri());

    for t in store.query(Default::default()).filter(|t| t.predicate == Predicate::IsAPartOf) {
        let target = t.object.as_id().unwrap_or_default();
        let typed = store.contains(&Triple::new(target, Predicate::RdfType, resource_type.clone()));
        if !typed {
            ins.flag(
                &t.subject,
                ViolationKind::DanglingPart {
                    target: target.to_string(),
                },
            );
        }
    }

    for id in ins.typed_subjects(Class::MovingResource) {
        ins.check_single_kind(id);
        let owner = Term::id(id);
        let parts: Vec<&str> = store.subjects_with(Predicate::IsAPartOf, &owner).collect();
        let mut drivers = Vec::new();
        let mut vehicles = Vec::new();
        for part in parts {
            let classes = ins.classes(part);
            if classes.iter().any(|c| c.is_a(Class::Driver)) {
                drivers.push(part);
            } else if let Some(c) = classes.iter().find(|c| c.is_a(Class::Vehicle)) {
                vehicles.push((part, *c));
            } else {
                ins.flag(id, ViolationKind::UntypedPart { part: part.to_string() });
            }
        }
        if drivers.len() != 1 || vehicles.len() != 1 {
            ins.flag(
                id,
                ViolationKind::PairCardinality {
                    drivers: drivers.len(),
                    vehicles: vehicles.len(),
                },
            );
            continue;
        }
        let driver = drivers[0];
        let (vehicle, class) = vehicles[0];
        ins.check_single_kind(driver);
        ins.check_single_kind(vehicle);

        let seats = ins.required_count(vehicle, Predicate::NbOfSeat);
        let lying = ins.optional_count(vehicle, Predicate::NbOfLyingPlace, 0);
        let status = match ins.single(id, Predicate::HasStatus) {
            Some(t) => t.as_id().and_then(ResourceStatus::parse).unwrap_or_default(),
            None => ResourceStatus::Available,
        };
        let location = if store.objects(id, Predicate::HasLocation).next().is_some() {
            ins.location(id)
        } else {
            ins.location(driver)
        };
        let address = if store.objects(id, Predicate::HasAddress).next().is_some() {
            ins.text(id, Predicate::HasAddress)
        } else {
            ins.text(driver, Predicate::HasAddress)
        };
        let (Ok(seats), Ok(lying_places)) = (seats, lying) else {
            continue;
        };
        if status == ResourceStatus::Available && seats + lying_places == 0 {
            ins.flag(id, ViolationKind::NoCapacity);
            continue;
        }
        out.push(MovingResource {
            id: id.to_string(),
            driver_id: driver.to_string(),
            vehicle_id: vehicle.to_string(),
            vehicle_class: VehicleClass::from_class(class).unwrap_or(VehicleClass::Other),
            seats,
            lying_places,
            location,
            address,
            status,
        });
    }
    (out, ins.violations)
}

fn inspect_rescue_points(store: &TripleStore) -> (Vec<RescuePoint>, Vec<Violation>) {
    let mut ins = Inspector::new(store, EntityKind::RescuePoints);
    let mut out = Vec::new();
    for id in ins.typed_subjects(Class::RescuePoint) {
        ins.check_single_kind(id);
        let people = ins.required_count(id, Predicate::HasTotalPeople);
        let disabled = ins.optional_count(id, Predicate::HasTotalDisabled, 0);
        let priority = match ins.single(id, Predicate::HasPriority).and_then(Term::as_int) {
            Some(p) if p >= 1 && p <= u32::MAX as i64 => Ok(p as u32),
            Some(p) => {
                ins.flag(id, ViolationKind::InvalidPriority { value: p });
                Err(())
            }
            None if store.objects(id, Predicate::HasPriority).next().is_some() => Err(()),
            None => Ok(1),
        };
        let address = ins.text(id, Predicate::HasAddress);
        let location = ins.location(id);
        let has_place = store.objects(id, Predicate::HasAddress).next().is_some()
            || store.objects(id, Predicate::HasLocation).next().is_some();
        if !has_place {
            ins.flag(id, ViolationKind::MissingLocation);
        }
        let (Ok(nb_people), Ok(nb_disabled), Ok(priority)) = (people, disabled, priority) else {
            continue;
        };
        if nb_people + nb_disabled == 0 {
            ins.flag(id, ViolationKind::EmptyRescuePoint);
            continue;
        }
        if !has_place {
            continue;
        }
        out.push(RescuePoint {
            id: id.to_string(),
            address,
            location,
            nb_people,
            nb_disabled,
            priority,
        });
    }
    (out, ins.violations)
}

fn inspect_shelters(store: &TripleStore) -> (Vec<Shelter>, Vec<Violation>) {
    let mut ins = Inspector::new(store, EntityKind::Shelters);
    let mut out = Vec::new();
    for id in ins.typed_subjects(Class::Shelter) {
        ins.check_single_kind(id);
        let capacity = ins.required_count(id, Predicate::HasCapacity);
        let occupied = ins.optional_count(id, Predicate::HasOccupied, 0);
        let name = ins.text(id, Predicate::HasName);
        let address = ins.text(id, Predicate::HasAddress);
        let location = ins.location(id);
        let has_place = store.objects(id, Predicate::HasAddress).next().is_some()
            || store.objects(id, Predicate::HasLocation).next().is_some();
        if !has_place {
            ins.flag(id, ViolationKind::MissingLocation);
        }
        let (Ok(capacity), Ok(occupied)) = (capacity, occupied) else {
            continue;
        };
        if occupied > capacity {
            ins.flag(id, ViolationKind::CapacityExceeded { occupied, capacity });
            continue;
        }
        if !has_place {
            continue;
        }
        out.push(Shelter {
            id: id.to_string(),
            name,
            address,
            location,
            capacity,
            occupied,
        });
    }
    (out, ins.violations)
}

impl MovingResource {
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut t = vec![
            Triple::new(&self.id, Predicate::RdfType, Term::id(Class::MovingResource.iri())),
            Triple::new(&self.driver_id, Predicate::RdfType, Term::id(Class::Driver.iri())),
            Triple::new(&self.driver_id, Predicate::IsAPartOf, Term::id(&self.id)),
            Triple::new(&self.vehicle_id, Predicate::RdfType, Term::id(self.vehicle_class.class().iri())),
            Triple::new(&self.vehicle_id, Predicate::IsAPartOf, Term::id(&self.id)),
            Triple::new(&self.vehicle_id, Predicate::NbOfSeat, Term::Int(self.seats.into())),
            Triple::new(&self.vehicle_id, Predicate::NbOfLyingPlace, Term::Int(self.lying_places.into())),
            Triple::new(&self.id, Predicate::HasStatus, Term::id(self.status.as_str())),
        ];
        if let Some(loc) = self.location {
            t.push(Triple::new(&self.id, Predicate::HasLocation, Term::text(loc.to_string())));
        }
        if let Some(addr) = &self.address {
            t.push(Triple::new(&self.id, Predicate::HasAddress, Term::text(addr)));
        }
        t
    }
}

impl RescuePoint {
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut t = vec![
            Triple::new(&self.id, Predicate::RdfType, Term::id(Class::RescuePoint.iri())),
            Triple::new(&self.id, Predicate::HasTotalPeople, Term::Int(self.nb_people.into())),
            Triple::new(&self.id, Predicate::HasTotalDisabled, Term::Int(self.nb_disabled.into())),
            Triple::new(&self.id, Predicate::HasPriority, Term::Int(self.priority.into())),
        ];
        if let Some(loc) = self.location {
            t.push(Triple::new(&self.id, Predicate::HasLocation, Term::text(loc.to_string())));
        }
        if let Some(addr) = &self.address {
            t.push(Triple::new(&self.id, Predicate::HasAddress, Term::text(addr)));
        }
        t
    }
}

impl Shelter {
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut t = vec![
            Triple::new(&self.id, Predicate::RdfType, Term::id(Class::Shelter.iri())),
            Triple::new(&self.id, Predicate::HasCapacity, Term::Int(self.capacity.into())),
            Triple::new(&self.id, Predicate::HasOccupied, Term::Int(self.occupied.into())),
        ];
        if let Some(name) = &self.name {
            t.push(Triple::new(&self.id, Predicate::HasName, Term::text(name)));
        }
        if let Some(loc) = self.location {
            t.push(Triple::new(&self.id, Predicate::HasLocation, Term::text(loc.to_string())));
        }
        if let Some(addr) = &self.address {
            t.push(Triple::new(&self.id, Predicate::HasAddress, Term::text(addr)));
        }
        t
    }
}

impl EntitySet {
    pub fn to_triples(&self) -> Vec<Triple> {
        let mut out: Vec<Triple> = self.moving_resources.iter().flat_map(|r| r.to_triples()).collect();
        out.extend(self.rescue_points.iter().flat_map(|p| p.to_triples()));
        out.extend(self.shelters.iter().flat_map(|s| s.to_triples()));
        out
    }

    pub fn to_store(&self) -> Result<TripleStore, super::triple::Rejection> {
        let mut store = TripleStore::new();
        store.assert_all(self.to_triples())?;
        Ok(store)
    }

    /// Sorts every list by id, the order materialization produces.
    pub fn normalized(mut self) -> Self {
        self.moving_resources.sort_by(|a, b| a.id.cmp(&b.id));
        self.rescue_points.sort_by(|a, b| a.id.cmp(&b.id));
        self.shelters.sort_by(|a, b| a.id.cmp(&b.id));
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("entity set serializes")
    }
}
