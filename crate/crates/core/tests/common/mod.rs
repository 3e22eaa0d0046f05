//! Random inputs and independent oracles shared by the integration tests.
#![allow(dead_code)]

use evac_core::geo::GeoPoint;
use evac_core::kb::{EntitySet, MovingResource, RescuePoint, ResourceStatus, Shelter, VehicleClass};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn scenario_dir(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

const CLASSES: [VehicleClass; 8] = [
    VehicleClass::Minibus,
    VehicleClass::Minivan,
    VehicleClass::Van,
    VehicleClass::Campervan,
    VehicleClass::Suv,
    VehicleClass::Berline,
    VehicleClass::Boat,
    VehicleClass::Other,
];

fn random_text(rng: &mut impl Rng) -> String {
    const WORDS: [&str; 8] = ["Rue", "de", "Paris", "Compiègne", "17", "Gymnase\tNord", "Quai\\Est", "Solférino"];
    let n = rng.random_range(1..5);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn random_point(rng: &mut impl Rng) -> GeoPoint {
    GeoPoint::new(rng.random_range(-89.9..89.9), rng.random_range(-179.9..179.9))
}

/// A valid entity set: unique ids, counts within bounds, every invariant held.
pub fn random_entity_set(rng: &mut impl Rng) -> EntitySet {
    let mut set = EntitySet::default();
    for i in 0..rng.random_range(0..8) {
        let status = *[ResourceStatus::Available, ResourceStatus::Unavailable, ResourceStatus::Dispatched]
            .choose(rng)
            .unwrap();
        let mut seats = rng.random_range(0..20);
        let lying_places = rng.random_range(0..4);
        if status == ResourceStatus::Available && seats + lying_places == 0 {
            seats = 1;
        }
        set.moving_resources.push(MovingResource {
            id: format!("D{i}/V{i}"),
            driver_id: format!("D{i}"),
            vehicle_id: format!("V{i}"),
            vehicle_class: *CLASSES.choose(rng).unwrap(),
            seats,
            lying_places,
            location: rng.random_bool(0.7).then(|| random_point(rng)),
            address: rng.random_bool(0.5).then(|| random_text(rng)),
            status,
        });
    }
    for i in 0..rng.random_range(0..6) {
        let nb_people = rng.random_range(0..150);
        let nb_disabled = if nb_people == 0 { rng.random_range(1..10) } else { rng.random_range(0..10) };
        let location = rng.random_bool(0.6).then(|| random_point(rng));
        let address = (location.is_none() || rng.random_bool(0.5)).then(|| random_text(rng));
        set.rescue_points.push(RescuePoint {
            id: format!("RescuePoint_{i:02}"),
            address,
            location,
            nb_people,
            nb_disabled,
            priority: rng.random_range(1..5),
        });
    }
    for i in 0..rng.random_range(0..4) {
        let capacity = rng.random_range(0..400);
        let location = rng.random_bool(0.6).then(|| random_point(rng));
        let address = (location.is_none() || rng.random_bool(0.5)).then(|| random_text(rng));
        set.shelters.push(Shelter {
            id: format!("Shelter_{i:02}"),
            name: rng.random_bool(0.5).then(|| random_text(rng)),
            address,
            location,
            capacity,
            occupied: rng.random_range(0..=capacity),
        });
    }
    set
}

/// Small allocation instance: at most 4 points and 8 vehicles, times drawn
/// from a coarse grid so ties happen, some pairs unreachable.
pub fn random_instance(rng: &mut impl Rng) -> evac_core::allocator::AllocationInstance {
    use evac_core::allocator::{AllocationInstance, PointDemand, ResourceSupply};
    let x = rng.random_range(1..=4);
    let y = rng.random_range(1..=8);
    let points = (0..x)
        .map(|u| {
            let disabled = if rng.random_bool(0.3) { rng.random_range(1..=3) } else { 0 };
            PointDemand::new(format!("RescuePoint_{:02}", u + 1), rng.random_range(1..=12), disabled, rng.random_range(1..=3))
        })
        .collect();
    let resources = (0..y)
        .map(|v| {
            let seats = if rng.random_bool(0.05) { 0 } else { *[3, 4, 4, 5, 8, 9, 16].choose(rng).unwrap() };
            ResourceSupply::new(format!("R{v:02}"), seats)
        })
        .collect();
    let times = (0..x)
        .map(|_| {
            (0..y)
                .map(|_| {
                    if rng.random_bool(0.15) {
                        None
                    } else if rng.random_bool(0.5) {
                        Some(rng.random_range(0..12) as f64 * 30.0)
                    } else {
                        Some(rng.random_range(0.0..400.0))
                    }
                })
                .collect()
        })
        .collect();
    AllocationInstance::new(points, resources, times).unwrap()
}
