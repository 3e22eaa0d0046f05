use serde::{Deserialize, Serialize};

use crate::kb::Shelter;

/// Evacuees of one served point waiting for a shelter, with travel times to
/// every shelter (same order as the shelter list).
#[derive(Debug, Clone, PartialEq)]
pub struct ShelterDemand {
    pub point_id: String,
    pub evacuees: u32,
    pub times: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShelterAllocation {
    pub point_id: String,
    pub shelter_id: String,
    pub persons: u32,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShelterOccupancy {
    pub shelter_id: String,
    pub occupied: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub point_id: String,
    pub unplaced: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShelterAssignment {
    pub allocations: Vec<ShelterAllocation>,
    pub occupancy: Vec<ShelterOccupancy>,
    /// Set when the shelters cannot take everyone.
    pub capacity_exhausted: bool,
    pub shortfall: Vec<Shortfall>,
}

/// Places evacuees point by point, in the order given. A point goes whole to
/// the nearest shelter with room for all of it. If no shelter has that much
/// room, it is split across the nearest shelters that still have space.
pub fn assign_shelters(demands: &[ShelterDemand], shelters: &[Shelter]) -> ShelterAssignment {
    let mut occupied: Vec<u32> = shelters.iter().map(|s| s.occupied.min(s.capacity)).collect();
    let mut out = ShelterAssignment::default();
    for d in demands {
        let mut near: Vec<(f64, usize)> = d
            .times
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (t, i)))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(shelters[a.1].id.cmp(&shelters[b.1].id)));
        let room = |i: usize, occupied: &[u32]| shelters[i].capacity - occupied[i];

        let mut left = d.evacuees;
        if let Some(&(t, i)) = near.iter().find(|&&(_, i)| room(i, &occupied) >= left) {
            if left > 0 {
                occupied[i] += left;
                out.allocations.push(ShelterAllocation {
                    point_id: d.point_id.clone(),
                    shelter_id: shelters[i].id.clone(),
                    persons: left,
                    time_s: t,
                });
            }
            left = 0;
        } else {
            for &(t, i) in &near {
                let take = room(i, &occupied).min(left);
                if take == 0 {
                    continue;
                }
                occupied[i] += take;
                left -= take;
                out.allocations.push(ShelterAllocation {
                    point_id: d.point_id.clone(),
                    shelter_id: shelters[i].id.clone(),
                    persons: take,
                    time_s: t,
                });
                if left == 0 {
                    break;
                }
            }
        }
        if left > 0 {
            out.capacity_exhausted = true;
            out.shortfall.push(Shortfall {
                point_id: d.point_id.clone(),
                unplaced: left,
            });
        }
    }
    out.occupancy = shelters
        .iter()
        .zip(&occupied)
        .map(|(s, &o)| ShelterOccupancy {
            shelter_id: s.id.clone(),
            occupied: o,
            capacity: s.capacity,
        })
        .collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shelters() -> Vec<Shelter> {
        [("S1", 320), ("S2", 120), ("S3", 240)]
            .iter()
            .map(|&(id, cap)| Shelter {
                id: id.to_string(),
                name: None,
                address: None,
                location: None,
                capacity: cap,
                occupied: 0,
            })
            .collect()
    }

    fn demand(id: &str, n: u32, times: [f64; 3]) -> ShelterDemand {
        ShelterDemand {
            point_id: id.to_string(),
            evacuees: n,
            times: times.iter().map(|&t| Some(t)).collect(),
        }
    }

    #[test]
    fn whole_point_to_nearest_with_room() {
        let a = assign_shelters(&[demand("P", 172, [30.0, 10.0, 20.0])], &shelters());
        // S2 is closest but too small for 172
        assert_eq!(a.allocations.len(), 1);
        assert_eq!(a.allocations[0].shelter_id, "S3");
        assert!(!a.capacity_exhausted);
    }

    #[test]
    fn split_when_no_single_shelter_fits() {
        let a = assign_shelters(&[demand("P", 500, [30.0, 10.0, 20.0])], &shelters());
        let split: Vec<(&str, u32)> = a.allocations.iter().map(|x| (x.shelter_id.as_str(), x.persons)).collect();
        assert_eq!(split, vec![("S2", 120), ("S3", 240), ("S1", 140)]);
        assert!(!a.capacity_exhausted);
    }

    #[test]
    fn exhausted_capacity_is_reported() {
        let a = assign_shelters(&[demand("P", 700, [30.0, 10.0, 20.0])], &shelters());
        assert!(a.capacity_exhausted);
        assert_eq!(a.shortfall, vec![Shortfall { point_id: "P".into(), unplaced: 20 }]);
        assert!(a.occupancy.iter().all(|o| o.occupied == o.capacity));
    }

    #[test]
    fn capacity_never_exceeded() {
        let ds = [
            demand("P1", 200, [1.0, 2.0, 3.0]),
            demand("P2", 200, [1.0, 2.0, 3.0]),
            demand("P3", 200, [1.0, 2.0, 3.0]),
        ];
        let a = assign_shelters(&ds, &shelters());
        for o in &a.occupancy {
            assert!(o.occupied <= o.capacity);
        }
        let placed: u32 = a.allocations.iter().map(|x| x.persons).sum();
        assert_eq!(placed, 600);
    }

    #[test]
    fn full_shelters_are_skipped() {
        let mut s = shelters();
        s[1].occupied = 120;
        let a = assign_shelters(&[demand("P", 100, [30.0, 10.0, 20.0])], &s);
        assert!(a.allocations.iter().all(|x| x.shelter_id != "S2"));
        assert_eq!(a.allocations[0].shelter_id, "S3");
    }
}
