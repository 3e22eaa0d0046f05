use std::cmp::Ordering;

use super::{AllocError, AllocationInstance, AllocationPlan, SolverKind};

/// Upper bound on `(x + 1)^y` for the enumeration.
pub const ORACLE_LIMIT: u64 = 5_000_000;

struct Candidate {
    cost: f64,
    vehicles: usize,
    pairs: Vec<(usize, usize)>,
    assignment: Vec<Option<usize>>,
}

fn better(cost: f64, vehicles: usize, pairs: &[(usize, usize)], than: &Candidate) -> bool {
    let by_cost = if (cost - than.cost).abs() <= 1e-9 {
        Ordering::Equal
    } else if cost < than.cost {
        Ordering::Less
    } else {
        Ordering::Greater
    };
    by_cost
        .then(vehicles.cmp(&than.vehicles))
        .then_with(|| pairs.cmp(&than.pairs))
        == Ordering::Less
}

/// Reference solver for small instances: tries every way of sending each
/// vehicle to one reachable point or nowhere.
pub fn brute_force_oracle(inst: &AllocationInstance) -> Result<AllocationPlan, AllocError> {
    let (x, y) = (inst.point_count(), inst.resource_count());
    let size = (x as u64 + 1).checked_pow(y as u32).unwrap_or(u64::MAX);
    if x >= 63 || size > ORACLE_LIMIT {
        return Err(AllocError::OracleTooLarge { assignments: size });
    }

    let options: Vec<Vec<Option<usize>>> = (0..y)
        .map(|v| {
            std::iter::once(None)
                .chain((0..x).filter(|&u| inst.time(u, v).is_some()).map(Some))
                .collect()
        })
        .collect();

    // best plan for each exact set of points receiving vehicles
    let mut best: Vec<Option<Candidate>> = (0..1usize << x).map(|_| None).collect();
    let mut digit = vec![0usize; y];
    let mut seats = vec![0u32; x];
    let mut users = vec![0usize; x];
    let mut rough = 0.0f64;

    loop {
        let mut support = 0usize;
        let mut covered = 0usize;
        for u in 0..x {
            if users[u] > 0 {
                support |= 1 << u;
            }
            if seats[u] >= inst.demand(u) {
                covered |= 1 << u;
            }
        }
        if support & !covered == 0 {
            let slot = &best[support];
            let worth = match slot {
                None => true,
                Some(c) => rough <= c.cost + 1e-6,
            };
            if worth {
                let assignment: Vec<Option<usize>> = (0..y).map(|v| options[v][digit[v]]).collect();
                let mut pairs: Vec<(usize, usize)> = assignment
                    .iter()
                    .enumerate()
                    .filter_map(|(v, a)| a.map(|u| (u, v)))
                    .collect();
                pairs.sort_unstable();
                let cost: f64 = pairs.iter().map(|&(u, v)| inst.time(u, v).unwrap()).sum();
                let take = match slot {
                    None => true,
                    Some(c) => better(cost, pairs.len(), &pairs, c),
                };
                if take {
                    best[support] = Some(Candidate {
                        cost,
                        vehicles: pairs.len(),
                        pairs,
                        assignment,
                    });
                }
            }
        }

        // odometer step
        let mut v = 0;
        loop {
            if v == y {
                return Ok(finish(inst, best));
            }
            if let Some(u) = options[v][digit[v]] {
                seats[u] -= inst.seats(v);
                users[u] -= 1;
                rough -= inst.time(u, v).unwrap();
            }
            digit[v] += 1;
            if digit[v] == options[v].len() {
                digit[v] = 0;
                v += 1;
                continue;
            }
            let u = options[v][digit[v]].unwrap();
            seats[u] += inst.seats(v);
            users[u] += 1;
            rough += inst.time(u, v).unwrap();
            break;
        }
    }
}

fn finish(inst: &AllocationInstance, mut best: Vec<Option<Candidate>>) -> AllocationPlan {
    let x = inst.point_count();
    let full = (1usize << x) - 1;
    let mask = if best[full].is_some() {
        full
    } else {
        let mut order: Vec<usize> = (0..x).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&inst.points()[a], &inst.points()[b]);
            pa.priority.cmp(&pb.priority).then(pa.id.cmp(&pb.id))
        });
        let mut mask = 0usize;
        for u in order {
            if best[mask | 1 << u].is_some() {
                mask |= 1 << u;
            }
        }
        mask
    };
    let chosen = best[mask].take().expect("empty support always exists");
    let served: Vec<bool> = (0..x).map(|u| mask >> u & 1 == 1).collect();
    AllocationPlan::from_assignment(inst, &chosen.assignment, &served, SolverKind::Oracle)
}
