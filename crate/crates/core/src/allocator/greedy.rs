use super::plan::COST_EPS;
use super::{AllocationInstance, AllocationPlan, SolverKind};

const MAX_ROUNDS: usize = 1000;

/// Nearest-vehicle heuristic for fleets too large for the exact search.
///
/// Points are filled in priority order with the closest free vehicles.
/// Then vehicles are swapped for closer free ones and surplus vehicles are
/// sent home, until nothing changes.
pub fn solve_greedy(inst: &AllocationInstance) -> AllocationPlan {
    let (x, y) = (inst.point_count(), inst.resource_count());
    let mut assignment: Vec<Option<usize>> = vec![None; y];
    let mut served = vec![false; x];
    let order = inst.priority_order();

    fill(inst, &order, &mut assignment, &mut served);
    for _ in 0..MAX_ROUNDS {
        let changed = swap_closer(inst, &mut assignment) | drop_surplus(inst, &mut assignment);
        let refilled = fill(inst, &order, &mut assignment, &mut served);
        if !changed && !refilled {
            break;
        }
    }
    AllocationPlan::from_assignment(inst, &assignment, &served, SolverKind::Greedy)
}

fn delivered(inst: &AllocationInstance, assignment: &[Option<usize>], u: usize) -> u32 {
    assignment
        .iter()
        .enumerate()
        .filter(|(_, a)| **a == Some(u))
        .map(|(v, _)| inst.seats(v))
        .sum()
}

/// Tries every unserved point once, in order. Returns whether any got served.
fn fill(inst: &AllocationInstance, order: &[usize], assignment: &mut [Option<usize>], served: &mut [bool]) -> bool {
    let mut any = false;
    for &u in order {
        if served[u] {
            continue;
        }
        let mut free: Vec<(f64, usize)> = (0..inst.resource_count())
            .filter(|&v| assignment[v].is_none() && inst.seats(v) > 0)
            .filter_map(|v| inst.time(u, v).map(|t| (t, v)))
            .collect();
        free.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let need = inst.demand(u);
        let mut got = 0;
        let mut chosen = Vec::new();
        for (_, v) in free {
            if got >= need {
                break;
            }
            got += inst.seats(v);
            chosen.push(v);
        }
        if got >= need {
            for v in chosen {
                assignment[v] = Some(u);
            }
            served[u] = true;
            any = true;
        }
    }
    any
}

/// Replaces an assigned vehicle with a strictly closer free one whenever the
/// point stays covered.
fn swap_closer(inst: &AllocationInstance, assignment: &mut [Option<usize>]) -> bool {
    let y = inst.resource_count();
    let mut changed = false;
    for v in 0..y {
        let Some(u) = assignment[v] else { continue };
        let tv = inst.time(u, v).unwrap();
        let slack = delivered(inst, assignment, u) - inst.seats(v);
        let best = (0..y)
            .filter(|&w| assignment[w].is_none() && inst.seats(w) > 0 && slack + inst.seats(w) >= inst.demand(u))
            .filter_map(|w| inst.time(u, w).map(|t| (t, w)))
            .filter(|&(t, _)| t < tv - COST_EPS)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, w)) = best {
            assignment[v] = None;
            assignment[w] = Some(u);
            changed = true;
        }
    }
    changed
}

/// Sends home the slowest vehicles a point can do without.
fn drop_surplus(inst: &AllocationInstance, assignment: &mut [Option<usize>]) -> bool {
    let mut changed = false;
    for u in 0..inst.point_count() {
        let mut mine: Vec<(f64, usize)> = (0..inst.resource_count())
            .filter(|&v| assignment[v] == Some(u))
            .map(|v| (inst.time(u, v).unwrap(), v))
            .collect();
        mine.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
        let mut got = delivered(inst, assignment, u);
        for (_, v) in mine {
            if got - inst.seats(v) >= inst.demand(u) {
                got -= inst.seats(v);
                assignment[v] = None;
                changed = true;
            }
        }
    }
    changed
}
