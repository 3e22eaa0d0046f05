use std::cmp::Ordering;
use std::collections::HashMap;

use super::plan::{compare_cost, COST_EPS};
use super::{AllocError, AllocationInstance, AllocationPlan, SolverKind};

/// Largest candidate fleet the exact solver accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 25;

const MEMO_LIMIT: usize = 4_000_000;

/// Exact solve.
///
/// Serves every point when that is feasible. Otherwise it walks the points
/// by priority and keeps each one that can still be served together with
/// the points already kept. The result is the one optimal plan under the
/// (time, vehicles, pairs) order.
pub fn solve_exact(inst: &AllocationInstance, cap: usize) -> Result<AllocationPlan, AllocError> {
    let candidates = prune_dominated(inst);
    if candidates.len() > cap {
        return Err(AllocError::InstanceTooLarge {
            vehicles: candidates.len(),
            cap,
        });
    }
    let x = inst.point_count();
    let all: Vec<usize> = (0..x).collect();
    let kept = if feasible(inst, &candidates, &all) {
        all
    } else {
        let mut kept = Vec::new();
        for u in inst.priority_order() {
            kept.push(u);
            if !feasible(inst, &candidates, &kept) {
                kept.pop();
            }
        }
        kept.sort_unstable();
        kept
    };
    let assignment = optimize(inst, &candidates, &kept);
    let mut served = vec![false; x];
    for &u in &kept {
        served[u] = true;
    }
    Ok(AllocationPlan::from_assignment(inst, &assignment, &served, SolverKind::Exact))
}

/// Resources the search has to consider.
///
/// Seatless or unreachable resources are dropped. A resource with `c`
/// seats is also dropped when, at every point it reaches, at least
/// `sum_u ceil(D_u / c)` other `c`-seat resources with smaller ids are at
/// least as close. An optimal plan never uses more than that many `c`-seat
/// resources, so one of those is always free. Swapping it in never makes
/// the plan worse.
pub fn prune_dominated(inst: &AllocationInstance) -> Vec<usize> {
    let (x, y) = (inst.point_count(), inst.resource_count());
    let live: Vec<usize> = (0..y)
        .filter(|&v| inst.seats(v) > 0 && (0..x).any(|u| inst.time(u, v).is_some()))
        .collect();
    live.iter()
        .copied()
        .filter(|&v| {
            let c = inst.seats(v);
            let k: usize = (0..x).map(|u| inst.demand(u).div_ceil(c) as usize).sum();
            let dominated = (0..x).all(|u| {
                let Some(tv) = inst.time(u, v) else { return true };
                let better = live
                    .iter()
                    .filter(|&&w| w < v && inst.seats(w) == c)
                    .filter(|&&w| inst.time(u, w).is_some_and(|tw| tw <= tv))
                    .count();
                better >= k
            });
            !dominated
        })
        .collect()
}

fn feasible(inst: &AllocationInstance, candidates: &[usize], points: &[usize]) -> bool {
    if points.is_empty() {
        return true;
    }
    let mut s = Search::new(inst, candidates, points, true);
    s.dfs(0);
    s.found
}

fn optimize(inst: &AllocationInstance, candidates: &[usize], points: &[usize]) -> Vec<Option<usize>> {
    let mut out = vec![None; inst.resource_count()];
    if points.is_empty() {
        return out;
    }
    let mut s = Search::new(inst, candidates, points, false);
    s.dfs(0);
    let best = s.best.expect("served set is feasible");
    for (pos, slot) in best.assign.iter().enumerate() {
        if let Some(slot) = *slot {
            out[s.order[pos]] = Some(s.slots[slot]);
        }
    }
    out
}

struct Best {
    cost: f64,
    count: usize,
    bits: Vec<u64>,
    assign: Vec<Option<usize>>,
}

struct Partial {
    cost: f64,
    count: usize,
    bits: Vec<u64>,
}

/// Lower bit index means a smaller (point, resource) pair, so the set that
/// owns the lowest differing bit is the lexicographically smaller one.
fn compare_bits(a: &[u64], b: &[u64]) -> Ordering {
    for (wa, wb) in a.iter().zip(b) {
        let diff = wa ^ wb;
        if diff != 0 {
            let low = diff & diff.wrapping_neg();
            return if wa & low != 0 { Ordering::Less } else { Ordering::Greater };
        }
    }
    Ordering::Equal
}

fn compare_keys(c1: f64, n1: usize, b1: &[u64], c2: f64, n2: usize, b2: &[u64]) -> Ordering {
    compare_cost(c1, c2)
        .then(n1.cmp(&n2))
        .then_with(|| compare_bits(b1, b2))
}

/// Depth-first search over vehicles in descending seat order. Each vehicle
/// either stays home or goes to a point that is not yet covered. Any
/// minimal cover can be built that way.
struct Search<'a> {
    inst: &'a AllocationInstance,
    slots: Vec<usize>,
    order: Vec<usize>,
    seats: Vec<u32>,
    times: Vec<Vec<Option<f64>>>,
    by_ratio: Vec<Vec<usize>>,
    need: Vec<u32>,
    open: usize,
    assign: Vec<Option<usize>>,
    cost: f64,
    count: usize,
    bits: Vec<u64>,
    feasibility: bool,
    found: bool,
    best: Option<Best>,
    memo: HashMap<(usize, Vec<u32>), Partial>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a AllocationInstance, candidates: &[usize], points: &[usize], feasibility: bool) -> Self {
        let mut order = candidates.to_vec();
        order.sort_by(|&a, &b| inst.seats(b).cmp(&inst.seats(a)).then(a.cmp(&b)));
        let seats: Vec<u32> = order.iter().map(|&v| inst.seats(v)).collect();
        let times: Vec<Vec<Option<f64>>> = points
            .iter()
            .map(|&u| order.iter().map(|&v| inst.time(u, v)).collect())
            .collect();
        let by_ratio = times
            .iter()
            .map(|row| {
                let mut ps: Vec<usize> = (0..order.len()).filter(|&p| row[p].is_some()).collect();
                ps.sort_by(|&a, &b| {
                    let ra = row[a].unwrap() / seats[a] as f64;
                    let rb = row[b].unwrap() / seats[b] as f64;
                    ra.total_cmp(&rb).then(a.cmp(&b))
                });
                ps
            })
            .collect();
        let words = (inst.point_count() * inst.resource_count()).div_ceil(64).max(1);
        Self {
            inst,
            slots: points.to_vec(),
            need: points.iter().map(|&u| inst.demand(u)).collect(),
            open: points.len(),
            assign: vec![None; order.len()],
            order,
            seats,
            times,
            by_ratio,
            cost: 0.0,
            count: 0,
            bits: vec![0; words],
            feasibility,
            found: false,
            best: None,
            memo: HashMap::new(),
        }
    }

    fn bit(&self, slot: usize, pos: usize) -> usize {
        self.slots[slot] * self.inst.resource_count() + self.order[pos]
    }

    /// Fractional completion cost using vehicles from `k` on, or `None` if
    /// the remaining fleet cannot cover the open points.
    fn bound(&self, k: usize) -> Option<f64> {
        let mut extra = 0.0;
        let mut total_need = 0u64;
        for (s, &need) in self.need.iter().enumerate() {
            if need == 0 {
                continue;
            }
            total_need += need as u64;
            let mut rest = need;
            for &p in &self.by_ratio[s] {
                if p < k {
                    continue;
                }
                let take = rest.min(self.seats[p]);
                extra += self.times[s][p].unwrap() * take as f64 / self.seats[p] as f64;
                rest -= take;
                if rest == 0 {
                    break;
                }
            }
            if rest > 0 {
                return None;
            }
        }
        let supply: u64 = (k..self.order.len())
            .filter(|&p| (0..self.slots.len()).any(|s| self.need[s] > 0 && self.times[s][p].is_some()))
            .map(|p| self.seats[p] as u64)
            .sum();
        (supply >= total_need).then_some(self.cost + extra)
    }

    fn leaf(&mut self) {
        if self.feasibility {
            self.found = true;
            return;
        }
        let y = self.inst.resource_count();
        let mut pairs: Vec<(usize, usize)> = self
            .assign
            .iter()
            .enumerate()
            .filter_map(|(p, s)| s.map(|s| (self.slots[s], self.order[p])))
            .collect();
        pairs.sort_unstable();
        let cost: f64 = pairs.iter().map(|&(u, v)| self.inst.time(u, v).unwrap()).sum();
        debug_assert!(pairs.iter().all(|&(u, v)| self.bits[(u * y + v) / 64] >> ((u * y + v) % 64) & 1 == 1));
        let better = match &self.best {
            None => true,
            Some(b) => compare_keys(cost, self.count, &self.bits, b.cost, b.count, &b.bits) == Ordering::Less,
        };
        if better {
            self.best = Some(Best {
                cost,
                count: self.count,
                bits: self.bits.clone(),
                assign: self.assign.clone(),
            });
        }
    }

    fn dfs(&mut self, k: usize) {
        if self.found {
            return;
        }
        if self.open == 0 {
            self.leaf();
            return;
        }
        if k == self.order.len() {
            return;
        }
        let Some(bound) = self.bound(k) else { return };
        if let Some(b) = &self.best {
            if bound > b.cost + COST_EPS {
                return;
            }
        }
        // Same depth and same remaining needs means the same completions;
        // from there on the plan with the better prefix wins.
        let key = (k, self.need.clone());
        match self.memo.get_mut(&key) {
            Some(_) if self.feasibility => return,
            Some(stored) => {
                if compare_keys(stored.cost, stored.count, &stored.bits, self.cost, self.count, &self.bits)
                    != Ordering::Greater
                {
                    return;
                }
                stored.cost = self.cost;
                stored.count = self.count;
                stored.bits.clone_from(&self.bits);
            }
            None => {
                if self.memo.len() < MEMO_LIMIT {
                    let partial = Partial {
                        cost: self.cost,
                        count: self.count,
                        bits: self.bits.clone(),
                    };
                    self.memo.insert(key, partial);
                }
            }
        }

        let mut targets: Vec<usize> = (0..self.slots.len())
            .filter(|&s| self.need[s] > 0 && self.times[s][k].is_some())
            .collect();
        targets.sort_by(|&a, &b| {
            self.times[a][k]
                .unwrap()
                .total_cmp(&self.times[b][k].unwrap())
                .then(self.slots[a].cmp(&self.slots[b]))
        });
        for s in targets {
            let t = self.times[s][k].unwrap();
            let before = self.need[s];
            let bit = self.bit(s, k);
            self.need[s] = before.saturating_sub(self.seats[k]);
            if self.need[s] == 0 {
                self.open -= 1;
            }
            self.assign[k] = Some(s);
            self.cost += t;
            self.count += 1;
            self.bits[bit / 64] |= 1 << (bit % 64);

            self.dfs(k + 1);

            self.bits[bit / 64] &= !(1 << (bit % 64));
            self.count -= 1;
            self.cost -= t;
            self.assign[k] = None;
            if self.need[s] == 0 {
                self.open += 1;
            }
            self.need[s] = before;
            if self.found {
                return;
            }
        }
        self.dfs(k + 1);
    }
}
