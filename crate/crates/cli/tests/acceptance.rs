//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p evac-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::Request;
use evac_core::allocator::*;
use evac_core::document::PlanDocument;
use evac_core::geo::{haversine_distance, GeoPoint};
use evac_core::kb::file::{load_store, serialize_store};
use evac_core::kb::{materialize_all, validate_consistency, EntitySet};
use evac_core::report::{render_report, ReportFormat};
use evac_core::routing::{Edge, NodeId, RoadGraph};
use evac_core::scenario::{exit_code, load_scenario, run_scenario, ScenarioBundle};
use evac_core::service::{Dispatcher, ServiceConfig};
use rand::prelude::*;
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn random_instance(rng: &mut impl Rng, max_points: usize, max_vehicles: usize) -> AllocationInstance {
    let x = rng.random_range(1..=max_points);
    let y = rng.random_range(1..=max_vehicles);
    let points = (0..x)
        .map(|u| {
            let disabled = if rng.random_bool(0.4) { rng.random_range(1..=4) } else { 0 };
            let people = rng.random_range(if disabled > 0 { 0 } else { 1 }..=25);
            PointDemand::new(format!("P{u:02}"), people, disabled, rng.random_range(1..=3))
        })
        .collect();
    let resources = (0..y)
        .map(|v| ResourceSupply::new(format!("R{v:02}"), rng.random_range(2..=15)))
        .collect();
    let times = (0..x)
        .map(|_| {
            (0..y)
                .map(|_| match rng.random_range(0..10) {
                    0 => None,
                    1..=4 => Some(rng.random_range(1..=20) as f64 * 30.0),
                    _ => Some(rng.random_range(10.0..900.0)),
                })
                .collect()
        })
        .collect();
    AllocationInstance::new(points, resources, times).unwrap()
}

/// Checks column sums, coverage of served points and the reported totals
/// against the raw instance.
fn check_plan(inst: &AllocationInstance, plan: &AllocationPlan) -> Result<(), String> {
    let mut uses = vec![0usize; inst.resource_count()];
    let mut seats = vec![0u32; inst.point_count()];
    let mut cost = 0.0;
    for (u, v) in plan.pairs() {
        uses[v] += 1;
        seats[u] += inst.seats(v);
        cost += inst.time(u, v).ok_or(format!("unreachable pair ({u},{v}) assigned"))?;
    }
    ensure!(uses.iter().all(|&c| c <= 1), "vehicle used twice: {uses:?}");
    ensure!(plan.per_point.len() == inst.point_count(), "per-point length");
    for pa in &plan.per_point {
        let u = pa.point;
        ensure!(pa.seats_delivered == seats[u], "delivered mismatch at {u}");
        if pa.served {
            ensure!(seats[u] >= inst.demand(u), "served point {u} short: {} < {}", seats[u], inst.demand(u));
        }
    }
    let all_served = plan.per_point.iter().all(|p| p.served);
    ensure!(all_served == (plan.status != PlanStatus::Infeasible), "status {:?} vs served flags", plan.status);
    ensure!((cost - plan.objective).abs() <= 1e-6, "objective {} vs recomputed {cost}", plan.objective);
    ensure!(plan.vehicles_used == plan.pairs().len(), "vehicle count");
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut rng = common::rng(1001);
    let start = Instant::now();
    let (mut optimal, mut infeasible) = (0, 0);
    for i in 0..1000 {
        let inst = random_instance(&mut rng, 4, 20);
        let exact = solve_exact(&inst, DEFAULT_EXACT_CAP).map_err(|e| format!("instance {i}: {e}"))?;
        check_plan(&inst, &exact).map_err(|e| format!("exact, instance {i}: {e}"))?;
        let greedy = solve_greedy(&inst);
        check_plan(&inst, &greedy).map_err(|e| format!("greedy, instance {i}: {e}"))?;
        match exact.status {
            PlanStatus::Infeasible => infeasible += 1,
            _ => optimal += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    ensure!(optimal > 0 && infeasible > 0, "generator one-sided: {optimal} feasible / {infeasible} infeasible");
    Ok(format!("1000 instances x2 solvers, 0 violations ({optimal} feasible, {infeasible} infeasible), {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let mut rng = common::rng(2002);
    let start = Instant::now();
    for i in 0..200 {
        let inst = random_instance(&mut rng, 3, 10);
        let exact = solve_exact(&inst, DEFAULT_EXACT_CAP).map_err(|e| e.to_string())?;
        let oracle = brute_force_oracle(&inst).map_err(|e| e.to_string())?;
        ensure!(
            (exact.objective - oracle.objective).abs() <= 1e-9 && exact.vehicles_used == oracle.vehicles_used,
            "instance {i}: exact ({}, {}) vs oracle ({}, {})",
            exact.objective,
            exact.vehicles_used,
            oracle.objective,
            oracle.vehicles_used
        );
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 300.0, "took {secs:.1} s");
    Ok(format!("200 instances, exact == oracle, {secs:.1} s"))
}

fn criterion_3() -> Outcome {
    let inst = AllocationInstance::new(
        vec![PointDemand::new("P", 8, 0, 1)],
        vec![ResourceSupply::new("A", 9), ResourceSupply::new("B", 5), ResourceSupply::new("C", 5)],
        vec![vec![Some(90.0), Some(40.0), Some(50.0)]],
    )
    .unwrap();
    let exact = solve_exact(&inst, DEFAULT_EXACT_CAP).map_err(|e| e.to_string())?;
    let oracle = brute_force_oracle(&inst).map_err(|e| e.to_string())?;
    ensure!(exact.pairs() == vec![(0, 0)], "exact chose {:?}", exact.pairs());
    ensure!(oracle.pairs() == vec![(0, 0)], "oracle chose {:?}", oracle.pairs());
    ensure!(exact.objective == 90.0 && exact.vehicles_used == 1, "objective {}", exact.objective);
    Ok("A alone, 90 s, 1 vehicle (oracle agrees)".into())
}

fn flood() -> ScenarioBundle {
    load_scenario(&common::scenario_dir("compiegne-flood")).unwrap()
}

fn criterion_4() -> Outcome {
    let b = flood();
    let fleet = &b.entities.moving_resources;
    ensure!(fleet.len() == 52, "{} vehicles", fleet.len());
    let seats: u32 = fleet.iter().map(|r| r.seats).sum();
    ensure!(seats == 302, "{seats} seats");
    let caps: Vec<u32> = b.entities.shelters.iter().map(|s| s.capacity).collect();
    ensure!(caps == [320, 120, 240], "capacities {caps:?}");

    let start = Instant::now();
    let doc = run_scenario(&b).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1} s");
    ensure!(doc.status == PlanStatus::Optimal, "status {:?}", doc.status);
    for p in &doc.per_point {
        ensure!(p.seats_delivered >= p.nb_people + 2 * p.nb_disabled, "{} short", p.point_id);
    }
    let first = &doc.per_point[0];
    ensure!(first.priority == 1 && first.nb_people == 100, "first block is {}", first.point_id);
    let placed: u32 = doc.shelters.allocations.iter().map(|a| a.persons).sum();
    ensure!(placed == 172 && placed <= 680, "{placed} placed");
    ensure!(doc.shelters.occupancy.iter().all(|o| o.occupied <= o.capacity), "shelter over capacity");

    let mut tripled = flood();
    for p in &mut tripled.request.points {
        p.nb_people *= 3;
        p.nb_disabled *= 3;
    }
    let big = run_scenario(&tripled).map_err(|e| e.to_string())?;
    ensure!(big.status == PlanStatus::Infeasible, "x3 status {:?}", big.status);
    ensure!(exit_code(&big) == 2, "x3 exit code");
    let deficits: Vec<u32> = big.per_point.iter().map(|p| p.deficit).collect();
    ensure!(deficits.iter().any(|&d| d > 0), "no deficits reported");
    Ok(format!(
        "optimal, {:.1} s objective, {} vehicles, {secs:.3} s; x3 infeasible with deficits {deficits:?}",
        doc.objective_s, doc.vehicles_used
    ))
}

fn random_graph(rng: &mut impl Rng) -> (RoadGraph, Vec<NodeId>, bool) {
    let n = rng.random_range(2..=50);
    let directed = rng.random_bool(0.5);
    let ids: Vec<NodeId> = (0..n).map(|i| 1000 + i * 3).collect();
    let nodes: Vec<(NodeId, GeoPoint)> = ids
        .iter()
        .map(|&id| (id, GeoPoint::new(49.3 + rng.random_range(0.0..0.1), 2.7 + rng.random_range(0.0..0.1))))
        .collect();
    let edges = (0..rng.random_range(0..=3 * n))
        .map(|_| Edge {
            from: *ids.choose(rng).unwrap(),
            to: *ids.choose(rng).unwrap(),
            length_m: rng.random_range(5.0..3000.0),
            speed_kmh: *[15.0, 30.0, 50.0, 90.0].choose(rng).unwrap(),
        })
        .collect();
    (RoadGraph::new(directed, nodes, edges).unwrap(), ids, directed)
}

fn criterion_5() -> Outcome {
    let mut rng = common::rng(5005);
    let mut pairs = 0;
    for g_i in 0..20 {
        let (g, ids, directed) = random_graph(&mut rng);
        let n = ids.len();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let idx: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        for e in g.edges() {
            let (a, b) = (idx[&e.from], idx[&e.to]);
            let t = e.length_m * 3.6 / e.speed_kmh;
            d[a][b] = d[a][b].min(t);
            if !directed {
                d[b][a] = d[b][a].min(t);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        for (i, &a) in ids.iter().enumerate() {
            for (j, &b) in ids.iter().enumerate() {
                let got = g.travel_time(a, b).map_err(|e| e.to_string())?;
                match got {
                    None => ensure!(d[i][j].is_infinite(), "graph {g_i}: {a}->{b} missing"),
                    Some(t) => ensure!((t - d[i][j]).abs() <= 1e-9, "graph {g_i}: {a}->{b} {t} vs {}", d[i][j]),
                }
                pairs += 1;
            }
        }
    }
    let anti = haversine_distance(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0)).map_err(|e| e.to_string())?;
    let want = std::f64::consts::PI * 6_371_000.0;
    ensure!((anti - want).abs() <= 1.0, "antipodal {anti} vs {want}");
    Ok(format!("20 graphs, {pairs} pairs match Floyd-Warshall; antipodal {anti:.1} m"))
}

const REFERENCE: &str = include_str!("../../core/tests/fixtures/reference.triples");

/// One seeded defect per violation class, as edits to the reference file.
fn seeded_defects() -> Vec<(&'static str, String)> {
    let drop = |needle: &str| REFERENCE.lines().filter(|l| !l.contains(needle)).collect::<Vec<_>>().join("\n");
    let add = |extra: &str| format!("{REFERENCE}\n{extra}\n");
    vec![
        ("missing_property", drop("nb_of_Seat")),
        ("missing_location", drop("RescuePoint_01\thas_Address")),
        ("conflicting_values", add("Shelter_01\thas_capacity\t300")),
        ("invalid_count", add("RescuePoint_01\thas_Total_Disabled\t-3")),
        ("pair_cardinality", drop("Henri_Le\tis_a_Part_of")),
        ("untyped_part", add("Trailer\tis_a_Part_of\tHenri_Le/Toyota_Sienna")),
        ("dangling_part", add("Henri_Le\tis_a_Part_of\tNobody/Nothing")),
        ("ambiguous_type", add("Shelter_01\trdf:type\tcmo:RescuePoint")),
        ("capacity_exceeded", add("Shelter_01\thas_Occupied\t250")),
        ("invalid_priority", add("RescuePoint_01\thas_Priority\t0")),
        (
            "empty_rescue_point",
            drop("has_Total_People") + "\nRescuePoint_01\thas_Total_People\t0\n",
        ),
        (
            "no_capacity",
            drop("nb_of_Seat") + "\nToyota_Sienna\tnb_of_Seat\t0\n",
        ),
    ]
}

fn criterion_6() -> Outcome {
    let mut rng = common::rng(6006);
    for i in 0..100 {
        let set = common::random_entity_set(&mut rng).normalized();
        let store = set.to_store().map_err(|e| format!("set {i}: {e}"))?;
        let text = serialize_store(&store);
        let loaded = load_store(&text).map_err(|e| format!("set {i}: {e}"))?;
        ensure!(loaded == store, "set {i}: store differs after reload");
        let back: EntitySet = materialize_all(&loaded).map_err(|e| format!("set {i}: {e}"))?;
        ensure!(back == set, "set {i}: entities differ after round trip");
    }
    let base = load_store(REFERENCE).map_err(|e| e.to_string())?;
    ensure!(validate_consistency(&base).is_ok(), "reference store not clean");
    let defects = seeded_defects();
    for (code, text) in &defects {
        let store = load_store(text).map_err(|e| format!("{code}: {e}"))?;
        let report = validate_consistency(&store);
        ensure!(
            report.violations.iter().any(|v| v.kind.code() == *code),
            "{code} not detected; got {:?}",
            report.violations.iter().map(|v| v.kind.code()).collect::<Vec<_>>()
        );
    }
    Ok(format!("100 sets round-trip; {} seeded violation classes detected", defects.len()))
}

fn criterion_7() -> Outcome {
    let one = render_report(&run_scenario(&flood()).map_err(|e| e.to_string())?, ReportFormat::Structured);
    let two = render_report(&run_scenario(&flood()).map_err(|e| e.to_string())?, ReportFormat::Structured);
    ensure!(one == two, "structured reports differ between runs");

    let dir = common::scenario_dir("compiegne-flood");
    let out = Command::new(env!("CARGO_BIN_EXE_evac"))
        .args(["run", dir.to_str().unwrap(), "--format", "structured"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.code() == Some(0), "cli exit {:?}", out.status.code());
    let cli_doc = PlanDocument::from_json(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;

    let b = flood();
    let desk = Dispatcher::open(Some(&b.entities), b.graph.clone(), b.gazetteer.clone(), ServiceConfig::default())
        .map_err(|e| e.to_string())?;
    let app = evac_service::router(
        Arc::new(desk),
        evac_service::Tokens {
            driver: "d".into(),
            decision_maker: "m".into(),
        },
    );
    let body = serde_json::to_vec(&b.request).map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(|e| e.to_string())?;
    let bytes = rt.block_on(async {
        let req = Request::post("/recommendations")
            .header("authorization", "Bearer m")
            .header("content-type", "application/json")
            .body(Body::from(body))
            .unwrap();
        let resp = app.oneshot(req).await.unwrap();
        axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap()
    });
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    let service_doc: PlanDocument = serde_json::from_value(value["plan"].clone()).map_err(|e| format!("{e}: {value}"))?;
    ensure!(service_doc == cli_doc, "CLI and service plans differ");
    ensure!(cli_doc.to_json() + "\n" == one, "CLI output differs from library output");
    Ok(format!("byte-identical reruns ({} bytes); CLI == service", one.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("constraint satisfaction", criterion_1),
        ("oracle optimality", criterion_2),
        ("tie-break to fewer vehicles", criterion_3),
        ("scenario reproduction", criterion_4),
        ("routing exactness", criterion_5),
        ("knowledge-base round trip", criterion_6),
        ("determinism and parity", criterion_7),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
