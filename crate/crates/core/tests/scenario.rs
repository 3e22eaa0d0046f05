mod common;

use std::time::Instant;

use evac_core::allocator::{build_instance, AllocationInstance, PlanStatus};
use evac_core::document::PlanDocument;
use evac_core::kb::VehicleClass;
use evac_core::pipeline::{RecommendationRequest, RescuePointSpec};
use evac_core::report::{render_report, ReportFormat};
use evac_core::routing::{build_travel_time_matrix, FallbackPolicy, RoutingContext};
use evac_core::scenario::*;

fn flood() -> ScenarioBundle {
    load_scenario(&common::scenario_dir("compiegne-flood")).unwrap()
}

fn flood_instance(b: &ScenarioBundle) -> AllocationInstance {
    let kb = b.knowledge_base().unwrap();
    let points = evac_core::pipeline::resolve_specs(&b.request.points).unwrap();
    let ctx = RoutingContext::new(&b.graph, &b.gazetteer, FallbackPolicy::StraightLine);
    let points: Vec<_> = points
        .into_iter()
        .map(|mut p| {
            p.location = Some(ctx.resolve(&p.id, p.location, p.address.as_deref()).unwrap());
            p
        })
        .collect();
    let m = build_travel_time_matrix(&ctx, &kb.moving_resources, &points).unwrap();
    build_instance(&kb.moving_resources, &points, &m).unwrap().instance
}

#[test]
fn fixture_matches_the_source_tables() {
    let b = flood();
    let r = &b.entities.moving_resources;
    assert_eq!(r.len(), 52);
    assert_eq!(r.iter().map(|r| r.seats).sum::<u32>(), 302);
    let count = |c: VehicleClass| r.iter().filter(|r| r.vehicle_class == c).count();
    assert_eq!(
        [VehicleClass::Minibus, VehicleClass::Minivan, VehicleClass::Van, VehicleClass::Campervan, VehicleClass::Suv, VehicleClass::Berline].map(count),
        [6, 5, 5, 1, 20, 15]
    );
    let caps: Vec<u32> = b.entities.shelters.iter().map(|s| s.capacity).collect();
    assert_eq!(caps, vec![320, 120, 240]);
    let heads: Vec<(u32, u32)> = b.request.points.iter().map(|p| (p.nb_people, p.priority)).collect();
    assert_eq!(heads, vec![(100, 1), (72, 2)]);
    assert_eq!(b.graph.node_count(), 200);
}

#[test]
fn flood_scenario_is_served_optimally() {
    let b = flood();
    let start = Instant::now();
    let doc = run_scenario(&b).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(doc.status, PlanStatus::Optimal);
    assert_eq!(exit_code(&doc), 0);
    assert_eq!(doc.per_point[0].priority, 1);
    assert!(doc.per_point[0].seats_delivered >= 100);
    assert!(doc.per_point[1].seats_delivered >= 72);
    let placed: u32 = doc.shelters.allocations.iter().map(|a| a.persons).sum();
    assert_eq!(placed, 172);
    assert!(doc.shelters.occupancy.iter().all(|o| o.occupied <= o.capacity));
    assert!(!doc.shelters.capacity_exhausted);
}

/// Two-point dynamic program over vehicles with capped delivered seats;
/// returns the least (time, vehicles).
fn two_point_dp(inst: &AllocationInstance) -> (f64, usize) {
    assert_eq!(inst.point_count(), 2);
    let (d0, d1) = (inst.demand(0) as usize, inst.demand(1) as usize);
    let inf = (f64::INFINITY, usize::MAX);
    let mut dp = vec![vec![inf; d1 + 1]; d0 + 1];
    dp[0][0] = (0.0, 0);
    let better = |a: (f64, usize), b: (f64, usize)| {
        if (a.0 - b.0).abs() <= 1e-9 {
            a.1 < b.1
        } else {
            a.0 < b.0
        }
    };
    for v in 0..inst.resource_count() {
        let s = inst.seats(v) as usize;
        let mut next = dp.clone();
        for a in 0..=d0 {
            for c in 0..=d1 {
                let cur = dp[a][c];
                if cur.0.is_infinite() {
                    continue;
                }
                if let Some(t) = inst.time(0, v) {
                    let cand = (cur.0 + t, cur.1 + 1);
                    let slot = &mut next[(a + s).min(d0)][c];
                    if better(cand, *slot) {
                        *slot = cand;
                    }
                }
                if let Some(t) = inst.time(1, v) {
                    let cand = (cur.0 + t, cur.1 + 1);
                    let slot = &mut next[a][(c + s).min(d1)];
                    if better(cand, *slot) {
                        *slot = cand;
                    }
                }
            }
        }
        dp = next;
    }
    dp[d0][d1]
}

#[test]
fn flood_plan_matches_an_independent_dp() {
    let b = flood();
    let doc = run_scenario(&b).unwrap();
    let (cost, vehicles) = two_point_dp(&flood_instance(&b));
    assert!((doc.objective_s - cost).abs() <= 1e-6, "{} vs {cost}", doc.objective_s);
    assert_eq!(doc.vehicles_used, vehicles);
}

#[test]
fn tripled_demand_is_infeasible() {
    let mut b = flood();
    for p in &mut b.request.points {
        p.nb_people *= 3;
    }
    let doc = run_scenario(&b).unwrap();
    assert_eq!(doc.status, PlanStatus::Infeasible);
    assert_eq!(exit_code(&doc), 2);
    assert!(doc.per_point[0].served);
    let unserved = &doc.per_point[1];
    assert!(!unserved.served);
    assert!(unserved.deficit > 0);
    assert_eq!(unserved.deficit, 216 - (302 - doc.per_point[0].seats_delivered).min(216));
}

#[test]
fn golden_files_still_match() {
    let b = flood();
    let doc = run_scenario(&b).unwrap();
    assert_eq!(Some(&doc), b.expected.as_ref());
    let golden = std::fs::read_to_string(common::scenario_dir("compiegne-flood").join("expected.txt")).unwrap();
    assert_eq!(render_report(&doc, ReportFormat::Text), golden);
}

#[test]
fn reruns_are_byte_identical() {
    let b = flood();
    let one = render_report(&run_scenario(&b).unwrap(), ReportFormat::Structured);
    let two = render_report(&run_scenario(&flood()).unwrap(), ReportFormat::Structured);
    assert_eq!(one, two);
    assert_eq!(PlanDocument::from_json(&one).unwrap(), run_scenario(&b).unwrap());
}

#[test]
fn trimmed_fixture_agrees_with_the_oracle() {
    let b = load_scenario(&common::scenario_dir("compiegne-trimmed")).unwrap();
    assert!(b.entities.moving_resources.len() <= 10);
    let (exact, oracle) = oracle_check(&b).unwrap();
    assert!(same_plan(&exact, &oracle));
    assert_eq!(exact.status, PlanStatus::Optimal);
}

#[test]
fn greedy_on_the_flood_is_heuristic_and_no_better() {
    let mut b = flood();
    b.request.options.solver = "greedy".parse().unwrap();
    let greedy = run_scenario(&b).unwrap();
    let exact = run_scenario(&flood()).unwrap();
    assert_eq!(greedy.status, PlanStatus::Heuristic);
    assert!(greedy.objective_s >= exact.objective_s - 1e-9);
}

#[test]
fn default_cap_falls_back_to_greedy() {
    let mut b = flood();
    b.request.options.exact_cap = None;
    assert_eq!(run_scenario(&b).unwrap().status, PlanStatus::Heuristic);
    b.request.options.solver = "exact".parse().unwrap();
    let err = run_scenario(&b).unwrap_err();
    assert_eq!(err.code(), "instance_too_large");
}

#[test]
fn missing_files_are_named() {
    let empty = tempfile::tempdir().unwrap();
    let err = load_scenario(empty.path()).unwrap_err();
    assert_eq!(err.code(), "missing_file");

    let dir = tempfile::tempdir().unwrap();
    let src = common::scenario_dir("compiegne-flood");
    for f in ["entities.toml", "gazetteer.tsv", "request.toml"] {
        std::fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(
        dir.path().join(MANIFEST_FILE),
        "entities = \"entities.toml\"\ngraph = \"graph.txt\"\ngazetteer = \"gazetteer.tsv\"\nrequest = \"request.toml\"\n",
    )
    .unwrap();
    match load_scenario(dir.path()).unwrap_err() {
        ScenarioError::MissingFile { role, .. } => assert_eq!(role, "graph"),
        other => panic!("{other}"),
    }
}

#[test]
fn parse_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let src = common::scenario_dir("compiegne-flood");
    for f in ["entities.toml", "gazetteer.tsv", "request.toml"] {
        std::fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(dir.path().join("graph.txt"), "node 1 49.0 2.0\nedge 1 9 10\n").unwrap();
    std::fs::copy(src.join(MANIFEST_FILE), dir.path().join(MANIFEST_FILE)).unwrap();
    std::fs::write(
        dir.path().join(MANIFEST_FILE),
        "entities = \"entities.toml\"\ngraph = \"graph.txt\"\ngazetteer = \"gazetteer.tsv\"\nrequest = \"request.toml\"\n",
    )
    .unwrap();
    match load_scenario(dir.path()).unwrap_err() {
        ScenarioError::Parse { file, line, .. } => {
            assert!(file.ends_with("graph.txt"));
            assert_eq!(line, Some(2));
        }
        other => panic!("{other}"),
    }
    std::fs::write(dir.path().join("request.toml"), "[[points]]\nnb_people = \"many\"\n").unwrap();
    std::fs::write(dir.path().join("graph.txt"), "node 1 49.0 2.0\n").unwrap();
    match load_scenario(dir.path()).unwrap_err() {
        ScenarioError::Parse { file, line, .. } => {
            assert!(file.ends_with("request.toml"));
            assert_eq!(line, Some(2));
        }
        other => panic!("{other}"),
    }
}

fn tiny_bundle(people: u32) -> (evac_core::routing::RoadGraph, evac_core::routing::Gazetteer, evac_core::kb::EntitySet, RecommendationRequest) {
    let g = evac_core::routing::RoadGraph::parse("node 1 49.0 2.0\n").unwrap();
    let gz = evac_core::routing::Gazetteer::default();
    let kb: evac_core::kb::EntitySet = evac_core::kb::EntitySet::from_toml(
        r#"
[[moving_resources]]
id = "R1"
driver_id = "D1"
vehicle_id = "V1"
vehicle_class = "Van"
seats = 9
location = { lat = 49.0, lon = 2.0 }
"#,
    )
    .unwrap();
    let req = RecommendationRequest {
        points: vec![RescuePointSpec {
            id: Some("P1".into()),
            location: Some(evac_core::geo::GeoPoint::new(49.0, 2.0)),
            nb_people: people,
            priority: 1,
            ..Default::default()
        }],
        ..Default::default()
    };
    (g, gz, kb, req)
}

#[test]
fn one_by_one_matrix_csv() {
    let (g, gz, kb, req) = tiny_bundle(4);
    let doc = evac_core::pipeline::Engine::new(&g, &gz).recommend(&kb, &req).unwrap();
    assert_eq!(render_report(&doc, ReportFormat::MatrixCsv), ",R1\nP1,1");
    // no shelters in the KB: nothing placed, reported as a shortfall
    assert!(doc.shelters.capacity_exhausted);
}

#[test]
fn empty_plan_report() {
    let (g, gz, kb, mut req) = tiny_bundle(4);
    req.points.clear();
    let doc = evac_core::pipeline::Engine::new(&g, &gz).recommend(&kb, &req).unwrap();
    assert_eq!(doc.objective_s, 0.0);
    assert_eq!(doc.status, PlanStatus::Optimal);
    assert!(render_report(&doc, ReportFormat::Text).contains("0 points served"));
}
