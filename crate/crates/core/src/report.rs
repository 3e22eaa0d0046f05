//! Plan rendering for humans and tools.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::document::PlanDocument;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
    MatrixCsv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            "matrix-csv" | "csv" => Ok(ReportFormat::MatrixCsv),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

pub fn render_report(doc: &PlanDocument, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(doc),
        ReportFormat::Structured => doc.to_json() + "\n",
        ReportFormat::MatrixCsv => render_matrix_csv(doc),
    }
}

/// 0/1 grid, rows in plan order, header row of resource ids. No trailing
/// newline.
pub fn render_matrix_csv(doc: &PlanDocument) -> String {
    let on: BTreeSet<(&str, &str)> = doc
        .assignments
        .iter()
        .map(|a| (a.point_id.as_str(), a.resource_id.as_str()))
        .collect();
    let mut lines = Vec::with_capacity(doc.per_point.len() + 1);
    let header: Vec<&str> = std::iter::once("").chain(doc.resource_ids.iter().map(String::as_str)).collect();
    lines.push(header.join(","));
    for p in &doc.per_point {
        let mut row = vec![p.point_id.clone()];
        row.extend(
            doc.resource_ids
                .iter()
                .map(|r| if on.contains(&(p.point_id.as_str(), r.as_str())) { "1" } else { "0" }.to_string()),
        );
        lines.push(row.join(","));
    }
    lines.join("\n")
}

fn render_text(doc: &PlanDocument) -> String {
    let mut out = String::new();
    let solver = serde_json::to_value(doc.solver).unwrap();
    let _ = writeln!(out, "Status: {} ({} solver)", doc.status.as_str(), solver.as_str().unwrap_or("?"));
    let _ = writeln!(out, "Objective: {:.1} s", doc.objective_s);
    let _ = writeln!(out, "Vehicles used: {}", doc.vehicles_used);
    let _ = writeln!(out, "{} points served, {} unserved", doc.points_served, doc.points_unserved);

    for p in &doc.per_point {
        out.push('\n');
        let state = if p.served {
            "served".to_string()
        } else {
            format!("UNSERVED, deficit {}", p.deficit)
        };
        let _ = writeln!(
            out,
            "{}  priority {}  demand {}  delivered {}  {}",
            p.point_id, p.priority, p.demand, p.seats_delivered, state
        );
        if let Some(a) = &p.address {
            let _ = writeln!(out, "  address: {a}");
        }
        let _ = writeln!(
            out,
            "  people {} + disabled {} at {:.5},{:.5}",
            p.nb_people, p.nb_disabled, p.location.lat, p.location.lon
        );
        if !p.resources.is_empty() {
            let width = p.resources.iter().map(|r| r.resource_id.len()).max().unwrap_or(0).max(8);
            let _ = writeln!(out, "  {:<width$}  {:<10} {:>5} {:>9}", "resource", "class", "seats", "time_s");
            for r in &p.resources {
                let _ = writeln!(
                    out,
                    "  {:<width$}  {:<10} {:>5} {:>9.1}",
                    r.resource_id,
                    r.vehicle_class.label(),
                    r.seats,
                    r.time_s
                );
            }
        }
        for s in &p.shelters {
            let _ = writeln!(
                out,
                "  -> {} ({}): {} persons, {:.1} s",
                s.shelter_id, s.shelter_name, s.persons, s.time_s
            );
        }
    }

    if !doc.shelters.occupancy.is_empty() {
        out.push_str("\nShelters:\n");
        for o in &doc.shelters.occupancy {
            let _ = writeln!(out, "  {}  {}/{}", o.shelter_id, o.occupied, o.capacity);
        }
    }
    if doc.shelters.capacity_exhausted {
        out.push_str("Shelter capacity exhausted:\n");
        for s in &doc.shelters.shortfall {
            let _ = writeln!(out, "  {}: {} persons without a place", s.point_id, s.unplaced);
        }
    }
    for n in &doc.notices {
        let _ = writeln!(out, "Notice: {}", serde_json::to_string(n).unwrap());
    }
    out
}
