use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use petgraph::graph::{DiGraph, NodeIndex};

use super::RoutingError;
use crate::geo::{haversine_unchecked, GeoPoint};

pub type NodeId = u64;

/// Speed assumed for edges that omit one, and for straight-line fallbacks.
pub const DEFAULT_SPEED_KMH: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub speed_kmh: f64,
}

impl Edge {
    /// Traversal time in seconds.
    pub fn seconds(&self) -> f64 {
        self.length_m / (self.speed_kmh / 3.6)
    }
}

/// Immutable street graph. Undirected files get both arc directions.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    directed: bool,
    nodes: BTreeMap<NodeId, GeoPoint>,
    edges: Vec<Edge>,
    graph: DiGraph<NodeId, f64>,
    index: HashMap<NodeId, NodeIndex>,
}

impl RoadGraph {
    pub fn new(
        directed: bool,
        nodes: impl IntoIterator<Item = (NodeId, GeoPoint)>,
        edges: Vec<Edge>,
    ) -> Result<Self, RoutingError> {
        let mut map = BTreeMap::new();
        for (id, p) in nodes {
            if p.validate().is_err() {
                return Err(RoutingError::Parse {
                    line: 0,
                    message: format!("node {id} has out-of-range coordinates"),
                });
            }
            if map.insert(id, p).is_some() {
                return Err(RoutingError::Parse {
                    line: 0,
                    message: format!("duplicate node {id}"),
                });
            }
        }
        let lines = vec![0; edges.len()];
        Self::assemble(directed, map, edges, &lines)
    }

    fn assemble(
        directed: bool,
        nodes: BTreeMap<NodeId, GeoPoint>,
        edges: Vec<Edge>,
        edge_lines: &[usize],
    ) -> Result<Self, RoutingError> {
        if nodes.is_empty() {
            return Err(RoutingError::EmptyGraph);
        }
        let mut graph = DiGraph::with_capacity(nodes.len(), edges.len() * 2);
        let index: HashMap<NodeId, NodeIndex> = nodes.keys().map(|&id| (id, graph.add_node(id))).collect();
        for (e, &line) in edges.iter().zip(edge_lines) {
            if !(e.length_m > 0.0 && e.length_m.is_finite() && e.speed_kmh > 0.0 && e.speed_kmh.is_finite()) {
                return Err(RoutingError::Parse {
                    line,
                    message: format!("edge {}->{} needs positive length and speed", e.from, e.to),
                });
            }
            let endpoint = |n: NodeId| {
                index
                    .get(&n)
                    .copied()
                    .ok_or(RoutingError::DanglingEdgeEndpoint { line, node: n })
            };
            let (a, b) = (endpoint(e.from)?, endpoint(e.to)?);
            graph.add_edge(a, b, e.seconds());
            if !directed {
                graph.add_edge(b, a, e.seconds());
            }
        }
        Ok(Self {
            directed,
            nodes,
            edges,
            graph,
            index,
        })
    }

    /// Parses the graph file format:
    ///
    /// ```text
    /// directed false
    /// node 1 49.4170 2.8260
    /// edge 1 2 1000 36
    /// ```
    pub fn parse(text: &str) -> Result<Self, RoutingError> {
        let mut directed = false;
        let mut nodes = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let err = |message: &str| RoutingError::Parse {
                line,
                message: message.to_string(),
            };
            let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| err(&format!("bad {what} `{s}`")));
            let id = |s: &str| s.parse::<NodeId>().map_err(|_| err(&format!("bad node id `{s}`")));
            match fields[0] {
                "directed" => {
                    directed = match fields.get(1).copied() {
                        Some("true") if fields.len() == 2 => true,
                        Some("false") if fields.len() == 2 => false,
                        _ => return Err(err("expected `directed true|false`")),
                    }
                }
                "node" => {
                    if fields.len() != 4 {
                        return Err(err("expected `node <id> <lat> <lon>`"));
                    }
                    let p = GeoPoint::new(num(fields[2], "latitude")?, num(fields[3], "longitude")?);
                    p.validate().map_err(|e| err(&e.to_string()))?;
                    if nodes.insert(id(fields[1])?, p).is_some() {
                        return Err(err(&format!("duplicate node {}", fields[1])));
                    }
                }
                "edge" => {
                    if !(4..=5).contains(&fields.len()) {
                        return Err(err("expected `edge <from> <to> <length_m> [speed_kmh]`"));
                    }
                    let speed_kmh = match fields.get(4) {
                        Some(s) => num(s, "speed")?,
                        None => DEFAULT_SPEED_KMH,
                    };
                    edges.push(Edge {
                        from: id(fields[1])?,
                        to: id(fields[2])?,
                        length_m: num(fields[3], "length")?,
                        speed_kmh,
                    });
                    edge_lines.push(line);
                }
                other => return Err(err(&format!("unknown record `{other}`"))),
            }
        }
        Self::assemble(directed, nodes, edges, &edge_lines)
    }

    pub fn load(path: &Path) -> Result<Self, RoutingError> {
        let text = std::fs::read_to_string(path).map_err(|e| RoutingError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, GeoPoint)> + '_ {
        self.nodes.iter().map(|(&id, &p)| (id, p))
    }

    pub fn coordinate(&self, id: NodeId) -> Option<GeoPoint> {
        self.nodes.get(&id).copied()
    }

    /// Nearest node by great-circle distance; ties go to the smaller id.
    pub fn snap_to_node(&self, p: GeoPoint) -> NodeId {
        let mut best: Option<(f64, NodeId)> = None;
        for (&id, &q) in &self.nodes {
            let d = haversine_unchecked(p, q);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        }
        best.expect("graph has at least one node").1
    }

    /// Shortest-path time in seconds, `None` when `to` cannot be reached.
    pub fn travel_time(&self, from: NodeId, to: NodeId) -> Result<Option<f64>, RoutingError> {
        let (a, b) = (self.node_index(from)?, self.node_index(to)?);
        if a == b {
            return Ok(Some(0.0));
        }
        Ok(petgraph::algo::dijkstra(&self.graph, a, Some(b), |e| *e.weight()).get(&b).copied())
    }

    /// Times from `from` to every reachable node.
    pub fn travel_times_from(&self, from: NodeId) -> Result<HashMap<NodeId, f64>, RoutingError> {
        let a = self.node_index(from)?;
        Ok(petgraph::algo::dijkstra(&self.graph, a, None, |e| *e.weight())
            .into_iter()
            .map(|(ix, t)| (self.graph[ix], t))
            .collect())
    }

    fn node_index(&self, id: NodeId) -> Result<NodeIndex, RoutingError> {
        self.index.get(&id).copied().ok_or(RoutingError::UnknownNode(id))
    }
}
