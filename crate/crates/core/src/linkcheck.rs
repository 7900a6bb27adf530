//! Vertex links as edge-weighted multigraphs and the Gromov link condition:
//! no essential circuit of angular length below 2π.
//!
//! Weights are exact rational multiples of π, so the 2π comparison never
//! involves floating point. A float-weighted variant is provided for
//! generic graphs; it flags borderline results instead of deciding them.

use crate::par;
use num_rational::Ratio;
use serde::Serialize;
use std::collections::BinaryHeap;
use std::fmt;

/// An angle measured in units of π. `Angle::new(1, 2)` is π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(pub Ratio<i64>);

impl Angle {
    pub fn new(num: i64, den: i64) -> Self {
        Angle(Ratio::new(num, den))
    }

    pub fn zero() -> Self {
        Angle(Ratio::new(0, 1))
    }

    pub fn two_pi() -> Self {
        Angle(Ratio::new(2, 1))
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    pub fn to_f64(&self) -> f64 {
        (*self.0.numer() as f64) / (*self.0.denom() as f64) * std::f64::consts::PI
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &1 {
            write!(f, "{}pi", self.0.numer())
        } else {
            write!(f, "{}/{}pi", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Serialize, serde::Deserialize)]
struct AngleWire {
    num: i64,
    den: i64,
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AngleWire {
            num: *self.0.numer(),
            den: *self.0.denom(),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = AngleWire::deserialize(d)?;
        if wire.den == 0 {
            return Err(serde::de::Error::custom(
                "angle denominator must be nonzero",
            ));
        }
        Ok(Angle::new(wire.num, wire.den))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Angle,
}

/// Weighted multigraph of directions at a vertex: one node per edge-end,
/// one weighted edge per cell corner. Parallel edges and self-loops are
/// allowed and meaningful.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LinkGraph {
    pub node_labels: Vec<String>,
    pub edges: Vec<LinkEdge>,
}

impl LinkGraph {
    pub fn new() -> Self {
        LinkGraph::default()
    }

    pub fn add_node(&mut self, label: impl Into<String>) -> usize {
        self.node_labels.push(label.into());
        self.node_labels.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: Angle) {
        assert!(u < self.node_labels.len() && v < self.node_labels.len());
        assert!(
            weight.0 > Ratio::new(0, 1),
            "link edges must have positive weight"
        );
        self.edges.push(LinkEdge { u, v, weight });
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn degree(&self, n: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == n) as usize + (e.v == n) as usize)
            .sum()
    }

    /// Suppresses valence-2 nodes by merging their two incident edges,
    /// summing weights. Display and fingerprint helper only; girth is
    /// invariant under it but is always computed on the raw graph.
    pub fn suppress_valence_two(&self) -> LinkGraph {
        let mut g = self.clone();
        loop {
            let candidate = (0..g.node_count())
                .find(|&n| g.degree(n) == 2 && !g.edges.iter().any(|e| e.u == n && e.v == n));
            let Some(n) = candidate else { break };
            let incident: Vec<usize> = (0..g.edges.len())
                .filter(|&i| g.edges[i].u == n || g.edges[i].v == n)
                .collect();
            if incident.len() != 2 {
                break; // degree 2 via a doubled edge: leave as is
            }
            let (i, j) = (incident[0], incident[1]);
            let other = |e: &LinkEdge| if e.u == n { e.v } else { e.u };
            let (a, b) = (other(&g.edges[i]), other(&g.edges[j]));
            let w = g.edges[i].weight + g.edges[j].weight;
            let mut edges: Vec<LinkEdge> = g
                .edges
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, e)| e)
                .collect();
            edges.push(LinkEdge {
                u: a,
                v: b,
                weight: w,
            });
            // reindex nodes, dropping n
            let mut labels = g.node_labels;
            labels.remove(n);
            let fix = |x: usize| if x > n { x - 1 } else { x };
            for e in &mut edges {
                e.u = fix(e.u);
                e.v = fix(e.v);
            }
            g = LinkGraph {
                node_labels: labels,
                edges,
            };
        }
        g
    }

    /// Sorted multiset of edge weights; used as a combinatorial fingerprint.
    pub fn weight_multiset(&self) -> Vec<Angle> {
        let mut w: Vec<Angle> = self.edges.iter().map(|e| e.weight).collect();
        w.sort();
        w
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{name}\" {{\n");
        for (i, l) in self.node_labels.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{l}\"];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -- n{} [label=\"{}\"];\n",
                e.u, e.v, e.weight
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Shortest essential circuit length, or None for circuit-free graphs.
/// A self-loop is a circuit; a pair of parallel edges is a circuit; longer
/// circuits never traverse one edge twice in immediate succession.
pub fn weighted_girth(g: &LinkGraph) -> Option<(Angle, Vec<usize>)> {
    let mut best: Option<(Angle, Vec<usize>)> = None;
    let mut consider = |w: Angle, circuit: Vec<usize>| {
        if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
            best = Some((w, circuit));
        }
    };
    for (i, e) in g.edges.iter().enumerate() {
        if e.u == e.v {
            consider(e.weight, vec![i]);
            continue;
        }
        // shortest u-v path avoiding edge i; together with e it closes a circuit
        if let Some((dist, path)) = shortest_path_avoiding(g, e.u, e.v, i) {
            let mut circuit = path;
            circuit.push(i);
            consider(e.weight + dist, circuit);
        }
    }
    best
}

/// Dijkstra over the multigraph, skipping one forbidden edge index.
fn shortest_path_avoiding(
    g: &LinkGraph,
    from: usize,
    to: usize,
    forbidden: usize,
) -> Option<(Angle, Vec<usize>)> {
    let n = g.node_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (neighbor, edge idx)
    for (i, e) in g.edges.iter().enumerate() {
        if i == forbidden {
            continue;
        }
        adj[e.u].push((e.v, i));
        adj[e.v].push((e.u, i));
    }
    let mut dist: Vec<Option<Angle>> = vec![None; n];
    let mut via: Vec<Option<(usize, usize)>> = vec![None; n]; // (prev node, edge idx)
    let mut heap: BinaryHeap<(std::cmp::Reverse<Angle>, usize)> = BinaryHeap::new();
    dist[from] = Some(Angle::zero());
    heap.push((std::cmp::Reverse(Angle::zero()), from));
    while let Some((std::cmp::Reverse(d), node)) = heap.pop() {
        if dist[node] != Some(d) {
            continue;
        }
        if node == to {
            break;
        }
        for &(next, idx) in &adj[node] {
            let nd = d + g.edges[idx].weight;
            if dist[next].is_none_or(|old| nd < old) {
                dist[next] = Some(nd);
                via[next] = Some((node, idx));
                heap.push((std::cmp::Reverse(nd), next));
            }
        }
    }
    let d = dist[to]?;
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let (prev, idx) = via[cur].expect("path exists");
        path.push(idx);
        cur = prev;
    }
    path.reverse();
    Some((d, path))
}

/// Float-weighted girth with a tolerance band for borderline comparisons.
/// Returns (girth, borderline) where borderline means the value is within
/// `tol` of 2π and should not be trusted as a strict verdict.
pub fn weighted_girth_f64(
    edges: &[(usize, usize, f64)],
    nodes: usize,
    tol: f64,
) -> Option<(f64, bool)> {
    let mut best: Option<f64> = None;
    for (i, &(u, v, w)) in edges.iter().enumerate() {
        let total = if u == v {
            Some(w)
        } else {
            dijkstra_f64(edges, nodes, u, v, i).map(|d| d + w)
        };
        if let Some(t) = total {
            if best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    }
    best.map(|b| (b, (b - 2.0 * std::f64::consts::PI).abs() <= tol))
}

fn dijkstra_f64(
    edges: &[(usize, usize, f64)],
    n: usize,
    from: usize,
    to: usize,
    forbidden: usize,
) -> Option<f64> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, &(u, v, w)) in edges.iter().enumerate() {
        if i != forbidden {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[from] = 0.0;
    let mut visited = vec![false; n];
    loop {
        let mut cur = None;
        for i in 0..n {
            if !visited[i] && dist[i].is_finite() && cur.is_none_or(|c: usize| dist[i] < dist[c]) {
                cur = Some(i);
            }
        }
        let Some(c) = cur else { break };
        if c == to {
            return Some(dist[c]);
        }
        visited[c] = true;
        for &(next, w) in &adj[c] {
            if dist[c] + w < dist[next] {
                dist[next] = dist[c] + w;
            }
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexReport {
    pub vertex: usize,
    pub label: String,
    pub girth: Option<Angle>,
    pub pass: bool,
    /// Offending circuit as link-edge indices, present only on failure.
    pub offending: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NpcReport {
    pub pass: bool,
    pub vertices: Vec<VertexReport>,
}

/// Checks the link condition at every vertex of a complex. Per-vertex work
/// is independent; with the `parallel` feature it fans out over a thread
/// pool and the report order is by vertex index either way.
pub fn check_npc(x: &crate::complexbuilder::PE2Complex) -> NpcReport {
    check_npc_with(x, true)
}

/// Same as [`check_npc`] with explicit control over parallel dispatch.
pub fn check_npc_with(x: &crate::complexbuilder::PE2Complex, parallel: bool) -> NpcReport {
    let ids: Vec<usize> = (0..x.vertex_count()).collect();
    let vertices: Vec<VertexReport> = par::map(parallel, &ids, |&v| {
        let link = crate::complexbuilder::vertex_link(x, v);
        let girth = weighted_girth(&link);
        let (pass, offending) = match &girth {
            None => (true, None),
            Some((g, circuit)) => {
                if *g >= Angle::two_pi() {
                    (true, None)
                } else {
                    (false, Some(circuit.clone()))
                }
            }
        };
        VertexReport {
            vertex: v,
            label: x.vertex_label(v).to_string(),
            girth: girth.map(|(g, _)| g),
            pass,
            offending,
        }
    });
    NpcReport {
        pass: vertices.iter().all(|r| r.pass),
        vertices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(weights: &[Angle]) -> LinkGraph {
        let mut g = LinkGraph::new();
        let n = weights.len();
        for i in 0..n {
            g.add_node(format!("n{i}"));
        }
        for (i, &w) in weights.iter().enumerate() {
            g.add_edge(i, (i + 1) % n, w);
        }
        g
    }

    #[test]
    fn four_cycle_of_right_angles() {
        let g = cycle(&[Angle::new(1, 2); 4]);
        let (girth, _) = weighted_girth(&g).unwrap();
        assert_eq!(girth, Angle::two_pi());
    }

    #[test]
    fn three_cycle_fails() {
        let g = cycle(&[Angle::new(1, 2); 3]);
        let (girth, circuit) = weighted_girth(&g).unwrap();
        assert_eq!(girth, Angle::new(3, 2));
        assert_eq!(circuit.len(), 3);
    }

    #[test]
    fn parallel_pair_is_a_circuit() {
        let mut g = LinkGraph::new();
        g.add_node("u");
        g.add_node("v");
        g.add_edge(0, 1, Angle::new(1, 1));
        g.add_edge(0, 1, Angle::new(1, 2));
        let (girth, _) = weighted_girth(&g).unwrap();
        assert_eq!(girth, Angle::new(3, 2));
    }

    #[test]
    fn self_loop_is_a_circuit() {
        let mut g = LinkGraph::new();
        g.add_node("u");
        g.add_edge(0, 0, Angle::new(1, 3));
        let (girth, circuit) = weighted_girth(&g).unwrap();
        assert_eq!(girth, Angle::new(1, 3));
        assert_eq!(circuit, vec![0]);
    }

    #[test]
    fn forest_has_no_circuit() {
        let mut g = LinkGraph::new();
        g.add_node("u");
        g.add_node("v");
        g.add_node("w");
        g.add_edge(0, 1, Angle::new(1, 2));
        g.add_edge(1, 2, Angle::new(1, 2));
        assert!(weighted_girth(&g).is_none());
    }

    #[test]
    fn suppression_preserves_girth() {
        // 6-cycle with two valence-2 nodes suppressed into a 4-cycle
        let g = cycle(&[
            Angle::new(1, 2),
            Angle::new(1, 4),
            Angle::new(1, 4),
            Angle::new(1, 2),
            Angle::new(1, 4),
            Angle::new(1, 4),
        ]);
        let before = weighted_girth(&g).unwrap().0;
        let small = g.suppress_valence_two();
        let after = weighted_girth(&small).unwrap().0;
        assert_eq!(before, after);
        assert!(small.node_count() < g.node_count());
    }

    #[test]
    fn float_girth_flags_borderline() {
        let pi = std::f64::consts::PI;
        let edges = vec![(0usize, 1usize, pi), (0, 1, pi)];
        let (g, borderline) = weighted_girth_f64(&edges, 2, 1e-9).unwrap();
        assert!((g - 2.0 * pi).abs() < 1e-12);
        assert!(borderline);
    }

    #[test]
    fn girth_invariant_under_edge_subdivision() {
        // splitting one corner angle into two summing parts leaves girth fixed
        let g = cycle(&[Angle::new(1, 2), Angle::new(1, 1), Angle::new(1, 2)]);
        let girth0 = weighted_girth(&g).unwrap().0;
        let mut split = LinkGraph::new();
        for l in ["a", "b", "c", "mid"] {
            split.add_node(l);
        }
        split.add_edge(0, 3, Angle::new(1, 4));
        split.add_edge(3, 1, Angle::new(1, 4));
        split.add_edge(1, 2, Angle::new(1, 1));
        split.add_edge(2, 0, Angle::new(1, 2));
        assert_eq!(weighted_girth(&split).unwrap().0, girth0);
    }
}
