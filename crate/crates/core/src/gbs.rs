//! Generalized Baumslag-Solitar groups as labelled graphs, elementary
//! collapses, and the classification into infinite cyclic, soluble BS(1,j),
//! or SQ-universal with an explicit witness quotient.
//!
//! An edge between u and v carries a nonzero integer at each end, the index
//! of the edge group in the adjacent vertex group. Collapsing an edge with
//! a ±1 end removes the redundant vertex generator and multiplies its other
//! labels by the far label (and the ±1 sign).

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GbsError {
    #[error("graph must be connected")]
    Disconnected,
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("edge {0} has a zero label")]
    ZeroLabel(usize),
    #[error("edge {0} has an out-of-range endpoint")]
    BadEndpoint(usize),
    #[error("edge is not collapsible (self-loop or no ±1 end)")]
    NotCollapsible,
    #[error("graph is not a tree")]
    NotATree,
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GbsEdge {
    pub u: usize,
    pub v: usize,
    /// Label at the u end.
    pub lu: i64,
    /// Label at the v end.
    pub lv: i64,
}

impl GbsEdge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Finite connected multigraph with a nonzero label at each edge end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GbsGraph {
    pub vertices: usize,
    pub edges: Vec<GbsEdge>,
}

impl GbsGraph {
    pub fn new(vertices: usize, edges: Vec<GbsEdge>) -> Result<Self, GbsError> {
        let g = GbsGraph { vertices, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GbsError> {
        if self.vertices == 0 {
            return Err(GbsError::Empty);
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.u >= self.vertices || e.v >= self.vertices {
                return Err(GbsError::BadEndpoint(i));
            }
            if e.lu == 0 || e.lv == 0 {
                return Err(GbsError::ZeroLabel(i));
            }
        }
        if !self.is_connected() {
            return Err(GbsError::Disconnected);
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// E − V + 1 for a connected graph; self-loops count as cycles.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph gbs {\n");
        for v in 0..self.vertices {
            out.push_str(&format!("  v{v};\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -- v{} [taillabel=\"{}\", headlabel=\"{}\"];\n",
                e.u, e.v, e.lu, e.lv
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Contracts a non-loop edge with a ±1 end. The vertex at the ±1 end is
/// absorbed into the far vertex and every other label at the absorbed
/// vertex is multiplied by `far_label · sign(±1 end)`.
pub fn elementary_collapse(g: &GbsGraph, edge_index: usize) -> Result<GbsGraph, GbsError> {
    let e = *g
        .edges
        .get(edge_index)
        .ok_or(GbsError::BadEndpoint(edge_index))?;
    if e.is_loop() {
        return Err(GbsError::NotCollapsible);
    }
    // absorb the ±1 end; prefer the u end when both qualify
    let (absorbed, survivor, factor) = if e.lu.abs() == 1 {
        (e.u, e.v, e.lv * e.lu.signum())
    } else if e.lv.abs() == 1 {
        (e.v, e.u, e.lu * e.lv.signum())
    } else {
        return Err(GbsError::NotCollapsible);
    };
    let remap = |w: usize| {
        let w = if w == absorbed { survivor } else { w };
        if w > absorbed {
            w - 1
        } else {
            w
        }
    };
    let mut edges = Vec::with_capacity(g.edges.len() - 1);
    for (i, other) in g.edges.iter().enumerate() {
        if i == edge_index {
            continue;
        }
        let mut lu = other.lu;
        let mut lv = other.lv;
        if other.u == absorbed {
            lu *= factor;
        }
        if other.v == absorbed {
            lv *= factor;
        }
        edges.push(GbsEdge {
            u: remap(other.u),
            v: remap(other.v),
            lu,
            lv,
        });
    }
    GbsGraph::new(g.vertices - 1, edges)
}

/// Collapses until every edge with a ±1 end is a self-loop, always taking
/// the lowest-index collapsible edge first.
pub fn normal_form(g: &GbsGraph) -> GbsGraph {
    let mut g = g.clone();
    loop {
        let target = g
            .edges
            .iter()
            .position(|e| !e.is_loop() && (e.lu.abs() == 1 || e.lv.abs() == 1));
        match target {
            Some(i) => g = elementary_collapse(&g, i).expect("collapsible by selection"),
            None => return g,
        }
    }
}

/// Values of the canonical map to Z on the vertex generators of a tree GBS
/// graph: the edge relation forces θ(h_u)·lu = θ(h_v)·lv, and the ratios
/// are cleared to a primitive integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaMap {
    pub values: Vec<i64>,
}

impl ThetaMap {
    pub fn satisfies(&self, g: &GbsGraph) -> bool {
        self.values.iter().all(|&v| v != 0)
            && g.edges
                .iter()
                .filter(|e| !e.is_loop())
                .all(|e| self.values[e.u] * e.lu == self.values[e.v] * e.lv)
    }
}

/// Propagates θ from the lowest-index vertex over a tree, then clears
/// denominators to a primitive all-nonzero integer vector.
pub fn deficiency_one_map(tree: &GbsGraph) -> Result<ThetaMap, GbsError> {
    if tree.cycle_rank() != 0 {
        return Err(GbsError::NotATree);
    }
    let n = tree.vertices;
    let mut vals: Vec<Option<Ratio<i64>>> = vec![None; n];
    vals[0] = Some(Ratio::new(1, 1));
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        let val = vals[v].unwrap();
        for e in &tree.edges {
            if e.u == v && vals[e.v].is_none() {
                vals[e.v] = Some(val * Ratio::new(e.lu, e.lv));
                stack.push(e.v);
            } else if e.v == v && vals[e.u].is_none() {
                vals[e.u] = Some(val * Ratio::new(e.lv, e.lu));
                stack.push(e.u);
            }
        }
    }
    let rats: Vec<Ratio<i64>> = vals
        .into_iter()
        .map(|v| v.ok_or(GbsError::Disconnected))
        .collect::<Result<_, _>>()?;
    let lcm = rats.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let mut ints: Vec<i64> = rats.iter().map(|r| r.numer() * (lcm / r.denom())).collect();
    let gcd = ints.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if gcd > 1 {
        for x in &mut ints {
            *x /= gcd;
        }
    }
    let theta = ThetaMap { values: ints };
    if !theta.satisfies(tree) {
        return Err(GbsError::Inconsistent(
            "theta propagation failed its edge equations".into(),
        ));
    }
    Ok(theta)
}

/// Witness data for the SQ-universal verdict; enough to audit the claimed
/// quotient by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SqWitness {
    /// Two or more independent cycles: the group surjects onto F2 by
    /// killing all vertex generators.
    FreeRankTwo { cycle_rank: usize },
    /// Normal form is a tree with edges: virtually F_k × Z, hence large.
    TreeCase { theta: ThetaMap },
    /// Surjection onto BS(i, j) with |i|, |j| ≥ 2, via θ on the tree left
    /// after removing one cycle edge.
    BsQuotient {
        i: i64,
        j: i64,
        removed_edge: GbsEdge,
        theta: ThetaMap,
    },
    /// Surjection onto Z * Z/p through a chosen edge at the loop vertex.
    SelfLoopZp {
        p: i64,
        edge: GbsEdge,
        theta: ThetaMap,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum GbsClassification {
    InfiniteCyclic,
    /// BS(1, j); j = ±1 gives Z² or the Klein bottle group, still soluble.
    SolubleBS {
        j: i64,
    },
    SQUniversal {
        witness: SqWitness,
    },
}

impl GbsClassification {
    /// Structural sanity demanded of every emitted value.
    pub fn check_witness(&self, normal: &GbsGraph) -> Result<(), GbsError> {
        match self {
            GbsClassification::SQUniversal { witness } => match witness {
                SqWitness::BsQuotient { i, j, theta, .. } => {
                    if i.abs() < 2 || j.abs() < 2 {
                        return Err(GbsError::Inconsistent(format!(
                            "BS({i},{j}) witness has a ±1 entry"
                        )));
                    }
                    if theta.values.contains(&0) {
                        return Err(GbsError::Inconsistent("theta has a zero value".into()));
                    }
                    Ok(())
                }
                SqWitness::SelfLoopZp { p, edge, .. } => {
                    if *p < 2 || edge.lv % p != 0 {
                        return Err(GbsError::Inconsistent(format!(
                            "prime {p} does not divide the far label {}",
                            edge.lv
                        )));
                    }
                    Ok(())
                }
                _ => Ok(()),
            },
            GbsClassification::SolubleBS { .. } => {
                let lone_loop = normal.vertices == 1
                    && normal.edges.len() == 1
                    && normal.edges[0].is_loop()
                    && (normal.edges[0].lu.abs() == 1 || normal.edges[0].lv.abs() == 1);
                if lone_loop {
                    Ok(())
                } else {
                    Err(GbsError::Inconsistent(
                        "soluble verdict without a lone ±1 self-loop".into(),
                    ))
                }
            }
            GbsClassification::InfiniteCyclic => Ok(()),
        }
    }
}

fn smallest_prime_factor(n: i64) -> i64 {
    let n = n.abs();
    debug_assert!(n >= 2);
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

/// Finds the unique cycle of a rank-1 graph as a set of edge indices, by
/// repeatedly stripping leaves.
fn cycle_edges(g: &GbsGraph) -> Vec<usize> {
    debug_assert_eq!(g.cycle_rank(), 1);
    let mut alive: Vec<bool> = g.edges.iter().map(|_| true).collect();
    loop {
        let mut degree = vec![0usize; g.vertices];
        for (i, e) in g.edges.iter().enumerate() {
            if alive[i] {
                degree[e.u] += 1;
                degree[e.v] += 1;
            }
        }
        let leaf_edge = (0..g.edges.len()).find(|&i| {
            alive[i]
                && !g.edges[i].is_loop()
                && (degree[g.edges[i].u] == 1 || degree[g.edges[i].v] == 1)
        });
        match leaf_edge {
            Some(i) => alive[i] = false,
            None => break,
        }
    }
    (0..g.edges.len()).filter(|&i| alive[i]).collect()
}

/// θ on the graph with one edge removed (which must leave a tree spanning
/// all vertices).
fn theta_without_edge(g: &GbsGraph, skip: usize) -> Result<ThetaMap, GbsError> {
    let edges: Vec<GbsEdge> = g
        .edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, e)| *e)
        .collect();
    let tree = GbsGraph::new(g.vertices, edges)?;
    deficiency_one_map(&tree)
}

/// Full classification; every emitted witness is re-checked before return.
pub fn classify(g: &GbsGraph) -> Result<GbsClassification, GbsError> {
    g.validate()?;
    let nf = normal_form(g);
    let out = classify_normal(&nf)?;
    out.check_witness(&nf).map(|_| out)
}

fn classify_normal(nf: &GbsGraph) -> Result<GbsClassification, GbsError> {
    let rank = nf.cycle_rank();
    if rank >= 2 {
        return Ok(GbsClassification::SQUniversal {
            witness: SqWitness::FreeRankTwo { cycle_rank: rank },
        });
    }
    if rank == 0 {
        if nf.edges.is_empty() {
            return Ok(GbsClassification::InfiniteCyclic);
        }
        let theta = deficiency_one_map(nf)?;
        return Ok(GbsClassification::SQUniversal {
            witness: SqWitness::TreeCase { theta },
        });
    }
    // exactly one cycle
    let cycle = cycle_edges(nf);
    let loop_idx = cycle.iter().copied().find(|&i| nf.edges[i].is_loop());
    match loop_idx {
        None => {
            // remove the lowest-index cycle edge; its ends have labels of
            // modulus ≥ 2 because the graph is in normal form
            let removed = cycle[0];
            let e = nf.edges[removed];
            let theta = theta_without_edge(nf, removed)?;
            let (i, j) = (theta.values[e.u] * e.lu, theta.values[e.v] * e.lv);
            debug_assert!(i.abs() >= 2 && j.abs() >= 2);
            Ok(GbsClassification::SQUniversal {
                witness: SqWitness::BsQuotient {
                    i,
                    j,
                    removed_edge: e,
                    theta,
                },
            })
        }
        Some(li) => {
            let e = nf.edges[li];
            // orient the loop labels so a ±1 comes first
            let (m, nn) = if e.lv.abs() == 1 && e.lu.abs() != 1 {
                (e.lv, e.lu)
            } else {
                (e.lu, e.lv)
            };
            let whole_graph = nf.vertices == 1 && nf.edges.len() == 1;
            if whole_graph {
                if m.abs() == 1 {
                    return Ok(GbsClassification::SolubleBS { j: nn * m.signum() });
                }
                let theta = ThetaMap { values: vec![1] };
                return Ok(GbsClassification::SQUniversal {
                    witness: SqWitness::BsQuotient {
                        i: m,
                        j: nn,
                        removed_edge: e,
                        theta,
                    },
                });
            }
            let theta = theta_without_edge(nf, li)?;
            let k1 = theta.values[e.u];
            if (k1 * m).abs() >= 2 && (k1 * nn).abs() >= 2 {
                return Ok(GbsClassification::SQUniversal {
                    witness: SqWitness::BsQuotient {
                        i: k1 * m,
                        j: k1 * nn,
                        removed_edge: e,
                        theta,
                    },
                });
            }
            // |k1·m| = 1: pick the lowest-index non-loop edge at the loop
            // vertex; theta maps the loop generator to ±1, which forces the
            // far label to divide the near one
            let vertex = e.u;
            let chosen = nf
                .edges
                .iter()
                .enumerate()
                .find(|(i, o)| *i != li && !o.is_loop() && (o.u == vertex || o.v == vertex))
                .map(|(i, _)| i)
                .ok_or_else(|| GbsError::Inconsistent("loop vertex has no other edge".into()))?;
            // orient the chosen edge with the loop vertex first
            let o = nf.edges[chosen];
            let oriented = if o.u == vertex {
                o
            } else {
                GbsEdge {
                    u: o.v,
                    v: o.u,
                    lu: o.lv,
                    lv: o.lu,
                }
            };
            if oriented.lu % oriented.lv != 0 {
                return Err(GbsError::Inconsistent(format!(
                    "far label {} must divide near label {} at a ±1 loop vertex",
                    oriented.lv, oriented.lu
                )));
            }
            let p = smallest_prime_factor(oriented.lv);
            Ok(GbsClassification::SQUniversal {
                witness: SqWitness::SelfLoopZp {
                    p,
                    edge: oriented,
                    theta,
                },
            })
        }
    }
}
