//! Piecewise-Euclidean and square complexes for mapping tori of rank-2 free
//! groups.
//!
//! One building block per body letter. The block for λ (and mirror-image ρ)
//! consists of a rectangle carrying the growing generator and two right
//! triangles obtained by cutting the stable generator's cell along a
//! diagonal; the cut isolates the repeated corner that obstructs
//! non-positive curvature in the naive complex. Blocks are glued in a cycle
//! with the time-0 gluing twisted by the tail.
//!
//! The square version re-metrizes the same combinatorics per meeting type:
//! when every meeting pairs triangles across a shared hypotenuse the pairs
//! merge into genuine unit squares; otherwise every triangle flattens onto
//! its length-2 subdivided hypotenuse as a zero-area cell with 0/π corner
//! angles. The zero corners identify the adjacent edge directions in the
//! links, and a same-type meeting's two flat cells over one hypotenuse are
//! the degenerate squares of the generic case.

use crate::linkcheck::{Angle, LinkGraph};
use crate::matdecomp::{AutWord, LrLetter};
use crate::snf::{AbelianInvariants, IntMat};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("empty body: a finite-order mapping torus is covered by the product of a graph and a circle and is built by other means")]
    EmptyBody,
    #[error(
        "degenerate squares would close into a cylinder; this cannot happen for a valid input"
    )]
    DegenerateCylinder,
    #[error("complex validation failed: {0}")]
    Invalid(String),
}

/// Exact edge lengths occurring in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeLength {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    Unit,
    #[serde(rename = "sqrt2")]
    Sqrt2,
    #[serde(rename = "2")]
    Two,
}

impl EdgeLength {
    pub fn to_f64(self) -> f64 {
        match self {
            EdgeLength::Zero => 0.0,
            EdgeLength::Unit => 1.0,
            EdgeLength::Sqrt2 => std::f64::consts::SQRT_2,
            EdgeLength::Two => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeTag {
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "rectangle")]
    Rectangle,
    #[serde(rename = "triangle")]
    Triangle,
    #[serde(rename = "degenerate")]
    Degenerate,
}

/// Oriented reference to an edge inside a cell boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub edge: usize,
    pub reversed: bool,
}

impl EdgeRef {
    pub fn fwd(edge: usize) -> Self {
        EdgeRef {
            edge,
            reversed: false,
        }
    }

    pub fn rev(edge: usize) -> Self {
        EdgeRef {
            edge,
            reversed: true,
        }
    }

    pub fn flipped(self) -> Self {
        EdgeRef {
            edge: self.edge,
            reversed: !self.reversed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: EdgeLength,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub shape: ShapeTag,
    /// Closed cyclic path of oriented edges.
    pub boundary: Vec<EdgeRef>,
    /// `corners[k]` is the interior angle at the vertex between
    /// `boundary[k]` and `boundary[k+1]` (cyclically).
    pub corners: Vec<Angle>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PE2Complex {
    pub vertex_labels: Vec<String>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
}

impl PE2Complex {
    pub fn new() -> Self {
        PE2Complex {
            vertex_labels: Vec::new(),
            edges: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> usize {
        self.vertex_labels.push(label.into());
        self.vertex_labels.len() - 1
    }

    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        length: EdgeLength,
        label: impl Into<String>,
    ) -> usize {
        self.edges.push(Edge {
            from,
            to,
            length,
            label: label.into(),
        });
        self.edges.len() - 1
    }

    pub fn add_cell(
        &mut self,
        label: impl Into<String>,
        shape: ShapeTag,
        boundary: Vec<EdgeRef>,
        corners: Vec<Angle>,
    ) {
        self.cells.push(Cell {
            label: label.into(),
            shape,
            boundary,
            corners,
        });
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn vertex_label(&self, v: usize) -> &str {
        &self.vertex_labels[v]
    }

    /// Start vertex of an oriented traversal.
    pub fn ref_tail(&self, r: EdgeRef) -> usize {
        let e = &self.edges[r.edge];
        if r.reversed {
            e.to
        } else {
            e.from
        }
    }

    /// End vertex of an oriented traversal.
    pub fn ref_head(&self, r: EdgeRef) -> usize {
        let e = &self.edges[r.edge];
        if r.reversed {
            e.from
        } else {
            e.to
        }
    }

    pub fn find_edge(&self, label: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.label == label)
    }

    /// Structural checks: closed boundaries, angle sums, zero-length edges
    /// being loops, shape tags matching side data, connectivity.
    pub fn validate(&self) -> Result<(), ComplexError> {
        let fail = |msg: String| Err(ComplexError::Invalid(msg));
        for e in &self.edges {
            if e.from >= self.vertex_count() || e.to >= self.vertex_count() {
                return fail(format!("edge {} has out-of-range endpoint", e.label));
            }
            if e.length == EdgeLength::Zero && e.from != e.to {
                return fail(format!("zero-length edge {} is not a loop", e.label));
            }
        }
        for c in &self.cells {
            let n = c.boundary.len();
            if n < 1 || c.corners.len() != n {
                return fail(format!("cell {} has mismatched boundary/corners", c.label));
            }
            for k in 0..n {
                let here = self.ref_head(c.boundary[k]);
                let next = self.ref_tail(c.boundary[(k + 1) % n]);
                if here != next {
                    return fail(format!(
                        "cell {} boundary is not closed at position {k}",
                        c.label
                    ));
                }
            }
            let sum: Angle = c.corners.iter().fold(Angle::zero(), |acc, &a| acc + a);
            let expected = Angle::new(n as i64 - 2, 1);
            if sum != expected {
                return fail(format!(
                    "cell {} angle sum {} != {}",
                    c.label, sum, expected
                ));
            }
            let side_lengths: Vec<EdgeLength> = c
                .boundary
                .iter()
                .map(|r| self.edges[r.edge].length)
                .collect();
            match c.shape {
                ShapeTag::Square => {
                    if n != 4
                        || side_lengths.iter().any(|&l| l != EdgeLength::Unit)
                        || c.corners.iter().any(|&a| a != Angle::new(1, 2))
                    {
                        return fail(format!(
                            "cell {} tagged square but is not a unit square",
                            c.label
                        ));
                    }
                }
                ShapeTag::Rectangle => {
                    if n != 4
                        || side_lengths[0] != side_lengths[2]
                        || side_lengths[1] != side_lengths[3]
                        || c.corners.iter().any(|&a| a != Angle::new(1, 2))
                    {
                        return fail(format!(
                            "cell {} tagged rectangle but sides/angles disagree",
                            c.label
                        ));
                    }
                }
                ShapeTag::Triangle => {
                    if n != 3 || side_lengths.contains(&EdgeLength::Zero) {
                        return fail(format!(
                            "cell {} tagged triangle but has {n} sides or a zero side",
                            c.label
                        ));
                    }
                }
                ShapeTag::Degenerate => {
                    let has_zero_side = side_lengths.contains(&EdgeLength::Zero);
                    let has_flat_corner = c
                        .corners
                        .iter()
                        .any(|&a| a.is_zero() || a == Angle::new(1, 1));
                    if !has_zero_side && !has_flat_corner {
                        return fail(format!(
                            "cell {} tagged degenerate without degeneracy",
                            c.label
                        ));
                    }
                }
            }
        }
        if self.vertex_count() > 0 && !self.is_connected() {
            return fail("complex is not connected".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn degenerate_cell_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.shape == ShapeTag::Degenerate)
            .count()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph skeleton {\n");
        for (i, l) in self.vertex_labels.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{l}\"];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{} ({})\"];\n",
                e.from,
                e.to,
                e.label,
                serde_json::to_string(&e.length).unwrap().trim_matches('"')
            ));
        }
        out.push_str("}\n");
        out
    }
}

impl Default for PE2Complex {
    fn default() -> Self {
        Self::new()
    }
}

/// V − E + F.
pub fn euler_characteristic(x: &PE2Complex) -> i64 {
    x.vertex_count() as i64 - x.edges.len() as i64 + x.cells.len() as i64
}

/// First homology via the cellular chain complex: cycles are coordinatized
/// by non-tree edges and the boundary images are reduced by Smith normal
/// form.
pub fn homology_h1(x: &PE2Complex) -> AbelianInvariants {
    let n = x.vertex_count();
    // spanning tree by union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut in_tree = vec![false; x.edges.len()];
    for (i, e) in x.edges.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if ru != rv {
            parent[ru] = rv;
            in_tree[i] = true;
        }
    }
    let loops: Vec<usize> = (0..x.edges.len()).filter(|&i| !in_tree[i]).collect();
    let loop_pos: HashMap<usize, usize> = loops.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut m = IntMat::zeros(loops.len(), x.cells.len());
    for (j, c) in x.cells.iter().enumerate() {
        for r in &c.boundary {
            if let Some(&row) = loop_pos.get(&r.edge) {
                m[(row, j)] += if r.reversed { -1 } else { 1 };
            }
        }
    }
    AbelianInvariants::cokernel(&m)
}

/// One node per edge-end at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum End {
    Tail,
    Head,
}

/// Extracts the link of `v`: nodes are directions along positive-length
/// edges, edges are cell corners. Zero-length boundary sides are skipped
/// with their corner angles folded into the neighbouring corner, and
/// zero-angle corners identify the two adjacent directions, as happens when
/// degenerate cells pinch two edges together.
pub fn vertex_link(x: &PE2Complex, v: usize) -> LinkGraph {
    let mut dir_ids: HashMap<(usize, End), usize> = HashMap::new();
    let mut dir_labels: Vec<String> = Vec::new();
    for (i, e) in x.edges.iter().enumerate() {
        if e.length == EdgeLength::Zero {
            continue;
        }
        if e.from == v {
            dir_ids.entry((i, End::Tail)).or_insert_with(|| {
                dir_labels.push(format!("{}+", e.label));
                dir_labels.len() - 1
            });
        }
        if e.to == v {
            dir_ids.entry((i, End::Head)).or_insert_with(|| {
                dir_labels.push(format!("{}-", e.label));
                dir_labels.len() - 1
            });
        }
    }
    let departure = |r: EdgeRef| {
        if r.reversed {
            (r.edge, End::Head)
        } else {
            (r.edge, End::Tail)
        }
    };
    let arrival = |r: EdgeRef| {
        if r.reversed {
            (r.edge, End::Tail)
        } else {
            (r.edge, End::Head)
        }
    };

    let mut unions: Vec<(usize, usize)> = Vec::new();
    let mut corners: Vec<(usize, usize, Angle)> = Vec::new();
    for c in &x.cells {
        // drop zero-length sides, folding their corner angles into the
        // corner after the preceding kept side (cyclically)
        let n = c.boundary.len();
        let kept_refs: Vec<EdgeRef> = c
            .boundary
            .iter()
            .copied()
            .filter(|r| x.edges[r.edge].length != EdgeLength::Zero)
            .collect();
        if kept_refs.is_empty() {
            continue; // cell entirely of zero-length sides: no link content
        }
        let mut kept_corners: Vec<Angle> = vec![Angle::zero(); kept_refs.len()];
        {
            let mut slot: isize = -1;
            let mut prefix = Angle::zero();
            for k in 0..n {
                let r = c.boundary[k];
                if x.edges[r.edge].length != EdgeLength::Zero {
                    slot += 1;
                    kept_corners[slot as usize] = c.corners[k];
                } else if slot >= 0 {
                    kept_corners[slot as usize] = kept_corners[slot as usize] + c.corners[k];
                } else {
                    prefix = prefix + c.corners[k];
                }
            }
            let last = kept_corners.len() - 1;
            kept_corners[last] = kept_corners[last] + prefix;
        }
        let m = kept_refs.len();
        for k in 0..m {
            let here = x.ref_head(kept_refs[k]);
            if here != v {
                continue;
            }
            let a = arrival(kept_refs[k]);
            let d = departure(kept_refs[(k + 1) % m]);
            let (ai, di) = (dir_ids[&a], dir_ids[&d]);
            if kept_corners[k].is_zero() {
                unions.push((ai, di));
            } else {
                corners.push((ai, di, kept_corners[k]));
            }
        }
    }
    // quotient by the zero-angle identifications
    let mut parent: Vec<usize> = (0..dir_labels.len()).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for (a, b) in unions {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut class_of: HashMap<usize, usize> = HashMap::new();
    let mut link = LinkGraph::new();
    let mut class_labels: Vec<Vec<String>> = Vec::new();
    for i in 0..dir_labels.len() {
        let root = find(&mut parent, i);
        let id = *class_of.entry(root).or_insert_with(|| {
            class_labels.push(Vec::new());
            link.add_node(String::new())
        });
        class_labels[id].push(dir_labels[i].clone());
    }
    for (id, labels) in class_labels.iter().enumerate() {
        link.node_labels[id] = labels.join("=");
    }
    for (a, d, w) in corners {
        let ca = class_of[&find(&mut parent, a)];
        let cd = class_of[&find(&mut parent, d)];
        link.add_edge(ca, cd, w);
    }
    link
}

/// The three metrization treatments, decided by the meeting structure
/// around the cycle of blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "case1")]
    Case1,
    #[serde(rename = "case2")]
    Case2,
    #[serde(rename = "case3")]
    Case3,
}

/// Growing generator class of a body letter (0 = a, 1 = b).
fn grow_class(l: LrLetter) -> usize {
    match l {
        LrLetter::L => 0, // λ: a ↦ ba grows a's cell
        LrLetter::R => 1, // ρ: b ↦ ab
    }
}

fn stable_class(l: LrLetter) -> usize {
    1 - grow_class(l)
}

/// Meeting at time `i` pairs the top triangle of block i−1 with the bottom
/// triangle of block i; it is "same-type" when both hypotenuses land on the
/// same edge after the time-0 identification.
fn meeting_same(word: &AutWord, i: usize) -> bool {
    let n = word.body.len();
    if i == 0 {
        let below = stable_class(word.body[n - 1]);
        let (mapped, _) = word.tail.class_image(below);
        mapped == stable_class(word.body[0])
    } else {
        word.body[i - 1] == word.body[i]
    }
}

fn meetings(word: &AutWord) -> Vec<bool> {
    (0..word.body.len())
        .map(|i| meeting_same(word, i))
        .collect()
}

/// Classifies by meeting structure: all meetings same-type (case 1), all
/// mixed (case 2), or a mixture (case 3). Constant bodies with a
/// class-preserving tail are case 1; the alternating families with the
/// matching tail parity are case 2; everything else is case 3.
pub fn classify_case(word: &AutWord) -> CaseTag {
    let m = meetings(word);
    if m.iter().all(|&s| s) {
        CaseTag::Case1
    } else if m.iter().all(|&s| !s) {
        CaseTag::Case2
    } else {
        CaseTag::Case3
    }
}

/// Builds the piecewise-Euclidean complex: per block a 1×√2 rectangle and
/// two right isoceles triangles (legs 1, hypotenuse √2 on the stable
/// generator), glued in a cycle with the tail twisting time 0.
pub fn build_pe_complex(word: &AutWord) -> Result<PE2Complex, ComplexError> {
    let n = word.body.len();
    if n == 0 {
        return Err(ComplexError::EmptyBody);
    }
    let mut x = PE2Complex::new();
    for i in 0..n {
        x.add_vertex(format!("v{i}"));
    }
    let class_name = |c: usize| if c == 0 { "a" } else { "b" };
    let mut gen_edge = vec![[0usize; 2]; n];
    for (i, slots) in gen_edge.iter_mut().enumerate() {
        for c in 0..2 {
            slots[c] = x.add_edge(i, i, EdgeLength::Sqrt2, format!("{}{}", class_name(c), i));
        }
    }
    let mut t_edge = vec![0usize; n];
    let mut d_edge = vec![0usize; n];
    for i in 0..n {
        t_edge[i] = x.add_edge(i, (i + 1) % n, EdgeLength::Unit, format!("t{i}"));
        d_edge[i] = x.add_edge(i, (i + 1) % n, EdgeLength::Unit, format!("d{i}"));
    }
    // level j generator of class c, oriented; level n routes through the tail
    let gen_ref = |j: usize, c: usize, reversed: bool| -> EdgeRef {
        if j < n {
            EdgeRef {
                edge: gen_edge[j][c],
                reversed,
            }
        } else {
            let (c2, inv) = word.tail.class_image(c);
            EdgeRef {
                edge: gen_edge[0][c2],
                reversed: reversed ^ inv,
            }
        }
    };
    let half = Angle::new(1, 2);
    let quarter = Angle::new(1, 4);
    for i in 0..n {
        let g = grow_class(word.body[i]);
        let s = stable_class(word.body[i]);
        x.add_cell(
            format!("rect{i}"),
            ShapeTag::Rectangle,
            vec![
                EdgeRef::fwd(d_edge[i]),
                gen_ref(i + 1, g, false),
                EdgeRef::rev(t_edge[i]),
                gen_ref(i, g, true),
            ],
            vec![half; 4],
        );
        x.add_cell(
            format!("tri{i}.lo"),
            ShapeTag::Triangle,
            vec![
                gen_ref(i, s, true),
                EdgeRef::fwd(t_edge[i]),
                EdgeRef::rev(d_edge[i]),
            ],
            vec![quarter, half, quarter],
        );
        x.add_cell(
            format!("tri{i}.hi"),
            ShapeTag::Triangle,
            vec![
                EdgeRef::fwd(d_edge[i]),
                gen_ref(i + 1, s, false),
                EdgeRef::rev(t_edge[i]),
            ],
            vec![quarter, quarter, half],
        );
    }
    x.validate()?;
    Ok(x)
}

/// Builds the square complex. All meetings same-type: triangle pairs merge
/// into unit squares across their shared hypotenuse (case 1). Otherwise
/// every triangle flattens onto its length-2 hypotenuse as a zero-area
/// cell with 0/π corners; at a same-type meeting the two flat cells share
/// their hypotenuse and together form the degenerate square whose zero
/// corners identify the leg directions in the links. Rectangles subdivide
/// into two unit squares either way.
pub fn build_square_complex(word: &AutWord) -> Result<PE2Complex, ComplexError> {
    let n = word.body.len();
    if n == 0 {
        return Err(ComplexError::EmptyBody);
    }
    let same = meetings(word);
    let all_same = same.iter().all(|&s| s);

    let class_name = |c: usize| if c == 0 { "a" } else { "b" };
    let mut x = PE2Complex::new();
    for i in 0..n {
        x.add_vertex(format!("v{i}"));
    }

    // in the merge build the stable generators disappear into the merged
    // squares as diagonals; in the collapse build every generator edge has
    // length 2 and is subdivided at its midpoint
    #[derive(Clone, Copy)]
    enum GenSlot {
        Halves { first: usize, second: usize },
        Erased,
    }
    let mut slots = vec![[GenSlot::Erased; 2]; n];
    for i in 0..n {
        for c in 0..2 {
            let erased = all_same && same[i] && c == stable_class(word.body[i]);
            if erased {
                slots[i][c] = GenSlot::Erased;
            } else {
                let w = x.add_vertex(format!("w.{}{}", class_name(c), i));
                let first = x.add_edge(i, w, EdgeLength::Unit, format!("{}{}.1", class_name(c), i));
                let second =
                    x.add_edge(w, i, EdgeLength::Unit, format!("{}{}.2", class_name(c), i));
                slots[i][c] = GenSlot::Halves { first, second };
            }
        }
    }
    let mut t_edge = vec![0usize; n];
    let mut d_edge = vec![0usize; n];
    for i in 0..n {
        t_edge[i] = x.add_edge(i, (i + 1) % n, EdgeLength::Unit, format!("t{i}"));
        d_edge[i] = x.add_edge(i, (i + 1) % n, EdgeLength::Unit, format!("d{i}"));
    }
    // resolve (level, class) through the tail at the seam
    let resolve = |j: usize, c: usize, reversed: bool| -> (usize, usize, bool) {
        if j < n {
            (j, c, reversed)
        } else {
            let (c2, inv) = word.tail.class_image(c);
            (0, c2, reversed ^ inv)
        }
    };
    // upward traversal of a subdivided generator, as the two half-edges
    let half_path = |j: usize, c: usize, reversed: bool| -> [EdgeRef; 2] {
        let (j2, c2, rev) = resolve(j, c, reversed);
        match slots[j2][c2] {
            GenSlot::Halves { first, second } => {
                if rev {
                    [EdgeRef::rev(second), EdgeRef::rev(first)]
                } else {
                    [EdgeRef::fwd(first), EdgeRef::fwd(second)]
                }
            }
            _ => panic!("generator {}{} is not subdivided", class_name(c2), j2),
        }
    };
    let midpoint_of = |j: usize, c: usize| -> (usize, usize) {
        let (j2, c2, _) = resolve(j, c, false);
        (j2, c2)
    };

    let half = Angle::new(1, 2);
    let zero = Angle::zero();
    let pi = Angle::new(1, 1);

    // rung between the midpoints of the two verticals of a block's rectangle
    let mut rung = vec![0usize; n];
    for i in 0..n {
        let g = grow_class(word.body[i]);
        let (jl, cl) = midpoint_of(i, g);
        let (jr, cr) = midpoint_of(i + 1, g);
        let wl = match slots[jl][cl] {
            GenSlot::Halves { first, .. } => x.edges[first].to,
            _ => unreachable!("grow verticals are always subdivided"),
        };
        let wr = match slots[jr][cr] {
            GenSlot::Halves { first, .. } => x.edges[first].to,
            _ => unreachable!(),
        };
        rung[i] = x.add_edge(wl, wr, EdgeLength::Unit, format!("s{i}"));
    }
    for i in 0..n {
        let g = grow_class(word.body[i]);
        let up_l = half_path(i, g, false);
        let up_r = half_path(i + 1, g, false);
        x.add_cell(
            format!("sq{i}.lo"),
            ShapeTag::Square,
            vec![
                EdgeRef::fwd(d_edge[i]),
                up_r[0],
                EdgeRef::rev(rung[i]),
                up_l[0].flipped(),
            ],
            vec![half; 4],
        );
        x.add_cell(
            format!("sq{i}.hi"),
            ShapeTag::Square,
            vec![
                EdgeRef::fwd(rung[i]),
                up_r[1],
                EdgeRef::rev(t_edge[i]),
                up_l[1].flipped(),
            ],
            vec![half; 4],
        );
    }

    if all_same {
        // merge each meeting's triangle pair into one unit square across the
        // erased hypotenuse
        for j in 0..n {
            let prev = (j + n - 1) % n;
            // top triangle of block prev: [d_prev, hyp, t_prev⁻¹]
            let s_prev = stable_class(word.body[prev]);
            let (_, _, hyp_rev_outer) = resolve(prev + 1, s_prev, false);
            // bottom triangle of block j: [hyp⁻¹, t_j, d_j⁻¹]
            let hyp_rev_inner = true;
            let inner_rest = [EdgeRef::fwd(t_edge[j]), EdgeRef::rev(d_edge[j])];
            let spliced: Vec<EdgeRef> = if hyp_rev_outer == hyp_rev_inner {
                inner_rest.iter().rev().map(|r| r.flipped()).collect()
            } else {
                inner_rest.to_vec()
            };
            let mut boundary = vec![EdgeRef::fwd(d_edge[prev])];
            boundary.extend(spliced);
            boundary.push(EdgeRef::rev(t_edge[prev]));
            x.add_cell(
                format!("meet{j}"),
                ShapeTag::Square,
                boundary,
                vec![half; 4],
            );
        }
    } else {
        if same.iter().all(|&s| s) {
            return Err(ComplexError::DegenerateCylinder);
        }
        // every triangle flattens onto its hypotenuse; same-type meetings
        // pair two flat cells over one hypotenuse and are labelled as the
        // degenerate squares they form
        for i in 0..n {
            let s = stable_class(word.body[i]);
            // bottom triangle of block i, hypotenuse at level i (meeting i)
            let lo_label = if same[i] {
                format!("degsq{i}.hi")
            } else {
                format!("tri{i}.lo")
            };
            let p = half_path(i, s, true);
            x.add_cell(
                lo_label,
                ShapeTag::Degenerate,
                vec![p[0], p[1], EdgeRef::fwd(t_edge[i]), EdgeRef::rev(d_edge[i])],
                vec![pi, zero, pi, zero],
            );
            // top triangle of block i, hypotenuse at level i+1 (meeting i+1)
            let m = (i + 1) % n;
            let hi_label = if same[m] {
                format!("degsq{m}.lo")
            } else {
                format!("tri{i}.hi")
            };
            let p = half_path(i + 1, s, false);
            x.add_cell(
                hi_label,
                ShapeTag::Degenerate,
                vec![EdgeRef::fwd(d_edge[i]), p[0], p[1], EdgeRef::rev(t_edge[i])],
                vec![zero, pi, zero, pi],
            );
        }
    }
    x.validate()?;
    Ok(x)
}

/// Sorted weight multiset of the link at `v` after suppressing valence-2
/// nodes; the combinatorial fingerprint used to compare link types.
pub fn link_fingerprint(x: &PE2Complex, v: usize) -> Vec<Angle> {
    vertex_link(x, v).suppress_valence_two().weight_multiset()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkcheck::{check_npc_with, weighted_girth};
    use crate::matdecomp::{Tail, ALL_TAILS};
    use crate::snf::IntMat;

    fn word(body: &[LrLetter], tail: Tail) -> AutWord {
        AutWord::new(body.to_vec(), tail)
    }

    fn lam() -> LrLetter {
        LrLetter::L
    }

    fn rho() -> LrLetter {
        LrLetter::R
    }

    /// Z ⊕ coker(M − I) for the realized automorphism: the independent H1
    /// oracle.
    fn h1_oracle(w: &AutWord) -> AbelianInvariants {
        let m = w.abelianization_matrix();
        let mi = IntMat::from_rows(&[vec![m.a - 1, m.b], vec![m.c, m.d - 1]]);
        let coker = AbelianInvariants::cokernel(&mi);
        AbelianInvariants {
            free_rank: coker.free_rank + 1,
            torsion: coker.torsion,
        }
    }

    #[test]
    fn classify_constant_body() {
        assert_eq!(
            classify_case(&word(&[lam(), lam(), lam()], Tail::Identity)),
            CaseTag::Case1
        );
        assert_eq!(
            classify_case(&word(&[lam(), lam()], Tail::InvertBoth)),
            CaseTag::Case1
        );
    }

    #[test]
    fn classify_alternating() {
        assert_eq!(
            classify_case(&word(&[rho(), lam(), rho(), lam()], Tail::Identity)),
            CaseTag::Case2
        );
        // the swap-tail family with odd alternating body
        assert_eq!(
            classify_case(&word(&[lam(), rho(), lam()], Tail::Swap)),
            CaseTag::Case2
        );
    }

    #[test]
    fn classify_generic() {
        assert_eq!(
            classify_case(&word(&[lam(), lam(), rho()], Tail::Identity)),
            CaseTag::Case3
        );
        // constant body with a class-swapping tail breaks the uniform meeting
        assert_eq!(
            classify_case(&word(&[lam(), lam()], Tail::Swap)),
            CaseTag::Case3
        );
    }

    #[test]
    fn pe_complex_chi_zero_and_h1() {
        let w = word(&[lam()], Tail::Identity);
        let x = build_pe_complex(&w).unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        assert_eq!(homology_h1(&x), AbelianInvariants::free(2));
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn pe_complex_h1_invert_tail() {
        // Z ⊕ coker(−L − I) = Z ⊕ Z/4
        let w = word(&[lam()], Tail::InvertBoth);
        let x = build_pe_complex(&w).unwrap();
        let h1 = homology_h1(&x);
        assert_eq!(
            h1,
            AbelianInvariants {
                free_rank: 1,
                torsion: vec![4]
            }
        );
        assert_eq!(h1, h1_oracle(&w));
    }

    #[test]
    fn pe_complex_h1_swap_tail() {
        let w = word(&[lam()], Tail::Swap);
        let x = build_pe_complex(&w).unwrap();
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn pe_complex_h1_double_rho() {
        let w = word(&[rho(), rho()], Tail::Identity);
        let x = build_pe_complex(&w).unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn empty_body_rejected() {
        assert_eq!(
            build_pe_complex(&word(&[], Tail::Identity)).unwrap_err(),
            ComplexError::EmptyBody
        );
        assert_eq!(
            build_square_complex(&word(&[], Tail::Swap)).unwrap_err(),
            ComplexError::EmptyBody
        );
    }

    #[test]
    fn square_case1_all_links_pass() {
        let w = word(&[lam(), lam()], Tail::Identity);
        let x = build_square_complex(&w).unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        assert_eq!(x.degenerate_cell_count(), 0);
        let report = check_npc_with(&x, false);
        assert!(report.pass, "{report:?}");
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn square_case2_all_links_pass() {
        let w = word(&[rho(), lam()], Tail::Swap);
        let x = build_square_complex(&w).unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        let report = check_npc_with(&x, false);
        assert!(report.pass, "{report:?}");
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn square_case3_has_degenerate_square() {
        let w = word(&[lam(), lam(), rho()], Tail::InvertBoth);
        assert_eq!(classify_case(&w), CaseTag::Case3);
        let x = build_square_complex(&w).unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        // the λλ meeting folds both triangles onto one hypotenuse: a
        // degenerate square, recorded as a labelled pair of flat cells
        let pair: Vec<&Cell> = x
            .cells
            .iter()
            .filter(|c| c.label.starts_with("degsq1"))
            .collect();
        assert_eq!(pair.len(), 2);
        assert!(pair.iter().all(|c| c.shape == ShapeTag::Degenerate));
        let shared: Vec<usize> = pair[0]
            .boundary
            .iter()
            .map(|r| r.edge)
            .filter(|e| pair[1].boundary.iter().any(|r| r.edge == *e))
            .collect();
        assert!(!shared.is_empty(), "the pair shares its hypotenuse halves");
        assert!(x.degenerate_cell_count() > 0);
        let report = check_npc_with(&x, false);
        assert!(report.pass, "{report:?}");
        assert_eq!(homology_h1(&x), h1_oracle(&w));
    }

    #[test]
    fn t_edges_form_single_cycle() {
        let w = word(&[lam(), rho(), rho(), lam()], Tail::SwapInvert);
        for x in [
            build_pe_complex(&w).unwrap(),
            build_square_complex(&w).unwrap(),
        ] {
            let t_edges: Vec<&Edge> = x
                .edges
                .iter()
                .filter(|e| e.label.starts_with('t'))
                .collect();
            assert_eq!(t_edges.len(), 4);
            let mut next = std::collections::HashMap::new();
            for e in &t_edges {
                next.insert(e.from, e.to);
            }
            let mut seen = 0;
            let mut cur = t_edges[0].from;
            loop {
                cur = next[&cur];
                seen += 1;
                if cur == t_edges[0].from {
                    break;
                }
            }
            assert_eq!(seen, 4);
        }
    }

    #[test]
    fn time_zero_link_is_tetrahedron_skeleton() {
        // all 16 pairings of adjacent body letters and tails, plus the n = 1
        // self-meeting variants
        for tail in ALL_TAILS {
            for last in [lam(), rho()] {
                for first in [lam(), rho()] {
                    let w = word(&[first, last], tail);
                    let x = build_pe_complex(&w).unwrap();
                    let link = vertex_link(&x, 0).suppress_valence_two();
                    assert_eq!(link.node_count(), 4, "{w:?}");
                    assert_eq!(link.edges.len(), 6, "{w:?}");
                    for v in 0..4 {
                        assert_eq!(link.degree(v), 3, "{w:?}");
                    }
                }
            }
            for only in [lam(), rho()] {
                let w = word(&[only], tail);
                let x = build_pe_complex(&w).unwrap();
                let link = vertex_link(&x, 0).suppress_valence_two();
                assert_eq!(link.node_count(), 4, "{w:?}");
                assert_eq!(link.edges.len(), 6, "{w:?}");
            }
        }
    }

    #[test]
    fn interior_link_type_depends_only_on_meeting() {
        // fingerprints at interior vertices fall into exactly two classes,
        // keyed by whether the adjacent body letters agree
        let mut same_fp = None;
        let mut mixed_fp = None;
        for b0 in [lam(), rho()] {
            for b1 in [lam(), rho()] {
                for b2 in [lam(), rho()] {
                    let w = word(&[b0, b1, b2], Tail::Identity);
                    let x = build_pe_complex(&w).unwrap();
                    for i in 1..3 {
                        let fp = link_fingerprint(&x, i);
                        let slot = if w.body[i - 1] == w.body[i] {
                            &mut same_fp
                        } else {
                            &mut mixed_fp
                        };
                        match slot {
                            None => *slot = Some(fp),
                            Some(expected) => assert_eq!(&fp, expected, "{w:?} vertex {i}"),
                        }
                    }
                }
            }
        }
        assert_ne!(same_fp, mixed_fp);
    }

    #[test]
    fn pe_links_all_pass() {
        for tail in ALL_TAILS {
            for bits in 0..8u32 {
                let body: Vec<LrLetter> = (0..3)
                    .map(|k| if bits >> k & 1 == 0 { lam() } else { rho() })
                    .collect();
                let x = build_pe_complex(&word(&body, tail)).unwrap();
                let report = check_npc_with(&x, false);
                assert!(report.pass, "{body:?} {tail:?} {report:?}");
            }
        }
    }

    #[test]
    fn euler_of_plain_square_disk() {
        let mut x = PE2Complex::new();
        let vs: Vec<usize> = (0..4).map(|i| x.add_vertex(format!("p{i}"))).collect();
        let es: Vec<usize> = (0..4)
            .map(|i| x.add_edge(vs[i], vs[(i + 1) % 4], EdgeLength::Unit, format!("e{i}")))
            .collect();
        x.add_cell(
            "sq",
            ShapeTag::Square,
            es.iter().map(|&e| EdgeRef::fwd(e)).collect(),
            vec![Angle::new(1, 2); 4],
        );
        x.validate().unwrap();
        assert_eq!(euler_characteristic(&x), 1);
        // free boundary: every link is a path, so the complex passes
        assert!(check_npc_with(&x, false).pass);
    }

    #[test]
    fn euler_and_h1_of_torus_square() {
        let mut x = PE2Complex::new();
        let v = x.add_vertex("v");
        let e0 = x.add_edge(v, v, EdgeLength::Unit, "x");
        let e1 = x.add_edge(v, v, EdgeLength::Unit, "y");
        x.add_cell(
            "sq",
            ShapeTag::Square,
            vec![
                EdgeRef::fwd(e0),
                EdgeRef::fwd(e1),
                EdgeRef::rev(e0),
                EdgeRef::rev(e1),
            ],
            vec![Angle::new(1, 2); 4],
        );
        x.validate().unwrap();
        assert_eq!(euler_characteristic(&x), 0);
        assert_eq!(homology_h1(&x), AbelianInvariants::free(2));
        assert!(check_npc_with(&x, false).pass);
    }

    #[test]
    fn three_squares_around_a_vertex_fail() {
        let mut x = PE2Complex::new();
        let v = x.add_vertex("v");
        let ps: Vec<usize> = (0..3).map(|i| x.add_vertex(format!("p{i}"))).collect();
        let qs: Vec<usize> = (0..3).map(|i| x.add_vertex(format!("q{i}"))).collect();
        let spokes: Vec<usize> = (0..3)
            .map(|i| x.add_edge(v, ps[i], EdgeLength::Unit, format!("x{i}")))
            .collect();
        for i in 0..3 {
            let y = x.add_edge(ps[i], qs[i], EdgeLength::Unit, format!("y{i}"));
            let z = x.add_edge(qs[i], ps[(i + 1) % 3], EdgeLength::Unit, format!("z{i}"));
            x.add_cell(
                format!("sq{i}"),
                ShapeTag::Square,
                vec![
                    EdgeRef::fwd(spokes[i]),
                    EdgeRef::fwd(y),
                    EdgeRef::fwd(z),
                    EdgeRef::rev(spokes[(i + 1) % 3]),
                ],
                vec![Angle::new(1, 2); 4],
            );
        }
        x.validate().unwrap();
        let report = check_npc_with(&x, false);
        assert!(!report.pass);
        let bad = report.vertices.iter().find(|r| !r.pass).unwrap();
        assert_eq!(bad.vertex, 0);
        assert_eq!(bad.girth, Some(Angle::new(3, 2)));
        assert!(bad.offending.as_ref().is_some_and(|c| c.len() == 3));
    }

    #[test]
    fn npc_invariant_under_relabeling() {
        let w = word(&[lam(), rho()], Tail::Identity);
        let mut x = build_square_complex(&w).unwrap();
        let before = check_npc_with(&x, false);
        for (i, e) in x.edges.iter_mut().enumerate() {
            e.label = format!("renamed{i}");
        }
        let after = check_npc_with(&x, false);
        assert_eq!(before.pass, after.pass);
        let girths = |r: &crate::linkcheck::NpcReport| {
            r.vertices.iter().map(|v| v.girth).collect::<Vec<_>>()
        };
        assert_eq!(girths(&before), girths(&after));
    }

    #[test]
    fn complex_json_roundtrip() {
        let x = build_square_complex(&word(&[lam(), rho()], Tail::Identity)).unwrap();
        let js = serde_json::to_string(&x).unwrap();
        let back: PE2Complex = serde_json::from_str(&js).unwrap();
        back.validate().unwrap();
        assert_eq!(back.edges.len(), x.edges.len());
        assert_eq!(back.cells.len(), x.cells.len());
        assert_eq!(euler_characteristic(&back), euler_characteristic(&x));
    }

    #[test]
    fn zero_length_sides_fold_in_links() {
        // hand-built pillow: two unit edges v -> p and a zero-length loop z
        // at v closing a flat cell; the corners around z merge and the zero
        // corner at p identifies the two arrival directions
        let mut x = PE2Complex::new();
        let v = x.add_vertex("v");
        let p = x.add_vertex("p");
        let ex = x.add_edge(v, p, EdgeLength::Unit, "x");
        let ey = x.add_edge(v, p, EdgeLength::Unit, "y");
        let ez = x.add_edge(v, v, EdgeLength::Zero, "z");
        x.add_cell(
            "flat",
            ShapeTag::Degenerate,
            vec![EdgeRef::fwd(ez), EdgeRef::fwd(ex), EdgeRef::rev(ey)],
            vec![Angle::new(1, 2), Angle::zero(), Angle::new(1, 2)],
        );
        x.validate().unwrap();
        let link_v = vertex_link(&x, v);
        assert_eq!(link_v.node_count(), 2); // x+ and y+, no z directions
        assert_eq!(link_v.edges.len(), 1);
        assert_eq!(link_v.edges[0].weight, Angle::new(1, 1)); // the two halves merged
        let link_p = vertex_link(&x, p);
        assert_eq!(link_p.node_count(), 1, "zero corner contracts x- with y-");
        assert!(link_p.edges.is_empty());
    }

    #[test]
    fn girth_of_pe_interior_links_is_two_pi() {
        let w = word(&[lam(), lam(), lam()], Tail::Identity);
        let x = build_pe_complex(&w).unwrap();
        let link = vertex_link(&x, 1);
        assert_eq!(weighted_girth(&link).unwrap().0, Angle::two_pi());
    }
}
