//! Exhaustive and randomized sweep drivers shared by the acceptance tests,
//! the CLI `sweep` subcommand and the benchmarks. Each sweep returns a
//! report with a zero-failure pass flag and enough detail to pinpoint the
//! first counterexample.

use crate::complexbuilder::{build_square_complex, euler_characteristic, homology_h1};
use crate::gbs::{classify, elementary_collapse, GbsClassification, GbsEdge, GbsGraph};
use crate::linkcheck::{check_npc_with, weighted_girth, Angle, LinkGraph};
use crate::matdecomp::{decompose, AutWord, LrLetter, Mat2Z, ALL_TAILS, FLIP, IDENT, L, R};
use crate::par;
use crate::snf::{AbelianInvariants, IntMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All automorphism words with body length 1..=max_body_len and all four
/// tails, in (length, bits, tail) order.
pub fn all_aut_words(max_body_len: usize) -> Vec<AutWord> {
    let mut out = Vec::new();
    for len in 1..=max_body_len {
        for bits in 0..(1u32 << len) {
            let body: Vec<LrLetter> = (0..len)
                .map(|k| {
                    if bits >> k & 1 == 0 {
                        LrLetter::L
                    } else {
                        LrLetter::R
                    }
                })
                .collect();
            for tail in ALL_TAILS {
                out.push(AutWord::new(body.clone(), tail));
            }
        }
    }
    out
}

/// Z ⊕ coker(M − I) for the realized automorphism, the independent H1 value.
pub fn h1_expected(word: &AutWord) -> AbelianInvariants {
    let m = word.abelianization_matrix();
    let mi = IntMat::from_rows(&[vec![m.a - 1, m.b], vec![m.c, m.d - 1]]);
    let coker = AbelianInvariants::cokernel(&mi);
    AbelianInvariants {
        free_rank: coker.free_rank + 1,
        torsion: coker.torsion,
    }
}

/// Builds the square complex of every aut word and checks the link condition
/// plus χ = 0 plus the homology cross-check.
pub fn npc_sweep(max_body_len: usize, parallel: bool) -> SweepReport {
    let words = all_aut_words(max_body_len);
    let failures: Vec<String> = par::map(parallel, &words, |w| {
        let x = match build_square_complex(w) {
            Ok(x) => x,
            Err(e) => return Some(format!("{w}: build failed: {e}")),
        };
        let report = check_npc_with(&x, false);
        if !report.pass {
            let bad = report.vertices.iter().find(|v| !v.pass).unwrap();
            return Some(format!(
                "{w}: link fails at {} with girth {:?}",
                bad.label, bad.girth
            ));
        }
        if euler_characteristic(&x) != 0 {
            return Some(format!("{w}: chi = {}", euler_characteristic(&x)));
        }
        let h1 = homology_h1(&x);
        let expected = h1_expected(w);
        if h1 != expected {
            return Some(format!("{w}: H1 {h1} but matrix predicts {expected}"));
        }
        None
    })
    .into_iter()
    .flatten()
    .collect();
    SweepReport {
        name: format!("npc(max_body={max_body_len})"),
        cases: words.len(),
        failures,
    }
}

/// Seeded random products of {L, R, F, −I}, filtered to infinite order.
pub fn random_unimodular_products(count: usize, max_len: usize, seed: u64) -> Vec<Mat2Z> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.random_range(1..=max_len);
        let mut m = IDENT;
        for _ in 0..len {
            m = match rng.random_range(0..4) {
                0 => m.mul(&L),
                1 => m.mul(&R),
                2 => m.mul(&FLIP),
                _ => m.mul(&IDENT.neg()),
            };
        }
        if m.finite_order().is_none() {
            out.push(m);
        }
    }
    out
}

/// Decomposes seeded random matrices and verifies the exact identity; the
/// strict entry-sum decrease is asserted inside `decompose` itself.
pub fn matrix_roundtrip_sweep(
    count: usize,
    max_len: usize,
    seed: u64,
    parallel: bool,
) -> SweepReport {
    let mats = random_unimodular_products(count, max_len, seed);
    let failures: Vec<String> = par::map(parallel, &mats, |g| match decompose(g) {
        Ok(dec) => {
            if dec.verifies(g) {
                None
            } else {
                Some(format!("{g}: identity failed"))
            }
        }
        Err(e) => Some(format!("{g}: {e}")),
    })
    .into_iter()
    .flatten()
    .collect();
    SweepReport {
        name: format!("matrix-roundtrip(n={count})"),
        cases: mats.len(),
        failures,
    }
}

/// All non-negative GL2(Z) matrices with entry sum ≤ bound.
pub fn nonneg_unimodular_up_to(bound: i64) -> Vec<Mat2Z> {
    let mut out = Vec::new();
    for a in 0..=bound {
        for b in 0..=bound - a {
            for c in 0..=bound - a - b {
                for d in 0..=bound - a - b - c {
                    if (a * d - b * c).abs() == 1 {
                        out.push(Mat2Z { a, b, c, d });
                    }
                }
            }
        }
    }
    out
}

/// Checks, by trying both subtractions at every stage, that exactly one
/// non-negative entry-sum-reducing row subtraction sequence exists.
pub fn row_subtraction_uniqueness_sweep(sum_bound: i64, parallel: bool) -> SweepReport {
    let mats = nonneg_unimodular_up_to(sum_bound);
    let failures: Vec<String> = par::map(parallel, &mats, |m| {
        fn count_paths(m: &Mat2Z) -> usize {
            if *m == IDENT || *m == FLIP {
                return 1;
            }
            let r = Mat2Z {
                a: m.a - m.c,
                b: m.b - m.d,
                c: m.c,
                d: m.d,
            };
            let l = Mat2Z {
                a: m.a,
                b: m.b,
                c: m.c - m.a,
                d: m.d - m.b,
            };
            let mut total = 0;
            for next in [r, l] {
                if next.is_nonnegative() && next.entry_abs_sum() < m.entry_abs_sum() {
                    total += count_paths(&next);
                }
            }
            total
        }
        if count_paths(m) == 1 {
            None
        } else {
            Some(format!("{m}: {} reduction paths", count_paths(m)))
        }
    })
    .into_iter()
    .flatten()
    .collect();
    SweepReport {
        name: format!("row-subtraction-uniqueness(sum<={sum_bound})"),
        cases: mats.len(),
        failures,
    }
}

/// All connected labelled graphs with up to `max_v` vertices, `max_e` edges
/// and end labels in ±{1..max_label}. Edge slots are enumerated as ordered
/// (u ≤ v) pairs with non-decreasing slot sequences, so each multigraph
/// appears once per label assignment.
pub fn all_gbs_graphs(max_v: usize, max_e: usize, max_label: i64) -> Vec<GbsGraph> {
    let mut labels = Vec::new();
    for l in 1..=max_label {
        labels.push(l);
        labels.push(-l);
    }
    let mut out = Vec::new();
    for v in 1..=max_v {
        let mut pairs = Vec::new();
        for a in 0..v {
            for b in a..v {
                pairs.push((a, b));
            }
        }
        // non-decreasing sequences of pair indices, length 0..=max_e
        let mut all_seqs: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_e {
            let mut next = Vec::new();
            for s in &frontier {
                let start = s.last().copied().unwrap_or(0);
                for p in start..pairs.len() {
                    let mut s2 = s.clone();
                    s2.push(p);
                    next.push(s2);
                }
            }
            all_seqs.extend(next.iter().cloned());
            frontier = next;
        }
        for seq in all_seqs {
            // all label assignments over the chosen edges
            let mut assignments: Vec<Vec<GbsEdge>> = vec![Vec::new()];
            for &p in &seq {
                let (u, w) = pairs[p];
                let mut next = Vec::new();
                for partial in &assignments {
                    for &lu in &labels {
                        for &lv in &labels {
                            let mut e = partial.clone();
                            e.push(GbsEdge { u, v: w, lu, lv });
                            next.push(e);
                        }
                    }
                }
                assignments = next;
            }
            for edges in assignments {
                if let Ok(g) = GbsGraph::new(v, edges) {
                    out.push(g);
                }
            }
        }
    }
    out
}

fn verdict_key(c: &GbsClassification) -> (u8, i64) {
    match c {
        GbsClassification::InfiniteCyclic => (0, 0),
        GbsClassification::SolubleBS { j } => (1, *j),
        GbsClassification::SQUniversal { .. } => (2, 0),
    }
}

/// Exhaustive classifier sweep: collapse invariance, witness validity, the
/// soluble criterion and orientation/sign covariance.
pub fn gbs_exhaustive_sweep(
    max_v: usize,
    max_e: usize,
    max_label: i64,
    parallel: bool,
) -> SweepReport {
    let graphs = all_gbs_graphs(max_v, max_e, max_label);
    let failures: Vec<String> = par::map(parallel, &graphs, |g| {
        let got = match classify(g) {
            Ok(c) => c,
            Err(e) => return Some(format!("{g:?}: classify failed: {e}")),
        };
        // collapse invariance of the verdict
        for i in 0..g.edges.len() {
            if let Ok(c) = elementary_collapse(g, i) {
                match classify(&c) {
                    Ok(after) => {
                        if verdict_key(&after) != verdict_key(&got) {
                            return Some(format!(
                                "{g:?}: collapse {i} changed {got:?} to {after:?}"
                            ));
                        }
                    }
                    Err(e) => return Some(format!("{g:?}: collapse {i} broke classify: {e}")),
                }
            }
        }
        // orientation independence: swapping an edge record keeps the verdict
        for i in 0..g.edges.len() {
            let mut edges = g.edges.clone();
            let e = edges[i];
            edges[i] = GbsEdge {
                u: e.v,
                v: e.u,
                lu: e.lv,
                lv: e.lu,
            };
            let swapped = GbsGraph {
                vertices: g.vertices,
                edges,
            };
            match classify(&swapped) {
                Ok(after) => {
                    if verdict_key(&after).0 != verdict_key(&got).0 {
                        return Some(format!("{g:?}: orientation swap changed verdict"));
                    }
                }
                Err(e) => return Some(format!("{g:?}: swap broke classify: {e}")),
            }
        }
        // sign covariance: negating both ends of an edge keeps the variant
        for i in 0..g.edges.len() {
            let mut edges = g.edges.clone();
            edges[i].lu = -edges[i].lu;
            edges[i].lv = -edges[i].lv;
            let negated = GbsGraph {
                vertices: g.vertices,
                edges,
            };
            match classify(&negated) {
                Ok(after) => {
                    if verdict_key(&after).0 != verdict_key(&got).0 {
                        return Some(format!("{g:?}: sign flip changed verdict"));
                    }
                }
                Err(e) => return Some(format!("{g:?}: sign flip broke classify: {e}")),
            }
        }
        // soluble exactly when the normal form is a lone ±1 self-loop
        let nf = crate::gbs::normal_form(g);
        let lone_soluble_shape = nf.vertices == 1
            && nf.edges.len() == 1
            && nf.edges[0].is_loop()
            && (nf.edges[0].lu.abs() == 1 || nf.edges[0].lv.abs() == 1);
        let is_soluble = matches!(got, GbsClassification::SolubleBS { .. });
        if is_soluble != lone_soluble_shape {
            return Some(format!("{g:?}: soluble verdict vs normal form mismatch"));
        }
        if let Err(e) = got.check_witness(&nf) {
            return Some(format!("{g:?}: witness check failed: {e}"));
        }
        None
    })
    .into_iter()
    .flatten()
    .collect();
    SweepReport {
        name: format!("gbs(max_v={max_v},max_e={max_e},labels=±1..{max_label})"),
        cases: graphs.len(),
        failures,
    }
}

/// Seeded random weighted multigraphs for the girth oracle comparison.
pub fn random_link_graphs(
    count: usize,
    max_nodes: usize,
    max_edges: usize,
    seed: u64,
) -> Vec<LinkGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_nodes);
            let m = rng.random_range(1..=max_edges);
            let mut g = LinkGraph::new();
            for i in 0..n {
                g.add_node(format!("n{i}"));
            }
            for _ in 0..m {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                let w = Angle::new(rng.random_range(1..=8), rng.random_range(1..=4));
                g.add_edge(u, v, w);
            }
            g
        })
        .collect()
}

/// Brute-force minimum circuit weight: self-loops, parallel pairs, and all
/// simple cycles found by depth-first search from a least vertex.
pub fn girth_by_enumeration(g: &LinkGraph) -> Option<Angle> {
    let mut best: Option<Angle> = None;
    let mut consider = |w: Angle| {
        if best.is_none_or(|b| w < b) {
            best = Some(w);
        }
    };
    let n = g.node_count();
    for e in &g.edges {
        if e.u == e.v {
            consider(e.weight);
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        for f in g.edges.iter().skip(i + 1) {
            if e.u != e.v && ((e.u, e.v) == (f.u, f.v) || (e.u, e.v) == (f.v, f.u)) {
                consider(e.weight + f.weight);
            }
        }
    }
    // simple cycles of length ≥ 3: DFS over vertex paths anchored at their
    // least vertex to avoid revisits
    fn dfs(
        g: &LinkGraph,
        start: usize,
        cur: usize,
        visited: &mut Vec<bool>,
        weight: Angle,
        depth: usize,
        consider: &mut dyn FnMut(Angle),
    ) {
        for e in &g.edges {
            if e.u == e.v {
                continue;
            }
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if a != cur {
                    continue;
                }
                if b == start && depth >= 2 {
                    consider(weight + e.weight);
                } else if b > start && !visited[b] {
                    visited[b] = true;
                    dfs(g, start, b, visited, weight + e.weight, depth + 1, consider);
                    visited[b] = false;
                }
            }
        }
    }
    for start in 0..n {
        let mut visited = vec![false; n];
        visited[start] = true;
        dfs(
            g,
            start,
            start,
            &mut visited,
            Angle::zero(),
            0,
            &mut consider,
        );
    }
    best
}

/// Compares the production girth against exhaustive enumeration on seeded
/// random multigraphs.
pub fn girth_oracle_sweep(count: usize, seed: u64, parallel: bool) -> SweepReport {
    let graphs = random_link_graphs(count, 8, 12, seed);
    let failures: Vec<String> = par::map(parallel, &graphs, |g| {
        let fast = weighted_girth(g).map(|(w, _)| w);
        let slow = girth_by_enumeration(g);
        if fast != slow {
            Some(format!("girth {fast:?} vs enumeration {slow:?} on {g:?}"))
        } else {
            None
        }
    })
    .into_iter()
    .flatten()
    .collect();
    SweepReport {
        name: format!("girth-oracle(n={count})"),
        cases: graphs.len(),
        failures,
    }
}

/// Reads TOOLKIT_SEED or falls back to the default.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("TOOLKIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aut_word_count() {
        // 2 + 4 + 8 bodies for length ≤ 3, times four tails
        assert_eq!(all_aut_words(3).len(), 14 * 4);
    }

    #[test]
    fn gbs_enumeration_small() {
        let graphs = all_gbs_graphs(1, 1, 1);
        // single vertex with no edges, or one self-loop with 4 labelings
        assert_eq!(graphs.len(), 1 + 4);
    }

    #[test]
    fn npc_sweep_tiny() {
        let report = npc_sweep(2, false);
        assert!(report.pass(), "{:?}", report.failures);
        assert_eq!(report.cases, 6 * 4);
    }

    #[test]
    fn girth_enumeration_agrees_on_known_graphs() {
        let mut g = LinkGraph::new();
        for i in 0..4 {
            g.add_node(format!("{i}"));
        }
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4, Angle::new(1, 2));
        }
        assert_eq!(girth_by_enumeration(&g), Some(Angle::two_pi()));
        assert_eq!(weighted_girth(&g).map(|x| x.0), girth_by_enumeration(&g));
    }

    #[test]
    fn random_products_are_infinite_order() {
        for m in random_unimodular_products(50, 12, 7) {
            assert!(m.finite_order().is_none());
            assert_eq!(m.det().abs(), 1);
        }
    }
}
