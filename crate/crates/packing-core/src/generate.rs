//! Enumeration of isomorphically distinct sphere triangulations.
//!
//! Every triangulation has a vertex of degree 3, 4, or 5, so deleting such
//! a vertex (patching the link hole with a triangle, a split quadrilateral,
//! or a fanned pentagon) reaches a triangulation one vertex smaller. The
//! three expansion moves invert those deletions: a vertex inside a face, a
//! vertex on an edge, or a vertex spanning a face and two of its edge
//! neighbors. Iterating the expansions from the tetrahedral map and
//! deduplicating by canonical form therefore enumerates all triangulations
//! level by level.
//!
//! Enumeration runs uncolored (every color fixed to the sentinel 1): the
//! colored space is astronomically large and only its size is ever needed,
//! via [`coloring_bound`]. Counts are cross-checked against the classical
//! rooted-triangulation band and the per-level growth bound 11(n-3).

use crate::graph::{canonical_code, k4, orient_faces, ColorGraph, GraphError};
use num_bigint::BigUint;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Largest vertex count the exhaustive enumeration accepts. Growth is
/// roughly (256/27)^n; this cap keeps a full run under a minute.
pub const ENUMERATION_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("vertex {vertex} has degree {degree}; only 3, 4, or 5 reduce")]
    BadDegree { vertex: usize, degree: usize },
    #[error("every admissible diagonal at vertex {vertex} already exists")]
    DiagonalExists { vertex: usize },
    #[error("vertex count {n} outside the supported range 4..={max}")]
    CapExceeded { n: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which expansion move produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// New vertex in the interior of a face, joined to its 3 corners.
    InFace,
    /// New vertex subdividing an edge, joined to the 2 opposite corners.
    OnEdge,
    /// New vertex replacing a face and two edge-adjacent faces, joined to
    /// the 5 corners of the merged pentagon.
    AcrossFaces,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub moved: Move,
    pub graph: ColorGraph,
}

/// Rebuild a graph from a face set, recovering the rotation system by
/// orientation propagation.
fn graph_from_faces(
    n: usize,
    m: usize,
    vertex_colors: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
    faces: &[[usize; 3]],
) -> Result<ColorGraph, GraphError> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b, _) in &edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let rotation = orient_faces(n, &adj, faces).ok_or_else(|| {
        GraphError::InvalidGraph("face set does not close into a sphere map".into())
    })?;
    ColorGraph::new(n, m, vertex_colors, edges, rotation)
}

/// Delete vertex `v` (degree 3, 4, or 5) and patch the link hole:
/// a triangle closes as is; a quadrilateral gains one diagonal (the
/// second/fourth neighbor first, the other diagonal as fallback); a
/// pentagon gains a two-diagonal fan, trying all five fan roots.
/// Surviving colors are preserved; added diagonals get color 0.
pub fn reduce_vertex(g: &ColorGraph, v: usize) -> Result<ColorGraph, GenerateError> {
    if v >= g.n {
        return Err(GraphError::InvalidGraph(format!("vertex {v} out of range")).into());
    }
    if g.n <= 4 {
        return Err(
            GraphError::InvalidGraph("cannot reduce below the 4-vertex minimum".into()).into(),
        );
    }
    let deg = g.degree(v);
    let link = g.rotation[v].clone();
    let (added, patch): (Vec<(usize, usize)>, Vec<[usize; 3]>) = match deg {
        3 => (vec![], vec![[link[0], link[1], link[2]]]),
        4 => {
            // quadrilateral link l0 l1 l2 l3: diagonal (l1,l3) or (l0,l2)
            let choices = [
                ((link[1], link[3]), [[link[0], link[1], link[3]], [link[1], link[2], link[3]]]),
                ((link[0], link[2]), [[link[0], link[1], link[2]], [link[0], link[2], link[3]]]),
            ];
            match choices.iter().find(|(d, _)| !g.has_edge(d.0, d.1)) {
                Some((d, faces)) => (vec![*d], faces.to_vec()),
                None => return Err(GenerateError::DiagonalExists { vertex: v }),
            }
        }
        5 => {
            // pentagon link: fan from root p0 via diagonals (p0,p2),(p0,p3)
            let mut found = None;
            for r in 0..5 {
                let p: Vec<usize> = (0..5).map(|t| link[(r + t) % 5]).collect();
                if !g.has_edge(p[0], p[2]) && !g.has_edge(p[0], p[3]) {
                    found = Some((
                        vec![(p[0], p[2]), (p[0], p[3])],
                        vec![[p[0], p[1], p[2]], [p[0], p[2], p[3]], [p[0], p[3], p[4]]],
                    ));
                    break;
                }
            }
            match found {
                Some(x) => x,
                None => return Err(GenerateError::DiagonalExists { vertex: v }),
            }
        }
        d => return Err(GenerateError::BadDegree { vertex: v, degree: d }),
    };

    let relabel = |w: usize| if w > v { w - 1 } else { w };
    let mut faces: Vec<[usize; 3]> = g
        .faces()?
        .into_iter()
        .filter(|f| !f.contains(&v))
        .map(|f| f.map(relabel))
        .collect();
    faces.extend(patch.iter().map(|f| f.map(relabel)));

    let mut vertex_colors = g.vertex_colors.clone();
    vertex_colors.remove(v);
    let mut edges: Vec<(usize, usize, usize)> = g
        .edge_list()
        .into_iter()
        .filter(|&(a, b, _)| a != v && b != v)
        .map(|(a, b, c)| (relabel(a), relabel(b), c))
        .collect();
    for &(a, b) in &added {
        let (a, b) = (relabel(a), relabel(b));
        edges.push((a.min(b), a.max(b), 0));
    }

    Ok(graph_from_faces(g.n - 1, g.m, vertex_colors, edges, &faces)?)
}

/// All one-vertex expansions of a valid triangulation. New vertices and
/// edges take color 1 (enumeration is uncolored); surviving elements keep
/// their colors. Moves that would identify two pentagon corners are
/// skipped, so the across-faces count is an upper bound.
pub fn expand(g: &ColorGraph) -> Vec<Candidate> {
    let faces = g.faces().expect("expand requires a valid triangulation");
    let mut at_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for t in 0..3 {
            let (a, b) = (f[t], f[(t + 1) % 3]);
            at_edge.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    let x = g.n; // label of the inserted vertex
    let n = g.n + 1;
    let base_edges = g.edge_list();
    let mut colors = g.vertex_colors.clone();
    colors.push(1);
    let mut out = Vec::new();

    let push = |out: &mut Vec<Candidate>,
                moved: Move,
                edges: Vec<(usize, usize, usize)>,
                faces: Vec<[usize; 3]>| {
        let g = graph_from_faces(n, g.m, colors.clone(), edges, &faces)
            .expect("expansion of a valid triangulation stays valid");
        out.push(Candidate { moved, graph: g });
    };

    for (fi, f) in faces.iter().enumerate() {
        let mut new_faces: Vec<[usize; 3]> = faces
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fi)
            .map(|(_, f)| *f)
            .collect();
        new_faces.extend([[x, f[0], f[1]], [x, f[1], f[2]], [x, f[2], f[0]]]);
        let mut edges = base_edges.clone();
        edges.extend(f.iter().map(|&c| (c, x, 1)));
        push(&mut out, Move::InFace, edges, new_faces);
    }

    for (&(a, b), fs) in &at_edge {
        let (f1, f2) = (faces[fs[0]], faces[fs[1]]);
        let w1 = *f1.iter().find(|&&w| w != a && w != b).expect("third corner");
        let w2 = *f2.iter().find(|&&w| w != a && w != b).expect("third corner");
        let mut new_faces: Vec<[usize; 3]> = faces
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fs[0] && i != fs[1])
            .map(|(_, f)| *f)
            .collect();
        new_faces.extend([[x, a, w1], [x, w1, b], [x, b, w2], [x, w2, a]]);
        let mut edges: Vec<(usize, usize, usize)> = base_edges
            .iter()
            .copied()
            .filter(|&(p, q, _)| (p, q) != (a, b))
            .collect();
        edges.extend([(a, x, 1), (b, x, 1), (w1, x, 1), (w2, x, 1)]);
        push(&mut out, Move::OnEdge, edges, new_faces);
    }

    for (fi, f) in faces.iter().enumerate() {
        // choose 2 of the 3 edges of f; they share a corner s
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let e1 = [f[i], f[(i + 1) % 3]];
            let e2 = [f[j], f[(j + 1) % 3]];
            let s = *e1.iter().find(|v| e2.contains(v)).expect("edges of a triangle share a corner");
            let a = *e1.iter().find(|&&v| v != s).expect("edge has two ends");
            let c = *e2.iter().find(|&&v| v != s).expect("edge has two ends");
            let opposite = |e: [usize; 2], skip: usize| {
                let key = (e[0].min(e[1]), e[0].max(e[1]));
                let fs = &at_edge[&key];
                let other = if fs[0] == skip { fs[1] } else { fs[0] };
                (other, *faces[other].iter().find(|v| !e.contains(v)).expect("third corner"))
            };
            let (fa, w1) = opposite(e1, fi);
            let (fc, w2) = opposite(e2, fi);
            if w1 == w2 {
                continue; // pentagon corners collide (e.g. on the tetrahedral map)
            }
            let mut new_faces: Vec<[usize; 3]> = faces
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != fi && k != fa && k != fc)
                .map(|(_, f)| *f)
                .collect();
            new_faces.extend([[x, a, w1], [x, w1, s], [x, s, w2], [x, w2, c], [x, c, a]]);
            let dropped = [
                (a.min(s), a.max(s)),
                (s.min(c), s.max(c)),
            ];
            let mut edges: Vec<(usize, usize, usize)> = base_edges
                .iter()
                .copied()
                .filter(|&(p, q, _)| !dropped.contains(&(p, q)))
                .collect();
            edges.extend([a, w1, s, w2, c].map(|v| (v, x, 1)));
            push(&mut out, Move::AcrossFaces, edges, new_faces);
        }
    }
    out
}

/// Per-level enumeration statistics: raw candidate counts per move, the
/// deduplicated count, and the rooted-count band it is checked against.
#[derive(Debug, Clone)]
pub struct LevelStats {
    pub n: usize,
    pub in_face: usize,
    pub on_edge: usize,
    pub across_faces: usize,
    pub deduped: usize,
    pub tutte_lower: f64,
    pub tutte_upper: f64,
    /// Advisory only: the band counts rooted objects, ours are unrooted.
    pub within_band: bool,
}

#[derive(Debug, Clone)]
pub struct GenerationBatch {
    pub n: usize,
    /// Deduplicated triangulations, ordered by canonical form.
    pub graphs: Vec<ColorGraph>,
    pub stats: Vec<LevelStats>,
}

impl GenerationBatch {
    /// Newline-delimited single-line graph JSON.
    pub fn graphs_ndjson(&self) -> String {
        let mut s = String::new();
        for g in &self.graphs {
            s.push_str(&g.to_json_line());
            s.push('\n');
        }
        s
    }

    /// CSV with one row per level: counts and the rooted-count band.
    pub fn stats_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record([
            "n",
            "in_face",
            "on_edge",
            "across_faces",
            "deduped",
            "tutte_lower",
            "tutte_upper",
            "within_band",
        ])
        .expect("writing to memory cannot fail");
        for s in &self.stats {
            w.write_record([
                s.n.to_string(),
                s.in_face.to_string(),
                s.on_edge.to_string(),
                s.across_faces.to_string(),
                s.deduped.to_string(),
                format!("{:.4}", s.tutte_lower),
                format!("{:.4}", s.tutte_upper),
                s.within_band.to_string(),
            ])
            .expect("writing to memory cannot fail");
        }
        String::from_utf8(w.into_inner().expect("writing to memory cannot fail"))
            .expect("csv output is ascii")
    }
}

/// The classical band for triangulation counts at `n` vertices: the rooted
/// count divided by the maximal root multiplicity 12(n-2) (directed edge
/// choices times reflection), and the rooted count itself.
pub fn tutte_band(n: usize) -> (f64, f64) {
    let upper = rooted_count(n);
    let denom = BigUint::from(12 * (n - 2));
    let lower = &upper / &denom; // integer part is enough for a band check
    let to_f64 = |x: &BigUint| x.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    (to_f64(&lower), to_f64(&upper))
}

/// Exhaustively enumerate the distinct triangulations on `n` vertices by
/// iterated expansion from the tetrahedral map with canonical-form
/// deduplication. Deterministic: candidates are keyed and merged in
/// enumeration order regardless of thread scheduling.
pub fn enumerate_triangulations(n: usize) -> Result<GenerationBatch, GenerateError> {
    if !(4..=ENUMERATION_CAP).contains(&n) {
        return Err(GenerateError::CapExceeded { n, max: ENUMERATION_CAP });
    }
    let (l4, u4) = tutte_band(4);
    let mut stats = vec![LevelStats {
        n: 4,
        in_face: 0,
        on_edge: 0,
        across_faces: 0,
        deduped: 1,
        tutte_lower: l4,
        tutte_upper: u4,
        within_band: l4 <= 1.0 && 1.0 <= u4,
    }];
    let mut current = vec![k4(1)];
    for level in 5..=n {
        let candidates: Vec<Candidate> = current
            .par_iter()
            .flat_map_iter(expand)
            .collect();
        let count = |m: Move| candidates.iter().filter(|c| c.moved == m).count();
        let (c1, c2, c3) = (count(Move::InFace), count(Move::OnEdge), count(Move::AcrossFaces));
        let keyed: Vec<(Vec<usize>, ColorGraph)> = candidates
            .into_par_iter()
            .map(|c| (canonical_code(&c.graph), c.graph))
            .collect();
        let mut dedup: BTreeMap<Vec<usize>, ColorGraph> = BTreeMap::new();
        for (key, graph) in keyed {
            dedup.entry(key).or_insert(graph);
        }
        let deduped = dedup.len();
        assert!(
            deduped <= 11 * (level - 3) * current.len(),
            "growth bound 11(n-3) violated at n={level}"
        );
        let (lo, hi) = tutte_band(level);
        stats.push(LevelStats {
            n: level,
            in_face: c1,
            on_edge: c2,
            across_faces: c3,
            deduped,
            tutte_lower: lo,
            tutte_upper: hi,
            within_band: lo <= deduped as f64 && deduped as f64 <= hi,
        });
        current = dedup.into_values().collect();
    }
    Ok(GenerationBatch { n, graphs: current, stats })
}

fn factorial(k: usize) -> BigUint {
    (1..=k).map(BigUint::from).product()
}

/// Rooted triangulation count 2 (4n-11)! / ((3n-7)! (n-2)!).
fn rooted_count(n: usize) -> BigUint {
    let num = BigUint::from(2u32) * factorial(4 * n - 11);
    let den = factorial(3 * n - 7) * factorial(n - 2);
    debug_assert!((&num % &den) == BigUint::ZERO);
    &num / &den
}

/// Upper bound on the number of colored triangulations with `n` vertices
/// and colors from `1..=m`: rooted count times m^(4n-6), exact.
pub fn coloring_bound(n: usize, m: usize) -> BigUint {
    assert!(n >= 4 && m >= 1, "bound needs n >= 4 and m >= 1");
    rooted_count(n) * BigUint::from(m).pow(4 * n as u32 - 6)
}

/// Sum of [`coloring_bound`] over vertex counts 4..=n_max, the total count
/// of colored triangulations any exhaustive search could face.
pub fn summed_coloring_bound(m: usize, n_max: usize) -> BigUint {
    assert!(n_max >= 4 && m >= 1, "bound needs n_max >= 4 and m >= 1");
    // roll the factorials forward instead of recomputing per term
    let m = BigUint::from(m);
    let mut num = BigUint::from(2u32) * factorial(5) * m.pow(10); // n = 4
    let mut den = factorial(5) * factorial(2);
    let mut total = BigUint::ZERO;
    for n in 4..=n_max {
        total += &num / &den;
        // advance to n+1
        for k in (4 * n - 10)..=(4 * n - 7) {
            num *= BigUint::from(k);
        }
        num *= m.pow(4);
        for k in (3 * n - 6)..=(3 * n - 4) {
            den *= BigUint::from(k);
        }
        den *= BigUint::from(n - 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::optimal_octahedron_config;
    use crate::graph::{canonical_form, graph_from_packing, validate};

    /// The 5-vertex double pyramid: apexes 3 and 4 over triangle 0,1,2.
    fn double_pyramid() -> ColorGraph {
        let faces = [
            [0, 1, 3],
            [1, 2, 3],
            [2, 0, 3],
            [0, 1, 4],
            [1, 2, 4],
            [2, 0, 4],
        ];
        let edges = vec![
            (0, 1, 1),
            (0, 2, 1),
            (1, 2, 1),
            (0, 3, 1),
            (1, 3, 1),
            (2, 3, 1),
            (0, 4, 1),
            (1, 4, 1),
            (2, 4, 1),
        ];
        graph_from_faces(5, 1, vec![1; 5], edges, &faces).unwrap()
    }

    #[test]
    fn degree_three_reduction_restores_the_link_triangle() {
        let g = double_pyramid();
        // apex 4 has degree 3
        let r = reduce_vertex(&g, 4).unwrap();
        assert_eq!(r.n, 4);
        assert!(validate(&r).pass);
        assert_eq!(canonical_form(&r), canonical_form(&k4(1)));
    }

    #[test]
    fn degree_four_reduction_of_the_double_pyramid_gives_k4() {
        let g = double_pyramid();
        // equator vertex 0 has degree 4; the equatorial diagonal exists,
        // so the apex-apex diagonal is chosen
        assert_eq!(g.degree(0), 4);
        let r = reduce_vertex(&g, 0).unwrap();
        assert_eq!(r.n, 4);
        assert!(validate(&r).pass);
        // complete on 4 vertices; the added apex-apex diagonal is unassigned
        assert_eq!(r.edge_count(), 6);
        assert_eq!(
            r.edge_list().iter().filter(|&&(_, _, c)| c == 0).count(),
            1
        );
    }

    #[test]
    fn reference_graph_degree_four_vertex_reduces_cleanly() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        assert_eq!(g.degree(1), 4);
        let r = reduce_vertex(&g, 1).unwrap();
        assert_eq!(r.n, 13);
        assert!(validate(&r).pass, "{:?}", validate(&r).failures);
    }

    #[test]
    fn bad_degree_is_rejected() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        assert_eq!(g.degree(0), 6);
        assert!(matches!(
            reduce_vertex(&g, 0),
            Err(GenerateError::BadDegree { vertex: 0, degree: 6 })
        ));
    }

    #[test]
    fn k4_cannot_reduce() {
        assert!(reduce_vertex(&k4(1), 0).is_err());
    }

    #[test]
    fn expansion_counts_match_the_formulas() {
        // parent n-1 = 4: 2(n-3) = 4 faces, 3(n-3) = 6 edges
        let cands = expand(&k4(1));
        let count = |m: Move| cands.iter().filter(|c| c.moved == m).count();
        assert_eq!(count(Move::InFace), 4);
        assert_eq!(count(Move::OnEdge), 6);
        // all pentagon corners collide on the tetrahedral map
        assert_eq!(count(Move::AcrossFaces), 0);
        for c in &cands {
            assert!(validate(&c.graph).pass);
            assert_eq!(c.graph.n, 5);
        }
        // parent n-1 = 5: 6 faces, 9 edges, across-faces bounded by 18
        let cands5 = expand(&double_pyramid());
        let count5 = |m: Move| cands5.iter().filter(|c| c.moved == m).count();
        assert_eq!(count5(Move::InFace), 6);
        assert_eq!(count5(Move::OnEdge), 9);
        assert!(count5(Move::AcrossFaces) <= 18);
    }

    #[test]
    fn expanding_k4_yields_one_distinct_graph() {
        let mut keys: Vec<String> = expand(&k4(1))
            .iter()
            .map(|c| canonical_form(&c.graph))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 1);
    }

    #[test]
    fn expanding_the_double_pyramid_yields_two_distinct_graphs() {
        let mut keys: Vec<String> = expand(&double_pyramid())
            .iter()
            .map(|c| canonical_form(&c.graph))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 2);
    }

    #[test]
    fn enumeration_counts_for_small_levels() {
        let batch = enumerate_triangulations(8).unwrap();
        let counts: Vec<usize> = batch.stats.iter().map(|s| s.deduped).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14]);
        assert!(batch.stats.iter().all(|s| s.within_band));
        for g in &batch.graphs {
            let rep = validate(g);
            assert!(rep.pass, "{:?}", rep.failures);
            assert_eq!(g.n, 8);
            // a vertex of degree at most 5 always exists
            assert!(*rep.degree_census.keys().next().unwrap() <= 5);
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(matches!(
            enumerate_triangulations(13),
            Err(GenerateError::CapExceeded { n: 13, max: 12 })
        ));
        assert!(matches!(
            enumerate_triangulations(3),
            Err(GenerateError::CapExceeded { n: 3, max: 12 })
        ));
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_triangulations(7).unwrap();
        let b = enumerate_triangulations(7).unwrap();
        assert_eq!(a.graphs_ndjson(), b.graphs_ndjson());
        assert_eq!(a.stats_csv(), b.stats_csv());
    }

    #[test]
    fn inverse_moves_recover_the_parent() {
        let batch = enumerate_triangulations(6).unwrap();
        for g in &batch.graphs {
            let key = canonical_form(g);
            for v in 0..g.n {
                if !(3..=5).contains(&g.degree(v)) {
                    continue;
                }
                let Ok(reduced) = reduce_vertex(g, v) else { continue };
                let recovered = expand(&reduced)
                    .iter()
                    .any(|c| canonical_form(&c.graph) == key);
                assert!(recovered, "vertex {v} reduction lost the parent");
            }
        }
    }

    #[test]
    fn coloring_bound_matches_direct_arithmetic() {
        assert_eq!(coloring_bound(4, 1), BigUint::from(1u32));
        assert_eq!(coloring_bound(5, 1), BigUint::from(3u32));
        assert_eq!(coloring_bound(6, 1), BigUint::from(13u32));
        assert_eq!(coloring_bound(7, 1), BigUint::from(68u32));
        // colored bound for the 14-vertex case dwarfs 4^50
        let big = coloring_bound(14, 4);
        assert!(big > BigUint::from(4u32).pow(50));
    }

    #[test]
    fn summed_bound_accumulates_the_terms() {
        let direct: BigUint = (4..=9).map(|n| coloring_bound(n, 3)).sum();
        assert_eq!(summed_coloring_bound(3, 9), direct);
        assert_eq!(summed_coloring_bound(1, 6), BigUint::from(17u32));
    }

    #[test]
    fn stats_csv_has_expected_shape() {
        let batch = enumerate_triangulations(6).unwrap();
        let csv = batch.stats_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4); // header + levels 4,5,6
        assert!(lines[0].starts_with("n,in_face,on_edge"));
        // level 5 raw counts: 4 in-face, 6 on-edge candidates from K4
        assert!(lines[2].starts_with("5,4,6,0,1,"));
    }
}
