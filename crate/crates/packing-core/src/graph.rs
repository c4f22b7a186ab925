//! Triangulated color graphs of general local packings.
//!
//! The boundary structure of a local cell dualizes to a graph on the
//! sphere: one graph vertex per cell face, one edge per shared cell edge,
//! one triangular graph face per (simple) cell vertex. Vertices and edges
//! carry colors 1..m naming the body facet pair the corresponding touching
//! direction meets. The embedding is stored as a rotation system (cyclic
//! neighbor order per vertex); faces are derived by orbit tracing, never
//! stored.
//!
//! Color 0 marks an unassigned edge color and only appears transiently
//! inside the enumeration machinery; every public producer emits colors in
//! 1..m.

use crate::catalog::Body;
use crate::cell::{self, CellError, PointConfig};
use crate::geom::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("configuration is not a general local packing")]
    NotGeneral,
    #[error("matrix admits no planar triangulation embedding")]
    NotTriangulable,
    #[error("graph uses {graph} colors but the body has {body} facet pairs")]
    ColorCountMismatch { graph: usize, body: usize },
    #[error("invalid graph data: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Cell(#[from] CellError),
}

/// Colored triangulation of the sphere with an explicit rotation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorGraph {
    pub n: usize,
    /// Number of available colors; vertex colors lie in 1..=m.
    pub m: usize,
    pub vertex_colors: Vec<usize>,
    edges: BTreeMap<(usize, usize), usize>,
    /// Cyclic neighbor order per vertex, one orientation for the whole map.
    pub rotation: Vec<Vec<usize>>,
}

impl ColorGraph {
    /// Structural constructor: bounds, color ranges, and agreement between
    /// the edge set and the rotation system are enforced here, so every
    /// held value is safe to traverse. Mathematical triangulation
    /// conditions are graded separately by [`validate`].
    pub fn new(
        n: usize,
        m: usize,
        vertex_colors: Vec<usize>,
        edge_list: Vec<(usize, usize, usize)>,
        rotation: Vec<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let fail = |msg: String| Err(GraphError::InvalidGraph(msg));
        if m == 0 {
            return fail("color count m must be positive".into());
        }
        if vertex_colors.len() != n {
            return fail("vertex_colors length differs from n".into());
        }
        for (v, &c) in vertex_colors.iter().enumerate() {
            if c == 0 || c > m {
                return fail(format!("vertex {v} color {c} outside 1..={m}"));
            }
        }
        let mut edges = BTreeMap::new();
        for &(a, b, c) in &edge_list {
            if a >= n || b >= n || a == b {
                return fail(format!("edge ({a},{b}) out of range"));
            }
            if c > m {
                return fail(format!("edge ({a},{b}) color {c} outside 0..={m}"));
            }
            if edges.insert((a.min(b), a.max(b)), c).is_some() {
                return fail(format!("duplicate edge ({a},{b})"));
            }
        }
        if rotation.len() != n {
            return fail("rotation length differs from n".into());
        }
        for (v, rot) in rotation.iter().enumerate() {
            let neighbors: BTreeSet<usize> = edges
                .keys()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            let listed: BTreeSet<usize> = rot.iter().copied().collect();
            if listed.len() != rot.len() || listed != neighbors {
                return fail(format!("rotation at {v} is not a neighbor permutation"));
            }
        }
        Ok(Self { n, m, vertex_colors, edges, rotation })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(low, high, color)` triples.
    pub fn edge_list(&self) -> Vec<(usize, usize, usize)> {
        self.edges.iter().map(|(&(a, b), &c)| (a, b, c)).collect()
    }

    pub fn edge_color(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    /// Degree census: map from degree to the number of vertices with it.
    pub fn degree_census(&self) -> BTreeMap<usize, usize> {
        let mut census = BTreeMap::new();
        for v in 0..self.n {
            *census.entry(self.degree(v)).or_insert(0) += 1;
        }
        census
    }

    /// Faces traced from the rotation system: orbits of the successor map
    /// `(u,v) -> (v, w)` where `w` follows `u` in the rotation at `v`.
    /// Errors if any orbit is not a 3-cycle.
    pub fn faces(&self) -> Result<Vec<[usize; 3]>, GraphError> {
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut faces = Vec::new();
        for (&(a, b), _) in &self.edges {
            for start in [(a, b), (b, a)] {
                if seen.contains(&start) {
                    continue;
                }
                let mut cycle = Vec::new();
                let (mut u, mut v) = start;
                loop {
                    seen.insert((u, v));
                    cycle.push(u);
                    let rot = &self.rotation[v];
                    let pos = rot.iter().position(|&x| x == u).expect("rotation covers edges");
                    let w = rot[(pos + 1) % rot.len()];
                    u = v;
                    v = w;
                    if (u, v) == start {
                        break;
                    }
                    if cycle.len() > 3 {
                        return Err(GraphError::InvalidGraph(format!(
                            "rotation traces a face longer than 3 at {start:?}"
                        )));
                    }
                }
                if cycle.len() != 3 {
                    return Err(GraphError::InvalidGraph(format!(
                        "rotation traces a {}-gon at {start:?}",
                        cycle.len()
                    )));
                }
                faces.push([cycle[0], cycle[1], cycle[2]]);
            }
        }
        Ok(faces)
    }

    pub fn to_json(&self) -> String {
        let repr = GraphRepr {
            n: self.n,
            m: self.m,
            vertex_colors: self.vertex_colors.clone(),
            edges: self.edge_list().iter().map(|&(a, b, c)| [a, b, c]).collect(),
            rotation: self.rotation.clone(),
        };
        serde_json::to_string_pretty(&repr).expect("graph serialization cannot fail")
    }

    /// Single-line JSON, for newline-delimited batch output.
    pub fn to_json_line(&self) -> String {
        let repr = GraphRepr {
            n: self.n,
            m: self.m,
            vertex_colors: self.vertex_colors.clone(),
            edges: self.edge_list().iter().map(|&(a, b, c)| [a, b, c]).collect(),
            rotation: self.rotation.clone(),
        };
        serde_json::to_string(&repr).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let repr: GraphRepr = serde_json::from_str(s)
            .map_err(|e| GraphError::InvalidGraph(format!("json: {e}")))?;
        Self::new(
            repr.n,
            repr.m,
            repr.vertex_colors,
            repr.edges.iter().map(|&[a, b, c]| (a, b, c)).collect(),
            repr.rotation,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    m: usize,
    vertex_colors: Vec<usize>,
    edges: Vec<[usize; 3]>,
    rotation: Vec<Vec<usize>>,
}

/// The tetrahedral map with every vertex and edge in the given color.
pub fn k4(color: usize) -> ColorGraph {
    let edges = vec![
        (0, 1, color),
        (0, 2, color),
        (0, 3, color),
        (1, 2, color),
        (1, 3, color),
        (2, 3, color),
    ];
    let rotation = vec![vec![1, 2, 3], vec![0, 3, 2], vec![0, 1, 3], vec![0, 2, 1]];
    ColorGraph::new(4, color.max(1), vec![color; 4], edges, rotation)
        .expect("tetrahedral map is structurally valid")
}

// --- Extraction from a packing ----------------------------------------------

/// Index of the facet-pair color (1-based) whose facet `h` belongs to.
fn pair_color(body: &Body, halfspace: usize) -> Option<usize> {
    let p = body.polytope()?;
    p.face_pairs
        .iter()
        .position(|&(a, b)| a == halfspace || b == halfspace)
        .map(|i| i + 1)
}

/// Extract the triangulated color graph of a general local packing:
/// graph vertices are the translates, colored by the facet pair their
/// direction touches; edges join translates whose cell faces share an
/// edge, colored by the facet pair of the difference direction; the
/// rotation at a vertex lists its neighbors in the cyclic order of its
/// cell face boundary.
pub fn graph_from_packing(cfg: &PointConfig) -> Result<ColorGraph, GraphError> {
    let body = &cfg.body;
    let poly = body
        .polytope()
        .ok_or_else(|| GraphError::InvalidGraph("body has no facets to color by".into()))?;
    let m = poly.face_pairs.len();
    if !cell::classify_packing(cfg)?.general {
        return Err(GraphError::NotGeneral);
    }
    let local = cell::build_cell(cfg)?;
    let n = cfg.translate_count();

    let mut vertex_colors = Vec::with_capacity(n);
    for i in 1..=n {
        let h = cell::unique_facet(body, &cfg.points[i]).ok_or(GraphError::NotGeneral)?;
        vertex_colors.push(pair_color(body, h).expect("facet belongs to a pair"));
    }

    // generator index per cell edge, for face adjacency and rotations
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for face in &local.faces {
        let c = &face.cycle;
        for t in 0..c.len() {
            let (a, b) = (c[t], c[(t + 1) % c.len()]);
            edge_faces
                .entry((a.min(b), a.max(b)))
                .or_default()
                .push(face.generator);
        }
    }

    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    for gens in edge_faces.values() {
        if gens.len() != 2 {
            return Err(GraphError::InvalidGraph(
                "cell edge not shared by exactly two faces".into(),
            ));
        }
        let (i, j) = (gens[0].min(gens[1]), gens[0].max(gens[1]));
        if !seen.insert((i, j)) {
            continue;
        }
        let d = cfg.points[i] - cfg.points[j];
        let h = cell::unique_facet(body, &d).ok_or(GraphError::NotGeneral)?;
        edges.push((i - 1, j - 1, pair_color(body, h).expect("facet belongs to a pair")));
    }

    let mut rotation = vec![Vec::new(); n];
    for face in &local.faces {
        let c = &face.cycle;
        let mut order = Vec::with_capacity(c.len());
        for t in 0..c.len() {
            let (a, b) = (c[t], c[(t + 1) % c.len()]);
            let gens = &edge_faces[&(a.min(b), a.max(b))];
            let other = if gens[0] == face.generator { gens[1] } else { gens[0] };
            order.push(other - 1);
        }
        rotation[face.generator - 1] = order;
    }

    let g = ColorGraph::new(n, m, vertex_colors, edges, rotation)?;
    g.faces()?;
    Ok(g)
}

// --- Adjacency matrices ------------------------------------------------------

/// Symmetric integer matrix: diagonal holds vertex colors, entry `(i,j)`
/// holds the edge color (0 when `i` and `j` are not adjacent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjMatrix {
    pub data: Vec<Vec<usize>>,
}

impl AdjMatrix {
    pub fn n(&self) -> usize {
        self.data.len()
    }

    /// Plain CSV of integers, one row per line, no header.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for row in &self.data {
            let rec: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            w.write_record(&rec).expect("writing to memory cannot fail");
        }
        String::from_utf8(w.into_inner().expect("writing to memory cannot fail"))
            .expect("csv output is ascii")
    }

    pub fn from_csv(s: &str) -> Result<Self, GraphError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(s.as_bytes());
        let mut data: Vec<Vec<usize>> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| GraphError::InvalidGraph(format!("csv: {e}")))?;
            let row: Result<Vec<usize>, _> = rec.iter().map(|f| f.trim().parse()).collect();
            data.push(row.map_err(|e| GraphError::InvalidGraph(format!("csv entry: {e}")))?);
        }
        let n = data.len();
        if n == 0 || data.iter().any(|r| r.len() != n) {
            return Err(GraphError::InvalidGraph("matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if data[i][j] != data[j][i] {
                    return Err(GraphError::InvalidGraph(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
            if data[i][i] == 0 {
                return Err(GraphError::InvalidGraph(format!(
                    "diagonal entry {i} must be a color in 1..=m"
                )));
            }
        }
        Ok(Self { data })
    }
}

/// Adjacency matrix of a graph. Edge colors must be assigned (nonzero):
/// in the matrix form 0 means "no edge".
pub fn adjacency_matrix(g: &ColorGraph) -> Result<AdjMatrix, GraphError> {
    let mut data = vec![vec![0usize; g.n]; g.n];
    for v in 0..g.n {
        data[v][v] = g.vertex_colors[v];
    }
    for (a, b, c) in g.edge_list() {
        if c == 0 {
            return Err(GraphError::InvalidGraph(format!(
                "edge ({a},{b}) has no color; matrices reserve 0 for non-edges"
            )));
        }
        data[a][b] = c;
        data[b][a] = c;
    }
    Ok(AdjMatrix { data })
}

/// Rebuild an embedded colored triangulation from its adjacency matrix.
///
/// The embedding is recovered by searching for a face set: 2(n-2)
/// triangles of the graph covering every edge exactly twice, then
/// orienting the faces consistently into a rotation system. Fails with
/// [`GraphError::NotTriangulable`] when counts, degrees, connectivity, or
/// the face search rule out a triangulation.
pub fn matrix_to_graph(mat: &AdjMatrix) -> Result<ColorGraph, GraphError> {
    let n = mat.n();
    if n < 4 {
        return Err(GraphError::NotTriangulable);
    }
    let m = mat
        .data
        .iter()
        .flat_map(|r| r.iter().copied())
        .max()
        .unwrap_or(0);
    let vertex_colors: Vec<usize> = (0..n).map(|i| mat.data[i][i]).collect();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if mat.data[i][j] > 0 {
                edges.push((i, j, mat.data[i][j]));
            }
        }
    }
    if edges.len() != 3 * (n - 2) {
        return Err(GraphError::NotTriangulable);
    }
    let mut adj = vec![BTreeSet::new(); n];
    for &(i, j, _) in &edges {
        adj[i].insert(j);
        adj[j].insert(i);
    }
    if adj.iter().any(|s| s.len() < 3) || !connected(&adj) {
        return Err(GraphError::NotTriangulable);
    }

    let faces = find_face_set(n, &adj).ok_or(GraphError::NotTriangulable)?;
    let rotation = orient_faces(n, &adj, &faces).ok_or(GraphError::NotTriangulable)?;
    let g = ColorGraph::new(n, m, vertex_colors, edges, rotation)?;
    g.faces()?;
    Ok(g)
}

fn connected(adj: &[BTreeSet<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == adj.len()
}

/// Backtracking search for a sphere-triangulation face set: every edge in
/// exactly two triangles and every triangle an actual graph triangle. The
/// sphere condition (links are single cycles) is certified afterwards by
/// the orientation pass.
fn find_face_set(n: usize, adj: &[BTreeSet<usize>]) -> Option<Vec<[usize; 3]>> {
    let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edge_order: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for &j in &adj[i] {
            if i < j {
                edge_count.insert((i, j), 0);
                edge_order.push((i, j));
            }
        }
    }
    let target = 2 * (n - 2);
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut used: BTreeSet<[usize; 3]> = BTreeSet::new();
    if search_faces(adj, &edge_order, &mut edge_count, &mut faces, &mut used, target) {
        Some(faces)
    } else {
        None
    }
}

fn search_faces(
    adj: &[BTreeSet<usize>],
    edge_order: &[(usize, usize)],
    edge_count: &mut BTreeMap<(usize, usize), usize>,
    faces: &mut Vec<[usize; 3]>,
    used: &mut BTreeSet<[usize; 3]>,
    target: usize,
) -> bool {
    if faces.len() == target {
        return edge_count.values().all(|&c| c == 2);
    }
    // first unsaturated edge drives the branch
    let Some(&(a, b)) = edge_order.iter().find(|e| edge_count[e] < 2) else {
        return false;
    };
    let candidates: Vec<usize> = adj[a].intersection(&adj[b]).copied().collect();
    for w in candidates {
        let mut tri = [a, b, w];
        tri.sort_unstable();
        if used.contains(&tri) {
            continue;
        }
        let keys = [
            (tri[0], tri[1]),
            (tri[0], tri[2]),
            (tri[1], tri[2]),
        ];
        if keys.iter().any(|k| edge_count[k] >= 2) {
            continue;
        }
        for k in &keys {
            *edge_count.get_mut(k).unwrap() += 1;
        }
        used.insert(tri);
        faces.push(tri);
        if search_faces(adj, edge_order, edge_count, faces, used, target) {
            return true;
        }
        faces.pop();
        used.remove(&tri);
        for k in &keys {
            *edge_count.get_mut(k).unwrap() -= 1;
        }
    }
    false
}

/// Orient a face set consistently (adjacent faces traverse their shared
/// edge in opposite directions) and read off the rotation system. `None`
/// if the face set does not close up into a sphere map.
pub(crate) fn orient_faces(
    n: usize,
    adj: &[BTreeSet<usize>],
    faces: &[[usize; 3]],
) -> Option<Vec<Vec<usize>>> {
    // faces touching each undirected edge
    let mut at_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for t in 0..3 {
            let (a, b) = (f[t], f[(t + 1) % 3]);
            at_edge.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    if at_edge.values().any(|v| v.len() != 2) {
        return None;
    }

    let mut oriented: Vec<Option<[usize; 3]>> = vec![None; faces.len()];
    oriented[0] = Some(faces[0]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(fi) = queue.pop_front() {
        let f = oriented[fi].expect("queued faces are oriented");
        for t in 0..3 {
            let (a, b) = (f[t], f[(t + 1) % 3]);
            let pair = &at_edge[&(a.min(b), a.max(b))];
            let other = if pair[0] == fi { pair[1] } else { pair[0] };
            let g = faces[other];
            let c = *g.iter().find(|&&x| x != a && x != b).expect("third corner");
            // neighbor must traverse the shared edge as (b, a)
            let want = [b, a, c];
            match oriented[other] {
                None => {
                    oriented[other] = Some(want);
                    queue.push_back(other);
                }
                Some(cur) => {
                    if !same_cycle(&cur, &want) {
                        return None;
                    }
                }
            }
        }
    }
    if oriented.iter().any(Option::is_none) {
        return None;
    }

    // successor map at each vertex: directed face (v, a, b) says edge to a
    // is followed by edge to b in the rotation at v
    let mut succ: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
    for f in oriented.iter().map(|f| f.expect("all oriented")) {
        for t in 0..3 {
            let (v, a, b) = (f[t], f[(t + 1) % 3], f[(t + 2) % 3]);
            if succ[v].insert(a, b).is_some() {
                return None;
            }
        }
    }
    let mut rotation = Vec::with_capacity(n);
    for v in 0..n {
        let deg = adj[v].len();
        let start = *adj[v].iter().next()?;
        let mut order = vec![start];
        let mut cur = start;
        for _ in 1..deg {
            cur = *succ[v].get(&cur)?;
            if order.contains(&cur) {
                return None; // link closes early: not a single cycle
            }
            order.push(cur);
        }
        if *succ[v].get(&cur)? != start {
            return None;
        }
        rotation.push(order);
    }
    Some(rotation)
}

fn same_cycle(a: &[usize; 3], b: &[usize; 3]) -> bool {
    (0..3).any(|s| (0..3).all(|t| a[(s + t) % 3] == b[t]))
}

// --- Validation --------------------------------------------------------------

/// Outcome of grading a graph against the triangulation identities.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub pass: bool,
    pub failures: Vec<String>,
    /// Degree census: degree -> number of vertices.
    pub degree_census: BTreeMap<usize, usize>,
    pub face_count: usize,
}

/// Check Euler counts (e = 3(n-2), f = 2(n-2)), triangular face closure,
/// the degree census identities, the minimum-degree window, and color
/// ranges. Failures are reported, never raised.
pub fn validate(g: &ColorGraph) -> ValidationReport {
    let mut failures = Vec::new();
    let n = g.n;
    let e = g.edge_count();
    if n < 4 {
        failures.push(format!("vertex count {n} below 4"));
    }
    if e != 3 * n.saturating_sub(2) {
        failures.push(format!("edge count {e} differs from 3(n-2) = {}", 3 * (n - 2)));
    }
    let face_count = match g.faces() {
        Ok(f) => {
            if f.len() != 2 * n.saturating_sub(2) {
                failures.push(format!(
                    "face count {} differs from 2(n-2) = {}",
                    f.len(),
                    2 * (n - 2)
                ));
            }
            f.len()
        }
        Err(err) => {
            failures.push(format!("face tracing failed: {err}"));
            0
        }
    };
    let census = g.degree_census();
    let total: usize = census.values().sum();
    if total != n {
        failures.push("degree census does not sum to n".into());
    }
    let weighted: usize = census.iter().map(|(d, c)| d * c).sum();
    if weighted != 6 * n.saturating_sub(2) {
        failures.push(format!(
            "weighted degree sum {weighted} differs from 6(n-2) = {}",
            6 * (n - 2)
        ));
    }
    if let Some((&min_deg, _)) = census.iter().next() {
        if min_deg < 3 {
            failures.push(format!("minimum degree {min_deg} below 3"));
        }
        if min_deg > 5 {
            failures.push(format!("no vertex of degree at most 5 (minimum {min_deg})"));
        }
    }
    for (v, &c) in g.vertex_colors.iter().enumerate() {
        if c == 0 || c > g.m {
            failures.push(format!("vertex {v} color {c} outside 1..={}", g.m));
        }
    }
    ValidationReport {
        pass: failures.is_empty(),
        failures,
        degree_census: census,
        face_count,
    }
}

// --- Canonical forms ----------------------------------------------------------

/// Canonical key of a colored embedded graph: the lexicographic minimum,
/// over directed start edges and both orientations, of a breadth-first
/// rotation-system code including degrees, vertex colors, and edge colors.
/// Equal keys hold exactly for isomorphic colored embedded graphs (for
/// triangulations the embedding is unique up to reflection, so this is
/// plain colored-graph isomorphism).
pub fn canonical_form(g: &ColorGraph) -> String {
    let code = canonical_code(g);
    let parts: Vec<String> = code.iter().map(|x| x.to_string()).collect();
    parts.join(",")
}

/// The minimal code itself; [`canonical_form`] is its decimal rendering.
///
/// Codes open with the root degree, so only minimum-degree roots can
/// attain the minimum and the scan is restricted to them.
pub fn canonical_code(g: &ColorGraph) -> Vec<usize> {
    if g.n == 0 {
        return Vec::new();
    }
    // edge colors aligned with the rotation order, for map-free lookups
    let rot_colors: Vec<Vec<usize>> = (0..g.n)
        .map(|u| {
            g.rotation[u]
                .iter()
                .map(|&w| g.edge_color(u, w).expect("rotation lists real edges"))
                .collect()
        })
        .collect();
    let min_deg = (0..g.n).map(|v| g.degree(v)).min().expect("nonempty");
    let mut scratch = CodeScratch {
        label: vec![usize::MAX; g.n],
        entry: vec![0; g.n],
        order: Vec::with_capacity(g.n),
    };
    let mut best: Option<Vec<usize>> = None;
    for u in 0..g.n {
        if g.degree(u) != min_deg {
            continue;
        }
        for &v in &g.rotation[u] {
            for flip in [false, true] {
                let code = bfs_code(g, &rot_colors, u, v, flip, &mut scratch);
                if best.as_ref().map_or(true, |b| code < *b) {
                    best = Some(code);
                }
            }
        }
    }
    best.unwrap_or_else(|| vec![min_deg, g.vertex_colors[0]])
}

struct CodeScratch {
    label: Vec<usize>,
    entry: Vec<usize>,
    order: Vec<usize>,
}

fn bfs_code(
    g: &ColorGraph,
    rot_colors: &[Vec<usize>],
    root: usize,
    root_entry: usize,
    flip: bool,
    s: &mut CodeScratch,
) -> Vec<usize> {
    const UNLABELED: usize = usize::MAX;
    s.label.fill(UNLABELED);
    s.order.clear();
    s.label[root] = 0;
    s.entry[root] = root_entry;
    s.order.push(root);
    let mut next = 1;
    let mut code = Vec::with_capacity(1 + g.n + 4 * g.edge_count());
    code.push(g.degree(root));
    let mut qi = 0;
    while qi < s.order.len() {
        let u = s.order[qi];
        qi += 1;
        code.push(g.vertex_colors[u]);
        let rot = &g.rotation[u];
        let deg = rot.len();
        let pos = rot
            .iter()
            .position(|&x| x == s.entry[u])
            .expect("entry neighbor is in the rotation");
        for t in 0..deg {
            let idx = if flip { (pos + deg - t) % deg } else { (pos + t) % deg };
            let w = rot[idx];
            code.push(rot_colors[u][idx]);
            if s.label[w] == UNLABELED {
                s.label[w] = next;
                next += 1;
                s.entry[w] = u;
                s.order.push(w);
            }
            code.push(s.label[w]);
        }
    }
    code
}

// --- Constraint systems --------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Separates a translate from the origin.
    Vertex,
    /// Separates two adjacent translates from each other.
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChoice {
    Plus,
    Minus,
    Unresolved,
}

/// One separation constraint `|value| >= bound` where `value` is the
/// facet-normal functional of the row's color applied to a translate or a
/// difference of translates. Point indices are graph vertices (0-based).
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub points: Vec<usize>,
    pub coeffs: Vec<Vec3>,
    pub bound: f64,
    pub color: usize,
    pub sign: SignChoice,
}

impl ConstraintRow {
    /// The signed functional value at given translate positions (indexed
    /// by graph vertex).
    pub fn value(&self, positions: &[Vec3]) -> f64 {
        self.points
            .iter()
            .zip(&self.coeffs)
            .map(|(&i, c)| c.dot(&positions[i]))
            .sum()
    }

    /// Slack of `|value| >= bound`; nonnegative iff satisfied.
    pub fn slack(&self, positions: &[Vec3]) -> f64 {
        self.value(positions).abs() - self.bound
    }
}

#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub rows: Vec<ConstraintRow>,
}

/// Translate a colored graph into its separation constraint system: one
/// row per vertex (touching facet of its color at gauge 2, bound `2 tau`)
/// and one row per edge (the same functional on the difference).
pub fn constraints_from_graph(body: &Body, g: &ColorGraph) -> Result<ConstraintSet, GraphError> {
    let poly = body
        .polytope()
        .ok_or_else(|| GraphError::InvalidGraph("body has no facet structure".into()))?;
    let pairs = &poly.face_pairs;
    if g.m != pairs.len() {
        return Err(GraphError::ColorCountMismatch {
            graph: g.m,
            body: pairs.len(),
        });
    }
    let facet = |color: usize| &poly.halfspaces[pairs[color - 1].0];
    let mut rows = Vec::with_capacity(g.n + g.edge_count());
    for v in 0..g.n {
        let h = facet(g.vertex_colors[v]);
        rows.push(ConstraintRow {
            kind: RowKind::Vertex,
            points: vec![v],
            coeffs: vec![h.normal],
            bound: 2.0 * h.offset,
            color: g.vertex_colors[v],
            sign: SignChoice::Unresolved,
        });
    }
    for (a, b, c) in g.edge_list() {
        if c == 0 {
            return Err(GraphError::InvalidGraph(format!(
                "edge ({a},{b}) has no color; constraints need one"
            )));
        }
        let h = facet(c);
        rows.push(ConstraintRow {
            kind: RowKind::Edge,
            points: vec![a, b],
            coeffs: vec![h.normal, -h.normal],
            bound: 2.0 * h.offset,
            color: c,
            sign: SignChoice::Unresolved,
        });
    }
    Ok(ConstraintSet { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{optimal_cuboctahedron_config, optimal_octahedron_config};

    #[test]
    fn k4_is_a_valid_triangulation() {
        let g = k4(1);
        let report = validate(&g);
        assert!(report.pass, "{:?}", report.failures);
        assert_eq!(report.face_count, 4);
        assert_eq!(report.degree_census.get(&3), Some(&4));
    }

    #[test]
    fn reference_octahedron_graph_shape() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        assert_eq!(g.n, 14);
        assert_eq!(g.m, 4);
        assert_eq!(g.edge_count(), 36);
        let report = validate(&g);
        assert!(report.pass, "{:?}", report.failures);
        assert_eq!(report.degree_census.get(&4), Some(&6));
        assert_eq!(report.degree_census.get(&6), Some(&8));
    }

    #[test]
    fn reference_octahedron_matrix_first_row() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        let mat = adjacency_matrix(&g).unwrap();
        assert_eq!(
            mat.data[0],
            vec![1, 2, 0, 3, 4, 0, 0, 0, 0, 1, 3, 0, 0, 4]
        );
    }

    #[test]
    fn reference_cuboctahedron_graph_shape() {
        let g = graph_from_packing(&optimal_cuboctahedron_config()).unwrap();
        assert_eq!(g.n, 14);
        assert_eq!(g.m, 7);
        assert_eq!(g.edge_count(), 36);
        assert!(validate(&g).pass);
        let mat = adjacency_matrix(&g).unwrap();
        assert_eq!(mat.data[0][1], 6);
    }

    #[test]
    fn nongeneral_config_is_rejected() {
        let s = 2.0 / 3.0f64.sqrt();
        let mut points = vec![Vec3::zeros()];
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    points.push(Vec3::new(sx * s, sy * s, sz * s));
                }
            }
        }
        let cfg = PointConfig::new(crate::catalog::catalog("Q").unwrap(), points).unwrap();
        assert!(matches!(
            graph_from_packing(&cfg),
            Err(GraphError::NotGeneral)
        ));
    }

    #[test]
    fn matrix_round_trip_via_embedding() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        let mat = adjacency_matrix(&g).unwrap();
        let back = matrix_to_graph(&mat).unwrap();
        assert_eq!(canonical_form(&back), canonical_form(&g));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = graph_from_packing(&optimal_cuboctahedron_config()).unwrap();
        let mat = adjacency_matrix(&g).unwrap();
        let csv = mat.to_csv();
        let back = AdjMatrix::from_csv(&csv).unwrap();
        assert_eq!(mat, back);
    }

    #[test]
    fn k4_matrix_round_trip() {
        let mat = adjacency_matrix(&k4(1)).unwrap();
        assert_eq!(mat.data, vec![
            vec![1, 1, 1, 1],
            vec![1, 1, 1, 1],
            vec![1, 1, 1, 1],
            vec![1, 1, 1, 1],
        ]);
        let g = matrix_to_graph(&mat).unwrap();
        assert!(validate(&g).pass);
        assert_eq!(canonical_form(&g), canonical_form(&k4(1)));
    }

    #[test]
    fn broken_matrix_is_not_triangulable() {
        // K4 with one edge removed: edge count off
        let mat = AdjMatrix {
            data: vec![
                vec![1, 1, 1, 0],
                vec![1, 1, 1, 1],
                vec![1, 1, 1, 1],
                vec![0, 1, 1, 1],
            ],
        };
        assert!(matches!(
            matrix_to_graph(&mat),
            Err(GraphError::NotTriangulable)
        ));
    }

    #[test]
    fn canonical_form_is_relabeling_invariant() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        let key = canonical_form(&g);
        // relabel by the permutation v -> (v*5 + 3) mod 14
        let perm: Vec<usize> = (0..14).map(|v| (v * 5 + 3) % 14).collect();
        let colors: Vec<usize> = {
            let mut c = vec![0; 14];
            for v in 0..14 {
                c[perm[v]] = g.vertex_colors[v];
            }
            c
        };
        let edges: Vec<(usize, usize, usize)> = g
            .edge_list()
            .iter()
            .map(|&(a, b, c)| (perm[a], perm[b], c))
            .collect();
        let mut rotation = vec![Vec::new(); 14];
        for v in 0..14 {
            rotation[perm[v]] = g.rotation[v].iter().map(|&w| perm[w]).collect();
        }
        let h = ColorGraph::new(14, 4, colors, edges, rotation).unwrap();
        assert_eq!(canonical_form(&h), key);
    }

    #[test]
    fn canonical_form_separates_different_colorings() {
        let a = k4(1);
        let mut b = k4(1);
        b.m = 2;
        b.vertex_colors[0] = 2;
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn constraints_match_reference_forms() {
        let cfg = optimal_octahedron_config();
        let g = graph_from_packing(&cfg).unwrap();
        let cs = constraints_from_graph(&cfg.body, &g).unwrap();
        assert_eq!(cs.rows.len(), 14 + 36);
        let row0 = &cs.rows[0];
        assert_eq!(row0.kind, RowKind::Vertex);
        assert_eq!(row0.coeffs[0], Vec3::new(1.0, 1.0, 1.0));
        assert!((row0.bound - 2.0).abs() < 1e-15);

        let cfg2 = optimal_cuboctahedron_config();
        let g2 = graph_from_packing(&cfg2).unwrap();
        let cs2 = constraints_from_graph(&cfg2.body, &g2).unwrap();
        let r0 = &cs2.rows[0];
        assert_eq!(r0.coeffs[0], Vec3::new(1.0, 0.0, 0.0));
        assert!((r0.bound - 2.0).abs() < 1e-15);
        let r1 = &cs2.rows[1];
        assert_eq!(r1.coeffs[0], Vec3::new(1.0, 1.0, 1.0));
        assert!((r1.bound - 4.0).abs() < 1e-15);
        // edge {1,5} in 1-based naming: graph vertices 0 and 4
        let e = cs2
            .rows
            .iter()
            .find(|r| r.kind == RowKind::Edge && r.points == vec![0, 4])
            .expect("edge row exists");
        assert_eq!(e.coeffs[0], Vec3::new(0.0, 1.0, 0.0));
        assert!((e.bound - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reference_constraints_are_active_at_the_reference_points() {
        for cfg in [optimal_octahedron_config(), optimal_cuboctahedron_config()] {
            let g = graph_from_packing(&cfg).unwrap();
            let cs = constraints_from_graph(&cfg.body, &g).unwrap();
            let positions: Vec<Vec3> = cfg.points[1..].to_vec();
            for row in &cs.rows {
                let v = row.value(&positions).abs();
                assert!(
                    (v - row.bound).abs() <= 1e-9,
                    "row {:?} value {v} bound {}",
                    (row.kind, &row.points, row.color),
                    row.bound
                );
            }
        }
    }

    #[test]
    fn color_count_mismatch_is_rejected() {
        let cfg = optimal_octahedron_config();
        let g = graph_from_packing(&cfg).unwrap();
        let c = crate::catalog::catalog("C").unwrap();
        assert!(matches!(
            constraints_from_graph(&c, &g),
            Err(GraphError::ColorCountMismatch { graph: 4, body: 7 })
        ));
    }

    #[test]
    fn graph_json_round_trip() {
        let g = graph_from_packing(&optimal_octahedron_config()).unwrap();
        let s = g.to_json();
        let back = ColorGraph::from_json(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn graph_json_rejects_inconsistent_counts() {
        let g = k4(1);
        let s = g.to_json().replace("\"n\": 4", "\"n\": 3");
        assert!(matches!(
            ColorGraph::from_json(&s),
            Err(GraphError::InvalidGraph(_))
        ));
    }
}
