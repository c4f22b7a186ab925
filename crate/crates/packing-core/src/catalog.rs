//! Canonical body catalog, difference bodies, cores, and reference lattices.
//!
//! The catalog fixes coordinates once so everything downstream (cells,
//! colors, bounds) agrees on facet order:
//!
//! | name                 | model                                      | volume |
//! |----------------------|--------------------------------------------|--------|
//! | `T`                  | regular tetrahedron, unit edge             | √2/12  |
//! | `O`                  | octahedron `|x|+|y|+|z| <= 1`              | 4/3    |
//! | `C`                  | cuboctahedron `max <= 1`, `sum <= 2`       | 20/3   |
//! | `Q`                  | cube `max(|x|,|y|,|z|) <= 1`               | 8      |
//! | `B`                  | unit ball                                  | 4π/3   |
//! | four parallelohedra  | vertex/edge/face counts only               | n/a    |
//!
//! Symmetric polytopes store facets as `F_1..F_n, -F_1..-F_n` and the pair
//! `(k, k+n)` is the facet color used by the graph modules, so the facet
//! order here is load-bearing, not cosmetic.

use crate::geom::{
    self, gauge, intersect_halfspaces, polytope_volume, HalfSpace, Polytope,
    SteinerCoeffs, Vec3,
};
use nalgebra::Matrix3;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown body name: {0}")]
    UnknownBody(String),
    #[error("lattice basis is singular")]
    SingularBasis,
}

/// Geometric model of a catalog entry. Parallelohedra without a coordinate
/// model carry only their vertex/edge/face census.
#[derive(Debug, Clone)]
pub enum Shape {
    Polytope(Polytope),
    Ball { radius: f64 },
    Counts { vertices: usize, edges: usize, faces: usize },
}

#[derive(Debug, Clone)]
pub struct Body {
    pub name: String,
    pub shape: Shape,
    /// Exact volume when a coordinate model exists.
    pub volume: Option<f64>,
}

impl Body {
    pub fn polytope(&self) -> Option<&Polytope> {
        match &self.shape {
            Shape::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.shape {
            Shape::Polytope(p) => p.symmetric,
            Shape::Ball { .. } => true,
            Shape::Counts { .. } => false,
        }
    }

    /// Minkowski gauge of `x`; `None` for census-only bodies.
    pub fn gauge(&self, x: &Vec3) -> Option<f64> {
        match &self.shape {
            Shape::Polytope(p) => Some(gauge(p, x)),
            Shape::Ball { radius } => Some(x.norm() / radius),
            Shape::Counts { .. } => None,
        }
    }

    /// The boundary point on the open ray through `dir`.
    pub fn boundary_point(&self, dir: &Vec3) -> Option<Vec3> {
        let g = self.gauge(dir)?;
        if g <= 1e-12 {
            return None;
        }
        Some(dir / g)
    }

    pub fn steiner_coeffs(&self) -> Option<SteinerCoeffs> {
        match &self.shape {
            Shape::Polytope(p) => p.steiner,
            Shape::Ball { radius } => Some(SteinerCoeffs {
                surface: 4.0 * PI * radius * radius,
                mean_curvature: 4.0 * PI * radius,
            }),
            Shape::Counts { .. } => None,
        }
    }

    /// Volume of `body + rB` (outer parallel body at distance `r`).
    pub fn parallel_volume(&self, r: f64) -> Result<f64, geom::GeomError> {
        match &self.shape {
            Shape::Polytope(p) => geom::steiner_volume(p, r),
            Shape::Ball { radius } => {
                let t = radius + r;
                Ok(4.0 * PI / 3.0 * t * t * t)
            }
            Shape::Counts { .. } => Err(geom::GeomError::MissingSteinerData),
        }
    }

    /// Vertex, edge, and face counts; `None` for the ball.
    pub fn v_e_f(&self) -> Option<(usize, usize, usize)> {
        match &self.shape {
            Shape::Polytope(p) => {
                Some((p.vertices.len(), p.edge_set().len(), p.faces.len()))
            }
            Shape::Ball { .. } => None,
            Shape::Counts { vertices, edges, faces } => Some((*vertices, *edges, *faces)),
        }
    }
}

/// Canonical catalog names, in the order reported by the JSON index.
pub const CATALOG_NAMES: [&str; 9] = [
    "T",
    "O",
    "C",
    "Q",
    "B",
    "hexagonal-prism",
    "rhombic-dodecahedron",
    "elongated-octahedron",
    "truncated-octahedron",
];

/// Look up a catalog body by name (aliases: full lowercase solid names).
pub fn catalog(name: &str) -> Result<Body, CatalogError> {
    match name {
        "T" | "tetrahedron" => Ok(tetrahedron()),
        "O" | "octahedron" => Ok(octahedron()),
        "C" | "cuboctahedron" => Ok(cuboctahedron()),
        "Q" | "cube" => Ok(cube()),
        "B" | "ball" => Ok(ball()),
        "hexagonal-prism" => Ok(counts_body("hexagonal-prism", 12, 18, 8)),
        "rhombic-dodecahedron" => Ok(counts_body("rhombic-dodecahedron", 14, 24, 12)),
        "elongated-octahedron" => Ok(counts_body("elongated-octahedron", 18, 28, 12)),
        "truncated-octahedron" => Ok(counts_body("truncated-octahedron", 24, 36, 14)),
        other => Err(CatalogError::UnknownBody(other.to_string())),
    }
}

fn counts_body(name: &str, vertices: usize, edges: usize, faces: usize) -> Body {
    Body {
        name: name.to_string(),
        shape: Shape::Counts { vertices, edges, faces },
        volume: None,
    }
}

fn ball() -> Body {
    Body {
        name: "B".to_string(),
        shape: Shape::Ball { radius: 1.0 },
        volume: Some(4.0 * PI / 3.0),
    }
}

/// Octahedron `{|x|+|y|+|z| <= 1}` with facets ordered
/// `(1,1,1), (-1,1,1), (1,-1,1), (1,1,-1)` then their negatives, so facet
/// pair `k` is `(F_k, F_{k+4})`.
fn octahedron() -> Body {
    let pos = [
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(-1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, 1.0),
        Vec3::new(1.0, 1.0, -1.0),
    ];
    let mut p = intersect_symmetric(&pos, &[1.0; 4]);
    p.steiner = Some(SteinerCoeffs {
        surface: 4.0 * 3.0f64.sqrt(),
        mean_curvature: 6.0 * 2.0f64.sqrt() * (1.0f64 / 3.0).acos(),
    });
    Body {
        name: "O".to_string(),
        shape: Shape::Polytope(p),
        volume: Some(4.0 / 3.0),
    }
}

/// Cuboctahedron `{max(|x|,|y|,|z|) <= 1, |x|+|y|+|z| <= 2}` with facets
/// ordered `(1,0,0), (0,1,0), (0,0,1)` at offset 1, then
/// `(1,1,1), (1,-1,1), (-1,1,1), (1,1,-1)` at offset 2, then negatives.
fn cuboctahedron() -> Body {
    let pos = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, 1.0),
        Vec3::new(-1.0, 1.0, 1.0),
        Vec3::new(1.0, 1.0, -1.0),
    ];
    let tau = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0];
    let mut p = intersect_symmetric(&pos, &tau);
    p.steiner = Some(SteinerCoeffs {
        surface: 12.0 + 4.0 * 3.0f64.sqrt(),
        mean_curvature: 12.0 * 2.0f64.sqrt() * (1.0f64 / 3.0).sqrt().acos(),
    });
    Body {
        name: "C".to_string(),
        shape: Shape::Polytope(p),
        volume: Some(20.0 / 3.0),
    }
}

fn cube() -> Body {
    let pos = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut p = intersect_symmetric(&pos, &[1.0; 3]);
    p.steiner = Some(SteinerCoeffs {
        surface: 24.0,
        mean_curvature: 6.0 * PI,
    });
    Body {
        name: "Q".to_string(),
        shape: Shape::Polytope(p),
        volume: Some(8.0),
    }
}

/// Regular tetrahedron with unit edge, centroid at the origin (vertices of
/// the `(1,1,1)` alternation pattern scaled by `1/(2√2)`).
fn tetrahedron() -> Body {
    let s = 1.0 / (2.0 * 2.0f64.sqrt());
    let normals = [
        -Vec3::new(1.0, 1.0, 1.0),
        -Vec3::new(1.0, -1.0, -1.0),
        -Vec3::new(-1.0, 1.0, -1.0),
        -Vec3::new(-1.0, -1.0, 1.0),
    ];
    let hs: Vec<HalfSpace> = normals.iter().map(|&n| HalfSpace::new(n, s)).collect();
    let p = intersect_halfspaces(&hs).expect("tetrahedron model is bounded and solid");
    Body {
        name: "T".to_string(),
        shape: Shape::Polytope(p),
        volume: Some(2.0f64.sqrt() / 12.0),
    }
}

/// Intersect `F_1..F_n, -F_1..-F_n` given the positive-halves data.
fn intersect_symmetric(normals: &[Vec3], offsets: &[f64]) -> Polytope {
    let mut hs: Vec<HalfSpace> = normals
        .iter()
        .zip(offsets)
        .map(|(&n, &t)| HalfSpace::new(n, t))
        .collect();
    let neg: Vec<HalfSpace> = hs.iter().map(|h| HalfSpace::new(-h.normal, h.offset)).collect();
    hs.extend(neg);
    intersect_halfspaces(&hs).expect("catalog body is bounded and solid")
}

// --- Difference bodies -------------------------------------------------------

/// Minkowski difference body `D(P) = {x - y : x, y in P} = P + (-P)`.
///
/// Candidate facet normals of a Minkowski sum are the summands' facet
/// normals plus cross products of edge-direction pairs; offsets come from
/// the support function `h_P(u) + h_P(-u)`. Redundant candidates are pruned
/// so the result's halfspace list is exactly its facet list.
pub fn difference_body(p: &Polytope) -> Body {
    let mut dirs: Vec<Vec3> = Vec::new();
    let mut push_dir = |d: Vec3| {
        if d.norm() <= 1e-12 {
            return;
        }
        let u = d.normalize();
        if !dirs
            .iter()
            .any(|v: &Vec3| (v - u).norm() <= 1e-9 || (v + u).norm() <= 1e-9)
        {
            dirs.push(u);
        }
    };
    for h in &p.halfspaces {
        push_dir(h.normal);
    }
    let edges: Vec<Vec3> = p
        .edge_set()
        .iter()
        .map(|&(a, b)| p.vertices[b] - p.vertices[a])
        .collect();
    for (i, e) in edges.iter().enumerate() {
        for f in edges.iter().skip(i + 1) {
            push_dir(e.cross(f));
        }
    }
    let mut hs = Vec::with_capacity(2 * dirs.len());
    for u in dirs {
        let t = p.support(&u) + p.support(&-u);
        hs.push(HalfSpace::new(u, t));
        hs.push(HalfSpace::new(-u, t));
    }
    let rough =
        intersect_halfspaces(&hs).expect("difference body of a valid polytope is bounded");
    let essential: Vec<HalfSpace> = rough
        .faces
        .iter()
        .map(|f| rough.halfspaces[f.halfspace])
        .collect();
    let poly =
        intersect_halfspaces(&essential).expect("pruned difference body stays bounded");
    let volume = polytope_volume(&poly).expect("difference body faces are planar");
    Body {
        name: "difference-body".to_string(),
        shape: Shape::Polytope(poly),
        volume: Some(volume),
    }
}

// --- Cores -------------------------------------------------------------------

/// Boundary scale map of a body's core: for `x` on the body boundary,
/// `scale(x) * x` lies on the core boundary.
///
/// The core of a symmetric body `K` is the set of points whose inner
/// product with every boundary point `y` stays at most `<y, y>`;
/// equivalently the intersection of the bisector halfspaces of `o` and
/// `2y` over all boundary `y`.
#[derive(Debug, Clone)]
pub struct CoreFunction {
    pub body_name: String,
    kind: CoreKind,
}

#[derive(Debug, Clone)]
enum CoreKind {
    /// Ball: the core is the ball itself.
    Identity,
    /// Cube `max(|x|,|y|,|z|) <= 1`: scale `2/(1+w)` with `w = ||x||`.
    Cube,
    /// Octahedron `|x|+|y|+|z| <= 1`: scale `2/(1+sqrt(3) w)`.
    CrossPolytope,
    /// Cuboctahedron: three-branch piecewise scale, see `scale`.
    Cuboctahedron,
    /// Generic symmetric body: bisector halfspaces over boundary samples.
    Sampled(Vec<HalfSpace>),
}

/// Number of boundary samples for the generic core construction.
const CORE_SAMPLES: usize = 10_000;

/// Build the core scale function of a symmetric body with origin interior.
pub fn core(body: &Body) -> CoreFunction {
    let kind = match (body.name.as_str(), &body.shape) {
        (_, Shape::Ball { .. }) => CoreKind::Identity,
        ("Q", _) => CoreKind::Cube,
        ("O", _) => CoreKind::CrossPolytope,
        ("C", _) => CoreKind::Cuboctahedron,
        (_, Shape::Polytope(_)) => CoreKind::Sampled(sampled_core_halfspaces(body)),
        (_, Shape::Counts { .. }) => CoreKind::Identity,
    };
    CoreFunction {
        body_name: body.name.clone(),
        kind,
    }
}

/// Bisector halfspaces `<x, y> <= <y, y>` over a Fibonacci-sphere boundary
/// sample of the body.
fn sampled_core_halfspaces(body: &Body) -> Vec<HalfSpace> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    let mut hs = Vec::with_capacity(CORE_SAMPLES);
    for i in 0..CORE_SAMPLES {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / CORE_SAMPLES as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let dir = Vec3::new(r * phi.cos(), r * phi.sin(), z);
        if let Some(y) = body.boundary_point(&dir) {
            hs.push(HalfSpace::new(y, y.dot(&y)));
        }
    }
    hs
}

impl CoreFunction {
    /// Scale `γ(x)` for a point `x` on the body boundary. `γ(x) x` lies on
    /// the core boundary; `γ` is even and valued in `(0, 1]`.
    pub fn scale(&self, x: &Vec3) -> f64 {
        let w = x.norm();
        match &self.kind {
            CoreKind::Identity => 1.0,
            CoreKind::Cube => 2.0 / (1.0 + w),
            CoreKind::CrossPolytope => 2.0 / (1.0 + 3.0f64.sqrt() * w),
            CoreKind::Cuboctahedron => {
                let v = x.x.abs().max(x.y.abs()).max(x.z.abs());
                if v >= 1.0 - 1e-9 {
                    // square facet (ties at facet borders take this branch)
                    2.0 / (w + 1.0)
                } else if (2.0 - 3.0f64.sqrt()) * w + 2.0 * v <= 2.0 {
                    4.0 / (2.0 + 3.0f64.sqrt() * w)
                } else {
                    2.0 / (w + v)
                }
            }
            CoreKind::Sampled(hs) => {
                let g = hs
                    .iter()
                    .map(|h| h.normal.dot(x) / h.offset)
                    .fold(0.0f64, f64::max);
                1.0 / g
            }
        }
    }
}

/// Exact membership test `z ∈ core(P)` for a polytope `P`: checks
/// `sup_{y ∈ ∂P} (<z, y> - <y, y>) <= tol` by maximizing the concave
/// objective over every facet (interior critical point, edge criticals,
/// and vertices).
pub fn core_contains(p: &Polytope, z: &Vec3, tol: f64) -> bool {
    core_excess(p, z) <= tol
}

/// `sup_{y ∈ ∂P} (<z, y> - <y, y>)`; nonpositive iff `z` is in the core.
pub fn core_excess(p: &Polytope, z: &Vec3) -> f64 {
    let g = |y: &Vec3| z.dot(y) - y.dot(y);
    let half = z / 2.0; // unconstrained maximizer of g
    let mut best = f64::NEG_INFINITY;
    for face in &p.faces {
        let h = &p.halfspaces[face.halfspace];
        let n = h.normal.normalize();
        let d = h.offset / h.normal.norm();
        // critical point of g restricted to the facet plane
        let proj = half - n * (n.dot(&half) - d);
        if face_polygon_contains(p, face, &proj) {
            best = best.max(g(&proj));
        }
        let m = face.cycle.len();
        for i in 0..m {
            let a = p.vertices[face.cycle[i]];
            let b = p.vertices[face.cycle[(i + 1) % m]];
            let e = b - a;
            let t = ((half - a).dot(&e) / e.dot(&e)).clamp(0.0, 1.0);
            best = best.max(g(&(a + e * t)));
        }
    }
    best
}

fn face_polygon_contains(p: &Polytope, face: &geom::Face, q: &Vec3) -> bool {
    let n = p.halfspaces[face.halfspace].normal;
    let m = face.cycle.len();
    (0..m).all(|i| {
        let a = p.vertices[face.cycle[i]];
        let b = p.vertices[face.cycle[(i + 1) % m]];
        (b - a).cross(&(q - a)).dot(&n) >= -1e-9
    })
}

// --- Lattices ----------------------------------------------------------------

/// Integer-span lattice given by three basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub basis: [Vec3; 3],
}

/// Voronoi cell of the origin in a lattice, with the packing density of an
/// optional body tiled by that lattice.
#[derive(Debug, Clone)]
pub struct LatticeCell {
    pub cell: Polytope,
    pub volume: f64,
    pub density: Option<f64>,
    pub body_name: Option<String>,
}

impl Lattice {
    pub fn new(a1: Vec3, a2: Vec3, a3: Vec3) -> Self {
        Self { basis: [a1, a2, a3] }
    }

    /// Densest-known lattice for the catalog octahedron.
    pub fn octahedron_optimal() -> Self {
        Self::new(
            Vec3::new(2.0 / 3.0, 1.0, 1.0 / 3.0),
            Vec3::new(1.0 / 3.0, 2.0 / 3.0, -1.0),
            Vec3::new(4.0 / 3.0, 1.0 / 3.0, -1.0 / 3.0),
        )
    }

    /// Densest-known lattice for the catalog cuboctahedron.
    pub fn cuboctahedron_optimal() -> Self {
        Self::new(
            Vec3::new(2.0, 1.0 / 3.0, 1.0 / 3.0),
            Vec3::new(2.0 / 3.0, 5.0 / 3.0, 5.0 / 3.0),
            Vec3::new(1.0 / 3.0, -1.0 / 3.0, 2.0),
        )
    }

    pub fn cubic() -> Self {
        Self::new(Vec3::x(), Vec3::y(), Vec3::z())
    }

    pub fn det(&self) -> f64 {
        Matrix3::from_columns(&self.basis).determinant()
    }

    /// Row-major 3x3 array serialization.
    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let r = |v: &Vec3| [v.x, v.y, v.z];
        [r(&self.basis[0]), r(&self.basis[1]), r(&self.basis[2])]
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        let v = |r: [f64; 3]| Vec3::new(r[0], r[1], r[2]);
        Self::new(v(rows[0]), v(rows[1]), v(rows[2]))
    }

    /// All nonzero lattice points with Euclidean norm at most `radius`.
    pub fn points_within(&self, radius: f64) -> Result<Vec<Vec3>, CatalogError> {
        let m = Matrix3::from_columns(&self.basis);
        if m.determinant().abs() <= 1e-12 {
            return Err(CatalogError::SingularBasis);
        }
        let inv = m.try_inverse().ok_or(CatalogError::SingularBasis)?;
        // coefficient i of a point p is <row_i(inv), p>, so |c_i| is at
        // most radius * ||row_i(inv)||
        let bound = |i: usize| (radius * inv.row(i).norm()).ceil() as i64;
        let (n1, n2, n3) = (bound(0), bound(1), bound(2));
        let mut pts = Vec::new();
        for c1 in -n1..=n1 {
            for c2 in -n2..=n2 {
                for c3 in -n3..=n3 {
                    if c1 == 0 && c2 == 0 && c3 == 0 {
                        continue;
                    }
                    let p = self.basis[0] * c1 as f64
                        + self.basis[1] * c2 as f64
                        + self.basis[2] * c3 as f64;
                    if p.norm() <= radius {
                        pts.push(p);
                    }
                }
            }
        }
        Ok(pts)
    }
}

/// Voronoi cell of the origin: intersection of the bisector halfspaces
/// `<x, p> <= ||p||^2 / 2` over all lattice points within three times the
/// longest basis vector.
///
/// Bisectors of points with `||p||/2` beyond the circumradius of a
/// preliminary cell cannot support a facet and are dropped before the full
/// intersection.
pub fn lattice_cell(l: &Lattice, body: Option<&Body>) -> Result<LatticeCell, CatalogError> {
    let longest = l.basis.iter().map(Vec3::norm).fold(0.0, f64::max);
    let mut pts = l.points_within(3.0 * longest)?;
    pts.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let bisector = |p: &Vec3| HalfSpace::new(*p, p.dot(p) / 2.0);

    let prelim: Vec<HalfSpace> = pts.iter().take(40).map(bisector).collect();
    let rough = intersect_halfspaces(&prelim).map_err(|_| CatalogError::SingularBasis)?;
    let circum = rough
        .vertices
        .iter()
        .map(Vec3::norm)
        .fold(0.0, f64::max);
    let kept: Vec<HalfSpace> = pts
        .iter()
        .filter(|p| p.norm() / 2.0 <= circum + 1e-9)
        .map(bisector)
        .collect();
    let cell = intersect_halfspaces(&kept).map_err(|_| CatalogError::SingularBasis)?;
    let volume = polytope_volume(&cell).expect("lattice cell faces are planar");
    let density = body.and_then(|b| b.volume.map(|v| v / l.det().abs()));
    Ok(LatticeCell {
        cell,
        volume,
        density,
        body_name: body.map(|b| b.name.clone()),
    })
}

// --- JSON index --------------------------------------------------------------

#[derive(Serialize)]
struct IndexEntry {
    name: &'static str,
    kind: &'static str,
    volume: Option<f64>,
    v_e_f: Option<(usize, usize, usize)>,
}

/// JSON index of the catalog: name, model kind, volume, and census of
/// every entry.
pub fn catalog_index_json() -> String {
    let entries: Vec<IndexEntry> = CATALOG_NAMES
        .iter()
        .map(|&name| {
            let b = catalog(name).expect("catalog names are valid");
            IndexEntry {
                name,
                kind: match b.shape {
                    Shape::Polytope(_) => "polytope",
                    Shape::Ball { .. } => "ball",
                    Shape::Counts { .. } => "census",
                },
                volume: b.volume,
                v_e_f: b.v_e_f(),
            }
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("index serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::orthogonal_unit;

    #[test]
    fn catalog_volumes_match_polytope_volume() {
        for name in ["T", "O", "C", "Q"] {
            let b = catalog(name).unwrap();
            let p = b.polytope().unwrap();
            let v = polytope_volume(p).unwrap();
            assert!(
                (v - b.volume.unwrap()).abs() <= 1e-9,
                "{name}: {v} vs {:?}",
                b.volume
            );
        }
    }

    #[test]
    fn parallelohedra_census_table() {
        let check = |name: &str, v: usize, e: usize, f: usize| {
            assert_eq!(catalog(name).unwrap().v_e_f(), Some((v, e, f)), "{name}");
        };
        check("hexagonal-prism", 12, 18, 8);
        check("rhombic-dodecahedron", 14, 24, 12);
        check("elongated-octahedron", 18, 28, 12);
        check("truncated-octahedron", 24, 36, 14);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert_eq!(
            catalog("dodecahedron").unwrap_err(),
            CatalogError::UnknownBody("dodecahedron".to_string())
        );
    }

    #[test]
    fn octahedron_facet_order_is_canonical() {
        let b = catalog("O").unwrap();
        let p = b.polytope().unwrap();
        assert_eq!(p.halfspaces.len(), 8);
        assert_eq!(p.halfspaces[0].normal, Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(p.halfspaces[1].normal, Vec3::new(-1.0, 1.0, 1.0));
        assert_eq!(p.halfspaces[2].normal, Vec3::new(1.0, -1.0, 1.0));
        assert_eq!(p.halfspaces[3].normal, Vec3::new(1.0, 1.0, -1.0));
        assert_eq!(p.face_pairs, vec![(0, 4), (1, 5), (2, 6), (3, 7)]);
        assert_eq!(p.vertices.len(), 6);
    }

    #[test]
    fn cuboctahedron_facet_order_is_canonical() {
        let b = catalog("C").unwrap();
        let p = b.polytope().unwrap();
        assert_eq!(p.halfspaces.len(), 14);
        assert_eq!(p.halfspaces[3].normal, Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(p.halfspaces[4].normal, Vec3::new(1.0, -1.0, 1.0));
        assert_eq!(p.halfspaces[5].normal, Vec3::new(-1.0, 1.0, 1.0));
        assert_eq!(p.face_pairs.len(), 7);
        assert_eq!(p.vertices.len(), 12);
        assert_eq!(p.faces.len(), 14);
    }

    #[test]
    fn tetrahedron_has_unit_edges() {
        let b = catalog("T").unwrap();
        let p = b.polytope().unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert!(!p.symmetric);
        for &(i, j) in &p.edge_set() {
            assert!(((p.vertices[i] - p.vertices[j]).norm() - 1.0).abs() < 1e-9);
        }
        assert!((polytope_volume(p).unwrap() - 2.0f64.sqrt() / 12.0).abs() < 1e-12);
    }

    #[test]
    fn difference_body_doubles_symmetric_input() {
        let o = catalog("O").unwrap();
        let d = difference_body(o.polytope().unwrap());
        // D(K) = 2K for symmetric K: volume scales by 8
        assert!((d.volume.unwrap() - 8.0 * 4.0 / 3.0).abs() < 1e-9);
        let q = catalog("Q").unwrap();
        let dq = difference_body(q.polytope().unwrap());
        assert!((dq.volume.unwrap() - 64.0).abs() < 1e-9);
        for v in &dq.polytope().unwrap().vertices {
            assert!((v.x.abs() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tetrahedron_difference_body_is_a_cuboctahedron() {
        let t = catalog("T").unwrap();
        let d = difference_body(t.polytope().unwrap());
        let p = d.polytope().unwrap();
        assert_eq!(p.vertices.len(), 12);
        assert_eq!(p.faces.len(), 14);
        assert!(p.symmetric);
        let ratio = d.volume.unwrap() / t.volume.unwrap();
        assert!((ratio - 20.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn core_scales_at_reference_points() {
        let q = catalog("Q").unwrap();
        let gq = core(&q).scale(&Vec3::new(1.0, 1.0, 1.0));
        assert!((gq - 2.0 / (1.0 + 3.0f64.sqrt())).abs() < 1e-12);

        let o = catalog("O").unwrap();
        let go = core(&o).scale(&Vec3::new(1.0, 0.0, 0.0));
        assert!((go - 2.0 / (1.0 + 3.0f64.sqrt())).abs() < 1e-12);

        let b = catalog("B").unwrap();
        assert_eq!(core(&b).scale(&Vec3::new(0.0, 1.0, 0.0)), 1.0);
    }

    #[test]
    fn cuboctahedron_core_branches_agree_on_their_boundary() {
        let c = catalog("C").unwrap();
        let f = core(&c);
        // square/triangle edge: both formulas give 2/(w+1)
        let x = Vec3::new(1.0, 0.4, 0.6);
        let s = f.scale(&x);
        assert!((s - 2.0 / (x.norm() + 1.0)).abs() < 1e-12);
        // scale is even
        assert_eq!(f.scale(&x), f.scale(&-x));
    }

    #[test]
    fn sampled_core_tracks_closed_form() {
        let o = catalog("O").unwrap();
        let f = core(&o);
        let mut generic = o.clone();
        generic.name = "anonymous".to_string();
        let g = core(&generic);
        for dir in [
            Vec3::new(1.0, 0.2, -0.1),
            Vec3::new(-0.3, 1.0, 0.4),
            Vec3::new(0.5, 0.5, 0.5),
        ] {
            let x = o.boundary_point(&dir).unwrap();
            assert!(
                (f.scale(&x) - g.scale(&x)).abs() < 2e-3,
                "closed form {} vs sampled {}",
                f.scale(&x),
                g.scale(&x)
            );
        }
    }

    #[test]
    fn core_membership_agrees_with_scale() {
        let o = catalog("O").unwrap();
        let p = o.polytope().unwrap();
        let f = core(&o);
        let x = o.boundary_point(&Vec3::new(0.7, -0.4, 0.2)).unwrap();
        let inside = x * (f.scale(&x) * (1.0 - 1e-9));
        let outside = x * (f.scale(&x) * (1.0 + 1e-6));
        assert!(core_contains(p, &inside, 1e-9));
        assert!(!core_contains(p, &outside, 1e-9));
    }

    #[test]
    fn lattice_determinants() {
        assert!((Lattice::octahedron_optimal().det().abs() - 38.0 / 27.0).abs() < 1e-12);
        assert!((Lattice::cuboctahedron_optimal().det().abs() - 196.0 / 27.0).abs() < 1e-12);
        assert!((Lattice::cubic().det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_lattice_cell_is_the_unit_cube() {
        let lc = lattice_cell(&Lattice::cubic(), None).unwrap();
        assert_eq!(lc.cell.faces.len(), 6);
        assert!((lc.volume - 1.0).abs() < 1e-12);
        assert!(lc.density.is_none());
        for v in &lc.cell.vertices {
            assert!((v.x.abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_basis_is_rejected() {
        let l = Lattice::new(Vec3::x(), Vec3::y(), Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(
            lattice_cell(&l, None).unwrap_err(),
            CatalogError::SingularBasis
        );
    }

    #[test]
    fn lattice_rows_round_trip() {
        let l = Lattice::octahedron_optimal();
        assert_eq!(Lattice::from_rows(l.to_rows()), l);
    }

    #[test]
    fn index_lists_every_catalog_entry() {
        let idx = catalog_index_json();
        for name in CATALOG_NAMES {
            assert!(idx.contains(name));
        }
    }

    #[test]
    fn orthogonal_unit_is_orthogonal() {
        for v in [Vec3::x(), Vec3::new(0.1, -3.0, 0.4)] {
            let u = orthogonal_unit(&v);
            assert!(u.dot(&v).abs() < 1e-12);
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }
}
