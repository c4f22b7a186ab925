//! 3D convex geometry primitives: halfspace intersection with full face
//! lattice recovery, signed-cone volumes, gauges (Minkowski functionals),
//! and parallel-body volumes via the Steiner polynomial.
//!
//! Every routine works in plain `f64` with fixed tolerances. The library
//! only ever meets polytopes whose defining data are rational numbers at
//! unit scale (catalog bodies, bisector cells of rational configurations),
//! so a vertex-merge and coplanarity tolerance of `1e-9` separates true
//! incidences from numerical noise by many orders of magnitude.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cartesian point or direction. All library coordinates are finite.
pub type Vec3 = Vector3<f64>;

/// Coplanarity and vertex-merge tolerance, in model units.
pub const COPLANAR_TOL: f64 = 1e-9;
/// Feasibility slack allowed when testing a point against a halfspace.
pub const FEAS_TOL: f64 = 1e-9;
/// Triples of planes with |det| at or below this are skipped as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-12;

/// Closed halfspace `{ p : normal . p <= offset }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec3, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Signed slack `offset - normal . p`; nonnegative inside.
    pub fn slack(&self, p: &Vec3) -> f64 {
        self.offset - self.normal.dot(p)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.slack(p) >= -tol
    }
}

/// Surface-area and mean-curvature coefficients of the Steiner polynomial
/// `vol(P + rB) = vol(P) + S r + M r^2 + (4 pi / 3) r^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinerCoeffs {
    pub surface: f64,
    pub mean_curvature: f64,
}

/// One facet: the index of its supporting halfspace and its vertex cycle,
/// ordered counterclockwise as seen from outside (along the outer normal).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub halfspace: usize,
    pub cycle: Vec<usize>,
}

/// Bounded convex polytope in joint H/V representation.
///
/// `halfspaces` keeps every input constraint (including redundant ones, so
/// callers can map faces back to their generating constraint); `faces`
/// exists only for constraints that actually support a facet. When
/// `symmetric` is set, the vertex set and the halfspace set are closed
/// under negation and `face_pairs` lists the opposite-facet index pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub halfspaces: Vec<HalfSpace>,
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub symmetric: bool,
    pub face_pairs: Vec<(usize, usize)>,
    /// Catalog metadata; `None` unless supplied by a body constructor.
    pub steiner: Option<SteinerCoeffs>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("halfspace intersection is unbounded")]
    UnboundedRegion,
    #[error("halfspace intersection has empty interior")]
    EmptyInterior,
    #[error("face {0} is not planar within tolerance")]
    DegenerateFace(usize),
    #[error("polytope carries no Steiner coefficients")]
    MissingSteinerData,
    #[error("invalid polytope data: {0}")]
    InvariantViolation(String),
}

/// Intersect closed halfspaces into a bounded polytope containing the origin.
///
/// Vertices are found by solving all nonsingular plane triples and keeping
/// feasible solutions; coincident solutions merge within [`COPLANAR_TOL`].
/// Fails with [`GeomError::UnboundedRegion`] if some direction recedes to
/// infinity and [`GeomError::EmptyInterior`] if the data pin the origin to
/// the boundary or outside.
pub fn intersect_halfspaces(hs: &[HalfSpace]) -> Result<Polytope, GeomError> {
    if hs.len() < 4 {
        return Err(GeomError::UnboundedRegion);
    }
    for h in hs {
        if h.normal.norm() <= SINGULAR_DET_TOL {
            return Err(GeomError::InvariantViolation("zero normal".into()));
        }
        if h.offset <= 0.0 {
            // the origin must be strictly interior to every constraint
            return Err(GeomError::EmptyInterior);
        }
    }
    if let Some(_dir) = recession_direction(hs) {
        return Err(GeomError::UnboundedRegion);
    }

    // Enumerate plane triples; collect feasible intersection points.
    let n = hs.len();
    let mut raw: Vec<(Vec3, [usize; 3], f64)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let m = Matrix3::from_rows(&[
                    hs[i].normal.transpose(),
                    hs[j].normal.transpose(),
                    hs[k].normal.transpose(),
                ]);
                let det = m.determinant();
                if det.abs() <= SINGULAR_DET_TOL {
                    continue;
                }
                let rhs = Vec3::new(hs[i].offset, hs[j].offset, hs[k].offset);
                let p = solve3(&m, det, &rhs);
                if hs.iter().all(|h| h.contains(&p, FEAS_TOL)) {
                    raw.push((p, [i, j, k], det.abs()));
                }
            }
        }
    }
    if raw.len() < 4 {
        return Err(GeomError::EmptyInterior);
    }

    // Merge coincident solutions; remember every plane incident to a cluster
    // and re-solve each cluster with its best-conditioned triple.
    let mut verts: Vec<Vec3> = Vec::new();
    let mut incident: Vec<Vec<usize>> = Vec::new();
    let mut best: Vec<(f64, [usize; 3])> = Vec::new();
    'raw: for (p, triple, score) in raw {
        for (vi, v) in verts.iter().enumerate() {
            if (p - v).norm() <= 1e3 * COPLANAR_TOL {
                for t in triple {
                    if !incident[vi].contains(&t) {
                        incident[vi].push(t);
                    }
                }
                if score > best[vi].0 {
                    best[vi] = (score, triple);
                    verts[vi] = p;
                }
                continue 'raw;
            }
        }
        verts.push(p);
        incident.push(triple.to_vec());
        best.push((score, triple));
    }
    // Numeric sweep so planes through a merged cluster are never missed.
    for (vi, v) in verts.iter().enumerate() {
        for (k, h) in hs.iter().enumerate() {
            if h.slack(v).abs() <= COPLANAR_TOL * (1.0 + h.normal.norm())
                && !incident[vi].contains(&k)
            {
                incident[vi].push(k);
            }
        }
        incident[vi].sort_unstable();
    }

    // Assemble facet cycles.
    let mut faces = Vec::new();
    for k in 0..n {
        let members: Vec<usize> = (0..verts.len())
            .filter(|&vi| incident[vi].contains(&k))
            .collect();
        if members.len() < 3 {
            continue;
        }
        let cycle = order_cycle_ccw(&verts, &members, &hs[k].normal);
        faces.push(Face { halfspace: k, cycle });
    }
    if faces.len() < 4 {
        return Err(GeomError::EmptyInterior);
    }

    let symmetric = detect_symmetry(hs, &verts);
    let face_pairs = if symmetric { detect_face_pairs(hs) } else { Vec::new() };

    let poly = Polytope {
        halfspaces: hs.to_vec(),
        vertices: verts,
        faces,
        symmetric,
        face_pairs,
        steiner: None,
    };
    poly.validate()?;
    Ok(poly)
}

/// A unit direction receding to infinity inside `{p : A p <= b}`, if any.
///
/// The recession cone `{d : A d <= 0}` of a 3D system, when nontrivial,
/// contains either an extreme ray spanned by a cross product of two normals
/// or (when all normals are parallel) any direction orthogonal to them.
fn recession_direction(hs: &[HalfSpace]) -> Option<Vec3> {
    let fits = |d: &Vec3| hs.iter().all(|h| h.normal.dot(d) <= 1e-12);
    for (i, hi) in hs.iter().enumerate() {
        for hj in hs.iter().skip(i + 1) {
            let c = hi.normal.cross(&hj.normal);
            if c.norm() > 1e-9 {
                let d = c.normalize();
                if fits(&d) {
                    return Some(d);
                }
                if fits(&-d) {
                    return Some(-d);
                }
            }
        }
        let u = orthogonal_unit(&hi.normal);
        for d in [u, -u, hi.normal.normalize().cross(&u)] {
            if fits(&d) {
                return Some(d);
            }
            if fits(&-d) {
                return Some(-d);
            }
        }
    }
    None
}

/// Any unit vector orthogonal to `v`.
pub fn orthogonal_unit(v: &Vec3) -> Vec3 {
    let a = if v.x.abs() < 0.9 * v.norm() {
        Vec3::x()
    } else {
        Vec3::y()
    };
    v.cross(&a).normalize()
}

/// Cramer solve of a 3x3 system with precomputed determinant.
fn solve3(m: &Matrix3<f64>, det: f64, rhs: &Vec3) -> Vec3 {
    let mut cols = [*m; 3];
    for (c, out) in cols.iter_mut().enumerate() {
        out.set_column(c, rhs);
    }
    Vec3::new(
        cols[0].determinant() / det,
        cols[1].determinant() / det,
        cols[2].determinant() / det,
    )
}

/// Order `members` counterclockwise around the face normal, viewed from
/// outside (from the tip of `normal` looking back at the face).
fn order_cycle_ccw(verts: &[Vec3], members: &[usize], normal: &Vec3) -> Vec<usize> {
    let n = normal.normalize();
    let centroid: Vec3 = members.iter().map(|&vi| verts[vi]).sum::<Vec3>() / members.len() as f64;
    let u = {
        let r = verts[members[0]] - centroid;
        let r = r - n * r.dot(&n);
        if r.norm() > 1e-12 {
            r.normalize()
        } else {
            orthogonal_unit(&n)
        }
    };
    let v = n.cross(&u);
    let mut order: Vec<usize> = members.to_vec();
    order.sort_by(|&a, &b| {
        let pa = verts[a] - centroid;
        let pb = verts[b] - centroid;
        let ta = pa.dot(&v).atan2(pa.dot(&u));
        let tb = pb.dot(&v).atan2(pb.dot(&u));
        ta.partial_cmp(&tb).unwrap()
    });
    order
}

fn detect_symmetry(hs: &[HalfSpace], verts: &[Vec3]) -> bool {
    let has_neg_h = |h: &HalfSpace| {
        hs.iter().any(|g| {
            (g.normal + h.normal).norm() <= 1e-9 * (1.0 + h.normal.norm())
                && (g.offset - h.offset).abs() <= 1e-9 * (1.0 + h.offset.abs())
        })
    };
    let has_neg_v =
        |v: &Vec3| verts.iter().any(|w| (w + v).norm() <= 1e3 * COPLANAR_TOL * (1.0 + v.norm()));
    hs.iter().all(has_neg_h) && verts.iter().all(has_neg_v)
}

fn detect_face_pairs(hs: &[HalfSpace]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (k, h) in hs.iter().enumerate() {
        for (l, g) in hs.iter().enumerate().skip(k + 1) {
            if (g.normal + h.normal).norm() <= 1e-9 * (1.0 + h.normal.norm())
                && (g.offset - h.offset).abs() <= 1e-9 * (1.0 + h.offset.abs())
            {
                pairs.push((k, l));
                break;
            }
        }
    }
    pairs
}

impl Polytope {
    /// Checks the representation invariants: feasibility of every vertex,
    /// planarity and convexity of every face cycle, the Euler relation,
    /// and closure under negation when the symmetric flag is set.
    pub fn validate(&self) -> Result<(), GeomError> {
        let fail = |msg: String| Err(GeomError::InvariantViolation(msg));
        if self.vertices.len() < 4 || self.faces.len() < 4 {
            return fail("fewer than 4 vertices or faces".into());
        }
        for v in &self.vertices {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return fail("non-finite vertex".into());
            }
            for (k, h) in self.halfspaces.iter().enumerate() {
                if !h.contains(v, FEAS_TOL * (1.0 + h.normal.norm() + h.offset.abs())) {
                    return fail(format!("vertex violates halfspace {k}"));
                }
            }
        }
        for face in &self.faces {
            let h = self
                .halfspaces
                .get(face.halfspace)
                .ok_or_else(|| GeomError::InvariantViolation("face halfspace index".into()))?;
            if face.cycle.len() < 3 {
                return fail("face cycle shorter than 3".into());
            }
            let scale = 1.0 + h.normal.norm();
            for &vi in &face.cycle {
                let v = self
                    .vertices
                    .get(vi)
                    .ok_or_else(|| GeomError::InvariantViolation("face vertex index".into()))?;
                if h.slack(v).abs() > 1e2 * COPLANAR_TOL * scale {
                    return Err(GeomError::DegenerateFace(face.halfspace));
                }
            }
            // Convex and consistently oriented: every corner turns left
            // around the outer normal.
            let m = face.cycle.len();
            for i in 0..m {
                let a = self.vertices[face.cycle[i]];
                let b = self.vertices[face.cycle[(i + 1) % m]];
                let c = self.vertices[face.cycle[(i + 2) % m]];
                let turn = (b - a).cross(&(c - b)).dot(&h.normal);
                if turn < -1e2 * COPLANAR_TOL * scale {
                    return fail(format!("face {} not convex CCW", face.halfspace));
                }
            }
        }
        let e = self.edge_set().len();
        let (v, f) = (self.vertices.len(), self.faces.len());
        if v + f != e + 2 {
            return fail(format!("Euler violation: v={v} e={e} f={f}"));
        }
        if self.symmetric {
            let vs = &self.vertices;
            for v in vs {
                if !vs.iter().any(|w| (w + v).norm() <= 2e-6 * (1.0 + v.norm())) {
                    return fail("symmetric flag but vertices not closed under negation".into());
                }
            }
        }
        Ok(())
    }

    /// Unordered vertex-index pairs that appear as consecutive face-cycle
    /// entries. In a valid polytope each edge occurs in exactly two faces.
    pub fn edge_set(&self) -> std::collections::BTreeSet<(usize, usize)> {
        let mut edges = std::collections::BTreeSet::new();
        for face in &self.faces {
            let m = face.cycle.len();
            for i in 0..m {
                let a = face.cycle[i];
                let b = face.cycle[(i + 1) % m];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges
    }

    /// Support function `max_v <u, v>` over the vertex set.
    pub fn support(&self, u: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| u.dot(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(p, tol))
    }
}

/// Volume by fanning every face from its first cycle vertex into triangles
/// and summing signed cone volumes over the origin.
///
/// Faces must be planar within [`COPLANAR_TOL`]; the CCW orientation makes
/// every term positive for polytopes containing the origin.
pub fn polytope_volume(p: &Polytope) -> Result<f64, GeomError> {
    let mut vol = 0.0;
    for face in &p.faces {
        let h = &p.halfspaces[face.halfspace];
        let scale = 1.0 + h.normal.norm();
        for &vi in &face.cycle {
            if h.slack(&p.vertices[vi]).abs() > 1e2 * COPLANAR_TOL * scale {
                return Err(GeomError::DegenerateFace(face.halfspace));
            }
        }
        let a = p.vertices[face.cycle[0]];
        for w in face.cycle[1..].windows(2) {
            let b = p.vertices[w[0]];
            let c = p.vertices[w[1]];
            vol += a.dot(&b.cross(&c)) / 6.0;
        }
    }
    Ok(vol)
}

/// Minkowski gauge of `x` with respect to a symmetric polytope with the
/// origin interior: the smallest `t >= 0` with `x` in `t * P`.
pub fn gauge(p: &Polytope, x: &Vec3) -> f64 {
    p.halfspaces
        .iter()
        .map(|h| h.normal.dot(x) / h.offset)
        .fold(0.0, f64::max)
}

/// Volume of the parallel body `P + rB` via the Steiner polynomial with
/// catalog coefficients.
pub fn steiner_volume(p: &Polytope, r: f64) -> Result<f64, GeomError> {
    let coeffs = p.steiner.ok_or(GeomError::MissingSteinerData)?;
    let vol = polytope_volume(p)?;
    Ok(vol
        + coeffs.surface * r
        + coeffs.mean_curvature * r * r
        + (4.0 * std::f64::consts::PI / 3.0) * r * r * r)
}

// --- JSON interchange -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    halfspaces: Vec<[f64; 4]>,
    vertices: Vec<[f64; 3]>,
    faces: Vec<Face>,
    face_pairs: Vec<(usize, usize)>,
}

impl Polytope {
    pub fn to_json(&self) -> String {
        let repr = PolytopeRepr {
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| [h.normal.x, h.normal.y, h.normal.z, h.offset])
                .collect(),
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            faces: self.faces.clone(),
            face_pairs: self.face_pairs.clone(),
        };
        serde_json::to_string_pretty(&repr).expect("polytope serialization cannot fail")
    }

    /// Parses and validates the JSON interchange form. The symmetric flag
    /// is recomputed from the data rather than trusted from the input.
    pub fn from_json(s: &str) -> Result<Self, GeomError> {
        let repr: PolytopeRepr = serde_json::from_str(s)
            .map_err(|e| GeomError::InvariantViolation(format!("json: {e}")))?;
        for row in &repr.halfspaces {
            if !row.iter().all(|x| x.is_finite()) {
                return Err(GeomError::InvariantViolation("non-finite halfspace".into()));
            }
        }
        for row in &repr.vertices {
            if !row.iter().all(|x| x.is_finite()) {
                return Err(GeomError::InvariantViolation("non-finite vertex".into()));
            }
        }
        let halfspaces: Vec<HalfSpace> = repr
            .halfspaces
            .iter()
            .map(|&[a, b, c, t]| HalfSpace::new(Vec3::new(a, b, c), t))
            .collect();
        let vertices: Vec<Vec3> = repr
            .vertices
            .iter()
            .map(|&[x, y, z]| Vec3::new(x, y, z))
            .collect();
        let symmetric = detect_symmetry(&halfspaces, &vertices);
        let poly = Polytope {
            halfspaces,
            vertices,
            faces: repr.faces,
            symmetric,
            face_pairs: repr.face_pairs,
            steiner: None,
        };
        poly.validate()?;
        Ok(poly)
    }
}
