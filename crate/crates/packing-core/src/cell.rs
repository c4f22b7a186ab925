//! Local cells of translative packings: the region of space closer to the
//! origin translate than to any other translate of a point configuration.
//!
//! For a configuration `X = {o, x_1, …, x_m}` the cell is the intersection
//! of the bisector halfspaces `<x_i, p> <= d_i` with `d_i = ||x_i||^2 / 2`.
//! Faces keep the index of the generating point; every cell vertex records
//! the plane triple that solves for it, which is exactly the combinatorial
//! data the color-graph modules consume.
//!
//! The classifier grades configurations: *reduced* means every point's
//! bisector supports a face; *general* additionally requires simple
//! vertices (three faces each) and that every touching direction meets a
//! unique facet of the body, not an edge or corner.

use crate::catalog::{self, Body, CatalogError, Shape};
use crate::geom::{self, GeomError, HalfSpace, Polytope, Vec3};
use nalgebra::Matrix3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack below the touching gauge value 2 tolerated by the packing test.
pub const PACKING_TOL: f64 = 1e-9;
/// Margin for the facet relative-interior tests of the general classifier.
pub const FACET_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CellError {
    #[error("cell is unbounded: all points lie in a closed halfspace through the origin")]
    UnboundedCell,
    #[error("cell vertex {0} has no well-conditioned generating plane triple")]
    DegenerateVertex(usize),
    #[error("perturbation failed: {0}")]
    PerturbationFailed(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// A packing configuration: the body plus translate positions, with the
/// origin first. Structural checks happen at construction; the packing
/// condition itself (pairwise gauge at least `2 - 1e-9`) is evaluated by
/// [`check_packing`] so that violating configurations can be diagnosed.
#[derive(Debug, Clone)]
pub struct PointConfig {
    pub body: Body,
    pub points: Vec<Vec3>,
}

impl PointConfig {
    pub fn new(body: Body, points: Vec<Vec3>) -> Result<Self, CellError> {
        if matches!(body.shape, Shape::Counts { .. }) {
            return Err(CellError::InvalidConfig(format!(
                "body {} has no coordinate model",
                body.name
            )));
        }
        let Some(first) = points.first() else {
            return Err(CellError::InvalidConfig("no points".into()));
        };
        if first.norm() > 1e-12 {
            return Err(CellError::InvalidConfig("points[0] must be the origin".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(CellError::InvalidConfig(format!("point {i} is not finite")));
            }
            if i > 0 && p.norm() <= 1e-12 {
                return Err(CellError::InvalidConfig(format!(
                    "origin appears again at index {i}"
                )));
            }
        }
        Ok(Self { body, points })
    }

    /// Number of non-origin translates.
    pub fn translate_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn to_json(&self) -> String {
        let repr = ConfigRepr {
            body: self.body.name.clone(),
            points: self.points.iter().map(|p| [p.x, p.y, p.z]).collect(),
        };
        serde_json::to_string_pretty(&repr).expect("config serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, CellError> {
        let repr: ConfigRepr = serde_json::from_str(s)
            .map_err(|e| CellError::InvalidConfig(format!("json: {e}")))?;
        let body = catalog::catalog(&repr.body)?;
        let points = repr
            .points
            .iter()
            .map(|&[x, y, z]| Vec3::new(x, y, z))
            .collect();
        Self::new(body, points)
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    body: String,
    points: Vec<[f64; 3]>,
}

/// A packing-condition violation: translates `i` and `j` are too close.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub gauge: f64,
}

/// All translate pairs whose difference has body gauge below `2 - 1e-9`.
/// Empty iff the configuration is a packing.
pub fn check_packing(cfg: &PointConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 1..cfg.points.len() {
        for j in 0..i {
            let d = cfg.points[i] - cfg.points[j];
            let g = cfg.body.gauge(&d).expect("config bodies have a coordinate model");
            if g < 2.0 - PACKING_TOL {
                out.push(Violation { i, j, gauge: g });
            }
        }
    }
    out
}

/// One cell facet: the index of the generating point (into `config.points`)
/// and its vertex cycle, counterclockwise seen from the generator side.
#[derive(Debug, Clone, Serialize)]
pub struct CellFace {
    pub generator: usize,
    pub cycle: Vec<usize>,
}

/// One cell vertex with the sorted triple of generating point indices whose
/// bisector planes intersect there.
#[derive(Debug, Clone, Serialize)]
pub struct CellVertex {
    pub point: [f64; 3],
    pub triple: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct LocalCell {
    pub config: PointConfig,
    pub polytope: Polytope,
    pub faces: Vec<CellFace>,
    pub vertices: Vec<CellVertex>,
    pub volume: f64,
}

impl LocalCell {
    pub fn vertex_point(&self, v: usize) -> Vec3 {
        let [x, y, z] = self.vertices[v].point;
        Vec3::new(x, y, z)
    }

    /// Generators that support at least one face.
    pub fn contributing(&self) -> Vec<usize> {
        self.faces.iter().map(|f| f.generator).collect()
    }

    /// Export with face cycles and generating triples for graph extraction.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct CellRepr<'a> {
            body: &'a str,
            points: Vec<[f64; 3]>,
            faces: &'a [CellFace],
            vertices: &'a [CellVertex],
            volume: f64,
        }
        let repr = CellRepr {
            body: &self.config.body.name,
            points: self.config.points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            faces: &self.faces,
            vertices: &self.vertices,
            volume: self.volume,
        };
        serde_json::to_string_pretty(&repr).expect("cell serialization cannot fail")
    }
}

/// Intersect the bisector halfspaces of a configuration into its local cell.
pub fn build_cell(cfg: &PointConfig) -> Result<LocalCell, CellError> {
    let hs: Vec<HalfSpace> = cfg.points[1..]
        .iter()
        .map(|x| HalfSpace::new(*x, x.dot(x) / 2.0))
        .collect();
    let polytope = geom::intersect_halfspaces(&hs).map_err(|e| match e {
        GeomError::UnboundedRegion => CellError::UnboundedCell,
        other => CellError::Geometry(other),
    })?;

    let faces: Vec<CellFace> = polytope
        .faces
        .iter()
        .map(|f| CellFace {
            generator: f.halfspace + 1,
            cycle: f.cycle.clone(),
        })
        .collect();

    let mut vertices = Vec::with_capacity(polytope.vertices.len());
    for (vi, v) in polytope.vertices.iter().enumerate() {
        let incident: Vec<usize> = faces
            .iter()
            .filter(|f| f.cycle.contains(&vi))
            .map(|f| f.generator)
            .collect();
        let triple = best_triple(cfg, &incident)
            .ok_or(CellError::DegenerateVertex(vi))?;
        vertices.push(CellVertex {
            point: [v.x, v.y, v.z],
            triple,
        });
    }

    let volume = cone_volume(cfg, &faces, &polytope);
    Ok(LocalCell {
        config: cfg.clone(),
        polytope,
        faces,
        vertices,
        volume,
    })
}

/// The best-conditioned generating triple among the incident planes: the
/// one maximizing the absolute determinant of the stacked point rows.
/// `None` when every incident triple is singular beyond rescue.
fn best_triple(cfg: &PointConfig, incident: &[usize]) -> Option<[usize; 3]> {
    let mut best: Option<([usize; 3], f64)> = None;
    for a in 0..incident.len() {
        for b in (a + 1)..incident.len() {
            for c in (b + 1)..incident.len() {
                let (i, j, k) = (incident[a], incident[b], incident[c]);
                let det = Matrix3::from_rows(&[
                    cfg.points[i].transpose(),
                    cfg.points[j].transpose(),
                    cfg.points[k].transpose(),
                ])
                .determinant()
                .abs();
                if best.map_or(true, |(_, d)| det > d) {
                    let mut t = [i, j, k];
                    t.sort_unstable();
                    best = Some((t, det));
                }
            }
        }
    }
    match best {
        Some((t, d)) if d > 1e-12 => Some(t),
        _ => None,
    }
}

/// Cell volume by the cone formula: each face contributes a cone of height
/// `||x_i|| / 2` over its area; face areas come from fanning the cycle at
/// its first vertex into `n(i) - 2` triangles.
pub fn cone_volume(cfg: &PointConfig, faces: &[CellFace], poly: &Polytope) -> f64 {
    let mut vol = 0.0;
    for face in faces {
        let h = cfg.points[face.generator].norm() / 2.0;
        let apex = poly.vertices[face.cycle[0]];
        let mut area = 0.0;
        for w in face.cycle[1..].windows(2) {
            let b = poly.vertices[w[0]] - apex;
            let c = poly.vertices[w[1]] - apex;
            let raw = b.dot(&b) * c.dot(&c) - b.dot(&c) * b.dot(&c);
            area += raw.max(0.0).sqrt() / 2.0;
        }
        vol += h * area / 3.0;
    }
    vol
}

/// Result of grading a configuration against the local-packing definitions.
#[derive(Debug, Clone)]
pub struct Classification {
    pub reduced: bool,
    pub general: bool,
    /// Translates whose bisector supports no face.
    pub noncontributing: Vec<usize>,
    /// Cell vertex indices where more than three faces meet.
    pub nonsimple_vertices: Vec<usize>,
    /// Translates whose direction does not meet a unique body facet.
    pub ambiguous_points: Vec<usize>,
    /// All translate pairs whose difference does not meet a unique facet.
    pub ambiguous_pairs: Vec<(usize, usize)>,
    /// Translate pairs whose cell faces share an edge.
    pub adjacent_pairs: Vec<(usize, usize)>,
}

/// Index of the unique body facet whose supporting halfspace attains the
/// gauge maximum at `y`, or `None` when the maximum is tied within the
/// margin (the touching point sits on a facet border).
pub fn unique_facet(body: &Body, y: &Vec3) -> Option<usize> {
    let p = body.polytope()?;
    let mut ratios: Vec<f64> = p
        .halfspaces
        .iter()
        .map(|h| h.normal.dot(y) / h.offset)
        .collect();
    let k = (0..ratios.len()).max_by(|&a, &b| ratios[a].partial_cmp(&ratios[b]).unwrap())?;
    let top = ratios[k];
    ratios[k] = f64::NEG_INFINITY;
    let second = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top - second >= FACET_MARGIN {
        Some(k)
    } else {
        None
    }
}

/// Grade a configuration: reduced (every translate cuts the cell) and
/// general (reduced, simple cell vertices, unique touching facets).
///
/// Facet-membership conditions apply to polytopal bodies; for the ball
/// every touching direction is regular, so they hold vacuously. Ambiguity
/// is recorded for all pairs, but only face-adjacent pairs gate the
/// general flag.
pub fn classify_packing(cfg: &PointConfig) -> Result<Classification, CellError> {
    let cell = build_cell(cfg)?;
    let contributing: std::collections::BTreeSet<usize> =
        cell.contributing().into_iter().collect();
    let noncontributing: Vec<usize> = (1..cfg.points.len())
        .filter(|i| !contributing.contains(i))
        .collect();

    let mut nonsimple_vertices = Vec::new();
    for (vi, _) in cell.vertices.iter().enumerate() {
        let incident = cell.faces.iter().filter(|f| f.cycle.contains(&vi)).count();
        if incident != 3 {
            nonsimple_vertices.push(vi);
        }
    }

    let adjacent_pairs = face_adjacent_pairs(&cell);

    let polytopal = cfg.body.polytope().is_some();
    let mut ambiguous_points = Vec::new();
    let mut ambiguous_pairs = Vec::new();
    if polytopal {
        for i in 1..cfg.points.len() {
            if unique_facet(&cfg.body, &cfg.points[i]).is_none() {
                ambiguous_points.push(i);
            }
        }
        for i in 1..cfg.points.len() {
            for j in 1..i {
                let d = cfg.points[i] - cfg.points[j];
                if unique_facet(&cfg.body, &d).is_none() {
                    ambiguous_pairs.push((j, i));
                }
            }
        }
    }

    let reduced = noncontributing.is_empty();
    let contributing_ambiguous = ambiguous_points
        .iter()
        .any(|i| contributing.contains(i));
    let adjacent_ambiguous = adjacent_pairs
        .iter()
        .any(|p| ambiguous_pairs.contains(p));
    let general = reduced
        && nonsimple_vertices.is_empty()
        && !contributing_ambiguous
        && !adjacent_ambiguous;
    Ok(Classification {
        reduced,
        general,
        noncontributing,
        nonsimple_vertices,
        ambiguous_points,
        ambiguous_pairs,
        adjacent_pairs,
    })
}

/// Generator pairs whose cell faces share an edge, each pair once as
/// `(low, high)`.
pub fn face_adjacent_pairs(cell: &LocalCell) -> Vec<(usize, usize)> {
    let mut pairs = std::collections::BTreeSet::new();
    let edge_sets: Vec<std::collections::BTreeSet<(usize, usize)>> = cell
        .faces
        .iter()
        .map(|f| {
            let m = f.cycle.len();
            (0..m)
                .map(|i| {
                    let a = f.cycle[i];
                    let b = f.cycle[(i + 1) % m];
                    (a.min(b), a.max(b))
                })
                .collect()
        })
        .collect();
    for (a, fa) in cell.faces.iter().enumerate() {
        for (b, fb) in cell.faces.iter().enumerate().skip(a + 1) {
            if !edge_sets[a].is_disjoint(&edge_sets[b]) {
                let (lo, hi) = if fa.generator < fb.generator {
                    (fa.generator, fb.generator)
                } else {
                    (fb.generator, fa.generator)
                };
                pairs.insert((lo, hi));
            }
        }
    }
    pairs.into_iter().collect()
}

/// Nudge a reduced packing into general position: scale all translates by
/// `1 + eps` to create slack, then retry random jitters of magnitude
/// `eps^2 ||x_i||` (at most 1000 attempts, deterministic in `seed`) until
/// the classifier reports a general packing.
pub fn perturb_to_general(
    cfg: &PointConfig,
    eps: f64,
    seed: u64,
) -> Result<PointConfig, CellError> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(CellError::PerturbationFailed(format!(
            "epsilon {eps} outside (0, 0.1]"
        )));
    }
    if !check_packing(cfg).is_empty() {
        return Err(CellError::PerturbationFailed(
            "input configuration is not a packing".into(),
        ));
    }
    if !classify_packing(cfg)?.reduced {
        return Err(CellError::PerturbationFailed(
            "input configuration is not a reduced local packing".into(),
        ));
    }

    let scaled: Vec<Vec3> = cfg.points.iter().map(|p| p * (1.0 + eps)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..1000 {
        let mut pts = scaled.clone();
        if attempt > 0 {
            for p in pts.iter_mut().skip(1) {
                *p += ball_sample(&mut rng) * (eps * eps * p.norm());
            }
        }
        let candidate = PointConfig::new(cfg.body.clone(), pts)?;
        if !check_packing(&candidate).is_empty() {
            continue;
        }
        if classify_packing(&candidate)?.general {
            return Ok(candidate);
        }
    }
    Err(CellError::PerturbationFailed(
        "no general configuration found within 1000 attempts".into(),
    ))
}

/// Uniform sample from the closed unit ball.
fn ball_sample(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

/// The 14-point configuration whose octahedron cell attains the
/// conjectured minimal volume 38/27 (the face-relevant vectors of the
/// densest octahedron lattice).
pub fn optimal_octahedron_config() -> PointConfig {
    let t = |a: f64, b: f64, c: f64| Vec3::new(a / 3.0, b / 3.0, c / 3.0);
    let points = vec![
        Vec3::zeros(),
        t(2.0, 3.0, 1.0),
        t(4.0, 1.0, -1.0),
        t(2.0, -2.0, -2.0),
        t(3.0, -1.0, 2.0),
        t(1.0, 1.0, 4.0),
        t(-1.0, -2.0, 3.0),
        t(1.0, -4.0, 1.0),
        t(-2.0, -3.0, -1.0),
        t(-1.0, -1.0, -4.0),
        t(1.0, 2.0, -3.0),
        t(-1.0, 4.0, -1.0),
        t(-3.0, 1.0, -2.0),
        t(-4.0, -1.0, 1.0),
        t(-2.0, 2.0, 2.0),
    ];
    PointConfig::new(catalog::catalog("O").expect("O is in the catalog"), points)
        .expect("reference configuration is structurally valid")
}

/// The 14-point configuration whose cuboctahedron cell attains the
/// conjectured minimal volume 196/27.
pub fn optimal_cuboctahedron_config() -> PointConfig {
    let t = |a: f64, b: f64, c: f64| Vec3::new(a / 3.0, b / 3.0, c / 3.0);
    let points = vec![
        Vec3::zeros(),
        t(6.0, 1.0, 1.0),
        t(2.0, 5.0, 5.0),
        t(-4.0, 4.0, 4.0),
        t(1.0, -1.0, 6.0),
        t(5.0, -5.0, 2.0),
        t(-1.0, -6.0, 1.0),
        t(-5.0, -2.0, 5.0),
        t(-6.0, -1.0, -1.0),
        t(-5.0, 5.0, -2.0),
        t(1.0, 6.0, -1.0),
        t(5.0, 2.0, -5.0),
        t(-1.0, 1.0, -6.0),
        t(-2.0, -5.0, -5.0),
        t(4.0, -4.0, -4.0),
    ];
    PointConfig::new(catalog::catalog("C").expect("C is in the catalog"), points)
        .expect("reference configuration is structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_config(body: &str) -> PointConfig {
        let mut points = vec![Vec3::zeros()];
        for a in [Vec3::x(), Vec3::y(), Vec3::z()] {
            points.push(a * 2.0);
            points.push(a * -2.0);
        }
        PointConfig::new(catalog::catalog(body).unwrap(), points).unwrap()
    }

    /// Eight touching ball translates along the cube diagonals; their cell
    /// is an octahedron whose six vertices all have four incident faces.
    fn diagonal_ball_config() -> PointConfig {
        let s = 2.0 / 3.0f64.sqrt();
        let mut points = vec![Vec3::zeros()];
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    points.push(Vec3::new(sx * s, sy * s, sz * s));
                }
            }
        }
        PointConfig::new(catalog::catalog("B").unwrap(), points).unwrap()
    }

    #[test]
    fn touching_translate_is_not_a_violation() {
        let cfg = PointConfig::new(
            catalog::catalog("O").unwrap(),
            vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)],
        )
        .unwrap();
        assert!(check_packing(&cfg).is_empty());
    }

    #[test]
    fn overlapping_translate_is_reported() {
        let cfg = PointConfig::new(
            catalog::catalog("O").unwrap(),
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)],
        )
        .unwrap();
        let v = check_packing(&cfg);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].i, v[0].j), (1, 0));
        assert!((v[0].gauge - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_configuration_builds_the_unit_cube_cell() {
        let cell = build_cell(&axis_config("B")).unwrap();
        assert_eq!(cell.faces.len(), 6);
        assert_eq!(cell.vertices.len(), 8);
        assert!((cell.volume - 8.0).abs() < 1e-12);
        let direct = geom::polytope_volume(&cell.polytope).unwrap();
        assert!((cell.volume - direct).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_unbounded() {
        let cfg = PointConfig::new(
            catalog::catalog("B").unwrap(),
            vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(build_cell(&cfg), Err(CellError::UnboundedCell)));
    }

    #[test]
    fn one_sided_configuration_is_unbounded() {
        let mut points = vec![Vec3::zeros()];
        for a in [Vec3::x(), Vec3::y(), -Vec3::x(), -Vec3::y()] {
            points.push(a * 2.0);
        }
        points.push(Vec3::new(0.0, 0.0, 2.0));
        // nothing below the z = 0 plane
        let cfg = PointConfig::new(catalog::catalog("B").unwrap(), points).unwrap();
        assert!(matches!(build_cell(&cfg), Err(CellError::UnboundedCell)));
    }

    #[test]
    fn config_must_start_at_origin() {
        let r = PointConfig::new(
            catalog::catalog("B").unwrap(),
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::zeros()],
        );
        assert!(matches!(r, Err(CellError::InvalidConfig(_))));
    }

    #[test]
    fn reference_configs_are_general_packings() {
        for cfg in [optimal_octahedron_config(), optimal_cuboctahedron_config()] {
            assert!(check_packing(&cfg).is_empty());
            let c = classify_packing(&cfg).unwrap();
            assert!(c.reduced);
            assert!(c.general, "{:?}", (c.nonsimple_vertices, c.ambiguous_points));
        }
    }

    #[test]
    fn far_point_breaks_reducedness() {
        let mut cfg = optimal_octahedron_config();
        cfg.points.push(Vec3::new(10.0, 0.0, 0.0));
        let c = classify_packing(&cfg).unwrap();
        assert!(!c.reduced);
        assert_eq!(c.noncontributing, vec![15]);
    }

    #[test]
    fn diagonal_ball_cell_is_octahedral_with_nonsimple_vertices() {
        let cfg = diagonal_ball_config();
        let cell = build_cell(&cfg).unwrap();
        assert_eq!(cell.faces.len(), 8);
        assert_eq!(cell.vertices.len(), 6);
        let c = classify_packing(&cfg).unwrap();
        assert!(c.reduced);
        assert!(!c.general);
        assert_eq!(c.nonsimple_vertices.len(), 6);
    }

    #[test]
    fn perturbation_resolves_nonsimple_vertices() {
        let cfg = diagonal_ball_config();
        let out = perturb_to_general(&cfg, 0.03, 7).unwrap();
        let c = classify_packing(&out).unwrap();
        assert!(c.general);
        assert!(check_packing(&out).is_empty());
        let bound = 0.03 * (1.0 + cfg.points.iter().map(Vec3::norm).fold(0.0, f64::max));
        for (a, b) in cfg.points.iter().zip(&out.points) {
            assert!((a - b).norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn zero_epsilon_is_rejected() {
        let cfg = diagonal_ball_config();
        assert!(matches!(
            perturb_to_general(&cfg, 0.0, 1),
            Err(CellError::PerturbationFailed(_))
        ));
    }

    #[test]
    fn already_general_config_perturbs_to_a_general_config() {
        let cfg = optimal_octahedron_config();
        let out = perturb_to_general(&cfg, 0.01, 3).unwrap();
        assert!(classify_packing(&out).unwrap().general);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = optimal_octahedron_config();
        let s = cfg.to_json();
        let back = PointConfig::from_json(&s).unwrap();
        assert_eq!(back.body.name, "O");
        assert_eq!(back.points.len(), 15);
        for (a, b) in cfg.points.iter().zip(&back.points) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn config_json_rejects_unknown_body() {
        let s = r#"{"body": "pyramid", "points": [[0,0,0],[2,0,0]]}"#;
        assert!(matches!(
            PointConfig::from_json(s),
            Err(CellError::Catalog(CatalogError::UnknownBody(_)))
        ));
    }
}
