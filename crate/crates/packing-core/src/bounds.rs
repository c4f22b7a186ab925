//! Truncater-based neighbor bounds.
//!
//! A truncater is a centrally symmetric convex body placed at the origin to
//! localize a packing question: a translate can only shave volume off the
//! central cell if the bisector plane between the origin and the translate
//! meets the truncater. The positions with that property form the
//! truncater's colony. Counting effective neighbors then reduces either to
//! a volume ratio over the colony (the Steiner route) or to a packing of
//! spherical sections on a probe sphere (the cap route), and the cap route
//! sharpens further once the minimal section area over a fundamental
//! domain of the body's symmetry group is known.
//!
//! Area computations on the probe sphere use the Gauss-Bonnet identity for
//! regions bounded by circular arcs. The printed form of the boundary term
//! in the source material omits a factor `1/r` relative to the true
//! geodesic curvature of a circle at plane distance `d` on a radius-`r`
//! sphere; this module uses the dimensionally consistent
//! `k_g = d / (r * sqrt(r^2 - d^2))`, which is the normalization that
//! reproduces the closed cap area `2 pi r (r - d)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Body, Shape};
use crate::geom::{orthogonal_unit, GeomError, HalfSpace, Polytope, Vec3};

/// Density limit for packings of three or more congruent caps on a sphere
/// (Molnar's bound).
pub const CAP_DENSITY_LIMIT: f64 = 0.906_899_682_117_089; // pi / sqrt(12)

/// Lattice packing density floor for bodies normalized between the unit
/// ball and its sqrt(3) dilate (Smith's bound).
pub const LATTICE_DENSITY_FLOOR: f64 = 0.53835;

/// Reach bound for the generic normalized body: translates beyond this
/// multiple of the body cannot influence an optimal cell.
pub const GENERIC_REACH: f64 = 24.3;

/// Reach bound for the octahedron and the cuboctahedron.
pub const OCTAHEDRAL_REACH: f64 = 10.0;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("neighbor bound requires a ball truncater")]
    NonBallTruncater,
    #[error("boundary arcs do not chain into one closed loop")]
    SelfIntersecting,
    #[error("corner angle {0} lies outside (0, 2*pi)")]
    AngleOutOfRange(f64),
    #[error("translate does not meet the sphere")]
    EmptySection,
    #[error("section-area minimum {0} is not positive")]
    NonpositiveMu(f64),
    #[error("fundamental domain contains no feasible sample")]
    EmptyDomain,
    #[error("body carries no Steiner data")]
    MissingSteinerData,
    #[error("domain is built for body {expected}, got {got}")]
    DomainBodyMismatch { expected: String, got: String },
    #[error("operation needs a coordinate model, body {0} has none")]
    UnsupportedBody(String),
    #[error("invalid spherical region: {0}")]
    InvalidRegion(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

// --- Truncaters and colonies -----------------------------------------------

/// Centrally symmetric truncater shape. The box variant is planar (a
/// `k x 1` rectangle in the xy-plane); it exists to exercise the colony
/// machinery against a closed form and is not used for spatial bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Truncater {
    Ball { r: f64 },
    #[serde(rename = "box")]
    PlanarBox { k: f64 },
}

impl Truncater {
    /// Ball truncater of radius `r >= 0`; radius zero degenerates to the
    /// origin, whose colony is the origin as well.
    pub fn ball(r: f64) -> Self {
        assert!(r.is_finite() && r >= 0.0, "ball radius must be finite and nonnegative");
        Truncater::Ball { r }
    }

    /// Planar `k x 1` box truncater, `k > 0`.
    pub fn planar_box(k: f64) -> Self {
        assert!(k.is_finite() && k > 0.0, "box half-width must be finite and positive");
        Truncater::PlanarBox { k }
    }

    /// Support function `max { <y, u> : y in the truncater }`.
    pub fn support(&self, u: &Vec3) -> f64 {
        match self {
            Truncater::Ball { r } => r * u.norm(),
            Truncater::PlanarBox { k } => k * u.x.abs() + u.y.abs(),
        }
    }

    /// Minkowski gauge; infinite outside the affine hull of the box.
    pub fn gauge(&self, x: &Vec3) -> f64 {
        match self {
            Truncater::Ball { r } => {
                if *r == 0.0 {
                    if x.norm() == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    x.norm() / r
                }
            }
            Truncater::PlanarBox { k } => {
                if x.z.abs() > 0.0 {
                    f64::INFINITY
                } else {
                    (x.x.abs() / k).max(x.y.abs())
                }
            }
        }
    }
}

/// The colony of a truncater: all positions whose bisector plane with the
/// origin meets the truncater. A point `x` belongs to the colony exactly
/// when `|x|^2 / 2 <= h(x)` for the truncater's support function `h`, so
/// the colony boundary along a unit direction `u` sits at radius
/// `2 h(u)`. For a ball of radius `r` this is the ball of radius `2r`; in
/// general the colony is a star body and need not be convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Colony {
    pub truncater: Truncater,
}

/// Build the colony of a truncater.
pub fn colony(t: &Truncater) -> Colony {
    Colony { truncater: *t }
}

impl Colony {
    /// Radius of the colony boundary along `dir` (zero for the zero vector).
    pub fn scale(&self, dir: &Vec3) -> f64 {
        let n = dir.norm();
        if n <= 1e-300 {
            return 0.0;
        }
        2.0 * self.truncater.support(&(dir / n))
    }

    /// The colony boundary point along `dir`.
    pub fn boundary_point(&self, dir: &Vec3) -> Vec3 {
        let n = dir.norm();
        if n <= 1e-300 {
            return Vec3::zeros();
        }
        let u = dir / n;
        self.scale(&u) * u
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        x.norm_squared() / 2.0 <= self.truncater.support(x) + tol
    }
}

/// Closed-form colony scale for the planar `k x 1` box, evaluated at a
/// boundary point `(x, y)` of the box itself. The returned factor `g`
/// satisfies `g * (x, y) in boundary(colony)`.
pub fn box_boundary_scale(k: f64, x: f64, y: f64) -> f64 {
    let on_top = (y.abs() - 1.0).abs() <= 1e-9 && x.abs() <= k + 1e-9;
    let on_side = (x.abs() - k).abs() <= 1e-9 && y.abs() <= 1.0 + 1e-9;
    assert!(on_top || on_side, "({x}, {y}) is not on the boundary of the {k} x 1 box");
    if on_top {
        2.0 * (k * x.abs() + 1.0) / (x * x + 1.0)
    } else {
        2.0 * (k * k + y.abs()) / (k * k + y * y)
    }
}

/// Maximum over sampled directions of how far the doubled truncater pokes
/// out of the colony; nonpositive values confirm `2 * truncater` lies
/// inside the colony, and balls give exactly zero in every direction.
pub fn colony_superset_deficit(t: &Truncater, samples: usize) -> f64 {
    let c = colony(t);
    let dirs: Vec<Vec3> = match t {
        Truncater::Ball { .. } => fibonacci_directions(samples),
        Truncater::PlanarBox { .. } => (0..samples)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / samples as f64;
                Vec3::new(a.cos(), a.sin(), 0.0)
            })
            .collect(),
    };
    dirs.iter()
        .map(|u| {
            let g = t.gauge(u);
            if !g.is_finite() || g <= 0.0 {
                return f64::NEG_INFINITY;
            }
            2.0 / g - c.scale(u)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn fibonacci_directions(n: usize) -> Vec<Vec3> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * (i as f64 / golden).fract();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

// --- Steiner neighbor bound -------------------------------------------------

/// Upper bound on the number of effective neighbors with respect to a ball
/// truncater: the colony of a ball of radius `r` is the ball of radius
/// `2r`, so every influencing translate packs inside `2rB + body` and the
/// count is at most `vol(2rB + body) / vol(body) - 1`.
pub fn steiner_neighbor_bound(t: &Truncater, body: &Body) -> Result<u64, BoundError> {
    let r = match t {
        Truncater::Ball { r } => *r,
        Truncater::PlanarBox { .. } => return Err(BoundError::NonBallTruncater),
    };
    let vol = body.volume.ok_or(BoundError::MissingSteinerData)?;
    if body.steiner_coeffs().is_none() {
        return Err(BoundError::MissingSteinerData);
    }
    let parallel = body.parallel_volume(2.0 * r)?;
    Ok((parallel / vol - 1.0).floor() as u64)
}

// --- Spherical regions and Gauss-Bonnet areas -------------------------------

/// One boundary arc of a spherical region: a piece of the circle where
/// `plane` cuts the sphere. `plane` is the halfspace CONTAINING the
/// region, endpoints are traversal-ordered (region on the left), and
/// `small_cap_side` records whether the region lies in the smaller of the
/// two caps the plane cuts off (redundant with the plane, kept as a
/// cross-check; either value is accepted for great circles).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionArc {
    pub plane: HalfSpace,
    pub endpoints: [Vec3; 2],
    pub small_cap_side: bool,
}

/// Simple region on a sphere bounded by circular arcs. `corner_angles[i]`
/// is the interior angle at the junction of `arcs[i]` and `arcs[i + 1]`
/// (cyclically); a single closed circle carries no corners.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalRegion {
    pub sphere_radius: f64,
    pub arcs: Vec<RegionArc>,
    pub corner_angles: Vec<f64>,
}

/// Region-side frame of an arc: unit axis `m` with the region inside
/// `{ u : <m, u> >= c }`, plus the signed plane offset `c` (positive when
/// the region is in the small cap).
fn arc_frame(arc: &RegionArc, rho: f64) -> Result<(Vec3, f64), BoundError> {
    let nlen = arc.plane.normal.norm();
    if nlen <= 1e-12 {
        return Err(BoundError::InvalidRegion("arc plane has zero normal".into()));
    }
    let m = -arc.plane.normal / nlen;
    let c = -arc.plane.offset / nlen;
    if c.abs() >= rho * (1.0 - 1e-12) {
        return Err(BoundError::InvalidRegion(
            "arc plane does not cut the sphere".into(),
        ));
    }
    if c.abs() > 1e-12 * rho.max(1.0) && arc.small_cap_side != (c > 0.0) {
        return Err(BoundError::InvalidRegion(
            "small-cap flag contradicts the plane".into(),
        ));
    }
    for e in &arc.endpoints {
        if (e.norm() - rho).abs() > 1e-6 * rho.max(1.0)
            || (m.dot(e) - c).abs() > 1e-6 * rho.max(1.0)
        {
            return Err(BoundError::InvalidRegion(
                "arc endpoint is not on the plane's sphere circle".into(),
            ));
        }
    }
    Ok((m, c))
}

/// Swept angle of the arc around its region-side axis, in `(0, 2*pi]`;
/// coincident endpoints read as the full circle.
fn arc_sweep(arc: &RegionArc, m: &Vec3, c: f64, rho: f64) -> Result<f64, BoundError> {
    let center = c * m;
    let p0 = arc.endpoints[0] - center;
    let p1 = arc.endpoints[1] - center;
    if p0.norm() <= 1e-9 * rho || p1.norm() <= 1e-9 * rho {
        return Err(BoundError::InvalidRegion("arc endpoint on the circle axis".into()));
    }
    if (arc.endpoints[0] - arc.endpoints[1]).norm() <= 1e-9 * rho {
        return Ok(2.0 * PI);
    }
    let raw = p0.cross(&p1).dot(m).atan2(p0.dot(&p1));
    Ok(if raw > 0.0 { raw } else { raw + 2.0 * PI })
}

/// Area of a simple arc-bounded spherical region via Gauss-Bonnet:
/// `area = rho^2 (sum(theta) + (2 - n) pi) - rho * sum(c_i * dphi_i)`,
/// where `c_i` is the signed plane offset of arc `i` toward the region
/// and `dphi_i` its swept angle. A single closed circle reduces to the
/// cap identity `2 pi rho (rho - c)`.
pub fn gauss_bonnet_area(region: &SphericalRegion) -> Result<f64, BoundError> {
    let rho = region.sphere_radius;
    if !(rho > 0.0) {
        return Err(BoundError::InvalidRegion("sphere radius must be positive".into()));
    }
    let n = region.arcs.len();
    if n == 0 {
        return Err(BoundError::InvalidRegion("region has no boundary arcs".into()));
    }
    if n == 1 && region.corner_angles.is_empty() {
        let arc = &region.arcs[0];
        if (arc.endpoints[0] - arc.endpoints[1]).norm() > 1e-9 * rho {
            return Err(BoundError::InvalidRegion(
                "an open single arc needs a corner list".into(),
            ));
        }
        let (_, c) = arc_frame(arc, rho)?;
        return Ok(2.0 * PI * rho * (rho - c));
    }
    if region.corner_angles.len() != n {
        return Err(BoundError::InvalidRegion(format!(
            "{} arcs need {} corner angles, got {}",
            n,
            n,
            region.corner_angles.len()
        )));
    }
    for &theta in &region.corner_angles {
        if !theta.is_finite() || theta <= 0.0 || theta >= 2.0 * PI {
            return Err(BoundError::AngleOutOfRange(theta));
        }
    }
    for i in 0..n {
        let here = &region.arcs[i].endpoints[1];
        let next = &region.arcs[(i + 1) % n].endpoints[0];
        if (here - next).norm() > 1e-7 * rho.max(1.0) {
            return Err(BoundError::SelfIntersecting);
        }
    }
    let mut theta_sum = 0.0;
    for &theta in &region.corner_angles {
        theta_sum += theta;
    }
    let mut curvature = 0.0;
    for arc in &region.arcs {
        let (m, c) = arc_frame(arc, rho)?;
        curvature += c * arc_sweep(arc, &m, c, rho)?;
    }
    Ok(rho * rho * (theta_sum + (2.0 - n as f64) * PI) - rho * curvature)
}

// --- Sphere-body sections ----------------------------------------------------

/// Area of the trace of `ball(ball_radius) + x` on the sphere of radius
/// `rho`: the boundary circle lies on the radical plane of the two
/// spheres, so the section is the cap `2 pi rho (rho - d)` at plane
/// distance `d = (rho^2 + |x|^2 - s^2) / (2 |x|)`.
pub fn sphere_cap_section(ball_radius: f64, x: &Vec3, rho: f64) -> Result<f64, BoundError> {
    let s = ball_radius;
    let c = x.norm();
    if c <= 1e-12 {
        return if rho <= s {
            Ok(4.0 * PI * rho * rho)
        } else {
            Err(BoundError::EmptySection)
        };
    }
    let d = (rho * rho + c * c - s * s) / (2.0 * c);
    if d >= rho {
        return Err(BoundError::EmptySection);
    }
    if d <= -rho {
        return Ok(4.0 * PI * rho * rho);
    }
    Ok(2.0 * PI * rho * (rho - d))
}

/// A cutting constraint on the sphere: unit outward normal and offset,
/// region inside `{ u : <n, u> <= beta }`.
struct Cut {
    n: Vec3,
    beta: f64,
}

fn section_cuts(poly: &Polytope, x: &Vec3, rho: f64) -> Result<Vec<Cut>, BoundError> {
    let mut cuts = Vec::new();
    for hs in &poly.halfspaces {
        let nlen = hs.normal.norm();
        if nlen <= 1e-12 {
            continue;
        }
        let n = hs.normal / nlen;
        let beta = (hs.offset + hs.normal.dot(x)) / nlen;
        if beta <= -rho * (1.0 - 1e-12) {
            return Err(BoundError::EmptySection);
        }
        if beta < rho * (1.0 - 1e-12) {
            cuts.push(Cut { n, beta });
        }
    }
    Ok(cuts)
}

/// Maximum of `<n_other, u>` over the circle `{ <n, u> = beta, |u| = rho }`.
fn circle_max(n: &Vec3, beta: f64, rho: f64, other: &Cut) -> f64 {
    let c = n.dot(&other.n);
    let tang = (other.n - c * n).norm();
    beta * c + (rho * rho - beta * beta).max(0.0).sqrt() * tang
}

/// Assemble the boundary of the trace of `poly + x` on the sphere of
/// radius `rho` as a spherical region. Returns `Ok(None)` when no facet
/// plane cuts the sphere (the sphere lies inside the translate).
pub fn sphere_section_region(
    poly: &Polytope,
    x: &Vec3,
    rho: f64,
) -> Result<Option<SphericalRegion>, BoundError> {
    let cuts = section_cuts(poly, x, rho)?;
    if cuts.is_empty() {
        return Ok(None);
    }
    let feas_tol = 1e-9 * (1.0 + rho);

    // candidate vertices: pairwise circle intersections feasible for all cuts
    let mut verts: Vec<(usize, usize, Vec3)> = Vec::new();
    for i in 0..cuts.len() {
        for j in (i + 1)..cuts.len() {
            let c = cuts[i].n.dot(&cuts[j].n);
            let den = 1.0 - c * c;
            if den < 1e-14 {
                continue;
            }
            let al = (cuts[i].beta - c * cuts[j].beta) / den;
            let ga = (cuts[j].beta - c * cuts[i].beta) / den;
            let w = al * cuts[i].n + ga * cuts[j].n;
            let rem = rho * rho - w.norm_squared();
            if rem <= 0.0 {
                continue;
            }
            let axis = cuts[i].n.cross(&cuts[j].n);
            let t = rem.sqrt() / axis.norm();
            for u in [w + t * axis, w - t * axis] {
                if cuts.iter().all(|k| k.n.dot(&u) - k.beta <= feas_tol) {
                    verts.push((i, j, u));
                }
            }
        }
    }

    if verts.is_empty() {
        // no corners: the region is a single cap or empty
        let mut bounding = Vec::new();
        for (k, cut) in cuts.iter().enumerate() {
            let ok = cuts.iter().enumerate().all(|(j, other)| {
                j == k || circle_max(&cut.n, cut.beta, rho, other) <= other.beta + feas_tol
            });
            if ok {
                bounding.push(k);
            }
        }
        match bounding.len() {
            1 => {
                let k = bounding[0];
                let cut = &cuts[k];
                let rad = (rho * rho - cut.beta * cut.beta).max(0.0).sqrt();
                let e = cut.beta * cut.n + rad * orthogonal_unit(&cut.n);
                return Ok(Some(SphericalRegion {
                    sphere_radius: rho,
                    arcs: vec![RegionArc {
                        plane: HalfSpace::new(cut.n, cut.beta),
                        endpoints: [e, e],
                        small_cap_side: cut.beta < 0.0,
                    }],
                    corner_angles: vec![],
                }));
            }
            0 => {
                if sphere_feasible_point(&cuts, rho, x).is_some() {
                    return Err(BoundError::InvalidRegion(
                        "vertexless region is not a single cap".into(),
                    ));
                }
                return Err(BoundError::EmptySection);
            }
            _ => {
                return Err(BoundError::InvalidRegion(
                    "multiple disjoint boundary circles".into(),
                ))
            }
        }
    }

    // boundary arcs: on each circle, spans between angle-consecutive
    // vertices whose midpoints stay feasible
    let mut arcs: Vec<RegionArc> = Vec::new();
    for (k, cut) in cuts.iter().enumerate() {
        let pts: Vec<Vec3> = verts
            .iter()
            .filter(|(i, j, _)| *i == k || *j == k)
            .map(|(_, _, u)| *u)
            .collect();
        if pts.is_empty() {
            continue;
        }
        let m = -cut.n;
        let c = -cut.beta;
        let center = c * m;
        let mut e1 = pts[0] - center;
        e1 -= e1.dot(&m) * m;
        if e1.norm() <= 1e-12 {
            return Err(BoundError::InvalidRegion("vertex on a circle axis".into()));
        }
        e1 = e1.normalize();
        let e2 = m.cross(&e1);
        let mut angled: Vec<(f64, Vec3)> = pts
            .iter()
            .map(|v| {
                let p = v - center;
                let mut a = p.dot(&e2).atan2(p.dot(&e1));
                if a < 0.0 {
                    a += 2.0 * PI;
                }
                (a, *v)
            })
            .collect();
        angled.sort_by(|a, b| a.0.total_cmp(&b.0));
        // drop duplicate vertices produced by more than two planes meeting
        angled.dedup_by(|a, b| (a.1 - b.1).norm() <= 1e-9 * (1.0 + rho));
        let rad = (rho * rho - c * c).max(0.0).sqrt();
        let npts = angled.len();
        for idx in 0..npts {
            let (a0, v0) = angled[idx];
            let (a1, v1) = angled[(idx + 1) % npts];
            let mut d = a1 - a0;
            if d <= 0.0 {
                d += 2.0 * PI;
            }
            if npts == 1 {
                d = 2.0 * PI;
            }
            let mid = a0 + d / 2.0;
            let probe = center + rad * (mid.cos() * e1 + mid.sin() * e2);
            if cuts.iter().all(|kk| kk.n.dot(&probe) - kk.beta <= feas_tol) {
                arcs.push(RegionArc {
                    plane: HalfSpace::new(cut.n, cut.beta),
                    endpoints: [v0, v1],
                    small_cap_side: cut.beta < 0.0,
                });
            }
        }
    }
    if arcs.is_empty() {
        return Err(BoundError::EmptySection);
    }

    // chain the arcs into a single closed loop, region on the left
    let match_tol = 1e-6 * (1.0 + rho);
    let mut used = vec![false; arcs.len()];
    let mut order = vec![0usize];
    used[0] = true;
    while order.len() < arcs.len() {
        let tail = arcs[*order.last().expect("nonempty")].endpoints[1];
        let next = (0..arcs.len())
            .find(|&i| !used[i] && (arcs[i].endpoints[0] - tail).norm() <= match_tol);
        match next {
            Some(i) => {
                used[i] = true;
                order.push(i);
            }
            None => return Err(BoundError::SelfIntersecting),
        }
    }
    let last_end = arcs[*order.last().expect("nonempty")].endpoints[1];
    if (arcs[order[0]].endpoints[0] - last_end).norm() > match_tol {
        return Err(BoundError::SelfIntersecting);
    }
    let ordered: Vec<RegionArc> = order.iter().map(|&i| arcs[i].clone()).collect();

    // interior angles at junctions: pi minus the signed turn of tangents
    let mut corner_angles = Vec::with_capacity(ordered.len());
    for i in 0..ordered.len() {
        let here = &ordered[i];
        let next = &ordered[(i + 1) % ordered.len()];
        let v = here.endpoints[1];
        let (mi, _) = arc_frame(here, rho)?;
        let (mj, _) = arc_frame(next, rho)?;
        let t_in = mi.cross(&v);
        let t_out = mj.cross(&v);
        if t_in.norm() <= 1e-12 || t_out.norm() <= 1e-12 {
            return Err(BoundError::InvalidRegion("degenerate tangent at a corner".into()));
        }
        let t_in = t_in.normalize();
        let t_out = t_out.normalize();
        let turn = t_in.cross(&t_out).dot(&(v / rho)).atan2(t_in.dot(&t_out));
        let theta = PI - turn;
        if !(0.0..2.0 * PI).contains(&theta) || theta == 0.0 {
            return Err(BoundError::AngleOutOfRange(theta));
        }
        corner_angles.push(theta);
    }

    Ok(Some(SphericalRegion { sphere_radius: rho, arcs: ordered, corner_angles }))
}

/// Deterministic feasibility probe on the sphere: projected descent on the
/// maximal cut violation. Returns a feasible point if one is found.
fn sphere_feasible_point(cuts: &[Cut], rho: f64, hint: &Vec3) -> Option<Vec3> {
    let mut u = if hint.norm() > 1e-9 {
        rho * hint.normalize()
    } else {
        rho * Vec3::z()
    };
    let violation = |p: &Vec3| {
        cuts.iter()
            .map(|c| c.n.dot(p) - c.beta)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut step = 0.5 * rho;
    let mut best = violation(&u);
    for _ in 0..500 {
        if best <= 0.0 {
            return Some(u);
        }
        let worst = cuts
            .iter()
            .max_by(|a, b| (a.n.dot(&u) - a.beta).total_cmp(&(b.n.dot(&u) - b.beta)))
            .expect("cuts nonempty");
        let candidate = rho * (u - step * worst.n).normalize();
        let v = violation(&candidate);
        if v < best {
            u = candidate;
            best = v;
        } else {
            step *= 0.5;
            if step < 1e-12 * rho {
                break;
            }
        }
    }
    if best <= 0.0 {
        Some(u)
    } else {
        None
    }
}

/// Area of the trace of `body + x` on the sphere of radius `rho`. Ball
/// bodies use the radical-plane cap; polytopes assemble a spherical
/// region and measure it by Gauss-Bonnet.
pub fn sphere_body_section_area(body: &Body, x: &Vec3, rho: f64) -> Result<f64, BoundError> {
    match &body.shape {
        Shape::Ball { radius } => sphere_cap_section(*radius, x, rho),
        Shape::Polytope(p) => match sphere_section_region(p, x, rho)? {
            None => Ok(4.0 * PI * rho * rho),
            Some(region) => gauss_bonnet_area(&region),
        },
        Shape::Counts { .. } => Err(BoundError::UnsupportedBody(body.name.clone())),
    }
}

/// Quadrature fallback for the section area: latitude-longitude mesh with
/// `n_theta x 2 n_theta` cells, accurate to a few parts in `n_theta`.
/// Exists to cross-validate the Gauss-Bonnet route.
pub fn sphere_body_section_area_mesh(
    body: &Body,
    x: &Vec3,
    rho: f64,
    n_theta: usize,
) -> Result<f64, BoundError> {
    if body.gauge(&Vec3::zeros()).is_none() {
        return Err(BoundError::UnsupportedBody(body.name.clone()));
    }
    let d_ang = PI / n_theta as f64;
    let total: f64 = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = (i as f64 + 0.5) * d_ang;
            let (st, ct) = theta.sin_cos();
            let mut band = 0.0;
            for j in 0..2 * n_theta {
                let phi = (j as f64 + 0.5) * d_ang;
                let u = Vec3::new(rho * st * phi.cos(), rho * st * phi.sin(), rho * ct);
                let inside = body.gauge(&(u - x)).map(|g| g <= 1.0).unwrap_or(false);
                if inside {
                    band += st;
                }
            }
            band
        })
        .sum();
    Ok(total * d_ang * d_ang * rho * rho)
}

// --- Probe-sphere radii -------------------------------------------------------

/// Radius of the sphere on which a ball of radius `s` centered at distance
/// `near` cuts the same cap as one centered at distance `far`: the cap
/// depths `(rho^2 + a^2 - s^2) / (2a)` agree exactly when
/// `rho^2 = near * far + s^2`.
pub fn equal_cap_sphere_radius(near: f64, far: f64, s: f64) -> f64 {
    (near * far + s * s).sqrt()
}

/// Circumradius-to-center distance of the record octahedral lattice cell;
/// the ball truncater of this radius localizes the octahedron problem.
pub fn octahedral_truncater_radius() -> f64 {
    2033.0f64.sqrt() / 57.0
}

/// Same for the record cuboctahedral lattice cell.
pub fn cuboctahedral_truncater_radius() -> f64 {
    830.0f64.sqrt() / 21.0
}

/// Probe-sphere radius for the octahedral case: equal caps for the
/// inscribed ball (radius `1/sqrt(3)`) at the nearest possible translate
/// distance `2/sqrt(3)` and at the colony radius.
pub fn octahedral_sphere_radius() -> f64 {
    let s = 1.0 / 3.0f64.sqrt();
    equal_cap_sphere_radius(2.0 * s, 2.0 * octahedral_truncater_radius(), s)
}

/// Probe-sphere radius for the cuboctahedral case (inscribed ball radius
/// 1, nearest distance 2).
pub fn cuboctahedral_sphere_radius() -> f64 {
    equal_cap_sphere_radius(2.0, 2.0 * cuboctahedral_truncater_radius(), 1.0)
}

// --- Cap bounds ---------------------------------------------------------------

/// The two cap-packing counts obtainable from a minimal section area `mu`
/// on a sphere of radius `rho`: the plain area ratio, and the ratio
/// scaled by the congruent-cap density limit (valid when every translate's
/// section contains a cap congruent to the one measured by `mu`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapBound {
    pub plain_value: f64,
    pub plain: u64,
    pub congruent_value: f64,
    pub congruent: u64,
}

pub fn cap_bound(rho: f64, mu: f64) -> Result<CapBound, BoundError> {
    if !(mu > 0.0) {
        return Err(BoundError::NonpositiveMu(mu));
    }
    let sphere = 4.0 * PI * rho * rho;
    let plain_value = sphere / mu;
    let congruent_value = CAP_DENSITY_LIMIT * plain_value;
    Ok(CapBound {
        plain_value,
        plain: plain_value.floor() as u64,
        congruent_value,
        congruent: congruent_value.floor() as u64,
    })
}

// --- Fundamental domains and the section-area minimum --------------------------

/// A symmetry sector of the minimization domain: the part of the colony
/// shell (outside the doubled body, inside the colony ball) cut to a
/// simplicial cone spanned by three extreme rays. Landmarks are the
/// geometric skeleton of the sector (facet centers, edge midpoints, and
/// their radial projections onto the colony sphere); only the expected
/// minimizer enters any formula, the rest are reported for auditing.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    pub name: String,
    pub body_name: String,
    /// Halfspaces through the origin whose intersection is the cone.
    pub cone: Vec<HalfSpace>,
    /// Unit extreme rays of the cone.
    pub rays: [Vec3; 3],
    pub landmarks: Vec<(String, Vec3)>,
    pub expected_minimizer: Vec3,
}

impl FundamentalDomain {
    pub fn contains_direction(&self, dir: &Vec3, tol: f64) -> bool {
        self.cone.iter().all(|h| h.contains(dir, tol))
    }
}

/// Halfspace through the origin and the plane of `p` and `q`, oriented to
/// contain `inside`.
fn sector_halfspace(p: &Vec3, q: &Vec3, inside: &Vec3) -> HalfSpace {
    let mut n = p.cross(q);
    assert!(n.norm() > 1e-12, "sector points are collinear");
    n = n.normalize();
    if n.dot(inside) > 0.0 {
        n = -n;
    }
    HalfSpace::new(n, 0.0)
}

/// Extreme rays of the cone cut by three origin halfspaces.
fn cone_rays(cone: &[HalfSpace; 3]) -> [Vec3; 3] {
    let mut rays = Vec::with_capacity(3);
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut d = cone[i].normal.cross(&cone[j].normal);
        assert!(d.norm() > 1e-12, "cone planes are parallel");
        d = d.normalize();
        if !cone.iter().all(|h| h.contains(&d, 1e-12)) {
            d = -d;
        }
        assert!(
            cone.iter().all(|h| h.contains(&d, 1e-12)),
            "cone is not simplicial"
        );
        rays.push(d);
    }
    [rays[0], rays[1], rays[2]]
}

/// Sector of the octahedral minimization domain, built from its landmark
/// points: the facet-center axis, the corner where the doubled body meets
/// the colony sphere, and the edge-midpoint axis.
pub fn octahedral_domain() -> FundamentalDomain {
    let facet_center = Vec3::new(2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0);
    let fcs = 2.0 * (2033.0f64 / 3.0).sqrt() / 57.0;
    let facet_center_sphere = Vec3::new(fcs, fcs, fcs);
    let corner = Vec3::new(
        2.0 / 3.0 - 10.0 / (3.0 * 57.0f64.sqrt()),
        2.0 / 3.0 - 10.0 / (3.0 * 57.0f64.sqrt()),
        2.0 / 3.0 + 20.0 / (3.0 * 57.0f64.sqrt()),
    );
    let edge_crossing = Vec3::new(
        1.0 - 817.0f64.sqrt() / 57.0,
        0.0,
        1.0 + 817.0f64.sqrt() / 57.0,
    );
    let edge_midpoint = Vec3::new(1.0, 0.0, 1.0);
    let edge_midpoint_sphere = (4066.0f64.sqrt() / 57.0) * Vec3::new(1.0, 0.0, 1.0);
    let cone = [
        sector_halfspace(&facet_center, &corner, &edge_midpoint),
        sector_halfspace(&edge_crossing, &edge_midpoint, &facet_center),
        sector_halfspace(&facet_center, &edge_midpoint, &corner),
    ];
    let rays = cone_rays(&cone);
    FundamentalDomain {
        name: "octahedral-sector".into(),
        body_name: "O".into(),
        cone: cone.to_vec(),
        rays,
        landmarks: vec![
            ("facet-center".into(), facet_center),
            ("facet-center-on-sphere".into(), facet_center_sphere),
            ("facet-sphere-corner".into(), corner),
            ("edge-sphere-crossing".into(), edge_crossing),
            ("edge-midpoint".into(), edge_midpoint),
            ("edge-midpoint-on-sphere".into(), edge_midpoint_sphere),
        ],
        expected_minimizer: corner,
    }
}

/// Sector of the cuboctahedral minimization domain.
pub fn cuboctahedral_domain() -> FundamentalDomain {
    let s3 = 3.0f64.sqrt();
    let square_center = Vec3::new(2.0, 0.0, 0.0);
    let square_center_sphere = Vec3::new(2.0 * 830.0f64.sqrt() / 21.0, 0.0, 0.0);
    let edge_midpoint = Vec3::new(2.0, 1.0, 1.0);
    let w = (415.0f64 / 3.0).sqrt() / 21.0;
    let edge_midpoint_sphere = Vec3::new(4.0 * w, 2.0 * w, 2.0 * w);
    let triangle_center = Vec3::new(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);
    let tcs = 2.0 * (830.0f64 / 3.0).sqrt() / 21.0;
    let triangle_center_sphere = Vec3::new(tcs, tcs, tcs);
    let triangle_sphere_point = Vec3::new(
        4.0 / 3.0 + 22.0 * s3 / 63.0,
        4.0 / 3.0 - 44.0 * s3 / 63.0,
        4.0 / 3.0 + 22.0 * s3 / 63.0,
    );
    let edge_crossing = Vec3::new(
        2.0,
        1.0 - 337.0f64.sqrt() / 21.0,
        1.0 + 337.0f64.sqrt() / 21.0,
    );
    let square_sphere_point = Vec3::new(2.0, 0.0, 2.0 * 389.0f64.sqrt() / 21.0);
    let cone = [
        sector_halfspace(&square_center, &edge_midpoint, &triangle_sphere_point),
        sector_halfspace(&triangle_center, &triangle_sphere_point, &square_center),
        sector_halfspace(&square_center, &triangle_sphere_point, &edge_midpoint),
    ];
    let rays = cone_rays(&cone);
    FundamentalDomain {
        name: "cuboctahedral-sector".into(),
        body_name: "C".into(),
        cone: cone.to_vec(),
        rays,
        landmarks: vec![
            ("square-center".into(), square_center),
            ("square-center-on-sphere".into(), square_center_sphere),
            ("edge-midpoint".into(), edge_midpoint),
            ("edge-midpoint-on-sphere".into(), edge_midpoint_sphere),
            ("triangle-center".into(), triangle_center),
            ("triangle-center-on-sphere".into(), triangle_center_sphere),
            ("triangle-sphere-point".into(), triangle_sphere_point),
            ("edge-sphere-crossing".into(), edge_crossing),
            ("square-sphere-point".into(), square_sphere_point),
        ],
        expected_minimizer: triangle_center_sphere,
    }
}

/// Result of the section-area minimization over a fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuMinimum {
    pub mu: f64,
    pub minimizer: Vec3,
    /// Whether the minimizer matched the domain's expected location
    /// within 1e-3.
    pub matches_expected: bool,
    /// Number of boundary samples evaluated before refinement.
    pub samples: usize,
}

const MU_GRID: usize = 140; // (141 * 142) / 2 = 10011 directions >= 1e4

/// Minimal section area of `body + x` on the sphere of radius `rho` over
/// `x` in the domain shell (outside the doubled body, inside the colony
/// of the ball truncater, within the sector cone).
///
/// Along any fixed ray the section area is single-humped in the radius,
/// so the ray minimum sits at one of the two shell boundaries; the search
/// therefore samples both boundary surfaces over a barycentric direction
/// grid and refines each winner by coordinate descent on the direction
/// weights with steps shrinking to 1e-7.
pub fn mu_min(
    body: &Body,
    t: &Truncater,
    rho: f64,
    domain: &FundamentalDomain,
) -> Result<MuMinimum, BoundError> {
    let r = match t {
        Truncater::Ball { r } => *r,
        Truncater::PlanarBox { .. } => return Err(BoundError::NonBallTruncater),
    };
    if body.name != domain.body_name {
        return Err(BoundError::DomainBodyMismatch {
            expected: domain.body_name.clone(),
            got: body.name.clone(),
        });
    }
    if body.polytope().is_none() {
        return Err(BoundError::UnsupportedBody(body.name.clone()));
    }
    let two_r = 2.0 * r;

    let weights: Vec<[f64; 3]> = {
        let mut w = Vec::new();
        for iu in 0..=MU_GRID {
            for iv in 0..=(MU_GRID - iu) {
                let u = iu as f64 / MU_GRID as f64;
                let v = iv as f64 / MU_GRID as f64;
                w.push([u, v, 1.0 - u - v]);
            }
        }
        w
    };
    let samples = weights.len();

    let evaluate = |w: &[f64; 3], inner: bool| -> Option<(f64, Vec3)> {
        surface_point(body, domain, two_r, w, inner)
            .and_then(|x| sphere_body_section_area(body, &x, rho).ok().map(|a| (a, x)))
    };

    let best = |inner: bool| -> Option<(f64, Vec3, [f64; 3])> {
        weights
            .par_iter()
            .enumerate()
            .filter_map(|(idx, w)| evaluate(w, inner).map(|(a, x)| (a, idx, x, *w)))
            .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite areas"))
            .map(|(a, _, x, w)| (a, x, w))
    };

    // refinement seeds: the best grid sample per boundary surface, plus
    // the domain's landmark points, which are exactly the distinguished
    // corner and edge candidates where a shell minimum can hide from a
    // surface-interior descent
    let mut seeds: Vec<([f64; 3], bool, f64, Vec3)> = Vec::new();
    for inner in [false, true] {
        if let Some((area, x, w)) = best(inner) {
            seeds.push((w, inner, area, x));
        }
    }
    let ray_basis = nalgebra::Matrix3::from_columns(&domain.rays);
    if let Some(inv) = ray_basis.try_inverse() {
        for (_, p) in &domain.landmarks {
            if p.norm() <= 1e-12 {
                continue;
            }
            let bary = inv * (p / p.norm());
            if bary.min() < -1e-9 {
                continue; // landmark outside this sector
            }
            let mut w = [bary.x.max(0.0), bary.y.max(0.0), bary.z.max(0.0)];
            let sum: f64 = w.iter().sum();
            for c in &mut w {
                *c /= sum;
            }
            for inner in [false, true] {
                if let Some((area, x)) = evaluate(&w, inner) {
                    seeds.push((w, inner, area, x));
                }
            }
        }
    }

    let mut winner: Option<(f64, Vec3)> = None;
    for (w, inner, area, x) in seeds {
        let refined = refine_weights(w, area, x, |w| evaluate(w, inner));
        if winner.map_or(true, |best| refined.0 < best.0) {
            winner = Some(refined);
        }
    }
    let (mu, minimizer) = winner.ok_or(BoundError::EmptyDomain)?;
    if !(mu > 0.0) {
        return Err(BoundError::NonpositiveMu(mu));
    }
    Ok(MuMinimum {
        mu,
        minimizer,
        matches_expected: (minimizer - domain.expected_minimizer).norm() <= 1e-3,
        samples,
    })
}

/// Boundary-surface point of the domain along the direction with
/// barycentric ray weights `w`: the outer point on the colony sphere, or
/// the inner point on the doubled body.
fn surface_point(
    body: &Body,
    domain: &FundamentalDomain,
    two_r: f64,
    w: &[f64; 3],
    inner: bool,
) -> Option<Vec3> {
    if w.iter().any(|&wi| wi < 0.0) {
        return None;
    }
    let d = w[0] * domain.rays[0] + w[1] * domain.rays[1] + w[2] * domain.rays[2];
    let n = d.norm();
    if n <= 1e-12 {
        return None;
    }
    let dir = d / n;
    let g = body.gauge(&dir)?;
    if g <= 1e-12 {
        return None;
    }
    let t_inner = 2.0 / g; // radius where the ray exits the doubled body
    if t_inner > two_r * (1.0 + 1e-12) {
        return None; // the shell is empty along this ray
    }
    Some(if inner { t_inner * dir } else { two_r * dir })
}

/// Coordinate descent on the barycentric ray weights with shrinking step.
/// Moves perturb one weight and renormalize, so every face of the weight
/// simplex is invariant under moves in its spanning coordinates and the
/// search can slide along cone faces instead of stalling against them.
fn refine_weights(
    mut w: [f64; 3],
    mut area: f64,
    mut point: Vec3,
    eval: impl Fn(&[f64; 3]) -> Option<(f64, Vec3)>,
) -> (f64, Vec3) {
    let mut h = 0.02;
    while h >= 1e-7 {
        let mut improved = false;
        'moves: for k in 0..3 {
            for delta in [h, -h] {
                let mut cand = w;
                cand[k] = (cand[k] + delta).max(0.0);
                let sum: f64 = cand.iter().sum();
                if sum <= 1e-12 {
                    continue;
                }
                for c in &mut cand {
                    *c /= sum;
                }
                if cand == w {
                    continue;
                }
                if let Some((a, x)) = eval(&cand) {
                    if a < area {
                        area = a;
                        point = x;
                        w = cand;
                        improved = true;
                        break 'moves;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (area, point)
}

/// Cap bound with the domain-minimal section area in place of the
/// congruent-cap area: the sections are no longer congruent, so only the
/// plain area ratio applies.
#[derive(Debug, Clone)]
pub struct RefinedCapBound {
    pub bound: u64,
    pub value: f64,
    pub mu: MuMinimum,
}

pub fn refined_cap_bound(
    body: &Body,
    t: &Truncater,
    rho: f64,
    domain: &FundamentalDomain,
) -> Result<RefinedCapBound, BoundError> {
    let mu = mu_min(body, t, rho, domain)?;
    let cb = cap_bound(rho, mu.mu)?;
    Ok(RefinedCapBound { bound: cb.plain, value: cb.plain_value, mu })
}

// --- Reach and neighbor-count bounds --------------------------------------------

/// Volume of the convex hull of the unit ball and a point at distance
/// `reach` from its center: `(pi / 3) (reach + 2 + 1 / reach)`.
pub fn ball_point_hull_volume(reach: f64) -> f64 {
    assert!(reach > 1.0, "the point must be outside the ball");
    PI / 3.0 * (reach + 2.0 + 1.0 / reach)
}

/// The inequality certifying a reach bound `phi` for normalized bodies: a
/// cell stretched to distance `phi / 2` would contain the hull of the
/// unit ball and that far point, forcing the density below the lattice
/// floor. Returns the density value of the stretched cell and whether it
/// clears the floor.
pub fn reach_certificate(phi: f64) -> (f64, bool) {
    let value = 8.0 / ball_point_hull_volume(phi / 2.0);
    (value, value < LATTICE_DENSITY_FLOOR)
}

/// Reach and neighbor-count report for a body: the generic constants for
/// arbitrary normalized bodies, or the sharper stated constants for the
/// octahedron and the cuboctahedron.
pub fn tau_and_m_bounds(body: &Body) -> BoundReport {
    let (value, holds) = reach_certificate(GENERIC_REACH);
    let mut values = BTreeMap::new();
    let mut intermediates = BTreeMap::new();
    let (tau, m) = match body.name.as_str() {
        "O" | "C" => (OCTAHEDRAL_REACH, 11u64.pow(3)),
        _ => (GENERIC_REACH, 26u64.pow(3)),
    };
    values.insert("tauBound".into(), tau);
    values.insert("mBound".into(), m as f64);
    intermediates.insert("reachInequalityValue".into(), value);
    intermediates.insert("reachInequalityHolds".into(), if holds { 1.0 } else { 0.0 });
    intermediates.insert("latticeDensityFloor".into(), LATTICE_DENSITY_FLOOR);
    intermediates.insert("maxNormalizedVolume".into(), 8.0);
    BoundReport {
        body: body.name.clone(),
        truncater: None,
        values,
        intermediates,
    }
}

// --- Reports ----------------------------------------------------------------------

/// Named bound values with all auditable intermediates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub body: String,
    pub truncater: Option<Truncater>,
    pub values: BTreeMap<String, f64>,
    pub intermediates: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Inradius of a polytope: minimal origin distance over facet planes.
fn inradius(p: &Polytope) -> f64 {
    p.halfspaces
        .iter()
        .map(|h| h.offset / h.normal.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Full bound report for a catalog body. The octahedron and the
/// cuboctahedron get the complete truncater pipeline (Steiner count, cap
/// bound, refined cap bound); other bodies report the reach constants
/// only.
pub fn bound_report(body: &Body) -> Result<BoundReport, BoundError> {
    let mut report = tau_and_m_bounds(body);
    let (t, rho, near, domain) = match body.name.as_str() {
        "O" => (
            Truncater::ball(octahedral_truncater_radius()),
            octahedral_sphere_radius(),
            2.0 / 3.0f64.sqrt(),
            octahedral_domain(),
        ),
        "C" => (
            Truncater::ball(cuboctahedral_truncater_radius()),
            cuboctahedral_sphere_radius(),
            2.0,
            cuboctahedral_domain(),
        ),
        _ => return Ok(report),
    };
    let r = match t {
        Truncater::Ball { r } => r,
        Truncater::PlanarBox { .. } => unreachable!("constructed as a ball"),
    };
    let poly = body
        .polytope()
        .ok_or_else(|| BoundError::UnsupportedBody(body.name.clone()))?;
    let s = inradius(poly);

    let steiner = steiner_neighbor_bound(&t, body)?;
    let parallel = body.parallel_volume(2.0 * r)?;
    let vol = body.volume.ok_or(BoundError::MissingSteinerData)?;
    let cap_area = sphere_cap_section(s, &Vec3::new(near, 0.0, 0.0), rho)?;
    let cb = cap_bound(rho, cap_area)?;
    let refined = refined_cap_bound(body, &t, rho, &domain)?;

    report.truncater = Some(t);
    report.values.insert("steinerBound".into(), steiner as f64);
    report.values.insert("capBound".into(), cb.congruent as f64);
    report
        .values
        .insert("refinedCapBound".into(), refined.bound as f64);
    report.values.insert("muValue".into(), refined.mu.mu);
    report.values.insert("rhoUsed".into(), rho);

    let im = &mut report.intermediates;
    im.insert("truncaterRadius".into(), r);
    im.insert("colonyRadius".into(), 2.0 * r);
    im.insert("bodyVolume".into(), vol);
    im.insert("parallelBodyVolume".into(), parallel);
    im.insert("steinerRatio".into(), parallel / vol - 1.0);
    im.insert("inscribedBallRadius".into(), s);
    im.insert("nearestTranslateDistance".into(), near);
    im.insert("inscribedCapArea".into(), cap_area);
    im.insert("sphereSurfaceArea".into(), 4.0 * PI * rho * rho);
    im.insert("capDensityLimit".into(), CAP_DENSITY_LIMIT);
    im.insert("capBoundValue".into(), cb.congruent_value);
    im.insert("refinedCapBoundValue".into(), refined.value);
    im.insert("muMinimizerX".into(), refined.mu.minimizer.x);
    im.insert("muMinimizerY".into(), refined.mu.minimizer.y);
    im.insert("muMinimizerZ".into(), refined.mu.minimizer.z);
    im.insert(
        "muMatchesExpected".into(),
        if refined.mu.matches_expected { 1.0 } else { 0.0 },
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use approx::assert_relative_eq;

    fn oct_minimizer() -> Vec3 {
        Vec3::new(
            2.0 / 3.0 - 10.0 / (3.0 * 57.0f64.sqrt()),
            2.0 / 3.0 - 10.0 / (3.0 * 57.0f64.sqrt()),
            2.0 / 3.0 + 20.0 / (3.0 * 57.0f64.sqrt()),
        )
    }

    fn cub_minimizer() -> Vec3 {
        let t = 2.0 * (830.0f64 / 3.0).sqrt() / 21.0;
        Vec3::new(t, t, t)
    }

    #[test]
    fn radii_match_their_closed_forms() {
        assert_relative_eq!(
            octahedral_truncater_radius(),
            0.7910316012347716,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            cuboctahedral_truncater_radius(),
            1.3718914562750413,
            epsilon = 1e-15
        );
        assert_relative_eq!(octahedral_sphere_radius(), 1.4697423464590376, epsilon = 1e-12);
        assert_relative_eq!(
            cuboctahedral_sphere_radius(),
            2.5470700471522500,
            epsilon = 1e-12
        );
    }

    #[test]
    fn equal_cap_radius_equalizes_recomputed_cap_areas() {
        // recompute each probe radius by bisecting on the actual area
        // difference instead of trusting the closed form
        for (near, far, s) in [
            (2.0 / 3.0f64.sqrt(), 2.0 * octahedral_truncater_radius(), 1.0 / 3.0f64.sqrt()),
            (2.0, 2.0 * cuboctahedral_truncater_radius(), 1.0),
        ] {
            let diff = |rho: f64| {
                sphere_cap_section(s, &Vec3::new(near, 0.0, 0.0), rho).unwrap()
                    - sphere_cap_section(s, &Vec3::new(far, 0.0, 0.0), rho).unwrap()
            };
            // bracket tightly around the claimed root so both caps stay
            // nonempty at the bracket ends
            let claimed = equal_cap_sphere_radius(near, far, s);
            let (mut lo, mut hi) = (claimed * 0.99, claimed * 1.01);
            assert!(diff(lo) * diff(hi) < 0.0, "bracket must straddle the root");
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if diff(lo) * diff(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let solved = 0.5 * (lo + hi);
            assert_relative_eq!(solved, equal_cap_sphere_radius(near, far, s), epsilon = 1e-9);
        }
    }

    #[test]
    fn ball_colony_is_the_doubled_ball() {
        let t = Truncater::ball(0.7910316012347716);
        let c = colony(&t);
        for dir in fibonacci_directions(200) {
            assert_relative_eq!(c.scale(&dir), 2.0 * 0.7910316012347716, epsilon = 1e-12);
        }
        assert!(colony_superset_deficit(&t, 1000).abs() <= 1e-9);
    }

    #[test]
    fn box_colony_matches_the_piecewise_closed_form() {
        let k = 1.0;
        let t = Truncater::planar_box(k);
        let c = colony(&t);
        // corner of the unit box: the closed form gives exactly 2
        assert_relative_eq!(box_boundary_scale(k, 1.0, 1.0), 2.0, epsilon = 1e-15);
        // closed form against the support route at boundary samples
        for i in 0..50 {
            let x = -k + 2.0 * k * (i as f64 + 0.5) / 50.0;
            let p = Vec3::new(x, 1.0, 0.0);
            let expected = box_boundary_scale(k, x, 1.0) * p.norm();
            assert_relative_eq!(c.scale(&p), expected, epsilon = 1e-12);
            let y = -1.0 + 2.0 * (i as f64 + 0.5) / 50.0;
            let q = Vec3::new(k, y, 0.0);
            let expected = box_boundary_scale(k, k, y) * q.norm();
            assert_relative_eq!(c.scale(&q), expected, epsilon = 1e-12);
        }
        // the doubled box stays inside its colony, strictly off the axes
        assert!(colony_superset_deficit(&t, 1000) <= 1e-12);
        let corner = Vec3::new(1.0, 1.0, 0.0);
        assert!(c.scale(&corner) > 2.0 * corner.norm() / t.gauge(&corner) - 2.0 + 0.5);
    }

    #[test]
    fn nested_truncaters_have_nested_colonies() {
        let small = colony(&Truncater::ball(0.5));
        let large = colony(&Truncater::ball(0.8));
        let bsmall = colony(&Truncater::planar_box(1.0));
        let blarge = colony(&Truncater::planar_box(1.5));
        for dir in fibonacci_directions(300) {
            assert!(small.scale(&dir) <= large.scale(&dir) + 1e-12);
            let planar = Vec3::new(dir.x, dir.y, 0.0);
            if planar.norm() > 1e-6 {
                assert!(bsmall.scale(&planar) <= blarge.scale(&planar) + 1e-12);
            }
        }
    }

    #[test]
    fn steiner_bounds_reproduce_the_printed_counts() {
        let o = catalog("O").unwrap();
        let c = catalog("C").unwrap();
        let t1 = Truncater::ball(octahedral_truncater_radius());
        let t2 = Truncater::ball(cuboctahedral_truncater_radius());
        assert_eq!(steiner_neighbor_bound(&t1, &o).unwrap(), 40);
        assert_eq!(steiner_neighbor_bound(&t2, &c).unwrap(), 39);
        // the pre-floor ratios behind the counts
        let ratio_o = o.parallel_volume(2.0 * octahedral_truncater_radius()).unwrap()
            / o.volume.unwrap()
            - 1.0;
        let ratio_c = c.parallel_volume(2.0 * cuboctahedral_truncater_radius()).unwrap()
            / c.volume.unwrap()
            - 1.0;
        assert_relative_eq!(ratio_o, 40.268019810143333, epsilon = 1e-9);
        assert_relative_eq!(ratio_c, 39.076592671373560, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_and_invalid_steiner_inputs() {
        let o = catalog("O").unwrap();
        assert_eq!(steiner_neighbor_bound(&Truncater::ball(0.0), &o).unwrap(), 0);
        assert!(matches!(
            steiner_neighbor_bound(&Truncater::planar_box(1.0), &o),
            Err(BoundError::NonBallTruncater)
        ));
        let counts = catalog("rhombic-dodecahedron").unwrap();
        assert!(matches!(
            steiner_neighbor_bound(&Truncater::ball(1.0), &counts),
            Err(BoundError::MissingSteinerData)
        ));
    }

    fn closed_cap_region(rho: f64, c: f64) -> SphericalRegion {
        // region { z >= c } stored as the containing halfspace -z <= -c
        let rad = (rho * rho - c * c).sqrt();
        let e = Vec3::new(rad, 0.0, c);
        SphericalRegion {
            sphere_radius: rho,
            arcs: vec![RegionArc {
                plane: HalfSpace::new(Vec3::new(0.0, 0.0, -1.0), -c),
                endpoints: [e, e],
                small_cap_side: c > 0.0,
            }],
            corner_angles: vec![],
        }
    }

    #[test]
    fn gauss_bonnet_reproduces_closed_caps() {
        let rho = 1.7;
        assert_relative_eq!(
            gauss_bonnet_area(&closed_cap_region(rho, 0.0)).unwrap(),
            2.0 * PI * rho * rho,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            gauss_bonnet_area(&closed_cap_region(rho, rho / 2.0)).unwrap(),
            PI * rho * rho,
            epsilon = 1e-12
        );
        // region on the big-cap side: { z <= c } for c > 0
        let c = rho / 2.0;
        let rad = (rho * rho - c * c).sqrt();
        let e = Vec3::new(rad, 0.0, c);
        let big = SphericalRegion {
            sphere_radius: rho,
            arcs: vec![RegionArc {
                plane: HalfSpace::new(Vec3::new(0.0, 0.0, 1.0), c),
                endpoints: [e, e],
                small_cap_side: false,
            }],
            corner_angles: vec![],
        };
        assert_relative_eq!(
            gauss_bonnet_area(&big).unwrap(),
            3.0 * PI * rho * rho,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gauss_bonnet_measures_the_octant() {
        let ex = Vec3::new(1.0, 0.0, 0.0);
        let ey = Vec3::new(0.0, 1.0, 0.0);
        let ez = Vec3::new(0.0, 0.0, 1.0);
        let arc = |axis: Vec3, from: Vec3, to: Vec3| RegionArc {
            plane: HalfSpace::new(-axis, 0.0),
            endpoints: [from, to],
            small_cap_side: true, // great circle: either value accepted
        };
        let region = SphericalRegion {
            sphere_radius: 1.0,
            arcs: vec![arc(ez, ex, ey), arc(ex, ey, ez), arc(ey, ez, ex)],
            corner_angles: vec![PI / 2.0; 3],
        };
        assert_relative_eq!(gauss_bonnet_area(&region).unwrap(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gauss_bonnet_rejects_malformed_regions() {
        let mut region = closed_cap_region(1.0, 0.5);
        region.corner_angles = vec![7.0];
        assert!(matches!(
            gauss_bonnet_area(&region),
            Err(BoundError::AngleOutOfRange(_))
        ));
        let ex = Vec3::new(1.0, 0.0, 0.0);
        let ey = Vec3::new(0.0, 1.0, 0.0);
        let ez = Vec3::new(0.0, 0.0, 1.0);
        let arc = |axis: Vec3, from: Vec3, to: Vec3| RegionArc {
            plane: HalfSpace::new(-axis, 0.0),
            endpoints: [from, to],
            small_cap_side: true,
        };
        // broken chain: second arc starts away from the first arc's end
        let region = SphericalRegion {
            sphere_radius: 1.0,
            arcs: vec![arc(ez, ex, ey), arc(ex, ez, ey), arc(ey, ez, ex)],
            corner_angles: vec![PI / 2.0; 3],
        };
        assert!(matches!(
            gauss_bonnet_area(&region),
            Err(BoundError::SelfIntersecting)
        ));
    }

    #[test]
    fn inscribed_ball_caps_match_their_closed_forms() {
        let rho1 = octahedral_sphere_radius();
        let r1 = octahedral_truncater_radius();
        let s1 = 1.0 / 3.0f64.sqrt();
        let near = sphere_cap_section(s1, &Vec3::new(2.0 * s1, 0.0, 0.0), rho1).unwrap();
        assert_relative_eq!(
            near,
            2.0 * PI * rho1 * (rho1 - r1 - s1),
            epsilon = 1e-12
        );
        assert_relative_eq!(near, 0.9360298900634232, epsilon = 1e-12);
        let far = sphere_cap_section(s1, &Vec3::new(2.0 * r1, 0.0, 0.0), rho1).unwrap();
        assert_relative_eq!(near, far, epsilon = 1e-12);

        let rho2 = cuboctahedral_sphere_radius();
        let r2 = cuboctahedral_truncater_radius();
        let near = sphere_cap_section(1.0, &Vec3::new(2.0, 0.0, 0.0), rho2).unwrap();
        assert_relative_eq!(
            near,
            2.0 * PI * rho2 * (rho2 - r2 - 1.0),
            epsilon = 1e-12
        );
        assert_relative_eq!(near, 2.8035079090697640, epsilon = 1e-12);
        let far = sphere_cap_section(1.0, &Vec3::new(2.0 * r2, 0.0, 0.0), rho2).unwrap();
        assert_relative_eq!(near, far, epsilon = 1e-12);
    }

    #[test]
    fn cap_sections_handle_misses_and_containment() {
        assert!(matches!(
            sphere_cap_section(0.5, &Vec3::new(10.0, 0.0, 0.0), 1.0),
            Err(BoundError::EmptySection)
        ));
        // tiny probe sphere inside a large ball translate
        let area = sphere_cap_section(5.0, &Vec3::new(0.1, 0.0, 0.0), 0.2).unwrap();
        assert_relative_eq!(area, 4.0 * PI * 0.04, epsilon = 1e-12);
    }

    #[test]
    fn polytope_sections_match_the_quadrature_oracle() {
        let o = catalog("O").unwrap();
        let rho1 = octahedral_sphere_radius();
        let x = oct_minimizer();
        let gb = sphere_body_section_area(&o, &x, rho1).unwrap();
        let mesh = sphere_body_section_area_mesh(&o, &x, rho1, 600).unwrap();
        assert_relative_eq!(gb, mesh, max_relative = 5e-3);

        let c = catalog("C").unwrap();
        let rho2 = cuboctahedral_sphere_radius();
        let y = cub_minimizer();
        let gb = sphere_body_section_area(&c, &y, rho2).unwrap();
        let mesh = sphere_body_section_area_mesh(&c, &y, rho2, 600).unwrap();
        assert_relative_eq!(gb, mesh, max_relative = 5e-3);
    }

    #[test]
    fn section_areas_at_the_claimed_minimizers_are_pinned() {
        let o = catalog("O").unwrap();
        let c = catalog("C").unwrap();
        let mu1 = sphere_body_section_area(&o, &oct_minimizer(), octahedral_sphere_radius())
            .unwrap();
        let mu2 = sphere_body_section_area(&c, &cub_minimizer(), cuboctahedral_sphere_radius())
            .unwrap();
        assert_relative_eq!(mu1, 1.2263497700556843, epsilon = 1e-9);
        assert_relative_eq!(mu2, 3.5875763605564004, epsilon = 1e-9);
        // sanity: no smaller than the inscribed-ball cap at the same rho
        assert!(mu1 >= 0.9360298900634232);
        assert!(mu2 >= 2.8035079090697640);
    }

    #[test]
    fn far_translates_raise_empty_sections() {
        let o = catalog("O").unwrap();
        assert!(matches!(
            sphere_body_section_area(&o, &Vec3::new(30.0, 0.0, 0.0), 1.0),
            Err(BoundError::EmptySection)
        ));
    }

    #[test]
    fn cap_bounds_reproduce_the_printed_counts() {
        let rho1 = octahedral_sphere_radius();
        let cap1 = 0.9360298900634232;
        let cb = cap_bound(rho1, cap1).unwrap();
        assert_relative_eq!(cb.congruent_value, 26.300367143939415, epsilon = 1e-9);
        assert_eq!(cb.congruent, 26);

        let rho2 = cuboctahedral_sphere_radius();
        let cap2 = 2.8035079090697640;
        let cb = cap_bound(rho2, cap2).unwrap();
        assert_relative_eq!(cb.congruent_value, 26.372366674778579, epsilon = 1e-9);
        assert_eq!(cb.congruent, 26);

        // a single cap covering the sphere bounds the count by zero
        let full = cap_bound(rho1, 4.0 * PI * rho1 * rho1).unwrap();
        assert_eq!(full.congruent, 0);
        assert_eq!(full.plain, 1);
        assert!(matches!(cap_bound(1.0, 0.0), Err(BoundError::NonpositiveMu(_))));
    }

    #[test]
    fn domains_reduce_to_coordinate_cones() {
        let f1 = octahedral_domain();
        // the octahedral sector is { y >= 0, x >= y, z >= x }; skip
        // directions within rounding distance of a cone face
        for dir in fibonacci_directions(500) {
            let margin = dir.y.min(dir.x - dir.y).min(dir.z - dir.x);
            if margin.abs() <= 1e-9 {
                continue;
            }
            assert_eq!(f1.contains_direction(&dir, 0.0), margin > 0.0, "direction {dir:?}");
        }
        let f2 = cuboctahedral_domain();
        let p = 4.0 / 3.0 + 22.0 * 3.0f64.sqrt() / 63.0;
        let q = 4.0 / 3.0 - 44.0 * 3.0f64.sqrt() / 63.0;
        for dir in fibonacci_directions(500) {
            let margin = (dir.z - dir.y)
                .min(dir.x - dir.z)
                .min(p * dir.y - q * dir.z);
            if margin.abs() <= 1e-9 {
                continue;
            }
            assert_eq!(f2.contains_direction(&dir, 0.0), margin > 0.0, "direction {dir:?}");
        }
    }

    #[test]
    fn domain_landmarks_sit_on_their_surfaces() {
        let o = catalog("O").unwrap();
        let c = catalog("C").unwrap();
        let two_r1 = 2.0 * octahedral_truncater_radius();
        let two_r2 = 2.0 * cuboctahedral_truncater_radius();
        for (name, p) in &octahedral_domain().landmarks {
            let on_body = (o.gauge(p).unwrap() - 2.0).abs() <= 1e-12;
            let on_sphere = (p.norm() - two_r1).abs() <= 1e-12;
            assert!(on_body || on_sphere, "landmark {name} is on neither surface");
        }
        for (name, p) in &cuboctahedral_domain().landmarks {
            let on_body = (c.gauge(p).unwrap() - 2.0).abs() <= 1e-12;
            let on_sphere = (p.norm() - two_r2).abs() <= 1e-12;
            assert!(on_body || on_sphere, "landmark {name} is on neither surface");
        }
        // the claimed minimizers lie inside their sectors
        let f1 = octahedral_domain();
        assert!(f1.contains_direction(&f1.expected_minimizer, 1e-9));
        let f2 = cuboctahedral_domain();
        assert!(f2.contains_direction(&f2.expected_minimizer, 1e-9));
    }

    #[test]
    fn mu_min_finds_the_claimed_minimizers() {
        let o = catalog("O").unwrap();
        let t1 = Truncater::ball(octahedral_truncater_radius());
        let m1 = mu_min(&o, &t1, octahedral_sphere_radius(), &octahedral_domain()).unwrap();
        assert!(m1.samples >= 10_000);
        assert!(m1.matches_expected, "minimizer {:?}", m1.minimizer);
        assert!(m1.mu >= 1.2263497700556843 - 1e-9);
        assert!(m1.mu <= 1.2263497700556843 + 5e-5, "mu1 {}", m1.mu);

        let c = catalog("C").unwrap();
        let t2 = Truncater::ball(cuboctahedral_truncater_radius());
        let m2 = mu_min(&c, &t2, cuboctahedral_sphere_radius(), &cuboctahedral_domain()).unwrap();
        assert!(m2.matches_expected, "minimizer {:?}", m2.minimizer);
        assert!(m2.mu >= 3.5875763605564004 - 1e-9);
        assert!(m2.mu <= 3.5875763605564004 + 1e-6, "mu2 {}", m2.mu);
    }

    #[test]
    fn mu_min_rejects_mismatched_bodies() {
        let c = catalog("C").unwrap();
        let t1 = Truncater::ball(octahedral_truncater_radius());
        assert!(matches!(
            mu_min(&c, &t1, octahedral_sphere_radius(), &octahedral_domain()),
            Err(BoundError::DomainBodyMismatch { .. })
        ));
        let o = catalog("O").unwrap();
        assert!(matches!(
            mu_min(&o, &Truncater::planar_box(1.0), 1.0, &octahedral_domain()),
            Err(BoundError::NonBallTruncater)
        ));
    }

    #[test]
    fn refined_cap_bounds_reach_twenty_two() {
        let o = catalog("O").unwrap();
        let t1 = Truncater::ball(octahedral_truncater_radius());
        let rb1 = refined_cap_bound(&o, &t1, octahedral_sphere_radius(), &octahedral_domain())
            .unwrap();
        assert_eq!(rb1.bound, 22);
        assert_relative_eq!(rb1.value, 22.134918368431455, max_relative = 1e-9);

        let c = catalog("C").unwrap();
        let t2 = Truncater::ball(cuboctahedral_truncater_radius());
        let rb2 =
            refined_cap_bound(&c, &t2, cuboctahedral_sphere_radius(), &cuboctahedral_domain())
                .unwrap();
        assert_eq!(rb2.bound, 22);
        assert_relative_eq!(rb2.value, 22.724298621093525, max_relative = 1e-9);
    }

    #[test]
    fn weaker_congruent_cap_input_reduces_to_the_unrefined_bound() {
        let cb = cap_bound(octahedral_sphere_radius(), 0.9360298900634232).unwrap();
        assert_eq!(cb.congruent, 26);
    }

    #[test]
    fn hull_volume_identity_against_the_cap_cone_decomposition() {
        for reach in [2.0, 7.0, 12.15] {
            // ball minus the cap beyond the tangency circle, plus the
            // tangent cone from the far point
            let cap_height = 1.0 - 1.0 / reach;
            let cap = PI * cap_height * cap_height * (3.0 - cap_height) / 3.0;
            let base = 1.0 - 1.0 / (reach * reach);
            let cone = PI / 3.0 * base * (reach - 1.0 / reach);
            let decomposed = 4.0 * PI / 3.0 - cap + cone;
            assert_relative_eq!(
                ball_point_hull_volume(reach),
                decomposed,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn reach_certificate_clears_the_density_floor() {
        let (value, holds) = reach_certificate(GENERIC_REACH);
        assert_relative_eq!(value, 0.5367674120556513, epsilon = 1e-12);
        assert!(holds);
        // a far smaller reach fails the certificate
        let (_, holds) = reach_certificate(3.0);
        assert!(!holds);
    }

    #[test]
    fn reach_reports_carry_the_stated_constants() {
        let o = catalog("O").unwrap();
        let q = catalog("Q").unwrap();
        let ro = tau_and_m_bounds(&o);
        assert_eq!(ro.values["tauBound"], 10.0);
        assert_eq!(ro.values["mBound"], 1331.0);
        let rq = tau_and_m_bounds(&q);
        assert_eq!(rq.values["tauBound"], 24.3);
        assert_eq!(rq.values["mBound"], 17576.0);
    }

    #[test]
    fn full_report_round_trips_and_carries_every_value() {
        let o = catalog("O").unwrap();
        let report = bound_report(&o).unwrap();
        for key in [
            "tauBound",
            "mBound",
            "steinerBound",
            "capBound",
            "refinedCapBound",
            "muValue",
            "rhoUsed",
        ] {
            assert!(report.values.contains_key(key), "missing {key}");
        }
        assert_eq!(report.values["steinerBound"], 40.0);
        assert_eq!(report.values["capBound"], 26.0);
        assert_eq!(report.values["refinedCapBound"], 22.0);
        assert_eq!(report.intermediates["muMatchesExpected"], 1.0);
        let json = report.to_json();
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values, report.values);
        assert_eq!(back.truncater, report.truncater);
    }

    #[test]
    fn truncater_serialization_is_tagged() {
        let t = Truncater::ball(0.5);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"kind":"ball","r":0.5}"#);
        let b: Truncater = serde_json::from_str(r#"{"kind":"box","k":2.0}"#).unwrap();
        assert_eq!(b, Truncater::planar_box(2.0));
    }
}
