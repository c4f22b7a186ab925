//! Helpers shared by the integration suites: an exhaustive triangulation
//! counter, a meridian-scan section-area oracle, random packing
//! generation, and exact point-to-polytope distance. Each suite compiles
//! its own copy, so unused items are expected.
#![allow(dead_code)]

use packing_core::catalog::Body;
use packing_core::cell::{build_cell, check_packing, LocalCell, PointConfig};
use packing_core::graph::{canonical_form, matrix_to_graph, AdjMatrix};
use packing_core::{Polytope, Vec3};
use rand::Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;

/// Exhaustive count of isomorphism classes of triangulations on `n`
/// vertices: depth-first search over all edge subsets of size `3n - 6`,
/// with degree and triangle prefilters, certifying survivors as sphere
/// triangulations and deduplicating by canonical form. Independent of the
/// vertex-splitting enumerator; exponential, intended for `n <= 8`.
pub fn brute_force_triangulation_count(n: usize) -> usize {
    assert!((4..=8).contains(&n), "oracle is sized for 4..=8 vertices");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let target = 3 * n - 6;
    // suffix incidence counts: how many candidate edges at index >= idx
    // touch vertex v, for the degree-feasibility prune
    let mut suffix = vec![vec![0usize; n]; pairs.len() + 1];
    for idx in (0..pairs.len()).rev() {
        suffix[idx] = suffix[idx + 1].clone();
        suffix[idx][pairs[idx].0] += 1;
        suffix[idx][pairs[idx].1] += 1;
    }
    let mut classes: BTreeSet<String> = BTreeSet::new();
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(target);
    let mut deg = vec![0usize; n];
    let mut adj = vec![0u16; n];
    dfs_edges(
        n,
        &pairs,
        &suffix,
        target,
        0,
        &mut chosen,
        &mut deg,
        &mut adj,
        &mut classes,
    );
    classes.len()
}

#[allow(clippy::too_many_arguments)]
fn dfs_edges(
    n: usize,
    pairs: &[(usize, usize)],
    suffix: &[Vec<usize>],
    target: usize,
    idx: usize,
    chosen: &mut Vec<(usize, usize)>,
    deg: &mut [usize],
    adj: &mut [u16],
    classes: &mut BTreeSet<String>,
) {
    if chosen.len() == target {
        certify_candidate(n, chosen, deg, adj, classes);
        return;
    }
    if chosen.len() + (pairs.len() - idx) < target {
        return;
    }
    let (a, b) = pairs[idx];
    // take the edge
    chosen.push((a, b));
    deg[a] += 1;
    deg[b] += 1;
    adj[a] |= 1 << b;
    adj[b] |= 1 << a;
    dfs_edges(n, pairs, suffix, target, idx + 1, chosen, deg, adj, classes);
    chosen.pop();
    deg[a] -= 1;
    deg[b] -= 1;
    adj[a] &= !(1u16 << b);
    adj[b] &= !(1u16 << a);
    // skip it, unless that starves an endpoint below degree 3
    if deg[a] + suffix[idx + 1][a] >= 3 && deg[b] + suffix[idx + 1][b] >= 3 {
        dfs_edges(n, pairs, suffix, target, idx + 1, chosen, deg, adj, classes);
    }
}

fn certify_candidate(
    n: usize,
    chosen: &[(usize, usize)],
    deg: &[usize],
    adj: &[u16],
    classes: &mut BTreeSet<String>,
) {
    if deg.iter().any(|&d| d < 3) {
        return;
    }
    // every edge of a triangulation lies in two triangles
    if chosen
        .iter()
        .any(|&(a, b)| (adj[a] & adj[b]).count_ones() < 2)
    {
        return;
    }
    // connectivity by bitmask flood fill
    let mut seen: u16 = 1;
    loop {
        let mut next = seen;
        for v in 0..n {
            if seen & (1 << v) != 0 {
                next |= adj[v];
            }
        }
        if next == seen {
            break;
        }
        seen = next;
    }
    if seen.count_ones() as usize != n {
        return;
    }
    let mut data = vec![vec![0usize; n]; n];
    for v in 0..n {
        data[v][v] = 1;
    }
    for &(a, b) in chosen {
        data[a][b] = 1;
        data[b][a] = 1;
    }
    if let Ok(g) = matrix_to_graph(&AdjMatrix { data }) {
        classes.insert(canonical_form(&g));
    }
}

/// Area of `(body + x) ∩ sphere(0, rho)` by meridian scan in a frame whose
/// pole points along `x`: inside-intervals of the colatitude are located
/// by bracketing on a fine grid and bisecting each crossing, making every
/// strip integral exact in the colatitude; the only discretization is the
/// midpoint rule across strips. Independent of both the Gauss-Bonnet
/// assembly and the latitude-longitude counting mesh.
pub fn meridian_section_area(body: &Body, x: &Vec3, rho: f64) -> f64 {
    let n_phi = 8192usize;
    let k_theta = 512usize;
    // orthonormal frame with e3 along x
    let e3 = if x.norm() > 1e-12 {
        x / x.norm()
    } else {
        Vec3::z()
    };
    let e1 = packing_core::geom::orthogonal_unit(&e3);
    let e2 = e3.cross(&e1);
    let inside = |theta: f64, phi: f64| -> bool {
        let u = theta.sin() * (phi.cos() * e1 + phi.sin() * e2) + theta.cos() * e3;
        let p = rho * u - x;
        body.gauge(&p).map(|g| g <= 1.0).unwrap_or(false)
    };
    let mut total = 0.0;
    for s in 0..n_phi {
        let phi = (s as f64 + 0.5) * 2.0 * PI / n_phi as f64;
        let grid: Vec<f64> = (0..=k_theta)
            .map(|i| PI * i as f64 / k_theta as f64)
            .collect();
        let memb: Vec<bool> = grid.iter().map(|&t| inside(t, phi)).collect();
        // cos(theta) decreases along the scan, so an inside run
        // [t0, t1] contributes cos(t0) - cos(t1) >= 0 exactly
        let mut strip = 0.0;
        let mut run_start: Option<f64> = if memb[0] { Some(0.0) } else { None };
        for i in 0..k_theta {
            if memb[i] != memb[i + 1] {
                let t = bisect_crossing(&inside, grid[i], grid[i + 1], memb[i], phi);
                match run_start.take() {
                    Some(t0) => strip += t0.cos() - t.cos(),
                    None => run_start = Some(t),
                }
            }
        }
        if let Some(t0) = run_start {
            strip += t0.cos() - (-1.0f64);
        }
        total += strip;
    }
    total * rho * rho * 2.0 * PI / n_phi as f64
}

fn bisect_crossing(
    inside: &dyn Fn(f64, f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    lo_inside: bool,
    phi: f64,
) -> f64 {
    for _ in 0..55 {
        let mid = 0.5 * (lo + hi);
        if inside(mid, phi) == lo_inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random packing of `count` translates around the origin: translates are
/// drawn from the gauge shell `[2.05, 3.2]` and the whole draw is rejected
/// until the pairwise packing condition holds and the cell builds.
pub fn random_packing<R: Rng>(body: &Body, count: usize, rng: &mut R) -> (PointConfig, LocalCell) {
    loop {
        let mut points = vec![Vec3::zeros()];
        for _ in 0..count {
            let u = random_unit(rng);
            let scale = rng.gen_range(2.05..3.2);
            let g = body.gauge(&u).expect("coordinate body");
            points.push(u * (scale / g));
        }
        let Ok(cfg) = PointConfig::new(body.clone(), points) else {
            continue;
        };
        if !check_packing(&cfg).is_empty() {
            continue;
        }
        match build_cell(&cfg) {
            Ok(cell) => return (cfg, cell),
            Err(_) => continue,
        }
    }
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Euclidean distance from a point to a convex polytope, by exact
/// projection onto its faces, edges, and vertices.
pub fn dist_to_polytope(q: &Vec3, poly: &Polytope) -> f64 {
    if poly.contains(q, 1e-12) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for v in &poly.vertices {
        best = best.min((q - v).norm());
    }
    for (a, b) in poly.edge_set() {
        let pa = poly.vertices[a];
        let d = poly.vertices[b] - pa;
        let t = (q - pa).dot(&d) / d.norm_squared();
        if t > 0.0 && t < 1.0 {
            best = best.min((q - (pa + t * d)).norm());
        }
    }
    for face in &poly.faces {
        let h = &poly.halfspaces[face.halfspace];
        let nu = h.normal / h.normal.norm();
        let plane_dist = q.dot(&nu) - h.offset / h.normal.norm();
        let proj = q - plane_dist * nu;
        let k = face.cycle.len();
        let in_polygon = (0..k).all(|i| {
            let a = poly.vertices[face.cycle[i]];
            let b = poly.vertices[face.cycle[(i + 1) % k]];
            (b - a).cross(&(proj - a)).dot(&nu) >= -1e-12
        });
        if in_polygon {
            best = best.min(plane_dist.abs());
        }
    }
    best
}

/// Deterministic, roughly uniform unit directions (Fibonacci spiral).
pub fn fib_directions(count: usize) -> Vec<Vec3> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = 2.0 * PI * (i as f64 / golden).fract();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}
