//! Support-function representation of numerical ranges and the convex-region
//! toolkit built on it: sampling W(T) on an angle grid, intersecting regions,
//! Hausdorff gaps between support samples, and scale-persistent corner
//! detection.
//!
//! A region is stored as support samples `h(φ_k)` on a uniform grid of `m`
//! angles together with a convex boundary polyline. For regions sampled from
//! an operator the polyline comes from consecutive support-line intersections
//! (an outer approximation); for regions built from a point cloud it is the
//! convex hull itself.

use ndarray::{Array1, ArrayView2};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::C64;

/// Regions thinner than this across are treated as segments/points; corner
/// and tangency assertions are skipped for them.
pub const DEGENERATE_WIDTH: f64 = 1e-8;

/// Boundary vertices closer than this (relative to scale) are merged before
/// turning angles are measured.
const VERTEX_MERGE_TOL: f64 = 1e-9;

/// A corner must exceed this multiple of the per-step grid angle to be
/// distinguishable from smooth-boundary discretization.
const CORNER_FLOOR_STEPS: f64 = 4.0;

/// Fine-resolution exterior angle must retain this fraction of the coarse one
/// for the corner to count as scale-persistent (smooth arcs halve instead).
const CORNER_PERSISTENCE: f64 = 0.6;

/// Distance from the unit circle below which a corner is *not* flagged as
/// interior.
const INTERIOR_MARGIN: f64 = 1e-4;

pub const MIN_PHI_SAMPLES: usize = 8;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("angle grid must be uniform with an even number ≥ {MIN_PHI_SAMPLES} of samples, got {0}")]
    BadGrid(usize),
    #[error("regions use different angle grids")]
    GridMismatch,
    #[error("intersection of the given regions is empty")]
    EmptyIntersection,
    #[error("no regions given")]
    NoRegions,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Uniform angle grid `φ_k = 2πk/m`, `k = 0..m`.
pub fn phi_grid(m: usize) -> Vec<f64> {
    (0..m).map(|k| std::f64::consts::TAU * k as f64 / m as f64).collect()
}

fn check_grid(m: usize) -> Result<(), RegionError> {
    if m < MIN_PHI_SAMPLES || m % 2 != 0 {
        return Err(RegionError::BadGrid(m));
    }
    Ok(())
}

// ---- support values ----

/// Largest eigenvalue of `(e^{-iφ}T + e^{iφ}T*)/2` and its unit eigenvector.
///
/// The eigenvalue is the support function of W(T) in direction `φ`; the
/// eigenvector `x` realizes it: `Re(e^{-iφ}⟨Tx,x⟩) = h(φ)`.
pub fn support_value(
    t: &ArrayView2<'_, C64>,
    phi: f64,
) -> Result<(f64, Array1<C64>), RegionError> {
    let rot = C64::from_polar(1.0, -phi);
    let b = t.mapv(|z| z * rot);
    let h = (&b + &linalg::adjoint(&b.view())).mapv(|z| z * C64::new(0.5, 0.0));
    let (vals, vecs) = linalg::eigh_ascending(&h.view())?;
    let top = vals.len() - 1;
    Ok((vals[top], vecs.column(top).to_owned()))
}

/// `⟨Tx,x⟩` for a unit vector `x`.
pub fn quadratic_form(t: &ArrayView2<'_, C64>, x: &Array1<C64>) -> C64 {
    let tx = t.dot(x);
    x.iter().zip(tx.iter()).map(|(xi, txi)| xi.conj() * txi).sum()
}

// ---- convex regions ----

/// Convex region given by support samples on a uniform angle grid plus a
/// convex boundary polyline (closed implicitly; last vertex connects to the
/// first).
#[derive(Debug, Clone)]
pub struct ConvexRegion {
    phi: Vec<f64>,
    h: Vec<f64>,
    boundary: Vec<C64>,
}

impl ConvexRegion {
    /// Region from explicit support samples; the boundary polyline is built
    /// from consecutive support-line intersections (outer approximation).
    pub fn from_support_samples(h: Vec<f64>) -> Result<Self, RegionError> {
        check_grid(h.len())?;
        let phi = phi_grid(h.len());
        let boundary = outer_polyline(&phi, &h);
        Ok(Self { phi, h, boundary })
    }

    /// Region from a support function evaluated on the `m`-point grid.
    pub fn from_support_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self, RegionError> {
        check_grid(m)?;
        let h: Vec<f64> = phi_grid(m).into_iter().map(f).collect();
        Self::from_support_samples(h)
    }

    /// Convex hull of a point cloud, with support sampled on the `m`-point
    /// grid. The boundary polyline is the hull itself (exact).
    pub fn from_points(points: &[C64], m: usize) -> Result<Self, RegionError> {
        check_grid(m)?;
        if points.is_empty() {
            return Err(RegionError::EmptyIntersection);
        }
        let phi = phi_grid(m);
        let h = phi
            .iter()
            .map(|&p| {
                let u = C64::from_polar(1.0, -p);
                points.iter().map(|z| (u * z).re).fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let boundary = convex_hull(points);
        Ok(Self { phi, h, boundary })
    }

    pub fn grid(&self) -> &[f64] {
        &self.phi
    }

    pub fn support(&self) -> &[f64] {
        &self.h
    }

    pub fn boundary(&self) -> &[C64] {
        &self.boundary
    }

    pub fn samples(&self) -> usize {
        self.phi.len()
    }

    /// Width across the thinnest direction: `min_φ h(φ) + h(φ+π)`.
    pub fn width(&self) -> f64 {
        let m = self.h.len();
        let half = m / 2;
        (0..half)
            .map(|k| self.h[k] + self.h[k + half])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() < DEGENERATE_WIDTH
    }

    /// Signed area of the boundary polyline (shoelace; ccw positive).
    pub fn boundary_area(&self) -> f64 {
        let v = &self.boundary;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            twice += a.re * b.im - a.im * b.re;
        }
        twice / 2.0
    }
}

// ---- wire format ----

#[derive(Serialize, Deserialize)]
struct RegionWire {
    phi: Vec<f64>,
    h: Vec<f64>,
    boundary: Vec<[f64; 2]>,
}

impl Serialize for ConvexRegion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RegionWire {
            phi: self.phi.clone(),
            h: self.h.clone(),
            boundary: self.boundary.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConvexRegion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = RegionWire::deserialize(deserializer)?;
        if wire.phi.len() != wire.h.len() {
            return Err(D::Error::custom("phi and h lengths differ"));
        }
        Ok(ConvexRegion {
            phi: wire.phi,
            h: wire.h,
            boundary: wire.boundary.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        })
    }
}

// ---- operator ranges ----

/// Samples W(T) on the `m`-point grid.
pub fn range_region(t: &ArrayView2<'_, C64>, m: usize) -> Result<ConvexRegion, RegionError> {
    Ok(range_region_with_points(t, m)?.0)
}

/// Same as [`range_region`], also returning the realized values `⟨Tx_k,x_k⟩`
/// at each maximizing eigenvector. Those inner points lie in W(T) exactly, so
/// together with the outer polyline they bracket the true boundary.
pub fn range_region_with_points(
    t: &ArrayView2<'_, C64>,
    m: usize,
) -> Result<(ConvexRegion, Vec<C64>), RegionError> {
    check_grid(m)?;
    let mut h = Vec::with_capacity(m);
    let mut inner = Vec::with_capacity(m);
    for &p in &phi_grid(m) {
        let (val, x) = support_value(t, p)?;
        h.push(val);
        inner.push(quadratic_form(t, &x));
    }
    Ok((ConvexRegion::from_support_samples(h)?, inner))
}

// ---- support lines ----

/// The line `Re(e^{-iφ} z) = offset` supporting a region in direction `φ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupportLine {
    pub angle: f64,
    pub offset: f64,
}

impl SupportLine {
    /// Endpoints of the chord this line cuts out of the closed unit disk, or
    /// `None` when the line misses the disk (`|offset| > 1`). Endpoints come
    /// in ccw order along the circle: `e^{iφ}(offset ± i√(1-offset²))`.
    pub fn chord_endpoints(&self) -> Option<(C64, C64)> {
        if self.offset.abs() > 1.0 {
            return None;
        }
        let s = (1.0 - self.offset * self.offset).max(0.0).sqrt();
        let u = C64::from_polar(1.0, self.angle);
        Some((u * C64::new(self.offset, -s), u * C64::new(self.offset, s)))
    }
}

// ---- intersection / gaps ----

fn grids_match(a: &ConvexRegion, b: &ConvexRegion) -> bool {
    a.phi.len() == b.phi.len()
        && a.phi.iter().zip(&b.phi).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Intersection of regions sharing one angle grid: pointwise minimum of the
/// support samples, with the boundary polyline re-extracted by half-plane
/// clipping so the reported support is that of the actual convex intersection
/// (the pointwise minimum alone need not be a support function).
pub fn intersect_regions(regions: &[&ConvexRegion]) -> Result<ConvexRegion, RegionError> {
    let first = *regions.first().ok_or(RegionError::NoRegions)?;
    for r in &regions[1..] {
        if !grids_match(first, r) {
            return Err(RegionError::GridMismatch);
        }
    }
    let m = first.phi.len();
    let mut hmin = vec![f64::INFINITY; m];
    for r in regions {
        for (dst, &v) in hmin.iter_mut().zip(&r.h) {
            *dst = dst.min(v);
        }
    }

    // Clip a bounding box by every grid half-plane Re(e^{-iφ_k} z) ≤ h_k.
    let reach = hmin.iter().fold(0.0f64, |a, &b| a.max(b.abs())) + 1.0;
    let mut poly = vec![
        C64::new(reach, reach),
        C64::new(-reach, reach),
        C64::new(-reach, -reach),
        C64::new(reach, -reach),
    ];
    for k in 0..m {
        poly = clip_halfplane(&poly, first.phi[k], hmin[k]);
        if poly.is_empty() {
            return Err(RegionError::EmptyIntersection);
        }
    }
    let boundary = dedup_closed(&poly, merge_tol(&poly));
    let h = first
        .phi
        .iter()
        .map(|&p| {
            let u = C64::from_polar(1.0, -p);
            boundary.iter().map(|z| (u * z).re).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(ConvexRegion { phi: first.phi.clone(), h, boundary })
}

/// Cuts a convex polygon by the half-plane `Re(e^{-iφ} z) ≤ offset`. The
/// result may be empty. Building a region from arbitrary support lines (not
/// necessarily on a uniform grid) reduces to folding this over the lines.
pub fn clip_polygon(poly: &[C64], phi: f64, offset: f64) -> Vec<C64> {
    clip_halfplane(poly, phi, offset)
}

/// Largest absolute difference of the support samples — the Hausdorff
/// distance of the two regions as resolved by their common grid.
pub fn hausdorff_gap(a: &ConvexRegion, b: &ConvexRegion) -> Result<f64, RegionError> {
    if !grids_match(a, b) {
        return Err(RegionError::GridMismatch);
    }
    Ok(a.h
        .iter()
        .zip(&b.h)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

// ---- corners ----

/// A boundary vertex whose exterior angle survives grid refinement.
#[derive(Debug, Clone, Serialize)]
pub struct CornerReport {
    pub location: [f64; 2],
    pub exterior_angle: f64,
    /// Whether the corner lies strictly inside the unit disk (|v| < 1-1e-4).
    pub interior: bool,
}

/// Compares boundary polylines sampled at `m` and `2m` angles and reports the
/// vertices whose exterior angle persists: smooth boundary arcs contribute
/// ≈2π/m per vertex, halving under refinement, while a genuine corner keeps
/// its angle. Corners on the unit circle are reported with `interior: false`.
pub fn corner_defect(coarse: &ConvexRegion, fine: &ConvexRegion) -> Result<Vec<CornerReport>, RegionError> {
    if fine.phi.len() != 2 * coarse.phi.len() {
        return Err(RegionError::GridMismatch);
    }
    let mc = coarse.phi.len() as f64;
    let floor = CORNER_FLOOR_STEPS * std::f64::consts::TAU / mc;
    let coarse_verts = vertices_with_angles(&coarse.boundary);
    let fine_verts = vertices_with_angles(&fine.boundary);
    let scale = coarse
        .boundary
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let match_radius = 32.0 * scale / mc;

    let mut out: Vec<CornerReport> = Vec::new();
    for &(v, angle) in &coarse_verts {
        if angle < floor {
            continue;
        }
        let best = fine_verts
            .iter()
            .filter(|(w, _)| (w - v).norm() <= match_radius)
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let Some(&(w, fine_angle)) = best else { continue };
        if fine_angle < CORNER_PERSISTENCE * angle {
            continue;
        }
        if out
            .iter()
            .any(|r| (C64::new(r.location[0], r.location[1]) - w).norm() <= match_radius)
        {
            continue;
        }
        out.push(CornerReport {
            location: [w.re, w.im],
            exterior_angle: fine_angle,
            interior: w.norm() < 1.0 - INTERIOR_MARGIN,
        });
    }
    Ok(out)
}

// ---- polyline helpers ----

/// Boundary polyline from consecutive support-line intersections. Vertex `k`
/// is the crossing of the lines at `φ_k` and `φ_{k+1}` (cyclically); for a
/// uniform grid the 2×2 system has determinant `sin(2π/m) > 0`.
fn outer_polyline(phi: &[f64], h: &[f64]) -> Vec<C64> {
    let m = phi.len();
    let mut verts = Vec::with_capacity(m);
    for k in 0..m {
        let k2 = (k + 1) % m;
        let (p1, h1) = (phi[k], h[k]);
        let (p2, h2) = (phi[k2], h[k2]);
        let det = (p2 - p1).sin().abs().max((std::f64::consts::TAU / m as f64).sin());
        let x = (h1 * p2.sin() - h2 * p1.sin()) / det;
        let y = (h2 * p1.cos() - h1 * p2.cos()) / det;
        verts.push(C64::new(x, y));
    }
    dedup_closed(&verts, merge_tol(&verts))
}

fn merge_tol(verts: &[C64]) -> f64 {
    let scale = verts.iter().map(|z| z.norm()).fold(1.0, f64::max);
    VERTEX_MERGE_TOL * scale
}

/// Merges consecutive (cyclically) coincident vertices.
fn dedup_closed(verts: &[C64], tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(verts.len());
    for &v in verts {
        if out.last().map_or(true, |&l| (v - l).norm() > tol) {
            out.push(v);
        }
    }
    while out.len() > 1 && (out[out.len() - 1] - out[0]).norm() <= tol {
        out.pop();
    }
    out
}

/// Exterior (turning) angles at each vertex of a closed convex polyline.
fn vertices_with_angles(boundary: &[C64]) -> Vec<(C64, f64)> {
    let verts = dedup_closed(boundary, merge_tol(boundary));
    let n = verts.len();
    if n < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = verts[(i + n - 1) % n];
        let here = verts[i];
        let next = verts[(i + 1) % n];
        let e1 = here - prev;
        let e2 = next - here;
        let cross = e1.re * e2.im - e1.im * e2.re;
        let dot = e1.re * e2.re + e1.im * e2.im;
        let turn = cross.atan2(dot);
        out.push((here, turn.abs()));
    }
    out
}

/// Andrew monotone-chain convex hull, counterclockwise, no repeated first
/// vertex. Collinear points are dropped.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut pts: Vec<C64> = points.to_vec();
    pts.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let cross = |o: C64, a: C64, b: C64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut lower: Vec<C64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Clips a convex polygon by the half-plane `Re(e^{-iφ} z) ≤ offset`
/// (Sutherland–Hodgman, one plane).
fn clip_halfplane(poly: &[C64], phi: f64, offset: f64) -> Vec<C64> {
    if poly.is_empty() {
        return Vec::new();
    }
    let u = C64::from_polar(1.0, -phi);
    let depth = |z: C64| (u * z).re - offset;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let da = depth(a);
        let db = depth(b);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * C64::new(t, 0.0));
        }
    }
    out
}

/// Hyperplane-based defect of `p` relative to the convex hull of `pts`:
/// `≤ 0` means inside. For points near the hull this equals the Euclidean
/// distance to first order.
pub fn hull_defect(p: C64, pts: &[C64]) -> f64 {
    let hull = convex_hull(pts);
    match hull.len() {
        0 => f64::INFINITY,
        1 => (p - hull[0]).norm(),
        2 => {
            // Segment: perpendicular defect plus overshoot beyond endpoints.
            let (a, b) = (hull[0], hull[1]);
            let d = b - a;
            let len = d.norm();
            let t = (((p - a).re * d.re + (p - a).im * d.im) / (len * len)).clamp(0.0, 1.0);
            (p - (a + d * C64::new(t, 0.0))).norm()
        }
        n => {
            let mut worst = f64::NEG_INFINITY;
            for i in 0..n {
                let a = hull[i];
                let b = hull[(i + 1) % n];
                let e = b - a;
                let nlen = e.norm();
                // outward normal of a ccw polygon edge
                let signed = ((p - a).re * e.im - (p - a).im * e.re) / nlen;
                worst = worst.max(signed);
            }
            worst
        }
    }
}
