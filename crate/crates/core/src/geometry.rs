//! Planar domains, compact sets, containment predicates and boundary
//! discretizations.
//!
//! Only bounded domains are supported. Analytic shapes (disk, annulus,
//! rectangle) are exact and always Dirichlet-regular; lattice masks are
//! resolved at lattice resolution and must declare their regularity.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::{pt, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Self {
        BBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.re - self.min.re
    }

    pub fn height(&self) -> f64 {
        self.max.im - self.min.im
    }

    pub fn expanded(&self, by: f64) -> BBox {
        BBox { min: self.min - pt(by, by), max: self.max + pt(by, by) }
    }
}

/// Set of lattice nodes marked as inside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMask {
    lattice: Lattice,
    inside: Vec<bool>,
}

impl LatticeMask {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    fn node_inside(&self, p: Point) -> bool {
        self.lattice
            .nearest(p)
            .map(|(i, j)| self.inside[self.lattice.index(i, j)])
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { center: Point, radius: f64 },
    Annulus { center: Point, inner: f64, outer: f64 },
    Rectangle { min: Point, max: Point },
    Mask(LatticeMask),
}

/// A bounded, connected, open planar domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub struct Domain {
    shape: Shape,
    regular: bool,
}

impl Domain {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::DegenerateGeometry(format!("disk radius {radius}")));
        }
        Ok(Domain { shape: Shape::Disk { center, radius }, regular: true })
    }

    pub fn unit_disk() -> Self {
        Domain::disk(pt(0.0, 0.0), 1.0).expect("unit disk")
    }

    pub fn annulus(center: Point, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::DegenerateGeometry(format!("annulus radii {inner}..{outer}")));
        }
        Ok(Domain { shape: Shape::Annulus { center, inner, outer }, regular: true })
    }

    pub fn rectangle(min: Point, max: Point) -> Result<Self> {
        if !(max.re > min.re && max.im > min.im) || !(min.norm().is_finite() && max.norm().is_finite()) {
            return Err(Error::DegenerateGeometry(format!("rectangle {min} .. {max}")));
        }
        Ok(Domain { shape: Shape::Rectangle { min, max }, regular: true })
    }

    /// Domain given by lattice nodes. Border nodes of the lattice must be
    /// outside, the inside set must be non-empty and 4-connected.
    pub fn mask(lattice: Lattice, inside: Vec<bool>, regular: bool) -> Result<Self> {
        if inside.len() != lattice.len() {
            return Err(Error::DomainMismatch(format!(
                "mask has {} entries for a lattice of {} nodes",
                inside.len(),
                lattice.len()
            )));
        }
        let count = inside.iter().filter(|b| **b).count();
        if count == 0 {
            return Err(Error::DegenerateGeometry("empty mask".into()));
        }
        for (i, j, _) in lattice.nodes() {
            let border = i == 0 || j == 0 || i + 1 == lattice.nx() || j + 1 == lattice.ny();
            if border && inside[lattice.index(i, j)] {
                return Err(Error::DegenerateGeometry(
                    "mask touches the lattice border; it must be a proper subset".into(),
                ));
            }
        }
        let components = connected_components(&lattice, &inside, false);
        if components > 1 {
            return Err(Error::DisconnectedMask { components });
        }
        Ok(Domain { shape: Shape::Mask(LatticeMask { lattice, inside }), regular })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.shape, Shape::Mask(_))
    }

    pub fn bbox(&self) -> BBox {
        match &self.shape {
            Shape::Disk { center, radius } => BBox::new(center - pt(*radius, *radius), center + pt(*radius, *radius)),
            Shape::Annulus { center, outer, .. } => BBox::new(center - pt(*outer, *outer), center + pt(*outer, *outer)),
            Shape::Rectangle { min, max } => BBox::new(*min, *max),
            Shape::Mask(m) => {
                let lat = m.lattice;
                let mut lo = pt(f64::INFINITY, f64::INFINITY);
                let mut hi = pt(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (idx, _) in m.inside.iter().enumerate().filter(|(_, b)| **b) {
                    let p = lat.node_at(idx);
                    lo = pt(lo.re.min(p.re), lo.im.min(p.im));
                    hi = pt(hi.re.max(p.re), hi.im.max(p.im));
                }
                BBox::new(lo, hi).expanded(lat.spacing() / 2.0)
            }
        }
    }

    /// Open-set membership.
    pub fn contains(&self, p: Point) -> bool {
        match &self.shape {
            Shape::Disk { center, radius } => (p - center).norm() < *radius,
            Shape::Annulus { center, inner, outer } => {
                let d = (p - center).norm();
                d > *inner && d < *outer
            }
            Shape::Rectangle { min, max } => p.re > min.re && p.re < max.re && p.im > min.im && p.im < max.im,
            Shape::Mask(m) => m.node_inside(p),
        }
    }

    /// Membership in the closure.
    pub fn contains_closed(&self, p: Point) -> bool {
        match &self.shape {
            Shape::Disk { center, radius } => (p - center).norm() <= *radius,
            Shape::Annulus { center, inner, outer } => {
                let d = (p - center).norm();
                d >= *inner && d <= *outer
            }
            Shape::Rectangle { min, max } => {
                p.re >= min.re && p.re <= max.re && p.im >= min.im && p.im <= max.im
            }
            Shape::Mask(m) => m.node_inside(p),
        }
    }

    /// Signed distance to the boundary, positive inside. Exact for analytic
    /// shapes; `±h/2` for masks.
    pub fn depth(&self, p: Point) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => radius - (p - center).norm(),
            Shape::Annulus { center, inner, outer } => {
                let d = (p - center).norm();
                (outer - d).min(d - inner)
            }
            Shape::Rectangle { min, max } => {
                let dx = (p.re - min.re).min(max.re - p.re);
                let dy = (p.im - min.im).min(max.im - p.im);
                if dx >= 0.0 && dy >= 0.0 {
                    dx.min(dy)
                } else {
                    let ox = (min.re - p.re).max(p.re - max.re).max(0.0);
                    let oy = (min.im - p.im).max(p.im - max.im).max(0.0);
                    -(ox * ox + oy * oy).sqrt()
                }
            }
            Shape::Mask(m) => {
                let h = m.lattice.spacing() / 2.0;
                if m.node_inside(p) {
                    h
                } else {
                    -h
                }
            }
        }
    }

    /// Unit inward normal of the nearest boundary piece (analytic shapes only).
    pub fn inward_normal(&self, p: Point) -> Option<Point> {
        match &self.shape {
            Shape::Disk { center, .. } => unit(center - p),
            Shape::Annulus { center, inner, outer } => {
                let d = (p - center).norm();
                if outer - d <= d - inner {
                    unit(center - p)
                } else {
                    unit(p - center)
                }
            }
            Shape::Rectangle { min, max } => {
                let cands = [
                    (p.re - min.re, pt(1.0, 0.0)),
                    (max.re - p.re, pt(-1.0, 0.0)),
                    (p.im - min.im, pt(0.0, 1.0)),
                    (max.im - p.im, pt(0.0, -1.0)),
                ];
                cands
                    .iter()
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|c| c.1)
            }
            Shape::Mask(_) => None,
        }
    }

    /// Fraction `t ∈ (0, 1]` at which the segment `from -> from + step` first
    /// meets the boundary, for `from` inside. `None` for masks or when the
    /// segment stays inside.
    pub fn crossing(&self, from: Point, step: Point) -> Option<f64> {
        let hit = |t: f64| if t > 0.0 && t <= 1.0 + 1e-12 { Some(t.min(1.0)) } else { None };
        match &self.shape {
            Shape::Disk { center, radius } => exit_circle(from - center, step, *radius).and_then(hit),
            Shape::Annulus { center, inner, outer } => {
                let rel = from - center;
                let out = exit_circle(rel, step, *outer).and_then(hit);
                let inn = enter_circle(rel, step, *inner).and_then(hit);
                match (out, inn) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
            Shape::Rectangle { min, max } => {
                let mut best: Option<f64> = None;
                let mut consider = |t: f64| {
                    if let Some(t) = hit(t) {
                        best = Some(best.map_or(t, |b: f64| b.min(t)));
                    }
                };
                if step.re > 0.0 {
                    consider((max.re - from.re) / step.re);
                } else if step.re < 0.0 {
                    consider((min.re - from.re) / step.re);
                }
                if step.im > 0.0 {
                    consider((max.im - from.im) / step.im);
                } else if step.im < 0.0 {
                    consider((min.im - from.im) / step.im);
                }
                best
            }
            Shape::Mask(_) => None,
        }
    }

    /// Concentric enlargement by `by` (disks and rectangles only).
    pub fn dilate(&self, by: f64) -> Result<Domain> {
        match &self.shape {
            Shape::Disk { center, radius } => Domain::disk(*center, radius + by),
            Shape::Rectangle { min, max } => Domain::rectangle(min - pt(by, by), max + pt(by, by)),
            _ => Err(Error::DegenerateGeometry("only disks and rectangles can be dilated".into())),
        }
    }

    /// Boundary quadrature nodes with arc-length weights at spacing about
    /// `resolution`.
    pub fn boundary_nodes(&self, resolution: f64) -> Result<BoundaryDiscretization> {
        if !(resolution > 0.0) {
            return Err(Error::DegenerateGeometry(format!("boundary resolution {resolution}")));
        }
        let mut nodes = Vec::new();
        let components = match &self.shape {
            Shape::Disk { center, radius } => {
                push_circle(&mut nodes, *center, *radius, resolution, 0);
                1
            }
            Shape::Annulus { center, inner, outer } => {
                push_circle(&mut nodes, *center, *outer, resolution, 0);
                push_circle(&mut nodes, *center, *inner, resolution, 1);
                2
            }
            Shape::Rectangle { min, max } => {
                let corners = [*min, pt(max.re, min.im), *max, pt(min.re, max.im)];
                for k in 0..4 {
                    let a = corners[k];
                    let b = corners[(k + 1) % 4];
                    let len = (b - a).norm();
                    let n = ((len / resolution).ceil() as usize).max(1);
                    for s in 0..n {
                        let t = (s as f64 + 0.5) / n as f64;
                        nodes.push(BoundaryNode { point: a + (b - a) * t, weight: len / n as f64, component: 0 });
                    }
                }
                1
            }
            Shape::Mask(m) => mask_boundary(m, &mut nodes)?,
        };
        Ok(BoundaryDiscretization { nodes, components })
    }

    /// Largest clearance `dist(closure(self), complement(outer))`, negative
    /// when the closure is not inside `outer`.
    pub fn clearance_in(&self, outer: &Domain) -> f64 {
        clearance(self, outer)
    }
}

fn unit(v: Point) -> Option<Point> {
    let n = v.norm();
    if n > 0.0 {
        Some(v / n)
    } else {
        None
    }
}

// Largest root of |rel + t s| = r (exiting the circle).
fn exit_circle(rel: Point, s: Point, r: f64) -> Option<f64> {
    let a = s.norm_sqr();
    let b = 2.0 * (rel.re * s.re + rel.im * s.im);
    let c = rel.norm_sqr() - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || a == 0.0 {
        return None;
    }
    Some((-b + disc.sqrt()) / (2.0 * a))
}

// Smallest root of |rel + t s| = r (entering the circle from outside).
fn enter_circle(rel: Point, s: Point, r: f64) -> Option<f64> {
    let a = s.norm_sqr();
    let b = 2.0 * (rel.re * s.re + rel.im * s.im);
    let c = rel.norm_sqr() - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || a == 0.0 || c < 0.0 {
        return None;
    }
    Some((-b - disc.sqrt()) / (2.0 * a))
}

fn push_circle(nodes: &mut Vec<BoundaryNode>, center: Point, radius: f64, resolution: f64, component: usize) {
    let n = ((2.0 * PI * radius / resolution).round() as usize).max(8);
    let w = 2.0 * PI * radius / n as f64;
    for k in 0..n {
        let theta = 2.0 * PI * k as f64 / n as f64;
        nodes.push(BoundaryNode { point: center + Point::from_polar(radius, theta), weight: w, component });
    }
}

fn mask_boundary(m: &LatticeMask, nodes: &mut Vec<BoundaryNode>) -> Result<usize> {
    let lat = m.lattice;
    let h = lat.spacing();
    // Complement components (8-connected) label the boundary components.
    let outside: Vec<bool> = m.inside.iter().map(|b| !b).collect();
    let labels = component_labels(&lat, &outside, true);
    let mut seen = std::collections::BTreeMap::new();
    for (i, j, p) in lat.nodes() {
        if !m.inside[lat.index(i, j)] {
            continue;
        }
        for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
            if let Some((a, b)) = lat.offset(i, j, di, dj) {
                let k = lat.index(a, b);
                if !m.inside[k] {
                    let label = labels[k].expect("outside node is labelled");
                    let next = seen.len();
                    let comp = *seen.entry(label).or_insert(next);
                    nodes.push(BoundaryNode {
                        point: p + pt(di as f64, dj as f64) * (h / 2.0),
                        weight: h,
                        component: comp,
                    });
                }
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::DegenerateGeometry("mask has no boundary".into()));
    }
    Ok(seen.len())
}

fn component_labels(lat: &Lattice, set: &[bool], eight: bool) -> Vec<Option<usize>> {
    let mut labels = vec![None; set.len()];
    let mut next = 0;
    let dirs: &[(isize, isize)] = if eight {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    };
    for start in 0..set.len() {
        if !set[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = lat.coords(k);
            for &(di, dj) in dirs {
                if let Some((a, b)) = lat.offset(i, j, di, dj) {
                    let n = lat.index(a, b);
                    if set[n] && labels[n].is_none() {
                        labels[n] = Some(next);
                        queue.push_back(n);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}

/// Number of 4-connected (or 8-connected) components of `set`.
pub(crate) fn connected_components(lat: &Lattice, set: &[bool], eight: bool) -> usize {
    component_labels(lat, set, eight)
        .into_iter()
        .flatten()
        .max()
        .map_or(0, |m| m + 1)
}

fn clearance(inner: &Domain, outer: &Domain) -> f64 {
    if let Shape::Mask(m) = &outer.shape {
        return clearance_in_mask(inner, m);
    }
    match &inner.shape {
        Shape::Disk { center, radius } => disk_clearance(*center, *radius, outer),
        Shape::Rectangle { min, max } => rect_clearance(*min, *max, outer),
        Shape::Annulus { center, inner: ri, outer: ro } => match &outer.shape {
            Shape::Annulus { center: c2, inner: ri2, outer: ro2 } => {
                let d = (center - c2).norm();
                let rim = ro2 - d - ro;
                let hole_inside = ri - d - ri2;
                let away = d - ro - ri2;
                rim.min(hole_inside.max(away))
            }
            _ => disk_clearance(*center, *ro, outer),
        },
        Shape::Mask(m) => {
            let h = m.lattice.spacing() / 2.0;
            m.inside
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(k, _)| outer.depth(m.lattice.node_at(k)) - h)
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn disk_clearance(c: Point, r: f64, outer: &Domain) -> f64 {
    match &outer.shape {
        Shape::Disk { center, radius } => radius - (c - center).norm() - r,
        Shape::Rectangle { min, max } => (c.re - r - min.re)
            .min(max.re - c.re - r)
            .min(c.im - r - min.im)
            .min(max.im - c.im - r),
        Shape::Annulus { center, inner, outer } => {
            let d = (c - center).norm();
            (outer - d - r).min(d - r - inner)
        }
        Shape::Mask(_) => unreachable!("handled by clearance_in_mask"),
    }
}

fn rect_clearance(min: Point, max: Point, outer: &Domain) -> f64 {
    let corners = [min, pt(max.re, min.im), max, pt(min.re, max.im)];
    match &outer.shape {
        Shape::Disk { center, radius } => {
            radius - corners.iter().map(|c| (c - center).norm()).fold(0.0, f64::max)
        }
        Shape::Rectangle { min: a, max: b } => {
            (min.re - a.re).min(b.re - max.re).min(min.im - a.im).min(b.im - max.im)
        }
        Shape::Annulus { center, inner, outer } => {
            let far = corners.iter().map(|c| (c - center).norm()).fold(0.0, f64::max);
            let dx = (min.re - center.re).max(center.re - max.re).max(0.0);
            let dy = (min.im - center.im).max(center.im - max.im).max(0.0);
            let near = (dx * dx + dy * dy).sqrt();
            (outer - far).min(near - inner)
        }
        Shape::Mask(_) => unreachable!("handled by clearance_in_mask"),
    }
}

fn clearance_in_mask(inner: &Domain, m: &LatticeMask) -> f64 {
    let lat = m.lattice;
    let h = lat.spacing();
    let mut any = false;
    for (i, j, p) in lat.nodes() {
        if !inner.contains_closed(p) {
            continue;
        }
        any = true;
        for di in -1..=1 {
            for dj in -1..=1 {
                let ok = lat.offset(i, j, di, dj).map(|(a, b)| m.inside[lat.index(a, b)]).unwrap_or(false);
                if !ok {
                    return -h;
                }
            }
        }
    }
    if any {
        h
    } else {
        // Inner set falls between lattice nodes: fall back to its bounding box center.
        let bb = inner.bbox();
        let c = (bb.min + bb.max) / 2.0;
        if m.node_inside(c) {
            h / 2.0
        } else {
            -h
        }
    }
}

/// `closure(inner) ⊂ outer` with positive distance to the complement.
pub fn is_compactly_contained(inner: &Domain, outer: &Domain) -> bool {
    clearance(inner, outer) > 0.0
}

/// Compact set described with the same shape vocabulary as [`Domain`]; its
/// membership test uses the closed predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompactSet(Domain);

impl CompactSet {
    pub fn new(shape: Domain) -> Self {
        CompactSet(shape)
    }

    pub fn closed_disk(center: Point, radius: f64) -> Result<Self> {
        Ok(CompactSet(Domain::disk(center, radius)?))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.0.contains_closed(p)
    }

    /// Interior of the set, as a domain.
    pub fn interior(&self) -> &Domain {
        &self.0
    }

    pub fn is_within(&self, outer: &Domain) -> bool {
        is_compactly_contained(&self.0, outer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub point: Point,
    pub weight: f64,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDiscretization {
    pub nodes: Vec<BoundaryNode>,
    pub components: usize,
}

impl BoundaryDiscretization {
    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

/// Scenario-file form of a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        r_in: f64,
        r_out: f64,
    },
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
    },
    /// Rows from bottom to top; `#` marks an inside node.
    Mask {
        origin: [f64; 2],
        spacing: f64,
        rows: Vec<String>,
        regular: bool,
    },
}

impl TryFrom<DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        let p = |a: [f64; 2]| pt(a[0], a[1]);
        match spec {
            DomainSpec::Disk { center, radius } => Domain::disk(p(center), radius),
            DomainSpec::Annulus { center, r_in, r_out } => Domain::annulus(p(center), r_in, r_out),
            DomainSpec::Rectangle { min, max } => Domain::rectangle(p(min), p(max)),
            DomainSpec::Mask { origin, spacing, rows, regular } => {
                let ny = rows.len();
                let nx = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
                let lattice = Lattice::new(p(origin), spacing, nx, ny)?;
                let mut inside = vec![false; lattice.len()];
                for (j, row) in rows.iter().enumerate() {
                    for (i, ch) in row.chars().enumerate() {
                        inside[lattice.index(i, j)] = ch == '#';
                    }
                }
                Domain::mask(lattice, inside, regular)
            }
        }
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        let a = |p: Point| [p.re, p.im];
        match d.shape {
            Shape::Disk { center, radius } => DomainSpec::Disk { center: a(center), radius },
            Shape::Annulus { center, inner, outer } => DomainSpec::Annulus { center: a(center), r_in: inner, r_out: outer },
            Shape::Rectangle { min, max } => DomainSpec::Rectangle { min: a(min), max: a(max) },
            Shape::Mask(m) => {
                let lat = m.lattice;
                let rows = (0..lat.ny())
                    .map(|j| {
                        (0..lat.nx())
                            .map(|i| if m.inside[lat.index(i, j)] { '#' } else { '.' })
                            .collect()
                    })
                    .collect();
                DomainSpec::Mask { origin: a(lat.origin()), spacing: lat.spacing(), rows, regular: d.regular }
            }
        }
    }
}
