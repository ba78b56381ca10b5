//! Drift-sign classification of the lateral boundary for Bellman problems.

use alloc::format;
use alloc::vec::Vec;

use crate::certificate::Certificate;
use crate::error::Result;
use crate::geometry::{Domain, Face, Point, Side};
use crate::hamiltonians::BellmanSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Every drift points strictly inward.
    In,
    /// Every drift points outward or is tangent.
    Out,
    Mixed,
}

impl BoundaryTag {
    pub fn label(&self) -> &'static str {
        match self {
            BoundaryTag::In => "in",
            BoundaryTag::Out => "out",
            BoundaryTag::Mixed => "mixed",
        }
    }
}

/// Tag of one boundary point with the inward components `b_beta . Dd`.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub tag: BoundaryTag,
    pub witnesses: Vec<f64>,
    pub tolerance: f64,
}

/// Classifies `x` on the boundary at time `t`. Inward components within
/// `1e-8 (1 + max |b|)` of zero count as outward-or-tangent.
pub fn classify_point(spec: &BellmanSpec, domain: &Domain, x: &Point, t: f64) -> Result<Classification> {
    let n = domain.distance_gradient(x)?;
    let dim = domain.dim();
    let mut witnesses = Vec::with_capacity(spec.controls.len());
    let mut bmax = 0.0f64;
    for c in &spec.controls {
        let b = c.b.eval(x, t);
        let mut w = 0.0;
        let mut sq = 0.0;
        for a in 0..dim {
            w += b[a] * n[a];
            sq += b[a] * b[a];
        }
        bmax = bmax.max(libm::sqrt(sq));
        witnesses.push(w);
    }
    let tolerance = 1e-8 * (1.0 + bmax);
    let tag = if witnesses.iter().all(|w| *w > tolerance) {
        BoundaryTag::In
    } else if witnesses.iter().all(|w| *w <= tolerance) {
        BoundaryTag::Out
    } else {
        BoundaryTag::Mixed
    };
    Ok(Classification { tag, witnesses, tolerance })
}

/// One row of the per-sample classification table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub face: Face,
    pub x: Point,
    pub t: f64,
    pub classification: Classification,
}

/// Per-face outcome: a face minus its corner zones, crossed with the time
/// window, is one connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub face: Face,
    /// The common tag, or `None` when the component carries several.
    pub tag: Option<BoundaryTag>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    pub certificate: Certificate,
    pub components: Vec<ComponentReport>,
    pub samples: Vec<BoundarySample>,
}

/// Samples every face at `space_samples` points (2-D; corner zones skipped)
/// and the window at `time_samples + 1` instants, and requires each
/// component to carry one tag. Sampling can refute the condition, not prove it.
pub fn check_sigma(
    spec: &BellmanSpec,
    domain: &Domain,
    window: (f64, f64),
    space_samples: usize,
    time_samples: usize,
) -> SigmaReport {
    let times: Vec<f64> = if window.1 > window.0 && time_samples > 0 {
        (0..=time_samples)
            .map(|k| window.0 + (window.1 - window.0) * k as f64 / time_samples as f64)
            .collect()
    } else {
        alloc::vec![window.0]
    };
    let mut samples = Vec::new();
    let mut components = Vec::new();
    for face in domain.faces() {
        let points = face_points(domain, face, space_samples);
        let mut tag: Option<Option<BoundaryTag>> = None;
        let mut count = 0;
        for x in &points {
            for &t in &times {
                let Ok(c) = classify_point(spec, domain, x, t) else { continue };
                tag = match tag {
                    None => Some(Some(c.tag)),
                    Some(Some(prev)) if prev == c.tag => Some(Some(prev)),
                    _ => Some(None),
                };
                count += 1;
                samples.push(BoundarySample { face, x: *x, t, classification: c });
            }
        }
        components.push(ComponentReport { face, tag: tag.unwrap_or(None), samples: count });
    }
    let pass = components.iter().all(|c| c.tag.is_some() || c.samples == 0);
    let detail = components
        .iter()
        .map(|c| format!("{}: {}", c.face.label(), c.tag.map_or("inhomogeneous", |t| t.label())))
        .collect::<Vec<_>>()
        .join(", ");
    let mixed = components.iter().filter(|c| c.tag.is_none() && c.samples > 0).count();
    SigmaReport { certificate: Certificate::new("Sigma", mixed as f64, pass, detail), components, samples }
}

fn face_points(domain: &Domain, face: Face, n: usize) -> Vec<Point> {
    let mut base = [0.0; 2];
    base[face.axis] = match face.side {
        Side::Lower => domain.lower()[face.axis],
        Side::Upper => domain.upper()[face.axis],
    };
    if domain.dim() == 1 {
        return alloc::vec![base];
    }
    let other = 1 - face.axis;
    let (lo, hi) = (domain.lower()[other], domain.upper()[other]);
    let n = n.max(2);
    (0..n)
        .filter_map(|k| {
            let mut x = base;
            x[other] = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            (!domain.in_corner_zone(&x)).then_some(x)
        })
        .collect()
}
