//! Complete facet enumeration: the incremental double description method for
//! small vertex sets and the symmetric adjacency decomposition method.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_traits::{Signed, Zero};

use crate::exact::{Int, SpanTracker};
use crate::model::{subface_polytope, Face, Inequality, VPolytope};
use crate::pivot::{initial_facet, rotate, RotationContext};
use crate::symmetry::{CanonicalKey, PermGroup};
use crate::{Error, Result};

/// Dense bit set over vertex positions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet {
            words: vec![0; (n + 63) / 64],
        }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter_map(move |b| {
                if w >> b & 1 == 1 {
                    Some(wi * 64 + b)
                } else {
                    None
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

struct DdFacet {
    ineq: Inequality,
    tight: BitSet,
}

/// The complete, irredundant facet list of a polytope by vertex insertion.
///
/// Intended for small vertex counts (below the recursion cutoff). The result
/// is re-verified facet by facet.
pub fn double_description(p: &Arc<VPolytope>) -> Result<Vec<Face>> {
    let n = p.len();
    let dim = p.intrinsic_dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let width = p.ambient_dim() + 1;

    // Greedy affinely independent spanning subset, in list order.
    let mut tracker = SpanTracker::new(width);
    let mut simplex: Vec<usize> = Vec::with_capacity(dim + 1);
    for i in 0..n {
        if tracker.push_row(p.hom_row(i)) {
            simplex.push(i);
        }
        if simplex.len() == dim + 1 {
            break;
        }
    }
    debug_assert_eq!(simplex.len(), dim + 1);

    let mut inserted = BitSet::new(n);
    for &i in &simplex {
        inserted.insert(i);
    }

    // Facets of the simplex: for each omitted member, a kernel functional of
    // the others oriented toward the omitted vertex.
    let mut facets: Vec<DdFacet> = Vec::with_capacity(dim + 1);
    for omit in 0..simplex.len() {
        let subset: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != omit)
            .map(|(_, &i)| i)
            .collect();
        let omitted = simplex[omit];
        let mut found = None;
        for col in p.kernel_of(&subset) {
            let Ok(q) = Inequality::from_kernel_column(&col) else {
                continue;
            };
            let r = q.residual_hom(p.hom_row(omitted));
            if r.is_zero() {
                continue;
            }
            found = Some(if r.is_negative() { q.flipped() } else { q });
            break;
        }
        let q = found.ok_or_else(|| {
            Error::InvariantViolation("spanning simplex has a degenerate facet".into())
        })?;
        let mut tight = BitSet::new(n);
        for &i in &subset {
            debug_assert!(q.residual_hom(p.hom_row(i)).is_zero());
            tight.insert(i);
        }
        facets.push(DdFacet { ineq: q, tight });
    }

    // Insert the remaining vertices in list order.
    for v in 0..n {
        if inserted.contains(v) {
            continue;
        }
        let row = p.hom_row(v);
        let residuals: Vec<Int> = facets.iter().map(|f| f.ineq.residual_hom(row)).collect();
        let any_violated = residuals.iter().any(|r| r.is_negative());
        if !any_violated {
            // Inside or on the current hull; extend tight sets only.
            for (f, r) in facets.iter_mut().zip(&residuals) {
                if r.is_zero() {
                    f.tight.insert(v);
                }
            }
            inserted.insert(v);
            continue;
        }
        let mut next: HashMap<BitSet, DdFacet> = HashMap::new();
        for (k, f) in facets.iter().enumerate() {
            if residuals[k].is_negative() {
                continue;
            }
            let mut tight = f.tight.clone();
            if residuals[k].is_zero() {
                tight.insert(v);
            }
            next.insert(
                tight.clone(),
                DdFacet {
                    ineq: f.ineq.clone(),
                    tight,
                },
            );
        }
        // New facets through v from adjacent (kept, dropped) pairs.
        for (x, fx) in facets.iter().enumerate() {
            if !residuals[x].is_negative() {
                continue;
            }
            for (k, fk) in facets.iter().enumerate() {
                if !residuals[k].is_positive() {
                    continue;
                }
                let common = fk.tight.intersection(&fx.tight);
                if common.count() < dim - 1 {
                    continue;
                }
                let common_idx = common.to_vec();
                if p.rank_of(&common_idx) != dim - 1 {
                    continue;
                }
                // g = (-r_x) * kept + r_k * dropped, tight at v by construction.
                let num_k = -&residuals[x];
                let g = fk.ineq.combine(&num_k, &fx.ineq, &residuals[k])?;
                let mut tight = BitSet::new(n);
                let mut valid = true;
                for i in inserted.iter().chain(std::iter::once(v)) {
                    let r = g.residual_hom(p.hom_row(i));
                    if r.is_negative() {
                        valid = false;
                        break;
                    }
                    if r.is_zero() {
                        tight.insert(i);
                    }
                }
                if !valid {
                    return Err(Error::InvariantViolation(
                        "combined facet is invalid on inserted vertices".into(),
                    ));
                }
                next.entry(tight.clone())
                    .or_insert(DdFacet { ineq: g, tight });
            }
        }
        inserted.insert(v);
        facets = next.into_values().collect();
        // Deterministic ordering regardless of hash iteration.
        facets.sort_by(|a, b| a.ineq.coeffs().cmp(b.ineq.coeffs()).then(a.ineq.rhs().cmp(b.ineq.rhs())));
    }

    let mut out = Vec::with_capacity(facets.len());
    for f in facets {
        let ts = p.tight_set(&f.ineq);
        if !ts.valid || p.rank_of(&ts.indices) != dim {
            return Err(Error::InvariantViolation(
                "double description emitted a non-facet".into(),
            ));
        }
        out.push(Face::new(p.clone(), ts.indices, f.ineq)?);
    }
    Ok(out)
}

/// One facet class: its canonical key over the root group plus a
/// representative face of the root polytope.
pub struct FacetClass {
    pub key: CanonicalKey,
    pub representative: Face,
}

/// Why an enumeration stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    Stopped(String),
}

impl RunStatus {
    pub fn is_complete(&self) -> bool {
        matches!(self, RunStatus::Complete)
    }
}

/// Resource limits shared by the enumeration drivers.
#[derive(Clone, Debug, Default)]
pub struct Limits {
    pub max_classes: Option<usize>,
    pub max_seconds: Option<u64>,
    pub max_mem_bytes: Option<usize>,
}

/// Ridges of a facet: the complete facet list of its sub-polytope, either by
/// double description (below the cutoff) or by recursing into the adjacency
/// decomposition without symmetry.
pub fn facet_ridges(face: &Face, cutoff: usize, deadline: Option<Instant>) -> Result<Vec<Face>> {
    let sub = subface_polytope(face)?;
    if sub.len() < cutoff || sub.intrinsic_dim() <= 1 {
        double_description(&sub)
    } else {
        ad_complete_plain(&sub, cutoff, deadline)
    }
}

/// Complete facet list of `p` by adjacency decomposition with no symmetry
/// group; deduplication is by tight set.
fn ad_complete_plain(
    p: &Arc<VPolytope>,
    cutoff: usize,
    deadline: Option<Instant>,
) -> Result<Vec<Face>> {
    let first = initial_facet(p)?;
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    seen.insert(first.tight().to_vec(), ());
    let mut facets = vec![first];
    let mut next = 0;
    while next < facets.len() {
        if past(deadline) {
            return Err(Error::Timeout);
        }
        let face = facets[next].clone();
        next += 1;
        for ridge in facet_ridges(&face, cutoff, deadline)? {
            let g = rotate(&RotationContext {
                polytope: p,
                facet: &face,
                ridge_support: ridge.support(),
            })?;
            if !p.is_facet(g.support()) {
                return Err(Error::InvariantViolation(
                    "rotation emitted a non-facet".into(),
                ));
            }
            if seen.insert(g.tight().to_vec(), ()).is_none() {
                facets.push(g);
            }
        }
    }
    Ok(facets)
}

/// The symmetric adjacency decomposition method: complete facet classes of
/// `p` under `group`. A limit stop yields the classes found so far, flagged
/// by the status; it is never a silent truncation.
pub fn ad_enumerate(
    p: &Arc<VPolytope>,
    group: &Arc<PermGroup>,
    cutoff: usize,
    limits: &Limits,
) -> Result<(Vec<FacetClass>, RunStatus)> {
    let deadline = limits
        .max_seconds
        .map(|s| Instant::now() + std::time::Duration::from_secs(s));

    if p.intrinsic_dim() == 0 {
        return Ok((Vec::new(), RunStatus::Complete));
    }
    if p.intrinsic_dim() == 1 {
        // A segment's facet graph is disconnected; enumerate directly.
        let mut out: Vec<FacetClass> = Vec::new();
        for f in double_description(p)? {
            let key = group.canonical_set(f.tight())?;
            if !out.iter().any(|c| c.key == key) {
                out.push(FacetClass {
                    key,
                    representative: f,
                });
            }
        }
        return Ok((out, RunStatus::Complete));
    }

    let first = initial_facet(p)?;
    let key = group.canonical_set(first.tight())?;
    let mut store: HashMap<CanonicalKey, usize> = HashMap::new();
    let mut classes: Vec<FacetClass> = Vec::new();
    store.insert(key.clone(), 0);
    classes.push(FacetClass {
        key,
        representative: first,
    });
    let mut next = 0;
    let mut status = RunStatus::Complete;
    'outer: while next < classes.len() {
        if past(deadline) {
            status = RunStatus::Stopped("max-seconds".into());
            break;
        }
        let face = classes[next].representative.clone();
        next += 1;
        let ridges = match facet_ridges(&face, cutoff, deadline) {
            Ok(r) => r,
            Err(Error::Timeout) => {
                status = RunStatus::Stopped("max-seconds".into());
                break;
            }
            Err(e) => return Err(e),
        };
        for ridge in ridges {
            let g = rotate(&RotationContext {
                polytope: p,
                facet: &face,
                ridge_support: ridge.support(),
            })?;
            if !p.is_facet(g.support()) {
                return Err(Error::InvariantViolation(
                    "rotation emitted a non-facet".into(),
                ));
            }
            let key = group.canonical_set(g.tight())?;
            if !store.contains_key(&key) {
                if let Some(max) = limits.max_classes {
                    if classes.len() >= max {
                        status = RunStatus::Stopped("max-classes".into());
                        break 'outer;
                    }
                }
                store.insert(key.clone(), classes.len());
                classes.push(FacetClass {
                    key,
                    representative: g,
                });
            }
        }
    }
    Ok((classes, status))
}

fn past(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() > d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rat;

    fn rat(x: i64) -> Rat {
        Rat::from_integer(Int::from(x))
    }

    fn unit_square() -> Arc<VPolytope> {
        let verts = vec![
            vec![rat(0), rat(0)],
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ];
        Arc::new(VPolytope::new("square", verts).unwrap())
    }

    #[test]
    fn square_has_four_facets() {
        let p = unit_square();
        let facets = double_description(&p).unwrap();
        assert_eq!(facets.len(), 4);
        for f in &facets {
            assert!(p.is_facet(f.support()));
            assert_eq!(f.tight().len(), 2);
        }
    }

    #[test]
    fn point_polytope_has_no_facets() {
        let p = Arc::new(VPolytope::new("pt", vec![vec![rat(0), rat(0)]]).unwrap());
        assert!(double_description(&p).unwrap().is_empty());
    }

    #[test]
    fn segment_has_two_point_facets() {
        let p = Arc::new(VPolytope::new("seg", vec![vec![rat(0)], vec![rat(1)]]).unwrap());
        let facets = double_description(&p).unwrap();
        assert_eq!(facets.len(), 2);
    }

    #[test]
    fn cut_k3_has_four_triangle_facets() {
        let g = crate::generators::MultipartiteGraph::new(vec![3]).unwrap();
        let (p, _) = crate::generators::cut_polytope(&g).unwrap();
        let facets = double_description(&p).unwrap();
        assert_eq!(facets.len(), 4);
    }

    #[test]
    fn square_with_dihedral_group_has_one_class() {
        let p = unit_square();
        // Vertex order: (0,0), (1,0), (0,1), (1,1). Rotation and a flip.
        let rot = crate::symmetry::Perm::new(vec![1, 3, 0, 2]).unwrap();
        let flip = crate::symmetry::Perm::new(vec![1, 0, 3, 2]).unwrap();
        let g = Arc::new(PermGroup::new(4, vec![rot, flip]).unwrap());
        let (classes, status) = ad_enumerate(&p, &g, 10, &Limits::default()).unwrap();
        assert!(status.is_complete());
        assert_eq!(classes.len(), 1);
    }

    #[test]
    fn ad_with_trivial_group_matches_dd_count() {
        let p = unit_square();
        let g = Arc::new(PermGroup::trivial(4));
        let (classes, status) = ad_enumerate(&p, &g, 10, &Limits::default()).unwrap();
        assert!(status.is_complete());
        assert_eq!(classes.len(), 4);
    }

    #[test]
    fn chsh_dd_finds_24_facets() {
        let s = crate::generators::BellScenario::new(2, 2, 2, 2).unwrap();
        let (p, _) = crate::generators::bell_polytope(&s).unwrap();
        let facets = double_description(&p).unwrap();
        assert_eq!(facets.len(), 24);
        let mut by_size: HashMap<usize, usize> = HashMap::new();
        for f in &facets {
            *by_size.entry(f.tight().len()).or_default() += 1;
        }
        assert_eq!(by_size.get(&12), Some(&16));
        assert_eq!(by_size.get(&8), Some(&8));
    }
}
