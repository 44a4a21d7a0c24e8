//! V-representation polytopes, normalized inequalities and faces.
//!
//! A face is identified by its tight set: the vertex indices at which its
//! supporting inequality holds with equality. Tight sets, not coefficient
//! vectors, are the canonical identity of a face; on lower-dimensional faces
//! the supporting inequality is only unique modulo the affine hull.

use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{homogenize, Int, Rat, SpanTracker};
use crate::{Error, Result};

/// A linear inequality `<a, x> <= b`, stored in normalized form: integer
/// entries with overall gcd 1. The orientation (feasible half-space) is
/// fixed at construction and never flipped by normalization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    coeffs: Vec<Int>,
    rhs: Int,
}

impl Inequality {
    /// Builds from integer data, dividing out the gcd.
    pub fn from_integer(mut coeffs: Vec<Int>, mut rhs: Int) -> Result<Self> {
        let mut g = rhs.abs();
        for c in &coeffs {
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if g.is_zero() {
            return Err(Error::ZeroInequality);
        }
        if !g.is_one() {
            for c in coeffs.iter_mut() {
                *c = &*c / &g;
            }
            rhs = &rhs / &g;
        }
        Ok(Inequality { coeffs, rhs })
    }

    /// Builds from rational data by clearing denominators first.
    pub fn from_rational(coeffs: &[Rat], rhs: &Rat) -> Result<Self> {
        let mut lambda = rhs.denom().clone();
        for c in coeffs {
            lambda = lambda.lcm(c.denom());
        }
        let ints: Vec<Int> = coeffs
            .iter()
            .map(|c| c.numer() * (&lambda / c.denom()))
            .collect();
        let b = rhs.numer() * (&lambda / rhs.denom());
        Self::from_integer(ints, b)
    }

    /// A kernel column `c` acting on homogenized rows, read as the inequality
    /// `<a, x> <= b` that is tight wherever `c . (p, 1) = 0`.
    pub fn from_kernel_column(col: &[Int]) -> Result<Self> {
        let d = col.len() - 1;
        let coeffs = col[..d].iter().map(|c| -c.clone()).collect();
        Self::from_integer(coeffs, col[d].clone())
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn rhs(&self) -> &Int {
        &self.rhs
    }

    /// Flips the inequality to `<-a, x> <= -b` (the opposite half-space).
    pub fn flipped(&self) -> Self {
        Inequality {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rhs: -&self.rhs,
        }
    }

    /// Scaled residual against a homogenized row `lambda * (v, 1)`: equals
    /// `lambda * (b - <a, v>)`, so sign and zero tests are exact.
    pub fn residual_hom(&self, row: &[Int]) -> Int {
        debug_assert_eq!(row.len(), self.coeffs.len() + 1);
        let mut acc = &self.rhs * &row[self.coeffs.len()];
        for (c, x) in self.coeffs.iter().zip(row) {
            if !c.is_zero() && !x.is_zero() {
                acc -= c * x;
            }
        }
        acc
    }

    /// The combination `den * self + num * other`, reduced. Errors if zero.
    pub fn combine(&self, den: &Int, other: &Inequality, num: &Int) -> Result<Self> {
        let coeffs: Vec<Int> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(h, f)| h * den + f * num)
            .collect();
        let rhs = &self.rhs * den + &other.rhs * num;
        Self::from_integer(coeffs, rhs)
    }
}

/// Multiplies by the unique positive rational making all entries integers
/// with overall gcd 1. Idempotent; the feasible half-space is preserved.
pub fn normalize(ineq: &Inequality) -> Inequality {
    // Construction keeps inequalities normalized, so this is the identity.
    Inequality::from_integer(ineq.coeffs.clone(), ineq.rhs.clone())
        .expect("a stored inequality is nonzero")
}

/// A polytope given by its vertex list.
///
/// `root_index` maps local vertex positions to indices of the root polytope
/// the face chain started from, so faces at any depth can be canonicalized
/// under the root symmetry group. For a root polytope it is the identity.
pub struct VPolytope {
    vertices: Vec<Vec<Rat>>,
    hom: Vec<Vec<Int>>,
    ambient_dim: usize,
    root_index: Vec<usize>,
    intrinsic_dim: OnceLock<usize>,
    name: String,
}

impl std::fmt::Debug for VPolytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VPolytope")
            .field("name", &self.name)
            .field("n", &self.vertices.len())
            .field("ambient_dim", &self.ambient_dim)
            .finish()
    }
}

impl VPolytope {
    pub fn new(name: impl Into<String>, vertices: Vec<Vec<Rat>>) -> Result<Self> {
        let name = name.into();
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidInput(format!("polytope {name} has no vertices")));
        };
        let d = first.len();
        for v in &vertices {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(vertices.len());
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidInput(format!(
                    "polytope {name} has duplicate vertices"
                )));
            }
        }
        let hom = vertices.iter().map(|v| homogenize(v)).collect();
        let root_index = (0..vertices.len()).collect();
        Ok(VPolytope {
            vertices,
            hom,
            ambient_dim: d,
            root_index,
            intrinsic_dim: OnceLock::new(),
            name,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[Rat] {
        &self.vertices[i]
    }

    /// Homogenized integer rows, one per vertex.
    pub fn hom_rows(&self) -> &[Vec<Int>] {
        &self.hom
    }

    pub fn hom_row(&self, i: usize) -> &[Int] {
        &self.hom[i]
    }

    /// Local position -> root polytope vertex index.
    pub fn root_index(&self) -> &[usize] {
        &self.root_index
    }

    /// Dimension of the affine hull. Computed lazily and cached.
    pub fn intrinsic_dim(&self) -> usize {
        *self.intrinsic_dim.get_or_init(|| {
            let mut tracker = SpanTracker::new(self.ambient_dim + 1);
            for row in &self.hom {
                tracker.push_row(row);
                if tracker.rank() == self.ambient_dim + 1 {
                    break;
                }
            }
            tracker.rank() - 1
        })
    }

    /// Exact residual `b - <a, v_i>`.
    pub fn residual(&self, q: &Inequality, i: usize) -> Result<Rat> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        if q.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: q.dim(),
            });
        }
        let scaled = q.residual_hom(&self.hom[i]);
        let lambda = self.hom[i][self.ambient_dim].clone();
        Ok(Rat::new(scaled, lambda))
    }

    /// Indices where the residual is zero, plus a validity flag (false if any
    /// residual is negative).
    pub fn tight_set(&self, q: &Inequality) -> TightSet {
        let mut indices = Vec::new();
        let mut valid = true;
        for (i, row) in self.hom.iter().enumerate() {
            let r = q.residual_hom(row);
            if r.is_zero() {
                indices.push(i);
            } else if r.is_negative() {
                valid = false;
            }
        }
        TightSet { indices, valid }
    }

    /// True iff `q` is valid on all vertices and its tight vertices have
    /// affine rank equal to the intrinsic dimension.
    pub fn is_facet(&self, q: &Inequality) -> bool {
        let ts = self.tight_set(q);
        if !ts.valid || ts.indices.is_empty() {
            return false;
        }
        self.rank_of(&ts.indices) == self.intrinsic_dim()
    }

    /// Affine rank of a vertex subset, stopping early at the intrinsic bound.
    pub fn rank_of(&self, indices: &[usize]) -> usize {
        let cap = self.intrinsic_dim() + 1;
        let mut tracker = SpanTracker::new(self.ambient_dim + 1);
        for &i in indices {
            tracker.push_row(&self.hom[i]);
            if tracker.rank() >= cap {
                break;
            }
        }
        tracker.rank()
    }

    /// Kernel columns of a vertex subset (functionals over homogenized rows).
    pub fn kernel_of(&self, indices: &[usize]) -> Vec<Vec<Int>> {
        let mut tracker = SpanTracker::new(self.ambient_dim + 1);
        for &i in indices {
            tracker.push_row(&self.hom[i]);
        }
        tracker.into_kernel_columns()
    }
}

/// Result of a tight-set query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightSet {
    pub indices: Vec<usize>,
    pub valid: bool,
}

/// A face of a polytope: a supporting inequality together with the vertex
/// positions it is tight on. Indices are local to `owner`; map them through
/// `owner.root_index()` to talk about the root polytope.
#[derive(Clone, Debug)]
pub struct Face {
    owner: Arc<VPolytope>,
    tight: Vec<usize>,
    support: Inequality,
}

impl Face {
    pub fn new(owner: Arc<VPolytope>, tight: Vec<usize>, support: Inequality) -> Result<Self> {
        if tight.is_empty() {
            return Err(Error::InvalidInput("face with empty tight set".into()));
        }
        debug_assert!(tight.windows(2).all(|w| w[0] < w[1]), "tight set sorted");
        debug_assert_eq!(
            {
                let ts = owner.tight_set(&support);
                (ts.indices.clone(), ts.valid)
            },
            (tight.clone(), true),
            "support must be valid and tight exactly on the face"
        );
        Ok(Face {
            owner,
            tight,
            support,
        })
    }

    pub fn owner(&self) -> &Arc<VPolytope> {
        &self.owner
    }

    pub fn tight(&self) -> &[usize] {
        &self.tight
    }

    pub fn support(&self) -> &Inequality {
        &self.support
    }

    /// Tight set expressed as root polytope indices, sorted ascending.
    pub fn root_tight(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .tight
            .iter()
            .map(|&i| self.owner.root_index()[i])
            .collect();
        t.sort_unstable();
        t
    }

    /// Face dimension: affine rank of the tight vertices minus one.
    pub fn dim(&self) -> usize {
        self.owner.rank_of(&self.tight) - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.tight.len()
    }
}

/// The face as a polytope of its own: tight vertices in original coordinates,
/// with root index bookkeeping composed through.
pub fn subface_polytope(face: &Face) -> Result<Arc<VPolytope>> {
    let owner = face.owner();
    let vertices: Vec<Vec<Rat>> = face
        .tight()
        .iter()
        .map(|&i| owner.vertex(i).to_vec())
        .collect();
    let hom: Vec<Vec<Int>> = face.tight().iter().map(|&i| owner.hom_row(i).to_vec()).collect();
    let root_index: Vec<usize> = face
        .tight()
        .iter()
        .map(|&i| owner.root_index()[i])
        .collect();
    let sub = VPolytope {
        vertices,
        hom,
        ambient_dim: owner.ambient_dim(),
        root_index,
        intrinsic_dim: OnceLock::new(),
        name: format!("{}/face", owner.name()),
    };
    Ok(Arc::new(sub))
}

/// Reconstructs a supporting inequality for a claimed face of `p`: valid on
/// all vertices of `p` and tight exactly on `tight`. Fails when no such
/// hyperplane exists (the subset is not a face).
pub fn support_for(p: &VPolytope, tight: &[usize]) -> Result<Inequality> {
    let all: Vec<usize> = (0..p.len()).collect();
    support_for_within(p, &all, tight)
}

/// Like [`support_for`], but validity and exact tightness are only required
/// on the vertex subset `within`. Residuals outside `within` are
/// unconstrained, which is what a ridge support inside a facet needs.
pub fn support_for_within(p: &VPolytope, within: &[usize], tight: &[usize]) -> Result<Inequality> {
    if tight.is_empty() {
        return Err(Error::InvalidInput("support_for with empty tight set".into()));
    }
    for col in p.kernel_of(tight) {
        let Ok(q) = Inequality::from_kernel_column(&col) else {
            continue;
        };
        for oriented in [q.flipped(), q] {
            let mut ok = true;
            let mut tight_within = Vec::new();
            for &i in within {
                let r = oriented.residual_hom(p.hom_row(i));
                if r.is_negative() {
                    ok = false;
                    break;
                }
                if r.is_zero() {
                    tight_within.push(i);
                }
            }
            if ok && tight_within == tight {
                return Ok(oriented);
            }
        }
    }
    Err(Error::InvalidInput(
        "no supporting hyperplane tight exactly on the given set".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn rat(x: i64) -> Rat {
        Rat::from_integer(Int::from(x))
    }

    pub fn unit_square() -> Arc<VPolytope> {
        let verts = vec![
            vec![rat(0), rat(0)],
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ];
        Arc::new(VPolytope::new("square", verts).unwrap())
    }

    fn ineq(a: &[i64], b: i64) -> Inequality {
        Inequality::from_integer(a.iter().map(|&x| Int::from(x)).collect(), Int::from(b)).unwrap()
    }

    #[test]
    fn normalize_divides_gcd() {
        let q = ineq(&[2, 4], 6);
        assert_eq!(q.coeffs(), &[Int::from(1), Int::from(2)]);
        assert_eq!(q.rhs(), &Int::from(3));
    }

    #[test]
    fn normalize_clears_denominators() {
        let a = vec![Rat::new(Int::from(1), Int::from(2)), Rat::new(Int::from(1), Int::from(3))];
        let q = Inequality::from_rational(&a, &rat(1)).unwrap();
        assert_eq!(q.coeffs(), &[Int::from(3), Int::from(2)]);
        assert_eq!(q.rhs(), &Int::from(6));
    }

    #[test]
    fn normalize_is_idempotent() {
        let q = ineq(&[1, 2], 3);
        assert_eq!(normalize(&q), q);
    }

    #[test]
    fn zero_functional_is_rejected() {
        assert!(matches!(
            Inequality::from_integer(vec![Int::zero(), Int::zero()], Int::zero()),
            Err(Error::ZeroInequality)
        ));
    }

    #[test]
    fn residuals_on_the_square() {
        let p = unit_square();
        let x_le_1 = ineq(&[1, 0], 1);
        assert_eq!(p.residual(&x_le_1, 0).unwrap(), rat(1));
        assert_eq!(p.residual(&x_le_1, 3).unwrap(), rat(0));
        let x_le_0 = ineq(&[1, 0], 0);
        assert_eq!(p.residual(&x_le_0, 1).unwrap(), rat(-1));
    }

    #[test]
    fn residual_index_out_of_range() {
        let p = unit_square();
        assert!(matches!(
            p.residual(&ineq(&[1, 0], 1), 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tight_set_reports_validity() {
        let p = unit_square();
        let ts = p.tight_set(&ineq(&[1, 0], 1));
        assert_eq!(ts.indices, vec![1, 3]);
        assert!(ts.valid);

        let ts = p.tight_set(&ineq(&[1, 1], 0));
        assert_eq!(ts.indices, vec![0]);
        assert!(!ts.valid);
    }

    #[test]
    fn facet_test_on_square() {
        let p = unit_square();
        assert!(p.is_facet(&ineq(&[1, 0], 1)));
        // tight only at (1,1): a vertex, not a facet
        assert!(!p.is_facet(&ineq(&[1, 1], 2)));
    }

    #[test]
    fn subface_of_square_facet_is_a_segment() {
        let p = unit_square();
        let q = ineq(&[1, 0], 1);
        let ts = p.tight_set(&q);
        let f = Face::new(p.clone(), ts.indices, q).unwrap();
        let sub = subface_polytope(&f).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.intrinsic_dim(), 1);
        assert_eq!(sub.root_index(), &[1, 3]);
    }

    #[test]
    fn subface_of_segment_endpoint_is_a_point() {
        let verts = vec![vec![rat(0)], vec![rat(1)]];
        let seg = Arc::new(VPolytope::new("segment", verts).unwrap());
        let q = ineq(&[1], 1);
        let f = Face::new(seg.clone(), vec![1], q).unwrap();
        let sub = subface_polytope(&f).unwrap();
        assert_eq!(sub.len(), 1);
        assert_eq!(sub.intrinsic_dim(), 0);
    }

    #[test]
    fn support_reconstruction_on_square() {
        let p = unit_square();
        let q = support_for(&p, &[1, 3]).unwrap();
        assert!(p.is_facet(&q));
        assert_eq!(p.tight_set(&q).indices, vec![1, 3]);
        // a non-face subset has no support
        assert!(support_for(&p, &[0, 3]).is_err());
    }
}
