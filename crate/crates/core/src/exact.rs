//! Exact scalar and vector arithmetic plus affine rank and kernel bases.
//!
//! Coordinates are arbitrary-precision rationals ([`Rat`]). The rank and
//! kernel routines work fraction-free on scaled integer rows: a point `p` is
//! homogenized to a positive integer multiple of `(p, 1)`, which leaves both
//! the affine rank and the zero set of any functional unchanged.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact rational scalar. Always in lowest terms with a positive denominator.
pub type Rat = BigRational;
/// Exact arbitrary-precision integer.
pub type Int = BigInt;

/// Homogenizes a rational point to an integer row `lambda * (p, 1)` with
/// `lambda > 0` the least common multiple of the denominators.
pub fn homogenize(point: &[Rat]) -> Vec<Int> {
    let mut lambda = Int::one();
    for c in point {
        lambda = lambda.lcm(c.denom());
    }
    let mut row = Vec::with_capacity(point.len() + 1);
    for c in point {
        row.push(c.numer() * (&lambda / c.denom()));
    }
    row.push(lambda);
    row
}

fn dot(a: &[Int], b: &[Int]) -> Int {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Int::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Divides a vector by the gcd of its entries. Returns false for the zero vector.
pub fn reduce_content(v: &mut [Int]) -> bool {
    let mut g = Int::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
        }
    }
    if g.is_zero() {
        return false;
    }
    if !g.is_one() {
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x = &*x / &g;
            }
        }
    }
    true
}

/// Incremental affine-span tracker over integer rows of a fixed width.
///
/// Maintains an integer basis of the space of functionals annihilating every
/// row pushed so far. Pushing a row either leaves the span unchanged (the row
/// is dependent) or consumes one kernel column. Rank and kernel come out of
/// the same elimination, so callers doing both pay once.
pub struct SpanTracker {
    width: usize,
    cols: Vec<Vec<Int>>,
}

impl SpanTracker {
    pub fn new(width: usize) -> Self {
        let cols = (0..width)
            .map(|i| {
                let mut c = vec![Int::zero(); width];
                c[i] = Int::one();
                c
            })
            .collect();
        SpanTracker { width, cols }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Rank of the rows pushed so far.
    pub fn rank(&self) -> usize {
        self.width - self.cols.len()
    }

    /// Pushes a row; returns true iff it was independent of the rows so far.
    pub fn push_row(&mut self, row: &[Int]) -> bool {
        debug_assert_eq!(row.len(), self.width);
        if self.cols.is_empty() {
            return false;
        }
        let vals: Vec<Int> = self.cols.iter().map(|c| dot(c, row)).collect();
        // Pivot on the smallest nonzero magnitude to limit integer growth.
        let mut pivot: Option<usize> = None;
        for (j, v) in vals.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match pivot {
                None => pivot = Some(j),
                Some(p) => {
                    if v.abs() < vals[p].abs() {
                        pivot = Some(j);
                    }
                }
            }
        }
        let Some(p) = pivot else {
            return false;
        };
        let pcol = self.cols[p].clone();
        let pval = vals[p].clone();
        let mut next = Vec::with_capacity(self.cols.len() - 1);
        for (j, mut col) in std::mem::take(&mut self.cols).into_iter().enumerate() {
            if j == p {
                continue;
            }
            if !vals[j].is_zero() {
                for (c, pc) in col.iter_mut().zip(&pcol) {
                    *c = &*c * &pval - pc * &vals[j];
                }
                reduce_content(&mut col);
            }
            next.push(col);
        }
        self.cols = next;
        true
    }

    /// Remaining kernel columns: functionals vanishing on every pushed row.
    pub fn kernel_columns(&self) -> &[Vec<Int>] {
        &self.cols
    }

    pub fn into_kernel_columns(self) -> Vec<Vec<Int>> {
        self.cols
    }
}

/// Maximum number of affinely independent points; 0 for an empty list.
pub fn affine_rank(points: &[Vec<Rat>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Ok(0);
    };
    let d = first.len();
    let mut tracker = SpanTracker::new(d + 1);
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        tracker.push_row(&homogenize(p));
        if tracker.rank() == d + 1 {
            break;
        }
    }
    Ok(tracker.rank())
}

/// Affine rank of pre-homogenized integer rows, stopping early at `cap`.
pub fn affine_rank_hom(rows: impl Iterator<Item = impl AsRef<[Int]>>, width: usize, cap: usize) -> usize {
    let mut tracker = SpanTracker::new(width);
    for r in rows {
        tracker.push_row(r.as_ref());
        if tracker.rank() >= cap {
            break;
        }
    }
    tracker.rank()
}

/// Basis of all affine functionals `(a, b)` with `<a, p> = b` for every input
/// point. Empty iff the points affinely span the ambient space.
pub fn kernel_basis(points: &[Vec<Rat>]) -> Result<Vec<(Vec<Rat>, Rat)>> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("kernel_basis of empty point set".into()));
    };
    let d = first.len();
    let mut tracker = SpanTracker::new(d + 1);
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        tracker.push_row(&homogenize(p));
    }
    Ok(tracker
        .into_kernel_columns()
        .into_iter()
        .map(|col| column_to_functional(&col))
        .collect())
}

/// Translates a kernel column `c` (acting on homogenized rows) into the
/// affine functional `(a, b)`: `c . (p, 1) = 0` iff `<a, p> = b`.
pub fn column_to_functional(col: &[Int]) -> (Vec<Rat>, Rat) {
    let d = col.len() - 1;
    let a: Vec<Rat> = col[..d].iter().map(|c| Rat::from_integer(-c.clone())).collect();
    let b = Rat::from_integer(col[d].clone());
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_integer(Int::from(x))).collect()
    }

    #[test]
    fn affine_rank_empty_is_zero() {
        assert_eq!(affine_rank(&[]).unwrap(), 0);
    }

    #[test]
    fn affine_rank_of_plane_points() {
        let pts = vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1]), rv(&[1, 1])];
        assert_eq!(affine_rank(&pts).unwrap(), 3);
    }

    #[test]
    fn affine_rank_rejects_mismatched_lengths() {
        let pts = vec![rv(&[0, 0]), rv(&[1])];
        assert!(matches!(
            affine_rank(&pts),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_of_spanning_set_is_empty() {
        let pts = vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])];
        assert!(kernel_basis(&pts).unwrap().is_empty());
    }

    #[test]
    fn kernel_of_origin_has_two_functionals() {
        let pts = vec![rv(&[0, 0])];
        let k = kernel_basis(&pts).unwrap();
        assert_eq!(k.len(), 2);
        for (a, b) in &k {
            // functional vanishes at the origin, so b = 0
            assert!(b.is_zero());
            assert!(a.iter().any(|c| !c.is_zero()));
        }
    }

    #[test]
    fn kernel_of_two_points_is_the_line_through_them() {
        let pts = vec![rv(&[0, 0]), rv(&[1, 1])];
        let k = kernel_basis(&pts).unwrap();
        assert_eq!(k.len(), 1);
        let (a, b) = &k[0];
        // proportional to x - y = 0
        assert!(b.is_zero());
        assert_eq!(a[0], -a[1].clone());
        assert!(!a[0].is_zero());
    }

    #[test]
    fn kernel_functionals_vanish_on_inputs() {
        let pts = vec![rv(&[1, 2, 3]), rv(&[2, 4, 6]), rv(&[0, 1, 0])];
        let rank = affine_rank(&pts).unwrap();
        let k = kernel_basis(&pts).unwrap();
        assert_eq!(k.len(), 4 - rank);
        for (a, b) in &k {
            for p in &pts {
                let lhs: Rat = a.iter().zip(p).map(|(c, x)| c * x).sum();
                assert_eq!(&lhs, b);
            }
        }
    }
}
