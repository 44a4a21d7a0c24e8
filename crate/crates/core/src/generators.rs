//! Constructions of the two polytope families and their symmetry groups.
//!
//! Vertex index encodings are frozen and documented here because permutations
//! are stored as index maps and must be stable across runs.
//!
//! Bell polytopes: a vertex is a pair of deterministic strategies
//! `(alpha: inputs -> outputs, beta)` embedded in Collins-Gisin coordinates.
//! Coordinate layout (0-based, one output dropped per input):
//!   - A marginals: offset `x*(na-1) + a` for `x < ma`, `a < na-1`;
//!   - B marginals: offset `ma*(na-1) + y*(nb-1) + b`;
//!   - joint block:  offset `ma*(na-1) + mb*(nb-1) + ((x*mb + y)*(na-1) + a)*(nb-1) + b`.
//! Vertex index: `encode(alpha, na) * nb^mb + encode(beta, nb)` where
//! `encode(s, base) = sum_x s(x) * base^x` (input 0 is the least significant
//! digit).
//!
//! Cut polytopes: graph vertices are numbered by part in ascending part
//! order; edges are all cross-part pairs `(i, j)`, `i < j`, in lexicographic
//! order. A polytope vertex is the cut vector of a subset `S` of graph
//! vertices excluding vertex 0 (which removes the `S ~ complement`
//! duplication); its index is the bitmask `sum_{v in S} 2^(v-1)`.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::exact::{Int, Rat};
use crate::model::VPolytope;
use crate::symmetry::{Perm, PermGroup};
use crate::{Error, Result};

/// A bipartite Bell scenario: inputs and outputs per party.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BellScenario {
    pub ma: usize,
    pub mb: usize,
    pub na: usize,
    pub nb: usize,
}

impl BellScenario {
    pub fn new(ma: usize, mb: usize, na: usize, nb: usize) -> Result<Self> {
        if ma < 1 || mb < 1 {
            return Err(Error::InvalidScenario(format!(
                "inputs per party must be >= 1 (got ma={ma}, mb={mb})"
            )));
        }
        if na < 2 || nb < 2 {
            return Err(Error::InvalidScenario(format!(
                "outputs per party must be >= 2 (got na={na}, nb={nb})"
            )));
        }
        Ok(BellScenario { ma, mb, na, nb })
    }

    pub fn dimension(&self) -> usize {
        self.ma * (self.na - 1)
            + self.mb * (self.nb - 1)
            + self.ma * self.mb * (self.na - 1) * (self.nb - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.na.pow(self.ma as u32) * self.nb.pow(self.mb as u32)
    }

    pub fn name(&self) -> String {
        format!("L_{}_{}_{}_{}", self.ma, self.mb, self.na, self.nb)
    }
}

fn encode(strategy: &[usize], base: usize) -> usize {
    let mut acc = 0;
    for (x, &o) in strategy.iter().enumerate() {
        acc += o * base.pow(x as u32);
    }
    acc
}

fn decode(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut s = Vec::with_capacity(len);
    for _ in 0..len {
        s.push(code % base);
        code /= base;
    }
    s
}

fn bell_index(s: &BellScenario, alpha: &[usize], beta: &[usize]) -> usize {
    encode(alpha, s.na) * s.nb.pow(s.mb as u32) + encode(beta, s.nb)
}

fn bell_coords(s: &BellScenario, alpha: &[usize], beta: &[usize]) -> Vec<Rat> {
    let one = Rat::one();
    let zero = Rat::zero();
    let mut v = Vec::with_capacity(s.dimension());
    for x in 0..s.ma {
        for a in 0..s.na - 1 {
            v.push(if alpha[x] == a { one.clone() } else { zero.clone() });
        }
    }
    for y in 0..s.mb {
        for b in 0..s.nb - 1 {
            v.push(if beta[y] == b { one.clone() } else { zero.clone() });
        }
    }
    for x in 0..s.ma {
        for y in 0..s.mb {
            for a in 0..s.na - 1 {
                for b in 0..s.nb - 1 {
                    v.push(if alpha[x] == a && beta[y] == b {
                        one.clone()
                    } else {
                        zero.clone()
                    });
                }
            }
        }
    }
    v
}

/// Builds a vertex permutation from a map on strategy pairs.
fn strategy_perm(
    s: &BellScenario,
    f: impl Fn(&[usize], &[usize]) -> (Vec<usize>, Vec<usize>),
) -> Perm {
    let n = s.vertex_count();
    let nb_pow = s.nb.pow(s.mb as u32);
    let mut image = vec![0u32; n];
    for i in 0..n {
        let alpha = decode(i / nb_pow, s.na, s.ma);
        let beta = decode(i % nb_pow, s.nb, s.mb);
        let (a2, b2) = f(&alpha, &beta);
        image[i] = bell_index(s, &a2, &b2) as u32;
    }
    Perm::new(image).expect("relabelings are bijective on strategies")
}

/// Deterministic-strategy vertices of the Bell polytope together with the
/// relabeling group (inputs, outputs per input, and the party swap when the
/// scenario is symmetric), expressed as vertex permutations.
pub fn bell_polytope(s: &BellScenario) -> Result<(Arc<VPolytope>, Arc<PermGroup>)> {
    let n = s.vertex_count();
    let nb_pow = s.nb.pow(s.mb as u32);
    let mut vertices = vec![Vec::new(); n];
    for i in 0..n {
        let alpha = decode(i / nb_pow, s.na, s.ma);
        let beta = decode(i % nb_pow, s.nb, s.mb);
        vertices[i] = bell_coords(s, &alpha, &beta);
    }
    let polytope = Arc::new(VPolytope::new(s.name(), vertices)?);

    let mut gens = Vec::new();
    for x in 0..s.ma.saturating_sub(1) {
        gens.push(strategy_perm(s, |alpha, beta| {
            let mut a = alpha.to_vec();
            a.swap(x, x + 1);
            (a, beta.to_vec())
        }));
    }
    for y in 0..s.mb.saturating_sub(1) {
        gens.push(strategy_perm(s, |alpha, beta| {
            let mut b = beta.to_vec();
            b.swap(y, y + 1);
            (alpha.to_vec(), b)
        }));
    }
    for x in 0..s.ma {
        for o in 0..s.na - 1 {
            gens.push(strategy_perm(s, |alpha, beta| {
                let mut a = alpha.to_vec();
                if a[x] == o {
                    a[x] = o + 1;
                } else if a[x] == o + 1 {
                    a[x] = o;
                }
                (a, beta.to_vec())
            }));
        }
    }
    for y in 0..s.mb {
        for o in 0..s.nb - 1 {
            gens.push(strategy_perm(s, |alpha, beta| {
                let mut b = beta.to_vec();
                if b[y] == o {
                    b[y] = o + 1;
                } else if b[y] == o + 1 {
                    b[y] = o;
                }
                (alpha.to_vec(), b)
            }));
        }
    }
    if s.ma == s.mb && s.na == s.nb {
        gens.push(strategy_perm(s, |alpha, beta| {
            (beta.to_vec(), alpha.to_vec())
        }));
    }
    let group = Arc::new(PermGroup::new(n, gens)?);
    Ok((polytope, group))
}

/// A complete multipartite graph given by its part sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultipartiteGraph {
    parts: Vec<usize>,
}

impl MultipartiteGraph {
    /// Part sizes are sorted ascending at construction; a single part of
    /// size N means the complete graph K_N and is normalized to N singleton
    /// parts.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(Error::DegenerateGraph("part sizes must be positive".into()));
        }
        let mut parts = if parts.len() == 1 {
            vec![1; parts[0]]
        } else {
            parts
        };
        parts.sort_unstable();
        let n: usize = parts.iter().sum();
        if n < 2 {
            return Err(Error::DegenerateGraph(format!(
                "need at least 2 graph vertices (got {n})"
            )));
        }
        Ok(MultipartiteGraph { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn graph_vertex_count(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Part id of each graph vertex, in ascending part order.
    fn part_of(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.graph_vertex_count());
        for (k, &size) in self.parts.iter().enumerate() {
            out.extend(std::iter::repeat(k).take(size));
        }
        out
    }

    /// Cross-part edges `(i, j)`, `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let part = self.part_of();
        let n = self.graph_vertex_count();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if part[i] != part[j] {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        let n = self.graph_vertex_count();
        let sq: usize = self.parts.iter().map(|p| p * p).sum();
        (n * n - sq) / 2
    }

    pub fn vertex_count(&self) -> usize {
        1usize << (self.graph_vertex_count() - 1)
    }

    pub fn name(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        format!("K_{}", parts.join("_"))
    }
}

fn cut_coords(edges: &[(usize, usize)], mask: usize) -> Vec<Rat> {
    edges
        .iter()
        .map(|&(i, j)| {
            let a = i > 0 && (mask >> (i - 1)) & 1 == 1;
            let b = j > 0 && (mask >> (j - 1)) & 1 == 1;
            if a != b {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect()
}

/// Canonical bitmask for a subset of graph vertices given as a mask over all
/// N vertices (bit v = vertex v): complements away vertex 0 if present.
fn canonical_mask(full_mask: usize, n_graph: usize) -> usize {
    let all = (1usize << n_graph) - 1;
    let chosen = if full_mask & 1 == 1 { all & !full_mask } else { full_mask };
    chosen >> 1
}

/// Builds a vertex permutation of the cut polytope from a map on full vertex
/// masks (bit v = graph vertex v, including vertex 0).
fn cut_perm(n_graph: usize, f: impl Fn(usize) -> usize) -> Perm {
    let n = 1usize << (n_graph - 1);
    let mut image = vec![0u32; n];
    for m in 0..n {
        let full = m << 1;
        image[m] = canonical_mask(f(full), n_graph) as u32;
    }
    Perm::new(image).expect("graph symmetries are bijective on cuts")
}

/// Cut vectors of a complete multipartite graph, one coordinate per edge,
/// together with the group generated by graph automorphisms and single-vertex
/// switchings, expressed as vertex permutations.
pub fn cut_polytope(g: &MultipartiteGraph) -> Result<(Arc<VPolytope>, Arc<PermGroup>)> {
    let n_graph = g.graph_vertex_count();
    let edges = g.edges();
    let n = g.vertex_count();
    let mut vertices = Vec::with_capacity(n);
    for m in 0..n {
        vertices.push(cut_coords(&edges, m));
    }
    let polytope = Arc::new(VPolytope::new(g.name(), vertices)?);

    let mut gens = Vec::new();
    // Within-part adjacent transpositions.
    let mut offset = 0;
    for &size in g.parts() {
        for v in offset..offset + size - 1 {
            gens.push(cut_perm(n_graph, move |mask| {
                let lo = (mask >> v) & 1;
                let hi = (mask >> (v + 1)) & 1;
                (mask & !(0b11 << v)) | (hi << v) | (lo << (v + 1))
            }));
        }
        offset += size;
    }
    // Swaps of adjacent equal-size parts.
    let mut starts = Vec::with_capacity(g.parts().len());
    let mut acc = 0;
    for &size in g.parts() {
        starts.push(acc);
        acc += size;
    }
    for k in 0..g.parts().len().saturating_sub(1) {
        if g.parts()[k] != g.parts()[k + 1] {
            continue;
        }
        let size = g.parts()[k];
        let s0 = starts[k];
        let s1 = starts[k + 1];
        gens.push(cut_perm(n_graph, move |mask| {
            let mut out = mask;
            for i in 0..size {
                let a = (mask >> (s0 + i)) & 1;
                let b = (mask >> (s1 + i)) & 1;
                out = (out & !(1 << (s0 + i)) & !(1 << (s1 + i)))
                    | (b << (s0 + i))
                    | (a << (s1 + i));
            }
            out
        }));
    }
    // Single-vertex switchings.
    for v in 0..n_graph {
        gens.push(cut_perm(n_graph, move |mask| mask ^ (1 << v)));
    }
    let group = Arc::new(PermGroup::new(n, gens)?);
    Ok((polytope, group))
}

/// Construction self-check report.
#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub name: String,
    pub vertex_count: usize,
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub generator_count: usize,
}

/// Asserts vertex count, dimension formula, distinctness, full
/// dimensionality, and that every group generator permutes the vertex list
/// consistently with a coordinate transformation (checked by re-deriving the
/// image of a supporting hyperplane from the image tight set).
pub fn verify_scenario_counts(
    polytope: &Arc<VPolytope>,
    group: &PermGroup,
    expected_vertices: usize,
    expected_dim: usize,
) -> Result<ScenarioReport> {
    if polytope.len() != expected_vertices {
        return Err(Error::ConstructionBug(format!(
            "{}: vertex count {} != expected {}",
            polytope.name(),
            polytope.len(),
            expected_vertices
        )));
    }
    if polytope.ambient_dim() != expected_dim {
        return Err(Error::ConstructionBug(format!(
            "{}: ambient dimension {} != expected {}",
            polytope.name(),
            polytope.ambient_dim(),
            expected_dim
        )));
    }
    if polytope.intrinsic_dim() != polytope.ambient_dim() {
        return Err(Error::ConstructionBug(format!(
            "{}: polytope is not full-dimensional (intrinsic {} < ambient {})",
            polytope.name(),
            polytope.intrinsic_dim(),
            polytope.ambient_dim()
        )));
    }
    if group.degree() != polytope.len() {
        return Err(Error::ConstructionBug(format!(
            "{}: group degree {} != vertex count {}",
            polytope.name(),
            group.degree(),
            polytope.len()
        )));
    }
    for (gi, perm) in group.generators().iter().enumerate() {
        let mut seen = vec![false; polytope.len()];
        for i in 0..polytope.len() {
            let img = perm.apply(i);
            if img >= polytope.len() || seen[img] {
                return Err(Error::ConstructionBug(format!(
                    "{}: generator {gi} is not a bijection on vertex indices",
                    polytope.name()
                )));
            }
            seen[img] = true;
        }
    }
    // Each generator must map faces to faces. It suffices to check one
    // nontrivial supporting hyperplane: its image tight set must again admit
    // a supporting hyperplane tight on exactly that set.
    if let Some(q) = first_proper_support(polytope) {
        let tight = polytope.tight_set(&q).indices;
        for (gi, perm) in group.generators().iter().enumerate() {
            let mut image: Vec<usize> = tight.iter().map(|&i| perm.apply(i)).collect();
            image.sort_unstable();
            if crate::model::support_for(polytope, &image).is_err() {
                return Err(Error::ConstructionBug(format!(
                    "{}: generator {gi} does not map the test face to a face",
                    polytope.name()
                )));
            }
        }
    }
    Ok(ScenarioReport {
        name: polytope.name().to_string(),
        vertex_count: polytope.len(),
        ambient_dim: polytope.ambient_dim(),
        intrinsic_dim: polytope.intrinsic_dim(),
        generator_count: group.generators().len(),
    })
}

/// A coordinate functional shifted to its maximum, giving a proper supporting
/// hyperplane if the polytope is not a point.
fn first_proper_support(p: &Arc<VPolytope>) -> Option<crate::model::Inequality> {
    for coord in 0..p.ambient_dim() {
        let mut coeffs = vec![Int::zero(); p.ambient_dim()];
        coeffs[coord] = Int::one();
        let max = p
            .vertices()
            .iter()
            .map(|v| v[coord].clone())
            .max()
            .expect("polytope is nonempty");
        let q = crate::model::Inequality::from_rational(
            &coeffs.iter().map(|c| Rat::from_integer(c.clone())).collect::<Vec<_>>(),
            &max,
        )
        .ok()?;
        let ts = p.tight_set(&q);
        if ts.valid && ts.indices.len() < p.len() {
            return Some(q);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn chsh_scenario_counts() {
        let s = BellScenario::new(2, 2, 2, 2).unwrap();
        assert_eq!(s.vertex_count(), 16);
        assert_eq!(s.dimension(), 8);
        let (p, g) = bell_polytope(&s).unwrap();
        verify_scenario_counts(&p, &g, 16, 8).unwrap();
        assert_eq!(p.intrinsic_dim(), 8);
    }

    #[test]
    fn l3322_scenario_counts() {
        let s = BellScenario::new(3, 3, 2, 2).unwrap();
        assert_eq!(s.vertex_count(), 64);
        assert_eq!(s.dimension(), 15);
        let (p, g) = bell_polytope(&s).unwrap();
        verify_scenario_counts(&p, &g, 64, 15).unwrap();
    }

    #[test]
    fn one_input_scenario_is_legal() {
        let s = BellScenario::new(1, 2, 2, 2).unwrap();
        assert_eq!(s.vertex_count(), 8);
        let (p, g) = bell_polytope(&s).unwrap();
        verify_scenario_counts(&p, &g, 8, s.dimension()).unwrap();
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        assert!(BellScenario::new(2, 2, 1, 2).is_err());
        assert!(BellScenario::new(0, 2, 2, 2).is_err());
    }

    #[test]
    fn k3_cut_polytope() {
        let g = MultipartiteGraph::new(vec![3]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.vertex_count(), 4);
        let (p, _) = cut_polytope(&g).unwrap();
        let got: HashSet<Vec<u8>> = p
            .vertices()
            .iter()
            .map(|v| v.iter().map(|x| if x.is_integer() && !num_traits::Zero::is_zero(x) { 1u8 } else { 0u8 }).collect())
            .collect();
        let want: HashSet<Vec<u8>> = [
            vec![0, 0, 0],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn k1133_edge_and_vertex_counts() {
        let g = MultipartiteGraph::new(vec![1, 1, 3, 3]).unwrap();
        assert_eq!(g.graph_vertex_count(), 8);
        assert_eq!(g.edge_count(), 22);
        assert_eq!(g.edges().len(), 22);
        assert_eq!(g.vertex_count(), 128);
        let (p, grp) = cut_polytope(&g).unwrap();
        verify_scenario_counts(&p, &grp, 128, 22).unwrap();
    }

    #[test]
    fn k46_counts() {
        let g = MultipartiteGraph::new(vec![4, 6]).unwrap();
        assert_eq!(g.graph_vertex_count(), 10);
        assert_eq!(g.edge_count(), 24);
        assert_eq!(g.vertex_count(), 512);
    }

    #[test]
    fn degenerate_graphs_are_rejected() {
        assert!(MultipartiteGraph::new(vec![]).is_err());
        assert!(MultipartiteGraph::new(vec![1]).is_err());
        assert!(MultipartiteGraph::new(vec![2, 0]).is_err());
    }

    #[test]
    fn tampered_generator_is_detected() {
        let s = BellScenario::new(2, 2, 2, 2).unwrap();
        let (p, g) = bell_polytope(&s).unwrap();
        // Replace one generator with a non-face-preserving permutation:
        // swap two vertices only.
        let mut image: Vec<u32> = (0..16).collect();
        image.swap(0, 1);
        let bad = Perm::new(image).unwrap();
        let mut gens = g.generators().to_vec();
        gens[0] = bad;
        let tampered = PermGroup::new(16, gens).unwrap();
        assert!(matches!(
            verify_scenario_counts(&p, &tampered, 16, 8),
            Err(Error::ConstructionBug(_))
        ));
    }
}
