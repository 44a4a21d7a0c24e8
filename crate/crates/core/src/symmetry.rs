//! Permutation group machinery: stabilizer chains, canonical (lexicographically
//! minimal) images of index sets, and orbit enumeration.
//!
//! Canonical keys drive all facet-class deduplication: two tight sets are
//! equivalent iff their minimal images under the group agree. The minimal
//! image is computed by descending through point stabilizers of the chosen
//! image elements, branching only on elements that can reach the current
//! minimum and deduplicating partial images, so highly symmetric sets do not
//! blow up the search.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use crate::{Error, Result};

/// A permutation of `0..n` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Perm {
    image: Box<[u32]>,
}

impl Perm {
    pub fn new(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::InvalidGroup(
                    "generator is not a bijection on 0..n".into(),
                ));
            }
            seen[v] = true;
        }
        Ok(Perm {
            image: image.into_boxed_slice(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Perm {
            image: (0..n as u32).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// `(self . other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            image: other.image.iter().map(|&i| self.image[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Perm {
            image: inv.into_boxed_slice(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn first_moved(&self) -> Option<usize> {
        self.image
            .iter()
            .enumerate()
            .find(|(i, &v)| *i as u32 != v)
            .map(|(i, _)| i)
    }

    /// Sorted image of an index set.
    pub fn apply_set(&self, set: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = set.iter().map(|&i| self.image[i as usize]).collect();
        out.sort_unstable();
        out
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }
}

struct ChainLevel {
    base: u32,
    gens: Vec<Arc<Perm>>,
    // orbit point -> (transversal element u with u(base) = point, its inverse)
    transversal: HashMap<u32, (Arc<Perm>, Arc<Perm>)>,
    orbit: Vec<u32>,
    done_pairs: HashSet<(u32, u32)>,
}

impl ChainLevel {
    fn new(degree: usize, base: u32) -> Self {
        let id = Arc::new(Perm::identity(degree));
        let mut transversal = HashMap::new();
        transversal.insert(base, (id.clone(), id));
        ChainLevel {
            base,
            gens: Vec::new(),
            transversal,
            orbit: vec![base],
            done_pairs: HashSet::new(),
        }
    }
}

/// Base preference when opening a new chain level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasePreference {
    SmallestMoved,
    LargestMoved,
}

/// A stabilizer chain with base and strong generating set, built by
/// processing every Schreier generator (deterministic, hence always exact).
pub struct StabChain {
    degree: usize,
    preference: BasePreference,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    pub fn build(degree: usize, gens: &[Perm], preference: BasePreference) -> Self {
        let mut chain = StabChain {
            degree,
            preference,
            levels: Vec::new(),
        };
        for g in gens {
            chain.insert(g.clone());
        }
        chain
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.transversal.len() as u128)
            .product()
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// Strips `g` through levels `from..`; returns the residue and the level
    /// it got stuck at (`levels.len()` if it stripped all the way through).
    fn sift_from(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (idx, level) in self.levels.iter().enumerate().skip(from) {
            let img = g.apply(level.base as usize) as u32;
            match level.transversal.get(&img) {
                Some((_, u_inv)) => g = u_inv.compose(&g),
                None => return (g, idx),
            }
        }
        let len = self.levels.len();
        (g, len)
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (residue, _) = self.sift_from(g.clone(), 0);
        residue.is_identity()
    }

    fn pick_base(&self, g: &Perm) -> u32 {
        let moved: Vec<u32> = (0..self.degree)
            .filter(|&i| g.apply(i) != i)
            .map(|i| i as u32)
            .collect();
        match self.preference {
            BasePreference::SmallestMoved => moved[0],
            BasePreference::LargestMoved => *moved.last().expect("non-identity perm moves a point"),
        }
    }

    fn insert(&mut self, g: Perm) {
        if g.is_identity() {
            return;
        }
        let mut queue: VecDeque<(Perm, usize)> = VecDeque::new();
        queue.push_back((g, 0));
        while let Some((g, from)) = queue.pop_front() {
            let (residue, level_idx) = self.sift_from(g, from);
            if residue.is_identity() {
                continue;
            }
            if level_idx == self.levels.len() {
                let base = self.pick_base(&residue);
                self.levels.push(ChainLevel::new(self.degree, base));
            }
            let residue = Arc::new(residue);
            if self.levels[level_idx].gens.iter().any(|h| **h == *residue) {
                continue;
            }
            self.levels[level_idx].gens.push(residue);
            self.close_level(level_idx, &mut queue);
        }
    }

    /// Extends the orbit at `level_idx` to closure under its current
    /// generators and queues every unprocessed Schreier generator.
    fn close_level(&mut self, level_idx: usize, queue: &mut VecDeque<(Perm, usize)>) {
        loop {
            let level = &self.levels[level_idx];
            let mut new_points: Vec<(u32, Arc<Perm>, Arc<Perm>)> = Vec::new();
            let mut pending: Vec<(u32, u32)> = Vec::new();
            for &p in &level.orbit {
                for (gi, g) in level.gens.iter().enumerate() {
                    let pair = (p, gi as u32);
                    if level.done_pairs.contains(&pair) {
                        continue;
                    }
                    pending.push(pair);
                    let q = g.apply(p as usize) as u32;
                    if !level.transversal.contains_key(&q)
                        && !new_points.iter().any(|(np, _, _)| *np == q)
                    {
                        let (u_p, _) = &level.transversal[&p];
                        let u_q = Arc::new(g.compose(u_p));
                        let u_q_inv = Arc::new(u_q.inverse());
                        new_points.push((q, u_q, u_q_inv));
                    }
                }
            }
            if pending.is_empty() {
                break;
            }
            // Queue Schreier generators for the pending pairs, then register
            // the newly reached orbit points.
            for (p, gi) in pending {
                let level = &self.levels[level_idx];
                let g = level.gens[gi as usize].clone();
                let q = g.apply(p as usize) as u32;
                let u_p = level.transversal.get(&p).map(|(u, _)| u.clone());
                let u_q_inv = level
                    .transversal
                    .get(&q)
                    .map(|(_, ui)| ui.clone())
                    .or_else(|| {
                        new_points
                            .iter()
                            .find(|(np, _, _)| *np == q)
                            .map(|(_, _, ui)| ui.clone())
                    });
                let (Some(u_p), Some(u_q_inv)) = (u_p, u_q_inv) else {
                    continue;
                };
                let schreier = u_q_inv.compose(&g.compose(&u_p));
                self.levels[level_idx].done_pairs.insert((p, gi));
                if !schreier.is_identity() {
                    queue.push_back((schreier, level_idx + 1));
                }
            }
            let level = &mut self.levels[level_idx];
            for (q, u_q, u_q_inv) in new_points {
                if level.transversal.insert(q, (u_q, u_q_inv)).is_none() {
                    level.orbit.push(q);
                }
            }
        }
    }
}

/// Generators of a prefix stabilizer together with its exact order, plus
/// lazily computed orbit structure shared by all canonicalizations.
struct LevelGroup {
    degree: usize,
    gens: Vec<Arc<Perm>>,
    order: u128,
    orbits: OnceLock<OrbitData>,
}

struct OrbitData {
    /// Minimum of each point's orbit.
    orbit_min: Vec<u32>,
    /// BFS parent edge: point -> (generator index, previous point); roots at
    /// their orbit minimum carry no entry.
    parent: Vec<Option<(u32, u32)>>,
    /// Memoized transversal elements t with t(orbit_min) = point.
    transversals: Mutex<HashMap<u32, Arc<Perm>>>,
}

impl LevelGroup {
    fn trivial(degree: usize) -> Self {
        LevelGroup {
            degree,
            gens: Vec::new(),
            order: 1,
            orbits: OnceLock::new(),
        }
    }

    fn orbits(&self) -> &OrbitData {
        self.orbits.get_or_init(|| {
            let n = self.degree;
            let mut orbit_min = vec![u32::MAX; n];
            let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
            for root in 0..n as u32 {
                if orbit_min[root as usize] != u32::MAX {
                    continue;
                }
                // Points are scanned ascending, so the root is its orbit min.
                let mut queue = VecDeque::new();
                orbit_min[root as usize] = root;
                queue.push_back(root);
                while let Some(p) = queue.pop_front() {
                    for (gi, g) in self.gens.iter().enumerate() {
                        let q = g.apply(p as usize) as u32;
                        if orbit_min[q as usize] == u32::MAX {
                            orbit_min[q as usize] = root;
                            parent[q as usize] = Some((gi as u32, p));
                            queue.push_back(q);
                        }
                    }
                }
            }
            OrbitData {
                orbit_min,
                parent,
                transversals: Mutex::new(HashMap::new()),
            }
        })
    }

    /// Transversal element mapping the orbit minimum of `point` to `point`.
    fn transversal_to(&self, point: u32) -> Arc<Perm> {
        let data = self.orbits();
        if let Some(t) = data.transversals.lock().unwrap().get(&point) {
            return t.clone();
        }
        let t = match data.parent[point as usize] {
            None => Arc::new(Perm::identity(self.degree)),
            Some((gi, prev)) => {
                let t_prev = self.transversal_to(prev);
                Arc::new(self.gens[gi as usize].compose(&t_prev))
            }
        };
        data.transversals
            .lock()
            .unwrap()
            .insert(point, t.clone());
        t
    }

    /// An element mapping `from` to `to`; both must share an orbit.
    fn witness(&self, from: u32, to: u32) -> Arc<Perm> {
        debug_assert_eq!(
            self.orbits().orbit_min[from as usize],
            self.orbits().orbit_min[to as usize]
        );
        if from == to {
            return Arc::new(Perm::identity(self.degree));
        }
        let t_from = self.transversal_to(from);
        let t_to = self.transversal_to(to);
        Arc::new(t_to.compose(&t_from.inverse()))
    }

    /// Stabilizer of `v`, with order fixed by the orbit-stabilizer theorem.
    /// Schreier generators are processed until the known order is reached,
    /// which certifies completeness.
    fn point_stabilizer(&self, v: u32) -> LevelGroup {
        let data = self.orbits();
        let root = data.orbit_min[v as usize];
        let orbit: Vec<u32> = (0..self.degree as u32)
            .filter(|&p| data.orbit_min[p as usize] == root)
            .collect();
        let target = self.order / orbit.len() as u128;
        debug_assert_eq!(self.order % orbit.len() as u128, 0);
        if orbit.len() == 1 {
            return LevelGroup {
                degree: self.degree,
                gens: self.gens.clone(),
                order: self.order,
                orbits: OnceLock::new(),
            };
        }
        if target == 1 {
            return LevelGroup::trivial(self.degree);
        }
        let mut chain = StabChain {
            degree: self.degree,
            preference: BasePreference::SmallestMoved,
            levels: Vec::new(),
        };
        let mut kept: Vec<Arc<Perm>> = Vec::new();
        let t_v_inv = self.witness(root, v).inverse();
        'sweep: for &p in &orbit {
            // Transversal rooted at v: t'_p = t_p . t_v^{-1} maps v to p.
            let t_p = Arc::new(self.transversal_to(p).compose(&t_v_inv));
            for g in &self.gens {
                let q = g.apply(p as usize) as u32;
                let t_q = self.transversal_to(q).compose(&t_v_inv);
                let schreier = t_q.inverse().compose(&g.compose(&t_p));
                debug_assert_eq!(schreier.apply(v as usize), v as usize);
                if schreier.is_identity() {
                    continue;
                }
                let before = chain.order();
                chain.insert(schreier.clone());
                if chain.order() != before {
                    kept.push(Arc::new(schreier));
                }
                if chain.order() == target {
                    break 'sweep;
                }
            }
        }
        assert_eq!(
            chain.order(),
            target,
            "stabilizer sweep must reach the orbit-stabilizer order"
        );
        LevelGroup {
            degree: self.degree,
            gens: kept,
            order: target,
            orbits: OnceLock::new(),
        }
    }
}

/// A permutation group on the vertex indices of a polytope.
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    chain: OnceLock<StabChain>,
    stab_cache: Mutex<HashMap<Vec<u32>, Arc<LevelGroup>>>,
}

impl std::fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("generators", &self.generators.len())
            .finish()
    }
}

/// The lexicographically minimal image of an index set under a group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalKey(pub Vec<u32>);

/// Orbit size query result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitSize {
    Exact(u64),
    ExceedsCap,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::InvalidGroup(format!(
                    "generator degree {} != group degree {degree}",
                    g.degree()
                )));
            }
        }
        let generators = generators.into_iter().filter(|g| !g.is_identity()).collect();
        Ok(PermGroup {
            degree,
            generators,
            chain: OnceLock::new(),
            stab_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup::new(degree, Vec::new()).expect("trivial group is valid")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// The stabilizer chain, built on first use. Construction processes all
    /// Schreier generators, and the order is cross-checked against a rebuild
    /// with the opposite base preference.
    pub fn chain(&self) -> &StabChain {
        self.chain.get_or_init(|| {
            let primary = StabChain::build(self.degree, &self.generators, BasePreference::SmallestMoved);
            let check = StabChain::build(self.degree, &self.generators, BasePreference::LargestMoved);
            assert_eq!(
                primary.order(),
                check.order(),
                "stabilizer chain orders disagree between bases"
            );
            primary
        })
    }

    pub fn order(&self) -> u128 {
        if self.is_trivial() {
            return 1;
        }
        self.chain().order()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if self.is_trivial() {
            return g.is_identity();
        }
        self.chain().contains(g)
    }

    fn level_for_prefix(&self, prefix: &[u32]) -> Arc<LevelGroup> {
        if let Some(hit) = self.stab_cache.lock().unwrap().get(prefix) {
            return hit.clone();
        }
        let level = if prefix.is_empty() {
            Arc::new(LevelGroup {
                degree: self.degree,
                gens: self.generators.iter().cloned().map(Arc::new).collect(),
                order: self.order(),
                orbits: OnceLock::new(),
            })
        } else {
            let parent = self.level_for_prefix(&prefix[..prefix.len() - 1]);
            Arc::new(parent.point_stabilizer(prefix[prefix.len() - 1]))
        };
        self.stab_cache
            .lock()
            .unwrap()
            .entry(prefix.to_vec())
            .or_insert(level)
            .clone()
    }

    /// Minimal image of `set` under the group, with a witnessing permutation
    /// `w` such that `w(set) = key`.
    pub fn canonical_set_with_witness(&self, set: &[usize]) -> Result<(CanonicalKey, Perm)> {
        if set.is_empty() {
            return Err(Error::InvalidInput("canonical_set of empty set".into()));
        }
        let mut sorted: Vec<u32> = Vec::with_capacity(set.len());
        for &i in set {
            if i >= self.degree {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.degree,
                });
            }
            sorted.push(i as u32);
        }
        sorted.sort_unstable();
        sorted.dedup();
        if self.is_trivial() {
            return Ok((CanonicalKey(sorted), Perm::identity(self.degree)));
        }

        struct Candidate {
            witness: Arc<Perm>,
            set: Vec<u32>,
        }
        let id = Arc::new(Perm::identity(self.degree));
        let mut candidates = vec![Candidate {
            witness: id,
            set: sorted,
        }];
        let mut prefix: Vec<u32> = Vec::new();
        loop {
            let level = self.level_for_prefix(&prefix);
            if candidates[0].set.is_empty() {
                let best = &candidates[0];
                return Ok((CanonicalKey(prefix), best.witness.as_ref().clone()));
            }
            if level.order == 1 {
                let best = candidates
                    .iter()
                    .min_by(|a, b| a.set.cmp(&b.set))
                    .expect("at least one candidate");
                let mut key = prefix;
                key.extend_from_slice(&best.set);
                return Ok((CanonicalKey(key), best.witness.as_ref().clone()));
            }
            let data = level.orbits();
            let m = candidates
                .iter()
                .flat_map(|c| c.set.iter().map(|&t| data.orbit_min[t as usize]))
                .min()
                .expect("nonempty candidate sets");
            let mut next: Vec<Candidate> = Vec::new();
            let mut seen: HashSet<Vec<u32>> = HashSet::new();
            for cand in &candidates {
                for &t in &cand.set {
                    if data.orbit_min[t as usize] != m {
                        continue;
                    }
                    let sigma = level.witness(t, m);
                    let mut image = sigma.apply_set(&cand.set);
                    let pos = image.binary_search(&m).expect("m is in the image");
                    image.remove(pos);
                    if seen.insert(image.clone()) {
                        next.push(Candidate {
                            witness: Arc::new(sigma.compose(&cand.witness)),
                            set: image,
                        });
                    }
                }
            }
            debug_assert!(!next.is_empty());
            prefix.push(m);
            candidates = next;
        }
    }

    pub fn canonical_set(&self, set: &[usize]) -> Result<CanonicalKey> {
        Ok(self.canonical_set_with_witness(set)?.0)
    }

    /// True iff the two sets lie in the same orbit. Short-circuits on size.
    pub fn are_equivalent(&self, s1: &[usize], s2: &[usize]) -> Result<bool> {
        if s1.len() != s2.len() {
            return Ok(false);
        }
        Ok(self.canonical_set(s1)? == self.canonical_set(s2)?)
    }

    /// Orbit size of a set by breadth-first closure, aborting beyond `cap`.
    pub fn orbit_size(&self, set: &[usize], cap: u64) -> OrbitSize {
        let mut start: Vec<u32> = set.iter().map(|&i| i as u32).collect();
        start.sort_unstable();
        start.dedup();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            for g in &self.generators {
                let img = g.apply_set(&s);
                if !seen.contains(&img) {
                    if seen.len() as u64 >= cap {
                        return OrbitSize::ExceedsCap;
                    }
                    seen.insert(img.clone());
                    queue.push_back(img);
                }
            }
        }
        OrbitSize::Exact(seen.len() as u64)
    }

    /// A pseudo-random word in the generators, for property tests.
    pub fn random_word(&self, rng: &mut impl rand::Rng, max_len: usize) -> Perm {
        let mut w = Perm::identity(self.degree);
        if self.generators.is_empty() {
            return w;
        }
        let len = rng.gen_range(0..=max_len);
        for _ in 0..len {
            let g = &self.generators[rng.gen_range(0..self.generators.len())];
            w = g.compose(&w);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cycle4() -> PermGroup {
        let p = Perm::new(vec![1, 2, 3, 0]).unwrap();
        PermGroup::new(4, vec![p]).unwrap()
    }

    #[test]
    fn non_bijective_generator_is_rejected() {
        assert!(Perm::new(vec![0, 0, 1]).is_err());
        assert!(Perm::new(vec![0, 3]).is_err());
    }

    #[test]
    fn identity_only_group_has_order_one() {
        let g = PermGroup::new(3, vec![Perm::identity(3)]).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn cyclic_group_order_four() {
        assert_eq!(cycle4().order(), 4);
    }

    #[test]
    fn symmetric_group_order() {
        let s5 = PermGroup::new(
            5,
            vec![
                Perm::new(vec![1, 0, 2, 3, 4]).unwrap(),
                Perm::new(vec![1, 2, 3, 4, 0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s5.order(), 120);
    }

    #[test]
    fn chain_membership() {
        let g = cycle4();
        assert!(g.contains(&Perm::new(vec![2, 3, 0, 1]).unwrap()));
        assert!(!g.contains(&Perm::new(vec![1, 0, 2, 3]).unwrap()));
    }

    #[test]
    fn canonical_set_under_cyclic_shift() {
        let g = cycle4();
        let key = g.canonical_set(&[2, 3]).unwrap();
        assert_eq!(key.0, vec![0, 1]);
    }

    #[test]
    fn canonical_set_under_trivial_group() {
        let g = PermGroup::trivial(5);
        assert_eq!(g.canonical_set(&[4, 2]).unwrap().0, vec![2, 4]);
    }

    #[test]
    fn witness_realizes_the_canonical_image() {
        let g = cycle4();
        let (key, w) = g.canonical_set_with_witness(&[1, 3]).unwrap();
        assert_eq!(w.apply_set(&[1, 3]), key.0);
        assert!(g.contains(&w));
    }

    #[test]
    fn equivalence_and_orbit_sizes() {
        let g = cycle4();
        assert!(g.are_equivalent(&[0, 1], &[2, 3]).unwrap());
        assert!(!g.are_equivalent(&[0, 1], &[0, 2]).unwrap());
        assert!(!g.are_equivalent(&[0], &[0, 1]).unwrap());
        assert_eq!(g.orbit_size(&[0, 1], 100), OrbitSize::Exact(4));
        assert_eq!(g.orbit_size(&[0, 2], 100), OrbitSize::Exact(2));
        assert_eq!(g.orbit_size(&[0], 3), OrbitSize::ExceedsCap);
        assert_eq!(PermGroup::trivial(4).orbit_size(&[1], 10), OrbitSize::Exact(1));
    }

    #[test]
    fn canonical_invariance_under_random_words() {
        let s6 = PermGroup::new(
            6,
            vec![
                Perm::new(vec![1, 0, 2, 3, 4, 5]).unwrap(),
                Perm::new(vec![1, 2, 3, 4, 5, 0]).unwrap(),
            ],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sets: Vec<Vec<usize>> = vec![vec![0], vec![1, 4], vec![0, 2, 5], vec![1, 2, 3, 4]];
        for s in &sets {
            let base = s6.canonical_set(s).unwrap();
            for _ in 0..200 {
                let w = s6.random_word(&mut rng, 12);
                let img: Vec<usize> = s.iter().map(|&i| w.apply(i)).collect();
                assert_eq!(s6.canonical_set(&img).unwrap(), base);
            }
        }
    }

    #[test]
    fn chain_order_matches_bfs_closure() {
        // Dihedral group of the square as vertex permutations of its 4 corners.
        let rot = Perm::new(vec![1, 2, 3, 0]).unwrap();
        let flip = Perm::new(vec![1, 0, 3, 2]).unwrap();
        let g = PermGroup::new(4, vec![rot.clone(), flip.clone()]).unwrap();
        // BFS closure.
        let mut seen = HashSet::new();
        seen.insert(Perm::identity(4));
        let mut queue = VecDeque::new();
        queue.push_back(Perm::identity(4));
        while let Some(p) = queue.pop_front() {
            for h in [&rot, &flip] {
                let q = h.compose(&p);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        assert_eq!(g.order(), seen.len() as u128);
    }
}
