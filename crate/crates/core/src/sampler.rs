//! The adjacency sampling driver: randomized descent to a small face,
//! complete enumeration there, and the incomplete upward rotation pass.
//!
//! Work is organized as a queue of facet classes. Each class is descended
//! once (or `repeats` times with fresh seeds); the descent seed is derived
//! from the class key, so the final class set does not depend on worker
//! count or on the order classes are popped, and interrupted runs can be
//! resumed by replaying the log.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dd::{double_description, Limits, RunStatus};
use crate::model::{subface_polytope, Face, Inequality, VPolytope};
use crate::pivot::{descend_in, initial_facet, rotate, RotationContext};
use crate::symmetry::{CanonicalKey, PermGroup};
use crate::{Error, Result};

/// Tuning knobs for a sampling run.
#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub cutoff: usize,
    pub workers: usize,
    pub seed: u64,
    /// Visits per class; 1 matches the single pass over the queue.
    pub repeats: u32,
    pub limits: Limits,
    pub progress: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            cutoff: 20,
            workers: 1,
            seed: 0,
            repeats: 1,
            limits: Limits::default(),
            progress: false,
        }
    }
}

/// One stored facet class of the root polytope.
#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub key: CanonicalKey,
    pub support: Inequality,
    pub tight: Vec<usize>,
}

/// Sink for the append-only run log. The store serializes all calls.
pub trait RunLog: Send {
    fn class_discovered(&mut self, ordinal: usize, record: &ClassRecord) -> Result<()>;
    fn class_processed(&mut self, ordinal: usize) -> Result<()>;
}

/// State replayed from a previous run's log.
#[derive(Default)]
pub struct ResumeState {
    pub records: Vec<ClassRecord>,
    pub processed: Vec<bool>,
}

struct StoreInner {
    keys: HashSet<CanonicalKey>,
    records: Vec<ClassRecord>,
    processed: Vec<bool>,
    key_bytes: usize,
    log: Option<Box<dyn RunLog>>,
    stop_intake: Option<String>,
}

/// Deduplicating class store; `insert_if_absent` is the single
/// synchronization point between workers.
pub struct ClassStore {
    inner: Mutex<StoreInner>,
    pub rotations: AtomicU64,
}

pub enum InsertOutcome {
    New(usize),
    Known,
    Rejected(String),
}

impl ClassStore {
    pub fn new(log: Option<Box<dyn RunLog>>) -> Self {
        ClassStore {
            inner: Mutex::new(StoreInner {
                keys: HashSet::new(),
                records: Vec::new(),
                processed: Vec::new(),
                key_bytes: 0,
                log,
                stop_intake: None,
            }),
            rotations: AtomicU64::new(0),
        }
    }

    /// Inserts a class unless the key is present or intake has stopped.
    pub fn insert_if_absent(&self, record: ClassRecord, limits: &Limits) -> Result<InsertOutcome> {
        let mut inner = self.inner.lock().unwrap();
        if inner.keys.contains(&record.key) {
            return Ok(InsertOutcome::Known);
        }
        if let Some(reason) = &inner.stop_intake {
            return Ok(InsertOutcome::Rejected(reason.clone()));
        }
        if let Some(max) = limits.max_classes {
            if inner.records.len() >= max {
                inner.stop_intake = Some("max-classes".into());
                return Ok(InsertOutcome::Rejected("max-classes".into()));
            }
        }
        if let Some(max) = limits.max_mem_bytes {
            if inner.key_bytes >= max {
                inner.stop_intake = Some("max-mem".into());
                return Ok(InsertOutcome::Rejected("max-mem".into()));
            }
        }
        let ordinal = inner.records.len();
        inner.keys.insert(record.key.clone());
        inner.key_bytes += 4 * record.key.0.len() + 32;
        if let Some(log) = inner.log.as_mut() {
            log.class_discovered(ordinal, &record)?;
        }
        inner.records.push(record);
        inner.processed.push(false);
        Ok(InsertOutcome::New(ordinal))
    }

    pub fn mark_processed(&self, ordinal: usize) -> Result<()> {
        let mut inner = self.inner.lock().unwrap();
        if !inner.processed[ordinal] {
            inner.processed[ordinal] = true;
            if let Some(log) = inner.log.as_mut() {
                log.class_processed(ordinal)?;
            }
        }
        Ok(())
    }

    pub fn stop_reason(&self) -> Option<String> {
        self.inner.lock().unwrap().stop_intake.clone()
    }

    pub fn stop_intake(&self, reason: &str) {
        let mut inner = self.inner.lock().unwrap();
        if inner.stop_intake.is_none() {
            inner.stop_intake = Some(reason.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_records(self) -> Vec<ClassRecord> {
        self.inner.into_inner().unwrap().records
    }
}

/// A root facet with the chain of sub-faces visited on the way down. Level
/// `i` holds the polytope the face lives in; the polytope of level `i + 1`
/// is the sub-polytope of level `i`'s face.
pub struct DescentChain {
    levels: Vec<(Arc<VPolytope>, Face)>,
    terminal: Arc<VPolytope>,
}

impl DescentChain {
    /// Descends from a root facet until the current face has fewer than
    /// `cutoff` vertices or dimension 1, whichever comes first.
    pub fn build(
        root: &Arc<VPolytope>,
        facet: Face,
        cutoff: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<DescentChain> {
        let mut levels = vec![(root.clone(), facet)];
        loop {
            let (_, face) = levels.last().unwrap();
            let sub = subface_polytope(face)?;
            if sub.len() < cutoff || sub.intrinsic_dim() <= 1 {
                return Ok(DescentChain {
                    levels,
                    terminal: sub,
                });
            }
            let next = descend_in(&sub, rng)?;
            levels.push((sub, next));
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn terminal(&self) -> &Arc<VPolytope> {
        &self.terminal
    }

    pub fn levels(&self) -> &[(Arc<VPolytope>, Face)] {
        &self.levels
    }
}

/// The upward pass: rotates each level's face around the current face set,
/// deduplicating by tight set per level, and returns facets of the root.
pub fn lift_chain(
    chain: &DescentChain,
    faces: Vec<Face>,
    rotations: &AtomicU64,
) -> Result<Vec<Face>> {
    let mut current = faces;
    for (polytope, face) in chain.levels().iter().rev() {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut lifted: Vec<Face> = Vec::new();
        for h in &current {
            let g = rotate(&RotationContext {
                polytope,
                facet: face,
                ridge_support: h.support(),
            })?;
            rotations.fetch_add(1, Ordering::Relaxed);
            if seen.insert(g.tight().to_vec()) {
                lifted.push(g);
            }
        }
        current = lifted;
    }
    Ok(current)
}

/// Result of a sampling or decomposition run.
pub struct RunResult {
    pub classes: Vec<ClassRecord>,
    pub status: RunStatus,
    pub rotations: u64,
}

struct SchedState {
    queue: VecDeque<(usize, u32)>,
    active: usize,
    failure: Option<Error>,
}

struct Shared<'a> {
    root: &'a Arc<VPolytope>,
    group: &'a Arc<PermGroup>,
    cfg: &'a SamplerConfig,
    store: &'a ClassStore,
    sched: Mutex<SchedState>,
    cv: Condvar,
    deadline: Option<Instant>,
}

fn task_seed(base: u64, key: &[u32], visit: u32) -> u64 {
    // FNV-1a; the seed must be stable across runs and platforms.
    let mut h: u64 = 0xcbf29ce484222325 ^ base.wrapping_mul(0x100000001b3);
    for &v in key {
        h ^= v as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^= visit as u64;
    h.wrapping_mul(0x100000001b3)
}

/// The adjacency sampling method. Returns the classes found in discovery
/// order and whether the queue drained or a limit fired.
pub fn as_enumerate(
    root: &Arc<VPolytope>,
    group: &Arc<PermGroup>,
    cfg: &SamplerConfig,
    resume: Option<ResumeState>,
    log: Option<Box<dyn RunLog>>,
) -> Result<RunResult> {
    if root.intrinsic_dim() <= 1 {
        // Degenerate root: enumerate directly.
        let mut records = Vec::new();
        let mut keys = HashSet::new();
        for f in double_description(root)? {
            let key = group.canonical_set(f.tight())?;
            if keys.insert(key.clone()) {
                records.push(ClassRecord {
                    key,
                    support: f.support().clone(),
                    tight: f.tight().to_vec(),
                });
            }
        }
        return Ok(RunResult {
            classes: records,
            status: RunStatus::Complete,
            rotations: 0,
        });
    }

    let store = ClassStore::new(log);
    let mut initial_tasks: VecDeque<(usize, u32)> = VecDeque::new();
    match resume {
        // Replayed records are already in the log; only load them.
        Some(state) if !state.records.is_empty() => {
            let mut inner = store.inner.lock().unwrap();
            for (ordinal, rec) in state.records.into_iter().enumerate() {
                inner.keys.insert(rec.key.clone());
                inner.key_bytes += 4 * rec.key.0.len() + 32;
                inner.records.push(rec);
                let done = state.processed.get(ordinal).copied().unwrap_or(false);
                inner.processed.push(done);
                if !done {
                    for visit in 0..cfg.repeats {
                        initial_tasks.push_back((ordinal, visit));
                    }
                }
            }
        }
        _ => {
            let first = initial_facet(root)?;
            let key = group.canonical_set(first.tight())?;
            let record = ClassRecord {
                key,
                support: first.support().clone(),
                tight: first.tight().to_vec(),
            };
            match store.insert_if_absent(record, &cfg.limits)? {
                InsertOutcome::New(ordinal) => {
                    for visit in 0..cfg.repeats {
                        initial_tasks.push_back((ordinal, visit));
                    }
                }
                _ => unreachable!("first insert into an empty store"),
            }
        }
    }

    let deadline = cfg
        .limits
        .max_seconds
        .map(|s| Instant::now() + Duration::from_secs(s));
    let shared = Shared {
        root,
        group,
        cfg,
        store: &store,
        sched: Mutex::new(SchedState {
            queue: initial_tasks,
            active: 0,
            failure: None,
        }),
        cv: Condvar::new(),
        deadline,
    };

    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.max(1) {
            scope.spawn(|| worker_loop(&shared));
        }
        if cfg.progress {
            scope.spawn(|| progress_loop(&shared));
        }
    });

    if let Some(err) = shared.sched.lock().unwrap().failure.take() {
        return Err(err);
    }
    let rotations = store.rotations.load(Ordering::Relaxed);
    let status = match store.stop_reason() {
        Some(reason) => RunStatus::Stopped(reason),
        None => RunStatus::Complete,
    };
    Ok(RunResult {
        classes: store.into_records(),
        status,
        rotations,
    })
}

fn progress_loop(shared: &Shared<'_>) {
    let start = Instant::now();
    let mut last_rot = 0u64;
    loop {
        std::thread::sleep(Duration::from_secs(2));
        let st = shared.sched.lock().unwrap();
        let queue = st.queue.len();
        let active = st.active;
        let failed = st.failure.is_some();
        drop(st);
        let classes = shared.store.len();
        let rot = shared.store.rotations.load(Ordering::Relaxed);
        eprintln!(
            "[{:>6.1}s] classes={} queue={} rotations/s={}",
            start.elapsed().as_secs_f64(),
            classes,
            queue,
            (rot - last_rot) / 2
        );
        last_rot = rot;
        if failed || (queue == 0 && active == 0) {
            return;
        }
    }
}

fn worker_loop(shared: &Shared<'_>) {
    loop {
        let task = {
            let mut st = shared.sched.lock().unwrap();
            loop {
                if st.failure.is_some() {
                    shared.cv.notify_all();
                    return;
                }
                if shared.store.stop_reason().is_some() {
                    st.queue.clear();
                }
                if let Some(t) = st.queue.pop_front() {
                    st.active += 1;
                    break t;
                }
                if st.active == 0 {
                    shared.cv.notify_all();
                    return;
                }
                st = shared.cv.wait(st).unwrap();
            }
        };
        let outcome = process_task(shared, task);
        let mut st = shared.sched.lock().unwrap();
        st.active -= 1;
        match outcome {
            Ok(new_tasks) => st.queue.extend(new_tasks),
            Err(Error::Timeout) => {
                shared.store.stop_intake("max-seconds");
                st.queue.clear();
            }
            Err(e) => {
                if st.failure.is_none() {
                    st.failure = Some(e);
                }
            }
        }
        shared.cv.notify_all();
    }
}

fn timed_out(shared: &Shared<'_>) -> bool {
    shared
        .deadline
        .is_some_and(|d| Instant::now() > d)
}

fn process_task(shared: &Shared<'_>, (ordinal, visit): (usize, u32)) -> Result<Vec<(usize, u32)>> {
    if timed_out(shared) {
        return Err(Error::Timeout);
    }
    let record = {
        let inner = shared.store.inner.lock().unwrap();
        inner.records[ordinal].clone()
    };
    let facet = Face::new(shared.root.clone(), record.tight.clone(), record.support.clone())?;
    let seed = task_seed(shared.cfg.seed, &record.key.0, visit);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let chain = DescentChain::build(shared.root, facet, shared.cfg.cutoff, &mut rng)?;
    let h = double_description(chain.terminal())?;
    if timed_out(shared) {
        return Err(Error::Timeout);
    }
    let lifted = lift_chain(&chain, h, &shared.store.rotations)?;

    let mut new_tasks = Vec::new();
    let mut rejected = false;
    for g in lifted {
        if !shared.root.is_facet(g.support()) {
            return Err(Error::InvariantViolation(
                "lifted face is not a facet of the root polytope".into(),
            ));
        }
        let key = shared.group.canonical_set(g.tight())?;
        let rec = ClassRecord {
            key: key.clone(),
            support: g.support().clone(),
            tight: g.tight().to_vec(),
        };
        match shared.store.insert_if_absent(rec, &shared.cfg.limits)? {
            InsertOutcome::New(ord) => {
                for v in 0..shared.cfg.repeats {
                    new_tasks.push((ord, v));
                }
            }
            InsertOutcome::Known => {}
            InsertOutcome::Rejected(_) => rejected = true,
        }
        if timed_out(shared) {
            return Err(Error::Timeout);
        }
    }
    // A task whose children were rejected by a limit is left unprocessed so
    // a resumed run repeats it with the same seed.
    if !rejected {
        shared.store.mark_processed(ordinal)?;
    }
    Ok(new_tasks)
}

/// Classification of an externally supplied inequality list.
pub struct ClassifyReport {
    /// One entry per class: representative record plus member input indices.
    pub classes: Vec<(ClassRecord, Vec<usize>)>,
    /// Inputs that are valid on the polytope but not facets.
    pub non_facets: Vec<usize>,
    /// Inputs violated by some vertex.
    pub invalid: Vec<usize>,
}

/// Partitions inequalities into facet classes by canonical tight set.
pub fn classify(
    inequalities: &[Inequality],
    p: &Arc<VPolytope>,
    group: &Arc<PermGroup>,
) -> Result<ClassifyReport> {
    let mut classes: Vec<(ClassRecord, Vec<usize>)> = Vec::new();
    let mut non_facets = Vec::new();
    let mut invalid = Vec::new();
    for (i, q) in inequalities.iter().enumerate() {
        let ts = p.tight_set(q);
        if !ts.valid {
            invalid.push(i);
            continue;
        }
        if ts.indices.is_empty() || p.rank_of(&ts.indices) != p.intrinsic_dim() {
            non_facets.push(i);
            continue;
        }
        let key = group.canonical_set(&ts.indices)?;
        match classes.iter_mut().find(|(rec, _)| rec.key == key) {
            Some((_, members)) => members.push(i),
            None => classes.push((
                ClassRecord {
                    key,
                    support: q.clone(),
                    tight: ts.indices,
                },
                vec![i],
            )),
        }
    }
    Ok(ClassifyReport {
        classes,
        non_facets,
        invalid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{Int, Rat};
    use crate::generators::{bell_polytope, BellScenario};

    fn rat(x: i64) -> Rat {
        Rat::from_integer(Int::from(x))
    }

    fn unit_square() -> (Arc<VPolytope>, Arc<PermGroup>) {
        let verts = vec![
            vec![rat(0), rat(0)],
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ];
        let p = Arc::new(VPolytope::new("square", verts).unwrap());
        let rot = crate::symmetry::Perm::new(vec![1, 3, 0, 2]).unwrap();
        let flip = crate::symmetry::Perm::new(vec![1, 0, 3, 2]).unwrap();
        let g = Arc::new(PermGroup::new(4, vec![rot, flip]).unwrap());
        (p, g)
    }

    #[test]
    fn square_has_one_edge_class() {
        let (p, g) = unit_square();
        let result = as_enumerate(&p, &g, &SamplerConfig::default(), None, None).unwrap();
        assert!(result.status.is_complete());
        assert_eq!(result.classes.len(), 1);
    }

    #[test]
    fn square_without_symmetry_has_four_classes() {
        let (p, _) = unit_square();
        let g = Arc::new(PermGroup::trivial(4));
        let cfg = SamplerConfig {
            cutoff: 3,
            ..SamplerConfig::default()
        };
        let result = as_enumerate(&p, &g, &cfg, None, None).unwrap();
        assert!(result.status.is_complete());
        assert_eq!(result.classes.len(), 4);
    }

    #[test]
    fn lift_from_square_edge_endpoint() {
        // Chain of length 1: the facet is an edge, H holds its two endpoint
        // faces; lifting yields the two adjacent edges.
        let (p, _) = unit_square();
        let facet = crate::pivot::tighten_functional(&p, vec![Int::from(1), Int::from(0)])
            .unwrap()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chain = DescentChain::build(&p, facet.clone(), 2, &mut rng).unwrap();
        assert_eq!(chain.depth(), 1);
        let h = double_description(chain.terminal()).unwrap();
        assert_eq!(h.len(), 2);
        let rotations = AtomicU64::new(0);
        let lifted = lift_chain(&chain, h, &rotations).unwrap();
        assert_eq!(lifted.len(), 2);
        for f in &lifted {
            assert!(p.is_facet(f.support()));
            assert_ne!(f.tight(), facet.tight());
        }
    }

    #[test]
    fn chsh_sampler_finds_both_classes() {
        let s = BellScenario::new(2, 2, 2, 2).unwrap();
        let (p, g) = bell_polytope(&s).unwrap();
        let cfg = SamplerConfig {
            cutoff: 10,
            ..SamplerConfig::default()
        };
        let result = as_enumerate(&p, &g, &cfg, None, None).unwrap();
        assert!(result.status.is_complete());
        assert_eq!(result.classes.len(), 2);
        let mut sizes: Vec<usize> = result.classes.iter().map(|c| c.tight.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![8, 12]);
    }

    #[test]
    fn classify_buckets_duplicates_and_rejects() {
        let (p, g) = unit_square();
        let facet = crate::model::support_for(&p, &[1, 3]).unwrap();
        let valid_not_tight =
            Inequality::from_integer(vec![Int::from(1), Int::from(0)], Int::from(2)).unwrap();
        let violated =
            Inequality::from_integer(vec![Int::from(1), Int::from(0)], Int::from(0)).unwrap();
        let inputs = vec![facet.clone(), facet.clone(), facet, valid_not_tight, violated];
        let report = classify(&inputs, &p, &g).unwrap();
        assert_eq!(report.classes.len(), 1);
        assert_eq!(report.classes[0].1, vec![0, 1, 2]);
        assert_eq!(report.non_facets, vec![3]);
        assert_eq!(report.invalid, vec![4]);
    }

    #[test]
    fn store_rejects_after_class_limit() {
        let store = ClassStore::new(None);
        let limits = Limits {
            max_classes: Some(1),
            ..Limits::default()
        };
        let rec = |k: u32| ClassRecord {
            key: CanonicalKey(vec![k]),
            support: Inequality::from_integer(vec![Int::from(1)], Int::from(1)).unwrap(),
            tight: vec![0],
        };
        assert!(matches!(
            store
                .insert_if_absent(rec(0), &limits)
                .unwrap(),
            InsertOutcome::New(0)
        ));
        assert!(matches!(
            store
                .insert_if_absent(rec(0), &limits)
                .unwrap(),
            InsertOutcome::Known
        ));
        assert!(matches!(
            store
                .insert_if_absent(rec(1), &limits)
                .unwrap(),
            InsertOutcome::Rejected(_)
        ));
    }
}
