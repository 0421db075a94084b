//! Parallel traversal: a coordinator owning the global stack and worker
//! threads exchanging [`ControlMessage`]s with it.
//!
//! In master mode every created node is pushed to the global stack. In
//! hierarchical mode nodes are split into a low class (levels `<= t`) and a
//! high class; a worker keeps nodes of its own class on a local stack and
//! pushes the others to the global stack.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};

use serde::{Deserialize, Serialize};

use crate::assignment::PartialAssignment;
use crate::encode::SymmetryModel;
use crate::engine::{expand, PrefixPlan, RunStats, WorkItem};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StackMode {
    Master,
    Hierarchical,
}

impl FromStr for StackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<StackMode> {
        match s {
            "master" => Ok(StackMode::Master),
            "hier" | "hierarchical" => Ok(StackMode::Hierarchical),
            _ => Err(Error::input(format!("unknown stack mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackPolicy {
    pub mode: StackMode,
    /// Last level of the low class (hierarchical mode).
    pub threshold: usize,
    pub low_level_workers: usize,
}

impl StackPolicy {
    pub fn master() -> StackPolicy {
        StackPolicy {
            mode: StackMode::Master,
            threshold: 0,
            low_level_workers: 0,
        }
    }

    pub fn hierarchical(threshold: usize) -> StackPolicy {
        StackPolicy {
            mode: StackMode::Hierarchical,
            threshold,
            low_level_workers: 1,
        }
    }

    /// Requires `1 <= t < k` in hierarchical mode.
    pub fn validate(&self, depth: usize) -> Result<()> {
        if self.mode == StackMode::Hierarchical && (self.threshold < 1 || self.threshold >= depth) {
            return Err(Error::input(format!(
                "hierarchical threshold must satisfy 1 <= t < {depth}, got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn class_of(&self, level: usize) -> LevelClass {
        match self.mode {
            StackMode::Master => LevelClass::Any,
            StackMode::Hierarchical if level <= self.threshold => LevelClass::Low,
            StackMode::Hierarchical => LevelClass::High,
        }
    }

    /// Role of each of `workers` workers. A lone worker serves both classes.
    pub fn roles(&self, workers: usize) -> Vec<LevelClass> {
        match self.mode {
            StackMode::Master => vec![LevelClass::Any; workers],
            StackMode::Hierarchical if workers == 1 => vec![LevelClass::Any],
            StackMode::Hierarchical => {
                let low = self.low_level_workers.clamp(1, workers - 1);
                (0..workers)
                    .map(|w| {
                        if w < low {
                            LevelClass::Low
                        } else {
                            LevelClass::High
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelClass {
    Low,
    High,
    /// Both classes; the only class in master mode.
    Any,
}

impl LevelClass {
    fn serves(self, class: LevelClass) -> bool {
        self == LevelClass::Any || self == class
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Destination {
    Local,
    Global,
}

/// Where a worker with the given role puts a node it created.
pub fn route(policy: &StackPolicy, role: LevelClass, item: &WorkItem) -> Destination {
    match policy.mode {
        StackMode::Master => Destination::Global,
        StackMode::Hierarchical if role.serves(policy.class_of(item.level)) => Destination::Local,
        StackMode::Hierarchical => Destination::Global,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlMessage {
    PushRequest {
        worker: usize,
        item: WorkItem,
    },
    PopRequest {
        worker: usize,
        class: LevelClass,
    },
    Work(WorkItem),
    Emit {
        worker: usize,
        assignment: PartialAssignment,
    },
    /// The worker's local stack is empty.
    Idle {
        worker: usize,
    },
    /// The worker stopped on an error; the run is abandoned.
    Failed {
        worker: usize,
    },
    Exit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DistStats {
    pub run: RunStats,
    /// Messages received plus sent by the coordinator.
    pub messages: u64,
    pub pushes: u64,
    pub works: u64,
}

/// Coordinator state: the global stack, idle workers, and collected output.
#[derive(Debug)]
pub struct Coordinator {
    policy: StackPolicy,
    roles: Vec<LevelClass>,
    /// Global stack per class: `[Low, High]`; master mode uses the first.
    stacks: [Vec<WorkItem>; 2],
    waiting: Vec<Option<LevelClass>>,
    local_empty: Vec<bool>,
    delivered: HashSet<u64>,
    emitted: Vec<PartialAssignment>,
    stats: DistStats,
    done: bool,
}

impl Coordinator {
    pub fn new(policy: StackPolicy, workers: usize, root: WorkItem) -> Coordinator {
        let mut c = Coordinator {
            policy,
            roles: policy.roles(workers),
            stacks: [Vec::new(), Vec::new()],
            waiting: vec![None; workers],
            local_empty: vec![true; workers],
            delivered: HashSet::new(),
            emitted: Vec::new(),
            stats: DistStats::default(),
            done: false,
        };
        c.stack_for(root.level).push(root);
        c
    }

    fn stack_for(&mut self, level: usize) -> &mut Vec<WorkItem> {
        match self.policy.class_of(level) {
            LevelClass::High => &mut self.stacks[1],
            _ => &mut self.stacks[0],
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn is_idle(&self, worker: usize) -> bool {
        self.waiting.get(worker).is_some_and(|w| w.is_some())
    }

    pub fn global_len(&self) -> usize {
        self.stacks[0].len() + self.stacks[1].len()
    }

    pub fn stats(&self) -> &DistStats {
        &self.stats
    }

    fn check_worker(&self, worker: usize) -> Result<()> {
        if worker >= self.roles.len() {
            return Err(Error::invariant(format!(
                "message from unknown worker {worker}"
            )));
        }
        Ok(())
    }

    /// Processes one message and returns the messages to send, addressed by
    /// worker.
    pub fn handle(&mut self, msg: ControlMessage) -> Result<Vec<(usize, ControlMessage)>> {
        self.stats.messages += 1;
        let mut out = Vec::new();
        match msg {
            ControlMessage::PushRequest { worker, item } => {
                self.check_worker(worker)?;
                self.stats.pushes += 1;
                self.stack_for(item.level).push(item);
            }
            ControlMessage::PopRequest { worker, class } => {
                self.check_worker(worker)?;
                self.waiting[worker] = Some(class);
            }
            ControlMessage::Emit { worker, assignment } => {
                self.check_worker(worker)?;
                self.emitted.push(assignment);
            }
            ControlMessage::Idle { worker } => {
                self.check_worker(worker)?;
                self.local_empty[worker] = true;
            }
            ControlMessage::Failed { worker } => {
                self.check_worker(worker)?;
                return Err(Error::invariant(format!("worker {worker} failed")));
            }
            ControlMessage::Work(_) | ControlMessage::Exit => {
                return Err(Error::invariant(
                    "coordinator received a worker-bound message",
                ));
            }
        }
        self.dispatch(&mut out)?;
        if !self.done
            && self.global_len() == 0
            && self.waiting.iter().all(Option::is_some)
            && self.local_empty.iter().all(|&e| e)
        {
            self.done = true;
            out.extend((0..self.roles.len()).map(|w| (w, ControlMessage::Exit)));
        }
        self.stats.messages += out.len() as u64;
        Ok(out)
    }

    fn dispatch(&mut self, out: &mut Vec<(usize, ControlMessage)>) -> Result<()> {
        for w in 0..self.waiting.len() {
            let Some(class) = self.waiting[w] else {
                continue;
            };
            let item = match class {
                LevelClass::Low => self.stacks[0].pop(),
                LevelClass::High => self.stacks[1].pop(),
                LevelClass::Any => self.stacks[1].pop().or_else(|| self.stacks[0].pop()),
            };
            if let Some(item) = item {
                if cfg!(debug_assertions) && !self.delivered.insert(item.id) {
                    return Err(Error::invariant(format!(
                        "work item {} delivered twice",
                        item.id
                    )));
                }
                self.waiting[w] = None;
                self.local_empty[w] = false;
                self.stats.works += 1;
                out.push((w, ControlMessage::Work(item)));
            }
        }
        Ok(())
    }

    /// Emitted assignments in canonical order.
    pub fn into_output(mut self) -> (Vec<PartialAssignment>, DistStats) {
        self.emitted.sort_unstable();
        (self.emitted, self.stats)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParallelOutput {
    pub assignments: Vec<PartialAssignment>,
    pub stats: DistStats,
}

struct Worker<'a> {
    id: usize,
    role: LevelClass,
    policy: StackPolicy,
    m: &'a SymmetryModel,
    plan: &'a PrefixPlan,
    to_coord: Sender<ControlMessage>,
    inbox: Receiver<ControlMessage>,
    abort: &'a AtomicBool,
    next_id: u64,
}

impl Worker<'_> {
    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        ((self.id as u64 + 1) << 40) | self.next_id
    }

    fn send(&self, msg: ControlMessage) -> bool {
        self.to_coord.send(msg).is_ok()
    }

    fn run(mut self) -> Result<RunStats> {
        let mut stats = RunStats::new(self.plan.depth());
        let mut local: Vec<WorkItem> = Vec::new();
        loop {
            if self.abort.load(Ordering::Relaxed) {
                break;
            }
            let item = match local.pop() {
                Some(item) => item,
                None => {
                    let class = self.role;
                    if !self.send(ControlMessage::Idle { worker: self.id })
                        || !self.send(ControlMessage::PopRequest {
                            worker: self.id,
                            class,
                        })
                    {
                        break;
                    }
                    match self.inbox.recv() {
                        Ok(ControlMessage::Work(item)) => item,
                        Ok(ControlMessage::Exit) | Err(_) => break,
                        Ok(other) => {
                            self.send(ControlMessage::Failed { worker: self.id });
                            return Err(Error::invariant(format!(
                                "worker got unexpected {other:?}"
                            )));
                        }
                    }
                }
            };
            let e = match expand(&item, self.plan, self.m, &mut stats) {
                Ok(e) => e,
                Err(err) => {
                    self.send(ControlMessage::Failed { worker: self.id });
                    return Err(err);
                }
            };
            if let Some(assignment) = e.emitted {
                if !self.send(ControlMessage::Emit {
                    worker: self.id,
                    assignment,
                }) {
                    break;
                }
            }
            for mut child in e.children.into_iter().rev() {
                child.id = self.fresh_id();
                match route(&self.policy, self.role, &child) {
                    Destination::Local => local.push(child),
                    Destination::Global => {
                        if !self.send(ControlMessage::PushRequest {
                            worker: self.id,
                            item: child,
                        }) {
                            return Ok(stats);
                        }
                    }
                }
            }
        }
        Ok(stats)
    }
}

/// Runs the search on `workers` threads. The output equals the sequential
/// output as a multiset and is returned sorted.
pub fn run_parallel(
    m: &SymmetryModel,
    plan: &PrefixPlan,
    policy: StackPolicy,
    workers: usize,
) -> Result<ParallelOutput> {
    if workers == 0 {
        return Err(Error::input("at least one worker is required"));
    }
    policy.validate(plan.depth())?;
    let roles = policy.roles(workers);
    let abort = AtomicBool::new(false);
    let (to_coord, from_workers) = channel();
    let mut inboxes = Vec::with_capacity(workers);
    let mut outboxes = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (tx, rx) = channel();
        outboxes.push(tx);
        inboxes.push(rx);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = inboxes
            .into_iter()
            .enumerate()
            .map(|(id, inbox)| {
                let w = Worker {
                    id,
                    role: roles[id],
                    policy,
                    m,
                    plan,
                    to_coord: to_coord.clone(),
                    inbox,
                    abort: &abort,
                    next_id: 0,
                };
                scope.spawn(move || w.run())
            })
            .collect();
        drop(to_coord);

        let mut coord = Coordinator::new(policy, workers, WorkItem::root(plan));
        let mut failure = None;
        while !coord.is_done() {
            let Ok(msg) = from_workers.recv() else {
                failure = Some(Error::invariant("all workers stopped before termination"));
                break;
            };
            match coord.handle(msg) {
                Ok(out) => {
                    for (w, msg) in out {
                        // a worker that already stopped reports through its handle
                        let _ = outboxes[w].send(msg);
                    }
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        if failure.is_some() {
            abort.store(true, Ordering::Relaxed);
            for tx in &outboxes {
                let _ = tx.send(ControlMessage::Exit);
            }
        }
        drop(from_workers);

        let mut run = RunStats::new(plan.depth());
        let mut worker_error = None;
        for h in handles {
            match h.join() {
                Ok(Ok(stats)) => run.merge(&stats),
                Ok(Err(e)) => {
                    worker_error.get_or_insert(e);
                }
                Err(_) => {
                    worker_error.get_or_insert(Error::invariant("worker panicked"));
                }
            }
        }
        if let Some(e) = worker_error.or(failure) {
            return Err(e);
        }
        let (assignments, mut stats) = coord.into_output();
        if stats.works != stats.pushes + 1 {
            return Err(Error::invariant(format!(
                "work not conserved: {} delivered, {} pushed",
                stats.works, stats.pushes
            )));
        }
        stats.run = run;
        Ok(ParallelOutput { assignments, stats })
    })
}
