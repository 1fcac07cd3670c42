//! Greedy and branch-and-bound engines over the term universe of one instance.
//!
//! A candidate is a `(support, signs)` pair; a selection uses each support at
//! most once. The branch-and-bound picks the live point with the fewest
//! remaining candidates and branches on which candidate covers it. Sibling
//! candidates tried earlier are forbidden in later branches, so every
//! selection is reached along one path only.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_traits::ToPrimitive;

use crate::bits::Bits;
use crate::boolean::subsets_lex;

use super::Target;

const SEARCH_STACK: usize = 256 << 20;

pub(crate) type Choice = (u32, u32);

pub(crate) struct Problem {
    pub n: usize,
    pub npoints: usize,
    /// Candidate supports: size ascending, then lexicographic.
    pub supports: Vec<u32>,
    /// `(first index, end index)` of each size class in `supports`, sizes ascending.
    pub size_groups: Vec<(usize, usize)>,
}

impl Problem {
    pub fn new(n: usize, target: Target) -> Self {
        let sizes = match target {
            Target::MinSize(k) => k..=n,
            Target::Uniform(m) => m..=m,
        };
        let mut supports = Vec::new();
        let mut size_groups = Vec::new();
        for s in sizes {
            let start = supports.len();
            supports.extend(subsets_lex(n, s));
            if supports.len() > start {
                size_groups.push((start, supports.len()));
            }
        }
        Problem {
            n,
            npoints: 1 << n,
            supports,
            size_groups,
        }
    }

    /// Number of `(support, signs)` candidates.
    pub fn term_universe(n: usize, target: Target) -> u128 {
        let sizes = match target {
            Target::MinSize(k) => k..=n,
            Target::Uniform(m) => m..=m,
        };
        sizes
            .map(|s| {
                let c = crate::boolean::binomial(n, s).to_u128().unwrap_or(u128::MAX);
                c.saturating_mul(1u128 << s)
            })
            .fold(0u128, u128::saturating_add)
    }

    fn full(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    fn term_points(&self, support: u32, signs: u32) -> impl Iterator<Item = u32> {
        let free = self.full() & !support;
        let mut sub = 0u32;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let v = signs | sub;
            sub = sub.wrapping_sub(free) & free;
            done = sub == 0;
            Some(v)
        })
    }
}

fn compress(value: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut m = mask;
    let mut j = 0;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if value & bit != 0 {
            out |= 1 << j;
        }
        j += 1;
        m &= m - 1;
    }
    out
}

/// Rank of a packed sign pattern in lexicographic order over the support's
/// variables, lowest variable first and 0 before 1.
fn lex_rank(packed: u32, size: u32) -> u32 {
    if size == 0 {
        0
    } else {
        packed.reverse_bits() >> (32 - size)
    }
}

pub(crate) struct GreedyResult {
    pub uncovered: u64,
    pub chosen: Vec<Choice>,
    pub steps: u64,
    pub timed_out: bool,
}

/// Repeatedly adds the candidate covering the most uncovered points. Ties go to
/// the first candidate in canonical term order.
pub(crate) fn greedy(problem: &Problem, deadline: Option<Instant>) -> GreedyResult {
    let supports = &problem.supports;
    let mut base = Vec::with_capacity(supports.len() + 1);
    let mut total = 0usize;
    for &s in supports {
        base.push(total);
        total += 1 << s.count_ones();
    }
    let mut counts: Vec<u32> = Vec::with_capacity(total);
    let mut heap = BinaryHeap::with_capacity(total);
    for (sidx, &s) in supports.iter().enumerate() {
        let size = s.count_ones();
        let each = 1u32 << (problem.n as u32 - size);
        for c in 0..(1u32 << size) {
            counts.push(each);
            heap.push((each, Reverse(sidx as u32), Reverse(lex_rank(c, size)), c));
        }
    }
    let mut covered = Bits::zeros(problem.npoints);
    let mut used = vec![false; supports.len()];
    let mut chosen = Vec::new();
    let mut covered_count = 0usize;
    let mut steps = 0;
    let mut timed_out = false;
    while let Some((stored, Reverse(sidx), rank, c)) = heap.pop() {
        let sidx = sidx as usize;
        if used[sidx] {
            continue;
        }
        let actual = counts[base[sidx] + c as usize];
        if actual != stored {
            heap.push((actual, Reverse(sidx as u32), rank, c));
            continue;
        }
        if actual == 0 {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        steps += 1;
        used[sidx] = true;
        let support = supports[sidx];
        // expand the compressed pattern back onto the support
        let mut signs = 0u32;
        let mut m = support;
        let mut j = 0;
        while m != 0 {
            let bit = m & m.wrapping_neg();
            if c >> j & 1 == 1 {
                signs |= bit;
            }
            j += 1;
            m &= m - 1;
        }
        chosen.push((sidx as u32, signs));
        for q in problem.term_points(support, signs) {
            if covered.get(q as usize) {
                continue;
            }
            covered.set(q as usize);
            covered_count += 1;
            for (other, &s) in supports.iter().enumerate() {
                if !used[other] {
                    counts[base[other] + compress(q & s, s) as usize] -= 1;
                }
            }
        }
        if covered_count == problem.npoints {
            break;
        }
    }
    GreedyResult {
        uncovered: (problem.npoints - covered_count) as u64,
        chosen,
        steps,
        timed_out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Action {
    Apply(Choice),
    Forbid(Choice),
    Dead(u32),
}

/// Search state mutated in place; every change is logged so it can be undone.
struct State<'a> {
    problem: &'a Problem,
    multiplicity: Vec<u32>,
    covered: usize,
    dead: Bits,
    used: Bits,
    chosen: Vec<Choice>,
    forbidden: Vec<Vec<u32>>,
    log: Vec<Action>,
}

impl<'a> State<'a> {
    fn new(problem: &'a Problem) -> Self {
        State {
            problem,
            multiplicity: vec![0; problem.npoints],
            covered: 0,
            dead: Bits::zeros(problem.npoints),
            used: Bits::zeros(problem.supports.len()),
            chosen: Vec::new(),
            forbidden: vec![Vec::new(); problem.supports.len()],
            log: Vec::new(),
        }
    }

    fn push(&mut self, action: Action) {
        match action {
            Action::Apply((sidx, signs)) => {
                self.used.set(sidx as usize);
                self.chosen.push((sidx, signs));
                for q in self.problem.term_points(self.problem.supports[sidx as usize], signs) {
                    let m = &mut self.multiplicity[q as usize];
                    if *m == 0 {
                        self.covered += 1;
                    }
                    *m += 1;
                }
            }
            Action::Forbid((sidx, signs)) => self.forbidden[sidx as usize].push(signs),
            Action::Dead(q) => self.dead.set(q as usize),
        }
        self.log.push(action);
    }

    fn pop(&mut self) {
        match self.log.pop().expect("undo past the root") {
            Action::Apply((sidx, signs)) => {
                self.used.clear(sidx as usize);
                self.chosen.pop();
                for q in self.problem.term_points(self.problem.supports[sidx as usize], signs) {
                    let m = &mut self.multiplicity[q as usize];
                    *m -= 1;
                    if *m == 0 {
                        self.covered -= 1;
                    }
                }
            }
            Action::Forbid((sidx, _)) => {
                self.forbidden[sidx as usize].pop();
            }
            Action::Dead(q) => self.dead.clear(q as usize),
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.log.len() > mark {
            self.pop();
        }
    }

    fn replay(&mut self, actions: &[Action]) {
        for &a in actions {
            self.push(a);
        }
    }

    fn is_live(&self, q: u32) -> bool {
        self.multiplicity[q as usize] == 0 && !self.dead.get(q as usize)
    }
}

enum Step {
    Done,
    Branch { point: u32, choices: Vec<Choice> },
}

struct Scratch {
    count: Vec<u32>,
    mark: Vec<bool>,
    touched: Vec<u32>,
    options: Vec<u32>,
    live: Vec<u32>,
    dead: Vec<u32>,
}

impl Scratch {
    fn new(npoints: usize) -> Self {
        Scratch {
            count: vec![0; npoints],
            mark: vec![false; npoints],
            touched: Vec::new(),
            options: vec![0; npoints],
            live: Vec::new(),
            dead: Vec::new(),
        }
    }
}

/// How a subtree exploration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Finish {
    Complete,
    Budget,
    Cancelled,
}

struct Dfs<'a> {
    problem: &'a Problem,
    allow_uncovered: bool,
    scratch: Scratch,
    nodes: u64,
    node_cap: u64,
    deadline: Option<Instant>,
    cancel: &'a (dyn Fn() -> bool + Sync),
    best_uncovered: u64,
    best_chosen: Option<Vec<Choice>>,
    finish: Finish,
}

impl<'a> Dfs<'a> {
    fn new(
        problem: &'a Problem,
        allow_uncovered: bool,
        node_cap: u64,
        deadline: Option<Instant>,
        cancel: &'a (dyn Fn() -> bool + Sync),
        best_uncovered: u64,
    ) -> Self {
        Dfs {
            problem,
            allow_uncovered,
            scratch: Scratch::new(problem.npoints),
            nodes: 0,
            node_cap,
            deadline,
            cancel,
            best_uncovered,
            best_chosen: None,
            finish: Finish::Complete,
        }
    }

    fn stopped(&self) -> bool {
        self.finish != Finish::Complete || self.best_uncovered == 0
    }

    fn tick(&mut self) -> bool {
        if self.stopped() {
            return false;
        }
        if self.nodes >= self.node_cap {
            self.finish = Finish::Budget;
            return false;
        }
        self.nodes += 1;
        if self.nodes % 64 == 1 {
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.finish = Finish::Budget;
                return false;
            }
            if (self.cancel)() {
                self.finish = Finish::Cancelled;
                return false;
            }
        }
        true
    }

    /// Records the incumbent, marks points no candidate can reach as dead, and
    /// either closes the node or returns the point to branch on.
    fn analyze(&mut self, st: &mut State) -> Step {
        let problem = self.problem;
        let s = &mut self.scratch;
        loop {
            s.live.clear();
            s.dead.clear();
            for q in 0..problem.npoints as u32 {
                if st.multiplicity[q as usize] == 0 {
                    if st.dead.get(q as usize) {
                        s.dead.push(q);
                    } else {
                        s.live.push(q);
                    }
                }
            }
            let uncovered_now = (problem.npoints - st.covered) as u64;
            if uncovered_now < self.best_uncovered {
                self.best_uncovered = uncovered_now;
                self.best_chosen = Some(st.chosen.clone());
            }
            if s.live.is_empty() || self.best_uncovered == 0 {
                return Step::Done;
            }

            for &q in &s.live {
                s.options[q as usize] = 0;
            }
            let mut capacity = 0usize;
            for (sidx, &support) in problem.supports.iter().enumerate() {
                if st.used.get(sidx) {
                    continue;
                }
                for &pat in st.forbidden[sidx].iter().chain(s.dead.iter()) {
                    let pat = pat & support;
                    s.mark[pat as usize] = true;
                    s.touched.push(pat);
                }
                let mut best = 0;
                for &q in &s.live {
                    let pat = (q & support) as usize;
                    if !s.mark[pat] {
                        if s.count[pat] == 0 {
                            s.touched.push(pat as u32);
                        }
                        s.count[pat] += 1;
                        best = best.max(s.count[pat]);
                        s.options[q as usize] += 1;
                    }
                }
                for &t in &s.touched {
                    s.count[t as usize] = 0;
                    s.mark[t as usize] = false;
                }
                s.touched.clear();
                capacity += best as usize;
            }

            let mut forced = false;
            for &q in &s.live {
                if s.options[q as usize] == 0 {
                    st.push(Action::Dead(q));
                    forced = true;
                }
            }
            if forced {
                continue;
            }

            let lower = (s.dead.len() + s.live.len().saturating_sub(capacity)) as u64;
            if lower >= self.best_uncovered {
                return Step::Done;
            }

            let point = *s
                .live
                .iter()
                .min_by_key(|&&q| (s.options[q as usize], q))
                .expect("live is non-empty");
            let mut choices: Vec<(u32, Choice)> = Vec::new();
            for (sidx, &support) in problem.supports.iter().enumerate() {
                if st.used.get(sidx) {
                    continue;
                }
                let signs = point & support;
                if st.forbidden[sidx].contains(&signs) || s.dead.iter().any(|&d| d & support == signs) {
                    continue;
                }
                let gain = problem.term_points(support, signs).filter(|&q| st.is_live(q)).count() as u32;
                choices.push((gain, (sidx as u32, signs)));
            }
            choices.sort_by_key(|&(gain, (sidx, _))| (Reverse(gain), sidx));
            return Step::Branch {
                point,
                choices: choices.into_iter().map(|(_, c)| c).collect(),
            };
        }
    }

    /// Depth-first exploration below the current state; leaves `st` as found.
    fn run(&mut self, st: &mut State) {
        if !self.tick() {
            return;
        }
        let base = st.log.len();
        if let Step::Branch { point, choices } = self.analyze(st) {
            let inner = st.log.len();
            for &choice in &choices {
                if self.stopped() {
                    break;
                }
                let mark = st.log.len();
                st.push(Action::Apply(choice));
                self.run(st);
                st.undo_to(mark);
                st.push(Action::Forbid(choice));
            }
            st.undo_to(inner);
            if self.allow_uncovered && !self.stopped() {
                st.push(Action::Dead(point));
                self.run(st);
            }
        }
        st.undo_to(base);
    }
}

/// A subtree root, given as the state log of its parent plus the branch taken.
struct Prefix {
    log: Vec<Action>,
    point: u32,
    choices: Vec<Choice>,
}

#[derive(Clone, Copy)]
struct Task {
    prefix: usize,
    /// Index into the prefix's choices; `choices.len()` is the uncovered branch.
    branch: usize,
}

fn enter(st: &mut State, prefix: &Prefix, branch: usize) {
    st.replay(&prefix.log);
    for &c in &prefix.choices[..branch.min(prefix.choices.len())] {
        st.push(Action::Forbid(c));
    }
    match prefix.choices.get(branch) {
        Some(&c) => st.push(Action::Apply(c)),
        None => st.push(Action::Dead(prefix.point)),
    }
}

/// Children of the untouched root. Every vertex and every support of a given
/// size are equivalent there, so the origin is branched on with one
/// representative support per size.
fn root_children(problem: &Problem, allow_uncovered: bool) -> Vec<Vec<Action>> {
    let mut out = Vec::new();
    let mut earlier = Vec::new();
    for &(start, end) in &problem.size_groups {
        let mut path = earlier.clone();
        path.push(Action::Apply((start as u32, 0)));
        out.push(path);
        earlier.extend((start..end).map(|sidx| Action::Forbid((sidx as u32, 0))));
    }
    if allow_uncovered {
        out.push(vec![Action::Dead(0)]);
    }
    out
}

pub(crate) struct TaskResult {
    pub best_uncovered: u64,
    pub best_chosen: Option<Vec<Choice>>,
    pub nodes: u64,
    pub finish: Finish,
}

pub(crate) struct TreeSearch {
    /// Best found while building the task list.
    pub pre_best: (u64, Option<Vec<Choice>>),
    pub pre_nodes: u64,
    /// Whether building the task list ran out of time.
    pub pre_timed_out: bool,
    /// Results of the tasks that count, in task order.
    pub tasks: Vec<TaskResult>,
}

/// Expands the root (with symmetry reduction) and its children, then explores
/// the grandchildren as independent tasks on `workers` threads. Each task gets
/// an equal share of the node budget and its own incumbent, so the outcome is
/// the same for any worker count. Once task `i` reaches a tautology, tasks
/// after `i` are cancelled and ignored.
pub(crate) fn tree_search(
    problem: &Problem,
    allow_uncovered: bool,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    incumbent: u64,
    workers: usize,
) -> TreeSearch {
    let never = || false;
    let mut pre = Dfs::new(problem, allow_uncovered, u64::MAX, deadline, &never, incumbent);
    let mut st = State::new(problem);
    let mut prefixes = Vec::new();
    let mut pre_timed_out = false;
    if pre.tick() {
        if let Step::Branch { .. } = pre.analyze(&mut st) {
            for path in root_children(problem, allow_uncovered) {
                if pre.deadline.is_some_and(|d| Instant::now() >= d) {
                    pre_timed_out = true;
                    break;
                }
                st.undo_to(0);
                st.replay(&path);
                pre.nodes += 1;
                if let Step::Branch { point, choices } = pre.analyze(&mut st) {
                    prefixes.push(Prefix {
                        log: st.log.clone(),
                        point,
                        choices,
                    });
                }
                if pre.best_uncovered == 0 {
                    break;
                }
            }
        }
    }
    let pre_best = (pre.best_uncovered, pre.best_chosen.take());
    let pre_nodes = pre.nodes;
    if pre_best.0 == 0 || pre_timed_out {
        return TreeSearch {
            pre_best,
            pre_nodes,
            pre_timed_out,
            tasks: Vec::new(),
        };
    }

    let tasks: Vec<Task> = prefixes
        .iter()
        .enumerate()
        .flat_map(|(p, prefix)| {
            let extra = usize::from(allow_uncovered);
            (0..prefix.choices.len() + extra).map(move |branch| Task { prefix: p, branch })
        })
        .collect();
    let task_count = tasks.len();
    let per_task = node_limit.map_or(u64::MAX, |l| {
        (l.saturating_sub(pre_nodes) / task_count.max(1) as u64).max(1)
    });
    let start_best = pre_best.0;
    let next = AtomicUsize::new(0);
    let solved_at = AtomicUsize::new(usize::MAX);
    let slots: Mutex<Vec<Option<TaskResult>>> = Mutex::new((0..task_count).map(|_| None).collect());

    let worker = || {
        let mut st = State::new(problem);
        loop {
            let i = next.fetch_add(1, Ordering::SeqCst);
            if i >= task_count {
                return;
            }
            if solved_at.load(Ordering::SeqCst) < i {
                continue;
            }
            let task = tasks[i];
            let cancel = || solved_at.load(Ordering::SeqCst) < i;
            let mut dfs = Dfs::new(problem, allow_uncovered, per_task, deadline, &cancel, start_best);
            st.undo_to(0);
            enter(&mut st, &prefixes[task.prefix], task.branch);
            dfs.run(&mut st);
            if dfs.best_uncovered == 0 {
                solved_at.fetch_min(i, Ordering::SeqCst);
            }
            slots.lock().unwrap()[i] = Some(TaskResult {
                best_uncovered: dfs.best_uncovered,
                best_chosen: dfs.best_chosen,
                nodes: dfs.nodes,
                finish: dfs.finish,
            });
        }
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers.max(1))
            .map(|_| {
                std::thread::Builder::new()
                    .stack_size(SEARCH_STACK)
                    .spawn_scoped(scope, worker)
                    .expect("spawn search worker")
            })
            .collect();
        for h in handles {
            h.join().expect("search worker panicked");
        }
    });

    let cutoff = solved_at.load(Ordering::SeqCst);
    let mut slots = slots.into_inner().unwrap();
    slots.truncate(if cutoff == usize::MAX { task_count } else { cutoff + 1 });
    TreeSearch {
        pre_best,
        pre_nodes,
        pre_timed_out,
        tasks: slots.into_iter().map(|s| s.expect("every kept task ran")).collect(),
    }
}
