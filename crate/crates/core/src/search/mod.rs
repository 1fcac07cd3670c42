//! Budgeted search for distinct DNF tautologies.
//!
//! Two targets are supported: every term has at least `k` literals, or every
//! term has exactly `m` literals. Terms in a result always have pairwise
//! different supports.

mod engine;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::boolean::{
    density_bound_a, is_distinct_dnf, is_tautology, pigeonhole_tautology, uniform_density, ComparisonMode,
    DnfExpression, Term,
};
use crate::{Error, Result};

use engine::{Choice, Finish, Problem};

/// Largest dimension the search accepts.
pub const SEARCH_MAX_N: usize = 20;
/// Default bound on the term universe for the exhaustive strategy.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 4096;
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Terms of size at least `k`.
    MinSize(usize),
    /// Terms of size exactly `m`.
    Uniform(usize),
}

impl Target {
    pub fn size(self) -> usize {
        match self {
            Target::MinSize(k) | Target::Uniform(k) => k,
        }
    }

    fn admits(self, size: usize) -> bool {
        match self {
            Target::MinSize(k) => size >= k,
            Target::Uniform(m) => size == m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    #[default]
    Backtracking,
    Exhaustive,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Backtracking => "backtracking",
            Strategy::Exhaustive => "exhaustive",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "backtracking" => Ok(Strategy::Backtracking),
            "exhaustive" => Ok(Strategy::Exhaustive),
            other => Err(Error::Domain(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Tautology,
    BestEffort,
    ProvedImpossible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Tautology => "Tautology",
            Status::BestEffort => "BestEffort",
            Status::ProvedImpossible => "ProvedImpossible",
        })
    }
}

/// Where an outcome's status comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Found (or not found) by the search itself.
    Search,
    /// Pigeonhole construction emitted without searching.
    Construction,
    /// The density sum is below one.
    Density,
    /// The whole search tree was explored without finding a tautology.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub node_limit: Option<u64>,
    #[serde(serialize_with = "serialize_opt_secs")]
    pub time_limit: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            node_limit: Some(DEFAULT_NODE_LIMIT),
            time_limit: Some(DEFAULT_TIME_LIMIT),
        }
    }
}

fn serialize_opt_secs<S: serde::Serializer>(d: &Option<Duration>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_some(&d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub n: usize,
    pub target: Target,
    pub budget: Budget,
    /// Echoed in outcomes; every current strategy is deterministic.
    pub seed: u64,
    pub strategy: Strategy,
    pub workers: usize,
    /// Search even when a pigeonhole construction already meets the target.
    pub force_search: bool,
    /// Largest term universe the exhaustive strategy will take on.
    pub exhaustive_cap: u64,
}

impl SearchConfig {
    pub fn new(n: usize, target: Target) -> Self {
        SearchConfig {
            n,
            target,
            budget: Budget::default(),
            seed: 0,
            strategy: Strategy::default(),
            workers: 1,
            force_search: false,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn distinct(n: usize, k: usize) -> Self {
        Self::new(n, Target::MinSize(k))
    }

    pub fn uniform(n: usize, m: usize) -> Self {
        Self::new(n, Target::Uniform(m))
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_node_limit(mut self, limit: Option<u64>) -> Self {
        self.budget.node_limit = limit;
        self
    }

    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.budget.time_limit = limit;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_force_search(mut self, force: bool) -> Self {
        self.force_search = force;
        self
    }

    /// Number of `(support, signs)` candidates for this instance.
    pub fn term_universe(&self) -> u128 {
        Problem::term_universe(self.n, self.target)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > SEARCH_MAX_N {
            return Err(Error::Capacity(format!(
                "search supports n <= {SEARCH_MAX_N}, got n = {}",
                self.n
            )));
        }
        if self.target.size() > self.n {
            return Err(Error::Domain(format!(
                "term size {} exceeds dimension {}",
                self.target.size(),
                self.n
            )));
        }
        let Budget { node_limit, time_limit } = self.budget;
        if node_limit.is_none() && time_limit.is_none() {
            return Err(Error::Domain("budget needs a node limit or a time limit".into()));
        }
        if node_limit == Some(0) || time_limit == Some(Duration::ZERO) {
            return Err(Error::Domain("budget must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Domain("at least one worker is required".into()));
        }
        if self.strategy == Strategy::Exhaustive && self.term_universe() > self.exhaustive_cap as u128 {
            return Err(Error::Capacity(format!(
                "term universe of {} candidates exceeds the exhaustive cap {}",
                self.term_universe(),
                self.exhaustive_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Best selection found, in canonical order.
    pub best: DnfExpression,
    pub uncovered_count: u64,
    pub status: Status,
    pub provenance: Provenance,
    pub nodes_explored: u64,
    pub elapsed: Duration,
    pub config: SearchConfig,
}

/// Flat, serializable view of an outcome.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRecord {
    pub status: Status,
    pub n: usize,
    pub target: &'static str,
    pub k_or_m: usize,
    pub uncovered_count: u64,
    pub terms: Vec<String>,
    pub nodes_explored: u64,
    pub elapsed_s: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub provenance: Provenance,
    pub workers: usize,
    pub node_limit: Option<u64>,
    pub time_limit_s: Option<f64>,
}

impl SearchOutcome {
    /// Wraps a known witness as a tautology outcome. Use [`certify`] to check it.
    pub fn construction(config: SearchConfig, witness: DnfExpression) -> Self {
        SearchOutcome {
            best: witness.sorted(),
            uncovered_count: 0,
            status: Status::Tautology,
            provenance: Provenance::Construction,
            nodes_explored: 0,
            elapsed: Duration::ZERO,
            config,
        }
    }

    pub fn record(&self) -> OutcomeRecord {
        OutcomeRecord {
            status: self.status,
            n: self.config.n,
            target: match self.config.target {
                Target::MinSize(_) => "min_size",
                Target::Uniform(_) => "uniform",
            },
            k_or_m: self.config.target.size(),
            uncovered_count: self.uncovered_count,
            terms: self.best.terms().iter().map(|t| t.to_string()).collect(),
            nodes_explored: self.nodes_explored,
            elapsed_s: self.elapsed.as_secs_f64(),
            seed: self.config.seed,
            strategy: self.config.strategy,
            provenance: self.provenance,
            workers: self.config.workers,
            node_limit: self.config.budget.node_limit,
            time_limit_s: self.config.budget.time_limit.map(|d| d.as_secs_f64()),
        }
    }
}

/// Searches for a tautology whose terms all have at least `k` literals.
pub fn search_distinct(config: &SearchConfig) -> Result<SearchOutcome> {
    if !matches!(config.target, Target::MinSize(_)) {
        return Err(Error::Domain("search_distinct needs a minimum-size target".into()));
    }
    search(config)
}

/// Searches for a tautology whose terms all have exactly `m` literals.
pub fn search_uniform(config: &SearchConfig) -> Result<SearchOutcome> {
    if !matches!(config.target, Target::Uniform(_)) {
        return Err(Error::Domain("search_uniform needs a uniform target".into()));
    }
    search(config)
}

/// Runs the configured strategy for either target.
pub fn search(config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.budget.time_limit.map(|d| start + d);
    let n = config.n;

    if let Target::MinSize(k) = config.target {
        if !config.force_search {
            if let Some(t) = pigeonhole_parameter(n, k) {
                let mut outcome = SearchOutcome::construction(config.clone(), pigeonhole_tautology(n, t)?);
                outcome.elapsed = start.elapsed();
                return Ok(outcome);
            }
        }
    }

    let problem = Problem::new(n, config.target);
    let greedy = engine::greedy(&problem, deadline);
    let mut nodes = greedy.steps;
    let mut best = (greedy.uncovered, to_dnf(&problem, &greedy.chosen)?);

    let finish = |best: (u64, DnfExpression), status, provenance, nodes| SearchOutcome {
        best: best.1,
        uncovered_count: best.0,
        status,
        provenance,
        nodes_explored: nodes,
        elapsed: start.elapsed(),
        config: config.clone(),
    };

    if !density_feasible(n, config.target) {
        return Ok(finish(best, Status::ProvedImpossible, Provenance::Density, nodes));
    }
    if best.0 == 0 {
        return Ok(finish(best, Status::Tautology, Provenance::Search, nodes));
    }
    if config.strategy == Strategy::Greedy || greedy.timed_out {
        return Ok(finish(best, Status::BestEffort, Provenance::Search, nodes));
    }

    let allow_uncovered = config.strategy == Strategy::Exhaustive;
    let node_limit = config.budget.node_limit.map(|l| l.saturating_sub(nodes));
    let tree = engine::tree_search(&problem, allow_uncovered, node_limit, deadline, best.0, config.workers);

    nodes += tree.pre_nodes;
    let mut complete = true;
    if let (u, Some(chosen)) = &tree.pre_best {
        consider(&mut best, *u, to_dnf(&problem, chosen)?);
    }
    for task in &tree.tasks {
        nodes += task.nodes;
        complete &= task.finish == Finish::Complete;
        if let Some(chosen) = &task.best_chosen {
            consider(&mut best, task.best_uncovered, to_dnf(&problem, chosen)?);
        }
    }
    if tree.pre_timed_out {
        complete = false;
    }

    let (status, provenance) = if best.0 == 0 {
        (Status::Tautology, Provenance::Search)
    } else if complete {
        (Status::ProvedImpossible, Provenance::Exhausted)
    } else {
        (Status::BestEffort, Provenance::Search)
    };
    Ok(finish(best, status, provenance, nodes))
}

/// Re-checks a tautology outcome from its DNF alone.
pub fn certify(outcome: &SearchOutcome) -> Result<()> {
    if outcome.status != Status::Tautology {
        return Err(Error::Contract(format!(
            "only tautology outcomes can be certified, got {}",
            outcome.status
        )));
    }
    let dnf = &outcome.best;
    let config = &outcome.config;
    let fail = |what: &str| Err(Error::Integrity(format!("certification failed: {what}")));
    if dnf.n() != config.n {
        return fail(&format!("witness has dimension {}, expected {}", dnf.n(), config.n));
    }
    if outcome.uncovered_count != 0 {
        return fail("uncovered count is not zero");
    }
    if !is_tautology(dnf)? {
        return fail("witness is not a tautology");
    }
    if !is_distinct_dnf(dnf) {
        return fail("witness repeats a support");
    }
    if let Some(bad) = dnf.terms().iter().find(|t| !config.target.admits(t.size())) {
        return fail(&format!("term `{bad}` has size {}", bad.size()));
    }
    Ok(())
}

/// A pigeonhole parameter `t` whose construction has every term of size at least `k`.
pub fn pigeonhole_parameter(n: usize, k: usize) -> Option<usize> {
    (1..=n).find(|&t| 2 * t != n && t.min(n - t) >= k)
}

/// Whether the density sum allows a tautology for this target at all.
pub fn density_feasible(n: usize, target: Target) -> bool {
    match target {
        Target::MinSize(k) => density_bound_a(n, ComparisonMode::Weak) >= k,
        Target::Uniform(m) => ComparisonMode::Weak.accepts(&uniform_density(n, m)),
    }
}

fn consider(best: &mut (u64, DnfExpression), uncovered: u64, dnf: DnfExpression) {
    if uncovered < best.0 || (uncovered == best.0 && dnf < best.1) {
        *best = (uncovered, dnf);
    }
}

fn to_dnf(problem: &Problem, chosen: &[Choice]) -> Result<DnfExpression> {
    let terms = chosen
        .iter()
        .map(|&(sidx, signs)| Term::new(problem.n, problem.supports[sidx as usize], signs))
        .collect::<Result<Vec<_>>>()?;
    Ok(DnfExpression::new(problem.n, terms)?.sorted())
}
