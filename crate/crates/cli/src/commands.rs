use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cubecover::boolean::{
    boolean_mndr_check, bound_table, dnf_coverage_with, is_distinct_dnf, is_exact_dnf, pigeonhole_tautology,
    BoundKind, ComparisonMode, DnfExpression,
};
use cubecover::boxcover::{
    box_cover_check_with, max_feasible_codimension, parse_box_file, reciprocal_diagnostics, symmetric_tail,
};
use cubecover::congruence::{
    is_distinct, is_exact, top_moduli_check, verify_cover_with, znam_multiplicity_check, CongruenceSystem,
};
use cubecover::crt::{system_cover_equivalence_with, system_to_subboxes};
use cubecover::search::{certify, search, SearchConfig, Status, Strategy, Target, DEFAULT_EXHAUSTIVE_CAP};
use cubecover::{Error, Limits};

use crate::exit;
use crate::manifest::Inputs;

/// Result of one subcommand: text and JSON renderings plus the exit code.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: u8,
    /// Where to also write the JSON document (with manifest), if anywhere.
    pub json_file: Option<PathBuf>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        exit::SUCCESS
    } else {
        exit::NEGATIVE
    }
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyCovsys {
    /// File with one `a mod m` class per line.
    pub path: PathBuf,
}

impl VerifyCovsys {
    pub fn run(&self, limits: &Limits, inputs: &mut Inputs) -> Result<Report> {
        let system = CongruenceSystem::parse(&inputs.read(&self.path)?)?;
        let report = verify_cover_with(&system, limits)?;
        let exact = is_exact(&system);
        let distinct = is_distinct(&system);
        let structure = exact && report.is_cover;
        let mndr = structure.then(|| top_moduli_check(&system)).transpose()?;
        let znam = structure.then(|| znam_multiplicity_check(&system)).transpose()?;

        let mut text = String::new();
        writeln!(text, "classes: {}", system.len())?;
        writeln!(text, "lcm: {}", report.lcm)?;
        writeln!(text, "covering: {}", yes(report.is_cover))?;
        write!(text, "uncovered: {}", report.uncovered_total)?;
        if !report.uncovered.is_empty() {
            let shown: Vec<String> = report.uncovered.iter().take(20).map(u64::to_string).collect();
            write!(text, " (residues {}", shown.join(" "))?;
            if report.uncovered_total > shown.len() as u64 {
                write!(text, " ...")?;
            }
            write!(text, ")")?;
        }
        writeln!(text)?;
        let histogram: Vec<String> = report
            .multiplicity_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        writeln!(text, "multiplicity: {}", histogram.join(" "))?;
        writeln!(text, "exact: {}", yes(exact))?;
        writeln!(text, "distinct: {}", yes(distinct))?;
        for (a, b) in &report.duplicate_classes {
            writeln!(text, "duplicate: {} = {}", system.classes()[*a], system.classes()[*b])?;
        }
        if let Some(m) = mndr {
            writeln!(text, "top moduli equal: {}{}", yes(m.holds), if m.degenerate { " (single class)" } else { "" })?;
        }
        if let Some(z) = znam {
            match z.smallest_prime {
                Some(p) => writeln!(
                    text,
                    "znam: top modulus occurs {} times, smallest prime {p}: {}",
                    z.multiplicity,
                    yes(z.holds)
                )?,
                None => writeln!(text, "znam: lcm is 1, holds vacuously")?,
            }
        }

        let mut json = serde_json::to_value(&report)?;
        json["classes"] = json!(system.len());
        json["is_exact"] = json!(exact);
        json["is_distinct"] = json!(distinct);
        json["mndr"] = serde_json::to_value(mndr)?;
        json["znam"] = serde_json::to_value(znam)?;
        Ok(Report {
            text,
            json,
            code: verdict(report.is_cover),
            json_file: None,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CrtMap {
    /// Congruence file whose lcm is square-free.
    pub path: PathBuf,
    /// Also compare the congruence cover with the box cover.
    #[arg(long)]
    pub check: bool,
    /// Write the box file here instead of only printing it.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl CrtMap {
    pub fn run(&self, limits: &Limits, inputs: &mut Inputs) -> Result<Report> {
        let system = CongruenceSystem::parse(&inputs.read(&self.path)?)?;
        let (factorization, container, boxes) = system_to_subboxes(&system)?;
        let primes = factorization.primes();

        let mut listing = String::new();
        let prime_list: Vec<String> = primes.iter().map(u64::to_string).collect();
        if primes.is_empty() {
            writeln!(listing, "# lcm 1: the box has a single point")?;
        } else {
            writeln!(listing, "# lcm {} = {}", factorization.value(), prime_list.join(" * "))?;
        }
        writeln!(listing, "box:{}", primes.iter().map(|p| format!(" {p}")).collect::<String>())?;
        for (class, b) in system.classes().iter().zip(&boxes) {
            writeln!(listing, "# {class}")?;
            writeln!(listing, "{b}")?;
        }

        let equivalence = if self.check {
            Some(system_cover_equivalence_with(&system, limits)?)
        } else {
            None
        };
        if let Some(eq) = equivalence {
            writeln!(listing, "# cover equivalence: {}", if eq { "holds" } else { "FAILS" })?;
        }
        if let Some(out) = &self.output {
            std::fs::write(out, &listing).with_context(|| format!("writing {}", out.display()))?;
        }

        let subboxes: Vec<Value> = system
            .classes()
            .iter()
            .zip(&boxes)
            .map(|(class, b)| {
                let fixed: Vec<Value> = b
                    .fixed()
                    .iter()
                    .map(|(&i, &v)| json!({ "coordinate": i + 1, "prime": primes[i], "value": v }))
                    .collect();
                json!({ "residue": class.residue(), "modulus": class.modulus(), "fixed": fixed })
            })
            .collect();
        let json = json!({
            "lcm": factorization.value(),
            "primes": primes,
            "radices": container.radices(),
            "subboxes": subboxes,
            "equivalence": equivalence,
            "output": self.output,
        });
        Ok(Report {
            text: listing,
            json,
            code: verdict(equivalence.unwrap_or(true)),
            json_file: None,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DnfCheck {
    /// DNF file: `n = <dim>` header, then one term per line.
    pub path: PathBuf,
    /// Also require every term to have at least this many literals.
    #[arg(long)]
    pub min_size: Option<usize>,
}

impl DnfCheck {
    pub fn run(&self, limits: &Limits, inputs: &mut Inputs) -> Result<Report> {
        let dnf = DnfExpression::parse(&inputs.read(&self.path)?)?;
        let coverage = dnf_coverage_with(&dnf, limits)?;
        let tautology = coverage.uncovered_count == 0;
        let distinct = is_distinct_dnf(&dnf);
        let exact = is_exact_dnf(&dnf);
        let min_size = dnf.min_term_size();
        let mndr = (tautology && exact).then(|| boolean_mndr_check(&dnf)).transpose()?;
        let size_ok = match (self.min_size, min_size) {
            (Some(k), Some(s)) => s >= k,
            _ => true,
        };

        let mut text = String::new();
        writeln!(text, "n: {}", dnf.n())?;
        writeln!(text, "terms: {}", dnf.len())?;
        writeln!(text, "tautology: {}", yes(tautology))?;
        writeln!(text, "uncovered: {}", coverage.uncovered_count)?;
        writeln!(text, "distinct: {}", yes(distinct))?;
        writeln!(text, "exact: {}", yes(exact))?;
        match min_size {
            Some(s) => writeln!(text, "min term size: {s}")?,
            None => writeln!(text, "min term size: none")?,
        }
        if let Some(k) = self.min_size {
            writeln!(text, "min size >= {k}: {}", yes(size_ok))?;
        }
        if let Some(m) = mndr {
            writeln!(
                text,
                "largest terms: size {} occurs {} times, mate present: {}",
                m.max_size,
                m.multiplicity,
                yes(m.holds)
            )?;
        }
        let json = json!({
            "n": dnf.n(),
            "terms": dnf.len(),
            "is_tautology": tautology,
            "uncovered_count": coverage.uncovered_count,
            "is_distinct": distinct,
            "is_exact": exact,
            "min_term_size": min_size,
            "min_size_ok": size_ok,
            "mndr": mndr,
        });
        Ok(Report {
            text,
            json,
            code: verdict(tautology && size_ok),
            json_file: None,
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DnfConstruct {
    #[arg(long)]
    pub n: usize,
    /// Positive terms use t-subsets, negative terms (n-t)-subsets.
    #[arg(long)]
    pub t: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl DnfConstruct {
    pub fn run(&self) -> Result<Report> {
        let dnf = pigeonhole_tautology(self.n, self.t)?;
        let body = dnf.to_text();
        if let Some(out) = &self.output {
            std::fs::write(out, &body).with_context(|| format!("writing {}", out.display()))?;
        }
        let text = match &self.output {
            Some(out) => format!("wrote {} terms to {}\n", dnf.len(), out.display()),
            None => body,
        };
        let json = json!({
            "n": self.n,
            "t": self.t,
            "terms": dnf.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "term_count": dnf.len(),
            "min_term_size": dnf.min_term_size(),
            "output": self.output,
        });
        Ok(Report {
            text,
            json,
            code: exit::SUCCESS,
            json_file: None,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Table {
    A,
    B,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weak,
    Strict,
}

impl From<Mode> for ComparisonMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Weak => ComparisonMode::Weak,
            Mode::Strict => ComparisonMode::Strict,
        }
    }
}

const A1_NOTE: &str = "A(1) = 0: the tail at k = 1 is 1/2, so only k = 0 clears 1 (the sequence is often quoted starting from 1)";

#[derive(Debug, Args, Serialize)]
pub struct Bounds {
    #[arg(long, value_enum, ignore_case = true)]
    pub table: Table,
    #[arg(long, default_value_t = 14)]
    pub max_n: usize,
    #[arg(long, value_enum, default_value_t = Mode::Weak)]
    pub mode: Mode,
}

impl Bounds {
    pub fn run(&self) -> Result<Report> {
        if self.max_n == 0 {
            return Err(Error::Domain("--max-n must be at least 1".into()).into());
        }
        let kind = match self.table {
            Table::A => BoundKind::A,
            Table::B => BoundKind::B,
        };
        let table = bound_table(kind, self.max_n, self.mode.into());
        let mut notes = Vec::new();
        if matches!(self.table, Table::A) {
            notes.push(A1_NOTE);
        }

        let mut text = String::new();
        let label = match self.table {
            Table::A => "A(n): largest k with sum_{i>=k} C(n,i)/2^i",
            Table::B => "B(n): largest m with C(n,m)/2^m",
        };
        let cmp = match self.mode {
            Mode::Weak => ">= 1",
            Mode::Strict => "> 1",
        };
        writeln!(text, "# {label} {cmp}")?;
        for note in &notes {
            writeln!(text, "# note: {note}")?;
        }
        writeln!(text, "{:>4} {:>6}  value", "n", "bound")?;
        for row in &table.rows {
            writeln!(text, "{:>4} {:>6}  {}", row.n, row.bound, row.value)?;
        }
        let mut json = serde_json::to_value(&table)?;
        json["values"] = json!(table.values());
        json["notes"] = json!(notes);
        Ok(Report {
            text,
            json,
            code: exit::SUCCESS,
            json_file: None,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Greedy,
    Backtracking,
    Exhaustive,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Backtracking => Strategy::Backtracking,
            StrategyArg::Exhaustive => Strategy::Exhaustive,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("target").required(true).args(["min_size", "uniform"])))]
pub struct Search {
    #[arg(long)]
    pub n: usize,
    /// Every term has at least this many literals.
    #[arg(long)]
    pub min_size: Option<usize>,
    /// Every term has exactly this many literals.
    #[arg(long)]
    pub uniform: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub budget: f64,
    /// Node budget; when absent only the clock limits the search.
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Backtracking)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Search even when a pigeonhole construction meets the target.
    #[arg(long)]
    pub force_search: bool,
    /// Largest term universe accepted by the exhaustive strategy.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    pub exhaustive_cap: u64,
    /// Write the best DNF found here.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Write the outcome JSON here.
    #[arg(long)]
    pub outcome: Option<PathBuf>,
}

impl Search {
    pub fn run(&self) -> Result<Report> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Domain(format!("--budget must be a positive number of seconds, got {}", self.budget)).into());
        }
        let target = match (self.min_size, self.uniform) {
            (Some(k), None) => Target::MinSize(k),
            (None, Some(m)) => Target::Uniform(m),
            _ => unreachable!("clap enforces exactly one target"),
        };
        let mut config = SearchConfig::new(self.n, target)
            .with_strategy(self.strategy.into())
            .with_time_limit(Some(Duration::from_secs_f64(self.budget)))
            .with_node_limit(self.node_limit)
            .with_seed(self.seed)
            .with_workers(self.workers)
            .with_force_search(self.force_search);
        config.exhaustive_cap = self.exhaustive_cap;

        let outcome = search(&config)?;
        if outcome.status == Status::Tautology {
            certify(&outcome)?;
        }
        let record = outcome.record();

        let mut header = String::new();
        writeln!(header, "# status: {}", outcome.status)?;
        writeln!(header, "# target: {} {}", record.target, record.k_or_m)?;
        writeln!(header, "# uncovered: {} of {}", outcome.uncovered_count, 1u64 << self.n)?;
        writeln!(header, "# terms: {}", outcome.best.len())?;
        writeln!(header, "# nodes: {}", outcome.nodes_explored)?;
        writeln!(header, "# elapsed: {:.3}s", outcome.elapsed.as_secs_f64())?;
        writeln!(header, "# strategy: {} seed: {}", record.strategy, record.seed)?;
        let body = format!("{header}{}", outcome.best.to_text());
        if let Some(path) = &self.witness {
            std::fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
        }

        let mut json = serde_json::to_value(&record)?;
        json["witness"] = json!(self.witness);
        Ok(Report {
            text: body,
            json,
            code: verdict(outcome.status == Status::Tautology),
            json_file: self.outcome.clone(),
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BoxCheck {
    /// Box file: `box: a1 a2 ...` header, then `fix i=v ...` lines.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Weak)]
    pub mode: Mode,
}

impl BoxCheck {
    pub fn run(&self, limits: &Limits, inputs: &mut Inputs) -> Result<Report> {
        let (container, boxes) = parse_box_file(&inputs.read(&self.path)?)?;
        let report = box_cover_check_with(&container, &boxes, limits)?;
        let mode = self.mode.into();
        let tail = report
            .min_fixed
            .map(|m| symmetric_tail(&container, m, mode))
            .transpose()?;
        let max_codim = max_feasible_codimension(&container, mode);
        let diagnostics = reciprocal_diagnostics(container.radices())?;

        let mut text = String::new();
        let radices: Vec<String> = container.radices().iter().map(u64::to_string).collect();
        writeln!(text, "box: {} ({} points)", radices.join(" x "), container.point_count())?;
        writeln!(text, "sub-boxes: {}", boxes.len())?;
        writeln!(text, "covering: {}", yes(report.is_cover))?;
        writeln!(text, "uncovered: {}", report.uncovered_count)?;
        writeln!(text, "non-parallel: {}", yes(report.is_non_parallel()))?;
        for (a, b) in &report.parallel_violations {
            writeln!(text, "parallel: #{} and #{}", a + 1, b + 1)?;
        }
        if let (Some(m), Some(t)) = (report.min_fixed, &tail) {
            writeln!(text, "min fixed coordinates: {m}")?;
            writeln!(text, "density tail at {m}: {} (clears 1: {})", t.value, yes(t.feasible))?;
        }
        writeln!(text, "max feasible codimension: {max_codim}")?;
        writeln!(text, "sum of reciprocals: {}", diagnostics.sum)?;
        writeln!(text, "product of (1 + 1/a): {}", diagnostics.product)?;

        let mut json = serde_json::to_value(&report)?;
        json["radices"] = json!(container.radices());
        json["subbox_count"] = json!(boxes.len());
        json["is_non_parallel"] = json!(report.is_non_parallel());
        json["tail"] = serde_json::to_value(&tail)?;
        json["max_feasible_codimension"] = json!(max_codim);
        json["reciprocals"] = serde_json::to_value(&diagnostics)?;
        json["comparison_mode"] = json!(self.mode);
        Ok(Report {
            text,
            json,
            code: verdict(report.is_cover),
            json_file: None,
        })
    }
}
