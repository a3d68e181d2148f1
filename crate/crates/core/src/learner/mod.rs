//! The learner: rule-driven growth of an observation tree until the teacher
//! accepts a hypothesis.

mod ads;
mod counterexample;
mod hypothesis;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mealy::{Input, MealyMachine};
use crate::obstree::{FrontierStatus, Node, NormSnapshot, ObservationTree, TreeError};
use crate::oracle::{EqAnswer, OracleError, Teacher};

pub use ads::{ads_expected_reward, build_ads, run_adaptive_query, AdsNode, Reward};
pub use counterexample::{frontier_distance, process_counterexample};
pub use hypothesis::{
    build_hypothesis, check_consistency, shortest_conflict_prefix, Consistency, Hypothesis,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("teacher contradicted an earlier answer: {0}")]
    TeacherInconsistent(TreeError),
    #[error("output query budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("frontier node {0} is isolated")]
    IsolatedFrontier(Node),
    #[error("basis node {0} has undefined transitions")]
    IncompleteBasis(Node),
    #[error("word does not lead to a conflict")]
    NoConflict,
    #[error("norm did not grow after {rule:?} ({before} -> {after})")]
    NormStalled { rule: Rule, before: u64, after: u64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Single output queries in R2 and R3.
    #[default]
    Plain,
    /// Adaptive distinguishing sequences appended in R2 and R3.
    Ads,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Policy {
    /// R1, then R3, then R2; R4 only when nothing else applies.
    #[default]
    Strategic,
    /// Uniformly random choice among the applicable rules.
    AnyOrder { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCounts {
    pub r1: u64,
    pub r2: u64,
    pub r3: u64,
    pub r4: u64,
}

impl RuleCounts {
    fn bump(&mut self, rule: Rule) {
        match rule {
            Rule::R1 => self.r1 += 1,
            Rule::R2 => self.r2 += 1,
            Rule::R3 => self.r3 += 1,
            Rule::R4 => self.r4 += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.r1 + self.r2 + self.r3 + self.r4
    }
}

/// One rule application, as written to the event log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEvent {
    pub rule: Rule,
    pub norm_before: u64,
    pub norm_after: u64,
    /// Output queries spent by this application.
    pub resets: u64,
    pub symbols: u64,
}

#[derive(Clone, Debug, Default)]
pub struct LearnerConfig {
    pub variant: Variant,
    pub policy: Policy,
    /// Abort once more output queries than this have been sent.
    pub max_output_queries: Option<u64>,
    pub record_events: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub hypothesis: MealyMachine,
    pub rule_counts: RuleCounts,
    pub output_queries: u64,
    pub input_symbols: u64,
    /// Including the final, accepted one.
    pub eq_queries: u64,
    pub failed_eq_queries: u64,
    /// Conflicts found by the consistency check; these cost no teacher
    /// interaction.
    pub consistency_conflicts: u64,
    /// R3 applications whose adaptive query gained nothing and were repeated
    /// with a plain witness.
    pub ads_fallbacks: u64,
    /// Length of the longest word handed to counterexample processing or
    /// returned by the teacher as a counterexample.
    pub longest_counterexample: usize,
    /// The accepting oracle only ran a finite number of tests.
    pub approximate: bool,
    /// Norm before the first rule and after every refining rule.
    pub norm_trace: Vec<u64>,
    pub tree_size: usize,
    pub events: Vec<RuleEvent>,
}

/// Outcome of one application of R4.
#[derive(Clone, Debug)]
pub enum R4Outcome {
    NotApplicable,
    Accepted {
        hypothesis: Box<Hypothesis>,
        approximate: bool,
    },
    /// A conflict was found and processed.
    Refined {
        from_equivalence_query: bool,
    },
}

/// Sends `word` to the teacher unless the tree already knows the answer and
/// records the reply. Returns whether the teacher was asked.
pub(crate) fn output_query<T: Teacher + ?Sized>(
    tree: &mut ObservationTree,
    teacher: &mut T,
    word: &[Input],
) -> Result<bool, LearnError> {
    if tree.run(Node::ROOT, word).is_some() {
        return Ok(false);
    }
    let outputs = teacher.output_query(word);
    tree.extend(Node::ROOT, word, &outputs)
        .map_err(LearnError::TeacherInconsistent)?;
    Ok(true)
}

#[derive(Clone, Debug, Default)]
struct Stats {
    rules: RuleCounts,
    eq_queries: u64,
    failed_eq_queries: u64,
    consistency_conflicts: u64,
    ads_fallbacks: u64,
    longest_counterexample: usize,
}

pub struct Learner<T: Teacher> {
    teacher: T,
    tree: ObservationTree,
    config: LearnerConfig,
    /// Non-apart basis nodes of every frontier node, ascending.
    candidates: BTreeMap<Node, Vec<Node>>,
    synced_basis: usize,
    synced_revision: Option<u64>,
    rng: ChaCha8Rng,
    stats: Stats,
}

impl<T: Teacher> Learner<T> {
    pub fn new(teacher: T, config: LearnerConfig) -> Self {
        let tree = ObservationTree::new(teacher.inputs().len());
        Self::with_tree(teacher, tree, config)
    }

    /// Continues learning from an existing tree over the teacher's inputs.
    pub fn with_tree(teacher: T, tree: ObservationTree, config: LearnerConfig) -> Self {
        assert_eq!(
            tree.num_inputs(),
            teacher.inputs().len(),
            "alphabet size mismatch"
        );
        let seed = match config.policy {
            Policy::AnyOrder { seed } => seed,
            Policy::Strategic => 0,
        };
        Self {
            teacher,
            tree,
            config,
            candidates: BTreeMap::new(),
            synced_basis: 0,
            synced_revision: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: Stats::default(),
        }
    }

    pub fn tree(&self) -> &ObservationTree {
        &self.tree
    }

    pub fn tree_mut(&mut self) -> &mut ObservationTree {
        self.synced_revision = None;
        &mut self.tree
    }

    pub fn teacher(&self) -> &T {
        &self.teacher
    }

    pub fn teacher_mut(&mut self) -> &mut T {
        &mut self.teacher
    }

    /// Tree and teacher borrowed together, for driving the free functions
    /// of this module directly.
    pub fn parts_mut(&mut self) -> (&mut ObservationTree, &mut T) {
        self.synced_revision = None;
        (&mut self.tree, &mut self.teacher)
    }

    pub fn into_parts(self) -> (T, ObservationTree) {
        (self.teacher, self.tree)
    }

    /// Output query that skips the teacher when the tree already holds the
    /// word. Returns whether the teacher was asked.
    pub fn output_query(&mut self, word: &[Input]) -> Result<bool, LearnError> {
        output_query(&mut self.tree, &mut self.teacher, word)
    }

    /// Brings the candidate sets in line with the current tree.
    fn refresh(&mut self) {
        let basis_len = self.tree.basis().len();
        if self.synced_revision == Some(self.tree.revision()) && self.synced_basis == basis_len {
            return;
        }
        let tree = &mut self.tree;
        if self.synced_revision.is_none() {
            self.candidates.clear();
            self.synced_basis = basis_len;
        }
        self.candidates.retain(|f, _| tree.is_frontier(*f));
        let new_basis: Vec<Node> = tree.basis()[self.synced_basis..].to_vec();
        let frontier: Vec<Node> = tree.frontier().collect();
        for f in frontier {
            match self.candidates.get_mut(&f) {
                None => {
                    let cands = tree.candidates(f);
                    self.candidates.insert(f, cands);
                }
                Some(cands) => {
                    cands.extend(new_basis.iter().copied());
                    cands.retain(|&b| !tree.apart(f, b));
                    cands.sort();
                }
            }
        }
        self.synced_basis = basis_len;
        self.synced_revision = Some(tree.revision());
    }

    /// Current norm of the tree.
    pub fn norm(&mut self) -> NormSnapshot {
        self.refresh();
        let s = self.tree.basis().len() as u64;
        let sq = s * (s + 1) / 2;
        let sdef = self
            .tree
            .basis()
            .iter()
            .map(|&q| {
                self.tree
                    .inputs()
                    .filter(|&i| self.tree.step(q, i).is_some())
                    .count() as u64
            })
            .sum();
        let sapart = self.candidates.values().map(|c| s - c.len() as u64).sum();
        NormSnapshot {
            sq,
            sdef,
            sapart,
            total: sq + sdef + sapart,
        }
    }

    pub fn frontier_status(&mut self, node: Node) -> Result<FrontierStatus, TreeError> {
        self.refresh();
        let cands = self
            .candidates
            .get(&node)
            .ok_or(TreeError::NotInFrontier(node))?;
        Ok(match cands.len() {
            0 => FrontierStatus::Isolated,
            1 => FrontierStatus::Identified(cands[0]),
            _ => FrontierStatus::Ambiguous(cands.clone()),
        })
    }

    fn first_frontier(&self, pred: impl Fn(usize) -> bool) -> Option<Node> {
        self.candidates
            .iter()
            .find(|(_, c)| pred(c.len()))
            .map(|(&f, _)| f)
    }

    /// Rules whose guard currently holds.
    pub fn applicable_rules(&mut self) -> Vec<Rule> {
        self.refresh();
        let isolated = self.first_frontier(|c| c == 0).is_some();
        let complete = self.tree.is_basis_complete();
        let mut rules = Vec::new();
        if isolated {
            rules.push(Rule::R1);
        }
        if !complete {
            rules.push(Rule::R2);
        }
        if self.first_frontier(|c| c >= 2).is_some() {
            rules.push(Rule::R3);
        }
        if !isolated && complete {
            rules.push(Rule::R4);
        }
        rules
    }

    /// The rule the configured policy applies next.
    pub fn next_rule(&mut self) -> Rule {
        let rules = self.applicable_rules();
        match self.config.policy {
            Policy::Strategic => [Rule::R1, Rule::R3, Rule::R2, Rule::R4]
                .into_iter()
                .find(|r| rules.contains(r))
                .expect("R4 applies when nothing else does"),
            Policy::AnyOrder { .. } => *rules.choose(&mut self.rng).expect("some rule applies"),
        }
    }

    /// R1: promotes the lowest isolated frontier node.
    pub fn rule_r1(&mut self) -> Result<bool, LearnError> {
        self.refresh();
        let Some(f) = self.first_frontier(|c| c == 0) else {
            return Ok(false);
        };
        self.tree.promote(f).expect("isolated frontier node");
        Ok(true)
    }

    /// R2: explores the lowest missing basis transition.
    pub fn rule_r2(&mut self) -> Result<bool, LearnError> {
        let Some((q, i)) = self.tree.incomplete_basis() else {
            return Ok(false);
        };
        let mut word = self.tree.access(q);
        word.push(i);
        match self.config.variant {
            Variant::Plain => {
                output_query(&mut self.tree, &mut self.teacher, &word)?;
            }
            Variant::Ads => {
                let ads = build_ads(&self.tree, self.tree.basis());
                self.adaptive_query(&word, &ads)?;
            }
        }
        Ok(true)
    }

    /// R3: separates the lowest ambiguous frontier node from some of its
    /// candidates.
    pub fn rule_r3(&mut self) -> Result<bool, LearnError> {
        self.refresh();
        let Some(f) = self.first_frontier(|c| c >= 2) else {
            return Ok(false);
        };
        let access = self.tree.access(f);
        if self.config.variant == Variant::Ads {
            let before = self.norm().sapart;
            let ads = build_ads(&self.tree, &self.candidates[&f]);
            self.adaptive_query(&access, &ads)?;
            if self.norm().sapart > before {
                return Ok(true);
            }
            self.stats.ads_fallbacks += 1;
        }
        let cands = &self.candidates[&f];
        let (r, r2) = (cands[0], cands[1]);
        let witness = self
            .tree
            .is_apart(r, r2)
            .expect("basis nodes are pairwise apart");
        let mut word = access;
        word.extend(witness);
        output_query(&mut self.tree, &mut self.teacher, &word)?;
        Ok(true)
    }

    fn adaptive_query(&mut self, prefix: &[Input], ads: &AdsNode) -> Result<(), LearnError> {
        let (inputs, outputs) = run_adaptive_query(&mut self.teacher, prefix, ads);
        self.tree
            .extend(Node::ROOT, &inputs, &outputs)
            .map_err(LearnError::TeacherInconsistent)?;
        Ok(())
    }

    /// The hypothesis for the current tree, if the R4 guard holds.
    pub fn hypothesis(&mut self) -> Result<Hypothesis, LearnError> {
        let inputs = self.teacher.inputs().clone();
        let outputs = self.teacher.outputs().clone();
        build_hypothesis(&mut self.tree, &inputs, &outputs)
    }

    /// R4: builds a hypothesis, checks it against the tree and then against
    /// the teacher, and processes any conflict found on the way.
    pub fn rule_r4(&mut self) -> Result<R4Outcome, LearnError> {
        self.refresh();
        if self.first_frontier(|c| c == 0).is_some() || !self.tree.is_basis_complete() {
            return Ok(R4Outcome::NotApplicable);
        }
        let hyp = self.hypothesis()?;
        let (sigma, from_eq) = match check_consistency(&mut self.tree, &hyp) {
            Consistency::Conflict(sigma) => {
                self.stats.consistency_conflicts += 1;
                self.stats.longest_counterexample =
                    self.stats.longest_counterexample.max(sigma.len());
                (sigma, false)
            }
            Consistency::Consistent => {
                self.stats.eq_queries += 1;
                match self.teacher.equivalence_query(hyp.machine())? {
                    EqAnswer::Yes { approximate } => {
                        return Ok(R4Outcome::Accepted {
                            hypothesis: Box::new(hyp),
                            approximate,
                        })
                    }
                    EqAnswer::Counterexample(rho) => {
                        self.stats.failed_eq_queries += 1;
                        log::debug!("counterexample of length {}", rho.len());
                        self.stats.longest_counterexample =
                            self.stats.longest_counterexample.max(rho.len());
                        output_query(&mut self.tree, &mut self.teacher, &rho)?;
                        (shortest_conflict_prefix(&mut self.tree, &hyp, &rho)?, true)
                    }
                }
            }
        };
        process_counterexample(&mut self.tree, &mut self.teacher, &hyp, &sigma)?;
        Ok(R4Outcome::Refined {
            from_equivalence_query: from_eq,
        })
    }

    /// Applies rules until the teacher accepts a hypothesis. Every refining
    /// rule application must increase the norm; a violation is reported as
    /// [`LearnError::NormStalled`].
    pub fn run(&mut self) -> Result<RunReport, LearnError> {
        let mut norm = self.norm().total;
        let mut trace = vec![norm];
        let mut events = Vec::new();
        loop {
            let rule = self.next_rule();
            let cost_before = self.teacher.learning_cost();
            match rule {
                Rule::R1 => {
                    self.rule_r1()?;
                }
                Rule::R2 => {
                    self.rule_r2()?;
                }
                Rule::R3 => {
                    self.rule_r3()?;
                }
                Rule::R4 => {
                    if let R4Outcome::Accepted {
                        hypothesis,
                        approximate,
                    } = self.rule_r4()?
                    {
                        self.stats.rules.bump(Rule::R4);
                        let cost = self.teacher.learning_cost();
                        return Ok(RunReport {
                            hypothesis: hypothesis.into_machine(),
                            rule_counts: self.stats.rules,
                            output_queries: cost.resets,
                            input_symbols: cost.symbols,
                            eq_queries: self.stats.eq_queries,
                            failed_eq_queries: self.stats.failed_eq_queries,
                            consistency_conflicts: self.stats.consistency_conflicts,
                            ads_fallbacks: self.stats.ads_fallbacks,
                            longest_counterexample: self.stats.longest_counterexample,
                            approximate,
                            norm_trace: trace,
                            tree_size: self.tree.num_nodes(),
                            events,
                        });
                    }
                }
            }
            self.stats.rules.bump(rule);
            let after = self.norm().total;
            if after <= norm {
                return Err(LearnError::NormStalled {
                    rule,
                    before: norm,
                    after,
                });
            }
            let cost = self.teacher.learning_cost();
            if self.config.record_events {
                let event = RuleEvent {
                    rule,
                    norm_before: norm,
                    norm_after: after,
                    resets: cost.resets - cost_before.resets,
                    symbols: cost.symbols - cost_before.symbols,
                };
                log::trace!("{event:?}");
                events.push(event);
            }
            trace.push(after);
            norm = after;
            if let Some(limit) = self.config.max_output_queries {
                if cost.resets > limit {
                    return Err(LearnError::BudgetExceeded { limit });
                }
            }
        }
    }
}

/// Learns the teacher's machine from scratch.
pub fn learn<T: Teacher>(teacher: T, config: LearnerConfig) -> Result<(RunReport, T), LearnError> {
    let mut learner = Learner::new(teacher, config);
    let report = learner.run()?;
    Ok((report, learner.teacher))
}
