//! Budgeted names, semi-decisions, translators and the dovetailing scheduler.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::espace::Space;
use crate::words::Word;

/// Which representation a name belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discipline {
    /// delta: all base sets containing the point.
    Point,
    /// theta: base sets whose union is the open set.
    Open,
    /// psi: base sets meeting the closed set.
    Closed,
    /// psi-minus: base sets whose union is the complement.
    ClosedNeg,
    /// kappa: finite covers by base sets.
    Compact,
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Discipline::Point => "point",
            Discipline::Open => "open",
            Discipline::Closed => "closed",
            Discipline::ClosedNeg => "closed-neg",
            Discipline::Compact => "compact",
        };
        f.write_str(s)
    }
}

/// A listed word with the step at which it first appeared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stamped {
    pub step: u64,
    pub word: Word,
}

pub type Producer = Arc<dyn Fn(u64) -> Vec<Stamped> + Send + Sync>;

/// A prefix-monotone enumeration of words. Budget b exposes every word stamped below b.
#[derive(Clone)]
pub struct Name {
    discipline: Discipline,
    space: Arc<dyn Space>,
    producer: Producer,
}

impl Name {
    pub fn new(
        discipline: Discipline,
        space: Arc<dyn Space>,
        producer: impl Fn(u64) -> Vec<Stamped> + Send + Sync + 'static,
    ) -> Name {
        Name {
            discipline,
            space,
            producer: Arc::new(producer),
        }
    }

    pub fn from_producer(
        discipline: Discipline,
        space: Arc<dyn Space>,
        producer: Producer,
    ) -> Name {
        Name {
            discipline,
            space,
            producer,
        }
    }

    /// A finite list, every word available from step 0.
    pub fn finite(discipline: Discipline, space: Arc<dyn Space>, words: Vec<Word>) -> Name {
        Name::new(discipline, space, move |b| {
            if b == 0 {
                return Vec::new();
            }
            words
                .iter()
                .map(|w| Stamped {
                    step: 0,
                    word: w.clone(),
                })
                .collect()
        })
    }

    pub fn discipline(&self) -> Discipline {
        self.discipline
    }

    pub fn space(&self) -> &Arc<dyn Space> {
        &self.space
    }

    pub fn producer(&self) -> &Producer {
        &self.producer
    }

    pub fn stamped(&self, budget: u64) -> Vec<Stamped> {
        let mut v = (self.producer)(budget);
        v.retain(|s| s.step < budget);
        v
    }

    pub fn query(&self, budget: u64) -> Vec<Word> {
        self.stamped(budget).into_iter().map(|s| s.word).collect()
    }

    /// One `<budget> <word>` line per listed word, where budget is the first budget at
    /// which the word is listed.
    pub fn dump(&self, budget: u64) -> String {
        let mut s = String::new();
        for e in self.stamped(budget) {
            s.push_str(&format!("{} {}\n", e.step + 1, e.word));
        }
        s
    }

    pub fn with_discipline(&self, d: Discipline) -> Name {
        Name {
            discipline: d,
            space: self.space.clone(),
            producer: self.producer.clone(),
        }
    }

    pub fn with_space(&self, space: Arc<dyn Space>) -> Name {
        Name {
            discipline: self.discipline,
            space,
            producer: self.producer.clone(),
        }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({}, {})", self.discipline, self.space.label())
    }
}

/// Collects output words, dropping repeats.
#[derive(Default)]
pub struct Emitter {
    seen: std::collections::HashSet<Word>,
    pub out: Vec<Stamped>,
}

impl Emitter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn emit(&mut self, step: u64, word: Word) -> bool {
        if self.seen.insert(word.clone()) {
            self.out.push(Stamped { step, word });
            true
        } else {
            false
        }
    }

    pub fn finish(mut self) -> Vec<Stamped> {
        self.out.sort_by_key(|s| s.step);
        self.out
    }
}

/// Outcome of a budgeted semi-decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiDecision {
    Confirmed(u64),
    Unknown(u64),
}

impl SemiDecision {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, SemiDecision::Confirmed(_))
    }
}

impl fmt::Display for SemiDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemiDecision::Confirmed(t) => write!(f, "Confirmed {t}"),
            SemiDecision::Unknown(b) => write!(f, "Unknown {b}"),
        }
    }
}

type TranslatorFn = Arc<dyn Fn(&Name) -> Producer + Send + Sync>;

/// A realizer of a reduction between representations.
#[derive(Clone)]
pub struct Translator {
    pub label: String,
    pub source: Discipline,
    pub source_space: String,
    pub target: Discipline,
    pub target_space: Arc<dyn Space>,
    f: TranslatorFn,
}

impl Translator {
    pub fn new(
        label: impl Into<String>,
        source: Discipline,
        source_space: impl Into<String>,
        target: Discipline,
        target_space: Arc<dyn Space>,
        f: impl Fn(&Name) -> Producer + Send + Sync + 'static,
    ) -> Translator {
        Translator {
            label: label.into(),
            source,
            source_space: source_space.into(),
            target,
            target_space,
            f: Arc::new(f),
        }
    }

    pub fn identity(space: Arc<dyn Space>, d: Discipline) -> Translator {
        Translator::new("identity", d, space.label(), d, space, |n: &Name| {
            n.producer().clone()
        })
    }

    pub fn apply(&self, n: &Name) -> Result<Name> {
        if n.discipline() != self.source {
            return Err(Error::DisciplineMismatch {
                expected: self.source.to_string(),
                got: n.discipline().to_string(),
            });
        }
        if n.space().label() != self.source_space {
            return Err(Error::SpaceMismatch {
                expected: self.source_space.clone(),
                got: n.space().label(),
            });
        }
        Ok(Name::from_producer(
            self.target,
            self.target_space.clone(),
            (self.f)(n),
        ))
    }

    /// self, then next.
    pub fn then(&self, next: &Translator) -> Result<Translator> {
        if self.target != next.source || self.target_space.label() != next.source_space {
            return Err(Error::DisciplineMismatch {
                expected: format!("{} on {}", next.source, next.source_space),
                got: format!("{} on {}", self.target, self.target_space.label()),
            });
        }
        let a = self.clone();
        let b = next.clone();
        Ok(Translator::new(
            format!("{} ; {}", self.label, next.label),
            self.source,
            self.source_space.clone(),
            next.target,
            next.target_space.clone(),
            move |n: &Name| {
                let mid = a.apply(n).expect("checked source");
                b.apply(&mid)
                    .expect("checked composition")
                    .producer()
                    .clone()
            },
        ))
    }
}

impl fmt::Debug for Translator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Translator({}: {} on {} -> {} on {})",
            self.label,
            self.source,
            self.source_space,
            self.target,
            self.target_space.label()
        )
    }
}

pub fn query(n: &Name, budget: u64) -> Vec<Word> {
    n.query(budget)
}

pub fn apply_translator(t: &Translator, n: &Name) -> Result<Name> {
    t.apply(n)
}

/// A budgeted semi-decision task; `task(s)` runs it for s steps.
pub type Task = Box<dyn Fn(u64) -> SemiDecision + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskEvent {
    pub task: u64,
    pub cost: u64,
    pub step: u64,
}

/// Global step at which task k performs its (c+1)-th step. Round r runs tasks 0..=r one
/// step each, so that step happens in round k + c.
pub fn dovetail_step(k: u64, c: u64) -> u64 {
    let r = k + c;
    r * (r + 1) / 2 + k
}

/// Steps granted to task k once the global budget is b.
pub fn dovetail_share(k: u64, b: u64) -> u64 {
    if dovetail_step(k, 0) >= b {
        return 0;
    }
    let mut lo = 0u64;
    let mut hi = 1u64;
    while dovetail_step(k, hi) < b {
        hi *= 2;
    }
    // largest c with dovetail_step(k, c) < b
    while hi - lo > 1 {
        let m = (lo + hi) / 2;
        if dovetail_step(k, m) < b {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo + 1
}

/// Fair interleaving of an enumeration of tasks; `tasks(k)` is None past the end of a
/// finite enumeration. Events come out sorted by the global step of confirmation.
pub fn dovetail(tasks: &dyn Fn(u64) -> Option<Task>, budget: u64) -> Vec<TaskEvent> {
    let mut events = Vec::new();
    let mut k = 0u64;
    while dovetail_step(k, 0) < budget {
        let Some(task) = tasks(k) else { break };
        let share = dovetail_share(k, budget);
        if let SemiDecision::Confirmed(c) = task(share) {
            if c < share {
                events.push(TaskEvent {
                    task: k,
                    cost: c,
                    step: dovetail_step(k, c),
                });
            }
        }
        k += 1;
    }
    events.sort_by_key(|e| (e.step, e.task));
    events
}

/// x lies in W: some word listed by x equals, or is certified inside, a word listed by W.
pub fn member_semidecide(x: &Name, w: &Name, budget: u64) -> SemiDecision {
    let xs = x.stamped(budget);
    let ws = w.stamped(budget);
    let space = x.space();
    let mut best: Option<u64> = None;
    let mut index: HashMap<&Word, u64> = HashMap::new();
    for e in &ws {
        index.entry(&e.word).or_insert(e.step);
    }
    for a in &xs {
        if let Some(s) = index.get(&a.word) {
            let t = a.step.max(*s);
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    for a in &xs {
        if best.is_some_and(|b| a.step >= b) {
            break;
        }
        for e in &ws {
            let t = a.step.max(e.step);
            if best.is_some_and(|b| t >= b) {
                continue;
            }
            if space.subset(a.word.as_str(), e.word.as_str()) {
                best = Some(t);
            }
        }
    }
    match best {
        Some(t) => SemiDecision::Confirmed(t),
        None => SemiDecision::Unknown(budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confirm_at(c: u64) -> Task {
        Box::new(move |s| {
            if s > c {
                SemiDecision::Confirmed(c)
            } else {
                SemiDecision::Unknown(s)
            }
        })
    }

    fn never() -> Task {
        Box::new(SemiDecision::Unknown)
    }

    #[test]
    fn single_task_confirms() {
        let tasks = |k: u64| (k == 0).then(|| confirm_at(3));
        assert!(dovetail(&tasks, 3).is_empty());
        let ev = dovetail(&tasks, 100);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].cost, 3);
        assert!(ev[0].step >= 3);
    }

    #[test]
    fn fairness_with_diverging_neighbours() {
        for k in 0..=10u64 {
            for c in [0u64, 7, 50, 100] {
                let tasks = move |i: u64| Some(if i == k { confirm_at(c) } else { never() });
                let bound = dovetail_step(k, c) + 1;
                let ev = dovetail(&tasks, bound);
                assert_eq!(ev.len(), 1, "k={k} c={c}");
                assert_eq!(ev[0].task, k);
                assert!(dovetail(&tasks, bound - 1).is_empty());
            }
        }
    }

    #[test]
    fn all_diverge() {
        let tasks = |_: u64| Some(never());
        for b in [0u64, 10, 1000, 20000] {
            assert!(dovetail(&tasks, b).is_empty());
        }
    }

    #[test]
    fn share_matches_schedule() {
        // brute force: walk the rounds
        let b = 500u64;
        let mut share = vec![0u64; 40];
        let mut step = 0u64;
        'outer: for r in 0.. {
            for k in 0..=r {
                if step >= b {
                    break 'outer;
                }
                share[k as usize] += 1;
                step += 1;
            }
        }
        for k in 0..40u64 {
            assert_eq!(dovetail_share(k, b), share[k as usize], "k={k}");
        }
    }
}
