//! A bounded proof search over a fixed rule set, and an independent checker
//! for the derivations it returns.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::Result;
use crate::formula::{signature_of, Formula, Sequent};
use crate::kernel::{Schema, Signature, SignatureMorphism};

use super::Specification;

pub const DEFAULT_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Axiom,
    Reflexivity,
    Transitivity,
    MeetIntro,
    MeetElimL,
    MeetElimR,
    JoinIntroL,
    JoinIntroR,
    JoinElim,
    ImplIntro,
    ImplElim,
    DoubleNeg,
    Top,
    Bottom,
    ExistsMono,
    ForallMono,
    SubstMono,
    AdjointLeft,
    AdjointRight,
    Unit,
    Counit,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A proof tree: `conclusion` follows from `premises` by `rule`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: Rule, conclusion: Sequent) -> Self {
        Derivation {
            rule,
            conclusion,
            premises: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    /// Indented rendering, conclusion first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, indent: usize, out: &mut String) {
        out.push_str(&format!(
            "{:width$}{}  [{}]\n",
            "",
            self.conclusion,
            self.rule,
            width = indent * 2
        ));
        for p in &self.premises {
            p.render_into(indent + 1, out);
        }
    }
}

/// [`derives_with_depth`] at [`DEFAULT_DEPTH`].
pub fn derives(t: &Specification, q: &Sequent) -> Result<Option<Derivation>> {
    derives_with_depth(t, q, DEFAULT_DEPTH)
}

/// Searches for a derivation of `q` from the axioms of `t` of height at most
/// `depth`, by iterative deepening. `None` means none was found within the
/// bound; it is not a proof of underivability.
pub fn derives_with_depth(
    t: &Specification,
    q: &Sequent,
    depth: usize,
) -> Result<Option<Derivation>> {
    q.check(t.schema())?;
    let mut search = Search::new(t);
    for d in 1..=depth {
        if let Some(found) = search.prove(q, d) {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

struct Search<'t> {
    schema: &'t Schema,
    axioms: Vec<Sequent>,
    axiom_set: BTreeSet<Sequent>,
    failed: HashMap<Sequent, usize>,
}

impl<'t> Search<'t> {
    fn new(t: &'t Specification) -> Self {
        let axioms: Vec<Sequent> = t.iter().map(|c| c.as_sequent()).collect();
        Search {
            schema: t.schema(),
            axiom_set: axioms.iter().cloned().collect(),
            axioms,
            failed: HashMap::new(),
        }
    }

    fn sig(&self, phi: &Formula) -> Option<Signature> {
        signature_of(self.schema, phi).ok()
    }

    fn prove(&mut self, q: &Sequent, depth: usize) -> Option<Derivation> {
        if depth == 0 {
            return None;
        }
        if self.failed.get(q).is_some_and(|&d| d >= depth) {
            return None;
        }
        let found = self.immediate(q).or_else(|| self.compound(q, depth));
        if found.is_none() {
            let entry = self.failed.entry(q.clone()).or_insert(0);
            *entry = (*entry).max(depth);
        }
        found
    }

    fn immediate(&self, q: &Sequent) -> Option<Derivation> {
        let leaf = |rule| Some(Derivation::leaf(rule, q.clone()));
        if self.axiom_set.contains(q) {
            return leaf(Rule::Axiom);
        }
        if q.lhs == q.rhs {
            return leaf(Rule::Reflexivity);
        }
        if let Formula::Top(s) = &q.rhs {
            if self.sig(&q.lhs).as_ref() == Some(s) {
                return leaf(Rule::Top);
            }
        }
        if let Formula::Bottom(s) = &q.lhs {
            if self.sig(&q.rhs).as_ref() == Some(s) {
                return leaf(Rule::Bottom);
            }
        }
        if let Formula::Meet(a, b) = &q.lhs {
            if **a == q.rhs {
                return leaf(Rule::MeetElimL);
            }
            if **b == q.rhs {
                return leaf(Rule::MeetElimR);
            }
        }
        if let Formula::Join(a, b) = &q.rhs {
            if **a == q.lhs {
                return leaf(Rule::JoinIntroL);
            }
            if **b == q.lhs {
                return leaf(Rule::JoinIntroR);
            }
        }
        if let Formula::Neg(n) = &q.lhs {
            if matches!(&**n, Formula::Neg(inner) if **inner == q.rhs) {
                return leaf(Rule::DoubleNeg);
            }
        }
        if is_unit(q) {
            return leaf(Rule::Unit);
        }
        if is_counit(q) {
            return leaf(Rule::Counit);
        }
        None
    }

    fn compound(&mut self, q: &Sequent, depth: usize) -> Option<Derivation> {
        let d = depth - 1;
        let node = |rule, premises| {
            Some(Derivation {
                rule,
                conclusion: q.clone(),
                premises,
            })
        };

        if let Formula::Meet(a, b) = &q.rhs {
            if let Some(p1) = self.prove(&Sequent::new(q.lhs.clone(), (**a).clone()), d) {
                if let Some(p2) = self.prove(&Sequent::new(q.lhs.clone(), (**b).clone()), d) {
                    return node(Rule::MeetIntro, vec![p1, p2]);
                }
            }
        }
        if let Formula::Join(a, b) = &q.lhs {
            if let Some(p1) = self.prove(&Sequent::new((**a).clone(), q.rhs.clone()), d) {
                if let Some(p2) = self.prove(&Sequent::new((**b).clone(), q.rhs.clone()), d) {
                    return node(Rule::JoinElim, vec![p1, p2]);
                }
            }
        }
        if let Formula::Impl(a, b) = &q.rhs {
            let premise = Sequent::new(Formula::meet(q.lhs.clone(), (**a).clone()), (**b).clone());
            if let Some(p) = self.prove(&premise, d) {
                return node(Rule::ImplIntro, vec![p]);
            }
        }
        if let Formula::Meet(a, b) = &q.lhs {
            let premise = Sequent::new((**a).clone(), Formula::implies((**b).clone(), q.rhs.clone()));
            if let Some(p) = self.prove(&premise, d) {
                return node(Rule::ImplElim, vec![p]);
            }
        }
        match (&q.lhs, &q.rhs) {
            (Formula::Exists(h, a), Formula::Exists(k, b))
            | (Formula::Forall(h, a), Formula::Forall(k, b))
            | (Formula::Subst(h, a), Formula::Subst(k, b))
                if h == k =>
            {
                let rule = match &q.lhs {
                    Formula::Exists(..) => Rule::ExistsMono,
                    Formula::Forall(..) => Rule::ForallMono,
                    _ => Rule::SubstMono,
                };
                if let Some(p) = self.prove(&Sequent::new((**a).clone(), (**b).clone()), d) {
                    return node(rule, vec![p]);
                }
            }
            _ => {}
        }
        if let Formula::Exists(h, a) = &q.lhs {
            let premise = Sequent::new((**a).clone(), Formula::subst(h.clone(), q.rhs.clone()));
            if let Some(p) = self.prove(&premise, d) {
                return node(Rule::AdjointRight, vec![p]);
            }
        }
        if let Formula::Subst(h, b) = &q.rhs {
            let premise = Sequent::new(Formula::exists(h.clone(), q.lhs.clone()), (**b).clone());
            if let Some(p) = self.prove(&premise, d) {
                return node(Rule::AdjointLeft, vec![p]);
            }
        }

        for mid in self.middles(q) {
            if mid == q.lhs || mid == q.rhs {
                continue;
            }
            if let Some(p1) = self.prove(&Sequent::new(q.lhs.clone(), mid.clone()), d) {
                if let Some(p2) = self.prove(&Sequent::new(mid, q.rhs.clone()), d) {
                    return node(Rule::Transitivity, vec![p1, p2]);
                }
            }
        }
        None
    }

    /// Intermediate formulas worth trying for transitivity, in a fixed order.
    fn middles(&self, q: &Sequent) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        let mut push = |f: Formula| {
            if !out.contains(&f) {
                out.push(f);
            }
        };
        for ax in &self.axioms {
            if ax.lhs == q.lhs {
                push(ax.rhs.clone());
            }
        }
        for ax in &self.axioms {
            if ax.rhs == q.rhs {
                push(ax.lhs.clone());
            }
        }
        if let Formula::Meet(a, b) = &q.lhs {
            push((**a).clone());
            push((**b).clone());
        }
        if let Formula::Neg(n) = &q.lhs {
            if let Formula::Neg(inner) = &**n {
                push((**inner).clone());
            }
        }
        if let Formula::Exists(h, s) = &q.lhs {
            if let Formula::Subst(k, inner) = &**s {
                if h == k {
                    push((**inner).clone());
                }
            }
        }
        if let Formula::Join(a, b) = &q.rhs {
            push((**a).clone());
            push((**b).clone());
        }
        if let Formula::Subst(h, _) = &q.rhs {
            push(Formula::subst(h.clone(), Formula::exists(h.clone(), q.lhs.clone())));
        }
        // Axioms stated over the same fiber, used as stepping stones.
        if let Some(sig) = self.sig(&q.lhs) {
            for ax in &self.axioms {
                if self.sig(&ax.lhs).as_ref() == Some(&sig) {
                    push(ax.lhs.clone());
                    push(ax.rhs.clone());
                }
            }
        }
        out
    }
}

fn is_unit(q: &Sequent) -> bool {
    matches!(&q.rhs, Formula::Subst(h, e)
        if matches!(&**e, Formula::Exists(k, inner) if h == k && **inner == q.lhs))
}

fn is_counit(q: &Sequent) -> bool {
    matches!(&q.lhs, Formula::Exists(h, s)
        if matches!(&**s, Formula::Subst(k, inner) if h == k && **inner == q.rhs))
}

/// Verifies a derivation rule by rule against the axioms of `t`. The error
/// names the first offending node.
pub fn check_derivation(t: &Specification, d: &Derivation) -> std::result::Result<(), String> {
    let axioms: BTreeSet<Sequent> = t.iter().map(|c| c.as_sequent()).collect();
    check_node(t.schema(), &axioms, d)
}

fn check_node(
    schema: &Schema,
    axioms: &BTreeSet<Sequent>,
    d: &Derivation,
) -> std::result::Result<(), String> {
    let q = &d.conclusion;
    q.check(schema)
        .map_err(|e| format!("ill-formed conclusion {q}: {e}"))?;
    let ps: Vec<&Sequent> = d.premises.iter().map(|p| &p.conclusion).collect();
    let bad = || format!("{} does not justify {q}", d.rule);
    let seq = |l: &Formula, r: &Formula| Sequent::new(l.clone(), r.clone());
    let arity = |n: usize| {
        if ps.len() == n {
            Ok(())
        } else {
            Err(format!("{} takes {n} premises, found {}", d.rule, ps.len()))
        }
    };
    let same_morph = |h: &SignatureMorphism, k: &SignatureMorphism| h == k;

    let ok = match d.rule {
        Rule::Axiom => {
            arity(0)?;
            axioms.contains(q)
        }
        Rule::Reflexivity => {
            arity(0)?;
            q.lhs == q.rhs
        }
        Rule::Top => {
            arity(0)?;
            matches!(q.rhs, Formula::Top(_))
        }
        Rule::Bottom => {
            arity(0)?;
            matches!(q.lhs, Formula::Bottom(_))
        }
        Rule::MeetElimL => {
            arity(0)?;
            matches!(&q.lhs, Formula::Meet(a, _) if **a == q.rhs)
        }
        Rule::MeetElimR => {
            arity(0)?;
            matches!(&q.lhs, Formula::Meet(_, b) if **b == q.rhs)
        }
        Rule::JoinIntroL => {
            arity(0)?;
            matches!(&q.rhs, Formula::Join(a, _) if **a == q.lhs)
        }
        Rule::JoinIntroR => {
            arity(0)?;
            matches!(&q.rhs, Formula::Join(_, b) if **b == q.lhs)
        }
        Rule::DoubleNeg => {
            arity(0)?;
            matches!(&q.lhs, Formula::Neg(n) if matches!(&**n, Formula::Neg(i) if **i == q.rhs))
        }
        Rule::Unit => {
            arity(0)?;
            is_unit(q)
        }
        Rule::Counit => {
            arity(0)?;
            is_counit(q)
        }
        Rule::Transitivity => {
            arity(2)?;
            ps[0].lhs == q.lhs && ps[0].rhs == ps[1].lhs && ps[1].rhs == q.rhs
        }
        Rule::MeetIntro => {
            arity(2)?;
            matches!(&q.rhs, Formula::Meet(a, b)
                if *ps[0] == seq(&q.lhs, a) && *ps[1] == seq(&q.lhs, b))
        }
        Rule::JoinElim => {
            arity(2)?;
            matches!(&q.lhs, Formula::Join(a, b)
                if *ps[0] == seq(a, &q.rhs) && *ps[1] == seq(b, &q.rhs))
        }
        Rule::ImplIntro => {
            arity(1)?;
            matches!(&q.rhs, Formula::Impl(a, b)
                if *ps[0] == seq(&Formula::meet(q.lhs.clone(), (**a).clone()), b))
        }
        Rule::ImplElim => {
            arity(1)?;
            matches!(&q.lhs, Formula::Meet(a, b)
                if *ps[0] == seq(a, &Formula::implies((**b).clone(), q.rhs.clone())))
        }
        Rule::ExistsMono => {
            arity(1)?;
            matches!((&q.lhs, &q.rhs), (Formula::Exists(h, a), Formula::Exists(k, b))
                if same_morph(h, k) && *ps[0] == seq(a, b))
        }
        Rule::ForallMono => {
            arity(1)?;
            matches!((&q.lhs, &q.rhs), (Formula::Forall(h, a), Formula::Forall(k, b))
                if same_morph(h, k) && *ps[0] == seq(a, b))
        }
        Rule::SubstMono => {
            arity(1)?;
            matches!((&q.lhs, &q.rhs), (Formula::Subst(h, a), Formula::Subst(k, b))
                if same_morph(h, k) && *ps[0] == seq(a, b))
        }
        Rule::AdjointLeft => {
            arity(1)?;
            matches!(&q.rhs, Formula::Subst(h, b)
                if *ps[0] == seq(&Formula::exists(h.clone(), q.lhs.clone()), b))
        }
        Rule::AdjointRight => {
            arity(1)?;
            matches!(&q.lhs, Formula::Exists(h, a)
                if *ps[0] == seq(a, &Formula::subst(h.clone(), q.rhs.clone())))
        }
    };
    if !ok {
        return Err(bad());
    }
    for p in &d.premises {
        check_node(schema, axioms, p)?;
    }
    Ok(())
}
