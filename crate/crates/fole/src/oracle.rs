//! A deliberately naive evaluator and model enumerator.
//!
//! Nothing here reuses evaluation code from [`crate::semantics`]: membership
//! of each tuple is decided by recursion on the formula over raw tuples, with
//! the quantifiers checked by scanning whole tuple spaces. Only kernel types
//! and signature inference are shared.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formula::{signature_of, Formula};
use crate::kernel::{tuple_map, tuple_space, Schema, Structure, Tuple, TypeDomain, Universe};
use crate::semantics::Relation;

/// `I(φ)` computed one tuple at a time.
pub fn naive_interpret(m: &Structure, phi: &Formula) -> Result<Relation> {
    let sig = signature_of(m.schema(), phi)?;
    let mut rows = BTreeSet::new();
    for t in tuple_space(m.domain(), &sig)? {
        if member(m, &t, phi)? {
            rows.insert(t);
        }
    }
    Ok(Relation::new(sig, rows))
}

fn member(m: &Structure, t: &Tuple, phi: &Formula) -> Result<bool> {
    Ok(match phi {
        Formula::Entity(rho) => m
            .universe()
            .iter()
            .any(|(k, tk)| tk == t && m.classifies(k, rho)),
        Formula::Top(_) => true,
        Formula::Bottom(_) => false,
        Formula::Neg(a) => !member(m, t, a)?,
        Formula::Meet(a, b) => member(m, t, a)? && member(m, t, b)?,
        Formula::Join(a, b) => member(m, t, a)? || member(m, t, b)?,
        Formula::Impl(a, b) => !member(m, t, a)? || member(m, t, b)?,
        Formula::Diff(a, b) => member(m, t, a)? && !member(m, t, b)?,
        Formula::Exists(h, a) => {
            for u in tuple_space(m.domain(), h.target())? {
                if &tuple_map(h, &u)? == t && member(m, &u, a)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Forall(h, a) => {
            for u in tuple_space(m.domain(), h.target())? {
                if &tuple_map(h, &u)? == t && !member(m, &u, a)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Subst(h, a) => member(m, &tuple_map(h, t)?, a)?,
    })
}

/// Total tuple slots of a schema over a domain: `∑_ρ |tup(σ(ρ))|`.
pub fn tuple_slots(schema: &Schema, domain: &TypeDomain) -> Result<usize> {
    let mut total = 0usize;
    for (_, sig) in schema.entities() {
        total += tuple_space(domain, sig)?.len();
    }
    Ok(total)
}

/// Visits every inclusion structure over a schema and domain exactly once.
///
/// A model is a choice of subset of each entity type's tuple space. Model
/// number `n` assigns entity types in schema order to consecutive bit ranges
/// of `n`, the first entity type taking the lowest bits, and tuple `i` of a
/// space is present when its bit is set.
pub struct EnumerationCursor {
    schema: Schema,
    domain: TypeDomain,
    spaces: Vec<(String, Vec<Tuple>)>,
    keys: Vec<Tuple>,
    next: u64,
    total: u64,
}

impl EnumerationCursor {
    pub fn slots(&self) -> usize {
        self.spaces.iter().map(|(_, s)| s.len()).sum()
    }

    /// `∏_ρ 2^{|tup(σ(ρ))|}`.
    pub fn model_count(&self) -> u64 {
        self.total
    }

    /// Builds model number `n` directly.
    pub fn model(&self, n: u64) -> Structure {
        let mut universe = Universe::default();
        for t in &self.keys {
            universe.insert(t.to_string(), t.clone());
        }
        let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut bit = 0;
        for (rho, space) in &self.spaces {
            for t in space {
                if n >> bit & 1 == 1 {
                    classes.entry(t.to_string()).or_default().insert(rho.clone());
                }
                bit += 1;
            }
        }
        Structure::assemble(self.schema.clone(), self.domain.clone(), universe, classes)
    }
}

impl Iterator for EnumerationCursor {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        if self.next >= self.total {
            return None;
        }
        let m = self.model(self.next);
        self.next += 1;
        Some(m)
    }
}

/// Starts an enumeration, refusing when the schema needs more tuple slots
/// than `budget`.
pub fn enumerate_models(
    schema: &Schema,
    domain: &TypeDomain,
    budget: usize,
) -> Result<EnumerationCursor> {
    let mut spaces = Vec::new();
    let mut keys = BTreeSet::new();
    for (rho, sig) in schema.entities() {
        let space = tuple_space(domain, sig)?;
        keys.extend(space.iter().cloned());
        spaces.push((rho.clone(), space));
    }
    let slots: usize = spaces.iter().map(|(_, s)| s.len()).sum();
    if slots > budget || slots >= 64 {
        return Err(Error::Budget {
            needed: slots,
            budget: budget.min(63),
        });
    }
    Ok(EnumerationCursor {
        schema: schema.clone(),
        domain: domain.clone(),
        spaces,
        keys: keys.into_iter().collect(),
        next: 0,
        total: 1u64 << slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Signature;

    fn sig(entries: &[(&str, &str)]) -> Signature {
        Signature::new(entries.iter().copied()).unwrap()
    }

    #[test]
    fn model_counts() {
        let one = TypeDomain::from_extents([("N", vec!["a"])]);
        let s = Schema::new(["N"], [("E".to_string(), sig(&[("i", "N")]))]).unwrap();
        assert_eq!(enumerate_models(&s, &one, 24).unwrap().count(), 2);

        let two = TypeDomain::from_extents([("N", vec!["a", "b"])]);
        let s = Schema::new(
            ["N"],
            [
                ("E".to_string(), sig(&[("i", "N")])),
                ("F".to_string(), sig(&[("i", "N")])),
            ],
        )
        .unwrap();
        let models: Vec<Structure> = enumerate_models(&s, &two, 24).unwrap().collect();
        assert_eq!(models.len(), 16);
        let distinct: BTreeSet<String> = models
            .iter()
            .map(|m| format!("{:?}", m.classification()))
            .collect();
        assert_eq!(distinct.len(), 16);

        let empty = Schema::new(Vec::<String>::new(), []).unwrap();
        assert_eq!(enumerate_models(&empty, &two, 24).unwrap().count(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let d = TypeDomain::from_extents([("N", vec!["a", "b", "c"])]);
        let s = Schema::new(["N"], [("R".to_string(), sig(&[("i", "N"), ("j", "N")]))]).unwrap();
        assert!(matches!(
            enumerate_models(&s, &d, 8),
            Err(Error::Budget { needed: 9, .. })
        ));
    }

    #[test]
    fn naive_top_and_bottom() {
        let d = TypeDomain::from_extents([("N", vec!["a", "b"])]);
        let s = Schema::new(["N"], [("E".to_string(), sig(&[("i", "N")]))]).unwrap();
        let m = enumerate_models(&s, &d, 24).unwrap().model(1);
        let g = sig(&[("i", "N"), ("j", "N")]);
        assert_eq!(naive_interpret(&m, &Formula::Top(g.clone())).unwrap().len(), 4);
        assert!(naive_interpret(&m, &Formula::Bottom(g)).unwrap().is_empty());
        assert_eq!(naive_interpret(&m, &Formula::entity("E")).unwrap().len(), 1);
    }
}
