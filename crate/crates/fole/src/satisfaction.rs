//! Satisfaction of sequents, constraints and specifications; conceptual
//! intent over a finite pool; reducts; structure morphisms; and the
//! institution and logical-environment conditions as executable checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{signature_of, translate_constraint, Constraint, Formula, Sequent};
use crate::kernel::{
    validate_schema_morphism, SchemaMorphism, Signature, SignatureMorphism, Structure, Tuple,
    TypeDomain, Universe,
};
use crate::semantics::{Relation, StructureSemantics};

pub fn satisfies_sequent(m: &Structure, q: &Sequent) -> Result<bool> {
    let mut sem = StructureSemantics::new(m)?;
    sequent_holds(&mut sem, q)
}

fn sequent_holds(sem: &mut StructureSemantics, q: &Sequent) -> Result<bool> {
    let l = sem.interpret(&q.lhs)?;
    let r = sem.interpret(&q.rhs)?;
    if l.signature != r.signature {
        return Err(Error::SignatureMismatch {
            context: "sequent".into(),
            expected: l.signature.to_string(),
            found: r.signature.to_string(),
        });
    }
    Ok(l.is_subset(&r))
}

/// Both sides of a constraint check, with the rows that escape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintVerdict {
    pub satisfied: bool,
    /// `∃_h(I(φ))`.
    pub image: Relation,
    /// `I(φ′)`.
    pub bound: Relation,
    /// Rows of the image outside the bound.
    pub escaping: Relation,
}

/// Checks `∃_h(I(φ)) ⊆ I(φ′)` and, independently, `I(φ) ⊆ h⁻¹(I(φ′))`.
/// The two must agree; a disagreement is reported as an internal error.
pub fn check_constraint(m: &Structure, c: &Constraint) -> Result<ConstraintVerdict> {
    let mut sem = StructureSemantics::new(m)?;
    constraint_verdict(&mut sem, c)
}

fn constraint_verdict(sem: &mut StructureSemantics, c: &Constraint) -> Result<ConstraintVerdict> {
    c.check(sem.structure().schema())?;
    let image = sem.interpret(&Formula::exists(c.h.clone(), c.target.clone()))?;
    let bound = sem.interpret(&c.source)?;
    let forward = image.is_subset(&bound);
    let target = sem.interpret(&c.target)?;
    let pulled = sem.interpret(&Formula::subst(c.h.clone(), c.source.clone()))?;
    let backward = target.is_subset(&pulled);
    if forward != backward {
        return Err(Error::Internal(format!(
            "the two satisfaction tests disagree on {c}"
        )));
    }
    let escaping = Relation::new(
        image.signature.clone(),
        image.rows.difference(&bound.rows).cloned(),
    );
    Ok(ConstraintVerdict {
        satisfied: forward,
        image,
        bound,
        escaping,
    })
}

pub fn satisfies_constraint(m: &Structure, c: &Constraint) -> Result<bool> {
    Ok(check_constraint(m, c)?.satisfied)
}

pub fn satisfies_spec<'a>(
    m: &Structure,
    spec: impl IntoIterator<Item = &'a Constraint>,
) -> Result<bool> {
    let mut sem = StructureSemantics::new(m)?;
    for c in spec {
        if !constraint_verdict(&mut sem, c)?.satisfied {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The part of the conceptual intent that lies in a finite pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntentView {
    pub structure: Structure,
    pub pool: Vec<Constraint>,
    pub members: Vec<Constraint>,
}

impl IntentView {
    pub fn contains(&self, c: &Constraint) -> bool {
        self.members.contains(c)
    }

    pub fn member_set(&self) -> BTreeSet<Constraint> {
        self.members.iter().cloned().collect()
    }
}

/// Filters `pool` down to the constraints `m` satisfies, keeping pool order.
pub fn intent(m: &Structure, pool: &[Constraint]) -> Result<IntentView> {
    let mut sem = StructureSemantics::new(m)?;
    let mut members = Vec::new();
    for c in pool {
        if constraint_verdict(&mut sem, c)?.satisfied {
            members.push(c.clone());
        }
    }
    Ok(IntentView {
        structure: m.clone(),
        pool: pool.to_vec(),
        members,
    })
}

/// Every formula of depth at most `depth` over the schema's entity types,
/// with `⊤`/`⊥` at every fiber in play and flow nodes along `morphs`.
/// Grouped by signature; within a fiber, formulas come in order of depth.
///
/// The fibers in play are the entity-type signatures and both endpoints of
/// each morphism.
pub fn formulas_up_to(
    schema: &crate::kernel::Schema,
    depth: usize,
    morphs: &[SignatureMorphism],
) -> Result<BTreeMap<Signature, Vec<Formula>>> {
    let mut fibers: BTreeSet<Signature> =
        schema.entities().iter().map(|(_, s)| s.clone()).collect();
    for h in morphs {
        schema.check_signature(h.source())?;
        schema.check_signature(h.target())?;
        fibers.insert(h.source().clone());
        fibers.insert(h.target().clone());
    }
    // exact[d] holds the formulas of depth exactly d + 1.
    let mut exact: Vec<BTreeMap<Signature, Vec<Formula>>> = Vec::new();
    if depth == 0 {
        return Ok(BTreeMap::new());
    }
    let mut first: BTreeMap<Signature, Vec<Formula>> = BTreeMap::new();
    for sig in &fibers {
        let v = first.entry(sig.clone()).or_default();
        for (rho, s) in schema.entities() {
            if s == sig {
                v.push(Formula::entity(rho.clone()));
            }
        }
        v.push(Formula::Top(sig.clone()));
        v.push(Formula::Bottom(sig.clone()));
    }
    exact.push(first);
    for d in 1..depth {
        let prev = &exact[d - 1];
        let mut below: BTreeMap<Signature, Vec<Formula>> = BTreeMap::new();
        for layer in &exact[..d - 1] {
            for (s, fs) in layer {
                below.entry(s.clone()).or_default().extend(fs.iter().cloned());
            }
        }
        let mut next: BTreeMap<Signature, Vec<Formula>> = BTreeMap::new();
        for sig in &fibers {
            let out = next.entry(sig.clone()).or_default();
            let newest = prev.get(sig).map(Vec::as_slice).unwrap_or(&[]);
            let older = below.get(sig).map(Vec::as_slice).unwrap_or(&[]);
            for a in newest {
                out.push(Formula::neg(a.clone()));
            }
            let mut pairs: Vec<(&Formula, &Formula)> = Vec::new();
            for a in newest {
                for b in newest.iter().chain(older) {
                    pairs.push((a, b));
                }
            }
            for a in older {
                for b in newest {
                    pairs.push((a, b));
                }
            }
            for (a, b) in pairs {
                out.push(Formula::meet(a.clone(), b.clone()));
                out.push(Formula::join(a.clone(), b.clone()));
                out.push(Formula::implies(a.clone(), b.clone()));
                out.push(Formula::diff(a.clone(), b.clone()));
            }
            for h in morphs {
                if h.source() == sig {
                    for a in prev.get(h.target()).map(Vec::as_slice).unwrap_or(&[]) {
                        out.push(Formula::exists(h.clone(), a.clone()));
                        out.push(Formula::forall(h.clone(), a.clone()));
                    }
                }
                if h.target() == sig {
                    for a in prev.get(h.source()).map(Vec::as_slice).unwrap_or(&[]) {
                        out.push(Formula::subst(h.clone(), a.clone()));
                    }
                }
            }
        }
        exact.push(next);
    }
    let mut all: BTreeMap<Signature, Vec<Formula>> = BTreeMap::new();
    for layer in exact {
        for (s, fs) in layer {
            all.entry(s).or_default().extend(fs);
        }
    }
    Ok(all)
}

/// The standard constraint pool: every sequent between two formulas of depth
/// at most `depth` in one fiber, and every constraint `φ′ -[h]-> φ` with `h` in
/// `morphs` and both formulas of depth at most `depth`.
pub fn constraint_pool(
    schema: &crate::kernel::Schema,
    depth: usize,
    morphs: &[SignatureMorphism],
) -> Result<Vec<Constraint>> {
    let formulas = formulas_up_to(schema, depth, morphs)?;
    let mut out = Vec::new();
    for (sig, fs) in &formulas {
        let id = SignatureMorphism::identity(sig);
        for a in fs {
            for b in fs {
                out.push(Constraint::new(b.clone(), id.clone(), a.clone()));
            }
        }
    }
    for h in morphs {
        if h.is_identity() {
            continue;
        }
        let sources = formulas.get(h.source()).map(Vec::as_slice).unwrap_or(&[]);
        let targets = formulas.get(h.target()).map(Vec::as_slice).unwrap_or(&[]);
        for s in sources {
            for t in targets {
                out.push(Constraint::new(s.clone(), h.clone(), t.clone()));
            }
        }
    }
    Ok(out)
}

/// The reduct of `m1` along `m`, over the pulled-back type domain.
pub fn reduct(m: &SchemaMorphism, m1: &Structure) -> Result<Structure> {
    let domain = m1.domain().pullback(m)?;
    reduct_onto(m, m1, &domain)
}

/// The reduct of `m1` along `m` over a given source domain, which must satisfy
/// `extent₂(x) = extent₁(f(x))` over the same value set.
pub fn reduct_onto(m: &SchemaMorphism, m1: &Structure, domain2: &TypeDomain) -> Result<Structure> {
    if m.target() != m1.schema() {
        return Err(Error::IncompatibleDomain(
            "the structure is not over the target schema of the morphism".into(),
        ));
    }
    if let Some(v) = validate_schema_morphism(m).first() {
        return Err(Error::InvalidSchemaMorphism(v.to_string()));
    }
    domain2.check_compatible(m, m1.domain())?;
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for k in m1.universe().keys() {
        for rho in m.source().entity_names() {
            if m1.classifies(k, m.map_entity(rho)?) {
                classes.entry(k.to_string()).or_default().insert(rho.to_string());
            }
        }
    }
    Structure::new(
        m.source().clone(),
        domain2.clone(),
        m1.universe().clone(),
        classes,
    )
}

/// Both sides of the satisfaction condition for one constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstitutionVerdict {
    pub reduct_satisfies: bool,
    pub translation_satisfied: bool,
}

impl InstitutionVerdict {
    pub fn holds(&self) -> bool {
        self.reduct_satisfies == self.translation_satisfied
    }
}

/// Compares `reduct(m, M₁) ⊨ c₂` with `M₁ ⊨ translate(m, c₂)`.
pub fn check_institution_condition(
    m: &SchemaMorphism,
    m1: &Structure,
    c2: &Constraint,
) -> Result<InstitutionVerdict> {
    let red = reduct(m, m1)?;
    Ok(InstitutionVerdict {
        reduct_satisfies: satisfies_constraint(&red, c2)?,
        translation_satisfied: satisfies_constraint(m1, &translate_constraint(m, c2)?)?,
    })
}

/// A vertical structure morphism `ℳ₂ ⇄ ℳ₁` over one schema: keys flow
/// `K₁ → K₂`, values flow `Y₁ → Y₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerticalStructureMorphism {
    source: Structure,
    target: Structure,
    key_map: BTreeMap<String, String>,
    value_map: BTreeMap<String, String>,
}

/// Which family a violated condition belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    /// Part of the definition of a structure morphism: totality, the universe
    /// square `τ₂·k = g·τ₁`, and the two infomorphism conditions.
    Morphism,
    /// The extra requirements under which satisfaction transfers: a
    /// surjective key map and a bijective value map.
    Transfer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismDefect {
    pub kind: ConditionKind,
    pub detail: String,
}

impl fmt::Display for MorphismDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detail)
    }
}

impl VerticalStructureMorphism {
    /// Builds and fully validates.
    pub fn new(
        source: Structure,
        target: Structure,
        key_map: BTreeMap<String, String>,
        value_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        let v = VerticalStructureMorphism::assemble(source, target, key_map, value_map);
        if let Some(d) = v.validate().first() {
            return Err(Error::InvalidStructureMorphism(d.detail.clone()));
        }
        Ok(v)
    }

    /// Builds without validation, for constructing counterexamples.
    pub fn assemble(
        source: Structure,
        target: Structure,
        key_map: BTreeMap<String, String>,
        value_map: BTreeMap<String, String>,
    ) -> Self {
        VerticalStructureMorphism {
            source,
            target,
            key_map,
            value_map,
        }
    }

    /// The identity on a structure.
    pub fn identity(m: &Structure) -> Self {
        VerticalStructureMorphism {
            source: m.clone(),
            target: m.clone(),
            key_map: m.universe().keys().map(|k| (k.to_string(), k.to_string())).collect(),
            value_map: m.domain().values().iter().map(|v| (v.clone(), v.clone())).collect(),
        }
    }

    /// `ℳ₂`.
    pub fn source(&self) -> &Structure {
        &self.source
    }

    /// `ℳ₁`.
    pub fn target(&self) -> &Structure {
        &self.target
    }

    pub fn key_map(&self) -> &BTreeMap<String, String> {
        &self.key_map
    }

    pub fn value_map(&self) -> &BTreeMap<String, String> {
        &self.value_map
    }

    pub fn validate(&self) -> Vec<MorphismDefect> {
        let mut out = Vec::new();
        let mut bad = |kind, detail: String| out.push(MorphismDefect { kind, detail });
        let (m2, m1) = (&self.source, &self.target);
        if m2.schema() != m1.schema() {
            bad(ConditionKind::Morphism, "the two structures have different schemas".into());
            return out;
        }
        for y in m1.domain().values() {
            match self.value_map.get(y) {
                None => bad(ConditionKind::Morphism, format!("value \"{y}\" is not mapped")),
                Some(z) if !m2.domain().values().contains(z) => bad(
                    ConditionKind::Morphism,
                    format!("value \"{y}\" maps to \"{z}\", outside the source value set"),
                ),
                Some(_) => {}
            }
        }
        for x in m1.schema().sorts() {
            let (Ok(e1), Ok(e2)) = (m1.domain().extent(x), m2.domain().extent(x)) else {
                bad(ConditionKind::Morphism, format!("sort `{x}` lacks an extent"));
                continue;
            };
            for y in m1.domain().values() {
                if let Some(z) = self.value_map.get(y) {
                    if e1.contains(y) != e2.contains(z) {
                        bad(
                            ConditionKind::Morphism,
                            format!("value \"{y}\" and its image \"{z}\" disagree on sort `{x}`"),
                        );
                    }
                }
            }
        }
        for (k1, t1) in m1.universe().iter() {
            let Some(k2) = self.key_map.get(k1) else {
                bad(ConditionKind::Morphism, format!("key `{k1}` is not mapped"));
                continue;
            };
            let Ok(t2) = m2.tuple_of(k2) else {
                bad(
                    ConditionKind::Morphism,
                    format!("key `{k1}` maps to `{k2}`, outside the source universe"),
                );
                continue;
            };
            let moved = Tuple::new(t1.entries().map(|(i, v)| {
                (i, self.value_map.get(v).cloned().unwrap_or_else(|| v.to_string()))
            }));
            if &moved != t2 {
                bad(
                    ConditionKind::Morphism,
                    format!("key `{k1}`: the value map sends {t1} to {moved}, but `{k2}` has {t2}"),
                );
            }
            for rho in m1.schema().entity_names() {
                if m1.classifies(k1, rho) != m2.classifies(k2, rho) {
                    bad(
                        ConditionKind::Morphism,
                        format!("`{k1}` and its image `{k2}` disagree on `{rho}`"),
                    );
                }
            }
        }
        let hit: BTreeSet<&String> = self.key_map.values().collect();
        if let Some(k2) = m2.universe().keys().find(|k| !hit.contains(&k.to_string())) {
            bad(
                ConditionKind::Transfer,
                format!("the key map is not surjective: `{k2}` has no preimage"),
            );
        }
        let images: BTreeSet<&String> = self.value_map.values().collect();
        if images.len() != self.value_map.len() || images.len() != m2.domain().values().len() {
            bad(ConditionKind::Transfer, "the value map is not a bijection".into());
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Whether only the transfer conditions fail.
    pub fn is_morphism(&self) -> bool {
        self.validate().iter().all(|d| d.kind == ConditionKind::Transfer)
    }
}

/// `ℳ₂ ⊨ c` implies `ℳ₁ ⊨ c` for a valid vertical morphism `ℳ₂ ⇄ ℳ₁`.
pub fn check_env_condition(v: &VerticalStructureMorphism, c: &Constraint) -> Result<bool> {
    if let Some(d) = v.validate().first() {
        return Err(Error::InvalidStructureMorphism(d.detail.clone()));
    }
    Ok(!satisfies_constraint(v.source(), c)? || satisfies_constraint(v.target(), c)?)
}

/// A structure morphism `ℳ₂ ⇄ ℳ₁` along a schema morphism `m : 𝒮₂ ⇒ 𝒮₁`:
/// the schema morphism together with a vertical morphism from `ℳ₂` to the
/// reduct of `ℳ₁`.
#[derive(Clone, Debug)]
pub struct StructureMorphism {
    schema_morphism: SchemaMorphism,
    target: Structure,
    vertical: VerticalStructureMorphism,
}

impl StructureMorphism {
    pub fn new(
        schema_morphism: SchemaMorphism,
        source: Structure,
        target: Structure,
        key_map: BTreeMap<String, String>,
        value_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        let red = reduct(&schema_morphism, &target)?;
        let vertical = VerticalStructureMorphism::new(source, red, key_map, value_map)?;
        Ok(StructureMorphism {
            schema_morphism,
            target,
            vertical,
        })
    }

    /// Builds without validating the vertical part, for counterexamples.
    pub fn assemble(
        schema_morphism: SchemaMorphism,
        target: Structure,
        vertical: VerticalStructureMorphism,
    ) -> Self {
        StructureMorphism {
            schema_morphism,
            target,
            vertical,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.vertical.is_valid()
    }

    /// The identity structure morphism on `m`.
    pub fn identity(m: &Structure) -> Result<Self> {
        let id = SchemaMorphism::identity(m.schema());
        let v = VerticalStructureMorphism::identity(m);
        StructureMorphism::new(
            id,
            m.clone(),
            m.clone(),
            v.key_map().clone(),
            v.value_map().clone(),
        )
    }

    pub fn schema_morphism(&self) -> &SchemaMorphism {
        &self.schema_morphism
    }

    /// `ℳ₂`.
    pub fn source(&self) -> &Structure {
        self.vertical.source()
    }

    /// `ℳ₁`.
    pub fn target(&self) -> &Structure {
        &self.target
    }

    pub fn vertical(&self) -> &VerticalStructureMorphism {
        &self.vertical
    }
}

/// Re-keys a structure, renaming keys and values; used to build morphisms.
pub fn rename_structure(
    m: &Structure,
    key_map: &BTreeMap<String, String>,
    value_map: &BTreeMap<String, String>,
) -> Result<Structure> {
    let rename_value = |v: &str| value_map.get(v).cloned().unwrap_or_else(|| v.to_string());
    let mut universe = Universe::default();
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (k, t) in m.universe().iter() {
        let k2 = key_map.get(k).cloned().unwrap_or_else(|| k.to_string());
        universe.insert(k2.clone(), Tuple::new(t.entries().map(|(i, v)| (i, rename_value(v)))));
        if let Some(es) = m.classification().get(k) {
            classes.entry(k2).or_default().extend(es.iter().cloned());
        }
    }
    let domain = TypeDomain::new(
        m.domain().values().iter().map(|v| rename_value(v)).collect(),
        m.domain()
            .extents()
            .iter()
            .map(|(x, e)| (x.clone(), e.iter().map(|v| rename_value(v)).collect()))
            .collect(),
    )?;
    Structure::new(m.schema().clone(), domain, universe, classes)
}

/// Checks a formula against a schema; a convenience for callers holding only
/// a structure.
pub fn check_formula(m: &Structure, phi: &Formula) -> Result<Signature> {
    signature_of(m.schema(), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::sequent_as_constraint;
    use crate::kernel::Schema;

    fn sig(entries: &[(&str, &str)]) -> Signature {
        Signature::new(entries.iter().copied()).unwrap()
    }

    fn m1() -> Structure {
        let schema = Schema::new(
            ["N"],
            [
                ("Emp".to_string(), sig(&[("i", "N")])),
                ("Pair".to_string(), sig(&[("i", "N"), ("j", "N")])),
            ],
        )
        .unwrap();
        let mut u = Universe::default();
        u.insert("k1", Tuple::new([("i", "a")]));
        u.insert("k2", Tuple::new([("i", "b")]));
        Structure::new(
            schema,
            TypeDomain::from_extents([("N", vec!["a", "b"])]),
            u,
            [("k1".to_string(), ["Emp".to_string()].into())].into(),
        )
        .unwrap()
    }

    fn top1() -> Formula {
        Formula::Top(sig(&[("i", "N")]))
    }

    #[test]
    fn sequent_examples() {
        let m = m1();
        let emp = Formula::entity("Emp");
        assert!(satisfies_sequent(&m, &Sequent::new(emp.clone(), emp.clone())).unwrap());
        assert!(satisfies_sequent(&m, &Sequent::new(Formula::Bottom(sig(&[("i", "N")])), emp.clone())).unwrap());
        assert!(satisfies_sequent(&m, &Sequent::new(emp.clone(), top1())).unwrap());
        assert!(!satisfies_sequent(&m, &Sequent::new(top1(), emp)).unwrap());
    }

    #[test]
    fn constraint_examples() {
        let m = m1();
        let proj = SignatureMorphism::new(
            sig(&[("i", "N")]),
            sig(&[("i", "N"), ("j", "N")]),
            [("i", "i")],
        )
        .unwrap();
        let c = Constraint::new(
            Formula::entity("Emp"),
            proj.clone(),
            Formula::Top(sig(&[("i", "N"), ("j", "N")])),
        );
        let v = check_constraint(&m, &c).unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.escaping.rows, [Tuple::new([("i", "b")])].into());
        let vacuous = Constraint::new(
            Formula::entity("Emp"),
            proj,
            Formula::Bottom(sig(&[("i", "N"), ("j", "N")])),
        );
        assert!(satisfies_constraint(&m, &vacuous).unwrap());
        let q = Sequent::new(Formula::entity("Emp"), top1());
        let as_c = sequent_as_constraint(m.schema(), &q).unwrap();
        assert_eq!(
            satisfies_constraint(&m, &as_c).unwrap(),
            satisfies_sequent(&m, &q).unwrap()
        );
    }

    #[test]
    fn spec_examples() {
        let m = m1();
        assert!(satisfies_spec(&m, &[]).unwrap());
        let falsum = sequent_as_constraint(
            m.schema(),
            &Sequent::new(top1(), Formula::Bottom(sig(&[("i", "N")]))),
        )
        .unwrap();
        assert!(!satisfies_spec(&m, [&falsum]).unwrap());
    }

    #[test]
    fn intent_keeps_exactly_the_satisfied_sequents() {
        let m = m1();
        let s = m.schema();
        let up = sequent_as_constraint(s, &Sequent::new(Formula::entity("Emp"), top1())).unwrap();
        let down = sequent_as_constraint(s, &Sequent::new(top1(), Formula::entity("Emp"))).unwrap();
        let view = intent(&m, &[up.clone(), down]).unwrap();
        assert_eq!(view.members, vec![up]);
    }

    #[test]
    fn pool_sizes() {
        let m = m1();
        let f = formulas_up_to(m.schema(), 1, &[]).unwrap();
        // Emp, top, bot in one fiber; Pair, top, bot in the other.
        assert_eq!(f.values().map(Vec::len).sum::<usize>(), 6);
        let f2 = formulas_up_to(m.schema(), 2, &[]).unwrap();
        // per fiber: 3 atoms + 3 negations + 4 * 9 binaries
        assert_eq!(f2[&sig(&[("i", "N")])].len(), 42);
        let pool = constraint_pool(m.schema(), 1, &[]).unwrap();
        assert_eq!(pool.len(), 18);
    }

    #[test]
    fn identity_reduct_is_the_structure() {
        let m = m1();
        let id = SchemaMorphism::identity(m.schema());
        assert_eq!(reduct(&id, &m).unwrap(), m);
    }

    #[test]
    fn reduct_follows_the_entity_map() {
        let s1 = Schema::new(["N"], [("Manager".to_string(), sig(&[("i", "N")]))]).unwrap();
        let s2 = Schema::new(["N"], [("Mgr".to_string(), sig(&[("i", "N")]))]).unwrap();
        let mut u = Universe::default();
        u.insert("x", Tuple::new([("i", "a")]));
        u.insert("y", Tuple::new([("i", "b")]));
        let m1 = Structure::new(
            s1.clone(),
            TypeDomain::from_extents([("N", vec!["a", "b"])]),
            u,
            [("x".to_string(), ["Manager".to_string()].into())].into(),
        )
        .unwrap();
        let m = SchemaMorphism::new(
            s2,
            s1,
            [("Mgr".into(), "Manager".into())].into(),
            [("N".into(), "N".into())].into(),
        )
        .unwrap();
        let red = reduct(&m, &m1).unwrap();
        assert!(red.classifies("x", "Mgr"));
        assert!(!red.classifies("y", "Mgr"));
    }

    #[test]
    fn incompatible_domains_are_rejected() {
        let m = m1();
        let id = SchemaMorphism::identity(m.schema());
        let other = TypeDomain::from_extents([("N", vec!["a"])]);
        assert!(matches!(
            reduct_onto(&id, &m, &other),
            Err(Error::IncompatibleDomain(_))
        ));
    }

    #[test]
    fn vertical_identity_is_valid() {
        let m = m1();
        let v = VerticalStructureMorphism::identity(&m);
        assert!(v.is_valid(), "{:?}", v.validate());
        let c = sequent_as_constraint(m.schema(), &Sequent::new(top1(), Formula::entity("Emp")))
            .unwrap();
        assert!(check_env_condition(&v, &c).unwrap());
    }

    #[test]
    fn non_surjective_key_maps_break_transfer() {
        // M1 has only k1 ⊨ Emp over (a); M2 adds k2 ⊨ Emp over (b).
        // The morphism conditions hold, but M2 ⊨ top ⊢ Emp while M1 does not.
        let schema = Schema::new(["N"], [("Emp".to_string(), sig(&[("i", "N")]))]).unwrap();
        let d = TypeDomain::from_extents([("N", vec!["a", "b"])]);
        let mut u1 = Universe::default();
        u1.insert("k1", Tuple::new([("i", "a")]));
        let small = Structure::new(
            schema.clone(),
            d.clone(),
            u1,
            [("k1".to_string(), ["Emp".to_string()].into())].into(),
        )
        .unwrap();
        let mut u2 = Universe::default();
        u2.insert("k1", Tuple::new([("i", "a")]));
        u2.insert("k2", Tuple::new([("i", "b")]));
        let big = Structure::new(
            schema.clone(),
            d,
            u2,
            [
                ("k1".to_string(), ["Emp".to_string()].into()),
                ("k2".to_string(), ["Emp".to_string()].into()),
            ]
            .into(),
        )
        .unwrap();
        let v = VerticalStructureMorphism::assemble(
            big.clone(),
            small.clone(),
            [("k1".into(), "k1".into())].into(),
            [("a".into(), "a".into()), ("b".into(), "b".into())].into(),
        );
        assert!(v.is_morphism());
        assert!(!v.is_valid());
        let c = sequent_as_constraint(&schema, &Sequent::new(top1(), Formula::entity("Emp")))
            .unwrap();
        assert!(satisfies_constraint(&big, &c).unwrap());
        assert!(!satisfies_constraint(&small, &c).unwrap());
        assert!(check_env_condition(&v, &c).is_err());
    }
}
