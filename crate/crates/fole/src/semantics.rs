//! Relations, the three semantic flow operators, formula interpretation,
//! formula classification, extents, and the extensive / comprehensive / image
//! structure apparatus.
//!
//! Interpretation runs on bitsets indexed by the canonical enumeration of each
//! fiber's tuple space. [`Relation`] is the sorted-row form handed to callers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::formula::{signature_of, Formula};
use crate::kernel::{
    tuple_map, tuple_space, Schema, Signature, SignatureMorphism, Structure, Tuple, TypeDomain,
    Universe,
};

/// A set of tuples over one signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub signature: Signature,
    pub rows: BTreeSet<Tuple>,
}

impl Relation {
    pub fn new(signature: Signature, rows: impl IntoIterator<Item = Tuple>) -> Self {
        Relation {
            signature,
            rows: rows.into_iter().collect(),
        }
    }

    pub fn empty(signature: Signature) -> Self {
        Relation {
            signature,
            rows: BTreeSet::new(),
        }
    }

    pub fn full(domain: &TypeDomain, signature: Signature) -> Result<Self> {
        let rows = tuple_space(domain, &signature)?;
        Ok(Relation::new(signature, rows))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.is_subset(&other.rows)
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.rows.contains(t)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn expect_signature(context: &str, expected: &Signature, found: &Signature) -> Result<()> {
    if expected != found {
        return Err(Error::SignatureMismatch {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// `∃_h(R) = { tup(h)(t) : t ∈ R }`.
pub fn exists_along(h: &SignatureMorphism, r: &Relation) -> Result<Relation> {
    expect_signature("exists_along", h.target(), &r.signature)?;
    let rows = r
        .rows
        .iter()
        .map(|t| tuple_map(h, t))
        .collect::<Result<BTreeSet<_>>>()?;
    Ok(Relation {
        signature: h.source().clone(),
        rows,
    })
}

/// `∀_h(R)`: source tuples all of whose preimages lie in `R`.
pub fn forall_along(domain: &TypeDomain, h: &SignatureMorphism, r: &Relation) -> Result<Relation> {
    expect_signature("forall_along", h.target(), &r.signature)?;
    let mut rows: BTreeSet<Tuple> = tuple_space(domain, h.source())?.into_iter().collect();
    for t in tuple_space(domain, h.target())? {
        if !r.rows.contains(&t) {
            rows.remove(&tuple_map(h, &t)?);
        }
    }
    Ok(Relation {
        signature: h.source().clone(),
        rows,
    })
}

/// `h⁻¹(R′)`: target tuples whose image lies in `R′`.
pub fn subst_along(domain: &TypeDomain, h: &SignatureMorphism, r: &Relation) -> Result<Relation> {
    expect_signature("subst_along", h.source(), &r.signature)?;
    let mut rows = BTreeSet::new();
    for t in tuple_space(domain, h.target())? {
        if r.rows.contains(&tuple_map(h, &t)?) {
            rows.insert(t);
        }
    }
    Ok(Relation {
        signature: h.target().clone(),
        rows,
    })
}

/// A tuple space with a dense index.
#[derive(Clone, Debug)]
pub struct Fiber {
    signature: Signature,
    tuples: Vec<Tuple>,
    index: HashMap<Tuple, usize>,
}

impl Fiber {
    pub fn new(domain: &TypeDomain, signature: &Signature) -> Result<Self> {
        let tuples = tuple_space(domain, signature)?;
        let index = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Fiber {
            signature: signature.clone(),
            tuples,
            index,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn index_of(&self, t: &Tuple) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> FixedBitSet {
        let mut b = self.empty_set();
        b.insert_range(..);
        b
    }

    pub fn to_relation(&self, bits: &FixedBitSet) -> Relation {
        Relation {
            signature: self.signature.clone(),
            rows: bits.ones().map(|i| self.tuples[i].clone()).collect(),
        }
    }

    pub fn from_relation(&self, r: &Relation) -> Result<FixedBitSet> {
        expect_signature("relation", &self.signature, &r.signature)?;
        let mut b = self.empty_set();
        for t in &r.rows {
            let i = self.index_of(t).ok_or_else(|| Error::TupleMismatch {
                tuple: t.to_string(),
                signature: self.signature.to_string(),
            })?;
            b.insert(i);
        }
        Ok(b)
    }
}

/// Compiled interpretation of formulas over one schema and type domain.
///
/// `prepare` type-checks a formula and builds the fibers and tuple maps it
/// needs; `eval` then runs without mutation, so a prepared evaluator can be
/// shared between threads.
#[derive(Clone, Debug)]
pub struct Evaluator {
    schema: Schema,
    domain: TypeDomain,
    entity_index: HashMap<String, usize>,
    fibers: HashMap<Signature, Fiber>,
    // For each morphism, the source-fiber index of the image of every
    // target-fiber tuple.
    maps: HashMap<SignatureMorphism, Vec<usize>>,
}

impl Evaluator {
    pub fn new(schema: &Schema, domain: &TypeDomain) -> Result<Self> {
        domain.covers(schema)?;
        let mut ev = Evaluator {
            schema: schema.clone(),
            domain: domain.clone(),
            entity_index: schema
                .entity_names()
                .enumerate()
                .map(|(i, n)| (n.to_string(), i))
                .collect(),
            fibers: HashMap::new(),
            maps: HashMap::new(),
        };
        for (_, sig) in schema.entities() {
            ev.fiber_for(sig)?;
        }
        Ok(ev)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn domain(&self) -> &TypeDomain {
        &self.domain
    }

    /// Position of an entity type in the base vector passed to `eval`.
    pub fn entity_position(&self, entity: &str) -> Result<usize> {
        self.entity_index
            .get(entity)
            .copied()
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))
    }

    pub fn fiber_for(&mut self, sig: &Signature) -> Result<&Fiber> {
        if !self.fibers.contains_key(sig) {
            let fiber = Fiber::new(&self.domain, sig)?;
            self.fibers.insert(sig.clone(), fiber);
        }
        Ok(&self.fibers[sig])
    }

    pub fn fiber(&self, sig: &Signature) -> Result<&Fiber> {
        self.fibers
            .get(sig)
            .ok_or_else(|| Error::Internal(format!("fiber {sig} was not prepared")))
    }

    /// Fiber of an entity type's signature.
    pub fn entity_fiber(&self, entity: &str) -> Result<&Fiber> {
        self.fiber(self.schema.sig_of(entity)?)
    }

    pub fn prepare_morphism(&mut self, h: &SignatureMorphism) -> Result<()> {
        if self.maps.contains_key(h) {
            return Ok(());
        }
        self.schema.check_signature(h.source())?;
        self.schema.check_signature(h.target())?;
        self.fiber_for(h.source())?;
        self.fiber_for(h.target())?;
        let src = &self.fibers[h.source()];
        let tgt = &self.fibers[h.target()];
        let map = tgt
            .tuples()
            .iter()
            .map(|t| {
                let image = tuple_map(h, t)?;
                src.index_of(&image).ok_or_else(|| {
                    Error::Internal(format!("tuple map of {t} left the source space"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.maps.insert(h.clone(), map);
        Ok(())
    }

    /// Type-checks `phi` and prepares every fiber and map it touches.
    pub fn prepare(&mut self, phi: &Formula) -> Result<Signature> {
        let sig = signature_of(&self.schema, phi)?;
        let mut todo = Vec::new();
        phi.visit(&mut |f| match f {
            Formula::Top(s) | Formula::Bottom(s) => todo.push(Err(s.clone())),
            Formula::Exists(h, _) | Formula::Forall(h, _) | Formula::Subst(h, _) => {
                todo.push(Ok(h.clone()))
            }
            _ => {}
        });
        for item in todo {
            match item {
                Ok(h) => self.prepare_morphism(&h)?,
                Err(s) => {
                    self.fiber_for(&s)?;
                }
            }
        }
        self.fiber_for(&sig)?;
        Ok(sig)
    }

    /// Evaluates a prepared formula. `base[i]` is the interpretation of the
    /// `i`-th entity type of the schema, as a bitset over its fiber.
    pub fn eval(&self, phi: &Formula, base: &[FixedBitSet]) -> Result<FixedBitSet> {
        Ok(match phi {
            Formula::Entity(rho) => base[self.entity_position(rho)?].clone(),
            Formula::Top(sig) => self.fiber(sig)?.full_set(),
            Formula::Bottom(sig) => self.fiber(sig)?.empty_set(),
            Formula::Neg(a) => {
                let mut r = self.eval(a, base)?;
                r.toggle_range(..);
                r
            }
            Formula::Meet(a, b) => {
                let mut r = self.eval(a, base)?;
                r.intersect_with(&self.eval(b, base)?);
                r
            }
            Formula::Join(a, b) => {
                let mut r = self.eval(a, base)?;
                r.union_with(&self.eval(b, base)?);
                r
            }
            Formula::Impl(a, b) => {
                let mut r = self.eval(a, base)?;
                r.toggle_range(..);
                r.union_with(&self.eval(b, base)?);
                r
            }
            Formula::Diff(a, b) => {
                let mut r = self.eval(a, base)?;
                r.difference_with(&self.eval(b, base)?);
                r
            }
            Formula::Exists(h, a) => {
                let inner = self.eval(a, base)?;
                self.exists_bits(h, &inner)?
            }
            Formula::Forall(h, a) => {
                let inner = self.eval(a, base)?;
                self.forall_bits(h, &inner)?
            }
            Formula::Subst(h, a) => {
                let inner = self.eval(a, base)?;
                self.subst_bits(h, &inner)?
            }
        })
    }

    fn map_of(&self, h: &SignatureMorphism) -> Result<&[usize]> {
        self.maps
            .get(h)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Internal("signature morphism was not prepared".into()))
    }

    pub fn exists_bits(&self, h: &SignatureMorphism, r: &FixedBitSet) -> Result<FixedBitSet> {
        let map = self.map_of(h)?;
        let mut out = self.fiber(h.source())?.empty_set();
        for t in r.ones() {
            out.insert(map[t]);
        }
        Ok(out)
    }

    pub fn forall_bits(&self, h: &SignatureMorphism, r: &FixedBitSet) -> Result<FixedBitSet> {
        let map = self.map_of(h)?;
        let mut out = self.fiber(h.source())?.full_set();
        for t in r.zeroes() {
            out.set(map[t], false);
        }
        Ok(out)
    }

    pub fn subst_bits(&self, h: &SignatureMorphism, r: &FixedBitSet) -> Result<FixedBitSet> {
        let map = self.map_of(h)?;
        let mut out = self.fiber(h.target())?.empty_set();
        for (t, &s) in map.iter().enumerate() {
            if r.contains(s) {
                out.insert(t);
            }
        }
        Ok(out)
    }
}

/// The interpretation machinery bound to one structure, with entity
/// interpretations computed once.
#[derive(Clone, Debug)]
pub struct StructureSemantics<'m> {
    structure: &'m Structure,
    ev: Evaluator,
    base: Vec<FixedBitSet>,
}

impl<'m> StructureSemantics<'m> {
    pub fn new(m: &'m Structure) -> Result<Self> {
        let ev = Evaluator::new(m.schema(), m.domain())?;
        let mut base = Vec::new();
        for (rho, _) in m.schema().entities() {
            let fiber = ev.entity_fiber(rho)?;
            let mut bits = fiber.empty_set();
            for k in m.keys_of(rho) {
                let t = m.tuple_of(&k)?;
                let i = fiber.index_of(t).ok_or_else(|| {
                    Error::InvalidStructure(format!(
                        "key {k} is classified under {rho} but {t} is not a tuple over {}",
                        fiber.signature()
                    ))
                })?;
                bits.insert(i);
            }
            base.push(bits);
        }
        Ok(StructureSemantics {
            structure: m,
            ev,
            base,
        })
    }

    pub fn structure(&self) -> &'m Structure {
        self.structure
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.ev
    }

    /// Interpretation as a bitset over the fiber of `σ̂(φ)`.
    pub fn bits(&mut self, phi: &Formula) -> Result<(Signature, FixedBitSet)> {
        let sig = self.ev.prepare(phi)?;
        let bits = self.ev.eval(phi, &self.base)?;
        Ok((sig, bits))
    }

    pub fn interpret(&mut self, phi: &Formula) -> Result<Relation> {
        let (sig, bits) = self.bits(phi)?;
        Ok(self.ev.fiber(&sig)?.to_relation(&bits))
    }

    /// Whether `t ∈ I(φ)`.
    pub fn contains(&mut self, phi: &Formula, t: &Tuple) -> Result<bool> {
        let (sig, bits) = self.bits(phi)?;
        Ok(self
            .ev
            .fiber(&sig)?
            .index_of(t)
            .is_some_and(|i| bits.contains(i)))
    }

    /// Decides `k ⊨ φ` clause by clause, recursing on the formula.
    pub fn classify(&mut self, key: &str, phi: &Formula) -> Result<bool> {
        let t = self.structure.tuple_of(key)?.clone();
        self.classify_tuple(&t, phi)
    }

    fn in_fiber(&mut self, t: &Tuple, phi: &Formula) -> Result<bool> {
        let sig = self.ev.prepare(phi)?;
        Ok(self.ev.fiber(&sig)?.index_of(t).is_some())
    }

    fn classify_tuple(&mut self, t: &Tuple, phi: &Formula) -> Result<bool> {
        Ok(match phi {
            Formula::Entity(_) => self.contains(phi, t)?,
            Formula::Top(_) => self.in_fiber(t, phi)?,
            Formula::Bottom(_) => false,
            Formula::Meet(a, b) => self.classify_tuple(t, a)? && self.classify_tuple(t, b)?,
            Formula::Join(a, b) => self.classify_tuple(t, a)? || self.classify_tuple(t, b)?,
            Formula::Neg(a) => self.in_fiber(t, phi)? && !self.classify_tuple(t, a)?,
            Formula::Impl(a, b) => {
                self.in_fiber(t, phi)? && (!self.classify_tuple(t, a)? || self.classify_tuple(t, b)?)
            }
            Formula::Diff(a, b) => self.classify_tuple(t, a)? && !self.classify_tuple(t, b)?,
            Formula::Exists(..) | Formula::Forall(..) | Formula::Subst(..) => self.contains(phi, t)?,
        })
    }

    /// `ext(φ)` by the classification recursion.
    pub fn extent(&mut self, phi: &Formula) -> Result<BTreeSet<String>> {
        let keys: Vec<String> = self.structure.universe().keys().map(String::from).collect();
        let mut out = BTreeSet::new();
        for k in keys {
            if self.classify(&k, phi)? {
                out.insert(k);
            }
        }
        Ok(out)
    }

    /// `τ⁻¹(I(φ))`.
    pub fn preimage(&mut self, phi: &Formula) -> Result<BTreeSet<String>> {
        let r = self.interpret(phi)?;
        Ok(self
            .structure
            .universe()
            .iter()
            .filter(|(_, t)| r.contains(t))
            .map(|(k, _)| k.to_string())
            .collect())
    }
}

pub fn interpret(m: &Structure, phi: &Formula) -> Result<Relation> {
    StructureSemantics::new(m)?.interpret(phi)
}

/// `k ⊨ φ` by recursion on the formula.
pub fn classify(m: &Structure, key: &str, phi: &Formula) -> Result<bool> {
    StructureSemantics::new(m)?.classify(key, phi)
}

/// `k ⊨ φ` read off the interpretation: `τ(k) ∈ I(φ)`.
pub fn classify_by_interpretation(m: &Structure, key: &str, phi: &Formula) -> Result<bool> {
    let t = m.tuple_of(key)?.clone();
    StructureSemantics::new(m)?.contains(phi, &t)
}

pub fn extent(m: &Structure, phi: &Formula) -> Result<BTreeSet<String>> {
    StructureSemantics::new(m)?.extent(phi)
}

/// `ext_ℰ(ρ) = τ⁻¹(I(ρ))` for every entity type.
pub fn is_extensive(m: &Structure) -> Result<bool> {
    let mut sem = StructureSemantics::new(m)?;
    for rho in m.schema().entity_names() {
        if m.keys_of(rho) != sem.preimage(&Formula::entity(rho))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A formula whose extent image differs from its interpretation, and one tuple
/// in the difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComprehensionWitness {
    pub formula: Formula,
    pub tuple: Tuple,
}

/// Verdict of the bounded comprehension check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComprehensionReport {
    pub comprehensive: bool,
    /// The depth bound the verdict covers.
    pub depth: usize,
    /// Set when the reachable interpretations stopped growing before the
    /// bound, in which case a positive verdict covers every depth.
    pub saturated: bool,
    /// Number of distinct interpretations examined.
    pub classes: usize,
    pub witness: Option<ComprehensionWitness>,
}

/// Checks `℘τ(ext(φ)) = I(φ)` for every formula up to `depth` whose flow nodes
/// use morphisms from `pool`.
///
/// A formula's interpretation depends only on the interpretations of its
/// children, so the search walks the set of interpretations reachable at each
/// depth (one representative formula per distinct relation and fiber) rather
/// than the syntactically distinct formulas. A refutation is always sound; a
/// confirmation covers the stated depth, or all depths when `saturated`.
pub fn is_comprehensive(
    m: &Structure,
    depth: usize,
    pool: &[SignatureMorphism],
) -> Result<ComprehensionReport> {
    let mut sem = StructureSemantics::new(m)?;
    let mut closure = InterpretationClosure::new(&mut sem, pool)?;
    let mut checked = 0usize;
    let mut report = |sem: &mut StructureSemantics, phi: &Formula| -> Result<Option<ComprehensionWitness>> {
        checked += 1;
        let interp = sem.interpret(phi)?;
        let image: BTreeSet<Tuple> = sem
            .extent(phi)?
            .iter()
            .map(|k| m.tuple_of(k).cloned())
            .collect::<Result<_>>()?;
        let diff = interp
            .rows
            .symmetric_difference(&image)
            .next()
            .cloned();
        Ok(diff.map(|tuple| ComprehensionWitness {
            formula: phi.clone(),
            tuple,
        }))
    };
    let mut level = 1;
    let mut saturated = false;
    loop {
        let fresh = closure.level_formulas(level);
        for phi in &fresh {
            if let Some(w) = report(closure.sem, phi)? {
                return Ok(ComprehensionReport {
                    comprehensive: false,
                    depth,
                    saturated: false,
                    classes: checked,
                    witness: Some(w),
                });
            }
        }
        if level >= depth {
            break;
        }
        if !closure.grow()? {
            saturated = true;
            break;
        }
        level += 1;
    }
    Ok(ComprehensionReport {
        comprehensive: true,
        depth,
        saturated,
        classes: checked,
        witness: None,
    })
}

/// The distinct interpretations reachable by formulas of bounded depth, per
/// fiber, each with the first formula found to denote it.
pub struct InterpretationClosure<'s, 'm> {
    sem: &'s mut StructureSemantics<'m>,
    pool: Vec<SignatureMorphism>,
    fibers: Vec<Signature>,
    // Per fiber: representative formulas with their values, in discovery order,
    // and the level each was found at.
    found: BTreeMap<Signature, Vec<(FixedBitSet, Formula, usize)>>,
    seen: HashMap<(Signature, FixedBitSet), ()>,
    level: usize,
}

impl<'s, 'm> InterpretationClosure<'s, 'm> {
    pub fn new(sem: &'s mut StructureSemantics<'m>, pool: &[SignatureMorphism]) -> Result<Self> {
        let schema = sem.structure().schema().clone();
        let mut fibers: Vec<Signature> = schema.entities().iter().map(|(_, s)| s.clone()).collect();
        for h in pool {
            sem.ev.prepare_morphism(h)?;
            fibers.push(h.source().clone());
            fibers.push(h.target().clone());
        }
        let mut dedup = BTreeSet::new();
        fibers.retain(|s| dedup.insert(s.clone()));
        let mut c = InterpretationClosure {
            sem,
            pool: pool.to_vec(),
            fibers,
            found: BTreeMap::new(),
            seen: HashMap::new(),
            level: 1,
        };
        for sig in c.fibers.clone() {
            c.add(Formula::Top(sig.clone()))?;
            c.add(Formula::Bottom(sig.clone()))?;
        }
        for (rho, _) in schema.entities() {
            c.add(Formula::entity(rho.clone()))?;
        }
        Ok(c)
    }

    fn add(&mut self, phi: Formula) -> Result<bool> {
        let (sig, bits) = self.sem.bits(&phi)?;
        if self.seen.contains_key(&(sig.clone(), bits.clone())) {
            return Ok(false);
        }
        self.seen.insert((sig.clone(), bits.clone()), ());
        self.found
            .entry(sig)
            .or_default()
            .push((bits, phi, self.level));
        Ok(true)
    }

    /// Representatives first found at `level`.
    pub fn level_formulas(&self, level: usize) -> Vec<Formula> {
        self.found
            .values()
            .flatten()
            .filter(|(_, _, l)| *l == level)
            .map(|(_, f, _)| f.clone())
            .collect()
    }

    /// All representatives found so far, grouped by fiber.
    pub fn representatives(&self) -> &BTreeMap<Signature, Vec<(FixedBitSet, Formula, usize)>> {
        &self.found
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Adds the interpretations of depth `level + 1`. Returns whether any
    /// new interpretation appeared.
    pub fn grow(&mut self) -> Result<bool> {
        let prev = self.level;
        self.level += 1;
        let snapshot: BTreeMap<Signature, Vec<(Formula, bool)>> = self
            .found
            .iter()
            .map(|(s, v)| {
                (
                    s.clone(),
                    v.iter().map(|(_, f, l)| (f.clone(), *l == prev)).collect(),
                )
            })
            .collect();
        let mut added = false;
        for items in snapshot.values() {
            for (a, a_new) in items {
                if *a_new {
                    added |= self.add(Formula::neg(a.clone()))?;
                }
                for (b, b_new) in items {
                    if !(*a_new || *b_new) {
                        continue;
                    }
                    added |= self.add(Formula::meet(a.clone(), b.clone()))?;
                    added |= self.add(Formula::join(a.clone(), b.clone()))?;
                    added |= self.add(Formula::implies(a.clone(), b.clone()))?;
                    added |= self.add(Formula::diff(a.clone(), b.clone()))?;
                }
            }
        }
        for h in self.pool.clone() {
            if let Some(items) = snapshot.get(h.target()) {
                for (a, a_new) in items.iter().filter(|(_, n)| *n) {
                    let _ = a_new;
                    added |= self.add(Formula::exists(h.clone(), a.clone()))?;
                    added |= self.add(Formula::forall(h.clone(), a.clone()))?;
                }
            }
            if let Some(items) = snapshot.get(h.source()) {
                for (a, _) in items.iter().filter(|(_, n)| *n) {
                    added |= self.add(Formula::subst(h.clone(), a.clone()))?;
                }
            }
        }
        Ok(added)
    }
}

/// The image structure over the entity-type fibers: see [`image_structure_over`].
pub fn image_structure(m: &Structure) -> Result<Structure> {
    image_structure_over(m, &[])
}

/// The image structure: keys are tuples and `τ̊` is the identity. A tuple is
/// classified under `ρ` when some key with that descriptor is.
///
/// The key set is every tuple over the entity-type signatures and over
/// `extra` signatures, together with the descriptors of `m`'s keys. This is
/// the part of the trivial universe on all tuples that formulas over these
/// fibers can see, which is what makes the result comprehensive.
pub fn image_structure_over(m: &Structure, extra: &[Signature]) -> Result<Structure> {
    let mut keys: BTreeSet<Tuple> = m.universe().iter().map(|(_, t)| t.clone()).collect();
    let sigs = m
        .schema()
        .entities()
        .iter()
        .map(|(_, s)| s)
        .chain(extra.iter());
    for sig in sigs {
        keys.extend(tuple_space(m.domain(), sig)?);
    }
    let mut universe = Universe::default();
    for t in &keys {
        universe.insert(t.to_string(), t.clone());
    }
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (k, entities) in m.classification() {
        let t = m.tuple_of(k)?;
        classes
            .entry(t.to_string())
            .or_default()
            .extend(entities.iter().cloned());
    }
    Structure::new(m.schema().clone(), m.domain().clone(), universe, classes)
}
