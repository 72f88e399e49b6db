//! Specifications and their calculus: semantic entailment by exhaustive
//! enumeration of inclusion structures, consequence, consistency, the rule
//! engine, direct and inverse flow, specification morphisms and conservative
//! extensions.
//!
//! Every semantic verdict is relative to a [`ModelClass`]: all inclusion
//! structures over one declared type domain.

mod derive;

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formula::{translate_constraint, Constraint, Formula};
use crate::kernel::{tuple_space, Schema, SchemaMorphism, Structure, TypeDomain, Universe};
use crate::semantics::Evaluator;

pub use derive::{check_derivation, derives, derives_with_depth, Derivation, Rule, DEFAULT_DEPTH};

/// Default cap on `∑_ρ |tup(σ(ρ))|`.
pub const DEFAULT_BUDGET: usize = 24;

/// The budget named by `FOLE_BUDGET`, or [`DEFAULT_BUDGET`].
pub fn default_budget() -> usize {
    std::env::var("FOLE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// A finite set of constraints over a schema, kept as given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specification {
    schema: Schema,
    constraints: BTreeSet<Constraint>,
}

impl Specification {
    pub fn new(schema: Schema, constraints: impl IntoIterator<Item = Constraint>) -> Result<Self> {
        let constraints: BTreeSet<Constraint> = constraints.into_iter().collect();
        for c in &constraints {
            c.check(&schema)?;
        }
        Ok(Specification {
            schema,
            constraints,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        Specification {
            schema,
            constraints: BTreeSet::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn constraints(&self) -> &BTreeSet<Constraint> {
        &self.constraints
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        self.constraints.contains(c)
    }

    /// The union of axiom sets: the meet in the specification order.
    pub fn union(&self, other: &Specification) -> Result<Specification> {
        if self.schema != other.schema {
            return Err(Error::Internal("union of specifications over different schemas".into()));
        }
        Ok(Specification {
            schema: self.schema.clone(),
            constraints: self.constraints.union(&other.constraints).cloned().collect(),
        })
    }

    /// Keeps the constraints also present in `other`.
    pub fn intersection(&self, other: &Specification) -> Specification {
        Specification {
            schema: self.schema.clone(),
            constraints: self
                .constraints
                .intersection(&other.constraints)
                .cloned()
                .collect(),
        }
    }
}

/// All inclusion structures over one type domain, up to a tuple-slot budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelClass {
    domain: TypeDomain,
    budget: usize,
}

impl ModelClass {
    /// Uses [`default_budget`].
    pub fn new(domain: TypeDomain) -> Self {
        ModelClass {
            domain,
            budget: default_budget(),
        }
    }

    pub fn with_budget(domain: TypeDomain, budget: usize) -> Self {
        ModelClass { domain, budget }
    }

    pub fn domain(&self) -> &TypeDomain {
        &self.domain
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// The model class over the source schema of `m`, with `extent₂ = extent₁ ∘ f`.
    pub fn pullback(&self, m: &SchemaMorphism) -> Result<ModelClass> {
        Ok(ModelClass {
            domain: self.domain.pullback(m)?,
            budget: self.budget,
        })
    }
}

/// Compiled access to the models of a model class over one schema.
///
/// Model `n` gives entity type number `e` (schema order) the tuples whose bits
/// are set in the `e`-th consecutive bit range of `n`, lowest bits first.
pub struct ModelSpace {
    ev: Evaluator,
    layout: Vec<(usize, usize)>,
    slots: usize,
}

impl ModelSpace {
    pub fn new(schema: &Schema, mc: &ModelClass) -> Result<Self> {
        let ev = Evaluator::new(schema, mc.domain())?;
        let mut layout = Vec::new();
        let mut offset = 0;
        for (rho, _) in schema.entities() {
            let len = ev.entity_fiber(rho)?.len();
            layout.push((offset, len));
            offset += len;
        }
        if offset > mc.budget() || offset >= 64 {
            return Err(Error::Budget {
                needed: offset,
                budget: mc.budget().min(63),
            });
        }
        Ok(ModelSpace {
            ev,
            layout,
            slots: offset,
        })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn model_count(&self) -> u64 {
        1u64 << self.slots
    }

    pub fn prepare(&mut self, c: &Constraint) -> Result<()> {
        c.check(self.ev.schema())?;
        self.ev.prepare(&c.source)?;
        self.ev.prepare(&c.target)?;
        self.ev.prepare_morphism(&c.h)
    }

    pub fn prepare_all<'a>(&mut self, cs: impl IntoIterator<Item = &'a Constraint>) -> Result<()> {
        for c in cs {
            self.prepare(c)?;
        }
        Ok(())
    }

    pub fn base(&self, n: u64) -> Vec<FixedBitSet> {
        self.layout
            .iter()
            .map(|&(offset, len)| {
                let mut b = FixedBitSet::with_capacity(len);
                for i in 0..len {
                    if n >> (offset + i) & 1 == 1 {
                        b.insert(i);
                    }
                }
                b
            })
            .collect()
    }

    /// Satisfaction of a prepared constraint in the model with base `base`.
    pub fn satisfies(&self, base: &[FixedBitSet], c: &Constraint) -> bool {
        let run = || -> Result<bool> {
            let target = self.ev.eval(&c.target, base)?;
            let image = if c.h.is_identity() {
                target
            } else {
                self.ev.exists_bits(&c.h, &target)?
            };
            let source = self.ev.eval(&c.source, base)?;
            Ok(image.is_subset(&source))
        };
        run().expect("constraint was prepared before evaluation")
    }

    pub fn satisfies_all<'a>(
        &self,
        base: &[FixedBitSet],
        cs: impl IntoIterator<Item = &'a Constraint>,
    ) -> bool {
        cs.into_iter().all(|c| self.satisfies(base, c))
    }

    /// Model `n` as an inclusion structure whose keys are the tuples of every
    /// entity-type fiber, named by their rendering.
    pub fn structure(&self, n: u64) -> Structure {
        let schema = self.ev.schema();
        let domain = self.ev.domain();
        let mut universe = Universe::default();
        let mut classes = std::collections::BTreeMap::<String, BTreeSet<String>>::new();
        for ((rho, sig), &(offset, _)) in schema.entities().iter().zip(&self.layout) {
            let space = tuple_space(domain, sig).expect("fiber was built from this space");
            for (i, t) in space.into_iter().enumerate() {
                let key = t.to_string();
                if n >> (offset + i) & 1 == 1 {
                    classes.entry(key.clone()).or_default().insert(rho.clone());
                }
                universe.insert(key, t);
            }
        }
        Structure::assemble(schema.clone(), domain.clone(), universe, classes)
    }
}

/// Outcome of an entailment query.
#[derive(Clone, Debug)]
pub struct Entailment {
    pub entailed: bool,
    /// The first model, in enumeration order, satisfying the specification
    /// but not the constraint.
    pub countermodel: Option<Structure>,
    pub models: u64,
}

/// `T ⊨ c` relative to `mc`.
pub fn entails_semantic(t: &Specification, c: &Constraint, mc: &ModelClass) -> Result<Entailment> {
    let mut space = ModelSpace::new(t.schema(), mc)?;
    space.prepare_all(t.iter())?;
    space.prepare(c)?;
    let first = (0..space.model_count()).into_par_iter().find_first(|&n| {
        let base = space.base(n);
        space.satisfies_all(&base, t.iter()) && !space.satisfies(&base, c)
    });
    Ok(Entailment {
        entailed: first.is_none(),
        countermodel: first.map(|n| space.structure(n)),
        models: space.model_count(),
    })
}

/// The pool members entailed by `T`, as a specification.
pub fn consequence(t: &Specification, pool: &[Constraint], mc: &ModelClass) -> Result<Specification> {
    let mut space = ModelSpace::new(t.schema(), mc)?;
    space.prepare_all(t.iter())?;
    space.prepare_all(pool)?;
    let refuted = (0..space.model_count())
        .into_par_iter()
        .fold(
            || vec![false; pool.len()],
            |mut acc, n| {
                let base = space.base(n);
                if space.satisfies_all(&base, t.iter()) {
                    for (i, c) in pool.iter().enumerate() {
                        if !acc[i] && !space.satisfies(&base, c) {
                            acc[i] = true;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![false; pool.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| *x || *y).collect(),
        );
    Specification::new(
        t.schema().clone(),
        pool.iter()
            .zip(refuted)
            .filter(|(_, r)| !r)
            .map(|(c, _)| c.clone()),
    )
}

/// Outcome of a consistency query.
#[derive(Clone, Debug)]
pub struct Consistency {
    pub consistent: bool,
    pub witness: Option<Structure>,
}

pub fn is_consistent(t: &Specification, mc: &ModelClass) -> Result<Consistency> {
    let mut space = ModelSpace::new(t.schema(), mc)?;
    space.prepare_all(t.iter())?;
    let first = (0..space.model_count())
        .into_par_iter()
        .find_first(|&n| space.satisfies_all(&space.base(n), t.iter()));
    Ok(Consistency {
        consistent: first.is_some(),
        witness: first.map(|n| space.structure(n)),
    })
}

/// The first axiom of `b` that `a` fails to entail, with a countermodel.
/// `None` means `a ⊨ b`, that is `a ≤ b` in the specification order.
pub fn first_unentailed(
    a: &Specification,
    b: &Specification,
    mc: &ModelClass,
) -> Result<Option<(Constraint, Structure)>> {
    for c in b.iter() {
        let e = entails_semantic(a, c, mc)?;
        if let Some(m) = e.countermodel {
            return Ok(Some((c.clone(), m)));
        }
    }
    Ok(None)
}

/// `a ≤ b`: `a• ⊇ b•`, i.e. `a` entails every axiom of `b`.
pub fn spec_leq(a: &Specification, b: &Specification, mc: &ModelClass) -> Result<bool> {
    Ok(first_unentailed(a, b, mc)?.is_none())
}

/// Same consequences relative to `mc`.
pub fn spec_equivalent(a: &Specification, b: &Specification, mc: &ModelClass) -> Result<bool> {
    Ok(spec_leq(a, b, mc)? && spec_leq(b, a, mc)?)
}

/// Precomputed satisfaction of a list of constraints in every model of a
/// model class, for many entailment questions about the same constraints.
pub struct SatTable {
    constraints: Vec<Constraint>,
    columns: Vec<FixedBitSet>,
    models: usize,
}

impl SatTable {
    pub fn build(schema: &Schema, mc: &ModelClass, constraints: &[Constraint]) -> Result<Self> {
        let mut space = ModelSpace::new(schema, mc)?;
        space.prepare_all(constraints)?;
        let models = space.model_count() as usize;
        let rows: Vec<Vec<bool>> = (0..models as u64)
            .into_par_iter()
            .map(|n| {
                let base = space.base(n);
                constraints.iter().map(|c| space.satisfies(&base, c)).collect()
            })
            .collect();
        let mut columns = vec![FixedBitSet::with_capacity(models); constraints.len()];
        for (n, row) in rows.iter().enumerate() {
            for (i, &sat) in row.iter().enumerate() {
                if sat {
                    columns[i].insert(n);
                }
            }
        }
        Ok(SatTable {
            constraints: constraints.to_vec(),
            columns,
            models,
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn index(&self, c: &Constraint) -> Result<usize> {
        self.constraints
            .iter()
            .position(|d| d == c)
            .ok_or_else(|| Error::Internal(format!("{c} is not in the table")))
    }

    /// Models satisfying every listed constraint.
    pub fn models_of<'a>(&self, cs: impl IntoIterator<Item = &'a Constraint>) -> Result<FixedBitSet> {
        let mut all = FixedBitSet::with_capacity(self.models);
        all.insert_range(..);
        for c in cs {
            all.intersect_with(&self.columns[self.index(c)?]);
        }
        Ok(all)
    }

    pub fn entails<'a>(
        &self,
        t: impl IntoIterator<Item = &'a Constraint>,
        c: &Constraint,
    ) -> Result<bool> {
        Ok(self.models_of(t)?.is_subset(&self.columns[self.index(c)?]))
    }

    /// The table's constraints entailed by `t`.
    pub fn consequence<'a>(
        &self,
        t: impl IntoIterator<Item = &'a Constraint>,
    ) -> Result<BTreeSet<Constraint>> {
        let models = self.models_of(t)?;
        Ok(self
            .constraints
            .iter()
            .zip(&self.columns)
            .filter(|(_, col)| models.is_subset(col))
            .map(|(c, _)| c.clone())
            .collect())
    }
}

/// Constraint-wise translation of a specification along `m : 𝒮₂ ⇒ 𝒮₁`.
pub fn direct_flow(m: &SchemaMorphism, t2: &Specification) -> Result<Specification> {
    if m.source() != t2.schema() {
        return Err(Error::Internal(
            "the specification is not over the source schema of the morphism".into(),
        ));
    }
    Specification::new(
        m.target().clone(),
        t2.iter()
            .map(|c| translate_constraint(m, c))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// The pool members over `𝒮₂` whose translations `T₁` entails. `mc` is the
/// model class over the target schema `𝒮₁`.
pub fn inverse_flow(
    m: &SchemaMorphism,
    t1: &Specification,
    pool2: &[Constraint],
    mc: &ModelClass,
) -> Result<Specification> {
    if m.target() != t1.schema() {
        return Err(Error::Internal(
            "the specification is not over the target schema of the morphism".into(),
        ));
    }
    for c in pool2 {
        c.check(m.source())?;
    }
    let translated = pool2
        .iter()
        .map(|c| translate_constraint(m, c))
        .collect::<Result<Vec<_>>>()?;
    let closed = consequence(t1, &translated, mc)?;
    Specification::new(
        m.source().clone(),
        pool2
            .iter()
            .zip(&translated)
            .filter(|(_, tc)| closed.contains(tc))
            .map(|(c, _)| c.clone()),
    )
}

/// Verdict of a specification-morphism check.
#[derive(Clone, Debug)]
pub struct MorphismCheck {
    pub holds: bool,
    /// An axiom of `T₂` whose translation `T₁` does not entail, with a
    /// countermodel over `𝒮₁`.
    pub witness: Option<(Constraint, Structure)>,
}

/// Whether `m` carries `T₂` into the consequences of `T₁`.
///
/// It suffices that `T₁` entail the translation of each axiom of `T₂`. The
/// check is made twice, once through direct flow and once through inverse
/// flow with the axioms as pool, and the two must agree.
pub fn is_spec_morphism(
    m: &SchemaMorphism,
    t2: &Specification,
    t1: &Specification,
    mc: &ModelClass,
) -> Result<MorphismCheck> {
    let image = direct_flow(m, t2)?;
    let witness = first_unentailed(t1, &image, mc)?;
    let axioms: Vec<Constraint> = t2.iter().cloned().collect();
    let back = inverse_flow(m, t1, &axioms, mc)?;
    let via_inverse = back.len() == axioms.len();
    if via_inverse != witness.is_none() {
        return Err(Error::Internal(
            "direct and inverse formulations of the morphism check disagree".into(),
        ));
    }
    let witness = match witness {
        None => None,
        Some((tc, model)) => {
            let original = t2
                .iter()
                .find(|c| translate_constraint(m, c).ok().as_ref() == Some(&tc))
                .cloned()
                .unwrap_or(tc);
            Some((original, model))
        }
    };
    Ok(MorphismCheck {
        holds: witness.is_none(),
        witness,
    })
}

/// Why a conservative-extension check failed.
#[derive(Clone, Debug)]
pub enum ConservativeFailure {
    /// Not a specification morphism: the translation of this axiom of `T₂` is
    /// not entailed by `T₁`; the structure is a countermodel over `𝒮₁`.
    NotMorphism(Constraint, Structure),
    /// `T₁` entails the translation of this pool constraint but `T₂` does not
    /// entail it; the structure is a model of `T₂` over `𝒮₂` refuting it.
    NewTheorem(Constraint, Structure),
}

#[derive(Clone, Debug)]
pub struct ConservativeCheck {
    pub conservative: bool,
    pub failure: Option<ConservativeFailure>,
}

/// Whether `T₁` is a conservative extension of `T₂` along `m`, relative to a
/// pool over `𝒮₂` and the model class `mc` over `𝒮₁` (and its pullback).
/// The pool is extended by `⊤ ⊢ ⊥` in each entity-type fiber of `𝒮₂`.
pub fn is_conservative_extension(
    m: &SchemaMorphism,
    t2: &Specification,
    t1: &Specification,
    pool2: &[Constraint],
    mc: &ModelClass,
) -> Result<ConservativeCheck> {
    let morphism = is_spec_morphism(m, t2, t1, mc)?;
    if let Some((c, model)) = morphism.witness {
        return Ok(ConservativeCheck {
            conservative: false,
            failure: Some(ConservativeFailure::NotMorphism(c, model)),
        });
    }
    // Falsum in every entity fiber joins the pool, so that an inconsistent
    // extension of a consistent specification is always caught.
    let mut pool: Vec<Constraint> = pool2.to_vec();
    for (_, sig) in m.source().entities() {
        let f = falsum(sig);
        if !pool.contains(&f) {
            pool.push(f);
        }
    }
    let back = inverse_flow(m, t1, &pool, mc)?;
    let mc2 = mc.pullback(m)?;
    for c in back.iter() {
        let e = entails_semantic(t2, c, &mc2)?;
        if let Some(model) = e.countermodel {
            return Ok(ConservativeCheck {
                conservative: false,
                failure: Some(ConservativeFailure::NewTheorem(c.clone(), model)),
            });
        }
    }
    Ok(ConservativeCheck {
        conservative: true,
        failure: None,
    })
}

/// `⊤ ⊢ ⊥` in a fiber: satisfied only where that fiber's tuple space is empty.
pub fn falsum(sig: &crate::kernel::Signature) -> Constraint {
    Constraint::new(
        Formula::Bottom(sig.clone()),
        crate::kernel::SignatureMorphism::identity(sig),
        Formula::Top(sig.clone()),
    )
}
