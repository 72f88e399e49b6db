//! Logics: a structure paired with a specification over the same schema.
//!
//! The order on logics over one structure is the specification order:
//! `L ≤ L′` when `L` entails every axiom of `L′`, so the logic with more
//! consequences sits lower. Joins and meets are pool-relative: a join keeps
//! the shared consequences in the pool, a meet unions the axioms.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::Constraint;
use crate::kernel::{Schema, Structure};
use crate::satisfaction::{intent, satisfies_spec, MorphismDefect, StructureMorphism};
use crate::spec_calc::{
    consequence, direct_flow, first_unentailed, inverse_flow, is_conservative_extension,
    is_spec_morphism, ConservativeCheck, ModelClass, Specification,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Logic {
    structure: Structure,
    spec: Specification,
}

impl Logic {
    pub fn new(structure: Structure, spec: Specification) -> Result<Self> {
        if structure.schema() != spec.schema() {
            return Err(Error::Internal(
                "a logic needs its structure and specification over one schema".into(),
            ));
        }
        Ok(Logic { structure, spec })
    }

    pub fn schema(&self) -> &Schema {
        self.structure.schema()
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn spec(&self) -> &Specification {
        &self.spec
    }

    /// The top logic on `m`: no axioms.
    pub fn top(m: &Structure) -> Logic {
        Logic {
            structure: m.clone(),
            spec: Specification::empty(m.schema().clone()),
        }
    }

    /// The bottom logic on `m` relative to a pool: every pool constraint.
    pub fn bottom(m: &Structure, pool: &[Constraint]) -> Result<Logic> {
        Logic::new(m.clone(), Specification::new(m.schema().clone(), pool.iter().cloned())?)
    }
}

pub fn is_sound(l: &Logic) -> Result<bool> {
    satisfies_spec(&l.structure, l.spec.iter())
}

/// The structure with the part of its intent lying in `pool`.
pub fn natural_logic(m: &Structure, pool: &[Constraint]) -> Result<Logic> {
    let members = intent(m, pool)?.members;
    Logic::new(m.clone(), Specification::new(m.schema().clone(), members)?)
}

/// Joins `l` with the natural logic of its structure: the pool constraints
/// that both follow from `l` and hold in the structure.
pub fn restrict(l: &Logic, pool: &[Constraint], mc: &ModelClass) -> Result<Logic> {
    let closed = consequence(&l.spec, pool, mc)?;
    let holds: BTreeSet<Constraint> = intent(&l.structure, pool)?.member_set();
    Logic::new(
        l.structure.clone(),
        Specification::new(
            l.schema().clone(),
            closed.iter().filter(|c| holds.contains(c)).cloned(),
        )?,
    )
}

/// `a ≤ b`: same structure and `a` entails every axiom of `b`.
pub fn logic_leq(a: &Logic, b: &Logic, mc: &ModelClass) -> Result<bool> {
    Ok(a.structure == b.structure && first_unentailed(&a.spec, &b.spec, mc)?.is_none())
}

/// Same structure and the same consequences within `pool`.
pub fn logic_equivalent_on(
    a: &Logic,
    b: &Logic,
    pool: &[Constraint],
    mc: &ModelClass,
) -> Result<bool> {
    Ok(a.structure == b.structure
        && consequence(&a.spec, pool, mc)? == consequence(&b.spec, pool, mc)?)
}

/// The pool-relative join: the pool consequences shared by both logics.
pub fn logic_join(a: &Logic, b: &Logic, pool: &[Constraint], mc: &ModelClass) -> Result<Logic> {
    same_structure(a, b)?;
    let ca = consequence(&a.spec, pool, mc)?;
    let cb = consequence(&b.spec, pool, mc)?;
    Logic::new(a.structure.clone(), ca.intersection(&cb))
}

/// The meet: the union of axioms.
pub fn logic_meet(a: &Logic, b: &Logic) -> Result<Logic> {
    same_structure(a, b)?;
    Logic::new(a.structure.clone(), a.spec.union(&b.spec)?)
}

fn same_structure(a: &Logic, b: &Logic) -> Result<()> {
    if a.structure != b.structure {
        return Err(Error::Internal("the logics sit over different structures".into()));
    }
    Ok(())
}

fn require_on(l: &Logic, m: &Structure, role: &str) -> Result<()> {
    if &l.structure != m {
        return Err(Error::Internal(format!(
            "the logic is not over the {role} structure of the morphism"
        )));
    }
    Ok(())
}

/// Carries `L₂` on `ℳ₂` to `ℳ₁` by direct flow of its specification.
pub fn direct_logic_flow(sm: &StructureMorphism, l2: &Logic) -> Result<Logic> {
    require_on(l2, sm.source(), "source")?;
    Logic::new(sm.target().clone(), direct_flow(sm.schema_morphism(), &l2.spec)?)
}

/// Pulls `L₁` on `ℳ₁` back to `ℳ₂` by inverse flow; `mc` is over `𝒮₁`.
pub fn inverse_logic_flow(
    sm: &StructureMorphism,
    l1: &Logic,
    pool2: &[Constraint],
    mc: &ModelClass,
) -> Result<Logic> {
    require_on(l1, sm.target(), "target")?;
    Logic::new(
        sm.source().clone(),
        inverse_flow(sm.schema_morphism(), &l1.spec, pool2, mc)?,
    )
}

/// Inverse flow followed by restriction to the sound region over `ℳ₂`.
/// `mc` is over `𝒮₁`; restriction uses its pullback.
pub fn inverse_sound_flow(
    sm: &StructureMorphism,
    l1: &Logic,
    pool2: &[Constraint],
    mc: &ModelClass,
) -> Result<Logic> {
    if !is_sound(l1)? {
        return Err(Error::Internal("sound inverse flow needs a sound logic".into()));
    }
    let back = inverse_logic_flow(sm, l1, pool2, mc)?;
    restrict(&back, pool2, &mc.pullback(sm.schema_morphism())?)
}

#[derive(Clone, Debug)]
pub struct LogicMorphismCheck {
    pub holds: bool,
    pub structure_defects: Vec<MorphismDefect>,
    /// An axiom of `L₂` whose translation `L₁` fails to entail, with a
    /// countermodel over `𝒮₁`.
    pub spec_witness: Option<(Constraint, Structure)>,
}

/// A valid structure morphism whose schema morphism is also a specification
/// morphism `L₂.spec → L₁.spec`.
pub fn is_logic_morphism(
    sm: &StructureMorphism,
    l2: &Logic,
    l1: &Logic,
    mc: &ModelClass,
) -> Result<LogicMorphismCheck> {
    require_on(l2, sm.source(), "source")?;
    require_on(l1, sm.target(), "target")?;
    let structure_defects = sm.vertical().validate();
    let spec = is_spec_morphism(sm.schema_morphism(), &l2.spec, &l1.spec, mc)?;
    Ok(LogicMorphismCheck {
        holds: structure_defects.is_empty() && spec.holds,
        structure_defects,
        spec_witness: spec.witness,
    })
}

/// Conservative extension of logics is that of their specifications.
pub fn is_conservative_logic_extension(
    sm: &StructureMorphism,
    l2: &Logic,
    l1: &Logic,
    pool2: &[Constraint],
    mc: &ModelClass,
) -> Result<ConservativeCheck> {
    require_on(l2, sm.source(), "source")?;
    require_on(l1, sm.target(), "target")?;
    is_conservative_extension(sm.schema_morphism(), &l2.spec, &l1.spec, pool2, mc)
}
