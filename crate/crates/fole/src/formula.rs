//! Formulas (defined entity types), sequents, constraints, signature
//! inference and translation along schema morphisms.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{Schema, SchemaMorphism, Signature, SignatureMorphism};

/// A formula over a schema. Equality is syntactic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Entity(String),
    Meet(Box<Formula>, Box<Formula>),
    Join(Box<Formula>, Box<Formula>),
    Top(Signature),
    Bottom(Signature),
    Neg(Box<Formula>),
    Impl(Box<Formula>, Box<Formula>),
    Diff(Box<Formula>, Box<Formula>),
    /// `Σ_h(φ)`, with `φ` over `h.target`; lands in `h.source`.
    Exists(SignatureMorphism, Box<Formula>),
    /// `Π_h(φ)`, with `φ` over `h.target`; lands in `h.source`.
    Forall(SignatureMorphism, Box<Formula>),
    /// `h*(φ′)`, with `φ′` over `h.source`; lands in `h.target`.
    Subst(SignatureMorphism, Box<Formula>),
}

impl Formula {
    pub fn entity(name: impl Into<String>) -> Formula {
        Formula::Entity(name.into())
    }

    pub fn meet(a: Formula, b: Formula) -> Formula {
        Formula::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Formula, b: Formula) -> Formula {
        Formula::Join(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Impl(Box::new(a), Box::new(b))
    }

    pub fn diff(a: Formula, b: Formula) -> Formula {
        Formula::Diff(Box::new(a), Box::new(b))
    }

    pub fn exists(h: SignatureMorphism, a: Formula) -> Formula {
        Formula::Exists(h, Box::new(a))
    }

    pub fn forall(h: SignatureMorphism, a: Formula) -> Formula {
        Formula::Forall(h, Box::new(a))
    }

    pub fn subst(h: SignatureMorphism, a: Formula) -> Formula {
        Formula::Subst(h, Box::new(a))
    }

    /// AST depth; atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Entity(_) | Formula::Top(_) | Formula::Bottom(_) => 1,
            Formula::Neg(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::Subst(_, a) => 1 + a.depth(),
            Formula::Meet(a, b)
            | Formula::Join(a, b)
            | Formula::Impl(a, b)
            | Formula::Diff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Entity(_) | Formula::Top(_) | Formula::Bottom(_) => 1,
            Formula::Neg(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::Subst(_, a) => 1 + a.size(),
            Formula::Meet(a, b)
            | Formula::Join(a, b)
            | Formula::Impl(a, b)
            | Formula::Diff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Entity type names mentioned anywhere in the formula.
    pub fn entities(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Entity(n) = f {
                out.push(n.as_str());
            }
        });
        out
    }

    /// Signature morphisms used at flow nodes.
    pub fn morphisms(&self) -> Vec<&SignatureMorphism> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            Formula::Exists(h, _) | Formula::Forall(h, _) | Formula::Subst(h, _) => out.push(h),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Entity(_) | Formula::Top(_) | Formula::Bottom(_) => {}
            Formula::Neg(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::Subst(_, a) => a.visit(f),
            Formula::Meet(a, b)
            | Formula::Join(a, b)
            | Formula::Impl(a, b)
            | Formula::Diff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

/// `σ̂(φ)`; rejects ill-typed trees.
pub fn signature_of(schema: &Schema, phi: &Formula) -> Result<Signature> {
    match phi {
        Formula::Entity(rho) => Ok(schema.sig_of(rho)?.clone()),
        Formula::Top(sig) | Formula::Bottom(sig) => {
            schema.check_signature(sig)?;
            Ok(sig.clone())
        }
        Formula::Neg(a) => signature_of(schema, a),
        Formula::Meet(a, b) | Formula::Join(a, b) | Formula::Impl(a, b) | Formula::Diff(a, b) => {
            let sa = signature_of(schema, a)?;
            let sb = signature_of(schema, b)?;
            if sa != sb {
                return Err(Error::SignatureMismatch {
                    context: format!("connective `{}`", connective_symbol(phi)),
                    expected: sa.to_string(),
                    found: sb.to_string(),
                });
            }
            Ok(sa)
        }
        Formula::Exists(h, a) | Formula::Forall(h, a) => {
            check_morphism(schema, h)?;
            let sa = signature_of(schema, a)?;
            if &sa != h.target() {
                return Err(Error::SignatureMismatch {
                    context: "quantifier body (must match the morphism target)".into(),
                    expected: h.target().to_string(),
                    found: sa.to_string(),
                });
            }
            Ok(h.source().clone())
        }
        Formula::Subst(h, a) => {
            check_morphism(schema, h)?;
            let sa = signature_of(schema, a)?;
            if &sa != h.source() {
                return Err(Error::SignatureMismatch {
                    context: "substitution body (must match the morphism source)".into(),
                    expected: h.source().to_string(),
                    found: sa.to_string(),
                });
            }
            Ok(h.target().clone())
        }
    }
}

fn check_morphism(schema: &Schema, h: &SignatureMorphism) -> Result<()> {
    schema.check_signature(h.source())?;
    schema.check_signature(h.target())
}

fn connective_symbol(phi: &Formula) -> &'static str {
    match phi {
        Formula::Meet(..) => "/\\",
        Formula::Join(..) => "\\/",
        Formula::Impl(..) => "=>",
        Formula::Diff(..) => "\\",
        _ => "?",
    }
}

/// `r̂(φ₂)`: entity types go through `r`; signatures at `⊤`, `⊥` and flow
/// nodes have their sorts renamed by `f`.
pub fn translate(m: &SchemaMorphism, phi: &Formula) -> Result<Formula> {
    let f = m.sort_map();
    let t = |a: &Formula| translate(m, a).map(Box::new);
    Ok(match phi {
        Formula::Entity(rho) => Formula::Entity(m.map_entity(rho)?.to_string()),
        Formula::Top(sig) => Formula::Top(sig.rename_sorts(f)),
        Formula::Bottom(sig) => Formula::Bottom(sig.rename_sorts(f)),
        Formula::Neg(a) => Formula::Neg(t(a)?),
        Formula::Meet(a, b) => Formula::Meet(t(a)?, t(b)?),
        Formula::Join(a, b) => Formula::Join(t(a)?, t(b)?),
        Formula::Impl(a, b) => Formula::Impl(t(a)?, t(b)?),
        Formula::Diff(a, b) => Formula::Diff(t(a)?, t(b)?),
        Formula::Exists(h, a) => Formula::Exists(h.rename_sorts(f), t(a)?),
        Formula::Forall(h, a) => Formula::Forall(h.rename_sorts(f), t(a)?),
        Formula::Subst(h, a) => Formula::Subst(h.rename_sorts(f), t(a)?),
    })
}

/// A within-fiber entailment `lhs ⊢ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl Sequent {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        Sequent { lhs, rhs }
    }

    /// Checks both sides and returns their common signature.
    pub fn check(&self, schema: &Schema) -> Result<Signature> {
        let l = signature_of(schema, &self.lhs)?;
        let r = signature_of(schema, &self.rhs)?;
        if l != r {
            return Err(Error::SignatureMismatch {
                context: "sequent".into(),
                expected: l.to_string(),
                found: r.to_string(),
            });
        }
        Ok(l)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.lhs, self.rhs)
    }
}

/// A constraint `φ′ -[h]-> φ`: asserts `Σ_h(φ) ⊢ φ′`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub source: Formula,
    pub h: SignatureMorphism,
    pub target: Formula,
}

impl Constraint {
    pub fn new(source: Formula, h: SignatureMorphism, target: Formula) -> Self {
        Constraint { source, h, target }
    }

    pub fn check(&self, schema: &Schema) -> Result<()> {
        let s = signature_of(schema, &self.source)?;
        let t = signature_of(schema, &self.target)?;
        if &s != self.h.source() {
            return Err(Error::SignatureMismatch {
                context: "constraint source".into(),
                expected: self.h.source().to_string(),
                found: s.to_string(),
            });
        }
        if &t != self.h.target() {
            return Err(Error::SignatureMismatch {
                context: "constraint target".into(),
                expected: self.h.target().to_string(),
                found: t.to_string(),
            });
        }
        Ok(())
    }

    /// The sequent this constraint asserts: `φ ⊢ φ′` for identity `h`,
    /// `Σ_h(φ) ⊢ φ′` otherwise.
    pub fn as_sequent(&self) -> Sequent {
        if self.h.is_identity() {
            Sequent::new(self.target.clone(), self.source.clone())
        } else {
            Sequent::new(
                Formula::exists(self.h.clone(), self.target.clone()),
                self.source.clone(),
            )
        }
    }

    /// The equivalent sequent on the target side, `φ ⊢ h*(φ′)`.
    pub fn as_target_sequent(&self) -> Sequent {
        if self.h.is_identity() {
            Sequent::new(self.target.clone(), self.source.clone())
        } else {
            Sequent::new(
                self.target.clone(),
                Formula::subst(self.h.clone(), self.source.clone()),
            )
        }
    }

    /// `φ″ -[h′]-> φ′` composed after `self = φ′ -[h]-> φ` gives `φ″ -[h′·h]-> φ`.
    /// `self` must be the later edge: `before.source == self.target`.
    pub fn compose_after(&self, before: &Constraint) -> Result<Constraint> {
        if before.source != self.target {
            return Err(Error::Internal(
                "constraints compose only through a shared formula".into(),
            ));
        }
        Ok(Constraint::new(
            self.source.clone(),
            self.h.compose(&before.h)?,
            before.target.clone(),
        ))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.h.is_identity() {
            write!(f, "{} |- {}", self.target, self.source)
        } else {
            write!(
                f,
                "{} <-[{}]- {}",
                self.source,
                MorphismRef(&self.h),
                self.target
            )
        }
    }
}

/// Sequent `lhs ⊢ rhs` as the identity constraint with target `lhs` and
/// source `rhs`.
pub fn sequent_as_constraint(schema: &Schema, q: &Sequent) -> Result<Constraint> {
    let sig = q.check(schema)?;
    Ok(Constraint::new(
        q.rhs.clone(),
        SignatureMorphism::identity(&sig),
        q.lhs.clone(),
    ))
}

/// Which side of a constraint an enfolding lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Folds a constraint into a single formula: `Σ_h(φ) ⇒ φ′` on the source
/// side, `φ ⇒ h*(φ′)` on the target side. Identity flows collapse to `φ ⇒ φ′`.
pub fn enfold(c: &Constraint, side: Side) -> Formula {
    if c.h.is_identity() {
        return Formula::implies(c.target.clone(), c.source.clone());
    }
    match side {
        Side::Source => Formula::implies(
            Formula::exists(c.h.clone(), c.target.clone()),
            c.source.clone(),
        ),
        Side::Target => Formula::implies(
            c.target.clone(),
            Formula::subst(c.h.clone(), c.source.clone()),
        ),
    }
}

/// Translates both formulas; the flow morphism has its sorts renamed.
pub fn translate_constraint(m: &SchemaMorphism, c: &Constraint) -> Result<Constraint> {
    Ok(Constraint::new(
        translate(m, &c.source)?,
        c.h.rename_sorts(m.sort_map()),
        translate(m, &c.target)?,
    ))
}

/// Renders a morphism reference for the surface syntax: its label when it has
/// one, otherwise the inline form `(i: N) -> (i: N, j: N) { i -> i; }`.
pub struct MorphismRef<'a>(pub &'a SignatureMorphism);

impl fmt::Display for MorphismRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.label() {
            Some(l) => write!(f, "{l}"),
            None => write_inline_morphism(f, self.0),
        }
    }
}

pub(crate) fn write_inline_morphism(
    f: &mut fmt::Formatter<'_>,
    h: &SignatureMorphism,
) -> fmt::Result {
    write!(f, "{} -> {} {{", h.source(), h.target())?;
    for (a, b) in h.map() {
        write!(f, " {a} -> {b};")?;
    }
    write!(f, " }}")
}

// Binding strength for printing: larger binds tighter.
fn level(phi: &Formula) -> u8 {
    match phi {
        Formula::Impl(..) => 1,
        Formula::Diff(..) => 2,
        Formula::Join(..) => 3,
        Formula::Meet(..) => 4,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, needs_parens: bool) -> fmt::Result {
    if needs_parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Entity(n) => write!(f, "{n}"),
            Formula::Top(sig) => write!(f, "top{sig}"),
            Formula::Bottom(sig) => write!(f, "bot{sig}"),
            Formula::Neg(a) => {
                write!(f, "!")?;
                write_child(f, a, level(a) < 5)
            }
            Formula::Meet(a, b)
            | Formula::Join(a, b)
            | Formula::Impl(a, b)
            | Formula::Diff(a, b) => {
                let p = level(self);
                write_child(f, a, level(a) < p)?;
                write!(f, " {} ", connective_symbol(self))?;
                // Binary operators associate to the left.
                write_child(f, b, level(b) <= p)
            }
            Formula::Exists(h, a) => write!(f, "exists[{}]({a})", MorphismRef(h)),
            Formula::Forall(h, a) => write!(f, "forall[{}]({a})", MorphismRef(h)),
            Formula::Subst(h, a) => write!(f, "subst[{}]({a})", MorphismRef(h)),
        }
    }
}
