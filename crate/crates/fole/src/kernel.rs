//! Core vocabulary: signatures, signature morphisms, schemas, schema morphisms,
//! type domains, tuples, universes and structures.
//!
//! Every value here is immutable once built. Constructors check the local
//! well-formedness conditions; the cross-object conditions (schema morphism
//! compatibility, list designation of a structure) are reported by the
//! `validate` functions so callers can list every violation at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// An ordered family of named, sorted indices `⟨I,s⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature {
    entries: Vec<(String, String)>,
}

impl Signature {
    pub fn new<I, A, B>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let entries: Vec<(String, String)> = entries
            .into_iter()
            .map(|(i, s)| (i.into(), s.into()))
            .collect();
        let mut seen = BTreeSet::new();
        for (i, _) in &entries {
            if !seen.insert(i.as_str()) {
                return Err(Error::DuplicateIndex(i.clone()));
            }
        }
        Ok(Signature { entries })
    }

    /// The empty signature, whose tuple space is the single empty tuple.
    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(i, _)| i.as_str())
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, s)| s.as_str())
    }

    pub fn sort_of(&self, index: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(i, _)| i == index)
            .map(|(_, s)| s.as_str())
    }

    pub fn has_index(&self, index: &str) -> bool {
        self.sort_of(index).is_some()
    }

    /// `Σ_f`: keep the index names, rename every sort through `f`.
    /// Sorts missing from `f` are left unchanged.
    pub fn rename_sorts(&self, f: &BTreeMap<String, String>) -> Signature {
        Signature {
            entries: self
                .entries
                .iter()
                .map(|(i, s)| (i.clone(), f.get(s).cloned().unwrap_or_else(|| s.clone())))
                .collect(),
        }
    }

    /// Drops the listed indices, keeping the order of the rest.
    pub fn without(&self, drop: &[String]) -> Signature {
        Signature {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| !drop.contains(i))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, (i, s)) in self.entries.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {s}")?;
        }
        write!(f, ")")
    }
}

/// A sort-preserving index map `h : ⟨I′,s′⟩ → ⟨I,s⟩`.
///
/// The optional label is the name the morphism was declared under. It is used
/// for printing only and takes no part in equality, ordering or hashing.
#[derive(Clone, Debug)]
pub struct SignatureMorphism {
    source: Signature,
    target: Signature,
    map: BTreeMap<String, String>,
    label: Option<String>,
}

impl SignatureMorphism {
    pub fn new<I, A, B>(source: Signature, target: Signature, map: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let map: BTreeMap<String, String> =
            map.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        for from in map.keys() {
            if !source.has_index(from) {
                return Err(Error::InvalidSignatureMorphism(format!(
                    "`{from}` is not an index of the source {source}"
                )));
            }
        }
        for (i, s) in source.entries() {
            let Some(j) = map.get(i) else {
                return Err(Error::InvalidSignatureMorphism(format!(
                    "index `{i}` of {source} is not mapped"
                )));
            };
            match target.sort_of(j) {
                None => {
                    return Err(Error::InvalidSignatureMorphism(format!(
                        "`{j}` is not an index of the target {target}"
                    )))
                }
                Some(t) if t != s => {
                    return Err(Error::InvalidSignatureMorphism(format!(
                        "`{i}: {s}` is sent to `{j}: {t}`, which changes its sort"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(SignatureMorphism {
            source,
            target,
            map,
            label: None,
        })
    }

    pub fn identity(sig: &Signature) -> Self {
        SignatureMorphism {
            source: sig.clone(),
            target: sig.clone(),
            map: sig.index_names().map(|i| (i.to_string(), i.to_string())).collect(),
            label: None,
        }
    }

    /// The inclusion of `source` into `target`, sending each index to the
    /// index of the same name.
    pub fn inclusion(source: &Signature, target: &Signature) -> Result<Self> {
        SignatureMorphism::new(
            source.clone(),
            target.clone(),
            source.index_names().map(|i| (i.to_string(), i.to_string())),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn without_label(mut self) -> Self {
        self.label = None;
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn apply(&self, index: &str) -> Option<&str> {
        self.map.get(index).map(String::as_str)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().all(|(a, b)| a == b)
    }

    /// For `self : I″ → I′` and `next : I′ → I`, the composite `I″ → I`
    /// sending `i″` to `next(self(i″))`. Tuple maps then satisfy
    /// `tuple_map(self.compose(next), t) = tuple_map(self, tuple_map(next, t))`.
    pub fn compose(&self, next: &SignatureMorphism) -> Result<Self> {
        if self.target != next.source {
            return Err(Error::SignatureMismatch {
                context: "morphism composition".into(),
                expected: next.source.to_string(),
                found: self.target.to_string(),
            });
        }
        let map = self
            .map
            .iter()
            .map(|(a, b)| (a.clone(), next.map[b].clone()));
        SignatureMorphism::new(self.source.clone(), next.target.clone(), map)
    }

    /// Renames the sorts of both endpoints through `f`. Index maps are
    /// untouched, so sort preservation is kept. The label survives only if
    /// no sort actually changed.
    pub fn rename_sorts(&self, f: &BTreeMap<String, String>) -> SignatureMorphism {
        let source = self.source.rename_sorts(f);
        let target = self.target.rename_sorts(f);
        let label = if source == self.source && target == self.target {
            self.label.clone()
        } else {
            None
        };
        SignatureMorphism {
            source,
            target,
            map: self.map.clone(),
            label,
        }
    }

    fn key(&self) -> (&Signature, &Signature, &BTreeMap<String, String>) {
        (&self.source, &self.target, &self.map)
    }
}

impl PartialEq for SignatureMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for SignatureMorphism {}

impl Hash for SignatureMorphism {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for SignatureMorphism {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SignatureMorphism {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// A schema `⟨R,σ,X⟩`. Entity types keep their declaration order, which is
/// the order model enumeration walks them in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Schema {
    sorts: BTreeSet<String>,
    entities: Vec<(String, Signature)>,
}

impl Schema {
    pub fn new<S, E>(sorts: S, entities: E) -> Result<Self>
    where
        S: IntoIterator,
        S::Item: Into<String>,
        E: IntoIterator<Item = (String, Signature)>,
    {
        let sorts: BTreeSet<String> = sorts.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (name, sig) in entities {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateEntity(name));
            }
            for s in sig.sorts() {
                if !sorts.contains(s) {
                    return Err(Error::UnknownSort(s.to_string()));
                }
            }
            list.push((name, sig));
        }
        Ok(Schema {
            sorts,
            entities: list,
        })
    }

    pub fn sorts(&self) -> &BTreeSet<String> {
        &self.sorts
    }

    pub fn entities(&self) -> &[(String, Signature)] {
        &self.entities
    }

    pub fn entity_names(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().map(|(n, _)| n.as_str())
    }

    pub fn sig_of(&self, entity: &str) -> Result<&Signature> {
        self.entities
            .iter()
            .find(|(n, _)| n == entity)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))
    }

    pub fn has_entity(&self, entity: &str) -> bool {
        self.entities.iter().any(|(n, _)| n == entity)
    }

    /// Checks that a signature only uses sorts of this schema.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        for s in sig.sorts() {
            if !self.sorts.contains(s) {
                return Err(Error::UnknownSort(s.to_string()));
            }
        }
        Ok(())
    }
}

/// A schema morphism `⟨r,f⟩ : 𝒮₂ ⇒ 𝒮₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaMorphism {
    source: Schema,
    target: Schema,
    entity_map: BTreeMap<String, String>,
    sort_map: BTreeMap<String, String>,
}

/// One entity type whose translated signature does not match its image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismViolation {
    pub entity: String,
    pub image: String,
    pub expected: Signature,
    pub found: Signature,
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entity `{}` maps to `{}`: translated signature {} but `{}` has {}",
            self.entity, self.image, self.expected, self.image, self.found
        )
    }
}

impl SchemaMorphism {
    /// Builds the morphism, requiring both maps to be total and to land in the
    /// target schema. Signature compatibility is left to [`validate_schema_morphism`].
    pub fn new(
        source: Schema,
        target: Schema,
        entity_map: BTreeMap<String, String>,
        sort_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        for x in source.sorts() {
            match sort_map.get(x) {
                None => {
                    return Err(Error::InvalidSchemaMorphism(format!("sort `{x}` is not mapped")))
                }
                Some(y) if !target.sorts().contains(y) => {
                    return Err(Error::InvalidSchemaMorphism(format!(
                        "sort `{x}` maps to `{y}`, which the target schema lacks"
                    )))
                }
                Some(_) => {}
            }
        }
        for rho in source.entity_names() {
            match entity_map.get(rho) {
                None => {
                    return Err(Error::InvalidSchemaMorphism(format!(
                        "entity type `{rho}` is not mapped"
                    )))
                }
                Some(r) if !target.has_entity(r) => {
                    return Err(Error::InvalidSchemaMorphism(format!(
                        "entity type `{rho}` maps to `{r}`, which the target schema lacks"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(SchemaMorphism {
            source,
            target,
            entity_map,
            sort_map,
        })
    }

    pub fn identity(schema: &Schema) -> Self {
        SchemaMorphism {
            source: schema.clone(),
            target: schema.clone(),
            entity_map: schema
                .entity_names()
                .map(|n| (n.to_string(), n.to_string()))
                .collect(),
            sort_map: schema.sorts().iter().map(|s| (s.clone(), s.clone())).collect(),
        }
    }

    pub fn source(&self) -> &Schema {
        &self.source
    }

    pub fn target(&self) -> &Schema {
        &self.target
    }

    pub fn entity_map(&self) -> &BTreeMap<String, String> {
        &self.entity_map
    }

    pub fn sort_map(&self) -> &BTreeMap<String, String> {
        &self.sort_map
    }

    pub fn map_entity(&self, rho: &str) -> Result<&str> {
        self.entity_map
            .get(rho)
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownEntity(rho.to_string()))
    }

    /// `Σ_f` on signatures.
    pub fn map_signature(&self, sig: &Signature) -> Signature {
        sig.rename_sorts(&self.sort_map)
    }

    /// `self` followed by `next`: for `self : 𝒮₃ ⇒ 𝒮₂` and `next : 𝒮₂ ⇒ 𝒮₁`.
    pub fn then(&self, next: &SchemaMorphism) -> Result<SchemaMorphism> {
        if self.target != next.source {
            return Err(Error::InvalidSchemaMorphism(
                "composite of morphisms whose schemas do not meet".into(),
            ));
        }
        SchemaMorphism::new(
            self.source.clone(),
            next.target.clone(),
            self.entity_map
                .iter()
                .map(|(a, b)| (a.clone(), next.entity_map[b].clone()))
                .collect(),
            self.sort_map
                .iter()
                .map(|(a, b)| (a.clone(), next.sort_map[b].clone()))
                .collect(),
        )
    }
}

/// Reports every entity type `ρ` with `σ₁(r(ρ)) ≠ Σ_f(σ₂(ρ))`.
pub fn validate_schema_morphism(m: &SchemaMorphism) -> Vec<MorphismViolation> {
    let mut out = Vec::new();
    for (rho, sig) in m.source.entities() {
        let image = &m.entity_map[rho];
        let expected = m.map_signature(sig);
        let found = m
            .target
            .sig_of(image)
            .expect("constructor checked the entity map")
            .clone();
        if expected != found {
            out.push(MorphismViolation {
                entity: rho.clone(),
                image: image.clone(),
                expected,
                found,
            });
        }
    }
    out
}

/// A type domain `⟨X,Y,⊨_𝒜⟩` given by explicit finite sort extents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TypeDomain {
    values: BTreeSet<String>,
    extents: BTreeMap<String, BTreeSet<String>>,
}

impl TypeDomain {
    pub fn new(
        values: BTreeSet<String>,
        extents: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<Self> {
        for (x, ext) in &extents {
            if let Some(v) = ext.iter().find(|v| !values.contains(*v)) {
                return Err(Error::InvalidTypeDomain(format!(
                    "value \"{v}\" in the extent of `{x}` is not in the value set"
                )));
            }
        }
        Ok(TypeDomain { values, extents })
    }

    /// A domain whose value set is the union of the given extents.
    pub fn from_extents<I, S, V>(extents: I) -> Self
    where
        I: IntoIterator<Item = (S, V)>,
        S: Into<String>,
        V: IntoIterator,
        V::Item: Into<String>,
    {
        let extents: BTreeMap<String, BTreeSet<String>> = extents
            .into_iter()
            .map(|(x, vs)| (x.into(), vs.into_iter().map(Into::into).collect()))
            .collect();
        let values = extents.values().flatten().cloned().collect();
        TypeDomain { values, extents }
    }

    pub fn values(&self) -> &BTreeSet<String> {
        &self.values
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.extents.keys().map(String::as_str)
    }

    pub fn extents(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.extents
    }

    pub fn extent(&self, sort: &str) -> Result<&BTreeSet<String>> {
        self.extents
            .get(sort)
            .ok_or_else(|| Error::UnknownSort(sort.to_string()))
    }

    pub fn covers(&self, schema: &Schema) -> Result<()> {
        for x in schema.sorts() {
            self.extent(x)?;
        }
        Ok(())
    }

    /// The domain over the source sorts of `m` with `extent₂(x) = extent₁(f(x))`
    /// and the same value set.
    pub fn pullback(&self, m: &SchemaMorphism) -> Result<TypeDomain> {
        let mut extents = BTreeMap::new();
        for x in m.source().sorts() {
            let y = &m.sort_map()[x];
            extents.insert(x.clone(), self.extent(y)?.clone());
        }
        Ok(TypeDomain {
            values: self.values.clone(),
            extents,
        })
    }

    /// Checks `extent₂(x) = extent₁(f(x))` over a shared value set.
    pub fn check_compatible(&self, m: &SchemaMorphism, target: &TypeDomain) -> Result<()> {
        if self.values != target.values {
            return Err(Error::IncompatibleDomain(
                "the two domains have different value sets".into(),
            ));
        }
        for x in m.source().sorts() {
            let y = &m.sort_map()[x];
            if self.extent(x)? != target.extent(y)? {
                return Err(Error::IncompatibleDomain(format!(
                    "extent of `{x}` differs from the extent of its image `{y}`"
                )));
            }
        }
        Ok(())
    }
}

/// A tuple `⟨I,t⟩`: a finite family of values indexed by names.
///
/// Tuples carry index names and values only. Which sorts the values belong to
/// is a property checked against a signature, so the same tuple can be read
/// over any signature with these index names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Tuple(BTreeMap<String, String>);

impl Tuple {
    pub fn new<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        Tuple(pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect())
    }

    pub fn empty() -> Self {
        Tuple::default()
    }

    pub fn get(&self, index: &str) -> Option<&str> {
        self.0.get(index).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the index names match `sig` exactly and each value lies in the
    /// extent of its sort.
    pub fn conforms(&self, domain: &TypeDomain, sig: &Signature) -> Result<(), TupleDefect> {
        if self.0.len() != sig.len() || sig.index_names().any(|i| !self.0.contains_key(i)) {
            return Err(TupleDefect::WrongIndices);
        }
        for (i, s) in sig.entries() {
            let v = &self.0[i];
            let ext = domain
                .extent(s)
                .map_err(|_| TupleDefect::UnknownSort(s.clone()))?;
            if !ext.contains(v) {
                return Err(TupleDefect::OutsideExtent {
                    index: i.clone(),
                    value: v.clone(),
                    sort: s.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Rendered as `(i="a", j="b")` in index-name order.
impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, (i, v)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}={}", quote(v))?;
        }
        write!(f, ")")
    }
}

/// Double-quotes a string, escaping backslashes and quotes.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Why a tuple fails to lie in a tuple space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TupleDefect {
    WrongIndices,
    UnknownSort(String),
    OutsideExtent {
        index: String,
        value: String,
        sort: String,
    },
}

impl fmt::Display for TupleDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TupleDefect::WrongIndices => write!(f, "index names differ from the signature"),
            TupleDefect::UnknownSort(s) => write!(f, "sort `{s}` has no extent"),
            TupleDefect::OutsideExtent { index, value, sort } => {
                write!(f, "value \"{value}\" at `{index}` is outside the extent of `{sort}`")
            }
        }
    }
}

/// `tup_𝒜(I,s)`: every tuple over `sig`, in lexicographic order of the
/// signature's indices and of each extent.
pub fn tuple_space(domain: &TypeDomain, sig: &Signature) -> Result<Vec<Tuple>> {
    let mut columns = Vec::with_capacity(sig.len());
    for (i, s) in sig.entries() {
        columns.push((i, domain.extent(s)?));
    }
    let mut out = vec![BTreeMap::new()];
    for (i, ext) in columns {
        let mut next = Vec::with_capacity(out.len() * ext.len());
        for partial in &out {
            for v in ext {
                let mut t = partial.clone();
                t.insert(i.clone(), v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(Tuple).collect())
}

/// `tup(h)`: sends `t` over `h.target` to `i′ ↦ t(h(i′))` over `h.source`.
pub fn tuple_map(h: &SignatureMorphism, t: &Tuple) -> Result<Tuple> {
    if t.len() != h.target().len() || h.target().index_names().any(|i| t.get(i).is_none()) {
        return Err(Error::TupleMismatch {
            tuple: t.to_string(),
            signature: h.target().to_string(),
        });
    }
    Ok(Tuple(
        h.map()
            .iter()
            .map(|(src, tgt)| (src.clone(), t.0[tgt].clone()))
            .collect(),
    ))
}

/// A universe `⟨K,τ,Y⟩`: keys with their descriptor tuples.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Universe {
    tau: BTreeMap<String, Tuple>,
}

impl Universe {
    pub fn new(tau: BTreeMap<String, Tuple>) -> Self {
        Universe { tau }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.tau.keys().map(String::as_str)
    }

    pub fn tuple_of(&self, key: &str) -> Result<&Tuple> {
        self.tau
            .get(key)
            .ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tuple)> {
        self.tau.iter().map(|(k, t)| (k.as_str(), t))
    }

    pub fn insert(&mut self, key: impl Into<String>, tuple: Tuple) {
        self.tau.insert(key.into(), tuple);
    }

    pub fn is_injective(&self) -> bool {
        let images: BTreeSet<&Tuple> = self.tau.values().collect();
        images.len() == self.tau.len()
    }
}

/// An ERA structure: a universe classified by the entity types of a schema,
/// over a type domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    schema: Schema,
    domain: TypeDomain,
    universe: Universe,
    classes: BTreeMap<String, BTreeSet<String>>,
}

/// One failure of the list-designation condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureViolation {
    pub key: String,
    pub entity: String,
    pub reason: StructureDefect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureDefect {
    UnknownKey,
    UnknownEntity,
    WrongSignature,
    OutsideExtent(String),
    DomainLacksSort(String),
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match &self.reason {
            StructureDefect::UnknownKey => "the key is not in the universe".to_string(),
            StructureDefect::UnknownEntity => "the entity type is not in the schema".to_string(),
            StructureDefect::WrongSignature => {
                "its tuple has the wrong index names for the entity type".to_string()
            }
            StructureDefect::OutsideExtent(d) => d.clone(),
            StructureDefect::DomainLacksSort(s) => format!("the type domain has no sort `{s}`"),
        };
        write!(f, "{} ⊨ {}: {}", self.key, self.entity, why)
    }
}

impl Structure {
    /// Assembles a structure without checking list designation; see
    /// [`validate_structure`] and [`Structure::new`].
    pub fn assemble(
        schema: Schema,
        domain: TypeDomain,
        universe: Universe,
        classes: BTreeMap<String, BTreeSet<String>>,
    ) -> Self {
        Structure {
            schema,
            domain,
            universe,
            classes,
        }
    }

    /// Assembles and validates.
    pub fn new(
        schema: Schema,
        domain: TypeDomain,
        universe: Universe,
        classes: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<Self> {
        let s = Structure::assemble(schema, domain, universe, classes);
        let violations = validate_structure(&s);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidStructure(v.to_string()));
        }
        Ok(s)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn domain(&self) -> &TypeDomain {
        &self.domain
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn tuple_of(&self, key: &str) -> Result<&Tuple> {
        self.universe.tuple_of(key)
    }

    /// Entity types each key is classified under; keys with no type are absent.
    pub fn classification(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.classes
    }

    pub fn classifies(&self, key: &str, entity: &str) -> bool {
        self.classes.get(key).is_some_and(|s| s.contains(entity))
    }

    /// `ext_ℰ(ρ)`.
    pub fn keys_of(&self, entity: &str) -> BTreeSet<String> {
        self.classes
            .iter()
            .filter(|(_, es)| es.contains(entity))
            .map(|(k, _)| k.clone())
            .collect()
    }

}

/// Lists every `(k,ρ)` breaking list designation, plus sorts the domain lacks.
pub fn validate_structure(m: &Structure) -> Vec<StructureViolation> {
    let mut out = Vec::new();
    for x in m.schema.sorts() {
        if m.domain.extent(x).is_err() {
            out.push(StructureViolation {
                key: String::new(),
                entity: String::new(),
                reason: StructureDefect::DomainLacksSort(x.clone()),
            });
        }
    }
    for (k, entities) in &m.classes {
        for rho in entities {
            let reason = match (m.universe.tuple_of(k), m.schema.sig_of(rho)) {
                (Err(_), _) => Some(StructureDefect::UnknownKey),
                (_, Err(_)) => Some(StructureDefect::UnknownEntity),
                (Ok(t), Ok(sig)) => match t.conforms(&m.domain, sig) {
                    Ok(()) => None,
                    Err(TupleDefect::WrongIndices) => Some(StructureDefect::WrongSignature),
                    Err(d) => Some(StructureDefect::OutsideExtent(d.to_string())),
                },
            };
            if let Some(reason) = reason {
                out.push(StructureViolation {
                    key: k.clone(),
                    entity: rho.clone(),
                    reason,
                });
            }
        }
    }
    out
}
