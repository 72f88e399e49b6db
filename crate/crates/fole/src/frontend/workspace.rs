//! Named, validated workspace items and their elaboration from parsed source.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::error::{Diagnostic, Error, Result, SourceSpan};
use crate::formula::{signature_of, Constraint, Formula};
use crate::kernel::{
    validate_schema_morphism, validate_structure, Schema, SchemaMorphism, Signature,
    SignatureMorphism, Structure, Tuple, TypeDomain, Universe,
};
use crate::logic::Logic;
use crate::spec_calc::Specification;

use super::lexer::lex;
use super::parser::{
    BinOp, FlowKind, Item, MapKind, Parser, RawConstraint, RawExpr, RawMorph, RawSig, SchemaEntry,
    Scope,
};

/// Name under which the schema built from top-level `sort` and `entity`
/// declarations is referenced.
pub const DEFAULT_SCHEMA: &str = "default";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Schema,
    Domain,
    SigMorph,
    Morphism,
    Formula,
    Constraint,
    Spec,
    Structure,
    Logic,
}

impl Kind {
    pub fn word(self) -> &'static str {
        match self {
            Kind::Schema => "schema",
            Kind::Domain => "domain",
            Kind::SigMorph => "sigmorph",
            Kind::Morphism => "morphism",
            Kind::Formula => "formula",
            Kind::Constraint => "constraint",
            Kind::Spec => "spec",
            Kind::Structure => "structure",
            Kind::Logic => "logic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Entry<T> {
    pub value: T,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismDecl {
    pub source: String,
    pub target: String,
    pub morphism: SchemaMorphism,
}

/// An item typed over a named schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scoped<T> {
    pub schema: String,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureDecl {
    pub schema: String,
    pub domain: String,
    pub structure: Structure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicDecl {
    pub structure: String,
    pub spec: String,
    pub logic: Logic,
}

type Table<T> = BTreeMap<String, Entry<T>>;

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub default_schema: Schema,
    pub schemas: Table<Schema>,
    pub domains: Table<TypeDomain>,
    pub sigmorphs: Table<SignatureMorphism>,
    pub morphisms: Table<MorphismDecl>,
    pub formulas: Table<Scoped<Formula>>,
    pub constraints: Table<Scoped<Constraint>>,
    pub specs: Table<Scoped<Specification>>,
    pub structures: Table<StructureDecl>,
    pub logics: Table<LogicDecl>,
    /// Declaration order, for printing.
    pub order: Vec<(Kind, String)>,
}

fn values<T: Clone>(t: &Table<T>) -> BTreeMap<&String, &T> {
    t.iter().map(|(k, e)| (k, &e.value)).collect()
}

impl Workspace {
    /// Item-wise equality, ignoring source positions.
    pub fn same_items(&self, other: &Workspace) -> bool {
        self.default_schema == other.default_schema
            && values(&self.schemas) == values(&other.schemas)
            && values(&self.domains) == values(&other.domains)
            && values(&self.sigmorphs) == values(&other.sigmorphs)
            && values(&self.morphisms) == values(&other.morphisms)
            && values(&self.formulas) == values(&other.formulas)
            && values(&self.constraints) == values(&other.constraints)
            && values(&self.specs) == values(&other.specs)
            && values(&self.structures) == values(&other.structures)
            && values(&self.logics) == values(&other.logics)
    }

    pub fn item_count(&self) -> usize {
        self.order.len()
    }

    pub fn schema(&self, name: &str) -> Result<&Schema> {
        if name == DEFAULT_SCHEMA {
            return Ok(&self.default_schema);
        }
        self.schemas
            .get(name)
            .map(|e| &e.value)
            .ok_or_else(|| lookup_error(Kind::Schema, name))
    }

    pub fn domain(&self, name: &str) -> Result<&TypeDomain> {
        get(&self.domains, Kind::Domain, name)
    }

    pub fn sigmorph(&self, name: &str) -> Result<&SignatureMorphism> {
        get(&self.sigmorphs, Kind::SigMorph, name)
    }

    pub fn morphism(&self, name: &str) -> Result<&MorphismDecl> {
        get(&self.morphisms, Kind::Morphism, name)
    }

    pub fn formula(&self, name: &str) -> Result<&Scoped<Formula>> {
        get(&self.formulas, Kind::Formula, name)
    }

    pub fn constraint(&self, name: &str) -> Result<&Scoped<Constraint>> {
        get(&self.constraints, Kind::Constraint, name)
    }

    pub fn spec(&self, name: &str) -> Result<&Scoped<Specification>> {
        get(&self.specs, Kind::Spec, name)
    }

    pub fn structure(&self, name: &str) -> Result<&StructureDecl> {
        get(&self.structures, Kind::Structure, name)
    }

    pub fn logic(&self, name: &str) -> Result<&LogicDecl> {
        get(&self.logics, Kind::Logic, name)
    }

    /// The name of the schema `s` is stored under, if any.
    pub fn schema_name_of(&self, s: &Schema) -> Option<String> {
        if s == &self.default_schema {
            return Some(DEFAULT_SCHEMA.to_string());
        }
        self.schemas
            .iter()
            .find(|(_, e)| &e.value == s)
            .map(|(n, _)| n.clone())
    }

    /// Replaces a structure's contents, keeping its declaration.
    pub fn replace_structure(&mut self, name: &str, structure: Structure) -> Result<()> {
        let e = self
            .structures
            .get_mut(name)
            .ok_or_else(|| lookup_error(Kind::Structure, name))?;
        e.value.structure = structure;
        Ok(())
    }

    /// Parses an expression over the named schema, resolving names against
    /// this workspace.
    pub fn parse_formula(&self, schema: &str, text: &str) -> Result<Formula> {
        let raw = parse_fragment(text, |p| p.expr())?;
        let sch = self.schema(schema)?.clone();
        let f = self
            .resolve_expr(&sch, schema, &raw)
            .map_err(|d| Error::Diagnostics(vec![d]))?;
        signature_of(&sch, &f)
            .map_err(|e| Error::Diagnostics(vec![Diagnostic::new(argument_span(text), e.to_string())]))?;
        Ok(f)
    }

    /// Parses a constraint body (`A |- B` or `S <-[h]- T`) over the named
    /// schema.
    pub fn parse_constraint(&self, schema: &str, text: &str) -> Result<Constraint> {
        let raw = parse_fragment(text, |p| p.constraint_body())?;
        let sch = self.schema(schema)?.clone();
        self.resolve_constraint(&sch, schema, &raw, &argument_span(text))
            .map_err(|d| Error::Diagnostics(vec![d]))
    }
}

fn argument_span(text: &str) -> SourceSpan {
    SourceSpan::new("<argument>", 1, 1, text.chars().count() + 1)
}

fn parse_fragment<T>(
    text: &str,
    f: impl FnOnce(&mut Parser) -> std::result::Result<T, Diagnostic>,
) -> Result<T> {
    let (toks, mut errs) = lex("<argument>", text);
    let mut p = Parser::new(toks);
    let out = f(&mut p);
    errs.extend(std::mem::take(&mut p.errors));
    match out {
        Ok(r) if errs.is_empty() && p.at_end() => Ok(r),
        Ok(_) if errs.is_empty() => Err(Error::Diagnostics(vec![Diagnostic::new(
            argument_span(text),
            "unexpected text after the end of the expression",
        )])),
        Ok(_) => Err(Error::Diagnostics(errs)),
        Err(d) => {
            errs.push(d);
            Err(Error::Diagnostics(errs))
        }
    }
}

fn lookup_error(kind: Kind, name: &str) -> Error {
    Error::Diagnostics(vec![Diagnostic::new(
        SourceSpan::new("<argument>", 0, 0, 0),
        format!("no {} named `{name}`", kind.word()),
    )])
}

fn get<'a, T>(t: &'a Table<T>, kind: Kind, name: &str) -> Result<&'a T> {
    t.get(name)
        .map(|e| &e.value)
        .ok_or_else(|| lookup_error(kind, name))
}

/// Parses workspace text; `include` paths resolve against the working
/// directory.
pub fn parse_workspace(text: &str) -> std::result::Result<Workspace, Vec<Diagnostic>> {
    parse_named("<input>", text, None)
}

/// Reads and parses a workspace file and everything it includes.
pub fn load_workspace(path: &Path) -> std::result::Result<Workspace, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic::new(
            SourceSpan::new(path.display().to_string(), 0, 0, 0),
            format!("cannot read: {e}"),
        )]
    })?;
    parse_named(&path.display().to_string(), &text, Some(path))
}

fn parse_named(
    file: &str,
    text: &str,
    path: Option<&Path>,
) -> std::result::Result<Workspace, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut items = Vec::new();
    let mut stack = Vec::new();
    if let Some(p) = path {
        stack.push(std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf()));
    }
    collect_items(file, text, path, &mut stack, &mut items, &mut errors);
    let mut ws = Workspace::default();
    let mut el = Elaborator {
        ws: &mut ws,
        errors: &mut errors,
    };
    el.run(items);
    if errors.is_empty() {
        Ok(ws)
    } else {
        Err(errors)
    }
}

/// Parses one file and splices the items of its includes in place.
fn collect_items(
    file: &str,
    text: &str,
    path: Option<&Path>,
    stack: &mut Vec<PathBuf>,
    items: &mut Vec<Item>,
    errors: &mut Vec<Diagnostic>,
) {
    let (toks, lex_errors) = lex(file, text);
    errors.extend(lex_errors);
    let mut p = Parser::new(toks);
    let parsed = p.items();
    errors.extend(p.errors);
    for item in parsed {
        let Item::Include { path: inc, span } = &item else {
            items.push(item);
            continue;
        };
        let base = path
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let target = base.join(inc);
        let canon = match std::fs::canonicalize(&target) {
            Ok(c) => c,
            Err(e) => {
                errors.push(Diagnostic::new(
                    span.clone(),
                    format!("cannot include \"{}\": {e}", target.display()),
                ));
                continue;
            }
        };
        if stack.contains(&canon) {
            errors.push(Diagnostic::new(
                span.clone(),
                format!("include cycle through \"{}\"", target.display()),
            ));
            continue;
        }
        match std::fs::read_to_string(&canon) {
            Ok(sub) => {
                stack.push(canon);
                collect_items(
                    &target.display().to_string(),
                    &sub,
                    Some(&target),
                    stack,
                    items,
                    errors,
                );
                stack.pop();
            }
            Err(e) => errors.push(Diagnostic::new(
                span.clone(),
                format!("cannot read \"{}\": {e}", target.display()),
            )),
        }
    }
}

struct Elaborator<'a> {
    ws: &'a mut Workspace,
    errors: &'a mut Vec<Diagnostic>,
}

fn diag(span: &SourceSpan, msg: impl std::fmt::Display) -> Diagnostic {
    Diagnostic::new(span.clone(), msg.to_string())
}

type DResult<T> = std::result::Result<T, Diagnostic>;

impl Elaborator<'_> {
    fn run(&mut self, items: Vec<Item>) {
        self.default_schema(&items);
        for item in items {
            if let Err(d) = self.item(item) {
                self.errors.push(d);
            }
        }
    }

    /// Top-level sorts and entity types form the default schema, wherever in
    /// the file they appear.
    fn default_schema(&mut self, items: &[Item]) {
        let mut sorts = BTreeSet::new();
        let mut entities: Vec<(String, Signature)> = Vec::new();
        for item in items {
            match item {
                Item::Sort { name, .. } => {
                    sorts.insert(name.clone());
                }
                Item::Entity { name, sig, span } => {
                    if entities.iter().any(|(n, _)| n == name) {
                        self.errors.push(diag(span, format!("entity type `{name}` is declared twice")));
                        continue;
                    }
                    match self.signature(sig, None) {
                        Ok(s) => {
                            sorts.extend(s.sorts().map(str::to_string));
                            entities.push((name.clone(), s));
                        }
                        Err(d) => self.errors.push(d),
                    }
                }
                _ => {}
            }
        }
        match Schema::new(sorts, entities) {
            Ok(s) => self.ws.default_schema = s,
            Err(e) => self.errors.push(Diagnostic::new(SourceSpan::default(), e.to_string())),
        }
    }

    fn declare(&mut self, kind: Kind, name: &str, span: &SourceSpan) -> DResult<()> {
        let taken = match kind {
            Kind::Schema => self.ws.schemas.contains_key(name) || name == DEFAULT_SCHEMA,
            Kind::Domain => self.ws.domains.contains_key(name),
            Kind::SigMorph => self.ws.sigmorphs.contains_key(name),
            Kind::Morphism => self.ws.morphisms.contains_key(name),
            Kind::Formula => self.ws.formulas.contains_key(name),
            Kind::Constraint => self.ws.constraints.contains_key(name),
            Kind::Spec => self.ws.specs.contains_key(name),
            Kind::Structure => self.ws.structures.contains_key(name),
            Kind::Logic => self.ws.logics.contains_key(name),
        };
        if taken {
            return Err(diag(span, format!("{} `{name}` is already declared", kind.word())));
        }
        self.ws.order.push((kind, name.to_string()));
        Ok(())
    }

    /// Signatures check their sorts against `schema` when one is given.
    fn signature(&self, raw: &RawSig, schema: Option<&Schema>) -> DResult<Signature> {
        let sig = Signature::new(raw.entries.iter().cloned()).map_err(|e| diag(&raw.span, e))?;
        if let Some(s) = schema {
            s.check_signature(&sig).map_err(|e| diag(&raw.span, e))?;
        }
        Ok(sig)
    }

    /// Annotation-less items live in the default schema unless it is empty
    /// and exactly one named schema exists.
    fn scope(&self, scope: &Scope, span: &SourceSpan) -> DResult<(String, Schema)> {
        match scope {
            Some((n, sp)) => {
                let s = self.ws.schema(n).map_err(|_| diag(sp, format!("no schema named `{n}`")))?;
                Ok((n.clone(), s.clone()))
            }
            None => {
                let d = &self.ws.default_schema;
                if d.sorts().is_empty() && d.entities().is_empty() && self.ws.schemas.len() == 1 {
                    let (n, e) = self.ws.schemas.iter().next().expect("one schema");
                    return Ok((n.clone(), e.value.clone()));
                }
                if d.sorts().is_empty() && d.entities().is_empty() && self.ws.schemas.len() > 1 {
                    return Err(diag(span, "several schemas are declared; name one with `: SCHEMA`"));
                }
                Ok((DEFAULT_SCHEMA.to_string(), d.clone()))
            }
        }
    }

    fn item(&mut self, item: Item) -> DResult<()> {
        match item {
            Item::Include { .. } | Item::Sort { .. } | Item::Entity { .. } => Ok(()),
            Item::Schema {
                name,
                entries,
                span,
            } => {
                let mut sorts = BTreeSet::new();
                let mut ents: Vec<(String, Signature)> = Vec::new();
                for e in &entries {
                    match e {
                        SchemaEntry::Sort(s, _) => {
                            sorts.insert(s.clone());
                        }
                        SchemaEntry::Entity(n, sig, sp) => {
                            let sig = match sig {
                                Some(raw) => self.signature(raw, None)?,
                                None => self
                                    .ws
                                    .default_schema
                                    .sig_of(n)
                                    .map_err(|_| {
                                        diag(sp, format!("entity type `{n}` has no top-level declaration"))
                                    })?
                                    .clone(),
                            };
                            if ents.iter().any(|(m, _)| m == n) {
                                return Err(diag(sp, format!("entity type `{n}` is declared twice")));
                            }
                            sorts.extend(sig.sorts().map(str::to_string));
                            ents.push((n.clone(), sig));
                        }
                    }
                }
                let schema = Schema::new(sorts, ents).map_err(|e| diag(&span, e))?;
                self.declare(Kind::Schema, &name, &span)?;
                self.ws.schemas.insert(name, Entry { value: schema, span });
                Ok(())
            }
            Item::Domain {
                name,
                extents,
                span,
            } => {
                let mut seen = BTreeSet::new();
                for (s, _, sp) in &extents {
                    if !seen.insert(s.clone()) {
                        return Err(diag(sp, format!("sort `{s}` is given two extents")));
                    }
                }
                let d = TypeDomain::from_extents(extents.into_iter().map(|(s, v, _)| (s, v)));
                self.declare(Kind::Domain, &name, &span)?;
                self.ws.domains.insert(name, Entry { value: d, span });
                Ok(())
            }
            Item::SigMorph {
                name,
                source,
                target,
                map,
                span,
            } => {
                let h = self.inline_morph(&source, &target, &map, &span, None)?;
                self.declare(Kind::SigMorph, &name, &span)?;
                self.ws.sigmorphs.insert(
                    name.clone(),
                    Entry {
                        value: h.with_label(name),
                        span,
                    },
                );
                Ok(())
            }
            Item::Morphism {
                name,
                source,
                target,
                entries,
                span,
            } => {
                let s2 = self
                    .ws
                    .schema(&source.0)
                    .map_err(|_| diag(&source.1, format!("no schema named `{}`", source.0)))?
                    .clone();
                let s1 = self
                    .ws
                    .schema(&target.0)
                    .map_err(|_| diag(&target.1, format!("no schema named `{}`", target.0)))?
                    .clone();
                let mut em = BTreeMap::new();
                let mut sm = BTreeMap::new();
                for (kind, a, b, sp) in entries {
                    let map = if kind == MapKind::Entity { &mut em } else { &mut sm };
                    if map.insert(a.clone(), b).is_some() {
                        return Err(diag(&sp, format!("`{a}` is mapped twice")));
                    }
                }
                // Unlisted names map to themselves when the target has them.
                for x in s2.sorts() {
                    if !sm.contains_key(x) && s1.sorts().contains(x) {
                        sm.insert(x.clone(), x.clone());
                    }
                }
                for rho in s2.entity_names() {
                    if !em.contains_key(rho) && s1.has_entity(rho) {
                        em.insert(rho.to_string(), rho.to_string());
                    }
                }
                let m = SchemaMorphism::new(s2, s1, em, sm).map_err(|e| diag(&span, e))?;
                if let Some(v) = validate_schema_morphism(&m).first() {
                    return Err(diag(
                        &span,
                        format!(
                            "entity type `{}` maps to `{}` with signature {}, but the sort map gives {}",
                            v.entity, v.image, v.found, v.expected
                        ),
                    ));
                }
                self.declare(Kind::Morphism, &name, &span)?;
                self.ws.morphisms.insert(
                    name,
                    Entry {
                        value: MorphismDecl {
                            source: source.0,
                            target: target.0,
                            morphism: m,
                        },
                        span,
                    },
                );
                Ok(())
            }
            Item::Formula {
                name,
                schema,
                expr,
                span,
            } => {
                let (sn, sch) = self.scope(&schema, &span)?;
                let f = self.ws.resolve_expr(&sch, &sn, &expr)?;
                signature_of(&sch, &f).map_err(|e| diag(&span, e))?;
                self.declare(Kind::Formula, &name, &span)?;
                self.ws.formulas.insert(
                    name,
                    Entry {
                        value: Scoped { schema: sn, value: f },
                        span,
                    },
                );
                Ok(())
            }
            Item::Constraint {
                name,
                schema,
                body,
                span,
            } => {
                let (sn, sch) = self.scope(&schema, &span)?;
                let c = self.ws.resolve_constraint(&sch, &sn, &body, &span)?;
                self.declare(Kind::Constraint, &name, &span)?;
                self.ws.constraints.insert(
                    name,
                    Entry {
                        value: Scoped { schema: sn, value: c },
                        span,
                    },
                );
                Ok(())
            }
            Item::Spec {
                name,
                schema,
                body,
                span,
            } => {
                let (sn, sch) = self.scope(&schema, &span)?;
                let mut cs = Vec::new();
                let mut failed = false;
                for (raw, sp) in &body {
                    match self.ws.resolve_constraint(&sch, &sn, raw, sp) {
                        Ok(c) => cs.push(c),
                        Err(d) => {
                            self.errors.push(d);
                            failed = true;
                        }
                    }
                }
                if failed {
                    return Ok(());
                }
                let spec = Specification::new(sch, cs).map_err(|e| diag(&span, e))?;
                self.declare(Kind::Spec, &name, &span)?;
                self.ws.specs.insert(
                    name,
                    Entry {
                        value: Scoped {
                            schema: sn,
                            value: spec,
                        },
                        span,
                    },
                );
                Ok(())
            }
            Item::Structure {
                name,
                schema,
                domain,
                keys,
                span,
            } => {
                let (sn, sch) = self.scope(&schema, &span)?;
                let dom = self
                    .ws
                    .domain(&domain.0)
                    .map_err(|_| diag(&domain.1, format!("no domain named `{}`", domain.0)))?
                    .clone();
                if let Err(e) = dom.covers(&sch) {
                    return Err(diag(&domain.1, e));
                }
                let mut universe = Universe::default();
                let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
                let mut key_spans: BTreeMap<String, SourceSpan> = BTreeMap::new();
                let mut failed = false;
                for k in &keys {
                    let t = Tuple::new(k.tuple.iter().cloned());
                    if let Ok(prev) = universe.tuple_of(&k.key) {
                        if prev != &t {
                            self.errors.push(diag(
                                &k.span,
                                format!("key `{}` is given two different tuples", k.key),
                            ));
                            failed = true;
                            continue;
                        }
                    }
                    universe.insert(k.key.clone(), t);
                    key_spans.entry(k.key.clone()).or_insert_with(|| k.span.clone());
                    let set = classes.entry(k.key.clone()).or_default();
                    for (e, sp) in &k.entities {
                        if !sch.has_entity(e) {
                            self.errors.push(diag(sp, format!("unknown entity type `{e}`")));
                            failed = true;
                        }
                        set.insert(e.clone());
                    }
                }
                classes.retain(|_, s| !s.is_empty());
                if failed {
                    return Ok(());
                }
                let m = Structure::assemble(sch, dom, universe, classes);
                let violations = validate_structure(&m);
                if !violations.is_empty() {
                    for v in violations {
                        let sp = key_spans.get(&v.key).unwrap_or(&span);
                        self.errors.push(diag(sp, v));
                    }
                    return Ok(());
                }
                self.declare(Kind::Structure, &name, &span)?;
                self.ws.structures.insert(
                    name,
                    Entry {
                        value: StructureDecl {
                            schema: sn,
                            domain: domain.0,
                            structure: m,
                        },
                        span,
                    },
                );
                Ok(())
            }
            Item::Logic {
                name,
                structure,
                spec,
                span,
            } => {
                let m = self
                    .ws
                    .structure(&structure.0)
                    .map_err(|_| diag(&structure.1, format!("no structure named `{}`", structure.0)))?
                    .structure
                    .clone();
                let t = self
                    .ws
                    .spec(&spec.0)
                    .map_err(|_| diag(&spec.1, format!("no spec named `{}`", spec.0)))?
                    .value
                    .clone();
                let l = Logic::new(m, t).map_err(|e| diag(&span, e))?;
                self.declare(Kind::Logic, &name, &span)?;
                self.ws.logics.insert(
                    name,
                    Entry {
                        value: LogicDecl {
                            structure: structure.0,
                            spec: spec.0,
                            logic: l,
                        },
                        span,
                    },
                );
                Ok(())
            }
        }
    }

    fn inline_morph(
        &self,
        source: &RawSig,
        target: &RawSig,
        map: &[(String, String)],
        span: &SourceSpan,
        schema: Option<&Schema>,
    ) -> DResult<SignatureMorphism> {
        let s = self.signature(source, schema)?;
        let t = self.signature(target, schema)?;
        let mut seen = BTreeSet::new();
        for (a, _) in map {
            if !seen.insert(a) {
                return Err(diag(span, format!("index `{a}` is mapped twice")));
            }
        }
        SignatureMorphism::new(s, t, map.iter().cloned()).map_err(|e| diag(span, e))
    }

}

impl Workspace {
    fn resolve_constraint(
        &self,
        sch: &Schema,
        sn: &str,
        raw: &RawConstraint,
        span: &SourceSpan,
    ) -> DResult<Constraint> {
        let c = match raw {
            RawConstraint::Named(n) => {
                let e = self
                    .constraints
                    .get(n)
                    .ok_or_else(|| diag(span, format!("no constraint named `{n}`")))?;
                if e.value.schema != sn {
                    return Err(diag(
                        span,
                        format!("constraint `{n}` is over schema `{}`, not `{sn}`", e.value.schema),
                    ));
                }
                return Ok(e.value.value.clone());
            }
            RawConstraint::Seq(l, r) => {
                let lhs = self.resolve_expr(sch, sn, l)?;
                let rhs = self.resolve_expr(sch, sn, r)?;
                let sig = signature_of(sch, &lhs).map_err(|e| diag(span, e))?;
                Constraint::new(rhs, SignatureMorphism::identity(&sig), lhs)
            }
            RawConstraint::Flow(s, h, t) => {
                let source = self.resolve_expr(sch, sn, s)?;
                let h = self.resolve_morph(sch, h)?;
                let target = self.resolve_expr(sch, sn, t)?;
                Constraint::new(source, h, target)
            }
        };
        c.check(sch).map_err(|e| diag(span, e))?;
        Ok(c)
    }

    fn resolve_morph(&self, sch: &Schema, raw: &RawMorph) -> DResult<SignatureMorphism> {
        match raw {
            RawMorph::Named(n, sp) => {
                let h = self
                    .sigmorphs
                    .get(n)
                    .ok_or_else(|| diag(sp, format!("no sigmorph named `{n}`")))?;
                sch.check_signature(h.value.source()).map_err(|e| diag(sp, e))?;
                sch.check_signature(h.value.target()).map_err(|e| diag(sp, e))?;
                Ok(h.value.clone())
            }
            RawMorph::Inline {
                source,
                target,
                map,
                span,
            } => {
                let el_sig = |raw: &RawSig| -> DResult<Signature> {
                    let s = Signature::new(raw.entries.iter().cloned()).map_err(|e| diag(&raw.span, e))?;
                    sch.check_signature(&s).map_err(|e| diag(&raw.span, e))?;
                    Ok(s)
                };
                let s = el_sig(source)?;
                let t = el_sig(target)?;
                SignatureMorphism::new(s, t, map.iter().cloned()).map_err(|e| diag(span, e))
            }
        }
    }

    /// Names resolve to entity types first, then to formulas declared over
    /// the same schema, which are inlined.
    fn resolve_expr(&self, sch: &Schema, sn: &str, raw: &RawExpr) -> DResult<Formula> {
        let sig = |r: &RawSig| -> DResult<Signature> {
            let s = Signature::new(r.entries.iter().cloned()).map_err(|e| diag(&r.span, e))?;
            sch.check_signature(&s).map_err(|e| diag(&r.span, e))?;
            Ok(s)
        };
        Ok(match raw {
            RawExpr::Name(n, sp) => {
                if sch.has_entity(n) {
                    Formula::entity(n.clone())
                } else if let Some(f) = self.formulas.get(n).filter(|f| f.value.schema == sn) {
                    f.value.value.clone()
                } else {
                    return Err(diag(sp, format!("unknown entity type or formula `{n}`")));
                }
            }
            RawExpr::Top(s) => Formula::Top(sig(s)?),
            RawExpr::Bot(s) => Formula::Bottom(sig(s)?),
            RawExpr::Neg(a) => Formula::neg(self.resolve_expr(sch, sn, a)?),
            RawExpr::Bin(op, a, b) => {
                let a = self.resolve_expr(sch, sn, a)?;
                let b = self.resolve_expr(sch, sn, b)?;
                match op {
                    BinOp::Meet => Formula::meet(a, b),
                    BinOp::Join => Formula::join(a, b),
                    BinOp::Diff => Formula::diff(a, b),
                    BinOp::Impl => Formula::implies(a, b),
                }
            }
            RawExpr::Flow(kind, h, a) => {
                let h = self.resolve_morph(sch, h)?;
                let a = self.resolve_expr(sch, sn, a)?;
                match kind {
                    FlowKind::Exists => Formula::exists(h, a),
                    FlowKind::Forall => Formula::forall(h, a),
                    FlowKind::Subst => Formula::subst(h, a),
                }
            }
        })
    }
}
