//! Canonical surface syntax for workspace items. Parsing the output yields
//! the same items.

use std::fmt::Write as _;

use crate::formula::{Constraint, MorphismRef};
use crate::kernel::{quote, Schema, SignatureMorphism, Structure, TypeDomain};
use crate::spec_calc::Specification;

use super::lexer::is_ident;
use super::workspace::{Kind, Workspace, DEFAULT_SCHEMA};

fn name(s: &str) -> String {
    if is_ident(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

/// A spec-body line for one constraint.
pub fn constraint_line(c: &Constraint) -> String {
    if c.h.is_identity() {
        format!("seq {} |- {};", c.target, c.source)
    } else {
        format!("constraint {c};")
    }
}

pub fn print_schema_body(out: &mut String, s: &Schema, indent: &str) {
    for x in s.sorts() {
        let _ = writeln!(out, "{indent}sort {x};");
    }
    for (rho, sig) in s.entities() {
        let _ = writeln!(out, "{indent}entity {rho} : {sig};");
    }
}

pub fn print_domain(dname: &str, d: &TypeDomain) -> String {
    let mut out = format!("domain {dname} {{\n");
    for (x, ext) in d.extents() {
        let vals: Vec<String> = ext.iter().map(|v| quote(v)).collect();
        let _ = writeln!(out, "  {x} = {{{}}};", vals.join(", "));
    }
    out.push_str("}\n");
    out
}

pub fn print_sigmorph(hname: &str, h: &SignatureMorphism) -> String {
    let unlabeled = h.clone().without_label();
    format!("sigmorph {hname} : {}\n", MorphismRef(&unlabeled))
}

/// ` : S`, or nothing where the annotation is implied.
fn annotation(ws: Option<&Workspace>, schema: &str) -> String {
    let implied = match ws {
        Some(ws) => {
            schema == DEFAULT_SCHEMA
                && !(ws.default_schema.sorts().is_empty() && ws.default_schema.entities().is_empty())
        }
        None => schema == DEFAULT_SCHEMA,
    };
    if implied {
        String::new()
    } else {
        format!(" : {schema}")
    }
}

pub fn print_spec(sname: &str, schema: &str, t: &Specification) -> String {
    print_spec_in(None, sname, schema, t)
}

fn print_spec_in(ws: Option<&Workspace>, sname: &str, schema: &str, t: &Specification) -> String {
    let mut out = format!("spec {sname}{} {{\n", annotation(ws, schema));
    for c in t.iter() {
        let _ = writeln!(out, "  {}", constraint_line(c));
    }
    out.push_str("}\n");
    out
}

pub fn print_structure(sname: &str, schema: &str, domain: &str, m: &Structure) -> String {
    print_structure_in(None, sname, schema, domain, m)
}

fn print_structure_in(
    ws: Option<&Workspace>,
    sname: &str,
    schema: &str,
    domain: &str,
    m: &Structure,
) -> String {
    let mut out = format!("structure {sname}{} over {domain} {{\n", annotation(ws, schema));
    for (k, t) in m.universe().iter() {
        let classes: Vec<&str> = m
            .classification()
            .get(k)
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default();
        if classes.is_empty() {
            let _ = writeln!(out, "  key {} = {t};", name(k));
        } else {
            let _ = writeln!(out, "  key {} : {} = {t};", name(k), classes.join(", "));
        }
    }
    out.push_str("}\n");
    out
}

/// The whole workspace in canonical form, in declaration order.
pub fn print_workspace(ws: &Workspace) -> String {
    let mut out = String::new();
    print_schema_body(&mut out, &ws.default_schema, "");
    for (kind, n) in &ws.order {
        if !out.is_empty() {
            out.push('\n');
        }
        match kind {
            Kind::Schema => {
                let s = &ws.schemas[n].value;
                let _ = writeln!(out, "schema {n} {{");
                print_schema_body(&mut out, s, "  ");
                out.push_str("}\n");
            }
            Kind::Domain => out.push_str(&print_domain(n, &ws.domains[n].value)),
            Kind::SigMorph => out.push_str(&print_sigmorph(n, &ws.sigmorphs[n].value)),
            Kind::Morphism => {
                let d = &ws.morphisms[n].value;
                let _ = writeln!(out, "morphism {n} : {} => {} {{", d.source, d.target);
                for (a, b) in d.morphism.entity_map() {
                    let _ = writeln!(out, "  entity {a} -> {b};");
                }
                for (a, b) in d.morphism.sort_map() {
                    let _ = writeln!(out, "  sort {a} -> {b};");
                }
                out.push_str("}\n");
            }
            Kind::Formula => {
                let f = &ws.formulas[n].value;
                let _ = writeln!(out, "formula {n}{} = {};", annotation(Some(ws), &f.schema), f.value);
            }
            Kind::Constraint => {
                let c = &ws.constraints[n].value;
                let scope = match annotation(Some(ws), &c.schema) {
                    a if a.is_empty() => String::new(),
                    a => format!("{} :", &a[3..]),
                };
                let lead = if scope.is_empty() { String::new() } else { format!(" {scope}") };
                let _ = writeln!(out, "constraint {n} :{lead} {};", c.value);
            }
            Kind::Spec => {
                let s = &ws.specs[n].value;
                out.push_str(&print_spec_in(Some(ws), n, &s.schema, &s.value));
            }
            Kind::Structure => {
                let s = &ws.structures[n].value;
                out.push_str(&print_structure_in(Some(ws), n, &s.schema, &s.domain, &s.structure));
            }
            Kind::Logic => {
                let l = &ws.logics[n].value;
                let _ = writeln!(out, "logic {n} {{ structure {}; spec {}; }}", l.structure, l.spec);
            }
        }
    }
    out
}
