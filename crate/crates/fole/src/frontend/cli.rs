//! The `fole` command line.
//!
//! Exit codes: 0 for success or a true verdict, 1 for a false verdict, a
//! violation or an invalid workspace, 2 for usage errors, 3 when model
//! enumeration would exceed its budget.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::Error;
use crate::formula::{Constraint, Formula};
use crate::kernel::{SignatureMorphism, Structure};
use crate::logic::{is_sound, natural_logic, restrict};
use crate::oracle::naive_interpret;
use crate::satisfaction::{check_constraint, check_institution_condition, constraint_pool, intent};
use crate::semantics::interpret;
use crate::spec_calc::{
    default_budget, derives, direct_flow, entails_semantic, inverse_flow, is_conservative_extension,
    is_consistent, ConservativeFailure, ModelClass, Specification,
};

use super::printer::{constraint_line, print_domain, print_spec, print_structure};
use super::table::{load_entity_table, relation_json, tuple_json};
use super::workspace::{load_workspace, Workspace};

/// What a command printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "fole", version, about = "Classification-form FOLE workspaces: check, evaluate, entail, flow")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Workspace file (`.fole`).
    file: PathBuf,
    /// Load a CSV entity table first: STRUCTURE:ENTITY=PATH. Repeatable.
    #[arg(long = "table", value_name = "STRUCTURE:ENTITY=PATH")]
    tables: Vec<String>,
}

#[derive(Args, Debug)]
struct Enumeration {
    /// Type domain of the model class.
    #[arg(long)]
    domain: String,
    /// Cap on total tuple slots; defaults to FOLE_BUDGET or 24.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct PoolArgs {
    /// Maximum formula depth in the constraint pool.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Comma-separated sigmorph names used for flow formulas and constraints.
    #[arg(long, value_delimiter = ',')]
    morphs: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate a workspace.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Print the interpretation of a formula as JSON.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Formula name or expression.
        #[arg(short = 'f', long)]
        formula: String,
        #[arg(short = 's', long)]
        structure: String,
        /// Cross-check against the naive evaluator.
        #[arg(long)]
        oracle: bool,
    },
    /// Check a constraint or a specification in a structure.
    Sat {
        #[command(flatten)]
        common: Common,
        /// Constraint name or body.
        #[arg(short = 'c', long, conflicts_with = "spec", required_unless_present = "spec")]
        constraint: Option<String>,
        #[arg(short = 't', long)]
        spec: Option<String>,
        #[arg(short = 's', long)]
        structure: String,
    },
    /// List the pool constraints a structure satisfies.
    Intent {
        #[command(flatten)]
        common: Common,
        #[arg(short = 's', long)]
        structure: String,
        #[command(flatten)]
        pool: PoolArgs,
    },
    /// Decide entailment over all inclusion structures on a domain.
    Entails {
        #[command(flatten)]
        common: Common,
        #[arg(short = 't', long)]
        spec: String,
        /// Constraint name or body.
        #[arg(short = 'c', long)]
        constraint: String,
        #[command(flatten)]
        enumeration: Enumeration,
        /// Also search for a derivation.
        #[arg(long)]
        derive: bool,
    },
    /// Decide consistency over all inclusion structures on a domain.
    Consistent {
        #[command(flatten)]
        common: Common,
        #[arg(short = 't', long)]
        spec: String,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Move a specification along a schema morphism.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        morphism: String,
        #[arg(long, conflicts_with = "inverse", required_unless_present = "inverse")]
        direct: bool,
        #[arg(long)]
        inverse: bool,
        #[arg(short = 't', long)]
        spec: String,
        /// Domain over the target schema (inverse flow only).
        #[arg(long, required_if_eq("inverse", "true"))]
        domain: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        pool: PoolArgs,
    },
    /// Decide whether T1 conservatively extends T2 along a morphism.
    Conservative {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        morphism: String,
        #[arg(long = "t2")]
        t2: String,
        #[arg(long = "t1")]
        t1: String,
        #[command(flatten)]
        enumeration: Enumeration,
        #[command(flatten)]
        pool: PoolArgs,
    },
    /// Check soundness of a logic, optionally restricting it.
    Logic {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'l', long)]
        logic: String,
        /// Print the restriction to the sound region (needs --domain).
        #[arg(long)]
        restrict: bool,
        /// Print the natural logic of the structure instead.
        #[arg(long)]
        natural: bool,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        pool: PoolArgs,
    },
    /// Search a constraint pool for violations of the satisfaction condition
    /// under change of notation.
    InstitutionCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        morphism: String,
        /// Structure over the target schema.
        #[arg(short = 's', long)]
        structure: String,
        #[command(flatten)]
        pool: PoolArgs,
    },
}

enum Failure {
    Usage(String),
    Workspace(String),
    Budget(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn usage(e: Error) -> Failure {
    match e {
        Error::Budget { .. } => Failure::Budget(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

type Run = Result<(i32, String), Failure>;

/// Runs one command. `argv[0]` is the program name.
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> CommandOutput {
    // `-t2`/`-t1` are accepted as spellings of the long flags.
    let args: Vec<&str> = argv
        .iter()
        .map(|a| match a.as_ref() {
            "-t2" => "--t2",
            "-t1" => "--t1",
            other => other,
        })
        .collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 {
                CommandOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CommandOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok((code, stdout)) => CommandOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Workspace(m) => (1, m),
                Failure::Budget(m) => (3, m),
                Failure::Other(m) => (1, m),
            };
            CommandOutput {
                code,
                stdout: String::new(),
                stderr: if msg.ends_with('\n') { msg } else { msg + "\n" },
            }
        }
    }
}

fn load(common: &Common) -> Result<Workspace, Failure> {
    let mut ws = load_workspace(&common.file).map_err(|errs| {
        Failure::Workspace(errs.iter().map(|d| format!("{d}\n")).collect())
    })?;
    for t in &common.tables {
        let parsed = t
            .split_once(':')
            .and_then(|(s, rest)| rest.split_once('=').map(|(e, p)| (s, e, p)));
        let Some((s, e, p)) = parsed else {
            return Err(Failure::Usage(format!(
                "--table expects STRUCTURE:ENTITY=PATH, got `{t}`"
            )));
        };
        load_entity_table(&PathBuf::from(p), s, e, &mut ws).map_err(|err| match err {
            Error::Csv { .. } | Error::Io { .. } => Failure::Workspace(err.to_string()),
            other => usage(other),
        })?;
    }
    Ok(ws)
}

fn model_class(ws: &Workspace, e: &Enumeration) -> Result<ModelClass, Failure> {
    let d = ws.domain(&e.domain).map_err(usage)?.clone();
    Ok(ModelClass::with_budget(d, e.budget.unwrap_or_else(default_budget)))
}

fn morphs(ws: &Workspace, names: &[String]) -> Result<Vec<SignatureMorphism>, Failure> {
    names
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| ws.sigmorph(n).cloned().map_err(usage))
        .collect()
}

/// A named formula, or else an expression over the given schema.
fn formula_arg(ws: &Workspace, schema: &str, text: &str) -> Result<Formula, Failure> {
    if let Ok(f) = ws.formula(text) {
        if f.schema == schema {
            return Ok(f.value.clone());
        }
    }
    ws.parse_formula(schema, text).map_err(usage)
}

/// A named constraint, or else a constraint body over the given schema.
fn constraint_arg(ws: &Workspace, schema: &str, text: &str) -> Result<Constraint, Failure> {
    if let Ok(c) = ws.constraint(text) {
        if c.schema == schema {
            return Ok(c.value.clone());
        }
    }
    ws.parse_constraint(schema, text).map_err(usage)
}

fn schema_name(ws: &Workspace, s: &crate::kernel::Schema) -> String {
    ws.schema_name_of(s).unwrap_or_else(|| "default".into())
}

fn rows_json(rows: &crate::semantics::Relation) -> String {
    serde_json::to_string(&relation_json(rows)).expect("JSON of strings")
}

fn dispatch(cmd: Cmd) -> Run {
    match cmd {
        Cmd::Check { common } => {
            let ws = load(&common)?;
            Ok((0, format!("ok: {} items\n", ws.item_count())))
        }
        Cmd::Eval {
            common,
            formula,
            structure,
            oracle,
        } => {
            let ws = load(&common)?;
            let sd = ws.structure(&structure).map_err(usage)?;
            let phi = formula_arg(&ws, &sd.schema, &formula)?;
            let r = interpret(&sd.structure, &phi)?;
            let mut out = rows_json(&r);
            out.push('\n');
            if oracle {
                let n = naive_interpret(&sd.structure, &phi)?;
                if n != r {
                    return Err(Failure::Other(format!(
                        "oracle mismatch for {phi}: evaluator {} vs naive {}",
                        rows_json(&r),
                        rows_json(&n)
                    )));
                }
            }
            Ok((0, out))
        }
        Cmd::Sat {
            common,
            constraint,
            spec,
            structure,
        } => {
            let ws = load(&common)?;
            let sd = ws.structure(&structure).map_err(usage)?;
            let list: Vec<Constraint> = match (&constraint, &spec) {
                (Some(c), _) => vec![constraint_arg(&ws, &sd.schema, c)?],
                (None, Some(t)) => {
                    let t = ws.spec(t).map_err(usage)?;
                    if t.schema != sd.schema {
                        return Err(Failure::Usage(format!(
                            "spec is over `{}` but the structure is over `{}`",
                            t.schema, sd.schema
                        )));
                    }
                    t.value.iter().cloned().collect()
                }
                (None, None) => return Err(Failure::Usage("give -c or -t".into())),
            };
            let mut results = Vec::new();
            let mut all = true;
            for c in &list {
                let v = check_constraint(&sd.structure, c)?;
                all &= v.satisfied;
                results.push(json!({
                    "constraint": c.to_string(),
                    "satisfied": v.satisfied,
                    "escaping": relation_json(&v.escaping),
                }));
            }
            let doc = json!({ "satisfied": all, "constraints": Value::Array(results) });
            Ok((
                if all { 0 } else { 1 },
                serde_json::to_string_pretty(&doc).expect("JSON") + "\n",
            ))
        }
        Cmd::Intent {
            common,
            structure,
            pool,
        } => {
            let ws = load(&common)?;
            let sd = ws.structure(&structure).map_err(usage)?;
            let hs = morphs(&ws, &pool.morphs)?;
            let p = constraint_pool(sd.structure.schema(), pool.depth, &hs)?;
            let view = intent(&sd.structure, &p)?;
            let spec = Specification::new(sd.structure.schema().clone(), view.members)?;
            let mut out = format!(
                "// {} of {} pool constraints hold\n",
                spec.len(),
                p.len()
            );
            out.push_str(&print_spec(&format!("{structure}_intent"), &sd.schema, &spec));
            Ok((0, out))
        }
        Cmd::Entails {
            common,
            spec,
            constraint,
            enumeration,
            derive,
        } => {
            let ws = load(&common)?;
            let t = ws.spec(&spec).map_err(usage)?;
            let c = constraint_arg(&ws, &t.schema, &constraint)?;
            let mc = model_class(&ws, &enumeration)?;
            let e = entails_semantic(&t.value, &c, &mc)?;
            let mut out = String::new();
            if e.entailed {
                let _ = writeln!(
                    out,
                    "entailed: {c}\n// relative to all {} inclusion structures over domain {}",
                    e.models, enumeration.domain
                );
            } else {
                let _ = writeln!(out, "not entailed: {c}\n// countermodel:");
                if let Some(m) = &e.countermodel {
                    out.push_str(&print_structure("countermodel", &t.schema, &enumeration.domain, m));
                }
            }
            if derive {
                match derives(&t.value, &c.as_sequent())? {
                    Some(d) => {
                        out.push_str("// derivation:\n");
                        for line in d.render().lines() {
                            let _ = writeln!(out, "//   {line}");
                        }
                    }
                    None => out.push_str("// no derivation found within the depth bound\n"),
                }
            }
            Ok((if e.entailed { 0 } else { 1 }, out))
        }
        Cmd::Consistent {
            common,
            spec,
            enumeration,
        } => {
            let ws = load(&common)?;
            let t = ws.spec(&spec).map_err(usage)?;
            let mc = model_class(&ws, &enumeration)?;
            let r = is_consistent(&t.value, &mc)?;
            Ok(match r.witness {
                Some(m) => (
                    0,
                    format!(
                        "consistent\n// witness:\n{}",
                        print_structure("witness", &t.schema, &enumeration.domain, &m)
                    ),
                ),
                None => (1, "inconsistent\n".into()),
            })
        }
        Cmd::Flow {
            common,
            morphism,
            direct,
            inverse: _,
            spec,
            domain,
            budget,
            pool,
        } => {
            let ws = load(&common)?;
            let md = ws.morphism(&morphism).map_err(usage)?;
            let t = ws.spec(&spec).map_err(usage)?;
            if direct {
                if t.schema != md.source {
                    return Err(Failure::Usage(format!(
                        "direct flow needs a spec over `{}`",
                        md.source
                    )));
                }
                let image = direct_flow(&md.morphism, &t.value)?;
                Ok((0, print_spec(&format!("{spec}_direct"), &md.target, &image)))
            } else {
                if t.schema != md.target {
                    return Err(Failure::Usage(format!(
                        "inverse flow needs a spec over `{}`",
                        md.target
                    )));
                }
                let e = Enumeration {
                    domain: domain.unwrap_or_default(),
                    budget,
                };
                let mc = model_class(&ws, &e)?;
                let hs = morphs(&ws, &pool.morphs)?;
                let p2 = constraint_pool(md.morphism.source(), pool.depth, &hs)?;
                let back = inverse_flow(&md.morphism, &t.value, &p2, &mc)?;
                Ok((0, print_spec(&format!("{spec}_inverse"), &md.source, &back)))
            }
        }
        Cmd::Conservative {
            common,
            morphism,
            t2,
            t1,
            enumeration,
            pool,
        } => {
            let ws = load(&common)?;
            let md = ws.morphism(&morphism).map_err(usage)?;
            let s2 = ws.spec(&t2).map_err(usage)?;
            let s1 = ws.spec(&t1).map_err(usage)?;
            if s2.schema != md.source || s1.schema != md.target {
                return Err(Failure::Usage(format!(
                    "--t2 must be over `{}` and --t1 over `{}`",
                    md.source, md.target
                )));
            }
            let mc = model_class(&ws, &enumeration)?;
            let hs = morphs(&ws, &pool.morphs)?;
            let p2 = constraint_pool(md.morphism.source(), pool.depth, &hs)?;
            let r = is_conservative_extension(&md.morphism, &s2.value, &s1.value, &p2, &mc)?;
            let out = match r.failure {
                None => format!("conservative\n// checked {} pool constraints and falsum in each entity fiber\n", p2.len()),
                Some(ConservativeFailure::NotMorphism(c, m)) => format!(
                    "not conservative: not a specification morphism; `{t1}` does not entail the translation of {c}\n// countermodel:\n{}",
                    print_structure("countermodel", &md.target, &enumeration.domain, &m)
                ),
                Some(ConservativeFailure::NewTheorem(c, m)) => {
                    let pulled = format!("{}_pullback", enumeration.domain);
                    format!(
                        "not conservative: {c} flows back from `{t1}` but `{t2}` does not entail it\n// countermodel over `{}`:\n{}{}",
                        md.source,
                        print_domain(&pulled, m.domain()),
                        print_structure("countermodel", &md.source, &pulled, &m)
                    )
                }
            };
            Ok((if r.conservative { 0 } else { 1 }, out))
        }
        Cmd::Logic {
            common,
            logic,
            restrict: do_restrict,
            natural,
            domain,
            budget,
            pool,
        } => {
            let ws = load(&common)?;
            let ld = ws.logic(&logic).map_err(usage)?;
            let l = &ld.logic;
            let schema = schema_name(&ws, l.schema());
            let hs = morphs(&ws, &pool.morphs)?;
            if natural {
                let p = constraint_pool(l.schema(), pool.depth, &hs)?;
                let nat = natural_logic(l.structure(), &p)?;
                return Ok((0, print_spec(&format!("{logic}_natural"), &schema, nat.spec())));
            }
            if do_restrict {
                let Some(d) = domain else {
                    return Err(Failure::Usage("--restrict needs --domain".into()));
                };
                let mc = model_class(&ws, &Enumeration { domain: d, budget })?;
                let p = constraint_pool(l.schema(), pool.depth, &hs)?;
                let r = restrict(l, &p, &mc)?;
                return Ok((0, print_spec(&format!("{logic}_restricted"), &schema, r.spec())));
            }
            if is_sound(l)? {
                Ok((0, "sound\n".into()))
            } else {
                let mut out = String::from("unsound; violated axioms:\n");
                for c in l.spec().iter() {
                    if !check_constraint(l.structure(), c)?.satisfied {
                        let _ = writeln!(out, "  {}", constraint_line(c));
                    }
                }
                Ok((1, out))
            }
        }
        Cmd::InstitutionCheck {
            common,
            morphism,
            structure,
            pool,
        } => {
            let ws = load(&common)?;
            let md = ws.morphism(&morphism).map_err(usage)?;
            let sd = ws.structure(&structure).map_err(usage)?;
            if sd.schema != md.target {
                return Err(Failure::Usage(format!(
                    "the structure must be over `{}`",
                    md.target
                )));
            }
            let hs = morphs(&ws, &pool.morphs)?;
            let p2 = constraint_pool(md.morphism.source(), pool.depth, &hs)?;
            let mut violations = Vec::new();
            for c in &p2 {
                let v = check_institution_condition(&md.morphism, &sd.structure, c)?;
                if !v.holds() {
                    violations.push(json!({
                        "constraint": c.to_string(),
                        "reduct_satisfies": v.reduct_satisfies,
                        "translation_satisfied": v.translation_satisfied,
                    }));
                }
            }
            let doc = json!({ "checked": p2.len(), "violations": violations });
            let code = if violations.is_empty() { 0 } else { 1 };
            Ok((code, serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))
        }
    }
}

#[allow(dead_code)]
fn structure_rows(m: &Structure) -> Value {
    Value::Array(m.universe().iter().map(|(_, t)| tuple_json(t)).collect())
}
