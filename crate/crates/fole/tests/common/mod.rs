//! Fixtures and seeded random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fole::formula::{Constraint, Formula};
use fole::kernel::{
    tuple_space, Schema, SchemaMorphism, Signature, SignatureMorphism, Structure, Tuple, TypeDomain,
    Universe,
};
use fole::satisfaction::{constraint_pool, reduct, VerticalStructureMorphism};
use fole::semantics::StructureSemantics;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type R = ChaCha8Rng;

pub fn rng(seed: u64) -> R {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sig(entries: &[(&str, &str)]) -> Signature {
    Signature::new(entries.iter().copied()).unwrap()
}

pub fn schema(sorts: &[&str], entities: &[(&str, Signature)]) -> Schema {
    Schema::new(
        sorts.iter().copied(),
        entities.iter().map(|(n, s)| (n.to_string(), s.clone())),
    )
    .unwrap()
}

pub fn morph(source: &Signature, target: &Signature, map: &[(&str, &str)]) -> SignatureMorphism {
    SignatureMorphism::new(source.clone(), target.clone(), map.iter().copied()).unwrap()
}

/// Two sorts with two values each; `Emp(i: N)` and `Asg(i: N, j: N, d: D)`;
/// the projections `i ↦ i`, `i ↦ j` and the swap of `i` and `j`.
pub struct Fixture {
    pub schema: Schema,
    pub domain: TypeDomain,
    pub morphs: Vec<SignatureMorphism>,
}

pub fn fixture() -> Fixture {
    let emp = sig(&[("i", "N")]);
    let asg = sig(&[("i", "N"), ("j", "N"), ("d", "D")]);
    let schema = schema(&["N", "D"], &[("Emp", emp.clone()), ("Asg", asg.clone())]);
    let domain = TypeDomain::from_extents([("N", ["a", "b"]), ("D", ["c", "d"])]);
    let morphs = vec![
        morph(&emp, &asg, &[("i", "i")]).with_label("p"),
        morph(&emp, &asg, &[("i", "j")]).with_label("q"),
        morph(&asg, &asg, &[("i", "j"), ("j", "i"), ("d", "d")]).with_label("s"),
    ];
    Fixture {
        schema,
        domain,
        morphs,
    }
}

/// A fixed structure on the fixture with a repeated descriptor.
pub fn fixture_structure(f: &Fixture) -> Structure {
    let mut tau = BTreeMap::new();
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut add = |k: &str, t: &[(&str, &str)], es: &[&str]| {
        tau.insert(k.to_string(), Tuple::new(t.iter().copied()));
        classes.insert(k.to_string(), es.iter().map(|e| e.to_string()).collect());
    };
    add("e1", &[("i", "a")], &["Emp"]);
    add("e2", &[("i", "b")], &[]);
    add("x1", &[("i", "a"), ("j", "b"), ("d", "c")], &["Asg"]);
    add("x2", &[("i", "b"), ("j", "b"), ("d", "d")], &["Asg"]);
    add("x3", &[("i", "a"), ("j", "b"), ("d", "c")], &[]);
    Structure::new(f.schema.clone(), f.domain.clone(), Universe::new(tau), classes).unwrap()
}

fn pick<'a, T>(rng: &mut R, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("nonempty choice")
}

/// A random structure: `keys` keys, each with a tuple drawn from a random
/// entity fiber and a random set of entity types it conforms to.
pub fn random_structure(rng: &mut R, schema: &Schema, domain: &TypeDomain, keys: usize) -> Structure {
    let sigs: Vec<&Signature> = schema.entities().iter().map(|(_, s)| s).collect();
    let mut tau = BTreeMap::new();
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for n in 0..keys {
        let s = pick(rng, &sigs);
        let space = tuple_space(domain, s).unwrap();
        if space.is_empty() {
            continue;
        }
        let t = pick(rng, &space).clone();
        let k = format!("k{n}");
        for (rho, sig) in schema.entities() {
            if t.conforms(domain, sig).is_ok() && rng.gen_bool(0.5) {
                classes.entry(k.clone()).or_default().insert(rho.clone());
            }
        }
        tau.insert(k, t);
    }
    Structure::new(schema.clone(), domain.clone(), Universe::new(tau), classes).unwrap()
}

/// Like [`random_structure`] but with pairwise distinct descriptors.
pub fn random_injective_structure(
    rng: &mut R,
    schema: &Schema,
    domain: &TypeDomain,
    keys: usize,
) -> Structure {
    let mut all: Vec<Tuple> = schema
        .entities()
        .iter()
        .flat_map(|(_, s)| tuple_space(domain, s).unwrap())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    all.shuffle(rng);
    let mut tau = BTreeMap::new();
    let mut classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (n, t) in all.into_iter().take(keys).enumerate() {
        let k = format!("k{n}");
        for (rho, sig) in schema.entities() {
            if t.conforms(domain, sig).is_ok() && rng.gen_bool(0.5) {
                classes.entry(k.clone()).or_default().insert(rho.clone());
            }
        }
        tau.insert(k, t);
    }
    Structure::new(schema.clone(), domain.clone(), Universe::new(tau), classes).unwrap()
}

const INDICES: [&str; 3] = ["i", "j", "k"];

/// A random signature of arity `0..=max_arity` over the given sorts.
pub fn random_sig(rng: &mut R, sorts: &[&str], max_arity: usize) -> Signature {
    let n = rng.gen_range(0..=max_arity);
    Signature::new((0..n).map(|i| (INDICES[i], *pick(rng, sorts)))).unwrap()
}

/// A random schema with entity types `E0, E1, …`.
pub fn random_schema(rng: &mut R, sorts: &[&str], entities: usize, max_arity: usize) -> Schema {
    let ents: Vec<(String, Signature)> = (0..entities)
        .map(|n| (format!("E{n}"), random_sig(rng, sorts, max_arity)))
        .collect();
    Schema::new(sorts.iter().copied(), ents).unwrap()
}

/// Random extents of 1..=max values per sort, from a shared value pool.
pub fn random_domain(rng: &mut R, sorts: &[&str], max: usize) -> TypeDomain {
    let pool = ["a", "b", "c"];
    TypeDomain::from_extents(sorts.iter().map(|x| {
        let n = rng.gen_range(1..=max.min(pool.len()));
        let mut vs = pool.to_vec();
        vs.shuffle(rng);
        (*x, vs[..n].to_vec())
    }))
}

/// A random sort-preserving map `source → target`, if one exists.
pub fn random_sigmorph(rng: &mut R, source: &Signature, target: &Signature) -> Option<SignatureMorphism> {
    let mut map = Vec::new();
    for (i, s) in source.entries() {
        let choices: Vec<&str> = target
            .entries()
            .iter()
            .filter(|(_, t)| t == s)
            .map(|(j, _)| j.as_str())
            .collect();
        if choices.is_empty() {
            return None;
        }
        map.push((i.clone(), pick(rng, &choices).to_string()));
    }
    SignatureMorphism::new(source.clone(), target.clone(), map).ok()
}

/// Up to `n` random non-identity morphisms between entity-type signatures.
pub fn random_pool_morphs(rng: &mut R, schema: &Schema, n: usize) -> Vec<SignatureMorphism> {
    let sigs: Vec<Signature> = schema.entities().iter().map(|(_, s)| s.clone()).collect();
    let mut out = Vec::new();
    for _ in 0..n * 4 {
        if out.len() == n {
            break;
        }
        let (a, b) = (pick(rng, &sigs), pick(rng, &sigs));
        if let Some(h) = random_sigmorph(rng, a, b) {
            if !h.is_identity() && !out.contains(&h) {
                out.push(h);
            }
        }
    }
    out
}

/// A schema `𝒮₂` and a valid morphism `𝒮₂ ⇒ target`. Every sort of the
/// target gets one or two preimages; each source entity type maps to a random
/// target entity type and takes a signature over preimage sorts.
pub fn random_schema_morphism(rng: &mut R, target: &Schema, entities: usize) -> (Schema, SchemaMorphism) {
    let mut sort_map = BTreeMap::new();
    let mut preimages: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for y in target.sorts() {
        let copies = rng.gen_range(1..=2);
        for c in 0..copies {
            let x = format!("{y}{c}");
            sort_map.insert(x.clone(), y.clone());
            preimages.entry(y.clone()).or_default().push(x);
        }
    }
    let targets: Vec<&(String, Signature)> = target.entities().iter().collect();
    let mut ents = Vec::new();
    let mut entity_map = BTreeMap::new();
    for n in 0..entities {
        let (rho1, sig1) = pick(rng, &targets);
        let sig2 = Signature::new(
            sig1.entries()
                .iter()
                .map(|(i, s)| (i.clone(), pick(rng, &preimages[s]).clone())),
        )
        .unwrap();
        let name = format!("F{n}");
        entity_map.insert(name.clone(), rho1.clone());
        ents.push((name, sig2));
    }
    let source = Schema::new(sort_map.keys().cloned(), ents).unwrap();
    let m = SchemaMorphism::new(source.clone(), target.clone(), entity_map, sort_map).unwrap();
    (source, m)
}

pub fn random_constraint(rng: &mut R, pool: &[Constraint]) -> Constraint {
    pick(rng, pool).clone()
}

/// A source for a valid vertical morphism into `m1`: keys with equal
/// descriptor and classification may be merged, values are renamed by a
/// bijection, and the key map is onto.
pub fn random_quotient(rng: &mut R, m1: &Structure) -> VerticalStructureMorphism {
    let value_map: BTreeMap<String, String> = m1
        .domain()
        .values()
        .iter()
        .map(|v| (v.clone(), format!("{v}'")))
        .collect();
    let rename = |v: &str| value_map[v].clone();
    let mut groups: BTreeMap<(Tuple, BTreeSet<String>), Vec<String>> = BTreeMap::new();
    for (k, t) in m1.universe().iter() {
        let cls = m1.classification().get(k).cloned().unwrap_or_default();
        groups.entry((t.clone(), cls)).or_default().push(k.to_string());
    }
    let mut tau2 = BTreeMap::new();
    let mut classes2: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut key_map = BTreeMap::new();
    for (g, ((t, cls), keys)) in groups.into_iter().enumerate() {
        let parts = rng.gen_range(1..=keys.len());
        for (n, k) in keys.iter().enumerate() {
            let part = if n < parts { n } else { rng.gen_range(0..parts) };
            let k2 = format!("g{g}_{part}");
            key_map.insert(k.clone(), k2.clone());
            tau2.insert(k2.clone(), Tuple::new(t.entries().map(|(i, v)| (i, rename(v)))));
            if !cls.is_empty() {
                classes2.insert(k2, cls.clone());
            }
        }
    }
    let domain2 = TypeDomain::new(
        m1.domain().values().iter().map(|v| rename(v)).collect(),
        m1.domain()
            .extents()
            .iter()
            .map(|(x, e)| (x.clone(), e.iter().map(|v| rename(v)).collect()))
            .collect(),
    )
    .unwrap();
    let m2 = Structure::new(m1.schema().clone(), domain2, Universe::new(tau2), classes2).unwrap();
    VerticalStructureMorphism::new(m2, m1.clone(), key_map, value_map).unwrap()
}

/// A valid structure morphism `ℳ₂ ⇄ ℳ₁` along `m`: `ℳ₂` is a random
/// quotient of the reduct of `ℳ₁`.
pub fn random_structure_morphism(
    rng: &mut R,
    m: &SchemaMorphism,
    m1: &Structure,
) -> fole::satisfaction::StructureMorphism {
    let red = reduct(m, m1).unwrap();
    let v = random_quotient(rng, &red);
    fole::satisfaction::StructureMorphism::new(
        m.clone(),
        v.source().clone(),
        m1.clone(),
        v.key_map().clone(),
        v.value_map().clone(),
    )
    .unwrap()
}

/// All formulas built by one connective or flow from representatives of the
/// interpretations reachable at smaller depth, level by level up to `depth`.
///
/// Every formula of depth ≤ `depth` has the interpretation of one of the
/// formulas passed to `visit`, provided interpretation is compositional; the
/// visitor sees each application once. Returns the number of visits.
pub fn sweep_applications(
    m: &Structure,
    pool: &[SignatureMorphism],
    depth: usize,
    mut visit: impl FnMut(&Formula),
) -> usize {
    let mut sem = StructureSemantics::new(m).unwrap();
    let schema = m.schema().clone();
    let mut fibers: BTreeSet<Signature> = schema.entities().iter().map(|(_, s)| s.clone()).collect();
    for h in pool {
        fibers.insert(h.source().clone());
        fibers.insert(h.target().clone());
    }
    // Representatives per fiber, each tagged with the level it appeared at.
    let mut reps: BTreeMap<Signature, Vec<(Formula, usize)>> = BTreeMap::new();
    let mut seen: BTreeSet<(Signature, Vec<usize>)> = BTreeSet::new();
    let mut visits = 0;
    let mut offer = |phi: Formula,
                     level: usize,
                     sem: &mut StructureSemantics,
                     reps: &mut BTreeMap<Signature, Vec<(Formula, usize)>>,
                     visits: &mut usize,
                     visit: &mut dyn FnMut(&Formula)| {
        *visits += 1;
        visit(&phi);
        let (s, bits) = sem.bits(&phi).unwrap();
        if seen.insert((s.clone(), bits.ones().collect())) {
            reps.entry(s).or_default().push((phi, level));
        }
    };
    let mut atoms = Vec::new();
    for s in &fibers {
        atoms.push(Formula::Top(s.clone()));
        atoms.push(Formula::Bottom(s.clone()));
    }
    for (rho, _) in schema.entities() {
        atoms.push(Formula::entity(rho.clone()));
    }
    for a in atoms {
        offer(a, 1, &mut sem, &mut reps, &mut visits, &mut visit);
    }
    for level in 2..=depth {
        let snapshot = reps.clone();
        let prev = level - 1;
        for items in snapshot.values() {
            for (a, la) in items {
                if *la == prev {
                    offer(Formula::neg(a.clone()), level, &mut sem, &mut reps, &mut visits, &mut visit);
                }
                for (b, lb) in items {
                    if *la != prev && *lb != prev {
                        continue;
                    }
                    for phi in [
                        Formula::meet(a.clone(), b.clone()),
                        Formula::join(a.clone(), b.clone()),
                        Formula::implies(a.clone(), b.clone()),
                        Formula::diff(a.clone(), b.clone()),
                    ] {
                        offer(phi, level, &mut sem, &mut reps, &mut visits, &mut visit);
                    }
                }
            }
        }
        for h in pool {
            if let Some(items) = snapshot.get(h.target()) {
                for (a, _) in items.iter().filter(|(_, l)| *l == prev) {
                    offer(Formula::exists(h.clone(), a.clone()), level, &mut sem, &mut reps, &mut visits, &mut visit);
                    offer(Formula::forall(h.clone(), a.clone()), level, &mut sem, &mut reps, &mut visits, &mut visit);
                }
            }
            if let Some(items) = snapshot.get(h.source()) {
                for (a, _) in items.iter().filter(|(_, l)| *l == prev) {
                    offer(Formula::subst(h.clone(), a.clone()), level, &mut sem, &mut reps, &mut visits, &mut visit);
                }
            }
        }
    }
    visits
}

/// The standard pool over a schema, for tests that only need some pool.
pub fn pool(schema: &Schema, depth: usize, morphs: &[SignatureMorphism]) -> Vec<Constraint> {
    constraint_pool(schema, depth, morphs).unwrap()
}
