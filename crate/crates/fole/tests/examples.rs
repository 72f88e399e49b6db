//! Small worked examples, one per operation, on hand-built fixtures.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use fole::formula::{sequent_as_constraint, signature_of, Constraint, Formula, Sequent};
use fole::kernel::{tuple_map, tuple_space, SchemaMorphism, Structure, Tuple, TypeDomain, Universe};
use fole::logic::{is_sound, natural_logic, restrict, Logic};
use fole::oracle::enumerate_models;
use fole::satisfaction::{check_constraint, intent, satisfies_sequent, satisfies_spec};
use fole::semantics::{
    classify, exists_along, extent, forall_along, image_structure, interpret, is_comprehensive,
    is_extensive, subst_along, Relation,
};
use fole::spec_calc::{
    consequence, derives, entails_semantic, falsum, is_conservative_extension, is_consistent,
    is_spec_morphism, spec_equivalent, ModelClass, Rule, Specification,
};

fn t(pairs: &[(&str, &str)]) -> Tuple {
    Tuple::new(pairs.iter().copied())
}

fn rel(sig: &fole::kernel::Signature, rows: &[&[(&str, &str)]]) -> Relation {
    Relation::new(sig.clone(), rows.iter().map(|r| t(r)))
}

fn ab() -> TypeDomain {
    TypeDomain::from_extents([("N", vec!["a", "b"])])
}

/// `Emp`, `Mgr`, `Staff`, `Salaried`, `Married` over `(i: N)`.
fn office() -> fole::kernel::Schema {
    let s = sig(&[("i", "N")]);
    schema(
        &["N"],
        &[
            ("Emp", s.clone()),
            ("Mgr", s.clone()),
            ("Staff", s.clone()),
            ("Salaried", s.clone()),
            ("Married", s),
        ],
    )
}

/// k1 is an `Emp`, `Salaried` and `Married` at `a`; k2 is `Salaried` at `b`.
fn m1() -> Structure {
    let tau = BTreeMap::from([
        ("k1".to_string(), t(&[("i", "a")])),
        ("k2".to_string(), t(&[("i", "b")])),
    ]);
    let classes = BTreeMap::from([
        ("k1".to_string(), BTreeSet::from(["Emp".into(), "Salaried".into(), "Married".into()])),
        ("k2".to_string(), BTreeSet::from(["Salaried".to_string()])),
    ]);
    Structure::new(office(), ab(), Universe::new(tau), classes).unwrap()
}

fn seq(a: Formula, b: Formula) -> Constraint {
    sequent_as_constraint(&office(), &Sequent::new(a, b)).unwrap()
}

fn e(name: &str) -> Formula {
    Formula::entity(name)
}

fn top() -> Formula {
    Formula::Top(sig(&[("i", "N")]))
}

fn bot() -> Formula {
    Formula::Bottom(sig(&[("i", "N")]))
}

fn spec(cs: impl IntoIterator<Item = Constraint>) -> Specification {
    Specification::new(office(), cs).unwrap()
}

#[test]
fn tuple_spaces() {
    let d = ab();
    assert_eq!(tuple_space(&d, &sig(&[])).unwrap(), vec![Tuple::empty()]);
    assert_eq!(tuple_space(&d, &sig(&[("i", "N"), ("j", "N")])).unwrap().len(), 4);
    let empty = TypeDomain::from_extents([("N", Vec::<&str>::new())]);
    assert!(tuple_space(&empty, &sig(&[("i", "N")])).unwrap().is_empty());
}

#[test]
fn tuple_maps_project_and_duplicate() {
    let i = sig(&[("i", "N")]);
    let ij = sig(&[("i", "N"), ("j", "N")]);
    let k = sig(&[("k", "N")]);
    let proj = morph(&i, &ij, &[("i", "i")]);
    assert_eq!(tuple_map(&proj, &t(&[("i", "a"), ("j", "b")])).unwrap(), t(&[("i", "a")]));
    let diag = morph(&ij, &k, &[("i", "k"), ("j", "k")]);
    assert_eq!(tuple_map(&diag, &t(&[("k", "a")])).unwrap(), t(&[("i", "a"), ("j", "a")]));
}

#[test]
fn quantifier_flows_along_a_projection() {
    let d = ab();
    let i = sig(&[("i", "N")]);
    let ij = sig(&[("i", "N"), ("j", "N")]);
    let h = morph(&i, &ij, &[("i", "i")]);
    let r = rel(&ij, &[&[("i", "a"), ("j", "a")], &[("i", "a"), ("j", "b")]]);
    assert_eq!(exists_along(&h, &r).unwrap(), rel(&i, &[&[("i", "a")]]));
    assert_eq!(forall_along(&d, &h, &r).unwrap(), rel(&i, &[&[("i", "a")]]));
    let r1 = rel(&ij, &[&[("i", "a"), ("j", "a")]]);
    assert!(forall_along(&d, &h, &r1).unwrap().is_empty());
    let back = subst_along(&d, &h, &rel(&i, &[&[("i", "a")]])).unwrap();
    assert_eq!(back, r);
}

#[test]
fn signature_of_flow_lands_in_the_source() {
    let i = sig(&[("i", "N")]);
    let ij = sig(&[("i", "N"), ("j", "N")]);
    let h = morph(&i, &ij, &[("i", "i")]);
    let phi = Formula::exists(h, Formula::Top(ij));
    assert_eq!(signature_of(&office(), &phi).unwrap(), i);
}

#[test]
fn interpretation_on_m1() {
    let m = m1();
    assert_eq!(interpret(&m, &e("Emp")).unwrap(), rel(&sig(&[("i", "N")]), &[&[("i", "a")]]));
    assert_eq!(
        interpret(&m, &Formula::neg(e("Emp"))).unwrap(),
        rel(&sig(&[("i", "N")]), &[&[("i", "b")]])
    );
    assert_eq!(interpret(&m, &top()).unwrap().len(), 2);
    let q = Formula::meet(e("Salaried"), e("Married"));
    assert_eq!(interpret(&m, &q).unwrap(), interpret(&m, &e("Emp")).unwrap());
}

#[test]
fn classification_and_extents_on_m1() {
    let m = m1();
    assert!(classify(&m, "k1", &e("Emp")).unwrap());
    assert!(!classify(&m, "k2", &e("Emp")).unwrap());
    assert!(classify(&m, "k2", &top()).unwrap());
    assert_eq!(extent(&m, &e("Emp")).unwrap(), BTreeSet::from(["k1".to_string()]));
    assert!(extent(&m, &bot()).unwrap().is_empty());
    let lem = Formula::join(e("Emp"), Formula::neg(e("Emp")));
    assert_eq!(extent(&m, &lem).unwrap().len(), 2);
}

#[test]
fn shared_descriptor_breaks_extensiveness() {
    let tau = BTreeMap::from([
        ("k1".to_string(), t(&[("i", "a")])),
        ("k2".to_string(), t(&[("i", "a")])),
    ]);
    let classes = BTreeMap::from([("k1".to_string(), BTreeSet::from(["Emp".to_string()]))]);
    let m = Structure::new(office(), ab(), Universe::new(tau), classes).unwrap();
    assert!(!is_extensive(&m).unwrap());
    assert!(is_extensive(&m1()).unwrap());
}

#[test]
fn uncovered_tuple_breaks_comprehension() {
    let report = is_comprehensive(&m1(), 2, &[]).unwrap();
    assert!(report.comprehensive);
    let tau = BTreeMap::from([("k1".to_string(), t(&[("i", "a")]))]);
    let classes = BTreeMap::from([("k1".to_string(), BTreeSet::from(["Emp".to_string()]))]);
    let lonely = Structure::new(office(), ab(), Universe::new(tau), classes).unwrap();
    let report = is_comprehensive(&lonely, 2, &[]).unwrap();
    assert!(!report.comprehensive);
    assert_eq!(report.witness.unwrap().tuple, t(&[("i", "b")]));
}

#[test]
fn image_of_m1_is_keyed_by_tuples() {
    let img = image_structure(&m1()).unwrap();
    assert_eq!(img.universe().len(), 2);
    let emp = img.keys_of("Emp");
    assert_eq!(emp.len(), 1);
    let k = emp.iter().next().unwrap();
    assert_eq!(img.tuple_of(k).unwrap(), &t(&[("i", "a")]));
    assert_eq!(image_structure(&img).unwrap(), img);
}

#[test]
fn sequents_on_m1() {
    let m = m1();
    assert!(satisfies_sequent(&m, &Sequent::new(e("Emp"), e("Emp"))).unwrap());
    assert!(satisfies_sequent(&m, &Sequent::new(bot(), e("Mgr"))).unwrap());
    assert!(satisfies_sequent(&m, &Sequent::new(e("Emp"), top())).unwrap());
    assert!(!satisfies_sequent(&m, &Sequent::new(top(), e("Emp"))).unwrap());
}

#[test]
fn flow_constraint_reports_the_escaping_tuple() {
    let i = sig(&[("i", "N")]);
    let ij = sig(&[("i", "N"), ("j", "N")]);
    let h = morph(&i, &ij, &[("i", "i")]);
    let c = Constraint::new(e("Emp"), h, Formula::Top(ij));
    let v = check_constraint(&m1(), &c).unwrap();
    assert!(!v.satisfied);
    assert_eq!(v.escaping, rel(&sig(&[("i", "N")]), &[&[("i", "b")]]));
}

#[test]
fn specifications_on_m1() {
    let m = m1();
    assert!(satisfies_spec(&m, spec([]).iter()).unwrap());
    assert!(satisfies_spec(&m, spec([seq(e("Mgr"), e("Emp"))]).iter()).unwrap());
    assert!(!satisfies_spec(&m, spec([seq(top(), bot())]).iter()).unwrap());
}

#[test]
fn intent_keeps_what_holds() {
    let pool = vec![seq(e("Emp"), top()), seq(top(), e("Emp"))];
    let v = intent(&m1(), &pool).unwrap();
    assert_eq!(v.members, vec![seq(e("Emp"), top())]);
    let img = intent(&image_structure(&m1()).unwrap(), &pool).unwrap();
    assert_eq!(img.members, v.members);
}

#[test]
fn transitivity_is_entailed_and_its_converse_is_not() {
    let mc = ModelClass::new(ab());
    let t = spec([seq(e("Mgr"), e("Emp")), seq(e("Emp"), e("Staff"))]);
    assert!(entails_semantic(&t, &seq(e("Mgr"), e("Staff")), &mc).unwrap().entailed);
    let no = entails_semantic(&t, &seq(e("Staff"), e("Mgr")), &mc).unwrap();
    assert!(!no.entailed);
    let cm = no.countermodel.unwrap();
    assert!(satisfies_spec(&cm, t.iter()).unwrap());
    assert!(!satisfies_sequent(&cm, &Sequent::new(e("Staff"), e("Mgr"))).unwrap());
}

#[test]
fn empty_spec_does_not_entail_falsum() {
    let mc = ModelClass::new(ab());
    let f = falsum(&sig(&[("i", "N")]));
    let no = entails_semantic(&spec([]), &f, &mc).unwrap();
    assert!(!no.entailed);
    let cm = no.countermodel.unwrap();
    assert!(cm.classification().values().all(BTreeSet::is_empty));
}

#[test]
fn consequence_is_a_closure() {
    let mc = ModelClass::new(ab());
    let pool = pool(&office(), 1, &[]);
    let small = spec([seq(e("Mgr"), e("Emp"))]);
    let big = spec([seq(e("Mgr"), e("Emp")), seq(e("Emp"), e("Staff"))]);
    let c1 = consequence(&small, &pool, &mc).unwrap();
    let c2 = consequence(&big, &pool, &mc).unwrap();
    assert!(c1.iter().all(|c| c2.contains(c)));
    assert_eq!(consequence(&c1, &pool, &mc).unwrap(), c1);
    let none = consequence(&spec([]), &pool, &mc).unwrap();
    assert!(pool.iter().filter(|c| c.source == c.target).all(|c| none.contains(c)));
}

#[test]
fn derivations_use_the_expected_rules() {
    let refl = derives(&spec([]), &Sequent::new(e("Emp"), e("Emp"))).unwrap().unwrap();
    assert_eq!(refl.rule, Rule::Reflexivity);

    let t = spec([seq(e("Mgr"), e("Emp")), seq(e("Mgr"), e("Staff"))]);
    let meet = derives(&t, &Sequent::new(e("Mgr"), Formula::meet(e("Emp"), e("Staff")))).unwrap().unwrap();
    assert_eq!(meet.rule, Rule::MeetIntro);

    let i = sig(&[("i", "N")]);
    let ij = sig(&[("i", "N"), ("j", "N")]);
    let h = morph(&i, &ij, &[("i", "i")]);
    let unit = Sequent::new(Formula::exists(h.clone(), Formula::subst(h, e("Emp"))), e("Emp"));
    assert!(derives(&spec([]), &unit).unwrap().is_some());
}

#[test]
fn consistency_depends_on_the_fiber() {
    let mc = ModelClass::new(ab());
    let free = is_consistent(&spec([]), &mc).unwrap();
    assert!(free.consistent);
    assert!(free.witness.unwrap().classification().values().all(BTreeSet::is_empty));
    let f = falsum(&sig(&[("i", "N")]));
    assert!(!is_consistent(&spec([f.clone()]), &mc).unwrap().consistent);
    let empty = ModelClass::new(TypeDomain::from_extents([("N", Vec::<&str>::new())]));
    assert!(is_consistent(&spec([f]), &empty).unwrap().consistent);
}

#[test]
fn model_enumeration_counts() {
    let one = TypeDomain::from_extents([("N", vec!["a"])]);
    let s1 = schema(&["N"], &[("A", sig(&[("i", "N")]))]);
    assert_eq!(enumerate_models(&s1, &one, 24).unwrap().count(), 2);
    let s2 = schema(&["N"], &[("A", sig(&[("i", "N")])), ("B", sig(&[("j", "N")]))]);
    assert_eq!(enumerate_models(&s2, &ab(), 24).unwrap().count(), 16);
    let s0 = schema(&[], &[]);
    assert_eq!(enumerate_models(&s0, &ab(), 24).unwrap().count(), 1);
}

/// `Small = {Emp, Mgr}` included in `Big = {Emp, Mgr, Intern}`.
fn grow() -> SchemaMorphism {
    let s = sig(&[("i", "N")]);
    let small = schema(&["N"], &[("Emp", s.clone()), ("Mgr", s.clone())]);
    let big = schema(&["N"], &[("Emp", s.clone()), ("Mgr", s.clone()), ("Intern", s)]);
    SchemaMorphism::new(
        small,
        big,
        [("Emp", "Emp"), ("Mgr", "Mgr")].map(|(a, b)| (a.to_string(), b.to_string())).into(),
        [("N".to_string(), "N".to_string())].into(),
    )
    .unwrap()
}

fn over(s: &fole::kernel::Schema, pairs: &[(&str, &str)]) -> Specification {
    Specification::new(
        s.clone(),
        pairs
            .iter()
            .map(|(a, b)| sequent_as_constraint(s, &Sequent::new(e(a), e(b))).unwrap()),
    )
    .unwrap()
}

#[test]
fn spec_morphisms_and_conservative_extensions() {
    let m = grow();
    let mc = ModelClass::new(ab());
    let t2 = over(m.source(), &[("Mgr", "Emp")]);
    let pool2 = pool(m.source(), 1, &[]);

    let image = over(m.target(), &[("Mgr", "Emp")]);
    assert!(is_spec_morphism(&m, &t2, &image, &mc).unwrap().holds);
    assert!(!is_spec_morphism(&m, &t2, &over(m.target(), &[]), &mc).unwrap().holds);

    let fresh = over(m.target(), &[("Mgr", "Emp"), ("Intern", "Emp")]);
    assert!(is_conservative_extension(&m, &t2, &fresh, &pool2, &mc).unwrap().conservative);
    let theorem = over(m.target(), &[("Mgr", "Emp"), ("Emp", "Mgr")]);
    assert!(!is_conservative_extension(&m, &t2, &theorem, &pool2, &mc).unwrap().conservative);
    let id = SchemaMorphism::identity(m.source());
    assert!(is_conservative_extension(&id, &t2, &t2, &pool2, &mc).unwrap().conservative);
}

#[test]
fn logics_on_m1() {
    let m = m1();
    let mc = ModelClass::new(ab());
    let pool = pool(&office(), 1, &[]);
    assert!(is_sound(&Logic::top(&m)).unwrap());
    let natural = natural_logic(&m, &pool).unwrap();
    assert!(is_sound(&natural).unwrap());
    assert!(natural.spec().iter().all(|c| satisfies_spec(&m, [c]).unwrap()));

    let bad = Logic::new(m.clone(), spec([seq(top(), e("Emp"))])).unwrap();
    assert!(!is_sound(&bad).unwrap());
    let fixed = restrict(&bad, &pool, &mc).unwrap();
    assert!(is_sound(&fixed).unwrap());
    assert!(!fixed.spec().contains(&seq(top(), e("Emp"))));
    let twice = restrict(&fixed, &pool, &mc).unwrap();
    assert!(spec_equivalent(twice.spec(), fixed.spec(), &mc).unwrap());
}
