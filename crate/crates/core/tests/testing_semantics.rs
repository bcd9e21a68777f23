mod common;

use atccs::gen::{self, ProcessShape};
use atccs::reduce::canonical;
use atccs::testing::{
    alt_preorder, cotrace, enumerate_observers, may_bounds, may_passes, observer, trace_preorder_observer,
    trace_preorder_rewrite, AltConfig, PreorderVerdict, Trace,
};
use atccs::Process;
use common::{may_oracle, p};
use proptest::prelude::*;

fn t(s: &str) -> Trace {
    Trace::parse(s).unwrap()
}

#[test]
fn examples_agree_between_routes() {
    for (small, big, expected) in [
        ("{a}", "{a} a! {a}", true),
        ("a!", "{a}", false),
        ("eps", "{a} {b}", true),
        ("{a} {b}", "{a,b}", true),
        ("{a,b}", "{a} {b}", true),
        ("b! c!", "b! {a} c!", true),
        ("b! {a} c!", "b! c!", false),
    ] {
        assert_eq!(
            trace_preorder_rewrite(&t(small), &t(big)).unwrap(),
            expected,
            "{small} vs {big}"
        );
        assert_eq!(
            trace_preorder_observer(&t(small), &t(big)),
            expected,
            "{small} vs {big}"
        );
    }
}

#[test]
fn observer_shapes() {
    assert_eq!(observer(&Trace::empty()).to_string(), "w!");
    assert_eq!(observer(&t("a! {b}")).to_string(), "a?.(b! | w!)");
    assert_eq!(canonical(&observer(&t("{a,b}"))), canonical(&p("a! | b! | w!")));
}

#[test]
fn may_examples_agree_with_oracle() {
    for (x, o, expected) in [
        ("a!", "a?.w!", true),
        ("0", "w!", true),
        ("0", "a?.w!", false),
        ("atomic(a?.b?.end)", "a! | b! | w!", true),
    ] {
        let (x, o) = (p(x), p(o));
        assert_eq!(
            may_passes(&x, &o, &may_bounds()).unwrap().passes,
            expected,
            "{x} with {o}"
        );
        assert_eq!(may_oracle(&x, &o, 10_000, 4, 3), Some(expected));
    }
    assert!(may_passes(&p("w!"), &p("w!"), &may_bounds()).is_err());
    assert!(may_passes(&Process::Nil, &p("atomic(end)"), &may_bounds()).is_err());
}

#[test]
fn alt_examples() {
    let check = |x: &str, y: &str| {
        let (x, y) = (p(x), p(y));
        alt_preorder(&x, &y, &AltConfig::for_pair(&x, &y))
    };
    assert_eq!(check("a?.b!", "a?.b!"), PreorderVerdict::Holds);
    assert_eq!(check("a?.0", "0"), PreorderVerdict::Holds);
    assert_eq!(check("a!", "0"), PreorderVerdict::Fails { witness: t("a!") });
}

fn trace_strategy() -> impl Strategy<Value = Trace> {
    (any::<u64>(), 0usize..5).prop_map(|(seed, len)| gen::trace(&mut gen::rng(seed), &gen::names(&["a", "b"]), len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rewriting_and_observers_agree(x in trace_strategy(), y in trace_strategy()) {
        prop_assert_eq!(trace_preorder_rewrite(&x, &y).unwrap(), trace_preorder_observer(&x, &y));
    }

    #[test]
    fn cotrace_is_an_involution_on_split_traces(x in trace_strategy()) {
        let c = x.canonical();
        prop_assert_eq!(cotrace(&cotrace(&c)).canonical(), c.clone());
        prop_assert!(trace_preorder_rewrite(&c, &x).unwrap());
        prop_assert!(trace_preorder_rewrite(&x, &c).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The engine's may-test and the plain search agree on small observers.
    #[test]
    fn may_testing_matches_search(seed in any::<u64>()) {
        let names = gen::names(&["a", "b"]);
        let q = gen::process(&mut gen::rng(seed), &ProcessShape::new(names.clone(), 2));
        for o in enumerate_observers(&names, 2) {
            let engine = may_passes(&q, &o, &may_bounds()).unwrap();
            if let Some(expected) = may_oracle(&q, &o, 50_000, 4, 3) {
                if !engine.truncated || engine.passes {
                    prop_assert_eq!(engine.passes, expected, "{} with {}", q, o);
                }
            }
        }
    }

    /// Adding a parallel component never removes a behaviour.
    #[test]
    fn parallel_components_only_add_behaviour(seed in any::<u64>()) {
        let names = gen::names(&["a", "b"]);
        let shape = ProcessShape::new(names, 2);
        let mut rng = gen::rng(seed);
        let x = gen::process(&mut rng, &shape);
        let y = Process::par2(x.clone(), gen::process(&mut rng, &shape));
        let v = alt_preorder(&x, &y, &AltConfig::for_pair(&x, &y));
        prop_assert!(v.holds() != Some(false), "{} vs {}: {:?}", x, y, v);
    }
}
