use finsler_completion::busemann::{dp_function, dp_strict_order, pointwise_strictly_below, DpTarget};
use finsler_completion::completion::{double_limit, PointSequence};
use finsler_completion::extended::Ext;
use finsler_completion::fieldexpr::{eval_field, parse_field, Coords};
use finsler_completion::function::{SampledFunction, Window};
use finsler_completion::graph::{build_from_spec, build_graph, FieldsSpec, Interval, SpaceSpec};
use finsler_completion::gromov::normalize_at;
use finsler_completion::metric::{Chart, DistanceOracle};
use finsler_completion::randers::MetricForm;
use finsler_completion::spacetime::{chron_rel, fermat_graphs, Event};
use finsler_completion::Space;
use proptest::prelude::*;

fn spec(w: [f64; 2], form: MetricForm, radius: usize) -> SpaceSpec {
    let fields = FieldsSpec { form, g0: vec!["1".into(), "0".into(), "1".into()], omega: vec![format!("{:?}", w[0]), format!("{:?}", w[1])] };
    let mut s = SpaceSpec::grid(2, Chart::Cartesian, vec![Interval::closed(0.0, 2.0); 2], vec![0.25], fields);
    s.stencil_radius = radius;
    s
}

fn space(w: [f64; 2], form: MetricForm, radius: usize) -> Space {
    build_from_spec(&spec(w, form, radius)).unwrap()
}

fn wind() -> impl Strategy<Value = [f64; 2]> {
    (-0.4f64..0.4, -0.4f64..0.4).prop_map(|(a, b)| [a, b])
}

fn form() -> impl Strategy<Value = MetricForm> {
    prop_oneof![Just(MetricForm::Fermat), Just(MetricForm::Standard)]
}

fn finite(e: Ext<f64>) -> f64 {
    e.finite().expect("connected grid")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distances_satisfy_triangle_inequality(w in wind(), f in form(), r in 1usize..3, a in 0usize..81, b in 0usize..81, c in 0usize..81) {
        let s = space(w, f, r);
        prop_assert_eq!(finite(s.distance(a, a)), 0.0);
        let lhs = finite(s.distance(a, c));
        let rhs = finite(s.distance(a, b)) + finite(s.distance(b, c));
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn negated_wind_reverses_distances(w in wind(), f in form(), a in 0usize..81, b in 0usize..81) {
        let sp = spec(w, f, 2);
        let s: Space = build_from_spec(&sp).unwrap();
        let neg: Space = build_graph(&sp, &sp.metric().unwrap().negated()).unwrap();
        let (x, y) = (finite(s.distance(a, b)), finite(neg.distance(b, a)));
        prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        let back = s.reversed();
        prop_assert_eq!(back.distance(b, a), s.distance(a, b));
    }

    #[test]
    fn graph_distance_dominates_straight_line(w in wind(), a in 0usize..81, b in 0usize..81) {
        let s = space(w, MetricForm::Standard, 2);
        let (p, q) = (s.coords(a), s.coords(b));
        let v = [q[0] - p[0], q[1] - p[1]];
        let line = v[0].hypot(v[1]) + w[0] * v[0] + w[1] * v[1];
        prop_assert!(finite(s.distance(a, b)) >= line - 1e-9);
    }

    #[test]
    fn chronology_is_transitive(w in wind(), a in 0usize..81, b in 0usize..81, c in 0usize..81, t in prop::array::uniform3(0.0f64..6.0)) {
        let st = fermat_graphs(space(w, MetricForm::Fermat, 1));
        let (p, q, r) = (Event::new(t[0], a), Event::new(t[1], b), Event::new(t[2], c));
        if chron_rel(p, q, &st) && chron_rel(q, r, &st) {
            prop_assert!(chron_rel(p, r, &st));
        }
        prop_assert!(!chron_rel(p, p, &st));
    }

    #[test]
    fn strict_order_matches_pointwise_comparison(w in wind(), x1 in 0usize..81, x2 in 0usize..81, t1 in 0.0f64..3.0, t2 in 0.0f64..6.0) {
        let s = space(w, MetricForm::Fermat, 1);
        let window: Window = (0..s.len()).collect::<Vec<_>>().into();
        let d = finite(s.distance(x1, x2));
        prop_assume!((d - (t2 - t1)).abs() > 1e-9);
        let f1 = dp_function(t1, DpTarget::Point(x1), &s, None, true, &window, 0).unwrap();
        let f2 = dp_function(t2, DpTarget::Point(x2), &s, None, true, &window, 0).unwrap();
        prop_assert_eq!(dp_strict_order((t1, x1), (t2, x2), &s), pointwise_strictly_below(&f1, &f2));
    }

    #[test]
    fn constant_sequence_has_zero_double_limit(w in wind(), x in 0usize..81, n in 8usize..30) {
        let s = space(w, MetricForm::Fermat, 1);
        let seq = PointSequence::constant(x, n);
        prop_assert_eq!(double_limit(&seq, &seq, &s, 1e-9).value, 0.0);
    }
}

proptest! {
    #[test]
    fn extended_addition_is_commutative_and_monotone(a in 0.0f64..1e6, b in 0.0f64..1e6, c in 0.0f64..1e6, inf in any::<bool>()) {
        let (x, y) = (Ext::Finite(a), if inf { Ext::Infinite } else { Ext::Finite(b) });
        prop_assert_eq!(x + y, y + x);
        prop_assert!(x + y >= x);
        prop_assert!(Ext::Finite(c) + Ext::Infinite == Ext::Infinite);
    }

    #[test]
    fn normalization_vanishes_at_base_and_ignores_shifts(vals in prop::collection::vec(-50.0f64..50.0, 2..40), k in -10.0f64..10.0, base in 0usize..40) {
        let n = vals.len();
        let base = base % n;
        let window: Window = (0..n).collect::<Vec<_>>().into();
        let f = SampledFunction::new(window, vals, base);
        let nf = normalize_at(&f, base);
        prop_assert_eq!(nf.function().at(base), Some(0.0));
        prop_assert!(nf.distance(&normalize_at(&f.shift(k), base)) <= 1e-9);
    }

    #[test]
    fn sup_distance_is_a_metric(a in prop::collection::vec(-5.0f64..5.0, 6), b in prop::collection::vec(-5.0f64..5.0, 6), c in prop::collection::vec(-5.0f64..5.0, 6)) {
        let window: Window = (0..6).collect::<Vec<_>>().into();
        let (f, g, h) = (SampledFunction::new(window.clone(), a, 0), SampledFunction::new(window.clone(), b, 0), SampledFunction::new(window, c, 0));
        prop_assert_eq!(f.sup_distance(&g), g.sup_distance(&f));
        prop_assert!(f.sup_distance(&h) <= f.sup_distance(&g) + g.sup_distance(&h) + 1e-12);
    }

    #[test]
    fn constant_fields_evaluate_to_themselves(v in -1e3f64..1e3, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let e = parse_field(&format!("{v:?}")).unwrap();
        let at = Coords::cartesian(x, y);
        prop_assert_eq!(eval_field(&e, &at).unwrap(), v);
        let sum = parse_field(&format!("x + {v:?}*y")).unwrap();
        prop_assert!((eval_field(&sum, &at).unwrap() - (x + v * y)).abs() <= 1e-9 * (1.0 + (v * y).abs()));
    }
}
