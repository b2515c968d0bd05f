use proptest::prelude::*;
use rand::SeedableRng;

use symsat::irregular::{spread, Observable};
use symsat::measure::{decomposition_average, truncation_bound, wstar_distance, Component, EmpiricalMeasure};
use symsat::separation::{certify_uniform_separation, entropy_dense_approx, typical_words, TypicalMode};
use symsat::{ConvexCombination, MarkovMeasure, Measure, PowerSystem, ShiftSystem};

fn bern(p: f64) -> MarkovMeasure {
    MarkovMeasure::bernoulli(&[1.0 - p, p]).unwrap()
}

/// Positive 2-state Markov measure.
fn markov() -> impl Strategy<Value = MarkovMeasure> {
    (0.05f64..0.95, 0.05f64..0.95).prop_map(|(a, b)| MarkovMeasure::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap())
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wstar_is_a_metric(x in markov(), y in markov(), z in markov()) {
        let (x, y, z): (Measure, Measure, Measure) = (x.into(), y.into(), z.into());
        let d = |a: &Measure, b: &Measure| wstar_distance(a, b, 4).unwrap().0;
        let t = truncation_bound(4, 2);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-15);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 3.0 * t);
        prop_assert!(d(&x, &x) == 0.0);
    }

    #[test]
    fn cylinder_masses_are_consistent(m in markov(), w in prop::collection::vec(0u8..2, 1..8)) {
        let total: f64 = (0..2u8).map(|s| { let mut v = w.clone(); v.push(s); m.mass(&v) }).sum();
        prop_assert!((m.mass(&w) - total).abs() < 1e-12);
        let back: f64 = (0..2u8).map(|s| { let mut v = vec![s]; v.extend(&w); m.mass(&v) }).sum();
        prop_assert!((m.mass(&w) - back).abs() < 1e-12);
    }

    #[test]
    fn convex_entropy_is_affine(p in 0.01f64..0.99, q in 0.01f64..0.99, t in 0.0f64..1.0) {
        let c = ConvexCombination::mix(t, &ConvexCombination::single(bern(p), 1), &ConvexCombination::single(bern(q), 1)).unwrap();
        let h = |p: f64| xlogx(p) + xlogx(1.0 - p);
        prop_assert!((c.entropy() - (t * h(p) + (1.0 - t) * h(q))).abs() < 1e-12);
    }

    #[test]
    fn spread_is_affine(x in markov(), y in markov(), t in 0.0f64..=1.0, table in prop::collection::vec(-5.0f64..5.0, 4)) {
        let phi = Observable::new(2, 2, table).unwrap();
        let cx = ConvexCombination::single(x, 1);
        let cy = ConvexCombination::single(y, 1);
        let mix = Measure::Convex(ConvexCombination::mix(t, &cx, &cy).unwrap());
        let sx = spread(&phi, &Measure::Convex(cx)).unwrap();
        let sy = spread(&phi, &Measure::Convex(cy)).unwrap();
        prop_assert!((spread(&phi, &mix).unwrap() - (t * sx + (1.0 - t) * sy)).abs() < 1e-12);
    }

    #[test]
    fn dense_approximations_are_irreducible(p in 0.1f64..0.9, q in 0.1f64..0.9, t in 0.2f64..0.8) {
        let full = ShiftSystem::full_shift(2).unwrap();
        let target = ConvexCombination::new(vec![
            Component { weight: t, measure: bern(p), level: 1 },
            Component { weight: 1.0 - t, measure: bern(q), level: 1 },
        ]).unwrap();
        let r = entropy_dense_approx(&full, &target, 0.1, 0.1).unwrap();
        prop_assert!(r.measure.is_irreducible());
    }
}

#[test]
fn block_entropy_scales_with_the_period() {
    let g = ShiftSystem::golden_mean();
    for k in [2usize, 3] {
        let power = PowerSystem::build(&g, k, &[0, 1]).unwrap();
        let nu = MarkovMeasure::parry(&power.block_system).unwrap();
        let base = decomposition_average(&nu.clone().into(), &power, 2).unwrap();
        assert!((k as f64 * base.entropy().unwrap() - nu.entropy()).abs() < 1e-9, "k = {k}");
    }
}

#[test]
fn sampled_parry_converges_for_most_seeds() {
    let g = ShiftSystem::golden_mean();
    let parry = MarkovMeasure::parry(&g).unwrap();
    let target = parry.table(4);
    let close = (0..100u64)
        .filter(|&seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let w = parry.sample(100_000, &mut rng);
            EmpiricalMeasure::from_word(&w, 2, 4).table.distance(&target).0 <= 0.05
        })
        .count();
    assert!(close >= 95, "{close} of 100 seeds within 0.05");
}

#[test]
fn typical_counts_match_brute_force() {
    for (sys, mu) in [
        (ShiftSystem::full_shift(2).unwrap(), Measure::Markov(bern(0.3))),
        (ShiftSystem::golden_mean(), Measure::Markov(MarkovMeasure::parry(&ShiftSystem::golden_mean()).unwrap())),
    ] {
        for n in 1..=14 {
            let set = typical_words(&sys, &mu, 0.12, n, TypicalMode::Enumerate, usize::MAX).unwrap();
            let brute = sys.words(n).into_iter().filter(|w| set.contains(w)).count();
            assert_eq!(set.exact_count.to_string(), brute.to_string(), "n = {n}");
        }
    }
}

#[test]
fn separation_margins_grow_on_shipped_examples() {
    let g = ShiftSystem::golden_mean();
    let cases = [
        (ShiftSystem::full_shift(2).unwrap(), Measure::Markov(bern(0.5))),
        (g.clone(), Measure::Markov(MarkovMeasure::parry(&g).unwrap())),
    ];
    let ns: Vec<usize> = (8..=64).step_by(8).collect();
    for (sys, mu) in cases {
        for rep in certify_uniform_separation(&sys, &mu, &[0.1, 0.2], 0.1, &ns).unwrap() {
            for w in rep.margin.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "margins {:?}", rep.margin);
            }
        }
    }
}
