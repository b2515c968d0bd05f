use proptest::prelude::*;

use symsat::linalg::{all_positive, bool_mul};
use symsat::separation::{count_words, estimate_entropy_word_count};
use symsat::shift::{m_of_eps, prefix_distance, separated};
use symsat::{ShiftSystem, Word};

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    (2..=max).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.5), n), n))
}

fn transitive(max: usize) -> impl Strategy<Value = ShiftSystem> {
    matrix(max).prop_filter_map("not transitive", |m| ShiftSystem::new("random", m).ok().filter(|s| s.is_transitive()))
}

fn mixing(max: usize) -> impl Strategy<Value = ShiftSystem> {
    transitive(max).prop_filter("not mixing", |s| s.is_mixing())
}

/// Every word of length `n` over the alphabet, admissible or not.
fn all_words(a: usize, n: usize) -> Vec<Vec<u8>> {
    (0..a.pow(n as u32))
        .map(|mut c| {
            let mut w = vec![0u8; n];
            for x in w.iter_mut().rev() {
                *x = (c % a) as u8;
                c /= a;
            }
            w
        })
        .collect()
}

fn is_admissible(m: &[Vec<bool>], w: &[u8]) -> bool {
    w.windows(2).all(|p| m[p[0] as usize][p[1] as usize])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_counts_match_enumeration(s in transitive(4), n in 1usize..7) {
        let m = s.transitions().clone();
        let used: Vec<bool> = (0..m.len()).map(|i| m[i].iter().any(|&x| x) || m.iter().any(|r| r[i])).collect();
        let brute = all_words(m.len(), n)
            .into_iter()
            .filter(|w| w.iter().all(|&x| used[x as usize]) && is_admissible(&m, w))
            .count();
        prop_assert_eq!(count_words(&s, n).to_string(), brute.to_string());
        prop_assert_eq!(s.words(n).len(), brute);
    }

    #[test]
    fn word_counts_are_submultiplicative(s in transitive(5), m in 1usize..20, n in 1usize..20) {
        prop_assert!(count_words(&s, m + n) <= count_words(&s, m) * count_words(&s, n));
    }

    #[test]
    fn scaled_estimate_is_subadditive(s in transitive(5), m in 1usize..25, n in 1usize..25) {
        let v = |k: usize| estimate_entropy_word_count(&s, k).unwrap().value * k as f64;
        prop_assert!(v(m + n) <= v(m) + v(n) + 1e-9);
    }

    #[test]
    fn primitivity_index_is_sharp(s in mixing(5)) {
        let n = s.primitivity_index().unwrap().expect("mixing");
        let a = s.transitions().clone();
        let mut p = a.clone();
        for _ in 1..n {
            p = bool_mul(&p, &a);
        }
        prop_assert!(all_positive(&p));
        if n > 1 {
            let mut q = a.clone();
            for _ in 1..n - 1 {
                q = bool_mul(&q, &a);
            }
            prop_assert!(!all_positive(&q));
        }
    }

    #[test]
    fn gluing_keeps_gap_and_admissibility(s in mixing(4), l1 in 1usize..6, l2 in 1usize..6, extra in 0usize..3, pick in any::<u64>()) {
        let w1 = s.words(l1);
        let w2 = s.words(l2);
        let u = &w1[(pick as usize) % w1.len()];
        let v = &w2[(pick as usize / 7) % w2.len()];
        let gap = s.specification_gap(0.0).unwrap() + extra;
        let glued = s.glue_segments(&[Word(u.clone()), Word(v.clone())], gap).unwrap().0;
        prop_assert!(s.is_admissible(&glued));
        prop_assert_eq!(glued.len(), u.len() + gap - 1 + v.len());
        prop_assert_eq!(&glued[..u.len()], &u[..]);
        let start = u.len() - 1 + gap;
        prop_assert_eq!(&glued[start..], &v[..]);
    }

    #[test]
    fn cyclic_classes_advance_by_one(s in transitive(5)) {
        let d = s.periodic_decomposition().unwrap();
        let m = s.transitions();
        for i in 0..m.len() {
            for j in 0..m.len() {
                if m[i][j] {
                    let (ci, cj) = (d.class_of(i as u8).unwrap(), d.class_of(j as u8).unwrap());
                    prop_assert_eq!((ci + 1) % d.period, cj);
                }
            }
        }
    }

    #[test]
    fn distinct_words_are_separated(a in 2usize..=3, n in 1usize..=6, x in any::<u64>(), y in any::<u64>()) {
        let s = ShiftSystem::full_shift(a).unwrap();
        let words = s.words(n);
        let (u, v) = (&words[x as usize % words.len()], &words[y as usize % words.len()]);
        prop_assert_eq!(separated(u, v, n, 0.5), u != v);
    }

    #[test]
    fn cylinder_distance_is_an_ultrametric(x in prop::collection::vec(0u8..3, 12), y in prop::collection::vec(0u8..3, 12), z in prop::collection::vec(0u8..3, 12)) {
        let d = prefix_distance;
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y).max(d(&y, &z)));
    }

    #[test]
    fn m_of_eps_is_smallest(e in 1e-6f64..1.0) {
        let m = m_of_eps(e);
        prop_assert!(0.5f64.powi(m as i32) <= e);
        prop_assert!(m == 0 || 0.5f64.powi(m as i32 - 1) > e);
    }

    #[test]
    fn shadowing_traces_every_index(len in 2usize..400, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let s = ShiftSystem::golden_mean();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ext = |w: &mut Vec<u8>, rng: &mut rand_chacha::ChaCha8Rng| while w.len() < 5 {
            let b = if w.last() == Some(&1) { 0 } else { rng.gen_range(0..2) };
            w.push(b);
        };
        let mut pts = vec![{ let mut w = vec![]; ext(&mut w, &mut rng); w }];
        for _ in 1..len {
            let mut w = pts.last().unwrap()[1..4].to_vec();
            ext(&mut w, &mut rng);
            pts.push(w);
        }
        let z = s.shadow_pseudo_orbit(&pts, 0.25).unwrap().0;
        for (i, p) in pts.iter().enumerate() {
            prop_assert!(prefix_distance(&z[i..], p) <= 0.5);
        }
    }
}

/// Exhaustive over every pair of admissible words of length up to 4 in
/// the golden mean and full 2-shift.
#[test]
fn gluing_exhaustive_small() {
    for s in [ShiftSystem::golden_mean(), ShiftSystem::full_shift(2).unwrap()] {
        let gap = s.specification_gap(0.0).unwrap();
        for l in 1..=4 {
            for u in s.words(l) {
                for v in s.words(l) {
                    let g = s.glue_segments(&[Word(u.clone()), Word(v.clone())], gap).unwrap().0;
                    assert!(s.is_admissible(&g));
                    assert_eq!(g.len(), 2 * l + gap - 1);
                }
            }
        }
    }
}
