//! Markov measures, their mixtures and the weak* distance on cylinder
//! tables, plus an ergodic approximation of a non-ergodic mixture.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symsat::measure::{wstar_distance, EmpiricalMeasure};
use symsat::separation::entropy_dense_approx;
use symsat::{ConvexCombination, MarkovMeasure, Measure, ShiftSystem};

fn main() -> symsat::Result<()> {
    let g = ShiftSystem::golden_mean();
    let parry = MarkovMeasure::parry(&g)?;
    println!("Parry measure on the golden mean: entropy {:.6}", parry.entropy());
    println!("mass of [0], [01], [010]: {:.6} {:.6} {:.6}", parry.mass(&[0]), parry.mass(&[0, 1]), parry.mass(&[0, 1, 0]));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let target = parry.table(6);
    for n in [1_000, 10_000, 100_000] {
        let w = parry.sample(n, &mut rng);
        let (d, trunc) = EmpiricalMeasure::from_word(&w, 2, 6).table.distance(&target);
        println!("sample of length {n:>6}: distance to Parry {d:.5} (+ truncation {trunc:.1e})");
    }

    let full = ShiftSystem::full_shift(2)?;
    let lo = ConvexCombination::single(MarkovMeasure::bernoulli(&[0.8, 0.2])?, 1);
    let hi = ConvexCombination::single(MarkovMeasure::bernoulli(&[0.2, 0.8])?, 1);
    let half = ConvexCombination::mix(0.5, &lo, &hi)?;
    let fair: Measure = MarkovMeasure::bernoulli(&[0.5, 0.5])?.into();
    let (d, _) = wstar_distance(&Measure::Convex(half.clone()), &fair, 6)?;
    println!("mixture of Bernoulli(0.2) and Bernoulli(0.8): entropy {:.6}, distance to Bernoulli(1/2) {d:.5}", half.entropy());

    let approx = entropy_dense_approx(&full, &half, 0.05, 0.05)?;
    println!(
        "ergodic approximation ({}): distance {:.5}, entropy {:.6} vs target {:.6}",
        approx.method, approx.distance, approx.entropy, approx.target_entropy
    );
    Ok(())
}
