//! Exact counts of typical words and the smallest length at which they
//! certify uniform separation.

use symsat::separation::{certify_uniform_separation, typical_words, TypicalMode};
use symsat::{MarkovMeasure, Measure, ShiftSystem};

fn main() -> symsat::Result<()> {
    let g = ShiftSystem::golden_mean();
    let parry: Measure = MarkovMeasure::parry(&g)?.into();
    for n in [16, 32, 64, 128] {
        let set = typical_words(&g, &parry, 0.1, n, TypicalMode::Enumerate, usize::MAX)?;
        println!(
            "n = {n:>3}: {} classes, {} words, (1/n) log count {:.4}",
            set.classes.len(),
            set.exact_count,
            set.log_count() / n as f64
        );
    }

    let ns: Vec<usize> = (4..=64).step_by(4).collect();
    for sys in [ShiftSystem::full_shift(2)?, g] {
        let mu: Measure = MarkovMeasure::parry(&sys)?.into();
        for r in certify_uniform_separation(&sys, &mu, &[0.05, 0.1, 0.2], 0.1, &ns)? {
            println!("{}: zeta {:.2}, entropy {:.4}, first certified n {:?}", sys.label(), r.zeta, r.entropy, r.n_star);
        }
    }
    Ok(())
}
