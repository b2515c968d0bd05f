//! Mixing analysis, entropy by word counting, gluing and shadowing on a
//! few small subshifts.

use symsat::separation::estimate_entropy_word_count;
use symsat::shift::prefix_distance;
use symsat::{MarkovMeasure, ShiftSystem, Word};

fn main() -> symsat::Result<()> {
    let period_two = ShiftSystem::from_rows("period-two", &[&[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 1, 0, 0], &[1, 0, 0, 0]])?;
    for s in [ShiftSystem::golden_mean(), ShiftSystem::full_shift(3)?, period_two] {
        let d = s.periodic_decomposition()?;
        println!("{} (alphabet {})", s.label(), s.alphabet_size());
        println!("  mixing {}, period {}, classes {:?}", s.is_mixing(), d.period, d.classes);
        if let Some(p) = s.primitivity_index()? {
            println!("  primitivity index {p}, specification gap {}", s.specification_gap(0.5)?);
        }
        let exact = MarkovMeasure::parry(&s)?.entropy();
        for n in [8, 16, 32, 64] {
            let e = estimate_entropy_word_count(&s, n)?;
            println!("  n = {n:>2}: (1/n) log #words = {:.6}  (Parry {exact:.6})", e.value);
        }
    }

    let g = ShiftSystem::golden_mean();
    let gap = g.specification_gap(0.5)?;
    let glued = g.glue_segments(&[Word::parse("0101")?, Word::parse("1001")?, Word::parse("10")?], gap)?;
    println!("glued with gap {gap}: {glued:?}, admissible {}", g.is_admissible(&glued.0));

    // windows of an admissible word with a rewritten last symbol: every
    // step jumps, but only beyond the first three coordinates
    let base = g.glue_segments(&[Word::parse("0100101001010")?, Word::parse("10010100100")?], gap)?.0;
    let points: Vec<Vec<u8>> = (0..base.len() - 4).map(|i| [&base[i..i + 4], &[0u8][..]].concat()).collect();
    let z = g.shadow_pseudo_orbit(&points, 0.25)?;
    let worst = points.iter().enumerate().map(|(i, p)| prefix_distance(&z.0[i..], p)).fold(0.0, f64::max);
    println!("shadowing point of length {}, worst tracing distance {worst}", z.len());
    Ok(())
}
