//! A transitive but non-mixing family of period two: the construction
//! runs on the block system and maps back to base symbols.

use symsat::construct::{Construction, ConstructionConfig, NestedFamily, TargetPath};

fn main() -> symsat::Result<()> {
    let family = NestedFamily::period_two();
    for (i, s) in family.levels().iter().enumerate() {
        let d = s.periodic_decomposition()?;
        println!("level {}: {} period {}, classes {:?}", i + 1, s.label(), d.period, d.classes);
    }
    let path = TargetPath::parry(family.level(1), 1)?;
    let mut cfg = ConstructionConfig::default();
    cfg.schedule.bands = 2;
    let c = Construction::new(family.clone(), path, &[2], cfg)?;
    println!("route period {}, offset {}", c.route.period(), c.route.offset());

    let mut stream = c.new_stream(4);
    c.generate(&mut stream, 2, Some(1_000_000))?;
    let base = c.base_symbols(&stream);
    println!("{} working symbols, {} base symbols, first 24: {:?}", stream.len(), base.len(), &base[..24]);
    println!("base prefix admissible: {}", family.ambient().is_admissible(&base));
    let t = c.tracking(&stream, base.len() as u64)?;
    println!("tracking at base checkpoints: {} rows, pass {}", t.rows.len(), t.pass());
    Ok(())
}
