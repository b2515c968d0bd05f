//! Builds a generic point for the Parry measure of the golden mean inside
//! the full 2-shift and runs every audit on it.

use symsat::construct::{Construction, ConstructionConfig, NestedFamily, TargetPath};
use symsat::ShiftSystem;

fn main() -> symsat::Result<()> {
    let family = NestedFamily::golden_in_full();
    let path = TargetPath::parry(&ShiftSystem::golden_mean(), 1)?;
    let mut cfg = ConstructionConfig::default();
    cfg.schedule.bands = 3;
    let c = Construction::new(family, path, &[0, 1], cfg)?;

    let s = c.schedule();
    println!("H* = {:.6}, eta = {}", s.h_star, s.eta);
    for k in 1..=s.bands {
        let p = s.plan(k);
        println!("band {k}: eps {:.4}, zeta {:.5}, n {}, N {}, K {}, net words {}", p.eps, p.zeta(), p.n, p.reps, p.k_gap, p.t);
    }

    let mut stream = c.new_stream(7);
    c.generate(&mut stream, 3, Some(1_000_000))?;
    println!("generated {} symbols", stream.len());

    let t = c.tracking(&stream, stream.len() as u64)?;
    println!("tracking: {} checkpoints, pass {}, band maxima {:?}", t.rows.len(), t.pass(), t.band_maxima);
    let tr = c.transitivity(&stream, 6, stream.len() as u64);
    println!("transitivity: {} cylinders, pass {}", tr.rows.len(), tr.pass());
    let cert = c.certificate();
    println!("certificate: rate {:.4} over length {}, floor {:.4}, pass {}", cert.rate, cert.length, cert.floor, cert.pass);
    let pairs = c.pairs(&stream, 20, 1);
    println!(
        "pairs: {} of {} separated and admissible",
        pairs.iter().filter(|p| p.separated && p.admissible).count(),
        pairs.len()
    );
    Ok(())
}
