//! Irregular points for the first coordinate: every limit-set variant on
//! the golden mean inside the full 2-shift, with Birkhoff traces and the
//! recovered classification.

use symsat::construct::{Construction, ConstructionConfig, NestedFamily, AUDIT_DEPTH};
use symsat::irregular::{birkhoff_trace, classify_limit_set, irregular_target, Observable, Variant};

fn main() -> symsat::Result<()> {
    let family = NestedFamily::golden_in_full();
    let phi = Observable::coordinate(2);
    for v in [Variant::A, Variant::B, Variant::C, Variant::D, Variant::E] {
        let target = irregular_target(&phi, &family, 1, v, 0.3)?;
        let mut cfg = ConstructionConfig::default();
        cfg.schedule.bands = 2;
        let c = Construction::new(family.clone(), target.path, &[], cfg)?;
        let mut stream = c.new_stream(3);
        c.generate(&mut stream, 2, None)?;
        let z = c.base_symbols(&stream);
        let cps = c.base_checkpoints(&stream);
        let burn = c.schedule().band_end(1) / 2;
        let trace = birkhoff_trace(&z, &phi, &cps, z.len() as u64, burn);
        let cl = classify_limit_set(&z, &family, 1, &cps, z.len() as u64, burn, 0.05, AUDIT_DEPTH);
        println!(
            "({v}) spreads {:?}: liminf {:.4}, limsup {:.4} over {} symbols; {} clusters, tag {:?}",
            target.spreads,
            trace.liminf.unwrap_or(f64::NAN),
            trace.limsup.unwrap_or(f64::NAN),
            z.len(),
            cl.clusters.len(),
            cl.tag.map(|t| t.to_string()),
        );
    }
    Ok(())
}
