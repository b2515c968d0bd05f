use proptest::prelude::*;

use symsat::construct::{Construction, ConstructionConfig, NestedFamily, AUDIT_DEPTH};
use symsat::irregular::{
    birkhoff_trace, classify_limit_set, has_zero_spread, irregular_target, perturbation_witness, Observable, Variant,
};
use symsat::ShiftSystem;

/// Runs a variant target on the golden mean inside the full 2-shift and
/// classifies the limit set of the constructed point.
fn classify(variant: Variant) -> Option<Variant> {
    let fam = NestedFamily::golden_in_full();
    let phi = Observable::coordinate(2);
    let t = irregular_target(&phi, &fam, 1, variant, 0.3).unwrap();
    let mut cfg = ConstructionConfig::default();
    cfg.schedule.bands = 2;
    let c = Construction::new(fam.clone(), t.path, &[], cfg).unwrap();
    let mut st = c.new_stream(3);
    c.generate(&mut st, 2, None).unwrap();
    let z = c.base_symbols(&st);
    let burn = c.schedule().band_end(1) / 2;
    let cl = classify_limit_set(&z, &fam, 1, &c.base_checkpoints(&st), z.len() as u64, burn, 0.05, AUDIT_DEPTH);
    assert!(cl.inconclusive.is_none(), "{:?}", cl.inconclusive);
    cl.tag
}

#[test]
fn variants_are_recovered_from_the_stream() {
    for v in [Variant::A, Variant::B, Variant::C, Variant::D, Variant::E] {
        assert_eq!(classify(v), Some(v));
    }
}

#[test]
fn endpoint_spreads_on_the_full_shift() {
    let fam = NestedFamily::single(ShiftSystem::full_shift(2).unwrap());
    let t = irregular_target(&Observable::coordinate(2), &fam, 1, Variant::A, 0.42).unwrap();
    assert_eq!(t.theta, 0.4);
    assert!((t.spreads[0] - 0.2).abs() < 1e-12 && (t.spreads[1] - 0.8).abs() < 1e-12);
    let h = 2f64.ln();
    for e in &t.entropies {
        assert!(*e >= h - 0.42);
    }
}

#[test]
fn zero_spread_is_rejected_and_perturbed_away() {
    let fam = NestedFamily::golden_in_full();
    let c = Observable::constant(2, 1.5);
    assert!(irregular_target(&c, &fam, 1, Variant::A, 0.3).is_err());
    for sys in [ShiftSystem::golden_mean(), ShiftSystem::full_shift(2).unwrap()] {
        assert!(has_zero_spread(&c, &sys));
        for delta in [1e-9, 0.01, 3.0] {
            let (_, s) = perturbation_witness(&c, &sys, delta).expect("a witness entry");
            assert!(s > 0.0);
        }
    }
    // a cohomologous-to-constant observable: phi(x) = x_1 - x_0 has zero spread too
    let cob = Observable::new(2, 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
    assert!(has_zero_spread(&cob, &ShiftSystem::full_shift(2).unwrap()));
    assert!(perturbation_witness(&cob, &ShiftSystem::full_shift(2).unwrap(), 0.1).is_some());
}

proptest! {
    #[test]
    fn running_extremes_are_monotone(w in prop::collection::vec(0u8..2, 10..400), burn in 0u64..50) {
        let cps: Vec<u64> = (1..=w.len() as u64).step_by(7).collect();
        let t = birkhoff_trace(&w, &Observable::coordinate(2), &cps, w.len() as u64, burn);
        let lows: Vec<f64> = t.rows.iter().filter_map(|r| r.running_liminf).collect();
        let highs: Vec<f64> = t.rows.iter().filter_map(|r| r.running_limsup).collect();
        prop_assert!(lows.windows(2).all(|p| p[1] <= p[0]));
        prop_assert!(highs.windows(2).all(|p| p[1] >= p[0]));
        for r in &t.rows {
            let ones = w[..r.checkpoint as usize].iter().filter(|&&s| s == 1).count();
            prop_assert!((r.average - ones as f64 / r.checkpoint as f64).abs() < 1e-12);
            prop_assert_eq!(r.running_liminf.is_some(), r.checkpoint >= burn);
        }
    }
}
