use proptest::prelude::*;

use symsat::construct::{Construction, ConstructionConfig, GammaMode, NestedFamily, TargetPath, AUDIT_DEPTH};
use symsat::irregular::classify_limit_set;
use symsat::{ConvexCombination, Error, MarkovMeasure, ShiftSystem};

fn bernoulli() -> (NestedFamily, TargetPath) {
    let b = ConvexCombination::single(MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap(), 1);
    (NestedFamily::single(ShiftSystem::full_shift(2).unwrap()), TargetPath::singleton(b))
}

fn golden() -> (NestedFamily, TargetPath) {
    (NestedFamily::golden_in_full(), TargetPath::parry(&ShiftSystem::golden_mean(), 1).unwrap())
}

fn config(bands: usize, eta: f64, zeta_cap: u64) -> ConstructionConfig {
    let mut c = ConstructionConfig::default();
    c.schedule.bands = bands;
    c.schedule.eta = eta;
    c.schedule.zeta_cap = zeta_cap;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn schedules_satisfy_their_inequalities(eta in 0.22f64..0.5, bands in 2usize..=3, cap in 150u64..=300, use_golden in any::<bool>()) {
        let (f, p) = if use_golden { golden() } else { bernoulli() };
        let c = Construction::new(f, p, &[], config(bands, eta, cap)).unwrap();
        for i in c.schedule().check_inequalities() {
            prop_assert!(i.holds, "{} at band {}: {} > {}", i.name, i.band, i.lhs, i.rhs);
        }
    }
}

#[test]
fn windows_reproduce_their_words() {
    let (f, p) = golden();
    let c = Construction::new(f, p, &[0, 1], config(2, 0.3, 300)).unwrap();
    let mut st = c.new_stream(5);
    c.generate(&mut st, 2, None).unwrap();
    let w = c.windows(&st);
    assert!(w.pass(), "{w:?}");
    assert_eq!(w.items_checked, c.schedule().band_end_item(2) + 1);
    assert_eq!(&st.symbols[..2], &[0, 1], "the point starts in the open set");
}

#[test]
fn resumed_generation_matches_a_single_run() {
    let (f, p) = bernoulli();
    let c = Construction::new(f, p, &[], config(3, 0.3, 300)).unwrap();
    let mut whole = c.new_stream(9);
    c.generate(&mut whole, 3, Some(700_000)).unwrap();
    let mut parts = c.new_stream(9);
    c.generate(&mut parts, 1, None).unwrap();
    assert_eq!(parts.bands_done, 1);
    c.generate(&mut parts, 3, Some(700_000)).unwrap();
    assert_eq!(whole, parts);

    let mut cut = whole.clone();
    cut.truncate_to_band(c.schedule(), 1);
    c.generate(&mut cut, 3, Some(700_000)).unwrap();
    assert_eq!(whole, cut);

    let mut other = c.new_stream(10);
    c.generate(&mut other, 1, None).unwrap();
    assert_ne!(other.symbols, whole.symbols[..other.len()]);
}

#[test]
fn injected_fault_is_caught_at_its_checkpoint() {
    let (f, p) = bernoulli();
    let c = Construction::new(f, p, &[], config(2, 0.3, 100)).unwrap();
    let mut st = c.new_stream(1);
    c.generate(&mut st, 1, None).unwrap();
    assert!(c.tracking(&st, st.len() as u64).unwrap().pass());
    symsat::construct::inject_fault(&mut st, &c.working, c.schedule(), 1).unwrap();
    let r = c.tracking(&st, st.len() as u64).unwrap();
    let f = r.first_failure().expect("fault detected");
    assert_eq!((f.item, f.checkpoint), (1, c.schedule().checkpoint(1)));
    assert!(!f.window_ok);
    assert_eq!(r.rows.iter().filter(|r| !r.pass).count(), 1);
    assert_eq!(c.windows(&st).mismatches, vec![1]);
}

#[test]
fn singleton_runs_cluster_at_the_target() {
    let (f, p) = golden();
    let c = Construction::new(f.clone(), p, &[], config(2, 0.3, 300)).unwrap();
    let mut st = c.new_stream(2);
    c.generate(&mut st, 2, None).unwrap();
    let horizon = st.len() as u64;
    let tr = c.tracking(&st, horizon).unwrap();
    assert!(tr.pass());
    assert!(tr.maxima_strictly_decreasing());
    let burn = c.schedule().band_end(1) / 2;
    let cl = classify_limit_set(&st.symbols, &f, 1, &c.base_checkpoints(&st), horizon, burn, 0.05, AUDIT_DEPTH);
    assert_eq!(cl.clusters.len(), 1, "{:?}", cl.inconclusive);
    let k = &cl.clusters[0];
    let target = c.base_targets().unwrap()[0].table(AUDIT_DEPTH).unwrap();
    let row = tr.rows.iter().find(|r| r.checkpoint == k.first_checkpoint).unwrap();
    assert!(k.center.distance(&target).0 <= row.envelope + row.truncation);
    assert!(c.transitivity(&st, 6, horizon).pass());
}

#[test]
fn measure_mode_tracks_its_approximations() {
    let (f, p) = golden();
    let mut cfg = config(2, 0.3, 300);
    cfg.mode = GammaMode::Measure;
    let c = Construction::new(f, p, &[], cfg).unwrap();
    let mut st = c.new_stream(3);
    c.generate(&mut st, 2, None).unwrap();
    assert!(c.tracking(&st, st.len() as u64).unwrap().pass());
    assert!(c.certificate().pass);
}

#[test]
fn open_set_outside_the_family_is_rejected() {
    let (_, p) = golden();
    let only_golden = NestedFamily::single(ShiftSystem::golden_mean());
    let err = Construction::new(only_golden, p, &[0, 1, 1], config(2, 0.3, 300)).unwrap_err();
    assert!(matches!(err, Error::Density(_)), "{err}");
}

#[test]
fn period_two_family_takes_the_power_route() {
    let f = NestedFamily::period_two();
    let p = TargetPath::parry(f.level(1), 1).unwrap();
    let c = Construction::new(f.clone(), p.clone(), &[2], config(2, 0.3, 300)).unwrap();
    assert_eq!(c.route.period(), 2);
    let mut st = c.new_stream(4);
    c.generate(&mut st, 1, None).unwrap();
    let base = c.base_symbols(&st);
    assert_eq!(base[0], 2);
    assert!(f.ambient().is_admissible(&base));
    assert_eq!(c.working_symbols(&base).unwrap(), st.symbols);
    assert!(c.tracking(&st, base.len() as u64).unwrap().pass());

    let mut cfg = config(2, 0.3, 300);
    cfg.mode = GammaMode::Measure;
    assert!(Construction::new(f, p, &[2], cfg).is_err());
}
