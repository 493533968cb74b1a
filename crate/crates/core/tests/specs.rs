use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seaforge::loops::{close_loop, ClosedLoopMaps};
use seaforge::lti::FreqBand;
use seaforge::sea::default_plant;
use seaforge::specs::{default_spec_set, evaluate, Channel, SpecItem, PASS_TOL};
use seaforge::synth::{decode, default_gamma1, random_theta, unweighted_plant, Published, StructureKind};

fn random_closure(seed: u64) -> ClosedLoopMaps {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = unweighted_plant(&default_plant(), rng.random_range(0.0..1.0)).unwrap();
    let kind = match rng.random_range(0..3) {
        0 => StructureKind::Pid,
        1 => StructureKind::FilteredPid,
        _ => StructureKind::FreePair { order: rng.random_range(1..=3) },
    };
    close_loop(&g, &decode(kind, &random_theta(kind, &mut rng)).unwrap()).unwrap()
}

fn reference_set(alpha: f64) -> Vec<SpecItem> {
    let plant = default_plant();
    default_spec_set(&plant, default_gamma1(&plant, alpha).unwrap()).unwrap()
}

#[test]
fn evaluation_is_bitwise_reproducible() {
    let g = unweighted_plant(&default_plant(), 0.6).unwrap();
    for p in Published::ALL {
        let specs = reference_set(0.6);
        let a = evaluate(&close_loop(&g, &p.controller()).unwrap(), &specs).unwrap();
        let b = evaluate(&close_loop(&g, &p.controller()).unwrap(), &specs).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for (x, y) in a.items.iter().zip(&b.items) {
            assert_eq!(x.achieved.to_bits(), y.achieved.to_bits());
        }
    }
}

#[test]
fn report_json_names_every_field() {
    let g = unweighted_plant(&default_plant(), 0.6).unwrap();
    let r = evaluate(&close_loop(&g, &Published::Hinf3.controller()).unwrap(), &reference_set(0.6)).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for item in v["items"].as_array().unwrap() {
        for key in ["channel", "gamma", "band", "achieved", "argmax_omega", "margin", "pass"] {
            assert!(item.get(key).is_some(), "{key}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn overall_pass_iff_level_and_stability(seed in any::<u64>()) {
        let m = random_closure(seed);
        let r = evaluate(&m, &reference_set(0.6)).unwrap();
        prop_assert_eq!(r.all_pass, r.stable && r.level <= 1.0 + PASS_TOL);
    }

    #[test]
    fn tightening_never_helps(seed in any::<u64>(), cut in 0.05f64..0.95, factor in 0.1f64..1.0) {
        let m = random_closure(seed);
        prop_assume!(m.stable);
        for item in reference_set(0.6).into_iter().filter(|i| i.channel != Channel::Passivity) {
            let base = evaluate(&m, std::slice::from_ref(&item)).unwrap().items[0].clone();
            // shrink the band from above
            let hi = if item.band.hi().is_finite() { item.band.hi() } else { 1e4 };
            let lo = item.band.lo();
            let narrower = FreqBand::new(lo, lo + cut * (hi - lo)).unwrap();
            let narrow = SpecItem::new(item.channel, item.gamma, narrower, item.hard).unwrap();
            let n = evaluate(&m, &[narrow]).unwrap().items[0].clone();
            prop_assert!(n.achieved <= base.achieved + 1e-9);
            // a smaller bound never turns a failure into a pass
            let tight = SpecItem::new(item.channel, item.gamma * factor, item.band, item.hard).unwrap();
            let t = evaluate(&m, &[tight]).unwrap().items[0].clone();
            prop_assert!(base.pass || !t.pass);
        }
    }
}
