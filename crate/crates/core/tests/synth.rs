use seaforge::loops::close_loop;
use seaforge::sea::default_plant;
use seaforge::specs::{default_spec_set, Channel};
use seaforge::synth::{
    default_gamma1, synthesize, unweighted_plant, Objective, Published, StructureKind, SynthOptions,
};

fn small(seed: u64) -> SynthOptions {
    SynthOptions { starts: 2, budget: 600, seed, warm_start: None }
}

#[test]
fn every_structure_synthesizes_deterministically() {
    let plant = default_plant();
    let g = unweighted_plant(&plant, 0.6).unwrap();
    let specs = default_spec_set(&plant, default_gamma1(&plant, 0.6).unwrap()).unwrap();
    for kind in [StructureKind::Pid, StructureKind::FilteredPid, StructureKind::FreePair { order: 2 }] {
        let a = synthesize(&g, kind, &specs, &small(5)).unwrap();
        let b = synthesize(&g, kind, &specs, &small(5)).unwrap();
        assert_eq!(a.controller, b.controller, "{kind:?}");
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.objective_history, b.objective_history);

        let best = a.best_so_far();
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*best.last().unwrap(), a.objective);

        if a.report.all_pass {
            // hard items hold for any overall pass
            let m = close_loop(&g, &a.controller).unwrap();
            assert!(m.stable);
            assert!(a.report.item(Channel::Passivity).unwrap().achieved <= 1.0 + 1e-3);
        }
    }
}

#[test]
fn warm_starts_at_reference_controllers_never_worsen() {
    let plant = default_plant();
    let g = unweighted_plant(&plant, 0.6).unwrap();
    let specs = default_spec_set(&plant, default_gamma1(&plant, 0.6).unwrap()).unwrap();
    for p in Published::ALL {
        let l0 = Objective::new(&g, p.kind(), &specs).value(&p.theta());
        let opts = SynthOptions { starts: 1, budget: 400, seed: 1, warm_start: Some(p.theta()) };
        let r = synthesize(&g, p.kind(), &specs, &opts).unwrap();
        assert!(r.objective <= l0 + 1e-9, "{p}: {} > {l0}", r.objective);
    }
}

#[test]
fn different_seeds_explore_differently() {
    let plant = default_plant();
    let g = unweighted_plant(&plant, 0.6).unwrap();
    let specs = default_spec_set(&plant, default_gamma1(&plant, 0.6).unwrap()).unwrap();
    let kind = StructureKind::FreePair { order: 1 };
    let a = synthesize(&g, kind, &specs, &small(1)).unwrap();
    let b = synthesize(&g, kind, &specs, &small(2)).unwrap();
    assert_ne!(a.objective_history, b.objective_history);
}
