use cpomdp_core::model::Cpomdp;
use cpomdp_core::problems::vdp_tag::{integrate, rk4_step, VdpTag, VdpTagParams};
use cpomdp_core::problems::VdpAction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn decision_step_matches_fine_reference() {
    for start in [[1.0, 1.0], [-2.0, 0.5], [0.3, -3.0]] {
        let coarse = rk4_step(start, 2.0, 0.1);
        let fine = integrate(start, 2.0, 0.1, 1000);
        let err = ((coarse[0] - fine[0]).powi(2) + (coarse[1] - fine[1]).powi(2)).sqrt();
        assert!(err < 1e-3, "{start:?}: {err}");
    }
}

#[test]
fn noiseless_orbit_stays_on_the_limit_cycle() {
    let mut p = [1.0, 1.0];
    let mut max_r: f64 = 0.0;
    let mut late_min_r = f64::INFINITY;
    for i in 0..10_000 {
        p = rk4_step(p, 2.0, 0.1);
        let r = p[0].hypot(p[1]);
        max_r = max_r.max(r);
        if i > 9_000 {
            late_min_r = late_min_r.min(r);
        }
    }
    assert!(max_r < 5.0, "{max_r}");
    // the origin is unstable, so the orbit never settles there
    assert!(late_min_r > 0.5, "{late_min_r}");
}

#[test]
fn look_costs_recount_from_episode_log() {
    let m = VdpTag::new(VdpTagParams::default()).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let mut s = m.sample_initial_state(&mut r);
    let (mut online, mut scale, mut looks) = (0.0, 1.0, Vec::new());
    for _ in 0..40 {
        if m.is_terminal(&s) {
            break;
        }
        let a: VdpAction = m.sample_action(&mut r);
        let out = m.generate(&s, &a, &mut r);
        online += scale * out.costs[0];
        scale *= m.discount();
        looks.push(a.look);
        s = out.next_state;
    }
    let recount: f64 = looks
        .iter()
        .enumerate()
        .filter(|(_, l)| **l)
        .map(|(t, _)| 0.95f64.powi(t as i32))
        .sum();
    assert!((online - recount).abs() < 1e-9);
}
