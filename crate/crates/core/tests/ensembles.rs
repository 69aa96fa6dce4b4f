use cutofflab::adversaries::{thm2_instance, thm3_instance_with_universe, thm5_instance, InstanceEnsemble};
use cutofflab::budget::Budget;
use cutofflab::learners::{Interpolator, Learner};
use cutofflab::mc::exact_loss_distribution;
use cutofflab::{Rational, Seed};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

#[test]
fn complement_support_first_entry_is_uniform() {
    let fam = thm5_instance(&r(1, 2), 4, &r(1, 256)).unwrap();
    let k = fam.k_u() as usize;
    let draws = 100 * k;
    let mut counts = vec![0usize; k];
    let mut rng = Seed(41).rng(0);
    for _ in 0..draws {
        let a = fam.draw_support(&mut rng);
        counts[a.0[0] as usize - 1] += 1;
    }
    let expected = draws as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((k - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat}, p = {p}");
}

#[test]
fn pinned_support_tail_is_uniform_and_distinct() {
    let fam = thm2_instance(&r(1, 2), 3, &r(1, 64), 3).unwrap();
    let k = fam.k_u() as usize;
    let mut counts = vec![0usize; k + 1];
    let mut rng = Seed(42).rng(0);
    let draws = 200 * (k - 1);
    for _ in 0..draws {
        let a = fam.draw_support(&mut rng);
        assert_eq!(a.0[0], 1);
        fam.validate_support(&a).unwrap();
        counts[a.0[1] as usize] += 1;
    }
    let expected = draws as f64 / (k - 1) as f64;
    let stat: f64 = counts[2..].iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((k - 2) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat}, p = {p}");
}

#[test]
fn unseen_support_matches_coupon_collector() {
    // uniform law over 28 support points: E[#unseen] = 28 (27/28)^n
    let fam = thm3_instance_with_universe(&r(1, 2), &r(1, 2), 4, 3, 784).unwrap();
    assert_eq!(fam.support_len(), 28);
    let n = 40;
    let reps = 4000;
    let mut rng = Seed(43).rng(0);
    let missing: Vec<f64> = (0..reps)
        .map(|t| {
            let a = fam.draw_support(&mut rng);
            let (s, _) = fam.coupled_sample(&a, n, Seed(t), 1);
            fam.missing_indices(&a, &s).len() as f64
        })
        .collect();
    let mean = missing.iter().sum::<f64>() / reps as f64;
    let var = missing.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected = 28.0 * (27.0f64 / 28.0).powi(n as i32);
    assert!((mean - expected).abs() <= 4.0 * (var / reps as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn two_tier_single_interpolator_law_is_frozen() {
    // d = 2, eps = 1/32, n = 2, atoms of mass 7/8 and 1/8. The worst-case
    // interpolator errs on every unseen atom: light missed w.p. (7/8)^2,
    // heavy missed w.p. (1/8)^2, both seen w.p. 2 (7/8)(1/8)
    let class = cutofflab::HypothesisClass::cantor(r(1, 2), 2, 5).unwrap();
    let budget = Budget::default();
    let inst =
        cutofflab::adversaries::thm1_instance(&class, &r(1, 2), &r(1, 32), &class.natural_pool(64).unwrap(), &budget)
            .unwrap();
    let learner = Learner::SingleInterpolator(Interpolator::Adversarial(inst.certificate.clone().unwrap()));
    let law = exact_loss_distribution(&learner, &inst, 2, &budget).unwrap();
    assert_eq!(law, vec![(Rational::zero(), r(14, 64)), (r(1, 8), r(49, 64)), (r(7, 8), r(1, 64))]);
}

#[test]
fn ensembles_are_deterministic_per_seed() {
    let fam = thm5_instance(&r(1, 2), 4, &r(1, 256)).unwrap();
    let a = fam.draw(Seed(5)).unwrap().into_owned();
    let b = fam.draw(Seed(5)).unwrap().into_owned();
    assert_eq!(a, b);
    assert_ne!(a.support, fam.draw(Seed(6)).unwrap().support);
}
