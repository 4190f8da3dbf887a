use affine_pa::degree_law::{
    fixed_m_law, limit_law, limit_score, limit_score_bounded, nu0, nu0_from_law, nu_tilde0, LimitLaw,
    DEFAULT_TAIL_TOL,
};
use affine_pa::numeric::CompensatedSum;
use affine_pa::InitialDegreeModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTAS: [f64; 4] = [-0.5, 0.0, 1.0, 5.0];

fn models() -> Vec<(&'static str, InitialDegreeModel)> {
    vec![
        ("degenerate 1", InitialDegreeModel::degenerate(1).unwrap()),
        ("degenerate 5", InitialDegreeModel::degenerate(5).unwrap()),
        ("uniform 1..3", InitialDegreeModel::uniform(1, 3).unwrap()),
        ("geometric <= 50", InitialDegreeModel::truncated_geometric(0.3, 50).unwrap()),
    ]
}

fn grid() -> Vec<(String, f64, InitialDegreeModel, LimitLaw)> {
    let mut out = Vec::new();
    for (name, r) in models() {
        for delta in DELTAS {
            let law = limit_law(delta, &r, DEFAULT_TAIL_TOL).unwrap();
            out.push((format!("{name}, delta = {delta}"), delta, r.clone(), law));
        }
    }
    out
}

#[test]
fn recursion_holds_term_by_term() {
    for (label, delta, r, law) in grid() {
        let theta = 2.0 + delta / r.mu();
        assert!((law.theta - theta).abs() < 1e-15);
        assert_eq!(law.p[0], 0.0);
        for k in 1..=law.k_trunc() {
            let kf = k as f64;
            // p_k = ((k - 1 + delta) p_{k-1} - (k + delta) p_k) / theta + r_k
            let rhs = ((kf - 1.0 + delta) * law.p[k - 1] - (kf + delta) * law.p[k]) / theta + r.r(k);
            assert!((law.p[k] - rhs).abs() < 1e-12, "{label}: k = {k}");
            assert!(law.p[k] >= 0.0);
        }
    }
}

#[test]
fn mass_and_reweighted_mass_sum_to_one() {
    for (label, _, _, law) in grid() {
        let p: CompensatedSum = law.p.iter().copied().collect();
        let q: CompensatedSum = law.q.iter().copied().collect();
        assert!((p.value() + law.trunc_mass - 1.0).abs() < 1e-10, "{label}: sum p");
        assert!((q.value() + law.q_trunc_mass - 1.0).abs() < 1e-10, "{label}: sum q");
    }
}

#[test]
fn tail_identity_against_one_minus_partial_sums() {
    for (label, delta, r, law) in grid() {
        let mut partial = CompensatedSum::new();
        for k in 1..=law.k_trunc().min(2000) {
            partial.add(law.p[k]);
            let stored = law.p_tail[k];
            let identity = (k as f64 + delta) * law.p[k] / law.theta + r.tail(k);
            assert!((stored - identity).abs() < 1e-12, "{label}: k = {k}");
            assert!((stored - (1.0 - partial.value())).abs() < 1e-12, "{label}: k = {k}");
        }
    }
}

#[test]
fn fixed_m_closed_form_matches_recursion() {
    for m in [1u32, 2, 5] {
        for delta in [-0.5, 0.0, 2.0] {
            let rec = limit_law(delta, &InitialDegreeModel::degenerate(m).unwrap(), DEFAULT_TAIL_TOL).unwrap();
            let closed = fixed_m_law(delta, m, 5000).unwrap();
            for k in 0..=5000 {
                assert!((rec.pk(k) - closed.pk(k)).abs() < 1e-10, "m = {m}, delta = {delta}, k = {k}");
            }
        }
    }
}

/// `sum_k q_k(law) / (k + delta)`, with the remainder past the truncation
/// point replaced by its midpoint bound.
fn sum_q_over(law: &LimitLaw, delta: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in 1..=law.k_trunc() {
        acc.add(law.q[k] / (k as f64 + delta));
    }
    let k1 = law.k_trunc() as f64 + 1.0;
    let base = law.trunc_mass / (2.0 * law.mu + law.delta);
    acc.add(0.5 * base * (1.0 + (k1 + law.delta) / (k1 + delta)));
    acc.value()
}

#[test]
fn reweighted_law_moves_mass_down_as_delta_grows() {
    for (name, r) in models() {
        let laws: Vec<LimitLaw> = DELTAS.iter().map(|&d| limit_law(d, &r, DEFAULT_TAIL_TOL).unwrap()).collect();
        for v_delta in [-0.5, 0.0, 2.0] {
            for i in 0..laws.len() {
                for j in 0..i {
                    let hi = sum_q_over(&laws[i], v_delta);
                    let lo = sum_q_over(&laws[j], v_delta);
                    assert!(hi > lo, "{name}: delta {} vs {}, v at {v_delta}", DELTAS[i], DELTAS[j]);
                }
            }
        }
    }
}

#[test]
fn limit_score_changes_sign_only_at_the_truth() {
    for (label, delta0, r, law) in grid() {
        let at = limit_score_bounded(delta0, &law, &r).unwrap();
        assert!(at.value.abs() <= 1e-12 + at.error_bound, "{label}: {}", at.value);
        for h in [0.1, 0.5, 1.0] {
            if delta0 - h > -1.0 {
                assert!(limit_score(delta0 - h, &law, &r).unwrap() > 0.0, "{label}: -{h}");
            }
            assert!(limit_score(delta0 + h, &law, &r).unwrap() < 0.0, "{label}: +{h}");
        }
    }
}

#[test]
fn nu0_is_minus_the_derivative_of_the_limit_score() {
    for (label, delta0, r, law) in grid() {
        let h = 1e-4;
        let f = |d: f64| limit_score(d, &law, &r).unwrap();
        let fd = (f(delta0 - 2.0 * h) - 8.0 * f(delta0 - h) + 8.0 * f(delta0 + h) - f(delta0 + 2.0 * h)) / (12.0 * h);
        let v = nu0_from_law(&law).unwrap().value;
        assert!((v + fd).abs() < 1e-6, "{label}: nu0 = {v}, -fd = {}", -fd);
        assert!(v > 0.0);
    }
}

#[test]
fn limit_score_against_brute_force_series() {
    // delta0 = 0, m = 1: p_{>k} = 2 / ((k + 1)(k + 2)).
    let r = InitialDegreeModel::degenerate(1).unwrap();
    let law = limit_law(0.0, &r, DEFAULT_TAIL_TOL).unwrap();
    let mut acc = CompensatedSum::new();
    for k in 1..=1_000_000u64 {
        let k = k as f64;
        acc.add(2.0 / ((k + 1.0) * (k + 2.0)) / (k + 1.0));
    }
    let oracle = acc.value() - 1.0 / 3.0;
    let value = limit_score(1.0, &law, &r).unwrap();
    assert!((value - oracle).abs() < 1e-10, "{value} vs {oracle}");
    // Reference value from a 30-digit mpmath evaluation of the same series.
    assert!((value - (-0.043_465_199_636_88)).abs() < 1e-12, "{value}");
}

#[test]
fn nu0_reference_values() {
    let v5 = nu0(0.0, &InitialDegreeModel::degenerate(5).unwrap(), DEFAULT_TAIL_TOL).unwrap();
    assert!((v5 - 0.019_844_336_056_7).abs() < 1e-12, "{v5}");
    let v1 = nu0(0.0, &InitialDegreeModel::degenerate(1).unwrap(), DEFAULT_TAIL_TOL).unwrap();
    let exact = std::f64::consts::PI.powi(2) / 6.0 - 1.5;
    assert!((v1 - exact).abs() < 1e-12);
    // Independent telescoping form for m = 1: sum_k 2 / (k^2 (k+1)(k+2)) - 1/4.
    let mut acc = CompensatedSum::new();
    for k in 1..=1_000_000u64 {
        let k = k as f64;
        acc.add(2.0 / (k * k * (k + 1.0) * (k + 2.0)));
    }
    assert!((acc.value() - 0.25 - v1).abs() < 1e-12);
}

#[test]
fn power_law_tail_exponent() {
    for m in [1u32, 5] {
        for delta in DELTAS {
            let law = fixed_m_law(delta, m, 20_000).unwrap();
            let tau = 3.0 + delta / f64::from(m);
            let ratio = law.p[20_000] / law.p[10_000];
            let expected = 2f64.powf(-tau);
            assert!((ratio / expected - 1.0).abs() < 0.01, "m = {m}, delta = {delta}: {ratio} vs {expected}");
        }
    }
}

/// `g(m)` written out from its definition.
fn influence(m: u32, delta0: f64, pmf: &[(u32, f64)]) -> f64 {
    let mu: f64 = pmf.iter().map(|(k, p)| f64::from(*k) * p).sum();
    let kmax = pmf.iter().map(|(k, _)| *k).max().unwrap();
    let mut g = 0.0;
    for k in 1..kmax.max(m) {
        let r_tail: f64 = pmf.iter().filter(|(j, _)| *j > k).map(|(_, p)| p).sum();
        let ind = if m > k { 1.0 } else { 0.0 };
        g += (ind - r_tail) / (f64::from(k) + delta0);
    }
    g + (f64::from(m) - mu) / (delta0 + 2.0 * mu)
}

#[test]
fn nu_tilde0_against_monte_carlo() {
    let pmf = [(1u32, 1.0 / 3.0), (2, 1.0 / 3.0), (3, 1.0 / 3.0)];
    let r = InitialDegreeModel::uniform(1, 3).unwrap();
    let delta0 = 0.0;
    let mu = 2.0;
    let d = delta0 + 2.0 * mu;
    let exact = nu_tilde0(delta0, &r).unwrap();

    let gs: Vec<f64> = (1..=3).map(|m| influence(m, delta0, &pmf)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let batches = 100;
    let per_batch = 100_000;
    let mut estimates = Vec::with_capacity(batches);
    for _ in 0..batches {
        let (mut sg, mut sg2, mut sm, mut sm2, mut sgm) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..per_batch {
            let m = rng.random_range(1..=3u32);
            let g = gs[m as usize - 1];
            let mf = f64::from(m);
            sg += g;
            sg2 += g * g;
            sm += mf;
            sm2 += mf * mf;
            sgm += g * mf;
        }
        let nb = per_batch as f64;
        let var_g = sg2 / nb - (sg / nb).powi(2);
        let var_m = sm2 / nb - (sm / nb).powi(2);
        let e_gm = sgm / nb;
        estimates.push(var_g + 8.0 * mu * mu * var_m / d.powi(4) - 4.0 * mu * e_gm / (d * d));
    }
    let mean = estimates.iter().sum::<f64>() / batches as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "exact {exact}, mc {mean} +- {se}");
    assert!(exact > 0.0);
}

#[test]
fn nu_tilde0_vanishes_without_initial_degree_noise() {
    for m in [1, 3, 8] {
        for delta in DELTAS {
            assert_eq!(nu_tilde0(delta, &InitialDegreeModel::degenerate(m).unwrap()).unwrap(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_initial_laws(weights in proptest::collection::vec(0.0f64..1.0, 1..8), delta in -0.9f64..6.0) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-3);
        let pairs: Vec<(u32, f64)> = weights.iter().enumerate().map(|(i, w)| (i as u32 + 1, w / total)).collect();
        let Ok(r) = InitialDegreeModel::from_pairs(&pairs) else { return Ok(()); };
        let law = limit_law(delta, &r, 1e-10).unwrap();
        let p: CompensatedSum = law.p.iter().copied().collect();
        prop_assert!((p.value() + law.trunc_mass - 1.0).abs() < 1e-10);
        prop_assert!(nu_tilde0(delta, &r).unwrap() >= 0.0);
        prop_assert!(nu0_from_law(&law).unwrap().value > 0.0);
    }
}
