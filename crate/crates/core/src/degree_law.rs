//! The limiting degree law of the affine PA model and the asymptotic
//! variance constants of the likelihood estimators.
//!
//! With `theta = 2 + delta / mu`, the limiting law solves
//!
//! ```text
//! p_k = ((k - 1 + delta) p_{k-1} - (k + delta) p_k) / theta + r_k,   p_0 = 0,
//! ```
//!
//! and its tails satisfy `p_{>k} = (k + delta) p_k / theta + r_{>k}`.
//!
//! Beyond the support of `r` the recursion is a pure Gamma ratio, so the
//! mass and first moment of everything past the truncation point are
//! available in closed form. Series that are not (for example
//! `sum_k p_k / (k + delta)`) carry an explicit remainder bound.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_delta, Error, Result};
use crate::model::InitialDegreeModel;
use crate::numeric::CompensatedSum;

/// Default truncation: stop once `p_{>K}` falls below this.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Hard cap on the number of stored terms.
///
/// Heavy tails (`delta` close to `-mu`) would otherwise need `10^8` terms to
/// reach [`DEFAULT_TAIL_TOL`]. The cap costs nothing in accuracy because
/// every quantity computed from the law carries a remainder term.
pub const MAX_TERMS: usize = 1 << 20;

/// A series value together with a bound on its truncation remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

/// Limiting degree law at a given `(delta, r)`, truncated at `k_trunc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub delta: f64,
    pub theta: f64,
    pub mu: f64,
    /// `p[k]` for `k = 0..=k_trunc`, `p[0] = 0`.
    pub p: Vec<f64>,
    /// `p_tail[k] = p_{>k}`.
    pub p_tail: Vec<f64>,
    /// `q[k] = (k + delta) p_k / (2 mu + delta)`.
    pub q: Vec<f64>,
    /// `p_{>k_trunc}`, the mass not stored in `p`.
    pub trunc_mass: f64,
    /// `sum_{k > k_trunc} q_k`, in closed form.
    pub q_trunc_mass: f64,
}

impl LimitLaw {
    pub fn k_trunc(&self) -> usize {
        self.p.len() - 1
    }

    /// `p_k`, zero beyond the truncation point.
    pub fn pk(&self, k: usize) -> f64 {
        self.p.get(k).copied().unwrap_or(0.0)
    }

    /// Writes the `k,p_k,p_tail,q_k` table for `k = 1..=k_trunc`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,p_k,p_tail,q_k")?;
        for k in 1..self.p.len() {
            writeln!(w, "{},{},{},{}", k, self.p[k], self.p_tail[k], self.q[k])?;
        }
        Ok(())
    }

    /// Closed-form tails past `k_trunc`, valid once `k_trunc` covers the
    /// support of the initial-degree law.
    fn finish(delta: f64, theta: f64, mu: f64, p: Vec<f64>, p_tail: Vec<f64>) -> Self {
        let k = p.len() - 1;
        let kf = k as f64;
        let pk = p[k];
        let trunc_mass = p_tail[k];
        // sum_{j > k} (j + delta) p_j = p_k (k + delta)(k + 1 + delta) / (theta - 1)
        let q_trunc_mass = pk * (kf + delta) * (kf + 1.0 + delta) / ((theta - 1.0) * (2.0 * mu + delta));
        let mut q: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, pj)| (j as f64 + delta) * pj / (2.0 * mu + delta))
            .collect();
        q[0] = 0.0;
        Self { delta, theta, mu, p, p_tail, q, trunc_mass, q_trunc_mass }
    }
}

fn check_tail_tol(tail_tol: f64) -> Result<()> {
    if tail_tol > 0.0 && tail_tol < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tail_tol must lie in (0, 1), got {tail_tol}")))
    }
}

/// Limiting degree law by forward recursion from `p_0 = 0`.
///
/// Truncated at the smallest `K >= support_max(r)` with `p_{>K} < tail_tol`
/// (or at [`MAX_TERMS`]). Tails come from the `p_{>k}` identity, not from
/// summation.
pub fn limit_law(delta: f64, r: &InitialDegreeModel, tail_tol: f64) -> Result<LimitLaw> {
    check_delta(delta)?;
    check_tail_tol(tail_tol)?;
    let mu = r.mu();
    let theta = 2.0 + delta / mu;
    let min_terms = r.support_max();
    let cap = MAX_TERMS.max(min_terms);

    let mut p = Vec::with_capacity(1024);
    let mut p_tail = Vec::with_capacity(1024);
    p.push(0.0);
    p_tail.push(1.0);
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let pk = ((kf - 1.0 + delta) * p[k - 1] + theta * r.r(k)) / (theta + kf + delta);
        let tail = (kf + delta) * pk / theta + r.tail(k);
        p.push(pk);
        p_tail.push(tail);
        if k >= cap || (k >= min_terms && tail < tail_tol) {
            break;
        }
    }
    Ok(LimitLaw::finish(delta, theta, mu, p, p_tail))
}

/// Limiting law for a fixed initial degree `m`, from the Gamma-ratio closed
/// form evaluated in log space, stored for `k = 0..=max(k_max, m)`.
pub fn fixed_m_law(delta: f64, m: u32, k_max: usize) -> Result<LimitLaw> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::Validation("fixed initial degree must be at least 1".into()));
    }
    let mu = f64::from(m);
    let mf = mu;
    let theta = 2.0 + delta / mu;
    let k_max = k_max.max(m as usize);
    let log_head = theta.ln() + ln_gamma(mf + delta + theta) - ln_gamma(mf + delta);
    let mut p = vec![0.0; k_max + 1];
    let mut p_tail = vec![1.0; k_max + 1];
    for k in 1..=k_max {
        let kf = k as f64;
        if k >= m as usize {
            p[k] = (log_head + ln_gamma(kf + delta) - ln_gamma(kf + 1.0 + delta + theta)).exp();
        }
        let r_tail = if k < m as usize { 1.0 } else { 0.0 };
        p_tail[k] = (kf + delta) * p[k] / theta + r_tail;
    }
    // Pin p_m to its telescoped value theta / (m + delta + theta).
    let pm = theta / (mf + delta + theta);
    p[m as usize] = pm;
    p_tail[m as usize] = (mf + delta) * pm / theta;
    Ok(LimitLaw::finish(delta, theta, mu, p, p_tail))
}

fn check_same_model(law: &LimitLaw, r: &InitialDegreeModel) -> Result<()> {
    if (law.mu - r.mu()).abs() > 1e-12 * r.mu() {
        return Err(Error::Validation(format!(
            "limit law was built for mean {}, model has mean {}",
            law.mu,
            r.mu()
        )));
    }
    if law.k_trunc() < r.support_max() {
        return Err(Error::Validation(
            "limit law is truncated inside the support of the initial-degree law".into(),
        ));
    }
    Ok(())
}

/// Limit of the normalised score, `iota'(delta)`, under the law `law0`
/// built at the true parameter.
pub fn limit_score(delta: f64, law0: &LimitLaw, r: &InitialDegreeModel) -> Result<f64> {
    limit_score_bounded(delta, law0, r).map(|b| b.value)
}

/// [`limit_score`] with its truncation remainder bound.
pub fn limit_score_bounded(delta: f64, law0: &LimitLaw, r: &InitialDegreeModel) -> Result<Bounded> {
    check_delta(delta)?;
    check_same_model(law0, r)?;
    let k_trunc = law0.k_trunc();
    let mut acc = CompensatedSum::new();
    for k in 1..=k_trunc {
        acc.add((law0.p_tail[k] - r.tail(k)) / (k as f64 + delta));
    }
    // Past k_trunc: sum_k p0_k (k + delta0) / (theta0 (k + delta)), and the
    // ratio (k + delta0)/(k + delta) lies between 1 and its value at k_trunc + 1.
    let k1 = k_trunc as f64 + 1.0;
    let base = law0.trunc_mass / law0.theta;
    let edge = base * (k1 + law0.delta) / (k1 + delta);
    acc.add(0.5 * (base + edge));
    let error_bound = 0.5 * (edge - base).abs();
    Ok(Bounded { value: acc.value() - 1.0 / (2.0 + delta / r.mu()), error_bound })
}

/// Inverse asymptotic variance `nu_0` of the MLE,
/// `sum_k mu q_k / (k + delta0)^2 - mu / (2 mu + delta0)^2`.
pub fn nu0(delta0: f64, r: &InitialDegreeModel, tail_tol: f64) -> Result<f64> {
    nu0_bounded(delta0, r, tail_tol).map(|b| b.value)
}

pub fn nu0_bounded(delta0: f64, r: &InitialDegreeModel, tail_tol: f64) -> Result<Bounded> {
    let law = limit_law(delta0, r, tail_tol)?;
    nu0_from_law(&law)
}

/// `nu_0` for a law already built at the true parameter.
pub fn nu0_from_law(law: &LimitLaw) -> Result<Bounded> {
    let mu = law.mu;
    let d = law.delta;
    let mut acc = CompensatedSum::new();
    for k in 1..=law.k_trunc() {
        let x = k as f64 + d;
        acc.add(mu * law.q[k] / (x * x));
    }
    // mu q_k/(k+d)^2 = mu p_k / ((2 mu + d)(k + d)); the remainder lies in
    // [0, mu p_{>K} / ((2 mu + d)(K + 1 + d))].
    let k1 = law.k_trunc() as f64 + 1.0;
    let rem_hi = mu * law.trunc_mass / ((2.0 * mu + d) * (k1 + d));
    acc.add(0.5 * rem_hi);
    let value = acc.value() - mu / ((2.0 * mu + d) * (2.0 * mu + d));
    if !(value > 0.0) {
        return Err(Error::Numerical(format!(
            "nu_0 evaluated to {value}; truncation is too aggressive"
        )));
    }
    Ok(Bounded { value, error_bound: 0.5 * rem_hi })
}

/// Predicted variance `1 / (n nu_0)` of the MLE at sample size `n`.
pub fn mle_variance(nu0: f64, n: usize) -> f64 {
    1.0 / (n as f64 * nu0)
}

/// Predicted variance `(nu_0 + nu~_0) / (nu_0^2 n)` of the QMLE.
pub fn qmle_variance(nu0: f64, nu_tilde0: f64, n: usize) -> f64 {
    (nu0 + nu_tilde0) / (nu0 * nu0 * n as f64)
}

/// The per-vertex influence `g(m)` of the initial-degree fluctuations on the
/// quasi-score at `delta0`.
pub fn quasi_influence(delta0: f64, r: &InitialDegreeModel, m: u32) -> f64 {
    let mu = r.mu();
    let mut acc = CompensatedSum::new();
    for k in 1..r.support_max().max(m as usize) {
        let indicator = if (m as usize) > k { 1.0 } else { 0.0 };
        acc.add((indicator - r.tail(k)) / (k as f64 + delta0));
    }
    acc.add((f64::from(m) - mu) / (delta0 + 2.0 * mu));
    acc.value()
}

/// Extra variance `nu~_0` the QMLE pays for not observing `(m_t)`.
///
/// r has finite support, so every moment is an exact finite sum.
pub fn nu_tilde0(delta0: f64, r: &InitialDegreeModel) -> Result<f64> {
    check_delta(delta0)?;
    let mu = r.mu();
    let denom = delta0 + 2.0 * mu;
    let mut e_g = CompensatedSum::new();
    let mut e_g2 = CompensatedSum::new();
    let mut e_gm = CompensatedSum::new();
    for (m, rm) in r.support() {
        let g = quasi_influence(delta0, r, m);
        e_g.add(rm * g);
        e_g2.add(rm * g * g);
        e_gm.add(rm * g * f64::from(m));
    }
    let var_g = e_g2.value() - e_g.value() * e_g.value();
    let value = var_g + 8.0 * mu * mu * r.variance() / denom.powi(4)
        - 4.0 * mu * e_gm.value() / (denom * denom);
    let scale = var_g.abs() + 8.0 * mu * mu * r.variance() / denom.powi(4);
    if value < 0.0 {
        if value > -1e-12 * scale.max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::Numerical(format!("nu~_0 evaluated to {value} < 0")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degenerate(m: u32) -> InitialDegreeModel {
        InitialDegreeModel::degenerate(m).unwrap()
    }

    #[test]
    fn barabasi_albert_law() {
        let law = limit_law(0.0, &degenerate(1), DEFAULT_TAIL_TOL).unwrap();
        for k in 1..200 {
            let k = k as f64;
            let exact = 4.0 / (k * (k + 1.0) * (k + 2.0));
            assert!((law.pk(k as usize) - exact).abs() < 1e-14);
        }
        assert!((law.p[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((law.p[2] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn first_term_for_uniform_one_two() {
        let r = InitialDegreeModel::uniform(1, 2).unwrap();
        let law = limit_law(0.0, &r, DEFAULT_TAIL_TOL).unwrap();
        assert!((law.theta - 2.0).abs() < 1e-15);
        // theta / (1 + theta) * r_1
        assert!((law.p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_mass_below_minimal_initial_degree() {
        let r = InitialDegreeModel::from_pairs(&[(3, 0.5), (6, 0.5)]).unwrap();
        for delta in [-0.7, 0.0, 2.5] {
            let law = limit_law(delta, &r, DEFAULT_TAIL_TOL).unwrap();
            assert_eq!(law.p[1], 0.0);
            assert_eq!(law.p[2], 0.0);
            assert!(law.p[3] > 0.0);
        }
    }

    #[test]
    fn fixed_m_closed_form() {
        let law = fixed_m_law(0.0, 5, 2000).unwrap();
        assert!((law.p[5] - 60.0 / 210.0).abs() < 1e-15);
        for k in 5..2000 {
            let kf = k as f64;
            assert!((law.p[k] - 60.0 / (kf * (kf + 1.0) * (kf + 2.0))).abs() < 1e-13, "k = {k}");
        }
        assert!(law.p[..5].iter().all(|p| *p == 0.0));
        let total: f64 = law.p.iter().sum::<f64>() + law.trunc_mass;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_m_mode_value() {
        for (delta, m) in [(-0.5, 1), (0.3, 2), (4.0, 7)] {
            let law = fixed_m_law(delta, m, 50).unwrap();
            let theta = 2.0 + delta / m as f64;
            assert!((law.p[m as usize] - theta / (m as f64 + delta + theta)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(limit_law(-1.0, &degenerate(1), 1e-12), Err(Error::Domain(_))));
        assert!(matches!(limit_law(0.0, &degenerate(1), 0.0), Err(Error::Domain(_))));
        assert!(matches!(fixed_m_law(-1.5, 2, 10), Err(Error::Domain(_))));
        assert!(nu_tilde0(-2.0, &degenerate(1)).is_err());
    }

    #[test]
    fn nu0_barabasi_albert_closed_form() {
        let v = nu0(0.0, &degenerate(1), DEFAULT_TAIL_TOL).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0 - 1.5;
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn nu_tilde_vanishes_for_fixed_degree() {
        for m in [1, 2, 5, 9] {
            for delta in [-0.5, 0.0, 3.0] {
                assert_eq!(nu_tilde0(delta, &degenerate(m)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn limit_score_zero_at_truth() {
        let r = InitialDegreeModel::uniform(1, 3).unwrap();
        let law = limit_law(1.0, &r, DEFAULT_TAIL_TOL).unwrap();
        let s = limit_score_bounded(1.0, &law, &r).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert_eq!(s.error_bound, 0.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let law = fixed_m_law(0.0, 1, 3).unwrap();
        let mut buf = Vec::new();
        law.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,p_k,p_tail,q_k");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0.666666666666666"));
    }
}
