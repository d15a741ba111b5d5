//! Closed-form quantities for the truncated Gaussian-mixture scenario and
//! every bound expression used by the audits.
//!
//! All logarithms are natural; entropies are in nats.

mod quadrature;

pub use quadrature::{integrate, QuadratureSpec};

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Sign};

/// Standard normal CDF, `Φ(x) = erfc(−x/√2)/2`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Φ is undefined at {x}")));
    }
    Ok(0.5 * libm::erfc(-x * FRAC_1_SQRT_2))
}

/// `T | S` is `N(S·mu, 1)` truncated to `[−r, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub mu: f64,
    pub r: f64,
}

impl MixtureParams {
    pub fn new(mu: f64, r: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("truncation radius must be positive, got {r}")));
        }
        Ok(MixtureParams { mu, r })
    }

    /// `p_μ = Φ(r+μ) − Φ(−r+μ)`, the untruncated mass of `[−r, r]`.
    /// Identical for both signs by symmetry.
    pub fn mass(&self) -> f64 {
        let hi = 0.5 * libm::erfc(-(self.r + self.mu) * FRAC_1_SQRT_2);
        let lo = 0.5 * libm::erfc(-(-self.r + self.mu) * FRAC_1_SQRT_2);
        hi - lo
    }

    /// Diameter of the support `[−r, r]`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.r
    }
}

/// Conditional density `f_±(t)` of `T` given `S = sign`; zero outside `[−r, r]`.
pub fn truncated_density(t: f64, sign: Sign, params: &MixtureParams) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("density argument must be finite, got {t}")));
    }
    if t.abs() > params.r {
        return Ok(0.0);
    }
    let z = t - sign.value() * params.mu;
    Ok((-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * params.mass()))
}

/// CDF of the truncated conditional law of `T` given `S = sign`.
pub fn truncated_cdf(t: f64, sign: Sign, params: &MixtureParams) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("cdf argument must be finite, got {t}")));
    }
    if t <= -params.r {
        return Ok(0.0);
    }
    if t >= params.r {
        return Ok(1.0);
    }
    let m = sign.value() * params.mu;
    let num = std_normal_cdf(t - m)? - std_normal_cdf(-params.r - m)?;
    Ok((num / params.mass()).clamp(0.0, 1.0))
}

/// The Bayes-optimal squared-loss predictor `E[S | T = t] = tanh(μt)`.
pub fn eta(t: f64, mu: f64) -> f64 {
    (mu * t).tanh()
}

/// Barron constant of `η(t) = tanh(μt)`: the Fourier transform of `η'` is
/// non-negative, so `C_η = η'(0) = |μ|`.
pub fn barron_constant_tanh(mu: f64) -> f64 {
    mu.abs()
}

/// Numerical Barron constant of `tanh(μ·)`:
/// `(|μ|/√(2π)) ∫ |(1/μ)·√(π/2)·(ω/μ)·csch(πω/(2μ))| dω` over ℝ.
///
/// The integrand is even and decays like `exp(−π|ω|/(2|μ|))`, so the real
/// line is cut at `|ω| = 60|μ|` (tail mass below 1e-30 relative).
pub fn barron_constant_numeric(mu: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !mu.is_finite() || mu == 0.0 {
        return Err(Error::Domain(format!(
            "numeric Barron constant needs finite non-zero mu, got {mu}; use the closed form"
        )));
    }
    let m = mu.abs();
    let scale = m / (2.0 * PI).sqrt();
    let amp = (PI / 2.0).sqrt() / m;
    let integrand = move |omega: f64| {
        let u = omega / m;
        // u·csch(πu/2) → 2/π as u → 0
        let shape = if u.abs() < 1e-8 {
            2.0 / PI
        } else {
            u / (0.5 * PI * u).sinh()
        };
        scale * (amp * shape).abs()
    };
    let half = integrate(integrand, 0.0, 60.0 * m, spec)?;
    Ok(2.0 * half)
}

/// Minimal true squared loss `E[(S − tanh(μT))²]` of the mixture scenario:
/// `(√2/(√π·p_μ)) ∫_{−r}^{r} e^{−(t+μ)²/2} / (1 + e^{−2μt}) dt`.
pub fn minimal_true_loss(params: &MixtureParams, spec: &QuadratureSpec) -> Result<f64> {
    let MixtureParams { mu, r } = *params;
    let prefactor = SQRT_2 / (PI.sqrt() * params.mass());
    let integrand = move |t: f64| {
        let z = t + mu;
        prefactor * (-0.5 * z * z).exp() / (1.0 + (-2.0 * mu * t).exp())
    };
    integrate(integrand, -r, r, spec)
}

/// Inputs shared by the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundIngredients {
    pub delta: f64,
    pub n: u64,
    pub k: u64,
    pub c_eta: f64,
    pub diam: f64,
}

impl BoundIngredients {
    pub fn new(delta: f64, n: u64, k: u64, c_eta: f64, diam: f64) -> Result<Self> {
        check_delta(delta)?;
        if n == 0 || k == 0 {
            return Err(Error::InvalidArgument("n and k must be at least 1".into()));
        }
        if !(c_eta >= 0.0 && c_eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("C_eta must be non-negative, got {c_eta}")));
        }
        if !(diam >= 0.0 && diam.is_finite()) {
            return Err(Error::InvalidArgument(format!("diameter must be non-negative, got {diam}")));
        }
        Ok(BoundIngredients { delta, n, k, c_eta, diam })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// The three additive pieces of the representation-setting slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationTerms {
    /// `(2 + Dia·C_η)²·√(log(1/δ)/(2n))`
    pub generalization: f64,
    /// `(Dia·C_η)²/k`
    pub inverse_k: f64,
    /// `4·Dia·C_η/√k`
    pub inverse_sqrt_k: f64,
}

impl RepresentationTerms {
    pub fn total(&self) -> f64 {
        self.generalization + self.inverse_k + self.inverse_sqrt_k
    }
}

pub fn representation_terms(b: &BoundIngredients) -> RepresentationTerms {
    let dc = b.diam * b.c_eta;
    let n = b.n as f64;
    let k = b.k as f64;
    RepresentationTerms {
        generalization: (2.0 + dc).powi(2) * ((1.0 / b.delta).ln() / (2.0 * n)).sqrt(),
        inverse_k: dc * dc / k,
        inverse_sqrt_k: 4.0 * dc / k.sqrt(),
    }
}

/// Slack `ε` such that `L_{k,S_n} − L ≤ ε` with probability `≥ 1 − δ` for
/// the squared loss when `T` is continuous.
pub fn representation_bound(b: &BoundIngredients) -> f64 {
    representation_terms(b).total()
}

/// Squared-loss slack for symbolic `T`: `2·√(2·log(1/δ)/n)`.
pub fn classification_sq_bound(delta: f64, n: u64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    Ok(2.0 * (2.0 * (1.0 / delta).ln() / n as f64).sqrt())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Binary entropy in nats with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy needs x in [0, 1], got {x}")));
    }
    Ok(xlogx(x) + xlogx(1.0 - x))
}

/// `−x·log x` with the continuous extension at 0.
fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// High-probability radius of the empirical joint law of `(S, T)` in total
/// variation: `√((2d + log(1/δ))/n)`.
pub fn weissman_radius(delta: f64, n: u64, d: u64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    Ok(((2.0 * d as f64 + (1.0 / delta).ln()) / n as f64).sqrt())
}

/// Smallest `n` satisfying `n ≥ 4·(2d + log(1/δ))`.
pub fn min_log_bound_samples(delta: f64, d: u64) -> Result<u64> {
    check_delta(delta)?;
    Ok((4.0 * (2.0 * d as f64 + (1.0 / delta).ln())).ceil() as u64)
}

/// Log-loss slack for symbolic `T`: `h_b(√((2d + log(1/δ))/n))`, defined for
/// `n ≥ 4·(2d + log(1/δ))`.
pub fn classification_log_bound(delta: f64, n: u64, d: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("alphabet size d must be at least 1".into()));
    }
    let min_n = min_log_bound_samples(delta, d)?;
    if n < min_n {
        return Err(Error::SampleTooSmall { n, min_n });
    }
    binary_entropy(weissman_radius(delta, n, d)?)
}

/// Continuity modulus of conditional entropy in total variation:
/// `θ·log(|U| − 1) + h_b(θ)` for `θ ∈ [0, 1 − 1/|U|]`.
pub fn alhejji_smith_gap(theta: f64, alphabet_size: u64) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::Domain(format!(
            "alphabet size must be at least 2, got {alphabet_size}"
        )));
    }
    let size = alphabet_size as f64;
    let upper = 1.0 - 1.0 / size;
    if !(0.0..=upper).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, {upper}], got {theta}")));
    }
    Ok(theta * (size - 1.0).ln() + binary_entropy(theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference values below were produced with 40-digit mpmath arithmetic.
    const PHI_3: f64 = 0.998_650_101_968_369_9;
    const TRUE_LOSS_MU_01: f64 = 0.990_357_385_448_704_6;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn normal_cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(std_normal_cdf(3.0).unwrap(), PHI_3, epsilon = 1e-14);
        assert_abs_diff_eq!(std_normal_cdf(3.0).unwrap(), 0.998_650_1, epsilon = 1e-7);
        assert_abs_diff_eq!(
            std_normal_cdf(-3.0).unwrap(),
            1.0 - std_normal_cdf(3.0).unwrap(),
            epsilon = 1e-15
        );
        assert!(std_normal_cdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn normal_cdf_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 0..10_000 {
            let x = -10.0 + 20.0 * i as f64 / 9_999.0;
            let p = std_normal_cdf(x).unwrap();
            assert!(p >= prev, "not monotone at {x}");
            prev = p;
            if x.abs() <= 8.0 {
                let q = std_normal_cdf(-x).unwrap();
                assert!((p + q - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn density_examples() {
        let p0 = MixtureParams::new(0.0, 3.0).unwrap();
        let expected = 1.0 / ((2.0 * PI).sqrt() * (PHI_3 - (1.0 - PHI_3)));
        assert_abs_diff_eq!(truncated_density(0.0, Sign::Plus, &p0).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.400_022_258_921_284_8, epsilon = 1e-13);

        let p1 = MixtureParams::new(0.1, 3.0).unwrap();
        assert_abs_diff_eq!(
            truncated_density(0.1, Sign::Plus, &p1).unwrap(),
            0.400_075_861_955_390_8,
            epsilon = 1e-13
        );
        assert_eq!(truncated_density(3.5, Sign::Plus, &p1).unwrap(), 0.0);
        assert!(truncated_density(f64::NAN, Sign::Plus, &p1).is_err());
    }

    #[test]
    fn density_symmetry_and_normalization() {
        for &mu in &[0.0, 0.01, 0.1, 0.5, 1.0, -0.3] {
            for &r in &[0.5, 1.0, 3.0, 5.0] {
                let p = MixtureParams::new(mu, r).unwrap();
                let total = integrate(
                    |t| truncated_density(t, Sign::Plus, &p).unwrap(),
                    -r,
                    r,
                    &quad(),
                )
                .unwrap();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
                for i in 0..=20 {
                    let t = -r + 2.0 * r * i as f64 / 20.0;
                    let a = truncated_density(t, Sign::Plus, &p).unwrap();
                    let b = truncated_density(-t, Sign::Minus, &p).unwrap();
                    assert_abs_diff_eq!(a, b, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn truncated_cdf_matches_density_integral() {
        let p = MixtureParams::new(0.1, 3.0).unwrap();
        for &t in &[-2.5, -1.0, 0.0, 0.7, 2.9] {
            let by_quad = integrate(|x| truncated_density(x, Sign::Minus, &p).unwrap(), -3.0, t, &quad()).unwrap();
            assert_abs_diff_eq!(truncated_cdf(t, Sign::Minus, &p).unwrap(), by_quad, epsilon = 1e-9);
        }
        assert_eq!(truncated_cdf(-4.0, Sign::Plus, &p).unwrap(), 0.0);
        assert_eq!(truncated_cdf(4.0, Sign::Plus, &p).unwrap(), 1.0);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.0, 0.7), 0.0);
        assert_abs_diff_eq!(eta(1.0, 0.1), 0.099_667_994_624_955_82, epsilon = 1e-15);
        for &(t, mu) in &[(0.3, 0.1), (2.0, -0.4), (-1.5, 0.9)] {
            assert_eq!(eta(t, mu), -eta(-t, mu));
            assert_eq!(eta(t, mu), -eta(t, -mu));
        }
    }

    #[test]
    fn barron_closed_form() {
        assert_eq!(barron_constant_tanh(0.1), 0.1);
        assert_eq!(barron_constant_tanh(0.0), 0.0);
        assert_eq!(barron_constant_tanh(-0.2), 0.2);
    }

    #[test]
    fn barron_numeric_matches_closed_form() {
        for &mu in &[0.01, 0.1, 1.0, -0.1] {
            let c = barron_constant_numeric(mu, &quad()).unwrap();
            let exact = barron_constant_tanh(mu);
            assert!(((c - exact) / exact).abs() < 1e-7, "mu={mu}: {c}");
        }
        let tight = QuadratureSpec { abs_tol: 1e-13, max_subdivisions: 4000 };
        assert_abs_diff_eq!(barron_constant_numeric(0.01, &tight).unwrap(), 0.01, epsilon = 1e-8);
        assert!(barron_constant_numeric(0.0, &quad()).is_err());
    }

    #[test]
    fn true_loss_examples() {
        let l0 = minimal_true_loss(&MixtureParams::new(0.0, 3.0).unwrap(), &quad()).unwrap();
        assert_abs_diff_eq!(l0, 1.0, epsilon = 1e-8);
        let l1 = minimal_true_loss(&MixtureParams::new(0.1, 3.0).unwrap(), &quad()).unwrap();
        assert_abs_diff_eq!(l1, TRUE_LOSS_MU_01, epsilon = 1e-9);
        // 10^7-sample Monte-Carlo estimate 0.990336 ± 6.1e-5 (numpy, seed 20240601).
        assert!((l1 - 0.990_336_158_9).abs() < 3.0 * 6.14e-5);
        let l01 = minimal_true_loss(&MixtureParams::new(0.01, 3.0).unwrap(), &quad()).unwrap();
        assert!(l1 < l01 && l01 < 1.0);
    }

    #[test]
    fn true_loss_is_monotone_on_grid() {
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let mu = 0.01 * i as f64;
            let l = minimal_true_loss(&MixtureParams::new(mu, 3.0).unwrap(), &quad()).unwrap();
            assert!(l <= prev + 1e-12, "not monotone at mu={mu}");
            prev = l;
        }
    }

    #[test]
    fn true_loss_matches_bayes_risk_integral() {
        // Independent route: ∫ (1 − η²)·(f₊ + f₋)/2 dt.
        for &mu in &[0.05, 0.3, 1.0] {
            let p = MixtureParams::new(mu, 3.0).unwrap();
            let direct = integrate(
                |t| {
                    let e = eta(t, mu);
                    let fp = truncated_density(t, Sign::Plus, &p).unwrap();
                    let fm = truncated_density(t, Sign::Minus, &p).unwrap();
                    (1.0 - e * e) * 0.5 * (fp + fm)
                },
                -3.0,
                3.0,
                &quad(),
            )
            .unwrap();
            assert_abs_diff_eq!(minimal_true_loss(&p, &quad()).unwrap(), direct, epsilon = 1e-9);
        }
    }

    fn eq38(delta: f64, n: f64, k: f64, mu: f64) -> f64 {
        2.0 * (1.0 + 3.0 * mu).powi(2) * (2.0 * (1.0 / delta).ln() / n).sqrt()
            + 36.0 * mu * mu / k
            + 24.0 * mu / k.sqrt()
    }

    #[test]
    fn representation_bound_examples() {
        let b = BoundIngredients::new(0.01, 100_000, 1000, 0.1, 6.0).unwrap();
        assert_abs_diff_eq!(representation_bound(&b), 0.108_692_699_010_432_5, epsilon = 1e-12);
        assert_abs_diff_eq!(representation_bound(&b), 0.10869, epsilon = 1e-4);
        assert_abs_diff_eq!(representation_bound(&b), eq38(0.01, 1e5, 1e3, 0.1), epsilon = 1e-12);

        let b = BoundIngredients::new(0.01, 100_000, 1000, 0.01, 6.0).unwrap();
        assert_abs_diff_eq!(representation_bound(&b), 0.027_956_090_945_365_45, epsilon = 1e-12);

        let b = BoundIngredients::new(0.05, 5000, 64, 0.0, 6.0).unwrap();
        assert_abs_diff_eq!(
            representation_bound(&b),
            4.0 * ((1.0f64 / 0.05).ln() / 10_000.0).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn bound_ingredients_validation() {
        assert!(BoundIngredients::new(0.0, 10, 10, 0.1, 6.0).is_err());
        assert!(BoundIngredients::new(1.0, 10, 10, 0.1, 6.0).is_err());
        assert!(BoundIngredients::new(0.1, 0, 10, 0.1, 6.0).is_err());
        assert!(BoundIngredients::new(0.1, 10, 0, 0.1, 6.0).is_err());
        assert!(BoundIngredients::new(0.1, 10, 10, -0.1, 6.0).is_err());
        assert!(BoundIngredients::new(0.1, 10, 10, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn classification_sq_examples() {
        let v = classification_sq_bound(0.01, 100_000).unwrap();
        assert_abs_diff_eq!(v, 0.019_194_103_648_752_32, epsilon = 1e-15);
        assert_abs_diff_eq!(classification_sq_bound(0.01, 400_000).unwrap(), v / 2.0, epsilon = 1e-15);
        assert!(classification_sq_bound(1.0 - 1e-15, 10).unwrap() < 1e-6);
        assert!(classification_sq_bound(1.0, 10).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.2).unwrap(), 0.500_402_423_538_187_9, epsilon = 1e-15);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert_abs_diff_eq!(binary_entropy(x).unwrap(), binary_entropy(1.0 - x).unwrap(), epsilon = 1e-15);
        }
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn log_bound_examples() {
        let r = weissman_radius(0.01, 1000, 2).unwrap();
        assert_abs_diff_eq!(r, 0.092_765, epsilon = 1e-6);
        assert_abs_diff_eq!(r, 0.092_764_056_541_249_27, epsilon = 1e-15);
        assert_abs_diff_eq!(weissman_radius(0.01, 4000, 2).unwrap(), r / 2.0, epsilon = 1e-15);
        assert!(weissman_radius(0.01, 35, 2).unwrap() <= 0.5);

        let v = classification_log_bound(0.01, 1000, 2).unwrap();
        assert_abs_diff_eq!(v, 0.30891, epsilon = 1e-4);
        assert_abs_diff_eq!(v, 0.308_886_622_264_863, epsilon = 1e-13);

        match classification_log_bound(0.01, 34, 2) {
            Err(Error::SampleTooSmall { n: 34, min_n: 35 }) => {}
            other => panic!("expected sample-too-small, got {other:?}"),
        }
        assert!(classification_log_bound(0.01, 35, 2).is_ok());
        assert!(classification_log_bound(0.01, 10_000_000_000, 2).unwrap() < 1e-3);
    }

    #[test]
    fn alhejji_smith_examples() {
        for &t in &[0.0, 0.1, 0.3, 0.5] {
            assert_eq!(alhejji_smith_gap(t, 2).unwrap(), binary_entropy(t).unwrap());
        }
        assert_eq!(alhejji_smith_gap(0.0, 7).unwrap(), 0.0);
        assert_abs_diff_eq!(alhejji_smith_gap(0.25, 4).unwrap(), 0.83701, epsilon = 1e-4);
        assert_abs_diff_eq!(alhejji_smith_gap(0.25, 4).unwrap(), 0.836_988_216_785_835_8, epsilon = 1e-14);
        assert!(alhejji_smith_gap(0.6, 2).is_err());
        assert!(alhejji_smith_gap(-0.01, 3).is_err());
        assert!(alhejji_smith_gap(0.1, 1).is_err());
    }

    #[test]
    fn log_bound_is_composition() {
        for &delta in &[0.001, 0.01, 0.2] {
            for &d in &[1u64, 2, 5, 20] {
                let min_n = min_log_bound_samples(delta, d).unwrap();
                for n in [min_n, min_n + 1, 2 * min_n, 1000 * min_n] {
                    let r = weissman_radius(delta, n, d).unwrap();
                    assert!(r <= 0.5);
                    assert_eq!(
                        classification_log_bound(delta, n, d).unwrap(),
                        alhejji_smith_gap(r, 2).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn bounds_decrease_in_n() {
        let mut prev = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for n in (100..100_000).step_by(997) {
            let rep = representation_bound(&BoundIngredients::new(0.01, n, 100, 0.05, 6.0).unwrap());
            let sq = classification_sq_bound(0.01, n).unwrap();
            let lg = classification_log_bound(0.01, n, 3).unwrap();
            assert!(rep >= 0.0 && sq >= 0.0 && lg >= 0.0);
            assert!(rep < prev.0 && sq < prev.1 && lg < prev.2);
            prev = (rep, sq, lg);
        }
    }
}
