//! Executable closed forms for the Kerr/noise moment machinery, plus
//! brute-force Monte Carlo verifiers for each of them.
//!
//! The closed forms are exact, so a verifier disagreeing beyond its error
//! bars indicates an implementation bug, not statistics. All verifiers use
//! fixed seeds.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::conditional_cross_moment_bound;
use crate::channel::{fill_circular_gaussian, ComplexField, NoiseSource, Propagator, INPUT_DRAW_LABEL};
use crate::error::{Error, Result};
use crate::params::ChannelParams;

use std::f64::consts::E;

/// Inputs for the single-sample Kerr moment expressions: a fixed signal
/// sample `c` (√W), the noise variance `sigma2` (W, must be positive), and
/// the accumulated Kerr rotation rate `theta` = γΔz (1/W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrMomentInput {
    pub c: Complex64,
    pub sigma2: f64,
    pub theta: f64,
}

/// Moment generating function of a noncentral chi-squared variable with two
/// degrees of freedom: M(t) = (1/(1−2t))·exp(λt/(1−2t)). Purely imaginary t
/// is always fine; real parts must stay below the t = 1/2 pole.
pub fn noncentral_chi2_mgf(t: Complex64, lambda: f64) -> Result<Complex64> {
    if lambda < 0.0 {
        return Err(Error::invalid("lambda", "must be >= 0"));
    }
    let denom = Complex64::new(1.0, 0.0) - 2.0 * t;
    if denom.norm() == 0.0 {
        return Err(Error::invalid("t", "t = 1/2 is the MGF pole"));
    }
    if t.im == 0.0 && t.re >= 0.5 {
        return Err(Error::invalid("t", "real t must satisfy t < 1/2"));
    }
    Ok(denom.inv() * (lambda * t / denom).exp())
}

/// E[e^{jθ|c+n|²}] for n ~ CN(0, σ²):
/// (1/(1−jθσ²))·exp(jθ|c|²/(1−jθσ²)).
pub fn expected_kerr_phase(inp: &KerrMomentInput) -> Complex64 {
    assert!(inp.sigma2 > 0.0, "sigma2 must be positive");
    let denom = Complex64::new(1.0, -inp.theta * inp.sigma2);
    denom.inv() * (Complex64::new(0.0, inp.theta * inp.c.norm_sqr()) / denom).exp()
}

/// E[n·e^{jθ(|n|²+2Re(c n*))}] for n ~ CN(0, σ²):
/// jσ²θ/(1−jσ²θ)²·c·exp(−(σθ|c|)²/(1−jσ²θ)).
pub fn expected_noise_kerr(inp: &KerrMomentInput) -> Complex64 {
    assert!(inp.sigma2 > 0.0, "sigma2 must be positive");
    let s2t = inp.sigma2 * inp.theta;
    let denom = Complex64::new(1.0, -s2t);
    let lead = Complex64::new(0.0, s2t) / (denom * denom);
    let expo = -(inp.sigma2 * inp.theta * inp.theta * inp.c.norm_sqr()) / denom;
    lead * inp.c * expo.exp()
}

/// Largest possible magnitude of [`expected_noise_kerr`] over all signal
/// samples: σ/√(2e(1+σ⁴θ²)). The supremum is over unbounded |c| (the
/// maximizer sits at |c|² = (1+σ⁴θ²)/(2σ²θ²)).
pub fn max_noise_kerr_magnitude(sigma2: f64, theta: f64) -> f64 {
    assert!(sigma2 > 0.0, "sigma2 must be positive");
    let s4t2 = sigma2 * sigma2 * theta * theta;
    sigma2.sqrt() / (2.0 * E * (1.0 + s4t2)).sqrt()
}

fn complex_mean_se(samples_mean: Complex64, sq_re: f64, sq_im: f64, n: f64) -> f64 {
    let var_re = (sq_re / n - samples_mean.re * samples_mean.re).max(0.0);
    let var_im = (sq_im / n - samples_mean.im * samples_mean.im).max(0.0);
    ((var_re + var_im) / n).sqrt()
}

/// Monte Carlo verifier for [`noncentral_chi2_mgf`]: sample mean of e^{tw}
/// over draws of w, with its standard error.
pub fn mc_chi2_mgf(t: Complex64, lambda: f64, samples: usize, seed: u64) -> (Complex64, f64) {
    let ns = NoiseSource::new(seed, 0);
    let mut rng = ns.rng_for(0);
    let shift = lambda.sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sq_re = 0.0;
    let mut sq_im = 0.0;
    for _ in 0..samples {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let w = (z1 + shift) * (z1 + shift) + z2 * z2;
        let v = (t * w).exp();
        acc += v;
        sq_re += v.re * v.re;
        sq_im += v.im * v.im;
    }
    let n = samples as f64;
    let mean = acc / n;
    (mean, complex_mean_se(mean, sq_re, sq_im, n))
}

/// Monte Carlo verifier for [`expected_kerr_phase`].
pub fn mc_kerr_phase(inp: &KerrMomentInput, samples: usize, seed: u64) -> (Complex64, f64) {
    let ns = NoiseSource::new(seed, 1);
    let mut rng = ns.rng_for(0);
    let scale = (inp.sigma2 / 2.0).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sq_re = 0.0;
    let mut sq_im = 0.0;
    for _ in 0..samples {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let n = Complex64::new(scale * re, scale * im);
        let v = Complex64::from_polar(1.0, inp.theta * (inp.c + n).norm_sqr());
        acc += v;
        sq_re += v.re * v.re;
        sq_im += v.im * v.im;
    }
    let n = samples as f64;
    let mean = acc / n;
    (mean, complex_mean_se(mean, sq_re, sq_im, n))
}

/// Monte Carlo verifier for [`expected_noise_kerr`].
pub fn mc_noise_kerr(inp: &KerrMomentInput, samples: usize, seed: u64) -> (Complex64, f64) {
    let ns = NoiseSource::new(seed, 2);
    let mut rng = ns.rng_for(0);
    let scale = (inp.sigma2 / 2.0).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sq_re = 0.0;
    let mut sq_im = 0.0;
    for _ in 0..samples {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let n = Complex64::new(scale * re, scale * im);
        let phase = inp.theta * (n.norm_sqr() + 2.0 * (inp.c * n.conj()).re);
        let v = n * Complex64::from_polar(1.0, phase);
        acc += v;
        sq_re += v.re * v.re;
        sq_im += v.im * v.im;
    }
    let n = samples as f64;
    let mean = acc / n;
    (mean, complex_mean_se(mean, sq_re, sq_im, n))
}

/// Result of one conditional cross-moment check.
#[derive(Debug, Clone)]
pub struct CrossMomentReport {
    /// Sample mean of u_m·u_n* conditioned on the drawn input.
    pub estimate: Complex64,
    /// Standard error of the complex mean.
    pub std_error: f64,
    /// Closed-form ceiling the magnitude must stay below.
    pub bound: f64,
    /// Whether |estimate| + 3·std_error ≤ bound.
    pub pass: bool,
    pub m: usize,
    pub n: usize,
    pub samples: usize,
}

/// Estimate |E[u_m·u_n* | input]| after `k` noisy segments (the Kerr output
/// of segment k+1) for a random off-diagonal pair (m, n), and compare its
/// 3σ interval against the closed-form ceiling. Needs k ≥ 1: the first
/// segment's Kerr output is deterministic given the input, so the bound does
/// not apply there.
pub fn cross_moment_bound_check(
    c: &ChannelParams,
    input_power: f64,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<CrossMomentReport> {
    if k < 1 {
        return Err(Error::invalid("k", "needs k >= 1: no noise before the first segment"));
    }
    if k >= c.segments {
        return Err(Error::invalid("k", "k must leave a segment to apply the Kerr step"));
    }
    if samples < 2 {
        return Err(Error::invalid("samples", "must be >= 2"));
    }
    if !input_power.is_finite() || input_power <= 0.0 {
        return Err(Error::invalid("input_power", "must be > 0"));
    }
    let bound = conditional_cross_moment_bound(c)?;
    let prop = Propagator::new(c);
    let root = NoiseSource::new(seed, 0);
    let mut rng = root.rng_for(INPUT_DRAW_LABEL);

    let mut input = vec![Complex64::new(0.0, 0.0); c.block_len];
    fill_circular_gaussian(&mut rng, input_power, &mut input);
    let a0 = ComplexField::new(input);

    // random off-diagonal pair, from the same deterministic stream
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
        use rand::Rng;
        rng.random_range(0..c.block_len)
    };
    let m = draw(&mut rng);
    let n = loop {
        let cand = draw(&mut rng);
        if cand != m {
            break cand;
        }
    };

    let mut acc = Complex64::new(0.0, 0.0);
    let mut sq_re = 0.0;
    let mut sq_im = 0.0;
    for s in 0..samples {
        let y = prop.run_segments(&a0, &root.substream(s as u64 + 1), k);
        let u = prop.nonlinear_step(&y);
        let v = u[m] * u[n].conj();
        acc += v;
        sq_re += v.re * v.re;
        sq_im += v.im * v.im;
    }
    let count = samples as f64;
    let mean = acc / count;
    let se = complex_mean_se(mean, sq_re, sq_im, count);
    Ok(CrossMomentReport {
        estimate: mean,
        std_error: se,
        bound,
        pass: mean.norm() + 3.0 * se <= bound,
        m,
        n,
        samples,
    })
}
