//! Closed-form capacity bounds and their building blocks: the dispersion
//! mixing coefficients A_m, the spread measure α, the moment constants M_K,
//! C1, C2, G, the two closed-form lower bounds with their high-power
//! asymptotes, the AWGN upper bound, and the low-power approximation.
//!
//! All outputs are in bits (base-2 logs). Quantities of the form
//! |A_0|^{4(K-1)} are handled in log space: with |A_0| within ~1e-5 of one
//! and exponents in the thousands, naive powering loses every significant
//! digit of 1 - |A_0|^{4(K-1)}, so that combination is always produced with
//! expm1.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::dispersion_profile;
use crate::error::{Error, Result};
use crate::params::{k_validity_threshold, ChannelParams};

use std::f64::consts::{E, PI};

/// Mixing coefficient A_m = (1/L)·Σ_l e^{jΔz f(l)}·e^{-j2πlm/L}, evaluated
/// by direct summation (the definitional form; kept independent of the FFT
/// path used by [`BoundConstants`]).
pub fn a_coeff(m: usize, c: &ChannelParams) -> Complex64 {
    assert!(m < c.block_len, "coefficient index out of range");
    let l_f = c.block_len as f64;
    let tau = 2.0 * PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..c.block_len {
        let phase = c.dz * dispersion_profile(l, c) - tau * (l as f64) * (m as f64) / l_f;
        acc += Complex64::from_polar(1.0, phase);
    }
    acc / l_f
}

/// All L mixing coefficients at once via one FFT of the segment phase vector.
fn a_vector(c: &ChannelParams) -> Vec<Complex64> {
    let l = c.block_len;
    let mut buf: Vec<Complex64> = (0..l)
        .map(|bin| Complex64::from_polar(1.0, c.dz * dispersion_profile(bin, c)))
        .collect();
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    let scale = 1.0 / l as f64;
    for x in buf.iter_mut() {
        *x *= scale;
    }
    buf
}

/// α = (Σ|A_m|)² − Σ|A_m|²: the off-diagonal mass of the mixing kernel.
fn alpha_from_magnitudes(mags: impl Iterator<Item = f64>) -> f64 {
    let (sum, sum_sq) = mags.fold((0.0, 0.0), |(s, q), m| (s + m, q + m * m));
    (sum * sum - sum_sq).max(0.0)
}

pub fn alpha_coefficient(c: &ChannelParams) -> f64 {
    alpha_from_magnitudes(a_vector(c).iter().map(|a| a.norm()))
}

/// Shared factor K³/(2eγ²P_nZ²) + K/(eZγ) + P_n/(2eK): the closed-form
/// ceiling on |E[u_m u_n* | input]| for any off-diagonal pair after the
/// first segment. Requires γ > 0 and P_n > 0.
pub fn conditional_cross_moment_bound(c: &ChannelParams) -> Result<f64> {
    if !c.gamma.is_finite() || c.gamma <= 0.0 {
        return Err(Error::invalid("gamma", "cross-moment bound needs gamma > 0"));
    }
    if !c.noise_power.is_finite() || c.noise_power <= 0.0 {
        return Err(Error::invalid("noise_power", "must be > 0"));
    }
    let k = c.segments as f64;
    let z = c.z_total;
    let g = c.gamma;
    let pn = c.noise_power;
    Ok(k.powi(3) / (2.0 * E * g * g * pn * z * z) + k / (E * z * g) + pn / (2.0 * E * k))
}

/// M_K = α·K·(K³/(2eγ²P_nZ²) + K/(eZγ) + P_n/(2eK)), in W.
pub fn m_k(c: &ChannelParams) -> Result<f64> {
    Ok(alpha_coefficient(c) * c.segments as f64 * conditional_cross_moment_bound(c)?)
}

/// C1 = (Z²/L)·Σ_l f(l)².
pub fn c1(c: &ChannelParams) -> f64 {
    let sum: f64 = (0..c.block_len)
        .map(|l| dispersion_profile(l, c).powi(2))
        .sum();
    c.z_total * c.z_total / c.block_len as f64 * sum
}

/// C2 = √6·Z·Σ_l f(l). Signed: negative dispersion gives negative C2; the
/// validity and inequality checks use |C2|, while G keeps the signed value.
pub fn c2(c: &ChannelParams) -> f64 {
    let sum: f64 = (0..c.block_len).map(|l| dispersion_profile(l, c)).sum();
    6.0_f64.sqrt() * c.z_total * sum
}

/// G = C2·(C2/(4K)+1)·(K³/(2eγ²P_nZ²) + K/(eZγ) + P_n/(2eK)), in W.
pub fn g_const(c: &ChannelParams) -> Result<f64> {
    let c2v = c2(c);
    let k = c.segments as f64;
    Ok(c2v * (c2v / (4.0 * k) + 1.0) * conditional_cross_moment_bound(c)?)
}

/// Cached per-channel constants for the closed-form bounds. Pure data; build
/// once per (parameters, K) and share read-only.
#[derive(Debug, Clone)]
pub struct BoundConstants {
    /// Mixing coefficients A_m, length L.
    pub a_coeffs: Vec<Complex64>,
    /// Off-diagonal kernel mass α.
    pub alpha_coef: f64,
    /// Moment constant M_K (W).
    pub m_k: f64,
    /// Profile second moment C1 (dimensionless).
    pub c1: f64,
    /// Signed profile first moment C2 (dimensionless).
    pub c2: f64,
    /// Moment constant G (W).
    pub g: f64,
    segments: usize,
    noise_power: f64,
    validity: f64,
}

impl BoundConstants {
    /// Requires γ > 0 (M_K and G diverge otherwise; use the γ=0 analytic
    /// special cases instead of these bounds).
    pub fn new(c: &ChannelParams) -> Result<Self> {
        let tail = conditional_cross_moment_bound(c)?;
        let a_coeffs = a_vector(c);
        let alpha_coef = alpha_from_magnitudes(a_coeffs.iter().map(|a| a.norm()));
        let c1v = c1(c);
        let c2v = c2(c);
        let k = c.segments as f64;
        Ok(BoundConstants {
            alpha_coef,
            m_k: alpha_coef * k * tail,
            c1: c1v,
            c2: c2v,
            g: c2v * (c2v / (4.0 * k) + 1.0) * tail,
            a_coeffs,
            segments: c.segments,
            noise_power: c.noise_power,
            validity: k_validity_threshold(c, c1v),
        })
    }

    pub fn a00_abs(&self) -> f64 {
        self.a_coeffs[0].norm()
    }

    /// ln|A_0| clamped to 0: rounding can push |A_0| a hair above one.
    fn ln_a00(&self) -> f64 {
        self.a00_abs().ln().min(0.0)
    }

    /// Segment count threshold below which the chained bound is not proven.
    pub fn validity_threshold(&self) -> f64 {
        self.validity
    }

    /// ζ(P) = |A_0|^{4(K-1)}·exp(−M_K/(P·|A_0|^{2(K-1)})), in (0, 1].
    pub fn zeta(&self, p: f64) -> Result<f64> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::invalid("p", "zeta needs P > 0"));
        }
        let k1 = (self.segments - 1) as f64;
        let ln_a = self.ln_a00();
        let x = self.m_k / (p * (2.0 * k1 * ln_a).exp());
        Ok((4.0 * k1 * ln_a - x).exp())
    }

    /// 1 − ζ(P) without cancellation: (1−|A_0|^{4(K-1)}) plus the
    /// exponential deficit, both via expm1.
    fn one_minus_zeta(&self, p: f64) -> f64 {
        let k1 = (self.segments - 1) as f64;
        let ln_a = self.ln_a00();
        let pow4 = (4.0 * k1 * ln_a).exp();
        let x = self.m_k / (p * (2.0 * k1 * ln_a).exp());
        -f64::exp_m1(4.0 * k1 * ln_a) + pow4 * (-f64::exp_m1(-x))
    }

    /// Closed-form lower bound
    /// (1/2)·log₂((e/4π)·(P+P_n)²/((P+P_n)² − ζP²)) in bits.
    pub fn lower_bound_l2(&self, p: f64) -> Result<f64> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::invalid("p", "bound needs P > 0"));
        }
        let pn = self.noise_power;
        // (P+Pn)² − ζP² = P²(1−ζ) + 2PPn + Pn², all terms nonnegative
        let denom = p * p * self.one_minus_zeta(p) + 2.0 * p * pn + pn * pn;
        Ok(0.5 * (E / (4.0 * PI) * (p + pn) * (p + pn) / denom).log2())
    }

    /// High-power limit of [`Self::lower_bound_l2`]:
    /// −(1/2)·log₂((4π/e)·(1−|A_0|^{4(K-1)})). Returns +∞ when the mixing
    /// kernel is trivial (K = 1 or β₂ = 0).
    pub fn asymptote_l2(&self) -> f64 {
        let k1 = (self.segments - 1) as f64;
        let gap = -f64::exp_m1(4.0 * k1 * self.ln_a00());
        if gap <= 0.0 {
            return f64::INFINITY;
        }
        -0.5 * (4.0 * PI / E * gap).log2()
    }

    /// Explicit closed-form lower bound
    /// (1/2)·log₂((e/4π)·(P+P_n)²/(2C1P²/K + 2PP_n + PG + P_n²)) in bits.
    /// Only proven for K strictly above the validity threshold.
    pub fn lower_bound_l3(&self, p: f64) -> Result<f64> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::invalid("p", "bound needs P > 0"));
        }
        if self.c1 <= 0.0 {
            return Err(Error::BoundUndefined(
                "explicit bound degenerates at zero dispersion (C1 = 0)".into(),
            ));
        }
        let k = self.segments as f64;
        if k <= self.validity {
            return Err(Error::BoundUndefined(format!(
                "K = {} is not above the validity threshold {:.3}",
                self.segments, self.validity
            )));
        }
        let pn = self.noise_power;
        let denom = 2.0 * self.c1 * p * p / k + 2.0 * p * pn + p * self.g + pn * pn;
        if denom <= 0.0 {
            return Err(Error::BoundUndefined(
                "bound denominator is not positive here".into(),
            ));
        }
        Ok(0.5 * (E / (4.0 * PI) * (p + pn) * (p + pn) / denom).log2())
    }

    /// High-power limit of [`Self::lower_bound_l3`]: (1/2)·log₂(eK/(8πC1)).
    pub fn asymptote_l3(&self) -> Result<f64> {
        if self.c1 <= 0.0 {
            return Err(Error::BoundUndefined(
                "asymptote undefined at zero dispersion (C1 = 0)".into(),
            ));
        }
        Ok(0.5 * (E * self.segments as f64 / (8.0 * PI * self.c1)).log2())
    }
}

/// ζ(P) for the given channel; see [`BoundConstants::zeta`].
pub fn zeta(p: f64, c: &ChannelParams) -> Result<f64> {
    BoundConstants::new(c)?.zeta(p)
}

pub fn lower_bound_l2(p: f64, c: &ChannelParams) -> Result<f64> {
    BoundConstants::new(c)?.lower_bound_l2(p)
}

/// High-power limit of the closed-form bound. Needs only the kernel, so it
/// is defined for γ = 0 as well; +∞ when β₂ = 0 or K = 1.
pub fn asymptote_l2(c: &ChannelParams) -> f64 {
    let k1 = (c.segments - 1) as f64;
    let ln_a = a_coeff(0, c).norm().ln().min(0.0);
    let gap = -f64::exp_m1(4.0 * k1 * ln_a);
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * (4.0 * PI / E * gap).log2()
}

pub fn lower_bound_l3(p: f64, c: &ChannelParams) -> Result<f64> {
    BoundConstants::new(c)?.lower_bound_l3(p)
}

pub fn asymptote_l3(c: &ChannelParams) -> Result<f64> {
    let c1v = c1(c);
    if c1v <= 0.0 {
        return Err(Error::BoundUndefined(
            "asymptote undefined at zero dispersion (C1 = 0)".into(),
        ));
    }
    Ok(0.5 * (E * c.segments as f64 / (8.0 * PI * c1v)).log2())
}

/// AWGN capacity upper bound log₂(1 + P/P_n) in bits.
pub fn awgn_upper(p: f64, pn: f64) -> Result<f64> {
    if !pn.is_finite() || pn <= 0.0 {
        return Err(Error::invalid("pn", "must be > 0"));
    }
    if !p.is_finite() || p < 0.0 {
        return Err(Error::invalid("p", "must be >= 0"));
    }
    Ok((1.0 + p / pn).log2())
}

/// Low-power closed-form approximation of the simulation lower bound:
/// (1/2)·log₂((e/2π)·(1 + P²/((2P+P_n)P_n))) in bits.
pub fn low_power_approx(p: f64, pn: f64) -> Result<f64> {
    if !pn.is_finite() || pn <= 0.0 {
        return Err(Error::invalid("pn", "must be > 0"));
    }
    if !p.is_finite() || p < 0.0 {
        return Err(Error::invalid("p", "must be >= 0"));
    }
    Ok(0.5 * (E / (2.0 * PI) * (1.0 + p * p / ((2.0 * p + pn) * pn))).log2())
}
