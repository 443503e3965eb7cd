//! Split-step segment recursion: per-sample Kerr rotation, unitary dispersion
//! step in the DFT domain, and circular Gaussian noise injection, applied K
//! times over the link.
//!
//! Noise reproducibility contract: every segment of every propagation draws
//! from a generator keyed by (seed, stream id, segment index) through a
//! splitmix64 chain, so results are identical across hosts, thread counts,
//! and scheduling orders.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::params::ChannelParams;

/// One block of L complex samples (units √W per sample).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField(Vec<Complex64>);

impl ComplexField {
    pub fn new(samples: Vec<Complex64>) -> Self {
        ComplexField(samples)
    }

    pub fn zeros(len: usize) -> Self {
        ComplexField(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Euclidean norm of the block.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl std::ops::Deref for ComplexField {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for ComplexField {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexField(v)
    }
}

/// Dispersion phase rate f(l) in 1/km for DFT bin `l`:
/// (β₂/2)·(2π/T)²·(L/2 − |L/2 − l|)² with T = L·Δt.
pub fn dispersion_profile(l: usize, c: &ChannelParams) -> f64 {
    assert!(l < c.block_len, "bin index out of range");
    let big_l = c.block_len as f64;
    let t = c.block_duration();
    let half = big_l / 2.0;
    let arm = half - (half - l as f64).abs();
    let w = 2.0 * std::f64::consts::PI / t;
    0.5 * c.beta2 * w * w * arm * arm
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic noise stream handle. Identical (seed, stream_id) produce
/// identical noise irrespective of host or worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSource {
    seed: u64,
    stream_id: u64,
}

impl NoiseSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        NoiseSource { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for a numbered sub-task (realization, sweep point, ...).
    /// Derivation is path-dependent: `s.substream(a).substream(b)` differs
    /// from `s.substream(b).substream(a)`.
    pub fn substream(&self, index: u64) -> NoiseSource {
        NoiseSource {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index)),
        }
    }

    /// Generator for one labelled draw site (segment index during
    /// propagation, or a reserved label for input draws).
    pub(crate) fn rng_for(&self, label: u64) -> ChaCha8Rng {
        let mut state = splitmix64(self.seed);
        state = splitmix64(state ^ self.stream_id);
        state = splitmix64(state ^ label);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Label used for draws that are not tied to a segment (input vectors).
pub(crate) const INPUT_DRAW_LABEL: u64 = u64::MAX;

/// Fill `out` with i.i.d. circular complex Gaussians of per-sample variance
/// `var` (real and imaginary parts carry var/2 each).
pub(crate) fn fill_circular_gaussian(rng: &mut ChaCha8Rng, var: f64, out: &mut [Complex64]) {
    let scale = (var / 2.0).sqrt();
    for x in out.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *x = Complex64::new(scale * re, scale * im);
    }
}

/// Precomputed transforms and per-bin phases for one channel configuration.
/// Shareable across threads; propagation itself allocates only scratch.
pub struct Propagator {
    params: ChannelParams,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// e^{jΔz·f(l)} per DFT bin.
    bin_phase: Vec<Complex64>,
}

impl Propagator {
    pub fn new(c: &ChannelParams) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(c.block_len);
        let inv = planner.plan_fft_inverse(c.block_len);
        let bin_phase = (0..c.block_len)
            .map(|l| Complex64::from_polar(1.0, c.dz * dispersion_profile(l, c)))
            .collect();
        Propagator {
            params: c.clone(),
            fwd,
            inv,
            bin_phase,
        }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    fn kerr_in_place(&self, buf: &mut [Complex64]) {
        let rot = self.params.gamma * self.params.dz;
        for x in buf.iter_mut() {
            *x *= Complex64::from_polar(1.0, rot * x.norm_sqr());
        }
    }

    /// Unitary dispersion step: DFT with 1/√L normalization, per-bin phase,
    /// inverse DFT with 1/√L normalization.
    fn linear_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let root = (self.params.block_len as f64).sqrt().recip();
        self.fwd.process_with_scratch(buf, scratch);
        for (x, ph) in buf.iter_mut().zip(&self.bin_phase) {
            *x *= root * ph;
        }
        self.inv.process_with_scratch(buf, scratch);
        for x in buf.iter_mut() {
            *x *= root;
        }
    }

    pub fn nonlinear_step(&self, a: &ComplexField) -> ComplexField {
        assert_eq!(a.len(), self.params.block_len, "block length mismatch");
        let mut buf = a.0.clone();
        self.kerr_in_place(&mut buf);
        ComplexField(buf)
    }

    pub fn linear_step(&self, a: &ComplexField) -> ComplexField {
        assert_eq!(a.len(), self.params.block_len, "block length mismatch");
        let mut buf = a.0.clone();
        let mut scratch = self.scratch();
        self.linear_in_place(&mut buf, &mut scratch);
        ComplexField(buf)
    }

    pub fn add_noise(&self, a: &ComplexField, ns: &NoiseSource, segment: u64) -> ComplexField {
        assert_eq!(a.len(), self.params.block_len, "block length mismatch");
        let mut noise = vec![Complex64::new(0.0, 0.0); a.len()];
        let mut rng = ns.rng_for(segment);
        fill_circular_gaussian(&mut rng, self.params.segment_noise_var, &mut noise);
        let buf = a.0.iter().zip(&noise).map(|(x, n)| x + n).collect();
        ComplexField(buf)
    }

    /// Run the first `count` segments (Kerr, dispersion, noise per segment).
    pub fn run_segments(&self, a0: &ComplexField, ns: &NoiseSource, count: usize) -> ComplexField {
        assert_eq!(a0.len(), self.params.block_len, "block length mismatch");
        assert!(count <= self.params.segments);
        let l = self.params.block_len;
        let mut buf = a0.0.clone();
        let mut scratch = self.scratch();
        let mut noise = vec![Complex64::new(0.0, 0.0); l];
        for k in 0..count {
            self.kerr_in_place(&mut buf);
            self.linear_in_place(&mut buf, &mut scratch);
            let mut rng = ns.rng_for(k as u64);
            fill_circular_gaussian(&mut rng, self.params.segment_noise_var, &mut noise);
            for (x, n) in buf.iter_mut().zip(&noise) {
                *x += *n;
            }
        }
        ComplexField(buf)
    }

    /// Full K-segment propagation.
    pub fn propagate(&self, a0: &ComplexField, ns: &NoiseSource) -> ComplexField {
        self.run_segments(a0, ns, self.params.segments)
    }
}

/// Draw a block of i.i.d. circular Gaussian samples with per-sample
/// variance `power` from the source's input stream.
pub fn gaussian_field(len: usize, power: f64, ns: &NoiseSource) -> ComplexField {
    let mut samples = vec![Complex64::new(0.0, 0.0); len];
    let mut rng = ns.rng_for(INPUT_DRAW_LABEL);
    fill_circular_gaussian(&mut rng, power, &mut samples);
    ComplexField(samples)
}

/// Kerr rotation a_l → a_l·e^{jγ|a_l|²Δz}.
pub fn nonlinear_step(a: &ComplexField, c: &ChannelParams) -> ComplexField {
    Propagator::new(c).nonlinear_step(a)
}

/// Unitary dispersion step (DFT, per-bin phase, inverse DFT).
pub fn linear_step(a: &ComplexField, c: &ChannelParams) -> ComplexField {
    Propagator::new(c).linear_step(a)
}

/// Add one segment's worth of circular Gaussian noise (σ_n² per sample),
/// drawn from the segment-0 stream of `ns`.
pub fn add_noise(a: &ComplexField, c: &ChannelParams, ns: &NoiseSource) -> ComplexField {
    Propagator::new(c).add_noise(a, ns, 0)
}

/// Propagate a block through all K segments.
pub fn propagate(a0: &ComplexField, c: &ChannelParams, ns: &NoiseSource) -> ComplexField {
    Propagator::new(c).propagate(a0, ns)
}

const FIELD_MAGIC: &[u8; 8] = b"SSFFLD01";

/// Debug/golden-test dump: 16-byte header (magic + little-endian u64 length)
/// followed by 2L little-endian f64 (re, im interleaved).
pub fn write_field<W: Write>(w: &mut W, field: &ComplexField) -> std::io::Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(field.len() as u64).to_le_bytes())?;
    for x in field.iter() {
        w.write_all(&x.re.to_le_bytes())?;
        w.write_all(&x.im.to_le_bytes())?;
    }
    Ok(())
}

/// Read a field dump written by [`write_field`]. Validates the magic, the
/// declared length, and sample finiteness.
pub fn read_field<R: Read>(r: &mut R) -> Result<ComplexField> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|e| Error::Input(format!("field header: {e}")))?;
    if &header[..8] != FIELD_MAGIC {
        return Err(Error::Input("bad field magic".into()));
    }
    let len = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let mut samples = Vec::with_capacity(len);
    let mut buf = [0u8; 16];
    for _ in 0..len {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Input(format!("field body: {e}")))?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        samples.push(Complex64::new(re, im));
    }
    let field = ComplexField(samples);
    if !field.is_finite() {
        return Err(Error::Input("field contains non-finite samples".into()));
    }
    Ok(field)
}
