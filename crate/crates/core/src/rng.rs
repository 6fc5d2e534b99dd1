//! Counter-based random streams.
//!
//! Every Gaussian variate used by the simulators is a pure function of
//! `(seed, path_index, stream, step)`. The generator is Philox4x32-10; the
//! key is the 64-bit seed and the 128-bit counter packs the path index, the
//! stream id and the step pair. One Philox block yields two 64-bit words,
//! i.e. the uniforms for two consecutive steps of one stream.
//!
//! Gaussians come from the inverse normal CDF (Wichura's AS241), so every
//! step consumes exactly one uniform and there are no rejection loops.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Stream identifiers. Streams with distinct ids never share a counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Stream {
    /// Forward increments of the first driving Brownian motion `B1`.
    Forward1 = 0,
    /// Forward increments of the second driving Brownian motion `B2`.
    Forward2 = 1,
    /// Negative-time increments of `B1`.
    Backward1 = 2,
    /// Negative-time increments of `B2`.
    Backward2 = 3,
}

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline(always)]
pub fn philox4x32_10(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Maps 64 random bits to the open interval (0, 1) on a 2^-52 lattice.
#[inline(always)]
pub fn bits_to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Keyed access to the counter-based uniform streams of one seed.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    /// The two 64-bit words for steps `2 * pair` and `2 * pair + 1`.
    #[inline(always)]
    fn block(&self, path_index: u64, stream: Stream, pair: u64) -> [u64; 2] {
        let ctr = [
            pair as u32,
            ((pair >> 32) as u32 & 0x00FF_FFFF) | ((stream as u32) << 24),
            path_index as u32,
            (path_index >> 32) as u32,
        ];
        let r = philox4x32_10(ctr, self.key);
        [
            (r[0] as u64) | ((r[1] as u64) << 32),
            (r[2] as u64) | ((r[3] as u64) << 32),
        ]
    }

    /// Uniform in (0, 1) for a single `(path_index, stream, step)` coordinate.
    pub fn uniform(&self, path_index: u64, stream: Stream, step: u64) -> f64 {
        let words = self.block(path_index, stream, step >> 1);
        bits_to_open_unit(words[(step & 1) as usize])
    }

    /// Standard normal for a single coordinate.
    pub fn normal(&self, path_index: u64, stream: Stream, step: u64) -> f64 {
        inverse_normal_cdf(self.uniform(path_index, stream, step))
    }

    /// Fills `out[j]` with the standard normal for step `first_step + j`.
    ///
    /// Produces exactly the values of [`CounterRng::normal`], in bulk. The
    /// Philox rounds run over a struct-of-arrays block so they vectorize.
    pub fn fill_normals(&self, path_index: u64, stream: Stream, first_step: u64, out: &mut [f64]) {
        self.fill_uniforms(path_index, stream, first_step, out);
        uniforms_to_normals(out);
    }

    fn fill_uniforms(&self, path_index: u64, stream: Stream, first_step: u64, out: &mut [f64]) {
        let mut j = 0usize;
        let mut step = first_step;
        let len = out.len();
        if step & 1 == 1 && len > 0 {
            out[0] = self.uniform(path_index, stream, step);
            j = 1;
            step += 1;
        }
        let hi_path = (path_index >> 32) as u32;
        let lo_path = path_index as u32;
        while j + 2 * LANES <= len {
            let pair0 = step >> 1;
            let mut c0 = [0u32; LANES];
            let mut c1 = [0u32; LANES];
            let mut c2 = [lo_path; LANES];
            let mut c3 = [hi_path; LANES];
            for (l, (a, b)) in c0.iter_mut().zip(c1.iter_mut()).enumerate() {
                let pair = pair0 + l as u64;
                *a = pair as u32;
                *b = ((pair >> 32) as u32 & 0x00FF_FFFF) | ((stream as u32) << 24);
            }
            for l in 0..LANES {
                let r = philox4x32_10([c0[l], c1[l], c2[l], c3[l]], self.key);
                c0[l] = r[0];
                c1[l] = r[1];
                c2[l] = r[2];
                c3[l] = r[3];
            }
            let dst = &mut out[j..j + 2 * LANES];
            for l in 0..LANES {
                dst[2 * l] = bits_to_open_unit((c0[l] as u64) | ((c1[l] as u64) << 32));
                dst[2 * l + 1] = bits_to_open_unit((c2[l] as u64) | ((c3[l] as u64) << 32));
            }
            j += 2 * LANES;
            step += 2 * LANES as u64;
        }
        while j + 1 < len {
            let words = self.block(path_index, stream, step >> 1);
            out[j] = bits_to_open_unit(words[0]);
            out[j + 1] = bits_to_open_unit(words[1]);
            j += 2;
            step += 2;
        }
        if j < len {
            out[j] = self.uniform(path_index, stream, step);
        }
    }
}

const LANES: usize = 16;

/// In-place inverse-CDF transform of a slice of open-interval uniforms.
///
/// The central branch runs branch-free over each chunk (it vectorizes) and
/// the tail draws, about 15% of them, are patched afterwards.
pub fn uniforms_to_normals(values: &mut [f64]) {
    const CHUNK: usize = 64;
    let mut saved = [0.0f64; CHUNK];
    let mut tails = [0u8; CHUNK];
    for block in values.chunks_mut(CHUNK) {
        for (v, keep) in block.iter_mut().zip(saved.iter_mut()) {
            *keep = *v;
            *v = central_quantile(*v - 0.5);
        }
        let mut n_tail = 0;
        for (i, &u) in saved[..block.len()].iter().enumerate() {
            tails[n_tail] = i as u8;
            n_tail += ((u - 0.5).abs() > CENTRAL_HALF_WIDTH) as usize;
        }
        for &i in &tails[..n_tail] {
            let u = saved[i as usize];
            block[i as usize] = tail_quantile(u, u - 0.5);
        }
    }
}

// Wichura (1988), algorithm AS241 PPND16.
const A: [f64; 8] = [
    3.387_132_872_796_366_608_0e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_90e0,
    5.769_497_221_460_691_405_50e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_40e0,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_20e0,
    5.463_784_911_164_114_369_90e0,
    1.784_826_539_917_291_335_80e0,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline(always)]
fn poly(c: &[f64; 8], x: f64) -> f64 {
    ((((((c[7] * x + c[6]) * x + c[5]) * x + c[4]) * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]
}

const CENTRAL_HALF_WIDTH: f64 = 0.425;

#[inline(always)]
fn central_quantile(q: f64) -> f64 {
    let r = 0.180_625 - q * q;
    q * poly(&A, r) / poly(&B, r)
}

#[inline]
fn tail_quantile(p: f64, q: f64) -> f64 {
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard normal quantile (Wichura's AS241), relative accuracy about
/// 1e-16 on (0, 1).
///
/// Returns `-inf`/`+inf` at 0 and 1 and NaN outside `[0, 1]`.
#[inline]
pub fn inverse_normal_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= CENTRAL_HALF_WIDTH {
        return central_quantile(q);
    }
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    tail_quantile(p, q)
}
