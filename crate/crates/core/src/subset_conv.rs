//! Subset convolution in the (min, +) and (max, +) semirings.
//!
//! For tables `g, h` over the subsets of an `n`-element ground set,
//! `(g * h)(Y)` is the best `g(A) + h(Y \ A)` over all `A ⊆ Y`. The fast path
//! works on bounded non-negative values: every subset `A` carries the
//! monomial `x^g(A)`, the tables are split by rank `|A|`, zeta-transformed,
//! multiplied rank-wise as polynomials truncated at degree `2M`, and
//! Möbius-inverted. The coefficient of `x^d` at `Y` then counts the splits of
//! `Y` of total value `d`, so the answer is the lowest (or highest) degree with
//! a nonzero coefficient. Runtime is `2^n · poly(n, M)`.
//!
//! Coefficients are kept modulo `2^64`. Every final count is at most `2^n`,
//! so the reduction never hides a nonzero count.

use std::marker::PhantomData;

use thiserror::Error;

use crate::value::DpValue;

/// Largest ground set accepted by the fast transforms.
pub const MAX_GROUND: usize = 24;
/// Largest ground set accepted by [`naive_convolve`].
pub const MAX_NAIVE_GROUND: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

impl Mode {
    /// The sentinel marking an unavailable entry in this mode.
    pub fn sentinel<V: DpValue>(self) -> V {
        match self {
            Mode::Min => V::max_value(),
            Mode::Max => V::min_value(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConvolutionError {
    #[error("ground sizes differ ({0} vs {1})")]
    GroundMismatch(usize, usize),
    #[error("ground size {size} exceeds the limit {limit}")]
    GroundTooLarge { size: usize, limit: usize },
    #[error("value {value} at subset {subset:#b} lies outside 0..={bound}")]
    ValueOutOfRange {
        subset: usize,
        value: i64,
        bound: i64,
    },
    #[error("table holds {len} values, expected {expected}")]
    BadLength { len: usize, expected: usize },
}

/// A dense table over the subsets of `{0, .., ground_size - 1}`, indexed by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFunctionTable<V> {
    ground_size: usize,
    values: Vec<V>,
}

impl<V: DpValue> SetFunctionTable<V> {
    pub fn new(ground_size: usize, values: Vec<V>) -> Result<Self, ConvolutionError> {
        if ground_size > MAX_GROUND {
            return Err(ConvolutionError::GroundTooLarge {
                size: ground_size,
                limit: MAX_GROUND,
            });
        }
        if values.len() != 1 << ground_size {
            return Err(ConvolutionError::BadLength {
                len: values.len(),
                expected: 1 << ground_size,
            });
        }
        Ok(SetFunctionTable {
            ground_size,
            values,
        })
    }

    /// Table with every entry set to the sentinel of `mode`.
    pub fn unavailable(ground_size: usize, mode: Mode) -> Self {
        SetFunctionTable {
            ground_size,
            values: vec![mode.sentinel(); 1 << ground_size],
        }
    }

    /// The unit of convolution: `0` at the empty set, unavailable elsewhere.
    pub fn identity(ground_size: usize, mode: Mode) -> Self {
        let mut t = Self::unavailable(ground_size, mode);
        t.values[0] = V::zero();
        t
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn get(&self, subset: usize) -> V {
        self.values[subset]
    }
}

/// Marker for an absent entry in the raw `u32` interface.
pub const ABSENT: u32 = u32::MAX;

/// Reusable buffers for the ranked transforms.
#[derive(Default)]
pub struct Convolver {
    g_hat: Vec<u64>,
    h_hat: Vec<u64>,
    prod: Vec<u64>,
}

impl Convolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fast convolution of raw tables of length `2^m` with entries in
    /// `0..=bound` or [`ABSENT`]. Writes `2^m` results into `out`.
    pub fn convolve_raw(
        &mut self,
        mode: Mode,
        m: usize,
        bound: u32,
        g: &[u32],
        h: &[u32],
        out: &mut [u32],
    ) {
        let size = 1usize << m;
        debug_assert!(g.len() == size && h.len() == size && out.len() == size);
        let deg = bound as usize + 1;
        let pdeg = 2 * deg - 1;
        let layer = size * deg;

        for (table, hat) in [(g, &mut self.g_hat), (h, &mut self.h_hat)] {
            hat.clear();
            hat.resize((m + 1) * layer, 0);
            for (a, &v) in table.iter().enumerate() {
                if v != ABSENT {
                    debug_assert!(v <= bound);
                    let rank = a.count_ones() as usize;
                    hat[rank * layer + a * deg + v as usize] = 1;
                }
            }
            for rank in 0..=m {
                zeta(&mut hat[rank * layer..(rank + 1) * layer], m, deg);
            }
        }

        self.prod.resize(size * pdeg, 0);
        let span = |p: &[u64]| -> Option<(usize, usize)> {
            let lo = p.iter().position(|&c| c != 0)?;
            let hi = p.iter().rposition(|&c| c != 0)?;
            Some((lo, hi))
        };
        for k in 0..=m {
            self.prod.fill(0);
            for a in 0..size {
                // rank-i layers vanish on sets with fewer than i elements
                let r = a.count_ones() as usize;
                if 2 * r < k {
                    continue;
                }
                let p = &mut self.prod[a * pdeg..(a + 1) * pdeg];
                for i in k.saturating_sub(r)..=k.min(r) {
                    let gp = &self.g_hat[i * layer + a * deg..i * layer + (a + 1) * deg];
                    let hp =
                        &self.h_hat[(k - i) * layer + a * deg..(k - i) * layer + (a + 1) * deg];
                    let (Some((glo, ghi)), Some((hlo, hhi))) = (span(gp), span(hp)) else {
                        continue;
                    };
                    for x in glo..=ghi {
                        let gc = gp[x];
                        if gc == 0 {
                            continue;
                        }
                        let row = &mut p[x + hlo..=x + hhi];
                        for (slot, &hc) in row.iter_mut().zip(&hp[hlo..=hhi]) {
                            *slot = slot.wrapping_add(gc.wrapping_mul(hc));
                        }
                    }
                }
            }
            mobius(&mut self.prod, m, pdeg);
            for (y, slot) in out.iter_mut().enumerate() {
                if y.count_ones() as usize != k {
                    continue;
                }
                let p = &self.prod[y * pdeg..(y + 1) * pdeg];
                let hit = match mode {
                    Mode::Min => p.iter().position(|&c| c != 0),
                    Mode::Max => p.iter().rposition(|&c| c != 0),
                };
                *slot = hit.map_or(ABSENT, |d| d as u32);
            }
        }
    }
}

fn zeta(hat: &mut [u64], m: usize, deg: usize) {
    for bit in 0..m {
        let step = 1usize << bit;
        for a in 0..(1usize << m) {
            if a & step != 0 {
                let (lo, hi) = hat.split_at_mut(a * deg);
                let src = &lo[(a ^ step) * deg..(a ^ step) * deg + deg];
                for (d, s) in hi[..deg].iter_mut().zip(src) {
                    *d = d.wrapping_add(*s);
                }
            }
        }
    }
}

fn mobius(hat: &mut [u64], m: usize, deg: usize) {
    for bit in 0..m {
        let step = 1usize << bit;
        for a in 0..(1usize << m) {
            if a & step != 0 {
                let (lo, hi) = hat.split_at_mut(a * deg);
                let src = &lo[(a ^ step) * deg..(a ^ step) * deg + deg];
                for (d, s) in hi[..deg].iter_mut().zip(src) {
                    *d = d.wrapping_sub(*s);
                }
            }
        }
    }
}

fn check_pair<V: DpValue>(
    g: &SetFunctionTable<V>,
    h: &SetFunctionTable<V>,
) -> Result<(), ConvolutionError> {
    if g.ground_size != h.ground_size {
        return Err(ConvolutionError::GroundMismatch(
            g.ground_size,
            h.ground_size,
        ));
    }
    Ok(())
}

fn to_raw<V: DpValue>(
    t: &SetFunctionTable<V>,
    mode: Mode,
    bound: i64,
) -> Result<Vec<u32>, ConvolutionError> {
    let sentinel = mode.sentinel::<V>();
    t.values
        .iter()
        .enumerate()
        .map(|(subset, &v)| {
            if v == sentinel {
                return Ok(ABSENT);
            }
            let value = v.wide();
            if !(0..=bound).contains(&value) {
                return Err(ConvolutionError::ValueOutOfRange {
                    subset,
                    value,
                    bound,
                });
            }
            Ok(value as u32)
        })
        .collect()
}

fn fast<V: DpValue>(
    g: &SetFunctionTable<V>,
    h: &SetFunctionTable<V>,
    bound: V,
    mode: Mode,
) -> Result<SetFunctionTable<V>, ConvolutionError> {
    check_pair(g, h)?;
    let bound = bound.wide().clamp(0, u32::MAX as i64 / 2 - 1);
    let (rg, rh) = (to_raw(g, mode, bound)?, to_raw(h, mode, bound)?);
    let m = g.ground_size;
    let mut out = vec![ABSENT; 1 << m];
    Convolver::new().convolve_raw(mode, m, bound as u32, &rg, &rh, &mut out);
    let values = out
        .into_iter()
        .map(|v| {
            if v == ABSENT {
                mode.sentinel()
            } else {
                V::narrow(v as i64)
            }
        })
        .collect();
    Ok(SetFunctionTable {
        ground_size: m,
        values,
    })
}

/// `(g * h)(Y) = min_{A ⊆ Y} g(A) + h(Y \ A)`, with finite values in `0..=bound`
/// and `V::max_value()` marking unavailable entries.
pub fn min_sum_convolve<V: DpValue>(
    g: &SetFunctionTable<V>,
    h: &SetFunctionTable<V>,
    bound: V,
) -> Result<SetFunctionTable<V>, ConvolutionError> {
    fast(g, h, bound, Mode::Min)
}

/// The (max, +) counterpart of [`min_sum_convolve`]; `V::min_value()` marks
/// unavailable entries.
pub fn max_sum_convolve<V: DpValue>(
    g: &SetFunctionTable<V>,
    h: &SetFunctionTable<V>,
    bound: V,
) -> Result<SetFunctionTable<V>, ConvolutionError> {
    fast(g, h, bound, Mode::Max)
}

/// Reference convolution by direct enumeration of all `3^n` splits.
pub fn naive_convolve<V: DpValue>(
    g: &SetFunctionTable<V>,
    h: &SetFunctionTable<V>,
    mode: Mode,
) -> Result<SetFunctionTable<V>, ConvolutionError> {
    check_pair(g, h)?;
    let m = g.ground_size;
    if m > MAX_NAIVE_GROUND {
        return Err(ConvolutionError::GroundTooLarge {
            size: m,
            limit: MAX_NAIVE_GROUND,
        });
    }
    let sentinel = mode.sentinel::<V>();
    let mut values = vec![sentinel; 1 << m];
    for (y, slot) in values.iter_mut().enumerate() {
        let mut best: Option<i64> = None;
        let mut a = y;
        loop {
            let (ga, hb) = (g.values[a], h.values[y ^ a]);
            if ga != sentinel && hb != sentinel {
                let s = ga.wide() + hb.wide();
                best = Some(match (best, mode) {
                    (None, _) => s,
                    (Some(b), Mode::Min) => b.min(s),
                    (Some(b), Mode::Max) => b.max(s),
                });
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & y;
        }
        if let Some(b) = best {
            *slot = V::narrow(b);
        }
    }
    Ok(SetFunctionTable {
        ground_size: m,
        values,
    })
}

/// Shifts two raw tables to start at zero, convolves them, and hands each
/// result (with the shift undone) to `sink`. Used by the join steps, whose
/// inputs are arbitrary finite `i64` values with `None` for absent entries.
pub(crate) struct ShiftedConvolver<V> {
    /// Ground sets smaller than this are enumerated directly.
    pub transform_min_ground: usize,
    inner: Convolver,
    g: Vec<u32>,
    h: Vec<u32>,
    out: Vec<u32>,
    _cell: PhantomData<V>,
}

impl<V> Default for ShiftedConvolver<V> {
    fn default() -> Self {
        ShiftedConvolver {
            transform_min_ground: crate::dp::TRANSFORM_MIN_GROUND,
            inner: Convolver::new(),
            g: Vec::new(),
            h: Vec::new(),
            out: Vec::new(),
            _cell: PhantomData,
        }
    }
}

impl<V> ShiftedConvolver<V> {
    pub fn with_threshold(transform_min_ground: usize) -> Self {
        ShiftedConvolver {
            transform_min_ground,
            ..Self::default()
        }
    }

    pub fn run(
        &mut self,
        mode: Mode,
        m: usize,
        g: &[Option<i64>],
        h: &[Option<i64>],
        mut sink: impl FnMut(usize, i64),
    ) {
        if m < self.transform_min_ground {
            for y in 0..1usize << m {
                let mut best: Option<i64> = None;
                let mut a = y;
                loop {
                    if let (Some(x), Some(z)) = (g[a], h[y ^ a]) {
                        let s = x + z;
                        best = Some(match (best, mode) {
                            (None, _) => s,
                            (Some(b), Mode::Min) => b.min(s),
                            (Some(b), Mode::Max) => b.max(s),
                        });
                    }
                    if a == 0 {
                        break;
                    }
                    a = (a - 1) & y;
                }
                if let Some(b) = best {
                    sink(y, b);
                }
            }
            return;
        }
        let lo_g = g.iter().flatten().copied().min();
        let lo_h = h.iter().flatten().copied().min();
        let (Some(lo_g), Some(lo_h)) = (lo_g, lo_h) else {
            return;
        };
        let hi = g
            .iter()
            .flatten()
            .map(|&v| v - lo_g)
            .chain(h.iter().flatten().map(|&v| v - lo_h))
            .max()
            .unwrap_or(0);
        let bound = u32::try_from(hi).expect("value spread fits in u32");
        let shift = |src: &[Option<i64>], lo: i64, dst: &mut Vec<u32>| {
            dst.clear();
            dst.extend(src.iter().map(|v| v.map_or(ABSENT, |x| (x - lo) as u32)));
        };
        shift(g, lo_g, &mut self.g);
        shift(h, lo_h, &mut self.h);
        self.out.clear();
        self.out.resize(1 << m, ABSENT);
        self.inner
            .convolve_raw(mode, m, bound, &self.g, &self.h, &mut self.out);
        for (y, &v) in self.out.iter().enumerate() {
            if v != ABSENT {
                sink(y, v as i64 + lo_g + lo_h);
            }
        }
    }
}
