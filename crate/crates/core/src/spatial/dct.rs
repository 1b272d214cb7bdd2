//! Orthonormal 8x8 type-II DCT and its inverse.
//!
//! The basis is written out as literals so that results do not depend on the
//! platform's `cos` implementation.

use crate::block::{BLOCK, BLOCK_AREA};

const A: f64 = 0.353_553_390_593_273_8;
const C1: f64 = 0.490_392_640_201_615_2;
const C2: f64 = 0.461_939_766_255_643_37;
const C3: f64 = 0.415_734_806_151_272_6;
const C5: f64 = 0.277_785_116_509_801_14;
const C6: f64 = 0.191_341_716_182_544_92;
const C7: f64 = 0.097_545_161_008_064_17;

/// `BASIS[u][i] = c(u) * cos((2i + 1) * u * pi / 16)`.
pub(crate) const BASIS: [[f64; BLOCK]; BLOCK] = [
    [A, A, A, A, A, A, A, A],
    [C1, C3, C5, C7, -C7, -C5, -C3, -C1],
    [C2, C6, -C6, -C2, -C2, -C6, C6, C2],
    [C3, -C7, -C1, -C5, C5, C1, C7, -C3],
    [A, -A, -A, A, A, -A, -A, A],
    [C5, -C1, C7, C3, -C3, -C7, C1, -C5],
    [C6, -C2, C2, -C6, -C6, C2, -C2, C6],
    [C7, -C5, C3, -C1, C1, -C3, C5, -C7],
];

/// Forward DCT of a level-shifted block, row-major in and out
/// (`out[v * 8 + u]`, `v` vertical frequency).
pub fn forward(block: &[f64; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
    let mut tmp = [0.0; BLOCK_AREA];
    for r in 0..BLOCK {
        let row = &block[r * BLOCK..(r + 1) * BLOCK];
        for (u, basis) in BASIS.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..BLOCK {
                acc += basis[i] * row[i];
            }
            tmp[r * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0; BLOCK_AREA];
    for u in 0..BLOCK {
        for (v, basis) in BASIS.iter().enumerate() {
            let mut acc = 0.0;
            for r in 0..BLOCK {
                acc += basis[r] * tmp[r * BLOCK + u];
            }
            out[v * BLOCK + u] = acc;
        }
    }
    out
}

pub fn inverse(coef: &[f64; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
    let mut tmp = [0.0; BLOCK_AREA];
    for u in 0..BLOCK {
        for r in 0..BLOCK {
            let mut acc = 0.0;
            for (v, basis) in BASIS.iter().enumerate() {
                acc += basis[r] * coef[v * BLOCK + u];
            }
            tmp[r * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0; BLOCK_AREA];
    for r in 0..BLOCK {
        for i in 0..BLOCK {
            let mut acc = 0.0;
            for (u, basis) in BASIS.iter().enumerate() {
                acc += basis[i] * tmp[r * BLOCK + u];
            }
            out[r * BLOCK + i] = acc;
        }
    }
    out
}

/// Level-shifts 8-bit samples by -128.
pub fn level_shift(samples: &[u8; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
    let mut out = [0.0; BLOCK_AREA];
    for (o, &s) in out.iter_mut().zip(samples) {
        *o = s as f64 - 128.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // Direct evaluation of the 2-D DCT-II sum.
    fn naive(block: &[f64; BLOCK_AREA]) -> [f64; BLOCK_AREA] {
        let c = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
        let mut out = [0.0; BLOCK_AREA];
        for v in 0..8 {
            for u in 0..8 {
                let mut acc = 0.0;
                for y in 0..8 {
                    for x in 0..8 {
                        acc += block[y * 8 + x]
                            * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos()
                            * ((2 * y + 1) as f64 * v as f64 * PI / 16.0).cos();
                    }
                }
                out[v * 8 + u] = c(u) * c(v) * acc;
            }
        }
        out
    }

    #[test]
    fn basis_is_orthonormal() {
        for a in 0..8 {
            for b in 0..8 {
                let dot: f64 = (0..8).map(|i| BASIS[a][i] * BASIS[b][i]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "{a} {b} {dot}");
            }
        }
    }

    #[test]
    fn constant_block_is_dc_only() {
        let block = [57.0; BLOCK_AREA];
        let coef = forward(&block);
        assert!((coef[0] - 57.0 * 8.0).abs() < 1e-9);
        for &c in &coef[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn matches_direct_sum(samples in prop::array::uniform32(0u8..=255)) {
            let mut block = [0u8; BLOCK_AREA];
            for (i, b) in block.iter_mut().enumerate() {
                *b = samples[i % 32].wrapping_add(i as u8 * 3);
            }
            let shifted = level_shift(&block);
            let fast = forward(&shifted);
            let slow = naive(&shifted);
            for (a, b) in fast.iter().zip(slow.iter()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn round_trip_within_one(samples in prop::collection::vec(0u8..=255, BLOCK_AREA)) {
            let mut block = [0u8; BLOCK_AREA];
            block.copy_from_slice(&samples);
            let back = inverse(&forward(&level_shift(&block)));
            for (orig, rec) in block.iter().zip(back.iter()) {
                let rec = (rec + 128.0).round();
                prop_assert!((rec - *orig as f64).abs() <= 1.0);
            }
        }
    }
}
