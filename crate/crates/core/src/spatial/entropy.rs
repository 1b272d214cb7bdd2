//! Bit-cost model for quantized coefficient blocks: zigzag scan, (run, level)
//! pairs, Exp-Golomb code lengths.

use crate::block::BLOCK_AREA;

/// JPEG/H.26x zigzag order: `ZIGZAG[k]` is the raster index of scan position `k`.
pub const ZIGZAG: [usize; BLOCK_AREA] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Length in bits of the unsigned Exp-Golomb code for `n`.
pub fn ue_bits(n: u32) -> u32 {
    let v = n as u64 + 1;
    2 * (63 - v.leading_zeros()) + 1
}

/// Length in bits of the signed Exp-Golomb code for `k`
/// (mapping `k > 0 -> 2k - 1`, `k <= 0 -> -2k`).
pub fn se_bits(k: i32) -> u32 {
    let mapped = if k > 0 {
        2 * k as i64 - 1
    } else {
        -2 * k as i64
    };
    let v = mapped as u64 + 1;
    2 * (63 - v.leading_zeros()) + 1
}

/// Cost of one quantized block given in raster order.
///
/// The block is signalled as `ue(nonzero count)` followed by one
/// `ue(zero run) + se(level)` pair per nonzero coefficient in zigzag order.
/// The leading count doubles as the end-of-block marker, so an all-zero
/// block costs a single bit.
pub fn block_bits(levels: &[i32; BLOCK_AREA]) -> u32 {
    let mut nonzero = 0;
    let mut bits = 0;
    let mut run = 0;
    for &pos in &ZIGZAG {
        let level = levels[pos];
        if level == 0 {
            run += 1;
        } else {
            bits += ue_bits(run) + se_bits(level);
            nonzero += 1;
            run = 0;
        }
    }
    bits + ue_bits(nonzero)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Builds the literal codeword and measures it.
    fn ue_codeword(n: u32) -> String {
        let v = n as u64 + 1;
        let body = format!("{v:b}");
        "0".repeat(body.len() - 1) + &body
    }

    #[test]
    fn exp_golomb_lengths() {
        assert_eq!(ue_codeword(0), "1");
        assert_eq!(ue_codeword(3), "00100");
        for n in 0..5000 {
            assert_eq!(ue_bits(n) as usize, ue_codeword(n).len(), "{n}");
        }
        assert_eq!(se_bits(0), 1);
        assert_eq!(se_bits(1), 3);
        assert_eq!(se_bits(-1), 3);
        assert_eq!(se_bits(2), 5);
        assert_eq!(se_bits(-4), 7);
        assert_eq!(ue_bits(u32::MAX), 65);
    }

    #[test]
    fn zigzag_is_permutation() {
        let mut seen = [false; BLOCK_AREA];
        for &p in &ZIGZAG {
            assert!(!seen[p]);
            seen[p] = true;
        }
        // anti-diagonal order: row + column never decreases by more than zero
        let diag: Vec<usize> = ZIGZAG.iter().map(|p| p / 8 + p % 8).collect();
        assert!(diag.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn hand_counted_blocks() {
        let mut levels = [0i32; BLOCK_AREA];
        assert_eq!(block_bits(&levels), 1);
        // DC = 3: ue(1) + ue(0) + se(3) = 3 + 1 + 5
        levels[0] = 3;
        assert_eq!(block_bits(&levels), 9);
        // plus level -1 at zigzag position 4 (raster 9), run 3: ue(2) + ue(3) + se(-1)
        levels[9] = -1;
        assert_eq!(block_bits(&levels), 3 + 1 + 5 + 5 + 3);
    }
}
