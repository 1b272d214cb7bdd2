//! 8x8 block tiling shared by the intra coder, the blur baseline and the
//! duplicate-frame detector.

pub const BLOCK: usize = 8;
pub const BLOCK_AREA: usize = BLOCK * BLOCK;

/// Number of 8x8 blocks across and down a `width` x `height` plane. Partial
/// blocks at the right and bottom edges count as whole blocks.
pub fn grid(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(BLOCK), height.div_ceil(BLOCK))
}

/// Copies block `(bx, by)` of a plane into `out`, replicating the last
/// column/row for samples that fall outside the plane.
pub fn load_block(plane: &[u8], width: usize, height: usize, bx: usize, by: usize, out: &mut [u8; BLOCK_AREA]) {
    let x0 = bx * BLOCK;
    let y0 = by * BLOCK;
    for r in 0..BLOCK {
        let y = (y0 + r).min(height - 1);
        let row = &plane[y * width..(y + 1) * width];
        let dst = &mut out[r * BLOCK..(r + 1) * BLOCK];
        if x0 + BLOCK <= width {
            dst.copy_from_slice(&row[x0..x0 + BLOCK]);
        } else {
            for (c, d) in dst.iter_mut().enumerate() {
                *d = row[(x0 + c).min(width - 1)];
            }
        }
    }
}
