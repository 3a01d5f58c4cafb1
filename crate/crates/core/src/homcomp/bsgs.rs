use crate::exec::Execution;
use crate::he::{Evaluator, HeError, HeParams, HeScheme, RotationSet, SlotMatrix};

use super::{CompError, CompressionMatrix};

/// Rotation schedule for multiplying an `s`-row matrix block by a vector held
/// in one row of `n/2` slots, with the diagonal method.
///
/// Rows are padded to `s' = next_pow2(s)`. Diagonal `t` of a block is
/// `diag_t[i] = M[i mod s'][(i + t) mod W]` for `W = n/2`; summing
/// `diag_t ⊙ Rot(x, t)` over `t < s'` leaves partial sums that a final
/// rotate-and-sum over steps `s', 2s', .., W/2` folds into slots `0..s'`.
/// The `s'` rotations are split as `t = g*B + b` into `B` baby steps per
/// input block and `G = s'/B` giant steps shared by all blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsgsPlan {
    width: usize,
    s: usize,
    s_pad: usize,
    baby: usize,
    giant: usize,
}

impl BsgsPlan {
    pub fn new(he: &HeParams, s: usize) -> Result<Self, CompError> {
        let width = he.width();
        let s_pad = s.max(1).next_power_of_two();
        if s_pad > width {
            return Err(CompError::InvalidParams(format!(
                "s = {s} pads to {s_pad} > {width} slots per row"
            )));
        }
        let target = ((2 * s) as f64).sqrt().ceil() as usize;
        let baby = target.next_power_of_two().min(s_pad);
        Ok(Self {
            width,
            s,
            s_pad,
            baby,
            giant: s_pad / baby,
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Row count after padding to a power of two.
    pub fn padded_rows(&self) -> usize {
        self.s_pad
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn baby_count(&self) -> usize {
        self.baby
    }

    pub fn giant_count(&self) -> usize {
        self.giant
    }

    /// Rotate-and-sum steps `s', 2s', .., W/2`.
    pub fn fold_steps(&self) -> Vec<usize> {
        let mut steps = Vec::new();
        let mut k = self.s_pad;
        while k < self.width {
            steps.push(k);
            k *= 2;
        }
        steps
    }

    /// Every rotation the compressor may issue, including the row swap.
    pub fn rotation_set(&self) -> RotationSet {
        let mut r = RotationSet::new();
        (1..self.baby).for_each(|b| r.insert_row(b));
        (1..self.giant).for_each(|g| r.insert_row(g * self.baby));
        self.fold_steps().into_iter().for_each(|k| r.insert_row(k));
        r.set_col(true);
        r
    }

    /// Key switches of one matrix-vector product over `blocks` inputs, when
    /// no diagonal is zero.
    pub fn keyswitch_estimate(&self, blocks: usize) -> usize {
        blocks * (self.baby - 1) + (self.giant - 1) + self.fold_steps().len()
    }
}

/// Which matrix columns feed each row of one input block.
#[derive(Clone, Copy, Debug)]
pub struct RowSource<'m> {
    pub matrix: &'m CompressionMatrix,
    /// 0-based column of the matrix aligned with slot 0 of the row.
    pub offset: usize,
}

/// Pre-rotated diagonal plaintexts (as slot matrices) for each input block.
///
/// `blocks[k][g*B + b]` is `Rot(diag_{gB+b}, -gB)`; `None` marks an all-zero
/// diagonal that is skipped at evaluation time.
#[derive(Clone, Debug)]
pub struct Diagonals {
    blocks: Vec<Vec<Option<SlotMatrix>>>,
}

impl Diagonals {
    pub fn build(plan: &BsgsPlan, sources: &[[RowSource<'_>; 2]], exec: Execution) -> Self {
        let blocks = exec.map(sources, |rows| block_diagonals(plan, rows));
        Self { blocks }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn nonzero_count(&self) -> usize {
        self.blocks.iter().flatten().filter(|d| d.is_some()).count()
    }
}

fn block_diagonals(plan: &BsgsPlan, rows: &[RowSource<'_>; 2]) -> Vec<Option<SlotMatrix>> {
    let w = plan.width;
    let sp = plan.s_pad;
    // powers[row][c * sp + r] = M[r][offset + c]
    let mut powers = [vec![0u64; w * sp], vec![0u64; w * sp]];
    for (row, src) in rows.iter().enumerate() {
        for c in 0..w {
            src.matrix
                .column_prefix(src.offset + c, sp, &mut powers[row][c * sp..(c + 1) * sp]);
        }
    }
    (0..sp)
        .map(|t| {
            let mut diag = SlotMatrix::zeros(w);
            let mut nonzero = false;
            for (row, pw) in powers.iter().enumerate() {
                let out = diag.row_mut(row);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = pw[((i + t) % w) * sp + i % sp];
                    nonzero |= *o != 0;
                }
            }
            let g = t / plan.baby;
            nonzero.then(|| diag.rotate_rows(-((g * plan.baby) as i64)))
        })
        .collect()
}

/// `sum over blocks k` of `M_k x_k`, with the result for matrix row `r` in
/// slot `r` of each slot row (`r < s'`); slots past `s'` hold partial sums.
///
/// Blocks are evaluated independently (in parallel under
/// [`Execution::Parallel`]) and joined before the shared giant steps and the
/// single rotate-and-sum pass.
pub fn bsgs_matvec<S: HeScheme>(
    ev: &Evaluator<'_, S>,
    plan: &BsgsPlan,
    diags: &Diagonals,
    inputs: &[S::Ciphertext],
) -> Result<S::Ciphertext, HeError> {
    if inputs.len() != diags.blocks.len() {
        return Err(HeError::DimensionMismatch {
            expected: diags.blocks.len(),
            got: inputs.len(),
        });
    }
    let (bb, gg) = (plan.baby, plan.giant);
    let per_block = ev.execution().map_range(
        inputs.len(),
        |k| -> Result<Vec<Option<S::Ciphertext>>, HeError> {
            let ds = &diags.blocks[k];
            let mut babies = Vec::with_capacity(bb);
            for b in 0..bb {
                let used = (0..gg).any(|g| ds[g * bb + b].is_some());
                babies.push(if used {
                    Some(ev.rot_row(&inputs[k], b as i64)?)
                } else {
                    None
                });
            }
            let mut inner = Vec::with_capacity(gg);
            for g in 0..gg {
                let mut acc: Option<S::Ciphertext> = None;
                for b in 0..bb {
                    if let (Some(d), Some(x)) = (&ds[g * bb + b], &babies[b]) {
                        let term = ev.mul_plain(x, &ev.encode(d)?)?;
                        acc = Some(match acc {
                            Some(a) => ev.add(&a, &term)?,
                            None => term,
                        });
                    }
                }
                inner.push(acc);
            }
            Ok(inner)
        },
    );

    let mut giant: Vec<Option<S::Ciphertext>> = vec![None; gg];
    for block in per_block {
        for (slot, term) in giant.iter_mut().zip(block?) {
            if let Some(t) = term {
                *slot = Some(match slot.take() {
                    Some(a) => ev.add(&a, &t)?,
                    None => t,
                });
            }
        }
    }

    let mut y: Option<S::Ciphertext> = None;
    for (g, inner) in giant.into_iter().enumerate() {
        if let Some(inner) = inner {
            let r = ev.rot_row(&inner, (g * bb) as i64)?;
            y = Some(match y {
                Some(a) => ev.add(&a, &r)?,
                None => r,
            });
        }
    }
    let mut y = match y {
        Some(y) => y,
        // all-zero matrix: still consume the level a product would
        None => ev.mul_plain(&inputs[0], &ev.encode(&SlotMatrix::zeros(plan.width))?)?,
    };
    for step in plan.fold_steps() {
        let r = ev.rot_row(&y, step as i64)?;
        y = ev.add(&y, &r)?;
    }
    Ok(y)
}
