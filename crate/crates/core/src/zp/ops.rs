//! Per-thread tally of Z_p operations.
//!
//! Decompression cost is reported as a count of field operations rather than
//! wall time. Every [`PrimeModulus`](super::PrimeModulus) operation adds to a
//! thread-local counter; [`measure`] reads the delta around a closure.

use std::cell::Cell;

thread_local! {
    static ZP_OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn tally(n: u64) {
    ZP_OPS.with(|c| c.set(c.get().wrapping_add(n)));
}

/// Current value of this thread's counter.
pub fn current() -> u64 {
    ZP_OPS.with(Cell::get)
}

/// Runs `f` and returns its result with the number of Z_p operations it performed
/// on the current thread.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = current();
    let out = f();
    (out, current().wrapping_sub(before))
}
