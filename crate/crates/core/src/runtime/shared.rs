use std::sync::atomic::{AtomicU64, Ordering};

/// `f64` values shared between threads without locks.
///
/// Loads and stores are relaxed: each value is read or written whole, with
/// no ordering between different components.
pub(crate) struct SharedVec {
    cells: Vec<AtomicU64>,
}

impl SharedVec {
    pub(crate) fn from_slice(x: &[f64]) -> Self {
        SharedVec {
            cells: x.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    #[inline(always)]
    pub(crate) fn load(&self, i: usize) -> f64 {
        f64::from_bits(self.cells[i].load(Ordering::Relaxed))
    }

    #[inline(always)]
    pub(crate) fn store(&self, i: usize, v: f64) {
        self.cells[i].store(v.to_bits(), Ordering::Relaxed)
    }

    pub(crate) fn to_vec(&self) -> Vec<f64> {
        (0..self.cells.len()).map(|i| self.load(i)).collect()
    }
}
