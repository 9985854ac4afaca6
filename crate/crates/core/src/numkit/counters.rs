//! Per-thread operation counters.
//!
//! The expensive steps of a removal mechanism are Hessian assembly
//! (`O(n d^2)`) and factorization (`O(d^3)`). Counting them lets tests and the
//! benchmark report state exactly how often each mechanism paid for them.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

thread_local! {
    static FACTORIZATIONS: Cell<u64> = const { Cell::new(0) };
    static HESSIAN_ASSEMBLIES: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub factorizations: u64,
    pub hessian_assemblies: u64,
}

impl OpCounts {
    /// Counts accumulated on the current thread so far.
    pub fn current() -> Self {
        OpCounts {
            factorizations: FACTORIZATIONS.with(Cell::get),
            hessian_assemblies: HESSIAN_ASSEMBLIES.with(Cell::get),
        }
    }

    /// Counts accumulated on the current thread since `self` was taken.
    pub fn since(self) -> Self {
        let now = Self::current();
        OpCounts {
            factorizations: now.factorizations - self.factorizations,
            hessian_assemblies: now.hessian_assemblies - self.hessian_assemblies,
        }
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.factorizations += rhs.factorizations;
        self.hessian_assemblies += rhs.hessian_assemblies;
    }
}

pub(crate) fn record_factorization() {
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_hessian_assembly() {
    HESSIAN_ASSEMBLIES.with(|c| c.set(c.get() + 1));
}
