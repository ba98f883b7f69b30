//! Word-probe instrumentation.
//!
//! Query-cost contracts in this crate are validated by counting reads of
//! stored 64-bit words rather than by wall-clock timing. Every accessor that
//! touches structure memory has a `_probed` variant threading a [`Probes`]
//! counter.

/// Counter of 64-bit word reads against stored structure data.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Probes {
    pub word_reads: u64,
}

impl Probes {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn count(&mut self, words: u64) {
        self.word_reads += words;
    }
}
