use std::fmt;
use std::ops::Range;

/// A half-open block of loop iterations `[begin, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct IterationRange {
    pub begin: usize,
    pub end: usize,
}

impl IterationRange {
    pub fn new(begin: usize, end: usize) -> Self {
        debug_assert!(begin <= end, "inverted range {begin}..{end}");
        IterationRange { begin, end }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.begin >= self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        self.begin <= index && index < self.end
    }

    pub fn iter(&self) -> Range<usize> {
        self.begin..self.end
    }
}

impl From<Range<usize>> for IterationRange {
    fn from(r: Range<usize>) -> Self {
        IterationRange::new(r.start, r.end)
    }
}

impl fmt::Display for IterationRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.begin, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_and_emptiness() {
        let r = IterationRange::new(10, 18);
        assert_eq!(r.len(), 8);
        assert!(!r.is_empty());
        assert!(IterationRange::new(5, 5).is_empty());
        assert_eq!(IterationRange::new(5, 5).iter().count(), 0);
    }

    #[test]
    fn display_is_half_open() {
        assert_eq!(IterationRange::new(3, 7).to_string(), "[3,7)");
    }
}
