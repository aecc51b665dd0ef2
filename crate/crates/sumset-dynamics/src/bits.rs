//! Dense bit vector with the shifted-or kernel used by the sumset DP.

#[derive(Clone, Debug, Default)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// self |= other << shift, truncated at self.len.
    pub fn or_shifted(&mut self, other: &BitRow, shift: usize) {
        let (wshift, bshift) = (shift / 64, shift % 64);
        let n = self.words.len();
        if bshift == 0 {
            for i in (wshift..n).rev() {
                self.words[i] |= other.words.get(i - wshift).copied().unwrap_or(0);
            }
        } else {
            for i in (wshift..n).rev() {
                let lo = other.words.get(i - wshift).copied().unwrap_or(0) << bshift;
                let hi = if i > wshift {
                    other.words.get(i - wshift - 1).copied().unwrap_or(0) >> (64 - bshift)
                } else {
                    0
                };
                self.words[i] |= lo | hi;
            }
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_or_matches_naive() {
        for shift in [0usize, 1, 3, 63, 64, 65, 130] {
            let mut a = BitRow::zeros(200);
            let mut b = BitRow::zeros(200);
            for i in [0usize, 5, 64, 127, 199] {
                b.set(i);
            }
            a.set(2);
            a.or_shifted(&b, shift);
            for i in 0..200 {
                let expect = (i == 2) || (i >= shift && b.get(i - shift));
                assert_eq!(a.get(i), expect, "bit {i} shift {shift}");
            }
        }
    }

    #[test]
    fn ones_iteration() {
        let mut a = BitRow::zeros(130);
        for i in [0usize, 63, 64, 129] {
            a.set(i);
        }
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(a.count_ones(), 4);
    }
}
