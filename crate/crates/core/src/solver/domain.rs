//! Integer domains with a trail for backtracking.

/// Domains up to this width keep an exact bitset; wider ones only track bounds.
const BITSET_LIMIT: i64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Dom {
    lo: i64,
    hi: i64,
    /// Bit `v - base` is set when `v` is still possible.
    bits: Option<(i64, Vec<u64>)>,
    size: u64,
}

/// The domain became empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fail;

pub type Prune = Result<bool, Fail>;

impl Dom {
    pub fn range(lo: i64, hi: i64) -> Dom {
        let width = hi as i128 - lo as i128 + 1;
        let bits = (width > 0 && width <= BITSET_LIMIT as i128).then(|| {
            let mut words = vec![u64::MAX; (width as usize).div_ceil(64)];
            let extra = words.len() * 64 - width as usize;
            if extra > 0 {
                *words.last_mut().unwrap() >>= extra;
            }
            (lo, words)
        });
        Dom {
            lo,
            hi,
            bits,
            size: width.max(0) as u64,
        }
    }

    pub fn from_values(vs: &[i64]) -> Dom {
        let (Some(&lo), Some(&hi)) = (vs.iter().min(), vs.iter().max()) else {
            return Dom::range(1, 0);
        };
        let mut d = Dom::range(lo, hi);
        if d.bits.is_some() {
            let keep: std::collections::BTreeSet<i64> = vs.iter().copied().collect();
            for v in lo..=hi {
                if !keep.contains(&v) {
                    d.clear_bit(v);
                }
            }
            d.size = keep.len() as u64;
        }
        d
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.bits.is_some()
    }

    pub fn contains(&self, v: i64) -> bool {
        if v < self.lo || v > self.hi {
            return false;
        }
        match &self.bits {
            Some((base, w)) => {
                let k = (v - base) as usize;
                w[k / 64] >> (k % 64) & 1 == 1
            }
            None => true,
        }
    }

    fn clear_bit(&mut self, v: i64) {
        if let Some((base, w)) = &mut self.bits {
            let k = (v - *base) as usize;
            w[k / 64] &= !(1u64 << (k % 64));
        }
    }

    /// Moves `lo` up to the next present value.
    fn settle_lo(&mut self) {
        while self.lo <= self.hi && !self.contains(self.lo) {
            self.lo += 1;
        }
    }

    fn settle_hi(&mut self) {
        while self.hi >= self.lo && !self.contains(self.hi) {
            self.hi -= 1;
        }
    }

    pub fn set_lo(&mut self, v: i64) -> Prune {
        if v <= self.lo {
            return Ok(false);
        }
        if v > self.hi {
            return Err(Fail);
        }
        if self.bits.is_some() {
            for x in self.lo..v {
                if self.contains(x) {
                    self.clear_bit(x);
                    self.size -= 1;
                }
            }
            self.lo = v;
            self.settle_lo();
        } else {
            self.size -= (v - self.lo) as u64;
            self.lo = v;
        }
        Ok(true)
    }

    pub fn set_hi(&mut self, v: i64) -> Prune {
        if v >= self.hi {
            return Ok(false);
        }
        if v < self.lo {
            return Err(Fail);
        }
        if self.bits.is_some() {
            for x in v + 1..=self.hi {
                if self.contains(x) {
                    self.clear_bit(x);
                    self.size -= 1;
                }
            }
            self.hi = v;
            self.settle_hi();
        } else {
            self.size -= (self.hi - v) as u64;
            self.hi = v;
        }
        Ok(true)
    }

    pub fn remove(&mut self, v: i64) -> Prune {
        if !self.contains(v) {
            return Ok(false);
        }
        if self.lo == self.hi {
            return Err(Fail);
        }
        if v == self.lo {
            return self.set_lo(v + 1);
        }
        if v == self.hi {
            return self.set_hi(v - 1);
        }
        if self.bits.is_some() {
            self.clear_bit(v);
            self.size -= 1;
            Ok(true)
        } else {
            // Interior holes are not representable; the value stays.
            Ok(false)
        }
    }

    pub fn assign(&mut self, v: i64) -> Prune {
        if !self.contains(v) {
            return Err(Fail);
        }
        let changed = self.lo != self.hi;
        if changed {
            self.set_lo(v)?;
            self.set_hi(v)?;
        }
        Ok(changed)
    }

    /// Present values in increasing order.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (self.lo..=self.hi).filter(move |v| self.contains(*v))
    }
}

/// All domains plus the undo trail.
#[derive(Debug, Clone)]
pub struct Store {
    pub doms: Vec<Dom>,
    stamp: Vec<usize>,
    trail: Vec<(usize, Dom)>,
    marks: Vec<usize>,
    /// Variables changed since the engine last looked.
    pub changed: Vec<usize>,
}

impl Store {
    pub fn new() -> Store {
        Store {
            doms: Vec::new(),
            stamp: Vec::new(),
            trail: Vec::new(),
            marks: Vec::new(),
            changed: Vec::new(),
        }
    }

    pub fn add(&mut self, d: Dom) -> usize {
        self.doms.push(d);
        self.stamp.push(usize::MAX);
        self.doms.len() - 1
    }

    pub fn level(&self) -> usize {
        self.marks.len()
    }

    pub fn push_level(&mut self) {
        self.marks.push(self.trail.len());
    }

    /// Undoes every change made since the matching `push_level`.
    pub fn pop_level(&mut self) {
        let mark = self.marks.pop().expect("pop_level without push_level");
        while self.trail.len() > mark {
            let (v, d) = self.trail.pop().unwrap();
            self.doms[v] = d;
            self.stamp[v] = usize::MAX;
        }
        // Entries below the mark belong to outer levels; restore their stamps.
        for (v, _) in &self.trail[self.marks.last().copied().unwrap_or(0)..] {
            self.stamp[*v] = self.marks.len();
        }
        self.changed.clear();
    }

    fn touch(&mut self, v: usize) {
        let level = self.level();
        if self.stamp[v] != level {
            self.trail.push((v, self.doms[v].clone()));
            self.stamp[v] = level;
        }
    }

    fn apply(&mut self, v: usize, f: impl FnOnce(&mut Dom) -> Prune) -> Prune {
        let before = (self.doms[v].lo, self.doms[v].hi, self.doms[v].size);
        let mut d = self.doms[v].clone();
        let changed = f(&mut d)?;
        if changed && (d.lo, d.hi, d.size) != before {
            self.touch(v);
            self.doms[v] = d;
            self.changed.push(v);
            return Ok(true);
        }
        Ok(false)
    }

    pub fn set_lo(&mut self, v: usize, x: i64) -> Prune {
        if x <= self.doms[v].lo {
            return Ok(false);
        }
        self.apply(v, |d| d.set_lo(x))
    }

    pub fn set_hi(&mut self, v: usize, x: i64) -> Prune {
        if x >= self.doms[v].hi {
            return Ok(false);
        }
        self.apply(v, |d| d.set_hi(x))
    }

    pub fn remove(&mut self, v: usize, x: i64) -> Prune {
        if !self.doms[v].contains(x) {
            return Ok(false);
        }
        self.apply(v, |d| d.remove(x))
    }

    pub fn assign(&mut self, v: usize, x: i64) -> Prune {
        if self.doms[v].is_fixed() && self.doms[v].lo == x {
            return Ok(false);
        }
        self.apply(v, |d| d.assign(x))
    }

    /// Bounds clamped into i64 from wide intermediate arithmetic.
    pub fn set_lo_wide(&mut self, v: usize, x: i128) -> Prune {
        if x > i64::MAX as i128 {
            return Err(Fail);
        }
        self.set_lo(v, x.max(i64::MIN as i128) as i64)
    }

    pub fn set_hi_wide(&mut self, v: usize, x: i128) -> Prune {
        if x < i64::MIN as i128 {
            return Err(Fail);
        }
        self.set_hi(v, x.min(i64::MAX as i128) as i64)
    }

    pub fn lo(&self, v: usize) -> i64 {
        self.doms[v].lo
    }

    pub fn hi(&self, v: usize) -> i64 {
        self.doms[v].hi
    }

    pub fn fixed(&self, v: usize) -> Option<i64> {
        self.doms[v].is_fixed().then_some(self.doms[v].lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_domain_operations() {
        let mut d = Dom::from_values(&[1, 3, 5, 7]);
        assert_eq!(d.size(), 4);
        assert_eq!(d.remove(3), Ok(true));
        assert_eq!(d.values().collect::<Vec<_>>(), [1, 5, 7]);
        assert_eq!(d.set_lo(2), Ok(true));
        assert_eq!(d.lo(), 5);
        assert_eq!(d.set_hi(6), Ok(true));
        assert!(d.is_fixed());
        assert_eq!(d.remove(5), Err(Fail));
    }

    #[test]
    fn wide_domain_tracks_bounds() {
        let mut d = Dom::range(0, 1_000_000);
        assert!(!d.is_exact());
        assert_eq!(d.remove(10), Ok(false));
        assert_eq!(d.remove(0), Ok(true));
        assert_eq!(d.size(), 1_000_000);
    }

    #[test]
    fn trail_restores_exactly() {
        let mut s = Store::new();
        let x = s.add(Dom::range(1, 9));
        let y = s.add(Dom::range(1, 9));
        let before = s.doms.clone();
        s.push_level();
        s.set_lo(x, 3).unwrap();
        s.push_level();
        s.remove(x, 5).unwrap();
        s.assign(y, 4).unwrap();
        let mid = s.doms.clone();
        s.push_level();
        s.assign(x, 7).unwrap();
        s.pop_level();
        assert_eq!(s.doms, mid);
        s.pop_level();
        s.set_hi(x, 8).unwrap();
        s.pop_level();
        assert_eq!(s.doms, before);
    }
}
