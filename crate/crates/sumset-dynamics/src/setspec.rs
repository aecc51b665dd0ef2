//! Finitely evaluable descriptions of subsets of ℕ (positive integers).
//!
//! A `SetSpec` is an expression tree over residue classes, boolean
//! combinations, shifts, explicit membership windows, and cached return-time
//! sets of the affine torus systems. Purely arithmetic trees have unbounded
//! horizon; windows and return-time sets are decidable up to theirs.
//!
//! Densities over Følner windows `[M, M+N)` are exact rationals `count/N`;
//! the sampled max over windows is a lower bound for the upper Banach
//! density, never an estimate of it from above.

use crate::bits::BitRow;
use crate::nil::{AffineTorusSystem, ExactPoint, TorusBox};
use crate::rat::Rat;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Serialize rationals as "p/q" strings.
pub mod rat_serde {
    use crate::rat::{format_rat, parse_rat, Rat};
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSpec {
    /// {n ∈ ℕ : n ≡ r (mod m)}.
    Residue { m: u64, r: u64 },
    Union(Vec<SetSpec>),
    Intersection(Vec<SetSpec>),
    Complement(Box<SetSpec>),
    /// {n ∈ ℕ : n + t ∈ inner}, i.e. (inner − t) ∩ ℕ.
    Shift { t: u64, of: Box<SetSpec> },
    Window(ExplicitWindow),
    ReturnTime(ReturnTimeSet),
}

impl SetSpec {
    pub fn naturals() -> Self {
        SetSpec::Residue { m: 1, r: 0 }
    }

    pub fn odds() -> Self {
        SetSpec::Residue { m: 2, r: 1 }
    }

    pub fn evens() -> Self {
        SetSpec::Residue { m: 2, r: 0 }
    }

    /// The one-point set {n}, as a complete description.
    pub fn singleton(n: u64) -> Self {
        SetSpec::Window(ExplicitWindow::from_bools(n, &[true]).into_complete())
    }

    /// Exact membership for n ≥ 1 within the horizon.
    pub fn member(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::Invalid("membership domain starts at n = 1".into()));
        }
        if let Some(h) = self.horizon() {
            if n > h {
                return Err(Error::Horizon { n, horizon: h });
            }
        }
        Ok(self.member_unchecked(n))
    }

    fn member_unchecked(&self, n: u64) -> bool {
        match self {
            SetSpec::Residue { m, r } => n % m == *r,
            SetSpec::Union(parts) => parts.iter().any(|p| p.member_unchecked(n)),
            SetSpec::Intersection(parts) => parts.iter().all(|p| p.member_unchecked(n)),
            SetSpec::Complement(inner) => !inner.member_unchecked(n),
            SetSpec::Shift { t, of } => of.member_unchecked(n + t),
            SetSpec::Window(w) => w.get(n),
            SetSpec::ReturnTime(rt) => rt.cache.get(n),
        }
    }

    /// Largest n up to which membership is decidable; None means unbounded.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            SetSpec::Residue { .. } => None,
            SetSpec::Union(parts) | SetSpec::Intersection(parts) => {
                parts.iter().filter_map(|p| p.horizon()).min()
            }
            SetSpec::Complement(inner) => inner.horizon(),
            SetSpec::Shift { t, of } => of.horizon().map(|h| h.saturating_sub(*t)),
            SetSpec::Window(w) => w.horizon_opt(),
            SetSpec::ReturnTime(rt) => Some(rt.horizon),
        }
    }

    /// |A ∩ [M, M+N)| / N as an exact rational.
    pub fn window_density(&self, w: FolnerWindow) -> Result<Rat> {
        let mut count: u64 = 0;
        for n in w.start..w.start + w.len {
            if self.member(n)? {
                count += 1;
            }
        }
        Ok(Rat::new(count as i128, w.len as i128))
    }

    /// Max of `window_density` over `num_windows` windows of the given
    /// length, started at 1, 1+stride, 1+2·stride, …
    ///
    /// A sampled max is a lower bound for the upper Banach density d*(A).
    pub fn banach_density_estimate(
        &self,
        length: u64,
        num_windows: u64,
        stride: u64,
    ) -> Result<DensityEstimate> {
        if length == 0 || num_windows == 0 {
            return Err(Error::Invalid("need positive length and window count".into()));
        }
        let mut best: Option<(Rat, FolnerWindow)> = None;
        for i in 0..num_windows {
            let w = FolnerWindow {
                start: 1 + i * stride,
                len: length,
            };
            let d = self.window_density(w)?;
            if best.as_ref().map_or(true, |(b, _)| d > *b) {
                best = Some((d, w));
            }
        }
        let (value, best_window) = best.unwrap();
        Ok(DensityEstimate {
            value,
            best_window,
            windows_sampled: num_windows,
        })
    }
}

/// Interval window [start, start+len) with start ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerWindow {
    pub start: u64,
    pub len: u64,
}

impl FolnerWindow {
    pub fn prefix(len: u64) -> Self {
        FolnerWindow { start: 1, len }
    }

    /// |Φ ∩ (Φ + t)| / |Φ| for interval windows.
    pub fn shift_overlap(&self, t: u64) -> Rat {
        Rat::new(self.len.saturating_sub(t) as i128, self.len as i128)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FolnerKind {
    Prefix,
    Shifted { m: u64 },
}

/// The canonical interval family: [1, N] for N ≤ n_max, or [M, M+N).
pub fn folner_intervals(n_max: u64, kind: FolnerKind) -> Vec<FolnerWindow> {
    let start = match kind {
        FolnerKind::Prefix => 1,
        FolnerKind::Shifted { m } => m,
    };
    (1..=n_max).map(|n| FolnerWindow { start, len: n }).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityEstimate {
    #[serde(with = "rat_serde")]
    pub value: Rat,
    pub best_window: FolnerWindow,
    pub windows_sampled: u64,
}

/// Membership bit-vector for n in [offset, offset+len). A *partial* window
/// records an observation: n beyond it are undecidable. A *complete* window
/// describes the whole set: everything outside the bits is a non-member and
/// the horizon is unbounded.
///
/// Serialized run-length encoded: alternating run lengths starting with a
/// (possibly zero) run of non-members.
#[derive(Clone, Debug)]
pub struct ExplicitWindow {
    offset: u64,
    bits: BitRow,
    complete: bool,
}

impl ExplicitWindow {
    pub fn from_bools(offset: u64, bools: &[bool]) -> Self {
        let mut bits = BitRow::zeros(bools.len());
        for (i, &b) in bools.iter().enumerate() {
            if b {
                bits.set(i);
            }
        }
        ExplicitWindow {
            offset,
            bits,
            complete: false,
        }
    }

    /// Mark the window as a complete set description (unbounded horizon).
    pub fn into_complete(mut self) -> Self {
        self.complete = true;
        self
    }

    pub fn from_members(offset: u64, len: usize, members: impl IntoIterator<Item = u64>) -> Self {
        let mut bits = BitRow::zeros(len);
        for m in members {
            if m >= offset && ((m - offset) as usize) < len {
                bits.set((m - offset) as usize);
            }
        }
        ExplicitWindow {
            offset,
            bits,
            complete: false,
        }
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len() == 0
    }

    pub fn horizon(&self) -> u64 {
        self.offset + self.bits.len() as u64 - 1
    }

    fn horizon_opt(&self) -> Option<u64> {
        if self.complete {
            None
        } else {
            Some(self.horizon())
        }
    }

    pub fn get(&self, n: u64) -> bool {
        n >= self.offset && self.bits.get((n - self.offset) as usize)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    fn runs(&self) -> Vec<u64> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut run: u64 = 0;
        for i in 0..self.bits.len() {
            let b = self.bits.get(i);
            if b == current {
                run += 1;
            } else {
                runs.push(run);
                current = b;
                run = 1;
            }
        }
        runs.push(run);
        runs
    }

    fn from_runs(offset: u64, runs: &[u64]) -> Result<Self> {
        let len: u64 = runs.iter().sum();
        if len == 0 {
            return Err(Error::Malformed("empty run-length payload".into()));
        }
        let mut bits = BitRow::zeros(len as usize);
        let mut pos: u64 = 0;
        for (i, &r) in runs.iter().enumerate() {
            if i % 2 == 1 {
                for p in pos..pos + r {
                    bits.set(p as usize);
                }
            }
            pos += r;
        }
        Ok(ExplicitWindow {
            offset,
            bits,
            complete: false,
        })
    }
}

impl PartialEq for ExplicitWindow {
    fn eq(&self, other: &Self) -> bool {
        self.offset == other.offset
            && self.complete == other.complete
            && self.bits.len() == other.bits.len()
            && (0..self.bits.len()).all(|i| self.bits.get(i) == other.bits.get(i))
    }
}

#[derive(Serialize, Deserialize)]
struct WindowWire {
    offset: u64,
    runs: Vec<u64>,
    #[serde(default)]
    complete: bool,
}

impl Serialize for ExplicitWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WindowWire {
            offset: self.offset,
            runs: self.runs(),
            complete: self.complete,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExplicitWindow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = WindowWire::deserialize(d)?;
        let w = ExplicitWindow::from_runs(wire.offset, &wire.runs)
            .map_err(|e| serde::de::Error::custom(e.to_string()))?;
        Ok(if wire.complete { w.into_complete() } else { w })
    }
}

/// Return times {n ≤ horizon : T^n a ∈ E}, cached as a bit-vector built once
/// from the exact orbit engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeSet {
    pub system: AffineTorusSystem,
    pub base: ExactPoint,
    pub target: TorusBox,
    pub horizon: u64,
    pub cache: ExplicitWindow,
}

impl ReturnTimeSet {
    /// Rebuild the cache from the orbit; must agree bit-for-bit.
    pub fn recompute(&self) -> Result<ExplicitWindow> {
        build_return_cache(&self.system, &self.base, &self.target, self.horizon)
    }
}

const RETURN_TIME_CAP: u64 = 100_000_000;

fn build_return_cache(
    system: &AffineTorusSystem,
    base: &ExactPoint,
    target: &TorusBox,
    horizon: u64,
) -> Result<ExplicitWindow> {
    if horizon == 0 || horizon > RETURN_TIME_CAP {
        return Err(Error::Capacity(format!(
            "return-time horizon must be in 1..={RETURN_TIME_CAP}"
        )));
    }
    let mut bits = BitRow::zeros(horizon as usize);
    let mut orbit = system.orbit_iter_exact(base, 1, 1)?;
    let scaled = target.scaled(orbit.den());
    for i in 0..horizon as usize {
        let p = orbit.current();
        if scaled
            .iter()
            .zip(&p.coords)
            .all(|(arc, &v)| arc.contains(v))
        {
            bits.set(i);
        }
        orbit.advance();
    }
    Ok(ExplicitWindow {
        offset: 1,
        bits,
        complete: false,
    })
}

/// Build the return-time set of `a` to the box `E` up to time `horizon`.
pub fn return_time_set(
    system: &AffineTorusSystem,
    base: &ExactPoint,
    target: &TorusBox,
    horizon: u64,
) -> Result<SetSpec> {
    if base.dim() != system.dim() || target.arcs.len() != system.dim() {
        return Err(Error::Invalid("dimension mismatch".into()));
    }
    let cache = build_return_cache(system, base, target, horizon)?;
    Ok(SetSpec::ReturnTime(ReturnTimeSet {
        system: system.clone(),
        base: base.clone(),
        target: target.clone(),
        horizon,
        cache,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn member_basics() {
        assert!(SetSpec::odds().member(7).unwrap());
        assert!(!SetSpec::odds().member(8).unwrap());
        let c = SetSpec::Complement(Box::new(SetSpec::Residue { m: 3, r: 0 }));
        assert!(!c.member(9).unwrap());
        assert!(c.member(10).unwrap());
        assert!(SetSpec::naturals().member(1).unwrap());
        assert!(SetSpec::odds().member(0).is_err());
    }

    #[test]
    fn shift_semantics() {
        // Shift(S, t) = {n ≥ 1 : n + t ∈ S}.
        let s = SetSpec::Shift {
            t: 3,
            of: Box::new(SetSpec::Residue { m: 5, r: 0 }),
        };
        assert!(s.member(2).unwrap()); // 2 + 3 = 5
        assert!(!s.member(3).unwrap());
        assert!(s.member(7).unwrap()); // 10
    }

    #[test]
    fn windows_and_horizons() {
        let w = SetSpec::Window(ExplicitWindow::from_bools(5, &[true, false, true]));
        assert_eq!(w.horizon(), Some(7));
        assert!(w.member(5).unwrap());
        assert!(!w.member(6).unwrap());
        assert!(w.member(7).unwrap());
        assert!(!w.member(2).unwrap()); // below offset: non-member
        assert!(matches!(w.member(8), Err(Error::Horizon { .. })));

        let shifted = SetSpec::Shift { t: 2, of: Box::new(w) };
        assert_eq!(shifted.horizon(), Some(5));
        assert!(shifted.member(3).unwrap()); // 3 + 2 = 5
    }

    #[test]
    fn densities() {
        let odds = SetSpec::odds();
        assert_eq!(
            odds.window_density(FolnerWindow { start: 1, len: 100 }).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            SetSpec::naturals()
                .window_density(FolnerWindow { start: 17, len: 33 })
                .unwrap(),
            rat(1, 1)
        );
        // Residue class density over q full periods is exactly 1/m.
        let r = SetSpec::Residue { m: 7, r: 3 };
        assert_eq!(
            r.window_density(FolnerWindow { start: 1, len: 7 * 11 }).unwrap(),
            rat(1, 7)
        );
        let est = odds.banach_density_estimate(10, 5, 3).unwrap();
        assert_eq!(est.value, rat(1, 2));
    }

    #[test]
    fn alternating_blocks_have_full_window() {
        // 0-blocks and 1-blocks of length 8: some window of length 8 is all ones.
        let bools: Vec<bool> = (0..64).map(|i| (i / 8) % 2 == 1).collect();
        let w = SetSpec::Window(ExplicitWindow::from_bools(1, &bools));
        let est = w.banach_density_estimate(8, 50, 1).unwrap();
        assert_eq!(est.value, rat(1, 1));
    }

    #[test]
    fn complement_density_identity() {
        let s = SetSpec::Union(vec![
            SetSpec::Residue { m: 3, r: 1 },
            SetSpec::Residue { m: 5, r: 2 },
        ]);
        let w = FolnerWindow { start: 11, len: 400 };
        let d = s.window_density(w).unwrap();
        let dc = SetSpec::Complement(Box::new(s)).window_density(w).unwrap();
        assert_eq!(d + dc, rat(1, 1));
    }

    #[test]
    fn folner_families() {
        let pre = folner_intervals(3, FolnerKind::Prefix);
        assert_eq!(
            pre,
            vec![
                FolnerWindow { start: 1, len: 1 },
                FolnerWindow { start: 1, len: 2 },
                FolnerWindow { start: 1, len: 3 },
            ]
        );
        let sh = folner_intervals(5, FolnerKind::Shifted { m: 10 });
        assert_eq!(sh[4], FolnerWindow { start: 10, len: 5 });
        // Asymptotic shift invariance for t = 1.
        let overlaps: Vec<Rat> = (1..=4)
            .map(|k| FolnerWindow::prefix(10u64.pow(k)).shift_overlap(1))
            .collect();
        assert!(overlaps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(overlaps[3], rat(9999, 10000));
    }

    #[test]
    fn rle_round_trip() {
        let bools: Vec<bool> = (0..300).map(|i| i % 7 == 0 || i % 11 == 3).collect();
        let w = ExplicitWindow::from_bools(4, &bools);
        let json = serde_json::to_string(&w).unwrap();
        let back: ExplicitWindow = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn return_time_round_trip_and_oracle() {
        // s=1, α = golden-ratio convergent, E = [0, 1/2), horizon 10:
        // membership must agree with direct evaluation of {nα}.
        let sys = AffineTorusSystem::new(1, rat(610, 987)).unwrap();
        let e = TorusBox::new(vec![crate::nil::TorusArc::new(rat(0, 1), rat(1, 2)).unwrap()]);
        let a = ExactPoint::origin(1);
        let spec = return_time_set(&sys, &a, &e, 10).unwrap();
        for n in 1..=10u64 {
            let direct = (n as u128 * 610 % 987) < 494; // {n·610/987} < 1/2 ⟺ residue < 987/2
            assert_eq!(spec.member(n).unwrap(), direct, "n={n}");
        }

        // Full torus: every n; cache consistent with recomputation.
        let full = TorusBox::full(1);
        if let SetSpec::ReturnTime(rt) = return_time_set(&sys, &a, &full, 50).unwrap() {
            assert_eq!(rt.cache.count_ones(), 50);
            assert_eq!(rt.recompute().unwrap(), rt.cache);
        } else {
            panic!("expected return-time spec");
        }

        let json = serde_json::to_string(&spec).unwrap();
        let back: SetSpec = serde_json::from_str(&json).unwrap();
        for n in 1..=10u64 {
            assert_eq!(spec.member(n).unwrap(), back.member(n).unwrap());
        }
    }

    #[test]
    fn empty_box_rejected() {
        assert!(crate::nil::TorusArc::new(rat(0, 1), rat(0, 1)).is_err());
    }
}
