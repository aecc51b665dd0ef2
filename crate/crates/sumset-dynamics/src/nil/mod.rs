//! Unipotent affine transformations of the torus `T^s`, simulated exactly.
//!
//! The map is `T(x_1,…,x_s)_j = x_j + Σ_{i<j} C(j,i)·x_i + α (mod 1)`, whose
//! linear part is the lower-triangular Pascal matrix. Its powers have the
//! closed form `T^n(x)_j = Σ_{i≤j} C(j,i)·n^{j-i}·x_i + n^j·α`, so the orbit
//! of the origin is `(nα, n²α, …, n^sα)`.
//!
//! Two arithmetic modes are provided. In exact mode every coordinate is a
//! residue `v/den` with a common denominator, all updates are integer adds
//! mod `den`, and two independent routes exist for every orbit value: a
//! finite-difference table advanced additively, and the closed form evaluated
//! with modular exponentiation. Floating mode advances compensated `f64`
//! difference tables seeded from the exact engine.

pub mod omega;

use crate::rat::{binomial, dist_mod1, format_rat, lcm_u128, mod1, pow_mod, to_f64, Rat};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Dimension and rotation of the affine system. The rotation is kept as an
/// exact rational; decimal CLI input is parsed as an exact fraction over a
/// power of ten.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTorusSystem {
    dim: usize,
    #[serde(with = "crate::setspec::rat_serde")]
    alpha: Rat,
}

impl AffineTorusSystem {
    pub fn new(dim: usize, alpha: Rat) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be >= 1".into()));
        }
        let alpha = mod1(alpha);
        if *alpha.denom() as u128 > u64::MAX as u128 {
            return Err(Error::Capacity("alpha denominator exceeds 2^64".into()));
        }
        Ok(AffineTorusSystem { dim, alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> Rat {
        self.alpha
    }

    pub fn describe(&self) -> String {
        format!("T^{} affine, alpha = {}", self.dim, format_rat(self.alpha))
    }

    /// Entry (j, i) of the linear part, 1-indexed: C(j, i) for i ≤ j.
    pub fn linear_entry(&self, j: usize, i: usize) -> u128 {
        binomial(j as u64, i as u64)
    }

    /// One application of T on exact residues.
    pub fn step_exact(&self, p: &ExactPoint) -> Result<ExactPoint> {
        let p = p.with_alpha_den(self.alpha)?;
        let den = p.den;
        let alpha_res = alpha_residue(self.alpha, den);
        let mut coords = vec![0u64; self.dim];
        for j in 1..=self.dim {
            let mut acc: u128 = p.coords[j - 1] as u128;
            for i in 1..j {
                let c = self.linear_entry(j, i) % den as u128;
                acc = (acc + c * p.coords[i - 1] as u128) % den as u128;
            }
            coords[j - 1] = ((acc + alpha_res as u128) % den as u128) as u64;
        }
        Ok(ExactPoint { den, coords })
    }

    /// One application of T on f64 coordinates.
    pub fn step_float(&self, x: &[f64]) -> Vec<f64> {
        let alpha = to_f64(self.alpha);
        (1..=self.dim)
            .map(|j| {
                let mut acc = x[j - 1] + alpha;
                for i in 1..j {
                    acc += self.linear_entry(j, i) as f64 * x[i - 1];
                }
                acc.rem_euclid(1.0)
            })
            .collect()
    }

    /// `T^n a` by the closed form, in exact arithmetic.
    ///
    /// Coordinate j is `Σ_{i≤j} C(j,i)·n^{j-i}·a_i + n^j·α`, with every power
    /// reduced mod the common denominator before multiplying.
    pub fn orbit_point_exact(&self, a: &ExactPoint, n: u64) -> Result<ExactPoint> {
        let a = a.with_alpha_den(self.alpha)?;
        let den = a.den as u128;
        let alpha_res = alpha_residue(self.alpha, a.den) as u128;
        let mut coords = vec![0u64; self.dim];
        for j in 1..=self.dim {
            let mut acc: u128 = 0;
            for i in 1..=j {
                let c = self.linear_entry(j, i) % den;
                let npow = pow_mod(n as u128, (j - i) as u64, den);
                let factor = c * npow % den;
                acc = (acc + factor * a.coords[i - 1] as u128) % den;
            }
            let npow_j = pow_mod(n as u128, j as u64, den);
            acc = (acc + npow_j * alpha_res) % den;
            coords[j - 1] = acc as u64;
        }
        Ok(ExactPoint { den: a.den, coords })
    }

    /// `T^n a` in floating arithmetic. The rotation part `n^j·α` is formed
    /// exactly before rounding; the point-dependent part multiplies integer
    /// matrix entries into `a`, so precision degrades for very large `n`
    /// combined with an inexact `a`.
    pub fn orbit_point_float(&self, a: &[f64], n: u64) -> Vec<f64> {
        let q = *self.alpha.denom() as u128;
        let p = *self.alpha.numer() as u128;
        (1..=self.dim)
            .map(|j| {
                let mut acc = 0.0f64;
                for i in 1..=j {
                    let c = self.linear_entry(j, i) as f64;
                    let npow = (n as f64).powi((j - i) as i32);
                    acc += (c * npow * a[i - 1]).rem_euclid(1.0);
                }
                let rot = pow_mod(n as u128, j as u64, q) * p % q;
                (acc + rot as f64 / q as f64).rem_euclid(1.0)
            })
            .collect()
    }

    /// `(T^n a, T^{2n} a, …, T^{kn} a)`.
    pub fn diagonal_eval(&self, a: &ExactPoint, k: usize, n: u64) -> Result<Vec<ExactPoint>> {
        (1..=k)
            .map(|i| self.orbit_point_exact(a, i as u64 * n))
            .collect()
    }

    /// Exact sequential orbit `T^{n0 + stride·u} a` for u = 0, 1, 2, …
    pub fn orbit_iter_exact(
        &self,
        a: &ExactPoint,
        n0: u64,
        stride: u64,
    ) -> Result<ExactOrbitIter> {
        ExactOrbitIter::seed(self, a, n0, stride)
    }

    /// Floating sequential orbit seeded (and periodically re-seeded) from
    /// the exact engine.
    pub fn orbit_iter_float(
        &self,
        a: &ExactPoint,
        n0: u64,
        stride: u64,
    ) -> Result<FloatOrbitIter> {
        let exact = ExactOrbitIter::seed(self, a, n0, stride)?;
        Ok(FloatOrbitIter::from_exact(self, exact, a.clone(), n0, stride))
    }

    /// (L - I) is nilpotent of order ≤ dim; returns the first power at which
    /// it vanishes.
    pub fn nilpotency_order(&self) -> usize {
        let s = self.dim;
        let mut m = vec![vec![0i128; s]; s];
        for j in 1..=s {
            for i in 1..j {
                m[j - 1][i - 1] = self.linear_entry(j, i) as i128;
            }
        }
        let mut acc = m.clone();
        for order in 1..=s + 1 {
            if acc.iter().all(|row| row.iter().all(|&x| x == 0)) {
                return order - 1;
            }
            let mut next = vec![vec![0i128; s]; s];
            for r in 0..s {
                for c in 0..s {
                    next[r][c] = (0..s).map(|t| acc[r][t] * m[t][c]).sum();
                }
            }
            acc = next;
        }
        s + 1
    }
}

fn alpha_residue(alpha: Rat, den: u64) -> u64 {
    // alpha = p/q with q | den; residue is p * (den/q) mod den.
    let q = *alpha.denom() as u128;
    let p = mod1(alpha);
    let p = *p.numer() as u128;
    (p * (den as u128 / q) % den as u128) as u64
}

/// Point of `T^s` with all coordinates over one denominator: value_j = coords[j]/den.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPoint {
    pub den: u64,
    pub coords: Vec<u64>,
}

impl ExactPoint {
    pub fn origin(dim: usize) -> Self {
        ExactPoint {
            den: 1,
            coords: vec![0; dim],
        }
    }

    pub fn from_rats(rats: &[Rat]) -> Result<Self> {
        let mut den: u128 = 1;
        for r in rats {
            den = lcm_u128(den, *r.denom() as u128);
            if den > u64::MAX as u128 {
                return Err(Error::Capacity("common denominator exceeds 2^64".into()));
            }
        }
        let coords = rats
            .iter()
            .map(|r| {
                let m = mod1(*r);
                (*m.numer() as u128 * (den / *m.denom() as u128) % den) as u64
            })
            .collect();
        Ok(ExactPoint {
            den: den as u64,
            coords,
        })
    }

    pub fn to_rats(&self) -> Vec<Rat> {
        self.coords
            .iter()
            .map(|&v| Rat::new(v as i128, self.den as i128))
            .collect()
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|&v| v as f64 / self.den as f64)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Rescale so the denominator is a multiple of alpha's.
    fn with_alpha_den(&self, alpha: Rat) -> Result<ExactPoint> {
        let q = *alpha.denom() as u128;
        let den = lcm_u128(self.den as u128, q);
        if den > u64::MAX as u128 {
            return Err(Error::Capacity(
                "orbit denominator exceeds 2^64; reduce alpha or point precision".into(),
            ));
        }
        if den == self.den as u128 {
            return Ok(self.clone());
        }
        let scale = den / self.den as u128;
        Ok(ExactPoint {
            den: den as u64,
            coords: self
                .coords
                .iter()
                .map(|&v| (v as u128 * scale % den) as u64)
                .collect(),
        })
    }
}

/// Forward-difference advancement of the exact orbit.
///
/// Coordinate j of `T^{n0+stride·u} a` is a degree-j polynomial in u; the
/// iterator holds its difference table mod `den` and each step is j integer
/// adds. Seeding evaluates the closed form at j+1 points, so the two routes
/// share no arithmetic beyond the seeds.
pub struct ExactOrbitIter {
    den: u64,
    tables: Vec<Vec<u64>>,
}

impl ExactOrbitIter {
    fn seed(sys: &AffineTorusSystem, a: &ExactPoint, n0: u64, stride: u64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Invalid("stride must be >= 1".into()));
        }
        let a = a.with_alpha_den(sys.alpha)?;
        let den = a.den;
        // Closed-form values at u = 0..=j feed the difference table.
        let probes: Vec<ExactPoint> = (0..=sys.dim as u64)
            .map(|u| sys.orbit_point_exact(&a, n0 + stride * u))
            .collect::<Result<_>>()?;
        let tables = (1..=sys.dim)
            .map(|j| {
                let mut col: Vec<u64> = probes.iter().take(j + 1).map(|p| p.coords[j - 1]).collect();
                let mut table = Vec::with_capacity(j + 1);
                while !col.is_empty() {
                    table.push(col[0]);
                    col = col
                        .windows(2)
                        .map(|w| sub_mod(w[1], w[0], den))
                        .collect();
                }
                table
            })
            .collect();
        Ok(ExactOrbitIter { den, tables })
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Current point as raw residues (coordinate j is `tables[j][0]`).
    pub fn current(&self) -> ExactPoint {
        ExactPoint {
            den: self.den,
            coords: self.tables.iter().map(|t| t[0]).collect(),
        }
    }

    pub fn advance(&mut self) {
        for table in &mut self.tables {
            for r in 0..table.len() - 1 {
                table[r] = add_mod(table[r], table[r + 1], self.den);
            }
        }
    }
}

impl Iterator for ExactOrbitIter {
    type Item = ExactPoint;
    fn next(&mut self) -> Option<ExactPoint> {
        let out = self.current();
        self.advance();
        Some(out)
    }
}

#[inline]
fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (if s >= m as u128 { s - m as u128 } else { s }) as u64
}

#[inline]
fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        (a as u128 + m as u128 - b as u128) as u64
    }
}

/// Compensated floating difference tables (Kahan per slot).
///
/// Rounding bias in the top difference slot integrates through the cascade
/// like C(n, s)·ulp, so the tables re-seed from the exact closed form every
/// `RESEED_SPAN` steps; within a span the drift stays below ~10⁻¹⁰ for s ≤ 4.
pub struct FloatOrbitIter {
    sys: AffineTorusSystem,
    base: ExactPoint,
    n0: u64,
    stride: u64,
    /// Steps taken since construction.
    position: u64,
    tables: Vec<Vec<f64>>,
    comp: Vec<Vec<f64>>,
}

const RESEED_SPAN: u64 = 64;

impl FloatOrbitIter {
    fn from_exact(sys: &AffineTorusSystem, exact: ExactOrbitIter, base: ExactPoint, n0: u64, stride: u64) -> Self {
        let (tables, comp) = Self::convert(&exact);
        FloatOrbitIter {
            sys: sys.clone(),
            base,
            n0,
            stride,
            position: 0,
            tables,
            comp,
        }
    }

    fn convert(exact: &ExactOrbitIter) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let den = exact.den as f64;
        let tables: Vec<Vec<f64>> = exact
            .tables
            .iter()
            .map(|t| t.iter().map(|&v| v as f64 / den).collect())
            .collect();
        let comp = tables.iter().map(|t| vec![0.0; t.len()]).collect();
        (tables, comp)
    }

    pub fn current(&self) -> Vec<f64> {
        self.tables.iter().map(|t| t[0]).collect()
    }

    pub fn advance(&mut self) {
        self.position += 1;
        if self.position % RESEED_SPAN == 0 {
            if let Ok(exact) = ExactOrbitIter::seed(
                &self.sys,
                &self.base,
                self.n0 + self.stride * self.position,
                self.stride,
            ) {
                let (tables, comp) = Self::convert(&exact);
                self.tables = tables;
                self.comp = comp;
                return;
            }
        }
        for (table, comp) in self.tables.iter_mut().zip(&mut self.comp) {
            for r in 0..table.len() - 1 {
                let y = table[r + 1] - comp[r];
                let t = table[r] + y;
                comp[r] = (t - table[r]) - y;
                // The wrap is exact for t in [1, 2), so the compensation
                // term stays valid across it.
                table[r] = if t >= 1.0 { t - 1.0 } else { t };
            }
        }
    }
}

impl Iterator for FloatOrbitIter {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// Half-open arc [lo, lo+len) on the circle, wrap allowed. Lengths are in (0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusArc {
    #[serde(with = "crate::setspec::rat_serde")]
    pub lo: Rat,
    #[serde(with = "crate::setspec::rat_serde")]
    pub len: Rat,
}

impl TorusArc {
    pub fn new(lo: Rat, len: Rat) -> Result<Self> {
        if len <= Rat::zero() || len > Rat::one() {
            return Err(Error::Invalid("arc length must be in (0, 1]".into()));
        }
        Ok(TorusArc { lo: mod1(lo), len })
    }

    pub fn full() -> Self {
        TorusArc {
            lo: Rat::zero(),
            len: Rat::one(),
        }
    }

    pub fn contains_rat(&self, x: Rat) -> bool {
        if self.len.is_one() {
            return true;
        }
        mod1(x - self.lo) < self.len
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        if self.len.is_one() {
            return true;
        }
        (x - to_f64(self.lo)).rem_euclid(1.0) < to_f64(self.len)
    }

    /// Residue test precomputed for a fixed denominator: v/den ∈ arc.
    pub fn scaled(&self, den: u64) -> ScaledArc {
        let lo = self.lo;
        let lo_scaled = ceil_times(lo, den);
        let hi_scaled = ceil_times(lo + self.len, den);
        ScaledArc {
            den,
            lo: lo_scaled % den,
            span: hi_scaled - lo_scaled,
        }
    }
}

fn ceil_times(x: Rat, den: u64) -> u64 {
    let scaled = x * Rat::from_integer(den as i128);
    let c = scaled.ceil();
    debug_assert!(!c.numer().is_negative());
    *c.numer() as u64
}

/// Integer form of an arc test at one denominator:
/// v ∈ arc ⟺ (v - lo) mod den < span.
#[derive(Clone, Copy, Debug)]
pub struct ScaledArc {
    den: u64,
    lo: u64,
    span: u64,
}

impl ScaledArc {
    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        let d = if v >= self.lo {
            v - self.lo
        } else {
            v + self.den - self.lo
        };
        d < self.span
    }
}

/// Product of per-coordinate arcs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusBox {
    pub arcs: Vec<TorusArc>,
}

impl TorusBox {
    pub fn new(arcs: Vec<TorusArc>) -> Self {
        TorusBox { arcs }
    }

    pub fn cube(dim: usize, lo: Rat, len: Rat) -> Result<Self> {
        Ok(TorusBox {
            arcs: (0..dim)
                .map(|_| TorusArc::new(lo, len))
                .collect::<Result<_>>()?,
        })
    }

    pub fn full(dim: usize) -> Self {
        TorusBox {
            arcs: (0..dim).map(|_| TorusArc::full()).collect(),
        }
    }

    pub fn volume(&self) -> Rat {
        self.arcs.iter().map(|a| a.len).product()
    }

    pub fn contains_exact(&self, p: &ExactPoint) -> bool {
        self.arcs
            .iter()
            .zip(&p.coords)
            .all(|(arc, &v)| arc.contains_rat(Rat::new(v as i128, p.den as i128)))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.arcs.iter().zip(x).all(|(arc, &v)| arc.contains_f64(v))
    }

    pub fn scaled(&self, den: u64) -> Vec<ScaledArc> {
        self.arcs.iter().map(|a| a.scaled(den)).collect()
    }
}

/// Max over coordinates of circle distance; for closeness assertions.
pub fn point_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| dist_mod1(x, y))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn sys(dim: usize, num: i128, den: i128) -> AffineTorusSystem {
        AffineTorusSystem::new(dim, rat(num, den)).unwrap()
    }

    #[test]
    fn step_examples() {
        // s=2: (0,0) -> (α, α); (α, α) -> (2α, 4α) since y + 2x + α = 4α.
        let s = sys(2, 1, 7);
        let a = ExactPoint::origin(2);
        let p1 = s.step_exact(&a).unwrap();
        assert_eq!(p1.to_rats(), vec![rat(1, 7), rat(1, 7)]);
        let p2 = s.step_exact(&p1).unwrap();
        assert_eq!(p2.to_rats(), vec![rat(2, 7), rat(4, 7)]);

        // s=1 is the circle rotation.
        let c = sys(1, 2, 5);
        let q = c.step_exact(&ExactPoint::from_rats(&[rat(1, 5)]).unwrap()).unwrap();
        assert_eq!(q.to_rats(), vec![rat(3, 5)]);
    }

    #[test]
    fn closed_form_at_origin() {
        // T^n 0 = (nα, n²α, …, n^sα).
        let s = sys(3, 1, 7);
        let p = s.orbit_point_exact(&ExactPoint::origin(3), 2).unwrap();
        assert_eq!(p.to_rats(), vec![rat(2, 7), rat(4, 7), rat(1, 7)]);
        let p = s.orbit_point_exact(&ExactPoint::origin(3), 0).unwrap();
        assert_eq!(p.to_rats(), vec![rat(0, 1); 3]);
    }

    #[test]
    fn closed_form_matches_iterated_step() {
        let s = sys(4, 3, 11);
        let a = ExactPoint::from_rats(&[rat(1, 2), rat(0, 1), rat(1, 3), rat(2, 11)]).unwrap();
        let mut x = a.clone();
        for n in 0..=40u64 {
            let direct = s.orbit_point_exact(&a, n).unwrap();
            assert_eq!(direct.to_rats(), x.to_rats(), "n={n}");
            x = s.step_exact(&x).unwrap();
        }
    }

    #[test]
    fn diagonal_matches_orbit_points() {
        let s = sys(2, 1, 7);
        let a = ExactPoint::origin(2);
        let d = s.diagonal_eval(&a, 3, 5).unwrap();
        for (i, p) in d.iter().enumerate() {
            assert_eq!(
                p,
                &s.orbit_point_exact(&a, (i as u64 + 1) * 5).unwrap(),
                "i={i}"
            );
        }
        // n=0 collapses to the base point.
        let d0 = s.diagonal_eval(&a, 3, 0).unwrap();
        assert!(d0.iter().all(|p| p.to_rats() == a.to_rats()));
        // a=0, s=2, k=2, n=1: ((α,α),(2α,4α)).
        let d1 = s.diagonal_eval(&a, 2, 1).unwrap();
        assert_eq!(d1[0].to_rats(), vec![rat(1, 7), rat(1, 7)]);
        assert_eq!(d1[1].to_rats(), vec![rat(2, 7), rat(4, 7)]);
    }

    #[test]
    fn closed_form_modular_oracle() {
        // a=0, s=4, α=1/7: coordinates are residues of n^j mod 7.
        let s = sys(4, 1, 7);
        let a = ExactPoint::origin(4);
        for n in [1u64, 13, 999_983, 1_000_000] {
            let p = s.orbit_point_exact(&a, n).unwrap();
            for j in 1..=4u32 {
                let expect = pow_mod(n as u128, j as u64, 7) as u64;
                assert_eq!(p.coords[j as usize - 1], expect, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn difference_table_matches_closed_form() {
        let s = sys(4, 355, 1131);
        let a = ExactPoint::from_rats(&[rat(1, 3), rat(0, 1), rat(5, 13), rat(1, 2)]).unwrap();
        for stride in [1u64, 3] {
            let mut it = s.orbit_iter_exact(&a, 2, stride).unwrap();
            for u in 0..500u64 {
                let p = it.next().unwrap();
                let q = s.orbit_point_exact(&a, 2 + stride * u).unwrap();
                assert_eq!(p.to_rats(), q.to_rats(), "stride={stride} u={u}");
            }
        }
    }

    #[test]
    fn float_iter_tracks_exact() {
        let s = sys(3, 408, 985);
        let a = ExactPoint::origin(3);
        let mut fi = s.orbit_iter_float(&a, 1, 1).unwrap();
        let mut ei = s.orbit_iter_exact(&a, 1, 1).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20_000 {
            let pf = fi.next().unwrap();
            let pe = ei.next().unwrap().to_f64s();
            worst = worst.max(point_distance(&pf, &pe));
        }
        assert!(worst < 1e-10, "drift {worst}");
    }

    #[test]
    fn unipotency() {
        for dim in 1..=5 {
            let s = sys(dim, 1, 3);
            assert!(s.nilpotency_order() <= dim);
        }
    }

    #[test]
    fn arcs_and_boxes() {
        let arc = TorusArc::new(rat(9, 10), rat(1, 5)).unwrap();
        assert!(arc.contains_rat(rat(19, 20)));
        assert!(arc.contains_rat(rat(1, 20)));
        assert!(!arc.contains_rat(rat(1, 2)));
        let sc = arc.scaled(100);
        for v in 0..100u64 {
            assert_eq!(
                sc.contains(v),
                arc.contains_rat(rat(v as i128, 100)),
                "v={v}"
            );
        }
        let b = TorusBox::cube(2, rat(0, 1), rat(2, 5)).unwrap();
        assert_eq!(b.volume(), rat(4, 25));
        assert!(b.contains_f64(&[0.1, 0.39]));
        assert!(!b.contains_f64(&[0.1, 0.41]));
    }

    #[test]
    fn equidistribution_sanity() {
        // α = a convergent of √2 − 1; box frequency approaches its volume.
        let s = sys(2, 408, 985);
        let b = TorusBox::cube(2, rat(1, 10), rat(3, 10)).unwrap();
        let vol = to_f64(b.volume());
        for n_total in [10_000u64, 100_000] {
            let hits = s
                .orbit_iter_exact(&ExactPoint::origin(2), 1, 1)
                .unwrap()
                .take(n_total as usize)
                .filter(|p| b.contains_exact(p))
                .count();
            let freq = hits as f64 / n_total as f64;
            let tol = 5.0 * (n_total as f64).powf(-0.25);
            assert!((freq - vol).abs() < tol, "N={n_total} freq={freq} vol={vol}");
        }
    }
}
