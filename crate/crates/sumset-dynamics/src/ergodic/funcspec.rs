//! Function expressions over product torus spaces, with exact integration
//! for the box-and-constant subclass.
//!
//! The exactly integrable fragment normalizes to a rational linear
//! combination of product-box indicators (`LinBoxes`), on which integrals,
//! conditional expectations onto coordinate prefixes, and one-dimensional
//! diagonal-line conditional expectations are all closed-form arc-length
//! arithmetic.

use crate::nil::{AffineTorusSystem, TorusArc, TorusBox};
use crate::rat::{to_f64, Rat};
use crate::{Error, Result};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Expression over `X^factors` with `X = T^dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    Const(#[serde(with = "crate::setspec::rat_serde")] Rat),
    /// Indicator of a product box, one `TorusBox` per factor.
    Boxes(Vec<TorusBox>),
    /// Character e(Σ m·x): integer frequencies per factor and coordinate.
    Character(Vec<Vec<i64>>),
    Sum(Vec<FunctionSpec>),
    Product(Vec<FunctionSpec>),
    /// Precompose `T^n` on one factor.
    Shifted {
        n: u64,
        factor: usize,
        inner: Box<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn one() -> Self {
        FunctionSpec::Const(Rat::one())
    }

    /// indicator(box) + 1, the shape used throughout the double-average example.
    pub fn box_plus_one(b: TorusBox) -> Self {
        FunctionSpec::Sum(vec![FunctionSpec::Boxes(vec![b]), FunctionSpec::one()])
    }

    /// Tensor product: reinterprets `self` on factor 0 and `other` on factor 1.
    pub fn tensor(self, other: FunctionSpec, dim: usize) -> FunctionSpec {
        FunctionSpec::Product(vec![
            self.on_factor(0, 2, dim),
            other.on_factor(1, 2, dim),
        ])
    }

    /// Lift a single-factor expression to `factors` factors, acting on factor `at`.
    pub fn on_factor(self, at: usize, factors: usize, dim: usize) -> FunctionSpec {
        match self {
            FunctionSpec::Const(c) => FunctionSpec::Const(c),
            FunctionSpec::Boxes(mut boxes) => {
                assert_eq!(boxes.len(), 1, "single-factor expression expected");
                let mut all: Vec<TorusBox> = (0..factors).map(|_| TorusBox::full(dim)).collect();
                all[at] = boxes.pop().unwrap();
                FunctionSpec::Boxes(all)
            }
            FunctionSpec::Character(mut freqs) => {
                assert_eq!(freqs.len(), 1);
                let mut all: Vec<Vec<i64>> = (0..factors).map(|_| vec![0; dim]).collect();
                all[at] = freqs.pop().unwrap();
                FunctionSpec::Character(all)
            }
            FunctionSpec::Sum(parts) => FunctionSpec::Sum(
                parts.into_iter().map(|p| p.on_factor(at, factors, dim)).collect(),
            ),
            FunctionSpec::Product(parts) => FunctionSpec::Product(
                parts.into_iter().map(|p| p.on_factor(at, factors, dim)).collect(),
            ),
            FunctionSpec::Shifted { n, factor, inner } => FunctionSpec::Shifted {
                n,
                factor: at + factor,
                inner: Box::new(inner.on_factor(at, factors, dim)),
            },
        }
    }

    /// Evaluate at a point of `X^factors`; characters make the value complex.
    pub fn eval(&self, sys: &AffineTorusSystem, point: &[Vec<f64>]) -> Complex64 {
        match self {
            FunctionSpec::Const(c) => Complex64::new(to_f64(*c), 0.0),
            FunctionSpec::Boxes(boxes) => {
                let inside = boxes
                    .iter()
                    .zip(point)
                    .all(|(b, x)| b.contains_f64(x));
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
            FunctionSpec::Character(freqs) => {
                let phase: f64 = freqs
                    .iter()
                    .zip(point)
                    .flat_map(|(fs, xs)| fs.iter().zip(xs).map(|(&m, &x)| m as f64 * x))
                    .sum();
                Complex64::from_polar(1.0, std::f64::consts::TAU * phase)
            }
            FunctionSpec::Sum(parts) => parts.iter().map(|p| p.eval(sys, point)).sum(),
            FunctionSpec::Product(parts) => {
                parts.iter().map(|p| p.eval(sys, point)).product()
            }
            FunctionSpec::Shifted { n, factor, inner } => {
                let mut shifted = point.to_vec();
                shifted[*factor] = sys.orbit_point_float(&point[*factor], *n);
                inner.eval(sys, &shifted)
            }
        }
    }
}

/// Disjoint union of arcs on one circle coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSet(Vec<TorusArc>);

impl ArcSet {
    pub fn full() -> Self {
        ArcSet(vec![TorusArc::full()])
    }

    pub fn from_arc(arc: TorusArc) -> Self {
        ArcSet(vec![arc])
    }

    pub fn is_full(&self) -> bool {
        self.0.len() == 1 && self.0[0].len.is_one()
    }

    pub fn measure(&self) -> Rat {
        self.0.iter().map(|a| a.len).sum()
    }

    pub fn arcs(&self) -> &[TorusArc] {
        &self.0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.0.iter().any(|a| a.contains_f64(x))
    }

    /// Linear half-open pieces inside [0, 1).
    fn intervals(&self) -> Vec<(Rat, Rat)> {
        let mut out = Vec::new();
        for arc in &self.0 {
            let hi = arc.lo + arc.len;
            if hi <= Rat::one() {
                out.push((arc.lo, hi));
            } else {
                out.push((arc.lo, Rat::one()));
                out.push((Rat::zero(), hi - Rat::one()));
            }
        }
        out
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut pieces = Vec::new();
        for &(a0, a1) in &self.intervals() {
            for &(b0, b1) in &other.intervals() {
                let lo = a0.max(b0);
                let hi = a1.min(b1);
                if lo < hi {
                    pieces.push(TorusArc { lo, len: hi - lo });
                }
            }
        }
        ArcSet(pieces)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Preimage under r ↦ mult·r (mod 1): each arc splits into `mult` arcs of
    /// 1/mult the length, so the total measure is preserved.
    pub fn preimage_mul(&self, mult: u64) -> ArcSet {
        let m = Rat::from_integer(mult as i128);
        let mut pieces = Vec::new();
        for arc in &self.0 {
            for t in 0..mult {
                pieces.push(TorusArc {
                    lo: (arc.lo + Rat::from_integer(t as i128)) / m,
                    len: arc.len / m,
                });
            }
        }
        ArcSet(pieces)
    }
}

/// Rational linear combination of product-box indicators over
/// `factors` × `dim` flat coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinBoxes {
    pub factors: usize,
    pub dim: usize,
    pub terms: Vec<LinTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinTerm {
    #[serde(with = "crate::setspec::rat_serde")]
    pub coef: Rat,
    pub coords: Vec<ArcSet>,
}

impl LinBoxes {
    pub fn constant(factors: usize, dim: usize, c: Rat) -> Self {
        LinBoxes {
            factors,
            dim,
            terms: vec![LinTerm {
                coef: c,
                coords: (0..factors * dim).map(|_| ArcSet::full()).collect(),
            }],
        }
    }

    pub fn integral(&self) -> Rat {
        self.terms
            .iter()
            .map(|t| t.coef * t.coords.iter().map(|c| c.measure()).product::<Rat>())
            .sum()
    }

    /// Some(value) if the function is constant (all coordinates integrated out
    /// or full in every term).
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.iter().all(|t| t.coords.iter().all(|c| c.is_full())) {
            Some(self.terms.iter().map(|t| t.coef).sum())
        } else {
            None
        }
    }

    pub fn eval_f64(&self, flat: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let inside = t
                    .coords
                    .iter()
                    .zip(flat)
                    .all(|(set, &x)| set.contains_f64(x));
                if inside {
                    to_f64(t.coef)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Tensor with another combination (coordinates concatenated).
    pub fn tensor(&self, other: &LinBoxes) -> LinBoxes {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut coords = a.coords.clone();
                coords.extend(b.coords.iter().cloned());
                terms.push(LinTerm {
                    coef: a.coef * b.coef,
                    coords,
                });
            }
        }
        LinBoxes {
            factors: self.factors + other.factors,
            dim: self.dim,
            terms,
        }
    }
}

/// Normalize an exactly integrable expression; characters and shifts are not.
pub fn to_lin_boxes(spec: &FunctionSpec, factors: usize, dim: usize) -> Result<LinBoxes> {
    let flat = factors * dim;
    match spec {
        FunctionSpec::Const(c) => Ok(LinBoxes::constant(factors, dim, *c)),
        FunctionSpec::Boxes(boxes) => {
            if boxes.len() != factors || boxes.iter().any(|b| b.arcs.len() != dim) {
                return Err(Error::Invalid(format!(
                    "box shape mismatch: want {factors} factors of dim {dim}"
                )));
            }
            let coords = boxes
                .iter()
                .flat_map(|b| b.arcs.iter().cloned().map(ArcSet::from_arc))
                .collect();
            Ok(LinBoxes {
                factors,
                dim,
                terms: vec![LinTerm {
                    coef: Rat::one(),
                    coords,
                }],
            })
        }
        FunctionSpec::Sum(parts) => {
            let mut terms = Vec::new();
            for p in parts {
                terms.extend(to_lin_boxes(p, factors, dim)?.terms);
            }
            Ok(LinBoxes { factors, dim, terms })
        }
        FunctionSpec::Product(parts) => {
            let mut acc = LinBoxes::constant(factors, dim, Rat::one());
            for p in parts {
                let rhs = to_lin_boxes(p, factors, dim)?;
                let mut terms = Vec::new();
                for a in &acc.terms {
                    for b in &rhs.terms {
                        let coords: Vec<ArcSet> = (0..flat)
                            .map(|c| a.coords[c].intersect(&b.coords[c]))
                            .collect();
                        if coords.iter().any(|c| c.is_empty()) {
                            continue;
                        }
                        terms.push(LinTerm {
                            coef: a.coef * b.coef,
                            coords,
                        });
                    }
                }
                acc = LinBoxes { factors, dim, terms };
            }
            Ok(acc)
        }
        FunctionSpec::Character(_) => Err(Error::NotExactlyIntegrable(
            "character factors have no box normal form".into(),
        )),
        FunctionSpec::Shifted { .. } => Err(Error::NotExactlyIntegrable(
            "shifted factors are skew, not boxes".into(),
        )),
    }
}

/// E(F | first j coordinates) on a single factor: integrate out coordinates
/// j+1..dim in closed form. The result lives on `T^j`.
pub fn cond_expect_zj(spec: &FunctionSpec, dim: usize, j: usize) -> Result<LinBoxes> {
    if j == 0 || j > dim {
        return Err(Error::Invalid(format!("need 1 <= j <= dim, got j={j}")));
    }
    let lin = to_lin_boxes(spec, 1, dim)?;
    let terms = lin
        .terms
        .into_iter()
        .map(|t| {
            let tail: Rat = t.coords[j..].iter().map(|c| c.measure()).product();
            LinTerm {
                coef: t.coef * tail,
                coords: t.coords[..j].to_vec(),
            }
        })
        .collect();
    Ok(LinBoxes {
        factors: 1,
        dim: j,
        terms,
    })
}

/// One moving coordinate of a diagonal line: flat coordinate index and the
/// integer multiplier by which the free parameter enters it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LineCoord {
    pub factor: usize,
    pub coord: usize,
    pub mult: u64,
}

/// E(F | W) along a one-parameter line: the listed coordinates are replaced
/// by `mult·r` and integrated over r ∈ T; the rest stay fixed. The preimage
/// of an arc under r ↦ c·r has total measure equal to the arc's length, so
/// everything stays exact.
pub fn cond_expect_w_diag(
    spec: &FunctionSpec,
    factors: usize,
    dim: usize,
    line: &[LineCoord],
) -> Result<LinBoxes> {
    if line.is_empty() {
        return Err(Error::Invalid("line needs at least one moving coordinate".into()));
    }
    for lc in line {
        if lc.mult == 0 {
            return Err(Error::Invalid(
                "nonlinear or degenerate parameter dependence (mult = 0)".into(),
            ));
        }
        if lc.factor >= factors || lc.coord >= dim {
            return Err(Error::Invalid("line coordinate out of range".into()));
        }
    }
    let lin = to_lin_boxes(spec, factors, dim)?;
    let moving: Vec<usize> = line.iter().map(|lc| lc.factor * dim + lc.coord).collect();
    let terms = lin
        .terms
        .into_iter()
        .filter_map(|t| {
            // ∩ over moving coordinates of {r : mult·r ∈ coordinate set}.
            let mut r_set = ArcSet::full();
            for (lc, &flat) in line.iter().zip(&moving) {
                r_set = r_set.intersect(&t.coords[flat].preimage_mul(lc.mult));
                if r_set.is_empty() {
                    return None;
                }
            }
            let coords: Vec<ArcSet> = t
                .coords
                .iter()
                .enumerate()
                .map(|(c, set)| {
                    if moving.contains(&c) {
                        ArcSet::full() // integrated out; the value no longer depends on it
                    } else {
                        set.clone()
                    }
                })
                .collect();
            Some(LinTerm {
                coef: t.coef * r_set.measure(),
                coords,
            })
        })
        .collect();
    Ok(LinBoxes {
        factors,
        dim,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn arc(lo: Rat, len: Rat) -> TorusArc {
        TorusArc::new(lo, len).unwrap()
    }

    fn f1_wide() -> FunctionSpec {
        // 1_{T²×(0,1/81)} + 1 on T³ (half-open arc; same measure).
        let b = TorusBox::new(vec![
            TorusArc::full(),
            TorusArc::full(),
            arc(rat(0, 1), rat(1, 81)),
        ]);
        FunctionSpec::box_plus_one(b)
    }

    fn f2() -> FunctionSpec {
        let b = TorusBox::new(vec![
            TorusArc::full(),
            TorusArc::full(),
            arc(rat(1, 9), rat(1, 9)),
        ]);
        FunctionSpec::box_plus_one(b)
    }

    #[test]
    fn arcset_intersections() {
        let a = ArcSet::from_arc(arc(rat(9, 10), rat(1, 5))); // wraps
        let b = ArcSet::from_arc(arc(rat(0, 1), rat(1, 10)));
        let i = a.intersect(&b);
        assert_eq!(i.measure(), rat(1, 10));
        let c = ArcSet::from_arc(arc(rat(1, 2), rat(1, 10)));
        assert!(a.intersect(&c).is_empty());
        assert_eq!(ArcSet::full().intersect(&a).measure(), a.measure());
    }

    #[test]
    fn preimage_measure_preserved() {
        let s = ArcSet::from_arc(arc(rat(1, 9), rat(1, 9)));
        let p = s.preimage_mul(9);
        assert_eq!(p.measure(), rat(1, 9));
        assert_eq!(p.arcs().len(), 9);
        // Each piece has length (1/9)/9 = 1/81.
        assert!(p.arcs().iter().all(|a| a.len == rat(1, 81)));
    }

    #[test]
    fn integral_of_sums_and_products() {
        let lin = to_lin_boxes(&f1_wide(), 1, 3).unwrap();
        assert_eq!(lin.integral(), rat(82, 81));
        let prod = FunctionSpec::Product(vec![f1_wide(), f1_wide()]);
        // (1 + 1_B)² = 1 + 3·1_B pointwise: integral 1 + 3/81.
        assert_eq!(to_lin_boxes(&prod, 1, 3).unwrap().integral(), rat(84, 81));
    }

    #[test]
    fn zj_expectations_match_displayed_values() {
        let e1 = cond_expect_zj(&f1_wide(), 3, 2).unwrap();
        assert_eq!(e1.as_constant(), Some(rat(82, 81)));
        let e2 = cond_expect_zj(&f2(), 3, 2).unwrap();
        assert_eq!(e2.as_constant(), Some(rat(10, 9)));
        // j = dim leaves the function unchanged (as a function).
        let id = cond_expect_zj(&f1_wide(), 3, 3).unwrap();
        assert_eq!(id.integral(), rat(82, 81));
        assert_eq!(id.as_constant(), None);
    }

    #[test]
    fn w_line_expectation_and_cross_term() {
        // E(f1 ⊗ f2 | W) along (r, 9r) in the third coordinates:
        // 0 (disjoint cross term) + 1/81 + 1/9 + 1.
        let f = to_lin_boxes(&f1_wide(), 1, 3)
            .unwrap()
            .tensor(&to_lin_boxes(&f2(), 1, 3).unwrap());
        let spec = FunctionSpec::Product(vec![
            f1_wide().on_factor(0, 2, 3),
            f2().on_factor(1, 2, 3),
        ]);
        let line = [
            LineCoord { factor: 0, coord: 2, mult: 1 },
            LineCoord { factor: 1, coord: 2, mult: 9 },
        ];
        let e = cond_expect_w_diag(&spec, 2, 3, &line).unwrap();
        let expect = rat(1, 1) + rat(1, 81) + rat(1, 9);
        assert_eq!(e.as_constant(), Some(expect));
        assert_eq!(f.integral(), rat(82, 81) * rat(10, 9));

        // Product-of-expectations differs by exactly 1/729.
        let prod = rat(82, 81) * rat(10, 9);
        assert_eq!(expect - prod, rat(-1, 729));
    }

    #[test]
    fn trivial_line_cases() {
        let one = FunctionSpec::one().on_factor(0, 2, 3);
        let line = [LineCoord { factor: 0, coord: 2, mult: 1 }];
        let e = cond_expect_w_diag(&one, 2, 3, &line).unwrap();
        assert_eq!(e.as_constant(), Some(rat(1, 1)));
        assert!(cond_expect_w_diag(
            &one,
            2,
            3,
            &[LineCoord { factor: 0, coord: 2, mult: 0 }]
        )
        .is_err());
    }

    #[test]
    fn characters_are_not_exactly_integrable() {
        let ch = FunctionSpec::Character(vec![vec![1, 0, 0]]);
        assert!(matches!(
            to_lin_boxes(&ch, 1, 3),
            Err(Error::NotExactlyIntegrable(_))
        ));
        assert!(cond_expect_zj(&ch, 3, 2).is_err());
    }

    #[test]
    fn eval_matches_normal_form() {
        let sys = AffineTorusSystem::new(3, rat(1, 7)).unwrap();
        let spec = FunctionSpec::Product(vec![f1_wide(), f2()]);
        let lin = to_lin_boxes(&spec, 1, 3).unwrap();
        for p in [
            vec![0.3, 0.4, 0.005],
            vec![0.3, 0.4, 0.15],
            vec![0.9, 0.1, 0.5],
        ] {
            let direct = spec.eval(&sys, &[p.clone()]).re;
            let normal = lin.eval_f64(&p);
            assert!((direct - normal).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn shifted_evaluation_uses_the_map() {
        let sys = AffineTorusSystem::new(1, rat(1, 4)).unwrap();
        let f = FunctionSpec::Character(vec![vec![1]]);
        let shifted = FunctionSpec::Shifted {
            n: 1,
            factor: 0,
            inner: Box::new(f.clone()),
        };
        let x = vec![vec![0.125]];
        let a = shifted.eval(&sys, &x);
        let b = f.eval(&sys, &[vec![0.375]]);
        assert!((a - b).norm() < 1e-12);
    }
}
