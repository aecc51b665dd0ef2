//! Birkhoff and diagonal orbit averages, and the σ_k functionals built from
//! them.
//!
//! All averages run along the exact orbit engine (coordinates converted to
//! f64 only for function evaluation) with fixed-order summation, so repeated
//! runs are bit-identical. The diagonal average over `(T^n a, …, T^{kn} a)`
//! is the finite-N proxy for ∫·dξ_k; the σ_k functional weights it by f_0(a)
//! and optionally projects every factor function onto its first-j-coordinates
//! conditional expectation first.

use super::funcspec::{cond_expect_zj, FunctionSpec, LinBoxes};
use crate::nil::{AffineTorusSystem, ExactPoint};
use crate::rat::Rat;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AverageEstimate {
    pub value: f64,
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub value_im: f64,
    /// Inner average length.
    pub n: u64,
    /// Outer average length; 0 for single averages.
    pub m: u64,
    pub window_kind: String,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[serde(with = "optional_rat")]
    pub exact: Option<Rat>,
}

fn is_zero_f64(x: &f64) -> bool {
    *x == 0.0
}

mod optional_rat {
    use crate::rat::{format_rat, parse_rat, Rat};
    use serde::{de::Error as DeError, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(r) => s.serialize_some(&format_rat(*r)),
            None => s.serialize_none(),
        }
    }

    #[allow(dead_code)]
    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| parse_rat(&s).map_err(|e| D::Error::custom(e.to_string())))
            .transpose()
    }
}

impl AverageEstimate {
    pub fn single(value: Complex64, n: u64) -> Self {
        AverageEstimate {
            value: value.re,
            value_im: value.im,
            n,
            m: 0,
            window_kind: "prefix".into(),
            mode: "floating".into(),
            exact: None,
        }
    }

    pub fn magnitude(&self) -> f64 {
        (self.value * self.value + self.value_im * self.value_im).sqrt()
    }
}

/// (1/N) Σ_{n≤N} F(T^n a).
pub fn birkhoff_average(
    sys: &AffineTorusSystem,
    f: &FunctionSpec,
    a: &ExactPoint,
    n: u64,
) -> Result<AverageEstimate> {
    if n == 0 {
        return Err(Error::Invalid("need N >= 1".into()));
    }
    let mut orbit = sys.orbit_iter_exact(a, 1, 1)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let p = orbit.current().to_f64s();
        acc += f.eval(sys, &[p]);
        orbit.advance();
    }
    Ok(AverageEstimate::single(acc / n as f64, n))
}

/// (1/N) Σ_{n≤N} F(T^n a, T^{2n} a, …, T^{kn} a), the finite-N proxy for
/// ∫ F dξ_k. The window may start at M instead of 1.
pub fn xi_k_integral(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    k: usize,
    f: &FunctionSpec,
    n: u64,
    start: u64,
) -> Result<AverageEstimate> {
    if n == 0 || k == 0 {
        return Err(Error::Invalid("need N >= 1 and k >= 1".into()));
    }
    // k strided orbits: the i-th advances by T^i per step.
    let mut orbits: Vec<_> = (1..=k as u64)
        .map(|i| sys.orbit_iter_exact(a, i * start, i))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let point: Vec<Vec<f64>> = orbits.iter().map(|o| o.current().to_f64s()).collect();
        acc += f.eval(sys, &point);
        for o in &mut orbits {
            o.advance();
        }
    }
    let mut est = AverageEstimate::single(acc / n as f64, n);
    est.window_kind = if start == 1 {
        "prefix".into()
    } else {
        format!("shifted({start})")
    };
    Ok(est)
}

/// Which conditional expectation to apply to the factor functions before the
/// diagonal average: the identity (the full system is already its own
/// infinite-step coordinate limit) or projection onto the first j coordinates.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Full,
    FirstCoords { j: usize },
}

enum FactorFn<'a> {
    Spec(&'a FunctionSpec),
    Lin(LinBoxes),
}

impl FactorFn<'_> {
    fn eval(&self, sys: &AffineTorusSystem, x: &[f64]) -> Complex64 {
        match self {
            FactorFn::Spec(f) => f.eval(sys, &[x.to_vec()]),
            FactorFn::Lin(l) => Complex64::new(l.eval_f64(&x[..l.dim]), 0.0),
        }
    }
}

/// σ_k functional: f_0(a) · (1/N) Σ_n Π_{i=1..k} E(f_i | Z)(T^{in} a).
///
/// `f_0` is evaluated at the base point only (the 0-th marginal is δ_a).
pub fn sigma_k_integral(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    k: usize,
    f0: &FunctionSpec,
    fs: &[FunctionSpec],
    n: u64,
    projection: Projection,
) -> Result<AverageEstimate> {
    if fs.len() != k {
        return Err(Error::Invalid(format!(
            "need k = {k} factor functions, got {}",
            fs.len()
        )));
    }
    let f0_at_a = f0.eval(sys, &[a.to_f64s()]);
    let factors: Vec<FactorFn> = match projection {
        Projection::Full => fs.iter().map(FactorFn::Spec).collect(),
        Projection::FirstCoords { j } => fs
            .iter()
            .map(|f| Ok(FactorFn::Lin(cond_expect_zj(f, sys.dim(), j)?)))
            .collect::<Result<_>>()?,
    };
    let mut orbits: Vec<_> = (1..=k as u64)
        .map(|i| sys.orbit_iter_exact(a, i, i))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let mut prod = Complex64::new(1.0, 0.0);
        for (factor, orbit) in factors.iter().zip(&orbits) {
            prod *= factor.eval(sys, &orbit.current().to_f64s());
        }
        acc += prod;
        for o in &mut orbits {
            o.advance();
        }
    }
    Ok(AverageEstimate::single(f0_at_a * acc / n as f64, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nil::{TorusArc, TorusBox};
    use crate::rat::{rat, to_f64};

    fn golden_sys(dim: usize) -> AffineTorusSystem {
        AffineTorusSystem::new(dim, rat(195025, 470832)).unwrap()
    }

    #[test]
    fn constant_averages_exactly_one() {
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        let est = birkhoff_average(&sys, &FunctionSpec::one(), &a, 1000).unwrap();
        assert_eq!(est.value, 1.0);
        let est = xi_k_integral(&sys, &a, 3, &FunctionSpec::one(), 500, 1).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn box_frequency_near_volume() {
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        let b = TorusBox::cube(2, rat(1, 5), rat(1, 2)).unwrap();
        let vol = to_f64(b.volume());
        let est = birkhoff_average(&sys, &FunctionSpec::Boxes(vec![b]), &a, 200_000).unwrap();
        assert!((est.value - vol).abs() < 0.01, "{} vs {vol}", est.value);
    }

    #[test]
    fn character_average_is_geometric_sum() {
        // (1/N) Σ e(nα): magnitude ≤ 2 / (N·|1 − e(α)|).
        let sys = golden_sys(1);
        let a = ExactPoint::origin(1);
        let n = 10_000u64;
        let est = birkhoff_average(&sys, &FunctionSpec::Character(vec![vec![1]]), &a, n).unwrap();
        let alpha = to_f64(rat(195025, 470832));
        let denom = (Complex64::new(1.0, 0.0)
            - Complex64::from_polar(1.0, std::f64::consts::TAU * alpha))
        .norm();
        assert!(est.magnitude() <= 2.0 / (n as f64 * denom) + 1e-12);
    }

    #[test]
    fn xi2_product_box_matches_direct_count() {
        // k=2 on the circle rotation: joint frequencies against a direct count.
        let sys = golden_sys(1);
        let a = ExactPoint::origin(1);
        let arc1 = TorusBox::new(vec![TorusArc::new(rat(0, 1), rat(3, 10)).unwrap()]);
        let arc2 = TorusBox::new(vec![TorusArc::new(rat(1, 2), rat(2, 5)).unwrap()]);
        let f = FunctionSpec::Boxes(vec![arc1.clone(), arc2.clone()]);
        let n = 50_000u64;
        let est = xi_k_integral(&sys, &a, 2, &f, n, 1).unwrap();
        // Direct count, separate code path.
        let mut hits = 0u64;
        for j in 1..=n {
            let x1 = (j as u128 * 195025 % 470832) as u64;
            let x2 = (2 * j as u128 * 195025 % 470832) as u64;
            let in1 = (x1 as f64 / 470832.0) < 0.3;
            let in2 = {
                let v = x2 as f64 / 470832.0;
                (0.5..0.9).contains(&v)
            };
            if in1 && in2 {
                hits += 1;
            }
        }
        assert!((est.value - hits as f64 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn xi_window_start_insensitive() {
        // Unique ergodicity: [1, N] and [M, M+N) estimates agree closely.
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        let b = TorusBox::cube(2, rat(1, 10), rat(2, 5)).unwrap();
        let f = FunctionSpec::Boxes(vec![b.clone(), b]);
        let n = 100_000u64;
        let e1 = xi_k_integral(&sys, &a, 2, &f, n, 1).unwrap();
        let e2 = xi_k_integral(&sys, &a, 2, &f, n, 5000).unwrap();
        assert!((e1.value - e2.value).abs() < 0.01);
    }

    #[test]
    fn sigma_first_marginal_is_dirac() {
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        // f_0 an indicator of a box missing the base point: exactly 0.
        let away = TorusBox::cube(2, rat(1, 4), rat(1, 4)).unwrap();
        let est = sigma_k_integral(
            &sys,
            &a,
            2,
            &FunctionSpec::Boxes(vec![away]),
            &[FunctionSpec::one(), FunctionSpec::one()],
            1000,
            Projection::Full,
        )
        .unwrap();
        assert_eq!(est.value, 0.0);

        // All ones: exactly 1.
        let est = sigma_k_integral(
            &sys,
            &a,
            2,
            &FunctionSpec::one(),
            &[FunctionSpec::one(), FunctionSpec::one()],
            1000,
            Projection::Full,
        )
        .unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn sigma_marginal_bound() {
        // σ_k-mass of (X^{i-1} × U × X^{k-i}) ≤ i·vol(U) + slack.
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        let u = TorusBox::cube(2, rat(3, 10), rat(1, 5)).unwrap();
        let vol = to_f64(u.volume());
        let k = 3;
        for pos in 1..=k {
            let fs: Vec<FunctionSpec> = (1..=k)
                .map(|i| {
                    if i == pos {
                        FunctionSpec::Boxes(vec![u.clone()])
                    } else {
                        FunctionSpec::one()
                    }
                })
                .collect();
            let est = sigma_k_integral(
                &sys,
                &a,
                k,
                &FunctionSpec::one(),
                &fs,
                100_000,
                Projection::Full,
            )
            .unwrap();
            assert!(
                est.value <= pos as f64 * vol + 0.02,
                "pos={pos}: {} vs {}",
                est.value,
                pos as f64 * vol
            );
        }
    }

    #[test]
    fn sigma_projection_uses_conditional_expectation() {
        // Projecting onto the first coordinate replaces a second-coordinate
        // box by its average, a constant.
        let sys = golden_sys(2);
        let a = ExactPoint::origin(2);
        let second = TorusBox::new(vec![
            TorusArc::full(),
            TorusArc::new(rat(0, 1), rat(1, 8)).unwrap(),
        ]);
        let f = FunctionSpec::Boxes(vec![second]);
        let est = sigma_k_integral(
            &sys,
            &a,
            1,
            &FunctionSpec::one(),
            std::slice::from_ref(&f),
            1000,
            Projection::FirstCoords { j: 1 },
        )
        .unwrap();
        assert!((est.value - 0.125).abs() < 1e-12);
    }
}
