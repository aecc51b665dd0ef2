//! The double-average seminorm-control counterexample, reproduced end to end.
//!
//! On `X = T³` with the unipotent affine map, consider the product system
//! `(X², T×T²)` started at the origin pair; its orbit closure carries the
//! diagonal-line conditional expectation `E(·|W)` implemented by
//! [`cond_expect_w_diag`]. Two families of `indicator + 1` functions enter:
//!
//! * the *wide* pair (third-coordinate arcs of length 1/9² and 1/9) exhibits
//!   the exact failure of factorization: `E(f₁⊗f₂|W) − E(f₁|Z₂)·E(f₂|Z₂) =
//!   −1/729 ≠ 0`, in exact rational arithmetic;
//! * the *narrow* pair (arc lengths 1/9³ and 1/9) generates the two displayed
//!   limit norms, whose closed forms `(1/9³+1)(1/9³+1/9+1)(1/9+1)` and
//!   `(1/9³+1)²(1/9+1)²` the numeric double averages must approach.
//!
//! The two closed forms differ by ≈ −1.7·10⁻⁴, below the resolution of the
//! finite averages; telling them apart is exactly what the −1/729 exact
//! discrepancy certifies.

use super::funcspec::{
    cond_expect_w_diag, cond_expect_zj, to_lin_boxes, FunctionSpec, LinBoxes, LineCoord,
};
use crate::nil::{AffineTorusSystem, ExactPoint, ScaledArc, TorusArc, TorusBox};
use crate::rat::{format_rat, rat, to_f64, Rat};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2Config {
    pub n: u64,
    pub m: u64,
    /// Rotation; defaults to a convergent of √2 − 1.
    pub alpha: Option<String>,
}

impl Default for A2Config {
    fn default() -> Self {
        A2Config {
            n: 200_000,
            m: 500,
            alpha: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2ExactPart {
    pub e_f1_z2: String,
    pub e_f2_z2: String,
    pub e_f1f2_w: String,
    pub product_of_expectations: String,
    pub discrepancy: String,
    pub discrepancy_nonzero: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2ClosedForms {
    pub norm1_closed: String,
    pub norm1_closed_f64: f64,
    pub norm2_closed: String,
    pub norm2_closed_f64: f64,
    pub gap: String,
    pub gap_f64: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2NumericPart {
    pub norm1_estimate: f64,
    pub norm1_abs_error: f64,
    pub norm2_estimate: f64,
    pub norm2_abs_error: f64,
    pub n: u64,
    pub m: u64,
    pub alpha: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2Report {
    pub exact: A2ExactPart,
    pub closed_forms: A2ClosedForms,
    pub numeric: A2NumericPart,
    pub notes: Vec<String>,
}

fn third_coord_arc(len: Rat) -> FunctionSpec {
    let b = TorusBox::new(vec![
        TorusArc::full(),
        TorusArc::full(),
        TorusArc::new(rat(0, 1), len).unwrap(),
    ]);
    FunctionSpec::box_plus_one(b)
}

fn second_arc() -> FunctionSpec {
    let b = TorusBox::new(vec![
        TorusArc::full(),
        TorusArc::full(),
        TorusArc::new(rat(1, 9), rat(1, 9)).unwrap(),
    ]);
    FunctionSpec::box_plus_one(b)
}

/// The diagonal line of the product orbit closure: the free parameter is the
/// third coordinate of the first factor and enters the second factor's third
/// coordinate with multiplier 9.
fn w_line() -> [LineCoord; 2] {
    [
        LineCoord { factor: 0, coord: 2, mult: 1 },
        LineCoord { factor: 1, coord: 2, mult: 9 },
    ]
}

fn w_expectation_const(f: FunctionSpec, g: FunctionSpec) -> Result<Rat> {
    let spec = FunctionSpec::Product(vec![f.on_factor(0, 2, 3), g.on_factor(1, 2, 3)]);
    cond_expect_w_diag(&spec, 2, 3, &w_line())?
        .as_constant()
        .ok_or_else(|| Error::Invalid("expected a constant conditional expectation".into()))
}

fn z2_const(f: &FunctionSpec) -> Result<Rat> {
    cond_expect_zj(f, 3, 2)?
        .as_constant()
        .ok_or_else(|| Error::Invalid("expected a constant conditional expectation".into()))
}

/// A `LinBoxes` over (a prefix of) the three coordinates, precompiled to
/// integer residue tests at one denominator.
struct CompiledFn {
    terms: Vec<(f64, Vec<(usize, ScaledArc)>)>,
}

impl CompiledFn {
    fn compile(lin: &LinBoxes, den: u64) -> Self {
        let terms = lin
            .terms
            .iter()
            .map(|t| {
                let arcs = t
                    .coords
                    .iter()
                    .enumerate()
                    .flat_map(|(c, set)| {
                        set.arcs()
                            .iter()
                            .filter(|a| !num_traits::One::is_one(&a.len))
                            .map(move |a| (c, a.scaled(den)))
                    })
                    .collect();
                (to_f64(t.coef), arcs)
            })
            .collect();
        CompiledFn { terms }
    }

    #[inline]
    fn eval(&self, coords: &[&[u64]; 3], j: usize) -> f64 {
        self.terms
            .iter()
            .map(|(coef, arcs)| {
                if arcs.iter().all(|(c, arc)| arc.contains(coords[*c][j])) {
                    *coef
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// ‖(1/N) Σ_n ∏ shifted factors‖_{L²} with the L² integral sampled along the
/// product orbit: sqrt((1/M) Σ_m |A_N(m)|²).
///
/// The factor pattern is the displayed one: first-factor evaluations at times
/// m+4n and m+2n, second-factor ones at 2m+4n and 2m+2n.
fn double_average_norm(
    first: &CompiledFn,
    second: &CompiledFn,
    coords: &[&[u64]; 3],
    n_len: u64,
    m_len: u64,
) -> f64 {
    let mut sq_sum = 0.0f64;
    for m in 1..=m_len as usize {
        let mut acc = 0.0f64;
        for n in 1..=n_len as usize {
            let p = first.eval(coords, m + 4 * n)
                * first.eval(coords, m + 2 * n)
                * second.eval(coords, 2 * m + 4 * n)
                * second.eval(coords, 2 * m + 2 * n);
            acc += p;
        }
        let a_n = acc / n_len as f64;
        sq_sum += a_n * a_n;
    }
    (sq_sum / m_len as f64).sqrt()
}

/// The exact half: the wide family fails to factorize by exactly 1/729.
/// Pure rational arithmetic, no orbit simulation.
pub fn exact_part() -> Result<A2ExactPart> {
    let f1 = third_coord_arc(rat(1, 81));
    let f2 = second_arc();
    let e_f1 = z2_const(&f1)?;
    let e_f2 = z2_const(&f2)?;
    let e_w = w_expectation_const(f1, f2)?;
    let product = e_f1 * e_f2;
    let discrepancy = e_w - product;
    Ok(A2ExactPart {
        e_f1_z2: format_rat(e_f1),
        e_f2_z2: format_rat(e_f2),
        e_f1f2_w: format_rat(e_w),
        product_of_expectations: format_rat(product),
        discrepancy: format_rat(discrepancy),
        discrepancy_nonzero: discrepancy != rat(0, 1),
    })
}

/// Closed forms of the two displayed norms, from the narrow family: first as
/// the product of the three diagonal-line expectations, second as the square
/// of the product of the coordinate-factor expectations.
pub fn closed_forms() -> Result<A2ClosedForms> {
    let g1 = third_coord_arc(rat(1, 729));
    let g2 = second_arc();
    let w_g1 = w_expectation_const(g1.clone(), FunctionSpec::one())?;
    let w_g1g2 = w_expectation_const(g1.clone(), g2.clone())?;
    let w_g2 = w_expectation_const(FunctionSpec::one(), g2.clone())?;
    let norm1_closed = w_g1 * w_g1g2 * w_g2;
    let z_g1 = z2_const(&g1)?;
    let z_g2 = z2_const(&g2)?;
    let norm2_closed = z_g1 * z_g1 * z_g2 * z_g2;
    let gap = norm1_closed - norm2_closed;
    Ok(A2ClosedForms {
        norm1_closed: format_rat(norm1_closed),
        norm1_closed_f64: to_f64(norm1_closed),
        norm2_closed: format_rat(norm2_closed),
        norm2_closed_f64: to_f64(norm2_closed),
        gap: format_rat(gap),
        gap_f64: to_f64(gap),
    })
}

pub fn appendix_a2_repro(config: &A2Config) -> Result<A2Report> {
    let alpha = match &config.alpha {
        Some(s) => crate::rat::parse_rat(s)?,
        None => rat(195025, 470832),
    };
    let sys = AffineTorusSystem::new(3, alpha)?;

    let exact = exact_part()?;
    let closed_forms = closed_forms()?;
    let norm1_closed = crate::rat::parse_rat(&closed_forms.norm1_closed)?;
    let norm2_closed = crate::rat::parse_rat(&closed_forms.norm2_closed)?;
    let g1 = third_coord_arc(rat(1, 729));
    let g2 = second_arc();

    // Numeric part: orbit coordinate tables for j up to 2M + 4N.
    let j_max = (2 * config.m + 4 * config.n) as usize;
    let mut orbit = sys.orbit_iter_exact(&ExactPoint::origin(3), 0, 1)?;
    let den = orbit.den();
    let mut tables: [Vec<u64>; 3] = [
        Vec::with_capacity(j_max + 1),
        Vec::with_capacity(j_max + 1),
        Vec::with_capacity(j_max + 1),
    ];
    for _ in 0..=j_max {
        let p = orbit.current();
        for (t, &v) in tables.iter_mut().zip(&p.coords) {
            t.push(v);
        }
        orbit.advance();
    }
    let coords: [&[u64]; 3] = [&tables[0], &tables[1], &tables[2]];

    let c_g1 = CompiledFn::compile(&to_lin_boxes(&g1, 1, 3)?, den);
    let c_g2 = CompiledFn::compile(&to_lin_boxes(&g2, 1, 3)?, den);
    let norm1_estimate = double_average_norm(&c_g1, &c_g2, &coords, config.n, config.m);

    let cz_g1 = CompiledFn::compile(&cond_expect_zj(&g1, 3, 2)?, den);
    let cz_g2 = CompiledFn::compile(&cond_expect_zj(&g2, 3, 2)?, den);
    let norm2_estimate = double_average_norm(&cz_g1, &cz_g2, &coords, config.n, config.m);

    let numeric = A2NumericPart {
        norm1_estimate,
        norm1_abs_error: (norm1_estimate - to_f64(norm1_closed)).abs(),
        norm2_estimate,
        norm2_abs_error: (norm2_estimate - to_f64(norm2_closed)).abs(),
        n: config.n,
        m: config.m,
        alpha: format_rat(alpha),
    };

    let notes = vec![
        format!(
            "the two closed forms differ by {} ≈ {:.3e}, below the resolution \
             of the finite double averages",
            closed_forms.gap, closed_forms.gap_f64
        ),
        format!(
            "distinguishing the two norms therefore rests on the exact \
             conditional-expectation discrepancy {} computed in rational \
             arithmetic, not on the numeric estimates",
            exact.discrepancy
        ),
        "numeric estimates use the arc lengths matching their closed-form \
         targets (1/9³ and 1/9); the exact discrepancy uses 1/9² and 1/9"
            .into(),
    ];

    Ok(A2Report {
        exact,
        closed_forms,
        numeric,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        let mut cfg = A2Config::default();
        cfg.n = 2000; // keep the numeric part cheap here
        cfg.m = 50;
        let rep = appendix_a2_repro(&cfg).unwrap();
        assert_eq!(rep.exact.e_f1_z2, "82/81");
        assert_eq!(rep.exact.e_f2_z2, "10/9");
        assert_eq!(rep.exact.e_f1f2_w, "91/81"); // 1 + 1/81 + 1/9
        assert_eq!(rep.exact.discrepancy, "-1/729");
        assert!(rep.exact.discrepancy_nonzero);
    }

    #[test]
    fn closed_forms_match_displayed_products() {
        let mut cfg = A2Config::default();
        cfg.n = 1000;
        cfg.m = 20;
        let rep = appendix_a2_repro(&cfg).unwrap();
        // (1/9³+1)(1/9³+1/9+1)(1/9+1) and (1/9³+1)²(1/9+1)².
        let a = rat(730, 729) * rat(811, 729) * rat(10, 9);
        let b = rat(730, 729) * rat(730, 729) * rat(10, 9) * rat(10, 9);
        assert_eq!(rep.closed_forms.norm1_closed, format_rat(a));
        assert_eq!(rep.closed_forms.norm2_closed, format_rat(b));
        assert!((rep.closed_forms.norm1_closed_f64 - 1.2377876).abs() < 1e-6);
        assert!((rep.closed_forms.norm2_closed_f64 - 1.2379572).abs() < 1e-6);
        assert!((rep.closed_forms.gap_f64 + 1.6959e-4).abs() < 1e-7);
    }

    #[test]
    fn numeric_estimates_converge_to_closed_forms() {
        let mut cfg = A2Config::default();
        cfg.n = 40_000;
        cfg.m = 120;
        let rep = appendix_a2_repro(&cfg).unwrap();
        assert!(
            rep.numeric.norm1_abs_error < 0.05,
            "norm1 {} vs {}",
            rep.numeric.norm1_estimate,
            rep.closed_forms.norm1_closed_f64
        );
        assert!(rep.numeric.norm2_abs_error < 1e-9);
    }
}
