//! Progressive-measure scanners and the multiple-recurrence double average.
//!
//! The σ_k functionals of indicator patterns reduce to products of orbit
//! box-memberships, so each scanner precomputes one membership bit table per
//! box over raw times and walks candidate shifts against it. Hits are the
//! shifts whose estimate clears the positivity threshold
//! `max(10⁻³, 0.1·Π vol(U_i))`, separating genuine positivity from
//! quadrature noise at desk scale.
//!
//! Every estimator has an independent recount partner that re-simulates the
//! orbit through the closed-form engine and exact box tests over a shifted
//! averaging window; the two share no code path.

use super::averages::AverageEstimate;
use crate::bits::BitRow;
use crate::nil::{AffineTorusSystem, ExactPoint, TorusBox};
use crate::rat::to_f64;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanParams {
    pub n_max: u64,
    /// Only multiple-right scans read m_max.
    pub m_max: u64,
    /// Averaging length of each σ estimate.
    pub avg_n: u64,
    /// None picks max(1e-3, 0.1·Π vol).
    pub threshold: Option<f64>,
    /// Stop after this many hits (scan order is increasing n, then m).
    pub max_hits: usize,
}

impl ScanParams {
    pub fn new(n_max: u64) -> Self {
        ScanParams {
            n_max,
            m_max: 0,
            avg_n: 2000,
            threshold: None,
            max_hits: usize::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanHit {
    pub n: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub m: u64,
    pub estimate: f64,
}

fn is_zero(x: &u64) -> bool {
    *x == 0
}

pub fn default_threshold(boxes: &[TorusBox]) -> f64 {
    let vol: f64 = boxes.iter().map(|b| to_f64(b.volume())).product();
    (0.1 * vol).max(1e-3)
}

/// One membership bit per (box, time) for times 1..=t_max.
fn box_tables(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    boxes: &[TorusBox],
    t_max: u64,
) -> Result<Vec<BitRow>> {
    let mut orbit = sys.orbit_iter_exact(a, 1, 1)?;
    let den = orbit.den();
    let scaled: Vec<_> = boxes.iter().map(|b| b.scaled(den)).collect();
    let mut tables: Vec<BitRow> = boxes.iter().map(|_| BitRow::zeros(t_max as usize)).collect();
    for tau in 0..t_max as usize {
        let p = orbit.current();
        for (table, arcs) in tables.iter_mut().zip(&scaled) {
            if arcs.iter().zip(&p.coords).all(|(arc, &v)| arc.contains(v)) {
                table.set(tau);
            }
        }
        orbit.advance();
    }
    Ok(tables)
}

#[inline]
fn tab(t: &BitRow, time: u64) -> bool {
    t.get(time as usize - 1)
}

/// Left-progressiveness scan: shifts n with
/// σ_k((X×U_1×…×U_k) ∩ T_Δ^{-n}(U_1×…×U_k×X)) above threshold.
pub fn left_progressive_scan(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    boxes: &[TorusBox],
    params: &ScanParams,
) -> Result<Vec<ScanHit>> {
    let k = boxes.len();
    if k == 0 {
        return Err(Error::Invalid("need at least one box".into()));
    }
    let w_len = params.avg_n;
    let threshold = params.threshold.unwrap_or_else(|| default_threshold(boxes));
    let t_max = k as u64 * w_len + params.n_max;
    let tables = box_tables(sys, a, boxes, t_max)?;
    // The n-free part of each term: x_i ∈ U_i for i = 1..k.
    let survivors: Vec<u64> = (1..=w_len)
        .filter(|&w| (1..=k).all(|i| tab(&tables[i - 1], i as u64 * w)))
        .collect();
    let mut hits = Vec::new();
    for n in 1..=params.n_max {
        // Coordinate 0 is pinned to the base point: T^n a must enter U_1.
        if !tab(&tables[0], n) {
            continue;
        }
        let count = survivors
            .iter()
            .filter(|&&w| (1..k).all(|i| tab(&tables[i], n + i as u64 * w)))
            .count();
        let estimate = count as f64 / w_len as f64;
        if estimate > threshold {
            hits.push(ScanHit { n, m: 0, estimate });
            if hits.len() >= params.max_hits {
                break;
            }
        }
    }
    Ok(hits)
}

/// Right-progressiveness scan on X^{k+1} with boxes U_1..U_{k-1}: shifts n with
/// σ_k((X×U×X) ∩ T_Δ^{-n}(X²×U)) above threshold.
pub fn right_progressive_scan(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    k: usize,
    boxes: &[TorusBox],
    params: &ScanParams,
) -> Result<Vec<ScanHit>> {
    if k < 2 || boxes.len() != k - 1 {
        return Err(Error::Invalid(format!(
            "right scan needs k >= 2 and k-1 boxes (got k={k}, {} boxes)",
            boxes.len()
        )));
    }
    let w_len = params.avg_n;
    let threshold = params.threshold.unwrap_or_else(|| default_threshold(boxes));
    let t_max = k as u64 * w_len + params.n_max;
    let tables = box_tables(sys, a, boxes, t_max)?;
    let survivors: Vec<u64> = (1..=w_len)
        .filter(|&w| (1..k).all(|i| tab(&tables[i - 1], i as u64 * w)))
        .collect();
    let mut hits = Vec::new();
    for n in 1..=params.n_max {
        let count = survivors
            .iter()
            .filter(|&&w| (2..=k).all(|i| tab(&tables[i - 2], n + i as u64 * w)))
            .count();
        let estimate = count as f64 / w_len as f64;
        if estimate > threshold {
            hits.push(ScanHit { n, m: 0, estimate });
            if hits.len() >= params.max_hits {
                break;
            }
        }
    }
    Ok(hits)
}

/// Multiple-right scan: pairs (n, m) with
/// σ_{k+ℓ}((X×U×X^ℓ) ∩ ⋂_{i≤ℓ} T_Δ^{-(n+im)}(X^{i+1}×U×X^{ℓ-i})) above
/// threshold, U = U_1×…×U_k. With ℓ = 1 this is the right scan's family.
pub fn multiple_right_scan(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    ell: usize,
    boxes: &[TorusBox],
    params: &ScanParams,
) -> Result<Vec<ScanHit>> {
    let k = boxes.len();
    if k == 0 || ell == 0 {
        return Err(Error::Invalid("need boxes and ell >= 1".into()));
    }
    let w_len = params.avg_n;
    let threshold = params.threshold.unwrap_or_else(|| default_threshold(boxes));
    let t_max = (k + ell) as u64 * w_len + params.n_max + ell as u64 * params.m_max;
    let tables = box_tables(sys, a, boxes, t_max)?;
    let survivors: Vec<u64> = (1..=w_len)
        .filter(|&w| (1..=k).all(|j| tab(&tables[j - 1], j as u64 * w)))
        .collect();
    let mut hits = Vec::new();
    'outer: for n in 1..=params.n_max {
        for m in 1..=params.m_max {
            let count = survivors
                .iter()
                .filter(|&&w| {
                    (1..=ell).all(|i| {
                        (i + 1..=i + k).all(|j| {
                            tab(&tables[j - i - 1], n + i as u64 * m + j as u64 * w)
                        })
                    })
                })
                .count();
            let estimate = count as f64 / w_len as f64;
            if estimate > threshold {
                hits.push(ScanHit { n, m, estimate });
                if hits.len() >= params.max_hits {
                    break 'outer;
                }
            }
        }
    }
    Ok(hits)
}

/// Independent recount of one scanner estimate: closed-form orbit evaluation
/// (modular exponentiation, no difference tables) and exact rational box
/// tests, over an averaging window starting at `w_start`.
pub fn recount(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    kind: ScanKind,
    boxes: &[TorusBox],
    hit: &ScanHit,
    avg_n: u64,
    w_start: u64,
) -> Result<f64> {
    let (n, m) = (hit.n, hit.m);
    let mut count = 0u64;
    for w in w_start..w_start + avg_n {
        let ok = match kind {
            ScanKind::Left => {
                let k = boxes.len();
                let mut ok = boxes[0].contains_exact(&sys.orbit_point_exact(a, n)?);
                for i in 1..k {
                    if !ok {
                        break;
                    }
                    ok = boxes[i - 1].contains_exact(&sys.orbit_point_exact(a, i as u64 * w)?)
                        && boxes[i].contains_exact(&sys.orbit_point_exact(a, n + i as u64 * w)?);
                }
                ok && boxes[k - 1].contains_exact(&sys.orbit_point_exact(a, k as u64 * w)?)
            }
            ScanKind::Right { k } => {
                let mut ok = true;
                for i in 1..k {
                    ok = ok
                        && boxes[i - 1].contains_exact(&sys.orbit_point_exact(a, i as u64 * w)?);
                }
                for i in 2..=k {
                    if !ok {
                        break;
                    }
                    ok = boxes[i - 2].contains_exact(&sys.orbit_point_exact(a, n + i as u64 * w)?);
                }
                ok
            }
            ScanKind::MultipleRight { ell } => {
                let k = boxes.len();
                let mut ok = true;
                for j in 1..=k {
                    ok = ok
                        && boxes[j - 1].contains_exact(&sys.orbit_point_exact(a, j as u64 * w)?);
                }
                'cons: for i in 1..=ell {
                    if !ok {
                        break;
                    }
                    for j in i + 1..=i + k {
                        let time = n + i as u64 * m + j as u64 * w;
                        if !boxes[j - i - 1].contains_exact(&sys.orbit_point_exact(a, time)?) {
                            ok = false;
                            break 'cons;
                        }
                    }
                }
                ok
            }
        };
        if ok {
            count += 1;
        }
    }
    Ok(count as f64 / avg_n as f64)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Left,
    Right { k: usize },
    MultipleRight { ell: usize },
}

/// Double average (1/M)Σ_m (1/N)Σ_n of the σ_k integral of
/// F·Π_{i≤ℓ} T_Δ^{n+im} F with F the boxed indicator pattern; the σ integral
/// itself is sampled over `w_len` diagonal orbit points.
pub fn multiple_recurrence_average(
    sys: &AffineTorusSystem,
    a: &ExactPoint,
    ell: usize,
    boxes: &[TorusBox],
    m_len: u64,
    n_len: u64,
    w_len: u64,
) -> Result<AverageEstimate> {
    let k = boxes.len();
    if k == 0 || ell == 0 || m_len == 0 || n_len == 0 || w_len == 0 {
        return Err(Error::Invalid("need boxes and positive lengths".into()));
    }
    let t_max = k as u64 * w_len + n_len + ell as u64 * m_len + k as u64 * w_len;
    let tables = box_tables(sys, a, boxes, t_max)?;
    let mut outer = 0.0f64;
    for w in 1..=w_len {
        let base = (1..=k).all(|j| tab(&tables[j - 1], j as u64 * w));
        if !base {
            continue;
        }
        // c(τ) = Π_j 1_{U_j}(T^{τ + jw} a) for the shifted copies.
        let c_len = n_len + ell as u64 * m_len;
        let mut c = BitRow::zeros(c_len as usize);
        for tau in 1..=c_len {
            if (1..=k).all(|j| tab(&tables[j - 1], tau + j as u64 * w)) {
                c.set(tau as usize - 1);
            }
        }
        let mut inner = 0u64;
        for m in 1..=m_len {
            for n in 1..=n_len {
                if (1..=ell).all(|i| c.get((n + i as u64 * m) as usize - 1)) {
                    inner += 1;
                }
            }
        }
        outer += inner as f64 / (m_len as f64 * n_len as f64);
    }
    Ok(AverageEstimate {
        value: outer / w_len as f64,
        value_im: 0.0,
        n: n_len,
        m: m_len,
        window_kind: "prefix".into(),
        mode: "floating".into(),
        exact: None,
    })
}
