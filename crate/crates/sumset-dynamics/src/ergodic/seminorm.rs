//! Gowers–Host–Kra uniformity seminorms along an orbit.
//!
//! The inductive definition: the 0-norm is the plain orbit average, and
//! `‖f‖_{U^{k+1}}^{2^{k+1}} = (1/H) Σ_{h≤H} ‖f·conj(T^h f)‖_{U^k}^{2^k}`,
//! with every inner average taken over the first N orbit points. The 2^k-th
//! root is taken at the end; tiny negative real parts from floating noise are
//! clamped to zero first.

use super::funcspec::FunctionSpec;
use crate::nil::{AffineTorusSystem, ExactPoint};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub value: f64,
    pub k: u32,
    pub h: u64,
    pub n: u64,
    /// The 2^k-power before the root (real part, unclamped).
    pub raw_power: f64,
}

/// ‖f‖_{U^k} estimated with inner averages of length `n` and difference
/// averages of length `h`. For k = 0 the value is the plain average (no
/// root, may be negative).
pub fn ghk_seminorm(
    sys: &AffineTorusSystem,
    f: &FunctionSpec,
    a: &ExactPoint,
    k: u32,
    h: u64,
    n: u64,
) -> Result<SeminormEstimate> {
    if h == 0 || n == 0 {
        return Err(Error::Invalid("need H >= 1 and N >= 1".into()));
    }
    let len = n + k as u64 * h;
    let mut orbit = sys.orbit_iter_exact(a, 1, 1)?;
    let mut values = Vec::with_capacity(len as usize);
    for _ in 0..len {
        let p = orbit.current().to_f64s();
        values.push(f.eval(sys, &[p]));
        orbit.advance();
    }
    let power = level_root(&values, k, h, n as usize);
    let value = if k == 0 {
        power.re
    } else {
        power.re.max(0.0).powf(0.5f64.powi(k as i32))
    };
    Ok(SeminormEstimate {
        value,
        k,
        h,
        n,
        raw_power: power.re,
    })
}

/// The 2^k-power recursion on a sequence of orbit values. The outermost
/// difference level fans out to threads (each with its own scratch stack);
/// results are reduced in index order so the estimate is deterministic.
fn level_root(seq: &[Complex64], k: u32, h: u64, n: usize) -> Complex64 {
    if k < 2 {
        let mut scratch = new_scratch(k, seq.len());
        return level(seq, k, h, n, &mut scratch);
    }
    let parts: Vec<Complex64> = (1..=h)
        .into_par_iter()
        .map(|hh| {
            let hh = hh as usize;
            let mut scratch = new_scratch(k, seq.len());
            let (first, rest) = scratch.split_first_mut().expect("k >= 2 has scratch");
            first.extend((0..seq.len() - hh).map(|i| seq[i] * seq[i + hh].conj()));
            level(first.as_slice(), k - 1, h, n, rest)
        })
        .collect();
    parts.into_iter().sum::<Complex64>() / h as f64
}

fn new_scratch(k: u32, len: usize) -> Vec<Vec<Complex64>> {
    (0..k).map(|_| Vec::with_capacity(len)).collect()
}

fn level(seq: &[Complex64], k: u32, h: u64, n: usize, scratch: &mut [Vec<Complex64>]) -> Complex64 {
    if k == 0 {
        let sum: Complex64 = seq[..n].iter().sum();
        return sum / n as f64;
    }
    let (mine, rest) = scratch.split_first_mut().expect("scratch per level");
    let mut acc = Complex64::new(0.0, 0.0);
    for hh in 1..=h as usize {
        mine.clear();
        mine.extend((0..seq.len() - hh).map(|i| seq[i] * seq[i + hh].conj()));
        acc += level(mine, k - 1, h, n, rest);
    }
    acc / h as f64
}
