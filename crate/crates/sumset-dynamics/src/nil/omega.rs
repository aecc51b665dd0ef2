//! Orbit-closure manifolds of diagonal points under `T × T² × ⋯`.
//!
//! For the dim-s affine system started at the origin, the closure of
//! `(T^n a, T^{2n} a, …, T^{(k+1)n} a)` projected to the k-step coordinate
//! factor is the manifold Ω_k ⊂ (T^s)^{k+2}: blocks `v_0 = 0` and
//! `v_r = (r·t_1, r²·t_2, …, r^k·t_k, u_{r,1}, …, u_{r,s-k})` for
//! `r = 1..k+1`, with the `t_j` shared across blocks and the `u` coordinates
//! free per block. Haar measure on Ω_k is uniform in those parameters.
//!
//! Truncating Ω_k to its first k+1 blocks always lands inside Ω_{k-1}, and
//! strictly so: an Ω_{k-1} point whose free j = k column breaks the chain
//! `v_r[k] = r^k·v_1[k]` is outside the projection.

use crate::rat::dist_mod1;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Blocks-of-coordinates layout: point has `blocks` blocks of dimension `s`.
fn expect_len(s: usize, blocks: usize, point: &[f64]) -> Result<()> {
    if point.len() != s * blocks {
        return Err(Error::Invalid(format!(
            "expected {} coordinates ({} blocks of dim {}), got {}",
            s * blocks,
            blocks,
            s,
            point.len()
        )));
    }
    Ok(())
}

fn check_params(s: usize, k: usize) -> Result<()> {
    if k == 0 || k > s {
        return Err(Error::Invalid(format!("need 1 <= k <= s, got k={k}, s={s}")));
    }
    Ok(())
}

/// Point of Ω_k from explicit parameters: `ts` are the k shared parameters,
/// `us[r-1]` the free coordinates of block r (length s−k each).
pub fn omega_point(s: usize, k: usize, ts: &[f64], us: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_params(s, k)?;
    if ts.len() != k || us.len() != k + 1 || us.iter().any(|u| u.len() != s - k) {
        return Err(Error::Invalid("parameter shape mismatch".into()));
    }
    let mut point = vec![0.0; s]; // v_0 = 0
    for r in 1..=k + 1 {
        for (j, &t) in ts.iter().enumerate() {
            point.push(((r as f64).powi(j as i32 + 1) * t).rem_euclid(1.0));
        }
        point.extend_from_slice(&us[r - 1]);
    }
    Ok(point)
}

/// Haar samples of Ω_k: parameters drawn uniformly, reproducible under seed.
pub fn omega_sample(s: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_params(s, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let ts: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let us: Vec<Vec<f64>> = (0..k + 1)
                .map(|_| (0..s - k).map(|_| rng.gen::<f64>()).collect())
                .collect();
            omega_point(s, k, &ts, &us)
        })
        .collect()
}

/// Membership in Ω_k: `v_0 = 0` and `v_r[j] ≡ r^j·v_1[j] (mod 1)` for
/// `j ≤ k`, `r ≤ k+1`; free coordinates are unconstrained.
pub fn omega_member(s: usize, k: usize, point: &[f64], tol: f64) -> Result<bool> {
    check_params(s, k)?;
    expect_len(s, k + 2, point)?;
    Ok(block_constraints_hold(s, k, point, k + 1, tol))
}

/// The Ω_k constraints restricted to the first `blocks_avail` non-zero
/// blocks; with `blocks_avail = k` this is membership in the projection of
/// Ω_k onto its first k+1 blocks.
pub fn omega_projected_member(s: usize, k: usize, point: &[f64], tol: f64) -> Result<bool> {
    check_params(s, k)?;
    expect_len(s, k + 1, point)?;
    Ok(block_constraints_hold(s, k, point, k, tol))
}

fn block_constraints_hold(s: usize, k: usize, point: &[f64], blocks: usize, tol: f64) -> bool {
    if point[..s].iter().any(|&x| dist_mod1(x, 0.0) > tol) {
        return false;
    }
    for r in 1..=blocks {
        for j in 1..=k {
            let expect = ((r as f64).powi(j as i32) * point[s + (j - 1)]).rem_euclid(1.0);
            if dist_mod1(point[r * s + (j - 1)], expect) > tol {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrictnessReport {
    pub s: usize,
    pub k: usize,
    pub samples: usize,
    /// Every Haar sample of Ω_k, truncated to k+1 blocks, lies in Ω_{k-1}.
    pub all_projections_inside: bool,
    pub max_projection_defect: f64,
    /// Explicit Ω_{k-1} point outside the projection of Ω_k.
    pub witness: Vec<f64>,
    pub witness_in_lower: bool,
    pub witness_in_projection: bool,
}

impl StrictnessReport {
    pub fn strict(&self) -> bool {
        self.all_projections_inside && self.witness_in_lower && !self.witness_in_projection
    }
}

/// Check that P(Ω_k) ⊆ Ω_{k-1} on Haar samples and produce a machine-checked
/// witness of strictness.
pub fn projection_strictness(
    s: usize,
    k: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<StrictnessReport> {
    if k < 2 {
        return Err(Error::Invalid("strictness needs k >= 2".into()));
    }
    check_params(s, k)?;
    let mut all_inside = true;
    let mut max_defect = 0.0f64;
    for p in omega_sample(s, k, samples, seed)? {
        let truncated = &p[..s * (k + 1)];
        if !omega_member(s, k - 1, truncated, tol)? {
            all_inside = false;
        }
        // Defect of the j ≤ k-1 chain, recomputed directly.
        for r in 1..=k {
            for j in 1..=k - 1 {
                let expect = ((r as f64).powi(j as i32) * truncated[s + (j - 1)]).rem_euclid(1.0);
                max_defect = max_defect.max(dist_mod1(truncated[r * s + (j - 1)], expect));
            }
        }
    }

    // Witness: an Ω_{k-1} point whose j = k column violates v_2[k] = 2^k·v_1[k].
    let ts: Vec<f64> = (0..k - 1).map(|j| 0.17 + 0.11 * j as f64).collect();
    let mut us: Vec<Vec<f64>> = (0..k)
        .map(|r| (0..s - k + 1).map(|c| (0.05 + 0.2 * r as f64 + 0.13 * c as f64) % 1.0).collect())
        .collect();
    us[0][0] = 0.1;
    us[1][0] = 0.9; // 2^k · 0.1 mod 1 ≠ 0.9 for k = 2, 3, 4
    let witness = omega_point(s, k - 1, &ts, &us)?;
    let witness_in_lower = omega_member(s, k - 1, &witness, tol)?;
    let witness_in_projection = omega_projected_member(s, k, &witness, tol)?;

    Ok(StrictnessReport {
        s,
        k,
        samples,
        all_projections_inside: all_inside,
        max_projection_defect: max_defect,
        witness,
        witness_in_lower,
        witness_in_projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displayed_manifolds_for_s3() {
        // Ω_3 (s=3): blocks (0,0,0), (t,r,u), (2t,4r,8u), (3t,9r,27u), (4t,16r,64u).
        let p = omega_point(3, 3, &[0.1, 0.2, 0.3], &[vec![], vec![], vec![], vec![]]).unwrap();
        let expect = [
            0.0, 0.0, 0.0, //
            0.1, 0.2, 0.3, //
            0.2, 0.8, 0.4, // 8·0.3 = 2.4
            0.3, 0.8, 0.1, // 9·0.2 = 1.8, 27·0.3 = 8.1
            0.4, 0.2, 0.2, // 16·0.2 = 3.2, 64·0.3 = 19.2
        ];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }

        // Ω_1 (s=3): third and later coordinates of each block are free.
        let p = omega_point(3, 1, &[0.25], &[vec![0.5, 0.6], vec![0.7, 0.8]]).unwrap();
        assert_eq!(&p[..3], &[0.0, 0.0, 0.0]);
        assert!((p[3] - 0.25).abs() < 1e-12 && (p[6] - 0.5).abs() < 1e-12);
        assert_eq!(&p[4..6], &[0.5, 0.6]);
        assert_eq!(&p[7..9], &[0.7, 0.8]);
    }

    #[test]
    fn samples_are_members() {
        for (s, k) in [(3, 1), (3, 2), (3, 3), (4, 2)] {
            for p in omega_sample(s, k, 200, 7).unwrap() {
                assert!(omega_member(s, k, &p, 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = omega_sample(3, 2, 10, 42).unwrap();
        let b = omega_sample(3, 2, 10, 42).unwrap();
        assert_eq!(a, b);
        let c = omega_sample(3, 2, 10, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn membership_rejects_perturbation() {
        let mut p = omega_sample(3, 2, 1, 1).unwrap().pop().unwrap();
        assert!(omega_member(3, 2, &p, 1e-3).unwrap());
        p[3] = (p[3] + 0.01).rem_euclid(1.0); // constrained coordinate of v_1
        assert!(!omega_member(3, 2, &p, 1e-3).unwrap());
    }

    #[test]
    fn free_coordinates_unconstrained_in_lower_manifold() {
        // Third coords (0.1, 0.9, 0.5) are legal for Ω_2 (s=3) but violate the
        // Ω_3 chain since 8·0.1 = 0.8 ≠ 0.9.
        let p = omega_point(3, 2, &[0.3, 0.7], &[vec![0.1], vec![0.9], vec![0.5]]).unwrap();
        assert!(omega_member(3, 2, &p, 1e-9).unwrap());
        assert!(!omega_projected_member(3, 3, &p, 1e-3).unwrap());
    }

    #[test]
    fn strictness_both_levels() {
        for k in [2usize, 3] {
            let rep = projection_strictness(3, k, 500, 11, 1e-9).unwrap();
            assert!(rep.strict(), "k={k}: {rep:?}");
        }
    }
}
