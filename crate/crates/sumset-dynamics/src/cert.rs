//! Sumset-containment certificates and their checkers.
//!
//! A certificate asserts one of the shifted containment patterns
//!
//! * kind A: `{ΣF : F ⊆ B, k ≤ |F| ≤ k+ℓ} ⊆ A − t_k` for every k ≤ K,
//! * kind B: `{ΣF : F ⊆ B+s_k, 1 ≤ |F| ≤ k} ⊆ A − t_k` for every k ≤ K,
//! * mixed: both at once on a shared B (kind-A shifts in `t`, kind-B pair in
//!   `t_b`/`s`).
//!
//! The checkers recompute every sum from scratch; they share no state with
//! the searcher that produced a certificate. Sums are only asserted up to the
//! check window and the per-k tested fractions are reported, so a window too
//! small to test anything surfaces as an explicit `Vacuous` status rather
//! than a silent pass.

use crate::sets::{oplus_with, range_sums, witness_subset, FiniteNatSet, Limits};
use crate::setspec::SetSpec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    ThmA,
    ThmB,
    Mixed,
}

/// Versioned JSON document: {"version","kind","ell","B","t","s","t_b","K","window","verified","violation"}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumsetCertificate {
    #[serde(default = "wire_version")]
    pub version: u32,
    pub kind: CertKind,
    #[serde(default)]
    pub ell: u32,
    #[serde(rename = "B")]
    pub b: FiniteNatSet,
    /// Kind-A shifts (ThmA, Mixed), or the kind-B t for a plain ThmB certificate.
    pub t: Vec<u64>,
    /// Kind-B auxiliary shifts; empty for ThmA.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<u64>,
    /// Kind-B t for mixed certificates; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_b: Vec<u64>,
    #[serde(rename = "K")]
    pub k_max: u32,
    pub window: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

fn wire_version() -> u32 {
    1
}

impl SumsetCertificate {
    pub fn validate(&self) -> Result<()> {
        let k = self.k_max as usize;
        let nondecreasing = |v: &[u64]| v.windows(2).all(|w| w[0] <= w[1]);
        let expect = |name: &str, v: &[u64], want: usize| {
            if v.len() != want {
                return Err(Error::Invalid(format!(
                    "{name} must have length {want}, got {}",
                    v.len()
                )));
            }
            if !nondecreasing(v) {
                return Err(Error::Invalid(format!("{name} must be nondecreasing")));
            }
            Ok(())
        };
        match self.kind {
            CertKind::ThmA => {
                expect("t", &self.t, k)?;
                if !self.s.is_empty() || !self.t_b.is_empty() {
                    return Err(Error::Invalid("ThmA certificate carries no s or t_b".into()));
                }
            }
            CertKind::ThmB => {
                expect("t", &self.t, k)?;
                expect("s", &self.s, k)?;
            }
            CertKind::Mixed => {
                expect("t", &self.t, k)?;
                expect("t_b", &self.t_b, k)?;
                expect("s", &self.s, k)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cert: SumsetCertificate =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        cert.validate()?;
        Ok(cert)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub k: u32,
    /// Number of summands in the violating subset.
    pub i: u32,
    /// The subset F itself (of B, or of B+s_k for kind B).
    pub subset: Vec<u64>,
    /// ΣF + shifts: the point that fails membership in A.
    pub sum: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    /// No sum was testable inside the window; not a pass.
    Vacuous,
    Violation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KStats {
    pub k: u32,
    pub total_sums: u64,
    pub tested_sums: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: CertKind,
    pub status: CheckStatus,
    pub window: u64,
    pub per_k: Vec<KStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn tested_fraction(&self) -> f64 {
        let total: u64 = self.per_k.iter().map(|s| s.total_sums).sum();
        let tested: u64 = self.per_k.iter().map(|s| s.tested_sums).sum();
        if total == 0 {
            0.0
        } else {
            tested as f64 / total as f64
        }
    }
}

fn finish(kind: CertKind, window: u64, per_k: Vec<KStats>, violation: Option<Violation>) -> CheckReport {
    let status = if violation.is_some() {
        CheckStatus::Violation
    } else if per_k.iter().all(|s| s.tested_sums == 0) {
        CheckStatus::Vacuous
    } else {
        CheckStatus::Pass
    };
    CheckReport {
        kind,
        status,
        window,
        per_k,
        violation,
    }
}

/// Check the kind-A pattern: for each k ≤ K, range_sums(B, k, k+ℓ) + t_k ⊆ A,
/// restricted to query points ≤ window.
pub fn check_thm_a(a: &SetSpec, cert: &SumsetCertificate, window: u64) -> Result<CheckReport> {
    if cert.kind != CertKind::ThmA && cert.kind != CertKind::Mixed {
        return Err(Error::Invalid("certificate kind does not carry a ThmA part".into()));
    }
    cert.validate()?;
    let limits = Limits::default();
    let ell = cert.ell as usize;
    let mut per_k = Vec::new();
    let mut violation = None;
    'outer: for k in 1..=cert.k_max as usize {
        let t_k = cert.t[k - 1];
        let sums = range_sums(&cert.b, k, k + ell, &limits)?;
        let mut stats = KStats {
            k: k as u32,
            total_sums: sums.len() as u64,
            tested_sums: 0,
        };
        for &s in sums.elements() {
            let query = s + t_k;
            if query > window {
                continue;
            }
            stats.tested_sums += 1;
            if !a.member(query)? {
                let (i, subset) = attach_subset(&cert.b, k, k + ell, s);
                violation = Some(Violation {
                    k: k as u32,
                    i,
                    subset,
                    sum: query,
                });
                per_k.push(stats);
                break 'outer;
            }
        }
        per_k.push(stats);
    }
    Ok(finish(CertKind::ThmA, window, per_k, violation))
}

/// Check the kind-B pattern: for each k ≤ K and 1 ≤ i ≤ k,
/// B^{⊕i} + i·s_k + t_k ⊆ A within the window (using
/// {ΣF : F ⊆ B+s, |F| = i} = B^{⊕i} + i·s).
pub fn check_thm_b(a: &SetSpec, cert: &SumsetCertificate, window: u64) -> Result<CheckReport> {
    if cert.kind != CertKind::ThmB && cert.kind != CertKind::Mixed {
        return Err(Error::Invalid("certificate kind does not carry a ThmB part".into()));
    }
    cert.validate()?;
    let (ts, ss) = match cert.kind {
        CertKind::ThmB => (&cert.t, &cert.s),
        _ => (&cert.t_b, &cert.s),
    };
    let limits = Limits::default();
    let mut per_k = Vec::new();
    let mut violation = None;
    'outer: for k in 1..=cert.k_max as usize {
        let (t_k, s_k) = (ts[k - 1], ss[k - 1]);
        let mut stats = KStats {
            k: k as u32,
            total_sums: 0,
            tested_sums: 0,
        };
        for i in 1..=k.min(cert.b.len()) {
            let sums = oplus_with(&cert.b, i, &limits)?;
            stats.total_sums += sums.len() as u64;
            for &s in sums.elements() {
                let query = s + i as u64 * s_k + t_k;
                if query > window {
                    continue;
                }
                stats.tested_sums += 1;
                if !a.member(query)? {
                    let base = witness_subset(&cert.b, i, s).unwrap_or_default();
                    violation = Some(Violation {
                        k: k as u32,
                        i: i as u32,
                        subset: base.iter().map(|x| x + s_k).collect(),
                        sum: query,
                    });
                    per_k.push(stats);
                    break 'outer;
                }
            }
        }
        per_k.push(stats);
    }
    Ok(finish(CertKind::ThmB, window, per_k, violation))
}

fn attach_subset(b: &FiniteNatSet, i_lo: usize, i_hi: usize, sum: u64) -> (u32, Vec<u64>) {
    for i in i_lo..=i_hi.min(b.len()) {
        if let Some(subset) = witness_subset(b, i, sum) {
            return (i as u32, subset);
        }
    }
    (0, vec![])
}

/// Dispatch on the certificate kind; mixed certificates must pass both
/// checkers on the shared B. Never trusts the certificate's own `verified`
/// flag.
pub fn verify(a: &SetSpec, cert: &SumsetCertificate, window: u64) -> Result<CheckReport> {
    cert.validate()?;
    match cert.kind {
        CertKind::ThmA => check_thm_a(a, cert, window),
        CertKind::ThmB => check_thm_b(a, cert, window),
        CertKind::Mixed => {
            let ra = check_thm_a(a, cert, window)?;
            if ra.status == CheckStatus::Violation {
                return Ok(ra);
            }
            let rb = check_thm_b(a, cert, window)?;
            if rb.status == CheckStatus::Violation {
                return Ok(rb);
            }
            let mut per_k = ra.per_k;
            per_k.extend(rb.per_k);
            let status = if ra.status == CheckStatus::Vacuous && rb.status == CheckStatus::Vacuous {
                CheckStatus::Vacuous
            } else {
                CheckStatus::Pass
            };
            Ok(CheckReport {
                kind: CertKind::Mixed,
                status,
                window,
                per_k,
                violation: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat_set(v: &[u64]) -> FiniteNatSet {
        FiniteNatSet::new(v.to_vec()).unwrap()
    }

    fn thma(b: &[u64], t: Vec<u64>, ell: u32, k_max: u32, window: u64) -> SumsetCertificate {
        SumsetCertificate {
            version: 1,
            kind: CertKind::ThmA,
            ell,
            b: nat_set(b),
            t,
            s: vec![],
            t_b: vec![],
            k_max,
            window,
            verified: None,
            violation: None,
        }
    }

    #[test]
    fn thma_odds_examples() {
        let odds = SetSpec::odds();
        // k=1 only: sums {1,3} ⊆ odds.
        let c = thma(&[1, 3], vec![0], 0, 1, 1000);
        let r = check_thm_a(&odds, &c, 1000).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);

        // K=2: parity obstruction at k=2, F={1,3}, sum 4.
        let c = thma(&[1, 3], vec![0, 0], 0, 2, 1000);
        let r = check_thm_a(&odds, &c, 1000).unwrap();
        assert_eq!(r.status, CheckStatus::Violation);
        let v = r.violation.unwrap();
        assert_eq!((v.k, v.i, v.sum), (2, 2, 4));
        assert_eq!(v.subset, vec![1, 3]);
    }

    #[test]
    fn thmb_reduces_to_thma_when_s_zero() {
        // With all s_k = 0, the kind-B check at (k, i=k) coincides with the
        // kind-A ℓ=0 check; on a union of patterns they agree on pass/fail.
        let a = SetSpec::odds();
        let mut cb = thma(&[1, 3], vec![0, 0], 0, 2, 1000);
        cb.kind = CertKind::ThmB;
        cb.s = vec![0, 0];
        let rb = check_thm_b(&a, &cb, 1000).unwrap();
        let ra = check_thm_a(&a, &thma(&[1, 3], vec![0, 0], 0, 2, 1000), 1000).unwrap();
        assert_eq!(rb.status, ra.status);
        assert_eq!(rb.violation.unwrap().sum, ra.violation.unwrap().sum);
    }

    #[test]
    fn thmb_everything_passes_on_naturals() {
        let a = SetSpec::naturals();
        let mut c = thma(&[2, 5, 9], vec![4, 7], 0, 2, 10_000);
        c.kind = CertKind::ThmB;
        c.s = vec![1, 3];
        assert_eq!(check_thm_b(&a, &c, 10_000).unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn thmb_parity_correction_passes_on_odds() {
        // B odd, s_k odd (so B+s_k is even), t_k odd: all sums i·even + odd are odd.
        let a = SetSpec::odds();
        let mut c = thma(&[1, 3, 7, 9], vec![1, 1, 1], 0, 3, 10_000);
        c.kind = CertKind::ThmB;
        c.s = vec![1, 1, 1];
        let r = check_thm_b(&a, &c, 10_000).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
    }

    #[test]
    fn vacuous_is_flagged() {
        let a = SetSpec::odds();
        // Window far below every sum: nothing testable.
        let c = thma(&[100, 300], vec![0], 0, 1, 50);
        let r = check_thm_a(&a, &c, 50).unwrap();
        assert_eq!(r.status, CheckStatus::Vacuous);

        // Empty B: vacuous, not pass.
        let c = thma(&[], vec![0, 0], 0, 2, 1000);
        let r = verify(&a, &c, 1000).unwrap();
        assert_eq!(r.status, CheckStatus::Vacuous);
    }

    #[test]
    fn tampering_is_caught() {
        let a = SetSpec::evens();
        let good = thma(&[2, 4, 6], vec![0, 0], 0, 2, 1000);
        assert_eq!(verify(&a, &good, 1000).unwrap().status, CheckStatus::Pass);
        let mut bad = good.clone();
        bad.b = nat_set(&[2, 4, 7]);
        bad.verified = Some(true); // lies
        assert_eq!(verify(&a, &bad, 1000).unwrap().status, CheckStatus::Violation);
    }

    #[test]
    fn monotone_in_window() {
        // A pass at window W stays a pass (possibly vacuous) at any W' < W.
        let a = SetSpec::evens();
        let c = thma(&[2, 4, 6], vec![0, 0], 1, 2, 100_000);
        for w in [100_000u64, 1000, 17, 3, 1] {
            let r = check_thm_a(&a, &c, w).unwrap();
            assert_ne!(r.status, CheckStatus::Violation, "window {w}");
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut c = thma(&[1, 5, 11], vec![0, 2], 1, 2, 500);
        c.verified = Some(true);
        let back = SumsetCertificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back.b, c.b);
        assert_eq!(back.kind, CertKind::ThmA);
        assert_eq!(back.version, 1);

        let mut bad = c.clone();
        bad.t = vec![2, 0];
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.t = vec![0];
        assert!(bad.validate().is_err());
    }
}
