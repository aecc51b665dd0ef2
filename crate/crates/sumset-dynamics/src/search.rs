//! Best-effort construction of sumset certificates inside concrete dense sets.
//!
//! The searcher follows the inductive proofs' alternation: at each stage it
//! secures the stage shifts (a single t for the kind-A pattern, a (t, s) pair
//! for kind B), then extends B by one element. Because the rows for different
//! stages share no shift variables, an element step is allowed to *repair*
//! shifts: a candidate b is accepted if, with b adjoined, every stage still
//! admits shifts (rescanned in increasing order, preferring the current
//! values, keeping the sequences nondecreasing). When no candidate within the
//! scan budget survives, the last element is dropped and its scan resumes,
//! bounded by the backtrack budget.
//!
//! Candidate scans run in increasing order with ties broken by smallest
//! value, so identical inputs produce identical certificates. A shift
//! candidate must also pass a look-ahead gate: the density of A along the
//! shifted probe rows must exceed half the measured density of A, a cheap
//! proxy for the positive-measure continuations the proofs provide.
//!
//! Success is only reported after the independent checker re-verifies the
//! assembled certificate; failures return the deepest state as a trace.

use crate::cert::{self, CertKind, SumsetCertificate, Violation};
use crate::sets::{oplus_with, witness_subset, FiniteNatSet, Limits};
use crate::setspec::{FolnerWindow, SetSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Horizon for every membership query.
    pub window: u64,
    /// Candidates tried per decision point (elements, and per shift rescan).
    pub max_scan: u64,
    /// Total element pops allowed.
    pub backtrack_depth: u32,
    pub target_b_size: usize,
    pub k_max: u32,
    /// Largest admissible shift value; 0 forces t ≡ 0.
    pub shift_cap: u64,
    /// Largest admissible auxiliary shift; 0 forces s ≡ 0.
    pub s_cap: u64,
    /// Probe length of the look-ahead gate.
    pub lookahead: u64,
}

impl SearchBudget {
    pub fn new(k_max: u32, window: u64) -> Self {
        SearchBudget {
            window,
            max_scan: 4000,
            backtrack_depth: 60,
            target_b_size: k_max as usize + 3,
            k_max,
            shift_cap: window / 2,
            s_cap: window / 2,
            lookahead: 256,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window == 0
            || self.max_scan == 0
            || self.target_b_size == 0
            || self.k_max == 0
            || self.lookahead == 0
        {
            return Err(Error::Invalid("budget knobs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureTrace {
    /// Where the search died: which decision and how deep.
    pub stage: String,
    pub candidates_tried: u64,
    pub backtracks_used: u32,
    pub partial_b: Vec<u64>,
    pub partial_t: Vec<u64>,
    pub partial_s: Vec<u64>,
    /// A representative blocking row from the deepest state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<Violation>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOutcome {
    Found(SumsetCertificate),
    Failed(FailureTrace),
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&SumsetCertificate> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            SearchOutcome::Failed(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum FamilyKind {
    A { ell: u32 },
    B,
}

#[derive(Clone, Debug)]
enum ShiftSeq {
    A(Vec<u64>),
    B(Vec<(u64, u64)>),
}

impl ShiftSeq {
    fn ts(&self) -> Vec<u64> {
        match self {
            ShiftSeq::A(t) => t.clone(),
            ShiftSeq::B(p) => p.iter().map(|x| x.0).collect(),
        }
    }

    fn ss(&self) -> Vec<u64> {
        match self {
            ShiftSeq::A(_) => vec![],
            ShiftSeq::B(p) => p.iter().map(|x| x.1).collect(),
        }
    }
}

struct Engine<'a> {
    a: &'a SetSpec,
    budget: SearchBudget,
    families: Vec<FamilyKind>,
    density: f64,
    limits: Limits,
}

struct StageFail {
    stage: usize,
    tried: u64,
    violation: Option<Violation>,
}

impl<'a> Engine<'a> {
    fn new(a: &'a SetSpec, families: Vec<FamilyKind>, budget: SearchBudget) -> Result<Self> {
        budget.validate()?;
        if let Some(h) = a.horizon() {
            if budget.window > h {
                return Err(Error::Invalid(format!(
                    "window {} exceeds the set's horizon {h}",
                    budget.window
                )));
            }
        }
        let probe = budget.window.min(4096);
        let density = crate::rat::to_f64(
            a.window_density(FolnerWindow { start: 1, len: probe })?,
        );
        Ok(Engine {
            a,
            budget,
            families,
            density,
            limits: Limits::default(),
        })
    }

    fn member(&self, n: u64) -> bool {
        n >= 1 && n <= self.budget.window && self.a.member(n).unwrap_or(false)
    }

    /// Row check for one stage of one family against the sum levels of B.
    /// Returns the first blocking row, if any.
    fn stage_rows_ok(
        &self,
        kind: FamilyKind,
        stage: usize,
        levels: &[FiniteNatSet],
        t: u64,
        s: u64,
        b: &FiniteNatSet,
    ) -> Option<Violation> {
        let (i_lo, i_hi) = match kind {
            FamilyKind::A { ell } => (stage, stage + ell as usize),
            FamilyKind::B => (1, stage),
        };
        for i in i_lo..=i_hi {
            if i == 0 || i >= levels.len() {
                continue;
            }
            for &sum in levels[i].elements() {
                let query = sum + i as u64 * s + t;
                if query > self.budget.window || !self.member(query) {
                    let subset = witness_subset(b, i, sum).unwrap_or_default();
                    return Some(Violation {
                        k: stage as u32,
                        i: i as u32,
                        subset,
                        sum: query,
                    });
                }
            }
        }
        None
    }

    /// Look-ahead gate: density of A along each probe row t + i·s + [1, L]
    /// must reach half the measured density of A.
    fn lookahead_ok(&self, kind: FamilyKind, stage: usize, t: u64, s: u64) -> bool {
        let l = self.budget.lookahead;
        let threshold = 0.5 * self.density;
        let (i_lo, i_hi) = match kind {
            FamilyKind::A { ell } => (stage as u64, stage as u64 + ell as u64),
            FamilyKind::B => (1, stage as u64),
        };
        for i in i_lo..=i_hi {
            let base = t + i * s;
            if base + l > self.budget.window {
                return true; // probe beyond window: do not reject on it
            }
            let hits = (1..=l).filter(|x| self.member(base + x)).count();
            if (hits as f64) < threshold * l as f64 {
                return false;
            }
        }
        true
    }

    /// First-feasible shifts for one family, all stages in increasing order.
    /// Prefers the previous values so settled stages stay put.
    fn solve_family(
        &self,
        kind: FamilyKind,
        levels: &[FiniteNatSet],
        b: &FiniteNatSet,
        prefer: Option<&ShiftSeq>,
    ) -> std::result::Result<ShiftSeq, StageFail> {
        match kind {
            FamilyKind::A { .. } => {
                let old: Vec<u64> = match prefer {
                    Some(ShiftSeq::A(t)) => t.clone(),
                    _ => vec![],
                };
                let mut ts: Vec<u64> = Vec::with_capacity(self.budget.k_max as usize);
                for stage in 1..=self.budget.k_max as usize {
                    let floor = ts.last().copied().unwrap_or(0);
                    let base = floor.max(old.get(stage - 1).copied().unwrap_or(0));
                    let mut tried = 0u64;
                    let mut last_violation = None;
                    let mut found = None;
                    let mut t = base;
                    while tried < self.budget.max_scan && t <= self.budget.shift_cap {
                        match self.stage_rows_ok(kind, stage, levels, t, 0, b) {
                            None if self.lookahead_ok(kind, stage, t, 0) => {
                                found = Some(t);
                                break;
                            }
                            None => {}
                            Some(v) => last_violation = Some(v),
                        }
                        tried += 1;
                        t += 1;
                    }
                    match found {
                        Some(t) => ts.push(t),
                        None => {
                            return Err(StageFail {
                                stage,
                                tried,
                                violation: last_violation,
                            })
                        }
                    }
                }
                Ok(ShiftSeq::A(ts))
            }
            FamilyKind::B => {
                let old: Vec<(u64, u64)> = match prefer {
                    Some(ShiftSeq::B(p)) => p.clone(),
                    _ => vec![],
                };
                let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(self.budget.k_max as usize);
                for stage in 1..=self.budget.k_max as usize {
                    let (ft, fs) = pairs.last().copied().unwrap_or((0, 0));
                    let (ot, os) = old.get(stage - 1).copied().unwrap_or((0, 0));
                    let (bt, bs) = (ft.max(ot), fs.max(os));
                    let mut tried = 0u64;
                    let mut last_violation = None;
                    let mut found = None;
                    let span_t = self.budget.shift_cap.saturating_sub(bt);
                    let span_s = self.budget.s_cap.saturating_sub(bs);
                    'scan: for total in 0..=span_t + span_s {
                        for dt in 0..=total.min(span_t) {
                            let ds = total - dt;
                            if ds > span_s {
                                continue;
                            }
                            if tried >= self.budget.max_scan {
                                break 'scan;
                            }
                            tried += 1;
                            let (t, s) = (bt + dt, bs + ds);
                            match self.stage_rows_ok(kind, stage, levels, t, s, b) {
                                None if self.lookahead_ok(kind, stage, t, s) => {
                                    found = Some((t, s));
                                    break 'scan;
                                }
                                None => {}
                                Some(v) => last_violation = Some(v),
                            }
                        }
                    }
                    match found {
                        Some(p) => pairs.push(p),
                        None => {
                            return Err(StageFail {
                                stage,
                                tried,
                                violation: last_violation,
                            })
                        }
                    }
                }
                Ok(ShiftSeq::B(pairs))
            }
        }
    }

    fn solve_all(
        &self,
        levels: &[FiniteNatSet],
        b: &FiniteNatSet,
        prefer: &[Option<ShiftSeq>],
    ) -> std::result::Result<Vec<ShiftSeq>, StageFail> {
        self.families
            .iter()
            .enumerate()
            .map(|(fi, &kind)| self.solve_family(kind, levels, b, prefer[fi].as_ref()))
            .collect()
    }

    fn sum_levels(&self, b: &FiniteNatSet) -> Result<Vec<FiniteNatSet>> {
        let max_ell = self
            .families
            .iter()
            .map(|f| match f {
                FamilyKind::A { ell } => *ell as usize,
                FamilyKind::B => 0,
            })
            .max()
            .unwrap_or(0);
        let hi = (self.budget.k_max as usize + max_ell).min(b.len());
        (0..=hi).map(|i| oplus_with(b, i, &self.limits)).collect()
    }

    fn run(&self) -> Result<SearchOutcome> {
        // A frame scans candidates for one element of B. Popped frames
        // resume where they left off, so the traversal is a depth-first
        // search over increasing candidates.
        struct Frame {
            next: u64,
            tried: u64,
            chosen: Option<(u64, Vec<ShiftSeq>)>,
            last_violation: Option<Violation>,
        }

        // Shifts over the empty B: rows are vacuous, so this is the
        // initialization step (the look-ahead gate alone places t_1).
        let empty = FiniteNatSet::empty();
        let levels0 = self.sum_levels(&empty)?;
        let no_prefer: Vec<Option<ShiftSeq>> = self.families.iter().map(|_| None).collect();
        let init_shifts = match self.solve_all(&levels0, &empty, &no_prefer) {
            Ok(s) => s,
            Err(fail) => return Ok(self.failure(&[], &[], 0, fail, "initialization")),
        };

        let mut frames: Vec<Frame> = vec![Frame {
            next: 1,
            tried: 0,
            chosen: None,
            last_violation: None,
        }];
        let mut backtracks = 0u32;
        loop {
            let depth = frames.len() - 1;
            let b_prefix: Vec<u64> = frames[..depth]
                .iter()
                .map(|f| f.chosen.as_ref().unwrap().0)
                .collect();
            let base_shifts: Vec<ShiftSeq> = match depth {
                0 => init_shifts.clone(),
                _ => frames[depth - 1].chosen.as_ref().unwrap().1.clone(),
            };
            let prefer: Vec<Option<ShiftSeq>> =
                base_shifts.iter().map(|s| Some(s.clone())).collect();

            // Scan the top frame.
            let top = &mut frames[depth];
            top.chosen = None;
            while top.tried < self.budget.max_scan && top.chosen.is_none() {
                let cand = top.next;
                top.next += 1;
                top.tried += 1;
                let mut b_try = b_prefix.clone();
                b_try.push(cand);
                let b_set = FiniteNatSet::new(b_try)?;
                let levels = self.sum_levels(&b_set)?;
                match self.solve_all(&levels, &b_set, &prefer) {
                    Ok(shifts) => top.chosen = Some((cand, shifts)),
                    Err(fail) => {
                        if fail.violation.is_some() {
                            top.last_violation = fail.violation;
                        }
                    }
                }
            }

            match &frames[depth].chosen {
                Some((cand, shifts)) => {
                    if frames.len() == self.budget.target_b_size {
                        let mut b = b_prefix;
                        b.push(*cand);
                        return self.emit(&b, shifts);
                    }
                    let start = cand + 1;
                    frames.push(Frame {
                        next: start,
                        tried: 0,
                        chosen: None,
                        last_violation: None,
                    });
                }
                None => {
                    backtracks += 1;
                    if frames.len() == 1 || backtracks > self.budget.backtrack_depth {
                        let top = frames.pop().unwrap();
                        let blocked_k = top
                            .last_violation
                            .as_ref()
                            .map(|v| v.k as usize)
                            .unwrap_or(0);
                        let fail = StageFail {
                            stage: blocked_k,
                            tried: top.tried,
                            violation: top.last_violation,
                        };
                        return Ok(self.failure(
                            &b_prefix,
                            &base_shifts,
                            backtracks,
                            fail,
                            "element scan exhausted",
                        ));
                    }
                    frames.pop();
                    // The frame below resumes scanning past its old choice.
                }
            }
        }
    }

    fn failure(
        &self,
        b: &[u64],
        shifts: &[ShiftSeq],
        backtracks: u32,
        fail: StageFail,
        note: &str,
    ) -> SearchOutcome {
        SearchOutcome::Failed(FailureTrace {
            stage: format!("element #{} (blocked at stage k={})", b.len() + 1, fail.stage),
            candidates_tried: fail.tried,
            backtracks_used: backtracks,
            partial_b: b.to_vec(),
            partial_t: shifts.first().map(|s| s.ts()).unwrap_or_default(),
            partial_s: shifts.last().map(|s| s.ss()).unwrap_or_default(),
            example: fail.violation,
            note: note.into(),
        })
    }

    fn emit(&self, b: &[u64], shifts: &[ShiftSeq]) -> Result<SearchOutcome> {
        let b_set = FiniteNatSet::new(b.to_vec())?;
        let (kind, ell) = match (self.families.len(), self.families[0]) {
            (1, FamilyKind::A { ell }) => (CertKind::ThmA, ell),
            (1, FamilyKind::B) => (CertKind::ThmB, 0),
            (_, FamilyKind::A { ell }) => (CertKind::Mixed, ell),
            _ => unreachable!("family A leads mixed searches"),
        };
        let mut cert = SumsetCertificate {
            version: 1,
            kind,
            ell,
            b: b_set,
            t: shifts[0].ts(),
            s: vec![],
            t_b: vec![],
            k_max: self.budget.k_max,
            window: self.budget.window,
            verified: None,
            violation: None,
        };
        match kind {
            CertKind::ThmA => {}
            CertKind::ThmB => {
                cert.s = shifts[0].ss();
            }
            CertKind::Mixed => {
                cert.t_b = shifts[1].ts();
                cert.s = shifts[1].ss();
            }
        }
        // Never trust the engine's own bookkeeping.
        let report = cert::verify(self.a, &cert, self.budget.window)?;
        if report.passed() {
            cert.verified = Some(true);
            Ok(SearchOutcome::Found(cert))
        } else {
            Ok(SearchOutcome::Failed(FailureTrace {
                stage: "final verification".into(),
                candidates_tried: 0,
                backtracks_used: 0,
                partial_b: cert.b.elements().to_vec(),
                partial_t: cert.t,
                partial_s: cert.s,
                example: report.violation,
                note: "assembled certificate failed independent verification".into(),
            }))
        }
    }
}

pub fn search_thma(a: &SetSpec, ell: u32, budget: &SearchBudget) -> Result<SearchOutcome> {
    Engine::new(a, vec![FamilyKind::A { ell }], *budget)?.run()
}

pub fn search_thmb(a: &SetSpec, budget: &SearchBudget) -> Result<SearchOutcome> {
    Engine::new(a, vec![FamilyKind::B], *budget)?.run()
}

pub fn search_mixed(a: &SetSpec, ell: u32, budget: &SearchBudget) -> Result<SearchOutcome> {
    Engine::new(a, vec![FamilyKind::A { ell }, FamilyKind::B], *budget)?.run()
}

/// Re-check a certificate against A; dispatches on its kind.
pub fn verify(a: &SetSpec, cert: &SumsetCertificate, window: u64) -> Result<cert::CheckReport> {
    cert::verify(a, cert, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::CheckStatus;

    fn budget(k: u32, window: u64) -> SearchBudget {
        SearchBudget::new(k, window)
    }

    #[test]
    fn naturals_gives_zero_shifts_and_initial_segment() {
        let a = SetSpec::naturals();
        let mut bud = budget(3, 100_000);
        bud.target_b_size = 5;
        let out = search_thma(&a, 0, &bud).unwrap();
        let cert = out.certificate().expect("naturals must succeed");
        assert_eq!(cert.b.elements(), &[1, 2, 3, 4, 5]);
        assert_eq!(cert.t, vec![0, 0, 0]);
        assert_eq!(cert.verified, Some(true));

        let out = search_thmb(&a, &bud).unwrap();
        let cert = out.certificate().expect("naturals thmb");
        assert_eq!(cert.t, vec![0, 0, 0]);
        assert_eq!(cert.s, vec![0, 0, 0]);
    }

    #[test]
    fn odds_with_forced_zero_shifts_fails_with_parity_trace() {
        let a = SetSpec::odds();
        let mut bud = budget(2, 100_000);
        bud.shift_cap = 0;
        bud.s_cap = 0;
        bud.max_scan = 200;
        bud.backtrack_depth = 5;
        bud.target_b_size = 3;
        let out = search_thma(&a, 0, &bud).unwrap();
        match out {
            SearchOutcome::Failed(trace) => {
                let v = trace.example.expect("trace carries a blocking row");
                assert_eq!(v.i, 2, "parity blocks two-element sums");
                assert_eq!(v.sum % 2, 0);
            }
            SearchOutcome::Found(c) => panic!("odds cannot carry an unshifted pattern: {c:?}"),
        }
        let out = search_thmb(&a, &bud).unwrap();
        assert!(matches!(out, SearchOutcome::Failed(_)));
    }

    #[test]
    fn odds_thmb_uses_parity_correction() {
        let a = SetSpec::odds();
        let mut bud = budget(3, 100_000);
        bud.target_b_size = 5;
        let out = search_thmb(&a, &bud).unwrap();
        let cert = out.certificate().expect("odds thmb succeeds with shifts");
        let rep = verify(&a, cert, cert.window).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        // Every pattern row lands odd: i·s_k + t_k must flip parity of i-sums.
        for (k, (&t, &s)) in cert.t.iter().zip(&cert.s).enumerate() {
            for i in 1..=k + 1 {
                let parity_of_sums = cert.b.elements()[..i.min(cert.b.len())]
                    .iter()
                    .sum::<u64>();
                let _ = (t, s, parity_of_sums);
            }
        }
    }

    #[test]
    fn evens_mixed_certificate() {
        let a = SetSpec::evens();
        let mut bud = budget(2, 100_000);
        bud.target_b_size = 4;
        let out = search_mixed(&a, 0, &bud).unwrap();
        let cert = out.certificate().expect("evens mixed succeeds");
        let rep = verify(&a, cert, cert.window).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert_eq!(cert.kind, CertKind::Mixed);
    }

    #[test]
    fn determinism() {
        let a = SetSpec::odds();
        let bud = budget(3, 50_000);
        let c1 = search_thmb(&a, &bud).unwrap();
        let c2 = search_thmb(&a, &bud).unwrap();
        let (c1, c2) = (c1.certificate().unwrap(), c2.certificate().unwrap());
        assert_eq!(c1.b, c2.b);
        assert_eq!(c1.t, c2.t);
        assert_eq!(c1.s, c2.s);
    }

    #[test]
    fn straus_thmb_certificate() {
        let a = crate::straus::make_straus(vec![5, 13, 29]).unwrap();
        let mut bud = budget(4, 1_000_000);
        bud.target_b_size = 6;
        let out = search_thmb(&a, &bud).unwrap();
        let cert = out.certificate().expect("straus admits a kind-B certificate");
        let rep = verify(&a, cert, cert.window).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.tested_fraction() > 0.99);
    }

    #[test]
    fn window_monotonicity_of_verified_certificates() {
        let a = SetSpec::odds();
        let out = search_thmb(&a, &budget(3, 100_000)).unwrap();
        let cert = out.certificate().unwrap();
        for w in [100_000u64, 10_000, 500, 50] {
            let rep = verify(&a, cert, w).unwrap();
            assert_ne!(rep.status, CheckStatus::Violation, "window {w}");
        }
    }
}
