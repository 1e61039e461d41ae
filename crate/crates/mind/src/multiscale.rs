//! Interval systems over the grid, the multiresolution norm, and its dual.
//!
//! An interval system is a family of grid-intersected intervals `B` with
//! point counts `n(B)`. The multiresolution norm of a signal is the maximum
//! of `|sum_{x in B} y(x)| / sqrt(n(B))` over the system; its dual norm is
//! the minimal weighted l1 cost of writing a vector as a sum of interval
//! indicator contributions, computed here as an exact linear program at
//! desk scale together with the witnessing certificate.

use serde::{Deserialize, Serialize};

use crate::error::{MindError, Result};
use crate::grid::GridSignal;

/// Which family of intervals a system enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// Every grid interval; `n(n+1)/2` members.
    AllIntervals,
    /// Intervals of dyadic continuum length `2^-j` at every position;
    /// `O(n log n)` distinct grid intersections.
    DyadicLengths,
    /// The m-adic partition intervals `[l m^-j, (l+1) m^-j)` on every
    /// level, down to singletons; `O(n)` members.
    MPartition(u32),
}

impl SystemKind {
    pub fn label(&self) -> String {
        match self {
            SystemKind::AllIntervals => "all".into(),
            SystemKind::DyadicLengths => "dyadic".into(),
            SystemKind::MPartition(m) => format!("partition:{m}"),
        }
    }

    /// Parse the CLI spelling: `all`, `dyadic`, or `partition:m`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SystemKind::AllIntervals),
            "dyadic" => Ok(SystemKind::DyadicLengths),
            _ => {
                if let Some(m) = s.strip_prefix("partition:") {
                    let m: u32 = m
                        .parse()
                        .map_err(|_| MindError::Parameter(format!("bad partition base in {s:?}")))?;
                    if m < 2 {
                        return Err(MindError::Parameter("partition base m must be >= 2".into()));
                    }
                    Ok(SystemKind::MPartition(m))
                } else {
                    Err(MindError::Parameter(format!(
                        "unknown system {s:?} (expected all, dyadic, or partition:m)"
                    )))
                }
            }
        }
    }
}

/// A grid interval `[start, start+len)` in index space; `n(B) = len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: u32,
    pub len: u32,
}

impl Interval {
    pub fn count(&self) -> usize {
        self.len as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start as usize..self.start as usize + self.len as usize).contains(&i)
    }
}

enum Store {
    /// All intervals, enumerated on the fly in (len, start) order.
    Implicit,
    /// Materialized list, sorted by (len, start) and deduplicated.
    List(Vec<Interval>),
}

/// An enumerable family of grid-intersected intervals.
pub struct IntervalSystem {
    kind: SystemKind,
    n: usize,
    store: Store,
}

/// Serializable descriptor `{kind, m?, n, count}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub n: usize,
    pub count: usize,
}

impl IntervalSystem {
    pub fn new(kind: SystemKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MindError::Parameter("grid size must be positive".into()));
        }
        let store = match kind {
            SystemKind::AllIntervals => Store::Implicit,
            SystemKind::DyadicLengths => Store::List(dyadic_lengths(n)),
            SystemKind::MPartition(m) => {
                if m < 2 {
                    return Err(MindError::Parameter("partition base m must be >= 2".into()));
                }
                Store::List(m_partition(n, m))
            }
        };
        Ok(Self { kind, n, store })
    }

    /// Test-only constructor for ad-hoc interval families.
    #[doc(hidden)]
    pub fn from_intervals(n: usize, mut intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.len == 0 || iv.start as usize + iv.len as usize > n {
                return Err(MindError::Parameter(format!("interval {iv:?} does not fit in n={n}")));
            }
        }
        intervals.sort_by_key(|iv| (iv.len, iv.start));
        intervals.dedup();
        Ok(Self { kind: SystemKind::AllIntervals, n, store: Store::List(intervals) })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored intervals after deduplication.
    pub fn len(&self) -> usize {
        match &self.store {
            Store::Implicit => self.n * (self.n + 1) / 2,
            Store::List(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterate in the canonical (len, start) order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Interval> + '_> {
        match &self.store {
            Store::Implicit => {
                let n = self.n as u32;
                Box::new((1..=n).flat_map(move |len| {
                    (0..=n - len).map(move |start| Interval { start, len })
                }))
            }
            Store::List(v) => Box::new(v.iter().copied()),
        }
    }

    pub fn descriptor(&self) -> SystemDescriptor {
        let (kind, m) = match self.kind {
            SystemKind::AllIntervals => ("all".to_string(), None),
            SystemKind::DyadicLengths => ("dyadic".to_string(), None),
            SystemKind::MPartition(m) => ("partition".to_string(), Some(m)),
        };
        SystemDescriptor { kind, m, n: self.n, count: self.len() }
    }
}

/// Distinct grid intersections of intervals `[a, a+2^-j)`.
///
/// A continuum interval of length `h` intersects the grid in either
/// `floor(h n)` or `ceil(h n)` consecutive points depending on alignment
/// (exactly `h n` when that is an integer), at every position.
fn dyadic_lengths(n: usize) -> Vec<Interval> {
    let mut lens = std::collections::BTreeSet::new();
    let mut j = 0u32;
    loop {
        let h = (n as f64) / (1u64 << j) as f64;
        if h < 1.0 {
            break;
        }
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        if lo >= 1 {
            lens.insert(lo);
        }
        lens.insert(hi);
        j += 1;
        if (1u64 << j) > n as u64 * 2 {
            break;
        }
    }
    lens.insert(1);
    let mut out = Vec::new();
    for len in lens {
        for start in 0..=(n - len) {
            out.push(Interval { start: start as u32, len: len as u32 });
        }
    }
    out.sort_by_key(|iv| (iv.len, iv.start));
    out
}

/// Grid intersections of `[l m^-j, (l+1) m^-j)` over all levels,
/// deduplicated, empty cells dropped.
fn m_partition(n: usize, m: u32) -> Vec<Interval> {
    let mut set = std::collections::BTreeSet::new();
    let mut cells = 1u64;
    loop {
        // level with `cells` cells of width 1/cells
        for l in 0..cells {
            // indices i with l/cells <= i/n < (l+1)/cells
            let start = (l as u128 * n as u128).div_ceil(cells as u128) as usize;
            let end = ((l + 1) as u128 * n as u128).div_ceil(cells as u128) as usize;
            if end > start {
                set.insert((end - start, start));
            }
        }
        if cells >= n as u64 {
            break;
        }
        cells = cells.saturating_mul(m as u64);
    }
    let mut out: Vec<Interval> = set
        .into_iter()
        .map(|(len, start)| Interval { start: start as u32, len: len as u32 })
        .collect();
    out.sort_by_key(|iv| (iv.len, iv.start));
    out
}

fn check_same_grid(s: &GridSignal, sys: &IntervalSystem) -> Result<()> {
    if s.n() != sys.n() {
        return Err(MindError::GridMismatch(format!(
            "signal lives on {} points, system on {}",
            s.n(),
            sys.n()
        )));
    }
    Ok(())
}

/// Inclusive prefix table `p[i] = v_0 + ... + v_{i-1}`, `p[0] = 0`.
pub(crate) fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    p.push(0.0);
    for v in values {
        acc += v;
        p.push(acc);
    }
    p
}

/// Multiresolution norm: `max_B |sum_{x in B} y(x)| / sqrt(n(B))`.
pub fn mr_norm(s: &GridSignal, sys: &IntervalSystem) -> Result<f64> {
    check_same_grid(s, sys)?;
    Ok(mr_norm_values(s.values(), sys))
}

pub(crate) fn mr_norm_values(values: &[f64], sys: &IntervalSystem) -> f64 {
    let p = prefix_sums(values);
    match &sys.store {
        Store::Implicit => {
            let n = values.len();
            let mut best = 0.0f64;
            for len in 1..=n {
                let inv = 1.0 / (len as f64).sqrt();
                let mut m = 0.0f64;
                for start in 0..=(n - len) {
                    m = m.max((p[start + len] - p[start]).abs());
                }
                best = best.max(m * inv);
            }
            best
        }
        Store::List(intervals) => {
            let mut best = 0.0f64;
            let mut last_len = 0u32;
            let mut inv = 0.0;
            for iv in intervals {
                if iv.len != last_len {
                    last_len = iv.len;
                    inv = 1.0 / (iv.len as f64).sqrt();
                }
                let s = p[iv.start as usize + iv.len as usize] - p[iv.start as usize];
                best = best.max(s.abs() * inv);
            }
            best
        }
    }
}

/// The interval attaining the multiresolution norm (first in canonical
/// order among maximizers) and the attained value.
pub fn mr_norm_argmax(s: &GridSignal, sys: &IntervalSystem) -> Result<(f64, Interval)> {
    check_same_grid(s, sys)?;
    let p = prefix_sums(s.values());
    let mut best = f64::NEG_INFINITY;
    let mut arg = Interval { start: 0, len: 1 };
    for iv in sys.iter() {
        let sum = p[iv.start as usize + iv.len as usize] - p[iv.start as usize];
        let v = sum.abs() / (iv.len as f64).sqrt();
        if v > best {
            best = v;
            arg = iv;
        }
    }
    Ok((best, arg))
}

/// One weighted coefficient of a dual-norm certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub start: u32,
    pub len: u32,
    pub c: f64,
}

/// Coefficients `(c_B)` witnessing a dual-norm value: the target vector
/// decomposes as `omega(x) = sum_{B contains x} c_B` and the certified
/// value is `sum_B |c_B| sqrt(n(B))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificate {
    pub entries: Vec<CertificateEntry>,
    pub value: f64,
}

impl DualCertificate {
    /// Reconstruct `omega` from the certificate.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        // difference-array trick: add c on [start, start+len)
        let mut diff = vec![0.0; n + 1];
        for e in &self.entries {
            diff[e.start as usize] += e.c;
            diff[e.start as usize + e.len as usize] -= e.c;
        }
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        for d in diff.iter().take(n) {
            acc += d;
            out.push(acc);
        }
        out
    }

    /// Max reconstruction error against a target vector.
    pub fn reconstruction_error(&self, omega: &[f64]) -> f64 {
        self.reconstruct(omega.len())
            .iter()
            .zip(omega)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Problem sizes above this are rejected by the LP-backed dual norm.
pub const DUAL_NORM_LP_CAP: usize = 256;

/// Dual multiresolution norm with certificate, via the exact LP
/// `min sum_B |c_B| sqrt(n(B))  s.t.  sum_{B contains x} c_B = omega(x)`.
///
/// Desk-scale oracle: grids above [`DUAL_NORM_LP_CAP`] are rejected.
pub fn dual_norm(omega: &GridSignal, sys: &IntervalSystem) -> Result<(f64, DualCertificate)> {
    check_same_grid(omega, sys)?;
    let n = omega.n();
    if n > DUAL_NORM_LP_CAP {
        return Err(MindError::Capacity(format!(
            "dual_norm LP is capped at n <= {DUAL_NORM_LP_CAP}, got n = {n}"
        )));
    }
    let target = omega.values();
    if target.iter().all(|v| *v == 0.0) {
        return Ok((0.0, DualCertificate { entries: Vec::new(), value: 0.0 }));
    }

    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let intervals: Vec<Interval> = sys.iter().collect();
    // split representation c = c+ - c-, both nonnegative
    let mut pos = Vec::with_capacity(intervals.len());
    let mut neg = Vec::with_capacity(intervals.len());
    for iv in &intervals {
        let w = (iv.len as f64).sqrt();
        pos.push(problem.add_var(w, (0.0, f64::INFINITY)));
        neg.push(problem.add_var(w, (0.0, f64::INFINITY)));
    }
    // coverage constraints, one per grid point
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, iv) in intervals.iter().enumerate() {
        for x in iv.start as usize..iv.start as usize + iv.len as usize {
            covering[x].push(j);
        }
    }
    for (x, cover) in covering.iter().enumerate() {
        if cover.is_empty() {
            if target[x] != 0.0 {
                return Err(MindError::Internal(format!("grid point {x} is uncovered")));
            }
            continue;
        }
        let mut terms = Vec::with_capacity(cover.len() * 2);
        for &j in cover {
            terms.push((pos[j], 1.0));
            terms.push((neg[j], -1.0));
        }
        problem.add_constraint(&terms, ComparisonOp::Eq, target[x]);
    }
    let solution = problem
        .solve()
        .map_err(|e| MindError::Internal(format!("dual-norm LP failed: {e}")))?;
    let mut entries = Vec::new();
    let mut value = 0.0;
    for (j, iv) in intervals.iter().enumerate() {
        let c = solution[pos[j]] - solution[neg[j]];
        if c != 0.0 {
            entries.push(CertificateEntry { start: iv.start, len: iv.len, c });
            value += c.abs() * (iv.len as f64).sqrt();
        }
    }
    let cert = DualCertificate { entries, value };
    let err = cert.reconstruction_error(target);
    if err > 1e-8 {
        return Err(MindError::Internal(format!(
            "dual-norm certificate reconstruction error {err} exceeds 1e-8"
        )));
    }
    Ok((value, cert))
}

/// Hoelder pairing slack `<s, omega> - ||s||_B ||omega||_B*`; never positive
/// beyond numerical tolerance.
pub fn duality_gap(s: &GridSignal, omega: &GridSignal, sys: &IntervalSystem) -> Result<f64> {
    check_same_grid(s, sys)?;
    check_same_grid(omega, sys)?;
    let inner: f64 = s.values().iter().zip(omega.values()).map(|(a, b)| a * b).sum();
    let primal = mr_norm(s, sys)?;
    let (dual, _) = dual_norm(omega, sys)?;
    Ok(inner - primal * dual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(values: &[f64]) -> GridSignal {
        GridSignal::from_values(values.to_vec()).unwrap()
    }

    /// Brute-force norm over an explicit interval list.
    fn mr_norm_exhaustive(values: &[f64], intervals: &[Interval]) -> f64 {
        let mut best = 0.0f64;
        for iv in intervals {
            let s: f64 = values[iv.start as usize..iv.start as usize + iv.len as usize]
                .iter()
                .sum();
            best = best.max(s.abs() / (iv.len as f64).sqrt());
        }
        best
    }

    #[test]
    fn all_intervals_cardinality() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 16).unwrap();
        assert_eq!(sys.len(), 16 * 17 / 2);
        assert_eq!(sys.iter().count(), sys.len());
    }

    #[test]
    fn dyadic_cardinality_order() {
        // O(n log n): for n = 2^j exactly sum over lengths 2^l of (n - 2^l + 1)
        let n = 64;
        let sys = IntervalSystem::new(SystemKind::DyadicLengths, n).unwrap();
        let expect: usize = (0..=6).map(|l| n - (1 << l) + 1).sum();
        assert_eq!(sys.len(), expect);
    }

    #[test]
    fn m_partition_contains_every_level() {
        let sys = IntervalSystem::new(SystemKind::MPartition(2), 8).unwrap();
        let list: Vec<Interval> = sys.iter().collect();
        // levels: full, halves, quarters, singletons = 1 + 2 + 4 + 8 = 15
        assert_eq!(list.len(), 15);
        assert!(list.contains(&Interval { start: 0, len: 8 }));
        assert!(list.contains(&Interval { start: 4, len: 4 }));
        assert!(list.contains(&Interval { start: 6, len: 2 }));
        assert!(list.contains(&Interval { start: 7, len: 1 }));
    }

    #[test]
    fn m_partition_non_power_grid_is_deduplicated() {
        let sys = IntervalSystem::new(SystemKind::MPartition(2), 12).unwrap();
        let list: Vec<Interval> = sys.iter().collect();
        let mut seen = std::collections::HashSet::new();
        for iv in &list {
            assert!(iv.len >= 1);
            assert!(seen.insert((iv.start, iv.len)), "duplicate {iv:?}");
        }
        // singletons for every point must be present
        for i in 0..12 {
            assert!(list.contains(&Interval { start: i, len: 1 }));
        }
    }

    #[test]
    fn mr_norm_constant_vector() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 16).unwrap();
        let s = sig(&[1.0; 16]);
        assert!((mr_norm(&s, &sys).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mr_norm_alternating_vector() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 4).unwrap();
        let s = sig(&[1.0, -1.0, 1.0, -1.0]);
        let got = mr_norm(&s, &sys).unwrap();
        let brute = mr_norm_exhaustive(s.values(), &sys.iter().collect::<Vec<_>>());
        assert_eq!(got, brute);
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mr_norm_spike_on_partition() {
        let sys = IntervalSystem::new(SystemKind::MPartition(2), 8).unwrap();
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let got = mr_norm(&sig(&v), &sys).unwrap();
        let brute = mr_norm_exhaustive(&v, &sys.iter().collect::<Vec<_>>());
        assert_close(got, brute, 1e-12);
        assert!((got - 1.0).abs() < 1e-12);
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn mr_norm_rejects_grid_mismatch() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 8).unwrap();
        let s = sig(&[1.0; 4]);
        assert!(matches!(mr_norm(&s, &sys), Err(MindError::GridMismatch(_))));
    }

    #[test]
    fn mr_norm_fast_path_matches_exhaustive() {
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for &n in &[1usize, 2, 5, 17, 32] {
            let values: Vec<f64> = (0..n).map(|_| next()).collect();
            let s = sig(&values);
            for kind in [SystemKind::AllIntervals, SystemKind::DyadicLengths, SystemKind::MPartition(3)] {
                let sys = IntervalSystem::new(kind, n).unwrap();
                let fast = mr_norm(&s, &sys).unwrap();
                let brute = mr_norm_exhaustive(&values, &sys.iter().collect::<Vec<_>>());
                assert_close(fast, brute, 1e-12);
            }
        }
    }

    #[test]
    fn dual_norm_zero_vector() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 4).unwrap();
        let (v, cert) = dual_norm(&sig(&[0.0; 4]), &sys).unwrap();
        assert_eq!(v, 0.0);
        assert!(cert.entries.is_empty());
    }

    #[test]
    fn dual_norm_unit_spike() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 4).unwrap();
        let mut omega = vec![0.0; 4];
        omega[0] = 1.0;
        let (v, cert) = dual_norm(&sig(&omega), &sys).unwrap();
        // upper bound: c = 1 on the singleton {0}; lower bound by pairing
        // with e_0 itself: <e0, e0> / ||e0||_B = 1.
        assert_close(v, 1.0, 1e-9);
        assert!(cert.reconstruction_error(&omega) < 1e-8);
    }

    #[test]
    fn dual_norm_ones_is_sqrt_n() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 4).unwrap();
        let (v, _) = dual_norm(&sig(&[1.0; 4]), &sys).unwrap();
        assert_close(v, 2.0, 1e-9);
    }

    #[test]
    fn dual_norm_consecutive_indicator_cover_bound() {
        // indicator of 3 consecutive points on the 2-partition system at n=8
        let sys = IntervalSystem::new(SystemKind::MPartition(2), 8).unwrap();
        let mut omega = vec![0.0; 8];
        for x in omega.iter_mut().take(5).skip(2) {
            *x = 1.0;
        }
        let (v, cert) = dual_norm(&sig(&omega), &sys).unwrap();
        let m = 2.0f64;
        let p = 3.0f64;
        let bound = (m.sqrt() + 1.0) * (2.0 * m * p).sqrt();
        assert!(v <= bound + 1e-9, "value {v} bound {bound}");
        assert!((bound - 8.3633).abs() < 1e-3);
        assert!(cert.reconstruction_error(&omega) < 1e-8);
    }

    #[test]
    fn dual_norm_respects_capacity_cap() {
        let n = DUAL_NORM_LP_CAP + 1;
        let sys = IntervalSystem::new(SystemKind::MPartition(2), n).unwrap();
        let s = sig(&vec![1.0; n]);
        assert!(matches!(dual_norm(&s, &sys), Err(MindError::Capacity(_))));
    }

    #[test]
    fn duality_gap_tight_for_constants() {
        let sys = IntervalSystem::new(SystemKind::AllIntervals, 4).unwrap();
        let ones = sig(&[1.0; 4]);
        let gap = duality_gap(&ones, &ones, &sys).unwrap();
        assert_close(gap, 0.0, 1e-9);
    }

    #[test]
    fn mr_norm_dominates_sup_norm_on_partition() {
        let sys = IntervalSystem::new(SystemKind::MPartition(2), 16).unwrap();
        let values: Vec<f64> = (0..16).map(|i| ((i * 37 + 5) % 11) as f64 - 5.0).collect();
        let s = sig(&values);
        let mr = mr_norm(&s, &sys).unwrap();
        let sup = s.lq_norm(f64::INFINITY).unwrap();
        assert!(mr >= sup - 1e-12);
    }

    #[test]
    fn system_monotonicity_on_power_of_two_grid() {
        let n = 32;
        let all = IntervalSystem::new(SystemKind::AllIntervals, n).unwrap();
        let dyadic = IntervalSystem::new(SystemKind::DyadicLengths, n).unwrap();
        let part = IntervalSystem::new(SystemKind::MPartition(2), n).unwrap();
        // containment: partition intervals are dyadic-length intervals, which
        // are grid intervals
        let dyadic_set: std::collections::HashSet<_> =
            dyadic.iter().map(|iv| (iv.start, iv.len)).collect();
        for iv in part.iter() {
            assert!(dyadic_set.contains(&(iv.start, iv.len)));
        }
        let values: Vec<f64> = (0..n).map(|i| ((i * 13 + 3) % 17) as f64 / 7.0 - 1.0).collect();
        let s = sig(&values);
        let a = mr_norm(&s, &all).unwrap();
        let d = mr_norm(&s, &dyadic).unwrap();
        let p = mr_norm(&s, &part).unwrap();
        assert!(a >= d - 1e-12);
        assert!(d >= p - 1e-12);
    }

    #[test]
    fn normality_constant_exhaustive() {
        // every grid interval contains a stored interval of comparable size:
        // c = 2 for dyadic lengths, c = 2m for the m-partition system
        let n = 64;
        for (sys, c) in [
            (IntervalSystem::new(SystemKind::DyadicLengths, n).unwrap(), 2.0),
            (IntervalSystem::new(SystemKind::MPartition(2), n).unwrap(), 4.0),
            (IntervalSystem::new(SystemKind::MPartition(3), n).unwrap(), 6.0),
        ] {
            let stored: Vec<Interval> = sys.iter().collect();
            for start in 0..n {
                for len in 1..=(n - start) {
                    let found = stored.iter().any(|iv| {
                        iv.start as usize >= start
                            && iv.start as usize + (iv.len as usize) <= start + len
                            && (iv.len as f64) >= len as f64 / c
                    });
                    assert!(found, "kind {:?}: no c={c} sub-interval of [{start},{})", sys.kind(), start + len);
                }
            }
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let sys = IntervalSystem::new(SystemKind::MPartition(3), 27).unwrap();
        let d = sys.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        let back: SystemDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.kind, "partition");
        assert_eq!(back.m, Some(3));
        assert_eq!(back.n, 27);
        assert_eq!(back.count, sys.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn seminorm_axioms(values_a in proptest::collection::vec(-5.0f64..5.0, 8),
                           values_b in proptest::collection::vec(-5.0f64..5.0, 8),
                           lambda in -3.0f64..3.0) {
            let sys = IntervalSystem::new(SystemKind::AllIntervals, 8).unwrap();
            let a = sig(&values_a);
            let b = sig(&values_b);
            let scaled: Vec<f64> = values_a.iter().map(|v| lambda * v).collect();
            let sum: Vec<f64> = values_a.iter().zip(&values_b).map(|(x, y)| x + y).collect();
            let na = mr_norm(&a, &sys).unwrap();
            let nb = mr_norm(&b, &sys).unwrap();
            let nscaled = mr_norm(&sig(&scaled), &sys).unwrap();
            let nsum = mr_norm(&sig(&sum), &sys).unwrap();
            prop_assert!((nscaled - lambda.abs() * na).abs() < 1e-10);
            prop_assert!(nsum <= na + nb + 1e-10);
        }

        #[test]
        fn hoelder_pairing_with_lp_oracle(
            s_values in proptest::collection::vec(-2.0f64..2.0, 8),
            w_values in proptest::collection::vec(-2.0f64..2.0, 8)) {
            let sys = IntervalSystem::new(SystemKind::MPartition(2), 8).unwrap();
            let s = sig(&s_values);
            let w = sig(&w_values);
            let gap = duality_gap(&s, &w, &sys).unwrap();
            prop_assert!(gap <= 1e-8, "positive duality gap {gap}");
        }
    }
}
