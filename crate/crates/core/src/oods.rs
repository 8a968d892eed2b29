//! Concave maximisation over the simplex with on-demand observability.
//!
//! An algorithm may only query the first-order oracle at weights inside the
//! observable region of its current cap vector. Raising the cap starts a new
//! round; the sum of the final cap is the sample overhead. [`lazy_hedge_oods`]
//! runs Hedge on supergradients and raises the cap only when the iterate
//! leaves the region.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hedge::{hedge_step, regret_certificate, HedgeHistory, SimplexWeights};

/// Slack allowed on the ellipsoid membership test.
pub const ELLIPSOID_TOL: f64 = 1e-12;

/// Tolerance used when locating the active term of a min-of-affine objective.
pub const ACTIVE_TOL: f64 = 1e-12;

/// Entrywise bound on the observable weights, in `[0, 1]^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapVector(Vec<f64>);

impl CapVector {
    pub fn new(caps: Vec<f64>) -> Result<Self> {
        if caps.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter("caps must lie in [0, 1]".into()));
        }
        Ok(CapVector(caps))
    }

    pub fn zeros(k: usize) -> Self {
        CapVector(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `self >= other` entrywise.
    pub fn dominates(&self, other: &CapVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// `w_i <= cap_i` for every `i`.
    Box,
    /// `Σ w_i² / cap_i <= 1`.
    Ellipsoid,
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegionKind::Box => "box",
            RegionKind::Ellipsoid => "ellipsoid",
        })
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(RegionKind::Box),
            "ellipsoid" => Ok(RegionKind::Ellipsoid),
            _ => Err(Error::InvalidParameter(format!("unknown region {s:?}"))),
        }
    }
}

/// `Σ w_i² / cap_i`, with `0 / 0 = 0` and `x / 0 = ∞` for `x > 0`.
pub fn ellipsoid_norm(cap: &CapVector, w: &SimplexWeights) -> f64 {
    w.as_slice()
        .iter()
        .zip(cap.as_slice())
        .map(|(&wi, &ci)| {
            if wi == 0.0 {
                0.0
            } else if ci == 0.0 {
                f64::INFINITY
            } else {
                wi * wi / ci
            }
        })
        .sum()
}

pub fn region_contains(kind: RegionKind, cap: &CapVector, w: &SimplexWeights) -> bool {
    if cap.len() != w.len() {
        return false;
    }
    match kind {
        RegionKind::Box => w.as_slice().iter().zip(cap.as_slice()).all(|(wi, ci)| wi <= ci),
        RegionKind::Ellipsoid => ellipsoid_norm(cap, w) <= 1.0 + ELLIPSOID_TOL,
    }
}

fn check_margin(c: f64) -> Result<()> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("margin C must exceed 1, got {c}")));
    }
    Ok(())
}

fn cap_from_max(max: &[f64], c: f64) -> CapVector {
    CapVector(max.iter().map(|m| (c * m).min(1.0)).collect())
}

/// `cap_i = min(1, C · max_t w_i^{(t)})`.
pub fn lift_cap(history: &[SimplexWeights], c: f64) -> Result<CapVector> {
    check_margin(c)?;
    if history.is_empty() {
        return Err(Error::Malformed("empty weight history".into()));
    }
    Ok(cap_from_max(&crate::hedge::running_max(history), c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub value: f64,
    pub supergradient: Vec<f64>,
    /// Position (0-based) of the term attaining the minimum, where defined.
    pub active_index: Option<usize>,
}

/// Value and supergradient of a concave objective on the simplex.
pub trait FirstOrderOracle {
    fn dim(&self) -> usize;

    fn query(&self, w: &SimplexWeights) -> OracleResponse;

    fn value(&self, w: &SimplexWeights) -> f64 {
        self.query(w).value
    }
}

/// `f(w) = min_j (a_j · <g_j, w> + b_j)` stored as explicit affine pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinOfAffine {
    pub gradients: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl MinOfAffine {
    pub fn new(gradients: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if gradients.is_empty() || gradients.len() != offsets.len() {
            return Err(Error::InvalidParameter("need one offset per affine piece".into()));
        }
        let k = gradients[0].len();
        if gradients.iter().any(|g| g.len() != k) {
            return Err(Error::InvalidParameter("ragged gradients".into()));
        }
        Ok(MinOfAffine { gradients, offsets })
    }

    /// `n` pieces with gradients and offsets uniform in `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Self> {
        let gradients = (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
        let offsets = (0..n).map(|_| rng.random::<f64>()).collect();
        Self::new(gradients, offsets)
    }

    fn piece(&self, j: usize, w: &[f64]) -> f64 {
        self.gradients[j].iter().zip(w).map(|(g, x)| g * x).sum::<f64>() + self.offsets[j]
    }

    /// Maximum over the simplex by enumerating vertices of the epigraph LP
    /// `max t s.t. t <= piece_j(w), Σ w = 1, w >= 0`.
    pub fn maximum(&self) -> Result<f64> {
        let k = self.gradients[0].len();
        let n = self.gradients.len();
        // Rows: n piece constraints, then k nonnegativity constraints.
        let total = n + k;
        if total > 24 {
            return Err(Error::InvalidParameter(
                "vertex enumeration limited to 24 constraints".into(),
            ));
        }
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != k {
                continue;
            }
            // Unknowns (w_1..w_k, t); equations: Σ w = 1 plus k active rows.
            let mut a = vec![vec![0.0; k + 2]; k + 1];
            a[0][..k].fill(1.0);
            a[0][k + 1] = 1.0;
            let mut row = 1;
            for c in 0..total {
                if mask >> c & 1 == 0 {
                    continue;
                }
                if c < n {
                    for i in 0..k {
                        a[row][i] = self.gradients[c][i];
                    }
                    a[row][k] = -1.0;
                    a[row][k + 1] = -self.offsets[c];
                } else {
                    a[row][c - n] = 1.0;
                }
                row += 1;
            }
            let Some(x) = solve_dense(a) else { continue };
            let w = &x[..k];
            let t = x[k];
            if w.iter().any(|&wi| wi < -1e-9) {
                continue;
            }
            if (0..n).any(|j| self.piece(j, w) < t - 1e-9) {
                continue;
            }
            best = best.max(t);
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::Inconclusive("no feasible vertex found".into()));
        }
        Ok(best)
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

impl FirstOrderOracle for MinOfAffine {
    fn dim(&self) -> usize {
        self.gradients[0].len()
    }

    fn query(&self, w: &SimplexWeights) -> OracleResponse {
        let vals: Vec<f64> = (0..self.gradients.len()).map(|j| self.piece(j, w.as_slice())).collect();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let j = vals.iter().position(|&v| v <= min + ACTIVE_TOL).unwrap();
        OracleResponse {
            value: vals[j],
            supergradient: self.gradients[j].clone(),
            active_index: Some(j),
        }
    }
}

/// A constant-gradient linear objective `f(w) = <g, w>`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOracle(pub Vec<f64>);

impl FirstOrderOracle for LinearOracle {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn query(&self, w: &SimplexWeights) -> OracleResponse {
        OracleResponse {
            value: w.dot(&self.0),
            supergradient: self.0.clone(),
            active_index: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialKind {
    /// `f(w) = min_j (w_{i_j} + j/m²)`.
    LargeEps,
    /// `f(w) = min_j (2^{-j} w_{i_j} + (1 − 2^{-j})/m)`.
    SmallEps,
}

impl std::fmt::Display for AdversarialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AdversarialKind::LargeEps => "large_eps",
            AdversarialKind::SmallEps => "small_eps",
        })
    }
}

impl std::str::FromStr for AdversarialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "large_eps" => Ok(AdversarialKind::LargeEps),
            "small_eps" => Ok(AdversarialKind::SmallEps),
            _ => Err(Error::InvalidParameter(format!("unknown instance kind {s:?}"))),
        }
    }
}

/// Min of `m` affine terms, each reading a single hidden critical index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialInstance {
    pub kind: AdversarialKind,
    pub k: usize,
    pub m: usize,
    pub critical: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl AdversarialInstance {
    pub fn new(kind: AdversarialKind, k: usize, critical: Vec<usize>) -> Result<Self> {
        let m = critical.len();
        if m == 0 || m > k {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= m <= k, got m = {m}, k = {k}"
            )));
        }
        let mut seen = vec![false; k];
        for &i in &critical {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(
                    "critical indices must be distinct and < k".into(),
                ));
            }
        }
        let mf = m as f64;
        let (a, b) = match kind {
            AdversarialKind::LargeEps => (vec![1.0; m], (1..=m).map(|j| j as f64 / (mf * mf)).collect()),
            AdversarialKind::SmallEps => (
                (1..=m).map(|j| 0.5f64.powi(j as i32)).collect(),
                (1..=m).map(|j| (1.0 - 0.5f64.powi(j as i32)) / mf).collect(),
            ),
        };
        Ok(AdversarialInstance {
            kind,
            k,
            m,
            critical,
            a,
            b,
        })
    }

    /// Term `j` (0-based) at `w`.
    pub fn term(&self, j: usize, w: &[f64]) -> f64 {
        self.a[j] * w[self.critical[j]] + self.b[j]
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        (0..self.m).map(|j| self.term(j, w)).fold(f64::INFINITY, f64::min)
    }

    /// `max_w f(w)`.
    pub fn optimum(&self) -> f64 {
        let m = self.m as f64;
        match self.kind {
            AdversarialKind::LargeEps => (3.0 * m + 1.0) / (2.0 * m * m),
            AdversarialKind::SmallEps => 1.0 / m,
        }
    }

    /// The closed-form maximiser: every term equal to the optimum.
    pub fn maximizer(&self) -> SimplexWeights {
        let mut w = vec![0.0; self.k];
        let m = self.m as f64;
        for (j, &i) in self.critical.iter().enumerate() {
            w[i] = match self.kind {
                AdversarialKind::LargeEps => (3.0 * m + 1.0) / (2.0 * m * m) - (j + 1) as f64 / (m * m),
                AdversarialKind::SmallEps => 1.0 / m,
            };
        }
        SimplexWeights::normalized(w).expect("closed-form maximiser is a distribution")
    }

    /// Weight below which a prefix entry pins the active term to the prefix.
    pub fn locality_threshold(&self) -> f64 {
        let m = self.m as f64;
        match self.kind {
            AdversarialKind::LargeEps => 1.0 / (m * m),
            AdversarialKind::SmallEps => 1.0 / (2.0 * m),
        }
    }

    /// Largest accuracy for which approximate maxima must be heavy on half
    /// of the critical indices.
    pub fn characterization_eps(&self) -> f64 {
        let k = self.k as f64;
        match self.kind {
            AdversarialKind::LargeEps => 1.0 / (2.0 * k),
            AdversarialKind::SmallEps => 2f64.powf(-(k + 1.0) / 2.0) / (2.0 * k),
        }
    }
}

/// Critical indices drawn uniformly without replacement.
pub fn make_adversarial<R: Rng + ?Sized>(
    kind: AdversarialKind,
    k: usize,
    m: usize,
    rng: &mut R,
) -> Result<AdversarialInstance> {
    if m == 0 || m > k {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= k, got m = {m}, k = {k}"
        )));
    }
    AdversarialInstance::new(kind, k, sample_indices(rng, k, m).into_vec())
}

/// Oracle reporting the first term attaining the minimum, and `a_j e_{i_j}`.
pub fn adversarial_query(inst: &AdversarialInstance, w: &SimplexWeights) -> OracleResponse {
    let terms: Vec<f64> = (0..inst.m).map(|j| inst.term(j, w.as_slice())).collect();
    let min = terms.iter().copied().fold(f64::INFINITY, f64::min);
    let j = terms.iter().position(|&t| t <= min + ACTIVE_TOL).unwrap();
    let mut g = vec![0.0; inst.k];
    g[inst.critical[j]] = inst.a[j];
    OracleResponse {
        value: terms[j],
        supergradient: g,
        active_index: Some(j),
    }
}

impl FirstOrderOracle for AdversarialInstance {
    fn dim(&self) -> usize {
        self.k
    }

    fn query(&self, w: &SimplexWeights) -> OracleResponse {
        adversarial_query(self, w)
    }
}

/// Calls `visit` on every `k`-part composition of `n`.
fn for_each_composition(k: usize, n: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(parts: &mut Vec<usize>, k: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
        if parts.len() + 1 == k {
            parts.push(left);
            visit(parts);
            parts.pop();
            return;
        }
        for x in 0..=left {
            parts.push(x);
            rec(parts, k, left - x, visit);
            parts.pop();
        }
    }
    if k > 0 {
        rec(&mut Vec::with_capacity(k), k, n, visit);
    }
}

/// Exhaustive check on the simplex grid of step `1/grid_resolution` that
/// every `eps`-approximate maximiser puts weight `>= 1/(2m)` on at least
/// half of the critical indices.
///
/// Points count as approximate maxima with a `1e-12` allowance, which can
/// only add points to the check. Returns `Ok(false)` on a counterexample.
pub fn verify_approx_max_characterization(
    inst: &AdversarialInstance,
    eps: f64,
    grid_resolution: usize,
) -> Result<bool> {
    if inst.k > 8 || inst.m > 3 {
        return Err(Error::InvalidParameter("brute force needs k <= 8 and m <= 3".into()));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    if eps > inst.characterization_eps() {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} exceeds {} where the characterization applies",
            inst.characterization_eps()
        )));
    }
    let n = grid_resolution;
    let threshold = inst.optimum() - eps - 1e-12;
    let mut near = 0u64;
    let mut ok = true;
    let mut w = vec![0.0; inst.k];
    for_each_composition(inst.k, n, &mut |parts| {
        for (wi, &p) in w.iter_mut().zip(parts) {
            *wi = p as f64 / n as f64;
        }
        if inst.eval(&w) >= threshold {
            near += 1;
            // w_i >= 1/(2m)  <=>  2 m p_i >= n.
            let heavy = inst.critical.iter().filter(|&&i| 2 * inst.m * parts[i] >= n).count();
            if 2 * heavy < inst.m {
                ok = false;
            }
        }
    });
    if near == 0 {
        return Err(Error::Inconclusive(format!(
            "grid of step 1/{n} contains no approximate maximiser"
        )));
    }
    Ok(ok)
}

/// Randomised check that the oracle response ignores critical indices past
/// any prefix containing a light entry.
///
/// Each trial picks a level `j`, draws `w` with some prefix entry below the
/// locality threshold, then redraws the suffix `i_{j+1..m}` `resamples`
/// times and compares responses.
pub fn verify_oracle_locality<R: Rng + ?Sized>(
    inst: &AdversarialInstance,
    trials: usize,
    resamples: usize,
    rng: &mut R,
) -> bool {
    let k = inst.k;
    let m = inst.m;
    for _ in 0..trials {
        let j = rng.random_range(1..=m);
        let light = rng.random_range(0..j);
        let mut raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
        let pinned = inst.critical[light];
        let cap = inst.locality_threshold() * rng.random::<f64>();
        raw[pinned] = 0.0;
        let rest: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / rest * (1.0 - cap)).collect();
        w[pinned] = cap;
        let Ok(w) = SimplexWeights::new(w) else {
            return false;
        };
        let base = adversarial_query(inst, &w);
        let prefix = &inst.critical[..j];
        let free: Vec<usize> = (0..k).filter(|i| !prefix.contains(i)).collect();
        for _ in 0..resamples {
            let mut critical = prefix.to_vec();
            critical.extend(sample_indices(rng, free.len(), m - j).into_iter().map(|x| free[x]));
            let other = AdversarialInstance::new(inst.kind, k, critical).expect("valid resample");
            if adversarial_query(&other, &w) != base {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LazyHedgeConfig {
    /// `T = ceil(c_t ln k / ε²)`.
    pub c_t: f64,
    /// `η = c_eta ε`.
    pub c_eta: f64,
    /// Cap margin `C > 1`.
    pub c: f64,
}

impl Default for LazyHedgeConfig {
    fn default() -> Self {
        LazyHedgeConfig {
            c_t: 4.0,
            c_eta: 1.0,
            c: 2.0,
        }
    }
}

impl LazyHedgeConfig {
    pub fn horizon(&self, k: usize, eps: f64) -> usize {
        ((self.c_t * (k as f64).ln() / (eps * eps)).ceil() as usize).max(1)
    }

    pub fn eta(&self, eps: f64) -> f64 {
        self.c_eta * eps
    }

    pub(crate) fn validate(&self, k: usize, eps: f64) -> Result<()> {
        check_margin(self.c)?;
        if k == 0 {
            return Err(Error::InvalidParameter("need k >= 1".into()));
        }
        if !(eps > 0.0 && eps < 1.0) || !(self.c_t > 0.0) || !(self.c_eta > 0.0) {
            return Err(Error::InvalidParameter(
                "need eps in (0, 1) and positive constants".into(),
            ));
        }
        Ok(())
    }
}

/// One cap update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapUpdate {
    /// 1-based iteration at which the update happened.
    pub iteration: usize,
    pub cap: CapVector,
    /// Box setting: smallest index whose weight exceeded its previous cap.
    pub culprit: Option<usize>,
}

/// Cap schedule driven by the iterates: raises the cap to
/// `min(1, C · running max)` whenever the iterate leaves the region.
#[derive(Clone, Debug)]
pub struct LazyCap {
    kind: RegionKind,
    c: f64,
    cap: CapVector,
    running_max: Vec<f64>,
    updates: Vec<CapUpdate>,
    iteration: usize,
}

impl LazyCap {
    pub fn new(kind: RegionKind, k: usize, c: f64) -> Result<Self> {
        check_margin(c)?;
        Ok(LazyCap {
            kind,
            c,
            cap: CapVector::zeros(k),
            running_max: vec![0.0; k],
            updates: Vec::new(),
            iteration: 0,
        })
    }

    /// Feeds the next iterate; returns the new cap if it had to be raised.
    pub fn observe(&mut self, w: &SimplexWeights) -> Result<Option<&CapVector>> {
        self.iteration += 1;
        for (m, &wi) in self.running_max.iter_mut().zip(w.as_slice()) {
            *m = m.max(wi);
        }
        let mut raised = false;
        if !region_contains(self.kind, &self.cap, w) {
            let culprit = match self.kind {
                RegionKind::Box => w
                    .as_slice()
                    .iter()
                    .zip(self.cap.as_slice())
                    .position(|(wi, ci)| wi > ci),
                RegionKind::Ellipsoid => None,
            };
            let next = cap_from_max(&self.running_max, self.c);
            assert!(next.dominates(&self.cap), "cap decreased");
            self.cap = next;
            self.updates.push(CapUpdate {
                iteration: self.iteration,
                cap: self.cap.clone(),
                culprit,
            });
            raised = true;
        }
        if !region_contains(self.kind, &self.cap, w) {
            return Err(Error::QueryOutsideRegion {
                iteration: self.iteration,
            });
        }
        Ok(raised.then_some(&self.cap))
    }

    pub fn cap(&self) -> &CapVector {
        &self.cap
    }

    pub fn updates(&self) -> &[CapUpdate] {
        &self.updates
    }

    pub fn running_max(&self) -> &[f64] {
        &self.running_max
    }

    pub fn rounds(&self) -> usize {
        self.updates.len()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OodsRun {
    pub w_hat: SimplexWeights,
    pub rounds: usize,
    /// `Σ_i` of the final cap.
    pub overhead: f64,
    /// `Σ_i max_t w_i^{(t)}`.
    pub trajectory_sum_max: f64,
    pub history: HedgeHistory,
    pub cap_updates: Vec<CapUpdate>,
    pub horizon: usize,
    pub eta: f64,
}

impl OodsRun {
    pub fn final_cap(&self) -> &CapVector {
        &self.cap_updates.last().expect("at least one cap update").cap
    }

    /// `overhead <= C · Σ_i max_t w_i`.
    pub fn overhead_bound_holds(&self, c: f64) -> bool {
        self.overhead <= c * self.trajectory_sum_max * (1.0 + 1e-12)
    }

    /// Caps never decrease between updates.
    pub fn caps_monotone(&self) -> bool {
        self.cap_updates.windows(2).all(|p| p[1].cap.dominates(&p[0].cap))
    }

    /// Every iterate lies in the region of the cap in force when it was
    /// queried.
    pub fn queries_legal(&self, kind: RegionKind) -> bool {
        let mut u = 0;
        self.history.weights.iter().enumerate().all(|(t, w)| {
            while u + 1 < self.cap_updates.len() && self.cap_updates[u + 1].iteration <= t + 1 {
                u += 1;
            }
            self.cap_updates[u].iteration <= t + 1 && region_contains(kind, &self.cap_updates[u].cap, w)
        })
    }

    /// Number of times each index was the box culprit.
    pub fn culprit_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.w_hat.len()];
        for u in &self.cap_updates {
            if let Some(i) = u.culprit {
                c[i] += 1;
            }
        }
        c
    }

    pub fn regret_slack(&self) -> Result<f64> {
        regret_certificate(&self.history)
    }
}

/// Hedge on oracle supergradients with lazily raised caps.
pub fn lazy_hedge_oods<O: FirstOrderOracle + ?Sized>(
    oracle: &O,
    eps: f64,
    kind: RegionKind,
    cfg: &LazyHedgeConfig,
) -> Result<OodsRun> {
    let k = oracle.dim();
    cfg.validate(k, eps)?;
    let horizon = cfg.horizon(k, eps);
    let eta = cfg.eta(eps);
    let mut caps = LazyCap::new(kind, k, cfg.c)?;
    let mut history = HedgeHistory::new(eta);
    let mut w = SimplexWeights::uniform(k);
    let mut sum = vec![0.0; k];
    for _ in 0..horizon {
        caps.observe(&w)?;
        let resp = oracle.query(&w);
        if resp.supergradient.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: resp.supergradient.len(),
            });
        }
        let next = hedge_step(&w, &resp.supergradient, eta)?;
        for (s, wi) in sum.iter_mut().zip(w.as_slice()) {
            *s += wi;
        }
        history.push(w, resp.supergradient);
        w = next;
    }
    let w_hat = SimplexWeights::normalized(sum)?;
    Ok(OodsRun {
        w_hat,
        rounds: caps.rounds(),
        overhead: caps.cap().sum(),
        trajectory_sum_max: caps.running_max().iter().sum(),
        history,
        cap_updates: caps.updates().to_vec(),
        horizon,
        eta,
    })
}

/// Smallest `n` with `C^n >= k`.
pub fn log_ceil(k: usize, c: f64) -> usize {
    let mut n = 0;
    let mut p = 1.0;
    while p * (1.0 + 1e-12) < k as f64 {
        p *= c;
        n += 1;
    }
    n
}

/// Per-index limit on box culprit events: `ceil(log_C k) + 1`.
pub fn culprit_limit(k: usize, c: f64) -> usize {
    log_ceil(k, c) + 1
}

/// `k · (ceil(log_C k) + 1)`.
pub fn box_round_ceiling(k: usize, c: f64) -> usize {
    k * culprit_limit(k, c)
}

/// `c_ell · sqrt(k / C) · ln^8(k / ε)`.
pub fn ellipsoid_round_threshold(c_ell: f64, k: usize, c: f64, eps: f64) -> f64 {
    c_ell * (k as f64 / c).sqrt() * (k as f64 / eps).ln().powi(8)
}

/// `min(k ceil(log_C k) + k, c_box (k / C) ln^9(k / ε))`.
pub fn box_round_threshold(c_box: f64, k: usize, c: f64, eps: f64) -> f64 {
    let combinatorial = (k * log_ceil(k, c) + k) as f64;
    combinatorial.min(c_box * (k as f64 / c) * (k as f64 / eps).ln().powi(9))
}
