//! Detection-tree construction and the four tree-search detectors.
//!
//! After QR preprocessing the ML problem becomes a shortest-path search on a
//! tree of depth `t`: a node at depth `k` fixes the symbols `x_t .. x_{t-k+1}`
//! and carries the accumulated sum of branch metrics
//! `m_i = |xi_i - R_{i,i} x_i - sum_{j>i} R_{i,j} x_j|^2` along its path.
//! The detectors differ only in how they walk this tree:
//!
//! - brute force: full depth-first enumeration (exact ML);
//! - QRD-MLD: breadth-first, keeping the `M` best nodes per depth;
//! - improved QRD-MLD: additionally drops nodes above the per-depth threshold
//!   `E_min + X * phi^2` before the M-selection;
//! - Dijkstra with bounded list: best-first, with the candidate list
//!   truncated to the `L` smallest metrics after every expansion (the
//!   unbounded variant never truncates and is exact).
//!
//! All metric arithmetic and all metric comparisons run through
//! [`OpCounters`], including every comparison made by the quick sort used for
//! node selection.

use crate::constellation::Constellation;
use crate::linalg::{Complex, ComplexMatrix, ComplexVector, OpCounters};
use thiserror::Error;

/// Enumeration guard for the exhaustive detector.
pub const BRUTE_FORCE_LIMIT: f64 = (1u64 << 24) as f64;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("instance too large to enumerate: |S|^t = {size}")]
    InstanceTooLarge { size: f64 },
    #[error("candidate list exhausted before {wanted} outputs (got {got}); increase L")]
    SearchExhausted { wanted: usize, got: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

/// The post-QR detection instance: upper triangular `R`, rotated receive
/// vector `xi = Q* y` (length `t`), and the symbol alphabet.
#[derive(Debug, Clone)]
pub struct DetectionProblem<'a> {
    pub r_mat: &'a ComplexMatrix,
    pub xi: ComplexVector,
    pub constellation: &'a Constellation,
    pub t: usize,
}

/// A partial decision in the detection tree. `symbols[k]` is the
/// constellation index chosen for `x_{t-k}`, so depth equals the number of
/// fixed symbols. `seq` is the insertion sequence number used to break metric
/// ties deterministically.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub depth: usize,
    pub symbols: Vec<u16>,
    pub metric: f64,
    pub seq: u64,
}

impl SearchNode {
    pub fn root() -> Self {
        Self {
            depth: 0,
            symbols: Vec::new(),
            metric: 0.0,
            seq: 0,
        }
    }

    /// Symbol vector `(x_1, .., x_t)` for a bottom-depth node.
    pub fn to_vector(&self, c: &Constellation) -> ComplexVector {
        let t = self.symbols.len();
        ComplexVector::from(
            (0..t)
                .map(|pos| c.point(self.symbols[t - 1 - pos] as usize))
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    BruteForceML,
    QrdMld,
    QrdMldImproved,
    DijkstraBounded,
    DijkstraUnbounded,
}

/// Parameters for one detector. `noise_variance` (phi^2) is consumed only by
/// the improved QRD-MLD threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub algorithm: Algorithm,
    pub m: usize,
    pub x: f64,
    pub l: usize,
    pub n: usize,
    pub noise_variance: f64,
}

impl DetectorConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            m: 16,
            x: 2.0,
            l: 16,
            n: 1,
            noise_variance: 1.0,
        }
    }

    fn validate(&self) -> Result<(), DetectError> {
        if self.m < 1 {
            return Err(DetectError::InvalidConfig("M must be >= 1".into()));
        }
        if self.l < 1 {
            return Err(DetectError::InvalidConfig("L must be >= 1".into()));
        }
        if self.n < 1 {
            return Err(DetectError::InvalidConfig("N must be >= 1".into()));
        }
        if self.x < 0.0 {
            return Err(DetectError::InvalidConfig("X must be >= 0".into()));
        }
        if self.algorithm == Algorithm::QrdMldImproved && !(self.noise_variance > 0.0) {
            return Err(DetectError::InvalidConfig(
                "improved QRD-MLD needs noise_variance > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Detector output: the `N` best symbol vectors found (best first), their
/// accumulated metrics, and a snapshot of the counters after the detection.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub estimates: Vec<ComplexVector>,
    pub metrics: Vec<f64>,
    pub counters: OpCounters,
}

#[inline]
fn node_lt(am: f64, aseq: u64, bm: f64, bseq: u64) -> bool {
    (am, aseq) < (bm, bseq)
}

/// Hoare-partition quick sort on (metric, seq), last-element pivot. Every
/// pivot comparison is metered as one real-number comparison.
pub(crate) fn quicksort_nodes(v: &mut [SearchNode], ctx: &mut OpCounters) {
    let n = v.len();
    if n <= 1 {
        return;
    }
    v.swap(0, n - 1);
    let (pm, ps) = (v[0].metric, v[0].seq);
    let mut i: isize = -1;
    let mut j: isize = n as isize;
    loop {
        loop {
            i += 1;
            ctx.comparisons(1);
            let e = &v[i as usize];
            if !node_lt(e.metric, e.seq, pm, ps) {
                break;
            }
        }
        loop {
            j -= 1;
            ctx.comparisons(1);
            let e = &v[j as usize];
            if !node_lt(pm, ps, e.metric, e.seq) {
                break;
            }
        }
        if i >= j {
            break;
        }
        v.swap(i as usize, j as usize);
    }
    let split = (j + 1) as usize;
    let (left, right) = v.split_at_mut(split);
    quicksort_nodes(left, ctx);
    quicksort_nodes(right, ctx);
}

/// Interference of the already-fixed symbols on tree row `row`:
/// `sum_{j>row} R[row,j] * x_j`, one metered multiply per ancestor.
fn interference(
    problem: &DetectionProblem<'_>,
    node: &SearchNode,
    row: usize,
    ctx: &mut OpCounters,
) -> Complex {
    let mut acc = Complex::new(0.0, 0.0);
    for (k, &sym_idx) in node.symbols.iter().enumerate() {
        let col = problem.t - 1 - k;
        let s = problem.constellation.point(sym_idx as usize);
        acc += ctx.mul(problem.r_mat.get(row, col), s);
    }
    acc
}

/// Branch metric `m_i` for extending `parent` with `candidate_symbol`.
pub fn branch_metric(
    problem: &DetectionProblem<'_>,
    parent: &SearchNode,
    candidate_symbol: Complex,
    ctx: &mut OpCounters,
) -> f64 {
    let row = problem.t - 1 - parent.depth;
    let interf = interference(problem, parent, row, ctx);
    let diff =
        problem.xi[row] - interf - ctx.mul(problem.r_mat.get(row, row), candidate_symbol);
    ctx.norm_sqr(diff)
}

/// Generates all `|S|` children of `node`, counting `node` as one detection
/// node. The ancestor interference sum is computed once and shared across the
/// children; each child then costs one multiply plus one squared magnitude.
pub fn expand_node(
    problem: &DetectionProblem<'_>,
    node: &SearchNode,
    ctx: &mut OpCounters,
    next_seq: &mut u64,
) -> Vec<SearchNode> {
    debug_assert!(node.depth < problem.t);
    ctx.detection_node();
    let row = problem.t - 1 - node.depth;
    let interf = interference(problem, node, row, ctx);
    let base = problem.xi[row] - interf;
    let rii = problem.r_mat.get(row, row);
    let mut children = Vec::with_capacity(problem.constellation.len());
    for (idx, &s) in problem.constellation.points().iter().enumerate() {
        let diff = base - ctx.mul(rii, s);
        let m = ctx.norm_sqr(diff);
        let mut symbols = node.symbols.clone();
        symbols.push(idx as u16);
        *next_seq += 1;
        children.push(SearchNode {
            depth: node.depth + 1,
            symbols,
            metric: node.metric + m,
            seq: *next_seq,
        });
    }
    children
}

fn result_from(nodes: &[SearchNode], problem: &DetectionProblem<'_>, ctx: &OpCounters) -> DetectionResult {
    DetectionResult {
        estimates: nodes
            .iter()
            .map(|n| n.to_vector(problem.constellation))
            .collect(),
        metrics: nodes.iter().map(|n| n.metric).collect(),
        counters: ctx.clone(),
    }
}

/// Keeps `cand` in the sorted top-`n` buffer if it beats the current worst.
/// Ties keep the earlier-found candidate, so with depth-first enumeration in
/// constellation-index order the tie-break is the lexicographic first.
fn offer_best(best: &mut Vec<SearchNode>, cand: SearchNode, n: usize, ctx: &mut OpCounters) {
    if best.len() == n {
        ctx.comparisons(1);
        if cand.metric >= best[n - 1].metric {
            return;
        }
        best.pop();
    }
    let mut i = best.len();
    while i > 0 {
        ctx.comparisons(1);
        if cand.metric < best[i - 1].metric {
            i -= 1;
        } else {
            break;
        }
    }
    best.insert(i, cand);
}

/// Exhaustive minimization of the post-QR objective over `S^t` (exact ML).
pub fn detect_bruteforce(
    problem: &DetectionProblem<'_>,
    n: usize,
    ctx: &mut OpCounters,
) -> Result<DetectionResult, DetectError> {
    let size = (problem.constellation.len() as f64).powi(problem.t as i32);
    if size > BRUTE_FORCE_LIMIT {
        return Err(DetectError::InstanceTooLarge { size });
    }
    let mut next_seq = 0u64;
    let mut best: Vec<SearchNode> = Vec::with_capacity(n);
    let mut stack = vec![SearchNode::root()];
    while let Some(node) = stack.pop() {
        if node.depth == problem.t {
            offer_best(&mut best, node, n, ctx);
        } else {
            let children = expand_node(problem, &node, ctx, &mut next_seq);
            stack.extend(children.into_iter().rev());
        }
    }
    Ok(result_from(&best, problem, ctx))
}

fn qrd_mld_inner(
    problem: &DetectionProblem<'_>,
    m: usize,
    threshold: Option<(f64, f64)>,
    n: usize,
    ctx: &mut OpCounters,
    mut trace: Option<&mut Vec<Vec<Vec<u16>>>>,
) -> DetectionResult {
    let t = problem.t;
    let mut next_seq = 0u64;
    let root = SearchNode::root();
    let mut level = expand_node(problem, &root, ctx, &mut next_seq);
    for depth in 1..=t {
        if let Some((x, phi2)) = threshold {
            let mut e_min = level[0].metric;
            for node in &level[1..] {
                ctx.comparisons(1);
                if node.metric < e_min {
                    e_min = node.metric;
                }
            }
            let delta = e_min + x * phi2;
            level.retain(|node| {
                ctx.comparisons(1);
                node.metric <= delta
            });
        }
        quicksort_nodes(&mut level, ctx);
        level.truncate(m);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(level.iter().map(|node| node.symbols.clone()).collect());
        }
        if depth == t {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * problem.constellation.len());
        for node in &level {
            next.extend(expand_node(problem, node, ctx, &mut next_seq));
        }
        level = next;
    }
    let keep = n.min(level.len());
    result_from(&level[..keep], problem, ctx)
}

/// Breadth-first M-algorithm: at each depth the `M` best nodes survive
/// (selected by the metered quick sort) and are expanded.
pub fn detect_qrd_mld(
    problem: &DetectionProblem<'_>,
    cfg: &DetectorConfig,
    ctx: &mut OpCounters,
) -> DetectionResult {
    qrd_mld_inner(problem, cfg.m, None, cfg.n, ctx, None)
}

/// QRD-MLD with the per-depth threshold `Delta_i = E_{i,min} + X * phi^2`
/// applied before the M-selection. `E_{i,min}` is taken over all children
/// generated at the depth, before any pruning.
pub fn detect_qrd_mld_improved(
    problem: &DetectionProblem<'_>,
    cfg: &DetectorConfig,
    ctx: &mut OpCounters,
) -> DetectionResult {
    qrd_mld_inner(
        problem,
        cfg.m,
        Some((cfg.x, cfg.noise_variance)),
        cfg.n,
        ctx,
        None,
    )
}

/// Variant of [`detect_qrd_mld`] that also records the survivor symbol sets
/// per depth, for equivalence checks between the two QRD-MLD variants.
pub fn detect_qrd_mld_traced(
    problem: &DetectionProblem<'_>,
    cfg: &DetectorConfig,
    threshold: bool,
    ctx: &mut OpCounters,
) -> (DetectionResult, Vec<Vec<Vec<u16>>>) {
    let mut trace = Vec::new();
    let th = if threshold {
        Some((cfg.x, cfg.noise_variance))
    } else {
        None
    };
    let res = qrd_mld_inner(problem, cfg.m, th, cfg.n, ctx, Some(&mut trace));
    (res, trace)
}

fn dijkstra_inner(
    problem: &DetectionProblem<'_>,
    l: usize,
    n: usize,
    ctx: &mut OpCounters,
) -> Result<DetectionResult, DetectError> {
    let t = problem.t;
    let mut next_seq = 0u64;
    let root = SearchNode::root();
    let mut list = expand_node(problem, &root, ctx, &mut next_seq);
    quicksort_nodes(&mut list, ctx);
    if list.len() > l {
        list.truncate(l);
    }
    let mut emitted: Vec<SearchNode> = Vec::with_capacity(n);
    while emitted.len() < n {
        if list.is_empty() {
            return Err(DetectError::SearchExhausted {
                wanted: n,
                got: emitted.len(),
            });
        }
        // Select the list minimum (metered scan) and remove it.
        let mut best = 0usize;
        for i in 1..list.len() {
            ctx.comparisons(1);
            if node_lt(
                list[i].metric,
                list[i].seq,
                list[best].metric,
                list[best].seq,
            ) {
                best = i;
            }
        }
        let a = list.remove(best);
        if a.depth == t {
            emitted.push(a);
            continue;
        }
        list.extend(expand_node(problem, &a, ctx, &mut next_seq));
        quicksort_nodes(&mut list, ctx);
        if list.len() > l {
            list.truncate(l);
        }
    }
    Ok(result_from(&emitted, problem, ctx))
}

/// Best-first search whose candidate list keeps only the `L` nodes with the
/// smallest accumulated metrics after each expansion. Emits bottom-depth
/// nodes in nondecreasing metric order until `N` outputs are produced.
pub fn detect_dijkstra_bounded(
    problem: &DetectionProblem<'_>,
    cfg: &DetectorConfig,
    ctx: &mut OpCounters,
) -> Result<DetectionResult, DetectError> {
    dijkstra_inner(problem, cfg.l, cfg.n, ctx)
}

/// Best-first search with an unlimited list: exact ML, and its `N` outputs
/// are the true `N` smallest objective values.
pub fn detect_dijkstra_unbounded(
    problem: &DetectionProblem<'_>,
    n: usize,
    ctx: &mut OpCounters,
) -> Result<DetectionResult, DetectError> {
    dijkstra_inner(problem, usize::MAX, n, ctx)
}

/// Runs the detector selected by `cfg.algorithm`.
pub fn detect(
    problem: &DetectionProblem<'_>,
    cfg: &DetectorConfig,
    ctx: &mut OpCounters,
) -> Result<DetectionResult, DetectError> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::BruteForceML => detect_bruteforce(problem, cfg.n, ctx),
        Algorithm::QrdMld => Ok(detect_qrd_mld(problem, cfg, ctx)),
        Algorithm::QrdMldImproved => Ok(detect_qrd_mld_improved(problem, cfg, ctx)),
        Algorithm::DijkstraBounded => detect_dijkstra_bounded(problem, cfg, ctx),
        Algorithm::DijkstraUnbounded => detect_dijkstra_unbounded(problem, cfg.n, ctx),
    }
}

/// Post-QR objective `sum_j |xi_j - sum_{i>=j} R[j,i] x_i|^2`, computed from
/// scratch and unmetered. Used to re-score emitted estimates.
pub fn objective_after_qr(r_mat: &ComplexMatrix, xi: &ComplexVector, x: &ComplexVector) -> f64 {
    let t = x.len();
    let mut total = 0.0;
    for j in 0..t {
        let mut acc = xi[j];
        for i in j..t {
            acc -= r_mat.get(j, i) * x[i];
        }
        total += acc.norm_sqr();
    }
    total
}

/// Pre-QR objective `||y - Hx||^2`, the detection criterion in its original
/// form. Independent of the QR path; used as an oracle.
pub fn objective_pre_qr(h: &ComplexMatrix, y: &ComplexVector, x: &ComplexVector) -> f64 {
    let hx = h.mul_vec(x).expect("dimension mismatch in objective_pre_qr");
    let mut total = 0.0;
    for i in 0..y.len() {
        total += (y[i] - hx[i]).norm_sqr();
    }
    total
}
