//! Search for logarithmic integrals and the integrability-dimension scanner.
//!
//! Extending a derivation one order further means solving a linear system:
//! with all lower orders fixed, the next-order images enter the coefficient
//! of interest linearly, so candidates come from an affine solve against the
//! ideal's normal forms. [`find_log_integral`] runs that solve stage by
//! stage with backtracking over the solution cosets; [`max_log_integral`]
//! reports the deepest stage any branch reaches.
//!
//! Candidate images are cut down by a [`DegreePolicy`]. For a
//! weighted-homogeneous ideal and input the homogeneous policy is complete:
//! the graded part of any integral is again an integral, so a failed search
//! proves there is no integral at all. The capped policies are sound but
//! only exhaustive within their bounds.
//!
//! [`scan_leaps`] tabulates, degree by degree, the dimension of the space of
//! derivations that extend to each length, and reports the orders where the
//! dimension drops. [`SearchOracle`] and [`BridgingOracle`] package the
//! search as an [`IntegrationOracle`] for the pipelines in
//! [`crate::integrate`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::digits::BasePDigits;
use crate::hsd::{Derivation, HsDeriv, TruncSeries};
use crate::integrate::{self, IntegrationOracle, OracleError, PipelineTrace};
use crate::poly::{
    monomials_of_weighted_degree, monomials_up_to_weighted_degree, IdealPresentation, Monomial,
    Poly, WeightVector,
};
use crate::zpfield::{FpElem, FpMatrix};

/// Spans of this many vectors or fewer are enumerated exhaustively when
/// computing integrability dimensions; larger spans fall back to counting
/// basis vectors and are flagged in the table's anomaly list.
const SPAN_ENUM_CAP: u128 = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("the derivation to integrate does not map the ideal into itself")]
    NotLogarithmicInput,
}

/// Degree discipline for candidate images at each search stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreePolicy {
    /// Stage-n images for variable `i` are weighted homogeneous of degree
    /// `w_i + n*slope` (or zero). Complete when the ideal and the input are
    /// weighted homogeneous.
    HomogeneousSlope(i64),
    /// Stage-n images for variable `i` have weighted degree at most
    /// `w_i + n*slope`. Sound, exhaustive only within the bound.
    SlopeCap(i64),
    /// Every stage's images have weighted degree at most the cap.
    FixedCap(u64),
}

/// Resource limits for the backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    /// Maximum number of solution-coset representatives explored per stage
    /// visit before giving up on that branch.
    pub branch_cap: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { branch_cap: 4096 }
    }
}

/// Basis of the derivations of weighted degree `degree` that map the ideal
/// into itself, one candidate monomial space per variable. The result is
/// deterministic: candidates are ordered by variable then monomial, and the
/// kernel basis comes from the echelon form of the constraint matrix.
pub fn log_derivations(
    ideal: &IdealPresentation,
    weights: &WeightVector,
    degree: i64,
) -> Vec<Derivation> {
    let p = ideal.modulus();
    let nvars = ideal.nvars();
    let one = FpElem::new(1, p).expect("prime modulus");

    let mut cols: Vec<(usize, Monomial)> = Vec::new();
    for var in 0..nvars {
        let target = i64::from(weights.0[var]) + degree;
        if target < 0 {
            continue;
        }
        for m in monomials_of_weighted_degree(nvars, weights, target as u64) {
            cols.push((var, m));
        }
    }
    if cols.is_empty() {
        return Vec::new();
    }

    let gens = ideal.generators();
    let col_nfs: Vec<Vec<Poly>> = cols
        .iter()
        .map(|(var, m)| {
            gens.iter()
                .map(|g| ideal.normal_form(&g.partial(*var).mul_monomial(m, one)))
                .collect()
        })
        .collect();

    let mut row_keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for nfs in &col_nfs {
        for (k, nf) in nfs.iter().enumerate() {
            for (m, _) in nf.terms() {
                row_keys.insert((k, m.clone()));
            }
        }
    }
    let rows: Vec<(usize, Monomial)> = row_keys.into_iter().collect();

    let mut mat = FpMatrix::zeros(rows.len(), cols.len(), p).expect("prime modulus");
    for (r, (k, mono)) in rows.iter().enumerate() {
        for (c, nfs) in col_nfs.iter().enumerate() {
            let v = nfs[*k].coeff(mono);
            if !v.is_zero() {
                mat.set(r, c, v);
            }
        }
    }
    let zero = FpElem::new(0, p).expect("prime modulus");
    let (_, kernel) = mat.solve_affine(&vec![zero; rows.len()]);

    kernel
        .into_iter()
        .map(|coeffs| {
            let mut images = vec![Poly::zero(p, nvars); nvars];
            for ((var, m), c) in cols.iter().zip(&coeffs) {
                if !c.is_zero() {
                    images[*var] = images[*var].add(&Poly::term(*c, m.clone()));
                }
            }
            Derivation::new(images)
        })
        .collect()
}

/// Affine system for one search stage: candidate positions, a particular
/// solution, and a kernel basis spanning the solution coset.
struct StageSystem {
    cols: Vec<(usize, Monomial)>,
    particular: Vec<FpElem>,
    kernel: Vec<Vec<FpElem>>,
}

fn stage_candidates(
    nvars: usize,
    weights: &WeightVector,
    policy: DegreePolicy,
    stage: usize,
    var: usize,
) -> Vec<Monomial> {
    let base = i64::from(weights.0[var]);
    match policy {
        DegreePolicy::HomogeneousSlope(slope) => {
            let target = base + stage as i64 * slope;
            if target < 0 {
                Vec::new()
            } else {
                monomials_of_weighted_degree(nvars, weights, target as u64)
            }
        }
        DegreePolicy::SlopeCap(slope) => {
            let cap = base + stage as i64 * slope;
            if cap < 0 {
                Vec::new()
            } else {
                monomials_up_to_weighted_degree(nvars, weights, cap as u64)
            }
        }
        DegreePolicy::FixedCap(cap) => monomials_up_to_weighted_degree(nvars, weights, cap),
    }
}

/// Solves for the stage-`n` images given that all lower stages of `images`
/// are fixed and stage `n` is currently zero. Returns `None` when the stage
/// is obstructed.
fn solve_stage(
    images: &[TruncSeries],
    stage: usize,
    ideal: &IdealPresentation,
    weights: &WeightVector,
    policy: DegreePolicy,
) -> Option<StageSystem> {
    let p = ideal.modulus();
    let nvars = ideal.nvars();
    let one = FpElem::new(1, p).expect("prime modulus");
    let zero = FpElem::new(0, p).expect("prime modulus");

    let mut cols: Vec<(usize, Monomial)> = Vec::new();
    for var in 0..nvars {
        for m in stage_candidates(nvars, weights, policy, stage, var) {
            cols.push((var, m));
        }
    }

    let gens = ideal.generators();
    let knowns: Vec<Poly> = gens
        .iter()
        .map(|g| {
            let value = TruncSeries::eval_poly(g, images, stage);
            ideal.normal_form(value.coeff(stage))
        })
        .collect();
    let col_nfs: Vec<Vec<Poly>> = cols
        .iter()
        .map(|(var, m)| {
            gens.iter()
                .map(|g| ideal.normal_form(&g.partial(*var).mul_monomial(m, one)))
                .collect()
        })
        .collect();

    let mut row_keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for (k, nf) in knowns.iter().enumerate() {
        for (m, _) in nf.terms() {
            row_keys.insert((k, m.clone()));
        }
    }
    for nfs in &col_nfs {
        for (k, nf) in nfs.iter().enumerate() {
            for (m, _) in nf.terms() {
                row_keys.insert((k, m.clone()));
            }
        }
    }
    let rows: Vec<(usize, Monomial)> = row_keys.into_iter().collect();

    let mut mat = FpMatrix::zeros(rows.len(), cols.len(), p).expect("prime modulus");
    let mut rhs = vec![zero; rows.len()];
    for (r, (k, mono)) in rows.iter().enumerate() {
        rhs[r] = -knowns[*k].coeff(mono);
        for (c, nfs) in col_nfs.iter().enumerate() {
            let v = nfs[*k].coeff(mono);
            if !v.is_zero() {
                mat.set(r, c, v);
            }
        }
    }
    let (particular, kernel) = mat.solve_affine(&rhs);
    particular.map(|particular| StageSystem {
        cols,
        particular,
        kernel,
    })
}

/// Number of coset representatives to walk: `min(p^k, cap)`.
fn branch_count(kernel_dim: usize, p: u64, cap: usize) -> usize {
    let mut total: usize = 1;
    for _ in 0..kernel_dim {
        total = total.saturating_mul(p as usize);
        if total >= cap {
            return cap;
        }
    }
    total.min(cap)
}

/// Representative `index` of the solution coset, counting kernel
/// coefficients lexicographically with the last basis vector fastest.
fn coset_coeffs(system: &StageSystem, index: usize, p: u64) -> Vec<FpElem> {
    let mut out = system.particular.clone();
    let mut rem = index;
    for kv in system.kernel.iter().rev() {
        let digit = (rem % p as usize) as u64;
        rem /= p as usize;
        if digit != 0 {
            let lam = FpElem::new(digit, p).expect("digit below modulus");
            for (o, k) in out.iter_mut().zip(kv) {
                *o = *o + *k * lam;
            }
        }
    }
    out
}

fn set_stage(images: &mut [TruncSeries], stage: usize, system: &StageSystem, coeffs: &[FpElem]) {
    let p = images[0].modulus();
    let nvars = images.len();
    let mut polys = vec![Poly::zero(p, nvars); nvars];
    for ((var, m), c) in system.cols.iter().zip(coeffs) {
        if !c.is_zero() {
            polys[*var] = polys[*var].add(&Poly::term(*c, m.clone()));
        }
    }
    for (img, poly) in images.iter_mut().zip(polys) {
        img.set_coeff(stage, poly);
    }
}

fn clear_stage(images: &mut [TruncSeries], stage: usize) {
    let p = images[0].modulus();
    let nvars = images.len();
    for img in images.iter_mut() {
        img.set_coeff(stage, Poly::zero(p, nvars));
    }
}

/// Invariant context threaded through the stage-by-stage backtracking.
struct StageCtx<'a> {
    ideal: &'a IdealPresentation,
    weights: &'a WeightVector,
    policy: DegreePolicy,
    bounds: &'a SearchBounds,
}

fn extend_stages(images: &mut [TruncSeries], stage: usize, target: usize, ctx: &StageCtx) -> bool {
    if stage > target {
        return true;
    }
    let Some(system) = solve_stage(images, stage, ctx.ideal, ctx.weights, ctx.policy) else {
        return false;
    };
    let p = ctx.ideal.modulus();
    for index in 0..branch_count(system.kernel.len(), p, ctx.bounds.branch_cap) {
        let coeffs = coset_coeffs(&system, index, p);
        set_stage(images, stage, &system, &coeffs);
        if extend_stages(images, stage + 1, target, ctx) {
            return true;
        }
    }
    clear_stage(images, stage);
    false
}

fn base_images(delta: &Derivation, length: usize) -> Vec<TruncSeries> {
    let p = delta.modulus();
    let nvars = delta.nvars();
    (0..nvars)
        .map(|var| {
            let mut s = TruncSeries::zero(p, nvars, length);
            s.set_coeff(0, Poly::variable(p, nvars, var));
            s.set_coeff(1, delta.image(var).clone());
            s
        })
        .collect()
}

/// Searches for a logarithmic derivation of length `target` whose first
/// component is `delta`, backtracking over the per-stage solution cosets.
/// `Ok(None)` means the search space under the given policy and bounds is
/// exhausted; under [`DegreePolicy::HomogeneousSlope`] with homogeneous data
/// and unsaturated bounds that is a proof of non-integrability.
pub fn find_log_integral(
    delta: &Derivation,
    target: usize,
    ideal: &IdealPresentation,
    weights: &WeightVector,
    policy: DegreePolicy,
    bounds: &SearchBounds,
) -> Result<Option<HsDeriv>, SearchError> {
    assert!(target >= 1, "a length-0 integral is the identity");
    assert_eq!(delta.modulus(), ideal.modulus(), "modulus mismatch");
    assert_eq!(delta.nvars(), ideal.nvars(), "variable count mismatch");
    if !delta.is_logarithmic(ideal) {
        return Err(SearchError::NotLogarithmicInput);
    }
    let mut images = base_images(delta, target);
    let ctx = StageCtx {
        ideal,
        weights,
        policy,
        bounds,
    };
    if target > 1 && !extend_stages(&mut images, 2, target, &ctx) {
        return Ok(None);
    }
    let found = HsDeriv::from_images(images).expect("stage 0 holds the variables");
    debug_assert!(found.is_logarithmic(ideal, target));
    Ok(Some(found))
}

fn deepest_stage(
    images: &mut [TruncSeries],
    stage: usize,
    cap: usize,
    best: &mut usize,
    ctx: &StageCtx,
) {
    if stage > cap || *best >= cap {
        return;
    }
    let Some(system) = solve_stage(images, stage, ctx.ideal, ctx.weights, ctx.policy) else {
        return;
    };
    let p = ctx.ideal.modulus();
    for index in 0..branch_count(system.kernel.len(), p, ctx.bounds.branch_cap) {
        let coeffs = coset_coeffs(&system, index, p);
        set_stage(images, stage, &system, &coeffs);
        if stage > *best {
            *best = stage;
        }
        if *best >= cap {
            break;
        }
        deepest_stage(images, stage + 1, cap, best, ctx);
        if *best >= cap {
            break;
        }
    }
    clear_stage(images, stage);
}

/// Largest length up to `cap` to which `delta` extends within the policy and
/// bounds: the deepest stage completed across all explored branches.
pub fn max_log_integral(
    delta: &Derivation,
    cap: usize,
    ideal: &IdealPresentation,
    weights: &WeightVector,
    policy: DegreePolicy,
    bounds: &SearchBounds,
) -> Result<usize, SearchError> {
    assert!(cap >= 1, "the cap must allow at least length 1");
    if !delta.is_logarithmic(ideal) {
        return Err(SearchError::NotLogarithmicInput);
    }
    if cap == 1 {
        return Ok(1);
    }
    let mut images = base_images(delta, cap);
    let mut best = 1;
    let ctx = StageCtx {
        ideal,
        weights,
        policy,
        bounds,
    };
    deepest_stage(&mut images, 2, cap, &mut best, &ctx);
    Ok(best)
}

/// Dimensions of the spaces of derivations of each listed weighted degree
/// that extend to logarithmic derivations of each length, plus the
/// `(degree, order)` cells whose subspace structure could not be verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrabilityTable {
    degrees: Vec<i64>,
    max_order: usize,
    dims: Vec<Vec<usize>>,
    anomalies: Vec<(i64, usize)>,
}

impl IntegrabilityTable {
    /// Assembles a table from rows computed independently (e.g. in
    /// parallel, one slice of degrees per worker). Rows must already be in
    /// the intended degree order.
    pub fn from_rows(
        degrees: Vec<i64>,
        max_order: usize,
        dims: Vec<Vec<usize>>,
        anomalies: Vec<(i64, usize)>,
    ) -> Self {
        assert_eq!(degrees.len(), dims.len(), "one row per degree");
        assert!(
            dims.iter().all(|r| r.len() == max_order),
            "every row must cover orders 1..=max_order"
        );
        IntegrabilityTable {
            degrees,
            max_order,
            dims,
            anomalies,
        }
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Dimension row for one degree, indexed by `order - 1`.
    pub fn row(&self, degree: i64) -> Option<&[usize]> {
        self.degrees
            .iter()
            .position(|&d| d == degree)
            .map(|i| self.dims[i].as_slice())
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.dims
    }

    /// Cells where the passing set failed the subspace checks (or was too
    /// large to enumerate) and the reported dimension is a greedy estimate.
    pub fn anomalies(&self) -> &[(i64, usize)] {
        &self.anomalies
    }

    /// Tab-separated rendering: a header of orders, then one row per degree.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("degree");
        for m in 1..=self.max_order {
            write!(out, "\t{m}").expect("string write");
        }
        out.push('\n');
        for (degree, row) in self.degrees.iter().zip(&self.dims) {
            write!(out, "{degree}").expect("string write");
            for v in row {
                write!(out, "\t{v}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

/// Encoded vectors over F_p^k added digit by digit.
fn add_encoded(a: usize, b: usize, p: u64, dim: usize) -> usize {
    let p = p as usize;
    let mut out = 0;
    let mut mult = 1;
    let (mut a, mut b) = (a, b);
    for _ in 0..dim {
        out += ((a % p + b % p) % p) * mult;
        a /= p;
        b /= p;
        mult *= p;
    }
    out
}

fn combine_basis(basis: &[Derivation], index: usize, p: u64) -> Derivation {
    let mut out = Derivation::zero(p, basis[0].nvars());
    let mut rem = index;
    for b in basis {
        let digit = (rem % p as usize) as u64;
        rem /= p as usize;
        if digit != 0 {
            out = out.add(&b.scale(FpElem::new(digit, p).expect("digit below modulus")));
        }
    }
    out
}

fn exact_power_log(size: usize, p: u64) -> Option<usize> {
    let p = p as usize;
    let mut size = size;
    let mut log = 0;
    while size > 1 {
        if !size.is_multiple_of(p) {
            return None;
        }
        size /= p;
        log += 1;
    }
    Some(log)
}

/// Dimension of the largest subspace of the passing set found greedily, used
/// when the set itself is not a subspace.
fn greedy_dim(members: &BTreeSet<usize>, p: u64, dim: usize) -> usize {
    let mut span: BTreeSet<usize> = BTreeSet::new();
    span.insert(0);
    let mut rank = 0;
    for &cand in members {
        if span.contains(&cand) {
            continue;
        }
        let mut extended = span.clone();
        let mut ok = true;
        'grow: for &s in &span {
            let mut cur = s;
            for _ in 1..p {
                cur = add_encoded(cur, cand, p, dim);
                if cur != 0 && !members.contains(&cur) {
                    ok = false;
                    break 'grow;
                }
                extended.insert(cur);
            }
        }
        if ok {
            span = extended;
            rank += 1;
        }
    }
    rank
}

/// Tabulates, for each weighted degree, the dimension of the space of
/// degree-d derivations mapping the ideal into itself that extend to
/// logarithmic derivations of each length up to `max_order`.
///
/// Small spans are enumerated exhaustively and the passing sets are checked
/// to be subspaces; failures of that check — possible only through search
/// bounds cutting branches asymmetrically — are recorded as anomalies along
/// with spans too large to enumerate, where only the basis vectors are
/// probed.
pub fn integrable_dimensions(
    ideal: &IdealPresentation,
    weights: &WeightVector,
    max_order: usize,
    degrees: &[i64],
    bounds: &SearchBounds,
) -> IntegrabilityTable {
    assert!(max_order >= 1, "the table needs at least one order column");
    let p = ideal.modulus();
    let homogeneous = ideal
        .generators()
        .iter()
        .all(|g| g.is_weighted_homogeneous(weights));

    let mut dims = Vec::with_capacity(degrees.len());
    let mut anomalies = Vec::new();
    for &degree in degrees {
        let basis = log_derivations(ideal, weights, degree);
        let k = basis.len();
        if k == 0 {
            dims.push(vec![0; max_order]);
            continue;
        }
        let policy = if homogeneous {
            DegreePolicy::HomogeneousSlope(degree)
        } else {
            DegreePolicy::SlopeCap(degree.max(0))
        };
        let span_size = (p as u128).checked_pow(k as u32);
        let row = match span_size {
            Some(size) if size <= SPAN_ENUM_CAP => {
                let total = size as usize;
                let mut max_of = vec![0usize; total];
                for (index, slot) in max_of.iter_mut().enumerate().skip(1) {
                    let v = combine_basis(&basis, index, p);
                    *slot = max_log_integral(&v, max_order, ideal, weights, policy, bounds)
                        .expect("span members of logarithmic derivations are logarithmic");
                }
                (1..=max_order)
                    .map(|m| {
                        let members: BTreeSet<usize> =
                            (1..total).filter(|&i| max_of[i] >= m).collect();
                        let closed = members.iter().all(|&a| {
                            members.iter().all(|&b| {
                                let c = add_encoded(a, b, p, k);
                                c == 0 || members.contains(&c)
                            })
                        });
                        match (exact_power_log(members.len() + 1, p), closed) {
                            (Some(rank), true) => rank,
                            _ => {
                                anomalies.push((degree, m));
                                greedy_dim(&members, p, k)
                            }
                        }
                    })
                    .collect()
            }
            _ => {
                let maxes: Vec<usize> = basis
                    .iter()
                    .map(|b| {
                        max_log_integral(b, max_order, ideal, weights, policy, bounds)
                            .expect("basis members are logarithmic")
                    })
                    .collect();
                for m in 2..=max_order {
                    anomalies.push((degree, m));
                }
                (1..=max_order)
                    .map(|m| maxes.iter().filter(|&&x| x >= m).count())
                    .collect()
            }
        };
        dims.push(row);
    }
    IntegrabilityTable {
        degrees: degrees.to_vec(),
        max_order,
        dims,
        anomalies,
    }
}

/// Scanner outcome: the dimension table, the orders where some dimension
/// drops, and whether every drop sits at a power of the characteristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeapReport {
    pub table: IntegrabilityTable,
    pub leaps: Vec<usize>,
    pub pass: bool,
}

impl LeapReport {
    /// Single-line verdict, e.g. `LEAPS: 2,4 POWERS_OF_p: yes`.
    pub fn verdict_line(&self) -> String {
        let list = if self.leaps.is_empty() {
            "none".to_string()
        } else {
            self.leaps
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "LEAPS: {list} POWERS_OF_p: {}",
            if self.pass { "yes" } else { "no" }
        )
    }

    /// Dimension table followed by the verdict line.
    pub fn to_tsv(&self) -> String {
        format!("{}{}\n", self.table.to_tsv(), self.verdict_line())
    }
}

fn is_power_of(m: u64, p: u64) -> bool {
    m >= 1 && BasePDigits::new(m, p).sum() == 1
}

/// Flags every order where a dimension row of `table` drops; the report
/// passes when all drops sit at powers of the characteristic `p`.
pub fn report_from_table(table: IntegrabilityTable, p: u64) -> LeapReport {
    let mut leaps = BTreeSet::new();
    for row in table.rows() {
        for m in 2..=table.max_order() {
            if row[m - 1] < row[m - 2] {
                leaps.insert(m);
            }
        }
    }
    let pass = leaps.iter().all(|&m| is_power_of(m as u64, p));
    LeapReport {
        table,
        leaps: leaps.into_iter().collect(),
        pass,
    }
}

/// Runs [`integrable_dimensions`] and flags every order where a dimension
/// row drops. The report passes when all drops sit at powers of the
/// characteristic.
pub fn scan_leaps(
    ideal: &IdealPresentation,
    weights: &WeightVector,
    max_order: usize,
    degrees: &[i64],
    bounds: &SearchBounds,
) -> LeapReport {
    let table = integrable_dimensions(ideal, weights, max_order, degrees, bounds);
    report_from_table(table, ideal.modulus())
}

/// [`IntegrationOracle`] backed by [`find_log_integral`]. The degree policy
/// is chosen per call: homogeneous slope when both the ideal and the request
/// are weighted homogeneous, otherwise a slope cap at the request's largest
/// degree shift.
#[derive(Debug, Clone)]
pub struct SearchOracle {
    weights: WeightVector,
    bounds: SearchBounds,
}

impl SearchOracle {
    pub fn new(weights: WeightVector) -> Self {
        SearchOracle::with_bounds(weights, SearchBounds::default())
    }

    pub fn with_bounds(weights: WeightVector, bounds: SearchBounds) -> Self {
        SearchOracle { weights, bounds }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn bounds(&self) -> SearchBounds {
        self.bounds
    }

    fn policy_for(&self, delta: &Derivation, ideal: &IdealPresentation) -> DegreePolicy {
        let homogeneous = ideal
            .generators()
            .iter()
            .all(|g| g.is_weighted_homogeneous(&self.weights));
        match (homogeneous, delta.homogeneous_degree(&self.weights)) {
            (true, Some(degree)) => DegreePolicy::HomogeneousSlope(degree),
            _ => {
                let shift = delta.max_degree_shift(&self.weights).unwrap_or(0);
                DegreePolicy::SlopeCap(shift.max(0))
            }
        }
    }
}

impl IntegrationOracle for SearchOracle {
    fn log_integral(
        &self,
        delta: &Derivation,
        ideal: &IdealPresentation,
        target: usize,
    ) -> Result<HsDeriv, OracleError> {
        let policy = self.policy_for(delta, ideal);
        match find_log_integral(delta, target, ideal, &self.weights, policy, &self.bounds) {
            Err(SearchError::NotLogarithmicInput) => Err(OracleError::NotLogarithmic),
            Ok(None) => Err(OracleError::NotFound { target }),
            Ok(Some(found)) => {
                if found.length() != target
                    || found.first_component() != *delta
                    || !found.is_logarithmic(ideal, target)
                {
                    return Err(OracleError::ContractViolation(
                        "search returned a malformed integral".into(),
                    ));
                }
                Ok(found)
            }
        }
    }
}

/// Oracle that reaches lengths divisible by the characteristic but not a
/// power of it by integrating to the previous length and bridging across
/// with [`integrate::bridge_leap`]; every other length goes to the inner
/// search directly. Strictly stronger than the plain search wherever the
/// bridge applies, at the cost of the pipeline's extra work.
#[derive(Debug, Clone)]
pub struct BridgingOracle {
    inner: SearchOracle,
}

impl BridgingOracle {
    pub fn new(inner: SearchOracle) -> Self {
        BridgingOracle { inner }
    }
}

impl IntegrationOracle for BridgingOracle {
    fn log_integral(
        &self,
        delta: &Derivation,
        ideal: &IdealPresentation,
        target: usize,
    ) -> Result<HsDeriv, OracleError> {
        let p = ideal.modulus();
        let bridgeable =
            target >= 2 && target.is_multiple_of(p as usize) && !is_power_of(target as u64, p);
        if !bridgeable {
            return self.inner.log_integral(delta, ideal, target);
        }
        let prev = self.log_integral(delta, ideal, target - 1)?;
        let mut trace = PipelineTrace::new();
        integrate::bridge_leap(&prev, target, ideal, self, &mut trace)
            .map_err(|e| OracleError::BridgeFailed(e.to_string()))
    }
}
