//! Constructive integration pipelines for Hasse-Schmidt derivations.
//!
//! Each procedure here extends a derivation that maps an ideal into itself
//! to a longer one with the same first component, using only exact algebra:
//!
//! * [`extend_to_six_char2`] — length 5 to length 6 in characteristic 2,
//!   through the bivariate component extractor.
//! * [`integrate_by_averaging`] — one step for orders whose iterated base-p
//!   digit sum is strictly between 1 and p, by averaging rescaled copies.
//! * [`build_killer`] / [`compress_integral`] — isolating a single component
//!   of a block-structured derivation as an integral of prescribed length.
//! * [`bridge_leap`] — the full pipeline raising an (n-1)-integral to an
//!   n-integral whenever n is a multiple of the characteristic but not a
//!   power of it.
//!
//! Sources of new integrals at small prescribed lengths come from an
//! [`IntegrationOracle`]; the pipelines never assume an oracle answer is
//! correct, they re-verify it, and every intermediate object's order and
//! logarithmicity claims are asserted at runtime. A failed assertion means
//! an implementation bug, never bad input, and surfaces as
//! [`IntegrateError::Invariant`] with the step recorded in the
//! [`PipelineTrace`].

use std::fmt::Write as _;

use thiserror::Error;

use crate::bivariate;
use crate::digits::{averaging_system, binomial_mod_p, digital_root, max_shift, BasePDigits};
use crate::hsd::{Derivation, HsDeriv};
use crate::poly::IdealPresentation;

/// Supplier of logarithmic integrals at prescribed lengths: the pluggable
/// assumption the pipelines consume. A successful call returns a derivation
/// of length exactly `target` whose first component is `delta` and whose
/// components all map the ideal into itself.
pub trait IntegrationOracle {
    fn log_integral(
        &self,
        delta: &Derivation,
        ideal: &IdealPresentation,
        target: usize,
    ) -> Result<HsDeriv, OracleError>;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("no logarithmic integral of length {target} found within the search bounds")]
    NotFound { target: usize },
    #[error("the derivation handed to the oracle does not map the ideal into itself")]
    NotLogarithmic,
    #[error("bridging to the requested length failed: {0}")]
    BridgeFailed(String),
    #[error("oracle produced a value violating its contract: {0}")]
    ContractViolation(String),
}

/// One audited pipeline step: what was done, the leading orders before and
/// after, and whether the logarithmicity re-check passed. `None` orders mean
/// the identity (conventionally infinite order) and print as `inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub id: &'static str,
    pub ell_before: Option<usize>,
    pub ell_after: Option<usize>,
    pub log_ok: bool,
}

/// Ordered audit record of a pipeline run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineTrace {
    steps: Vec<TraceStep>,
}

impl PipelineTrace {
    pub fn new() -> Self {
        PipelineTrace::default()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    fn push(&mut self, id: &'static str, before: Option<usize>, after: Option<usize>, ok: bool) {
        self.steps.push(TraceStep {
            id,
            ell_before: before,
            ell_after: after,
            log_ok: ok,
        });
    }

    /// Line-oriented rendering: one `step <id> ell_before=<v> ell_after=<v>
    /// log_ok=<bool>` line per step.
    pub fn to_text(&self) -> String {
        fn ell(v: Option<usize>) -> String {
            v.map_or_else(|| "inf".to_string(), |n| n.to_string())
        }
        let mut out = String::new();
        for s in &self.steps {
            writeln!(
                out,
                "step {} ell_before={} ell_after={} log_ok={}",
                s.id,
                ell(s.ell_before),
                ell(s.ell_after),
                s.log_ok
            )
            .expect("string write");
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("construction requires characteristic {expected}, found {found}")]
    WrongCharacteristic { expected: u64, found: u64 },
    #[error("input must map the ideal into itself up to order {needed}")]
    NotLogEnough { needed: usize },
    #[error(
        "averaging needs an iterated digit sum strictly between 1 and the characteristic; \
         order {n} has {root}"
    )]
    BadAveragingOrder { n: usize, root: u64 },
    #[error("order {0} must be a multiple of the characteristic but not a power of it")]
    UnsupportedOrder(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("pipeline invariant `{rule}` failed: {detail}")]
    Invariant { rule: &'static str, detail: String },
}

fn invariant(rule: &'static str, detail: impl Into<String>) -> IntegrateError {
    IntegrateError::Invariant {
        rule,
        detail: detail.into(),
    }
}

fn ensure(
    cond: bool,
    rule: &'static str,
    detail: impl FnOnce() -> String,
) -> Result<(), IntegrateError> {
    if cond {
        Ok(())
    } else {
        Err(invariant(rule, detail()))
    }
}

/// Calls the oracle and re-verifies its contract before trusting the result.
fn checked_oracle_call<O: IntegrationOracle + ?Sized>(
    oracle: &O,
    delta: &Derivation,
    ideal: &IdealPresentation,
    target: usize,
) -> Result<HsDeriv, IntegrateError> {
    let integral = oracle.log_integral(delta, ideal, target)?;
    let broken = |msg: String| IntegrateError::Oracle(OracleError::ContractViolation(msg));
    if integral.length() != target {
        return Err(broken(format!(
            "length {} instead of {target}",
            integral.length()
        )));
    }
    if integral.first_component() != *delta {
        return Err(broken(
            "first component differs from the requested derivation".into(),
        ));
    }
    if !integral.is_logarithmic(ideal, target) {
        return Err(broken(
            "result is not logarithmic to its full length".into(),
        ));
    }
    Ok(integral)
}

fn order_at_least(d: &HsDeriv, bound: usize) -> bool {
    d.leading_order().is_none_or(|l| l >= bound)
}

/// Extends a 5-logarithmic derivation in characteristic 2 to a logarithmic
/// one of length 6 with the same first component.
///
/// The construction reads off two maps from the component extractor of the
/// input — one for each new order — assembles them into a short derivation,
/// and composes the input with its threefold stretch. The assembled
/// derivation's second component is re-verified against the defining
/// combination on generator and product probes before use.
pub fn extend_to_six_char2(
    d: &HsDeriv,
    ideal: &IdealPresentation,
) -> Result<HsDeriv, IntegrateError> {
    let p = d.modulus();
    if p != 2 {
        return Err(IntegrateError::WrongCharacteristic {
            expected: 2,
            found: p,
        });
    }
    let d6 = d.resized(6);
    if !d6.is_logarithmic(ideal, 5) {
        return Err(IntegrateError::NotLogEnough { needed: 5 });
    }
    let region = bivariate::CoIdeal2::total_degree(6);
    let g = bivariate::extractor(&d6, region).map_err(|e| invariant("extract", e.to_string()))?;

    // Inner derivation of length 2 assembled from extractor components.
    let nvars = d6.nvars();
    let images: Vec<_> = (0..nvars)
        .map(|i| {
            let mut s = crate::hsd::TruncSeries::zero(p, nvars, 2);
            s.set_coeff(0, crate::poly::Poly::variable(p, nvars, i));
            s.set_coeff(1, g.component_image((1, 2), i));
            let second = g.component_image((2, 4), i).sub(
                &g.apply((1, 1), &g.component_image((1, 3), i))
                    .expect("in region"),
            );
            s.set_coeff(2, second);
            s
        })
        .collect();
    let inner = HsDeriv::from_images(images).expect("constant coefficients are the variables");

    // Re-verify that the assembled second component acts as the defining
    // combination of extractor components, not only on variables: probe the
    // ideal generators and all pairwise variable products.
    let mut probes: Vec<crate::poly::Poly> = ideal.generators().to_vec();
    for i in 0..nvars {
        for j in i..nvars {
            probes.push(
                crate::poly::Poly::variable(p, nvars, i)
                    .mul(&crate::poly::Poly::variable(p, nvars, j)),
            );
        }
    }
    for f in &probes {
        let expect = g.apply((2, 4), f).expect("in region").sub(
            &g.apply((1, 1), &g.apply((1, 3), f).expect("in region"))
                .expect("in region"),
        );
        ensure(
            inner.apply(2, f).expect("within length") == expect,
            "inner-component",
            || "assembled second component disagrees with its defining combination".to_string(),
        )?;
    }

    let out = d6
        .compose(&inner.stretch(3))
        .map_err(|_| invariant("final-shape", "composition shape mismatch"))?;
    ensure(
        out.first_component() == d6.first_component(),
        "first-component",
        || "first component changed".to_string(),
    )?;
    ensure(out.is_logarithmic(ideal, 6), "output-log", || {
        "output is not logarithmic to order 6".to_string()
    })?;
    Ok(out)
}

/// One-step integration for orders `n` whose iterated base-p digit sum lies
/// strictly between 1 and p: composes rescalings of the zero-padded input by
/// a weight system summing to 1 with vanishing power sum, which cancels the
/// obstruction in the top component.
pub fn integrate_by_averaging(
    d: &HsDeriv,
    n: usize,
    ideal: &IdealPresentation,
) -> Result<HsDeriv, IntegrateError> {
    let p = d.modulus();
    let root = digital_root(n as u64, p);
    if root <= 1 || root >= p {
        return Err(IntegrateError::BadAveragingOrder { n, root });
    }
    let dn = d.resized(n);
    if !dn.is_logarithmic(ideal, n - 1) {
        return Err(IntegrateError::NotLogEnough { needed: n - 1 });
    }
    let weights = averaging_system(root, p).expect("1 < root < p was checked");

    // The two defining identities of the weight system, re-checked.
    let zero = crate::zpfield::FpElem::new(0, p).expect("prime modulus");
    let sum = weights.iter().fold(zero, |acc, &a| acc + a);
    ensure(sum.value() == 1, "weight-sum", || {
        format!("weights sum to {} instead of 1", sum.value())
    })?;
    let power_sum = weights.iter().fold(zero, |acc, &a| acc + a.pow(root));
    ensure(power_sum.is_zero(), "weight-power-sum", || {
        format!("power sum is {} instead of 0", power_sum.value())
    })?;

    let mut out = dn.scale_elem(weights[0]);
    for &a in &weights[1..] {
        out = out
            .compose(&dn.scale_elem(a))
            .map_err(|_| invariant("averaging-shape", "composition shape mismatch"))?;
    }
    ensure(
        out.first_component() == dn.first_component(),
        "first-component",
        || "first component changed".to_string(),
    )?;
    ensure(out.is_logarithmic(ideal, n), "output-log", || {
        format!("output is not logarithmic to order {n}")
    })?;
    Ok(out)
}

/// Builds a logarithmic derivation supported on multiples of `m` whose
/// component at `m` is minus `delta`, for use as a composition factor that
/// cancels a matching component. Requires `1 < e <= m < e*p^s`; the result
/// has length `e*p^s - 1` when `e` divides `m` and `e*p^s` otherwise.
///
/// The oracle is asked for an integral of `delta` of length `p^(r+1) - 1`,
/// where `r` is the largest shift with `m*p^r < e*p^s`; negating, stretching
/// by `m` and truncating yields the killer.
pub fn build_killer<O: IntegrationOracle + ?Sized>(
    delta: &Derivation,
    m: usize,
    e: usize,
    s: u32,
    ideal: &IdealPresentation,
    oracle: &O,
) -> Result<HsDeriv, IntegrateError> {
    let p = delta.modulus();
    let ps = (p as usize).pow(s);
    assert!(
        e > 1 && e <= m && m < e * ps,
        "killer shape requires 1 < e <= m < e*p^s"
    );
    let target = if m.is_multiple_of(e) {
        e * ps - 1
    } else {
        e * ps
    };
    if delta.is_zero() {
        return Ok(HsDeriv::identity(p, delta.nvars(), target));
    }
    let r = max_shift(m as u64, e as u64, s, p).expect("m < e*p^s keeps the shift set nonempty");
    let integral = checked_oracle_call(oracle, delta, ideal, (p as usize).pow(r + 1) - 1)?;
    let extended = integral.neg_stretch_extend(m);
    ensure(extended.length() >= target, "killer-length", || {
        format!(
            "extension reaches {} but the target is {target}",
            extended.length()
        )
    })?;
    let killer = extended.truncate(target).expect("length checked");
    ensure(
        killer.component_derivation(m) == delta.neg(),
        "killer-component",
        || format!("component {m} is not the negated input"),
    )?;
    ensure(killer.is_block_exact(m), "killer-support", || {
        format!("support leaks off the multiples of {m}")
    })?;
    ensure(killer.is_logarithmic(ideal, target), "killer-log", || {
        "killer is not logarithmic".to_string()
    })?;
    Ok(killer)
}

/// Certifies that the component of `scratch` at `m` admits a logarithmic
/// integral of length `p^r` (with `r` the largest shift for `(m, e, s)`)
/// using only the pipeline's own machinery: a recursive
/// [`compress_integral`] on the truncation to `m*p^r`. For `r = 0` the
/// length-1 integral is immediate and nothing is recorded.
fn certify_component<O: IntegrationOracle + ?Sized>(
    scratch: &HsDeriv,
    m: usize,
    e: usize,
    s: u32,
    ideal: &IdealPresentation,
    oracle: &O,
    trace: &mut PipelineTrace,
) -> Result<(), IntegrateError> {
    let p = scratch.modulus();
    let r = max_shift(m as u64, e as u64, s, p).expect("m < e*p^s keeps the shift set nonempty");
    if r == 0 {
        return Ok(());
    }
    let pr = (p as usize).pow(r);
    let prefix = scratch
        .truncate(m * pr)
        .map_err(|_| invariant("certify-length", format!("cannot truncate to {}", m * pr)))?;
    let before = prefix.leading_order();
    let witness = compress_integral(&prefix, m, r, ideal, oracle, trace)?;
    trace.push("certify", before, witness.leading_order(), true);
    ensure(
        witness.first_component() == scratch.component_derivation(m),
        "certify-component",
        || format!("certified integral does not start with component {m}"),
    )?;
    Ok(())
}

/// Compresses a block-structured derivation of length `e*p^s` into a
/// `p^s`-integral of its component at `e`.
///
/// The input must be logarithmic up to `e*p^s - 1` with leading order at
/// least `e`. As long as some component away from the multiples of `e` is
/// nonzero, the pipeline harvests the offending components from a scratch
/// copy (whose low multiples are removed first so each harvested component
/// provably is a derivation with a certified short integral), builds killers
/// for them, and composes the input with the killer product — preserving all
/// multiples of `e` up to the current block. Once only multiples survive,
/// keeping every e-th component yields the result, whose top component
/// agrees with the input's top one modulo the ideal.
pub fn compress_integral<O: IntegrationOracle + ?Sized>(
    d: &HsDeriv,
    e: usize,
    s: u32,
    ideal: &IdealPresentation,
    oracle: &O,
    trace: &mut PipelineTrace,
) -> Result<HsDeriv, IntegrateError> {
    let p = d.modulus();
    let ps = (p as usize).pow(s);
    let full = e * ps;
    ensure(e >= 1 && d.length() == full, "input-length", || {
        format!("length {} instead of {full}", d.length())
    })?;
    if !d.is_logarithmic(ideal, full - 1) {
        return Err(IntegrateError::NotLogEnough { needed: full - 1 });
    }
    ensure(order_at_least(d, e), "input-order", || {
        format!("leading order below the block size {e}")
    })?;

    if e == 1 {
        let out = d.truncate(ps).expect("p^s <= e*p^s");
        let ok = out.is_logarithmic(ideal, ps - 1);
        trace.push("compress", d.leading_order(), out.leading_order(), ok);
        ensure(ok, "output-log", || {
            "truncation lost logarithmicity".to_string()
        })?;
        return Ok(out);
    }

    let mut cur = d.clone();
    while !cur.is_block_exact(e) {
        let block = cur.block_order(e).expect("1 < e <= length");

        // Scratch copy: remove the multiples of e up to the current block so
        // the off-multiple components sit at the leading order, which makes
        // them genuine derivations and lets the certification recursion run.
        let mut scratch = cur.truncate(full - 1).expect("full >= 1");
        for j in 1..=block {
            let m = j * e;
            let delta_j = scratch.component_derivation(m);
            if delta_j.is_zero() {
                continue;
            }
            certify_component(&scratch, m, e, s, ideal, oracle, trace)?;
            let killer = build_killer(&delta_j, m, e, s, ideal, oracle)?;
            let before = scratch.leading_order();
            scratch = scratch
                .compose(&killer)
                .map_err(|_| invariant("kill-multiple-shape", "composition shape mismatch"))?;
            let ok = scratch.is_logarithmic(ideal, full - 1);
            trace.push("kill-multiple", before, scratch.leading_order(), ok);
            ensure(ok, "kill-multiple-log", || {
                format!("scratch lost logarithmicity while removing component {m}")
            })?;
            ensure(
                order_at_least(&scratch, m + 1),
                "kill-multiple-order",
                || format!("component {m} survived its removal"),
            )?;
        }

        // Killers for the off-multiple components of the current block,
        // harvested in increasing position while the scratch keeps its
        // leading order ahead of the next harvest.
        let mut killers: Vec<HsDeriv> = Vec::new();
        for alpha in 1..e {
            let m = block * e + alpha;
            let delta_a = scratch.component_derivation(m);
            if delta_a.is_zero() {
                continue;
            }
            certify_component(&scratch, m, e, s, ideal, oracle, trace)?;
            let killer = build_killer(&delta_a, m, e, s, ideal, oracle)?;
            let before = scratch.leading_order();
            scratch = scratch
                .compose(&killer.truncate(full - 1).expect("killer reaches full"))
                .map_err(|_| invariant("kill-offmultiple-shape", "composition shape mismatch"))?;
            trace.push(
                "kill-offmultiple",
                before,
                scratch.leading_order(),
                scratch.is_logarithmic(ideal, full - 1),
            );
            ensure(
                order_at_least(&scratch, m + 1),
                "kill-offmultiple-order",
                || format!("component {m} survived its removal"),
            )?;
            killers.push(killer);
        }
        ensure(!killers.is_empty(), "block-progress", || {
            "a block reported off-multiple support but none was found".to_string()
        })?;

        let mut product = killers[0].clone();
        for k in &killers[1..] {
            product = product
                .compose(k)
                .map_err(|_| invariant("killer-product-shape", "composition shape mismatch"))?;
        }
        let prev = cur.clone();
        cur = cur
            .compose(&product)
            .map_err(|_| invariant("block-shape", "composition shape mismatch"))?;
        let ok = cur.is_logarithmic(ideal, full - 1);
        trace.push(
            "kill-offmultiple",
            prev.leading_order(),
            cur.leading_order(),
            ok,
        );
        ensure(ok, "block-log", || {
            "logarithmicity lost while clearing a block".to_string()
        })?;
        let raised = cur.block_order(e).expect("1 < e <= length");
        ensure(raised > block, "block-raise", || {
            format!("block order stayed at {block}")
        })?;
        for j in 1..=block {
            ensure(
                cur.component_derivation(j * e) == prev.component_derivation(j * e),
                "multiple-preserve",
                || format!("component {} changed while clearing the block", j * e),
            )?;
        }
    }

    let before = cur.leading_order();
    let out = cur.compress(e).expect("support is on multiples of e");
    let ok = ps == 1 || out.is_logarithmic(ideal, ps - 1);
    trace.push("compress", before, out.leading_order(), ok);
    ensure(ok, "output-log", || {
        format!("output is not logarithmic to order {}", ps - 1)
    })?;
    ensure(
        out.first_component() == d.component_derivation(e),
        "first-component",
        || format!("output does not start with the input's component {e}"),
    )?;
    for g in ideal.generators() {
        let diff = out
            .apply(ps, g)
            .expect("within length")
            .sub(&d.apply(full, g).expect("within length"));
        ensure(ideal.contains(&diff), "top-component", || {
            "top components do not agree modulo the ideal".to_string()
        })?;
    }
    Ok(out)
}

/// Raises an (n-1)-logarithmic derivation to a logarithmic one of length
/// `n` with the same first component, for `n` a multiple of the
/// characteristic that is not a power of it.
///
/// Writing `t` for the position of the lowest nonzero base-p digit of `n`,
/// the pipeline rescales the input's component extractor to one parameter,
/// removes the components between `2p^t + 1` and `n` with certified killers,
/// compresses the result into a `p^t`-integral whose top row carries a unit
/// multiple of the input's missing component, and composes the input with a
/// rescaled stretch of that integral. Any component of the input at index
/// `n - 1` and beyond is ignored; the extension rebuilds it.
pub fn bridge_leap<O: IntegrationOracle + ?Sized>(
    d: &HsDeriv,
    n: usize,
    ideal: &IdealPresentation,
    oracle: &O,
    trace: &mut PipelineTrace,
) -> Result<HsDeriv, IntegrateError> {
    let p = d.modulus();
    let digits = BasePDigits::new(n as u64, p);
    let t = match digits.lowest_nonzero() {
        Some(t) if t >= 1 && digits.sum() > 1 => t,
        _ => return Err(IntegrateError::UnsupportedOrder(n)),
    };
    let top_digit = digits.highest().expect("n >= 1");
    let base = d.resized(n - 1);
    if !base.is_logarithmic(ideal, n - 1) {
        return Err(IntegrateError::NotLogEnough { needed: n - 1 });
    }
    let padded = base.pad_to(n);
    let pt = (p as usize).pow(t);
    let glen = (n + 1) * pt;

    let mut g = bivariate::rescaled_extractor(&padded, n)
        .map_err(|e| invariant("rescale-shape", e.to_string()))?;
    let ok = g.is_logarithmic(ideal, glen - 1);
    trace.push("rescale", padded.leading_order(), g.leading_order(), ok);
    ensure(ok, "rescale-log", || {
        format!("extractor is not logarithmic to order {}", glen - 1)
    })?;
    ensure(order_at_least(&g, 2 * pt + 1), "rescale-order", || {
        format!("extractor order fell below {}", 2 * pt + 1)
    })?;

    for j in (2 * pt + 1)..=n {
        if g.component_is_zero(j) {
            continue;
        }
        let delta_j = g.component_derivation(j);
        let r = max_shift(j as u64, (n + 1) as u64, t, p)
            .expect("j*p^0 < (n+1)*p^t keeps the shift set nonempty");
        ensure(r <= top_digit, "shift-range", || {
            format!("shift {r} exceeded the top digit position {top_digit}")
        })?;
        certify_component(&g, j, n + 1, t, ideal, oracle, trace)?;
        let target = if r == top_digit {
            n - 1
        } else {
            (p as usize).pow(r + 1) - 1
        };
        let integral = checked_oracle_call(oracle, &delta_j, ideal, target)?;
        let extended = integral.neg_stretch_extend(j);
        ensure(extended.length() >= glen, "killer-length", || {
            format!("killer reaches {} but needs {glen}", extended.length())
        })?;
        let killer = extended.truncate(glen).expect("length checked");
        let before = g.leading_order();
        g = killer
            .compose(&g)
            .map_err(|_| invariant("kill-shape", "composition shape mismatch"))?;
        let ok = g.is_logarithmic(ideal, glen - 1);
        trace.push("kill-component", before, g.leading_order(), ok);
        ensure(ok, "kill-log", || {
            format!("logarithmicity lost while removing component {j}")
        })?;
        ensure(order_at_least(&g, j + 1), "kill-order", || {
            format!("component {j} survived its removal")
        })?;
    }

    let compressed = compress_integral(&g, n + 1, t, ideal, oracle, trace)?;
    let top = binomial_mod_p(n as u64, pt as u64, p);
    let unit = top
        .inv()
        .map_err(|_| invariant("top-unit", format!("binomial({n}, {pt}) vanished")))?;
    let stretched = compressed.scale_elem(-unit).stretch(n / pt);
    let before = padded.leading_order();
    let out = padded
        .compose(&stretched)
        .map_err(|_| invariant("final-shape", "composition shape mismatch"))?;
    let ok = out.is_logarithmic(ideal, n);
    trace.push("final-compose", before, out.leading_order(), ok);
    ensure(ok, "output-log", || {
        format!("output is not logarithmic to order {n}")
    })?;
    ensure(
        out.first_component() == base.first_component(),
        "first-component",
        || "first component changed".to_string(),
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsd::TruncSeries;
    use crate::leapfinder::SearchOracle;
    use crate::poly::{groebner_basis, Poly, WeightVector};

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn cusp_char2() -> (IdealPresentation, Vec<String>) {
        let vars = names(&["x", "y"]);
        let ideal = groebner_basis(&[Poly::parse("x^2+y^3", 2, &vars).unwrap()]).unwrap();
        (ideal, vars)
    }

    fn cusp_char3() -> (IdealPresentation, Vec<String>) {
        let vars = names(&["x", "y"]);
        let ideal = groebner_basis(&[Poly::parse("x^2+2*y^3", 3, &vars).unwrap()]).unwrap();
        (ideal, vars)
    }

    /// Torus flow on the cusp: x scales with weight 3, y with weight 2, so
    /// the curve equation is an eigenvector and every order is logarithmic.
    fn torus_flow(p: u64, vars: &[String], length: usize) -> HsDeriv {
        let one = Poly::parse("1", p, vars).unwrap();
        let x = Poly::variable(p, 2, 0);
        let y = Poly::variable(p, 2, 1);
        let mut unit = TruncSeries::zero(p, 2, length);
        unit.set_coeff(0, one);
        let mut mu = TruncSeries::zero(p, 2, length);
        if length >= 1 {
            mu.set_coeff(1, Poly::parse("1", p, vars).unwrap());
        }
        let base = unit.add(&mu);
        let sx = base.pow(3).mul_poly(&x);
        let sy = base.pow(2).mul_poly(&y);
        HsDeriv::from_images(vec![sx, sy]).unwrap()
    }

    fn oracle() -> SearchOracle {
        SearchOracle::new(WeightVector::new(vec![3, 2]))
    }

    #[test]
    fn trace_renders_lines() {
        let mut trace = PipelineTrace::new();
        trace.push("kill-multiple", Some(2), Some(3), true);
        trace.push("compress", None, Some(1), false);
        assert_eq!(
            trace.to_text(),
            "step kill-multiple ell_before=2 ell_after=3 log_ok=true\n\
             step compress ell_before=inf ell_after=1 log_ok=false\n"
        );
        assert_eq!(trace.steps().len(), 2);
    }

    #[test]
    fn averaging_extends_char3_cusp() {
        let (ideal, vars) = cusp_char3();
        let d = torus_flow(3, &vars, 5);
        assert!(d.is_logarithmic(&ideal, 5));
        let out = integrate_by_averaging(&d, 6, &ideal).unwrap();
        assert_eq!(out.length(), 6);
        assert_eq!(out.first_component(), d.first_component());
        assert!(out.is_logarithmic(&ideal, 6));
    }

    #[test]
    fn averaging_rejects_bad_orders() {
        let (ideal, vars) = cusp_char2();
        let d = torus_flow(2, &vars, 5);
        // Characteristic 2 leaves no room: every iterated digit sum is 1.
        assert!(matches!(
            integrate_by_averaging(&d, 6, &ideal),
            Err(IntegrateError::BadAveragingOrder { n: 6, root: 1 })
        ));
        let (ideal3, vars3) = cusp_char3();
        let d3 = torus_flow(3, &vars3, 2);
        // 3 is a power of the characteristic: digit sum 1.
        assert!(matches!(
            integrate_by_averaging(&d3, 3, &ideal3),
            Err(IntegrateError::BadAveragingOrder { n: 3, root: 1 })
        ));
    }

    #[test]
    fn averaging_identity() {
        let (ideal, _) = cusp_char3();
        let id = HsDeriv::identity(3, 2, 6);
        assert_eq!(integrate_by_averaging(&id, 6, &ideal).unwrap(), id);
    }

    #[test]
    fn killer_shape() {
        let (ideal, vars) = cusp_char2();
        let delta = Derivation::new(vec![Poly::parse("x", 2, &vars).unwrap(), Poly::zero(2, 2)]);
        let killer = build_killer(&delta, 3, 3, 1, &ideal, &oracle()).unwrap();
        assert_eq!(killer.length(), 5, "multiple case stops one short");
        assert_eq!(killer.component_derivation(3), delta.neg());
        for idx in [1, 2, 4, 5] {
            assert!(killer.component_is_zero(idx));
        }
        // Off-multiple case keeps the full length.
        let killer = build_killer(&delta, 4, 3, 1, &ideal, &oracle()).unwrap();
        assert_eq!(killer.length(), 6);
        assert_eq!(killer.component_derivation(4), delta.neg());
        // Zero input produces the identity.
        let id = build_killer(&Derivation::zero(2, 2), 3, 3, 1, &ideal, &oracle()).unwrap();
        assert_eq!(id, HsDeriv::identity(2, 2, 5));
    }

    #[test]
    fn six_extension_on_identity() {
        let (ideal, _) = cusp_char2();
        let id = HsDeriv::identity(2, 2, 6);
        assert_eq!(extend_to_six_char2(&id, &ideal).unwrap(), id);
    }

    #[test]
    fn six_extension_on_cusp_flow() {
        let (ideal, vars) = cusp_char2();
        let d = torus_flow(2, &vars, 6);
        let out = extend_to_six_char2(&d, &ideal).unwrap();
        assert_eq!(out.length(), 6);
        assert_eq!(out.first_component(), d.first_component());
        assert!(out.is_logarithmic(&ideal, 6));
    }

    #[test]
    fn six_extension_rejects_wrong_characteristic_and_short_logs() {
        let (ideal3, vars3) = cusp_char3();
        let d3 = torus_flow(3, &vars3, 6);
        assert!(matches!(
            extend_to_six_char2(&d3, &ideal3),
            Err(IntegrateError::WrongCharacteristic {
                expected: 2,
                found: 3
            })
        ));
        let (ideal, vars) = cusp_char2();
        // x -> x + mu is logarithmic only to order 1.
        let mut sx = TruncSeries::zero(2, 2, 6);
        sx.set_coeff(0, Poly::variable(2, 2, 0));
        sx.set_coeff(1, Poly::parse("1", 2, &vars).unwrap());
        let mut sy = TruncSeries::zero(2, 2, 6);
        sy.set_coeff(0, Poly::variable(2, 2, 1));
        let shift = HsDeriv::from_images(vec![sx, sy]).unwrap();
        assert!(matches!(
            extend_to_six_char2(&shift, &ideal),
            Err(IntegrateError::NotLogEnough { needed: 5 })
        ));
    }

    #[test]
    fn compress_block_exact_input() {
        let (ideal, vars) = cusp_char2();
        let flow2 = torus_flow(2, &vars, 2);
        let d = flow2.stretch(3); // length 6 = 3 * 2^1, support on multiples of 3
        let mut trace = PipelineTrace::new();
        let out = compress_integral(&d, 3, 1, &ideal, &oracle(), &mut trace).unwrap();
        assert_eq!(out, flow2);
        assert_eq!(trace.steps().len(), 1);
        assert_eq!(trace.steps()[0].id, "compress");
    }

    #[test]
    fn compress_with_offmultiple_support() {
        let (ideal, vars) = cusp_char2();
        // A = (flow of length 2) stretched by 2: support {2, 4}.
        // B: support {3}. The product has block order 1 for e = 2.
        let a = torus_flow(2, &vars, 2).stretch(2);
        let b = torus_flow(2, &vars, 1).stretch(3).pad_to(4);
        let d = a.compose(&b).unwrap();
        assert!(d.is_logarithmic(&ideal, 3));
        assert_eq!(d.block_order(2).unwrap(), 1);
        let mut trace = PipelineTrace::new();
        let out = compress_integral(&d, 2, 1, &ideal, &oracle(), &mut trace).unwrap();
        assert_eq!(out.length(), 2);
        assert_eq!(out.first_component(), d.component_derivation(2));
        assert!(out.is_logarithmic(&ideal, 1));
        let text = trace.to_text();
        assert!(text.contains("step kill-offmultiple"));
        assert!(text.lines().all(|l| l.contains("log_ok=true")));
    }

    #[test]
    fn bridge_identity_and_bad_orders() {
        let (ideal, _) = cusp_char2();
        let id = HsDeriv::identity(2, 2, 5);
        let mut trace = PipelineTrace::new();
        let out = bridge_leap(&id, 6, &ideal, &oracle(), &mut trace).unwrap();
        assert_eq!(out, HsDeriv::identity(2, 2, 6));
        assert!(matches!(
            bridge_leap(&id.resized(7), 8, &ideal, &oracle(), &mut trace),
            Err(IntegrateError::UnsupportedOrder(8))
        ));
        assert!(matches!(
            bridge_leap(&id.resized(4), 5, &ideal, &oracle(), &mut trace),
            Err(IntegrateError::UnsupportedOrder(5))
        ));
    }

    #[test]
    fn bridge_char2_cusp_flow() {
        let (ideal, vars) = cusp_char2();
        let d = torus_flow(2, &vars, 5);
        let mut trace = PipelineTrace::new();
        let out = bridge_leap(&d, 6, &ideal, &oracle(), &mut trace).unwrap();
        assert_eq!(out.length(), 6);
        assert_eq!(out.first_component(), d.first_component());
        assert!(out.is_logarithmic(&ideal, 6));
        let text = trace.to_text();
        assert!(text.contains("step rescale"));
        assert!(text.contains("step final-compose"));
    }
}
