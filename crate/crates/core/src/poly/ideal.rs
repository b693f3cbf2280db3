//! Groebner bases and normal forms.
//!
//! Buchberger's algorithm with a first-in-first-out pair queue, the coprime
//! leading-term criterion, and full auto-reduction of the final basis. Every
//! choice (pair order, reduction order, final sorting) is deterministic, so
//! equal generator sequences always produce the identical presentation.
//! A step budget guards against runaway computations.

use thiserror::Error;

use super::{Monomial, Poly};

/// Default cap on division steps across one Groebner computation.
pub const DEFAULT_GROEBNER_BUDGET: u64 = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdealError {
    #[error("groebner computation exceeded its budget of {0} reduction steps")]
    BudgetExceeded(u64),
    #[error("generators mix moduli or variable counts")]
    MixedContext,
}

/// An ideal of F_p[x_1..x_k]: the original generators plus a reduced
/// Groebner basis used for normal forms and membership tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealPresentation {
    p: u64,
    nvars: usize,
    generators: Vec<Poly>,
    basis: Vec<Poly>,
}

impl IdealPresentation {
    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// The generators as supplied (zero entries removed).
    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    /// The reduced Groebner basis: monic, pairwise irreducible, sorted with
    /// the largest leading monomial first. Empty exactly for the zero ideal.
    pub fn basis(&self) -> &[Poly] {
        &self.basis
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.basis.is_empty()
    }

    /// Remainder of `f` under division by the basis. The result contains no
    /// term divisible by any basis leading monomial, satisfies
    /// `f - normal_form(f)` in the ideal, and is F_p-linear in `f`.
    pub fn normal_form(&self, f: &Poly) -> Poly {
        let mut budget = u64::MAX;
        reduce(f, &self.basis, &mut budget).expect("unbounded budget")
    }

    /// Ideal membership: the normal form vanishes.
    pub fn contains(&self, f: &Poly) -> bool {
        self.normal_form(f).is_zero()
    }
}

/// Divides `f` by the list `basis`, always reducing the largest reducible
/// term against the first divisor (in list order) whose leading monomial
/// divides it. Each single-term cancellation consumes one unit of budget.
fn reduce(f: &Poly, basis: &[Poly], budget: &mut u64) -> Result<Poly, IdealError> {
    let mut work = f.clone();
    let mut remainder = Poly::zero(f.modulus(), f.nvars());
    'outer: while let Some((mono, coeff)) = work.leading().map(|(m, c)| (m.clone(), c)) {
        for g in basis {
            let (gm, gc) = g.leading().expect("basis elements are nonzero");
            if gm.divides(&mono) {
                if *budget == 0 {
                    return Err(IdealError::BudgetExceeded(0));
                }
                *budget -= 1;
                let q = mono.div(gm);
                let factor = coeff * gc.inv().expect("leading coefficient nonzero");
                work = work.sub(&g.mul_monomial(&q, factor));
                continue 'outer;
            }
        }
        // Irreducible leading term: move it to the remainder.
        remainder.add_term(mono.clone(), coeff.value());
        work.add_term(mono, (-coeff).value());
    }
    Ok(remainder)
}

/// Computes the reduced Groebner basis of the ideal generated by `gens`
/// with the default budget.
pub fn groebner_basis(gens: &[Poly]) -> Result<IdealPresentation, IdealError> {
    groebner_basis_with_budget(gens, DEFAULT_GROEBNER_BUDGET)
}

/// As [`groebner_basis`], with an explicit cap on division steps.
pub fn groebner_basis_with_budget(
    gens: &[Poly],
    budget: u64,
) -> Result<IdealPresentation, IdealError> {
    assert!(
        !gens.is_empty(),
        "need at least one generator (use 0 for the zero ideal)"
    );
    let p = gens[0].modulus();
    let nvars = gens[0].nvars();
    if gens.iter().any(|g| g.modulus() != p || g.nvars() != nvars) {
        return Err(IdealError::MixedContext);
    }
    let generators: Vec<Poly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let mut remaining = budget;
    let mut basis: Vec<Poly> = Vec::new();
    for g in &generators {
        let r =
            reduce(g, &basis, &mut remaining).map_err(|_| IdealError::BudgetExceeded(budget))?;
        if !r.is_zero() {
            basis.push(make_monic(&r));
        }
    }

    let mut queue: std::collections::VecDeque<(usize, usize)> = std::collections::VecDeque::new();
    for i in 0..basis.len() {
        for j in 0..i {
            queue.push_back((j, i));
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        let (mi, _) = basis[i].leading().expect("nonzero");
        let (mj, _) = basis[j].leading().expect("nonzero");
        let lcm = mi.lcm(mj);
        // Coprime leading monomials reduce to zero automatically.
        if lcm == mi.mul(mj) {
            continue;
        }
        let s = spoly(&basis[i], &basis[j], &lcm);
        let r =
            reduce(&s, &basis, &mut remaining).map_err(|_| IdealError::BudgetExceeded(budget))?;
        if !r.is_zero() {
            let r = make_monic(&r);
            for k in 0..basis.len() {
                queue.push_back((k, basis.len()));
            }
            basis.push(r);
        }
    }

    let basis =
        auto_reduce(basis, &mut remaining).map_err(|_| IdealError::BudgetExceeded(budget))?;
    Ok(IdealPresentation {
        p,
        nvars,
        generators,
        basis,
    })
}

fn make_monic(f: &Poly) -> Poly {
    let (_, c) = f.leading().expect("nonzero");
    f.scale(c.inv().expect("leading coefficient nonzero"))
}

fn spoly(f: &Poly, g: &Poly, lcm: &Monomial) -> Poly {
    let (mf, cf) = f.leading().expect("nonzero");
    let (mg, cg) = g.leading().expect("nonzero");
    let a = f.mul_monomial(&lcm.div(mf), cf.inv().expect("nonzero"));
    let b = g.mul_monomial(&lcm.div(mg), cg.inv().expect("nonzero"));
    a.sub(&b)
}

/// Reduces each element against the others until stable, then sorts by
/// leading monomial, largest first.
fn auto_reduce(mut basis: Vec<Poly>, budget: &mut u64) -> Result<Vec<Poly>, IdealError> {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < basis.len() {
            let elem = basis.remove(i);
            let r = reduce(&elem, &basis, budget)?;
            if r.is_zero() {
                changed = true;
                continue;
            }
            let r = make_monic(&r);
            if r != elem {
                changed = true;
            }
            basis.insert(i, r);
            i += 1;
        }
        if !changed {
            break;
        }
    }
    basis.sort_by(|a, b| {
        let (ma, _) = a.leading().expect("nonzero");
        let (mb, _) = b.leading().expect("nonzero");
        mb.cmp(ma)
    });
    Ok(basis)
}
