//! The Heisenberg group ℌ = R×R with its twisted addition, the trace map,
//! odd form parameters Δ (as enumerated sets over finite rings) and odd
//! form ideals (I, Ω) with their derived sets.

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};

/// Element (x, y) of ℌ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisElem {
    pub x: RingElem,
    pub y: RingElem,
}

impl HeisElem {
    pub fn new(x: RingElem, y: RingElem) -> Self {
        HeisElem { x, y }
    }

    pub fn zero(r: &Ring) -> Self {
        HeisElem::new(r.zero(), r.zero())
    }
}

/// Mirror selector: +1 uses (R, ¯, λ, μ), -1 the underbar ring
/// (R, underbar, λ̄, μ̄-analog). Mirrors index the Δ^{±1} structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mirror {
    Plus,
    Minus,
}

impl Mirror {
    pub fn from_sign(s: i64) -> Self {
        if s >= 0 {
            Mirror::Plus
        } else {
            Mirror::Minus
        }
    }

    /// Mirror -ε(i), the one governing T_i parameters.
    pub fn for_extra_index(i: i32) -> Self {
        Self::from_sign(-crate::theta::eps(i))
    }
}

/// The μ used by a mirror's twisted addition.
fn mirror_mu(r: &Ring, m: Mirror) -> RingElem {
    match m {
        Mirror::Plus => r.mu(),
        Mirror::Minus => r.underbar(r.mu()),
    }
}

/// The conjugation used by a mirror (involution or its inverse).
fn mirror_bar(r: &Ring, m: Mirror, x: RingElem) -> RingElem {
    match m {
        Mirror::Plus => r.invol(x),
        Mirror::Minus => r.underbar(x),
    }
}

/// (x1,y1) ∔ (x2,y2) = (x1+x2, y1+y2 − x̄1 μ x2) in the chosen mirror.
pub fn heis_add(r: &Ring, m: Mirror, a: HeisElem, b: HeisElem) -> HeisElem {
    let mu = mirror_mu(r, m);
    HeisElem::new(
        r.add(a.x, b.x),
        r.sub(r.add(a.y, b.y), r.mul(r.mul(mirror_bar(r, m, a.x), mu), b.x)),
    )
}

/// ∸(x,y) = (−x, −y − x̄ μ x) in the chosen mirror.
pub fn heis_neg(r: &Ring, m: Mirror, a: HeisElem) -> HeisElem {
    let mu = mirror_mu(r, m);
    HeisElem::new(
        r.neg(a.x),
        r.sub(r.neg(a.y), r.mul(r.mul(mirror_bar(r, m, a.x), mu), a.x)),
    )
}

pub fn heis_sub(r: &Ring, m: Mirror, a: HeisElem, b: HeisElem) -> HeisElem {
    heis_add(r, m, a, heis_neg(r, m, b))
}

/// (x,y) ∘ a = (x a, ā y a) in the chosen mirror.
pub fn heis_scale(r: &Ring, m: Mirror, h: HeisElem, a: RingElem) -> HeisElem {
    HeisElem::new(r.mul(h.x, a), r.mul(r.mul(mirror_bar(r, m, a), h.y), a))
}

/// tr(x,y) = x̄ μ x + y + ȳ λ (base mirror).
pub fn trace(r: &Ring, h: HeisElem) -> RingElem {
    let t = r.mul(r.mul(r.invol(h.x), r.mu()), h.x);
    r.add(r.add(t, h.y), r.mul(r.invol(h.y), r.lambda()))
}

/// Membership in Δ_min = {(0, x − x̄λ)} (decided by scanning the finite ring)
pub fn in_delta_min(r: &Ring, h: HeisElem) -> bool {
    if h.x != r.zero() {
        return false;
    }
    r.elems().any(|x| h.y == r.sub(x, r.mul(r.invol(x), r.lambda())))
}

/// Membership in Δ_max = ker(tr).
pub fn in_delta_max(r: &Ring, h: HeisElem) -> bool {
    trace(r, h) == r.zero()
}

/// An odd form parameter as an enumerated subset of ℌ, with O(1) membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSet {
    size: usize,
    mask: Vec<bool>,
    elems: Vec<HeisElem>,
}

impl DeltaSet {
    fn from_mask(r: &Ring, mask: Vec<bool>) -> Self {
        let s = r.size();
        let mut elems = Vec::new();
        for xi in 0..s {
            for yi in 0..s {
                if mask[xi * s + yi] {
                    elems.push(HeisElem::new(r.elem_by_index(xi), r.elem_by_index(yi)));
                }
            }
        }
        DeltaSet { size: s, mask, elems }
    }

    pub fn contains(&self, r: &Ring, h: HeisElem) -> bool {
        self.mask[r.index_of(h.x) * self.size + r.index_of(h.y)]
    }

    /// Elements in canonical (x-index, y-index) order.
    pub fn elems(&self) -> &[HeisElem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn delta_min(r: &Ring) -> Self {
        let s = r.size();
        let mut mask = vec![false; s * s];
        for x in r.elems() {
            let y = r.sub(x, r.mul(r.invol(x), r.lambda()));
            mask[r.index_of(r.zero()) * s + r.index_of(y)] = true;
        }
        Self::from_mask(r, mask)
    }

    pub fn delta_max(r: &Ring) -> Self {
        let s = r.size();
        let mut mask = vec![false; s * s];
        for x in r.elems() {
            for y in r.elems() {
                if in_delta_max(r, HeisElem::new(x, y)) {
                    mask[r.index_of(x) * s + r.index_of(y)] = true;
                }
            }
        }
        Self::from_mask(r, mask)
    }

    /// Smallest set containing Δ_min and the generators, closed under
    /// ∔, ∸ and ∘ by every ring element. Errors if a generator is outside
    /// Δ_max.
    pub fn closure(r: &Ring, generators: &[HeisElem]) -> Result<Self> {
        for &g in generators {
            if !in_delta_max(r, g) {
                return Err(Error::GeneratorOutsideDeltaMax);
            }
        }
        let s = r.size();
        let mut mask = vec![false; s * s];
        for x in r.elems() {
            let y = r.sub(x, r.mul(r.invol(x), r.lambda()));
            mask[r.index_of(r.zero()) * s + r.index_of(y)] = true;
        }
        for &g in generators {
            mask[r.index_of(g.x) * s + r.index_of(g.y)] = true;
        }
        // fixpoint iteration; the set is finite
        loop {
            let set = Self::from_mask(r, mask.clone());
            let mut grew = false;
            for &a in set.elems() {
                for &b in set.elems() {
                    let h = heis_add(r, Mirror::Plus, a, b);
                    let idx = r.index_of(h.x) * s + r.index_of(h.y);
                    if !mask[idx] {
                        mask[idx] = true;
                        grew = true;
                    }
                }
                let hn = heis_neg(r, Mirror::Plus, a);
                let idx = r.index_of(hn.x) * s + r.index_of(hn.y);
                if !mask[idx] {
                    mask[idx] = true;
                    grew = true;
                }
                for x in r.elems() {
                    let hs = heis_scale(r, Mirror::Plus, a, x);
                    let idx = r.index_of(hs.x) * s + r.index_of(hs.y);
                    if !mask[idx] {
                        mask[idx] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let set = Self::from_mask(r, mask);
        let dmax = Self::delta_max(r);
        for &h in set.elems() {
            if !dmax.contains(r, h) {
                return Err(Error::GeneratorOutsideDeltaMax);
            }
        }
        Ok(set)
    }

    /// Δ^{-1} = {(x,y) | (x, ȳ) ∈ Δ}.
    pub fn mirror(&self, r: &Ring) -> Self {
        let s = r.size();
        let mut mask = vec![false; s * s];
        for x in r.elems() {
            for y in r.elems() {
                if self.contains(r, HeisElem::new(x, r.invol(y))) {
                    mask[r.index_of(x) * s + r.index_of(y)] = true;
                }
            }
        }
        Self::from_mask(r, mask)
    }

    /// J(Δ) = {y | ∃z: (y,z) ∈ Δ} as a sorted-by-index element list.
    pub fn j_delta(&self, r: &Ring) -> Vec<RingElem> {
        let mut seen = vec![false; r.size()];
        for h in &self.elems {
            seen[r.index_of(h.x)] = true;
        }
        (0..r.size()).filter(|&i| seen[i]).map(|i| r.elem_by_index(i)).collect()
    }

    /// Verify the three closure laws hold (used as a post-condition).
    pub fn is_closed(&self, r: &Ring) -> bool {
        for &a in self.elems() {
            if !self.contains(r, heis_neg(r, Mirror::Plus, a)) {
                return false;
            }
            for x in r.elems() {
                if !self.contains(r, heis_scale(r, Mirror::Plus, a, x)) {
                    return false;
                }
            }
            for &b in self.elems() {
                if !self.contains(r, heis_add(r, Mirror::Plus, a, b)) {
                    return false;
                }
            }
        }
        true
    }
}

/// Scale-by-a-sum expansion for (a,b) ∈ Δ_max:
/// (a,b) ∘ Σ x_i = (∔_i (a,b)∘x_i) ∔ (0, Σ_{i<j} x_i b x̄_j − (x_i b x̄_j)‾ λ),
/// the ∔-product taken left to right in the order of `xs` and each
/// correction pair multiplying the earlier term by the conjugated later one.
/// Returns (lhs, rhs); callers assert equality. Errors when h ∉ Δ_max.
pub fn scale_sum_expand(r: &Ring, h: HeisElem, xs: &[RingElem]) -> Result<(HeisElem, HeisElem)> {
    if !in_delta_max(r, h) {
        return Err(Error::GeneratorOutsideDeltaMax);
    }
    let total = xs.iter().fold(r.zero(), |acc, &x| r.add(acc, x));
    let lhs = heis_scale(r, Mirror::Plus, h, total);
    let mut acc = HeisElem::zero(r);
    for &x in xs {
        acc = heis_add(r, Mirror::Plus, acc, heis_scale(r, Mirror::Plus, h, x));
    }
    let rhs = heis_add(r, Mirror::Plus, acc, HeisElem::new(r.zero(), scale_sum_correction(r, h.y, xs)));
    Ok((lhs, rhs))
}

/// The pairwise skew correction Σ_{i<j} x_i b x̄_j − (x_i b x̄_j)‾ λ.
pub fn scale_sum_correction(r: &Ring, b: RingElem, xs: &[RingElem]) -> RingElem {
    let mut corr = r.zero();
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let v = r.mul(r.mul(xs[i], b), r.invol(xs[j]));
            corr = r.add(corr, r.sub(v, r.mul(r.invol(v), r.lambda())));
        }
    }
    corr
}

/// An ideal of a finite ring, stored as generators plus the enumerated
/// closure under addition and ring multiplication (Z/m ideals normalize to
/// a single gcd generator; quadratic extensions keep the generator list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealDesc {
    pub gens: Vec<RingElem>,
    mask: Vec<bool>,
    elems: Vec<RingElem>,
}

impl IdealDesc {
    pub fn new(r: &Ring, gens: &[RingElem]) -> Self {
        let mut mask = vec![false; r.size()];
        mask[r.index_of(r.zero())] = true;
        for &g in gens {
            mask[r.index_of(r.canon(g))] = true;
        }
        loop {
            let mut grew = false;
            let current: Vec<RingElem> =
                (0..r.size()).filter(|&i| mask[i]).map(|i| r.elem_by_index(i)).collect();
            for &a in &current {
                for &b in &current {
                    let s = r.add(a, b);
                    if !mask[r.index_of(s)] {
                        mask[r.index_of(s)] = true;
                        grew = true;
                    }
                }
                for c in r.elems() {
                    let p = r.mul(a, c);
                    if !mask[r.index_of(p)] {
                        mask[r.index_of(p)] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let elems: Vec<RingElem> =
            (0..r.size()).filter(|&i| mask[i]).map(|i| r.elem_by_index(i)).collect();
        // gcd normal form over Z/m
        let gens = match r.kind() {
            crate::ring::RingKind::Residue { m } => {
                let g = gens.iter().fold(m, |acc, e| gcd(acc, e.a % m));
                vec![RingElem::new(g % m, 0)]
            }
            _ => gens.to_vec(),
        };
        IdealDesc { gens, mask, elems }
    }

    pub fn zero(r: &Ring) -> Self {
        Self::new(r, &[])
    }

    pub fn full(r: &Ring) -> Self {
        Self::new(r, &[r.one()])
    }

    pub fn contains(&self, r: &Ring, x: RingElem) -> bool {
        self.mask[r.index_of(x)]
    }

    pub fn elems(&self) -> &[RingElem] {
        &self.elems
    }

    pub fn is_involution_invariant(&self, r: &Ring) -> bool {
        self.elems.iter().all(|&x| self.contains(r, r.invol(x)))
    }

    pub fn is_subset_of(&self, other: &IdealDesc) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The derived data of an odd form ideal at level I.
#[derive(Debug, Clone)]
pub struct FormIdealDerived {
    /// J(Δ)
    pub j_delta: Vec<RingElem>,
    /// Ĩ = {x | J(Δ)̄ μ x ⊆ I}
    pub i_tilde: Vec<RingElem>,
    /// I_0 = {x | x J(Δ) ⊆ I}
    pub i_zero: Vec<RingElem>,
    /// Ĩ_0 = {x | J(Δ)̄ μ x ⊆ I_0}
    pub i_tilde_zero: Vec<RingElem>,
    /// Ω^I_min
    pub omega_min: DeltaSet,
    /// Ω^I_max = Δ ∩ (Ĩ × I)
    pub omega_max: DeltaSet,
}

/// Compute J(Δ), Ĩ, I_0, Ĩ_0 and the Ω^I bounds by enumeration.
/// I must be involution invariant.
pub fn form_ideal_derived(r: &Ring, ideal: &IdealDesc, delta: &DeltaSet) -> Result<FormIdealDerived> {
    if !ideal.is_involution_invariant(r) {
        return Err(Error::NotInvolutionInvariant(format!("{:?}", ideal.gens)));
    }
    let j_delta = delta.j_delta(r);
    let in_set = |list: &[RingElem], x: RingElem| list.iter().any(|&v| v == x);
    let i_tilde: Vec<RingElem> = r
        .elems()
        .filter(|&x| j_delta.iter().all(|&y| ideal.contains(r, r.mul(r.mul(r.invol(y), r.mu()), x))))
        .collect();
    let i_zero: Vec<RingElem> =
        r.elems().filter(|&x| j_delta.iter().all(|&a| ideal.contains(r, r.mul(x, a)))).collect();
    let i_tilde_zero: Vec<RingElem> = r
        .elems()
        .filter(|&x| {
            j_delta.iter().all(|&y| in_set(&i_zero, r.mul(r.mul(r.invol(y), r.mu()), x)))
        })
        .collect();

    // Ω^I_min: the ∔-subgroup generated by {(0, x − x̄λ) | x ∈ I} and Δ∘I
    let s = r.size();
    let mut mask = vec![false; s * s];
    let mut gens: Vec<HeisElem> = Vec::new();
    for &x in ideal.elems() {
        gens.push(HeisElem::new(r.zero(), r.sub(x, r.mul(r.invol(x), r.lambda()))));
    }
    for &d in delta.elems() {
        for &x in ideal.elems() {
            gens.push(heis_scale(r, Mirror::Plus, d, x));
        }
    }
    mask[r.index_of(r.zero()) * s + r.index_of(r.zero())] = true;
    loop {
        let current: Vec<HeisElem> = {
            let mut v = Vec::new();
            for xi in 0..s {
                for yi in 0..s {
                    if mask[xi * s + yi] {
                        v.push(HeisElem::new(r.elem_by_index(xi), r.elem_by_index(yi)));
                    }
                }
            }
            v
        };
        let mut grew = false;
        let touch = |h: HeisElem, mask: &mut Vec<bool>, grew: &mut bool| {
            let idx = r.index_of(h.x) * s + r.index_of(h.y);
            if !mask[idx] {
                mask[idx] = true;
                *grew = true;
            }
        };
        for &g in &gens {
            touch(g, &mut mask, &mut grew);
        }
        for &a in &current {
            touch(heis_neg(r, Mirror::Plus, a), &mut mask, &mut grew);
            for &b in &current {
                touch(heis_add(r, Mirror::Plus, a, b), &mut mask, &mut grew);
            }
        }
        if !grew {
            break;
        }
    }
    let omega_min = DeltaSet::from_mask(r, mask);

    let mut mask = vec![false; s * s];
    for &h in delta.elems() {
        if in_set(&i_tilde, h.x) && ideal.contains(r, h.y) {
            mask[r.index_of(h.x) * s + r.index_of(h.y)] = true;
        }
    }
    let omega_max = DeltaSet::from_mask(r, mask);

    for &h in omega_min.elems() {
        if !omega_max.contains(r, h) {
            return Err(Error::InvalidFormIdeal("Omega_min not inside Omega_max".into()));
        }
    }
    Ok(FormIdealDerived { j_delta, i_tilde, i_zero, i_tilde_zero, omega_min, omega_max })
}
