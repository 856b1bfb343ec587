//! Finite commutative rings with involution: Z/m and (Z/m)[t]/(t^2 - d).
//!
//! Every element is kept in canonical form (coefficients reduced mod m), so
//! equality is plain coefficient equality and all arithmetic is exact.

use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which carrier the ring uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingKind {
    /// Z/m
    Residue { m: u64 },
    /// (Z/m)[t]/(t^2 - d), elements a + b t
    QuadExt { m: u64, d: u64 },
}

/// Involution choice. `Conj` sends t to -t and is only valid on `QuadExt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Involution {
    Id,
    Conj,
}

/// Canonical ring element. For `Residue` rings `b` is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem {
    pub a: u64,
    pub b: u64,
}

impl RingElem {
    pub const fn new(a: u64, b: u64) -> Self {
        RingElem { a, b }
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}t", self.a, self.b)
        }
    }
}

/// Unvalidated description of a ring with involution and the Hermitian data
/// (λ, μ). Run [`RingSpec::validate`] to obtain a usable [`Ring`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSpec {
    pub kind: RingKind,
    pub involution: Involution,
    pub lambda: RingElem,
    pub mu: RingElem,
}

impl RingSpec {
    /// Z/m with trivial involution and λ = μ = 1.
    pub fn zmod(m: u64) -> Self {
        RingSpec {
            kind: RingKind::Residue { m },
            involution: Involution::Id,
            lambda: RingElem::new(1 % m, 0),
            mu: RingElem::new(1 % m, 0),
        }
    }

    /// (Z/m)[t]/(t^2 - d) with t ↦ -t and λ = μ = 1.
    pub fn quadext(m: u64, d: u64) -> Self {
        RingSpec {
            kind: RingKind::QuadExt { m, d: d % m },
            involution: Involution::Conj,
            lambda: RingElem::new(1 % m, 0),
            mu: RingElem::new(1 % m, 0),
        }
    }

    pub fn with_lambda_mu(mut self, lambda: RingElem, mu: RingElem) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }

    /// Parse the CLI/JSON ring description: "zmod:m" or "quadext:m:d".
    pub fn parse_ring_str(s: &str) -> Result<RingKind, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["zmod", m] => {
                let m: u64 = m.parse().map_err(|_| Error::BadRingDescription(s.into()))?;
                if m < 2 {
                    return Err(Error::BadRingDescription(s.into()));
                }
                Ok(RingKind::Residue { m })
            }
            ["quadext", m, d] => {
                let m: u64 = m.parse().map_err(|_| Error::BadRingDescription(s.into()))?;
                let d: u64 = d.parse().map_err(|_| Error::BadRingDescription(s.into()))?;
                if m < 2 {
                    return Err(Error::BadRingDescription(s.into()));
                }
                Ok(RingKind::QuadExt { m, d: d % m })
            }
            _ => Err(Error::BadRingDescription(s.into())),
        }
    }

    /// Check all Hermitian-ring laws and return the validated handle.
    ///
    /// Rejects: λ not a unit, λ̄ ≠ λ^{-1}, μ ≠ μ̄λ, involution on the wrong
    /// carrier, and any failure of the involution laws (checked exhaustively
    /// for |R| ≤ 256, on 50 pseudo-random elements otherwise).
    pub fn validate(&self) -> Result<Ring, Error> {
        let m = match self.kind {
            RingKind::Residue { m } | RingKind::QuadExt { m, .. } => m,
        };
        if m < 2 {
            return Err(Error::BadRingDescription(format!("modulus {m} < 2")));
        }
        if matches!(self.involution, Involution::Conj) && matches!(self.kind, RingKind::Residue { .. }) {
            return Err(Error::InvalidRing("conj involution needs a quadratic extension".into()));
        }
        let ring = Ring {
            kind: self.kind,
            involution: self.involution,
            lambda: RingElem::new(0, 0),
            lambda_inv: RingElem::new(0, 0),
            mu: RingElem::new(0, 0),
        };
        let lambda = ring.canon(self.lambda);
        let mu = ring.canon(self.mu);
        let lambda_inv = ring
            .inv(lambda)
            .ok_or_else(|| Error::InvalidRing(format!("lambda {lambda} is not a unit")))?;
        let ring = Ring { kind: self.kind, involution: self.involution, lambda, lambda_inv, mu };

        // λ̄ = λ^{-1}
        if ring.invol(lambda) != lambda_inv {
            return Err(Error::InvalidRing(format!(
                "involution(lambda) = {} but lambda^-1 = {}",
                ring.invol(lambda),
                lambda_inv
            )));
        }
        // μ = μ̄ λ
        if mu != ring.mul(ring.invol(mu), lambda) {
            return Err(Error::InvalidRing(format!("mu {} != involution(mu)*lambda", mu)));
        }
        // involution laws: additive, anti-multiplicative, fixes 1, x̄̄ = λxλ̄
        let check = |x: RingElem, y: RingElem| -> Result<(), Error> {
            let ix = ring.invol(x);
            let iy = ring.invol(y);
            if ring.invol(ring.add(x, y)) != ring.add(ix, iy) {
                return Err(Error::InvalidRing(format!("involution not additive at {x}, {y}")));
            }
            if ring.invol(ring.mul(x, y)) != ring.mul(iy, ix) {
                return Err(Error::InvalidRing(format!("involution not anti-multiplicative at {x}, {y}")));
            }
            let twice = ring.invol(ix);
            if twice != ring.mul(ring.mul(lambda, x), lambda_inv) {
                return Err(Error::InvalidRing(format!("invol(invol({x})) != lambda*{x}*inv(lambda)")));
            }
            Ok(())
        };
        if ring.size() <= 256 {
            for i in 0..ring.size() {
                for j in 0..ring.size() {
                    check(ring.elem_by_index(i), ring.elem_by_index(j))?;
                }
            }
        } else {
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..50 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = ring.elem_by_index((state >> 16) as usize % ring.size());
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let y = ring.elem_by_index((state >> 16) as usize % ring.size());
                check(x, y)?;
            }
        }
        if ring.invol(ring.one()) != ring.one() {
            return Err(Error::InvalidRing("involution does not fix 1".into()));
        }
        Ok(ring)
    }
}

/// A validated finite commutative ring with involution, symmetry λ and μ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    kind: RingKind,
    involution: Involution,
    lambda: RingElem,
    lambda_inv: RingElem,
    mu: RingElem,
}

impl Ring {
    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn involution_kind(&self) -> Involution {
        self.involution
    }

    pub fn modulus(&self) -> u64 {
        match self.kind {
            RingKind::Residue { m } | RingKind::QuadExt { m, .. } => m,
        }
    }

    pub fn lambda(&self) -> RingElem {
        self.lambda
    }

    pub fn lambda_inv(&self) -> RingElem {
        self.lambda_inv
    }

    pub fn mu(&self) -> RingElem {
        self.mu
    }

    /// Number of elements: m for Z/m, m² for the quadratic extension.
    pub fn size(&self) -> usize {
        match self.kind {
            RingKind::Residue { m } => m as usize,
            RingKind::QuadExt { m, .. } => (m * m) as usize,
        }
    }

    pub fn zero(&self) -> RingElem {
        RingElem::new(0, 0)
    }

    pub fn one(&self) -> RingElem {
        RingElem::new(1 % self.modulus(), 0)
    }

    pub fn two(&self) -> RingElem {
        self.from_i64(2)
    }

    pub fn canon(&self, x: RingElem) -> RingElem {
        let m = self.modulus();
        match self.kind {
            RingKind::Residue { .. } => RingElem::new(x.a % m, 0),
            RingKind::QuadExt { .. } => RingElem::new(x.a % m, x.b % m),
        }
    }

    pub fn from_i64(&self, v: i64) -> RingElem {
        let m = self.modulus() as i64;
        RingElem::new(v.rem_euclid(m) as u64, 0)
    }

    /// a + b t (b is ignored/must be reducible for residue rings).
    pub fn from_coeffs(&self, a: i64, b: i64) -> RingElem {
        let m = self.modulus() as i64;
        match self.kind {
            RingKind::Residue { .. } => {
                debug_assert!(b.rem_euclid(m) == 0 || b == 0);
                RingElem::new(a.rem_euclid(m) as u64, 0)
            }
            RingKind::QuadExt { .. } => RingElem::new(a.rem_euclid(m) as u64, b.rem_euclid(m) as u64),
        }
    }

    pub fn add(&self, x: RingElem, y: RingElem) -> RingElem {
        let m = self.modulus();
        RingElem::new((x.a + y.a) % m, (x.b + y.b) % m)
    }

    pub fn neg(&self, x: RingElem) -> RingElem {
        let m = self.modulus();
        RingElem::new((m - x.a) % m, (m - x.b) % m)
    }

    pub fn sub(&self, x: RingElem, y: RingElem) -> RingElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: RingElem, y: RingElem) -> RingElem {
        let m = self.modulus();
        match self.kind {
            RingKind::Residue { .. } => RingElem::new(x.a * y.a % m, 0),
            RingKind::QuadExt { d, .. } => {
                // (a1 + b1 t)(a2 + b2 t) = a1 a2 + d b1 b2 + (a1 b2 + b1 a2) t
                let a = (x.a * y.a + d * (x.b * y.b % m)) % m;
                let b = (x.a * y.b + x.b * y.a) % m;
                RingElem::new(a, b)
            }
        }
    }

    /// The involution x ↦ x̄.
    pub fn invol(&self, x: RingElem) -> RingElem {
        match self.involution {
            Involution::Id => x,
            Involution::Conj => RingElem::new(x.a, (self.modulus() - x.b) % self.modulus()),
        }
    }

    /// The inverse of the involution: x ↦ λ̄ x̄ λ.
    pub fn underbar(&self, x: RingElem) -> RingElem {
        self.mul(self.mul(self.lambda_inv, self.invol(x)), self.lambda)
    }

    /// Multiplicative inverse, or `None` when x is not a unit.
    ///
    /// Quadratic extensions invert through the 2x2 regular representation
    /// over Z/m (adjugate divided by the norm), so no factoring is needed.
    pub fn inv(&self, x: RingElem) -> Option<RingElem> {
        let m = self.modulus();
        match self.kind {
            RingKind::Residue { .. } => inv_mod(x.a, m).map(|v| RingElem::new(v, 0)),
            RingKind::QuadExt { d, .. } => {
                // norm(a + bt) = a^2 - d b^2; inverse = (a - bt)/norm
                let norm = ((x.a * x.a + m * m - d * (x.b * x.b % m) % m) % m) % m;
                let ninv = inv_mod(norm, m)?;
                Some(RingElem::new(x.a * ninv % m, (m - x.b) % m * ninv % m))
            }
        }
    }

    pub fn is_unit(&self, x: RingElem) -> bool {
        self.inv(x).is_some()
    }

    /// λ^k for any integer k (negative powers through λ^{-1}).
    pub fn lambda_pow(&self, k: i64) -> RingElem {
        let base = if k >= 0 { self.lambda } else { self.lambda_inv };
        let mut acc = self.one();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    /// Dense index in 0..size(), used by the enumeration machinery.
    pub fn index_of(&self, x: RingElem) -> usize {
        match self.kind {
            RingKind::Residue { .. } => x.a as usize,
            RingKind::QuadExt { m, .. } => (x.a + x.b * m) as usize,
        }
    }

    pub fn elem_by_index(&self, idx: usize) -> RingElem {
        match self.kind {
            RingKind::Residue { .. } => RingElem::new(idx as u64, 0),
            RingKind::QuadExt { m, .. } => RingElem::new(idx as u64 % m, idx as u64 / m),
        }
    }

    /// All elements in canonical index order.
    pub fn elems(&self) -> impl Iterator<Item = RingElem> + '_ {
        (0..self.size()).map(|i| self.elem_by_index(i))
    }

    /// Ring description string for the CLI/JSON contract.
    pub fn ring_str(&self) -> String {
        match self.kind {
            RingKind::Residue { m } => format!("zmod:{m}"),
            RingKind::QuadExt { m, d } => format!("quadext:{m}:{d}"),
        }
    }

    pub fn involution_str(&self) -> &'static str {
        match self.involution {
            Involution::Id => "id",
            Involution::Conj => "conj",
        }
    }
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    // extended Euclid
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 == 1 {
        Some((s0.rem_euclid(m as i128)) as u64)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z5() -> Ring {
        RingSpec::zmod(5).validate().unwrap()
    }

    fn z3t() -> Ring {
        // (Z/3)[t]/(t^2+1): d = -1 ≡ 2 (mod 3)
        RingSpec::quadext(3, 2).validate().unwrap()
    }

    #[test]
    fn validate_z5_trivial() {
        assert!(RingSpec::zmod(5).validate().is_ok());
    }

    #[test]
    fn validate_rejects_bad_lambda() {
        // λ=2 over Z/5: λ̄=2 but λ^{-1}=3
        let spec = RingSpec::zmod(5).with_lambda_mu(RingElem::new(2, 0), RingElem::new(1, 0));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn validate_rejects_bad_mu() {
        // λ=1, μ must satisfy μ=μ̄λ; trivial involution makes every μ valid over Z/5,
        // so break it on the quadratic extension: μ=t has μ̄=-t≠t.
        let spec = RingSpec::quadext(3, 2).with_lambda_mu(RingElem::new(1, 0), RingElem::new(0, 1));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn validate_z3t_exhaustive() {
        // all three laws hold over the 9 elements
        assert!(RingSpec::quadext(3, 2).validate().is_ok());
    }

    #[test]
    fn lambda_minus_one_mu_zero_admitted() {
        let spec = RingSpec::zmod(8).with_lambda_mu(RingElem::new(7, 0), RingElem::new(0, 0));
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn involution_examples() {
        let r = z5();
        assert_eq!(r.invol(RingElem::new(4, 0)), RingElem::new(4, 0));
        let q = z3t();
        // (1+2t) -> (1+t) since -2 ≡ 1 mod 3
        assert_eq!(q.invol(RingElem::new(1, 2)), RingElem::new(1, 1));
        // λ=1: involution is an involution
        for x in q.elems() {
            assert_eq!(q.invol(q.invol(x)), x);
        }
    }

    #[test]
    fn underbar_inverts_involution() {
        let q = z3t();
        for x in q.elems() {
            assert_eq!(q.underbar(q.invol(x)), x);
            assert_eq!(q.invol(q.underbar(x)), x);
        }
        assert_eq!(q.underbar(q.one()), q.one());
    }

    #[test]
    fn unit_inverse_examples() {
        let r = z5();
        assert_eq!(r.inv(RingElem::new(2, 0)), Some(RingElem::new(3, 0)));
        let z8 = RingSpec::zmod(8).validate().unwrap();
        assert_eq!(z8.inv(RingElem::new(2, 0)), None);
        let q = z3t();
        let x = RingElem::new(1, 1);
        let y = q.inv(x).expect("1+t is a unit in (Z/3)[t]/(t^2+1)");
        assert_eq!(q.mul(x, y), q.one());
    }

    #[test]
    fn lambda_power() {
        let r = z5();
        assert_eq!(r.lambda_pow(0), r.one());
        assert_eq!(r.lambda_pow(-1), r.invol(r.lambda()));
        assert_eq!(r.lambda_pow(7), r.one());
        let neg = RingSpec::zmod(8)
            .with_lambda_mu(RingElem::new(7, 0), RingElem::new(0, 0))
            .validate()
            .unwrap();
        assert_eq!(neg.lambda_pow(-1), neg.from_i64(-1));
        assert_eq!(neg.lambda_pow(2), neg.one());
    }

    #[test]
    fn ring_axioms_exhaustive_small() {
        for ring in [z5(), z3t(), RingSpec::zmod(4).validate().unwrap()] {
            if ring.size() > 16 {
                continue;
            }
            for x in ring.elems() {
                for y in ring.elems() {
                    assert_eq!(ring.add(x, y), ring.add(y, x));
                    assert_eq!(ring.mul(x, y), ring.mul(y, x));
                    for z in ring.elems() {
                        assert_eq!(ring.add(ring.add(x, y), z), ring.add(x, ring.add(y, z)));
                        assert_eq!(ring.mul(ring.mul(x, y), z), ring.mul(x, ring.mul(y, z)));
                        assert_eq!(
                            ring.mul(x, ring.add(y, z)),
                            ring.add(ring.mul(x, y), ring.mul(x, z))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_times_self_is_one() {
        for ring in [RingSpec::zmod(8).validate().unwrap(), z3t()] {
            for x in ring.elems() {
                if let Some(y) = ring.inv(x) {
                    assert_eq!(ring.mul(x, y), ring.one());
                }
            }
        }
    }

    #[test]
    fn parse_ring_strings() {
        assert_eq!(RingSpec::parse_ring_str("zmod:5").unwrap(), RingKind::Residue { m: 5 });
        assert_eq!(
            RingSpec::parse_ring_str("quadext:3:2").unwrap(),
            RingKind::QuadExt { m: 3, d: 2 }
        );
        assert!(RingSpec::parse_ring_str("zmod:1").is_err());
        assert!(RingSpec::parse_ring_str("gf:9").is_err());
    }
}
