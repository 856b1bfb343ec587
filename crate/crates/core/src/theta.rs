//! Dense (2n+1)x(2n+1) matrices indexed by Θ = {1..n, 0, -n..-1}.
//!
//! Row/column order follows the basis (e_1,…,e_n,e_0,e_{-n},…,e_{-1}).
//! Inversion goes through the adjugate so it stays total and exact over
//! rings with zero divisors; a matrix is invertible iff its determinant
//! is a unit.

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};

/// Iterator over Θ in display order: 1, …, n, 0, -n, …, -1.
pub fn theta_iter(n: usize) -> impl Iterator<Item = i32> {
    let n = n as i32;
    (1..=n).chain(std::iter::once(0)).chain(-n..=-1)
}

/// Θ_hb = Θ \ {0} in display order.
pub fn theta_hb_iter(n: usize) -> impl Iterator<Item = i32> {
    theta_iter(n).filter(|&i| i != 0)
}

/// Position of an index in the basis order.
pub fn position(n: usize, i: i32) -> usize {
    let ni = n as i32;
    debug_assert!(i.abs() <= ni);
    if i >= 1 {
        (i - 1) as usize
    } else if i == 0 {
        n
    } else {
        (2 * ni + 1 + i) as usize
    }
}

/// Inverse of [`position`].
pub fn index_at(n: usize, pos: usize) -> i32 {
    let ni = n as i32;
    let p = pos as i32;
    if p < ni {
        p + 1
    } else if p == ni {
        0
    } else {
        p - 2 * ni - 1
    }
}

/// ε(i): +1 on Θ_+, -1 on Θ_-. Only defined on Θ_hb.
pub fn eps(i: i32) -> i64 {
    debug_assert!(i != 0);
    if i > 0 {
        1
    } else {
        -1
    }
}

/// Dense matrix over a validated ring, indexed by Θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaMatrix {
    pub n: usize,
    data: Vec<RingElem>,
}

impl ThetaMatrix {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn zero(ring: &Ring, n: usize) -> Self {
        ThetaMatrix { n, data: vec![ring.zero(); (2 * n + 1) * (2 * n + 1)] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Self::zero(ring, n);
        for p in 0..m.dim() {
            m.data[p * (2 * n + 1) + p] = ring.one();
        }
        m
    }

    /// e^{ij}: single 1 at Θ-position (i, j).
    pub fn unit(ring: &Ring, n: usize, i: i32, j: i32) -> Self {
        let mut m = Self::zero(ring, n);
        m.set(i, j, ring.one());
        m
    }

    #[inline]
    pub fn at(&self, i: i32, j: i32) -> RingElem {
        let d = self.dim();
        self.data[position(self.n, i) * d + position(self.n, j)]
    }

    #[inline]
    pub fn set(&mut self, i: i32, j: i32, v: RingElem) {
        let d = self.dim();
        let idx = position(self.n, i) * d + position(self.n, j);
        self.data[idx] = v;
    }

    #[inline]
    pub fn at_pos(&self, r: usize, c: usize) -> RingElem {
        self.data[r * self.dim() + c]
    }

    #[inline]
    pub fn set_pos(&mut self, r: usize, c: usize, v: RingElem) {
        let d = self.dim();
        self.data[r * d + c] = v;
    }

    pub fn row(&self, i: i32) -> Vec<RingElem> {
        let d = self.dim();
        let r = position(self.n, i);
        self.data[r * d..(r + 1) * d].to_vec()
    }

    pub fn col(&self, j: i32) -> Vec<RingElem> {
        let c = position(self.n, j);
        (0..self.dim()).map(|r| self.at_pos(r, c)).collect()
    }

    pub fn mul(&self, ring: &Ring, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let d = self.dim();
        let mut out = Self::zero(ring, self.n);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ring.zero() {
                    continue;
                }
                for c in 0..d {
                    let v = ring.add(out.data[r * d + c], ring.mul(a, other.data[k * d + c]));
                    out.data[r * d + c] = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, ring: &Ring, v: &[RingElem]) -> Vec<RingElem> {
        let d = self.dim();
        assert_eq!(v.len(), d);
        (0..d)
            .map(|r| {
                let mut acc = ring.zero();
                for k in 0..d {
                    acc = ring.add(acc, ring.mul(self.data[r * d + k], v[k]));
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, ring: &Ring, v: &[RingElem]) -> Vec<RingElem> {
        let d = self.dim();
        assert_eq!(v.len(), d);
        (0..d)
            .map(|c| {
                let mut acc = ring.zero();
                for k in 0..d {
                    acc = ring.add(acc, ring.mul(v[k], self.data[k * d + c]));
                }
                acc
            })
            .collect()
    }

    /// Determinant by Laplace expansion memoized over column subsets
    /// (O(d·2^d) ring ops). Division-free, so it works over Z/m with zero
    /// divisors; sized for 2n+1 ≤ 15.
    pub fn det(&self, ring: &Ring) -> RingElem {
        let d = self.dim();
        assert!(d <= 16, "det by subset DP sized for desk-scale matrices");
        // dp over subsets of columns, processed from the last row upward
        let full = (1u32 << d) - 1;
        let mut memo: Vec<Option<RingElem>> = vec![None; 1 << d];
        memo[0] = Some(ring.one());
        fn go(m: &ThetaMatrix, ring: &Ring, row: usize, cols: u32, memo: &mut Vec<Option<RingElem>>) -> RingElem {
            if let Some(v) = memo[cols as usize] {
                return v;
            }
            let mut acc = ring.zero();
            let mut sign_pos = true;
            let d = m.dim();
            for c in 0..d {
                if cols & (1 << c) == 0 {
                    continue;
                }
                let a = m.at_pos(row, c);
                if a != ring.zero() {
                    let sub = go(m, ring, row + 1, cols & !(1 << c), memo);
                    let term = ring.mul(a, sub);
                    acc = if sign_pos { ring.add(acc, term) } else { ring.sub(acc, term) };
                }
                sign_pos = !sign_pos;
            }
            memo[cols as usize] = Some(acc);
            acc
        }
        go(self, ring, 0, full, &mut memo)
    }

    /// Adjugate-based inverse. `Err(NotInvertible)` when det is a non-unit.
    pub fn inv(&self, ring: &Ring) -> Result<Self> {
        let d = self.dim();
        let det = self.det(ring);
        let det_inv = ring.inv(det).ok_or(Error::NotInvertible)?;
        // cofactor matrix via the same subset DP, one row deleted at a time;
        // within a fixed deleted row the memo is keyed by the remaining
        // column set (depth is determined by its size)
        let mut adj = Self::zero(ring, self.n);
        fn go(
            m: &ThetaMatrix,
            ring: &Ring,
            rows: &[usize],
            depth: usize,
            cols: u32,
            memo: &mut [Option<RingElem>],
        ) -> RingElem {
            if depth == rows.len() {
                return ring.one();
            }
            if let Some(v) = memo[cols as usize] {
                return v;
            }
            let mut acc = ring.zero();
            let mut sign_pos = true;
            let d = m.dim();
            for c in 0..d {
                if cols & (1 << c) == 0 {
                    continue;
                }
                let a = m.at_pos(rows[depth], c);
                if a != ring.zero() {
                    let sub = go(m, ring, rows, depth + 1, cols & !(1 << c), memo);
                    let term = ring.mul(a, sub);
                    acc = if sign_pos { ring.add(acc, term) } else { ring.sub(acc, term) };
                }
                sign_pos = !sign_pos;
            }
            memo[cols as usize] = Some(acc);
            acc
        }
        for r in 0..d {
            let rows: Vec<usize> = (0..d).filter(|&x| x != r).collect();
            let full = (1u32 << d) - 1;
            let mut memo: Vec<Option<RingElem>> = vec![None; 1 << d];
            for c in 0..d {
                let cols = full & !(1 << c);
                let minor = go(self, ring, &rows, 0, cols, &mut memo);
                let sign_pos = (r + c) % 2 == 0;
                let cof = if sign_pos { minor } else { ring.neg(minor) };
                // adjugate is the transpose of the cofactor matrix
                adj.set_pos(c, r, ring.mul(cof, det_inv));
            }
        }
        // internal consistency: a * a^{-1} = e
        let e = Self::identity(ring, self.n);
        let prod = self.mul(ring, &adj);
        if prod != e {
            return Err(Error::ConstructionCheck("adjugate inverse failed a*inv(a)=e".into()));
        }
        Ok(adj)
    }

    /// h g h^{-1}
    pub fn conjugate_by(&self, ring: &Ring, h: &Self) -> Result<Self> {
        let hinv = h.inv(ring)?;
        Ok(h.mul(ring, self).mul(ring, &hinv))
    }

    /// [a, b] = a b a^{-1} b^{-1}
    pub fn commutator(&self, ring: &Ring, b: &Self) -> Result<Self> {
        let ai = self.inv(ring)?;
        let bi = b.inv(ring)?;
        Ok(self.mul(ring, b).mul(ring, &ai).mul(ring, &bi))
    }

    /// Row-major JSON-ready encoding (rows 1..n, 0, -n..-1).
    pub fn to_rows(&self) -> Vec<Vec<RingElem>> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| self.at_pos(r, c)).collect()).collect()
    }

    pub fn from_rows(ring: &Ring, n: usize, rows: &[Vec<RingElem>]) -> Result<Self> {
        let d = 2 * n + 1;
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Mismatch(format!("expected {d}x{d} matrix")));
        }
        let mut m = Self::zero(ring, n);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.set_pos(r, c, ring.canon(v));
            }
        }
        Ok(m)
    }
}
