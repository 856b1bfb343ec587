//! Symbolic elementary generators, generator words, and their fast exact
//! evaluation through sparse row/column updates.

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};
use crate::theta::{theta_hb_iter, ThetaMatrix};

/// A symbolic elementary generator. `Extra { y: None }` is the orthogonal
/// extra short root T_i(x); `y: Some(..)` the unitary T_i(x, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemGen {
    Short { i: i32, j: i32, x: RingElem },
    Extra { i: i32, x: RingElem, y: Option<RingElem> },
}

/// A word in the elementary generators; evaluates to the ordered product.
pub type ElemWord = Vec<ElemGen>;

/// Group-specific generator semantics. Implemented by the orthogonal and
/// unitary contexts.
pub trait Group {
    fn ring(&self) -> &Ring;
    fn n(&self) -> usize;

    /// Build the matrix for one generator (checks validity).
    fn gen_matrix(&self, g: &ElemGen) -> Result<ThetaMatrix>;

    /// The symbolic inverse of a generator (again a generator).
    fn gen_inv(&self, g: &ElemGen) -> ElemGen;

    /// Matrix-level membership test for the ambient group.
    fn is_elem_of_group(&self, m: &ThetaMatrix) -> bool;

    /// Left-multiply `m` by the generator in place: m := g · m.
    fn apply_left(&self, g: &ElemGen, m: &mut ThetaMatrix);

    /// Right-multiply `m` by the generator in place: m := m · g.
    fn apply_right(&self, g: &ElemGen, m: &mut ThetaMatrix);

    /// The word T_ij(1) T_ji(-1) T_ij(1) for the monomial matrix P_ij.
    fn p_word(&self, i: i32, j: i32) -> [ElemGen; 3] {
        let one = self.ring().one();
        let minus_one = self.ring().neg(one);
        [
            ElemGen::Short { i, j, x: one },
            ElemGen::Short { i: j, j: i, x: minus_one },
            ElemGen::Short { i, j, x: one },
        ]
    }
}

/// Evaluate a word to its product matrix.
pub fn eval_word<G: Group>(g: &G, w: &[ElemGen]) -> ThetaMatrix {
    let mut m = ThetaMatrix::identity(g.ring(), g.n());
    for gen in w {
        g.apply_right(gen, &mut m);
    }
    m
}

/// ε · m · ε^{-1} for a word ε, without any matrix inversion.
pub fn conjugate_matrix<G: Group>(g: &G, w: &[ElemGen], m: &ThetaMatrix) -> ThetaMatrix {
    let mut acc = m.clone();
    for gen in w.iter().rev() {
        g.apply_left(gen, &mut acc);
    }
    for gen in w.iter().rev() {
        g.apply_right(&g.gen_inv(gen), &mut acc);
    }
    acc
}

/// The inverse word: reversed order, generator-wise inverses.
pub fn invert_word<G: Group>(g: &G, w: &[ElemGen]) -> ElemWord {
    w.iter().rev().map(|gen| g.gen_inv(gen)).collect()
}

/// Identify a monomial matrix's signed-permutation action: for each basis
/// index i, `perm[pos(i)]` is π(i) and `unit[pos(i)]` is the unit s_i with
/// P e_i = s_i e_{π(i)}. Errors if P is not monomial with unit entries.
pub fn monomial_action(ring: &Ring, p: &ThetaMatrix) -> Result<(Vec<i32>, Vec<RingElem>)> {
    let d = p.dim();
    let n = p.n;
    let mut perm = vec![0i32; d];
    let mut unit = vec![ring.zero(); d];
    for c in 0..d {
        let mut found = None;
        for r in 0..d {
            let v = p.at_pos(r, c);
            if v != ring.zero() {
                if found.is_some() {
                    return Err(Error::ConstructionCheck("not a monomial matrix".into()));
                }
                found = Some((r, v));
            }
        }
        let (r, v) = found.ok_or_else(|| Error::ConstructionCheck("zero column in monomial".into()))?;
        if !ring.is_unit(v) {
            return Err(Error::ConstructionCheck("non-unit entry in monomial".into()));
        }
        perm[c] = crate::theta::index_at(n, r);
        unit[c] = v;
    }
    Ok((perm, unit))
}

/// How one BFS move (conjugation by P_{pq}) permutes Θ_hb. Signs are not
/// tracked here; callers recover the exact unit from the evaluated word.
fn move_perm(p: i32, q: i32, i: i32) -> i32 {
    if i == q {
        p
    } else if i == p {
        q
    } else if i == -q {
        -p
    } else if i == -p {
        -q
    } else {
        i
    }
}

/// All valid P-moves at dimension n.
fn moves(n: usize) -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for p in theta_hb_iter(n) {
        for q in theta_hb_iter(n) {
            if p != q && p != -q {
                v.push((p, q));
            }
        }
    }
    v
}

/// BFS for a P-word whose conjugation action moves the ordered index pair
/// `from` to `to` (positions only). Returns the move list; compose with
/// [`p_moves_to_word`]. Length is minimal; bounded by the state count.
pub fn relocate_pair_moves(n: usize, from: (i32, i32), to: (i32, i32)) -> Result<Vec<(i32, i32)>> {
    bfs(n, from, to, |m, s| (move_perm(m.0, m.1, s.0), move_perm(m.0, m.1, s.1)))
}

/// BFS for a P-word moving a single index (extra short roots).
pub fn relocate_single_moves(n: usize, from: i32, to: i32) -> Result<Vec<(i32, i32)>> {
    bfs(n, from, to, |m, s| move_perm(m.0, m.1, s))
}

fn bfs<S: Copy + Eq + std::hash::Hash>(
    n: usize,
    from: S,
    to: S,
    step: impl Fn((i32, i32), S) -> S,
) -> Result<Vec<(i32, i32)>> {
    use std::collections::{HashMap, VecDeque};
    let mv = moves(n);
    let mut prev: HashMap<S, (S, (i32, i32))> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(from);
    prev.insert(from, (from, (0, 0)));
    while let Some(state) = queue.pop_front() {
        if state == to {
            let mut path = Vec::new();
            let mut cur = state;
            while cur != from {
                let (par, m) = prev[&cur];
                path.push(m);
                cur = par;
            }
            path.reverse();
            return Ok(path);
        }
        for &m in &mv {
            let next = step(m, state);
            if !prev.contains_key(&next) {
                prev.insert(next, (state, m));
                queue.push_back(next);
            }
        }
    }
    Err(Error::RelocationExhausted)
}

/// Turn a move list into the conjugator word: applying moves m1, m2, …, mk
/// in order means conjugating by P_{mk} ··· P_{m1}.
pub fn p_moves_to_word<G: Group>(g: &G, moves: &[(i32, i32)]) -> ElemWord {
    let mut w = Vec::with_capacity(3 * moves.len());
    for &(p, q) in moves.iter().rev() {
        w.extend_from_slice(&g.p_word(p, q));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_bfs_reaches_all_pairs() {
        let n = 3;
        let pairs: Vec<(i32, i32)> = theta_hb_iter(n)
            .flat_map(|i| theta_hb_iter(n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && i != -j)
            .collect();
        for &from in &pairs {
            for &to in &pairs {
                let moves = relocate_pair_moves(n, from, to).unwrap();
                let mut cur = from;
                for m in &moves {
                    cur = (move_perm(m.0, m.1, cur.0), move_perm(m.0, m.1, cur.1));
                }
                assert_eq!(cur, to);
                assert!(moves.len() <= 4, "{from:?}->{to:?} took {}", moves.len());
            }
        }
    }

    #[test]
    fn single_bfs_reaches_all() {
        let n = 3;
        for from in theta_hb_iter(n) {
            for to in theta_hb_iter(n) {
                let moves = relocate_single_moves(n, from, to).unwrap();
                let mut cur = from;
                for m in &moves {
                    cur = move_perm(m.0, m.1, cur);
                }
                assert_eq!(cur, to);
            }
        }
    }
}
