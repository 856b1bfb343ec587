//! The odd orthogonal group O_{2n+1}(R): quadratic form, membership,
//! polarity, elementary generators and their relation table.

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};
use crate::theta::{position, theta_hb_iter, theta_iter, ThetaMatrix};

#[derive(Debug, Clone)]
pub struct OrthoContext {
    pub ring: Ring,
    pub n: usize,
}

impl OrthoContext {
    pub fn new(ring: Ring, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadConfig("n >= 1 required".into()));
        }
        Ok(OrthoContext { ring, n })
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Q(u) = u_1 u_{-1} + … + u_n u_{-n} + u_0^2
    pub fn quad_q(&self, u: &[RingElem]) -> RingElem {
        let r = &self.ring;
        assert_eq!(u.len(), self.dim());
        let mut acc = r.zero();
        for i in 1..=self.n as i32 {
            acc = r.add(acc, r.mul(u[position(self.n, i)], u[position(self.n, -i)]));
        }
        let u0 = u[position(self.n, 0)];
        r.add(acc, r.mul(u0, u0))
    }

    /// Polarity row ũ = (u_{-1}, …, u_{-n}, 2u_0, u_n, …, u_1):
    /// ũ_j = u_{-j} for j in Θ_hb, ũ_0 = 2u_0.
    pub fn polarity(&self, u: &[RingElem]) -> Vec<RingElem> {
        let r = &self.ring;
        assert_eq!(u.len(), self.dim());
        let mut out = vec![r.zero(); self.dim()];
        for j in theta_iter(self.n) {
            out[position(self.n, j)] = if j == 0 {
                r.mul(r.two(), u[position(self.n, 0)])
            } else {
                u[position(self.n, -j)]
            };
        }
        out
    }

    /// Membership test with a diagnostic naming the first failed condition.
    ///
    /// Checks, in a fixed order: invertibility; the entry relations between
    /// σ^{-1} and σ (with the factor-2 forms kept as stated, no division
    /// by 2); then Q(σ_{*j}) = δ_{0j} column by column in Θ order.
    pub fn member_diag(&self, sigma: &ThetaMatrix) -> (bool, String) {
        let r = &self.ring;
        if sigma.n != self.n {
            return (false, "dimension mismatch".into());
        }
        let inv = match sigma.inv(r) {
            Ok(v) => v,
            Err(_) => return (false, "not invertible".into()),
        };
        let two = r.two();
        for i in theta_hb_iter(self.n) {
            for j in theta_hb_iter(self.n) {
                if inv.at(i, j) != sigma.at(-j, -i) {
                    return (false, format!("condition (i): inv[{i},{j}] != sigma[{},{}]", -j, -i));
                }
            }
        }
        for j in theta_hb_iter(self.n) {
            if r.mul(two, inv.at(0, j)) != sigma.at(-j, 0) {
                return (false, format!("condition (i): 2*inv[0,{j}] != sigma[{},0]", -j));
            }
        }
        for i in theta_hb_iter(self.n) {
            if inv.at(i, 0) != r.mul(two, sigma.at(0, -i)) {
                return (false, format!("condition (i): inv[{i},0] != 2*sigma[0,{}]", -i));
            }
        }
        if r.mul(two, inv.at(0, 0)) != r.mul(two, sigma.at(0, 0)) {
            return (false, "condition (i): 2*inv[0,0] != 2*sigma[0,0]".into());
        }
        for j in theta_iter(self.n) {
            let q = self.quad_q(&sigma.col(j));
            let want = if j == 0 { r.one() } else { r.zero() };
            if q != want {
                return (false, format!("condition (ii) at column {j}: Q = {q}"));
            }
        }
        (true, String::new())
    }

    pub fn is_member(&self, sigma: &ThetaMatrix) -> bool {
        self.member_diag(sigma).0
    }

    /// Short root matrix T_ij(x) = e + x e^{ij} - x e^{-j,-i}.
    pub fn t_short(&self, i: i32, j: i32, x: RingElem) -> Result<ThetaMatrix> {
        self.check_short_indices(i, j)?;
        let r = &self.ring;
        let mut m = ThetaMatrix::identity(r, self.n);
        m.set(i, j, r.canon(x));
        m.set(-j, -i, r.neg(r.canon(x)));
        Ok(m)
    }

    /// Extra short root matrix T_i(x) = e + x e^{0,-i} - 2x e^{i0} - x² e^{i,-i}.
    pub fn t_extra(&self, i: i32, x: RingElem) -> Result<ThetaMatrix> {
        self.check_extra_index(i)?;
        let r = &self.ring;
        let x = r.canon(x);
        let mut m = ThetaMatrix::identity(r, self.n);
        m.set(0, -i, x);
        m.set(i, 0, r.neg(r.mul(r.two(), x)));
        m.set(i, -i, r.neg(r.mul(x, x)));
        Ok(m)
    }

    fn check_short_indices(&self, i: i32, j: i32) -> Result<()> {
        let n = self.n as i32;
        if i == 0 || j == 0 || i.abs() > n || j.abs() > n || i == j || i == -j {
            return Err(Error::BadIndex(format!("short root indices ({i},{j})")));
        }
        Ok(())
    }

    fn check_extra_index(&self, i: i32) -> Result<()> {
        let n = self.n as i32;
        if i == 0 || i.abs() > n {
            return Err(Error::BadIndex(format!("extra short root index {i}")));
        }
        Ok(())
    }

    /// T_{*,-1}(u) = e + u e_{-1}^t - e_1 ũ for isotropic u with u_{-1} = 0.
    pub fn t_star(&self, u: &[RingElem]) -> Result<ThetaMatrix> {
        let r = &self.ring;
        if u.len() != self.dim() {
            return Err(Error::Mismatch("column length".into()));
        }
        if u[position(self.n, -1)] != r.zero() {
            return Err(Error::NotIsotropic("u_{-1} != 0".into()));
        }
        if self.quad_q(u) != r.zero() {
            return Err(Error::NotIsotropic("Q(u) != 0".into()));
        }
        let mut m = ThetaMatrix::identity(r, self.n);
        let pm1 = position(self.n, -1);
        let p1 = position(self.n, 1);
        let pol = self.polarity(u);
        for p in 0..self.dim() {
            let v = m.at_pos(p, pm1);
            m.set_pos(p, pm1, r.add(v, u[p]));
        }
        for q in 0..self.dim() {
            let v = m.at_pos(p1, q);
            m.set_pos(p1, q, r.sub(v, pol[q]));
        }
        Ok(m)
    }

    /// The generator word whose product equals T_{*,-1}(u):
    /// T_1(u_0) T_{2,-1}(u_2) … T_{n,-1}(u_n) T_{-n,-1}(u_{-n}) … T_{-2,-1}(u_{-2}).
    pub fn t_star_word(&self, u: &[RingElem]) -> Vec<crate::word::ElemGen> {
        use crate::word::ElemGen;
        let mut w = vec![ElemGen::Extra { i: 1, x: u[position(self.n, 0)], y: None }];
        for i in 2..=self.n as i32 {
            w.push(ElemGen::Short { i, j: -1, x: u[position(self.n, i)] });
        }
        for i in (2..=self.n as i32).rev() {
            w.push(ElemGen::Short { i: -i, j: -1, x: u[position(self.n, -i)] });
        }
        w
    }

    /// Signed permutation P_ij = T_ij(1) T_ji(-1) T_ij(1).
    pub fn p_perm(&self, i: i32, j: i32) -> Result<ThetaMatrix> {
        self.check_short_indices(i, j)?;
        let r = &self.ring;
        let a = self.t_short(i, j, r.one())?;
        let b = self.t_short(j, i, r.neg(r.one()))?;
        Ok(a.mul(r, &b).mul(r, &a))
    }
}

impl crate::word::Group for OrthoContext {
    fn ring(&self) -> &Ring {
        &self.ring
    }

    fn n(&self) -> usize {
        self.n
    }

    fn gen_matrix(&self, g: &crate::word::ElemGen) -> Result<ThetaMatrix> {
        use crate::word::ElemGen;
        match *g {
            ElemGen::Short { i, j, x } => self.t_short(i, j, x),
            ElemGen::Extra { i, x, y: None } => self.t_extra(i, x),
            ElemGen::Extra { y: Some(_), .. } => {
                Err(Error::BadIndex("two-parameter extra short root in orthogonal group".into()))
            }
        }
    }

    fn gen_inv(&self, g: &crate::word::ElemGen) -> crate::word::ElemGen {
        use crate::word::ElemGen;
        let r = &self.ring;
        match *g {
            ElemGen::Short { i, j, x } => ElemGen::Short { i, j, x: r.neg(x) },
            ElemGen::Extra { i, x, y: None } => ElemGen::Extra { i, x: r.neg(x), y: None },
            ElemGen::Extra { .. } => unreachable!("orthogonal extra short roots carry one parameter"),
        }
    }

    fn is_elem_of_group(&self, m: &ThetaMatrix) -> bool {
        self.is_member(m)
    }

    fn apply_left(&self, g: &crate::word::ElemGen, m: &mut ThetaMatrix) {
        use crate::word::ElemGen;
        let r = &self.ring;
        let d = m.dim();
        match *g {
            ElemGen::Short { i, j, x } => {
                let (pi, pj) = (position(self.n, i), position(self.n, j));
                let (pmj, pmi) = (position(self.n, -j), position(self.n, -i));
                for c in 0..d {
                    let v = r.add(m.at_pos(pi, c), r.mul(x, m.at_pos(pj, c)));
                    m.set_pos(pi, c, v);
                }
                for c in 0..d {
                    let v = r.sub(m.at_pos(pmj, c), r.mul(x, m.at_pos(pmi, c)));
                    m.set_pos(pmj, c, v);
                }
            }
            ElemGen::Extra { i, x, .. } => {
                let (pi, p0, pmi) = (position(self.n, i), position(self.n, 0), position(self.n, -i));
                let minus2x = r.neg(r.mul(r.two(), x));
                let minusx2 = r.neg(r.mul(x, x));
                for c in 0..d {
                    let v = r.add(
                        m.at_pos(pi, c),
                        r.add(r.mul(minus2x, m.at_pos(p0, c)), r.mul(minusx2, m.at_pos(pmi, c))),
                    );
                    m.set_pos(pi, c, v);
                }
                for c in 0..d {
                    let v = r.add(m.at_pos(p0, c), r.mul(x, m.at_pos(pmi, c)));
                    m.set_pos(p0, c, v);
                }
            }
        }
    }

    fn apply_right(&self, g: &crate::word::ElemGen, m: &mut ThetaMatrix) {
        use crate::word::ElemGen;
        let r = &self.ring;
        let d = m.dim();
        match *g {
            ElemGen::Short { i, j, x } => {
                let (pi, pj) = (position(self.n, i), position(self.n, j));
                let (pmj, pmi) = (position(self.n, -j), position(self.n, -i));
                for row in 0..d {
                    let v = r.add(m.at_pos(row, pj), r.mul(m.at_pos(row, pi), x));
                    m.set_pos(row, pj, v);
                }
                for row in 0..d {
                    let v = r.sub(m.at_pos(row, pmi), r.mul(m.at_pos(row, pmj), x));
                    m.set_pos(row, pmi, v);
                }
            }
            ElemGen::Extra { i, x, .. } => {
                let (pi, p0, pmi) = (position(self.n, i), position(self.n, 0), position(self.n, -i));
                let minus2x = r.neg(r.mul(r.two(), x));
                let minusx2 = r.neg(r.mul(x, x));
                for row in 0..d {
                    let v = r.add(
                        m.at_pos(row, pmi),
                        r.add(r.mul(m.at_pos(row, p0), x), r.mul(m.at_pos(row, pi), minusx2)),
                    );
                    m.set_pos(row, pmi, v);
                }
                for row in 0..d {
                    let v = r.add(m.at_pos(row, p0), r.mul(m.at_pos(row, pi), minus2x));
                    m.set_pos(row, p0, v);
                }
            }
        }
    }
}

/// Outcome of one relation family over one configuration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RelationOutcome {
    pub relation: String,
    pub cases: usize,
    pub pass: bool,
    pub counterexample: Option<String>,
}

/// Check the full short/extra-short relation table.
///
/// Index combinations are exhaustive; ring values are exhaustive when
/// `values_cap` covers the ring, otherwise a deterministic stride sample.
pub fn relation_suite(ctx: &OrthoContext, values_cap: usize) -> Vec<RelationOutcome> {
    let r = &ctx.ring;
    let n = ctx.n;
    let vals: Vec<RingElem> = sample_values(r, values_cap);
    let e = ThetaMatrix::identity(r, n);
    let mut out = Vec::new();

    let pairs: Vec<(i32, i32)> = theta_hb_iter(n)
        .flat_map(|i| theta_hb_iter(n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && i != -j)
        .collect();

    let mut record = |name: &str, cases: usize, cex: Option<String>| {
        out.push(RelationOutcome {
            relation: name.to_string(),
            cases,
            pass: cex.is_none(),
            counterexample: cex,
        });
    };

    // (S1) T_ij(x) = T_{-j,-i}(-x)
    {
        let mut cases = 0;
        let mut cex = None;
        'outer: for &(i, j) in &pairs {
            for &x in &vals {
                cases += 1;
                if ctx.t_short(i, j, x).unwrap() != ctx.t_short(-j, -i, r.neg(x)).unwrap() {
                    cex = Some(format!("S1 i={i} j={j} x={x}"));
                    break 'outer;
                }
            }
        }
        record("S1", cases, cex);
    }
    // (S2) additivity
    {
        let mut cases = 0;
        let mut cex = None;
        'outer: for &(i, j) in &pairs {
            for &x in &vals {
                for &y in &vals {
                    cases += 1;
                    let lhs = ctx.t_short(i, j, x).unwrap().mul(r, &ctx.t_short(i, j, y).unwrap());
                    if lhs != ctx.t_short(i, j, r.add(x, y)).unwrap() {
                        cex = Some(format!("S2 i={i} j={j} x={x} y={y}"));
                        break 'outer;
                    }
                }
            }
        }
        record("S2", cases, cex);
    }
    // (S3)/(S4)/(S5): commutators of two short roots
    {
        let (mut c3, mut c4, mut c5) = (0, 0, 0);
        let (mut x3, mut x4, mut x5) = (None, None, None);
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                for &x in &vals {
                    for &y in &vals {
                        let a = ctx.t_short(i, j, x).unwrap();
                        let b = ctx.t_short(k, l, y).unwrap();
                        if k != j && k != -i && l != i && l != -j {
                            c3 += 1;
                            if x3.is_none() && a.commutator(r, &b).unwrap() != e {
                                x3 = Some(format!("S3 ({i},{j},{k},{l}) x={x} y={y}"));
                            }
                        } else if k == j && l != i && l != -j && i != l && i != -l {
                            // [T_ij(x), T_jl(y)] = T_il(xy) when i != ±l
                            c4 += 1;
                            if x4.is_none() {
                                let got = a.commutator(r, &b).unwrap();
                                let want = ctx.t_short(i, l, r.mul(x, y)).unwrap();
                                if got != want {
                                    x4 = Some(format!("S4 ({i},{j},{l}) x={x} y={y}"));
                                }
                            }
                        } else if k == j && l == -i {
                            c5 += 1;
                            if x5.is_none() && a.commutator(r, &b).unwrap() != e {
                                x5 = Some(format!("S5 ({i},{j}) x={x} y={y}"));
                            }
                        }
                    }
                }
            }
        }
        record("S3", c3, x3);
        record("S4", c4, x4);
        record("S5", c5, x5);
    }
    // (E1) additivity of extra short roots
    {
        let mut cases = 0;
        let mut cex = None;
        'outer: for i in theta_hb_iter(n) {
            for &x in &vals {
                for &y in &vals {
                    cases += 1;
                    let lhs = ctx.t_extra(i, x).unwrap().mul(r, &ctx.t_extra(i, y).unwrap());
                    if lhs != ctx.t_extra(i, r.add(x, y)).unwrap() {
                        cex = Some(format!("E1 i={i} x={x} y={y}"));
                        break 'outer;
                    }
                }
            }
        }
        record("E1", cases, cex);
    }
    // (E2)/(E3)
    {
        let (mut c2, mut c3n) = (0, 0);
        let (mut x2, mut x3n) = (None, None);
        for i in theta_hb_iter(n) {
            for j in theta_hb_iter(n) {
                for &x in &vals {
                    for &y in &vals {
                        let a = ctx.t_extra(i, x).unwrap();
                        let b = ctx.t_extra(j, y).unwrap();
                        if i != j && i != -j {
                            c2 += 1;
                            if x2.is_none() {
                                let want = ctx
                                    .t_short(i, -j, r.neg(r.mul(r.two(), r.mul(x, y))))
                                    .unwrap();
                                if a.commutator(r, &b).unwrap() != want {
                                    x2 = Some(format!("E2 i={i} j={j} x={x} y={y}"));
                                }
                            }
                        } else if i == j {
                            c3n += 1;
                            if x3n.is_none() && a.commutator(r, &b).unwrap() != e {
                                x3n = Some(format!("E3 i={i} x={x} y={y}"));
                            }
                        }
                    }
                }
            }
        }
        record("E2", c2, x2);
        record("E3", c3n, x3n);
    }
    // (SE1)/(SE2)
    {
        let (mut c1, mut c2) = (0, 0);
        let (mut x1, mut x2) = (None, None);
        for &(i, j) in &pairs {
            for k in theta_hb_iter(n) {
                for &x in &vals {
                    for &y in &vals {
                        let a = ctx.t_short(i, j, x).unwrap();
                        let b = ctx.t_extra(k, y).unwrap();
                        if k != j && k != -i {
                            c1 += 1;
                            if x1.is_none() && a.commutator(r, &b).unwrap() != e {
                                x1 = Some(format!("SE1 ({i},{j},{k}) x={x} y={y}"));
                            }
                        } else if k == j {
                            c2 += 1;
                            if x2.is_none() {
                                let want = ctx
                                    .t_short(j, -i, r.neg(r.mul(x, r.mul(y, y))))
                                    .unwrap()
                                    .mul(r, &ctx.t_extra(i, r.mul(x, y)).unwrap());
                                if a.commutator(r, &b).unwrap() != want {
                                    x2 = Some(format!("SE2 ({i},{j}) x={x} y={y}"));
                                }
                            }
                        }
                    }
                }
            }
        }
        record("SE1", c1, x1);
        record("SE2", c2, x2);
    }
    out
}

pub(crate) fn sample_values(r: &Ring, cap: usize) -> Vec<RingElem> {
    if r.size() <= cap {
        r.elems().collect()
    } else {
        let stride = (r.size() / cap).max(1);
        (0..r.size()).step_by(stride).take(cap).map(|i| r.elem_by_index(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn ctx(m: u64, n: usize) -> OrthoContext {
        OrthoContext::new(RingSpec::zmod(m).validate().unwrap(), n).unwrap()
    }

    fn basis(ctx: &OrthoContext, i: i32) -> Vec<RingElem> {
        let mut v = vec![ctx.ring.zero(); ctx.dim()];
        v[position(ctx.n, i)] = ctx.ring.one();
        v
    }

    #[test]
    fn q_on_basis() {
        let c = ctx(5, 3);
        assert_eq!(c.quad_q(&basis(&c, 0)), c.ring.one());
        assert_eq!(c.quad_q(&basis(&c, 1)), c.ring.zero());
    }

    #[test]
    fn polarity_on_basis() {
        let c = ctx(5, 3);
        let p0 = c.polarity(&basis(&c, 0));
        let mut want = vec![c.ring.zero(); c.dim()];
        want[position(3, 0)] = c.ring.two();
        assert_eq!(p0, want);
        let p1 = c.polarity(&basis(&c, 1));
        let mut want = vec![c.ring.zero(); c.dim()];
        want[position(3, -1)] = c.ring.one();
        assert_eq!(p1, want);
    }

    #[test]
    fn generators_are_members() {
        let c = ctx(8, 3);
        for i in theta_hb_iter(3) {
            for x in [c.ring.from_i64(3), c.ring.from_i64(6)] {
                assert!(c.is_member(&c.t_extra(i, x).unwrap()), "T_{i}({x})");
            }
            for j in theta_hb_iter(3) {
                if i == j || i == -j {
                    continue;
                }
                assert!(c.is_member(&c.t_short(i, j, c.ring.from_i64(5)).unwrap()));
            }
        }
        assert!(c.is_member(&ThetaMatrix::identity(&c.ring, 3)));
    }

    #[test]
    fn non_orthogonal_transvection_rejected() {
        let c = ctx(5, 3);
        let mut m = ThetaMatrix::identity(&c.ring, 3);
        m.set(1, 2, c.ring.one()); // e + e^{12}: GL but not orthogonal
        let (ok, diag) = c.member_diag(&m);
        assert!(!ok);
        assert!(!diag.is_empty());
        // the diagnostic is confirmed by direct evaluation: some column has Q != δ
        let bad = theta_iter(3).any(|j| {
            let want = if j == 0 { c.ring.one() } else { c.ring.zero() };
            c.quad_q(&m.col(j)) != want
        });
        let entry_bad = m.inv(&c.ring).map(|inv| {
            theta_hb_iter(3).any(|i| theta_hb_iter(3).any(|j| inv.at(i, j) != m.at(-j, -i)))
        });
        assert!(bad || entry_bad.unwrap_or(true));
    }

    #[test]
    fn t_short_zero_is_identity_and_s1_s2() {
        let c = ctx(5, 3);
        let e = ThetaMatrix::identity(&c.ring, 3);
        assert_eq!(c.t_short(1, 2, c.ring.zero()).unwrap(), e);
        for x in c.ring.elems() {
            for y in c.ring.elems() {
                let lhs = c.t_short(1, 2, x).unwrap().mul(&c.ring, &c.t_short(1, 2, y).unwrap());
                assert_eq!(lhs, c.t_short(1, 2, c.ring.add(x, y)).unwrap());
            }
            assert_eq!(c.t_short(1, 2, x).unwrap(), c.t_short(-2, -1, c.ring.neg(x)).unwrap());
        }
    }

    #[test]
    fn t_short_inverse_over_z8() {
        let c = ctx(8, 3);
        for x in c.ring.elems() {
            let t = c.t_short(1, 2, x).unwrap();
            assert_eq!(t.inv(&c.ring).unwrap(), c.t_short(1, 2, c.ring.neg(x)).unwrap());
        }
    }

    #[test]
    fn t_extra_examples() {
        let c = ctx(5, 3);
        let e = ThetaMatrix::identity(&c.ring, 3);
        assert_eq!(c.t_extra(1, c.ring.zero()).unwrap(), e);
        assert!(c.t_extra(0, c.ring.one()).is_err());
        assert!(c.t_short(1, -1, c.ring.one()).is_err());
    }

    #[test]
    fn t_star_matches_generator_chain() {
        let c = ctx(5, 3);
        let r = &c.ring;
        // random isotropic u with u_{-1} = 0: pick u_2.. freely, solve via u_1 pairing:
        // Q(u) = u_1 u_{-1} + u_2 u_{-2} + u_3 u_{-3} + u_0² with u_{-1}=0
        let mut state = 7u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            r.from_i64((state >> 33) as i64)
        };
        for _ in 0..50 {
            let mut u = vec![r.zero(); c.dim()];
            u[position(3, 1)] = rnd();
            u[position(3, 2)] = rnd();
            u[position(3, 3)] = rnd();
            u[position(3, -2)] = rnd();
            // choose u_{-3}, u_0 so that Q(u) = 0: set u_0 = 0, solve u_{-3} only when
            // u_3 is a unit; otherwise zero out the pair
            u[position(3, 0)] = r.zero();
            let u2 = u[position(3, 2)];
            let um2 = u[position(3, -2)];
            let u3 = u[position(3, 3)];
            match r.inv(u3) {
                Some(inv3) => {
                    u[position(3, -3)] = r.neg(r.mul(r.mul(u2, um2), inv3));
                }
                None => {
                    u[position(3, 3)] = r.zero();
                    u[position(3, -2)] = r.zero();
                }
            }
            assert_eq!(c.quad_q(&u), r.zero());
            let direct = c.t_star(&u).unwrap();
            let mut prod = ThetaMatrix::identity(r, 3);
            prod = prod.mul(r, &c.t_extra(1, u[position(3, 0)]).unwrap());
            for i in 2..=3 {
                prod = prod.mul(r, &c.t_short(i, -1, u[position(3, i)]).unwrap());
            }
            for i in (2..=3).rev() {
                prod = prod.mul(r, &c.t_short(-i, -1, u[position(3, -i)]).unwrap());
            }
            assert_eq!(direct, prod);
            // inverse is t_star(-u)
            let neg: Vec<_> = u.iter().map(|&v| r.neg(v)).collect();
            assert_eq!(direct.inv(r).unwrap(), c.t_star(&neg).unwrap());
            assert!(c.is_member(&direct));
        }
    }

    #[test]
    fn t_star_rejects_bad_input() {
        let c = ctx(5, 3);
        let mut u = vec![c.ring.zero(); c.dim()];
        u[position(3, -1)] = c.ring.one();
        assert!(c.t_star(&u).is_err());
        let mut u = vec![c.ring.zero(); c.dim()];
        u[position(3, 0)] = c.ring.one(); // Q = 1
        assert!(c.t_star(&u).is_err());
    }

    #[test]
    fn p_perm_inverse_and_actions() {
        let c = ctx(5, 3);
        let r = &c.ring;
        let e = ThetaMatrix::identity(r, 3);
        for i in theta_hb_iter(3) {
            for j in theta_hb_iter(3) {
                if i == j || i == -j {
                    continue;
                }
                let pij = c.p_perm(i, j).unwrap();
                let pji = c.p_perm(j, i).unwrap();
                assert_eq!(pij.mul(r, &pji), e);
                // explicit entry pattern
                let mut want = ThetaMatrix::identity(r, 3);
                want.set(i, i, r.zero());
                want.set(j, j, r.zero());
                want.set(-i, -i, r.zero());
                want.set(-j, -j, r.zero());
                want.set(i, j, r.one());
                want.set(j, i, r.neg(r.one()));
                want.set(-i, -j, r.one());
                want.set(-j, -i, r.neg(r.one()));
                assert_eq!(pij, want);
            }
        }
        // Lemma 13 actions
        let x = r.from_i64(3);
        for i in theta_hb_iter(3) {
            for j in theta_hb_iter(3) {
                if i == j || i == -j {
                    continue;
                }
                for k in theta_hb_iter(3) {
                    if k == i || k == -i || k == j || k == -j {
                        continue;
                    }
                    let t = c.t_short(i, j, x).unwrap();
                    let pki = c.p_perm(k, i).unwrap();
                    assert_eq!(t.conjugate_by(r, &pki).unwrap(), c.t_short(k, j, x).unwrap());
                    let pkj = c.p_perm(k, j).unwrap();
                    assert_eq!(t.conjugate_by(r, &pkj).unwrap(), c.t_short(i, k, x).unwrap());
                    let te = c.t_extra(i, x).unwrap();
                    let pmkmi = c.p_perm(-k, -i).unwrap();
                    assert_eq!(te.conjugate_by(r, &pmkmi).unwrap(), c.t_extra(k, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn relations_pass_z2_z3_exhaustive() {
        for m in [2u64, 3] {
            let c = ctx(m, 3);
            for outcome in relation_suite(&c, usize::MAX) {
                assert!(outcome.pass, "{m}: {:?}", outcome);
            }
        }
    }

    #[test]
    fn se2_single_instance_z5() {
        // [T_12(1), T_2(1)] = T_{2,-1}(-1) T_1(1)
        let c = ctx(5, 3);
        let r = &c.ring;
        let lhs = c
            .t_short(1, 2, r.one())
            .unwrap()
            .commutator(r, &c.t_extra(2, r.one()).unwrap())
            .unwrap();
        let rhs = c
            .t_short(2, -1, r.neg(r.one()))
            .unwrap()
            .mul(r, &c.t_extra(1, r.one()).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn q_preserved_and_polarity_identity() {
        let c = ctx(8, 3);
        let r = &c.ring;
        let mut state = 3u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        // random product of 10 generators
        let mut sigma = ThetaMatrix::identity(r, 3);
        for _ in 0..10 {
            let pick = rnd().rem_euclid(2);
            let gen = if pick == 0 {
                loop {
                    let i = [1, 2, 3, -1, -2, -3][rnd().rem_euclid(6) as usize];
                    let j = [1, 2, 3, -1, -2, -3][rnd().rem_euclid(6) as usize];
                    if i != j && i != -j {
                        break c.t_short(i, j, r.from_i64(rnd())).unwrap();
                    }
                }
            } else {
                let i = [1, 2, 3, -1, -2, -3][rnd().rem_euclid(6) as usize];
                c.t_extra(i, r.from_i64(rnd())).unwrap()
            };
            sigma = sigma.mul(r, &gen);
        }
        assert!(c.is_member(&sigma));
        let sigma_inv = sigma.inv(r).unwrap();
        for _ in 0..50 {
            let u: Vec<RingElem> = (0..c.dim()).map(|_| r.from_i64(rnd())).collect();
            let su = sigma.mul_vec(r, &u);
            assert_eq!(c.quad_q(&su), c.quad_q(&u));
            // Lemma: polarity(σu) = polarity(u) σ^{-1}
            assert_eq!(c.polarity(&su), sigma_inv.vec_mul(r, &c.polarity(&u)));
        }
    }

    #[test]
    fn t_star_conjugation_formula() {
        // ^σ T_{*,-1}(u) = e + σu (σ_{*1})~ - σ_{*1} (σu)~
        let c = ctx(5, 3);
        let r = &c.ring;
        let sigma = {
            let a = c.t_short(2, 1, r.from_i64(3)).unwrap();
            let b = c.t_extra(-2, r.from_i64(2)).unwrap();
            let d = c.t_short(3, -2, r.from_i64(4)).unwrap();
            a.mul(r, &b).mul(r, &d)
        };
        let mut u = vec![r.zero(); c.dim()];
        u[position(3, 2)] = r.from_i64(2);
        u[position(3, 0)] = r.zero();
        assert_eq!(c.quad_q(&u), r.zero());
        let t = c.t_star(&u).unwrap();
        let lhs = t.conjugate_by(r, &sigma).unwrap();
        let su = sigma.mul_vec(r, &u);
        let s1 = sigma.col(1);
        let pol_s1 = c.polarity(&s1);
        let pol_su = c.polarity(&su);
        let mut rhs = ThetaMatrix::identity(r, 3);
        for p in 0..c.dim() {
            for q in 0..c.dim() {
                let v = rhs.at_pos(p, q);
                let v = r.add(v, r.mul(su[p], pol_s1[q]));
                let v = r.sub(v, r.mul(s1[p], pol_su[q]));
                rhs.set_pos(p, q, v);
            }
        }
        assert_eq!(lhs, rhs);
    }
}
