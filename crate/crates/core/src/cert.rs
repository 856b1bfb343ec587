//! Conjugate-factor certificates: an ordered list of factors ε σ^{±1} ε^{-1}
//! whose exact product equals a stated elementary target, plus the JSON
//! contract used by the CLI.
//!
//! Conjugators are stored as generator words, never as raw matrices, so
//! verification re-derives every factor from definitions.

use crate::error::{Error, Result};
use crate::heis::{DeltaSet, HeisElem};
use crate::ring::{Involution, Ring, RingElem, RingKind, RingSpec};
use crate::theta::ThetaMatrix;
use crate::word::{ElemGen, ElemWord, Group};
use serde::{Deserialize, Serialize};

/// One elementary σ-conjugate ε σ^{exp} ε^{-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjFactor {
    pub conj: ElemWord,
    pub exp: i8,
}

/// The theorem item a certificate realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::I => "i",
            Kind::II => "ii",
            Kind::III => "iii",
            Kind::IV => "iv",
            Kind::V => "v",
            Kind::VI => "vi",
            Kind::VII => "vii",
            Kind::VIII => "viii",
        }
    }

    pub fn from_str(s: &str) -> Result<Kind> {
        Ok(match s {
            "i" => Kind::I,
            "ii" => Kind::II,
            "iii" => Kind::III,
            "iv" => Kind::IV,
            "v" => Kind::V,
            "vi" => Kind::VI,
            "vii" => Kind::VII,
            "viii" => Kind::VIII,
            _ => return Err(Error::Malformed(format!("unknown kind {s:?}"))),
        })
    }

    pub fn all() -> [Kind; 8] {
        [Kind::I, Kind::II, Kind::III, Kind::IV, Kind::V, Kind::VI, Kind::VII, Kind::VIII]
    }

    /// Factor-count bound for the orthogonal theorem.
    pub fn ortho_bound(&self, n: usize) -> usize {
        match self {
            Kind::I => 8,
            Kind::II => 16,
            Kind::III | Kind::IV | Kind::V => 24,
            Kind::VI => 48,
            Kind::VII => 64 * n + 148,
            Kind::VIII => 192 * n + 564,
        }
    }

    /// Factor-count bound for the unitary theorem.
    pub fn unitary_bound(&self, n: usize) -> usize {
        match self {
            Kind::I => 160,
            Kind::II => 320,
            Kind::III | Kind::IV | Kind::V => 480,
            Kind::VI => 960,
            Kind::VII => 1600 * n + 5764,
            Kind::VIII => 4800 * n + 16812,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTag {
    Ortho,
    Unitary,
}

/// Index data stored with a certificate; which fields apply depends on kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Indices {
    pub i: Option<i32>,
    pub j: Option<i32>,
    pub k: Option<i32>,
    pub l: Option<i32>,
}

/// A verifiable decomposition: ordered conjugate factors multiplying to the
/// target elementary matrix, within the claimed bound.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub group: GroupTag,
    pub n: usize,
    pub sigma: ThetaMatrix,
    pub kind: Kind,
    pub indices: Indices,
    /// J(Δ) parameter for unitary kinds iii/iv/viii.
    pub a: Option<RingElem>,
    /// Realized free second component for unitary kind viii.
    pub x_out: Option<RingElem>,
    pub target: ElemGen,
    pub bound: usize,
    pub factors: Vec<ConjFactor>,
}

impl Certificate {
    pub fn count(&self) -> usize {
        self.factors.len()
    }
}

/// Evaluate Π ε σ^{±1} ε^{-1} over the factor list.
pub fn eval_factors<G: Group>(
    g: &G,
    sigma: &ThetaMatrix,
    sigma_inv: &ThetaMatrix,
    factors: &[ConjFactor],
) -> ThetaMatrix {
    let mut acc = ThetaMatrix::identity(g.ring(), g.n());
    for f in factors {
        let base = if f.exp >= 0 { sigma } else { sigma_inv };
        let mut v = base.clone();
        for gen in f.conj.iter().rev() {
            g.apply_left(gen, &mut v);
        }
        for gen in f.conj.iter().rev() {
            g.apply_right(&g.gen_inv(gen), &mut v);
        }
        acc = acc.mul(g.ring(), &v);
    }
    acc
}

/// Reverse order, flip exponents: the factor list of the inverse product.
pub fn invert_factors(factors: &[ConjFactor]) -> Vec<ConjFactor> {
    factors.iter().rev().map(|f| ConjFactor { conj: f.conj.clone(), exp: -f.exp }).collect()
}

/// Prefix every conjugator: the factor list of ε b ε^{-1}.
pub fn prefix_factors(eps: &[ElemGen], factors: &[ConjFactor]) -> Vec<ConjFactor> {
    factors
        .iter()
        .map(|f| {
            let mut w = Vec::with_capacity(eps.len() + f.conj.len());
            w.extend_from_slice(eps);
            w.extend_from_slice(&f.conj);
            ConjFactor { conj: w, exp: f.exp }
        })
        .collect()
}

/// [ε', b]: conjugated factors of b first, then inverted factors reversed.
pub fn commutator_factors(eps: &[ElemGen], factors: &[ConjFactor]) -> Vec<ConjFactor> {
    let mut out = prefix_factors(eps, factors);
    out.extend(invert_factors(factors));
    out
}

/// [b, ε'] = b · ε' b^{-1} ε'^{-1}.
pub fn commutator_factors_rev(factors: &[ConjFactor], eps: &[ElemGen]) -> Vec<ConjFactor> {
    let mut out = factors.to_vec();
    out.extend(prefix_factors(eps, &invert_factors(factors)));
    out
}

/// Full verification: every conjugator generator is a valid elementary
/// matrix, the factor product equals the target exactly, and the count is
/// within the bound. Returns the target matrix on success.
pub fn verify_certificate<G: Group>(g: &G, cert: &Certificate) -> Result<ThetaMatrix> {
    if cert.count() > cert.bound {
        return Err(Error::Verification(format!(
            "factor count {} exceeds bound {}",
            cert.count(),
            cert.bound
        )));
    }
    if !g.is_elem_of_group(&cert.sigma) {
        return Err(Error::Verification("sigma is not a group member".into()));
    }
    for f in &cert.factors {
        if f.exp != 1 && f.exp != -1 {
            return Err(Error::Malformed(format!("exponent {}", f.exp)));
        }
        for gen in &f.conj {
            g.gen_matrix(gen)
                .map_err(|e| Error::Verification(format!("invalid conjugator generator: {e}")))?;
        }
    }
    let target = g.gen_matrix(&cert.target)?;
    let sigma_inv = cert.sigma.inv(g.ring())?;
    let prod = eval_factors(g, &cert.sigma, &sigma_inv, &cert.factors);
    if prod != target {
        return Err(Error::Verification("factor product differs from target".into()));
    }
    Ok(target)
}

// ---------------------------------------------------------------------------
// JSON contract
// ---------------------------------------------------------------------------

fn elem_to_json(ring: &Ring, x: RingElem) -> Vec<u64> {
    match ring.kind() {
        RingKind::Residue { .. } => vec![x.a],
        RingKind::QuadExt { .. } => vec![x.a, x.b],
    }
}

fn elem_from_json(ring: &Ring, v: &[u64]) -> Result<RingElem> {
    match (ring.kind(), v) {
        (RingKind::Residue { .. }, [a]) => Ok(ring.canon(RingElem::new(*a, 0))),
        (RingKind::QuadExt { .. }, [a, b]) => Ok(ring.canon(RingElem::new(*a, *b))),
        _ => Err(Error::Malformed(format!("element coefficient list {v:?}"))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elems: Option<Vec<(Vec<u64>, Vec<u64>)>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RingJson {
    pub kind: String,
    pub involution: String,
    pub lambda: Vec<u64>,
    pub mu: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenJson {
    pub g: String,
    pub i: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i32>,
    pub x: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<u64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FactorJson {
    pub conj: Vec<GenJson>,
    pub exp: i8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IndicesJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<i32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertJson {
    pub group: String,
    pub ring: RingJson,
    pub n: u64,
    pub sigma: Vec<Vec<Vec<u64>>>,
    pub kind: String,
    pub indices: IndicesJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_out: Option<Vec<u64>>,
    pub target: GenJson,
    pub bound: u64,
    pub factors: Vec<FactorJson>,
}

pub fn gen_to_json(ring: &Ring, g: &ElemGen) -> GenJson {
    match *g {
        ElemGen::Short { i, j, x } => GenJson {
            g: "S".into(),
            i,
            j: Some(j),
            x: elem_to_json(ring, x),
            y: None,
        },
        ElemGen::Extra { i, x, y } => GenJson {
            g: "E".into(),
            i,
            j: None,
            x: elem_to_json(ring, x),
            y: y.map(|v| elem_to_json(ring, v)),
        },
    }
}

pub fn gen_from_json(ring: &Ring, g: &GenJson) -> Result<ElemGen> {
    match g.g.as_str() {
        "S" => Ok(ElemGen::Short {
            i: g.i,
            j: g.j.ok_or_else(|| Error::Malformed("short root without j".into()))?,
            x: elem_from_json(ring, &g.x)?,
        }),
        "E" => Ok(ElemGen::Extra {
            i: g.i,
            x: elem_from_json(ring, &g.x)?,
            y: match &g.y {
                Some(v) => Some(elem_from_json(ring, v)?),
                None => None,
            },
        }),
        other => Err(Error::Malformed(format!("generator tag {other:?}"))),
    }
}

/// Describe Δ for embedding in a certificate. The element list is kept only
/// for explicitly enumerated parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaDesc {
    Min,
    Max,
    Set(Vec<HeisElem>),
}

impl DeltaDesc {
    pub fn to_json(&self, ring: &Ring) -> DeltaJson {
        match self {
            DeltaDesc::Min => DeltaJson { kind: "min".into(), elems: None },
            DeltaDesc::Max => DeltaJson { kind: "max".into(), elems: None },
            DeltaDesc::Set(elems) => DeltaJson {
                kind: "set".into(),
                elems: Some(
                    elems
                        .iter()
                        .map(|h| (elem_to_json(ring, h.x), elem_to_json(ring, h.y)))
                        .collect(),
                ),
            },
        }
    }

    pub fn from_json(ring: &Ring, d: &DeltaJson) -> Result<DeltaDesc> {
        match d.kind.as_str() {
            "min" => Ok(DeltaDesc::Min),
            "max" => Ok(DeltaDesc::Max),
            "set" => {
                let elems = d
                    .elems
                    .as_ref()
                    .ok_or_else(|| Error::Malformed("delta set without elems".into()))?;
                let mut out = Vec::with_capacity(elems.len());
                for (x, y) in elems {
                    out.push(HeisElem::new(elem_from_json(ring, x)?, elem_from_json(ring, y)?));
                }
                Ok(DeltaDesc::Set(out))
            }
            other => Err(Error::Malformed(format!("delta kind {other:?}"))),
        }
    }

    pub fn build(&self, ring: &Ring) -> Result<DeltaSet> {
        match self {
            DeltaDesc::Min => Ok(DeltaSet::delta_min(ring)),
            DeltaDesc::Max => Ok(DeltaSet::delta_max(ring)),
            DeltaDesc::Set(elems) => {
                let set = DeltaSet::closure(ring, elems)?;
                // an explicit set must already be closed
                if set.len() != elems.len() {
                    return Err(Error::InvalidFormIdeal(
                        "explicit delta element list is not closed".into(),
                    ));
                }
                Ok(set)
            }
        }
    }

    /// Canonical description of an enumerated set.
    pub fn from_set(set: &DeltaSet) -> DeltaDesc {
        DeltaDesc::Set(set.elems().to_vec())
    }
}

pub fn ring_to_json(ring: &Ring, delta: Option<&DeltaDesc>) -> RingJson {
    RingJson {
        kind: ring.ring_str(),
        involution: ring.involution_str().into(),
        lambda: elem_to_json(ring, ring.lambda()),
        mu: elem_to_json(ring, ring.mu()),
        delta: delta.map(|d| d.to_json(ring)),
    }
}

pub fn ring_from_json(rj: &RingJson) -> Result<Ring> {
    let kind = RingSpec::parse_ring_str(&rj.kind)?;
    let involution = match rj.involution.as_str() {
        "id" => Involution::Id,
        "conj" => Involution::Conj,
        other => return Err(Error::Malformed(format!("involution {other:?}"))),
    };
    // bootstrap an unvalidated handle solely to parse coefficients
    let proto = RingSpec {
        kind,
        involution: Involution::Id,
        lambda: RingElem::new(1, 0),
        mu: RingElem::new(1, 0),
    }
    .validate()?;
    let lambda = elem_from_json(&proto, &rj.lambda)?;
    let mu = elem_from_json(&proto, &rj.mu)?;
    RingSpec { kind, involution, lambda, mu }.validate()
}

pub fn sigma_to_json(ring: &Ring, m: &ThetaMatrix) -> Vec<Vec<Vec<u64>>> {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|v| elem_to_json(ring, v)).collect())
        .collect()
}

pub fn sigma_from_json(ring: &Ring, n: usize, rows: &[Vec<Vec<u64>>]) -> Result<ThetaMatrix> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for v in row {
            r.push(elem_from_json(ring, v)?);
        }
        out.push(r);
    }
    ThetaMatrix::from_rows(ring, n, &out)
}

pub fn cert_to_json(ring: &Ring, delta: Option<&DeltaDesc>, cert: &Certificate) -> CertJson {
    CertJson {
        group: match cert.group {
            GroupTag::Ortho => "ortho".into(),
            GroupTag::Unitary => "unitary".into(),
        },
        ring: ring_to_json(ring, delta),
        n: cert.n as u64,
        sigma: sigma_to_json(ring, &cert.sigma),
        kind: cert.kind.as_str().into(),
        indices: IndicesJson {
            i: cert.indices.i,
            j: cert.indices.j,
            k: cert.indices.k,
            l: cert.indices.l,
        },
        a: cert.a.map(|v| elem_to_json(ring, v)),
        x_out: cert.x_out.map(|v| elem_to_json(ring, v)),
        target: gen_to_json(ring, &cert.target),
        bound: cert.bound as u64,
        factors: cert
            .factors
            .iter()
            .map(|f| FactorJson {
                conj: f.conj.iter().map(|g| gen_to_json(ring, g)).collect(),
                exp: f.exp,
            })
            .collect(),
    }
}

pub fn cert_from_json(ring: &Ring, cj: &CertJson) -> Result<Certificate> {
    let group = match cj.group.as_str() {
        "ortho" => GroupTag::Ortho,
        "unitary" => GroupTag::Unitary,
        other => return Err(Error::Malformed(format!("group {other:?}"))),
    };
    let n = cj.n as usize;
    let sigma = sigma_from_json(ring, n, &cj.sigma)?;
    let mut factors = Vec::with_capacity(cj.factors.len());
    for f in &cj.factors {
        if f.exp != 1 && f.exp != -1 {
            return Err(Error::Malformed(format!("exponent {}", f.exp)));
        }
        let mut conj = Vec::with_capacity(f.conj.len());
        for g in &f.conj {
            conj.push(gen_from_json(ring, g)?);
        }
        factors.push(ConjFactor { conj, exp: f.exp });
    }
    Ok(Certificate {
        group,
        n,
        sigma,
        kind: Kind::from_str(&cj.kind)?,
        indices: Indices { i: cj.indices.i, j: cj.indices.j, k: cj.indices.k, l: cj.indices.l },
        a: match &cj.a {
            Some(v) => Some(elem_from_json(ring, v)?),
            None => None,
        },
        x_out: match &cj.x_out {
            Some(v) => Some(elem_from_json(ring, v)?),
            None => None,
        },
        target: gen_from_json(ring, &cj.target)?,
        bound: cj.bound as usize,
        factors,
    })
}
