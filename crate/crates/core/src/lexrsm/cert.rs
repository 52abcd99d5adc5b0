//! JSON certificate documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{LexRsmMap, Lem};
use crate::frontend::{parse_assertion, parse_expr, pretty_print, Ast};
use crate::invariants::{InvariantMap, Provenance};
use crate::linear::{fmt_rat, parse_rat, Polyhedron};
use crate::pcfg::{gen_transitions, GenTransition, Pcfg};

pub const CERTIFICATE_FORMAT: &str = "lexrsm-certificate/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub assertion: String,
    pub provenance: String,
}

/// Serialized form of a [`LexRsmMap`]. Locations are keyed `l<id>` and
/// generalized transitions by their key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: String,
    pub program_digest: String,
    pub epsilon: String,
    pub components: Vec<BTreeMap<String, String>>,
    pub levels: BTreeMap<String, usize>,
    pub invariants: BTreeMap<String, InvariantEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("malformed certificate: {0}")]
    Json(String),
    #[error("unsupported certificate format {0:?}")]
    Format(String),
    #[error("digest mismatch: certificate is for {found}, program is {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("bad epsilon {0:?}")]
    Epsilon(String),
    #[error("unknown location key {0:?}")]
    Location(String),
    #[error("component {component} has no expression for l{loc}")]
    MissingLocation { component: usize, loc: usize },
    #[error("no invariant for l{0}")]
    MissingInvariant(usize),
    #[error("unknown transition key {0:?}")]
    Transition(String),
    #[error("{key}: {message}")]
    Expression { key: String, message: String },
}

/// `sha256:<hex>` of the program's canonical text.
pub fn program_digest(ast: &Ast) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(pretty_print(ast).as_bytes())))
}

fn loc_key(l: usize) -> String {
    format!("l{l}")
}

fn parse_loc(key: &str, nloc: usize) -> Result<usize, CertificateError> {
    key.strip_prefix('l')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&l| l < nloc && key == loc_key(l))
        .ok_or_else(|| CertificateError::Location(key.to_string()))
}

impl Certificate {
    pub fn from_map(g: &Pcfg, digest: &str, map: &LexRsmMap) -> Certificate {
        let names = |v: usize| g.var_name(v);
        let components = map
            .components
            .iter()
            .map(|c| c.exprs.iter().enumerate().map(|(l, e)| (loc_key(l), e.display_with(&names).to_string())).collect())
            .collect();
        let levels = map.levels.iter().map(|(gt, &lv)| (gt.key(), lv)).collect();
        let invariants = (0..map.invariants.len())
            .map(|l| {
                let entry = InvariantEntry {
                    assertion: map.invariants.get(l).display_with(&names),
                    provenance: map.invariants.provenance[l].as_str().to_string(),
                };
                (loc_key(l), entry)
            })
            .collect();
        Certificate {
            format: CERTIFICATE_FORMAT.to_string(),
            program_digest: digest.to_string(),
            epsilon: fmt_rat(&map.epsilon),
            components,
            levels,
            invariants,
        }
    }

    /// Parses the JSON document only; nothing is resolved against a program.
    pub fn parse(text: &str) -> Result<Certificate, CertificateError> {
        let c: Certificate = serde_json::from_str(text).map_err(|e| CertificateError::Json(e.to_string()))?;
        if c.format != CERTIFICATE_FORMAT {
            return Err(CertificateError::Format(c.format));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Rebuilds the map against `g`, whose program digest is `digest`.
    pub fn resolve(&self, g: &Pcfg, digest: &str) -> Result<LexRsmMap, CertificateError> {
        if self.program_digest != digest {
            return Err(CertificateError::DigestMismatch {
                expected: digest.to_string(),
                found: self.program_digest.clone(),
            });
        }
        let epsilon = parse_rat(&self.epsilon)
            .filter(|e| *e > num::Zero::zero())
            .ok_or_else(|| CertificateError::Epsilon(self.epsilon.clone()))?;
        let nloc = g.locations.len();
        let mut components = Vec::new();
        for (j, comp) in self.components.iter().enumerate() {
            let mut exprs = vec![None; nloc];
            for (k, text) in comp {
                let l = parse_loc(k, nloc)?;
                let e = parse_expr(text, &g.vars).map_err(|e| CertificateError::Expression {
                    key: format!("component {} {k}", j + 1),
                    message: e.to_string(),
                })?;
                exprs[l] = Some(e);
            }
            let exprs = exprs
                .into_iter()
                .enumerate()
                .map(|(l, e)| e.ok_or(CertificateError::MissingLocation { component: j + 1, loc: l }))
                .collect::<Result<Vec<_>, _>>()?;
            components.push(Lem { exprs });
        }
        let known = gen_transitions(g);
        let mut levels = BTreeMap::new();
        for (k, &lv) in &self.levels {
            let gt = GenTransition::from_key(k)
                .filter(|gt| known.contains(gt))
                .ok_or_else(|| CertificateError::Transition(k.clone()))?;
            levels.insert(gt, lv);
        }
        let mut invariants = InvariantMap::uniform(nloc, Polyhedron::top(), Provenance::Default);
        let mut seen = vec![false; nloc];
        for (k, entry) in &self.invariants {
            let l = parse_loc(k, nloc)?;
            let expr_err = |message: String| CertificateError::Expression { key: format!("invariant {k}"), message };
            let pred = parse_assertion(&entry.assertion, &g.vars).map_err(|e| expr_err(e.to_string()))?;
            let poly = pred.as_polyhedron().ok_or_else(|| expr_err("not a conjunction".into()))?;
            let prov = Provenance::parse(&entry.provenance)
                .ok_or_else(|| expr_err(format!("unknown provenance {:?}", entry.provenance)))?;
            invariants.set(l, poly, prov);
            seen[l] = true;
        }
        if let Some(l) = seen.iter().position(|s| !s) {
            return Err(CertificateError::MissingInvariant(l));
        }
        Ok(LexRsmMap { components, levels, epsilon, invariants })
    }
}
