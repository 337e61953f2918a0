use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::element::Hierarchomorphism;
use super::isometry::BranchIsometry;
use super::perm::Perm;
use crate::error::Result;
use crate::tree::{Cut, TreeFamily, VertexAddress};

/// Wire form of an element. Permutations are written in cycle notation and
/// the basepoint is the empty string, e.g.
/// `{"domain":["0","1","2"],"range":["0","1","2"],"match":{"0":"1","1":"0","2":"2"},"interior":{"":""}}`.
#[derive(Serialize, Deserialize)]
struct ElementJson {
    domain: Vec<VertexAddress>,
    range: Vec<VertexAddress>,
    #[serde(rename = "match")]
    branch_map: BTreeMap<VertexAddress, VertexAddress>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    isometries: BTreeMap<VertexAddress, BTreeMap<VertexAddress, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interior: Option<BTreeMap<VertexAddress, VertexAddress>>,
}

impl Hierarchomorphism {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("serializable")
    }

    /// Parses and validates an element of `family`.
    pub fn from_json(family: &TreeFamily, s: &str) -> Result<Self> {
        let wire: ElementJson = serde_json::from_str(s)?;
        let mut isometries = BTreeMap::new();
        for (u, local) in wire.isometries {
            let perms = local
                .into_iter()
                .map(|(p, c)| Ok((p, Perm::parse_cycles(&c)?)))
                .collect::<Result<Vec<_>>>()?;
            isometries.insert(u, BranchIsometry::from_local(perms));
        }
        let g = Hierarchomorphism::from_parts(
            Cut::new(family, wire.domain)?,
            Cut::new(family, wire.range)?,
            wire.branch_map,
            isometries,
            wire.interior,
        );
        g.validate(family)?;
        Ok(g)
    }

    fn to_wire(&self) -> ElementJson {
        ElementJson {
            domain: self.domain().boundary().to_vec(),
            range: self.range().boundary().to_vec(),
            branch_map: self.branch_map().clone(),
            isometries: self
                .isometries()
                .iter()
                .map(|(u, iso)| (u.clone(), iso.local().iter().map(|(p, perm)| (p.clone(), perm.to_cycles())).collect()))
                .collect(),
            interior: self.interior_map().cloned(),
        }
    }
}
