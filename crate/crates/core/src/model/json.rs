use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Collection, ModelError, NeighbourhoodModel, Relation, StateSet};

/// On-disk form of a neighbourhood model.
///
/// ```json
/// {"states": ["t1","t2","t3"], "atoms": ["p0"],
///  "neighbourhoods": {"t1": [["t2"]], "t2": [["t2"]], "t3": [[]]},
///  "valuation": {"p0": ["t1"]}}
/// ```
///
/// A state missing from `neighbourhoods` has the empty collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default)]
    pub neighbourhoods: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

pub(crate) fn parse_atom_name(name: &str) -> Result<u32, ModelError> {
    name.strip_prefix('p')
        .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|digits| digits.parse().ok())
        .ok_or_else(|| ModelError::BadAtomName(name.to_string()))
}

impl ModelFile {
    pub fn into_model(self) -> Result<NeighbourhoodModel, ModelError> {
        let n = self.states.len();
        let skeleton =
            NeighbourhoodModel::from_parts(self.states, vec![Collection::new(); n], BTreeMap::new())?;
        let mut nbhd = vec![Collection::new(); n];
        for (state, sets) in &self.neighbourhoods {
            let s = skeleton.state(state)?;
            for members in sets {
                let set = skeleton.set_of(members.iter().map(String::as_str))?;
                if !nbhd[s].insert(set) {
                    return Err(ModelError::DuplicateNeighbourhood { state: state.clone() });
                }
            }
        }
        let mut valuation = BTreeMap::new();
        let mut declared = BTreeSet::new();
        for name in &self.atoms {
            let atom = parse_atom_name(name)?;
            declared.insert(atom);
            valuation.insert(atom, StateSet::EMPTY);
        }
        for (name, members) in &self.valuation {
            let atom = parse_atom_name(name)?;
            if !declared.contains(&atom) {
                return Err(ModelError::UndeclaredAtom(name.clone()));
            }
            valuation.insert(atom, skeleton.set_of(members.iter().map(String::as_str))?);
        }
        NeighbourhoodModel::from_parts(skeleton.states, nbhd, valuation)
    }

    pub fn from_model(model: &NeighbourhoodModel) -> Self {
        let names =
            |set: StateSet| -> Vec<String> { model.names_of(set).into_iter().map(str::to_string).collect() };
        ModelFile {
            states: model.states().to_vec(),
            atoms: model.atom_support().iter().map(|p| format!("p{p}")).collect(),
            neighbourhoods: (0..model.len())
                .map(|s| {
                    let sets = model.neighbourhoods(s).iter().map(|&u| names(u)).collect();
                    (model.name(s).to_string(), sets)
                })
                .collect(),
            valuation: model
                .valuations()
                .iter()
                .map(|(p, &set)| (format!("p{p}"), names(set)))
                .collect(),
        }
    }
}

impl NeighbourhoodModel {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        file.into_model()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ModelFile::from_model(self)).expect("model serialises")
    }
}

/// A relation as a canonically sorted list of name pairs.
pub type NamedRelation = Vec<(String, String)>;

impl Relation {
    pub fn from_names(
        pairs: &[(String, String)],
        left: &NeighbourhoodModel,
        right: &NeighbourhoodModel,
    ) -> Result<Relation, ModelError> {
        let mut indexed = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            indexed.push((left.state(a)?, right.state(b)?));
        }
        Relation::new(left.len(), right.len(), indexed)
    }

    pub fn to_names(&self, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> NamedRelation {
        self.iter()
            .map(|(a, b)| (left.name(a).to_string(), right.name(b).to_string()))
            .collect()
    }
}
