use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::{validate_architecture, Architecture, NetError, NeuralNet};
use crate::algebra::{FiniteOperation, Universe};

/// JSON form of a net. Activations stay as raw descriptors until decoded so
/// that every fault in a document can be reported at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub universe: Universe,
    pub layers: Vec<Vec<String>>,
    pub edges: Vec<(String, String)>,
    pub activations: BTreeMap<String, Value>,
}

impl NetDocument {
    pub fn from_net(net: &NeuralNet) -> Self {
        let arch = net.architecture();
        NetDocument {
            universe: net.universe(),
            layers: arch.layers.clone(),
            edges: arch.edges.clone(),
            activations: net
                .activations()
                .map(|(v, op)| {
                    let doc = serde_json::to_value(op).expect("descriptors serialize");
                    (v.to_string(), doc)
                })
                .collect(),
        }
    }

    pub fn into_net(self) -> Result<NeuralNet, NetError> {
        let arch = Architecture::new(self.layers, self.edges);
        let mut faults: Vec<String> = match validate_architecture(&arch) {
            Ok(()) => Vec::new(),
            Err(vs) => vs.iter().map(ToString::to_string).collect(),
        };
        let mut acts = BTreeMap::new();
        for (vertex, doc) in self.activations {
            match serde_json::from_value::<FiniteOperation>(doc) {
                Ok(op) => {
                    acts.insert(vertex, op);
                }
                Err(e) => faults.push(format!("activation {vertex}: {e}")),
            }
        }
        if !faults.is_empty() {
            return Err(NetError::Document(faults));
        }
        NeuralNet::new(arch, self.universe, acts).map_err(|e| NetError::Document(vec![e.to_string()]))
    }
}

impl NeuralNet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetDocument::from_net(self)).expect("net documents serialize")
    }

    pub fn from_json(text: &str) -> Result<NeuralNet, NetError> {
        let doc: NetDocument =
            serde_json::from_str(text).map_err(|e| NetError::Document(vec![e.to_string()]))?;
        doc.into_net()
    }
}

impl Serialize for NeuralNet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NetDocument::from_net(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for NeuralNet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        NetDocument::deserialize(d)?
            .into_net()
            .map_err(serde::de::Error::custom)
    }
}
