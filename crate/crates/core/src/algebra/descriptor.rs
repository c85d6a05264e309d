//! JSON descriptors for operations:
//! `{ "family", "arity", "universe": {"kind", "size"|"n"}, "params" }`.
//!
//! Projections record `index_base: 1` so the 1-based argument index is
//! unambiguous; image pixels inside parameters are rows of `0`/`1`
//! characters with row `i`, column `j` both counted from 0.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::operation::{compose_with_arity, project, FiniteOperation, Monomial, OpKind};
use super::{AlgebraError, Elem, Universe};
use crate::dominion::{Dominion, LabelAssignment};
use crate::hamming::{self, BinaryImage, DihedralElement};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpDoc {
    pub family: String,
    pub arity: usize,
    pub universe: Universe,
    #[serde(default)]
    pub params: Value,
}

#[derive(Serialize, Deserialize)]
struct ProjectionParams {
    k: usize,
    #[serde(default = "one")]
    index_base: usize,
}

fn one() -> usize {
    1
}

#[derive(Serialize, Deserialize)]
struct ComposeParams {
    outer: OpDoc,
    inner: Vec<OpDoc>,
}

#[derive(Serialize, Deserialize)]
struct DihedralParams {
    sigma: DihedralElement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<[[i32; 2]; 2]>,
}

#[derive(Serialize, Deserialize)]
struct MaskParams {
    mask: BinaryImage,
}

#[derive(Serialize, Deserialize)]
struct IndicatorParams {
    b: BinaryImage,
    c: Vec<BinaryImage>,
}

#[derive(Serialize, Deserialize)]
struct DominionParams {
    dominion: Dominion,
    assignment: LabelAssignment,
}

fn elem_to_json(universe: Universe, e: Elem) -> Value {
    match universe {
        Universe::Table { .. } => json!(e),
        Universe::Images { n } => {
            let img = BinaryImage::from_bits(n as usize, e).expect("element in universe");
            serde_json::to_value(img).expect("images serialize")
        }
    }
}

fn elem_from_json(universe: Universe, v: &Value) -> Result<Elem, String> {
    let e = match universe {
        Universe::Table { .. } => v.as_u64().ok_or("expected an integer element")?,
        Universe::Images { n } => {
            let img: BinaryImage = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
            if img.side() != n as usize {
                return Err(format!("image of side {} in images({n})", img.side()));
            }
            img.bits()
        }
    };
    if universe.contains(e) {
        Ok(e)
    } else {
        Err(format!("element {e} is not in {universe}"))
    }
}

impl FiniteOperation {
    pub fn descriptor(&self) -> OpDoc {
        let universe = self.universe();
        let params = match self.kind() {
            OpKind::Projection { k } => json!({ "k": k, "index_base": 1 }),
            OpKind::Constant { value } => json!({ "value": elem_to_json(universe, *value) }),
            OpKind::Table { values } => json!({ "values": values }),
            OpKind::LinearForm { coeffs } => json!({ "coeffs": coeffs }),
            OpKind::Polynomial { terms } => json!({ "terms": terms }),
            OpKind::Compose { outer, inner } => serde_json::to_value(ComposeParams {
                outer: outer.descriptor(),
                inner: inner.iter().map(|g| g.descriptor()).collect(),
            })
            .expect("descriptors serialize"),
            OpKind::BitwiseAnd => json!({}),
            OpKind::Dihedral { sigma } => serde_json::to_value(DihedralParams {
                sigma: *sigma,
                matrix: Some(sigma.matrix()),
            })
            .expect("dihedral serializes"),
            OpKind::Swap { mask } | OpKind::Blank { mask } => {
                serde_json::to_value(MaskParams { mask: *mask }).expect("mask serializes")
            }
            OpKind::MultilinearIndicator { b, c } => {
                serde_json::to_value(IndicatorParams { b: *b, c: c.clone() })
                    .expect("indicator serializes")
            }
            OpKind::DominionPolymorphism {
                dominion,
                assignment,
            } => serde_json::to_value(DominionParams {
                dominion: dominion.clone(),
                assignment: assignment.clone(),
            })
            .expect("dominion serializes"),
        };
        OpDoc {
            family: self.family().to_string(),
            arity: self.arity(),
            universe,
            params,
        }
    }

    pub fn from_descriptor(doc: &OpDoc) -> Result<Self, AlgebraError> {
        let family = doc.family.as_str();
        let bad = |reason: String| AlgebraError::Descriptor {
            family: family.to_string(),
            reason,
        };
        fn params<T: serde::de::DeserializeOwned>(
            doc: &OpDoc,
            bad: &dyn Fn(String) -> AlgebraError,
        ) -> Result<T, AlgebraError> {
            serde_json::from_value(doc.params.clone()).map_err(|e| bad(e.to_string()))
        }
        let universe = match doc.universe {
            Universe::Table { size } => Universe::table(size)?,
            Universe::Images { n } => Universe::images(n as usize)?,
        };
        let check_arity = |op: FiniteOperation| -> Result<FiniteOperation, AlgebraError> {
            if op.arity() != doc.arity {
                return Err(bad(format!(
                    "declared arity {} but parameters give arity {}",
                    doc.arity,
                    op.arity()
                )));
            }
            if op.universe() != universe {
                return Err(bad(format!(
                    "declared universe {universe} but parameters give {}",
                    op.universe()
                )));
            }
            Ok(op)
        };
        let op = match family {
            "projection" => {
                let p: ProjectionParams = params(doc, &bad)?;
                if p.index_base != 1 {
                    return Err(bad(format!("unsupported index_base {}", p.index_base)));
                }
                project(doc.arity, p.k, universe)?
            }
            "constant" => {
                let v = doc.params.get("value").ok_or_else(|| bad("missing value".into()))?;
                let e = elem_from_json(universe, v).map_err(bad)?;
                FiniteOperation::constant(universe, doc.arity, e)?
            }
            "table" => {
                #[derive(Deserialize)]
                struct P {
                    values: Vec<Elem>,
                }
                let p: P = params(doc, &bad)?;
                FiniteOperation::from_table(doc.arity, universe, p.values)?
            }
            "linear_form" => {
                #[derive(Deserialize)]
                struct P {
                    coeffs: Vec<u64>,
                }
                let p: P = params(doc, &bad)?;
                let size = match universe {
                    Universe::Table { size } => size,
                    Universe::Images { .. } => return Err(bad("needs a table universe".into())),
                };
                FiniteOperation::linear_form(size, p.coeffs)?
            }
            "polynomial" => {
                #[derive(Deserialize)]
                struct P {
                    terms: Vec<Monomial>,
                }
                let p: P = params(doc, &bad)?;
                let size = match universe {
                    Universe::Table { size } => size,
                    Universe::Images { .. } => return Err(bad("needs a table universe".into())),
                };
                FiniteOperation::polynomial(size, doc.arity, p.terms)?
            }
            "compose" => {
                let p: ComposeParams = params(doc, &bad)?;
                let outer = FiniteOperation::from_descriptor(&p.outer)?;
                let inner = p
                    .inner
                    .iter()
                    .map(FiniteOperation::from_descriptor)
                    .collect::<Result<Vec<_>, _>>()?;
                compose_with_arity(&outer, &inner, doc.arity)?
            }
            "bitwise_and" => {
                let n = universe.image_side().ok_or_else(|| bad("needs an image universe".into()))?;
                FiniteOperation::bitwise_and(n, doc.arity)?
            }
            "dihedral" => {
                let p: DihedralParams = params(doc, &bad)?;
                if let Some(m) = p.matrix {
                    if m != p.sigma.matrix() {
                        return Err(bad(format!("matrix {m:?} does not match symbol {}", p.sigma)));
                    }
                }
                let n = universe.image_side().ok_or_else(|| bad("needs an image universe".into()))?;
                hamming::dihedral_endo(p.sigma, n)
            }
            "swap" => hamming::swap_endo(params::<MaskParams>(doc, &bad)?.mask),
            "blank" => hamming::blank_endo(params::<MaskParams>(doc, &bad)?.mask),
            "multilinear_indicator" => {
                let p: IndicatorParams = params(doc, &bad)?;
                hamming::multilinear_indicator(p.b, &p.c).map_err(|e| bad(e.to_string()))?
            }
            "dominion_polymorphism" => {
                let p: DominionParams = params(doc, &bad)?;
                crate::dominion::dominion_polymorphism(&p.dominion, &p.assignment)
                    .map_err(|e| bad(e.to_string()))?
            }
            other => return Err(AlgebraError::UnknownFamily(other.to_string())),
        };
        check_arity(op)
    }
}

impl Serialize for FiniteOperation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.descriptor().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteOperation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = OpDoc::deserialize(deserializer)?;
        FiniteOperation::from_descriptor(&doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_descriptor_shape() {
        let p = project(3, 2, Universe::table(5).unwrap()).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(
            v,
            json!({
                "family": "projection",
                "arity": 3,
                "universe": {"kind": "table", "size": 5},
                "params": {"k": 2, "index_base": 1}
            })
        );
    }

    #[test]
    fn composition_nests_inner_descriptors() {
        let u = Universe::table(5).unwrap();
        let add = FiniteOperation::linear_form(5, vec![1, 1]).unwrap();
        let id = project(1, 1, u).unwrap();
        let f = super::super::compose(&add, &[id.clone(), id]).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["params"]["inner"].as_array().unwrap().len(), 2);
        assert_eq!(v["params"]["outer"]["family"], "linear_form");
        let back: FiniteOperation = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn unknown_family_is_named() {
        let doc = json!({"family": "sigmoid", "arity": 1, "universe": {"kind": "table", "size": 2}, "params": {}});
        let err = serde_json::from_value::<FiniteOperation>(doc).unwrap_err();
        assert!(err.to_string().contains("sigmoid"));
    }

    #[test]
    fn declared_arity_must_match() {
        let doc = OpDoc {
            family: "linear_form".into(),
            arity: 3,
            universe: Universe::Table { size: 5 },
            params: json!({"coeffs": [1, 2]}),
        };
        assert!(FiniteOperation::from_descriptor(&doc).is_err());
    }

    #[test]
    fn image_constant_uses_rows() {
        let img = BinaryImage::from_rows(&["10", "01"]).unwrap();
        let c = FiniteOperation::constant(Universe::images(2).unwrap(), 0, img.bits()).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["params"]["value"], json!(["10", "01"]));
        assert_eq!(serde_json::from_value::<FiniteOperation>(v).unwrap(), c);
    }

    #[test]
    fn dihedral_matrix_must_match_symbol() {
        let doc = json!({"family": "dihedral", "arity": 1, "universe": {"kind": "images", "n": 2},
            "params": {"sigma": "r", "matrix": [[1, 0], [0, -1]]}});
        assert!(serde_json::from_value::<FiniteOperation>(doc).is_err());
    }
}
