//! JSON model format:
//! `{"locations":[{"id","sector":{"lo":[dx,dy],"hi":[dx,dy]},"flow",
//! "guard":"lo"|"hi","switch":{id:"p/q"}}],"initial":{"location","facet"}}`.
//!
//! Flows are accepted either as explicit vectors `["a/b","c/d"]` or in the
//! coefficient form `{"a":..,"b":..,"orient":"ccw"|"cw"}` meaning
//! `a*dx/dt + b*dy/dt = 0`, with the orientation picking the direction:
//! ccw resolves to `(-b, a)`, cw to `(b, -a)`.

use super::{FacetTag, Location, Ppcd, PpcdError};
use crate::exact::{Rat, Vec2Q};
use crate::geom2d::{FlowVec, Sector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PpcdFile {
    pub locations: Vec<LocationFile>,
    pub initial: InitialFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationFile {
    pub id: String,
    pub sector: Sector,
    pub flow: FlowForm,
    pub guard: FacetTag,
    #[serde(default)]
    pub switch: BTreeMap<String, Rat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialFile {
    pub location: String,
    pub facet: FacetTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

/// A flow, either as an explicit vector or in experiment coefficient form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlowForm {
    Vector(FlowVec),
    Equation { a: Rat, b: Rat, orient: Orientation },
}

impl FlowForm {
    pub fn resolve(&self) -> Result<FlowVec, PpcdError> {
        match self {
            FlowForm::Vector(v) => Ok(v.clone()),
            FlowForm::Equation { a, b, orient } => {
                let dir = match orient {
                    Orientation::Ccw => Vec2Q::new(-b.clone(), a.clone()),
                    Orientation::Cw => Vec2Q::new(b.clone(), -a.clone()),
                };
                Ok(FlowVec::new(dir)?)
            }
        }
    }
}

impl PpcdFile {
    pub fn from_model(model: &Ppcd) -> Self {
        let (li, facet) = model.initial();
        PpcdFile {
            locations: model
                .locations()
                .iter()
                .map(|l| LocationFile {
                    id: l.id.clone(),
                    sector: l.invariant.clone(),
                    flow: FlowForm::Vector(l.flow.clone()),
                    guard: l.guard,
                    switch: l.switch.clone(),
                })
                .collect(),
            initial: InitialFile {
                location: model.locations()[li].id.clone(),
                facet,
            },
        }
    }

    pub fn into_model(self) -> Result<Ppcd, PpcdError> {
        let locations = self
            .locations
            .iter()
            .map(|l| {
                Ok(Location {
                    id: l.id.clone(),
                    invariant: l.sector.clone(),
                    flow: l.flow.resolve()?,
                    guard: l.guard,
                    switch: l.switch.clone(),
                })
            })
            .collect::<Result<Vec<_>, PpcdError>>()?;
        Ppcd::new(locations, &self.initial.location, self.initial.facet)
    }
}

impl Ppcd {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&PpcdFile::from_model(self)).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::Ray;

    #[test]
    fn parses_both_flow_forms() {
        let text = r#"{
            "locations": [
                {"id": "q1",
                 "sector": {"lo": [1, 0], "hi": [0, 1]},
                 "flow": ["-1", "1"],
                 "guard": "hi",
                 "switch": {"q2": "1"}},
                {"id": "q2",
                 "sector": {"lo": [0, 1], "hi": [-1, 0]},
                 "flow": {"a": "1", "b": "1", "orient": "ccw"},
                 "guard": "hi",
                 "switch": {"q1": "1"}}
            ],
            "initial": {"location": "q1", "facet": "lo"}
        }"#;
        let file: PpcdFile = serde_json::from_str(text).unwrap();
        let model = file.into_model().unwrap();
        assert_eq!(model.locations()[1].flow, FlowVec::ints(-1, 1));
        // q2 targets q1 whose invariant lacks q2's guard ray (-1,0)
        let report = model.validate();
        assert!(!report.is_ok());

        let round: PpcdFile = serde_json::from_str(&model.to_json_string()).unwrap();
        let model2 = round.into_model().unwrap();
        assert_eq!(model.locations(), model2.locations());
    }

    #[test]
    fn reflex_sector_is_rejected_at_parse_time() {
        let text = r#"{"lo": [1, 0], "hi": [-2, 0]}"#;
        let err = serde_json::from_str::<Sector>(text).unwrap_err();
        assert!(err.to_string().contains("degenerate or reflex"));
    }

    #[test]
    fn cw_orientation_flips_the_direction() {
        let f = FlowForm::Equation {
            a: Rat::of(1, 1),
            b: Rat::of(2, 1),
            orient: Orientation::Cw,
        };
        assert_eq!(f.resolve().unwrap(), FlowVec::ints(2, -1));
        let zero = FlowForm::Equation {
            a: Rat::zero(),
            b: Rat::zero(),
            orient: Orientation::Ccw,
        };
        assert!(zero.resolve().is_err());
        let _ = Ray::of(1, 0);
    }
}
