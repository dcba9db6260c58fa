//! JSON input and output: system files, single states and JSON-lines sequences.
//!
//! One record type serves all three. A system file needs only `masses`,
//! `interaction` and (for Coulomb) `charges`; a state adds `positions` and
//! `velocities`; sequence records may also carry `k`, `z` and `lambda`.
//! Floats are written in shortest round-trip form, so re-reading is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::Multiplier;
use crate::linalg::Vec3;
use crate::state::{to_albouy, AlbouyState, BodySystem, CartesianState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<Vec<f64>>,
    pub interaction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec3<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Vec3<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec3<f64>>,
}

impl StateRecord {
    pub fn system(&self) -> Result<BodySystem<f64>> {
        match self.interaction.as_str() {
            "gravitational" => {
                if self.charges.is_some() {
                    return Err(Error::Parse("gravitational systems take no charges".into()));
                }
                BodySystem::gravitational(self.masses.clone())
            }
            "coulomb" => {
                let charges = self.charges.clone().ok_or_else(|| Error::Parse("coulomb systems need charges".into()))?;
                BodySystem::coulomb(self.masses.clone(), charges)
            }
            other => Err(Error::Parse(format!("unknown interaction '{other}' (expected gravitational or coulomb)"))),
        }
    }

    /// The state, centred on the centre of mass; `None` without positions.
    pub fn state(&self, sys: &BodySystem<f64>) -> Result<Option<AlbouyState<f64>>> {
        let Some(positions) = self.positions.clone() else {
            return if self.velocities.is_some() {
                Err(Error::Parse("velocities given without positions".into()))
            } else {
                Ok(None)
            };
        };
        let velocities = self.velocities.clone().unwrap_or_else(|| vec![[0.0; 3]; positions.len()]);
        to_albouy(&CartesianState { positions, velocities }, sys).map(Some)
    }

    pub fn from_state(
        sys: &BodySystem<f64>,
        s: &AlbouyState<f64>,
        k: Option<usize>,
        z: Option<f64>,
        lambda: Option<&Multiplier<f64>>,
    ) -> Self {
        let c = s.to_cartesian();
        Self {
            k,
            z,
            masses: sys.masses().to_vec(),
            charges: sys.charges().map(<[f64]>::to_vec),
            interaction: sys.interaction().name().into(),
            positions: Some(c.positions),
            velocities: Some(c.velocities),
            lambda: lambda.map(|l| l.lambda),
        }
    }
}

pub fn parse_record(text: &str) -> Result<StateRecord> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json(record: &StateRecord) -> String {
    serde_json::to_string(record).expect("records serialise")
}

/// States of a JSON-lines file, with multipliers and abscissa when every
/// record carries them.
#[derive(Debug, Clone)]
pub struct ParsedSequence {
    pub system: BodySystem<f64>,
    pub states: Vec<AlbouyState<f64>>,
    pub multipliers: Option<Vec<Multiplier<f64>>>,
    pub abscissa: Option<Vec<f64>>,
}

pub fn parse_sequence(text: &str) -> Result<ParsedSequence> {
    let mut first: Option<StateRecord> = None;
    let mut system = None;
    let mut states = Vec::new();
    let mut multipliers = Vec::new();
    let mut abscissa = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec = parse_record(line).map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
        if let Some(f) = &first {
            if f.masses != rec.masses || f.charges != rec.charges || f.interaction != rec.interaction {
                return Err(Error::Parse(format!("line {}: record belongs to a different system", line_no + 1)));
            }
        } else {
            system = Some(rec.system()?);
            first = Some(rec.clone());
        }
        let sys = system.as_ref().expect("set with the first record");
        let s = rec.state(sys)?.ok_or_else(|| Error::Parse(format!("line {}: record has no positions", line_no + 1)))?;
        states.push(s);
        multipliers.push(rec.lambda.map(Multiplier::new));
        abscissa.push(rec.z);
    }
    let system = system.ok_or_else(|| Error::Parse("empty sequence file".into()))?;
    Ok(ParsedSequence {
        system,
        states,
        multipliers: multipliers.into_iter().collect(),
        abscissa: abscissa.into_iter().collect(),
    })
}
