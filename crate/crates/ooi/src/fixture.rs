//! FSC fixtures as TOML with flat row-major tables:
//!
//! ```toml
//! nodes = 2
//! observations = 1
//! actions = 2
//! psi = [1.0, 0.0, 0.0, 1.0]        # node × action
//! eta = [0.0, 1.0, 1.0, 0.0]        # node × observation × node
//! eta0 = [1.0, 0.0]                 # observation × node
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ooi_core::fsc::{Fsc, FscError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Serialise(#[from] toml::ser::Error),
    #[error(transparent)]
    Fsc(#[from] FscError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FscFixture {
    pub nodes: usize,
    pub observations: usize,
    pub actions: usize,
    pub psi: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta0: Vec<f64>,
}

impl FscFixture {
    pub fn from_fsc(fsc: &Fsc) -> Self {
        let (psi, eta, eta0) = fsc.tables();
        Self {
            nodes: fsc.node_count(),
            observations: fsc.observation_count(),
            actions: fsc.action_count(),
            psi: psi.to_vec(),
            eta: eta.to_vec(),
            eta0: eta0.to_vec(),
        }
    }

    pub fn to_fsc(&self) -> Result<Fsc, FscError> {
        Fsc::new(self.nodes, self.observations, self.actions, self.psi.clone(), self.eta.clone(), self.eta0.clone())
    }

    pub fn parse(text: &str) -> Result<Fsc, FixtureError> {
        let fixture: Self = toml::from_str(text)?;
        Ok(fixture.to_fsc()?)
    }

    pub fn to_toml(&self) -> Result<String, FixtureError> {
        Ok(toml::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ooi_core::fsc::make_alternator;

    #[test]
    fn alternator_round_trip() {
        let fsc = make_alternator();
        let text = FscFixture::from_fsc(&fsc).to_toml().unwrap();
        let back = FscFixture::parse(&text).unwrap();
        assert_eq!(back.tables(), fsc.tables());
    }

    #[test]
    fn invalid_rows_are_rejected() {
        let text = "nodes = 1\nobservations = 1\nactions = 2\npsi = [0.5, 0.4]\neta = [1.0]\neta0 = [1.0]\n";
        assert!(matches!(FscFixture::parse(text), Err(FixtureError::Fsc(_))));
    }
}
