use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PotentialGame;
use crate::error::Result;

/// On-disk JSON layout of a game.
///
/// `utilities[i][k]` is player `i`'s utility at flat profile index `k`
/// (player 0 least significant). `potential` is optional; when absent it is
/// derived from the utilities and then validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub num_players: usize,
    pub num_actions: usize,
    pub utilities: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

impl GameFile {
    pub fn into_game(self) -> Result<PotentialGame> {
        match self.potential {
            Some(phi) => {
                PotentialGame::new(self.num_players, self.num_actions, self.utilities, phi)
            }
            None => {
                PotentialGame::from_utilities(self.num_players, self.num_actions, self.utilities)
            }
        }
    }
}

impl From<&PotentialGame> for GameFile {
    fn from(g: &PotentialGame) -> Self {
        GameFile {
            num_players: g.num_players(),
            num_actions: g.num_actions(),
            utilities: (0..g.num_players())
                .map(|i| g.utilities(i).to_vec())
                .collect(),
            potential: Some(g.potential().to_vec()),
        }
    }
}

impl PotentialGame {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(s)?;
        file.into_game()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GameFile::from(self))?)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_is_optional() {
        let json = r#"{"num_players": 2, "num_actions": 2,
                       "utilities": [[5, -5, -1, 1], [2, -4, -2, 4]]}"#;
        let g = PotentialGame::from_json_str(json).unwrap();
        let phi = g.potential();
        // Phi - Phi(0) must equal [0, -10, -4, -2] for the intro game.
        let expected = [0.0, -10.0, -4.0, -2.0];
        for (p, e) in phi.iter().zip(expected) {
            assert!((p - phi[0] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_potential_is_rejected() {
        let json = r#"{"num_players": 2, "num_actions": 2,
                       "utilities": [[5, -5, -1, 1], [2, -4, -2, 4]],
                       "potential": [4, -6, 0, 3]}"#;
        assert!(PotentialGame::from_json_str(json).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = PotentialGame::identical_interest(2, 3, (0..9).map(|i| i as f64 / 8.0).collect())
            .unwrap();
        let back = PotentialGame::from_json_str(&g.to_json_string().unwrap()).unwrap();
        assert_eq!(g, back);
    }
}
