//! Plain-text key-value experiment configuration.
//!
//! Format: one `key = value` per line, `#` starts a comment, lists are
//! comma-separated. Unknown keys and malformed values are rejected with
//! the offending field path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub difficulties: Vec<u8>,
    pub train_envs: usize,
    pub test_envs: usize,
    /// Episodes per environment per evaluation cell.
    pub episodes_per_cell: usize,
    pub demos_per_difficulty: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub master_seed: u64,
    pub noise_add: Vec<f64>,
    pub noise_drop: Vec<f64>,
    /// Q-learning episode budget, one entry per difficulty 1..=4.
    pub q_episodes: Vec<u32>,
    /// Teacher and selector ablations (run on the first difficulty).
    pub ablations: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            difficulties: vec![1, 2, 3, 4],
            train_envs: 10,
            test_envs: 10,
            episodes_per_cell: 5,
            demos_per_difficulty: 20_000,
            epsilon: 0.2,
            tau: 0.3,
            master_seed: 7,
            noise_add: vec![0.2, 0.4, 0.6],
            noise_drop: vec![0.0, 0.03, 0.06],
            q_episodes: vec![5000, 8000, 12000, 16000],
            ablations: true,
        }
    }
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidConfig {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_scalar<T: std::str::FromStr>(path: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| bad(path, format!("cannot parse {raw:?}")))
}

fn parse_list<T: std::str::FromStr>(path: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(i, s)| parse_scalar(&format!("{path}[{i}]"), s))
        .collect()
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(
                    format!("line {}", lineno + 1),
                    "expected `key = value`",
                ));
            };
            let key = key.trim();
            match key {
                "difficulties" => config.difficulties = parse_list(key, value)?,
                "train_envs" => config.train_envs = parse_scalar(key, value)?,
                "test_envs" => config.test_envs = parse_scalar(key, value)?,
                "episodes_per_cell" => config.episodes_per_cell = parse_scalar(key, value)?,
                "demos_per_difficulty" => {
                    config.demos_per_difficulty = parse_scalar(key, value)?
                }
                "epsilon" => config.epsilon = parse_scalar(key, value)?,
                "tau" => config.tau = parse_scalar(key, value)?,
                "master_seed" => config.master_seed = parse_scalar(key, value)?,
                "noise_add" => config.noise_add = parse_list(key, value)?,
                "noise_drop" => config.noise_drop = parse_list(key, value)?,
                "q_episodes" => config.q_episodes = parse_list(key, value)?,
                "ablations" => config.ablations = parse_scalar(key, value)?,
                other => return Err(bad(other, "unknown key")),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.difficulties.is_empty() {
            return Err(bad("difficulties", "must not be empty"));
        }
        for (i, d) in self.difficulties.iter().enumerate() {
            if !(1..=4).contains(d) {
                return Err(bad(format!("difficulties[{i}]"), "must be in 1..=4"));
            }
        }
        if self.train_envs == 0 || self.test_envs == 0 {
            return Err(bad("train_envs", "environment counts must be positive"));
        }
        if self.train_envs * self.episodes_per_cell < 20 {
            return Err(bad(
                "episodes_per_cell",
                "every cell must average at least 20 episodes",
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(bad("epsilon", "must be in [0, 1]"));
        }
        if self.tau < 0.0 {
            return Err(bad("tau", "must be nonnegative"));
        }
        for (i, v) in self.noise_add.iter().enumerate() {
            if *v < 0.0 {
                return Err(bad(format!("noise_add[{i}]"), "must be nonnegative"));
            }
        }
        for (i, v) in self.noise_drop.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(bad(format!("noise_drop[{i}]"), "must be in [0, 1]"));
            }
        }
        if self.q_episodes.len() != 4 {
            return Err(bad("q_episodes", "expected one entry per difficulty 1..=4"));
        }
        if self.demos_per_difficulty == 0 {
            return Err(bad("demos_per_difficulty", "must be positive"));
        }
        Ok(())
    }

    pub fn q_episodes_for(&self, difficulty: u8) -> u32 {
        self.q_episodes[(difficulty - 1) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn parses_full_file() {
        let text = "\
# experiment setup
difficulties = 1,2
train_envs = 5
test_envs = 5
episodes_per_cell = 4
demos_per_difficulty = 500
epsilon = 0.1
tau = 0.25
master_seed = 42
noise_add = 0.2,0.4
noise_drop = 0.0,0.03
q_episodes = 100,200,300,400
ablations = false
";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.difficulties, vec![1, 2]);
        assert_eq!(c.train_envs, 5);
        assert_eq!(c.tau, 0.25);
        assert_eq!(c.q_episodes_for(2), 200);
        assert!(!c.ablations);
    }

    #[test]
    fn rejections_carry_field_paths() {
        let err = Config::parse("unknown_key = 1").unwrap_err();
        match err {
            Error::InvalidConfig { path, .. } => assert_eq!(path, "unknown_key"),
            other => panic!("unexpected {other:?}"),
        }
        let err = Config::parse("noise_add = 0.2,-1").unwrap_err();
        match err {
            Error::InvalidConfig { path, .. } => assert_eq!(path, "noise_add[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let err = Config::parse("difficulties = 1,7").unwrap_err();
        match err {
            Error::InvalidConfig { path, .. } => assert_eq!(path, "difficulties[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cell_episode_floor_is_enforced() {
        let err = Config::parse("train_envs = 3\nepisodes_per_cell = 2").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { .. }));
    }
}
