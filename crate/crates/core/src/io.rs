//! JSON files for games, policies, results and JSON-lines traces.
//!
//! A game file holds `players`, `states`, `actions`, `gamma` and the nested
//! arrays `utility[state][joint][player]` and `transition[state][joint][next]`.
//! Joint actions follow the library order, player 0 slowest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{DynamicGame, Policy, ValueFunction};
use crate::solver::{SolveResult, Status, TraceRecord};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub states: usize,
    pub actions: usize,
    pub gamma: f64,
    pub utility: Vec<Vec<Vec<f64>>>,
    pub transition: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFile {
    pub probs: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub status: Status,
    pub eps_achieved: f64,
    pub policy: PolicyFile,
    pub values: Vec<Vec<f64>>,
    pub inner_steps_total: usize,
    pub outer_steps_total: usize,
}

fn nest3(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    a.outer_iter().map(|m| m.outer_iter().map(|r| r.to_vec()).collect()).collect()
}

fn flat3(name: &str, v: &[Vec<Vec<f64>>]) -> Result<Array3<f64>> {
    let d0 = v.len();
    let d1 = v.first().map_or(0, |m| m.len());
    let d2 = v.first().and_then(|m| m.first()).map_or(0, |r| r.len());
    let mut data = Vec::with_capacity(d0 * d1 * d2);
    for (s, m) in v.iter().enumerate() {
        if m.len() != d1 {
            return Err(Error::Shape(format!("{name}[{s}] has {} rows, expected {d1}", m.len())));
        }
        for (j, r) in m.iter().enumerate() {
            if r.len() != d2 {
                return Err(Error::Shape(format!("{name}[{s}][{j}] has {} entries, expected {d2}", r.len())));
            }
            data.extend_from_slice(r);
        }
    }
    Ok(Array3::from_shape_vec((d0, d1, d2), data).expect("checked shape"))
}

impl GameFile {
    pub fn from_game(game: &DynamicGame) -> Self {
        Self {
            players: game.n_players(),
            states: game.n_states(),
            actions: game.n_actions(),
            gamma: game.gamma(),
            utility: nest3(game.utility()),
            transition: nest3(game.transition()),
        }
    }

    pub fn into_game(self) -> Result<DynamicGame> {
        let utility = flat3("utility", &self.utility)?;
        let transition = flat3("transition", &self.transition)?;
        DynamicGame::new(self.players, self.states, self.actions, self.gamma, utility, transition)
    }
}

pub fn game_from_json(text: &str) -> Result<DynamicGame> {
    serde_json::from_str::<GameFile>(text)?.into_game()
}

pub fn game_to_json(game: &DynamicGame) -> String {
    serde_json::to_string(&GameFile::from_game(game)).expect("game serializes")
}

pub fn load_game(path: impl AsRef<Path>) -> Result<DynamicGame> {
    let file: GameFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    file.into_game()
}

pub fn save_game(game: &DynamicGame, path: impl AsRef<Path>) -> Result<()> {
    write_json(&GameFile::from_game(game), path)
}

pub fn policy_file(policy: &Policy) -> PolicyFile {
    PolicyFile { probs: nest3(policy.probs()) }
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<Policy> {
    let file: PolicyFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Policy::from_probs(flat3("probs", &file.probs)?)
}

pub fn save_policy(policy: &Policy, path: impl AsRef<Path>) -> Result<()> {
    write_json(&policy_file(policy), path)
}

pub fn result_file(result: &SolveResult) -> ResultFile {
    ResultFile {
        status: result.status,
        eps_achieved: result.eps_achieved,
        policy: policy_file(&result.policy),
        values: result.value.values.outer_iter().map(|r| r.to_vec()).collect(),
        inner_steps_total: result.inner_steps_total,
        outer_steps_total: result.outer_steps_total,
    }
}

pub fn load_result(path: impl AsRef<Path>) -> Result<ResultFile> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

impl ResultFile {
    pub fn policy(&self) -> Result<Policy> {
        Policy::from_probs(flat3("probs", &self.policy.probs)?)
    }

    pub fn value(&self) -> Result<ValueFunction> {
        let rows = self.values.len();
        let cols = self.values.first().map_or(0, |r| r.len());
        let data: Vec<f64> = self.values.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(ValueFunction { values })
    }
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_trace(trace: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for rec in trace {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
