//! Versioned JSON documents for games, instances, outcomes and reduction
//! artifacts. Outcome and artifact files carry the fingerprint of the game
//! they belong to.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::game::{Agent, AgentId, AgentKind, Game, Outcome, Room};
use crate::geometry::Point3;
use crate::reduction::ReductionArtifacts;
use crate::x3c::X3CInstance;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

fn check_version(found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Format {
            path: "format_version".into(),
            message: format!("expected {FORMAT_VERSION}, found {found}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: AgentId,
    pub label: String,
    pub kind: AgentKind,
    pub pos: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub format_version: u32,
    pub room_size: usize,
    pub epsilon: f64,
    pub agents: Vec<AgentRecord>,
}

impl From<&Game> for GameFile {
    fn from(g: &Game) -> Self {
        GameFile {
            format_version: FORMAT_VERSION,
            room_size: g.room_size(),
            epsilon: g.epsilon(),
            agents: g
                .agents()
                .iter()
                .map(|a| AgentRecord {
                    id: a.id,
                    label: a.label.clone(),
                    kind: a.kind,
                    pos: [a.position.x, a.position.y, a.position.z],
                })
                .collect(),
        }
    }
}

impl TryFrom<GameFile> for Game {
    type Error = Error;

    fn try_from(f: GameFile) -> Result<Self> {
        check_version(f.format_version)?;
        let agents = f
            .agents
            .into_iter()
            .map(|r| Agent {
                id: r.id,
                label: r.label,
                kind: r.kind,
                position: Point3::new(r.pos[0], r.pos[1], r.pos[2]),
            })
            .collect();
        Game::new(agents, f.room_size, f.epsilon)
    }
}

/// Hex SHA-256 of the game's canonical (compact) `GameFile` bytes.
pub fn fingerprint(g: &Game) -> String {
    let bytes = serde_json::to_vec(&GameFile::from(g)).expect("games serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct X3CFile {
    pub format_version: u32,
    pub universe_size: usize,
    pub sets: Vec<[usize; 3]>,
}

impl From<&X3CInstance> for X3CFile {
    fn from(inst: &X3CInstance) -> Self {
        X3CFile {
            format_version: FORMAT_VERSION,
            universe_size: inst.m,
            sets: inst.sets.clone(),
        }
    }
}

impl TryFrom<X3CFile> for X3CInstance {
    type Error = Error;

    fn try_from(f: X3CFile) -> Result<Self> {
        check_version(f.format_version)?;
        X3CInstance::new(f.universe_size, f.sets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeFile {
    pub format_version: u32,
    pub game_fingerprint: String,
    pub rooms: Vec<Vec<AgentId>>,
}

impl OutcomeFile {
    pub fn new(game: &Game, o: &Outcome) -> Self {
        OutcomeFile {
            format_version: FORMAT_VERSION,
            game_fingerprint: fingerprint(game),
            rooms: o.rooms().iter().map(|r| r.members().to_vec()).collect(),
        }
    }

    /// The outcome, provided the file was written for `game`.
    pub fn into_outcome(self, game: &Game) -> Result<Outcome> {
        check_version(self.format_version)?;
        check_fingerprint(&self.game_fingerprint, game)?;
        Ok(Outcome::new(self.rooms.into_iter().map(Room::new).collect()))
    }
}

fn check_fingerprint(found: &str, game: &Game) -> Result<()> {
    let want = fingerprint(game);
    if found != want {
        return Err(Error::Format {
            path: "game_fingerprint".into(),
            message: format!("file belongs to game {found}, not {want}"),
        });
    }
    Ok(())
}

/// Artifacts together with the game they describe, so later commands need
/// only this one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactsFile {
    pub format_version: u32,
    pub game_fingerprint: String,
    pub game: GameFile,
    pub artifacts: ReductionArtifacts,
}

impl ArtifactsFile {
    pub fn new(game: &Game, artifacts: &ReductionArtifacts) -> Self {
        ArtifactsFile {
            format_version: FORMAT_VERSION,
            game_fingerprint: fingerprint(game),
            game: GameFile::from(game),
            artifacts: artifacts.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(Game, ReductionArtifacts)> {
        check_version(self.format_version)?;
        let game = Game::try_from(self.game)?;
        check_fingerprint(&self.game_fingerprint, &game)?;
        Ok((game, self.artifacts))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str, path: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        path: path.to_string(),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_json(&text, &path.display().to_string())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_game(path: &Path) -> Result<Game> {
    let f: GameFile = read_json(path)?;
    Game::try_from(f).map_err(|e| in_file(path, e))
}

pub fn load_instance(path: &Path) -> Result<X3CInstance> {
    let f: X3CFile = read_json(path)?;
    X3CInstance::try_from(f).map_err(|e| in_file(path, e))
}

pub fn load_outcome(path: &Path, game: &Game) -> Result<Outcome> {
    let f: OutcomeFile = read_json(path)?;
    f.into_outcome(game).map_err(|e| in_file(path, e))
}

pub fn load_artifacts(path: &Path) -> Result<(Game, ReductionArtifacts)> {
    let f: ArtifactsFile = read_json(path)?;
    f.into_parts().map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: Error) -> Error {
    let p = path.display();
    match e {
        Error::Format { path: field, message } => Error::Format {
            path: format!("{p}: {field}"),
            message,
        },
        other => Error::Format {
            path: p.to_string(),
            message: other.to_string(),
        },
    }
}
