use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use semival::{generate_facility_game, FacilityLayout, GameSpec, UtilityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    UniformInt,
    ManhattanMap,
}

/// Where the game comes from: a file, or a generated facility game.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
pub struct GameArgs {
    /// JSON game file, or a CSV utility matrix (one row per facility).
    #[arg(long)]
    pub game: Option<PathBuf>,

    /// Generated game: number of facilities.
    #[arg(long)]
    pub facilities: Option<usize>,

    /// Generated game: number of customers.
    #[arg(long)]
    pub customers: Option<usize>,

    #[arg(long, value_enum)]
    pub layout: Option<LayoutKind>,

    /// Lower utility bound for `uniform-int` (default 0).
    #[arg(long)]
    pub low: Option<u32>,

    /// Upper utility bound for `uniform-int` (default 20).
    #[arg(long)]
    pub high: Option<u32>,

    /// Grid side for `manhattan-map` (default 50).
    #[arg(long)]
    pub map_size: Option<u32>,
}

impl GameArgs {
    pub fn layout(&self) -> FacilityLayout {
        match self.layout.unwrap_or(LayoutKind::UniformInt) {
            LayoutKind::UniformInt => FacilityLayout::UniformInt {
                low: self.low.unwrap_or(0),
                high: self.high.unwrap_or(20),
            },
            LayoutKind::ManhattanMap => FacilityLayout::ManhattanMap {
                size: self.map_size.unwrap_or(50),
            },
        }
    }

    /// Loads or generates the game, returning it with a config echo.
    pub fn build(&self, seed: u64, default_facilities: usize) -> anyhow::Result<(GameSpec, Value)> {
        if let Some(path) = &self.game {
            let generator_flags = self.facilities.is_some()
                || self.customers.is_some()
                || self.layout.is_some()
                || self.low.is_some()
                || self.high.is_some()
                || self.map_size.is_some();
            if generator_flags {
                bail!("`game` cannot be combined with generator parameters");
            }
            let game = load_game(path)?;
            return Ok((game, json!({ "game": path })));
        }
        let facilities = self.facilities.unwrap_or(default_facilities);
        let customers = self.customers.unwrap_or(10);
        let layout = self.layout();
        let m = generate_facility_game(facilities, customers, layout, seed)
            .context("cannot generate facility game")?;
        let game = GameSpec::facility(m).context("cannot build facility game")?;
        let echo = json!({
            "generator": { "facilities": facilities, "customers": customers, "layout": layout }
        });
        Ok((game, echo))
    }
}

pub fn load_game(path: &PathBuf) -> anyhow::Result<GameSpec> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let game = if is_csv {
        let m = UtilityMatrix::load_csv(path).with_context(|| format!("cannot load utility matrix {}", path.display()))?;
        GameSpec::facility(m)?
    } else {
        GameSpec::load(path).with_context(|| format!("cannot load game file {}", path.display()))?
    };
    Ok(game)
}
