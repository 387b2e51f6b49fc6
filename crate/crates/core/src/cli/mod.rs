//! Command line front end. Every run reads one JSON configuration, writes
//! its artifacts into an output directory and finishes with `manifest.json`
//! listing each file with its SHA-256.

mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use commands::{
    AxisymConfig, BiharmonicConfig, DiagnoseConfig, EnergyConfig, LscConfig, MeshSource, MinimizeConfig,
    PrimitiveConfig, SlabConfig, VarifoldConfig,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// JSON Schema of `manifest.json`.
pub const MANIFEST_SCHEMA: &str = include_str!("manifest.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Primitive,
    Energy,
    Minimize,
    Varifold,
    Diagnose,
    Slab,
    LscGraph,
    Biharmonic,
    Axisym,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Primitive,
        Command::Energy,
        Command::Minimize,
        Command::Varifold,
        Command::Diagnose,
        Command::Slab,
        Command::LscGraph,
        Command::Biharmonic,
        Command::Axisym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Primitive => "primitive",
            Command::Energy => "energy",
            Command::Minimize => "minimize",
            Command::Varifold => "varifold",
            Command::Diagnose => "diagnose",
            Command::Slab => "slab",
            Command::LscGraph => "lsc-graph",
            Command::Biharmonic => "biharmonic",
            Command::Axisym => "axisym",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::invalid(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Parser)]
#[command(name = "helfrich", version, about = "Canham-Helfrich energy experiments")]
pub struct Args {
    pub command: Command,
    /// JSON configuration of the run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the configuration's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed; overrides the configuration's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Versions {
    pub helfrich: String,
    pub manifest: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: Command,
    pub status: String,
    pub exit_code: i32,
    pub error_kind: Option<String>,
    pub reason: Option<String>,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    pub config_echo: Value,
    pub versions: Versions,
}

/// Writes artifacts into the output directory and remembers their hashes.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Artifacts> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Write through a buffer filled by `fill`.
    pub fn write_with(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }
}

/// Result of one run: the manifest that was written and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub out_dir: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

struct Prepared {
    body: Value,
    echo: Value,
    seed: u64,
    out: Option<PathBuf>,
}

fn prepare(text: &str, seed: Option<u64>) -> Result<Prepared> {
    let echo: Value = serde_json::from_str(text)?;
    let Value::Object(mut map) = echo.clone() else {
        return Err(Error::Parse("configuration must be a JSON object".into()));
    };
    let cfg_seed = match map.remove("seed") {
        Some(v) => Some(serde_json::from_value::<u64>(v)?),
        None => None,
    };
    let out = match map.remove("out") {
        Some(v) => Some(PathBuf::from(serde_json::from_value::<String>(v)?)),
        None => None,
    };
    Ok(Prepared { body: Value::Object(map), echo, seed: seed.or(cfg_seed).unwrap_or(0), out })
}

fn execute(command: Command, body: Value, seed: u64, art: &mut Artifacts) -> Result<()> {
    fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
        serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
    }
    match command {
        Command::Primitive => commands::primitive(&parse(body)?, art),
        Command::Energy => commands::energy(&parse(body)?, art),
        Command::Minimize => commands::minimize(&parse(body)?, seed, art),
        Command::Varifold => commands::varifold(&parse(body)?, art),
        Command::Diagnose => commands::diagnose(&parse(body)?, art),
        Command::Slab => commands::slab(&parse(body)?, seed, art),
        Command::LscGraph => commands::lsc_graph(&parse(body)?, art),
        Command::Biharmonic => commands::biharmonic(&parse(body)?, art),
        Command::Axisym => commands::axisym(&parse(body)?, art),
    }
}

/// Run `command` on configuration text. Artifacts and the manifest go to
/// `out`, else the configuration's `out`, else `helfrich-out`. Errors
/// are reported through the manifest; only a failure to write the output
/// directory itself is returned.
pub fn run(command: Command, config_text: &str, out: Option<&Path>, seed: Option<u64>) -> Result<Outcome> {
    let prepared = prepare(config_text, seed);
    let (echo, run_seed, cfg_out) = match &prepared {
        Ok(p) => (p.echo.clone(), p.seed, p.out.clone()),
        Err(_) => (Value::Null, seed.unwrap_or(0), None),
    };
    let out_dir = out.map(Path::to_path_buf).or(cfg_out).unwrap_or_else(|| PathBuf::from("helfrich-out"));
    let mut art = Artifacts::new(&out_dir)?;
    let result = prepared.and_then(|p| execute(command, p.body, p.seed, &mut art));
    let (status, exit_code, error_kind, reason) = match &result {
        Ok(()) => ("ok", 0, None, None),
        Err(e) => ("error", e.exit_code(), Some(e.kind().to_string()), Some(e.reason())),
    };
    let manifest = Manifest {
        command,
        status: status.to_string(),
        exit_code,
        error_kind,
        reason,
        seed: run_seed,
        files: art.files().to_vec(),
        config_echo: echo,
        versions: Versions { helfrich: env!("CARGO_PKG_VERSION").to_string(), manifest: MANIFEST_VERSION },
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out_dir.join(MANIFEST_FILE), text)?;
    Ok(Outcome { manifest, out_dir })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return 1;
        }
    };
    match run(args.command, &text, args.out.as_deref(), args.seed) {
        Ok(o) => {
            if let Some(r) = &o.manifest.reason {
                eprintln!("error: {r}");
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("error: {}", e.reason());
            e.exit_code()
        }
    }
}
