#![allow(dead_code)]

use std::path::PathBuf;

use morseplan::config::EngineConfig;
use morseplan::surface::build_surface;
use morseplan_service::archive::SurfaceArchive;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn small_config() -> EngineConfig {
    EngineConfig::from_json(&std::fs::read_to_string(data("small.json")).unwrap()).unwrap()
}

/// Small surface with volatile metadata pinned so the bytes are reproducible.
pub fn small_archive() -> SurfaceArchive {
    let cfg = small_config();
    let mut surface = build_surface(&cfg.spectral_solver().unwrap(), &cfg.grid().unwrap()).unwrap();
    surface.meta.created_unix = 0;
    surface.meta.build_seconds = 0.0;
    SurfaceArchive::new(&cfg, surface).unwrap()
}
