//! Effective configuration: flag, then config file, then built-in default.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use sthawkes::config::{parse_config, ConfigFile};
use sthawkes::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Resolves settings and records every resolved value for the manifest.
pub struct Settings {
    file: ConfigFile,
    effective: ConfigFile,
}

impl Settings {
    pub fn load(subcommand: &str, path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                parse_config(&text)?
            }
            None => ConfigFile::default(),
        };
        let mut effective = ConfigFile::default();
        effective.set("subcommand", subcommand)?;
        effective.set("version", env!("CARGO_PKG_VERSION"))?;
        Ok(Settings { file, effective })
    }

    pub fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.file.get_parsed(key)?.unwrap_or(default),
        };
        self.effective.set(key, &value)?;
        Ok(value)
    }

    /// Like [`Settings::resolve`] for settings without a default.
    pub fn resolve_optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self.file.get_parsed(key)?,
        };
        if let Some(v) = &value {
            self.effective.set(key, v)?;
        }
        Ok(value)
    }

    /// A boolean switch: `true` if the flag is given, else the file value,
    /// else `default`.
    pub fn resolve_switch(&mut self, key: &str, flag: bool, default: bool) -> Result<bool> {
        self.resolve(key, flag.then_some(true), default)
    }

    /// Records a value that is not read from the config file.
    pub fn record(&mut self, key: &str, value: impl Display) -> Result<()> {
        self.effective.set(key, value)
    }

    /// Warns about config-file keys no setting consumed, then writes the
    /// manifest into `dir`.
    pub fn write_manifest(&self, dir: &Path) -> Result<()> {
        let known: Vec<&str> = self.effective.keys().collect();
        for key in self.file.unknown_keys(&known) {
            log::warn!("config key `{key}` is not used by this subcommand");
        }
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.effective.to_string()).map_err(|e| Error::io(path, e))
    }
}
