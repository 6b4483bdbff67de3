//! Subcommand implementations. Diagnostics go to stderr; data goes to
//! stdout or to `--out` files, written atomically.

pub mod bench;
pub mod registry;
pub mod runs;
pub mod scoring;

use clawharness_core::harness::Setting;

use crate::config::{usage, CliError, GlobalConfig};

/// Accepts the short setting forms plus the serialized names used in
/// record files.
pub fn parse_setting(raw: &str) -> Result<Setting, CliError> {
    match raw {
        "with" | "with_skills" => Ok(Setting::WithSkills),
        "no" | "no_skills" => Ok(Setting::NoSkills),
        other => Err(usage(format!("unknown setting {other:?}, expected \"with\" or \"no\""))),
    }
}

pub fn parse_settings_list(raw: &str) -> Result<Vec<Setting>, CliError> {
    match raw {
        "both" => Ok(vec![Setting::WithSkills, Setting::NoSkills]),
        other => Ok(vec![parse_setting(other)?]),
    }
}

/// Progress note on stderr, shown at or above the given verbosity.
pub fn note(config: &GlobalConfig, level: u8, message: impl AsRef<str>) {
    if config.verbosity >= level {
        eprintln!("{}", message.as_ref());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setting_forms_parse() {
        assert_eq!(parse_setting("with").unwrap(), Setting::WithSkills);
        assert_eq!(parse_setting("with_skills").unwrap(), Setting::WithSkills);
        assert_eq!(parse_setting("no").unwrap(), Setting::NoSkills);
        assert_eq!(parse_setting("no_skills").unwrap(), Setting::NoSkills);
        assert_eq!(parse_setting("none").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn settings_list_expands_both() {
        assert_eq!(
            parse_settings_list("both").unwrap(),
            vec![Setting::WithSkills, Setting::NoSkills]
        );
        assert_eq!(parse_settings_list("no").unwrap(), vec![Setting::NoSkills]);
    }
}
