//! TOML configuration for the `simulate` subcommand and for custom figure
//! sweeps.
//!
//! Both formats reject unknown keys so a typo fails loudly instead of
//! silently falling back to a default.

use std::path::{Path, PathBuf};

use ffmimo::{Error, McScheme, Result};
use serde::Deserialize;

/// Monte Carlo run description.
///
/// ```toml
/// scheme = "md"           # plurality | md | zf | sc-genie
/// trials = 100000
/// seed = 7                # optional, defaults to 0
///
/// [channel]
/// file = "chan.txt"       # a channel file, finite or real
/// ```
///
/// Instead of a file the channel may be drawn fresh each trial:
///
/// ```toml
/// [channel.random]
/// p = 2
/// n_r = 4
/// n_t = 2
/// eps = [0.1]             # broadcast, or one value per antenna
/// require_full_rank = true
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub scheme: String,
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub channel: ChannelSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub random: Option<RandomChannelSpec>,
}

/// Per-trial random channel: uniform matrix entries with symmetric noise.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomChannelSpec {
    pub p: u64,
    pub n_r: usize,
    pub n_t: usize,
    /// One or `n_r` error probabilities, or a uniform draw range.
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub eps_range: Option<[f64; 2]>,
    #[serde(default = "default_true")]
    pub require_full_rank: bool,
}

fn default_true() -> bool {
    true
}

/// A custom analytic sweep in the style of the built-in presets: a single
/// transmit stream observed by `n_r` unit-gain antennas with symmetric
/// noise, swept over antenna counts and error probabilities.
///
/// ```toml
/// name = "my-sweep"
/// p = 2
/// n_r = [1, 3, 5, 7]
/// eps = [0.05, 0.1, 0.15]
/// schemes = ["anse", "rep", "capacity", "lincomb"]
/// seed = 3                # optional; only labels the output rows
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomFigureConfig {
    #[serde(default = "default_custom_name")]
    pub name: String,
    pub p: u64,
    pub n_r: Vec<usize>,
    pub eps: Vec<f64>,
    pub schemes: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_custom_name() -> String {
    "custom".into()
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map(|s| 1 + text[..s.start.min(text.len())].matches('\n').count())
            .unwrap_or(1);
        Error::Parse {
            line,
            msg: format!("{}: {}", path.display(), e.message()),
        }
    })
}

pub fn read_simulate_config(path: &Path) -> Result<SimulateConfig> {
    let cfg: SimulateConfig = read_toml(path)?;
    let file_given = cfg.channel.file.is_some();
    let random_given = cfg.channel.random.is_some();
    if file_given == random_given {
        return Err(Error::Unsupported(
            "the [channel] table needs exactly one of `file` or `random`".into(),
        ));
    }
    if let Some(r) = &cfg.channel.random {
        if r.eps.is_empty() == r.eps_range.is_none() {
            return Err(Error::Unsupported(
                "[channel.random] needs exactly one of `eps` or `eps_range`".into(),
            ));
        }
    }
    Ok(cfg)
}

pub fn read_custom_figure_config(path: &Path) -> Result<CustomFigureConfig> {
    let cfg: CustomFigureConfig = read_toml(path)?;
    if cfg.n_r.is_empty() || cfg.eps.is_empty() || cfg.schemes.is_empty() {
        return Err(Error::Unsupported(
            "a custom figure needs nonempty `n_r`, `eps`, and `schemes` lists".into(),
        ));
    }
    Ok(cfg)
}

/// Parses the Monte Carlo scheme names accepted in configs.
pub fn parse_mc_scheme(name: &str) -> Result<McScheme> {
    match name {
        "plurality" => Ok(McScheme::Plurality),
        "md" => Ok(McScheme::MinDistance),
        "zf" => Ok(McScheme::ZeroForcing),
        "sc-genie" => Ok(McScheme::ScGenie),
        other => Err(Error::Unsupported(format!(
            "unknown simulation scheme `{other}` (expected plurality, md, zf, or sc-genie)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(name: &str, text: &str) -> PathBuf {
        let path = std::env::temp_dir().join(format!("ffmimo-cli-config-{name}.toml"));
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn simulate_config_round_trips() {
        let path = write_temp(
            "sim-ok",
            "scheme = \"md\"\ntrials = 500\nseed = 9\n[channel]\nfile = \"chan.txt\"\n",
        );
        let cfg = read_simulate_config(&path).unwrap();
        assert_eq!(cfg.scheme, "md");
        assert_eq!(cfg.trials, 500);
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.channel.file.as_deref(), Some(Path::new("chan.txt")));
    }

    #[test]
    fn simulate_config_rejects_ambiguous_channels() {
        let neither = write_temp("sim-neither", "scheme = \"zf\"\ntrials = 10\n[channel]\n");
        assert!(read_simulate_config(&neither).is_err());
        let both = write_temp(
            "sim-both",
            concat!(
                "scheme = \"zf\"\ntrials = 10\n[channel]\nfile = \"c.txt\"\n",
                "[channel.random]\np = 2\nn_r = 2\nn_t = 2\neps = [0.1]\n",
            ),
        );
        assert!(read_simulate_config(&both).is_err());
    }

    #[test]
    fn random_channel_needs_one_eps_form() {
        let none = write_temp(
            "sim-noeps",
            "scheme = \"md\"\ntrials = 10\n[channel.random]\np = 2\nn_r = 2\nn_t = 1\n",
        );
        assert!(read_simulate_config(&none).is_err());
        let both = write_temp(
            "sim-botheps",
            concat!(
                "scheme = \"md\"\ntrials = 10\n[channel.random]\n",
                "p = 2\nn_r = 2\nn_t = 1\neps = [0.1]\neps_range = [0.05, 0.15]\n",
            ),
        );
        assert!(read_simulate_config(&both).is_err());
        let range = write_temp(
            "sim-range",
            concat!(
                "scheme = \"md\"\ntrials = 10\n[channel.random]\n",
                "p = 2\nn_r = 2\nn_t = 1\neps_range = [0.05, 0.15]\n",
            ),
        );
        let cfg = read_simulate_config(&range).unwrap();
        assert_eq!(cfg.channel.random.unwrap().eps_range, Some([0.05, 0.15]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let path = write_temp(
            "sim-typo",
            "scheme = \"md\"\ntrails = 10\n[channel]\nfile = \"c.txt\"\n",
        );
        let err = read_simulate_config(&path).unwrap_err();
        assert!(err.to_string().contains("trails"), "{err}");
    }

    #[test]
    fn custom_figure_config_parses() {
        let path = write_temp(
            "fig-ok",
            concat!(
                "name = \"sweep\"\np = 3\nn_r = [1, 3]\neps = [0.1, 0.2]\n",
                "schemes = [\"anse\", \"rep\"]\n",
            ),
        );
        let cfg = read_custom_figure_config(&path).unwrap();
        assert_eq!(cfg.name, "sweep");
        assert_eq!(cfg.n_r, vec![1, 3]);
        assert_eq!(cfg.schemes, vec!["anse", "rep"]);
        assert_eq!(cfg.seed, None);
    }

    #[test]
    fn custom_figure_rejects_empty_lists() {
        let path = write_temp(
            "fig-empty",
            "p = 2\nn_r = []\neps = [0.1]\nschemes = [\"rep\"]\n",
        );
        assert!(read_custom_figure_config(&path).is_err());
    }

    #[test]
    fn mc_scheme_names_parse() {
        assert!(matches!(
            parse_mc_scheme("plurality"),
            Ok(McScheme::Plurality)
        ));
        assert!(matches!(parse_mc_scheme("md"), Ok(McScheme::MinDistance)));
        assert!(matches!(parse_mc_scheme("zf"), Ok(McScheme::ZeroForcing)));
        assert!(matches!(parse_mc_scheme("sc-genie"), Ok(McScheme::ScGenie)));
        assert!(parse_mc_scheme("viterbi").is_err());
    }
}
