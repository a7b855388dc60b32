use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Dispersion,
    Signs,
    Oracle,
    Rfs,
    Markov,
    Ad2,
    Qt,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Dispersion => "dispersion",
            Experiment::Signs => "signs",
            Experiment::Oracle => "oracle",
            Experiment::Rfs => "rfs",
            Experiment::Markov => "markov",
            Experiment::Ad2 => "ad2",
            Experiment::Qt => "qt",
        }
    }
}

/// Experiment parameters. Unset fields take per-experiment defaults in
/// [`Params::resolved`]; records always store the resolved values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl Params {
    /// Fields set in `other` win.
    pub fn overridden_by(&self, other: &Params) -> Params {
        Params {
            n: other.n.or(self.n),
            t: other.t.or(self.t),
            l: other.l.or(self.l),
            delta: other.delta.or(self.delta),
            beta: other.beta.or(self.beta),
            samples: other.samples.or(self.samples),
            trials: other.trials.or(self.trials),
            group: other.group.clone().or_else(|| self.group.clone()),
            c: other.c.or(self.c),
            unitary: other.unitary.clone().or_else(|| self.unitary.clone()),
            mode: other.mode.clone().or_else(|| self.mode.clone()),
        }
    }

    /// Fills the defaults of `experiment` and validates ranges.
    pub fn resolved(&self, experiment: Experiment) -> CliResult<Params> {
        let mut p = self.clone();
        let cubic = |c: Option<f64>, n: usize| (c.unwrap_or(4.0) * (n * n * n) as f64).round() as usize;
        match experiment {
            Experiment::Dispersion => {
                if p.group.is_some() {
                    p.samples.get_or_insert(2000);
                } else {
                    p.unitary.get_or_insert_with(|| "hadamard".into());
                    p.n.get_or_insert(8);
                    p.beta.get_or_insert(1.0);
                    if p.unitary.as_deref() == Some("random") {
                        p.c.get_or_insert(4.0);
                        let n = p.n.unwrap();
                        let t = cubic(p.c, n);
                        p.t.get_or_insert(t);
                    }
                }
            }
            Experiment::Signs => {
                p.samples.get_or_insert(10_000);
                p.n.get_or_insert(16);
            }
            Experiment::Oracle => {
                p.unitary.get_or_insert_with(|| "hadamard".into());
                p.n.get_or_insert(4);
                p.trials.get_or_insert(1000);
                if p.unitary.as_deref() == Some("random") {
                    p.c.get_or_insert(4.0);
                    let n = p.n.unwrap();
                    let t = cubic(p.c, n);
                    p.t.get_or_insert(t);
                }
            }
            Experiment::Rfs => {
                p.mode.get_or_insert_with(|| "find".into());
                p.unitary.get_or_insert_with(|| "hadamard".into());
                p.l.get_or_insert(2);
                p.delta.get_or_insert(0.2);
                match p.mode.as_deref().unwrap() {
                    "find" | "classical" => {
                        p.n.get_or_insert(4);
                    }
                    "referee" => {
                        p.n.get_or_insert(4);
                        p.trials.get_or_insert(500);
                        p.t.get_or_insert(8);
                    }
                    "coherent" => {
                        p.n.get_or_insert(2);
                        p.trials.get_or_insert(100);
                        p.beta.get_or_insert(0.2);
                    }
                    "table" => {}
                    other => return Err(CliError::Config(format!("unknown rfs mode '{other}'"))),
                }
            }
            Experiment::Markov => {
                p.mode.get_or_insert_with(|| "gap".into());
                match p.mode.as_deref().unwrap() {
                    "gap" => {
                        p.n.get_or_insert(16);
                    }
                    "table" => {}
                    "stationary" => {
                        p.n.get_or_insert(3);
                        p.t.get_or_insert(150);
                        p.samples.get_or_insert(100_000);
                    }
                    "lumped" => {
                        p.n.get_or_insert(3);
                        p.t.get_or_insert(20);
                        p.samples.get_or_insert(100_000);
                    }
                    "moments" => {
                        p.n.get_or_insert(2);
                        p.t.get_or_insert(5);
                        p.samples.get_or_insert(2000);
                    }
                    other => return Err(CliError::Config(format!("unknown markov mode '{other}'"))),
                }
            }
            Experiment::Ad2 => {
                p.samples.get_or_insert(20_000);
            }
            Experiment::Qt => {
                p.n.get_or_insert(6);
                p.c.get_or_insert(4.0);
                p.samples.get_or_insert(200);
                p.beta.get_or_insert(0.25);
                let n = p.n.unwrap();
                let t = cubic(p.c, n);
                p.t.get_or_insert(t);
            }
        }
        if let Some(d) = p.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(CliError::Config(format!("--delta must lie in (0, 1], got {d}")));
            }
        }
        if let Some(b) = p.beta {
            if !(b.is_finite() && b > 0.0) {
                return Err(CliError::Config(format!("--beta must be positive, got {b}")));
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// 0 lets the pool pick.
    pub threads: usize,
}

/// Contents of a `--config` file; every field is optional and overrides the
/// corresponding flag.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub params: Params,
    pub master_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&self, base: ExperimentConfig) -> CliResult<ExperimentConfig> {
        if let Some(e) = self.experiment {
            if e != base.experiment {
                return Err(CliError::Config(format!(
                    "config file is for '{}' but the subcommand is '{}'",
                    e.name(),
                    base.experiment.name()
                )));
            }
        }
        Ok(ExperimentConfig {
            experiment: base.experiment,
            params: base.params.overridden_by(&self.params),
            master_seed: self.master_seed.unwrap_or(base.master_seed),
            out: self.out.clone().or(base.out),
            csv: self.csv.clone().or(base.csv),
            threads: self.threads.unwrap_or(base.threads),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_experiment() {
        let q = Params::default().resolved(Experiment::Qt).unwrap();
        assert_eq!((q.n, q.t, q.samples), (Some(6), Some(864), Some(200)));
        let m = Params::default().resolved(Experiment::Markov).unwrap();
        assert_eq!((m.mode.as_deref(), m.n), (Some("gap"), Some(16)));
        let r = Params { mode: Some("nope".into()), ..Default::default() };
        assert!(r.resolved(Experiment::Rfs).is_err());
        let d = Params { delta: Some(0.0), ..Default::default() };
        assert!(d.resolved(Experiment::Rfs).is_err());
    }

    #[test]
    fn file_overrides_flags() {
        let base = ExperimentConfig {
            experiment: Experiment::Qt,
            params: Params { n: Some(4), samples: Some(10), ..Default::default() },
            master_seed: 1,
            out: None,
            csv: None,
            threads: 2,
        };
        let file: ConfigFile = serde_json::from_str(r#"{"params": {"n": 5, "C": 2.0}, "master_seed": 9}"#).unwrap();
        let merged = file.apply(base.clone()).unwrap();
        assert_eq!(merged.params.n, Some(5));
        assert_eq!(merged.params.samples, Some(10));
        assert_eq!(merged.params.c, Some(2.0));
        assert_eq!((merged.master_seed, merged.threads), (9, 2));
        let wrong: ConfigFile = serde_json::from_str(r#"{"experiment": "ad2"}"#).unwrap();
        assert!(wrong.apply(base).is_err());
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }
}
