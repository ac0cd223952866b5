use std::fs;
use std::path::{Path, PathBuf};

use qpm_core::photon_stats::{norm_sqr, OverlapSpec};
use qpm_core::{DecisionRule, GroupSpec, C64};

use crate::args::{Cli, Command, Format, InterferometerArgs, StateArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qpm_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    StateFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl CliError {
    /// Every error is a usage or configuration problem; verification
    /// failures are reported through the command status instead.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Stats,
    Verify,
    Decompose,
    Sample,
    Swapsim,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InterferometerChoice {
    Size(usize),
    Group(GroupSpec),
}

impl InterferometerChoice {
    fn from_args(a: &InterferometerArgs) -> Result<Self, CliError> {
        match (a.size, &a.group) {
            (Some(m), None) => Ok(Self::Size(m)),
            (None, Some(g)) => Ok(Self::Group(g.clone())),
            _ => Err(CliError::Usage(
                "exactly one of --size or --group is required".into(),
            )),
        }
    }

    /// `--size M` selects the Hadamard group when `M` is a power of two
    /// and the cyclic group of order `M` otherwise.
    pub fn group(&self) -> Result<GroupSpec, CliError> {
        match self {
            Self::Size(0) => Err(CliError::Usage("--size must be positive".into())),
            Self::Size(m) if m.is_power_of_two() && *m > 1 => {
                Ok(GroupSpec::hadamard(m.trailing_zeros() as usize))
            }
            Self::Size(m) => Ok(GroupSpec::cyclic(*m)?),
            Self::Group(g) => Ok(g.clone()),
        }
    }

    pub fn rule(&self) -> Result<DecisionRule, CliError> {
        Ok(DecisionRule::new(self.group()?)?)
    }

    pub fn label(&self) -> Result<String, CliError> {
        let g = self.group()?;
        Ok(match g.hadamard_rank() {
            Some(n) if n > 0 => format!("hadamard H_{n} {g}"),
            _ if g.factors().len() == 1 => format!("qft F_{} {g}", g.order()),
            _ => format!("group {g}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OverlapSource {
    Value(f64),
    Files { phi: PathBuf, psi: PathBuf },
}

impl OverlapSource {
    fn from_args(a: &StateArgs) -> Result<Self, CliError> {
        match (a.overlap, &a.phi, &a.psi) {
            (Some(c), None, None) => Ok(Self::Value(c)),
            (None, Some(phi), Some(psi)) => Ok(Self::Files {
                phi: phi.clone(),
                psi: psi.clone(),
            }),
            _ => Err(CliError::Usage(
                "give exactly one of --overlap C or the pair --phi FILE --psi FILE".into(),
            )),
        }
    }

    pub fn resolve(&self) -> Result<OverlapSpec, CliError> {
        match self {
            Self::Value(c) => Ok(OverlapSpec::new(*c)?),
            Self::Files { phi, psi } => {
                let (phi, psi) = load_state_pair(phi, psi)?;
                Ok(OverlapSpec::from_states(&phi, &psi)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub interferometer: InterferometerChoice,
    pub overlap: Option<OverlapSource>,
    pub states: Option<(PathBuf, PathBuf)>,
    pub shots: usize,
    pub seed: Option<u64>,
    pub format: Format,
    pub tol: Option<f64>,
    pub perturb: bool,
    pub dim: usize,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let base = |command, interferometer, format| RunConfig {
            command,
            interferometer,
            overlap: None,
            states: None,
            shots: 0,
            seed: None,
            format,
            tol: None,
            perturb: false,
            dim: 2,
        };
        let config = match &cli.command {
            Command::Stats(a) => RunConfig {
                overlap: Some(OverlapSource::from_args(&a.states)?),
                ..base(
                    CommandKind::Stats,
                    InterferometerChoice::from_args(&a.interferometer)?,
                    a.format,
                )
            },
            Command::Verify(a) => RunConfig {
                tol: a.tol,
                perturb: a.perturb,
                ..base(
                    CommandKind::Verify,
                    InterferometerChoice::from_args(&a.interferometer)?,
                    a.format,
                )
            },
            Command::Decompose(a) => base(
                CommandKind::Decompose,
                InterferometerChoice::Size(a.size),
                a.format,
            ),
            Command::Sample(a) => RunConfig {
                overlap: Some(OverlapSource::from_args(&a.states)?),
                shots: a.shots,
                seed: a.seed,
                ..base(
                    CommandKind::Sample,
                    InterferometerChoice::from_args(&a.interferometer)?,
                    a.format,
                )
            },
            Command::Swapsim(a) => RunConfig {
                states: a.phi.clone().zip(a.psi.clone()),
                seed: a.seed,
                tol: a.tol,
                dim: a.dim,
                ..base(
                    CommandKind::Swapsim,
                    InterferometerChoice::Size(a.size),
                    a.format,
                )
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        if let Some(OverlapSource::Value(c)) = self.overlap {
            OverlapSpec::new(c)?;
        }
        if matches!(self.command, CommandKind::Stats | CommandKind::Sample)
            && self.overlap.is_none()
        {
            return Err(CliError::Usage(
                "an overlap or a pair of state files is required".into(),
            ));
        }
        if self.command == CommandKind::Sample {
            if self.shots == 0 {
                return Err(CliError::Usage("--shots must be at least 1".into()));
            }
            if self.seed.is_none() {
                return Err(CliError::Usage("--seed is required when sampling".into()));
            }
        }
        if self.dim < 2 {
            return Err(CliError::Usage(format!(
                "--dim must be at least 2, got {}",
                self.dim
            )));
        }
        self.interferometer.group()?;
        Ok(())
    }
}

/// Reads a state file: one amplitude per line as `re im`. Blank lines and
/// lines starting with `#` are skipped. The squared norm must be 1 within
/// `1e-9`.
pub fn load_state(path: &Path) -> Result<Vec<C64>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, message: String| CliError::StateFile {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut amplitudes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [re, im] = parts[..] else {
            return Err(bad(i + 1, format!("expected \"re im\", got {line:?}")));
        };
        let parse = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(i + 1, format!("not a finite number: {t:?}")))
        };
        amplitudes.push(C64::new(parse(re)?, parse(im)?));
    }
    if amplitudes.is_empty() {
        return Err(bad(0, "no amplitudes".into()));
    }
    let n = norm_sqr(&amplitudes);
    if (n - 1.0).abs() > 1e-9 {
        return Err(bad(0, format!("squared norm {n} is not 1 within 1e-9")));
    }
    Ok(amplitudes)
}

pub fn load_state_pair(phi: &Path, psi: &Path) -> Result<(Vec<C64>, Vec<C64>), CliError> {
    let (a, b) = (load_state(phi)?, load_state(psi)?);
    if a.len() != b.len() {
        return Err(CliError::Usage(format!(
            "phi has dimension {}, psi has dimension {}",
            a.len(),
            b.len()
        )));
    }
    Ok((a, b))
}
