use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::elliptic::NeumannClosure;
use crate::error::{Error, Result};
use crate::reconstruction::SystemForm;

/// Wave speed and potential on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientSpec {
    /// `c ≡ 1`, `q = 1/(x+2)`.
    EuclidQ,
    /// `c = cos((x+1)/2)`, `q = 1/(x+2)`.
    Conformal,
    /// `c ≡ 1`, `q ≡ π`.
    EigenSweep,
    /// Tabulated `(x, c, q)`, linearly interpolated and held constant outside the table.
    Table { x: Vec<f64>, c: Vec<f64>, q: Vec<f64> },
}

impl CoefficientSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "euclid-q" => Ok(Self::EuclidQ),
            "conformal" => Ok(Self::Conformal),
            "eigen-sweep" => Ok(Self::EigenSweep),
            other => match other.strip_prefix("table:") {
                Some(path) => Self::read_table(Path::new(path.trim())),
                None => Err(Error::Config(format!("unknown coefficients '{other}'"))),
            },
        }
    }

    /// Reads a CSV with header `x,c,q` and strictly increasing `x`.
    pub fn read_table(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let (mut x, mut c, mut q) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("{}: expected 3 columns", path.display())));
            }
            let v = |i: usize| -> Result<f64> {
                rec[i].trim().parse().map_err(|_| Error::Parse(format!("bad number '{}'", &rec[i])))
            };
            x.push(v(0)?);
            c.push(v(1)?);
            q.push(v(2)?);
        }
        if x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!("{}: need at least two increasing x values", path.display())));
        }
        Ok(Self::Table { x, c, q })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::EuclidQ => "euclid-q",
            Self::Conformal => "conformal",
            Self::EigenSweep => "eigen-sweep",
            Self::Table { .. } => "table",
        }
    }

    pub fn speed(&self, x: f64) -> f64 {
        match self {
            Self::EuclidQ | Self::EigenSweep => 1.0,
            Self::Conformal => ((x + 1.0) / 2.0).cos(),
            Self::Table { x: xs, c, .. } => interpolate(xs, c, x),
        }
    }

    pub fn potential(&self, x: f64) -> f64 {
        match self {
            Self::EuclidQ | Self::Conformal => 1.0 / (x + 2.0),
            Self::EigenSweep => std::f64::consts::PI,
            Self::Table { x: xs, q, .. } => interpolate(xs, q, x),
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[xs.len() - 1];
    }
    let s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + s * (ys[k] - ys[k - 1])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Profile {
    #[default]
    Full,
    /// `n_x = 101`; acceptance tolerances are tripled.
    Ci,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Self::Full),
            "ci" => Ok(Self::Ci),
            other => Err(Error::Config(format!("unknown profile '{other}'"))),
        }
    }

    pub fn default_n_x(self) -> usize {
        match self {
            Self::Full => 401,
            Self::Ci => 101,
        }
    }
}

/// Named experiment setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Exp1,
    Exp2,
    Exp3,
    /// Both frequency sweeps.
    Exp4,
    Exp4Real,
    Exp4Imag,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "exp1" => Ok(Self::Exp1),
            "exp2" => Ok(Self::Exp2),
            "exp3" => Ok(Self::Exp3),
            "exp4" => Ok(Self::Exp4),
            "exp4-real" => Ok(Self::Exp4Real),
            "exp4-imag" => Ok(Self::Exp4Imag),
            other => Err(Error::Config(format!("unknown preset '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
            Self::Exp4Real => "exp4-real",
            Self::Exp4Imag => "exp4-imag",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `k·0.1` for `k = -79..=79`, built from integers so the values are exact decimals.
pub fn sweep_values() -> Vec<f64> {
    (-79..=79).map(|k| k as f64 / 10.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Label written to the `preset` column.
    pub name: String,
    pub coefficients: CoefficientSpec,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub horizon: f64,
    pub lambdas: Vec<Complex64>,
    pub alphas: Vec<f64>,
    pub noise: Vec<f64>,
    pub seed: Option<u64>,
    /// Independent noise draws per level, seeded `seed, seed+1, …`.
    pub replicates: usize,
    /// Neumann data used for the control and snapshot files.
    pub flux: [f64; 2],
    pub out_dir: Option<PathBuf>,
    pub snapshot: bool,
    pub profile: Profile,
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
    pub form: SystemForm,
    /// Closure of the ground-truth elliptic solver.
    pub closure: NeumannClosure,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            coefficients: CoefficientSpec::EuclidQ,
            x_min: -1.0,
            x_max: 1.0,
            n_x: 401,
            horizon: 4.0,
            lambdas: vec![Complex64::new(0.0, 0.0)],
            alphas: vec![1e-4],
            noise: vec![0.0],
            seed: None,
            replicates: 1,
            flux: [1.0, 2.0],
            out_dir: None,
            snapshot: false,
            profile: Profile::Full,
            workers: 1,
            cache_dir: None,
            form: SystemForm::default(),
            closure: NeumannClosure::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, profile: Profile) -> Self {
        let mut c = Self { name: preset.name().into(), profile, n_x: profile.default_n_x(), ..Self::default() };
        let real = || sweep_values().into_iter().map(|v| Complex64::new(v, 0.0));
        let imag = || sweep_values().into_iter().filter(|&v| v != 0.0).map(|v| Complex64::new(0.0, v));
        match preset {
            Preset::Exp1 | Preset::Exp3 => {
                if preset == Preset::Exp3 {
                    c.coefficients = CoefficientSpec::Conformal;
                }
                c.noise = vec![0.0, 0.01, 0.02, 0.05];
                c.seed = Some(7);
                c.snapshot = true;
            }
            Preset::Exp2 => {
                c.alphas = (1..=10).map(|k| 10f64.powi(-k)).collect();
            }
            Preset::Exp4 | Preset::Exp4Real | Preset::Exp4Imag => {
                c.coefficients = CoefficientSpec::EigenSweep;
                c.alphas = vec![1e-6];
                c.snapshot = true;
                c.lambdas = match preset {
                    Preset::Exp4Real => real().collect(),
                    Preset::Exp4Imag => imag().collect(),
                    _ => real().chain(imag()).collect(),
                };
            }
        }
        c
    }

    /// Sets one `key = value` entry. List values are comma separated; each
    /// frequency in `lambda` is `re` or `re,im`, with frequencies separated by `;`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "preset" => {
                let keep = (self.profile, self.out_dir.clone(), self.cache_dir.clone(), self.workers);
                *self = Self::preset(Preset::parse(value)?, keep.0);
                (self.out_dir, self.cache_dir, self.workers) = (keep.1, keep.2, keep.3);
            }
            "name" => self.name = value.into(),
            "coefficients" => self.coefficients = CoefficientSpec::parse(value)?,
            "nx" | "n_x" => self.n_x = parse_num(key, value)?,
            "t_final" | "horizon" => self.horizon = parse_num(key, value)?,
            "x_min" => self.x_min = parse_num(key, value)?,
            "x_max" => self.x_max = parse_num(key, value)?,
            "lambda" => {
                self.lambdas = value
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_lambda)
                    .collect::<Result<_>>()?
            }
            "alpha" => self.alphas = parse_list(key, value)?,
            "noise" => self.noise = parse_list(key, value)?,
            "seed" if value.eq_ignore_ascii_case("none") => self.seed = None,
            "seed" => self.seed = Some(parse_num(key, value)?),
            "replicates" => self.replicates = parse_num(key, value)?,
            "flux" => {
                let f: Vec<f64> = parse_list(key, value)?;
                if f.len() != 2 {
                    return Err(Error::Config("flux needs two values".into()));
                }
                self.flux = [f[0], f[1]];
            }
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "snapshot" => self.snapshot = parse_bool(key, value)?,
            "profile" => {
                let p = Profile::parse(value)?;
                if self.n_x == self.profile.default_n_x() {
                    self.n_x = p.default_n_x();
                }
                self.profile = p;
            }
            "workers" => self.workers = parse_num(key, value)?,
            "cache" => self.cache_dir = Some(PathBuf::from(value)),
            "form" => {
                self.form = match value {
                    "printed" => SystemForm::Printed,
                    "weighted" => SystemForm::Weighted,
                    _ => return Err(Error::Config(format!("unknown form '{value}'"))),
                }
            }
            "closure" => {
                self.closure = match value {
                    "one-sided" => NeumannClosure::OneSided,
                    "ghost" => NeumannClosure::GhostNode,
                    _ => return Err(Error::Config(format!("unknown closure '{value}'"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a config file: `key = value` lines, `#` comments and
    /// `[section]` headers, which only group keys.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::NoWork("empty lambda list".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::NoWork("empty alpha list".into()));
        }
        if self.noise.is_empty() {
            return Err(Error::NoWork("empty noise list".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {a}")));
        }
        if let Some(l) = self.noise.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!("noise level must be nonnegative, got {l}")));
        }
        if self.seed.is_none() {
            if let Some(&l) = self.noise.iter().find(|l| **l > 0.0) {
                return Err(Error::MissingSeed(l));
            }
        }
        if self.lambdas.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(Error::Config("lambda must be finite".into()));
        }
        if self.workers == 0 || self.replicates == 0 {
            return Err(Error::Config("workers and replicates must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

/// `RE` or `RE,IM`.
pub fn parse_lambda(s: &str) -> Result<Complex64> {
    let parts: Vec<f64> = parse_list("lambda", s)?;
    match parts.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Error::Config(format!("lambda: expected RE or RE,IM, got '{s}'"))),
    }
}
