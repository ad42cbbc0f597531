//! Experiment configuration: command-line flags, optionally seeded from a
//! flat `key=value` file, validated before any computation.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use std::fs;
use std::path::PathBuf;

use treespec_core::{AlphaPolicy, Potential, SpectralWindow, TreeGeometry};

/// Depths above this are rejected without `--force`.
pub const DEPTH_GUARD: usize = 12;

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Tree depth D (vertices: 2^(D+1) - 1).
    #[arg(long)]
    pub depth: Option<usize>,

    /// Potential: none | power:c,beta | log:c | alternating:c,beta | rootdefect
    #[arg(long)]
    pub potential: Option<String>,

    /// Spectral window endpoints a b.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,

    /// Smoothing width of the window transition bands (default: 0.1 (b - a)).
    #[arg(long)]
    pub smoothing: Option<f64>,

    /// Positivity constant policy: sharp | margin:theta
    #[arg(long)]
    pub alpha: Option<String>,

    /// Output directory for JSON/CSV artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Seed for any randomized check vectors (recorded in the output).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Allow depths above the guard.
    #[arg(long)]
    pub force: bool,

    /// Also dump the operator matrices (L, N, iA).
    #[arg(long)]
    pub dump_operators: bool,

    /// Dump format for --dump-operators: triplet | csv | both
    #[arg(long, default_value = "triplet")]
    pub dump_format: String,

    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    Power { c: f64, beta: f64 },
    Log { c: f64 },
    Alternating { c: f64, beta: f64 },
    RootDefect,
}

impl PotentialSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim();
        if lower.eq_ignore_ascii_case("none") {
            return Ok(PotentialSpec::None);
        }
        if lower.eq_ignore_ascii_case("rootdefect") {
            return Ok(PotentialSpec::RootDefect);
        }
        let (name, params) = lower
            .split_once(':')
            .ok_or_else(|| anyhow!("potential '{s}' is not one of none | power:c,beta | log:c | alternating:c,beta | rootdefect"))?;
        let numbers: Vec<f64> = params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .with_context(|| format!("potential parameter '{p}' is not a number"))
            })
            .collect::<Result<_>>()?;
        match (name, numbers.as_slice()) {
            ("power", [c, beta]) => Ok(PotentialSpec::Power { c: *c, beta: *beta }),
            ("log", [c]) => Ok(PotentialSpec::Log { c: *c }),
            ("alternating", [c, beta]) => Ok(PotentialSpec::Alternating { c: *c, beta: *beta }),
            _ => bail!("potential '{s}' has the wrong name or parameter count"),
        }
    }

    pub fn build(&self, g: &TreeGeometry) -> Potential {
        match *self {
            PotentialSpec::None => Potential::zero(g),
            PotentialSpec::Power { c, beta } => Potential::power_radial(g, c, beta),
            PotentialSpec::Log { c } => Potential::log_radial(g, c),
            PotentialSpec::Alternating { c, beta } => Potential::alternating(g, c, beta),
            PotentialSpec::RootDefect => Potential::root_defect(g),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub depth: usize,
    pub potential: PotentialSpec,
    pub window_a: f64,
    pub window_b: f64,
    pub smoothing: f64,
    pub alpha: AlphaPolicy,
    pub out: PathBuf,
    pub seed: u64,
    pub dump_operators: bool,
    pub dump_triplet: bool,
    pub dump_csv: bool,
}

impl RunConfig {
    /// Merges defaults, the optional config file, and explicit flags
    /// (strongest last), then validates.
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let mut depth = 6usize;
        let mut potential = "none".to_string();
        let mut window = (-1.5f64, 1.5f64);
        let mut smoothing: Option<f64> = None;
        let mut alpha = "sharp".to_string();
        let mut out = PathBuf::from("out");
        let mut seed = 0u64;
        let mut force = false;
        let mut dump_operators = false;
        let mut dump_format = args.dump_format.clone();

        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow!("config line {} is not key=value", lineno + 1))?;
                let value = value.trim();
                match key.trim() {
                    "depth" => depth = value.parse().context("config depth")?,
                    "potential" => potential = value.to_string(),
                    "window" => {
                        let parts: Vec<f64> = value
                            .split([',', ' '])
                            .filter(|p| !p.is_empty())
                            .map(|p| p.parse::<f64>().context("config window"))
                            .collect::<Result<_>>()?;
                        if parts.len() != 2 {
                            bail!("config window needs two numbers");
                        }
                        window = (parts[0], parts[1]);
                    }
                    "smoothing" => smoothing = Some(value.parse().context("config smoothing")?),
                    "alpha" => alpha = value.to_string(),
                    "out" => out = PathBuf::from(value),
                    "seed" => seed = value.parse().context("config seed")?,
                    "force" => force = value.parse().context("config force")?,
                    "dump_operators" => {
                        dump_operators = value.parse().context("config dump_operators")?
                    }
                    "dump_format" => dump_format = value.to_string(),
                    other => bail!("unknown config key '{other}'"),
                }
            }
        }

        if let Some(d) = args.depth {
            depth = d;
        }
        if let Some(p) = &args.potential {
            potential = p.clone();
        }
        if let Some(w) = &args.window {
            window = (w[0], w[1]);
        }
        if let Some(s) = args.smoothing {
            smoothing = Some(s);
        }
        if let Some(a) = &args.alpha {
            alpha = a.clone();
        }
        if let Some(o) = &args.out {
            out = o.clone();
        }
        if let Some(s) = args.seed {
            seed = s;
        }
        force |= args.force;
        dump_operators |= args.dump_operators;

        if depth > DEPTH_GUARD && !force {
            bail!(
                "depth {depth} exceeds the guard of {DEPTH_GUARD} (2^(D+1)-1 vertices); pass --force to run anyway"
            );
        }
        let potential = PotentialSpec::parse(&potential)?;
        let (window_a, window_b) = window;
        // negated comparison so NaN endpoints fail validation
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(window_b > window_a) {
            bail!("window must satisfy a < b (got {window_a}, {window_b})");
        }
        let smoothing = smoothing.unwrap_or(0.1 * (window_b - window_a));
        // surfaces delta > 0 and b - a > 2 delta violations now
        SpectralWindow::new(window_a, window_b, smoothing)
            .map_err(|e| anyhow!("invalid window: {e}"))?;
        let alpha = parse_alpha(&alpha)?;
        let (dump_triplet, dump_csv) = match dump_format.as_str() {
            "triplet" => (true, false),
            "csv" => (false, true),
            "both" => (true, true),
            other => bail!("dump format '{other}' is not triplet | csv | both"),
        };

        Ok(RunConfig {
            depth,
            potential,
            window_a,
            window_b,
            smoothing,
            alpha,
            out,
            seed,
            dump_operators,
            dump_triplet,
            dump_csv,
        })
    }

    pub fn window(&self) -> SpectralWindow {
        SpectralWindow::new(self.window_a, self.window_b, self.smoothing)
            .expect("validated at resolve time")
    }

    pub fn geometry(&self) -> TreeGeometry {
        TreeGeometry::new(self.depth)
    }
}

fn parse_alpha(s: &str) -> Result<AlphaPolicy> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("sharp") {
        return Ok(AlphaPolicy::Sharp);
    }
    if let Some(theta) = s.strip_prefix("margin:") {
        let theta: f64 = theta
            .parse()
            .with_context(|| format!("margin parameter '{theta}' is not a number"))?;
        if !(0.0..=1.0).contains(&theta) || theta == 0.0 {
            bail!("margin theta must lie in (0, 1], got {theta}");
        }
        return Ok(AlphaPolicy::Margin(theta));
    }
    bail!("alpha policy '{s}' is not sharp | margin:theta")
}
