//! Command-line arguments, which double as the TOML experiment schema:
//!
//! ```toml
//! [global]
//! seed = 7
//!
//! [command.converge]
//! system = "ap:3"
//! alpha = "2/5"
//! primes = "5,11,41"
//! ```
//!
//! Every table rejects unknown keys; omitted keys take the flag defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "formavg", version, about = "Averages over systems of linear forms on Z_N and on filtered tori")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    /// Print the equivalent TOML experiment instead of running it.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalOpts {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, env = "FORMAVG_THREADS")]
    pub threads: Option<usize>,
    /// Cap on brute-force evaluations.
    #[arg(long, global = true, default_value_t = formavg_core::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Write the payload here, plus a `.meta.json` record beside it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Default for GlobalOpts {
    fn default() -> Self {
        Self { seed: 0, threads: None, budget: formavg_core::DEFAULT_BUDGET, out: None, format: Format::Csv }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A full experiment: global options plus one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub global: GlobalOpts,
    pub command: Command,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Hermite normal form basis of the Leibman group of a system.
    Leibman(LeibmanArgs),
    /// Least s with the (s+1)-th powers of the forms independent.
    Complexity(ComplexityArgs),
    /// Brute-force average over Z_N^D.
    SolDiscrete(SolDiscreteArgs),
    /// Average over the Leibman subtorus, exactly and by Monte Carlo.
    SolTorus(SolTorusArgs),
    /// 2^d-th power of the U^d norm on Z_N.
    Gowers(GowersArgs),
    /// Least k from which the φ_k pullback of a character vanishes.
    MinK(MinKArgs),
    /// Character-level balance of φ_k maps and polynomial orbits.
    #[command(subcommand)]
    Balance(BalanceMode),
    /// Least solution density of subsets of Z_p with density ≥ α.
    MDiscrete(MDiscreteArgs),
    /// Annealed upper bound for the torus problem.
    MTorus(MTorusArgs),
    /// Discrete rows for several primes plus a torus row.
    Converge(ConvergeArgs),
    /// Pass/fail table of the classical counterexamples.
    Counterexamples(CounterexampleArgs),
    /// Run an experiment described by a TOML file.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeibmanArgs {
    /// `ap:k`, `cube:d`, `trivial`, `schur` or `@file`.
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub degree: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = formavg_core::linsys::DEFAULT_S_MAX)]
    #[serde(default = "s_max")]
    pub s_max: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolDiscreteArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long = "N", alias = "n")]
    #[serde(rename = "N")]
    pub n: usize,
    /// `quadphase`, `sumfree`, `const:a`, `indicator:i,j,…` or `@file`.
    #[arg(long)]
    pub f: String,
    /// Conjugation signs such as `+,-,-,+` or `alt:2`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusMethod {
    Exact,
    Mc,
    Both,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolTorusArgs {
    #[arg(long)]
    pub system: String,
    /// Filtration degrees per coordinate, e.g. `1,2`.
    #[arg(long)]
    pub spec: String,
    /// `raised-cosine:j`, `const:a`, or `@file` with one `n_1 … n_m re im` term per line.
    #[arg(long)]
    pub f: String,
    #[arg(long, value_enum, default_value_t = TorusMethod::Both)]
    #[serde(default = "both")]
    pub method: TorusMethod,
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "mc_samples")]
    pub samples: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GowersArgs {
    #[arg(long = "N", alias = "n")]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub f: String,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinKArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub system: String,
    /// Frequency matrix row-major, `t × d` entries: `-3,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub chi: String,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "two")]
    pub domain_degree: u32,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "two")]
    pub target_degree: u32,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceMode {
    /// Classify every bounded character against φ_k.
    PhiK(PhiKArgs),
    /// Largest character sum of a p-periodic polynomial orbit.
    Orbit(OrbitArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiKArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub freq: u32,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "two")]
    pub domain_degree: u32,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "two")]
    pub target_degree: u32,
    /// Haar samples for the image membership check.
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "image_samples")]
    pub image_samples: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub spec: String,
    /// `;`-separated coordinate polynomials in `n`.
    #[arg(long)]
    pub coeffs: String,
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub freq: u32,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscreteMethod {
    /// Exhaustive when within budget, local search otherwise.
    Auto,
    Exhaustive,
    Search,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 8)]
    #[serde(default = "restarts")]
    pub restarts: u32,
    #[arg(long, default_value_t = 200)]
    #[serde(default = "steps")]
    pub steps: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealArgs {
    /// Cells per axis.
    #[arg(long, default_value_t = 16)]
    #[serde(default = "q")]
    pub q: usize,
    #[arg(long, default_value_t = 20_000)]
    #[serde(default = "anneal_samples")]
    pub samples: u64,
    #[arg(long, default_value_t = 40)]
    #[serde(default = "temperatures")]
    pub temperatures: u32,
    #[arg(long, default_value_t = 200)]
    #[serde(default = "proposals")]
    pub proposals: u32,
    #[arg(long, default_value_t = 0.2)]
    #[serde(default = "sigma")]
    pub sigma: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MDiscreteArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub p: usize,
    /// Decimal or fraction, e.g. `2/5`.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, value_enum, default_value_t = DiscreteMethod::Auto)]
    #[serde(default = "auto")]
    pub method: DiscreteMethod,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// Also minimize over functions with values in {0, 1/q, …, 1}.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractional_q: Option<u32>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MTorusArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub alpha: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub anneal: AnnealArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub primes: String,
    #[arg(long, default_value = "1")]
    #[serde(default = "spec_one")]
    pub spec: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub anneal: AnnealArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleArgs {
    /// Prime for the quadratic phase pair.
    #[arg(long, default_value_t = 13)]
    #[serde(default = "thirteen")]
    pub p: u64,
    #[arg(long, default_value = "7,101")]
    #[serde(default = "sumfree_primes")]
    pub sumfree_primes: String,
}

#[derive(Args, Clone, Debug, PartialEq, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn one() -> u32 {
    1
}
fn two() -> u32 {
    2
}
fn s_max() -> u32 {
    formavg_core::linsys::DEFAULT_S_MAX
}
fn both() -> TorusMethod {
    TorusMethod::Both
}
fn mc_samples() -> u64 {
    100_000
}
fn image_samples() -> u64 {
    10_000
}
fn auto() -> DiscreteMethod {
    DiscreteMethod::Auto
}
fn restarts() -> u32 {
    8
}
fn steps() -> u32 {
    200
}
fn q() -> usize {
    16
}
fn anneal_samples() -> u64 {
    20_000
}
fn temperatures() -> u32 {
    40
}
fn proposals() -> u32 {
    200
}
fn sigma() -> f64 {
    0.2
}
fn spec_one() -> String {
    "1".into()
}
fn thirteen() -> u64 {
    13
}
fn sumfree_primes() -> String {
    "7,101".into()
}
