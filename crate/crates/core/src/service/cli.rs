//! `gbc-chroma` command line: `render`, `synth` and `serve`.

use std::ffi::OsString;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::SessionConfig;
use crate::data::{default_clusters, generate_synthetic, load_table, save_table, DataError};
use crate::pipeline::Pipeline;
use crate::render::KernelConfig;
use crate::warp::WarpKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gbc-chroma", version, about = "Map multivariate spatial samples to color")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the pseudo-colored map, legend, per-attribute maps and layout.
    Render(RenderArgs),
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    None,
    Preserve,
    Contrast,
    Compress,
}

impl From<ModeArg> for WarpKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => WarpKind::None,
            ModeArg::Preserve => WarpKind::ColorPreserving,
            ModeArg::Contrast => WarpKind::ContrastEnhancement,
            ModeArg::Compress => WarpKind::ComparisonCompression,
        }
    }
}

/// `WIDTHxHEIGHT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridArg(pub usize, pub usize);

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad grid size `{v}`: {e}"));
        Ok(GridArg(parse(w)?, parse(h)?))
    }
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = crate::warp::DEFAULT_SCALE_K)]
    pub ellipse_scale: f64,
    #[arg(long, default_value_t = crate::colorspace::DEFAULT_LIGHTNESS)]
    pub lightness: f64,
    /// Darken samples by their total weight.
    #[arg(long)]
    pub intensity: bool,
    #[arg(long, default_value = "512x512")]
    pub grid: GridArg,
    #[arg(long, default_value_t = 8)]
    pub k_neighbors: usize,
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth_scale: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Render on a single thread.
    #[arg(long)]
    pub seeded: bool,
}

impl RenderArgs {
    pub fn config(&self) -> SessionConfig {
        SessionConfig {
            warp_mode: self.mode.into(),
            ellipse_scale_k: self.ellipse_scale,
            lightness: self.lightness,
            intensity_on: self.intensity,
            grid: (self.grid.0, self.grid.1),
            kernel: KernelConfig { k_neighbors: self.k_neighbors, bandwidth_scale: self.bandwidth_scale, ..Default::default() },
            ..SessionConfig::default()
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory with the UI bundle, served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Render(a) => render(&a),
        Command::Synth(a) => synth(&a),
        Command::Serve(a) => serve(&a),
    }
}

pub fn render(args: &RenderArgs) -> i32 {
    let cfg = args.config();
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_INVALID_INPUT;
    }
    let table = match load_table(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.input.display());
            return EXIT_INVALID_INPUT;
        }
    };
    let pipeline = Pipeline::new(table);
    let run = || pipeline.write_outputs(&cfg, &args.out);
    let result = if args.seeded {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_IO;
            }
        }
    } else {
        run()
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", args.out.join(f).display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID_INPUT
            }
        }
    }
}

pub fn synth(args: &SynthArgs) -> i32 {
    let clusters = default_clusters(args.m, args.n, args.seed);
    let table = match generate_synthetic(args.m, args.n, &clusters, args.seed) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_INPUT;
        }
    };
    match save_table(&table, &args.out) {
        Ok(()) => EXIT_OK,
        Err(DataError::Io(e)) => {
            eprintln!("error: {}: {e}", args.out.display());
            EXIT_IO
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_INPUT
        }
    }
}

/// `GBC_CHROMA_PORT`, when set to a valid port, wins over `--port`.
pub fn effective_port(flag: u16) -> u16 {
    std::env::var(super::http::PORT_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(flag)
}

pub fn serve(args: &ServeArgs) -> i32 {
    let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, effective_port(args.port)));
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    match rt.block_on(super::http::serve(addr, args.static_dir.clone())) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arg_parses() {
        assert_eq!("64x32".parse::<GridArg>().unwrap(), GridArg(64, 32));
        assert!("64".parse::<GridArg>().is_err());
        assert!("ax3".parse::<GridArg>().is_err());
    }

    #[test]
    fn render_flags_map_to_config() {
        let cli = Cli::try_parse_from([
            "gbc-chroma", "render", "--input", "a.csv", "--mode", "compress", "--ellipse-scale", "3",
            "--intensity", "--grid", "40x30", "--k-neighbors", "4", "--bandwidth-scale", "0.5",
        ])
        .unwrap();
        let Command::Render(a) = cli.command else { panic!("expected render") };
        let cfg = a.config();
        assert_eq!(cfg.warp_mode, WarpKind::ComparisonCompression);
        assert_eq!(cfg.ellipse_scale_k, 3.0);
        assert!(cfg.intensity_on);
        assert_eq!(cfg.grid, (40, 30));
        assert_eq!(cfg.kernel.k_neighbors, 4);
        assert_eq!(cfg.kernel.bandwidth_scale, 0.5);
        assert_eq!(cfg.lightness, 0.65);
    }

    #[test]
    fn missing_input_is_invalid() {
        assert_eq!(run(["gbc-chroma", "render", "--input", "/definitely/missing.csv"]), EXIT_INVALID_INPUT);
        assert_eq!(run(["gbc-chroma", "render"]), EXIT_INVALID_INPUT);
    }
}
