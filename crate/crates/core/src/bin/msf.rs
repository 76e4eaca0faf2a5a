use clap::{Parser, Subcommand};
use msf_core::harness::{self, exit_code, Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Electron in a uniform magnetic field threaded by a thin solenoid.
#[derive(Parser)]
#[command(name = "msf", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Energy levels of both sectors and the split of each Landau level
    Spectrum(Args),
    /// A classical cyclotron orbit with its invariants
    Classical(Args),
    /// Means and coefficient lattice of one coherent state
    Coherent(Args),
    /// Time evolution of the means and a density snapshot
    Evolve(Args),
    /// Run the acceptance checks and write report.json
    Verify(Args),
    /// Means over a grid of |z1|, |z2|, mu and sector
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lattice tail tolerance
    #[arg(long)]
    tol: Option<f64>,
}

fn load(a: &Args) -> msf_core::Result<RunConfig> {
    let cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = cfg.apply(&Overrides {
        out: a.out.clone(),
        seed: a.seed,
        tol: a.tol,
    });
    cfg.validate()?;
    Ok(cfg)
}

type Scenario = fn(&RunConfig) -> msf_core::Result<Vec<PathBuf>>;

fn run(cmd: &Cmd) -> msf_core::Result<i32> {
    let (args, f): (&Args, Scenario) = match cmd {
        Cmd::Spectrum(a) => (a, harness::run_spectrum),
        Cmd::Classical(a) => (a, harness::run_classical),
        Cmd::Coherent(a) => (a, harness::run_coherent),
        Cmd::Evolve(a) => (a, harness::run_evolve),
        Cmd::Sweep(a) => (a, harness::run_sweep),
        Cmd::Verify(a) => {
            let cfg = load(a)?;
            let (report, path) = harness::run_verify(&cfg)?;
            for c in report.criteria.iter().chain(&report.invariants) {
                println!("{}", c.line());
            }
            println!("wrote {}", path.display());
            return Ok(if report.passed { 0 } else { 1 });
        }
    };
    let cfg = load(args)?;
    for p in f(&cfg)? {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn status(cli: &Cli) -> u8 {
    match run(&cli.cmd) {
        Ok(code) => code as u8,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e) as u8
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(status(&Cli::parse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use msf_core::harness::output::read_csv;
    use std::path::Path;

    fn msf(args: &[&str]) -> u8 {
        let cli = Cli::try_parse_from(std::iter::once("msf").chain(args.iter().copied())).unwrap();
        status(&cli)
    }

    fn config(dir: &Path, body: &str) -> String {
        let p = dir.join("run.toml");
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    }

    #[test]
    fn runs_are_byte_identical() {
        let d = tempfile::tempdir().unwrap();
        let cfg = config(
            d.path(),
            "seed = 7\n[flux]\nl0 = 1\nmu = 0.3\n[evolve]\nsamples = 8\ngrid_r = 6\ngrid_phi = 8\n\n\
             [sweep]\nabs_z1 = [1.0, 2.0]\nabs_z2 = [1.5]\nmu = [0.3]\n",
        );
        for cmd in ["spectrum", "classical", "coherent", "evolve", "sweep"] {
            let a = d.path().join(format!("{cmd}-a"));
            let b = d.path().join(format!("{cmd}-b"));
            assert_eq!(
                msf(&[cmd, "--config", &cfg, "--out", a.to_str().unwrap()]),
                0,
                "{cmd}"
            );
            assert_eq!(
                msf(&[cmd, "--config", &cfg, "--out", b.to_str().unwrap()]),
                0,
                "{cmd}"
            );
            let mut names: Vec<_> = std::fs::read_dir(&a)
                .unwrap()
                .map(|e| e.unwrap().file_name())
                .collect();
            names.sort();
            assert!(!names.is_empty());
            for n in names {
                let x = std::fs::read(a.join(&n)).unwrap();
                let y = std::fs::read(b.join(&n)).unwrap();
                assert_eq!(x, y, "{cmd}/{n:?}");
                if n.to_string_lossy().ends_with(".csv") {
                    assert!(String::from_utf8(x).unwrap().starts_with("# config_hash="));
                }
            }
        }
    }

    #[test]
    fn bad_flux_is_a_config_error() {
        let d = tempfile::tempdir().unwrap();
        let cfg = config(d.path(), "[flux]\nl0 = 0\nmu = 1.2\n");
        let out = d.path().join("out");
        assert_eq!(
            msf(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]),
            2
        );
        let cfg = config(d.path(), "[flux]\nflux = 0.5\n");
        assert_eq!(msf(&["spectrum", "--config", &cfg]), 2);
        assert_eq!(msf(&["coherent", "--config", "/nonexistent/run.toml"]), 2);
    }

    #[test]
    fn empty_l_range_writes_header_only() {
        let d = tempfile::tempdir().unwrap();
        let cfg = config(d.path(), "[spectrum]\nl_min = 3\nl_max = 2\n");
        let out = d.path().join("out");
        assert_eq!(
            msf(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]),
            0
        );
        let (header, rows) = read_csv(&out.join("levels.csv")).unwrap();
        assert_eq!(header, ["j", "m", "l", "mu", "energy_hw", "lz_hbar"]);
        assert!(rows.is_empty());
    }

    #[test]
    fn numerical_failure_exit_code() {
        let d = tempfile::tempdir().unwrap();
        // j = 0 with z2 = 0 is the zero vector
        let cfg = config(
            d.path(),
            "[coherent]\nj = 0\nz1 = [1.0, 0.0]\nz2 = [0.0, 0.0]\n",
        );
        let out = d.path().join("out");
        assert_eq!(
            msf(&["coherent", "--config", &cfg, "--out", out.to_str().unwrap()]),
            3
        );
    }
}
