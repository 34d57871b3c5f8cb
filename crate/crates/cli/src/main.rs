use std::time::Instant;

use clap::{Parser, Subcommand};

use apartmentlab_cli::{cap_from_env, render, run, RunConfig, EXIT_INPUT};

#[derive(Parser)]
#[command(
    name = "apartmentlab",
    version,
    about = "Apartment enumeration, lemma suites, and canonical-form recovery \
             for conjugacy classes of self-adjoint operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List one orthogonal apartment as labeled partitions.
    Enumerate {
        /// Class spec JSON file.
        #[arg(long)]
        spec: String,
        /// Seed echoed in the report; enumeration itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decision tolerance override, within [1e-14, 1e-4].
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run one named verification suite against a class.
    Verify {
        /// Class spec JSON file.
        #[arg(long)]
        spec: String,
        /// One of: in, ad, orth, nonorth, same-im, ortho-pres, char-ad, alter.
        #[arg(long)]
        lemma: String,
        /// Seed for sampled draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampled checks per suite; defaults to exhaustive small-apartment
        /// coverage with suite-specific sample counts elsewhere.
        #[arg(long)]
        samples: Option<usize>,
        /// Decision tolerance override, within [1e-14, 1e-4].
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Recover the canonical form of a map given as a map file.
    Decompose {
        /// Map JSON file: literal matrix pairs or a generator stanza.
        #[arg(long)]
        map: String,
        /// Seed for the sampled commutativity audit.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Commutativity-audit sample count for oversized maps.
        #[arg(long)]
        samples: Option<usize>,
        /// Decision tolerance override, within [1e-14, 1e-4].
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Generate a seeded model map and write it as a literal map file.
    Model {
        /// Class spec JSON file.
        #[arg(long)]
        spec: String,
        /// Master seed for the generated unitary and basis.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Make the base change anti-unitary.
        #[arg(long)]
        antiunitary: bool,
        /// Slot symmetry rule: identity, constant:<perm>, or random:<seed>.
        #[arg(long, default_value = "identity")]
        delta: String,
        /// Number of consistency operators appended after the apartment.
        #[arg(long)]
        consistency: Option<usize>,
        /// Decision tolerance override, within [1e-14, 1e-4].
        #[arg(long)]
        tol: Option<f64>,
        /// Destination of the generated map file (the report goes to stdout).
        #[arg(long)]
        out: String,
    },
}

fn main() {
    let started = Instant::now();
    let cli = Cli::parse();
    let cap = match cap_from_env() {
        Ok(cap) => cap,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(EXIT_INPUT);
        }
    };

    let mut report_path = None;
    let cfg = match cli.command {
        Command::Enumerate {
            spec,
            seed,
            tol,
            out,
        } => {
            report_path = out;
            RunConfig {
                spec_path: Some(spec),
                seed,
                tol,
                cap,
                ..RunConfig::new("enumerate")
            }
        }
        Command::Verify {
            spec,
            lemma,
            seed,
            samples,
            tol,
            out,
        } => {
            report_path = out;
            RunConfig {
                spec_path: Some(spec),
                lemma: Some(lemma),
                seed,
                samples,
                tol,
                cap,
                ..RunConfig::new("verify")
            }
        }
        Command::Decompose {
            map,
            seed,
            samples,
            tol,
            out,
        } => {
            report_path = out;
            RunConfig {
                map_path: Some(map),
                seed,
                samples,
                tol,
                cap,
                ..RunConfig::new("decompose")
            }
        }
        Command::Model {
            spec,
            seed,
            antiunitary,
            delta,
            consistency,
            tol,
            out,
        } => RunConfig {
            spec_path: Some(spec),
            seed,
            antiunitary,
            delta_rule: Some(delta),
            consistency_ops: consistency,
            tol,
            out: Some(out),
            cap,
            ..RunConfig::new("model")
        },
    };

    let outcome = run(&cfg);
    let text = render(&outcome.report);
    match report_path {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("{path}: {e}");
                std::process::exit(EXIT_INPUT);
            }
        }
        None => print!("{text}"),
    }
    eprintln!("wall_ms={}", started.elapsed().as_millis());
    std::process::exit(outcome.exit_code);
}
