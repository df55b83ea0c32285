use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;

use ag_sdmm::analysis::{self, ParamRange};
use ag_sdmm::io::{read_matrix_file, write_matrix_file};
use ag_sdmm::linalg::DEFAULT_SUBMATRIX_CAP;
use ag_sdmm::protocol::{empirical_secrecy_audit, run_protocol, AuditConfig};
use ag_sdmm::scheme::{
    build_scheme, candidate_encoder, derive_parameters, select_field, SchemeDescriptor,
    SchemeInstance, SchemeParams, Side,
};
use ag_sdmm::{Error, Result};

#[derive(Parser)]
#[command(
    name = "agsdmm",
    version,
    about = "Secure distributed matrix multiplication from AG codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pole-number structure for (m, n, X) as JSON.
    Params {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Build a scheme and write its descriptor.
    Build {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiply two matrices through the simulated worker pool.
    Multiply {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Exhaustive secrecy audit with 1x1 blocks plus the MDS check of the
    /// masking codes.
    Audit {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        q: u64,
    },
    /// Degree table of two exponent sequences.
    DegreeTable {
        #[arg(long, value_delimiter = ',')]
        a: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<u64>,
    },
    /// Worker counts and rates of AG, A3S and GASP_big over a parameter grid.
    Compare {
        #[arg(long, default_value = "2:50")]
        m_range: ParamRange,
        #[arg(long, default_value = "1:50")]
        n_range: ParamRange,
        #[arg(long, default_value = "1:50")]
        x_range: ParamRange,
        #[arg(long)]
        out: PathBuf,
        /// Also write a gnuplot data file.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ParamsReport<'a> {
    m: u64,
    n: u64,
    #[serde(rename = "X")]
    x: u64,
    transposed: bool,
    q: u64,
    d: u64,
    g: u64,
    #[serde(rename = "deg_G")]
    deg_g: u64,
    #[serde(rename = "N")]
    workers: usize,
    bound: u64,
    phi: &'a [u64],
    gamma: &'a [u64],
    recovery_poles: &'a [u64],
    table: &'a [Vec<u64>],
}

fn params_cmd(m: u64, n: u64, x: u64, q: Option<u64>) -> Result<()> {
    let params = SchemeParams {
        m,
        n,
        x,
        q,
        seed: 0,
    };
    let poles = derive_parameters(&params)?;
    let q = match q {
        Some(_) => build_scheme(&params)?.field().order(),
        None => select_field(poles.d, poles.deg_g as usize + 1)?.order(),
    };
    let out = ParamsReport {
        m,
        n,
        x,
        transposed: poles.transposed,
        q,
        d: poles.d,
        g: poles.g,
        deg_g: poles.deg_g,
        workers: poles.workers(),
        bound: poles.worker_bound(),
        phi: &poles.phi,
        gamma: &poles.gamma,
        recovery_poles: &poles.recovery_poles,
        table: &poles.table,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn build_cmd(params: SchemeParams, out: PathBuf) -> Result<()> {
    let inst = build_scheme(&params)?;
    let desc = inst.descriptor();
    let mut w = BufWriter::new(File::create(&out)?);
    serde_json::to_writer_pretty(&mut w, &desc)?;
    writeln!(w)?;
    w.flush()?;
    eprintln!(
        "built scheme over F_{} with N = {} workers (d = {}, genus {}), wrote {}",
        desc.q,
        desc.workers,
        desc.d,
        desc.genus,
        out.display()
    );
    Ok(())
}

fn multiply_cmd(
    scheme: PathBuf,
    a: PathBuf,
    b: PathBuf,
    out: PathBuf,
    transcript: Option<PathBuf>,
) -> Result<()> {
    let desc: SchemeDescriptor = serde_json::from_reader(BufReader::new(File::open(scheme)?))?;
    let inst = SchemeInstance::from_descriptor(&desc)?;
    let (a, b) = (read_matrix_file(a)?, read_matrix_file(b)?);
    for (name, m) in [("A", &a), ("B", &b)] {
        if m.field() != inst.field() {
            return Err(Error::InvalidParameters(format!(
                "{name} is over F_{} but the scheme uses F_{}",
                m.field().order(),
                inst.field().order()
            )));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(desc.seed);
    let run = run_protocol(&a, &b, &inst, &mut rng)?;
    if run.product != a.mul(&b)? {
        return Err(Error::Verification(
            "decoded product differs from the direct product".into(),
        ));
    }
    write_matrix_file(&run.product, &out)?;
    if let Some(path) = transcript {
        let mut w = BufWriter::new(File::create(path)?);
        run.transcript.write_jsonl(&mut w)?;
        w.flush()?;
    }
    eprintln!(
        "{} workers answered; product {}x{} written to {}",
        inst.workers(),
        run.product.rows(),
        run.product.cols(),
        out.display()
    );
    Ok(())
}

fn audit_cmd(m: u64, n: u64, x: u64, q: u64) -> Result<()> {
    let params = SchemeParams::new(m, n, x);
    let (_, encoder) = candidate_encoder(&params, q)?;
    let report = empirical_secrecy_audit(&encoder, &AuditConfig::default())?;
    let mut mds = serde_json::Map::new();
    let mut mds_ok = true;
    for side in [Side::A, Side::B] {
        let g = encoder.security_generator(side);
        let value = match g.all_square_submatrices_invertible(DEFAULT_SUBMATRIX_CAP) {
            Ok(ok) => {
                mds_ok &= ok;
                json!(ok)
            }
            Err(Error::TooManySubmatrices { .. }) => json!("skipped"),
            Err(e) => return Err(e),
        };
        mds.insert(format!("{side:?}"), value);
    }
    let out = json!({
        "secrecy": report,
        "mds": mds,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if !report.passed {
        return Err(Error::Verification(
            report
                .failure
                .unwrap_or_else(|| "secrecy audit failed".into()),
        ));
    }
    if !mds_ok {
        return Err(Error::Verification(
            "a masking generator has a singular square submatrix".into(),
        ));
    }
    Ok(())
}

fn degree_table_cmd(a: &[u64], b: &[u64]) -> Result<()> {
    println!("{}", analysis::degree_table_report(a, b)?);
    Ok(())
}

fn compare_cmd(
    m: ParamRange,
    n: ParamRange,
    x: ParamRange,
    out: PathBuf,
    plot: Option<PathBuf>,
) -> Result<()> {
    let sweep = analysis::compare_sweep(m, n, x);
    analysis::write_csv(&sweep.rows, BufWriter::new(File::create(&out)?))?;
    if let Some(path) = plot {
        let mut w = BufWriter::new(File::create(path)?);
        analysis::write_gnuplot(&sweep.rows, &mut w)?;
        w.flush()?;
    }
    println!("{}", sweep.summary);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Params { m, n, x, q } => params_cmd(m, n, x, q),
        Command::Build {
            m,
            n,
            x,
            q,
            seed,
            out,
        } => build_cmd(SchemeParams { m, n, x, q, seed }, out),
        Command::Multiply {
            scheme,
            a,
            b,
            out,
            transcript,
        } => multiply_cmd(scheme, a, b, out, transcript),
        Command::Audit { m, n, x, q } => audit_cmd(m, n, x, q),
        Command::DegreeTable { a, b } => degree_table_cmd(&a, &b),
        Command::Compare {
            m_range,
            n_range,
            x_range,
            out,
            plot,
        } => compare_cmd(m_range, n_range, x_range, out, plot),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Verification(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
