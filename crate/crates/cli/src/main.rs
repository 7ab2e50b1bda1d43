mod config;
mod suite;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thetaform::algebra::Ctx;
use thetaform::bihamiltonian::{determinant_d, k_dispersionless, second_bracket_b, structural_decompose, tilde_b};
use thetaform::cohft::{check_axiom_residuals, check_homogeneity, gen_trivial, write_table, ConformalData, Window};
use thetaform::hierarchy::{first_bracket_a, full_flow, hamiltonians};
use thetaform::jetform::{quasi_miura_w, QuasiSettings};
use thetaform::report::CheckRecord;

use config::{default_order, load, RunConfig};
use suite::Group;

/// Why a run stopped; maps onto the exit code.
#[derive(Clone, Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
    Truncation(String),
}

impl Failure {
    pub fn from_core(truncation: bool, e: impl Display) -> Failure {
        if truncation {
            Failure::Truncation(e.to_string())
        } else {
            Failure::Verification(e.to_string())
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Truncation(_) => 3,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Truncation(m) => write!(f, "truncation insufficient: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "thetaform", version, about = "Dubrovin-Zhang hierarchies from CohFT correlators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Correlator file; the trivial CohFT is used when omitted.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    gmax: u8,
    /// Series order of the potentials.
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a correlator table.
    Gen {
        /// Witten-Kontsevich correlators of the trivial CohFT.
        #[arg(long, required = true)]
        trivial: bool,
        #[arg(long, default_value_t = 1)]
        gmax: u8,
        /// Largest number of insertions.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Axiom and homogeneity residuals of a table.
    CheckCohft {
        #[command(flatten)]
        common: Common,
        /// Largest descendant index in the window.
        #[arg(long)]
        dmax: Option<u8>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// First bracket, Hamiltonian densities and flows.
    Hierarchy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        dmax: i32,
    },
    /// Second bracket K, B, B̃ and the C/Dⁿ decomposition.
    Bracket {
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        dmax: i32,
        #[arg(long)]
        laurent_min: Option<i32>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the solver and structure groups.
        #[arg(long)]
        all: bool,
        /// Run only these groups.
        #[arg(long, value_enum, value_delimiter = ',')]
        only: Vec<Group>,
        /// Write 0 in the `millis` field for byte-stable reports.
        #[arg(long)]
        no_timing: bool,
    },
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn jsonl(records: &[CheckRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
}

fn core<E: Display>(truncation: impl Fn(&E) -> bool) -> impl Fn(E) -> Failure {
    move |e| Failure::from_core(truncation(&e), e)
}

fn cmd_gen(gmax: u8, order: Option<u32>, out: Option<PathBuf>) -> Result<(), Failure> {
    RunConfig::new(gmax, 0, order)?;
    let t = gen_trivial(gmax, order.unwrap_or(default_order(gmax)) as usize).map_err(|e| Failure::Input(e.to_string()))?;
    write_out(out.as_ref(), &write_table(&t, Some(&ConformalData::kdv())))
}

fn cmd_check_cohft(common: Common, dmax: Option<u8>, report: Option<PathBuf>) -> Result<(), Failure> {
    let l = load(common.table.as_deref(), 0, common.order)?;
    let order = common.order.unwrap_or(10);
    let w = Window { order, dmax: dmax.unwrap_or(order.saturating_sub(3).min(255) as u8) };
    let mut reports =
        vec![("cohft-axioms", check_axiom_residuals(&l.table, w).map_err(core(|e: &thetaform::cohft::CohftError| e.is_truncation()))?)];
    if let Some(c) = &l.conformal {
        reports.push((
            "cohft-homogeneity",
            check_homogeneity(&l.table, c, w).map_err(core(|e: &thetaform::cohft::CohftError| e.is_truncation()))?,
        ));
    }
    let params = [("order", w.order as i64), ("dmax", w.dmax as i64)];
    let records: Vec<CheckRecord> = reports
        .iter()
        .map(|(id, r)| CheckRecord::from_residual(*id, &params, (!r.is_clean()).then(|| format!("{} violations", r.violations.len()))))
        .collect();
    for (id, r) in &reports {
        println!("{id}: {}", if r.is_clean() { "clean" } else { "VIOLATED" });
        for v in &r.violations {
            println!("  {} genus {} {} coefficient of {}: {}", v.identity, v.genus, v.indices, v.monomial, v.residual);
        }
    }
    if let Some(p) = &report {
        write_out(Some(p), &jsonl(&records))?;
    }
    match records.iter().find(|r| r.is_failure()) {
        Some(r) => Err(Failure::Verification(format!("{} does not hold", r.id))),
        None => Ok(()),
    }
}

fn cmd_hierarchy(common: Common, dmax: i32) -> Result<(), Failure> {
    let cfg = RunConfig::new(common.gmax, dmax, common.order)?;
    let l = load(common.table.as_deref(), cfg.gmax, common.order)?;
    let t = &l.table;
    let mut qs = QuasiSettings::new(cfg.gmax);
    qs.order = cfg.order;
    let w = quasi_miura_w(t, qs).map_err(core(|e: &thetaform::jetform::JetError| e.is_truncation()))?;
    let hier = |e: &thetaform::hierarchy::HierarchyError| e.is_truncation();
    let fb = first_bracket_a(t, &w).map_err(core(hier))?;
    println!("A = {}", fb.a);
    println!("A polynomial: {}", fb.polynomial);
    let h = hamiltonians(t, (dmax + 1) as u8, Ctx::new(t.n(), 0), cfg.order).map_err(core(hier))?;
    let hw = h.to_w(&w).map_err(core(hier))?;
    for ((a, p), d) in hw.iter() {
        println!("h[{a},{p}] = {d}");
    }
    for beta in 1..=t.n() {
        for q in -1..dmax {
            let f = full_flow(t, &w, &fb.a, beta, q, cfg.order).map_err(core(hier))?;
            for (a, c) in f.iter().enumerate() {
                println!("dw{}/dt[{beta},{}] = {c}", a + 1, q + 1);
            }
        }
    }
    Ok(())
}

fn cmd_bracket(common: Common) -> Result<(), Failure> {
    let cfg = RunConfig::new(common.gmax, 0, common.order)?;
    let l = load(common.table.as_deref(), cfg.gmax, common.order)?;
    let t = &l.table;
    let c = l.conformal.as_ref().ok_or_else(|| Failure::Input("the second bracket needs conformal data (q, b, charge)".into()))?;
    let biham = |e: &thetaform::bihamiltonian::BihamError| e.is_truncation();
    let k = k_dispersionless(t, c, Ctx::new(t.n(), 0), cfg.order).map_err(core(biham))?;
    println!("K = {k}");
    if cfg.gmax == 0 {
        return Ok(());
    }
    let mut qs = QuasiSettings::new(cfg.gmax);
    qs.order = cfg.order;
    let w = quasi_miura_w(t, qs).map_err(core(|e: &thetaform::jetform::JetError| e.is_truncation()))?;
    let a = first_bracket_a(t, &w).map_err(core(|e: &thetaform::hierarchy::HierarchyError| e.is_truncation()))?.a;
    let b = second_bracket_b(t, c, &w, cfg.order).map_err(core(biham))?.b;
    println!("B = {b}");
    println!("B~ = {}", tilde_b(&b, &a, t.eta_inv()).map_err(core(biham))?);
    let d = determinant_d(t, b.ctx(), cfg.order).map_err(core(biham))?;
    println!("D = {d}");
    for e in structural_decompose(&b, &d, 16).map_err(core(biham))?.entries {
        println!("C[{},{}][{},{}] = ({}) / D^{}", e.g, e.s, e.alpha, e.beta, e.numerator, e.n);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    common: Common,
    dmax: i32,
    laurent_min: Option<i32>,
    report: Option<PathBuf>,
    seed: u64,
    all: bool,
    only: Vec<Group>,
    no_timing: bool,
) -> Result<(), Failure> {
    let mut cfg = RunConfig::new(common.gmax, dmax, common.order)?;
    cfg.laurent_min = laurent_min;
    cfg.seed = seed;
    cfg.report = report;
    let l = load(common.table.as_deref(), cfg.gmax, common.order)?;
    let groups: Vec<Group> = if !only.is_empty() {
        only
    } else if all {
        Group::ALL.to_vec()
    } else {
        Group::FAST.to_vec()
    };
    let (mut records, errors) = suite::run(&l.table, l.conformal.as_ref(), &cfg, &groups);
    if no_timing {
        records.iter_mut().for_each(|r| r.millis = 0);
    }
    let text = jsonl(&records);
    match &cfg.report {
        Some(p) => {
            write_out(Some(p), &text)?;
            for r in &records {
                println!("{:?} {} {:?}", r.status, r.id, r.params);
            }
        }
        None => print!("{text}"),
    }
    std::io::stdout().flush().ok();
    if let Some(e) = errors.iter().find(|e| matches!(e, Failure::Truncation(_))) {
        return Err(e.clone());
    }
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    let failed: Vec<&str> = records.iter().filter(|r| r.is_failure()).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} checks failed: {}", failed.len(), failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen { trivial: _, gmax, order, out } => cmd_gen(gmax, order, out),
        Cmd::CheckCohft { common, dmax, report } => cmd_check_cohft(common, dmax, report),
        Cmd::Hierarchy { common, dmax } => cmd_hierarchy(common, dmax),
        Cmd::Bracket { common } => cmd_bracket(common),
        Cmd::Verify { common, dmax, laurent_min, report, seed, all, only, no_timing } => {
            cmd_verify(common, dmax, laurent_min, report, seed, all, only, no_timing)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
