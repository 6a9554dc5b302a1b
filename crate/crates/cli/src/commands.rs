use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use latflow::constructions::{gamma_matrix, k1_witness, kronecker_grid, nonintegral_counterexample_scan, reduce_by_lower_unipotent};
use latflow::diophantine::Curve;
use latflow::experiments::{
    equidistribution_siegel, improvability_scan, layered_presentation, nondivergence_scan, twisted_w_invariance, write_csv,
    BasePoint, Observable, RunManifest, ScanSetup, SequenceSpec,
};
use latflow::grid::SampleGrid;
use latflow::lattice::Tent;
use latflow::scalar::{format_rational, rat, rational_from_f64, Rational};
use latflow::weights::{lemma_suite, GrowthSpec, MConfig, RepSpace};
use latflow::Backend;

use crate::params::{json_text, parse_list, parse_rationals, usage, Cli, Command, Common, TentArgs};
use crate::Failure;

/// Largest accepted relative error in the exponential identity.
const EXP_IDENTITY_TOL: f64 = 1e-9;

const DEFAULT_OUT: &str = "latflow-out";

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

macro_rules! say {
    ($($arg:tt)*) => { emit(&format!($($arg)*))? };
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let common = cli.common.resolve()?;
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let ctx = Ctx::new(common)?;
    match &cli.command {
        Command::Improvability { windows } => improvability(&ctx, windows.as_deref(), &cli.command),
        Command::Equidist { tent } => equidist(&ctx, tent, &cli.command),
        Command::Nondiv { eps } => nondiv(&ctx, eps, &cli.command),
        Command::Twist { t, tent, cap } => twist(&ctx, t, tent, *cap, &cli.command),
        Command::LemmaVerify {
            rep,
            config,
            growth,
            trials,
            height,
        } => lemma_verify(&ctx, rep, config, growth.as_deref(), *trials, *height),
        Command::Constructions {
            gamma,
            k1,
            m1,
            n_fixed,
            n1,
            points,
            bisect,
        } => constructions(&ctx, gamma.as_deref(), k1.as_deref(), *m1, n_fixed.as_deref(), n1, *points, *bisect, &cli.command),
        Command::Layered { tau } => layered(&ctx, tau.as_deref()),
    }
}

struct Ctx {
    common: Common,
    backend: Option<Backend>,
    grid: SampleGrid,
}

impl Ctx {
    fn new(common: Common) -> Result<Self, Failure> {
        let backend = common.backend.as_deref().map(str::parse).transpose()?;
        let grid = match common.grid.as_deref().unwrap_or("random") {
            "random" => SampleGrid::Random {
                seed: common.seed.unwrap_or(0),
            },
            "equispaced" => SampleGrid::Equispaced,
            other => return Err(usage(format!("unknown grid `{other}`; expected random or equispaced"))),
        };
        Ok(Self { common, backend, grid })
    }

    fn out_dir(&self, default: bool) -> Result<Option<PathBuf>, Failure> {
        let dir = match (&self.common.out, default) {
            (Some(d), _) => d.clone(),
            (None, true) => PathBuf::from(DEFAULT_OUT),
            (None, false) => return Ok(None),
        };
        fs::create_dir_all(&dir)?;
        Ok(Some(dir))
    }

    fn curve(&self) -> Result<Option<Curve>, Failure> {
        self.common
            .curve
            .as_deref()
            .map(|c| Ok(Curve::from_json_str(&json_text(c)?)?))
            .transpose()
    }

    fn sequence(&self) -> Result<Option<SequenceSpec>, Failure> {
        let Some(s) = self.common.sequence.as_deref() else {
            return Ok(None);
        };
        let mut seq = SequenceSpec::from_json_str(&json_text(s)?)?;
        if let Some(i) = self.common.imin {
            seq.i_min = i;
        }
        if let Some(i) = self.common.imax {
            seq.i_max = i;
        }
        seq.validate()?;
        Ok(Some(seq))
    }

    /// Dimension from `--n`, the curve or the sequence, else `default`.
    fn n(&self, curve: Option<&Curve>, seq: Option<&SequenceSpec>, default: usize) -> usize {
        self.common
            .n
            .or(curve.map(|c| c.k() + 1))
            .or(seq.map(|s| s.n))
            .unwrap_or(default)
    }

    fn samples(&self, default: usize) -> usize {
        self.common.samples.unwrap_or(default)
    }

    fn setup(&self) -> Result<ScanSetup, Failure> {
        let curve = self.curve()?;
        let seq = self.sequence()?;
        let n = self.n(curve.as_ref(), seq.as_ref(), 2);
        if n < 2 {
            return Err(usage("n must be at least 2"));
        }
        let curve = match curve {
            Some(c) => c,
            None => default_curve(n)?,
        };
        let seq = match seq {
            Some(s) => s,
            None => SequenceSpec::uniform_linear(n, 1, self.common.imin.unwrap_or(1), self.common.imax.unwrap_or(8))?,
        };
        Ok(ScanSetup::new(curve, seq, BasePoint::identity(n), self.samples(1000), self.grid)?)
    }

    fn finish<R: Serialize>(&self, sub: &str, cmd: &Command, tables: &[(&str, &[R])]) -> Result<(), Failure> {
        let dir = self.out_dir(true)?.expect("default directory");
        let mut outputs = Vec::new();
        for (name, rows) in tables {
            write_csv(&dir.join(name), rows)?;
            outputs.push(name.to_string());
        }
        let manifest = RunManifest::new(sub, json!({"common": self.common, "command": cmd}), outputs);
        let path = manifest.write(&dir)?;
        say!("wrote {} table(s) and {}", tables.len(), path.display());
        Ok(())
    }
}

/// `s -> s` for `n = 2`, otherwise the moment curve, on `[0, 1]`.
fn default_curve(n: usize) -> Result<Curve, Failure> {
    Ok(Curve::moment(n - 1, rat(0, 1), rat(1, 1))?)
}

fn print_json(v: &impl Serialize) -> Result<(), Failure> {
    emit(&serde_json::to_string_pretty(v)?)
}

#[derive(Serialize)]
struct SampleRow {
    mu: String,
    s: String,
    window: usize,
    n: String,
    primal_soluble: bool,
    dual_soluble: bool,
    primal_witness: String,
    dual_witness: String,
}

fn join_witness(w: &Option<Vec<i64>>) -> String {
    w.as_ref()
        .map(|v| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

fn improvability(ctx: &Ctx, windows: Option<&str>, cmd: &Command) -> Result<(), Failure> {
    if ctx.backend == Some(Backend::Float) {
        return Err(usage("improvability decisions run on the exact backend only"));
    }
    let curve = ctx.curve()?;
    let n = ctx.n(curve.as_ref(), None, 3);
    let curve = match curve {
        Some(c) => c,
        None => default_curve(n)?,
    };
    let k = curve.k();
    let windows: Vec<Vec<Rational>> = match windows {
        Some(w) => w.split(';').map(parse_rationals).collect::<Result<_, _>>()?,
        None => (1..=ctx.common.imax.unwrap_or(4))
            .map(|j| {
                let v = num_traits::pow(rat(10, 1), j as usize);
                vec![v; k]
            })
            .collect(),
    };
    let mus = parse_rationals(ctx.common.mu.as_deref().unwrap_or("0.5"))?;
    let scan = improvability_scan(&curve, &windows, &mus, ctx.samples(64), ctx.grid)?;
    for r in &scan.rows {
        say!("mu={} L={} fraction={:.4} ({}/{})", r.mu, r.prefix, r.fraction, r.candidates, r.samples);
    }
    let mut samples = Vec::new();
    for (mu, recs) in &scan.records {
        for rec in recs {
            for (j, o) in rec.outcomes.iter().enumerate() {
                samples.push(SampleRow {
                    mu: format_rational(mu),
                    s: format_rational(&rec.s),
                    window: j + 1,
                    n: o.n.iter().map(format_rational).collect::<Vec<_>>().join(" "),
                    primal_soluble: o.primal.soluble,
                    dual_soluble: o.dual.soluble,
                    primal_witness: join_witness(&o.primal.witness),
                    dual_witness: join_witness(&o.dual.witness),
                });
            }
        }
    }
    let dir = ctx.out_dir(true)?.expect("default directory");
    write_csv(&dir.join("improvability.csv"), &scan.rows)?;
    write_csv(&dir.join("improvability_samples.csv"), &samples)?;
    let manifest = RunManifest::new(
        "improvability",
        json!({"common": ctx.common, "command": cmd}),
        vec!["improvability.csv".into(), "improvability_samples.csv".into()],
    );
    manifest.write(&dir)?;
    if !scan.is_monotone() {
        return Err(Failure::Verification("candidate fractions increase with the prefix length".into()));
    }
    Ok(())
}

fn tent_exact(t: &TentArgs, n: usize) -> Result<Tent<Rational>, Failure> {
    Ok(Tent::centered(n, rational_from_f64(t.radius)?, rational_from_f64(t.height)?)?)
}

fn equidist(ctx: &Ctx, tent: &TentArgs, cmd: &Command) -> Result<(), Failure> {
    let setup = ctx.setup()?;
    let n = setup.sequence.n;
    let rows = match ctx.backend.unwrap_or(Backend::Float) {
        Backend::Float => equidistribution_siegel::<f64>(&setup, &Tent::centered(n, tent.radius, tent.height)?)?,
        Backend::Exact => equidistribution_siegel::<Rational>(&setup, &tent_exact(tent, n)?)?,
    };
    for r in &rows {
        say!("i={} mean={:.5} ref={:.5} rel_gap={:.4}", r.i, r.mean, r.reference, r.rel_gap);
    }
    ctx.finish("equidist", cmd, &[("equidist.csv", &rows)])
}

fn nondiv(ctx: &Ctx, eps: &str, cmd: &Command) -> Result<(), Failure> {
    let setup = ctx.setup()?;
    let eps: Vec<f64> = parse_list(eps, "threshold")?;
    let rows = match ctx.backend.unwrap_or(Backend::Float) {
        Backend::Float => nondivergence_scan::<f64>(&setup, &eps)?,
        Backend::Exact => nondivergence_scan::<Rational>(&setup, &eps)?,
    };
    for r in &rows {
        say!("i={} eps={} fraction={:.4}", r.i, r.eps, r.fraction);
    }
    ctx.finish("nondiv", cmd, &[("nondiv.csv", &rows)])
}

fn twist(ctx: &Ctx, ts: &str, tent: &TentArgs, cap: f64, cmd: &Command) -> Result<(), Failure> {
    if ctx.backend == Some(Backend::Exact) {
        return Err(usage("the twisted measures need square roots; use --backend float"));
    }
    let setup = ctx.setup()?;
    let ts: Vec<f64> = parse_list(ts, "shift")?;
    let f = Observable::new(Tent::centered(setup.sequence.n, tent.radius, tent.height)?, cap)?;
    let rep = twisted_w_invariance(&setup, &f, &ts)?;
    for r in &rep.rows {
        say!("i={} t={} defect={:.3e} (sup f = {})", r.i, r.t, r.defect, r.sup_f);
    }
    let dir = ctx.out_dir(true)?.expect("default directory");
    fs::write(
        dir.join("twist.json"),
        serde_json::to_string_pretty(&json!({"m_k": rep.m_k, "w0_sign": rep.w0_sign, "skipped": rep.skipped}))?,
    )?;
    write_csv(&dir.join("twist.csv"), &rep.rows)?;
    RunManifest::new("twist", json!({"common": ctx.common, "command": cmd}), vec!["twist.csv".into(), "twist.json".into()])
        .write(&dir)?;
    Ok(())
}

fn write_json_if(dir: Option<&Path>, name: &str, v: &Value) -> Result<(), Failure> {
    if let Some(d) = dir {
        fs::write(d.join(name), serde_json::to_string_pretty(v)?)?;
    }
    Ok(())
}

fn lemma_verify(ctx: &Ctx, rep: &str, config: &str, growth: Option<&str>, trials: usize, height: i64) -> Result<(), Failure> {
    let rep: RepSpace = rep.parse()?;
    let config = MConfig::parse(rep.n(), config)?;
    let growth = match growth {
        Some(g) => GrowthSpec::parse(config, g)?,
        None => GrowthSpec::linear(config),
    };
    if height < 1 {
        return Err(usage("--height must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.common.seed.unwrap_or(0));
    let suite = lemma_suite(&rep, &growth, trials, height, &mut rng)?;
    let v = json!({
        "pass": suite.pass(),
        "failures": suite.failures(),
        "checks": suite.check_count(),
        "suite": suite,
    });
    print_json(&v)?;
    write_json_if(ctx.out_dir(false)?.as_deref(), "lemma-verify.json", &v)?;
    if suite.pass() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} failing checks", suite.failures())))
    }
}

#[allow(clippy::too_many_arguments)]
fn constructions(
    ctx: &Ctx,
    gamma: Option<&str>,
    k1: Option<&str>,
    m1: usize,
    n_fixed: Option<&str>,
    n1: &str,
    points: usize,
    bisect: usize,
    cmd: &Command,
) -> Result<(), Failure> {
    if gamma.is_none() && k1.is_none() && n_fixed.is_none() {
        return Err(usage("constructions needs --gamma, --k1 or --n-fixed"));
    }
    let dir = ctx.out_dir(false)?;
    let mut failed = Vec::new();
    if let Some(g) = gamma {
        let ns: Vec<i64> = parse_list(g, "window size")?;
        let w = reduce_by_lower_unipotent(&ns, &gamma_matrix(&ns)?)?;
        let v = w.to_json();
        print_json(&v)?;
        write_json_if(dir.as_deref(), "gamma.json", &v)?;
        if !w.certified {
            failed.push("gamma reduction");
        }
    }
    if let Some(k) = k1 {
        let ns: Vec<i64> = parse_list(k, "window size")?;
        let w = k1_witness(&ns, m1)?;
        let v = w.to_json();
        print_json(&v)?;
        write_json_if(dir.as_deref(), "k1-witness.json", &v)?;
        if !w.certified() {
            failed.push("K_1 witness");
        }
    }
    if let Some(nf) = n_fixed {
        let nf = latflow::scalar::parse_rational(nf)?;
        let n1s: Vec<i64> = parse_list(n1, "window size")?;
        let pts = kronecker_grid(points);
        for mu in parse_rationals(ctx.common.mu.as_deref().unwrap_or("0.95"))? {
            let rep = nonintegral_counterexample_scan(&nf, &n1s, &pts, &mu, bisect)?;
            print_json(&json!({
                "n_fixed": format_rational(&rep.n_fixed),
                "mu": format_rational(&rep.mu),
                "points": rep.rows.len(),
                "insoluble": rep.insoluble,
                "threshold": rep.threshold,
            }))?;
            if let Some(d) = dir.as_deref() {
                let name = format!("scan-mu-{}.csv", format_rational(&mu).replace('/', "_"));
                let rows: Vec<ScanCsvRow> = rep
                    .rows
                    .iter()
                    .map(|r| ScanCsvRow {
                        n1: r.n1,
                        xi: r.xi.iter().map(format_rational).collect::<Vec<_>>().join(" "),
                        soluble: r.soluble,
                        witness: join_witness(&r.witness),
                    })
                    .collect();
                write_csv(&d.join(&name), &rows)?;
            }
        }
    }
    if let Some(d) = dir.as_deref() {
        RunManifest::new("constructions", json!({"common": ctx.common, "command": cmd}), Vec::new()).write(d)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("not certified: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct ScanCsvRow {
    n1: i64,
    xi: String,
    soluble: bool,
    witness: String,
}

fn layered(ctx: &Ctx, tau: Option<&str>) -> Result<(), Failure> {
    let seq = match (tau, ctx.sequence()?) {
        (Some(_), Some(_)) => return Err(usage("give either --tau or --sequence")),
        (None, Some(s)) => s,
        (Some(t), None) => {
            let coords: Vec<&str> = t.split(',').collect();
            SequenceSpec::parse(
                coords.len() + 1,
                &coords,
                ctx.common.imin.unwrap_or(1),
                ctx.common.imax.unwrap_or(10),
            )?
        }
        (None, None) => return Err(usage("layered needs --tau or --sequence")),
    };
    let p = layered_presentation(&seq)?;
    let checks = seq
        .indices()
        .map(|i| Ok(json!({"i": i, "defect": p.exp_identity_defect(i)?})))
        .collect::<Result<Vec<_>, Failure>>()?;
    let worst = checks
        .iter()
        .map(|c| c["defect"].as_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let v = json!({
        "n": seq.n,
        "k": p.config.k(),
        "m": p.config.m(),
        "t": p.t.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "growth": p.growth.describe(),
        "tau_bar": p.tau_bar.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "residual": p.residual.iter().map(format_rational).collect::<Vec<_>>(),
        "exp_identity": checks,
        "max_defect": worst,
    });
    print_json(&v)?;
    write_json_if(ctx.out_dir(false)?.as_deref(), "layered.json", &v)?;
    if worst <= EXP_IDENTITY_TOL {
        Ok(())
    } else {
        Err(Failure::Verification(format!("exponential identity defect {worst:e}")))
    }
}
