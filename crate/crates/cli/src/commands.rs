use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use qalr_core::graphs::{extend_balls, MarkedBall, Omega};
use qalr_core::lrbound::{bound_scan, write_scan_csv, BoundParams, CountModel};
use qalr_core::qasim::{batch_simulate, EnergyCache, Integrator, SimParams, DEFAULT_HILBERT_CAP, DEFAULT_TOL};
use qalr_core::ratio::{
    certify_ratio, eligible, optimize_t_alpha, scan_t_alpha, write_scan_entries_csv, CertifyParams, RatioCertificate,
    ScanSpec, DEFAULT_THRESHOLD,
};
use qalr_core::schedule::Schedule;
use qalr_core::BallDatabase;

use crate::args::{BoundArgs, CertifyArgs, Common, EnumerateArgs, ScanArgs, SimArgs, SimulateArgs};
use crate::config::{parse_grid, Config};

/// Some rows failed; everything else was written.
#[derive(Debug)]
pub struct Partial(pub String);

impl fmt::Display for Partial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Partial {}

pub struct Ctx {
    pub cfg: Config,
    pub out_dir: PathBuf,
    pub force: bool,
    pub threads: usize,
}

impl Ctx {
    pub fn new(common: &Common) -> Result<Self> {
        let cfg = match &common.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let out_dir = cfg.output_dir(common.output_dir.clone());
        let threads = cfg.pick_or(common.threads, "threads", 0)?;
        Ok(Self { cfg, out_dir, force: common.force, threads })
    }

    fn output(&self, flag: Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
        let path = flag.unwrap_or_else(|| self.out_dir.join(default_name));
        if path.exists() && !self.force {
            bail!("{} already exists; pass --force to overwrite", path.display());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(path)
    }

    fn schedule(&self, flag: Option<String>) -> Result<Schedule> {
        let spec = self.cfg.pick(flag, "schedule")?.unwrap_or_else(|| "linear".to_string());
        Ok(Schedule::parse(&spec)?)
    }

    fn grid(&self, flag: Option<String>, key: &str) -> Result<Vec<f64>> {
        let s = self.cfg.pick(flag, key)?.ok_or_else(|| anyhow!("--{key} is required (flag or config key {key})"))?;
        parse_grid(&s).with_context(|| format!("parsing {key}"))
    }

    fn count_model(&self, flag: Option<String>) -> Result<CountModel> {
        match self.cfg.pick(flag, "count_model")?.as_deref() {
            None | Some("certified") => Ok(CountModel::Certified),
            Some("printed") => Ok(CountModel::Printed),
            Some(other) => bail!("unknown count model {other:?} (certified | printed)"),
        }
    }

    fn databases(&self, flags: &[PathBuf]) -> Result<Vec<BallDatabase>> {
        let paths: Vec<PathBuf> = if flags.is_empty() {
            match self.cfg.raw("ball_db") {
                Some(v) => v.split(',').map(|s| PathBuf::from(s.trim())).collect(),
                None => bail!("no ball database given (--db or config key ball_db)"),
            }
        } else {
            flags.to_vec()
        };
        paths
            .iter()
            .map(|p| BallDatabase::load(p).with_context(|| format!("loading ball database {}", p.display())))
            .collect()
    }

    fn cache(&self, flag: Option<PathBuf>) -> Result<EnergyCache> {
        let path = self.cfg.pick(flag, "energy_cache")?.unwrap_or_else(|| self.out_dir.join("energies.csv"));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        EnergyCache::open(&path).with_context(|| format!("opening energy cache {}", path.display()))
    }

    fn sim_params(&self, a: &SimArgs, schedule: &Schedule) -> Result<SimParams> {
        let mut p = SimParams::new(0.0, 1.0, schedule.clone());
        p.tol = self.cfg.pick_or(a.tol, "tol", DEFAULT_TOL)?;
        p.hilbert_cap = self.cfg.pick_or(a.hilbert_cap, "hilbert_cap", DEFAULT_HILBERT_CAP)?;
        if let Some(m) = self.cfg.pick::<String>(a.method.clone(), "method")? {
            p.method = Integrator::parse(&m)?;
        }
        Ok(p)
    }
}

/// Every ball of every database once, in id order.
fn distinct_balls(dbs: &[BallDatabase]) -> Vec<&MarkedBall> {
    let mut seen = HashSet::new();
    let mut out: Vec<&MarkedBall> = dbs.iter().flat_map(|db| db.balls()).filter(|b| seen.insert(b.id().to_string())).collect();
    out.sort_by(|x, y| x.id().cmp(y.id()));
    out
}

fn common_d(dbs: &[BallDatabase]) -> Result<usize> {
    let d = dbs.first().map(BallDatabase::d).ok_or_else(|| anyhow!("no ball database given"))?;
    if let Some(other) = dbs.iter().find(|db| db.d() != d) {
        bail!("ball databases mix degree bounds {d} and {}", other.d());
    }
    Ok(d)
}

fn provenance(w: &mut impl Write, params: &[(&str, String)]) -> Result<()> {
    for (k, v) in params {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn grid_string(g: &[f64]) -> String {
    g.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Simulates `balls` at one point, skipping cached ones. Returns
/// `(simulated, cached, failures)`.
fn simulate_point(
    ctx: &Ctx,
    balls: &[&MarkedBall],
    base: &SimParams,
    t: f64,
    alpha: f64,
    cache: &EnergyCache,
) -> Result<(usize, usize, Vec<(String, String)>)> {
    let p = SimParams { t, alpha, ..base.clone() };
    let out = batch_simulate(balls.iter().copied(), &p, ctx.threads, Some(cache))?;
    Ok((out.simulated, out.cached, out.failures))
}

pub fn enumerate(ctx: &Ctx, a: EnumerateArgs) -> Result<()> {
    let d = ctx.cfg.pick_or(a.d, "d", 3)?;
    let p = ctx.cfg.pick_or(a.p, "p", 1)?;
    let path = ctx.output(a.out, &format!("balls_d{d}_p{p}.jsonl"))?;
    let mut db = BallDatabase::new(d, 0)?;
    db.insert(MarkedBall::single_edge(d)?)?;
    for r in 1..=p {
        let start = std::time::Instant::now();
        db = extend_balls(&db);
        let mut line = format!("radius {r}: {} balls", db.len());
        if d == 3 {
            let by = Omega::ALL.map(|o| db.count_by_class(o));
            line += &format!(" (omega1 {}, omega2 {}, omega3 {})", by[0], by[1], by[2]);
        }
        line += &format!(", {} closed, {:.2}s", db.closed_count(), start.elapsed().as_secs_f64());
        println!("{line}");
    }
    db.save(&path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} balls (d={d}, p={p}) to {}", db.len(), path.display());
    Ok(())
}

pub fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let dbs = ctx.databases(&a.db)?;
    let balls = distinct_balls(&dbs);
    let schedule = ctx.schedule(a.schedule)?;
    let ts = ctx.grid(a.t, "T")?;
    let alphas = ctx.grid(a.alpha, "alpha")?;
    let base = ctx.sim_params(&a.sim, &schedule)?;
    let cache = ctx.cache(a.cache)?;
    let (mut sim, mut hit, mut failed) = (0, 0, Vec::new());
    for &t in &ts {
        for &alpha in &alphas {
            let (s, c, f) = simulate_point(ctx, &balls, &base, t, alpha, &cache)?;
            eprintln!("T={t} alpha={alpha}: {s} simulated, {c} cached, {} failed", f.len());
            sim += s;
            hit += c;
            failed.extend(f.into_iter().map(|(id, msg)| format!("T={t} alpha={alpha} {id}: {msg}")));
        }
    }
    println!(
        "{sim} simulated, {hit} cached, {} failed (schedule {}, method {}, tol {:e}) -> {}",
        failed.len(),
        schedule.id(),
        base.method.name(),
        base.tol,
        cache.path().map(|p| p.display().to_string()).unwrap_or_default()
    );
    if !failed.is_empty() {
        for f in &failed {
            eprintln!("failed {f}");
        }
        return Err(Partial(format!("{} simulation(s) failed", failed.len())).into());
    }
    Ok(())
}

pub fn bound(ctx: &Ctx, a: BoundArgs) -> Result<()> {
    let d = ctx.cfg.pick_or(a.d, "d", 3)?;
    let k = match (ctx.cfg.pick(a.k, "k")?, ctx.cfg.pick::<usize>(a.q, "q")?) {
        (Some(k), _) => k,
        (None, Some(q)) => q + 1,
        (None, None) => bail!("--k or --q is required"),
    };
    let schedule = ctx.schedule(a.schedule)?;
    let ts = ctx.grid(a.t, "T")?;
    let alphas = ctx.grid(a.alpha, "alpha")?;
    let model = ctx.count_model(a.count_model)?;
    let template = BoundParams::new(d, k, ts[0], alphas[0], schedule.clone())?;
    let dbs;
    let ball = if a.local {
        let id = a.ball.as_deref().ok_or_else(|| anyhow!("--local needs --ball <id>"))?;
        dbs = ctx.databases(&a.db)?;
        Some(dbs.iter().find_map(|db| db.get(id)).ok_or_else(|| anyhow!("ball {id} not found in the given databases"))?)
    } else {
        None
    };
    let rows = bound_scan(ball, &ts, &alphas, &template, model)?;
    let params = [
        ("mode", if ball.is_some() { "local".to_string() } else { "global".to_string() }),
        ("d", d.to_string()),
        ("k", k.to_string()),
        ("q", (k - 1).to_string()),
        ("schedule", schedule.id().to_string()),
        ("count_model", format!("{model:?}").to_lowercase()),
        ("T", grid_string(&ts)),
        ("alpha", grid_string(&alphas)),
    ];
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    provenance(&mut lock, &params)?;
    write_scan_csv(&mut lock, &rows)?;
    if a.out.is_some() {
        let path = ctx.output(a.out, "bound.csv")?;
        let mut w = BufWriter::new(File::create(&path)?);
        provenance(&mut w, &params)?;
        write_scan_csv(&mut w, &rows)?;
        w.flush()?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

pub fn certify(ctx: &Ctx, a: CertifyArgs) -> Result<()> {
    let dbs = ctx.databases(&a.db)?;
    let d = common_d(&dbs)?;
    let balls = distinct_balls(&dbs);
    let q = ctx.cfg.pick_or(a.q, "q", 2)?;
    let schedule = ctx.schedule(a.schedule)?;
    let ts = ctx.grid(a.t, "T")?;
    let alphas = ctx.grid(a.alpha, "alpha")?;
    let threshold = ctx.cfg.pick_or(a.threshold, "threshold", DEFAULT_THRESHOLD)?;
    let model = ctx.count_model(a.count_model)?;
    let rounds = ctx.cfg.pick_or(a.refine, "refine", 0usize)?;
    if rounds > 0 && !a.simulate {
        bail!("--refine evaluates off-grid points and needs --simulate");
    }
    let json_path = ctx.output(a.out.as_ref().map(|p| p.with_extension("json")), "certificate.json")?;
    let txt_path = ctx.output(Some(json_path.with_extension("txt")), "certificate.txt")?;
    let grid_path = ctx.output(Some(json_path.with_file_name("certify_grid.csv")), "certify_grid.csv")?;
    let cache = ctx.cache(a.cache)?;
    let base = ctx.sim_params(&a.sim, &schedule)?;
    let usable: Vec<&MarkedBall> = balls.iter().copied().filter(|b| eligible(b, q)).collect();

    let mut certs: BTreeMap<(u64, u64), RatioCertificate> = BTreeMap::new();
    let mut order = Vec::new();
    let objective = |t: f64, alpha: f64| -> Result<f64, anyhow::Error> {
        if a.simulate {
            let (s, _, failed) = simulate_point(ctx, &usable, &base, t, alpha, &cache)?;
            if !failed.is_empty() {
                let ids: Vec<String> = failed.iter().map(|(id, m)| format!("{id}: {m}")).collect();
                return Err(Partial(format!("simulation failed at T={t} alpha={alpha}: {}", ids.join("; "))).into());
            }
            if s > 0 {
                eprintln!("T={t} alpha={alpha}: simulated {s} balls");
            }
        }
        let params = CertifyParams { d, q, t, alpha, schedule: schedule.clone(), threshold, count_model: model };
        let cert = certify_ratio(balls.iter().copied(), &cache, &params)?;
        let r = cert.ratio;
        order.push((t, alpha));
        certs.insert((t.to_bits(), alpha.to_bits()), cert);
        Ok(r)
    };
    let best = adapt(objective, &ts, &alphas, rounds)?;
    let cert = certs.get(&(best.t.to_bits(), best.alpha.to_bits())).expect("best point was evaluated");
    cert.verify()?;

    cert.save_json(&json_path)?;
    std::fs::write(&txt_path, cert.report())?;
    let mut w = BufWriter::new(File::create(&grid_path)?);
    provenance(
        &mut w,
        &[
            ("d", d.to_string()),
            ("q", q.to_string()),
            ("schedule", schedule.id().to_string()),
            ("threshold", threshold.to_string()),
            ("count_model", format!("{model:?}").to_lowercase()),
            ("refine", rounds.to_string()),
        ],
    )?;
    writeln!(w, "T,alpha,ratio,a,b,c,eps_global,survivors")?;
    let mut seen = HashSet::new();
    for (t, alpha) in order {
        if !seen.insert((t.to_bits(), alpha.to_bits())) {
            continue;
        }
        let c = &certs[&(t.to_bits(), alpha.to_bits())];
        writeln!(
            w,
            "{t},{alpha},{},{},{},{},{:e},{}",
            c.ratio,
            c.minima.a.value,
            c.minima.b.value,
            c.minima.c.value,
            c.eps_global,
            c.survivor_count()
        )?;
    }
    w.flush()?;
    print!("{}", cert.report());
    println!("best (T, alpha) = ({}, {}) over {} evaluation(s)", best.t, best.alpha, best.evaluations);
    println!("wrote {}, {}, {}", json_path.display(), txt_path.display(), grid_path.display());
    Ok(())
}

/// `optimize_t_alpha` with an anyhow objective.
fn adapt(
    mut objective: impl FnMut(f64, f64) -> Result<f64>,
    ts: &[f64],
    alphas: &[f64],
    rounds: usize,
) -> Result<qalr_core::ratio::Optimum> {
    let mut failure = None;
    let res = optimize_t_alpha(
        |t, a| match objective(t, a) {
            Ok(v) => Ok(v),
            Err(e) => {
                let msg = e.to_string();
                failure = Some(e);
                Err(qalr_core::Error::InvalidParameter(msg))
            }
        },
        ts,
        alphas,
        rounds,
        1e-3,
    );
    match (res, failure) {
        (Ok(o), _) => Ok(o),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(e.into()),
    }
}

pub fn scan(ctx: &Ctx, a: ScanArgs) -> Result<()> {
    let dbs = ctx.databases(&a.db)?;
    let d = common_d(&dbs)?;
    let balls = distinct_balls(&dbs);
    let q = ctx.cfg.pick_or(a.q, "q", 2)?;
    let schedule = ctx.schedule(a.schedule)?;
    let ts = ctx.grid(a.t, "T")?;
    let alphas = ctx.grid(a.alpha, "alpha")?;
    let model = ctx.count_model(a.count_model)?;
    let worst_n = ctx.cfg.pick(a.worst, "worst_n")?;
    let path = ctx.output(a.out, "scan.csv")?;
    let cache = ctx.cache(a.cache)?;
    if a.simulate {
        let base = ctx.sim_params(&a.sim, &schedule)?;
        let usable: Vec<&MarkedBall> = balls.iter().copied().filter(|b| eligible(b, q)).collect();
        for &t in &ts {
            for &alpha in &alphas {
                let (s, _, failed) = simulate_point(ctx, &usable, &base, t, alpha, &cache)?;
                if !failed.is_empty() {
                    return Err(Partial(format!("{} simulation(s) failed at T={t} alpha={alpha}", failed.len())).into());
                }
                if s > 0 {
                    eprintln!("T={t} alpha={alpha}: simulated {s} balls");
                }
            }
        }
    }
    let spec = ScanSpec { d, q, schedule: schedule.clone(), count_model: model, t_grid: ts.clone(), alpha_grid: alphas.clone(), worst_n };
    let rows = scan_t_alpha(balls.iter().copied(), &cache, &spec)?;
    let mut w = BufWriter::new(File::create(&path)?);
    provenance(
        &mut w,
        &[
            ("d", d.to_string()),
            ("q", q.to_string()),
            ("schedule", schedule.id().to_string()),
            ("count_model", format!("{model:?}").to_lowercase()),
            ("T", grid_string(&ts)),
            ("alpha", grid_string(&alphas)),
            ("worst_n", worst_n.map(|n: usize| n.to_string()).unwrap_or_else(|| "all".into())),
        ],
    )?;
    write_scan_entries_csv(&mut w, &rows)?;
    w.flush()?;
    let n_balls = rows.iter().map(|r| r.ball_id.as_str()).collect::<HashSet<_>>().len();
    println!("{} rows for {n_balls} balls -> {}", rows.len(), path.display());
    Ok(())
}
