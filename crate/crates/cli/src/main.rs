//! `ppadkit`: generate END-OF-A-LINE instances, reduce them, embed them as
//! Brouwer functions, build games, solve, verify and audit. Every stage reads
//! and writes JSON in the output directory.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppad_toolkit::bimatrix::{
    compose, decompose_profile, tv_from_uniform, BimatrixGame, BipartitePolymatrix, ComposedGame,
};
use ppad_toolkit::brouwer::{from_unit, to_unit, BrouwerParams, EmbeddingExport, Endpoint, PathEmbedding};
use ppad_toolkit::codes::{LinearCode, EXHAUSTIVE_MSG_BITS};
use ppad_toolkit::eol::{generate_path_instance, EolInstance, EolSolution};
use ppad_toolkit::games::{
    build_binary_game, build_grid_game, classify_equilibrium, cyclic_quadratic, EquilibriumReport, MixedProfile,
    SuccinctGame, UnitMap,
};
use ppad_toolkit::local_eol::{Configuration, LocalEolInstance, LocalityReport};
use ppad_toolkit::smallbias::{bias, sample_biased_set, GaloisField};
use ppad_toolkit::solvers::{
    fixed_point_search, regret_dynamics, support_enumeration_ane, SolverBudget, SolverReport,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

const DEFAULT_N: usize = 2;
const DEFAULT_K: usize = 8;
const DEFAULT_LAMBDA: f64 = 0.05;
const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_BLOCK: usize = 16;
/// Polymatrix regret tolerance used when checking decomposed profiles.
const DEFAULT_EPS_POLY: f64 = 0.25;
const WALK_LIMIT: usize = 1 << 22;

#[derive(Parser, Debug)]
#[command(name = "ppadkit", version, about = "END-OF-A-LINE to Brouwer to games pipeline")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = "PPADKIT_OUT", default_value = ".")]
    out: PathBuf,
    /// Pin every constant to its documented default, ignoring overrides.
    #[arg(long, global = true)]
    paper_defaults: bool,
    /// Source vertex bits, or imitation-game coordinates.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Grid resolution of the imitation games.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Tube width of the Brouwer embedding.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Displacement magnitude of the Brouwer embedding.
    #[arg(long = "displacement-delta", global = true)]
    displacement_delta: Option<f64>,
    /// Code block length of the Brouwer embedding.
    #[arg(long, global = true)]
    block: Option<usize>,
    #[arg(long = "budget-iterations", global = true)]
    budget_iterations: Option<usize>,
    #[arg(long = "budget-seconds", global = true)]
    budget_seconds: Option<f64>,
    #[arg(long = "budget-candidates", global = true)]
    budget_candidates: Option<u64>,
    #[arg(long = "budget-support", global = true)]
    budget_support: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a seeded single-path instance.
    GenEol,
    /// Reduce to the local variant, walk from the start and map the end back.
    ReduceLocal {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Embed an instance as a Brouwer function and export its geometry.
    EmbedBrouwer {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Build a game description.
    BuildGame {
        #[arg(value_enum)]
        kind: GameKind,
        /// Use this instance's rescaled Brouwer function instead of the toy map.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Strategies per polymatrix vertex.
        #[arg(long, default_value_t = 2)]
        actions: usize,
    },
    /// Run a solver.
    Solve {
        #[arg(value_enum)]
        method: Method,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Recompute regrets of a solver report and check them.
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Audit locality, code distance, bias or Lipschitz behavior.
    Audit {
        #[arg(value_enum)]
        what: AuditKind,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Field degree for the bias audit.
        #[arg(long, default_value_t = 4)]
        degree: u32,
        /// Vector length for the bias audit.
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Target bias for the bias audit.
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
    },
    /// Generate, reduce, embed and locate a fixed point in one run.
    Pipeline,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GameKind {
    Grid,
    Binary,
    Compose,
    Polymatrix,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    FixedPoint,
    Ane,
    Dynamics,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AuditKind {
    Locality,
    Code,
    Bias,
    Lipschitz,
}

/// Marks a failed check; maps to exit code 2.
#[derive(Debug)]
struct Verification(String);

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for Verification {}

fn fail(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Verification(msg.into()))
}

struct Resolved {
    seed: u64,
    out: PathBuf,
    n: usize,
    k: usize,
    lambda: f64,
    epsilon: Option<f64>,
    delta: f64,
    params: BrouwerParams,
    budget: SolverBudget,
}

impl Opts {
    fn resolve(&self) -> Result<Resolved> {
        let o = if self.paper_defaults {
            let overridden = self.n.is_some()
                || self.k.is_some()
                || self.lambda.is_some()
                || self.epsilon.is_some()
                || self.delta.is_some()
                || self.h.is_some()
                || self.displacement_delta.is_some()
                || self.block.is_some();
            if overridden {
                eprintln!("--paper-defaults: ignoring explicit parameter flags");
            }
            Opts {
                n: None,
                k: None,
                lambda: None,
                epsilon: None,
                delta: None,
                h: None,
                displacement_delta: None,
                block: None,
                ..self.clone()
            }
        } else {
            self.clone()
        };
        let mut params = BrouwerParams::defaults(o.block.unwrap_or(DEFAULT_BLOCK));
        if let Some(h) = o.h {
            params.h = h;
            params.delta = h * h / 100.0;
        }
        if let Some(d) = o.displacement_delta {
            params.delta = d;
        }
        params.validate()?;
        let mut budget = SolverBudget { seed: o.seed, ..Default::default() };
        if let Some(v) = o.budget_iterations {
            budget.iterations = v;
        }
        if let Some(v) = o.budget_seconds {
            budget.wall_clock_secs = v;
        }
        if let Some(v) = o.budget_candidates {
            budget.max_candidates = v;
        }
        budget.max_support = o.budget_support;
        budget.validate()?;
        let k = o.k.unwrap_or(DEFAULT_K);
        if k < 2 {
            bail!("--k must be at least 2");
        }
        Ok(Resolved {
            seed: o.seed,
            out: o.out,
            n: o.n.unwrap_or(DEFAULT_N),
            k,
            lambda: o.lambda.unwrap_or(DEFAULT_LAMBDA),
            epsilon: o.epsilon,
            delta: o.delta.unwrap_or(0.0),
            params,
            budget,
        })
    }
}

impl Resolved {
    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    fn write<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
enum FunctionSource {
    /// `0.2 + 0.6·x_{j+1}²` on `n` coordinates.
    Toy { n: usize },
    Embedded { instance: EolInstance, params: BrouwerParams },
}

impl FunctionSource {
    fn build(&self) -> Result<(Arc<UnitMap>, usize)> {
        Ok(match self {
            FunctionSource::Toy { n } => (Arc::new(|x: &[f64]| cyclic_quadratic(x)), *n),
            FunctionSource::Embedded { instance, params } => {
                let emb = Arc::new(embed(instance, *params)?);
                let dim = emb.dim();
                (Arc::new(move |y: &[f64]| to_unit(&emb.f(&from_unit(y)))), dim)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum GameDef {
    Grid { k: usize, function: FunctionSource },
    Binary { k: usize, function: FunctionSource },
    Compose { polymatrix: BipartitePolymatrix, composed: ComposedGame },
    Polymatrix { polymatrix: BipartitePolymatrix },
    Bimatrix { game: BimatrixGame },
}

impl GameDef {
    fn succinct(&self) -> Result<SuccinctGame> {
        Ok(match self {
            GameDef::Grid { k, function } => {
                let (f, n) = function.build()?;
                build_grid_game(f, n, *k)?
            }
            GameDef::Binary { k, function } => {
                let (f, n) = function.build()?;
                build_binary_game(f, n, *k)?
            }
            GameDef::Compose { composed, .. } => composed.normalized().to_succinct(),
            GameDef::Polymatrix { polymatrix } => {
                polymatrix.validate()?;
                polymatrix.to_succinct()
            }
            GameDef::Bimatrix { game } => game.to_succinct(),
        })
    }

    /// Bimatrix the support search runs on.
    fn bimatrix(&self) -> Result<BimatrixGame> {
        match self {
            GameDef::Compose { composed, .. } => Ok(composed.normalized()),
            GameDef::Bimatrix { game } => Ok(game.clone()),
            _ => bail!("support enumeration needs a bimatrix or composed game"),
        }
    }
}

/// A solver report plus the context needed to re-verify it.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SolveOutput {
    #[serde(flatten)]
    report: SolverReport,
    method: String,
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classification: Option<EquilibriumReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extra: Option<serde_json::Value>,
}

fn embed(instance: &EolInstance, params: BrouwerParams) -> Result<PathEmbedding> {
    let code = LinearCode::preset(instance.n())?;
    Ok(PathEmbedding::embed(instance, &code, params)?)
}

#[derive(Serialize)]
struct LocalSummary {
    source_bits: usize,
    lines: usize,
    schedule_length: usize,
    q_critical: usize,
    walk_steps: usize,
    end: String,
    solution: EolSolution,
    brute_force: Vec<EolSolution>,
    matches: bool,
    locality: LocalityReport,
}

fn forward_walk(local: &LocalEolInstance) -> Result<Vec<Configuration>> {
    let mut walk = vec![local.u0().clone()];
    while !local.is_solution(walk.last().unwrap()) {
        if walk.len() >= WALK_LIMIT {
            return Err(ppad_toolkit::Error::Budget(format!("walk exceeded {WALK_LIMIT} steps")).into());
        }
        let next = local.step_forward(walk.last().unwrap())?;
        walk.push(next);
    }
    Ok(walk)
}

fn reduce_local(r: &Resolved, instance: &EolInstance) -> Result<LocalSummary> {
    let local = LocalEolInstance::reduce(instance);
    let walk = forward_walk(&local)?;
    let end = walk.last().unwrap();
    let solution = local.map_back(end)?;
    let brute_force = instance.enumerate_solutions()?;
    let locality = local.locality_audit(&walk, 500, r.seed);
    Ok(LocalSummary {
        source_bits: instance.n(),
        lines: local.line_count(),
        schedule_length: local.m(),
        q_critical: local.q_critical(),
        walk_steps: walk.len() - 1,
        end: end.to_hex(),
        matches: brute_force.contains(&solution),
        solution,
        brute_force,
        locality,
    })
}

#[derive(Serialize)]
struct EmbeddingOutput {
    #[serde(flatten)]
    export: EmbeddingExport,
    endpoints: Vec<Endpoint>,
}

#[derive(Serialize)]
struct FixedPointExtra {
    point: Vec<f64>,
    delta: f64,
    restarts: usize,
    best_history: Vec<f64>,
    located_solution: Option<EolSolution>,
    brute_force: Vec<EolSolution>,
}

fn solve_fixed_point(r: &Resolved, instance: &EolInstance) -> Result<SolveOutput> {
    let emb = embed(instance, r.params)?;
    let delta = r.params.delta;
    let hints: Vec<Vec<f64>> = emb.endpoints()?.into_iter().map(|e| e.point).collect();
    let budget = SolverBudget {
        iterations: r.budget.iterations.max(200_000),
        grid_resolution: 1e-7,
        ..r.budget.clone()
    };
    let f = |x: &[f64]| emb.f(x);
    let res = fixed_point_search(&f, emb.dim(), (-1.0, 2.0), &hints, 2, r.params.h, 0.01 * delta, &budget)?;
    let located = emb.locate_solution(&res.x);
    let brute_force = instance.enumerate_solutions()?;
    let ok = res.residual <= 2.0 * delta && located.as_ref().is_some_and(|s| brute_force.contains(s));
    let out = SolveOutput {
        report: SolverReport {
            profile: None,
            regrets: vec![],
            residual: Some(res.residual),
            queries: res.evaluations,
            iterations: res.restarts as u64,
            seed: r.seed,
        },
        method: "fixed-point".into(),
        epsilon: None,
        classification: None,
        extra: Some(serde_json::to_value(FixedPointExtra {
            point: res.x,
            delta,
            restarts: res.restarts,
            best_history: res.best_history,
            located_solution: located,
            brute_force,
        })?),
    };
    r.write("fixed_point.json", &out)?;
    if !ok {
        return Err(fail(format!("residual {} (2δ = {}) or decoded solution is wrong", res.residual, 2.0 * delta)));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let r = cli.opts.resolve()?;
    match cli.cmd {
        Cmd::GenEol => {
            let inst = generate_path_instance(r.n, r.seed)?;
            r.write("eol.json", &inst)?;
        }
        Cmd::ReduceLocal { instance } => {
            let inst: EolInstance = read_json(&instance)?;
            let summary = reduce_local(&r, &inst)?;
            r.write("local.json", &summary)?;
            println!("solution {:?} after {} steps", summary.solution, summary.walk_steps);
            if !summary.matches || !summary.locality.within_declared() {
                return Err(fail("walk end or locality audit disagrees"));
            }
        }
        Cmd::EmbedBrouwer { instance } => {
            let inst: EolInstance = read_json(&instance)?;
            let emb = embed(&inst, r.params)?;
            r.write("embedding.json", &EmbeddingOutput { export: emb.export()?, endpoints: emb.endpoints()? })?;
        }
        Cmd::BuildGame { kind, instance, actions } => {
            let function = match &instance {
                Some(p) => FunctionSource::Embedded { instance: read_json(p)?, params: r.params },
                None => FunctionSource::Toy { n: r.n },
            };
            let def = match kind {
                GameKind::Grid => GameDef::Grid { k: r.k, function },
                GameKind::Binary => GameDef::Binary { k: r.k, function },
                GameKind::Compose => {
                    let poly = BipartitePolymatrix::coordination(r.n, r.n, actions, 0.5, r.seed).pad_even();
                    let composed = compose(&poly, r.lambda)?;
                    GameDef::Compose { polymatrix: poly, composed }
                }
                GameKind::Polymatrix => {
                    GameDef::Polymatrix { polymatrix: BipartitePolymatrix::random(r.n, r.n, actions.max(2), r.seed) }
                }
            };
            let g = def.succinct()?;
            println!("{} players, actions {:?}", g.players(), &g.action_counts()[..g.players().min(8)]);
            r.write("game.json", &def)?;
        }
        Cmd::Solve { method, instance, game } => match method {
            Method::FixedPoint => {
                let path = instance.ok_or_else(|| anyhow!("--instance is required"))?;
                let out = solve_fixed_point(&r, &read_json(&path)?)?;
                println!("residual {:e}", out.report.residual.unwrap());
            }
            Method::Ane => {
                let path = game.ok_or_else(|| anyhow!("--game is required"))?;
                let def: GameDef = read_json(&path)?;
                let eps = r.epsilon.unwrap_or(match &def {
                    GameDef::Compose { composed, .. } => composed.lambda * composed.lambda / 4.0,
                    _ => DEFAULT_EPSILON,
                });
                let s = support_enumeration_ane(&def.bimatrix()?, eps, &r.budget)?;
                let extra = match &def {
                    GameDef::Compose { polymatrix, composed } => {
                        let d = decompose_profile(polymatrix, composed, &s.profile.probs[0], &s.profile.probs[1])?;
                        let check = polymatrix.classify(&d, DEFAULT_EPS_POLY, r.delta.max(0.5))?;
                        let (ma, mb) =
                            composed.vertex_marginals(&s.profile.probs[0], &s.profile.probs[1], polymatrix.n_a(), polymatrix.n_b());
                        Some(serde_json::json!({
                            "kappa": s.kappa,
                            "cap": s.cap,
                            "decomposed": d,
                            "decomposed_weak_nash": check.weak_nash,
                            "tv_alice": tv_from_uniform(&ma),
                            "tv_bob": tv_from_uniform(&mb),
                        }))
                    }
                    _ => Some(serde_json::json!({ "kappa": s.kappa, "cap": s.cap })),
                };
                let out = SolveOutput {
                    report: s.to_report(r.seed),
                    method: "ane".into(),
                    epsilon: Some(eps),
                    classification: Some(s.report.clone()),
                    extra,
                };
                r.write("report.json", &out)?;
                println!("{eps}-ANE at support {}", s.kappa);
            }
            Method::Dynamics => {
                let path = game.ok_or_else(|| anyhow!("--game is required"))?;
                let def: GameDef = read_json(&path)?;
                let eps = r.epsilon.unwrap_or(DEFAULT_EPSILON);
                let d = regret_dynamics(&def.succinct()?, &r.budget, eps)?;
                let out = SolveOutput {
                    report: SolverReport {
                        profile: Some(d.best.clone()),
                        regrets: d.report.regrets.clone(),
                        residual: None,
                        queries: 0,
                        iterations: d.iterations,
                        seed: r.seed,
                    },
                    method: "dynamics".into(),
                    epsilon: Some(eps),
                    classification: Some(d.report.clone()),
                    extra: None,
                };
                r.write("report.json", &out)?;
                println!("max regret {:.3e}, {} above {eps}", d.report.max_regret, d.report.failing(eps));
            }
        },
        Cmd::Verify { game, report } => {
            let def: GameDef = read_json(&game)?;
            let solved: SolveOutput = read_json(&report)?;
            let profile: MixedProfile =
                solved.report.profile.clone().ok_or_else(|| anyhow!("report carries no profile"))?;
            let eps = r.epsilon.or(solved.epsilon).unwrap_or(DEFAULT_EPSILON);
            let check = classify_equilibrium(&def.succinct()?, &profile, eps, r.delta)?;
            let same = check.regrets.len() == solved.report.regrets.len()
                && check.regrets.iter().zip(&solved.report.regrets).all(|(a, b)| (a - b).abs() <= 1e-12);
            r.write("verify.json", &serde_json::json!({ "regrets_match": same, "report": check }))?;
            println!("max regret {:.3e}, weak nash {}, regrets match {same}", check.max_regret, check.weak_nash);
            if !same || !check.weak_nash {
                return Err(fail("recomputed regrets disagree or exceed epsilon"));
            }
        }
        Cmd::Audit { what, instance, samples, degree, t, bias } => audit(&r, what, instance, samples, (degree, t, bias))?,
        Cmd::Pipeline => {
            let inst = generate_path_instance(r.n, r.seed)?;
            let inst_path = r.write("eol.json", &inst)?;
            let summary = reduce_local(&r, &inst)?;
            r.write("local.json", &summary)?;
            let emb = embed(&inst, r.params)?;
            r.write("embedding.json", &EmbeddingOutput { export: emb.export()?, endpoints: emb.endpoints()? })?;
            let out = solve_fixed_point(&r, &read_json(&inst_path)?)?;
            let extra = out.extra.unwrap_or_default();
            println!("decoded {}", extra["located_solution"]);
            if !summary.matches {
                return Err(fail("local walk disagrees with brute force"));
            }
        }
    }
    Ok(())
}

fn audit(r: &Resolved, what: AuditKind, instance: Option<PathBuf>, samples: usize, bias_args: (u32, usize, f64)) -> Result<()> {
    let load = || -> Result<EolInstance> {
        match &instance {
            Some(p) => read_json(p),
            None => Ok(generate_path_instance(r.n, r.seed)?),
        }
    };
    let (value, ok) = match what {
        AuditKind::Locality => {
            let inst = load()?;
            let local = LocalEolInstance::reduce(&inst);
            let rep = local.locality_audit(&forward_walk(&local)?, samples, r.seed);
            println!("max hamming change {}, max dependency {}", rep.max_hamming_change, rep.max_dependency);
            let ok = rep.within_declared();
            (serde_json::to_value(rep)?, ok)
        }
        AuditKind::Code => {
            let code = LinearCode::preset(r.n)?;
            let (d, certified) = code.audit_distance(EXHAUSTIVE_MSG_BITS);
            println!("certified d = {d} (preset {})", code.min_distance());
            let ok = certified && d == code.min_distance();
            (
                serde_json::json!({
                    "n_msg": code.n_msg(),
                    "n_block": code.n_block(),
                    "preset_distance": code.min_distance(),
                    "audited_distance": d,
                    "certified": certified,
                }),
                ok,
            )
        }
        AuditKind::Bias => {
            let (degree, t, lambda) = bias_args;
            let field = GaloisField::new(degree)?;
            let set = sample_biased_set(&field, t, lambda, r.seed)?;
            let measured = bias(&field, t, &set.elements)?;
            println!("bias {measured:.4} (lambda {lambda}), size {}", set.elements.len());
            let ok = measured <= lambda;
            (serde_json::json!({ "lambda": lambda, "measured_bias": measured, "set": set }), ok)
        }
        AuditKind::Lipschitz => {
            let emb = embed(&load()?, r.params)?;
            let lip = emb.lipschitz_audit(samples, r.seed)?;
            let floor = emb.floor_audit(samples, r.seed)?;
            println!(
                "containment violations {}, max ratio {:.3e} (bound {:.3e}), floor {:.3}",
                lip.containment_violations, lip.max_ratio, lip.bound, floor.min_ratio
            );
            let ok = lip.containment_violations == 0
                && lip.violations == 0
                && lip.violations_hat == 0
                && floor.min_ratio >= floor.floor;
            (serde_json::json!({ "lipschitz": lip, "floor": floor }), ok)
        }
    };
    r.write("audit.json", &value)?;
    if !ok {
        return Err(fail("audit bound violated"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Verification>().is_some() {
                ExitCode::from(2)
            } else if matches!(e.downcast_ref::<ppad_toolkit::Error>(), Some(ppad_toolkit::Error::Budget(_))) {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
