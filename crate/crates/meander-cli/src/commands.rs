//! Subcommand execution.

use std::io::Write;

use log::info;
use meander_core::asymptotics::{catalog, check_range, evaluate_regime, format_ln, AsymError, Params};
use meander_core::correlators::{correlator, sum_two_correlators, CorrelatorError};
use meander_core::exactval::{format_rational, PiValue, Rational};
use meander_core::meanderconst::{
    abelian_constants, constants, dimension, sep_nonsep_limit, sep_nonsep_ratio, volume, ConstError, VolumeTable,
};
use meander_core::oracle::{
    count_oriented_meanders, enumerate_abelian_one_band, enumerate_quadratic_band, sample_quadratic_band, Budget,
    OracleError, SurfaceClass,
};
use serde_json::Value;

use crate::output::{field, Record, Report};
use crate::{AsymAction, AsymArgs, Cli, Command, Counting, Global, OracleCommand, TableName};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_MATH: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Const(#[from] ConstError),
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Asym(#[from] AsymError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Usage errors, resource errors (budgets, missing inputs, I/O) and
    /// mathematical errors (out-of-domain parameters) exit differently.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Oracle(OracleError::Budget { .. }) => EXIT_RESOURCE,
            CliError::Const(e) => const_code(e),
            CliError::Asym(e) => match e {
                AsymError::UnknownForm(_) | AsymError::MissingParam(_) | AsymError::BadParam { .. } => EXIT_USAGE,
                AsymError::Const(c) => const_code(c),
                _ => EXIT_MATH,
            },
            CliError::Correlator(_) | CliError::Oracle(_) => EXIT_MATH,
        }
    }
}

fn const_code(e: &ConstError) -> u8 {
    match e {
        ConstError::VolumeUnavailable(_) | ConstError::Io(_) => EXIT_RESOURCE,
        ConstError::Table { .. } => EXIT_USAGE,
        ConstError::Domain { .. } | ConstError::Graph(_) | ConstError::Correlator(_) | ConstError::Exact(_) => {
            EXIT_MATH
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    info!("seed = {}", g.seed);
    let report = dispatch(&cli.command, g)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    report.write(g.format(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn budget(g: &Global) -> Result<Budget> {
    let mut b = Budget::default();
    if let Some(k) = g.budget_max_squares {
        b.max_squares = k;
    }
    if let Some(w) = g.budget_max_width {
        b.max_width = w;
    }
    if b.max_squares == 0 || b.max_width == 0 {
        return Err(CliError::Usage("budgets must be positive".into()));
    }
    Ok(b)
}

fn exact(v: &PiValue) -> Value {
    v.to_string().into()
}

fn rational(r: &Rational) -> Value {
    format_rational(r).into()
}

fn dispatch(cmd: &Command, g: &Global) -> Result<Report> {
    let seed = g.seed;
    let d = g.digits;
    Ok(match cmd {
        Command::Correlator { genus, indices } => {
            let v = correlator(*genus, indices)?;
            let idx: Vec<String> = indices.iter().map(u32::to_string).collect();
            Report::one(
                "correlator",
                seed,
                vec![field("genus", *genus), field("indices", idx.join(" ")), field("value", rational(&v))],
            )
            .with_primary("value")
        }
        Command::Volume { genus, bigons } => {
            let v = volume(*genus, *bigons)?;
            Report::one(
                "volume",
                seed,
                vec![
                    field("genus", *genus),
                    field("bigons", *bigons),
                    field("dimension", dimension(*genus, *bigons)),
                    field("volume", exact(&v)),
                    field("volume_decimal", v.to_decimal(d)),
                ],
            )
        }
        Command::Constants { genus, bigons } => {
            let c = constants(*genus, *bigons)?;
            Report::one(
                "constants",
                seed,
                vec![
                    field("genus", c.g),
                    field("bigons", c.n),
                    field("dimension", dimension(c.g, c.n)),
                    field("vol", exact(&c.vol)),
                    field("vol_decimal", c.vol.to_decimal(d)),
                    field("cyl1", rational(&c.cyl1)),
                    field("cyl11", exact(&c.cyl11)),
                    field("c1", exact(&c.c1)),
                    field("p1", exact(&c.p1)),
                    field("p1_decimal", c.p1.to_decimal(d)),
                    field("c_gn", exact(&c.c_gn)),
                    field("c_gn_scientific", format_ln(c.c_gn.ln_abs(), d)),
                ],
            )
        }
        Command::Abelian { genus } => {
            let table = g.volume_table.as_deref().map(VolumeTable::load).transpose()?;
            let c = abelian_constants(*genus, table.as_ref())?;
            Report::one(
                "abelian",
                seed,
                vec![
                    field("genus", c.g),
                    field("vol_h", exact(&c.vol_h)),
                    field("cyl1_h", rational(&c.cyl1_h)),
                    field("cyl11_h", exact(&c.cyl11_h)),
                    field("p1_h", exact(&c.p1_h)),
                    field("p1_h_decimal", c.p1_h.to_decimal(d)),
                    field("c_g_plus", exact(&c.c_g_plus)),
                    field("c_g_plus_scientific", format_ln(c.c_g_plus.ln_abs(), d)),
                ],
            )
        }
        Command::RatioSepNonsep { genus, bigons } => {
            let (r, n) = match bigons {
                Some(n) => (sep_nonsep_ratio(*genus, *n)?, Value::from(*n)),
                None => (sep_nonsep_limit(*genus)?, Value::from("inf")),
            };
            Report::one(
                "ratio-sep-nonsep",
                seed,
                vec![
                    field("genus", *genus),
                    field("bigons", n),
                    field("ratio", rational(&r)),
                    field("ratio_decimal", PiValue::rational(r).to_decimal(d)),
                ],
            )
            .with_primary("ratio")
        }
        Command::Oracle(o) => oracle(o, g)?,
        Command::Asym(a) => asym(a, g)?,
        Command::Tables { table } => tables(*table, g)?,
    })
}

fn class_fields(c: &SurfaceClass, squares: usize) -> Record {
    let mu: Vec<String> = c.mu.iter().map(u32::to_string).collect();
    vec![
        field("genus", c.genus),
        field("bigons", c.n_bigons),
        field("mu", mu.join(" ")),
        field("single_h", c.single_h),
        field("single_v", c.single_v),
        field("squares", squares),
    ]
}

fn oracle(cmd: &OracleCommand, g: &Global) -> Result<Report> {
    let b = budget(g)?;
    let seed = g.seed;
    match cmd {
        OracleCommand::Abelian { max_squares, counting } => {
            if *max_squares > b.max_squares {
                return Err(OracleError::Budget {
                    param: "max_squares",
                    requested: *max_squares as u64,
                    limit: b.max_squares as u64,
                }
                .into());
            }
            let mut rows = Vec::new();
            for k in 1..=*max_squares {
                info!("enumerating origamis with {k} squares");
                for (c, n) in enumerate_abelian_one_band(k, &b)? {
                    let count = match counting {
                        Counting::Raw => n.raw,
                        Counting::Unlabeled => n.unlabeled,
                        Counting::Labeled => n.labeled,
                    };
                    let mut r = class_fields(&c, k);
                    r.push(field("count", count));
                    rows.push(r);
                }
            }
            Ok(Report::many("oracle abelian", seed, rows))
        }
        OracleCommand::Quadratic { max_width, sample, confidence } => {
            let mut rows = Vec::new();
            match sample {
                None => {
                    if *max_width > b.max_width {
                        return Err(OracleError::Budget {
                            param: "max_width",
                            requested: *max_width as u64,
                            limit: b.max_width as u64,
                        }
                        .into());
                    }
                    for w in 1..=*max_width {
                        info!("enumerating band pairings of width {w}");
                        for (c, n) in enumerate_quadratic_band(w, &b)? {
                            let mut r = class_fields(&c, w);
                            r.push(field("count", n));
                            rows.push(r);
                        }
                    }
                }
                Some(s) => {
                    for w in 1..=*max_width {
                        let wseed = seed.wrapping_add(w as u64);
                        info!("sampling {s} pairings of width {w} with seed {wseed}");
                        for (c, e) in sample_quadratic_band(w, *s, wseed, *confidence)? {
                            let mut r = class_fields(&c, w);
                            r.extend([
                                field("count", e.count),
                                field("ci_low", e.ci_low),
                                field("ci_high", e.ci_high),
                                field("hits", e.hits),
                                field("samples", e.samples),
                            ]);
                            rows.push(r);
                        }
                    }
                }
            }
            Ok(Report::many("oracle quadratic", seed, rows))
        }
        OracleCommand::Oriented { crossings, genus } => {
            let n = count_oriented_meanders(*crossings, *genus, &b)?;
            Ok(Report::one(
                "oracle oriented",
                seed,
                vec![field("crossings", *crossings), field("genus", *genus), field("count", n)],
            )
            .with_primary("count"))
        }
    }
}

/// Inclusive range `a..b`, `a..=b` or `a-b`.
fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let bad = || CliError::Usage(format!("bad range `{s}`; expected a..b"));
    let (a, b) = s.split_once("..=").or_else(|| s.split_once("..")).or_else(|| s.split_once('-')).ok_or_else(bad)?;
    let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn asym(a: &AsymArgs, g: &Global) -> Result<Report> {
    let seed = g.seed;
    let d = g.digits;
    match (&a.action, &a.name) {
        (Some(AsymAction::List), _) => Ok(Report::many(
            "asym list",
            seed,
            catalog()
                .iter()
                .map(|f| {
                    vec![
                        field("name", f.name),
                        field("regime", f.regime.to_string()),
                        field("params", f.params.join(",")),
                        field("description", f.description),
                    ]
                })
                .collect(),
        )),
        (Some(AsymAction::Check { name, range, var, params }), _) => {
            let form = evaluate_regime(name)?;
            let var = form
                .params
                .iter()
                .find(|p| **p == var.as_str())
                .ok_or_else(|| CliError::Usage(format!("`{name}` has no parameter `{var}`")))?;
            let rows = check_range(form, &Params::parse(params)?, var, parse_range(range)?)?;
            Ok(Report::many(
                "asym check",
                seed,
                rows.iter()
                    .map(|r| {
                        vec![
                            field(var, r.param),
                            field("exact", format_ln(r.ln_exact, d)),
                            field("asymptotic", format_ln(r.ln_asymptotic, d)),
                            field("ratio", r.ratio),
                        ]
                    })
                    .collect(),
            ))
        }
        (None, Some(name)) => {
            let form = evaluate_regime(name)?;
            let p = Params::parse(&a.params)?;
            let ln = form.ln_eval(&p)?;
            Ok(Report::one(
                "asym",
                seed,
                vec![
                    field("name", form.name),
                    field("regime", form.regime.to_string()),
                    field("params", a.params.clone()),
                    field("ln_value", ln),
                    field("value", format_ln(ln, d)),
                ],
            ))
        }
        (None, None) => Err(CliError::Usage("asym needs a form name, `list` or `check`".into())),
    }
}

fn tables(t: TableName, g: &Global) -> Result<Report> {
    let seed = g.seed;
    Ok(match t {
        TableName::SepNonsep => Report::many(
            "tables sep-nonsep",
            seed,
            (1..=9)
                .map(|genus| Ok(vec![field("g", genus), field("limit", rational(&sep_nonsep_limit(genus)?))]))
                .collect::<Result<_>>()?,
        ),
        TableName::TwoCorrelators => Report::many(
            "tables two-correlators",
            seed,
            (1..=7)
                .map(|genus| Ok(vec![field("g", genus), field("sum", rational(&sum_two_correlators(genus)?))]))
                .collect::<Result<_>>()?,
        ),
        TableName::ProbabilityExample => {
            let c = constants(2, 2)?;
            Report::one(
                "tables probability-example",
                seed,
                vec![
                    field("vol_q22", exact(&c.vol)),
                    field("cyl1_q22", rational(&c.cyl1)),
                    field("p22", exact(&c.p1)),
                    field("p22_decimal", c.p1.to_decimal(6)),
                ],
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use meander_core::stablegraphs::GraphError;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10..40").unwrap(), 10..=40);
        assert_eq!(parse_range("3..=5").unwrap(), 3..=5);
        assert_eq!(parse_range("2-4").unwrap(), 2..=4);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        let budget = OracleError::Budget { param: "max_width", requested: 20, limit: 10 };
        assert_eq!(CliError::from(budget).exit_code(), EXIT_RESOURCE);
        assert_eq!(CliError::from(ConstError::VolumeUnavailable(3)).exit_code(), EXIT_RESOURCE);
        assert_eq!(CliError::from(ConstError::Domain { g: 0, n: 1 }).exit_code(), EXIT_MATH);
        assert_eq!(CliError::from(AsymError::UnknownForm("x".into())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(ConstError::Graph(GraphError::Unstable { g: 0, n: 2 })).exit_code(), EXIT_MATH);
    }
}
