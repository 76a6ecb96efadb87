//! `randworlds scenario`: build a scenario's KBs and run its analyzer.

use std::path::Path;

use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{read_input, to_json, Failure, Outcome, Report, ScenarioKind};
use randworlds::inference::{resolve, resolve_interval, Justification};
use randworlds::scalar::{format_rational, parse_rational, serde_rational};
use randworlds::scenarios::*;
use randworlds::{ExactIrrConfig, ExactNafConfig, ExactOutcomeModel, Rational};

pub(crate) fn run(
    kind: ScenarioKind,
    config: Option<&Path>,
    check: bool,
    affine_slope: Option<&str>,
    csv: bool,
    manifest: &mut RunManifest,
) -> Outcome {
    let mut load = |what: &str| -> Result<String, Failure> {
        let path = config
            .ok_or_else(|| Failure::new(Failure::PARSE, format!("{what} needs a JSON config")))?;
        read_input(path, manifest)
    };
    let (text, holds) = match kind {
        ScenarioKind::Mistress => {
            if config.is_some() {
                return Err(Failure::new(Failure::PARSE, "mistress takes no config"));
            }
            mistress(manifest, csv)?
        }
        ScenarioKind::Irr => {
            let cfg: ExactIrrConfig = serde_json::from_str(&load("irr")?)?;
            irr(&cfg, manifest, csv)?
        }
        ScenarioKind::Naf => {
            let cfg: ExactNafConfig = serde_json::from_str(&load("naf")?)?;
            cfg.validate()
                .map_err(|e| Failure::new(Failure::VALIDATION, e))?;
            naf(&cfg, manifest, csv)?
        }
        ScenarioKind::NafAudit => {
            let model: ExactOutcomeModel = serde_json::from_str(&load("naf-audit")?)?;
            let spec = match affine_slope {
                Some(s) => GammaSpec::Affine {
                    slope: parse_rational(s)
                        .map_err(|e| Failure::new(Failure::PARSE, format!("slope: {e}")))?,
                },
                None => GammaSpec::Exp,
            };
            audit(&model, &spec, manifest, csv)?
        }
    };
    let code = if check && !holds {
        Failure::COUNTEREXAMPLE
    } else {
        0
    };
    Ok(Report { text, code })
}

fn scenario_err(e: ScenarioError) -> Failure {
    Failure::new(Failure::VALIDATION, e)
}

fn csv_out(manifest: &RunManifest, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    manifest.csv_preamble() + &String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Serialize)]
struct VariantRow {
    variant: MistressVariant,
    value: String,
    justification: Justification,
}

/// Resolver value per variant. The check: the extra statistics of the
/// extended KB leave Jane's belief where the most specific class put it.
fn mistress(manifest: &RunManifest, csv: bool) -> Result<(String, bool), Failure> {
    let mut rows = Vec::new();
    for v in MistressVariant::ALL {
        let r = resolve(&build_mistress_kb(v), &mistress_query())?;
        rows.push(VariantRow {
            variant: v,
            value: r.value.to_string(),
            justification: r.justification,
        });
    }
    let holds = rows[0].value == rows[1].value;

    #[derive(Serialize)]
    struct Body {
        variants: Vec<VariantRow>,
        specificity_holds: bool,
    }
    let text = if csv {
        let table = rows
            .iter()
            .map(|r| vec![tag(&r.variant), r.value.clone(), tag(&r.justification)])
            .collect();
        csv_out(manifest, &["variant", "value", "justification"], table)
    } else {
        to_json(
            manifest,
            Body {
                variants: rows,
                specificity_holds: holds,
            },
        )
    };
    Ok((text, holds))
}

fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .expect("tag")
        .as_str()
        .unwrap_or_default()
        .to_string()
}

/// Minimum-index tables and the inverse ratio rule check.
fn irr(cfg: &ExactIrrConfig, manifest: &RunManifest, csv: bool) -> Result<(String, bool), Failure> {
    let report = check_prop1(cfg);
    let holds = report.holds();
    if csv {
        return Ok((manifest.csv_preamble() + &report.to_csv(), holds));
    }
    let beliefs = (1..=cfg.n())
        .map(|i| {
            (1..=cfg.m())
                .map(|j| irr_belief(cfg, i, j).map(|b| format_rational(&b)))
                .collect()
        })
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(scenario_err)?;

    #[derive(Serialize)]
    struct Body<'a> {
        #[serde(with = "serde_rational")]
        lambda: Rational,
        /// `beliefs[i-1][j-1] = alpha_i * beta_ij`.
        beliefs: Vec<Vec<String>>,
        report: &'a Prop1Report,
    }
    Ok((
        to_json(
            manifest,
            Body {
                lambda: cfg.lambda().clone(),
                beliefs,
                report: &report,
            },
        ),
        holds,
    ))
}

#[derive(Serialize)]
struct NafLevel {
    level: usize,
    #[serde(with = "serde_rational")]
    alpha_prime: Rational,
    /// Direct-inference interval for access at this level.
    access: String,
    /// Upper bound on the belief in copying: `alpha'_i * Gamma`.
    #[serde(with = "serde_rational")]
    copy_bound: Rational,
}

/// Per-level bounds, and the bound properties of Gamma on a grid around
/// the configured point.
fn naf(cfg: &ExactNafConfig, manifest: &RunManifest, csv: bool) -> Result<(String, bool), Failure> {
    let n = cfg.n();
    let mut levels = Vec::new();
    for i in 1..=n {
        let kb = build_naf_case(cfg, i).map_err(scenario_err)?;
        let access = resolve_interval(
            &kb,
            &randworlds::kb::Query::new(DEFENDANT, naf_roles(n, i).theta),
            &naf_roles(n, i),
        )?;
        levels.push(NafLevel {
            level: i,
            alpha_prime: cfg.alpha_primes[i - 1].clone(),
            access: access.value.to_string(),
            copy_bound: naf_copy_bound(cfg, i).map_err(scenario_err)?,
        });
    }

    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let mut epsilons = Vec::new();
    let mut deltas = Vec::new();
    let scales = [r(1, 4), r(1, 2), r(1, 1), r(2, 1), r(4, 1)];
    let mut delta_grid = vec![
        r(0, 1),
        r(1, 4),
        r(1, 2),
        r(3, 4),
        r(1, 1),
        cfg.delta.clone(),
    ];
    delta_grid.sort();
    delta_grid.dedup();
    for s in &scales {
        for d in &delta_grid {
            epsilons.push(&cfg.epsilon * s);
            deltas.push(d.clone());
        }
    }
    let prop2 = check_prop2(&Prop2Input {
        epsilons,
        deltas,
        alpha_primes: cfg.alpha_primes.clone(),
        gamma_spec: cfg.gamma_spec.clone(),
    });
    let holds = prop2.holds();

    let text = if csv {
        let rows = levels
            .iter()
            .map(|l| {
                vec![
                    l.level.to_string(),
                    format_rational(&l.alpha_prime),
                    l.access.clone(),
                    format_rational(&l.copy_bound),
                ]
            })
            .collect();
        csv_out(
            manifest,
            &["level", "alpha_prime", "access", "copy_bound"],
            rows,
        )
    } else {
        #[derive(Serialize)]
        struct Body<'a> {
            #[serde(with = "serde_rational")]
            gamma: Rational,
            levels: Vec<NafLevel>,
            prop2: &'a Prop2Report,
        }
        to_json(
            manifest,
            Body {
                gamma: cfg.gamma(),
                levels,
                prop2: &prop2,
            },
        )
    };
    Ok((text, holds))
}

fn audit(
    model: &ExactOutcomeModel,
    spec: &GammaSpec,
    manifest: &RunManifest,
    csv: bool,
) -> Result<(String, bool), Failure> {
    let report = naf_audit(model, spec).map_err(scenario_err)?;
    let holds = report.all_within_ceiling;
    let text = if csv {
        manifest.csv_preamble() + &report.to_csv()
    } else {
        #[derive(Serialize)]
        struct Body<'a> {
            report: &'a AuditReport,
        }
        to_json(manifest, Body { report: &report })
    };
    Ok((text, holds))
}
