use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Result};
use serde::Serialize;
use serde_json::{json, Value};

use compoundcap::capacity::{self, CapacityResult, Variant};
use compoundcap::codes;
use compoundcap::compound::{self, ClassicalParams, CodeParams, CompoundChannel, M1Spec};
use compoundcap::entropy::{self, EntropyValue};
use compoundcap::io::{self, matrix_to_json};
use compoundcap::qcore::{max_entangled, DensityOperator, PureState};
use compoundcap::{Error, SeedStream};

use crate::output::{emit, envelope, render};
use crate::{
    BoundsArgs, CapacityArgs, CodeArgs, DecoupleArgs, EntropyArgs, FeedbackArgs, OneshotArgs, OneshotMode, OutputArgs,
    VariantArg,
};

/// A run that produced output but did not reach its numerical target.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct NumericFailure(pub String);

fn parse_err(field: &str, message: impl Into<String>) -> anyhow::Error {
    Error::Parse { field: field.into(), message: message.into() }.into()
}

fn write(command: &str, config: &impl Serialize, result: Value, out: &OutputArgs) -> Result<()> {
    let doc = envelope(command, config, result)?;
    emit(&render(&doc, out.format)?, out.out.as_deref())
}

fn load_compound(path: &Path) -> Result<CompoundChannel> {
    let (chans, labels) = io::read_compound(path)?;
    Ok(CompoundChannel::with_labels(chans, labels)?)
}

fn capacity_json(r: &CapacityResult, labels: &[String]) -> Value {
    json!({
        "bits_per_use": r.bits_per_use,
        "classical_bits_per_use": 2.0 * r.bits_per_use,
        "gap": r.gap,
        "active_indices": r.active_indices,
        "active_labels": r.active_indices.iter().map(|&i| labels.get(i).cloned().unwrap_or_default()).collect::<Vec<_>>(),
        "iterations": r.iterations,
        "converged": r.converged,
        "note": r.note,
        "optimizer": matrix_to_json(r.optimizer.matrix()),
        "optimizer_spectrum": r.optimizer.eigenvalues(),
    })
}

pub fn capacity(a: &CapacityArgs) -> Result<()> {
    if !(a.tol > 0.0) {
        return Err(parse_err("tol", "must be positive"));
    }
    let (res, labels) = match (&a.channel, &a.compound) {
        (Some(c), None) => (capacity::qe_single(&io::read_channel(c)?, a.tol)?, vec!["0".to_string()]),
        (None, Some(p)) => {
            let pi = load_compound(p)?;
            let v = match a.variant {
                VariantArg::Uninformed => Variant::Uninformed,
                VariantArg::InformedReceiver => Variant::InformedReceiver,
                VariantArg::InformedSender => Variant::InformedSender,
                VariantArg::Feedback => Variant::Feedback,
            };
            (capacity::quantum_capacity(v, &pi, a.tol)?, pi.labels().to_vec())
        }
        _ => return Err(parse_err("channel", "exactly one of --channel or --compound is required")),
    };
    write("capacity", a, capacity_json(&res, &labels), &a.output)?;
    if !res.converged {
        return Err(NumericFailure(format!("iteration limit reached with gap {:.3e}", res.gap)).into());
    }
    Ok(())
}

/// (A, B) view of a state: A is the first subsystem, B the rest.
fn bipartite(rho: DensityOperator) -> Result<DensityOperator> {
    let dims = rho.dims().to_vec();
    let d_a = dims[0];
    Ok(rho.relayout(vec![d_a, rho.dim() / d_a])?)
}

fn entropy_json(v: &EntropyValue) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

pub fn entropy(a: &EntropyArgs) -> Result<()> {
    if !(a.tol > 0.0) {
        return Err(parse_err("tol", "must be positive"));
    }
    let rho = bipartite(io::read_state(&a.state)?.to_density()?)?;
    let all = !(a.hmin || a.hmax || a.h2 || a.vn);
    let mut out = serde_json::Map::new();
    out.insert("dims".into(), json!(rho.dims()));
    if all || a.hmin {
        let v = if a.eps > 0.0 { entropy::smooth_h_min_tol(&rho, a.eps, a.tol)? } else { entropy::h_min_tol(&rho, a.tol)? };
        out.insert("h_min".into(), entropy_json(&v)?);
    }
    if all || a.hmax {
        let v = if a.eps > 0.0 { entropy::smooth_h_max(&rho, a.eps)? } else { entropy::h_max(&rho)? };
        out.insert("h_max".into(), entropy_json(&v)?);
    }
    if all || a.h2 {
        out.insert("h2".into(), entropy_json(&entropy::collision_entropy(&rho, None)?)?);
    }
    if all || a.vn {
        out.insert("h".into(), json!({ "bits": entropy::cond_entropy(&rho, &[0], &[1])? }));
    }
    write("entropy", a, Value::Object(out), &a.output)
}

struct CodeInputs {
    pi: CompoundChannel,
    states: Vec<PureState>,
    m1: Vec<usize>,
    seed: u64,
}

fn code_inputs(c: &CodeArgs) -> Result<CodeInputs> {
    let seed = c.seed.ok_or_else(|| parse_err("seed", "required for stochastic commands"))?;
    let pi = load_compound(&c.compound)?;
    let state = match &c.state {
        Some(p) => io::read_state(p)?.to_pure()?,
        None => max_entangled(pi.d_in())?,
    };
    let m1 = match c.m1.len() {
        1 => vec![c.m1[0]; pi.len()],
        k if k == pi.len() => c.m1.clone(),
        k => return Err(parse_err("m1", format!("{k} values for {} members", pi.len()))),
    };
    Ok(CodeInputs { states: vec![state; pi.len()], pi, m1, seed })
}

pub fn decouple(a: &DecoupleArgs) -> Result<()> {
    let c = code_inputs(&a.code)?;
    let spec = codes::IsEncoderSpec::sample(c.states, a.code.m0, c.m1, &SeedStream::new(c.seed))?;
    let report = codes::mc_decoupling_l5(&c.pi, &spec, a.samples, c.seed)?;
    write("decouple", a, serde_json::to_value(&report)?, &a.output)
}

pub fn oneshot(a: &OneshotArgs) -> Result<()> {
    let c = code_inputs(&a.code)?;
    let (m0, eps) = (a.code.m0, a.code.eps);
    let report = match a.mode {
        OneshotMode::Uninformed => {
            if a.code.m1.len() != 1 {
                return Err(parse_err("m1", "the uninformed code takes a single M1"));
            }
            codes::run_one_shot_uninformed(&c.pi, &c.states[0], m0, c.m1[0], eps, c.seed)?
        }
        OneshotMode::Is => codes::run_one_shot_is(&c.pi, &c.states, m0, &c.m1, eps, c.seed)?,
        OneshotMode::Plain => codes::plain_is_experiment(&c.pi, &c.states, m0, eps, c.seed)?,
    };
    write("oneshot", a, serde_json::to_value(&report)?, &a.output)
}

pub fn feedback(a: &FeedbackArgs) -> Result<()> {
    if a.code.state.is_some() {
        return Err(parse_err("state", "the feedback protocol uses Φ⁺ inputs"));
    }
    let c = code_inputs(&a.code)?;
    let m1 = M1Spec::PerIndex(c.m1.iter().map(|&v| v as u64).collect());
    let params = CodeParams::new(a.code.m0 as u64, m1, a.n, a.code.eps, 0.0)?;
    let tr = codes::feedback_protocol_sim(&c.pi, a.n, &params, a.block, a.samples, c.seed)?;
    write("feedback", a, serde_json::to_value(&tr)?, &a.output)
}

struct Kv<'a> {
    flag: &'static str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Kv<'a> {
    fn parse(flag: &'static str, items: &'a [String], allowed: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for it in items {
            let (k, v) = it.split_once('=').ok_or_else(|| parse_err(flag, format!("`{it}` is not KEY=VALUE")))?;
            if !allowed.contains(&k) {
                return Err(parse_err(flag, format!("unknown key `{k}`; expected one of {allowed:?}")));
            }
            map.insert(k, v);
        }
        Ok(Kv { flag, map })
    }

    fn has(&self, k: &str) -> bool {
        self.map.contains_key(k)
    }

    fn get<T: std::str::FromStr>(&self, k: &str) -> Result<T> {
        let v = self.map.get(k).ok_or_else(|| parse_err(&format!("{}.{k}", self.flag), "missing"))?;
        v.parse().map_err(|_| parse_err(&format!("{}.{k}", self.flag), format!("cannot parse `{v}`")))
    }
}

pub fn bounds(a: &BoundsArgs) -> Result<()> {
    let mut out = serde_json::Map::new();
    let channel = || -> Result<_> {
        let p = a.channel.as_ref().ok_or_else(|| parse_err("channel", "required for this bound"))?;
        Ok(io::read_channel(p)?)
    };
    if let Some(items) = &a.net {
        let kv = Kv::parse("net", items, &["nu", "dab", "n"])?;
        let dab: usize = kv.get("dab")?;
        let v = if kv.has("n") {
            serde_json::to_value(compound::net_cardinality_bound_n(kv.get("n")?, dab)?)?
        } else {
            json!({ "log2_cardinality": compound::net_cardinality_bound(kv.get("nu")?, dab)? })
        };
        out.insert("net".into(), v);
    }
    if let Some(items) = &a.continuity {
        let kv = Kv::parse("continuity", items, &["eps", "q", "da"])?;
        let eps: f64 = kv.get("eps")?;
        let v = if kv.has("q") {
            capacity::continuity_rate_from(kv.get("q")?, eps, kv.get("da")?)?
        } else {
            capacity::continuity_rate(&channel()?, eps, a.tol)?
        };
        out.insert("continuity".into(), json!({ "rate": v }));
    }
    if let Some(items) = &a.converse {
        let kv = Kv::parse("converse", items, &["delta"])?;
        let n = a.n.ok_or_else(|| parse_err("n", "required for the converse bound"))?;
        let v = capacity::converse_bound(&channel()?, n, kv.get("delta")?, a.tol)?;
        out.insert("converse".into(), json!({ "rate": v }));
    }
    if let Some(items) = &a.union {
        let kv = Kv::parse("union", items, &["fidelity", "members"])?;
        let v = compound::union_bound_transfer(kv.get("fidelity")?, kv.get("members")?)?;
        out.insert("union".into(), json!({ "fidelity": v }));
    }
    if let Some(items) = &a.aep {
        let kv = Kv::parse("aep", items, &["eps", "da"])?;
        let n = a.n.ok_or_else(|| parse_err("n", "required for the AEP penalty"))?;
        let d = entropy::aep_delta(kv.get("eps")?, kv.get("da")?, n)?;
        out.insert(
            "aep".into(),
            json!({ "delta": d.value, "per_use": d.value / (n as f64).sqrt(), "precondition_met": d.precondition_met }),
        );
    }
    if let Some(items) = &a.superdense {
        let kv = Kv::parse("superdense", items, &["m0", "m1", "fidelity"])?;
        let c = compound::superdense_convert(kv.get("m0")?, kv.get("m1")?, kv.get("fidelity")?)?;
        out.insert("superdense".into(), serde_json::to_value(c)?);
    }
    if let Some(items) = &a.teleport {
        let kv = Kv::parse("teleport", items, &["messages", "m1", "success"])?;
        let c = ClassicalParams { messages: kv.get("messages")?, m1: kv.get("m1")? };
        out.insert("teleport".into(), serde_json::to_value(compound::teleport_convert(c, kv.get("success")?)?)?);
    }
    if let Some(items) = &a.fannes {
        let kv = Kv::parse("fannes", items, &["t", "da", "db"])?;
        let (t, da): (f64, usize) = (kv.get("t")?, kv.get("da")?);
        let mut v = json!({ "conditional": entropy::fannes_cond(t, da)? });
        if kv.has("db") {
            v["mutual_info"] = json!(entropy::fannes_mi(t, da, kv.get("db")?)?);
        }
        out.insert("fannes".into(), v);
    }
    if out.is_empty() {
        return Err(anyhow!(Error::InvalidParameter("no bound requested".into())));
    }
    write("bounds", a, Value::Object(out), &a.output)
}
