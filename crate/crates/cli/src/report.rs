//! Report assembly: JSON documents under the `ppcd-stab/1` schema and the
//! human-readable rendering of verdicts and witnesses.

use ppcd_core::wdtmc::{Decision, Sign, Verdict, Wdtmc, Witness};
use serde_json::{json, Value};
use std::cmp::Ordering;

pub const SCHEMA: &str = "ppcd-stab/1";

pub fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Convergent => "convergent",
        Decision::NotConvergent => "not_convergent",
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Neg => "neg",
        Sign::Zero => "zero",
        Sign::Pos => "pos",
    }
}

fn cmp_str(c: Ordering) -> &'static str {
    match c {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

pub fn witness_json(chain: &Wdtmc, witness: &Witness) -> Value {
    match witness {
        Witness::None => Value::Null,
        Witness::InfiniteEdge { src, dst } => json!({
            "type": "infinite_edge",
            "src": chain.state_name(*src),
            "dst": chain.state_name(*dst),
        }),
        Witness::PositiveCycle(path) => json!({
            "type": "positive_cycle",
            "cycle": path.states().iter()
                .map(|&s| chain.state_name(s).to_string())
                .collect::<Vec<_>>(),
        }),
        Witness::EffectiveWeight {
            sign,
            cmp,
            float_log,
        } => json!({
            "type": "effective_weight",
            "sign": sign_str(*sign),
            "cmp": cmp_str(*cmp),
            "float_log": float_log,
        }),
    }
}

pub fn verdict_json(chain: &Wdtmc, v: &Verdict) -> Value {
    json!({
        "decision": decision_str(v.decision),
        "witness": witness_json(chain, &v.witness),
    })
}

/// The float log of the effective weight, when the verdict carries one.
pub fn effective_log(v: &Verdict) -> Option<f64> {
    match &v.witness {
        Witness::EffectiveWeight { float_log, .. } => Some(*float_log),
        _ => None,
    }
}

pub fn human_verdict(chain: &Wdtmc, v: &Verdict) -> String {
    let head = match v.decision {
        Decision::Convergent => "Convergent",
        Decision::NotConvergent => "NotConvergent",
    };
    match &v.witness {
        Witness::None => head.to_string(),
        Witness::InfiniteEdge { src, dst } => format!(
            "{head} — infinite edge {} -> {}",
            chain.state_name(*src),
            chain.state_name(*dst)
        ),
        Witness::PositiveCycle(path) => {
            let names: Vec<&str> = path
                .states()
                .iter()
                .take(8)
                .map(|&s| chain.state_name(s))
                .collect();
            let ellipsis = if path.states().len() > 8 {
                format!(" … ({} states)", path.states().len())
            } else {
                String::new()
            };
            format!("{head} — positive cycle: {}{ellipsis}", names.join(" -> "))
        }
        Witness::EffectiveWeight {
            sign, float_log, ..
        } => format!(
            "{head} — effective weight sign {}, log {float_log:.6}",
            sign_str(*sign)
        ),
    }
}

/// Exit code partition: 0 both convergent, 10 only absolute fails,
/// 20 only almost-sure fails, 30 both fail.
pub fn exit_code(absolute: Decision, almost_sure: Decision) -> i32 {
    match (absolute, almost_sure) {
        (Decision::Convergent, Decision::Convergent) => 0,
        (Decision::NotConvergent, Decision::Convergent) => 10,
        (Decision::Convergent, Decision::NotConvergent) => 20,
        (Decision::NotConvergent, Decision::NotConvergent) => 30,
    }
}
