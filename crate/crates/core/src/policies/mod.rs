//! Online scheduling policies. Each one is a pure function of the
//! [`DecisionContext`]: pending counts, `rel(t)` and whether a phase is open.
//! Policies never see the speed, the faults or the future.

use std::fmt;
use std::str::FromStr;

use crate::model::SizeCatalog;
use crate::numeric::GoldenNumber;

/// Everything a policy may look at when the channel is free.
#[derive(Clone, Copy, Debug)]
pub struct DecisionContext<'a> {
    pub catalog: &'a SizeCatalog,
    /// Pending packets per size; running packets are not pending.
    pub pending: &'a [u64],
    /// Size transmitted since the phase start; zero outside a phase.
    pub rel: &'a GoldenNumber,
    /// `true` when no phase is open, i.e. Step (2) applies.
    pub at_phase_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Step (2): open a phase with a packet of this size.
    StartPhaseWith(usize),
    /// Step (3): next packet inside the current phase.
    Continue(usize),
    /// Step (4): close the phase.
    EndPhase,
    /// Step (1): nothing to send until the next release.
    Idle,
}

pub trait Policy {
    fn name(&self) -> &str;

    fn decide(&self, ctx: &DecisionContext<'_>) -> Decision;

    /// A note attached to the trace when the policy is run on a catalog it
    /// was not designed for.
    fn catalog_warning(&self, _catalog: &SizeCatalog) -> Option<String> {
        None
    }
}

/// `P^{<i}` for every `i`: total pending size strictly below each index.
fn pending_below(ctx: &DecisionContext<'_>) -> Vec<GoldenNumber> {
    let mut acc = GoldenNumber::zero();
    let mut out = Vec::with_capacity(ctx.pending.len());
    for (j, &c) in ctx.pending.iter().enumerate() {
        out.push(acc.clone());
        if c > 0 {
            acc = &acc + &ctx.catalog.size(j).mul_int(c as i64);
        }
    }
    out
}

/// Step (2): the largest pending size exceeding the total pending size
/// below it.
fn start_phase(ctx: &DecisionContext<'_>) -> Decision {
    let below = pending_below(ctx);
    (0..ctx.pending.len())
        .rev()
        .find(|&i| ctx.pending[i] > 0 && below[i] < *ctx.catalog.size(i))
        .map_or(Decision::Idle, Decision::StartPhaseWith)
}

pub fn main_select(ctx: &DecisionContext<'_>) -> Decision {
    if ctx.at_phase_boundary {
        return start_phase(ctx);
    }
    (0..ctx.pending.len())
        .rev()
        .find(|&i| ctx.pending[i] > 0 && ctx.catalog.size(i) <= ctx.rel)
        .map_or(Decision::EndPhase, Decision::Continue)
}

pub fn div_select(ctx: &DecisionContext<'_>) -> Decision {
    if ctx.at_phase_boundary {
        return start_phase(ctx);
    }
    (0..ctx.pending.len())
        .rev()
        .find(|&i| {
            let size = ctx.catalog.size(i);
            ctx.pending[i] > 0 && size <= ctx.rel && ctx.rel.is_multiple_of(size)
        })
        .map_or(Decision::EndPhase, Decision::Continue)
}

pub fn greedy_baseline_select(ctx: &DecisionContext<'_>) -> Decision {
    match (0..ctx.pending.len()).rev().find(|&i| ctx.pending[i] > 0) {
        None => Decision::Idle,
        Some(i) if ctx.at_phase_boundary => Decision::StartPhaseWith(i),
        Some(i) => Decision::Continue(i),
    }
}

/// The built-in policies, selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// PrudentGreedy.
    Main,
    /// PrudentGreedy with the divisibility condition in Step (3).
    Div,
    /// Always the largest pending packet, no phase logic.
    Greedy,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Main, PolicyKind::Div, PolicyKind::Greedy];
}

impl Policy for PolicyKind {
    fn name(&self) -> &str {
        match self {
            PolicyKind::Main => "main",
            PolicyKind::Div => "div",
            PolicyKind::Greedy => "greedy",
        }
    }

    fn decide(&self, ctx: &DecisionContext<'_>) -> Decision {
        match self {
            PolicyKind::Main => main_select(ctx),
            PolicyKind::Div => div_select(ctx),
            PolicyKind::Greedy => greedy_baseline_select(ctx),
        }
    }

    fn catalog_warning(&self, catalog: &SizeCatalog) -> Option<String> {
        (*self == PolicyKind::Div && !catalog.is_divisible())
            .then(|| "div policy run on a non-divisible catalog".to_string())
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" => Ok(PolicyKind::Main),
            "div" => Ok(PolicyKind::Div),
            "greedy" => Ok(PolicyKind::Greedy),
            other => Err(format!("unknown policy `{other}` (expected main, div or greedy)")),
        }
    }
}
